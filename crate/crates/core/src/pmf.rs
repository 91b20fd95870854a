//! Finite probability mass functions with exact rational weights.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPmf<K: Ord> {
    table: BTreeMap<K, BigRational>,
}

impl<K: Ord + Clone> ExactPmf<K> {
    /// Zero entries are dropped; the masses must be nonnegative and sum to 1.
    pub fn new(table: BTreeMap<K, BigRational>) -> Result<Self> {
        let mut total = BigRational::zero();
        for v in table.values() {
            if v.is_negative() {
                return invalid("negative probability");
            }
            total += v;
        }
        if !total.is_one() {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(ExactPmf {
            table: table.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        })
    }

    /// Normalizes nonnegative integer weights.
    pub fn from_weights(weights: BTreeMap<K, BigUint>) -> Result<Self> {
        let total: BigUint = weights.values().sum();
        if total.is_zero() {
            return invalid("all weights are zero");
        }
        let total = BigInt::from(total);
        Ok(ExactPmf {
            table: weights
                .into_iter()
                .filter(|(_, w)| !w.is_zero())
                .map(|(k, w)| (k, BigRational::new(BigInt::from(w), total.clone())))
                .collect(),
        })
    }

    pub fn point_mass(k: K) -> Self {
        ExactPmf {
            table: BTreeMap::from([(k, BigRational::one())]),
        }
    }

    pub fn prob(&self, k: &K) -> BigRational {
        self.table.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &BigRational)> {
        self.table.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &K> {
        self.table.keys()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn table(&self) -> &BTreeMap<K, BigRational> {
        &self.table
    }

    /// Pushforward along `f`.
    pub fn map<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> L) -> ExactPmf<L> {
        let mut out: BTreeMap<L, BigRational> = BTreeMap::new();
        for (k, v) in &self.table {
            *out.entry(f(k)).or_insert_with(BigRational::zero) += v;
        }
        ExactPmf { table: out }
    }

    /// Conditional law given `keep`.
    pub fn condition(&self, mut keep: impl FnMut(&K) -> bool) -> Result<ExactPmf<K>> {
        let kept: BTreeMap<K, BigRational> = self
            .table
            .iter()
            .filter(|(k, _)| keep(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let mass: BigRational = kept.values().sum();
        if mass.is_zero() {
            return invalid("conditioning on an event of probability zero");
        }
        Ok(ExactPmf {
            table: kept.into_iter().map(|(k, v)| (k, v / &mass)).collect(),
        })
    }

    /// E[g(K)] for an exact-valued g.
    pub fn expect(&self, mut g: impl FnMut(&K) -> BigRational) -> BigRational {
        self.table.iter().map(|(k, v)| g(k) * v).sum()
    }

    pub fn to_f64(&self) -> BTreeMap<K, f64> {
        self.table
            .iter()
            .map(|(k, v)| (k.clone(), ratio_to_f64(v)))
            .collect()
    }
}

impl ExactPmf<Vec<u32>> {
    /// E[Π_i K_i^{h_i}].
    pub fn moment(&self, exponents: &[u32]) -> BigRational {
        self.expect(|k| {
            let mut acc = BigInt::one();
            for (i, &h) in exponents.iter().enumerate() {
                if h > 0 {
                    acc *= BigInt::from(k.get(i).copied().unwrap_or(0)).pow(h);
                }
            }
            BigRational::from_integer(acc)
        })
    }

    /// Law of the first `n` coordinates.
    pub fn truncate(&self, n: usize) -> ExactPmf<Vec<u32>> {
        self.map(|k| k[..n.min(k.len())].to_vec())
    }
}

/// ½ Σ |a(k) − b(k)| over the union of supports.
pub fn tv_exact<K: Ord + Clone>(a: &ExactPmf<K>, b: &ExactPmf<K>) -> BigRational {
    let mut total = BigRational::zero();
    for (k, v) in &a.table {
        total += (v - b.prob(k)).abs();
    }
    for (k, v) in &b.table {
        if !a.table.contains_key(k) {
            total += v;
        }
    }
    total / BigRational::from_integer(2.into())
}

/// Nearest-float conversion that survives numerators and denominators
/// beyond the f64 range.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
    // Scale to roughly 2^60 before dividing.
    let s = 60 - shift;
    let (num, den) = if s >= 0 {
        (r.numer() << (s as usize), r.denom().clone())
    } else {
        (r.numer().clone(), r.denom() << ((-s) as usize))
    };
    let q = (num / den).to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(-s as i32)
}

/// Formats as `num/den` (or an integer).
pub fn ratio_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.25`, exactly.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || crate::Error::InvalidInput(format!("cannot parse '{s}' as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let mag = int.abs() * &den + f;
        let num = if neg { -mag } else { mag };
        return Ok(BigRational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}
