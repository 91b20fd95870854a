//! Exact laws and joint moments of low-degree factor counts of a uniformly
//! random monic polynomial, the permutation cycle-count law, and the
//! moment-to-pointwise bound.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::pmf::{ratio_string, ExactPmf};
use crate::poly::count_irreducibles;
use crate::series::{binomial_big, factorial, SeriesCaps, TruncatedSeries};

/// Largest support Π_i (n/i + 1) of an exact joint law.
pub const LAW_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountModel {
    /// N_i: distinct irreducible factors of degree i.
    Distinct,
    /// N'_i: irreducible factors of degree i with multiplicity.
    WithMultiplicity,
}

/// π(i) for i = 1..=n over F_q, with the factor x removed from degree 1
/// when `exclude_x`.
fn marked_counts(q: &BigUint, n: usize, exclude_x: bool) -> Vec<BigInt> {
    (1..=n)
        .map(|i| {
            let c = BigInt::from(count_irreducibles(q, i as u64));
            if i == 1 && exclude_x {
                c - 1
            } else {
                c
            }
        })
        .collect()
}

/// Coefficients up to y^n of Π_i (1 − y^i)^{E_i} / (1 − qy).
fn unmarked_series(q: &BigInt, n: usize, exps: &[(usize, BigInt)]) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); n + 1];
    acc[0] = BigInt::one();
    for (i, e) in exps {
        let mut factor = vec![BigInt::zero(); n + 1];
        for b in 0..=n / i {
            let c = binomial_big(e, b);
            if c.is_zero() {
                break;
            }
            factor[b * i] = if b % 2 == 0 { c } else { -c };
        }
        let mut next = vec![BigInt::zero(); n + 1];
        for (a, x) in acc.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (b, y) in factor
                .iter()
                .enumerate()
                .take(n + 1 - a)
                .filter(|(_, y)| !y.is_zero())
            {
                next[a + b] += x * y;
            }
        }
        acc = next;
    }
    let mut running = BigInt::zero();
    for c in acc.iter_mut() {
        running = running * q + &*c;
        *c = running.clone();
    }
    acc
}

/// Exact law of (N_i)_{i≤N} (or N'_i) for a uniform monic polynomial of degree
/// n over F_q, by extracting [y^n z^a] from the factor generating function.
///
/// With multiplicity, [z^a] of Π_i ((1 − y^i)/(1 − z_i y^i))^{π_i}/(1 − qy) is
/// Π_i C(π_i + a_i − 1, a_i) y^{i a_i} times the unmarked series. For distinct
/// factors, [z^a] of Π_i (1 − y^i + z_i y^i)^{π_i}/(1 − qy) is
/// Π_i C(π_i, a_i) y^{i a_i} (1 − y^i)^{π_i − a_i}/(1 − qy).
pub fn uniform_joint_law(
    q: &BigUint,
    n: usize,
    max_degree: usize,
    model: CountModel,
    exclude_x: bool,
) -> Result<ExactPmf<Vec<u32>>> {
    if *q < BigUint::from(2u32) {
        return invalid("field size must be at least 2");
    }
    let big_n = max_degree.min(n);
    let support: u64 = (1..=big_n)
        .map(|i| (n / i + 1) as u64)
        .try_fold(1u64, |a, b| a.checked_mul(b))
        .unwrap_or(u64::MAX);
    if support > LAW_CAP {
        return Err(Error::ResourceCap(format!(
            "joint law support {support} exceeds {LAW_CAP}"
        )));
    }
    let qi = BigInt::from(q.clone());
    let pis = marked_counts(q, big_n, exclude_x);
    let base_exps: Vec<(usize, BigInt)> = pis
        .iter()
        .enumerate()
        .map(|(i, p)| (i + 1, p.clone()))
        .collect();
    let shared = match model {
        CountModel::WithMultiplicity => Some(unmarked_series(&qi, n, &base_exps)),
        CountModel::Distinct => None,
    };
    let mut weights: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    let mut a = vec![0usize; big_n];
    loop {
        let used: usize = a.iter().enumerate().map(|(i, &x)| (i + 1) * x).sum();
        if used <= n {
            let m = n - used;
            let mut w = BigInt::one();
            for (x, p) in a.iter().zip(&pis) {
                w *= match model {
                    CountModel::WithMultiplicity => binomial_big(&(p + BigInt::from(*x) - 1), *x),
                    CountModel::Distinct => binomial_big(p, *x),
                };
                if w.is_zero() {
                    break;
                }
            }
            if !w.is_zero() {
                let tail = match &shared {
                    Some(s) => s[m].clone(),
                    None => {
                        let exps: Vec<(usize, BigInt)> = base_exps
                            .iter()
                            .zip(&a)
                            .map(|((i, p), &x)| (*i, p - BigInt::from(x)))
                            .collect();
                        unmarked_series(&qi, m, &exps)[m].clone()
                    }
                };
                w *= tail;
                if w.is_negative() {
                    return Err(Error::Verification(format!("negative weight at {a:?}")));
                }
                if !w.is_zero() {
                    let key = a
                        .iter()
                        .map(|&x| x as u32)
                        .chain(std::iter::repeat_n(0, max_degree - big_n))
                        .collect();
                    weights.insert(key, w.to_biguint().expect("nonnegative"));
                }
            }
        }
        // Odometer over a_i ∈ 0..=n/i.
        let mut i = 0;
        loop {
            if i == big_n {
                let total: BigUint = weights.values().sum();
                if total != q.pow(n as u32) {
                    return Err(Error::Verification(format!(
                        "law mass {total} differs from q^n"
                    )));
                }
                if big_n == 0 {
                    return Ok(ExactPmf::point_mass(vec![0; max_degree]));
                }
                return ExactPmf::from_weights(weights);
            }
            a[i] += 1;
            if a[i] <= n / (i + 1) {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// The factor generating function with every mark z_i replaced by the given
/// mark series, scaled by y ↦ y/q. Degree-i factors for i ≤ N carry the marks;
/// all others are folded into 1/(1 − y).
fn marked_generating_function(
    q: &BigUint,
    n: usize,
    marks: &[TruncatedSeries],
    caps: &SeriesCaps,
    model: CountModel,
    exclude_x: bool,
) -> Result<TruncatedSeries> {
    let pis = marked_counts(q, marks.len(), exclude_x);
    let one = TruncatedSeries::one(caps)?;
    let qr = BigRational::from_integer(BigInt::from(q.clone()));
    let mut total =
        TruncatedSeries::monomial(caps, qr, 1, &vec![0; caps.marks.len()])?.geometric_inverse()?;
    for (i, (z, pi)) in marks.iter().zip(&pis).enumerate() {
        let deg = i + 1;
        if deg > n {
            break;
        }
        let yi =
            TruncatedSeries::monomial(caps, BigRational::one(), deg, &vec![0; caps.marks.len()])?;
        let zyi = z.mul(&yi)?;
        let base = match model {
            // 1 − y^i + z y^i
            CountModel::Distinct => one.sub(&yi)?.add(&zyi)?,
            // (1 − y^i)/(1 − z y^i)
            CountModel::WithMultiplicity => one.sub(&yi)?.mul(&zyi.geometric_inverse()?)?,
        };
        total = total.mul(&base.binomial_pow(pi)?)?;
    }
    let inv_q = BigRational::new(BigInt::one(), BigInt::from(q.clone()));
    Ok(total.scale_y(&inv_q))
}

/// Π_{i ≤ cap} (1 + y^i/(1 − y^i))^{π(i)} (distinct) or Π (1 − y^i)^{−π(i)}
/// (with multiplicity), all marks set to 1, with y ↦ y/q. Every degree is
/// taken from its own factor, so this equals 1/(1 − y) only if the factor
/// generating function is right.
pub fn collapsed_generating_series(
    q: &BigUint,
    y_cap: usize,
    model: CountModel,
) -> Result<TruncatedSeries> {
    let caps = SeriesCaps::univariate(y_cap);
    let one = TruncatedSeries::one(&caps)?;
    let mut total = one.clone();
    for i in 1..=y_cap {
        let pi = BigInt::from(count_irreducibles(q, i as u64));
        let yi = TruncatedSeries::monomial(&caps, BigRational::one(), i, &[])?;
        let geo = yi.geometric_inverse()?;
        let base = match model {
            CountModel::Distinct => one.add(&yi.mul(&geo)?)?,
            CountModel::WithMultiplicity => geo,
        };
        total = total.mul(&base.binomial_pow(&pi)?)?;
    }
    Ok(total.scale_y(&BigRational::new(BigInt::one(), BigInt::from(q.clone()))))
}

/// The marked generating function D(y/q; z) of the uniform model as a
/// truncated series in y and z_1..z_N (z_i exponents capped at n/i).
pub fn uniform_generating_series(
    q: &BigUint,
    n: usize,
    max_degree: usize,
    model: CountModel,
    exclude_x: bool,
) -> Result<TruncatedSeries> {
    let big_n = max_degree.min(n);
    let caps = SeriesCaps {
        y: n,
        marks: (1..=big_n).map(|i| n / i).collect(),
        total_marks: None,
    };
    let marks: Vec<TruncatedSeries> = (0..big_n)
        .map(|i| {
            let mut e = vec![0; big_n];
            e[i] = 1;
            TruncatedSeries::monomial(&caps, BigRational::one(), 0, &e)
        })
        .collect::<Result<_>>()?;
    marked_generating_function(q, n, &marks, &caps, model, exclude_x)
}

/// The same law as [`uniform_joint_law`], read from the coefficient of y^n of
/// the multivariate series.
pub fn uniform_joint_law_series(
    q: &BigUint,
    n: usize,
    max_degree: usize,
    model: CountModel,
    exclude_x: bool,
) -> Result<ExactPmf<Vec<u32>>> {
    let s = uniform_generating_series(q, n, max_degree, model, exclude_x)?;
    let table: BTreeMap<Vec<u32>, BigRational> = s
        .y_coefficient(n)
        .into_iter()
        .map(|(m, c)| {
            let mut key: Vec<u32> = m.iter().map(|&x| x as u32).collect();
            key.resize(max_degree, 0);
            (key, c)
        })
        .collect();
    if table.is_empty() {
        return Ok(ExactPmf::point_mass(vec![0; max_degree]));
    }
    ExactPmf::new(table)
}

/// E[Π_i N_i^{h_i}] for the uniform model, as Π h_i! [Π t_i^{h_i}][y^n]
/// D(y/q; e^{t_1}, …, e^{t_N}).
pub fn uniform_joint_moment(
    q: &BigUint,
    n: usize,
    exponents: &[u32],
    model: CountModel,
    exclude_x: bool,
) -> Result<BigRational> {
    if *q < BigUint::from(2u32) {
        return invalid("field size must be at least 2");
    }
    let big_n = exponents.len();
    if exponents.iter().all(|&h| h == 0) {
        return Ok(BigRational::one());
    }
    let caps = SeriesCaps {
        y: n,
        marks: exponents.iter().map(|&h| h as usize).collect(),
        total_marks: None,
    };
    let marks: Vec<TruncatedSeries> = (0..big_n)
        .map(|i| {
            let mut e = vec![0; big_n];
            e[i] = 1;
            TruncatedSeries::monomial(&caps, BigRational::one(), 0, &e)?.exp()
        })
        .collect::<Result<_>>()?;
    let s = marked_generating_function(q, n, &marks, &caps, model, exclude_x)?;
    let h: Vec<usize> = exponents.iter().map(|&h| h as usize).collect();
    let scale: BigInt = h.iter().map(|&k| factorial(k)).product();
    Ok(s.coeff(n, &h) * BigRational::from_integer(scale))
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub q: String,
    pub n: usize,
    pub exponents: Vec<u32>,
    pub model: CountModel,
    pub exclude_x: bool,
    /// "num/den"
    pub moment: String,
    pub moment_f64: f64,
}

pub fn moment_report(
    q: &BigUint,
    n: usize,
    exponents: &[u32],
    model: CountModel,
    exclude_x: bool,
) -> Result<MomentReport> {
    let m = uniform_joint_moment(q, n, exponents, model, exclude_x)?;
    Ok(MomentReport {
        q: q.to_string(),
        n,
        exponents: exponents.to_vec(),
        model,
        exclude_x,
        moment: ratio_string(&m),
        moment_f64: crate::pmf::ratio_to_f64(&m),
    })
}

/// Exact law of the cycle counts (C_i)_{i≤N} of a uniform permutation of n:
/// P[C = a] = Π_i i^{−a_i}/a_i! · [y^m] exp(−Σ_{i≤N} y^i/i)/(1 − y) with
/// m = n − Σ i a_i.
pub fn permutation_cycle_law(n: usize, max_degree: usize) -> Result<ExactPmf<Vec<u32>>> {
    let big_n = max_degree.min(n);
    let support: u64 = (1..=big_n)
        .map(|i| (n / i + 1) as u64)
        .try_fold(1u64, |a, b| a.checked_mul(b))
        .unwrap_or(u64::MAX);
    if support > LAW_CAP {
        return Err(Error::ResourceCap(format!(
            "joint law support {support} exceeds {LAW_CAP}"
        )));
    }
    let caps = SeriesCaps::univariate(n);
    let mut s = TruncatedSeries::zero(&caps)?;
    for i in 1..=big_n {
        s = s.sub(&TruncatedSeries::monomial(
            &caps,
            BigRational::new(BigInt::one(), BigInt::from(i)),
            i,
            &[],
        )?)?;
    }
    let y = TruncatedSeries::monomial(&caps, BigRational::one(), 1, &[])?;
    let tail = s.exp()?.mul(&y.geometric_inverse()?)?;
    let mut table = BTreeMap::new();
    let mut a = vec![0usize; big_n];
    loop {
        let used: usize = a.iter().enumerate().map(|(i, &x)| (i + 1) * x).sum();
        if used <= n {
            let mut w = tail.coeff(n - used, &[]);
            for (i, &x) in a.iter().enumerate() {
                w /= BigRational::from_integer(BigInt::from(i + 1).pow(x as u32) * factorial(x));
            }
            if !w.is_zero() {
                let key = a
                    .iter()
                    .map(|&x| x as u32)
                    .chain(std::iter::repeat_n(0, max_degree - big_n))
                    .collect();
                table.insert(key, w);
            }
        }
        let mut i = 0;
        loop {
            if i == big_n {
                if big_n == 0 {
                    return Ok(ExactPmf::point_mass(vec![0; max_degree]));
                }
                return ExactPmf::new(table);
            }
            a[i] += 1;
            if a[i] <= n / (i + 1) {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// (H/(log H − log log(N+1)))^H, rounded up; requires H > log(N + 1).
pub fn poisson_moment_bound(h: u32, max_degree: usize) -> Result<f64> {
    let hf = h as f64;
    let l = ((max_degree + 1) as f64).ln();
    if h == 0 || hf <= l {
        return invalid(format!("H = {h} must exceed log(N + 1) = {l:.4}"));
    }
    let denom = hf.ln() - l.ln();
    let base = hf / denom;
    let v = base.powi(h as i32);
    Ok(up(v, 4 + 2 * h as usize))
}

fn up(mut x: f64, steps: usize) -> f64 {
    for _ in 0..steps {
        x = x.next_up();
    }
    x
}

/// N^{H−1} e^π ε + 2Cπ^H/H!, rounded up.
pub fn tv_from_moments_bound(max_degree: usize, h: u32, epsilon: f64, c: f64) -> f64 {
    let nf = max_degree as f64;
    let first = nf.powi(h as i32 - 1) * PI.exp() * epsilon;
    let fact: f64 = (1..=h).map(|k| k as f64).product();
    let second = 2.0 * c * PI.powi(h as i32) / fact;
    up(up(first, 8) + up(second, 8 + h as usize), 2)
}

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseReport {
    pub h: u32,
    pub dimension: usize,
    /// sup over Σk_i ≤ H of the mixed-moment difference, "num/den".
    pub epsilon: String,
    pub epsilon_f64: f64,
    /// max(E(Σ|Z_i|)^H, E(Σ|Z'_i|)^H), and the closed-form tail bound when it applies.
    pub exact_tail: f64,
    pub tail_bound: Option<f64>,
    pub c: f64,
    pub bound: f64,
    pub max_gap: f64,
    pub worst_point: Vec<u32>,
    pub pass: bool,
}

fn exponent_vectors(dim: usize, h: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for v in &out {
            let used: u32 = v.iter().sum();
            for k in 0..=h - used {
                let mut w = v.clone();
                w.push(k);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Checks |P[Z = a] − P[Z' = a]| ≤ N^{H−1}e^π ε + 2Cπ^H/H! at every point
/// of the union support, with ε computed exactly from the two laws and C the
/// larger of the exact H-th moments of Σ Z_i and Σ Z'_i (raised to the
/// closed-form tail bound when `use_tail_bound` and H > log(N + 1)).
pub fn pointwise_check(
    a: &ExactPmf<Vec<u32>>,
    b: &ExactPmf<Vec<u32>>,
    h: u32,
    use_tail_bound: bool,
) -> Result<PointwiseReport> {
    if h == 0 {
        return invalid("H must be at least 1");
    }
    let dim = a
        .support()
        .chain(b.support())
        .map(|k| k.len())
        .max()
        .unwrap_or(0);
    if a.support().chain(b.support()).any(|k| k.len() != dim) {
        return invalid("points of different dimension");
    }
    let mut eps = BigRational::zero();
    for k in exponent_vectors(dim, h) {
        let d = (a.moment(&k) - b.moment(&k)).abs();
        if d > eps {
            eps = d;
        }
    }
    let tail = |p: &ExactPmf<Vec<u32>>| {
        p.expect(|v| {
            BigRational::from_integer(BigInt::from(v.iter().map(|&x| x as u64).sum::<u64>()).pow(h))
        })
    };
    let exact_tail = crate::pmf::ratio_to_f64(&std::cmp::max(tail(a), tail(b)));
    let tail_bound = if use_tail_bound {
        poisson_moment_bound(h, dim).ok()
    } else {
        None
    };
    let c = up(exact_tail, 2).max(tail_bound.unwrap_or(0.0));
    let eps_f = crate::pmf::ratio_to_f64(&eps);
    let eps_up = up(eps_f, 2);
    let bound = tv_from_moments_bound(dim, h, eps_up, c);
    let bound_exact = BigRational::from_float(bound).expect("finite bound");
    let mut max_gap = BigRational::zero();
    let mut worst = Vec::new();
    let mut pass = true;
    let keys: std::collections::BTreeSet<&Vec<u32>> = a.support().chain(b.support()).collect();
    for k in keys {
        let gap = (a.prob(k) - b.prob(k)).abs();
        if gap > bound_exact {
            pass = false;
        }
        if gap > max_gap || worst.is_empty() {
            max_gap = gap;
            worst = k.clone();
        }
    }
    Ok(PointwiseReport {
        h,
        dimension: dim,
        epsilon: ratio_string(&eps),
        epsilon_f64: eps_f,
        exact_tail,
        tail_bound,
        c,
        bound,
        max_gap: max_gap.to_f64().unwrap_or(f64::NAN),
        worst_point: worst,
        pass,
    })
}
