//! Truncated multivariate power series in y and marks z_1..z_N with exact
//! rational coefficients.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};

/// Largest number of stored coefficients in one series.
pub const SERIES_CAP: usize = 10_000_000;

/// Degree caps: y^a z^e is stored only when a ≤ y, e_i ≤ marks[i] and, if
/// set, Σ e_i ≤ total_marks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesCaps {
    pub y: usize,
    pub marks: Vec<usize>,
    pub total_marks: Option<usize>,
}

impl SeriesCaps {
    pub fn univariate(y: usize) -> Self {
        SeriesCaps {
            y,
            marks: Vec::new(),
            total_marks: None,
        }
    }

    fn len(&self) -> Option<usize> {
        self.marks
            .iter()
            .try_fold(self.y + 1, |acc, &c| acc.checked_mul(c + 1))
    }

    fn admits(&self, y: usize, marks: &[usize]) -> bool {
        y <= self.y
            && marks.len() == self.marks.len()
            && marks.iter().zip(&self.marks).all(|(e, c)| e <= c)
            && self
                .total_marks
                .is_none_or(|t| marks.iter().sum::<usize>() <= t)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    caps: SeriesCaps,
    /// Index y + (cap_y + 1)(e_1 + (cap_1 + 1)(e_2 + ...)).
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .terms()
            .map(|(y, m, c)| format!("{c}·y^{y}·z^{m:?}"))
            .collect();
        write!(f, "[{}]", terms.join(" + "))
    }
}

impl TruncatedSeries {
    pub fn zero(caps: &SeriesCaps) -> Result<Self> {
        let len = caps.len().filter(|&l| l <= SERIES_CAP).ok_or_else(|| {
            Error::ResourceCap(format!(
                "series with caps {caps:?} exceeds {SERIES_CAP} terms"
            ))
        })?;
        Ok(TruncatedSeries {
            caps: caps.clone(),
            coeffs: vec![BigRational::zero(); len],
        })
    }

    pub fn constant(caps: &SeriesCaps, c: BigRational) -> Result<Self> {
        let mut s = Self::zero(caps)?;
        s.coeffs[0] = c;
        Ok(s)
    }

    pub fn one(caps: &SeriesCaps) -> Result<Self> {
        Self::constant(caps, BigRational::one())
    }

    /// c·y^y·Π z_i^{marks_i}; the zero series when the term exceeds the caps.
    pub fn monomial(caps: &SeriesCaps, c: BigRational, y: usize, marks: &[usize]) -> Result<Self> {
        if marks.len() != caps.marks.len() {
            return invalid("mark count differs from the caps");
        }
        let mut s = Self::zero(caps)?;
        if caps.admits(y, marks) {
            let i = s.index(y, marks);
            s.coeffs[i] = c;
        }
        Ok(s)
    }

    pub fn caps(&self) -> &SeriesCaps {
        &self.caps
    }

    fn index(&self, y: usize, marks: &[usize]) -> usize {
        let mut idx = 0;
        for (e, c) in marks.iter().zip(&self.caps.marks).rev() {
            idx = idx * (c + 1) + e;
        }
        idx * (self.caps.y + 1) + y
    }

    fn decode(&self, mut idx: usize) -> (usize, Vec<usize>) {
        let y = idx % (self.caps.y + 1);
        idx /= self.caps.y + 1;
        let marks = self
            .caps
            .marks
            .iter()
            .map(|c| {
                let e = idx % (c + 1);
                idx /= c + 1;
                e
            })
            .collect();
        (y, marks)
    }

    pub fn coeff(&self, y: usize, marks: &[usize]) -> BigRational {
        if !self.caps.admits(y, marks) {
            return BigRational::zero();
        }
        self.coeffs[self.index(y, marks)].clone()
    }

    /// Nonzero terms as (y-degree, mark exponents, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (usize, Vec<usize>, &BigRational)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let (y, m) = self.decode(i);
                (y, m, c)
            })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.caps != other.caps {
            return invalid("series caps differ");
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = -c.clone());
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Product with every term beyond the caps dropped.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let a: Vec<(usize, Vec<usize>, &BigRational)> = self.terms().collect();
        let b: Vec<(usize, Vec<usize>, &BigRational)> = other.terms().collect();
        let mut out = Self::zero(&self.caps)?;
        let mut marks = vec![0usize; self.caps.marks.len()];
        for (ya, ma, ca) in &a {
            for (yb, mb, cb) in &b {
                let y = ya + yb;
                if y > self.caps.y {
                    continue;
                }
                for (m, (x, z)) in marks.iter_mut().zip(ma.iter().zip(mb)) {
                    *m = x + z;
                }
                if !self.caps.admits(y, &marks) {
                    continue;
                }
                let i = out.index(y, &marks);
                out.coeffs[i] += *ca * *cb;
            }
        }
        Ok(out)
    }

    /// s^k by repeated squaring.
    pub fn integer_pow(&self, k: &BigUint) -> Result<Self> {
        let mut result = Self::one(&self.caps)?;
        let mut base = self.clone();
        let bits = k.bits();
        for i in 0..bits {
            if k.bit(i) {
                result = result.mul(&base)?;
            }
            if i + 1 < bits {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Largest power of a series without constant term that can survive the
    /// caps.
    fn nilpotency_bound(&self) -> usize {
        self.caps.y + self.caps.marks.iter().sum::<usize>()
    }

    /// (1 + u)^k = Σ_j C(k, j) u^j for any integer k, where `self` = 1 + u
    /// and u has no constant term (so the sum is finite under the caps).
    pub fn binomial_pow(&self, k: &BigInt) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return invalid("binomial power needs constant term 1");
        }
        let mut u = self.clone();
        u.coeffs[0] = BigRational::zero();
        let mut result = Self::one(&self.caps)?;
        let mut power = Self::one(&self.caps)?;
        let mut binom = BigRational::one();
        for j in 0..self.nilpotency_bound() {
            power = power.mul(&u)?;
            if power.is_zero() {
                break;
            }
            // C(k, j + 1) = C(k, j)·(k − j)/(j + 1)
            binom = binom * BigRational::from_integer(k - BigInt::from(j))
                / BigRational::from_integer(BigInt::from(j + 1));
            if binom.is_zero() {
                break;
            }
            result = result.add(&power.scale(&binom))?;
        }
        Ok(result)
    }

    /// 1/(1 − s) for s without constant term.
    pub fn geometric_inverse(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return invalid("geometric inverse needs a series without constant term");
        }
        let mut result = Self::one(&self.caps)?;
        let mut power = Self::one(&self.caps)?;
        for _ in 0..self.nilpotency_bound() {
            power = power.mul(self)?;
            if power.is_zero() {
                break;
            }
            result = result.add(&power)?;
        }
        Ok(result)
    }

    /// Multiplicative inverse of a series whose constant term is 1.
    pub fn inverse(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return invalid("inverse needs constant term 1");
        }
        self.neg().add(&Self::one(&self.caps)?)?.geometric_inverse()
    }

    /// exp(s) for s without constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return invalid("exp needs a series without constant term");
        }
        let mut result = Self::one(&self.caps)?;
        let mut term = Self::one(&self.caps)?;
        for j in 1..=self.nilpotency_bound() {
            term = term
                .mul(self)?
                .scale(&BigRational::new(BigInt::one(), BigInt::from(j)));
            if term.is_zero() {
                break;
            }
            result = result.add(&term)?;
        }
        Ok(result)
    }

    /// Substitutes y ↦ c·y.
    pub fn scale_y(&self, c: &BigRational) -> Self {
        let mut out = self.clone();
        let width = self.caps.y + 1;
        let powers: Vec<BigRational> = (0..width)
            .scan(BigRational::one(), |acc, _| {
                let cur = acc.clone();
                *acc *= c;
                Some(cur)
            })
            .collect();
        for (i, x) in out.coeffs.iter_mut().enumerate() {
            if !x.is_zero() {
                *x *= &powers[i % width];
            }
        }
        out
    }

    /// All marks set to 1: a univariate series in y.
    pub fn marks_to_one(&self) -> Result<Self> {
        let mut out = Self::zero(&SeriesCaps::univariate(self.caps.y))?;
        for (y, _, c) in self.terms() {
            out.coeffs[y] += c;
        }
        Ok(out)
    }

    /// Coefficients of y^n as a table over mark exponents.
    pub fn y_coefficient(&self, n: usize) -> Vec<(Vec<usize>, BigRational)> {
        self.terms()
            .filter(|(y, _, _)| *y == n)
            .map(|(_, m, c)| (m, c.clone()))
            .collect()
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn has_negative(&self) -> bool {
        self.coeffs.iter().any(|c| c.is_negative())
    }
}

/// n! as a big integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// C(n, k) for a big n ≥ 0 (or any integer n, generalized) and small k.
pub fn binomial_big(n: &BigInt, k: usize) -> BigInt {
    let mut num = BigInt::one();
    for j in 0..k {
        num *= n - BigInt::from(j);
    }
    let (q, r) = num.div_rem(&factorial(k));
    debug_assert!(r.is_zero());
    q
}
