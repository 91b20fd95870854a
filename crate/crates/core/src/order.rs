//! Mahler measure of integer polynomials, cyclotomic detection, and the
//! high/low multiplicative-order classification with low-order counts.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::models::CoefficientDistribution;
use crate::ntheory::{divisors, euler_phi, factor, pow_mod};
use crate::pmf::ratio_to_f64;

/// Largest degree accepted by [`mahler_measure`].
pub const MAX_MAHLER_DEGREE: usize = 64;
/// Root-finding attempts: the first run plus restarts.
const ATTEMPTS: usize = 4;
/// Threshold below which low-order counts loop over candidate orders directly.
const DIRECT_COUNT_LIMIT: u64 = 10_000_000;

/// A nonzero polynomial with integer coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "Z[x]({})", c.join(","))
    }
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return invalid("the zero polynomial is not allowed");
        }
        Ok(IntPolynomial { coeffs })
    }

    pub fn from_i64s(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonzero polynomial")
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial { coeffs: out }
    }

    /// sqrt(Σ c_i²), an upper bound for the Mahler measure.
    pub fn l2_norm(&self) -> f64 {
        let s: BigInt = self.coeffs.iter().map(|c| c * c).sum();
        ratio_to_f64(&BigRational::from_integer(s)).sqrt()
    }

    /// Whether f is ±1 times a product of distinct cyclotomic polynomials Φ_k,
    /// φ(k) ≤ deg f, i.e. f divides x^L − 1 for L the lcm of those k.
    /// Decided by exact division.
    pub fn is_cyclotomic_like(&self) -> bool {
        let d = self.degree();
        if d == 0 || !self.leading().abs().is_one() || !self.coeffs[0].abs().is_one() {
            return false;
        }
        let kmax = 2 * d * d + 2;
        let mut phis: Vec<Vec<BigInt>> = Vec::with_capacity(kmax + 1);
        phis.push(Vec::new());
        let mut rest = self.coeffs.clone();
        for k in 1..=kmax {
            let mut phi = vec![BigInt::zero(); k + 1];
            phi[0] = BigInt::from(-1);
            phi[k] = BigInt::one();
            for j in 1..k {
                if k % j == 0 {
                    phi = exact_quotient(&phi, &phis[j]).expect("Φ_j divides x^k − 1");
                }
            }
            if phi.len() <= rest.len() && euler_phi(k as u64) <= d as u64 {
                if let Some(q) = exact_quotient(&rest, &phi) {
                    rest = q;
                    if rest.len() == 1 {
                        return true;
                    }
                }
            }
            phis.push(phi);
        }
        false
    }
}

/// a / b in Z[x] for monic b, when the remainder vanishes.
fn exact_quotient(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let db = b.len() - 1;
    if a.len() < b.len() {
        return None;
    }
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db].clone();
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[i + j] -= &c * bj;
            }
        }
        q[i] = c;
    }
    r[..db].iter().all(|c| c.is_zero()).then_some(q)
}

/// Dense polynomials over Q, lowest degree first, used for the squarefree
/// split before root finding.
mod qpoly {
    use num_rational::BigRational;
    use num_traits::Zero;

    pub type Q = Vec<BigRational>;

    pub fn trim(mut a: Q) -> Q {
        while a.last().is_some_and(|c| c.is_zero()) {
            a.pop();
        }
        a
    }

    pub fn monic(a: Q) -> Q {
        let lead = a.last().expect("nonzero").clone();
        a.into_iter().map(|c| c / &lead).collect()
    }

    pub fn derivative(a: &Q) -> Q {
        trim(
            a.iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn divrem(a: &Q, b: &Q) -> (Q, Q) {
        let mut r = a.clone();
        let db = b.len() - 1;
        if r.len() < b.len() {
            return (Vec::new(), trim(r));
        }
        let mut q = vec![BigRational::zero(); r.len() - db];
        let lead = b.last().expect("nonzero divisor");
        for i in (0..q.len()).rev() {
            let c = &r[i + db] / lead;
            if !c.is_zero() {
                for (j, bj) in b.iter().enumerate() {
                    r[i + j] -= &c * bj;
                }
            }
            q[i] = c;
        }
        r.truncate(db);
        (trim(q), trim(r))
    }

    pub fn gcd(a: &Q, b: &Q) -> Q {
        let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
        while !b.is_empty() {
            let (_, r) = divrem(&a, &b);
            a = b;
            b = r;
        }
        if a.is_empty() {
            a
        } else {
            monic(a)
        }
    }

    pub fn sub(a: &Q, b: &Q) -> Q {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    a.get(i).cloned().unwrap_or_else(BigRational::zero)
                        - b.get(i).cloned().unwrap_or_else(BigRational::zero)
                })
                .collect(),
        )
    }

    /// Yun's squarefree decomposition of a monic polynomial: (g_i, i) with
    /// a = Π g_i^i, each g_i monic and squarefree.
    pub fn squarefree(a: &Q) -> Vec<(Q, usize)> {
        let mut out = Vec::new();
        let da = derivative(a);
        let b = gcd(a, &da);
        let mut c = divrem(a, &b).0;
        let mut d = sub(&divrem(&da, &b).0, &derivative(&c));
        let mut i = 1;
        while c.len() > 1 {
            let g = gcd(&c, &d);
            c = divrem(&c, &g).0;
            if g.len() > 1 {
                out.push((g.clone(), i));
            }
            d = sub(&divrem(&d, &g).0, &derivative(&c));
            i += 1;
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MahlerMeasure {
    pub value: f64,
    /// Half-width of the interval implied by the root inclusion radii.
    pub error_bound: f64,
    /// sqrt(Σ c_i²)
    pub l2_bound: f64,
    pub within_l2_bound: bool,
    pub restarts: usize,
}

/// |c_d| Π max(1, |root|), from roots of the squarefree parts found by
/// Aberth iteration; accurate to `tol`·M or an error is returned.
pub fn mahler_measure(f: &IntPolynomial, tol: f64) -> Result<MahlerMeasure> {
    let d = f.degree();
    if d > MAX_MAHLER_DEGREE {
        return invalid(format!("degree {d} exceeds {MAX_MAHLER_DEGREE}"));
    }
    let lead = ratio_to_f64(&BigRational::from_integer(f.leading().abs()));
    let l2 = f.l2_norm();
    if d == 0 {
        return Ok(MahlerMeasure {
            value: lead,
            error_bound: 0.0,
            l2_bound: l2,
            within_l2_bound: lead <= l2,
            restarts: 0,
        });
    }
    let q: qpoly::Q = f
        .coeffs
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let parts = qpoly::squarefree(&qpoly::monic(q));
    let mut log_lo = 0.0f64;
    let mut log_hi = 0.0f64;
    let mut restarts = 0usize;
    for (g, mult) in &parts {
        if g.len() <= 1 {
            continue;
        }
        let coeffs: Vec<f64> = g.iter().map(ratio_to_f64).collect();
        let mut done = None;
        for attempt in 0..ATTEMPTS {
            if let Some(res) = aberth(&coeffs, attempt) {
                let (lo, hi) = measure_interval(&coeffs, &res);
                if (hi - lo).exp_m1() * 0.5 <= tol {
                    done = Some((lo, hi));
                    break;
                }
            }
            restarts += 1;
        }
        let (lo, hi) = done.ok_or_else(|| {
            Error::Numerical(format!(
                "root finding did not reach tolerance {tol} after {ATTEMPTS} attempts"
            ))
        })?;
        log_lo += *mult as f64 * lo;
        log_hi += *mult as f64 * hi;
    }
    let lo = lead * log_lo.exp();
    let hi = lead * log_hi.exp();
    let value = 0.5 * (lo + hi);
    Ok(MahlerMeasure {
        value,
        error_bound: 0.5 * (hi - lo),
        l2_bound: l2,
        within_l2_bound: lo <= l2 * (1.0 + 4.0 * f64::EPSILON),
        restarts: restarts.min(ATTEMPTS - 1),
    })
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    let mut mag = 0.0f64;
    let r = z.norm();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        mag = mag * r + c.abs();
    }
    (p, dp, mag)
}

/// Simultaneous root iteration from a circle of Cauchy-bound radius.
/// Later attempts rotate the start and allow more iterations.
fn aberth(coeffs: &[f64], attempt: usize) -> Option<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let cauchy = 1.0
        + coeffs[..d]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let offset = 0.4 + 0.7 * attempt as f64;
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            Complex64::from_polar(
                cauchy,
                2.0 * std::f64::consts::PI * k as f64 / d as f64 + offset,
            )
        })
        .collect();
    let max_iter = 500 << attempt;
    for _ in 0..max_iter {
        let mut moved = 0.0f64;
        for i in 0..d {
            let (p, dp, _) = horner(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                return None;
            }
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1.0));
        }
        if moved <= 4.0 * f64::EPSILON {
            break;
        }
    }
    Some(z)
}

/// Bounds on log Π max(1, |root|) from inclusion disks of radius
/// d·(|p(z)| + rounding)/|p'(z)| around each approximation.
fn measure_interval(coeffs: &[f64], roots: &[Complex64]) -> (f64, f64) {
    let d = roots.len() as f64;
    let lead = coeffs[coeffs.len() - 1].abs();
    let mut lo = 0.0;
    let mut hi = 0.0;
    for z in roots {
        let (p, _, mag) = horner(coeffs, *z);
        // Derivative of the monic-normalized product form, robust for clusters.
        let dp: Complex64 = roots
            .iter()
            .filter(|w| *w != z)
            .fold(Complex64::new(lead, 0.0), |acc, w| acc * (z - w));
        let err = p.norm() + 2.0 * d * f64::EPSILON * mag;
        let rad = (d * err / dp.norm()).min(z.norm() + 1.0);
        let r = z.norm();
        lo += (r - rad).max(1.0).ln();
        hi += (r + rad).max(1.0).ln();
    }
    (lo, hi)
}

/// 1 + c (log log d / log d)^3 for d ≥ 3.
pub fn dobrowolski_floor(d: usize, c: f64) -> Result<f64> {
    if d < 3 {
        return invalid(format!("degree {d} below 3"));
    }
    let l = (d as f64).ln();
    Ok(1.0 + c * (l.ln() / l).powi(3))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderThresholdParams {
    /// Number of roots H.
    pub h: u32,
    /// Largest derivative order K.
    pub k: u32,
    /// Extension degree e.
    pub e: u32,
    pub p: u64,
    pub c_order: f64,
}

impl OrderThresholdParams {
    pub fn new(h: u32, k: u32, e: u32, p: u64, c_order: f64) -> Result<Self> {
        if h == 0 || e == 0 || p < 2 {
            return invalid("H, e must be at least 1 and p at least 2");
        }
        if c_order.is_nan() || c_order <= 0.0 {
            return invalid("the order constant must be positive");
        }
        Ok(OrderThresholdParams {
            h,
            k,
            e,
            p,
            c_order,
        })
    }

    pub fn with_e(&self, e: u32) -> Self {
        OrderThresholdParams { e, ..*self }
    }
}

/// m_e = C·H(K+1)e·log p · log(H(K+1)e log p).
pub fn order_threshold(params: &OrderThresholdParams) -> f64 {
    let base = params.h as f64 * (params.k as f64 + 1.0) * params.e as f64 * (params.p as f64).ln();
    params.c_order * base * base.ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderClass {
    High,
    Low,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub element: String,
    pub order: u64,
    pub threshold: f64,
    pub class: OrderClass,
}

/// Low iff the multiplicative order is below m_e.
pub fn classify_element(
    ctx: &FieldCtx,
    a: &FieldElement,
    params: &OrderThresholdParams,
) -> Result<Classification> {
    if params.p != ctx.p() || params.e as usize != ctx.degree() {
        return invalid(format!(
            "parameters (p={}, e={}) do not match {ctx:?}",
            params.p, params.e
        ));
    }
    let order = ctx.mult_order(a)?;
    let threshold = order_threshold(params);
    Ok(Classification {
        element: a.to_string(),
        order,
        threshold,
        class: if (order as f64) < threshold {
            OrderClass::Low
        } else {
            OrderClass::High
        },
    })
}

/// Number of nonzero elements of F_{p^e} with multiplicative order ≤ m,
/// i.e. Σ φ(d) over d | p^e − 1 with d ≤ m.
pub fn count_order_at_most(p: u64, e: u32, m: u64) -> Result<u128> {
    if m == 0 {
        return Ok(0);
    }
    let q = (p as u128).checked_pow(e);
    if m <= DIRECT_COUNT_LIMIT {
        let mut total = 0u128;
        for d in 1..=m {
            if q.is_some_and(|q| d as u128 > q - 1) {
                break;
            }
            if d == 1 || pow_mod(p % d, e as u64, d) == 1 {
                total += euler_phi(d) as u128;
            }
        }
        return Ok(total);
    }
    let q = q
        .filter(|&q| q - 1 <= u64::MAX as u128)
        .ok_or_else(|| Error::ResourceCap(format!("{p}^{e} − 1 exceeds 64 bits")))?;
    let divs = divisors(&factor((q - 1) as u64));
    Ok(divs
        .iter()
        .filter(|&&d| d <= m)
        .map(|&d| euler_phi(d) as u128)
        .sum())
}

/// [`count_order_at_most`] in the field of `ctx`, checked against the m² bound.
pub fn count_low_order(ctx: &FieldCtx, m: u64) -> Result<u128> {
    let c = count_order_at_most(ctx.p(), ctx.degree() as u32, m)?;
    if c > (m as u128) * (m as u128) {
        return Err(Error::Verification(format!(
            "{c} elements of order ≤ {m} exceed m²"
        )));
    }
    Ok(c)
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionBoundTerm {
    pub i: usize,
    pub threshold: f64,
    /// Exact number of elements of order below the threshold, when computed.
    pub low_count: Option<u128>,
    pub count_used: f64,
    pub halasz_factor: f64,
    pub term: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionBound {
    pub n: usize,
    pub max_degree: usize,
    pub eta: f64,
    pub c_halasz: f64,
    pub terms: Vec<UnionBoundTerm>,
    pub total: f64,
}

/// Σ_{i ≤ N} L_i (1/p + C η^{−1/2} (n/i)^{−1/2})^i, where L_i is the number of
/// elements of F_{p^i} of order below m_i (m_i² when the exact count is out
/// of reach).
pub fn low_order_union_bound(
    mu: &CoefficientDistribution,
    n: usize,
    max_degree: usize,
    params: &OrderThresholdParams,
    c_halasz: f64,
) -> Result<UnionBound> {
    if max_degree * 10 > n {
        return invalid(format!(
            "N = {max_degree} must be at most n/10 = {}",
            n / 10
        ));
    }
    let eta = mu.eta();
    if eta <= 0.0 {
        return invalid("η = 0: the bound diverges");
    }
    if mu.ctx().degree() != 1 {
        return invalid("the union bound is stated for coefficients in a prime field");
    }
    let p = mu.ctx().p();
    let mut terms = Vec::with_capacity(max_degree);
    for i in 1..=max_degree {
        let m = order_threshold(&params.with_e(i as u32));
        // Orders strictly below m.
        let below = if m <= 1.0 {
            0
        } else {
            (m.ceil() as u64).saturating_sub(1)
        };
        let low_count = count_order_at_most(p, i as u32, below).ok();
        let count_used = match low_count {
            Some(c) => c as f64,
            None => m * m,
        };
        let factor = 1.0 / p as f64 + c_halasz / eta.sqrt() / (n as f64 / i as f64).sqrt();
        let term = count_used * factor.powi(i as i32);
        terms.push(UnionBoundTerm {
            i,
            threshold: m,
            low_count,
            count_used,
            halasz_factor: factor,
            term,
        });
    }
    let total = terms.iter().map(|t| t.term).sum();
    Ok(UnionBound {
        n,
        max_degree,
        eta,
        c_halasz,
        terms,
        total,
    })
}
