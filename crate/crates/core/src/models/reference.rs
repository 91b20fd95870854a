//! Samplers for the limiting laws: binomial, negative binomial, Poisson,
//! geometric, Poisson–Dirichlet by stick breaking, and cycle counts of a
//! uniform random permutation.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Geometric, Poisson};

use crate::error::{invalid, Result};

/// Stick breaking stops once the unbroken remainder is below this.
pub const PD_RESIDUAL: f64 = 1.0 / (1u64 << 40) as f64;

fn check_prob(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        invalid(format!("probability {r} outside [0, 1]"))
    }
}

/// Binomial(m, r).
pub fn binomial<R: Rng + ?Sized>(m: u64, r: f64, rng: &mut R) -> Result<u64> {
    check_prob(r)?;
    let d = Binomial::new(m, r).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(d.sample(rng))
}

/// Negative binomial with P(k) = C(m+k−1, k) (1−r)^m r^k, the law of a sum of
/// m independent geometrics with ratio r. Sampled as a Gamma–Poisson mixture.
pub fn negative_binomial<R: Rng + ?Sized>(m: f64, r: f64, rng: &mut R) -> Result<u64> {
    check_prob(r)?;
    if !(m >= 0.0 && m.is_finite()) {
        return invalid(format!("shape {m} must be finite and nonnegative"));
    }
    if r >= 1.0 {
        return invalid("ratio 1 gives an improper law");
    }
    if m == 0.0 || r == 0.0 {
        return Ok(0);
    }
    let gamma =
        Gamma::new(m, r / (1.0 - r)).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    poisson(gamma.sample(rng), rng)
}

pub fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return invalid(format!(
            "Poisson mean {lambda} must be finite and nonnegative"
        ));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(lambda).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

/// P(k) = (1−r) r^k for k ≥ 0.
pub fn geometric<R: Rng + ?Sized>(r: f64, rng: &mut R) -> Result<u64> {
    check_prob(r)?;
    if r >= 1.0 {
        return invalid("ratio 1 gives an improper law");
    }
    if r == 0.0 {
        return Ok(0);
    }
    let d = Geometric::new(1.0 - r).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(d.sample(rng))
}

/// Lengths V_i = U_i Π_{j<i}(1 − U_j) from the given uniforms, stopping when the
/// remainder drops below `PD_RESIDUAL` (the remainder is appended as a final
/// piece), sorted descending.
pub fn stick_breaking_from(uniforms: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut rest = 1.0f64;
    let mut out = Vec::new();
    for u in uniforms {
        if rest < PD_RESIDUAL {
            break;
        }
        out.push(u * rest);
        rest *= 1.0 - u;
    }
    if rest > 0.0 {
        out.push(rest);
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// A Poisson–Dirichlet(1) sample, as sorted normalized lengths.
pub fn stick_breaking_pd<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    stick_breaking_from(std::iter::repeat_with(|| rng.random::<f64>()))
}

/// The largest Poisson–Dirichlet(1) length. Stops breaking as soon as the
/// remainder cannot exceed the current maximum.
pub fn pd_max<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let mut rest = 1.0f64;
    let mut best = 0.0f64;
    while rest > best {
        let u: f64 = rng.random();
        best = best.max(u * rest);
        rest *= 1.0 - u;
    }
    best
}

/// Cycle counts (C_1, …, C_n) of a uniform random permutation of n points,
/// via the Feller coupling: with i points left, the current cycle closes with
/// probability 1/i.
pub fn permutation_cycle_counts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u32> {
    let mut counts = vec![0u32; n];
    let mut len = 0;
    for i in (1..=n).rev() {
        len += 1;
        if rng.random_range(0..i) == 0 {
            counts[len - 1] += 1;
            len = 0;
        }
    }
    counts
}
