use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::pmf::{parse_ratio, ratio_to_f64};
use crate::poly::Polynomial;

/// Cap on (directions × support size) work when computing η in an extension.
const ETA_WORK_CAP: u128 = 200_000_000;

#[derive(Clone, Debug)]
enum Weights {
    /// Numerators over a common denominator.
    Exact {
        num: Vec<BigUint>,
        den: BigUint,
    },
    Float(Vec<f64>),
}

#[derive(Clone, Debug)]
enum Sampler {
    /// Cumulative integer weights: draw u in [0, den) and bisect.
    Integer {
        cum: Vec<u64>,
        den: u64,
    },
    Float {
        cum: Vec<f64>,
    },
}

/// A law μ on F_q with finite support, stored in canonical element order.
#[derive(Clone)]
pub struct CoefficientDistribution {
    ctx: FieldCtx,
    support: Vec<FieldElement>,
    weights: Weights,
    sampler: Sampler,
    eta: f64,
    eta_exact: Option<BigRational>,
}

impl fmt::Debug for CoefficientDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let probs: Vec<String> = (0..self.support.len())
            .map(|i| self.prob_string(i))
            .collect();
        f.debug_struct("CoefficientDistribution")
            .field("field", &self.ctx)
            .field("support", &self.support)
            .field("probs", &probs)
            .field("eta", &self.eta)
            .finish()
    }
}

impl CoefficientDistribution {
    /// Exact law. Entries with probability 0 are dropped.
    pub fn from_rationals(
        ctx: &FieldCtx,
        support: &[FieldElement],
        probs: &[BigRational],
    ) -> Result<Self> {
        check_support(ctx, support, probs.len())?;
        if probs.iter().any(|p| p.is_negative()) {
            return invalid("negative probability");
        }
        let total: BigRational = probs.iter().sum();
        if !total.is_one() {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        let den = probs
            .iter()
            .fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
        let mut entries: Vec<(FieldElement, BigUint)> = support
            .iter()
            .zip(probs)
            .filter(|(_, p)| !p.is_zero())
            .map(|(x, p)| (*x, (p.numer() * (&den / p.denom())).to_biguint().unwrap()))
            .collect();
        entries.sort_by_key(|(x, _)| ctx.index_of(x));
        let (support, num): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let den = den.to_biguint().unwrap();
        Self::build(ctx, support, Weights::Exact { num, den })
    }

    /// Floating-point law; the probabilities must sum to 1 within 1e-12.
    pub fn from_floats(ctx: &FieldCtx, support: &[FieldElement], probs: &[f64]) -> Result<Self> {
        check_support(ctx, support, probs.len())?;
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        let mut entries: Vec<(FieldElement, f64)> = support
            .iter()
            .zip(probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(x, p)| (*x, *p))
            .collect();
        entries.sort_by_key(|(x, _)| ctx.index_of(x));
        let (support, w): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        Self::build(ctx, support, Weights::Float(w))
    }

    /// Uniform on the given elements.
    pub fn uniform_on(ctx: &FieldCtx, support: &[FieldElement]) -> Result<Self> {
        let n = support.len() as i64;
        let probs = vec![BigRational::new(1.into(), n.max(1).into()); support.len()];
        Self::from_rationals(ctx, support, &probs)
    }

    /// Uniform on the whole field.
    pub fn uniform(ctx: &FieldCtx) -> Result<Self> {
        let q = ctx.size().filter(|&q| q <= 1 << 24).ok_or_else(|| {
            Error::ResourceCap(format!(
                "uniform law on {ctx:?} would need an explicit table"
            ))
        })?;
        let all: Vec<FieldElement> = (0..q as u64).map(|i| ctx.element(i)).collect();
        Self::uniform_on(ctx, &all)
    }

    pub fn point_mass(ctx: &FieldCtx, x: FieldElement) -> Result<Self> {
        Self::from_rationals(ctx, &[x], &[BigRational::one()])
    }

    fn build(ctx: &FieldCtx, support: Vec<FieldElement>, weights: Weights) -> Result<Self> {
        let sampler = match &weights {
            Weights::Exact { num, den } => match den.to_u64() {
                Some(d) if d < 1 << 62 => {
                    let mut acc = 0u64;
                    let cum = num
                        .iter()
                        .map(|w| {
                            acc += w.to_u64().unwrap();
                            acc
                        })
                        .collect();
                    Sampler::Integer { cum, den: d }
                }
                _ => Sampler::Float {
                    cum: float_cum(&exact_to_f64(num, den)),
                },
            },
            Weights::Float(w) => Sampler::Float { cum: float_cum(w) },
        };
        let mut mu = CoefficientDistribution {
            ctx: ctx.clone(),
            support,
            weights,
            sampler,
            eta: 0.0,
            eta_exact: None,
        };
        mu.compute_eta()?;
        Ok(mu)
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// Support in canonical order (only elements of positive mass).
    pub fn support(&self) -> &[FieldElement] {
        &self.support
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.weights, Weights::Exact { .. })
    }

    /// Exact probabilities aligned with [`Self::support`], when the law is rational.
    pub fn exact_probs(&self) -> Option<Vec<BigRational>> {
        match &self.weights {
            Weights::Exact { num, den } => {
                let den = BigInt::from(den.clone());
                Some(
                    num.iter()
                        .map(|w| BigRational::new(BigInt::from(w.clone()), den.clone()))
                        .collect(),
                )
            }
            Weights::Float(_) => None,
        }
    }

    /// Integer weights and their common denominator, when the law is rational.
    pub fn integer_weights(&self) -> Option<(&[BigUint], &BigUint)> {
        match &self.weights {
            Weights::Exact { num, den } => Some((num, den)),
            Weights::Float(_) => None,
        }
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Exact { num, den } => exact_to_f64(num, den),
            Weights::Float(w) => w.clone(),
        }
    }

    pub fn prob_of(&self, x: &FieldElement) -> f64 {
        match self.support.iter().position(|s| s == x) {
            Some(i) => self.probs_f64()[i],
            None => 0.0,
        }
    }

    fn prob_string(&self, i: usize) -> String {
        match &self.weights {
            Weights::Exact { num, den } => crate::pmf::ratio_string(&BigRational::new(
                BigInt::from(num[i].clone()),
                BigInt::from(den.clone()),
            )),
            Weights::Float(w) => w[i].to_string(),
        }
    }

    /// Probabilities as strings aligned with the support ("num/den" when exact).
    pub fn prob_strings(&self) -> Vec<String> {
        (0..self.support.len())
            .map(|i| self.prob_string(i))
            .collect()
    }

    /// η = 1 − max μ(V) over proper affine F_p-subspaces V of F_q.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_exact(&self) -> Option<&BigRational> {
        self.eta_exact.as_ref()
    }

    fn compute_eta(&mut self) -> Result<()> {
        let p = self.ctx.p();
        let e = self.ctx.degree();
        // Every proper affine subspace lies in an affine hyperplane
        // {x : Tr(λx) = c}; scaling λ by F_p^* permutes c, so one λ per line
        // suffices.
        let directions: Vec<FieldElement> = if e == 1 {
            vec![self.ctx.one()]
        } else {
            let lines = ((p as u128).pow(e as u32) - 1) / (p as u128 - 1);
            if lines * self.support.len() as u128 > ETA_WORK_CAP {
                return Err(Error::ResourceCap(format!(
                    "eta over {lines} hyperplane directions of {:?}",
                    self.ctx
                )));
            }
            projective_points(&self.ctx)
        };
        let values: Vec<u64> = if e == 1 {
            self.support.iter().map(|x| x.coords()[0] as u64).collect()
        } else {
            Vec::new()
        };
        match &self.weights {
            Weights::Exact { num, den } => {
                let mut best = BigUint::zero();
                let mut mass = vec![BigUint::zero(); p as usize];
                for lam in &directions {
                    mass.iter_mut().for_each(|m| m.set_zero());
                    for (i, x) in self.support.iter().enumerate() {
                        let c = if e == 1 {
                            values[i]
                        } else {
                            self.ctx.trace_fp(&self.ctx.mul(lam, x))
                        };
                        mass[c as usize] += &num[i];
                    }
                    if let Some(m) = mass.iter().max() {
                        if *m > best {
                            best = m.clone();
                        }
                    }
                }
                let eta = BigRational::new(
                    BigInt::from(den.clone()) - BigInt::from(best),
                    BigInt::from(den.clone()),
                );
                self.eta = ratio_to_f64(&eta);
                self.eta_exact = Some(eta);
            }
            Weights::Float(w) => {
                let mut best = 0.0f64;
                let mut mass = vec![0.0f64; p as usize];
                for lam in &directions {
                    mass.iter_mut().for_each(|m| *m = 0.0);
                    for (i, x) in self.support.iter().enumerate() {
                        let c = if e == 1 {
                            values[i]
                        } else {
                            self.ctx.trace_fp(&self.ctx.mul(lam, x))
                        };
                        mass[c as usize] += w[i];
                    }
                    best = mass.iter().copied().fold(best, f64::max);
                }
                self.eta = (1.0 - best).max(0.0);
            }
        }
        Ok(())
    }

    /// One draw by inverse CDF over the canonically ordered support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let idx = match &self.sampler {
            Sampler::Integer { cum, den } => {
                let u = rng.random_range(0..*den);
                cum.partition_point(|&c| c <= u)
            }
            Sampler::Float { cum } => {
                let u: f64 = rng.random::<f64>() * cum.last().copied().unwrap_or(1.0);
                cum.partition_point(|&c| c <= u).min(cum.len() - 1)
            }
        };
        self.support[idx]
    }

    /// The polynomial Σ_{i ≤ n} ε_i x^i with ε_i i.i.d. from μ, kept exactly as
    /// drawn: its degree may fall below n and it may be zero.
    pub fn sample_poly<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Polynomial {
        let coeffs: Vec<FieldElement> = (0..=n).map(|_| self.sample(rng)).collect();
        Polynomial::new(&self.ctx, coeffs).expect("support lies in the field")
    }

    /// Parses a compact law description:
    /// `uniform`, `uniform:-1,0,1`, `point:1`, or `0:1/3,1:2/3`.
    /// Probabilities written as fractions or decimals are kept exact.
    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "uniform" {
            return Self::uniform(ctx);
        }
        if let Some(rest) = text.strip_prefix("uniform:") {
            let support = rest
                .split(',')
                .map(|s| ctx.parse_element(s))
                .collect::<Result<Vec<_>>>()?;
            return Self::uniform_on(ctx, &support);
        }
        if let Some(rest) = text.strip_prefix("point:") {
            return Self::point_mass(ctx, ctx.parse_element(rest)?);
        }
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for item in text.split(',') {
            let (x, pr) = item
                .rsplit_once(':')
                .ok_or_else(|| Error::InvalidInput(format!("expected value:prob, got '{item}'")))?;
            support.push(ctx.parse_element(x)?);
            probs.push(pr.trim().to_string());
        }
        Self::from_strings(ctx, &support, &probs)
    }

    /// Probabilities as strings: exact when every entry is a fraction or a
    /// finite decimal, float otherwise.
    pub fn from_strings(
        ctx: &FieldCtx,
        support: &[FieldElement],
        probs: &[String],
    ) -> Result<Self> {
        let exact: Option<Vec<BigRational>> = probs.iter().map(|s| parse_ratio(s).ok()).collect();
        match exact {
            Some(r) => Self::from_rationals(ctx, support, &r),
            None => {
                let f = probs
                    .iter()
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::InvalidInput(format!("bad probability '{s}'")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::from_floats(ctx, support, &f)
            }
        }
    }
}

/// A monic polynomial of degree n with uniform lower coefficients.
pub fn sample_uniform_monic<R: Rng + ?Sized>(ctx: &FieldCtx, n: usize, rng: &mut R) -> Polynomial {
    let mut coeffs: Vec<FieldElement> = (0..n).map(|_| ctx.random(rng)).collect();
    coeffs.push(ctx.one());
    Polynomial::new(ctx, coeffs).expect("random elements lie in the field")
}

fn check_support(ctx: &FieldCtx, support: &[FieldElement], nprobs: usize) -> Result<()> {
    if support.is_empty() {
        return invalid("empty support");
    }
    if support.len() != nprobs {
        return invalid(format!(
            "{} support points but {nprobs} probabilities",
            support.len()
        ));
    }
    if let Some(x) = support.iter().find(|x| !ctx.contains(x)) {
        return invalid(format!("{x} is not an element of {ctx:?}"));
    }
    let mut idx: Vec<u64> = support.iter().map(|x| ctx.index_of(x)).collect();
    idx.sort_unstable();
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return invalid("repeated support point");
    }
    Ok(())
}

fn exact_to_f64(num: &[BigUint], den: &BigUint) -> Vec<f64> {
    let den = BigInt::from(den.clone());
    num.iter()
        .map(|w| ratio_to_f64(&BigRational::new(BigInt::from(w.clone()), den.clone())))
        .collect()
}

fn float_cum(w: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    w.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// One nonzero representative per F_p-line of F_{p^e}: coordinate vectors
/// whose last nonzero coordinate is 1.
fn projective_points(ctx: &FieldCtx) -> Vec<FieldElement> {
    let q = ctx.size().unwrap() as u64;
    (1..q)
        .map(|i| ctx.element(i))
        .filter(|x| x.coords().iter().rev().find(|&&c| c != 0) == Some(&1))
        .collect()
}
