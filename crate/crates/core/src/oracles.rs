//! Exact small-instance oracles: the joint law ν_n of Hasse-derivative values
//! of a random polynomial at fixed roots, its Fourier coefficients,
//! divisibility probabilities, brute-force factor-count laws and the phase
//! sequence S_n.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::models::CoefficientDistribution;
use crate::ntheory::binomial_mod_p;
use crate::pmf::{ratio_to_f64, ExactPmf};
use crate::poly::Polynomial;
use crate::stats::FactorStats;

/// Largest state space p^{d'} for ν_n tables.
pub const STATE_CAP: u64 = 10_000_000;
/// Largest number of coefficient vectors enumerated by [`brute_joint_pmf`].
pub const ENUMERATION_CAP: u64 = 20_000_000;
/// Cap on p^{d'}·p work for the table DFT.
const DFT_WORK_CAP: u64 = 500_000_000;
/// Cap on the work of the product-formula pass in [`check_prop32`].
const PRODUCT_WORK_CAP: u64 = 100_000_000;

/// A root α with the set of Hasse derivatives k taken at it.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub ctx: FieldCtx,
    pub alpha: FieldElement,
    pub ks: Vec<usize>,
}

impl Constraint {
    pub fn new(ctx: &FieldCtx, alpha: FieldElement, ks: &[usize]) -> Self {
        let mut ks = ks.to_vec();
        ks.sort_unstable();
        ks.dedup();
        Constraint {
            ctx: ctx.clone(),
            alpha,
            ks,
        }
    }

    /// Derivatives 0..m, i.e. the conditions for (x − α)^m | f.
    pub fn up_to(ctx: &FieldCtx, alpha: FieldElement, m: usize) -> Self {
        Constraint::new(ctx, alpha, &(0..m).collect::<Vec<_>>())
    }

    pub fn max_k(&self) -> usize {
        *self.ks.last().expect("derivative set is nonempty")
    }
}

/// V = Π_j F(α_j)^{K_j}, flattened to F_p^{d'}. Coordinates are ordered by
/// constraint, then derivative, then basis coordinate; a point is indexed by
/// Σ_t c_t p^t.
#[derive(Clone, Debug)]
pub struct VSpace {
    base: FieldCtx,
    constraints: Vec<Constraint>,
    /// (constraint, k, first coordinate) per block.
    blocks: Vec<(usize, usize, usize)>,
    dim: usize,
}

impl VSpace {
    /// `base` is the coefficient field. Each root field must equal it or, when
    /// the base is prime, be any extension of the same characteristic.
    pub fn new(base: &FieldCtx, constraints: Vec<Constraint>) -> Result<Self> {
        if constraints.is_empty() {
            return invalid("at least one constraint is required");
        }
        let p = base.p();
        let mut seen: Vec<Vec<u64>> = Vec::new();
        for c in &constraints {
            if c.ks.is_empty() {
                return invalid("empty derivative set");
            }
            if c.ctx.p() != p {
                return invalid("roots must share the characteristic of the coefficient field");
            }
            if c.ctx != *base && base.degree() != 1 {
                return invalid("root fields must equal the coefficient field unless it is prime");
            }
            if !c.ctx.contains(&c.alpha) {
                return invalid(format!("{} does not belong to {:?}", c.alpha, c.ctx));
            }
            if c.alpha.is_zero() {
                return invalid("roots must be nonzero");
            }
            let key = if base.degree() == 1 {
                if c.ctx.lies_in_proper_subfield(&c.alpha) {
                    return invalid(format!(
                        "{} lies in a proper subfield of {:?}",
                        c.alpha, c.ctx
                    ));
                }
                c.ctx.minimal_polynomial(&c.alpha)
            } else {
                c.alpha.coords().iter().map(|&x| x as u64).collect()
            };
            if seen.contains(&key) {
                return invalid(format!(
                    "{} repeats or is conjugate to an earlier root",
                    c.alpha
                ));
            }
            seen.push(key);
        }
        let mut blocks = Vec::new();
        let mut dim = 0;
        for (j, c) in constraints.iter().enumerate() {
            for &k in &c.ks {
                blocks.push((j, k, dim));
                dim += c.ctx.degree();
            }
        }
        Ok(VSpace {
            base: base.clone(),
            constraints,
            blocks,
            dim,
        })
    }

    pub fn base(&self) -> &FieldCtx {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Number of (root, derivative) blocks.
    pub fn blocks(&self) -> usize {
        self.blocks.len()
    }

    /// d' = dim over F_p.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// d = Σ_j e_j (max K_j + 1), with e_j the degree of α_j over the
    /// coefficient field.
    pub fn d(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| self.rel_degree(c) * (c.max_k() + 1))
            .sum()
    }

    fn rel_degree(&self, c: &Constraint) -> usize {
        c.ctx.degree() / self.base.degree()
    }

    /// p^{d'} if it fits in u64.
    pub fn size(&self) -> Option<u64> {
        self.p().checked_pow(self.dim as u32)
    }

    fn capped_size(&self, cap: u64) -> Result<usize> {
        match self.size() {
            Some(s) if s <= cap => Ok(s as usize),
            _ => Err(Error::ResourceCap(format!(
                "state space {}^{} exceeds {cap}",
                self.p(),
                self.dim
            ))),
        }
    }

    /// (C(i, k) α_j^{i−k}) per block; zero when i < k.
    pub fn row(&self, i: usize) -> Vec<FieldElement> {
        let p = self.p();
        self.blocks
            .iter()
            .map(|&(j, k, _)| {
                let c = &self.constraints[j];
                if i < k {
                    return c.ctx.zero();
                }
                let b = binomial_mod_p(i as u64, k as u64, p);
                c.ctx.scale(&c.ctx.pow(&c.alpha, (i - k) as u128), b)
            })
            .collect()
    }

    fn embed(&self, block: usize, x: &FieldElement) -> FieldElement {
        let ctx = &self.constraints[self.blocks[block].0].ctx;
        if *ctx == self.base {
            *x
        } else {
            ctx.from_u64(x.coords()[0] as u64)
        }
    }

    /// Flattens one value per block into F_p coordinates.
    pub fn flatten(&self, values: &[FieldElement]) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.dim);
        for (b, v) in values.iter().enumerate() {
            let e = self.constraints[self.blocks[b].0].ctx.degree();
            out.extend((0..e).map(|t| v.coords().get(t).copied().unwrap_or(0) as u64));
        }
        out
    }

    pub fn index_of(&self, coords: &[u64]) -> usize {
        let p = self.p() as usize;
        coords
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * p + c as usize)
    }

    pub fn coords_of(&self, mut index: usize) -> Vec<u64> {
        let p = self.p() as usize;
        (0..self.dim)
            .map(|_| {
                let c = index % p;
                index /= p;
                c as u64
            })
            .collect()
    }

    /// The F_p-linear form v ↦ Tr(Σ β_b v_b) as a coefficient vector.
    pub fn functional(&self, beta: &[FieldElement]) -> Result<Vec<u64>> {
        if beta.len() != self.blocks.len() {
            return invalid(format!(
                "dual vector has {} components, expected {}",
                beta.len(),
                self.blocks.len()
            ));
        }
        let mut out = Vec::with_capacity(self.dim);
        for (b, x) in beta.iter().enumerate() {
            let ctx = &self.constraints[self.blocks[b].0].ctx;
            if !ctx.contains(x) {
                return invalid(format!("component {b} does not lie in {ctx:?}"));
            }
            out.extend(ctx.trace_form(x));
        }
        Ok(out)
    }

    fn block_ctx(&self, b: usize) -> &FieldCtx {
        &self.constraints[self.blocks[b].0].ctx
    }
}

/// The exact law of the flattened vector (Σ_{i≤n} X_i C(i,k) α_j^{i−k})_{j,k}
/// with X_i i.i.d. from μ, as integer weights over a common denominator.
#[derive(Clone, Debug)]
pub struct NuDistribution {
    space: VSpace,
    n: usize,
    weights: Vec<BigUint>,
    den: BigUint,
}

/// Builds ν_n by n + 1 sequential convolutions over the state table.
pub fn nu_n_distribution(
    mu: &CoefficientDistribution,
    n: usize,
    space: &VSpace,
) -> Result<NuDistribution> {
    if *mu.ctx() != space.base {
        return Err(Error::MixedContexts);
    }
    let Some((num, den)) = mu.integer_weights() else {
        return invalid("an exact (rational) coefficient law is required");
    };
    let size = space.capped_size(STATE_CAP)?;
    let p = space.p();
    let mut table = vec![BigUint::zero(); size];
    table[0] = BigUint::one();
    for i in 0..=n {
        let row = space.row(i);
        let mut next = vec![BigUint::zero(); size];
        for (eps, w) in mu.support().iter().zip(num) {
            let shift: Vec<FieldElement> = row
                .iter()
                .enumerate()
                .map(|(b, r)| space.block_ctx(b).mul(&space.embed(b, eps), r))
                .collect();
            let target = translation(p, &space.flatten(&shift));
            for (idx, v) in table.iter().enumerate() {
                if !v.is_zero() {
                    next[target[idx]] += v * w;
                }
            }
        }
        table = next;
    }
    Ok(NuDistribution {
        space: space.clone(),
        n,
        weights: table,
        den: den.pow((n + 1) as u32),
    })
}

/// idx ↦ index of (coords(idx) + s) over F_p^{len s}.
fn translation(p: u64, s: &[u64]) -> Vec<usize> {
    let p = p as usize;
    let mut tgt = vec![0usize];
    let mut stride = 1usize;
    for &st in s {
        let mut next = Vec::with_capacity(tgt.len() * p);
        for x in 0..p {
            let shifted = stride * ((x + st as usize) % p);
            next.extend(tgt.iter().map(|&t| t + shifted));
        }
        tgt = next;
        stride *= p;
    }
    tgt
}

impl NuDistribution {
    pub fn space(&self) -> &VSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Integer weights indexed by state, over [`Self::denominator`].
    pub fn weights(&self) -> &[BigUint] {
        &self.weights
    }

    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    pub fn prob(&self, index: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.weights[index].clone()),
            BigInt::from(self.den.clone()),
        )
    }

    /// Mass of the zero vector.
    pub fn zero_mass(&self) -> BigRational {
        self.prob(0)
    }

    pub fn probs_f64(&self) -> Vec<f64> {
        (0..self.weights.len())
            .map(|i| ratio_to_f64(&self.prob(i)))
            .collect()
    }

    /// The law keyed by flattened coordinate vectors.
    pub fn to_pmf(&self) -> ExactPmf<Vec<u64>> {
        let table: BTreeMap<Vec<u64>, BigUint> = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| (self.space.coords_of(i), w.clone()))
            .collect();
        ExactPmf::from_weights(table).expect("a law has positive total mass")
    }

    /// All Fourier coefficients, indexed by the linear form (as a point of
    /// F_p^{d'}), by an axis-wise DFT of the table.
    pub fn fourier_table(&self) -> Result<Vec<Complex64>> {
        let p = self.space.p() as usize;
        let size = self.weights.len();
        if (size as u64).saturating_mul(p as u64) > DFT_WORK_CAP {
            return Err(Error::ResourceCap(format!(
                "DFT over {size} states with p = {p}"
            )));
        }
        let roots = unit_roots(p as u64);
        let mut a: Vec<Complex64> = self
            .probs_f64()
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect();
        let mut fiber = vec![Complex64::zero(); p];
        let mut stride = 1usize;
        for _ in 0..self.space.dim {
            let block = stride * p;
            for start in (0..size).step_by(block) {
                for low in 0..stride {
                    for (x, f) in fiber.iter_mut().enumerate() {
                        *f = a[start + low + x * stride];
                    }
                    for l in 0..p {
                        let mut acc = Complex64::zero();
                        for (x, f) in fiber.iter().enumerate() {
                            acc += f * roots[(l * x) % p];
                        }
                        a[start + low + l * stride] = acc;
                    }
                }
            }
            stride = block;
        }
        Ok(a)
    }

    /// Index into [`Self::fourier_table`] of the form attached to β.
    pub fn functional_index(&self, beta: &[FieldElement]) -> Result<usize> {
        Ok(self.space.index_of(&self.space.functional(beta)?))
    }
}

/// e_p(t) = exp(2πi t/p) for t = 0..p.
fn unit_roots(p: u64) -> Vec<Complex64> {
    (0..p)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / p as f64))
        .collect()
}

/// ν̂(β) = Σ_v pmf(v) e_p(Tr(β·v)) by direct summation over the support.
pub fn fourier_coefficient(
    space: &VSpace,
    pmf: &ExactPmf<Vec<u64>>,
    beta: &[FieldElement],
) -> Result<Complex64> {
    let form = space.functional(beta)?;
    let p = space.p();
    let roots = unit_roots(p);
    let mut acc = Complex64::zero();
    for (v, w) in pmf.iter() {
        if v.len() != space.dim {
            return invalid(format!(
                "point of dimension {} in a space of dimension {}",
                v.len(),
                space.dim
            ));
        }
        let phase = v.iter().zip(&form).fold(0u64, |s, (a, b)| (s + a * b) % p);
        acc += roots[phase as usize] * ratio_to_f64(w);
    }
    Ok(acc)
}

/// ν̂_n(β) = Π_{i≤n} μ̂(β·Tv_i): the character sum of one coefficient for
/// each position, multiplied together.
pub fn fourier_product(
    mu: &CoefficientDistribution,
    n: usize,
    space: &VSpace,
    beta: &[FieldElement],
) -> Result<Complex64> {
    if *mu.ctx() != space.base {
        return Err(Error::MixedContexts);
    }
    let form = space.functional(beta)?;
    let probs = mu.probs_f64();
    let p = space.p();
    let roots = unit_roots(p);
    let mut total = Complex64::new(1.0, 0.0);
    for i in 0..=n {
        let row = space.row(i);
        let mut mu_hat = Complex64::zero();
        for (eps, w) in mu.support().iter().zip(&probs) {
            let shift: Vec<FieldElement> = row
                .iter()
                .enumerate()
                .map(|(b, r)| space.block_ctx(b).mul(&space.embed(b, eps), r))
                .collect();
            let phase = space
                .flatten(&shift)
                .iter()
                .zip(&form)
                .fold(0u64, |s, (a, b)| (s + a * b) % p);
            mu_hat += roots[phase as usize] * *w;
        }
        total *= mu_hat;
    }
    Ok(total)
}

/// e^{−ηn/(dp²)}, rounded so the returned value is never below the true one.
pub fn prop32_bound(eta: f64, n: usize, d: usize, p: u64) -> f64 {
    if n == 0 || eta <= 0.0 {
        return 1.0;
    }
    let x = eta * n as f64 / (d as f64 * (p as f64) * (p as f64));
    let x_low = x * (1.0 - 8.0 * f64::EPSILON);
    (-x_low).exp().next_up().next_up().min(1.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop32Report {
    pub p: u64,
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    pub eta: f64,
    /// max |ν̂_n(β)| over β with every component nonzero (table DFT).
    pub max_fourier_modulus: f64,
    /// The same maximum by the product formula, when affordable.
    pub max_fourier_modulus_product: Option<f64>,
    /// Largest |DFT − product| seen.
    pub route_discrepancy: Option<f64>,
    /// max |ν̂_n(β)| over all β ≠ 0.
    pub max_fourier_modulus_any: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Compares max |ν̂_n(β)| over all-nonzero-component β with e^{−ηn/(dp²)}.
pub fn check_prop32(
    mu: &CoefficientDistribution,
    n: usize,
    space: &VSpace,
) -> Result<Prop32Report> {
    let nu = nu_n_distribution(mu, n, space)?;
    let table = nu.fourier_table()?;
    let p = space.p();
    let max_any = table.iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);

    // Enumerate β block by block over nonzero elements, tracking the index of
    // its linear form.
    let mut local: Vec<Vec<(FieldElement, usize)>> = Vec::new();
    for b in 0..space.blocks.len() {
        let ctx = space.block_ctx(b);
        let offset = p.pow(space.blocks[b].2 as u32) as usize;
        let mut opts = Vec::new();
        for x in ctx.elements().filter(|x| !x.is_zero()) {
            let form = ctx.trace_form(&x);
            let idx = form
                .iter()
                .rev()
                .fold(0usize, |acc, &c| acc * p as usize + c as usize);
            opts.push((x, idx * offset));
        }
        local.push(opts);
    }
    let count: u64 = local.iter().map(|o| o.len() as u64).product();
    let work = count
        .saturating_mul((n + 1) as u64)
        .saturating_mul(mu.support().len() as u64)
        .saturating_mul(space.dim as u64);
    let do_product = work <= PRODUCT_WORK_CAP;
    let mut max_dft = 0.0f64;
    let mut max_prod = 0.0f64;
    let mut discrepancy = 0.0f64;
    let mut pos = vec![0usize; local.len()];
    loop {
        let idx: usize = pos.iter().zip(&local).map(|(&i, o)| o[i].1).sum();
        let z = table[idx];
        max_dft = max_dft.max(z.norm());
        if do_product {
            let beta: Vec<FieldElement> = pos.iter().zip(&local).map(|(&i, o)| o[i].0).collect();
            let w = fourier_product(mu, n, space, &beta)?;
            max_prod = max_prod.max(w.norm());
            discrepancy = discrepancy.max((z - w).norm());
        }
        let mut b = 0;
        loop {
            if b == pos.len() {
                let bound = prop32_bound(mu.eta(), n, space.d(), p);
                return Ok(Prop32Report {
                    p,
                    n,
                    d: space.d(),
                    dim: space.dim,
                    eta: mu.eta(),
                    max_fourier_modulus: max_dft,
                    max_fourier_modulus_product: do_product.then_some(max_prod),
                    route_discrepancy: do_product.then_some(discrepancy),
                    max_fourier_modulus_any: max_any,
                    bound,
                    margin: bound - max_dft,
                    pass: max_dft <= bound,
                });
            }
            pos[b] += 1;
            if pos[b] < local[b].len() {
                break;
            }
            pos[b] = 0;
            b += 1;
        }
    }
}

/// Σ_β |ν̂(β)|² and p^{d'} Σ_v ν(v)², which agree by Parseval.
pub fn parseval_sides(nu: &NuDistribution) -> Result<(f64, f64)> {
    let table = nu.fourier_table()?;
    let lhs: f64 = table.iter().map(|z| z.norm_sqr()).sum();
    let rhs: f64 = nu.probs_f64().iter().map(|x| x * x).sum::<f64>() * nu.weights.len() as f64;
    Ok((lhs, rhs))
}

fn divisibility_space(
    base: &FieldCtx,
    roots: &[(FieldCtx, FieldElement, usize)],
) -> Result<VSpace> {
    if roots.iter().any(|r| r.2 == 0) {
        return invalid("multiplicities must be at least 1");
    }
    VSpace::new(
        base,
        roots
            .iter()
            .map(|(ctx, a, m)| Constraint::up_to(ctx, *a, *m))
            .collect(),
    )
}

/// P[(x − α_j)^{m_j} | f ∀j] for f = Σ_{i≤n} X_i x^i, as the ν_n mass at 0.
pub fn exact_divisibility_prob(
    mu: &CoefficientDistribution,
    n: usize,
    roots: &[(FieldCtx, FieldElement, usize)],
) -> Result<BigRational> {
    let space = divisibility_space(mu.ctx(), roots)?;
    Ok(nu_n_distribution(mu, n, &space)?.zero_mass())
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisibilityReport {
    pub p: u64,
    pub n: usize,
    pub d: usize,
    pub dim: usize,
    /// Exact probability as "num/den".
    pub prob: String,
    /// Uniform-model value p^{−d'} as "num/den".
    pub uniform_prob: String,
    pub gap: f64,
    pub max_fourier_modulus_any: f64,
    pub bound: f64,
    /// gap ≤ max_{β≠0} |ν̂_n(β)|
    pub within_fourier: bool,
    /// gap ≤ bound, compared exactly against the rounded-up bound.
    pub pass: bool,
}

/// The chain |P[divisibility] − p^{−d'}| ≤ max_{β≠0}|ν̂_n(β)| ≤ e^{−ηn/(dp²)}.
pub fn divisibility_chain(
    mu: &CoefficientDistribution,
    n: usize,
    roots: &[(FieldCtx, FieldElement, usize)],
) -> Result<DivisibilityReport> {
    let space = divisibility_space(mu.ctx(), roots)?;
    let d = space.d();
    if d > n {
        return invalid(format!(
            "d = {d} exceeds n = {n}; the uniform comparison needs d ≤ n"
        ));
    }
    let nu = nu_n_distribution(mu, n, &space)?;
    let prob = nu.zero_mass();
    let p = space.p();
    let uniform = BigRational::new(BigInt::one(), BigInt::from(p).pow(space.dim as u32));
    let gap = (&prob - &uniform).abs();
    let max_any = nu
        .fourier_table()?
        .iter()
        .skip(1)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let bound = prop32_bound(mu.eta(), n, d, p);
    let gap_f = ratio_to_f64(&gap);
    let bound_exact = BigRational::from_float(bound).expect("finite bound");
    Ok(DivisibilityReport {
        p,
        n,
        d,
        dim: space.dim,
        prob: crate::pmf::ratio_string(&prob),
        uniform_prob: crate::pmf::ratio_string(&uniform),
        gap: gap_f,
        max_fourier_modulus_any: max_any,
        bound,
        within_fourier: gap_f <= max_any * (1.0 + 1e-12) + 1e-15,
        pass: gap <= bound_exact,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HalaszReport {
    pub p: u64,
    pub n: usize,
    pub d: usize,
    pub eta: f64,
    pub prob: String,
    /// Smallest C with P ≤ (1/p + C η^{−1/2} ⌊n/d⌋^{−1/2})^d.
    pub c_min: f64,
}

/// The smallest constant making the Halász-type divisibility bound hold on
/// this instance. Coefficients are the n + 1 values X_0..X_n.
pub fn halasz_constant(
    mu: &CoefficientDistribution,
    n: usize,
    roots: &[(FieldCtx, FieldElement, usize)],
) -> Result<HalaszReport> {
    if mu.ctx().degree() != 1 {
        return invalid("the Halász diagnostic needs coefficients in a prime field");
    }
    let space = divisibility_space(mu.ctx(), roots)?;
    let d = space.d();
    let blocks = n / d;
    if blocks == 0 {
        return invalid(format!("n = {n} is smaller than d = {d}"));
    }
    let eta = mu.eta();
    if eta <= 0.0 {
        return invalid("η = 0: the coefficient law is concentrated on an affine subspace");
    }
    let prob = nu_n_distribution(mu, n, &space)?.zero_mass();
    let root = ratio_to_f64(&prob).powf(1.0 / d as f64);
    let c_min = ((root - 1.0 / space.p() as f64) * (eta * blocks as f64).sqrt()).max(0.0);
    Ok(HalaszReport {
        p: space.p(),
        n,
        d,
        eta,
        prob: crate::pmf::ratio_string(&prob),
        c_min,
    })
}

/// How the enumeration in [`brute_joint_pmf`] is conditioned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Conditioning {
    /// All nonzero polynomials.
    Nonzero,
    /// Top coefficient X_n = 1.
    Monic,
    /// Top coefficient X_n ≠ 0.
    ExactDegree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BruteOptions {
    pub with_multiplicity: bool,
    pub exclude_x: bool,
    pub conditioning: Conditioning,
}

#[derive(Clone, Debug)]
pub struct BruteJointPmf {
    /// Law of (N_i)_{i≤N} (or N'_i) under the conditioning.
    pub pmf: ExactPmf<Vec<u32>>,
    /// Unconditional probability that f = 0.
    pub zero_mass: BigRational,
    /// Unconditional probability of the conditioning event.
    pub conditioning_mass: BigRational,
}

/// Factor-count vector of f under the given convention.
pub fn count_vector(
    f: &Polynomial,
    max_degree: usize,
    with_multiplicity: bool,
    exclude_x: bool,
) -> Result<Vec<u32>> {
    let s = FactorStats::from_profile(
        &f.degree_profile(Some(max_degree.max(1)))?,
        max_degree.max(1),
    );
    let mut v = if with_multiplicity {
        s.counts_mult
    } else {
        s.counts_distinct
    };
    v.truncate(max_degree);
    if !exclude_x && max_degree >= 1 && s.x_multiplicity > 0 {
        v[0] += if with_multiplicity {
            s.x_multiplicity
        } else {
            1
        };
    }
    Ok(v)
}

/// Enumerates every coefficient vector in supp(μ)^{n+1} with its exact weight,
/// factors each polynomial and accumulates the law of the factor counts.
pub fn brute_joint_pmf(
    mu: &CoefficientDistribution,
    n: usize,
    max_degree: usize,
    opts: BruteOptions,
) -> Result<BruteJointPmf> {
    let Some((num, den)) = mu.integer_weights() else {
        return invalid("an exact (rational) coefficient law is required");
    };
    let support = mu.support();
    let s = support.len() as u64;
    let count = s
        .checked_pow((n + 1) as u32)
        .filter(|&c| c <= ENUMERATION_CAP)
        .ok_or_else(|| {
            Error::ResourceCap(format!(
                "{s}^{} coefficient vectors exceed {ENUMERATION_CAP}",
                n + 1
            ))
        })?;
    let ctx = mu.ctx();
    let one = ctx.one();
    type Acc = (BTreeMap<Vec<u32>, BigUint>, BigUint, BigUint);
    let merge = |mut a: Acc, b: Acc| -> Acc {
        for (k, w) in b.0 {
            *a.0.entry(k).or_insert_with(BigUint::zero) += w;
        }
        a.1 += b.1;
        a.2 += b.2;
        a
    };
    let chunk = 4096u64;
    let chunks = count.div_ceil(chunk);
    let acc: Result<Acc> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Acc> {
            let mut acc: Acc = (BTreeMap::new(), BigUint::zero(), BigUint::zero());
            for t in c * chunk..((c + 1) * chunk).min(count) {
                let mut rest = t;
                let mut coeffs = Vec::with_capacity(n + 1);
                let mut weight = BigUint::one();
                for _ in 0..=n {
                    let k = (rest % s) as usize;
                    rest /= s;
                    coeffs.push(support[k]);
                    weight *= &num[k];
                }
                let top = coeffs[n];
                let keep = match opts.conditioning {
                    Conditioning::Nonzero => true,
                    Conditioning::Monic => top == one,
                    Conditioning::ExactDegree => !top.is_zero(),
                };
                let f = Polynomial::new(ctx, coeffs)?;
                if f.is_zero() {
                    acc.1 += &weight;
                    continue;
                }
                if !keep {
                    continue;
                }
                acc.2 += &weight;
                let key = count_vector(&f, max_degree, opts.with_multiplicity, opts.exclude_x)?;
                *acc.0.entry(key).or_insert_with(BigUint::zero) += weight;
            }
            Ok(acc)
        })
        .try_reduce(
            || (BTreeMap::new(), BigUint::zero(), BigUint::zero()),
            |a, b| Ok(merge(a, b)),
        );
    let (table, zero, kept) = acc?;
    if kept.is_zero() {
        return invalid("the conditioning event has probability 0");
    }
    let total = BigInt::from(den.pow((n + 1) as u32));
    Ok(BruteJointPmf {
        pmf: ExactPmf::from_weights(table)?,
        zero_mass: BigRational::new(BigInt::from(zero), total.clone()),
        conditioning_mass: BigRational::new(BigInt::from(kept), total),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SSequenceReport {
    pub p: u64,
    pub n0: usize,
    pub len: usize,
    /// Ŝ_n for n = n0..=n0+L, centered in [−p/2, p/2].
    pub values: Vec<i64>,
    pub block_sum: u128,
    /// p² / (8 log 4L).
    pub threshold: f64,
    /// Block sum at most the threshold.
    pub slow_candidate: bool,
    /// 200 d log p log(d log p), the order scale the argument works with.
    pub order_scale: f64,
}

/// S_n = Σ_j Σ_{k∈K_j} β_{j,k} α_j^{n−k} C(n, k) over a prime field, with the
/// block sum Σ_{n=n0}^{n0+L} Ŝ_n² compared against p²/(8 log 4L).
pub fn s_sequence(
    beta: &[FieldElement],
    space: &VSpace,
    n0: usize,
    len: usize,
) -> Result<SSequenceReport> {
    if space.constraints.iter().any(|c| c.ctx.degree() != 1) {
        return invalid("the S_n sequence is defined over prime fields only");
    }
    if len == 0 {
        return invalid("block length L must be at least 1");
    }
    let form = space.functional(beta)?;
    let p = space.p();
    let mut values = Vec::with_capacity(len + 1);
    for n in n0..=n0 + len {
        let row = space.flatten(&space.row(n));
        let s = row
            .iter()
            .zip(&form)
            .fold(0u64, |acc, (a, b)| (acc + a * b) % p);
        let centered = if s > p / 2 {
            s as i64 - p as i64
        } else {
            s as i64
        };
        values.push(centered);
    }
    let block_sum: u128 = values
        .iter()
        .map(|&v| (v as i128 * v as i128) as u128)
        .sum();
    let threshold = (p as f64).powi(2) / (8.0 * (4.0 * len as f64).ln());
    let d = space.d() as f64;
    let lp = (p as f64).ln();
    Ok(SSequenceReport {
        p,
        n0,
        len,
        values,
        block_sum,
        threshold,
        slow_candidate: (block_sum as f64) <= threshold,
        order_scale: 200.0 * d * lp * (d * lp).ln(),
    })
}
