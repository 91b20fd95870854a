//! Polynomials over F_q bound to a field context.
//!
//! Prime fields dispatch to the `u64` kernel; extension fields run the same
//! generic algorithms on [`FieldElement`] coefficients.

pub mod kernel;
mod rank;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::ntheory;
use kernel::{ExtArith, PrimeArith};

pub use kernel::DegreeProfile;
pub use rank::{derivative_vector_matrix, rank_mod_p, RootSpec};

/// Runs `$body` with `$a` bound to the arithmetic for `$ctx`, `$lift`
/// converting `&[FieldElement]` to the kernel representation and `$back`
/// converting a kernel vector to `Vec<FieldElement>`.
macro_rules! with_arith {
    ($ctx:expr, |$a:ident, $lift:ident, $back:ident| $body:expr) => {{
        let ctx: &FieldCtx = $ctx;
        if ctx.degree() == 1 {
            let $a = PrimeArith::new(ctx.p());
            #[allow(unused)]
            let $lift = |v: &[FieldElement]| -> Vec<u64> {
                v.iter().map(|c| c.coords()[0] as u64).collect()
            };
            #[allow(unused)]
            let $back = |v: Vec<u64>| -> Vec<FieldElement> {
                v.into_iter().map(|c| ctx.from_u64(c)).collect()
            };
            $body
        } else {
            let $a = ExtArith::new(ctx);
            #[allow(unused)]
            let $lift = |v: &[FieldElement]| -> Vec<FieldElement> { v.to_vec() };
            #[allow(unused)]
            let $back = |v: Vec<FieldElement>| -> Vec<FieldElement> { v };
            $body
        }
    }};
}

/// A dense polynomial over F_q; `coeffs[i]` is the coefficient of x^i.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    ctx: FieldCtx,
    coeffs: Vec<FieldElement>,
}

/// A polynomial written as unit · Π factor^multiplicity, factors monic
/// irreducible in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: FieldElement,
    pub factors: Vec<(Polynomial, usize)>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Polynomial {
    pub fn new(ctx: &FieldCtx, mut coeffs: Vec<FieldElement>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|c| !ctx.contains(c)) {
            return invalid(format!("coefficient {bad} does not belong to {ctx:?}"));
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(Polynomial {
            ctx: ctx.clone(),
            coeffs,
        })
    }

    fn from_trusted(ctx: &FieldCtx, coeffs: Vec<FieldElement>) -> Self {
        debug_assert!(coeffs.last().is_none_or(|c| !c.is_zero()));
        Polynomial {
            ctx: ctx.clone(),
            coeffs,
        }
    }

    /// Coefficients given as integers, embedded through the prime field.
    pub fn from_u64s(ctx: &FieldCtx, coeffs: &[u64]) -> Self {
        let v = coeffs.iter().map(|&c| ctx.from_u64(c)).collect();
        Self::new(ctx, v).expect("prime-field coefficients always belong")
    }

    pub fn from_i64s(ctx: &FieldCtx, coeffs: &[i64]) -> Self {
        let v = coeffs.iter().map(|&c| ctx.from_i64(c)).collect();
        Self::new(ctx, v).expect("prime-field coefficients always belong")
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        Self::from_trusted(ctx, Vec::new())
    }

    pub fn one(ctx: &FieldCtx) -> Self {
        Self::from_trusted(ctx, vec![ctx.one()])
    }

    pub fn x(ctx: &FieldCtx) -> Self {
        Self::from_trusted(ctx, vec![ctx.zero(), ctx.one()])
    }

    /// x − a.
    pub fn linear(ctx: &FieldCtx, a: &FieldElement) -> Self {
        Self::from_trusted(ctx, vec![ctx.neg(a), ctx.one()])
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&self.ctx.one())
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    /// Coefficient of x^i (zero past the degree).
    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs
            .get(i)
            .copied()
            .unwrap_or_else(|| self.ctx.zero())
    }

    fn same_ctx(&self, other: &Polynomial) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::MixedContexts)
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_ctx(other)?;
        let v = with_arith!(&self.ctx, |a, lift, back| back(kernel::add(
            &a,
            &lift(&self.coeffs),
            &lift(&other.coeffs)
        )));
        Ok(Self::from_trusted(&self.ctx, v))
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_ctx(other)?;
        let v = with_arith!(&self.ctx, |a, lift, back| back(kernel::sub(
            &a,
            &lift(&self.coeffs),
            &lift(&other.coeffs)
        )));
        Ok(Self::from_trusted(&self.ctx, v))
    }

    pub fn neg(&self) -> Polynomial {
        let v = self.coeffs.iter().map(|c| self.ctx.neg(c)).collect();
        Self::from_trusted(&self.ctx, v)
    }

    pub fn scale(&self, c: &FieldElement) -> Polynomial {
        if c.is_zero() {
            return Self::zero(&self.ctx);
        }
        let v = self.coeffs.iter().map(|x| self.ctx.mul(x, c)).collect();
        Self::from_trusted(&self.ctx, v)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_ctx(other)?;
        let v = with_arith!(&self.ctx, |a, lift, back| back(kernel::mul(
            &a,
            &lift(&self.coeffs),
            &lift(&other.coeffs)
        )));
        Ok(Self::from_trusted(&self.ctx, v))
    }

    pub fn pow(&self, mut exp: u64) -> Polynomial {
        let mut acc = Self::one(&self.ctx);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).unwrap();
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base).unwrap();
            }
        }
        acc
    }

    /// Quotient and remainder.
    pub fn divmod(&self, other: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        self.same_ctx(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (q, r) = with_arith!(&self.ctx, |a, lift, back| {
            let (q, r) = kernel::divrem(&a, &lift(&self.coeffs), &lift(&other.coeffs));
            (back(q), back(r))
        });
        Ok((
            Self::from_trusted(&self.ctx, q),
            Self::from_trusted(&self.ctx, r),
        ))
    }

    pub fn rem(&self, other: &Polynomial) -> Result<Polynomial> {
        Ok(self.divmod(other)?.1)
    }

    /// Monic greatest common divisor; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Polynomial) -> Result<Polynomial> {
        self.same_ctx(other)?;
        let v = with_arith!(&self.ctx, |a, lift, back| back(kernel::gcd(
            &a,
            &lift(&self.coeffs),
            &lift(&other.coeffs)
        )));
        Ok(Self::from_trusted(&self.ctx, v))
    }

    /// self^exp mod m.
    pub fn powmod(&self, exp: u128, m: &Polynomial) -> Result<Polynomial> {
        self.same_ctx(m)?;
        if m.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let v = with_arith!(&self.ctx, |a, lift, back| back(kernel::powmod(
            &a,
            &lift(&self.coeffs),
            exp,
            &lift(&m.coeffs)
        )));
        Ok(Self::from_trusted(&self.ctx, v))
    }

    /// The monic associate and the leading coefficient; zero stays zero.
    pub fn monic(&self) -> (FieldElement, Polynomial) {
        match self.leading() {
            None => (self.ctx.zero(), self.clone()),
            Some(lead) => {
                let inv = self.ctx.inv(&lead).unwrap();
                (lead, self.scale(&inv))
            }
        }
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        self.coeffs.iter().rev().fold(self.ctx.zero(), |acc, c| {
            self.ctx.add(&self.ctx.mul(&acc, x), c)
        })
    }

    pub fn derivative(&self) -> Polynomial {
        self.hasse_derivative(1)
    }

    /// D^{(k)} f = Σ c_i C(i, k) x^{i−k}, binomials reduced mod p.
    pub fn hasse_derivative(&self, k: usize) -> Polynomial {
        let v = with_arith!(&self.ctx, |a, lift, back| back(kernel::hasse(
            &a,
            &lift(&self.coeffs),
            k
        )));
        Self::from_trusted(&self.ctx, v)
    }

    /// The coefficients of f re-expressed in `target`: identity on the same
    /// field, embedding through F_p for a prime-field polynomial.
    fn coeffs_in(&self, target: &FieldCtx) -> Result<Vec<FieldElement>> {
        if *target == self.ctx {
            return Ok(self.coeffs.clone());
        }
        if self.ctx.degree() == 1 && self.ctx.p() == target.p() {
            return Ok(self
                .coeffs
                .iter()
                .map(|c| target.from_u64(c.coords()[0] as u64))
                .collect());
        }
        invalid(format!(
            "cannot evaluate a polynomial over {:?} in {target:?}",
            self.ctx
        ))
    }

    /// (D^{(k)} f(a))_{k ≤ deg f}, i.e. the coefficients of f in powers of
    /// (x − a). `actx` is the field of `a`: the polynomial's own field or,
    /// for polynomials over F_p, any extension of F_p.
    pub fn taylor_at(&self, actx: &FieldCtx, a: &FieldElement) -> Result<Vec<FieldElement>> {
        if !actx.contains(a) {
            return invalid(format!("{a} does not belong to {actx:?}"));
        }
        let mut work = self.coeffs_in(actx)?;
        let mut out = Vec::with_capacity(work.len());
        // Repeated synthetic division by (x − a).
        while !work.is_empty() {
            let mut carry = actx.zero();
            for c in work.iter_mut().rev() {
                let v = actx.add(c, &actx.mul(&carry, a));
                *c = carry;
                carry = v;
            }
            out.push(carry);
            work.pop();
        }
        Ok(out)
    }

    /// Largest r with (x − a)^r | f.
    pub fn root_multiplicity(&self, actx: &FieldCtx, a: &FieldElement) -> Result<usize> {
        if self.is_zero() {
            return invalid("root multiplicity of the zero polynomial is undefined");
        }
        if !actx.contains(a) {
            return invalid(format!("{a} does not belong to {actx:?}"));
        }
        let mut work = self.coeffs_in(actx)?;
        let mut r = 0;
        loop {
            let mut carry = actx.zero();
            for c in work.iter_mut().rev() {
                let v = actx.add(c, &actx.mul(&carry, a));
                *c = carry;
                carry = v;
            }
            if !carry.is_zero() {
                return Ok(r);
            }
            r += 1;
            work.pop();
        }
    }

    fn check_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            invalid("operation undefined for the zero polynomial")
        } else {
            Ok(())
        }
    }

    /// Squarefree parts with their multiplicities, of the monic associate.
    pub fn squarefree_decomposition(&self) -> Result<Vec<(Polynomial, usize)>> {
        self.check_nonzero()?;
        let (_, m) = self.monic();
        let parts = with_arith!(&self.ctx, |a, lift, back| kernel::squarefree(
            &a,
            &lift(&m.coeffs)
        )
        .into_iter()
        .map(|(f, k)| (back(f), k))
        .collect::<Vec<_>>());
        Ok(parts
            .into_iter()
            .map(|(f, k)| (Self::from_trusted(&self.ctx, f), k))
            .collect())
    }

    /// For squarefree f: the products of irreducible factors of each degree.
    pub fn distinct_degree_split(&self) -> Result<Vec<(Polynomial, usize)>> {
        self.check_nonzero()?;
        let (_, m) = self.monic();
        let parts = with_arith!(&self.ctx, |a, lift, back| {
            let (parts, _) = kernel::distinct_degree(&a, &lift(&m.coeffs), None);
            parts
                .into_iter()
                .map(|(f, d)| (back(f), d))
                .collect::<Vec<_>>()
        });
        Ok(parts
            .into_iter()
            .map(|(f, d)| (Self::from_trusted(&self.ctx, f), d))
            .collect())
    }

    /// Splits a squarefree polynomial whose irreducible factors all have
    /// degree d. Deterministic in `seed`.
    pub fn equal_degree_split(&self, d: usize, seed: u64) -> Result<Vec<Polynomial>> {
        self.check_nonzero()?;
        let n = self.degree().unwrap();
        if d == 0 || n % d != 0 {
            return invalid(format!("degree {n} is not a positive multiple of {d}"));
        }
        let (_, m) = self.monic();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts = with_arith!(&self.ctx, |a, lift, back| kernel::equal_degree(
            &a,
            &lift(&m.coeffs),
            d,
            &mut rng
        )
        .into_iter()
        .map(back)
        .collect::<Vec<_>>());
        Ok(parts
            .into_iter()
            .map(|f| Self::from_trusted(&self.ctx, f))
            .collect())
    }

    /// Complete factorization. Deterministic in `seed`; the result itself
    /// does not depend on the seed.
    pub fn factorize(&self, seed: u64) -> Result<Factorization> {
        self.check_nonzero()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (unit, factors) = with_arith!(&self.ctx, |a, lift, back| {
            let (u, fs) = kernel::factorize(&a, &lift(&self.coeffs), &mut rng);
            let u = back(vec![u]).pop().unwrap();
            (
                u,
                fs.into_iter()
                    .map(|(f, k)| (back(f), k))
                    .collect::<Vec<_>>(),
            )
        });
        Ok(Factorization {
            unit,
            factors: factors
                .into_iter()
                .map(|(f, k)| (Self::from_trusted(&self.ctx, f), k))
                .collect(),
        })
    }

    /// Irreducible-factor degree data, examining factors up to `max_degree`.
    pub fn degree_profile(&self, max_degree: Option<usize>) -> Result<DegreeProfile> {
        self.check_nonzero()?;
        Ok(with_arith!(&self.ctx, |a, lift, back| {
            kernel::degree_profile(&a, &lift(&self.coeffs), max_degree)
        }))
    }

    /// Irreducibility of a monic polynomial of positive degree.
    pub fn is_irreducible(&self) -> Result<bool> {
        if self.degree().unwrap_or(0) == 0 {
            return invalid("irreducibility is undefined for constants");
        }
        if !self.is_monic() {
            return invalid("irreducibility test expects a monic polynomial");
        }
        Ok(with_arith!(&self.ctx, |a, lift, back| {
            kernel::is_irreducible(&a, &lift(&self.coeffs))
        }))
    }

    /// `p^e: c0,c1,...,cn`, extension coefficients written `a0+a1*t+...`.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("{}^{}: {}", self.ctx.p(), self.ctx.degree(), body.join(","))
    }

    /// Parses [`Polynomial::to_text`] output; the header must match `ctx`.
    pub fn parse(ctx: &FieldCtx, s: &str) -> Result<Polynomial> {
        let (head, body) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("missing ':' in polynomial '{s}'")))?;
        let (p, e) = head
            .trim()
            .split_once('^')
            .ok_or_else(|| Error::InvalidInput(format!("bad field header '{head}'")))?;
        let p: u64 = p
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad prime '{p}'")))?;
        let e: usize = e
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad degree '{e}'")))?;
        if p != ctx.p() || e != ctx.degree() {
            return invalid(format!("polynomial over {p}^{e} read into {ctx:?}"));
        }
        let body = body.trim();
        let coeffs = if body.is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|c| ctx.parse_element(c))
                .collect::<Result<Vec<_>>>()?
        };
        Polynomial::new(ctx, coeffs)
    }
}

impl Factorization {
    /// unit · Π factor^multiplicity, as a polynomial over `ctx`.
    pub fn expand(&self, ctx: &FieldCtx) -> Result<Polynomial> {
        let mut acc = Polynomial::new(ctx, vec![self.unit])?;
        for (f, k) in &self.factors {
            acc = acc.mul(&f.pow(*k as u64))?;
        }
        Ok(acc)
    }

    /// Total degree counted with multiplicity.
    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(f, k)| f.degree().unwrap() * k)
            .sum()
    }
}

/// π(i): the number of monic irreducible polynomials of degree i over F_q,
/// (1/i) Σ_{d | i} μ(d) q^{i/d}.
pub fn count_irreducibles(q: &BigUint, i: u64) -> BigUint {
    assert!(i >= 1, "degree must be positive");
    let mut total = BigInt::zero();
    for d in ntheory::divisors_small(i) {
        let mu = ntheory::mobius(d);
        if mu == 0 {
            continue;
        }
        let term = BigInt::from(q.pow((i / d) as u32));
        if mu > 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    let (quot, r) = (total.clone() / BigInt::from(i), total % BigInt::from(i));
    debug_assert!(r.is_zero());
    quot.to_biguint().expect("necklace count is nonnegative")
}
