//! Arithmetic in F_p and F_{p^e} = F_p[t]/(m(t)) for an explicit monic
//! irreducible modulus m.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ntheory;
use crate::poly::kernel::{self, PrimeArith};

/// Largest supported extension degree.
pub const MAX_EXTENSION_DEGREE: usize = 16;

/// Exclusive upper bound on the characteristic.
pub const MAX_CHARACTERISTIC: u64 = 1 << 31;

/// An element of F_{p^e} in coordinates on the basis 1, t, ..., t^{e-1}.
///
/// Elements carry no reference to their field; operations go through the
/// owning [`FieldCtx`], which checks the coordinate count.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    len: u8,
    c: [u32; MAX_EXTENSION_DEGREE],
}

impl FieldElement {
    fn zeroed(len: usize) -> Self {
        FieldElement {
            len: len as u8,
            c: [0; MAX_EXTENSION_DEGREE],
        }
    }

    pub fn coords(&self) -> &[u32] {
        &self.c[..self.len as usize]
    }

    pub fn degree(&self) -> usize {
        self.len as usize
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&x| x == 0)
    }

    /// The element as an integer, when it lies in the prime field.
    pub fn as_prime(&self) -> Option<u64> {
        if self.coords()[1..].iter().all(|&x| x == 0) {
            Some(self.c[0] as u64)
        } else {
            None
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_coords(self.coords()))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_coords(self.coords()))
    }
}

fn format_coords(c: &[u32]) -> String {
    let mut terms = Vec::new();
    for (j, &v) in c.iter().enumerate() {
        if v == 0 {
            continue;
        }
        terms.push(match j {
            0 => format!("{v}"),
            1 => format!("{v}*t"),
            _ => format!("{v}*t^{j}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

struct FieldInner {
    p: u64,
    e: usize,
    modulus: Vec<u64>,
    /// Tr(t^j) for j < e.
    trace_basis: Vec<u64>,
    order_factors: OnceLock<Result<Vec<(u64, u32)>>>,
}

/// Arithmetic context for F_{p^e}. Cheap to clone and shareable across threads.
#[derive(Clone)]
pub struct FieldCtx(Arc<FieldInner>);

/// Serialized form of a field context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub p: u64,
    pub e: usize,
    pub modulus: Vec<u64>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.0.p, self.0.e, self.0.modulus)
    }
}

impl FieldCtx {
    /// Builds F_{p^e}. Without an explicit modulus, a monic irreducible of
    /// degree `e` is found by seeded random search, so the same seed always
    /// yields the same field representation.
    pub fn new(p: u64, e: usize, modulus: Option<&[u64]>, seed: u64) -> Result<Self> {
        if p >= MAX_CHARACTERISTIC {
            return invalid(format!("characteristic {p} must be below 2^31"));
        }
        if !ntheory::is_prime(p) {
            return invalid(format!("{p} is not prime"));
        }
        if e == 0 || e > MAX_EXTENSION_DEGREE {
            return invalid(format!(
                "extension degree {e} outside 1..={MAX_EXTENSION_DEGREE}"
            ));
        }
        let arith = PrimeArith::new(p);
        let modulus = match modulus {
            Some(m) => {
                let m: Vec<u64> = m.iter().map(|&c| c % p).collect();
                if m.len() != e + 1 || m[e] != 1 {
                    return invalid(format!("modulus must be monic of degree {e}"));
                }
                if !kernel::is_irreducible(&arith, &m) {
                    return invalid(format!("modulus {m:?} is reducible over F_{p}"));
                }
                m
            }
            None if e == 1 => vec![0, 1],
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                loop {
                    let mut m: Vec<u64> = (0..e).map(|_| rng.random_range(0..p)).collect();
                    m.push(1);
                    if kernel::is_irreducible(&arith, &m) {
                        break m;
                    }
                }
            }
        };
        let mut inner = FieldInner {
            p,
            e,
            modulus,
            trace_basis: Vec::new(),
            order_factors: OnceLock::new(),
        };
        let probe = FieldCtx(Arc::new(FieldInner {
            p,
            e,
            modulus: inner.modulus.clone(),
            trace_basis: vec![0; e],
            order_factors: OnceLock::new(),
        }));
        inner.trace_basis = (0..e)
            .map(|j| {
                let mut c = vec![0u64; e];
                c[j] = 1;
                probe.trace(&probe.from_coords(&c)).c[0] as u64
            })
            .collect();
        Ok(FieldCtx(Arc::new(inner)))
    }

    pub fn prime(p: u64) -> Result<Self> {
        Self::new(p, 1, None, 0)
    }

    pub fn from_record(rec: &FieldRecord) -> Result<Self> {
        Self::new(rec.p, rec.e, Some(&rec.modulus), 0)
    }

    pub fn record(&self) -> FieldRecord {
        FieldRecord {
            p: self.0.p,
            e: self.0.e,
            modulus: self.0.modulus.clone(),
        }
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.e
    }

    pub fn modulus(&self) -> &[u64] {
        &self.0.modulus
    }

    /// Field size q = p^e, if it fits in 128 bits.
    pub fn size(&self) -> Option<u128> {
        (self.0.p as u128).checked_pow(self.0.e as u32)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::zeroed(self.0.e)
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    /// The class of t, i.e. a root of the modulus.
    pub fn generator(&self) -> FieldElement {
        if self.0.e == 1 {
            return self.from_u64((self.0.p - self.0.modulus[0]) % self.0.p);
        }
        let mut x = self.zero();
        x.c[1] = 1;
        x
    }

    /// Embeds an integer through the prime field.
    pub fn from_u64(&self, v: u64) -> FieldElement {
        let mut x = self.zero();
        x.c[0] = (v % self.0.p) as u32;
        x
    }

    pub fn from_i64(&self, v: i64) -> FieldElement {
        self.from_u64(v.rem_euclid(self.0.p as i64) as u64)
    }

    /// Coordinates beyond the first `e` must be absent; each is reduced mod p.
    pub fn from_coords(&self, coords: &[u64]) -> FieldElement {
        assert!(
            coords.len() <= self.0.e,
            "too many coordinates for F_p^{}",
            self.0.e
        );
        let mut x = self.zero();
        for (slot, &c) in x.c.iter_mut().zip(coords) {
            *slot = (c % self.0.p) as u32;
        }
        x
    }

    /// Element number `index` in the canonical enumeration of the field
    /// (base-p digits of `index` as coordinates).
    pub fn element(&self, mut index: u64) -> FieldElement {
        let mut x = self.zero();
        for j in 0..self.0.e {
            x.c[j] = (index % self.0.p) as u32;
            index /= self.0.p;
        }
        x
    }

    /// Inverse of [`FieldCtx::element`].
    pub fn index_of(&self, a: &FieldElement) -> u64 {
        a.coords()
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.0.p + c as u64)
    }

    /// Every element in canonical order. Panics for fields above 2^32 elements.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self
            .size()
            .filter(|&q| q <= 1 << 32)
            .expect("field too large to enumerate") as u64;
        (0..q).map(move |i| self.element(i))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mut x = self.zero();
        for j in 0..self.0.e {
            x.c[j] = rng.random_range(0..self.0.p) as u32;
        }
        x
    }

    pub fn contains(&self, a: &FieldElement) -> bool {
        a.degree() == self.0.e && a.coords().iter().all(|&c| (c as u64) < self.0.p)
    }

    fn check(&self, a: &FieldElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::MixedContexts)
        }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p as u32;
        let mut x = *a;
        for j in 0..self.0.e {
            let s = a.c[j] + b.c[j];
            x.c[j] = if s >= p { s - p } else { s };
        }
        x
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p as u32;
        let mut x = *a;
        for j in 0..self.0.e {
            x.c[j] = if a.c[j] >= b.c[j] {
                a.c[j] - b.c[j]
            } else {
                a.c[j] + p - b.c[j]
            };
        }
        x
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        self.sub(&self.zero(), a)
    }

    /// Multiplication by an element of the prime field.
    pub fn scale(&self, a: &FieldElement, s: u64) -> FieldElement {
        let p = self.0.p;
        let s = s % p;
        let mut x = *a;
        for j in 0..self.0.e {
            x.c[j] = ((a.c[j] as u64 * s) % p) as u32;
        }
        x
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.0.p;
        let e = self.0.e;
        if e == 1 {
            let mut x = *a;
            x.c[0] = ((a.c[0] as u64 * b.c[0] as u64) % p) as u32;
            return x;
        }
        let mut prod = [0u64; 2 * MAX_EXTENSION_DEGREE];
        for i in 0..e {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..e {
                prod[i + j] = (prod[i + j] + a.c[i] as u64 * b.c[j] as u64) % p;
            }
        }
        let m = &self.0.modulus;
        for k in (e..2 * e - 1).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            prod[k] = 0;
            let neg = p - top;
            for j in 0..e {
                prod[k - e + j] = (prod[k - e + j] + neg * m[j]) % p;
            }
        }
        let mut x = self.zero();
        for j in 0..e {
            x.c[j] = prod[j] as u32;
        }
        x
    }

    pub fn square(&self, a: &FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &FieldElement, mut exp: u128) -> FieldElement {
        let mut acc = self.one();
        let mut base = *a;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    /// a^{p^k}.
    pub fn frobenius(&self, a: &FieldElement, k: usize) -> FieldElement {
        let mut x = *a;
        for _ in 0..k % self.0.e {
            x = self.pow(&x, self.0.p as u128);
        }
        x
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.0.p;
        if self.0.e == 1 {
            return Ok(self.from_u64(ntheory::inv_mod_prime(a.c[0] as u64, p)));
        }
        // Extended Euclid in F_p[t]: find s with s·a ≡ 1 mod m.
        let arith = PrimeArith::new(p);
        let av: Vec<u64> =
            kernel::trimmed_with(&arith, a.coords().iter().map(|&c| c as u64).collect());
        let (g, s, _) = kernel::ext_gcd(&arith, &av, &self.0.modulus);
        debug_assert_eq!(g, vec![1]);
        Ok(self.from_coords(&s))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Checked variants that reject elements from another field.
    pub fn try_add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn try_mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    /// Absolute trace Σ_{j<e} a^{p^j}, returned as an element of the prime
    /// subfield (embedded in this field).
    pub fn trace(&self, a: &FieldElement) -> FieldElement {
        let mut acc = *a;
        let mut x = *a;
        for _ in 1..self.0.e {
            x = self.pow(&x, self.0.p as u128);
            acc = self.add(&acc, &x);
        }
        acc
    }

    /// The trace as an integer in [0, p), using the precomputed linear form.
    pub fn trace_fp(&self, a: &FieldElement) -> u64 {
        let p = self.0.p;
        a.coords()
            .iter()
            .zip(&self.0.trace_basis)
            .fold(0u64, |acc, (&c, &t)| (acc + c as u64 * t) % p)
    }

    /// The F_p-linear form x ↦ Tr(b·x) as a coefficient vector on the basis.
    pub fn trace_form(&self, b: &FieldElement) -> Vec<u64> {
        (0..self.0.e)
            .map(|j| {
                let mut c = vec![0u64; self.0.e];
                c[j] = 1;
                self.trace_fp(&self.mul(b, &self.from_coords(&c)))
            })
            .collect()
    }

    /// Prime factorization of p^e − 1, computed once per context.
    pub fn group_order_factors(&self) -> Result<&[(u64, u32)]> {
        self.0
            .order_factors
            .get_or_init(|| {
                let q = self
                    .size()
                    .filter(|&q| q <= u64::MAX as u128)
                    .ok_or_else(|| {
                        Error::ResourceCap(format!(
                            "p^e - 1 for p={}, e={} exceeds 64 bits",
                            self.0.p, self.0.e
                        ))
                    })? as u64;
                Ok(ntheory::factor(q - 1))
            })
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(|e| e.clone())
    }

    /// p^e − 1, when it fits in 64 bits.
    pub fn group_order(&self) -> Result<u64> {
        self.group_order_factors()?;
        Ok((self.size().unwrap() - 1) as u64)
    }

    /// Least k ≥ 1 with a^k = 1.
    pub fn mult_order(&self, a: &FieldElement) -> Result<u64> {
        if a.is_zero() {
            return invalid("the zero element has no multiplicative order");
        }
        let factors = self.group_order_factors()?.to_vec();
        let mut k = self.group_order()?;
        let one = self.one();
        for (l, exp) in factors {
            for _ in 0..exp {
                if self.pow(a, (k / l) as u128) == one {
                    k /= l;
                } else {
                    break;
                }
            }
        }
        Ok(k)
    }

    /// True when a lies in F_{p^d} for some proper divisor d of e.
    pub fn lies_in_proper_subfield(&self, a: &FieldElement) -> bool {
        let e = self.0.e;
        (1..e)
            .filter(|d| e % d == 0)
            .any(|d| self.frobenius(a, d) == *a)
    }

    /// True when b = a^{p^j} for some j < e.
    pub fn are_conjugate(&self, a: &FieldElement, b: &FieldElement) -> bool {
        let mut x = *a;
        for _ in 0..self.0.e {
            if x == *b {
                return true;
            }
            x = self.pow(&x, self.0.p as u128);
        }
        false
    }

    /// Distinct Galois conjugates of a, starting with a itself.
    pub fn conjugates(&self, a: &FieldElement) -> Vec<FieldElement> {
        let mut out = vec![*a];
        let mut x = self.pow(a, self.0.p as u128);
        while x != *a {
            out.push(x);
            x = self.pow(&x, self.0.p as u128);
        }
        out
    }

    /// Minimal polynomial of a over F_p, monic, low-degree coefficient first.
    pub fn minimal_polynomial(&self, a: &FieldElement) -> Vec<u64> {
        let mut poly = vec![self.one()];
        for c in self.conjugates(a) {
            let mut next = vec![self.zero(); poly.len() + 1];
            for (i, coef) in poly.iter().enumerate() {
                next[i + 1] = self.add(&next[i + 1], coef);
                next[i] = self.sub(&next[i], &self.mul(coef, &c));
            }
            poly = next;
        }
        poly.iter()
            .map(|c| {
                c.as_prime()
                    .expect("minimal polynomial has prime-field coefficients")
            })
            .collect()
    }

    /// Parses `a0+a1*t+a2*t^2` (terms in any order, `t` alone allowed).
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let mut coords = vec![0u64; self.0.e];
        let s = s.trim();
        if s.is_empty() {
            return invalid("empty field element");
        }
        for term in s.split('+') {
            let term = term.trim();
            let (coef, power) = if let Some(idx) = term.find('t') {
                let coef = term[..idx].trim_end_matches('*').trim();
                let coef = if coef.is_empty() {
                    1
                } else {
                    parse_int(coef, self.0.p)?
                };
                let rest = term[idx + 1..].trim();
                let power = if rest.is_empty() {
                    1
                } else if let Some(pw) = rest.strip_prefix('^') {
                    pw.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidInput(format!("bad exponent in '{term}'")))?
                } else {
                    return invalid(format!("cannot parse term '{term}'"));
                };
                (coef, power)
            } else {
                (parse_int(term, self.0.p)?, 0)
            };
            if power >= self.0.e {
                return invalid(format!(
                    "power t^{power} not reduced for degree {}",
                    self.0.e
                ));
            }
            coords[power] = (coords[power] + coef) % self.0.p;
        }
        Ok(self.from_coords(&coords))
    }
}

fn parse_int(s: &str, p: u64) -> Result<u64> {
    let v: i64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad integer '{s}'")))?;
    Ok(v.rem_euclid(p as i64) as u64)
}
