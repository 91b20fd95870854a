//! Dense univariate polynomial algorithms over a finite field, generic over
//! the coefficient representation. Vectors hold the coefficient of x^i at
//! index i with no trailing zeros; the zero polynomial is the empty vector.
//!
//! Prime fields run on bare `u64` residues ([`PrimeArith`]) with 128-bit lazy
//! accumulation; extension fields go through [`FieldCtx`] ([`ExtArith`]).

use std::cmp::Ordering;
use std::fmt::Debug;

use rand::Rng;

use crate::field::{FieldCtx, FieldElement};
use crate::ntheory;

/// Coefficient arithmetic used by the polynomial algorithms.
pub trait Arith: Sync {
    type E: Copy + Eq + Ord + Debug + Send + Sync;

    fn p(&self) -> u64;
    fn ext_degree(&self) -> usize;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn from_u64(&self, v: u64) -> Self::E;
    fn is_zero(&self, a: Self::E) -> bool;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn sub(&self, a: Self::E, b: Self::E) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    /// Panics on zero.
    fn inv(&self, a: Self::E) -> Self::E;
    /// Multiplication by an integer through the prime field.
    fn scale_int(&self, a: Self::E, s: u64) -> Self::E;
    /// The unique b with b^p = a.
    fn pth_root(&self, a: Self::E) -> Self::E;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::E;

    /// Field size p^e. Callers ensure it fits.
    fn q(&self) -> u128 {
        (self.p() as u128).pow(self.ext_degree() as u32)
    }

    fn neg(&self, a: Self::E) -> Self::E {
        self.sub(self.zero(), a)
    }

    fn poly_mul(&self, a: &[Self::E], b: &[Self::E]) -> Vec<Self::E> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        trim(self, &mut out);
        out
    }

    /// Quotient and remainder; `b` must be nonzero.
    fn poly_divrem(&self, a: &[Self::E], b: &[Self::E]) -> (Vec<Self::E>, Vec<Self::E>) {
        assert!(!b.is_empty(), "division by the zero polynomial");
        if a.len() < b.len() {
            return (Vec::new(), a.to_vec());
        }
        let db = b.len() - 1;
        let inv_lead = self.inv(b[db]);
        let mut r = a.to_vec();
        let mut quot = vec![self.zero(); a.len() - db];
        for i in (db..a.len()).rev() {
            let c = self.mul(r[i], inv_lead);
            quot[i - db] = c;
            if self.is_zero(c) {
                continue;
            }
            for j in 0..=db {
                r[i - db + j] = self.sub(r[i - db + j], self.mul(c, b[j]));
            }
        }
        r.truncate(db);
        trim(self, &mut r);
        trim(self, &mut quot);
        (quot, r)
    }

    /// Σ_i h_i · rows[i], truncated to the row length.
    fn combine_rows(&self, rows: &[Vec<Self::E>], h: &[Self::E], width: usize) -> Vec<Self::E> {
        let mut out = vec![self.zero(); width];
        for (row, &c) in rows.iter().zip(h) {
            if self.is_zero(c) {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o = self.add(*o, self.mul(c, r));
            }
        }
        trim(self, &mut out);
        out
    }
}

/// F_p on bare residues.
#[derive(Clone, Copy, Debug)]
pub struct PrimeArith {
    p: u64,
}

impl PrimeArith {
    pub fn new(p: u64) -> Self {
        PrimeArith { p }
    }
}

const KARATSUBA_THRESHOLD: usize = 64;

impl PrimeArith {
    fn schoolbook(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let p = self.p as u128;
        let mut acc = vec![0u128; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let x = x as u128;
            for (slot, &y) in acc[i..].iter_mut().zip(b) {
                *slot += x * y as u128;
            }
        }
        acc.into_iter().map(|v| (v % p) as u64).collect()
    }

    fn add_into(&self, dst: &mut [u64], src: &[u64]) {
        for (d, &s) in dst.iter_mut().zip(src) {
            let v = *d + s;
            *d = if v >= self.p { v - self.p } else { v };
        }
    }

    fn sub_into(&self, dst: &mut [u64], src: &[u64]) {
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = if *d >= s { *d - s } else { *d + self.p - s };
        }
    }

    /// Product without trimming; length a.len() + b.len() - 1.
    fn mul_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        if short.len() < KARATSUBA_THRESHOLD {
            return self.schoolbook(short, long);
        }
        if 2 * short.len() <= long.len() {
            // Unbalanced: multiply chunk by chunk.
            let mut out = vec![0u64; a.len() + b.len() - 1];
            for (k, chunk) in long.chunks(short.len()).enumerate() {
                let part = self.mul_raw(short, chunk);
                self.add_into(&mut out[k * short.len()..], &part);
            }
            return out;
        }
        let m = long.len() / 2;
        let (a0, a1) = long.split_at(m);
        let (b0, b1) = if short.len() > m {
            short.split_at(m)
        } else {
            (short, &short[..0])
        };
        let z0 = self.mul_raw(a0, b0);
        let z2 = if b1.is_empty() {
            Vec::new()
        } else {
            self.mul_raw(a1, b1)
        };
        let mut sa = a0.to_vec();
        self.add_into(&mut sa, a1);
        if a1.len() > a0.len() {
            sa.extend_from_slice(&a1[a0.len()..]);
        }
        let mut sb = b0.to_vec();
        self.add_into(&mut sb, b1);
        if b1.len() > b0.len() {
            sb.extend_from_slice(&b1[b0.len()..]);
        }
        let mut z1 = self.mul_raw(&sa, &sb);
        self.sub_into(&mut z1, &z0);
        self.sub_into(&mut z1, &z2);
        let mut out = vec![0u64; a.len() + b.len() - 1];
        self.add_into(&mut out, &z0);
        self.add_into(&mut out[m..], &z1);
        if !z2.is_empty() {
            self.add_into(&mut out[2 * m..], &z2);
        }
        out
    }
}

impl Arith for PrimeArith {
    type E = u64;

    fn p(&self) -> u64 {
        self.p
    }
    fn ext_degree(&self) -> usize {
        1
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_u64(&self, v: u64) -> u64 {
        v % self.p
    }
    fn is_zero(&self, a: u64) -> bool {
        a == 0
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }
    fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        ntheory::inv_mod_prime(a, self.p)
    }
    fn scale_int(&self, a: u64, s: u64) -> u64 {
        (a * (s % self.p)) % self.p
    }
    fn pth_root(&self, a: u64) -> u64 {
        a
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.random_range(0..self.p)
    }

    fn poly_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = self.mul_raw(a, b);
        trim(self, &mut out);
        out
    }

    fn poly_divrem(&self, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
        assert!(!b.is_empty(), "division by the zero polynomial");
        if a.len() < b.len() {
            return (Vec::new(), a.to_vec());
        }
        let p = self.p;
        let db = b.len() - 1;
        let inv_lead = self.inv(b[db]);
        let mut r: Vec<u128> = a.iter().map(|&x| x as u128).collect();
        let mut quot = vec![0u64; a.len() - db];
        for i in (db..a.len()).rev() {
            let top = (r[i] % p as u128) as u64;
            let c = (top * inv_lead) % p;
            quot[i - db] = c;
            if c == 0 {
                continue;
            }
            let neg = (p - c) as u128;
            for (slot, &bj) in r[i - db..i].iter_mut().zip(b) {
                *slot += neg * bj as u128;
            }
        }
        let mut rem: Vec<u64> = r[..db].iter().map(|&v| (v % p as u128) as u64).collect();
        trim(self, &mut rem);
        trim(self, &mut quot);
        (quot, rem)
    }

    fn combine_rows(&self, rows: &[Vec<u64>], h: &[u64], width: usize) -> Vec<u64> {
        let mut acc = vec![0u128; width];
        for (row, &c) in rows.iter().zip(h) {
            if c == 0 {
                continue;
            }
            let c = c as u128;
            for (o, &r) in acc.iter_mut().zip(row) {
                *o += c * r as u128;
            }
        }
        let mut out: Vec<u64> = acc
            .into_iter()
            .map(|v| (v % self.p as u128) as u64)
            .collect();
        trim(self, &mut out);
        out
    }
}

/// F_{p^e} through its context.
#[derive(Clone, Copy, Debug)]
pub struct ExtArith<'a> {
    ctx: &'a FieldCtx,
}

impl<'a> ExtArith<'a> {
    pub fn new(ctx: &'a FieldCtx) -> Self {
        ExtArith { ctx }
    }
}

impl Arith for ExtArith<'_> {
    type E = FieldElement;

    fn p(&self) -> u64 {
        self.ctx.p()
    }
    fn ext_degree(&self) -> usize {
        self.ctx.degree()
    }
    fn zero(&self) -> FieldElement {
        self.ctx.zero()
    }
    fn one(&self) -> FieldElement {
        self.ctx.one()
    }
    fn from_u64(&self, v: u64) -> FieldElement {
        self.ctx.from_u64(v)
    }
    fn is_zero(&self, a: FieldElement) -> bool {
        a.is_zero()
    }
    fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.ctx.add(&a, &b)
    }
    fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.ctx.sub(&a, &b)
    }
    fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.ctx.mul(&a, &b)
    }
    fn inv(&self, a: FieldElement) -> FieldElement {
        self.ctx.inv(&a).expect("inverse of zero")
    }
    fn scale_int(&self, a: FieldElement, s: u64) -> FieldElement {
        self.ctx.scale(&a, s)
    }
    fn pth_root(&self, a: FieldElement) -> FieldElement {
        self.ctx.frobenius(&a, self.ctx.degree() - 1)
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        self.ctx.random(rng)
    }
}

// ---------------------------------------------------------------------------
// Basic operations

pub fn trim<A: Arith + ?Sized>(a: &A, v: &mut Vec<A::E>) {
    while let Some(&last) = v.last() {
        if a.is_zero(last) {
            v.pop();
        } else {
            break;
        }
    }
}

pub fn trimmed_with<A: Arith>(a: &A, mut v: Vec<A::E>) -> Vec<A::E> {
    trim(a, &mut v);
    v
}

pub fn degree<E>(v: &[E]) -> Option<usize> {
    v.len().checked_sub(1)
}

pub fn is_one<A: Arith>(a: &A, v: &[A::E]) -> bool {
    v.len() == 1 && v[0] == a.one()
}

pub fn x_poly<A: Arith>(a: &A) -> Vec<A::E> {
    vec![a.zero(), a.one()]
}

pub fn add<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> Vec<A::E> {
    let mut out: Vec<A::E> = (0..u.len().max(v.len()))
        .map(|i| {
            let x = u.get(i).copied().unwrap_or(a.zero());
            let y = v.get(i).copied().unwrap_or(a.zero());
            a.add(x, y)
        })
        .collect();
    trim(a, &mut out);
    out
}

pub fn sub<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> Vec<A::E> {
    let mut out: Vec<A::E> = (0..u.len().max(v.len()))
        .map(|i| {
            let x = u.get(i).copied().unwrap_or(a.zero());
            let y = v.get(i).copied().unwrap_or(a.zero());
            a.sub(x, y)
        })
        .collect();
    trim(a, &mut out);
    out
}

pub fn scale<A: Arith>(a: &A, u: &[A::E], c: A::E) -> Vec<A::E> {
    let mut out: Vec<A::E> = u.iter().map(|&x| a.mul(x, c)).collect();
    trim(a, &mut out);
    out
}

pub fn mul<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> Vec<A::E> {
    a.poly_mul(u, v)
}

pub fn divrem<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> (Vec<A::E>, Vec<A::E>) {
    a.poly_divrem(u, v)
}

pub fn rem<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> Vec<A::E> {
    a.poly_divrem(u, v).1
}

/// Exact quotient; debug-asserts a zero remainder.
pub fn div_exact<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> Vec<A::E> {
    let (q, r) = a.poly_divrem(u, v);
    debug_assert!(r.is_empty(), "inexact division");
    q
}

/// Makes `u` monic; returns (leading coefficient, monic polynomial).
pub fn monic<A: Arith>(a: &A, u: &[A::E]) -> (A::E, Vec<A::E>) {
    match u.last() {
        None => (a.zero(), Vec::new()),
        Some(&lead) => {
            let inv = a.inv(lead);
            (lead, u.iter().map(|&x| a.mul(x, inv)).collect())
        }
    }
}

/// Monic gcd; gcd(0, 0) = 0.
pub fn gcd<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> Vec<A::E> {
    let mut x = u.to_vec();
    let mut y = v.to_vec();
    while !y.is_empty() {
        let r = rem(a, &x, &y);
        x = y;
        y = r;
    }
    monic(a, &x).1
}

/// Returns (g, s, t) with s·u + t·v = g and g monic.
pub fn ext_gcd<A: Arith>(a: &A, u: &[A::E], v: &[A::E]) -> (Vec<A::E>, Vec<A::E>, Vec<A::E>) {
    let (mut r0, mut r1) = (u.to_vec(), v.to_vec());
    let (mut s0, mut s1) = (vec![a.one()], Vec::new());
    let (mut t0, mut t1) = (Vec::new(), vec![a.one()]);
    while !r1.is_empty() {
        let (q, r) = divrem(a, &r0, &r1);
        let s2 = sub(a, &s0, &mul(a, &q, &s1));
        let t2 = sub(a, &t0, &mul(a, &q, &t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_empty() {
        return (r0, s0, t0);
    }
    let inv = a.inv(*r0.last().unwrap());
    (scale(a, &r0, inv), scale(a, &s0, inv), scale(a, &t0, inv))
}

pub fn mulmod<A: Arith>(a: &A, u: &[A::E], v: &[A::E], f: &[A::E]) -> Vec<A::E> {
    rem(a, &mul(a, u, v), f)
}

pub fn powmod<A: Arith>(a: &A, base: &[A::E], mut exp: u128, f: &[A::E]) -> Vec<A::E> {
    let mut acc = rem(a, &[a.one()], f);
    let mut b = rem(a, base, f);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(a, &acc, &b, f);
        }
        exp >>= 1;
        if exp > 0 {
            b = mulmod(a, &b, &b, f);
        }
    }
    acc
}

pub fn eval<A: Arith>(a: &A, u: &[A::E], x: A::E) -> A::E {
    u.iter()
        .rev()
        .fold(a.zero(), |acc, &c| a.add(a.mul(acc, x), c))
}

pub fn derivative<A: Arith>(a: &A, u: &[A::E]) -> Vec<A::E> {
    let mut out: Vec<A::E> = u
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| a.scale_int(c, i as u64))
        .collect();
    trim(a, &mut out);
    out
}

/// k-th Hasse derivative: Σ c_i C(i, k) x^{i-k}.
pub fn hasse<A: Arith>(a: &A, u: &[A::E], k: usize) -> Vec<A::E> {
    let p = a.p();
    let mut out: Vec<A::E> = u
        .iter()
        .enumerate()
        .skip(k)
        .map(|(i, &c)| a.scale_int(c, ntheory::binomial_mod_p(i as u64, k as u64, p)))
        .collect();
    trim(a, &mut out);
    out
}

/// For u with u' = 0, the polynomial v with v^p = u.
fn pth_root_poly<A: Arith>(a: &A, u: &[A::E]) -> Vec<A::E> {
    let p = a.p() as usize;
    u.iter().step_by(p).map(|&c| a.pth_root(c)).collect()
}

/// Canonical order: degree first, then coefficients from the constant term up.
pub fn canonical_cmp<E: Ord>(u: &[E], v: &[E]) -> Ordering {
    u.len().cmp(&v.len()).then_with(|| u.iter().cmp(v.iter()))
}

// ---------------------------------------------------------------------------
// Frobenius

/// The q-power map h ↦ h^q on F_q[x]/(f), stored as the rows x^{iq} mod f.
/// Since coefficients satisfy c^q = c, h^q = Σ h_i (x^{iq} mod f).
pub struct FrobeniusMap<E> {
    rows: Vec<Vec<E>>,
    width: usize,
}

impl<E: Copy> FrobeniusMap<E> {
    pub fn new<A: Arith<E = E>>(a: &A, f: &[E]) -> Self {
        let n = f.len() - 1;
        let xq = powmod(a, &x_poly(a), a.q(), f);
        let mut rows = Vec::with_capacity(n);
        let mut cur = rem(a, &[a.one()], f);
        for i in 0..n {
            rows.push(cur.clone());
            if i + 1 < n {
                cur = mulmod(a, &cur, &xq, f);
            }
        }
        FrobeniusMap { rows, width: n }
    }

    pub fn apply<A: Arith<E = E>>(&self, a: &A, h: &[E]) -> Vec<E> {
        a.combine_rows(&self.rows, h, self.width)
    }
}

// ---------------------------------------------------------------------------
// Factorization

/// Squarefree decomposition of a monic polynomial: pairwise coprime
/// squarefree monic parts with distinct multiplicities, sorted by multiplicity.
pub fn squarefree<A: Arith>(a: &A, f: &[A::E]) -> Vec<(Vec<A::E>, usize)> {
    let mut out = Vec::new();
    squarefree_into(a, f, 1, &mut out);
    out.sort_by_key(|(_, m)| *m);
    out
}

fn squarefree_into<A: Arith>(
    a: &A,
    f: &[A::E],
    scale_mult: usize,
    out: &mut Vec<(Vec<A::E>, usize)>,
) {
    if f.len() <= 1 {
        return;
    }
    let df = derivative(a, f);
    let mut c = gcd(a, f, &df);
    let mut w = div_exact(a, f, &c);
    let mut i = 1;
    while !is_one(a, &w) {
        let y = gcd(a, &w, &c);
        let z = div_exact(a, &w, &y);
        if !is_one(a, &z) {
            out.push((z, i * scale_mult));
        }
        i += 1;
        c = div_exact(a, &c, &y);
        w = y;
    }
    if !is_one(a, &c) {
        let root = pth_root_poly(a, &c);
        squarefree_into(a, &root, scale_mult * a.p() as usize, out);
    }
}

/// Distinct-degree split of a squarefree monic f. Returns (product of all
/// irreducible factors of degree d, d) for each d that occurs, up to
/// `max_degree` when given, plus the product of the unexamined factors of
/// higher degree (1 when everything was split).
pub fn distinct_degree<A: Arith>(
    a: &A,
    f: &[A::E],
    max_degree: Option<usize>,
) -> (Vec<(Vec<A::E>, usize)>, Vec<A::E>) {
    let mut out = Vec::new();
    let mut rest = f.to_vec();
    if f.len() <= 1 {
        return (out, vec![a.one()]);
    }
    let n = f.len() - 1;
    let limit = max_degree.unwrap_or(n);
    let x = x_poly(a);
    // Building the Frobenius matrix pays off once enough steps are needed.
    let steps = limit.min(n / 2).max(1);
    let q_bits = 128 - a.q().leading_zeros() as usize;
    let frob = if steps * q_bits > n {
        Some(FrobeniusMap::new(a, f))
    } else {
        None
    };
    let mut h = rem(a, &x, f);
    let mut d = 0;
    while d < limit {
        d += 1;
        let deg_rest = rest.len() - 1;
        if 2 * d > deg_rest {
            if deg_rest >= d && deg_rest <= limit {
                out.push((rest, deg_rest));
                rest = vec![a.one()];
            }
            break;
        }
        h = match &frob {
            Some(m) => m.apply(a, &h),
            None => powmod(a, &h, a.q(), f),
        };
        let g = gcd(a, &rest, &sub(a, &h, &x));
        if !is_one(a, &g) {
            rest = div_exact(a, &rest, &g);
            out.push((g, d));
        }
        if rest.len() == 1 {
            break;
        }
    }
    (out, rest)
}

/// Splits a squarefree monic f whose irreducible factors all have degree d
/// (Cantor–Zassenhaus; the trace map is used in characteristic 2).
pub fn equal_degree<A: Arith, R: Rng + ?Sized>(
    a: &A,
    f: &[A::E],
    d: usize,
    rng: &mut R,
) -> Vec<Vec<A::E>> {
    let n = f.len() - 1;
    if n == d {
        return vec![f.to_vec()];
    }
    assert!(n % d == 0 && n > 0, "degree {n} is not a multiple of {d}");
    let frob = FrobeniusMap::new(a, f);
    loop {
        let mut r: Vec<A::E> = (0..n).map(|_| a.random(rng)).collect();
        trim(a, &mut r);
        if r.len() <= 1 {
            continue;
        }
        let probe = if a.p() == 2 {
            // Absolute trace Σ_{j < e·d} r^{2^j}.
            let mut acc = r.clone();
            let mut cur = r.clone();
            for _ in 1..a.ext_degree() * d {
                cur = mulmod(a, &cur, &cur, f);
                acc = add(a, &acc, &cur);
            }
            acc
        } else {
            // r^{(q^d - 1)/2} = (r^{1 + q + ... + q^{d-1}})^{(q - 1)/2}.
            let mut norm = r.clone();
            let mut cur = r.clone();
            for _ in 1..d {
                cur = frob.apply(a, &cur);
                norm = mulmod(a, &norm, &cur, f);
            }
            let half = powmod(a, &norm, (a.q() - 1) / 2, f);
            sub(a, &half, &[a.one()])
        };
        let g = gcd(a, f, &probe);
        if g.len() > 1 && g.len() < f.len() {
            let other = div_exact(a, f, &g);
            let mut parts = equal_degree(a, &g, d, rng);
            parts.extend(equal_degree(a, &other, d, rng));
            parts.sort_by(|u, v| canonical_cmp(u, v));
            return parts;
        }
    }
}

/// Full factorization of a nonzero polynomial: (unit, [(monic irreducible, multiplicity)])
/// in canonical order.
pub fn factorize<A: Arith, R: Rng + ?Sized>(
    a: &A,
    f: &[A::E],
    rng: &mut R,
) -> (A::E, Vec<(Vec<A::E>, usize)>) {
    assert!(!f.is_empty(), "cannot factor the zero polynomial");
    let (unit, g) = monic(a, f);
    let mut out = Vec::new();
    for (part, mult) in squarefree(a, &g) {
        let (by_degree, rest) = distinct_degree(a, &part, None);
        debug_assert!(is_one(a, &rest));
        for (prod, d) in by_degree {
            for factor in equal_degree(a, &prod, d, rng) {
                out.push((factor, mult));
            }
        }
    }
    out.sort_by(|(u, _), (v, _)| canonical_cmp(u, v));
    (unit, out)
}

/// Rabin's test: f of degree n is irreducible iff x^{q^n} ≡ x mod f and
/// gcd(x^{q^{n/r}} − x, f) = 1 for each prime r | n.
pub fn is_irreducible<A: Arith>(a: &A, f: &[A::E]) -> bool {
    let n = match degree(f) {
        None | Some(0) => return false,
        Some(n) => n,
    };
    if n == 1 {
        return true;
    }
    let (_, f) = monic(a, f);
    let x = x_poly(a);
    let frob = FrobeniusMap::new(a, &f);
    let mut powers = Vec::with_capacity(n);
    let mut h = rem(a, &x, &f);
    for _ in 0..n {
        h = frob.apply(a, &h);
        powers.push(h.clone());
    }
    if powers[n - 1] != rem(a, &x, &f) {
        return false;
    }
    ntheory::factor(n as u64).iter().all(|&(r, _)| {
        let k = n / r as usize;
        let g = gcd(a, &f, &sub(a, &powers[k - 1], &x));
        is_one(a, &g)
    })
}

/// Irreducible-factor degree data of a nonzero polynomial, without splitting
/// equal-degree products.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeProfile {
    /// Multiplicity of the factor x.
    pub x_multiplicity: usize,
    /// (degree, multiplicity, number of distinct factors) for factors other
    /// than x, one entry per (degree, multiplicity) pair.
    pub groups: Vec<(usize, usize, usize)>,
    /// Total degree of factors above the examined degree limit, each with its
    /// multiplicity folded in; 0 for a complete profile.
    pub unexamined_degree: usize,
    /// Whether every factor was examined.
    pub complete: bool,
    /// Degree of the polynomial.
    pub degree: usize,
}

/// Degree profile via squarefree decomposition and distinct-degree splitting,
/// examining factors of degree at most `max_degree` (all when `None`).
pub fn degree_profile<A: Arith>(a: &A, f: &[A::E], max_degree: Option<usize>) -> DegreeProfile {
    assert!(!f.is_empty(), "cannot profile the zero polynomial");
    let degree = f.len() - 1;
    let (_, mut g) = monic(a, f);
    let x_multiplicity = g.iter().take_while(|&&c| a.is_zero(c)).count();
    g.drain(..x_multiplicity);
    let mut groups = Vec::new();
    let mut unexamined = 0;
    for (part, mult) in squarefree(a, &g) {
        let (by_degree, rest) = distinct_degree(a, &part, max_degree);
        for (prod, d) in by_degree {
            groups.push((d, mult, (prod.len() - 1) / d));
        }
        unexamined += (rest.len() - 1) * mult;
    }
    groups.sort_unstable();
    DegreeProfile {
        x_multiplicity,
        groups,
        unexamined_degree: unexamined,
        complete: unexamined == 0 || max_degree.is_none(),
        degree,
    }
}
