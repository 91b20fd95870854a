//! The matrix of vectors (C(i, k) α_j^{i−k}) read over F_p, and its rank.

use crate::error::{invalid, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::ntheory;

/// A root α in its field together with the number K of derivatives taken,
/// i.e. columns k = 0..=K.
#[derive(Clone, Debug)]
pub struct RootSpec {
    pub ctx: FieldCtx,
    pub alpha: FieldElement,
    pub k: usize,
}

/// Rows i = m..m+count−1; for each root j and each k ≤ K_j, the e_j
/// F_p-coordinates of C(i, k) α_j^{i−k} (zero when i < k).
///
/// The roots must be nonzero, generate their own field, share the
/// characteristic, and be pairwise non-conjugate; `count` must equal
/// Σ e_j (K_j + 1) so the matrix is square.
pub fn derivative_vector_matrix(
    roots: &[RootSpec],
    m: usize,
    count: usize,
) -> Result<Vec<Vec<u64>>> {
    let Some(first) = roots.first() else {
        return invalid("at least one root is required");
    };
    let p = first.ctx.p();
    let mut minpolys: Vec<Vec<u64>> = Vec::with_capacity(roots.len());
    for r in roots {
        if r.ctx.p() != p {
            return invalid("roots must share the characteristic");
        }
        if !r.ctx.contains(&r.alpha) {
            return invalid(format!("{} does not belong to {:?}", r.alpha, r.ctx));
        }
        if r.alpha.is_zero() {
            return invalid("roots must be nonzero");
        }
        if r.ctx.lies_in_proper_subfield(&r.alpha) {
            return invalid(format!(
                "{} lies in a proper subfield of {:?}",
                r.alpha, r.ctx
            ));
        }
        let mp = r.ctx.minimal_polynomial(&r.alpha);
        if minpolys.contains(&mp) {
            return invalid(format!("{} is conjugate to an earlier root", r.alpha));
        }
        minpolys.push(mp);
    }
    let d: usize = roots.iter().map(|r| r.ctx.degree() * (r.k + 1)).sum();
    if d != count {
        return invalid(format!("count {count} differs from the column count {d}"));
    }
    let mut rows = vec![Vec::with_capacity(d); count];
    for r in roots {
        let ctx = &r.ctx;
        let inv = ctx.inv(&r.alpha)?;
        for k in 0..=r.k {
            // α^{i−k} for i = m, advanced by multiplication.
            let mut power = if m >= k {
                ctx.pow(&r.alpha, (m - k) as u128)
            } else {
                ctx.pow(&inv, (k - m) as u128)
            };
            for (offset, row) in rows.iter_mut().enumerate() {
                let i = m + offset;
                let b = ntheory::binomial_mod_p(i as u64, k as u64, p);
                let entry = ctx.scale(&power, b);
                row.extend(entry.coords().iter().map(|&c| c as u64));
                power = ctx.mul(&power, &r.alpha);
            }
        }
    }
    Ok(rows)
}

/// Rank over F_p by Gaussian elimination.
pub fn rank_mod_p(matrix: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = matrix
        .iter()
        .map(|r| r.iter().map(|&x| x % p).collect())
        .collect();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..a.len()).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, pivot);
        let inv = ntheory::inv_mod_prime(a[rank][col], p);
        for x in a[rank].iter_mut() {
            *x = ntheory::mul_mod(*x, inv, p);
        }
        let pivot_row = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let f = row[col];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + p - ntheory::mul_mod(f, y, p)) % p;
            }
        }
        rank += 1;
    }
    rank
}
