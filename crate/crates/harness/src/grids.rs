//! Fixed experiment grids shared by the CLI and the acceptance suite.

use ffuniv::field::{FieldCtx, FieldElement};
use ffuniv::models::CoefficientDistribution;
use ffuniv::ntheory::is_prime;
use ffuniv::oracles::{Constraint, VSpace};
use rand::seq::IndexedRandom;

use crate::error::HarnessResult;

/// Degrees n at which the Fourier and divisibility checks run.
pub const ORACLE_NS: [usize; 4] = [10, 20, 40, 60];
/// Primes of the Fourier and divisibility grid.
pub const ORACLE_PRIMES: [u64; 3] = [3, 5, 7];
/// Two-point coefficient laws of that grid.
pub const ORACLE_LAWS: [&str; 2] = ["0:1/2,1:1/2", "0:1/3,1:2/3"];

/// A coefficient law with a set of roots (x − α)^m.
#[derive(Clone, Debug)]
pub struct OracleCase {
    pub label: String,
    pub mu: CoefficientDistribution,
    pub roots: Vec<(FieldCtx, FieldElement, usize)>,
    pub space: VSpace,
}

/// Root configurations with d ≤ 4 over F_p, including a root in F_{p²}
/// and derivative (Hasse) constraints.
fn root_sets(p: u64) -> HarnessResult<Vec<(String, Vec<(FieldCtx, FieldElement, usize)>)>> {
    let f = FieldCtx::prime(p)?;
    let ext = FieldCtx::new(p, 2, None, 0)?;
    let g = ext.generator();
    let a = |v: u64| f.from_u64(v);
    Ok(vec![
        ("alpha=2".into(), vec![(f.clone(), a(2), 1)]),
        ("alpha=1,K=1".into(), vec![(f.clone(), a(1), 2)]),
        (
            "alpha=1,-1".into(),
            vec![(f.clone(), a(1), 1), (f.clone(), a(p - 1), 1)],
        ),
        ("alpha in F_p^2".into(), vec![(ext.clone(), g, 1)]),
        ("alpha=2,K=2".into(), vec![(f.clone(), a(2), 3)]),
        (
            "alpha=1,-1,K=1".into(),
            vec![(f.clone(), a(1), 2), (f.clone(), a(p - 1), 2)],
        ),
        ("alpha in F_p^2,K=1".into(), vec![(ext.clone(), g, 2)]),
    ])
}

/// Every (p, μ, roots) of the Fourier and divisibility grid.
pub fn oracle_cases() -> HarnessResult<Vec<OracleCase>> {
    let mut out = Vec::new();
    for p in ORACLE_PRIMES {
        let f = FieldCtx::prime(p)?;
        for law in ORACLE_LAWS {
            let mu = CoefficientDistribution::parse(&f, law)?;
            for (name, roots) in root_sets(p)? {
                let space = VSpace::new(
                    &f,
                    roots
                        .iter()
                        .map(|(c, a, m)| Constraint::up_to(c, *a, *m))
                        .collect(),
                )?;
                out.push(OracleCase {
                    label: format!("p={p} mu={law} {name} d={}", space.d()),
                    mu: mu.clone(),
                    roots,
                    space,
                });
            }
        }
    }
    Ok(out)
}

/// Primes for the mean-versus-p figure: `count` distinct primes drawn from
/// [10, 1000] with the given seed, and the first `large` primes above 10^7.
pub fn figure1_primes(seed: u64, count: usize, large: usize) -> (Vec<u64>, Vec<u64>) {
    let pool: Vec<u64> = (10..=1000).filter(|&p| is_prime(p)).collect();
    let mut rng = ffuniv::rng::stream(seed, 0x4649_4731, 0);
    let mut small: Vec<u64> = pool
        .choose_multiple(&mut rng, count.min(pool.len()))
        .copied()
        .collect();
    small.sort_unstable();
    let big: Vec<u64> = (10_000_000u64..)
        .filter(|&p| is_prime(p))
        .take(large)
        .collect();
    (small, big)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let cases = oracle_cases().unwrap();
        assert_eq!(cases.len(), 3 * 2 * 7);
        assert!(cases.iter().all(|c| c.space.d() <= 4));
        assert!(cases
            .iter()
            .any(|c| c.roots.iter().any(|r| r.0.degree() == 2)));
        assert!(cases
            .iter()
            .any(|c| c.space.constraints().iter().any(|k| k.max_k() >= 1)));
    }

    #[test]
    fn primes_are_reproducible() {
        let (a, b) = figure1_primes(1, 20, 3);
        assert_eq!(a.len(), 20);
        assert!(a.iter().all(|&p| (10..=1000).contains(&p) && is_prime(p)));
        assert_eq!(b, vec![10_000_019, 10_000_079, 10_000_103]);
        assert_eq!(figure1_primes(1, 20, 3).0, a);
    }
}
