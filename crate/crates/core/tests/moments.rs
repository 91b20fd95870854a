use std::collections::BTreeMap;

use ffuniv::field::FieldCtx;
use ffuniv::models::CoefficientDistribution;
use ffuniv::moments::{
    collapsed_generating_series, permutation_cycle_law, pointwise_check, poisson_moment_bound,
    tv_from_moments_bound, uniform_joint_law, uniform_joint_law_series, uniform_joint_moment,
    CountModel,
};
use ffuniv::oracles::{brute_joint_pmf, BruteOptions, Conditioning};
use ffuniv::pmf::ExactPmf;
use ffuniv::series::{SeriesCaps, TruncatedSeries};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn big(q: u64) -> BigUint {
    BigUint::from(q)
}

fn uni(y: usize) -> SeriesCaps {
    SeriesCaps::univariate(y)
}

fn mono(caps: &SeriesCaps, c: BigRational, y: usize, marks: &[usize]) -> TruncatedSeries {
    TruncatedSeries::monomial(caps, c, y, marks).unwrap()
}

const MODELS: [CountModel; 2] = [CountModel::Distinct, CountModel::WithMultiplicity];

#[test]
fn series_examples() {
    let caps = uni(2);
    let s = TruncatedSeries::one(&caps)
        .unwrap()
        .add(&mono(&caps, r(1, 1), 1, &[]))
        .unwrap();
    let sq = s.mul(&s).unwrap();
    assert_eq!(
        (sq.coeff(0, &[]), sq.coeff(1, &[]), sq.coeff(2, &[])),
        (r(1, 1), r(2, 1), r(1, 1))
    );

    let caps = uni(3);
    let g = mono(&caps, r(1, 1), 1, &[]).geometric_inverse().unwrap();
    assert!((0..=3).all(|k| g.coeff(k, &[]) == r(1, 1)));
    assert!(TruncatedSeries::one(&caps)
        .unwrap()
        .geometric_inverse()
        .is_err());

    // (1 + z y/(1 − y))^3 with caps y ≤ 3, z ≤ 2: [y^a z^j] = C(3, j) C(a − 1, j − 1).
    let caps = SeriesCaps {
        y: 3,
        marks: vec![2],
        total_marks: None,
    };
    let y = mono(&caps, r(1, 1), 1, &[0]);
    let z = mono(&caps, r(1, 1), 0, &[1]);
    let base = TruncatedSeries::one(&caps)
        .unwrap()
        .add(
            &z.mul(&y)
                .unwrap()
                .mul(&y.geometric_inverse().unwrap())
                .unwrap(),
        )
        .unwrap();
    let cube = base.integer_pow(&big(3)).unwrap();
    let binom = |n: i64, k: i64| -> i64 {
        if k < 0 || k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    };
    for a in 0..=3usize {
        for j in 0..=2usize {
            let expect = if j == 0 {
                if a == 0 {
                    1
                } else {
                    0
                }
            } else {
                binom(3, j as i64) * binom(a as i64 - 1, j as i64 - 1)
            };
            assert_eq!(cube.coeff(a, &[j]), r(expect, 1), "a={a} j={j}");
        }
    }
    assert_eq!(cube, base.binomial_pow(&BigInt::from(3)).unwrap());
    assert!(cube.coeff(4, &[0]).is_zero());
}

#[test]
fn total_mark_cap_truncates() {
    let caps = SeriesCaps {
        y: 4,
        marks: vec![3, 3],
        total_marks: Some(2),
    };
    let a = mono(&caps, r(1, 1), 1, &[1, 0])
        .add(&mono(&caps, r(1, 1), 1, &[0, 1]))
        .unwrap();
    let a3 = a.mul(&a).unwrap().mul(&a).unwrap();
    assert!(a3.is_zero());
    assert_eq!(a.mul(&a).unwrap().coeff(2, &[1, 1]), r(2, 1));
}

fn arb_series() -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(-3i64..4, 12).prop_map(|c| {
        let caps = SeriesCaps {
            y: 5,
            marks: vec![1],
            total_marks: None,
        };
        let mut s = TruncatedSeries::one(&caps).unwrap();
        for (k, v) in c.iter().enumerate() {
            let (y, m) = (k % 6, k / 6);
            if y + m > 0 {
                s = s.add(&mono(&caps, r(*v, 1), y, &[m])).unwrap();
            }
        }
        s
    })
}

proptest! {
    #[test]
    fn powers_agree(s in arb_series(), k in 0u32..9) {
        let mut naive = TruncatedSeries::one(s.caps()).unwrap();
        for _ in 0..k {
            naive = naive.mul(&s).unwrap();
        }
        prop_assert_eq!(&s.integer_pow(&BigUint::from(k)).unwrap(), &naive);
        prop_assert_eq!(&s.binomial_pow(&BigInt::from(k)).unwrap(), &naive);
        // Negative exponents through the inverse.
        let inv = s.inverse().unwrap();
        prop_assert_eq!(s.mul(&inv).unwrap(), TruncatedSeries::one(s.caps()).unwrap());
        prop_assert_eq!(s.binomial_pow(&BigInt::from(-(k as i64))).unwrap(), inv.integer_pow(&BigUint::from(k)).unwrap());
    }

    #[test]
    fn exp_is_a_homomorphism(a in arb_series(), b in arb_series()) {
        let one = TruncatedSeries::one(a.caps()).unwrap();
        let a0 = a.sub(&one).unwrap();
        let b0 = b.sub(&one).unwrap();
        let lhs = a0.add(&b0).unwrap().exp().unwrap();
        let rhs = a0.exp().unwrap().mul(&b0.exp().unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn law_examples() {
    let law = uniform_joint_law(&big(2), 2, 1, CountModel::Distinct, true).unwrap();
    assert_eq!(law.prob(&vec![1]), r(1, 2));
    assert_eq!(law.prob(&vec![0]), r(1, 2));
    assert_eq!(
        uniform_joint_law(&big(5), 6, 0, CountModel::Distinct, true).unwrap(),
        ExactPmf::point_mass(vec![])
    );
    for q in [2u64, 3, 4, 5, 7] {
        for n in 1..=8 {
            let law = uniform_joint_law(&big(q), n, 1, CountModel::Distinct, false).unwrap();
            assert_eq!(law.moment(&[1]), r(1, 1), "q={q} n={n}");
        }
    }
    assert_eq!(
        uniform_joint_moment(&big(2), 2, &[1], CountModel::Distinct, true).unwrap(),
        r(1, 2)
    );
    assert_eq!(
        uniform_joint_moment(&big(7), 5, &[0, 0], CountModel::Distinct, true).unwrap(),
        r(1, 1)
    );
    // Law is padded when N exceeds n.
    let law = uniform_joint_law(&big(3), 2, 4, CountModel::WithMultiplicity, false).unwrap();
    assert!(law
        .support()
        .all(|k| k.len() == 4 && k[2] == 0 && k[3] == 0));
}

#[test]
fn law_routes_agree() {
    for q in [2u64, 3, 4, 5] {
        for n in 0..=7usize {
            for big_n in 0..=3usize {
                for model in MODELS {
                    for ex in [false, true] {
                        let a = uniform_joint_law(&big(q), n, big_n, model, ex).unwrap();
                        let b = uniform_joint_law_series(&big(q), n, big_n, model, ex).unwrap();
                        assert_eq!(a, b, "q={q} n={n} N={big_n} {model:?} {ex}");
                    }
                }
            }
        }
    }
}

#[test]
fn law_matches_enumeration() {
    for q in [2u64, 3] {
        let ctx = FieldCtx::prime(q).unwrap();
        let mu = CoefficientDistribution::uniform(&ctx).unwrap();
        for n in 1..=8usize {
            for model in MODELS {
                for ex in [false, true] {
                    let opts = BruteOptions {
                        with_multiplicity: model == CountModel::WithMultiplicity,
                        exclude_x: ex,
                        conditioning: Conditioning::Monic,
                    };
                    let brute = brute_joint_pmf(&mu, n, 2, opts).unwrap().pmf;
                    let law = uniform_joint_law(&big(q), n, 2, model, ex).unwrap();
                    assert_eq!(brute, law, "q={q} n={n} {model:?} {ex}");
                    assert_eq!(
                        brute.truncate(1),
                        uniform_joint_law(&big(q), n, 1, model, ex).unwrap()
                    );
                    for h1 in 0..=2u32 {
                        for h2 in 0..=2u32 {
                            let m = uniform_joint_moment(&big(q), n, &[h1, h2], model, ex).unwrap();
                            assert_eq!(m, brute.moment(&[h1, h2]), "q={q} n={n} h=({h1},{h2})");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn moments_match_law_for_larger_fields() {
    for q in [5u64, 16, 101] {
        for n in [6usize, 12] {
            for model in MODELS {
                let law = uniform_joint_law(&big(q), n, 3, model, true).unwrap();
                for h in [[1u32, 0, 0], [0, 2, 0], [1, 1, 1], [3, 0, 1]] {
                    let m = uniform_joint_moment(&big(q), n, &h, model, true).unwrap();
                    assert_eq!(m, law.moment(&h));
                }
                // E[N_i] is nonincreasing in i once n ≥ 2N.
                let means: Vec<BigRational> = (0..3)
                    .map(|i| {
                        let mut h = [0u32; 3];
                        h[i] = 1;
                        law.moment(&h)
                    })
                    .collect();
                assert!(
                    means.windows(2).all(|w| w[0] >= w[1]),
                    "q={q} n={n} {means:?}"
                );
            }
        }
    }
}

#[test]
fn collapse_to_geometric() {
    for q in [2u64, 3, 5, 101] {
        for model in MODELS {
            let s = collapsed_generating_series(&big(q), 24, model).unwrap();
            assert!(
                (0..=24).all(|k| s.coeff(k, &[]) == r(1, 1)),
                "q={q} {model:?}"
            );
        }
    }
    // With the marks present, setting them to 1 gives the same series.
    let s = ffuniv::moments::uniform_generating_series(
        &big(3),
        9,
        3,
        CountModel::WithMultiplicity,
        true,
    )
    .unwrap();
    let flat = s.marks_to_one().unwrap();
    assert!((0..=9).all(|k| flat.coeff(k, &[]) == r(1, 1)));
}

/// Cycle type counts over all permutations of n.
fn cycle_law_by_enumeration(n: usize, big_n: usize) -> ExactPmf<Vec<u32>> {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    let mut table: BTreeMap<Vec<u32>, BigUint> = BTreeMap::new();
    for p in perms(n) {
        let mut seen = vec![false; n];
        let mut key = vec![0u32; big_n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = p[x];
                len += 1;
            }
            if len <= big_n {
                key[len - 1] += 1;
            }
        }
        *table.entry(key).or_insert_with(BigUint::zero) += 1u32;
    }
    ExactPmf::from_weights(table).unwrap()
}

#[test]
fn cycle_law_matches_enumeration() {
    for n in 1..=7 {
        for big_n in 1..=3 {
            assert_eq!(
                permutation_cycle_law(n, big_n).unwrap(),
                cycle_law_by_enumeration(n, big_n),
                "n={n} N={big_n}"
            );
        }
    }
    // E[C_i] = 1/i for i ≤ n.
    let law = permutation_cycle_law(30, 3).unwrap();
    assert_eq!(law.moment(&[0, 1, 0]), r(1, 2));
    assert_eq!(law.moment(&[0, 0, 1]), r(1, 3));
}

#[test]
fn bound_formulas() {
    let v = poisson_moment_bound(4, 1).unwrap();
    let exact = (4.0f64 / (4.0f64.ln() - 2.0f64.ln().ln())).powi(4);
    assert!(v >= exact && (v - 27.1).abs() < 0.05, "{v}");
    let v = poisson_moment_bound(2, 1).unwrap();
    assert!(v >= (2.0f64 / (2.0f64.ln() - 2.0f64.ln().ln())).powi(2));
    assert!(poisson_moment_bound(1, 3).is_err());
    let b = tv_from_moments_bound(1, 1, 0.0, 1.0);
    assert!(b >= 2.0 * std::f64::consts::PI && b - 2.0 * std::f64::consts::PI < 1e-12);
}

#[test]
fn tail_bound_dominates_exact_moments() {
    for q in [2u64, 3, 5] {
        for n in [4usize, 8] {
            for big_n in 1..=2usize {
                for h in 2..=4u32 {
                    if (h as f64) <= ((big_n + 1) as f64).ln() {
                        continue;
                    }
                    let law =
                        uniform_joint_law(&big(q), n, big_n, CountModel::Distinct, false).unwrap();
                    let total = law.expect(|k| {
                        BigRational::from_integer(
                            BigInt::from(k.iter().map(|&x| x as u64).sum::<u64>()).pow(h),
                        )
                    });
                    let bound = poisson_moment_bound(h, big_n).unwrap();
                    assert!(
                        ffuniv::pmf::ratio_to_f64(&total) <= bound,
                        "q={q} n={n} N={big_n} H={h}"
                    );
                }
            }
        }
    }
}

#[test]
fn pointwise_examples() {
    let law = uniform_joint_law(&big(3), 5, 2, CountModel::Distinct, true).unwrap();
    let rep = pointwise_check(&law, &law, 3, true).unwrap();
    assert_eq!(rep.epsilon, "0");
    assert_eq!(rep.max_gap, 0.0);
    assert!(rep.pass);

    let ctx = FieldCtx::prime(2).unwrap();
    let mu = CoefficientDistribution::parse(&ctx, "0:1/3,1:2/3").unwrap();
    for model in MODELS {
        let opts = BruteOptions {
            with_multiplicity: model == CountModel::WithMultiplicity,
            exclude_x: true,
            conditioning: Conditioning::Nonzero,
        };
        let a = brute_joint_pmf(&mu, 8, 2, opts).unwrap().pmf;
        let b = uniform_joint_law(&big(2), 8, 2, model, true).unwrap();
        let rep = pointwise_check(&a, &b, 4, true).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.max_gap > 0.0);
    }
    let one = ExactPmf::point_mass(vec![1u32]);
    assert!(pointwise_check(&one, &ExactPmf::point_mass(vec![1u32, 0]), 1, false).is_err());
    assert!(pointwise_check(&one, &one, 0, false).is_err());
}
