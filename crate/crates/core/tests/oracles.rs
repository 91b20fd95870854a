use std::collections::BTreeMap;

use ffuniv::field::{FieldCtx, FieldElement};
use ffuniv::models::CoefficientDistribution;
use ffuniv::oracles::{
    brute_joint_pmf, check_prop32, count_vector, divisibility_chain, exact_divisibility_prob,
    fourier_coefficient, fourier_product, halasz_constant, nu_n_distribution, parseval_sides,
    prop32_bound, s_sequence, BruteOptions, Conditioning, Constraint, VSpace,
};
use ffuniv::Polynomial;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn fp(p: u64) -> FieldCtx {
    FieldCtx::prime(p).unwrap()
}

fn law(ctx: &FieldCtx, text: &str) -> CoefficientDistribution {
    CoefficientDistribution::parse(ctx, text).unwrap()
}

/// Every coefficient vector in supp(μ)^{n+1} with its exact probability.
fn all_vectors(mu: &CoefficientDistribution, n: usize) -> Vec<(Vec<FieldElement>, BigRational)> {
    let probs = mu.exact_probs().unwrap();
    let mut out = vec![(Vec::new(), BigRational::one())];
    for _ in 0..=n {
        let mut next = Vec::new();
        for (v, w) in &out {
            for (x, px) in mu.support().iter().zip(&probs) {
                let mut v2 = v.clone();
                v2.push(*x);
                next.push((v2, w * px));
            }
        }
        out = next;
    }
    out
}

/// ν_n by enumerating coefficient vectors and reading Hasse derivatives off
/// the Taylor expansion at each root.
fn nu_by_enumeration(
    mu: &CoefficientDistribution,
    n: usize,
    space: &VSpace,
) -> BTreeMap<Vec<u64>, BigRational> {
    let mut table = BTreeMap::new();
    for (coeffs, w) in all_vectors(mu, n) {
        let f = Polynomial::new(mu.ctx(), coeffs).unwrap();
        let mut values = Vec::new();
        for c in space.constraints() {
            let taylor = if f.is_zero() {
                Vec::new()
            } else {
                f.taylor_at(&c.ctx, &c.alpha).unwrap()
            };
            for &k in &c.ks {
                values.push(taylor.get(k).copied().unwrap_or_else(|| c.ctx.zero()));
            }
        }
        *table
            .entry(space.flatten(&values))
            .or_insert_with(BigRational::zero) += w;
    }
    table
}

#[test]
fn nu_examples() {
    let f3 = fp(3);
    let space = VSpace::new(&f3, vec![Constraint::new(&f3, f3.one(), &[0])]).unwrap();
    let nu = nu_n_distribution(&law(&f3, "uniform"), 0, &space).unwrap();
    assert!((0..3).all(|i| nu.prob(i) == r(1, 3)));

    let nu = nu_n_distribution(&law(&f3, "0:1/2,1:1/2"), 0, &space).unwrap();
    assert_eq!(
        nu.to_pmf().table(),
        &BTreeMap::from([(vec![0], r(1, 2)), (vec![1], r(1, 2))])
    );

    let f2 = fp(2);
    let space = VSpace::new(&f2, vec![Constraint::new(&f2, f2.one(), &[0])]).unwrap();
    let nu = nu_n_distribution(&law(&f2, "point:1"), 2, &space).unwrap();
    assert_eq!(nu.prob(1), r(1, 1));

    // Uniform coefficients on an F_9 root: uniform on F_9 once n + 1 ≥ 2.
    let f9 = FieldCtx::new(3, 2, None, 1).unwrap();
    let g = f9.generator();
    let space = VSpace::new(&f3, vec![Constraint::new(&f9, g, &[0])]).unwrap();
    let nu = nu_n_distribution(&law(&f3, "uniform"), 1, &space).unwrap();
    assert!((0..9).all(|i| nu.prob(i) == r(1, 9)));
}

#[test]
fn vspace_validation() {
    let f5 = fp(5);
    let f25 = FieldCtx::new(5, 2, None, 0).unwrap();
    let g = f25.generator();
    assert!(VSpace::new(&f5, vec![Constraint::new(&f5, f5.zero(), &[0])]).is_err());
    assert!(VSpace::new(
        &f5,
        vec![
            Constraint::new(&f5, f5.one(), &[0]),
            Constraint::new(&f5, f5.one(), &[1])
        ]
    )
    .is_err());
    assert!(VSpace::new(&f5, vec![Constraint::new(&f25, f25.from_u64(2), &[0])]).is_err());
    let conj = f25.pow(&g, 5);
    assert!(VSpace::new(
        &f5,
        vec![
            Constraint::new(&f25, g, &[0]),
            Constraint::new(&f25, conj, &[0])
        ]
    )
    .is_err());
    assert!(VSpace::new(
        &f25,
        vec![
            Constraint::new(&f25, g, &[0]),
            Constraint::new(&f25, conj, &[0])
        ]
    )
    .is_ok());
    assert!(VSpace::new(&f25, vec![Constraint::new(&f5, f5.one(), &[0])]).is_err());
    let s = VSpace::new(
        &f5,
        vec![
            Constraint::new(&f25, g, &[0, 2]),
            Constraint::new(&f5, f5.from_u64(3), &[1]),
        ],
    )
    .unwrap();
    assert_eq!((s.dim(), s.d(), s.blocks()), (5, 2 * 3 + 2, 3));
}

fn test_spaces() -> Vec<(CoefficientDistribution, VSpace)> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        let f = fp(p);
        let mus = [law(&f, "0:1/2,1:1/2"), law(&f, "0:1/3,1:2/3")];
        let mut spaces = vec![
            VSpace::new(&f, vec![Constraint::new(&f, f.one(), &[0, 1])]).unwrap(),
            VSpace::new(&f, vec![Constraint::new(&f, f.one(), &[1])]).unwrap(),
        ];
        if p > 2 {
            spaces.push(
                VSpace::new(
                    &f,
                    vec![
                        Constraint::new(&f, f.one(), &[0]),
                        Constraint::new(&f, f.from_u64(p - 1), &[0]),
                    ],
                )
                .unwrap(),
            );
        }
        let ext = FieldCtx::new(p, 2, None, 3).unwrap();
        spaces.push(VSpace::new(&f, vec![Constraint::new(&ext, ext.generator(), &[0])]).unwrap());
        for s in spaces {
            for mu in &mus {
                out.push((mu.clone(), s.clone()));
            }
        }
    }
    // Coefficients in F_4 itself, root in F_4.
    let f4 = FieldCtx::new(2, 2, None, 0).unwrap();
    let g = f4.generator();
    let mu = CoefficientDistribution::from_rationals(
        &f4,
        &[f4.zero(), f4.one(), g],
        &[r(1, 2), r(1, 4), r(1, 4)],
    )
    .unwrap();
    out.push((
        mu,
        VSpace::new(&f4, vec![Constraint::new(&f4, g, &[0, 1])]).unwrap(),
    ));
    out
}

#[test]
fn nu_matches_taylor_enumeration() {
    for (mu, space) in test_spaces() {
        for n in [0usize, 1, 3, 6] {
            let fast = nu_n_distribution(&mu, n, &space).unwrap().to_pmf();
            let slow = nu_by_enumeration(&mu, n, &space);
            let slow: BTreeMap<_, _> = slow.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            assert_eq!(fast.table(), &slow, "{space:?} n={n}");
        }
    }
}

#[test]
fn fourier_examples() {
    let f3 = fp(3);
    let space = VSpace::new(&f3, vec![Constraint::new(&f3, f3.one(), &[0])]).unwrap();
    let nu = nu_n_distribution(&law(&f3, "0:1/2,1:1/2"), 0, &space).unwrap();
    let pmf = nu.to_pmf();
    let z = fourier_coefficient(&space, &pmf, &[f3.one()]).unwrap();
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let expect = (Complex64::new(1.0, 0.0) + w) * 0.5;
    assert!((z - expect).norm() < 1e-15);
    assert!((z.norm() - 0.5).abs() < 1e-15);
    assert!((fourier_coefficient(&space, &pmf, &[f3.zero()]).unwrap() - 1.0).norm() < 1e-15);

    let uni = nu_n_distribution(&law(&f3, "uniform"), 4, &space).unwrap();
    for b in 1..3 {
        assert!(
            fourier_coefficient(&space, &uni.to_pmf(), &[f3.from_u64(b)])
                .unwrap()
                .norm()
                < 1e-15
        );
    }
    assert!(fourier_coefficient(&space, &pmf, &[f3.one(), f3.one()]).is_err());
}

#[test]
fn fourier_routes_agree() {
    for (mu, space) in test_spaces() {
        for n in [0usize, 5, 17, 60] {
            let nu = nu_n_distribution(&mu, n, &space).unwrap();
            let table = nu.fourier_table().unwrap();
            let pmf = nu.to_pmf();
            let elems: Vec<Vec<FieldElement>> = space
                .constraints()
                .iter()
                .flat_map(|c| {
                    c.ks.iter()
                        .map(move |_| c.ctx.elements().collect::<Vec<_>>())
                })
                .collect();
            // Every β (all blocks have at most 25 elements; at most 2 blocks here).
            let mut pos = vec![0usize; elems.len()];
            loop {
                let beta: Vec<FieldElement> = pos.iter().zip(&elems).map(|(&i, e)| e[i]).collect();
                let direct = fourier_coefficient(&space, &pmf, &beta).unwrap();
                let product = fourier_product(&mu, n, &space, &beta).unwrap();
                let fast = table[nu.functional_index(&beta).unwrap()];
                assert!(
                    (direct - product).norm() < 1e-10,
                    "{space:?} n={n} {beta:?}"
                );
                assert!((direct - fast).norm() < 1e-10);
                assert!(direct.norm() <= 1.0 + 1e-12);
                let mut b = 0;
                while b < pos.len() {
                    pos[b] += 1;
                    if pos[b] < elems[b].len() {
                        break;
                    }
                    pos[b] = 0;
                    b += 1;
                }
                if b == pos.len() {
                    break;
                }
            }
            let (lhs, rhs) = parseval_sides(&nu).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0), "{lhs} {rhs}");
        }
    }
}

#[test]
fn prop32_examples() {
    let f3 = fp(3);
    let space = VSpace::new(&f3, vec![Constraint::new(&f3, f3.one(), &[0])]).unwrap();
    let rep = check_prop32(&law(&f3, "uniform"), 10, &space).unwrap();
    assert!(rep.max_fourier_modulus < 1e-12 && rep.pass);

    let mu = law(&f3, "0:1/2,1:1/2");
    assert_eq!(mu.eta(), 0.5);
    let rep = check_prop32(&mu, 30, &space).unwrap();
    assert!((rep.bound - (-30.0f64 / 18.0).exp()).abs() < 1e-12);
    assert!((rep.bound - 0.1889).abs() < 1e-4);
    assert!(rep.pass, "{rep:?}");
    // Direct oracle: the only nonzero β are 1 and 2, |ν̂| = 2^{-31}·|1+ω|^{31} = 2^{-31}.
    assert!(
        (rep.max_fourier_modulus - 0.5f64.powi(31)).abs() < 1e-15,
        "{rep:?}"
    );
    assert!(rep.route_discrepancy.unwrap() < 1e-12);

    let rep = check_prop32(&mu, 0, &space).unwrap();
    assert_eq!(rep.bound, 1.0);
    assert!(rep.pass);
}

#[test]
fn prop32_bound_is_rounded_up() {
    for n in [1usize, 10, 60, 1000] {
        for p in [3u64, 7, 101] {
            let exact = (-(0.5 * n as f64) / (2.0 * (p * p) as f64)).exp();
            assert!(prop32_bound(0.5, n, 2, p) >= exact);
            assert!(prop32_bound(0.5, n, 2, p) <= exact * (1.0 + 1e-13));
        }
    }
}

#[test]
fn prop32_small_grid() {
    for p in [3u64, 5] {
        let f = fp(p);
        let ext = FieldCtx::new(p, 2, None, 11).unwrap();
        let spaces = [
            VSpace::new(&f, vec![Constraint::new(&f, f.from_u64(2), &[0])]).unwrap(),
            VSpace::new(&f, vec![Constraint::new(&f, f.one(), &[0, 1])]).unwrap(),
            VSpace::new(&f, vec![Constraint::new(&ext, ext.generator(), &[0])]).unwrap(),
        ];
        for mu in [law(&f, "0:1/2,1:1/2"), law(&f, "0:1/3,1:2/3")] {
            for space in &spaces {
                for n in [10usize, 20] {
                    let rep = check_prop32(&mu, n, space).unwrap();
                    assert!(rep.pass, "{rep:?}");
                    assert!(rep.max_fourier_modulus <= rep.max_fourier_modulus_any + 1e-15);
                    let max_prod = rep.max_fourier_modulus_product.unwrap();
                    assert!((max_prod - rep.max_fourier_modulus).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn divisibility_examples() {
    let f7 = fp(7);
    for n in [1usize, 2, 5] {
        let pr =
            exact_divisibility_prob(&law(&f7, "uniform"), n, &[(f7.clone(), f7.from_u64(3), 1)])
                .unwrap();
        assert_eq!(pr, r(1, 7));
    }
    let f2 = fp(2);
    for n in [1usize, 3, 9] {
        let pr =
            exact_divisibility_prob(&law(&f2, "point:1"), n, &[(f2.clone(), f2.one(), 1)]).unwrap();
        assert_eq!(pr, r(1, 1));
    }
    let pr =
        exact_divisibility_prob(&law(&f2, "point:1"), 4, &[(f2.clone(), f2.one(), 1)]).unwrap();
    assert_eq!(pr, r(0, 1));

    // p = 3, μ = {0: ½, 1: ½}, n = 10: count subsets of 11 positions with size ≡ 0 mod 3.
    let f3 = fp(3);
    let pr = exact_divisibility_prob(&law(&f3, "0:1/2,1:1/2"), 10, &[(f3.clone(), f3.one(), 1)])
        .unwrap();
    let mut count = 0u64;
    for mask in 0u32..(1 << 11) {
        if mask.count_ones() % 3 == 0 {
            count += 1;
        }
    }
    assert_eq!(pr, r(count as i64, 2048));
    assert_eq!(pr.denom() % 2048u32, 0u32.into());
}

#[test]
fn divisibility_matches_root_multiplicity() {
    for (mu, space) in test_spaces() {
        let roots: Vec<(FieldCtx, FieldElement, usize)> = space
            .constraints()
            .iter()
            .map(|c| (c.ctx.clone(), c.alpha, 2))
            .collect();
        for n in [2usize, 5] {
            let fast = exact_divisibility_prob(&mu, n, &roots).unwrap();
            let mut slow = BigRational::zero();
            for (coeffs, w) in all_vectors(&mu, n) {
                let f = Polynomial::new(mu.ctx(), coeffs).unwrap();
                if f.is_zero()
                    || roots
                        .iter()
                        .all(|(c, a, m)| f.root_multiplicity(c, a).unwrap() >= *m)
                {
                    slow += w;
                }
            }
            assert_eq!(fast, slow, "{space:?} n={n}");
        }
    }
}

#[test]
fn divisibility_chain_holds() {
    let f5 = fp(5);
    let mu = law(&f5, "0:1/3,1:2/3");
    for n in [10usize, 20, 40] {
        let rep = divisibility_chain(&mu, n, &[(f5.clone(), f5.from_u64(2), 2)]).unwrap();
        assert!(rep.within_fourier && rep.pass, "{rep:?}");
    }
    assert!(divisibility_chain(&mu, 1, &[(f5.clone(), f5.from_u64(2), 2)]).is_err());
    let rep = divisibility_chain(&law(&f5, "uniform"), 4, &[(f5.clone(), f5.one(), 1)]).unwrap();
    assert_eq!(rep.prob, rep.uniform_prob);
    assert_eq!(rep.gap, 0.0);
}

#[test]
fn halasz_constant_is_finite() {
    let f5 = fp(5);
    let rep = halasz_constant(&law(&f5, "0:1/2,1:1/2"), 30, &[(f5.clone(), f5.one(), 1)]).unwrap();
    assert!(rep.c_min.is_finite() && rep.c_min >= 0.0);
    let rep = halasz_constant(&law(&f5, "uniform"), 30, &[(f5.clone(), f5.one(), 1)]).unwrap();
    assert_eq!(rep.c_min, 0.0);
    assert!(halasz_constant(&law(&f5, "point:1"), 30, &[(f5.clone(), f5.one(), 1)]).is_err());
}

fn opts(with_multiplicity: bool, exclude_x: bool, conditioning: Conditioning) -> BruteOptions {
    BruteOptions {
        with_multiplicity,
        exclude_x,
        conditioning,
    }
}

#[test]
fn brute_examples() {
    let f2 = fp(2);
    let res = brute_joint_pmf(
        &law(&f2, "uniform"),
        2,
        1,
        opts(false, true, Conditioning::Monic),
    )
    .unwrap();
    assert_eq!(res.pmf.prob(&vec![1]), r(1, 2));
    assert_eq!(res.pmf.prob(&vec![0]), r(1, 2));
    assert_eq!(res.conditioning_mass, r(1, 2));
    assert_eq!(res.zero_mass, r(1, 8));

    // Point mass: x^3 + x^2 + x + 1 = (x + 1)^3 over F_2.
    let res = brute_joint_pmf(
        &law(&f2, "point:1"),
        3,
        2,
        opts(true, true, Conditioning::Nonzero),
    )
    .unwrap();
    assert_eq!(res.pmf, ffuniv::pmf::ExactPmf::point_mass(vec![3, 0]));
    let res = brute_joint_pmf(
        &law(&f2, "point:1"),
        3,
        2,
        opts(false, true, Conditioning::Nonzero),
    )
    .unwrap();
    assert_eq!(res.pmf, ffuniv::pmf::ExactPmf::point_mass(vec![1, 0]));

    // Uniform on F_3: conditioning on monic and on exact degree give the same law.
    let f3 = fp(3);
    for n in 1..=5 {
        let a = brute_joint_pmf(
            &law(&f3, "uniform"),
            n,
            2,
            opts(true, false, Conditioning::Monic),
        )
        .unwrap();
        let b = brute_joint_pmf(
            &law(&f3, "uniform"),
            n,
            2,
            opts(true, false, Conditioning::ExactDegree),
        )
        .unwrap();
        assert_eq!(a.pmf, b.pmf);
        // Each α ∈ F_3 is a root of a uniform monic polynomial with probability 1/3.
        let distinct = brute_joint_pmf(
            &law(&f3, "uniform"),
            n,
            1,
            opts(false, false, Conditioning::Monic),
        )
        .unwrap();
        assert_eq!(distinct.pmf.moment(&[1]), r(1, 1));
    }
    assert!(brute_joint_pmf(
        &law(&f2, "uniform"),
        30,
        1,
        opts(false, true, Conditioning::Monic)
    )
    .is_err());
}

#[test]
fn brute_counts_match_factorization() {
    let f3 = fp(3);
    let mu = law(&f3, "0:1/4,1:1/4,2:1/2");
    let mut table: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    let mut zero = BigRational::zero();
    for (coeffs, w) in all_vectors(&mu, 4) {
        let f = Polynomial::new(&f3, coeffs).unwrap();
        if f.is_zero() {
            zero += w;
            continue;
        }
        let fact = f.factorize(0).unwrap();
        let mut key = vec![0u32; 2];
        for (phi, m) in &fact.factors {
            let d = phi.degree().unwrap();
            if d <= 2 && !(d == 1 && phi.coeff(0).is_zero()) {
                key[d - 1] += *m as u32;
            }
        }
        *table.entry(key).or_insert_with(BigRational::zero) += w;
    }
    let nonzero = BigRational::one() - &zero;
    let table: BTreeMap<_, _> = table.into_iter().map(|(k, v)| (k, v / &nonzero)).collect();
    let res = brute_joint_pmf(&mu, 4, 2, opts(true, true, Conditioning::Nonzero)).unwrap();
    assert_eq!(res.pmf.table(), &table);
    assert_eq!(res.zero_mass, zero);
    assert_eq!(res.conditioning_mass, nonzero);
}

#[test]
fn count_vector_conventions() {
    let f2 = fp(2);
    let f = Polynomial::from_u64s(&f2, &[0, 0, 1, 1]); // x^2 (x + 1)
    assert_eq!(count_vector(&f, 1, true, true).unwrap(), vec![1]);
    assert_eq!(count_vector(&f, 1, true, false).unwrap(), vec![3]);
    assert_eq!(count_vector(&f, 1, false, false).unwrap(), vec![2]);
    assert_eq!(
        count_vector(&f, 0, false, false).unwrap(),
        Vec::<u32>::new()
    );
}

#[test]
fn s_sequence_examples() {
    let f7 = fp(7);
    let space = VSpace::new(&f7, vec![Constraint::new(&f7, f7.one(), &[0])]).unwrap();
    let rep = s_sequence(&[f7.one()], &space, 3, 20).unwrap();
    assert!(rep.values.iter().all(|&v| v == 1));
    assert_eq!(rep.block_sum, 21);

    let f5 = fp(5);
    let space = VSpace::new(&f5, vec![Constraint::new(&f5, f5.from_u64(4), &[0])]).unwrap();
    let rep = s_sequence(&[f5.one()], &space, 0, 9).unwrap();
    assert_eq!(rep.values, vec![1, -1, 1, -1, 1, -1, 1, -1, 1, -1]);
    assert_eq!(rep.block_sum, 10);

    // Derivative block: S_n = C(n,1)·3^{n−1} mod 7, centered.
    let space = VSpace::new(&f7, vec![Constraint::new(&f7, f7.from_u64(3), &[1])]).unwrap();
    let rep = s_sequence(&[f7.from_u64(2)], &space, 0, 12).unwrap();
    for (n, &v) in rep.values.iter().enumerate() {
        let raw = if n == 0 {
            0
        } else {
            2 * n as u64 % 7 * ffuniv::ntheory::pow_mod(3, n as u64 - 1, 7) % 7
        };
        let centered = if raw > 3 { raw as i64 - 7 } else { raw as i64 };
        assert_eq!(v, centered);
    }

    let f101 = fp(101);
    let space = VSpace::new(&f101, vec![Constraint::new(&f101, f101.from_u64(2), &[0])]).unwrap();
    let rep = s_sequence(&[f101.one()], &space, 0, 200).unwrap();
    assert!(rep.block_sum as f64 > rep.threshold);
    assert!(!rep.slow_candidate);

    let f9 = FieldCtx::new(3, 2, None, 0).unwrap();
    let space = VSpace::new(&fp(3), vec![Constraint::new(&f9, f9.generator(), &[0])]).unwrap();
    assert!(s_sequence(&[f9.one()], &space, 0, 5).is_err());
}
