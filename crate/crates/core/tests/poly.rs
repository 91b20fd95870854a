use std::collections::HashSet;

use ffuniv::field::{FieldCtx, FieldElement};
use ffuniv::poly::{count_irreducibles, derivative_vector_matrix, rank_mod_p, RootSpec};
use ffuniv::{Error, Polynomial};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fp(p: u64) -> FieldCtx {
    FieldCtx::prime(p).unwrap()
}

fn f4() -> FieldCtx {
    FieldCtx::new(2, 2, Some(&[1, 1, 1]), 0).unwrap()
}

/// Naive product of coefficient lists in a field context.
fn naive_mul(ctx: &FieldCtx, a: &[FieldElement], b: &[FieldElement]) -> Vec<FieldElement> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ctx.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = ctx.add(&out[i + j], &ctx.mul(x, y));
        }
    }
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

/// All monic polynomials of degree d, coefficient lists.
fn monics(ctx: &FieldCtx, d: usize) -> Vec<Vec<FieldElement>> {
    let q = ctx.size().unwrap() as u64;
    (0..q.pow(d as u32))
        .map(|mut idx| {
            let mut v: Vec<FieldElement> = (0..d)
                .map(|_| {
                    let c = ctx.element(idx % q);
                    idx /= q;
                    c
                })
                .collect();
            v.push(ctx.one());
            v
        })
        .collect()
}

/// Monic irreducibles of degree d by sieving out all products of lower degrees.
fn irreducibles_by_sieve(ctx: &FieldCtx, d: usize) -> HashSet<Vec<FieldElement>> {
    let mut reducible = HashSet::new();
    for a in 1..=d / 2 {
        let left = monics(ctx, a);
        let right = monics(ctx, d - a);
        for f in &left {
            for g in &right {
                reducible.insert(naive_mul(ctx, f, g));
            }
        }
    }
    monics(ctx, d)
        .into_iter()
        .filter(|f| !reducible.contains(f))
        .collect()
}

fn random_poly(ctx: &FieldCtx, deg: usize, rng: &mut impl Rng) -> Polynomial {
    let mut c: Vec<FieldElement> = (0..=deg).map(|_| ctx.random(rng)).collect();
    if c[deg].is_zero() {
        c[deg] = ctx.one();
    }
    Polynomial::new(ctx, c).unwrap()
}

#[test]
fn arithmetic_examples() {
    let f2 = fp(2);
    let g = Polynomial::from_u64s(&f2, &[1, 0, 1])
        .gcd(&Polynomial::from_u64s(&f2, &[1, 1]))
        .unwrap();
    assert_eq!(g, Polynomial::from_u64s(&f2, &[1, 1]));

    let f3 = fp(3);
    let prod = Polynomial::from_u64s(&f3, &[1, 1])
        .mul(&Polynomial::from_u64s(&f3, &[2, 1]))
        .unwrap();
    assert_eq!(prod, Polynomial::from_u64s(&f3, &[2, 0, 1]));

    let f = Polynomial::from_u64s(&f3, &[2, 1, 1]);
    assert_eq!(f.eval(&f3.zero()), f3.from_u64(2));

    let err = f.divmod(&Polynomial::zero(&f3)).unwrap_err();
    assert_eq!(err, Error::DivisionByZero);
    assert_eq!(
        f.add(&Polynomial::one(&fp(5))).unwrap_err(),
        Error::MixedContexts
    );
}

#[test]
fn hasse_examples() {
    let f2 = fp(2);
    let x2 = Polynomial::from_u64s(&f2, &[0, 0, 1]);
    assert_eq!(x2.hasse_derivative(0), x2);
    assert!(x2.hasse_derivative(1).is_zero());
    assert_eq!(x2.hasse_derivative(2), Polynomial::one(&f2));
}

#[test]
fn taylor_examples() {
    let f5 = fp(5);
    let x2 = Polynomial::from_u64s(&f5, &[0, 0, 1]);
    let t = x2.taylor_at(&f5, &f5.zero()).unwrap();
    assert_eq!(t, vec![f5.zero(), f5.zero(), f5.one()]);

    let f2 = fp(2);
    let f = Polynomial::from_u64s(&f2, &[0, 1, 1]);
    let t = f.taylor_at(&f2, &f2.one()).unwrap();
    assert_eq!(t, vec![f2.zero(), f2.one(), f2.one()]);

    let c = Polynomial::from_u64s(&f5, &[3]);
    assert_eq!(
        c.taylor_at(&f5, &f5.from_u64(4)).unwrap(),
        vec![f5.from_u64(3)]
    );

    // A prime-field polynomial evaluated in an extension.
    let k = f4();
    let t = f.taylor_at(&k, &k.generator()).unwrap();
    assert_eq!(t[0], k.one()); // t² + t = 1 in F_4
}

#[test]
fn root_multiplicity_examples() {
    let f5 = fp(5);
    let cube = Polynomial::from_i64s(&f5, &[-1, 1]).pow(3);
    assert_eq!(cube.root_multiplicity(&f5, &f5.one()).unwrap(), 3);
    assert_eq!(cube.root_multiplicity(&f5, &f5.from_u64(2)).unwrap(), 0);
    let f2 = fp(2);
    let f = Polynomial::from_u64s(&f2, &[1, 0, 1]);
    assert_eq!(f.root_multiplicity(&f2, &f2.one()).unwrap(), 2);
    assert!(Polynomial::zero(&f2)
        .root_multiplicity(&f2, &f2.one())
        .is_err());
}

#[test]
fn factorization_examples() {
    let f2 = fp(2);
    let f = Polynomial::from_u64s(&f2, &[0, 1, 0, 0, 1])
        .factorize(7)
        .unwrap();
    let expect = vec![
        (Polynomial::from_u64s(&f2, &[0, 1]), 1),
        (Polynomial::from_u64s(&f2, &[1, 1]), 1),
        (Polynomial::from_u64s(&f2, &[1, 1, 1]), 1),
    ];
    assert_eq!(f.factors, expect);

    let f5 = fp(5);
    let f = Polynomial::from_i64s(&f5, &[-1, 0, 1])
        .factorize(1)
        .unwrap();
    assert_eq!(
        f.factors,
        vec![
            (Polynomial::from_u64s(&f5, &[1, 1]), 1),
            (Polynomial::from_u64s(&f5, &[4, 1]), 1)
        ]
    );

    let phi = Polynomial::from_u64s(&fp(3), &[1, 0, 1]);
    assert_eq!(phi.factorize(0).unwrap().factors, vec![(phi.clone(), 1)]);
    assert!(Polynomial::zero(&f5).factorize(0).is_err());
}

#[test]
fn irreducibility_examples() {
    assert!(Polynomial::from_u64s(&fp(2), &[1, 1, 1])
        .is_irreducible()
        .unwrap());
    assert!(Polynomial::from_u64s(&fp(3), &[1, 0, 1])
        .is_irreducible()
        .unwrap());
    assert!(!Polynomial::from_u64s(&fp(3), &[0, 0, 1])
        .is_irreducible()
        .unwrap());
    assert!(Polynomial::from_u64s(&fp(3), &[2])
        .is_irreducible()
        .is_err());
    assert!(Polynomial::from_u64s(&fp(3), &[1, 2])
        .is_irreducible()
        .is_err());
}

#[test]
fn count_irreducibles_examples() {
    assert_eq!(
        count_irreducibles(&BigUint::from(2u32), 2),
        BigUint::from(1u32)
    );
    assert_eq!(
        count_irreducibles(&BigUint::from(2u32), 4),
        BigUint::from(3u32)
    );
    assert_eq!(
        count_irreducibles(&BigUint::from(5u32), 1),
        BigUint::from(5u32)
    );
}

#[test]
fn count_irreducibles_matches_sieve() {
    let fields = [fp(2), fp(3), f4(), fp(5)];
    for ctx in &fields {
        let q = BigUint::from(ctx.size().unwrap() as u64);
        for i in 1..=6usize {
            if ctx.size().unwrap().pow(i as u32) > 20_000 {
                continue;
            }
            let sieve = irreducibles_by_sieve(ctx, i);
            assert_eq!(
                count_irreducibles(&q, i as u64),
                BigUint::from(sieve.len()),
                "q={q} i={i}"
            );
            for f in sieve.iter().take(50) {
                let poly = Polynomial::new(ctx, f.clone()).unwrap();
                assert!(poly.is_irreducible().unwrap());
            }
        }
    }
}

#[test]
fn necklace_identity() {
    for q in [2u32, 3, 7, 16, 101] {
        let q = BigUint::from(q);
        for i in 1..=12u64 {
            let total: BigUint = (1..=i)
                .filter(|d| i % d == 0)
                .map(|d| count_irreducibles(&q, d) * BigUint::from(d))
                .sum();
            assert_eq!(total, q.pow(i as u32));
        }
    }
}

fn check_factorization(f: &Polynomial) {
    let fac = f.factorize(11).unwrap();
    assert_eq!(&fac.expand(f.ctx()).unwrap(), f, "{f}");
    for w in fac.factors.windows(2) {
        assert_ne!(w[0].0, w[1].0);
        let (a, b) = (w[0].0.degree().unwrap(), w[1].0.degree().unwrap());
        assert!(a <= b);
    }
    for (g, k) in &fac.factors {
        assert!(*k >= 1);
        assert!(g.is_monic() && g.is_irreducible().unwrap(), "{g}");
    }
}

#[test]
fn exhaustive_factorization_small_fields() {
    for ctx in [fp(2), fp(3)] {
        for d in 1..=8 {
            for c in monics(&ctx, d) {
                check_factorization(&Polynomial::new(&ctx, c).unwrap());
            }
        }
    }
}

#[test]
fn irreducibility_matches_sieve_f2() {
    for d in 1..=10 {
        let irr = irreducibles_by_sieve(&fp(2), d);
        for c in monics(&fp(2), d) {
            let f = Polynomial::new(&fp(2), c.clone()).unwrap();
            assert_eq!(f.is_irreducible().unwrap(), irr.contains(&c), "{f}");
        }
    }
}

#[test]
fn random_factorization_f101() {
    let ctx = fp(101);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let deg = rng.random_range(1..=50);
        check_factorization(&random_poly(&ctx, deg, &mut rng));
    }
}

#[test]
fn factorization_with_repeated_and_inseparable_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for ctx in [
        fp(2),
        fp(3),
        fp(5),
        f4(),
        FieldCtx::new(3, 2, None, 1).unwrap(),
    ] {
        for _ in 0..40 {
            let a = random_poly(&ctx, rng.random_range(1..5), &mut rng);
            let b = random_poly(&ctx, rng.random_range(1..4), &mut rng);
            // b^p has zero derivative; a^2 and b^{2p} exercise multiplicities.
            let f = a.pow(2).mul(&b.pow(2 * ctx.p())).unwrap();
            check_factorization(&f);
        }
    }
}

#[test]
fn extension_field_factorization() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for ctx in [
        f4(),
        FieldCtx::new(3, 2, None, 4).unwrap(),
        FieldCtx::new(2, 3, None, 2).unwrap(),
    ] {
        for _ in 0..60 {
            let deg = rng.random_range(1..=12);
            check_factorization(&random_poly(&ctx, deg, &mut rng));
        }
    }
}

#[test]
fn factorization_is_seed_independent() {
    let ctx = fp(7);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let f = random_poly(&ctx, 30, &mut rng);
        assert_eq!(f.factorize(1).unwrap(), f.factorize(99).unwrap());
    }
}

#[test]
fn large_products_match_naive() {
    let ctx = fp(10_000_079);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (da, db) in [(63, 64), (200, 200), (100, 350), (513, 77), (1000, 999)] {
        let a = random_poly(&ctx, da, &mut rng);
        let b = random_poly(&ctx, db, &mut rng);
        let fast = a.mul(&b).unwrap();
        assert_eq!(
            fast.coeffs(),
            naive_mul(&ctx, a.coeffs(), b.coeffs()).as_slice()
        );
        let (q, r) = fast.add(&a).unwrap().divmod(&b).unwrap();
        assert_eq!(q.mul(&b).unwrap().add(&r).unwrap(), fast.add(&a).unwrap());
        assert!(r.degree().unwrap_or(0) < db);
    }
}

#[test]
fn degree_profile_agrees_with_factorization() {
    let ctx = fp(13);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let base = random_poly(&ctx, rng.random_range(1..25), &mut rng);
        let f = base.mul(&random_poly(&ctx, 2, &mut rng).pow(2)).unwrap();
        let f = f
            .mul(&Polynomial::x(&ctx).pow(rng.random_range(0..3)))
            .unwrap();
        let fac = f.factorize(0).unwrap();
        let full = f.degree_profile(None).unwrap();
        assert!(full.complete);
        let x = Polynomial::x(&ctx);
        let xmult = fac
            .factors
            .iter()
            .find(|(g, _)| *g == x)
            .map_or(0, |(_, k)| *k);
        assert_eq!(full.x_multiplicity, xmult);
        let mut expect: Vec<(usize, usize, usize)> = Vec::new();
        for (g, k) in fac.factors.iter().filter(|(g, _)| *g != x) {
            let d = g.degree().unwrap();
            match expect.iter_mut().find(|(dd, kk, _)| *dd == d && kk == k) {
                Some(slot) => slot.2 += 1,
                None => expect.push((d, *k, 1)),
            }
        }
        expect.sort_unstable();
        assert_eq!(full.groups, expect);

        let cut = f.degree_profile(Some(3)).unwrap();
        let low: Vec<_> = expect.iter().copied().filter(|g| g.0 <= 3).collect();
        assert_eq!(cut.groups, low);
        let high: usize = expect
            .iter()
            .filter(|g| g.0 > 3)
            .map(|g| g.0 * g.1 * g.2)
            .sum();
        assert_eq!(cut.unexamined_degree, high);
    }
}

#[test]
fn text_round_trip() {
    let k = FieldCtx::new(5, 3, None, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_poly(&k, 6, &mut rng);
    let s = f.to_text();
    assert!(s.starts_with("5^3: "));
    assert_eq!(Polynomial::parse(&k, &s).unwrap(), f);
    let g = Polynomial::from_u64s(&fp(7), &[1, 0, 3]);
    assert_eq!(g.to_text(), "7^1: 1,0,3");
    assert_eq!(Polynomial::parse(&fp(7), "7^1: 1,0,3").unwrap(), g);
    assert!(Polynomial::parse(&fp(5), "7^1: 1").is_err());
    assert!(Polynomial::parse(&fp(7), "7^1: ").unwrap().is_zero());
}

#[test]
fn derivative_matrix_examples() {
    let k = f4();
    let spec = [RootSpec {
        ctx: k.clone(),
        alpha: k.generator(),
        k: 0,
    }];
    let m = derivative_vector_matrix(&spec, 0, 2).unwrap();
    assert_eq!(m, vec![vec![1, 0], vec![0, 1]]);
    assert_eq!(rank_mod_p(&m, 2), 2);

    let f5 = fp(5);
    let spec = [RootSpec {
        ctx: f5.clone(),
        alpha: f5.from_u64(2),
        k: 0,
    }];
    let m = derivative_vector_matrix(&spec, 0, 1).unwrap();
    assert_eq!(m, vec![vec![1]]);

    let one = RootSpec {
        ctx: f5.clone(),
        alpha: f5.one(),
        k: 0,
    };
    assert!(derivative_vector_matrix(&[one.clone(), one], 0, 2).is_err());
    // t and t+1 are conjugate in F_4.
    let a = RootSpec {
        ctx: k.clone(),
        alpha: k.generator(),
        k: 0,
    };
    let b = RootSpec {
        ctx: k.clone(),
        alpha: k.add(&k.generator(), &k.one()),
        k: 0,
    };
    assert!(derivative_vector_matrix(&[a, b], 0, 4).is_err());
    let sub = RootSpec {
        ctx: k.clone(),
        alpha: k.one(),
        k: 0,
    };
    assert!(derivative_vector_matrix(&[sub], 0, 2).is_err());
}

#[test]
fn derivative_matrix_full_rank_on_random_configurations() {
    let fields: Vec<FieldCtx> = vec![
        fp(2),
        fp(3),
        fp(5),
        fp(7),
        f4(),
        FieldCtx::new(2, 3, None, 1).unwrap(),
        FieldCtx::new(3, 2, None, 1).unwrap(),
        FieldCtx::new(5, 2, None, 1).unwrap(),
        FieldCtx::new(2, 4, None, 1).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut done = 0;
    while done < 1000 {
        let p = [2u64, 3, 5, 7][rng.random_range(0..4)];
        let pool: Vec<&FieldCtx> = fields.iter().filter(|f| f.p() == p).collect();
        let mut roots: Vec<RootSpec> = Vec::new();
        let mut minpolys = Vec::new();
        let mut d = 0;
        for _ in 0..rng.random_range(1..=4) {
            let ctx = pool[rng.random_range(0..pool.len())];
            let alpha = ctx.random(&mut rng);
            let k = rng.random_range(0..3);
            let cost = ctx.degree() * (k + 1);
            if alpha.is_zero() || ctx.lies_in_proper_subfield(&alpha) || d + cost > 8 {
                continue;
            }
            let mp = ctx.minimal_polynomial(&alpha);
            if minpolys.contains(&mp) {
                continue;
            }
            minpolys.push(mp);
            d += cost;
            roots.push(RootSpec {
                ctx: ctx.clone(),
                alpha,
                k,
            });
        }
        if roots.is_empty() {
            continue;
        }
        let m0 = rng.random_range(0..40);
        let mat = derivative_vector_matrix(&roots, m0, d).unwrap();
        assert_eq!(mat.len(), d);
        assert_eq!(rank_mod_p(&mat, p), d, "{roots:?} m={m0}");
        done += 1;
    }
}

fn arb_poly(ctx: FieldCtx, max_deg: usize) -> impl Strategy<Value = Polynomial> {
    let p = ctx.p();
    prop::collection::vec(0..p, 0..=max_deg + 1).prop_map(move |c| Polynomial::from_u64s(&ctx, &c))
}

proptest! {
    #[test]
    fn hasse_product_rule(f in arb_poly(fp(7), 12), g in arb_poly(fp(7), 12), k in 0usize..=5) {
        let lhs = f.mul(&g).unwrap().hasse_derivative(k);
        let mut rhs = Polynomial::zero(f.ctx());
        for i in 0..=k {
            rhs = rhs.add(&f.hasse_derivative(i).mul(&g.hasse_derivative(k - i)).unwrap()).unwrap();
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn hasse_product_rule_char2(f in arb_poly(fp(2), 16), g in arb_poly(fp(2), 16), k in 0usize..=5) {
        let lhs = f.mul(&g).unwrap().hasse_derivative(k);
        let mut rhs = Polynomial::zero(f.ctx());
        for i in 0..=k {
            rhs = rhs.add(&f.hasse_derivative(i).mul(&g.hasse_derivative(k - i)).unwrap()).unwrap();
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn taylor_reconstructs(f in arb_poly(fp(5), 15), a in 0u64..5) {
        let ctx = f.ctx().clone();
        let a = ctx.from_u64(a);
        let t = f.taylor_at(&ctx, &a).unwrap();
        let shift = Polynomial::linear(&ctx, &a);
        let mut back = Polynomial::zero(&ctx);
        for (k, c) in t.iter().enumerate() {
            back = back.add(&shift.pow(k as u64).scale(c)).unwrap();
        }
        prop_assert_eq!(&back, &f);
        for (k, c) in t.iter().enumerate() {
            prop_assert_eq!(*c, f.hasse_derivative(k).eval(&a));
        }
    }

    #[test]
    fn taylor_in_extension(f in arb_poly(fp(3), 10), idx in 0u64..27) {
        let k = FieldCtx::new(3, 3, None, 5).unwrap();
        let a = k.element(idx);
        let t = f.taylor_at(&k, &a).unwrap();
        let lifted = Polynomial::new(&k, f.coeffs().iter().map(|c| k.from_u64(c.coords()[0] as u64)).collect()).unwrap();
        for (j, c) in t.iter().enumerate() {
            prop_assert_eq!(*c, lifted.hasse_derivative(j).eval(&a));
        }
    }

    #[test]
    fn root_multiplicity_is_additive(f in arb_poly(fp(11), 10), a in 0u64..11, r in 0u64..6) {
        prop_assume!(!f.is_zero());
        let ctx = f.ctx().clone();
        let a = ctx.from_u64(a);
        let g = f.mul(&Polynomial::linear(&ctx, &a).pow(r)).unwrap();
        let t = g.taylor_at(&ctx, &a).unwrap();
        let lead_zeros = t.iter().take_while(|c| c.is_zero()).count();
        let m = g.root_multiplicity(&ctx, &a).unwrap();
        prop_assert_eq!(m, f.root_multiplicity(&ctx, &a).unwrap() + r as usize);
        prop_assert_eq!(m, lead_zeros);
    }

    #[test]
    fn gcd_divides_both(f in arb_poly(fp(3), 10), g in arb_poly(fp(3), 10), h in arb_poly(fp(3), 4)) {
        let a = f.mul(&h).unwrap();
        let b = g.mul(&h).unwrap();
        let d = a.gcd(&b).unwrap();
        if !d.is_zero() {
            prop_assert!(d.is_monic());
            prop_assert!(a.rem(&d).unwrap().is_zero());
            prop_assert!(b.rem(&d).unwrap().is_zero());
            if !h.is_zero() {
                prop_assert!(d.rem(&h.monic().1).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn conjugates_share_minimal_polynomial(idx in 1u64..81, j in 0usize..4) {
        let k = FieldCtx::new(3, 4, None, 3).unwrap();
        let a = k.element(idx);
        let b = k.frobenius(&a, j);
        prop_assert!(k.are_conjugate(&a, &b));
        let mp = k.minimal_polynomial(&a);
        prop_assert_eq!(&mp, &k.minimal_polynomial(&b));
        let f = Polynomial::from_u64s(&fp(3), &mp);
        prop_assert!(f.is_irreducible().unwrap());
        prop_assert_eq!(f.root_multiplicity(&k, &a).unwrap(), 1);
    }
}
