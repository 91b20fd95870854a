use std::collections::BTreeMap;

use ffuniv::field::FieldCtx;
use ffuniv::models::CoefficientDistribution;
use ffuniv::pmf::ExactPmf;
use ffuniv::rng::stream;
use ffuniv::stats::{
    bootstrap_ci, multiplicity_of, tv_distance, EmpiricalDistribution, FactorStats,
};
use ffuniv::Polynomial;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;

fn fp(p: u64) -> FieldCtx {
    FieldCtx::prime(p).unwrap()
}

#[test]
fn stats_examples() {
    let f2 = fp(2);
    // x (x+1)^2 (x^2+x+1)
    let f = Polynomial::from_u64s(&f2, &[0, 1])
        .mul(&Polynomial::from_u64s(&f2, &[1, 1]).pow(2))
        .unwrap()
        .mul(&Polynomial::from_u64s(&f2, &[1, 1, 1]))
        .unwrap();
    let s = FactorStats::from_factorization(&f.factorize(0).unwrap(), 2);
    assert_eq!(s.counts_distinct, vec![1, 1]);
    assert_eq!(s.counts_mult, vec![2, 1]);
    assert_eq!(s.x_multiplicity, 1);
    assert_eq!(s.largest_norm_degree, Some(Ratio::new(2, 5)));
    assert_eq!(s.total_mult, Some(4));
    assert_eq!(FactorStats::of_polynomial(&f, 2).unwrap(), s);

    let irr = Polynomial::from_u64s(&f2, &[1, 1, 0, 0, 0, 0, 1]); // x^6 + x + 1
    assert!(irr.is_irreducible().unwrap());
    let s = FactorStats::of_polynomial(&irr, 3).unwrap();
    assert_eq!(s.counts_mult, vec![0, 0, 0]);
    assert_eq!(s.largest_norm_degree, Some(Ratio::from_integer(1)));

    let cube = Polynomial::from_u64s(&f2, &[1, 1]).pow(3);
    let s = FactorStats::of_polynomial(&cube, 1).unwrap();
    assert_eq!((s.counts_distinct, s.counts_mult), (vec![1], vec![3]));

    assert!(FactorStats::of_polynomial(&Polynomial::zero(&f2), 1).is_err());
}

#[test]
fn multiplicity_examples() {
    let f2 = fp(2);
    let phi = Polynomial::from_u64s(&f2, &[1, 1, 1]);
    assert_eq!(multiplicity_of(&phi.pow(2), &phi).unwrap(), 2);
    assert_eq!(
        multiplicity_of(&Polynomial::from_u64s(&f2, &[1, 0, 1]), &phi).unwrap(),
        0
    );
    let f = Polynomial::from_u64s(&f2, &[0, 1, 0, 0, 1]);
    assert_eq!(
        multiplicity_of(&f, &Polynomial::from_u64s(&f2, &[1, 1])).unwrap(),
        1
    );
    assert!(multiplicity_of(&f, &Polynomial::from_u64s(&f2, &[1, 0, 1])).is_err());
}

#[test]
fn degree_accounting_on_random_polynomials() {
    let ctx = fp(31);
    let mu = CoefficientDistribution::parse(&ctx, "uniform:-1,0,1").unwrap();
    for t in 0..400 {
        let f = mu.sample_poly(40, &mut stream(8, 0, t));
        if f.is_zero() {
            continue;
        }
        let n = f.degree().unwrap();
        for cap in [1usize, 3, 6] {
            let profile = f.degree_profile(Some(cap)).unwrap();
            let s = FactorStats::from_profile(&profile, cap);
            let low: usize = s
                .counts_mult
                .iter()
                .enumerate()
                .map(|(i, &k)| (i + 1) * k as usize)
                .sum();
            assert_eq!(
                low + s.x_multiplicity as usize + profile.unexamined_degree,
                n
            );
            assert!(s
                .counts_distinct
                .iter()
                .zip(&s.counts_mult)
                .all(|(a, b)| a <= b));
            let full = FactorStats::from_factorization(&f.factorize(t).unwrap(), cap);
            assert_eq!(s.counts_mult, full.counts_mult);
            assert_eq!(s.counts_distinct, full.counts_distinct);
            assert_eq!(s.x_multiplicity, full.x_multiplicity);
        }
        let complete = FactorStats::of_polynomial(&f, 3).unwrap();
        let full = FactorStats::from_factorization(&f.factorize(0).unwrap(), 3);
        assert_eq!(complete, full);
        let lnd = complete.largest_norm_degree.unwrap();
        assert_eq!((lnd * Ratio::from_integer(n as u64)).denom(), &1);
    }
}

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn tv_examples() {
    let a = ExactPmf::new(BTreeMap::from([(vec![0u32], r(1, 2)), (vec![1], r(1, 2))])).unwrap();
    let b = ExactPmf::new(BTreeMap::from([(vec![0u32], r(3, 4)), (vec![1], r(1, 4))])).unwrap();
    assert!((tv_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
    assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
    let mut e = EmpiricalDistribution::new();
    e.add(vec![7]);
    assert_eq!(tv_distance(&a, &e).unwrap(), 1.0);
    assert!(tv_distance(&a, &EmpiricalDistribution::new()).is_err());
}

#[test]
fn bootstrap_interval_brackets_estimate() {
    let exact = ExactPmf::new(BTreeMap::from([(vec![0u32], r(1, 2)), (vec![1], r(1, 2))])).unwrap();
    let mut e = EmpiricalDistribution::new();
    e.add_count(vec![0], 600);
    e.add_count(vec![1], 400);
    let tv = tv_distance(&exact, &e).unwrap();
    let (lo, hi) = bootstrap_ci(&exact, &e, 400, 0.95, &mut stream(1, 1, 1)).unwrap();
    assert!(lo <= tv && tv <= hi, "{lo} {tv} {hi}");
    assert!(hi - lo < 0.1);
    // Two exact sides: the interval collapses.
    let (lo, hi) = bootstrap_ci(&exact, &exact, 10, 0.9, &mut stream(1, 1, 2)).unwrap();
    assert_eq!((lo, hi), (0.0, 0.0));
}

fn arb_emp() -> impl Strategy<Value = EmpiricalDistribution> {
    prop::collection::vec((prop::collection::vec(0u32..3, 2), 1u64..5), 0..8).prop_map(|items| {
        let mut e = EmpiricalDistribution::new();
        for (k, c) in items {
            e.add_count(k, c);
        }
        e
    })
}

proptest! {
    #[test]
    fn merge_is_associative_and_commutative(a in arb_emp(), b in arb_emp(), c in arb_emp()) {
        let left = a.clone().merged(&b).merged(&c);
        let right = a.clone().merged(&b.clone().merged(&c));
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(a.clone().merged(&b), b.clone().merged(&a));
        prop_assert_eq!(left.trials(), a.trials() + b.trials() + c.trials());
        prop_assert_eq!(left.counts().values().sum::<u64>(), left.trials());
    }

    #[test]
    fn tv_is_a_metric(a in arb_emp(), b in arb_emp(), c in arb_emp()) {
        prop_assume!(!a.is_empty() && !b.is_empty() && !c.is_empty());
        prop_assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        let ab = tv_distance(&a, &b).unwrap();
        let bc = tv_distance(&b, &c).unwrap();
        let ac = tv_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - tv_distance(&b, &a).unwrap()).abs() < 1e-12);
    }
}
