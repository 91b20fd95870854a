//! Per-polynomial factor statistics and mergeable empirical distributions.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{invalid, Error, Result};
use crate::pmf::ExactPmf;
use crate::poly::{DegreeProfile, Factorization, Polynomial};

/// Counts of irreducible factors by degree, the factor x kept apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorStats {
    /// N_i for i = 1..=N: distinct irreducible factors of degree i (x excluded).
    pub counts_distinct: Vec<u32>,
    /// N'_i for i = 1..=N: the same counted with multiplicity.
    pub counts_mult: Vec<u32>,
    /// Largest factor degree over deg f; `None` when factors above N were not split.
    pub largest_norm_degree: Option<Ratio<u64>>,
    /// Number of irreducible factors with multiplicity, x included; `None`
    /// when factors above N were not split.
    pub total_mult: Option<u64>,
    pub x_multiplicity: u32,
    pub degree: usize,
}

impl FactorStats {
    /// Statistics of a complete factorization, tracking degrees 1..=max_degree.
    pub fn from_factorization(fact: &Factorization, max_degree: usize) -> Self {
        let degree = fact.degree();
        let mut s = FactorStats::empty(max_degree, degree);
        let mut largest = 0usize;
        let mut total = 0u64;
        for (phi, k) in &fact.factors {
            let d = phi.degree().expect("factors are nonconstant");
            largest = largest.max(d);
            total += *k as u64;
            if d == 1 && phi.coeff(0).is_zero() {
                s.x_multiplicity = *k as u32;
                continue;
            }
            if d <= max_degree {
                s.counts_distinct[d - 1] += 1;
                s.counts_mult[d - 1] += *k as u32;
            }
        }
        s.largest_norm_degree = Some(norm(largest, degree));
        s.total_mult = Some(total);
        s
    }

    /// Statistics from a degree profile; largest degree and total count are
    /// available only when the profile is complete.
    pub fn from_profile(profile: &DegreeProfile, max_degree: usize) -> Self {
        let mut s = FactorStats::empty(max_degree, profile.degree);
        s.x_multiplicity = profile.x_multiplicity as u32;
        let mut largest = if profile.x_multiplicity > 0 { 1 } else { 0 };
        let mut total = profile.x_multiplicity as u64;
        for &(d, k, count) in &profile.groups {
            largest = largest.max(d);
            total += (k * count) as u64;
            if d <= max_degree {
                s.counts_distinct[d - 1] += count as u32;
                s.counts_mult[d - 1] += (k * count) as u32;
            }
        }
        if profile.unexamined_degree == 0 {
            s.largest_norm_degree = Some(norm(largest, profile.degree));
            s.total_mult = Some(total);
        }
        s
    }

    /// Factorizes `f` (which must be nonzero) and collects its statistics.
    pub fn of_polynomial(f: &Polynomial, max_degree: usize) -> Result<Self> {
        if f.is_zero() {
            return invalid("factor statistics of the zero polynomial");
        }
        let profile = f.degree_profile(None)?;
        Ok(Self::from_profile(&profile, max_degree))
    }

    fn empty(max_degree: usize, degree: usize) -> Self {
        FactorStats {
            counts_distinct: vec![0; max_degree],
            counts_mult: vec![0; max_degree],
            largest_norm_degree: None,
            total_mult: None,
            x_multiplicity: 0,
            degree,
        }
    }
}

fn norm(largest: usize, degree: usize) -> Ratio<u64> {
    if degree == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(largest as u64, degree as u64)
    }
}

/// Largest m with φ^m | f; φ must be monic irreducible and f nonzero.
pub fn multiplicity_of(f: &Polynomial, phi: &Polynomial) -> Result<usize> {
    if !phi.is_monic() || !phi.is_irreducible()? {
        return invalid(format!("{phi} is not monic irreducible"));
    }
    if f.is_zero() {
        return invalid("multiplicity in the zero polynomial is unbounded");
    }
    let mut g = f.clone();
    let mut m = 0;
    loop {
        let (q, r) = g.divmod(phi)?;
        if !r.is_zero() {
            return Ok(m);
        }
        g = q;
        m += 1;
    }
}

/// Occurrence counts of integer vectors.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: BTreeMap<Vec<u32>, u64>,
    trials: u64,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: Vec<u32>) {
        self.add_count(key, 1);
    }

    pub fn add_count(&mut self, key: Vec<u32>, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += count;
        self.trials += count;
    }

    /// Combines two tallies; associative and commutative.
    pub fn merge(&mut self, other: &EmpiricalDistribution) {
        for (k, &c) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += c;
        }
        self.trials += other.trials;
    }

    pub fn merged(mut self, other: &EmpiricalDistribution) -> Self {
        self.merge(other);
        self
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn counts(&self) -> &BTreeMap<Vec<u32>, u64> {
        &self.counts
    }

    pub fn is_empty(&self) -> bool {
        self.trials == 0
    }

    pub fn probabilities(&self) -> BTreeMap<Vec<u32>, f64> {
        let n = self.trials as f64;
        self.counts
            .iter()
            .map(|(k, &c)| (k.clone(), c as f64 / n))
            .collect()
    }

    /// Law of coordinate `i`.
    pub fn marginal(&self, i: usize) -> EmpiricalDistribution {
        let mut out = EmpiricalDistribution::new();
        for (k, &c) in &self.counts {
            out.add_count(vec![k.get(i).copied().unwrap_or(0)], c);
        }
        out
    }

    /// Sample mean and its standard error for coordinate `i`.
    pub fn mean_se(&self, i: usize) -> (f64, f64) {
        let n = self.trials as f64;
        let (mut s, mut s2) = (0.0, 0.0);
        for (k, &c) in &self.counts {
            let x = k.get(i).copied().unwrap_or(0) as f64;
            s += x * c as f64;
            s2 += x * x * c as f64;
        }
        let mean = s / n;
        let var = if self.trials > 1 {
            (s2 - n * mean * mean) / (n - 1.0)
        } else {
            0.0
        };
        (mean, (var.max(0.0) / n).sqrt())
    }

    /// CSV with header `v1,...,vN,count`, rows in key order.
    pub fn to_csv(&self) -> String {
        let width = self.counts.keys().map(|k| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        let header: Vec<String> = (1..=width)
            .map(|i| format!("v{i}"))
            .chain(["count".to_string()])
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (k, c) in &self.counts {
            let row: Vec<String> = k
                .iter()
                .map(|x| x.to_string())
                .chain([c.to_string()])
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut out = EmpiricalDistribution::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| {
                    Error::InvalidInput(format!("bad CSV line {}: '{line}'", lineno + 1))
                })?;
            let (count, key) = vals
                .split_last()
                .ok_or_else(|| Error::InvalidInput("empty CSV row".into()))?;
            out.add_count(key.iter().map(|&v| v as u32).collect(), *count);
        }
        Ok(out)
    }

    /// Multinomial resample of the same size.
    fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> EmpiricalDistribution {
        let mut out = EmpiricalDistribution::new();
        let mut left = self.trials;
        let mut mass_left = self.trials;
        for (k, &c) in &self.counts {
            if left == 0 {
                break;
            }
            let draw = if c == mass_left {
                left
            } else {
                Binomial::new(left, c as f64 / mass_left as f64)
                    .unwrap()
                    .sample(rng)
            };
            out.add_count(k.clone(), draw);
            left -= draw;
            mass_left -= c;
        }
        out
    }
}

/// Either side of a distance computation.
pub trait ProbabilityTable {
    fn probability_map(&self) -> BTreeMap<Vec<u32>, f64>;
    fn as_empirical(&self) -> Option<&EmpiricalDistribution> {
        None
    }
}

impl ProbabilityTable for EmpiricalDistribution {
    fn probability_map(&self) -> BTreeMap<Vec<u32>, f64> {
        self.probabilities()
    }
    fn as_empirical(&self) -> Option<&EmpiricalDistribution> {
        Some(self)
    }
}

impl ProbabilityTable for ExactPmf<Vec<u32>> {
    fn probability_map(&self) -> BTreeMap<Vec<u32>, f64> {
        self.to_f64()
    }
}

impl ProbabilityTable for BTreeMap<Vec<u32>, f64> {
    fn probability_map(&self) -> BTreeMap<Vec<u32>, f64> {
        self.clone()
    }
}

fn check_nonempty(t: &dyn ProbabilityTable) -> Result<()> {
    if let Some(e) = t.as_empirical() {
        if e.is_empty() {
            return invalid("empty distribution");
        }
    }
    Ok(())
}

fn tv_maps(a: &BTreeMap<Vec<u32>, f64>, b: &BTreeMap<Vec<u32>, f64>) -> f64 {
    let mut total = 0.0;
    for (k, pa) in a {
        total += (pa - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, pb) in b {
        if !a.contains_key(k) {
            total += pb;
        }
    }
    (total / 2.0).min(1.0)
}

/// ½ Σ_v |P_a(v) − P_b(v)| over the union of supports.
pub fn tv_distance(a: &dyn ProbabilityTable, b: &dyn ProbabilityTable) -> Result<f64> {
    check_nonempty(a)?;
    check_nonempty(b)?;
    Ok(tv_maps(&a.probability_map(), &b.probability_map()))
}

/// Percentile bootstrap interval for the TV distance, resampling only the
/// empirical sides.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    a: &dyn ProbabilityTable,
    b: &dyn ProbabilityTable,
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_nonempty(a)?;
    check_nonempty(b)?;
    if !(0.0 < level && level < 1.0) || resamples == 0 {
        return invalid("bootstrap needs resamples ≥ 1 and a level in (0, 1)");
    }
    let fixed_a = a.probability_map();
    let fixed_b = b.probability_map();
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let ra = a.as_empirical().map(|e| e.resample(rng).probabilities());
            let rb = b.as_empirical().map(|e| e.resample(rng).probabilities());
            tv_maps(
                ra.as_ref().unwrap_or(&fixed_a),
                rb.as_ref().unwrap_or(&fixed_b),
            )
        })
        .collect();
    stats.sort_by(|x, y| x.total_cmp(y));
    let lo_idx = (((1.0 - level) / 2.0) * resamples as f64).floor() as usize;
    let hi_idx = ((((1.0 + level) / 2.0) * resamples as f64).ceil() as usize).min(resamples) - 1;
    Ok((stats[lo_idx.min(resamples - 1)], stats[hi_idx]))
}

/// Two-sample Kolmogorov–Smirnov statistic sup_x |F_a(x) − F_b(x)|.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return invalid("empty sample");
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}
