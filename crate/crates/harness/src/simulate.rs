//! Deterministic parallel Monte Carlo over random polynomials.
//!
//! Trial t always draws from the stream (seed, experiment, t). Trials are cut
//! into fixed chunks, chunks run on a pool of `workers` threads, and the
//! per-chunk histograms are merged in chunk order, so the result does not
//! depend on the worker count.

use std::time::Instant;

use ffuniv::field::FieldCtx;
use ffuniv::models::{sample_uniform_monic, CoefficientDistribution};
use ffuniv::moments::{uniform_joint_law, CountModel};
use ffuniv::pmf::{ratio_to_f64, ExactPmf};
use ffuniv::rng::stream;
use ffuniv::stats::{
    bootstrap_ci, multiplicity_of, tv_distance, EmpiricalDistribution, FactorStats,
};
use ffuniv::{Error, Polynomial};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Model, Reference, Statistic};
use crate::error::{HarnessError, HarnessResult};

/// Trials per scheduling unit.
pub const CHUNK: u64 = 256;
/// Stream offset separating reference draws from model draws.
const REFERENCE_STREAM: u64 = 0x5245_4600;
/// Stream offset for bootstrap resampling.
const BOOTSTRAP_STREAM: u64 = 0x424f_4f54;
const BOOTSTRAP_RESAMPLES: usize = 200;

/// Draws the polynomial of one trial.
#[derive(Clone, Debug)]
pub struct Sampler {
    ctx: FieldCtx,
    mu: Option<CoefficientDistribution>,
    n: usize,
}

impl Sampler {
    pub fn from_mu(mu: &CoefficientDistribution, n: usize) -> Self {
        Sampler {
            ctx: mu.ctx().clone(),
            mu: Some(mu.clone()),
            n,
        }
    }

    pub fn uniform_monic(ctx: &FieldCtx, n: usize) -> Self {
        Sampler {
            ctx: ctx.clone(),
            mu: None,
            n,
        }
    }

    pub fn from_config(cfg: &ExperimentConfig) -> HarnessResult<Self> {
        let ctx = cfg.field()?;
        Ok(match cfg.model {
            Model::Mu => Self::from_mu(&cfg.law(&ctx)?, cfg.n),
            Model::UniformMonic => Self::uniform_monic(&ctx, cfg.n),
        })
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    /// f with coefficients from μ, redrawn from the same stream while f = 0;
    /// or a uniform monic polynomial.
    pub fn draw<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> HarnessResult<Polynomial> {
        match &self.mu {
            None => Ok(sample_uniform_monic(&self.ctx, self.n, rng)),
            Some(mu) => {
                if mu.support().iter().all(|x| x.is_zero()) {
                    return Err(HarnessError::invalid(
                        "μ is the point mass at 0: every polynomial is zero",
                    ));
                }
                loop {
                    let f = mu.sample_poly(self.n, rng);
                    if !f.is_zero() {
                        return Ok(f);
                    }
                }
            }
        }
    }
}

/// The statistics recorded per trial.
#[derive(Clone, Debug)]
pub struct TrialPlan {
    stats: Vec<Statistic>,
    phis: Vec<Option<Polynomial>>,
    max_degree: usize,
    full: bool,
}

impl TrialPlan {
    pub fn new(ctx: &FieldCtx, stats: &[Statistic], max_degree: usize) -> HarnessResult<Self> {
        let phis = stats
            .iter()
            .map(|s| s.phi(ctx))
            .collect::<HarnessResult<Vec<_>>>()?;
        Ok(TrialPlan {
            stats: stats.to_vec(),
            phis,
            max_degree,
            full: stats.iter().any(Statistic::needs_full_factorization),
        })
    }

    pub fn stats(&self) -> &[Statistic] {
        &self.stats
    }

    /// One histogram key per statistic.
    pub fn observe(&self, f: &Polynomial) -> HarnessResult<Vec<Vec<u32>>> {
        let limit = if self.full {
            None
        } else {
            Some(self.max_degree)
        };
        let s = FactorStats::from_profile(&f.degree_profile(limit)?, self.max_degree);
        let mut keys = Vec::with_capacity(self.stats.len());
        for (stat, phi) in self.stats.iter().zip(&self.phis) {
            keys.push(match stat {
                Statistic::Distinct => s.counts_distinct.clone(),
                Statistic::WithMult => s.counts_mult.clone(),
                Statistic::Largest => {
                    let r = s.largest_norm_degree.expect("full profile");
                    // r = largest/deg in lowest terms; rescale to deg f.
                    let largest = if s.degree == 0 {
                        0
                    } else {
                        *r.numer() * s.degree as u64 / *r.denom()
                    };
                    vec![largest as u32, s.degree as u32]
                }
                Statistic::Total => vec![s.total_mult.expect("full profile") as u32],
                Statistic::Multiplicity(_) => {
                    vec![multiplicity_of(f, phi.as_ref().expect("parsed with the plan"))? as u32]
                }
            });
        }
        Ok(keys)
    }
}

/// Runs trials 0..trials and returns one histogram per statistic.
pub fn run_trials(
    sampler: &Sampler,
    plan: &TrialPlan,
    seed: u64,
    experiment: u64,
    trials: u64,
    workers: usize,
) -> HarnessResult<Vec<EmpiricalDistribution>> {
    run_chunks(
        trials,
        workers,
        |t| {
            let mut rng = stream(seed, experiment, t);
            plan.observe(&sampler.draw(&mut rng)?)
        },
        plan.stats.len(),
    )
}

/// Generic driver: `observe(t)` yields the keys of trial t.
pub fn run_chunks<F>(
    trials: u64,
    workers: usize,
    observe: F,
    width: usize,
) -> HarnessResult<Vec<EmpiricalDistribution>>
where
    F: Fn(u64) -> HarnessResult<Vec<Vec<u32>>> + Sync,
{
    if workers == 0 {
        return Err(HarnessError::invalid("workers must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::invalid(format!("thread pool: {e}")))?;
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Vec<EmpiricalDistribution>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut hists = vec![EmpiricalDistribution::new(); width];
                for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    for (h, key) in hists.iter_mut().zip(observe(t)?) {
                        h.add(key);
                    }
                }
                Ok(hists)
            })
            .collect::<HarnessResult<Vec<_>>>()
    })?;
    let mut out = vec![EmpiricalDistribution::new(); width];
    for part in &parts {
        for (acc, h) in out.iter_mut().zip(part) {
            acc.merge(h);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanComparison {
    pub i: usize,
    pub mean: f64,
    pub se: f64,
    pub reference_mean: f64,
    pub reference_se: f64,
    /// (mean − reference)/sqrt(se² + reference_se²)
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    /// "exact-uniform" or "sampled-uniform"
    pub reference: String,
    pub tv: f64,
    pub tv_ci95: Option<[f64; 2]>,
    pub means: Vec<MeanComparison>,
}

#[derive(Clone, Debug)]
pub struct StatRecord {
    pub stat: Statistic,
    pub empirical: EmpiricalDistribution,
    pub comparison: Option<Comparison>,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub stats: Vec<StatRecord>,
    pub wall_time_s: f64,
}

fn count_model(stat: &Statistic) -> Option<CountModel> {
    match stat {
        Statistic::Distinct => Some(CountModel::Distinct),
        Statistic::WithMult => Some(CountModel::WithMultiplicity),
        _ => None,
    }
}

/// Exact law of the uniform model for a count statistic, if affordable.
fn exact_reference(
    cfg: &ExperimentConfig,
    stat: &Statistic,
) -> HarnessResult<Option<ExactPmf<Vec<u32>>>> {
    let Some(model) = count_model(stat) else {
        return Ok(None);
    };
    let q = BigUint::from(cfg.p).pow(cfg.e as u32);
    match uniform_joint_law(&q, cfg.n, cfg.max_degree, model, true) {
        Ok(law) => Ok(Some(law)),
        Err(Error::ResourceCap(_)) if cfg.reference == Reference::Auto => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Empirical means per coordinate against a reference given by its means
/// and standard errors.
pub fn compare_means(emp: &EmpiricalDistribution, reference: &[(f64, f64)]) -> Vec<MeanComparison> {
    reference
        .iter()
        .enumerate()
        .map(|(i, &(rm, rse))| {
            let (mean, se) = emp.mean_se(i);
            let spread = (se * se + rse * rse).sqrt();
            let z = if spread > 0.0 {
                (mean - rm) / spread
            } else if mean == rm {
                0.0
            } else {
                f64::INFINITY.copysign(mean - rm)
            };
            MeanComparison {
                i: i + 1,
                mean,
                se,
                reference_mean: rm,
                reference_se: rse,
                z,
            }
        })
        .collect()
}

pub fn run_simulation(cfg: &ExperimentConfig) -> HarnessResult<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let sampler = Sampler::from_config(cfg)?;
    let plan = TrialPlan::new(sampler.ctx(), &cfg.stat, cfg.max_degree)?;
    let key = cfg.sampling_key();
    let empirical = run_trials(&sampler, &plan, cfg.seed, key, cfg.trials, cfg.workers)
        .map_err(|e| e.context(format!("p={} n={} mu={}", cfg.p, cfg.n, cfg.mu)))?;

    let mut sampled_ref: Option<Vec<EmpiricalDistribution>> = None;
    let mut stats = Vec::with_capacity(cfg.stat.len());
    for (k, (stat, emp)) in cfg.stat.iter().zip(empirical).enumerate() {
        let comparison = match cfg.reference {
            Reference::None => None,
            _ => {
                let exact = match cfg.reference {
                    Reference::Sampled => None,
                    _ => exact_reference(cfg, stat)?,
                };
                let mut boot = stream(cfg.seed, key ^ BOOTSTRAP_STREAM, k as u64);
                match exact {
                    Some(law) => {
                        let width = emp.counts().keys().next().map_or(0, |v| v.len());
                        let reference: Vec<(f64, f64)> = (0..width)
                            .map(|i| {
                                let mut e = vec![0u32; width];
                                e[i] = 1;
                                (ratio_to_f64(&law.moment(&e)), 0.0)
                            })
                            .collect();
                        let ci = bootstrap_ci(&emp, &law, BOOTSTRAP_RESAMPLES, 0.95, &mut boot)?;
                        Some(Comparison {
                            reference: "exact-uniform".into(),
                            tv: tv_distance(&emp, &law)?,
                            tv_ci95: Some([ci.0, ci.1]),
                            means: compare_means(&emp, &reference),
                        })
                    }
                    None if cfg.reference == Reference::Exact => {
                        return Err(HarnessError::invalid(format!(
                            "no exact reference for statistic {stat}"
                        )));
                    }
                    None => {
                        if sampled_ref.is_none() {
                            let uniform = Sampler::uniform_monic(sampler.ctx(), cfg.n);
                            sampled_ref = Some(run_trials(
                                &uniform,
                                &plan,
                                cfg.seed,
                                key ^ REFERENCE_STREAM,
                                cfg.trials,
                                cfg.workers,
                            )?);
                        }
                        let reference = &sampled_ref.as_ref().expect("just filled")[k];
                        let width = emp.counts().keys().next().map_or(0, |v| v.len());
                        let means: Vec<(f64, f64)> =
                            (0..width).map(|i| reference.mean_se(i)).collect();
                        let ci =
                            bootstrap_ci(&emp, reference, BOOTSTRAP_RESAMPLES, 0.95, &mut boot)?;
                        Some(Comparison {
                            reference: "sampled-uniform".into(),
                            tv: tv_distance(&emp, reference)?,
                            tv_ci95: Some([ci.0, ci.1]),
                            means: compare_means(&emp, &means),
                        })
                    }
                }
            }
        };
        stats.push(StatRecord {
            stat: stat.clone(),
            empirical: emp,
            comparison,
        });
    }
    Ok(RunRecord {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        stats,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
