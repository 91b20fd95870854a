//! Data and SVG for the four simulation figures: means of N'_i against p,
//! histograms of N'_i at p ≈ 10^7, means against n, and the normalized
//! largest factor degree against the Poisson–Dirichlet maximum.

use ffuniv::models::reference::pd_max;
use ffuniv::moments::{uniform_joint_moment, CountModel};
use ffuniv::pmf::ratio_to_f64;
use ffuniv::rng::stream;
use ffuniv::stats::{ks_distance, EmpiricalDistribution};
use num_bigint::BigUint;
use serde::Serialize;
use serde_json::json;

use crate::commands::{params_hash, CommandOutput};
use crate::config::{ExperimentConfig, Model, Statistic};
use crate::error::HarnessResult;
use crate::grids::figure1_primes;
use crate::output::{sidecar, OutputFile};
use crate::simulate::{run_chunks, run_trials, Sampler, TrialPlan};
use crate::svg::{render, Mark, Panel, Series};

/// Coefficient law used by every figure.
pub const FIGURE_MU: &str = "uniform:-1,0,1";
/// The large prime of the histogram figures.
pub const LARGE_P: u64 = 10_000_079;
const N_COLORS: [&str; 3] = ["#d62728", "#1f77b4", "#8c564b"];
const PD_STREAM: u64 = 0x5044_4d41;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FigureOptions {
    pub trials: u64,
    pub seed: u64,
    #[serde(skip)]
    pub workers: usize,
}

fn figure_config(
    p: u64,
    n: usize,
    max_degree: usize,
    stat: Statistic,
    opts: &FigureOptions,
) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(p, n);
    cfg.max_degree = max_degree;
    cfg.mu = FIGURE_MU.to_string();
    cfg.model = Model::Mu;
    cfg.trials = opts.trials;
    cfg.seed = opts.seed;
    cfg.workers = opts.workers;
    cfg.stat = vec![stat];
    cfg
}

/// The histogram of `stat` for the μ-model at (p, n); the same draws as
/// `simulate` with the equivalent configuration.
pub fn simulate_stat(
    p: u64,
    n: usize,
    max_degree: usize,
    stat: Statistic,
    opts: &FigureOptions,
) -> HarnessResult<EmpiricalDistribution> {
    let cfg = figure_config(p, n, max_degree, stat, opts);
    let sampler = Sampler::from_config(&cfg)?;
    let plan = TrialPlan::new(sampler.ctx(), &cfg.stat, max_degree)?;
    let mut h = run_trials(
        &sampler,
        &plan,
        cfg.seed,
        cfg.sampling_key(),
        cfg.trials,
        cfg.workers,
    )
    .map_err(|e| e.context(format!("p={p} n={n}")))?;
    Ok(h.remove(0))
}

/// Exact uniform-model mean of N'_i (x excluded).
pub fn uniform_mean(q: u64, n: usize, i: usize) -> HarnessResult<f64> {
    let mut h = vec![0u32; i];
    h[i - 1] = 1;
    Ok(ratio_to_f64(&uniform_joint_moment(
        &BigUint::from(q),
        n,
        &h,
        CountModel::WithMultiplicity,
        true,
    )?))
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanRow {
    pub p: u64,
    pub n: usize,
    pub i: usize,
    pub mean: f64,
    pub se: f64,
    pub uniform_mean: f64,
    /// (mean − uniform_mean)/se
    pub z: f64,
}

/// Empirical means of N'_1..N'_N for every (p, n) against exact uniform means.
pub fn mean_rows(
    primes: &[u64],
    ns: &[usize],
    max_degree: usize,
    opts: &FigureOptions,
) -> HarnessResult<Vec<MeanRow>> {
    let mut rows = Vec::new();
    for &p in primes {
        for &n in ns {
            let h = simulate_stat(p, n, max_degree, Statistic::WithMult, opts)?;
            for i in 1..=max_degree {
                let (mean, se) = h.mean_se(i - 1);
                let um = uniform_mean(p, n, i)?;
                let z = if se > 0.0 {
                    (mean - um) / se
                } else if mean == um {
                    0.0
                } else {
                    f64::INFINITY
                };
                rows.push(MeanRow {
                    p,
                    n,
                    i,
                    mean,
                    se,
                    uniform_mean: um,
                    z,
                });
            }
        }
    }
    Ok(rows)
}

fn rows_csv(rows: &[MeanRow]) -> String {
    let mut s = String::from("p,n,i,mean,se,uniform_mean,z\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.3}\n",
            r.p, r.n, r.i, r.mean, r.se, r.uniform_mean, r.z
        ));
    }
    s
}

fn one_over_i(i: usize, x0: f64, x1: f64) -> Series {
    Series::new(
        "1/i",
        "black",
        Mark::Line,
        vec![(x0, 1.0 / i as f64), (x1, 1.0 / i as f64)],
    )
}

fn finish(
    name: &str,
    title: &str,
    hash: &str,
    csv: String,
    extra: serde_json::Value,
    panels: &[Panel],
    cols: usize,
) -> CommandOutput {
    let data = OutputFile::data(format!("{name}.csv"), csv.into_bytes());
    let side = sidecar(&data, hash, extra);
    let svg = OutputFile::data(
        format!("{name}.svg"),
        render(title, hash, panels, cols).into_bytes(),
    );
    CommandOutput {
        config_hash: hash.to_string(),
        files: vec![data, side, svg],
        failure: None,
    }
}

/// Means of N'_i, i = 1, 2, 3, against p for n = 5, 10, 20.
pub fn figure1(opts: &FigureOptions, small: usize, large: usize) -> HarnessResult<CommandOutput> {
    let ns = [5usize, 10, 20];
    let (small_p, large_p) = figure1_primes(opts.seed, small, large);
    let primes: Vec<u64> = small_p.iter().chain(&large_p).copied().collect();
    let rows = mean_rows(&primes, &ns, 3, opts)?;
    let hash = params_hash(
        &json!({ "figure": 1, "opts": opts, "primes": primes, "n": ns, "mu": FIGURE_MU }),
    );
    let mut panels = Vec::new();
    for (group, ps) in [("10 ≤ p ≤ 1000", &small_p), ("p ≈ 10^7", &large_p)] {
        for i in 1..=3 {
            let (x0, x1) = (
                *ps.first().unwrap_or(&0) as f64,
                *ps.last().unwrap_or(&1) as f64,
            );
            let mut series: Vec<Series> = ns
                .iter()
                .zip(N_COLORS)
                .map(|(&n, c)| {
                    let pts = rows
                        .iter()
                        .filter(|r| r.n == n && r.i == i && ps.contains(&r.p))
                        .map(|r| (r.p as f64, r.mean))
                        .collect();
                    Series::new(format!("n={n}"), c, Mark::Points, pts)
                })
                .collect();
            series.push(one_over_i(i, x0, x1));
            panels.push(Panel {
                title: format!("i={i}, {group}"),
                x_label: "p".into(),
                y_label: format!("mean N'_{i}"),
                log_x: false,
                series,
            });
        }
    }
    Ok(finish(
        "fig1",
        "Empirical means of N'_i against p",
        &hash,
        rows_csv(&rows),
        json!({ "trials": opts.trials, "rows": rows.len() }),
        &panels,
        3,
    ))
}

fn poisson_pmf(lambda: f64, k: u32) -> f64 {
    let mut v = (-lambda).exp();
    for j in 1..=k {
        v *= lambda / j as f64;
    }
    v
}

/// Histograms of N'_i at p = 10,000,079 for n = 20, 50 and i = 1, 2, 5,
/// with Poisson(1/i) expected counts.
pub fn figure2(opts: &FigureOptions) -> HarnessResult<CommandOutput> {
    let ns = [20usize, 50];
    let is = [1usize, 2, 5];
    let mut csv = String::from("n,i,value,count,poisson_expected\n");
    let mut panels = Vec::new();
    for n in ns {
        let h = simulate_stat(LARGE_P, n, 5, Statistic::WithMult, opts)?;
        for i in is {
            let marg = h.marginal(i - 1);
            let maxv = marg.counts().keys().map(|k| k[0]).max().unwrap_or(0).max(3);
            let mut obs = Vec::new();
            let mut exp = Vec::new();
            for v in 0..=maxv {
                let c = marg.counts().get(&vec![v]).copied().unwrap_or(0);
                let e = opts.trials as f64 * poisson_pmf(1.0 / i as f64, v);
                csv.push_str(&format!("{n},{i},{v},{c},{e:.3}\n"));
                obs.push((v as f64, c as f64));
                exp.push((v as f64, e));
            }
            panels.push(Panel {
                title: format!("n={n}, i={i}"),
                x_label: format!("N'_{i}"),
                y_label: "count".into(),
                log_x: false,
                series: vec![
                    Series::new("simulated", "#1f77b4", Mark::Bars, obs),
                    Series::new("Poisson(1/i)", "#d62728", Mark::Bars, exp),
                ],
            });
        }
    }
    let hash = params_hash(
        &json!({ "figure": 2, "opts": opts, "p": LARGE_P, "n": ns, "i": is, "mu": FIGURE_MU }),
    );
    Ok(finish(
        "fig2",
        "Histograms of N'_i at p = 10,000,079",
        &hash,
        csv,
        json!({ "trials": opts.trials }),
        &panels,
        3,
    ))
}

/// Means of N'_i, i = 1, 2, 5, against n = 5, 10, ..., n_max for p = 101, 10007.
pub fn figure3(opts: &FigureOptions, n_max: usize) -> HarnessResult<CommandOutput> {
    let primes = [101u64, 10007];
    let ns: Vec<usize> = (5..=n_max).step_by(5).collect();
    let rows = mean_rows(&primes, &ns, 5, opts)?;
    let rows: Vec<MeanRow> = rows
        .into_iter()
        .filter(|r| matches!(r.i, 1 | 2 | 5))
        .collect();
    let x1 = *ns.last().unwrap_or(&5) as f64;
    let panels: Vec<Panel> = [1usize, 2, 5]
        .iter()
        .map(|&i| {
            let mut series: Vec<Series> = primes
                .iter()
                .zip(N_COLORS)
                .map(|(&p, c)| {
                    let pts = rows
                        .iter()
                        .filter(|r| r.p == p && r.i == i)
                        .map(|r| (r.n as f64, r.mean))
                        .collect();
                    Series::new(format!("p={p}"), c, Mark::Points, pts)
                })
                .collect();
            series.push(one_over_i(i, 5.0, x1));
            Panel {
                title: format!("i={i}"),
                x_label: "n".into(),
                y_label: format!("mean N'_{i}"),
                log_x: false,
                series,
            }
        })
        .collect();
    let hash = params_hash(
        &json!({ "figure": 3, "opts": opts, "primes": primes, "n": ns, "mu": FIGURE_MU }),
    );
    Ok(finish(
        "fig3",
        "Empirical means of N'_i against n",
        &hash,
        rows_csv(&rows),
        json!({ "trials": opts.trials, "rows": rows.len() }),
        &panels,
        3,
    ))
}

/// Normalized largest factor degrees L/deg f of the μ-model at (p, n).
pub fn largest_normalized(p: u64, n: usize, opts: &FigureOptions) -> HarnessResult<Vec<f64>> {
    let h = simulate_stat(p, n, 1, Statistic::Largest, opts)?;
    let mut out = Vec::with_capacity(h.trials() as usize);
    for (k, &c) in h.counts() {
        let v = if k[1] == 0 {
            0.0
        } else {
            k[0] as f64 / k[1] as f64
        };
        out.extend(std::iter::repeat_n(v, c as usize));
    }
    Ok(out)
}

/// `count` samples of the Poisson–Dirichlet maximum.
pub fn pd_max_samples(count: u64, opts: &FigureOptions) -> HarnessResult<Vec<f64>> {
    let h = run_chunks(
        count,
        opts.workers,
        |t| {
            let v = pd_max(&mut stream(opts.seed, PD_STREAM, t));
            // Keyed at 2^-32 resolution so the histogram merge stays exact.
            Ok(vec![
                vec![(v * 4_294_967_296.0).min(u32::MAX as f64) as u32],
            ])
        },
        1,
    )?;
    let mut out = Vec::with_capacity(count as usize);
    for (k, &c) in h[0].counts() {
        out.extend(std::iter::repeat_n(
            k[0] as f64 / 4_294_967_296.0,
            c as usize,
        ));
    }
    Ok(out)
}

const BINS: usize = 20;

fn histogram(values: &[f64]) -> Vec<u64> {
    let mut h = vec![0u64; BINS];
    for &v in values {
        h[((v * BINS as f64) as usize).min(BINS - 1)] += 1;
    }
    h
}

#[derive(Clone, Debug, Serialize)]
pub struct LargestReport {
    pub p: u64,
    pub n: usize,
    pub trials: u64,
    pub ks_vs_pd_max: f64,
}

/// Largest normalized factor degree at p = 11 and p = 10,000,079 against the
/// Poisson–Dirichlet maximum.
pub fn figure4(
    opts: &FigureOptions,
    n: usize,
) -> HarnessResult<(CommandOutput, Vec<LargestReport>)> {
    let pd = pd_max_samples(opts.trials, opts)?;
    let mut csv = String::from("source,bin_lo,bin_hi,count\n");
    let mut panels = Vec::new();
    let mut reports = Vec::new();
    let mut sources: Vec<(String, Vec<f64>)> = Vec::new();
    for p in [11u64, LARGE_P] {
        let v = largest_normalized(p, n, opts)?;
        reports.push(LargestReport {
            p,
            n,
            trials: opts.trials,
            ks_vs_pd_max: ks_distance(&v, &pd)?,
        });
        sources.push((format!("p={p}"), v));
    }
    sources.push(("poisson-dirichlet".into(), pd));
    for (name, values) in &sources {
        let h = histogram(values);
        let mut pts = Vec::new();
        for (b, &c) in h.iter().enumerate() {
            let lo = b as f64 / BINS as f64;
            csv.push_str(&format!(
                "{name},{lo:.2},{:.2},{c}\n",
                lo + 1.0 / BINS as f64
            ));
            pts.push((b as f64, c as f64));
        }
        panels.push(Panel {
            title: name.clone(),
            x_label: format!("bin of largest degree / deg f (width 1/{BINS})"),
            y_label: "count".into(),
            log_x: false,
            series: vec![Series::new(name.clone(), "#1f77b4", Mark::Bars, pts)],
        });
    }
    let hash = params_hash(&json!({ "figure": 4, "opts": opts, "n": n, "mu": FIGURE_MU }));
    let out = finish(
        "fig4",
        "Normalized largest factor degree against the Poisson-Dirichlet maximum",
        &hash,
        csv,
        json!({ "trials": opts.trials, "ks": reports }),
        &panels,
        3,
    );
    Ok((out, reports))
}
