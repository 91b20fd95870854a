use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ffuniv::moments::CountModel;
use ffuniv_harness::commands::{
    cmd_bounds_grid, cmd_bounds_halasz, cmd_bounds_mahler, cmd_bounds_pointwise,
    cmd_bounds_s_sequence, cmd_bounds_union, cmd_classify, cmd_exact, cmd_moments, ClassifyParams,
    CommandOutput, HalaszParams, MahlerParams, MomentParams, PointwiseParams, SSequenceParams,
    UnionParams,
};
use ffuniv_harness::config::ConfigOverrides;
use ffuniv_harness::figures::{figure1, figure2, figure3, figure4, FigureOptions};
use ffuniv_harness::output::{emit, simulation_outputs, OutputFile};
use ffuniv_harness::simulate::run_simulation;
use ffuniv_harness::{ExperimentConfig, HarnessError, HarnessResult};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ffuniv",
    version,
    about = "Factor statistics of random polynomials over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Recompute and compare with the files already in the output directory.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Recompute and compare with the files already in the output directory.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Distinct,
    WithMult,
}

impl From<ModelArg> for CountModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Distinct => CountModel::Distinct,
            ModelArg::WithMult => CountModel::WithMultiplicity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo factor statistics compared with the uniform model.
    Simulate(ConfigArgs),
    /// Exact law of the factor counts by enumeration, next to the uniform law.
    Exact(ConfigArgs),
    /// Exact joint moment of the uniform-model factor counts.
    Moments {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        /// Exponents h_1,h_2,...
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<u32>,
        #[arg(long, value_enum, default_value = "with-mult")]
        model: ModelArg,
        /// Count the factor x in degree 1.
        #[arg(long)]
        include_x: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Bound checks and diagnostics.
    Bounds {
        #[command(subcommand)]
        kind: BoundKind,
    },
    /// High/low multiplicative-order classification.
    Classify {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        e: usize,
        #[arg(long = "H", default_value_t = 1)]
        h: u32,
        #[arg(long = "K", default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        c_order: f64,
        /// Elements to classify (default: every nonzero element).
        #[arg(long, value_delimiter = ';')]
        elements: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Data and SVG for the simulation figures.
    Figures {
        #[arg(value_enum)]
        which: Figure,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Primes drawn from [10, 1000] for figure 1.
        #[arg(long, default_value_t = 20)]
        small_primes: usize,
        /// Primes above 10^7 for figure 1.
        #[arg(long, default_value_t = 3)]
        large_primes: usize,
        /// Largest n of figure 3.
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        /// Degree of figure 4.
        #[arg(long, default_value_t = 500)]
        fig4_n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    All,
}

#[derive(Subcommand)]
enum BoundKind {
    /// Fourier bound and divisibility chain over the fixed grid.
    Grid {
        #[command(flatten)]
        out: OutArgs,
    },
    /// Pointwise moment-matching bound between the μ-model and uniform laws.
    Pointwise {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long = "N", default_value_t = 2)]
        max_degree: usize,
        #[arg(long = "H", default_value_t = 4)]
        h: u32,
        #[arg(long, default_value = "uniform")]
        mu: String,
        #[arg(long, value_enum, default_value = "with-mult")]
        model: ModelArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Union bound over low-order roots.
    Union {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        max_degree: usize,
        #[arg(long, default_value = "uniform")]
        mu: String,
        #[arg(long = "H", default_value_t = 1)]
        h: u32,
        #[arg(long = "K", default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        c_order: f64,
        #[arg(long, default_value_t = 2.0)]
        c_hal: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Smallest Halász-type constant for a divisibility event.
    Halasz {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "uniform")]
        mu: String,
        /// Roots as alpha:multiplicity, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        roots: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The centered character-phase sequence and its block sum.
    SSequence {
        #[arg(long)]
        p: u64,
        /// Roots as alpha:multiplicity, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        roots: Vec<String>,
        /// β coordinates, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<u64>,
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        len: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mahler measure, cyclotomic test and Dobrowolski floor.
    Mahler {
        /// Integer coefficients, lowest degree first.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        coeffs: Vec<i64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1.0 / 1200.0)]
        c_dob: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn parse_roots(items: &[String]) -> HarnessResult<Vec<(u64, usize)>> {
    items
        .iter()
        .map(|s| {
            let (a, m) = s.split_once(':').unwrap_or((s.as_str(), "1"));
            match (a.trim().parse(), m.trim().parse()) {
                (Ok(a), Ok(m)) => Ok((a, m)),
                _ => Err(HarnessError::invalid(format!(
                    "bad root '{s}' (expected alpha:multiplicity)"
                ))),
            }
        })
        .collect()
}

fn finish(out: &OutArgs, res: CommandOutput) -> HarnessResult<()> {
    emit(&out.out, &res.files, &res.config_hash, out.verify)?;
    report(&out.out, &res.files, &res.config_hash, out.verify);
    match res.failure {
        Some(msg) => Err(HarnessError::verification(msg)),
        None => Ok(()),
    }
}

fn report(dir: &Path, files: &[OutputFile], hash: &str, verify: bool) {
    let names: Vec<&str> = files.iter().map(|f| f.name.as_str()).collect();
    let line = json!({
        "status": if verify { "verified" } else { "written" },
        "dir": dir.display().to_string(),
        "config_hash": hash,
        "files": names,
    });
    println!("{line}");
}

fn run(cli: Cli) -> HarnessResult<()> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = ExperimentConfig::resolve(a.config.as_deref(), &a.overrides)?;
            let rec = run_simulation(&cfg)?;
            let files = simulation_outputs(&rec);
            emit(&cfg.out, &files, &rec.config_hash, a.verify)?;
            report(&cfg.out, &files, &rec.config_hash, a.verify);
            Ok(())
        }
        Command::Exact(a) => {
            let cfg = ExperimentConfig::resolve(a.config.as_deref(), &a.overrides)?;
            let res = cmd_exact(&cfg)?;
            let out = OutArgs {
                out: cfg.out.clone(),
                verify: a.verify,
            };
            finish(&out, res)
        }
        Command::Moments {
            q,
            n,
            h,
            model,
            include_x,
            out,
        } => {
            let params = MomentParams {
                q,
                n,
                h,
                model: model.into(),
                exclude_x: !include_x,
            };
            finish(&out, cmd_moments(&params)?)
        }
        Command::Bounds { kind } => match kind {
            BoundKind::Grid { out } => finish(&out, cmd_bounds_grid()?),
            BoundKind::Pointwise {
                p,
                n,
                max_degree,
                h,
                mu,
                model,
                out,
            } => {
                let params = PointwiseParams {
                    p,
                    n,
                    max_degree,
                    h,
                    mu,
                    model: model.into(),
                };
                finish(&out, cmd_bounds_pointwise(&params)?)
            }
            BoundKind::Union {
                p,
                n,
                max_degree,
                mu,
                h,
                k,
                c_order,
                c_hal,
                out,
            } => {
                let params = UnionParams {
                    p,
                    n,
                    max_degree,
                    mu,
                    h,
                    k,
                    c_order,
                    c_hal,
                };
                finish(&out, cmd_bounds_union(&params)?)
            }
            BoundKind::Halasz {
                p,
                n,
                mu,
                roots,
                out,
            } => {
                let params = HalaszParams {
                    p,
                    n,
                    mu,
                    roots: parse_roots(&roots)?,
                };
                finish(&out, cmd_bounds_halasz(&params)?)
            }
            BoundKind::SSequence {
                p,
                roots,
                beta,
                n0,
                len,
                out,
            } => {
                let params = SSequenceParams {
                    p,
                    roots: parse_roots(&roots)?,
                    beta,
                    n0,
                    len,
                };
                finish(&out, cmd_bounds_s_sequence(&params)?)
            }
            BoundKind::Mahler {
                coeffs,
                tol,
                c_dob,
                out,
            } => finish(
                &out,
                cmd_bounds_mahler(&MahlerParams { coeffs, tol, c_dob })?,
            ),
        },
        Command::Classify {
            p,
            e,
            h,
            k,
            c_order,
            elements,
            out,
        } => {
            let params = ClassifyParams {
                p,
                e,
                h,
                k,
                c_order,
                elements,
            };
            finish(&out, cmd_classify(&params)?)
        }
        Command::Figures {
            which,
            trials,
            seed,
            workers,
            small_primes,
            large_primes,
            n_max,
            fig4_n,
            out,
        } => {
            if trials == 0 || workers == 0 {
                return Err(HarnessError::invalid(
                    "trials and workers must be at least 1",
                ));
            }
            let opts = FigureOptions {
                trials,
                seed,
                workers,
            };
            let mut outputs = Vec::new();
            if matches!(which, Figure::Fig1 | Figure::All) {
                outputs.push(figure1(&opts, small_primes, large_primes)?);
            }
            if matches!(which, Figure::Fig2 | Figure::All) {
                outputs.push(figure2(&opts)?);
            }
            if matches!(which, Figure::Fig3 | Figure::All) {
                outputs.push(figure3(&opts, n_max)?);
            }
            if matches!(which, Figure::Fig4 | Figure::All) {
                outputs.push(figure4(&opts, fig4_n)?.0);
            }
            for res in outputs {
                finish(&out, res)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
