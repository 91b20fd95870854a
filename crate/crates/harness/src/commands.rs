//! The non-simulation commands: exact laws, moments, bound checks and
//! order classification. Each returns the files it would write.

use ffuniv::field::FieldCtx;
use ffuniv::models::CoefficientDistribution;
use ffuniv::moments::{moment_report, pointwise_check, uniform_joint_law, CountModel};
use ffuniv::ntheory::factor;
use ffuniv::oracles::{
    brute_joint_pmf, check_prop32, divisibility_chain, halasz_constant, s_sequence, BruteOptions,
    Conditioning,
};
use ffuniv::order::{
    classify_element, count_low_order, dobrowolski_floor, low_order_union_bound, mahler_measure,
    order_threshold, IntPolynomial, OrderClass, OrderThresholdParams,
};
use ffuniv::pmf::{ratio_string, ratio_to_f64, tv_exact, ExactPmf};
use num_bigint::{BigInt, BigUint};
use serde::Serialize;
use serde_json::json;

use crate::config::{sha256_hex, ExperimentConfig, Model, Statistic};
use crate::error::{HarnessError, HarnessResult};
use crate::grids::{oracle_cases, ORACLE_NS};
use crate::output::{sidecar, OutputFile};

/// Enumeration limit for cross-checks inside commands.
const ENUMERATION_LIMIT: u64 = 2_000_000;

/// Hash of a command's parameters, embedded in its outputs.
pub fn params_hash<T: Serialize>(params: &T) -> String {
    sha256_hex(
        serde_json::to_string(params)
            .expect("parameters serialize")
            .as_bytes(),
    )
}

/// `v1,...,vN,prob` with exact probabilities "num/den".
pub fn pmf_csv(pmf: &ExactPmf<Vec<u32>>) -> String {
    let width = pmf.support().map(|k| k.len()).max().unwrap_or(0);
    let mut out: Vec<String> = vec![(1..=width)
        .map(|i| format!("v{i}"))
        .chain(["prob".into()])
        .collect::<Vec<_>>()
        .join(",")];
    for (k, p) in pmf.iter() {
        out.push(
            k.iter()
                .map(|v| v.to_string())
                .chain([ratio_string(p)])
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    out.join("\n") + "\n"
}

/// Files: the data file, its sidecar, and a report.
pub struct CommandOutput {
    pub config_hash: String,
    pub files: Vec<OutputFile>,
    /// A failed check: the files are still produced, then exit code 4.
    pub failure: Option<String>,
}

fn count_model(cfg: &ExperimentConfig) -> CountModel {
    match cfg
        .stat
        .iter()
        .find(|s| matches!(s, Statistic::Distinct | Statistic::WithMult))
    {
        Some(Statistic::Distinct) => CountModel::Distinct,
        _ => CountModel::WithMultiplicity,
    }
}

/// Exact law of the counts for the configured model, by enumeration, next to
/// the exact uniform-model law.
pub fn cmd_exact(cfg: &ExperimentConfig) -> HarnessResult<CommandOutput> {
    cfg.validate()?;
    let ctx = cfg.field()?;
    let model = count_model(cfg);
    let (mu, conditioning) = match cfg.model {
        Model::Mu => (cfg.law(&ctx)?, Conditioning::Nonzero),
        Model::UniformMonic => (CoefficientDistribution::uniform(&ctx)?, Conditioning::Monic),
    };
    let opts = BruteOptions {
        with_multiplicity: model == CountModel::WithMultiplicity,
        exclude_x: true,
        conditioning,
    };
    let brute = brute_joint_pmf(&mu, cfg.n, cfg.max_degree, opts)?;
    let q = BigUint::from(cfg.p).pow(cfg.e as u32);
    let uniform = uniform_joint_law(&q, cfg.n, cfg.max_degree, model, true)?;
    let tv = tv_exact(&brute.pmf, &uniform);
    let hash = cfg.hash();
    let model_csv = OutputFile::data("exact_model.csv", pmf_csv(&brute.pmf).into_bytes());
    let uniform_csv = OutputFile::data("exact_uniform.csv", pmf_csv(&uniform).into_bytes());
    let report = json!({
        "count_model": model,
        "conditioning": conditioning,
        "zero_mass": ratio_string(&brute.zero_mass),
        "conditioning_mass": ratio_string(&brute.conditioning_mass),
        "tv": ratio_string(&tv),
        "tv_f64": ratio_to_f64(&tv),
    });
    let files = vec![
        sidecar(&model_csv, &hash, report.clone()),
        model_csv,
        sidecar(&uniform_csv, &hash, json!({ "count_model": model })),
        uniform_csv,
    ];
    Ok(CommandOutput {
        config_hash: hash,
        files,
        failure: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentParams {
    pub q: u64,
    pub n: usize,
    pub h: Vec<u32>,
    pub model: CountModel,
    pub exclude_x: bool,
}

/// Exact joint moment E Π N_i^{h_i} of the uniform model, with
/// an enumeration cross-check when q^n is small.
pub fn cmd_moments(params: &MomentParams) -> HarnessResult<CommandOutput> {
    if params.q < 2 {
        return Err(HarnessError::invalid("q must be a prime power"));
    }
    let rep = moment_report(
        &BigUint::from(params.q),
        params.n,
        &params.h,
        params.model,
        params.exclude_x,
    )?;
    let fac = factor(params.q);
    let enumeration =
        if fac.len() == 1 && (params.q as f64).powi(params.n as i32) <= ENUMERATION_LIMIT as f64 {
            let (p, e) = fac[0];
            let ctx = FieldCtx::new(p, e as usize, None, 0)?;
            let opts = BruteOptions {
                with_multiplicity: params.model == CountModel::WithMultiplicity,
                exclude_x: params.exclude_x,
                conditioning: Conditioning::Monic,
            };
            let law = brute_joint_pmf(
                &CoefficientDistribution::uniform(&ctx)?,
                params.n,
                params.h.len().max(1),
                opts,
            )?
            .pmf;
            Some(ratio_string(&law.moment(&params.h)))
        } else if fac.len() != 1 {
            return Err(HarnessError::invalid(format!(
                "q = {} is not a prime power",
                params.q
            )));
        } else {
            None
        };
    let agree = enumeration.as_ref().map(|e| *e == rep.moment);
    let hash = params_hash(params);
    let file = OutputFile::json(
        "moments.json",
        &json!({
            "config_hash": hash,
            "params": params,
            "report": rep,
            "enumeration": enumeration,
            "agree": agree,
        }),
    );
    Ok(CommandOutput {
        config_hash: hash,
        files: vec![file],
        failure: (agree == Some(false))
            .then(|| "series moment differs from enumeration".to_string()),
    })
}

/// Fourier bound and divisibility chain over the fixed grid.
pub fn cmd_bounds_grid() -> HarnessResult<CommandOutput> {
    let mut fourier = Vec::new();
    let mut divis = Vec::new();
    let mut failed = Vec::new();
    for case in oracle_cases()? {
        for n in ORACLE_NS {
            let rep = check_prop32(&case.mu, n, &case.space)
                .map_err(|e| HarnessError::from(e).context(&case.label))?;
            if !rep.pass {
                failed.push(format!("fourier {} n={n}", case.label));
            }
            fourier.push(json!({ "case": case.label, "report": rep }));
            let rep = divisibility_chain(&case.mu, n, &case.roots)
                .map_err(|e| HarnessError::from(e).context(&case.label))?;
            if !rep.pass {
                failed.push(format!("divisibility {} n={n}", case.label));
            }
            divis.push(json!({ "case": case.label, "report": rep }));
        }
    }
    let hash = params_hash(&json!({ "grid": "fourier-divisibility", "n": ORACLE_NS }));
    let files = vec![
        OutputFile::json(
            "fourier_bound.json",
            &json!({ "config_hash": hash, "all_pass": fourier.iter().all(|r| r["report"]["pass"] == true), "cases": fourier }),
        ),
        OutputFile::json(
            "divisibility.json",
            &json!({ "config_hash": hash, "all_pass": divis.iter().all(|r| r["report"]["pass"] == true), "cases": divis }),
        ),
    ];
    Ok(CommandOutput {
        config_hash: hash,
        files,
        failure: (!failed.is_empty()).then(|| failed.join("; ")),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PointwiseParams {
    pub p: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub max_degree: usize,
    #[serde(rename = "H")]
    pub h: u32,
    pub mu: String,
    pub model: CountModel,
}

/// Moment-matching pointwise bound between the μ-model law and the uniform law.
pub fn cmd_bounds_pointwise(params: &PointwiseParams) -> HarnessResult<CommandOutput> {
    let ctx = FieldCtx::prime(params.p)?;
    let mu = CoefficientDistribution::parse(&ctx, &params.mu)?;
    let opts = BruteOptions {
        with_multiplicity: params.model == CountModel::WithMultiplicity,
        exclude_x: true,
        conditioning: Conditioning::Nonzero,
    };
    let a = brute_joint_pmf(&mu, params.n, params.max_degree, opts)?.pmf;
    let b = uniform_joint_law(
        &BigUint::from(params.p),
        params.n,
        params.max_degree,
        params.model,
        true,
    )?;
    let rep = pointwise_check(&a, &b, params.h, true)?;
    let hash = params_hash(params);
    let failure = (!rep.pass).then(|| format!("pointwise bound fails at {:?}", rep.worst_point));
    Ok(CommandOutput {
        files: vec![OutputFile::json(
            "pointwise.json",
            &json!({ "config_hash": hash, "params": params, "report": rep }),
        )],
        config_hash: hash,
        failure,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionParams {
    pub p: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub max_degree: usize,
    pub mu: String,
    #[serde(rename = "H")]
    pub h: u32,
    #[serde(rename = "K")]
    pub k: u32,
    pub c_order: f64,
    pub c_hal: f64,
}

/// The low-order union bound, emitted as a diagnostic number.
pub fn cmd_bounds_union(params: &UnionParams) -> HarnessResult<CommandOutput> {
    let ctx = FieldCtx::prime(params.p)?;
    let mu = CoefficientDistribution::parse(&ctx, &params.mu)?;
    let thr = OrderThresholdParams::new(params.h, params.k, 1, params.p, params.c_order)?;
    let ub = low_order_union_bound(&mu, params.n, params.max_degree, &thr, params.c_hal)?;
    let hash = params_hash(params);
    Ok(CommandOutput {
        files: vec![OutputFile::json(
            "union_bound.json",
            &json!({ "config_hash": hash, "params": params, "report": ub }),
        )],
        config_hash: hash,
        failure: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HalaszParams {
    pub p: u64,
    pub n: usize,
    pub mu: String,
    /// Roots α in F_p with their multiplicities.
    pub roots: Vec<(u64, usize)>,
}

pub fn cmd_bounds_halasz(params: &HalaszParams) -> HarnessResult<CommandOutput> {
    let ctx = FieldCtx::prime(params.p)?;
    let mu = CoefficientDistribution::parse(&ctx, &params.mu)?;
    let roots: Vec<_> = params
        .roots
        .iter()
        .map(|&(a, m)| (ctx.clone(), ctx.from_u64(a), m))
        .collect();
    let rep = halasz_constant(&mu, params.n, &roots)?;
    let hash = params_hash(params);
    Ok(CommandOutput {
        files: vec![OutputFile::json(
            "halasz.json",
            &json!({ "config_hash": hash, "params": params, "report": rep }),
        )],
        config_hash: hash,
        failure: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SSequenceParams {
    pub p: u64,
    /// Roots α in F_p with multiplicities.
    pub roots: Vec<(u64, usize)>,
    /// β, one entry per (root, derivative) coordinate.
    pub beta: Vec<u64>,
    pub n0: usize,
    pub len: usize,
}

pub fn cmd_bounds_s_sequence(params: &SSequenceParams) -> HarnessResult<CommandOutput> {
    let ctx = FieldCtx::prime(params.p)?;
    let space = ffuniv::oracles::VSpace::new(
        &ctx,
        params
            .roots
            .iter()
            .map(|&(a, m)| ffuniv::oracles::Constraint::up_to(&ctx, ctx.from_u64(a), m))
            .collect(),
    )?;
    let beta: Vec<_> = params.beta.iter().map(|&b| ctx.from_u64(b)).collect();
    let rep = s_sequence(&beta, &space, params.n0, params.len)?;
    let hash = params_hash(params);
    Ok(CommandOutput {
        files: vec![OutputFile::json(
            "s_sequence.json",
            &json!({ "config_hash": hash, "params": params, "report": rep }),
        )],
        config_hash: hash,
        failure: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MahlerParams {
    /// Integer coefficients, lowest degree first.
    pub coeffs: Vec<i64>,
    pub tol: f64,
    pub c_dob: f64,
}

pub fn cmd_bounds_mahler(params: &MahlerParams) -> HarnessResult<CommandOutput> {
    let f = IntPolynomial::new(params.coeffs.iter().map(|&c| BigInt::from(c)).collect())?;
    let m = mahler_measure(&f, params.tol)?;
    let cyclo = f.is_cyclotomic_like();
    let floor = dobrowolski_floor(f.degree(), params.c_dob).ok();
    let hash = params_hash(params);
    Ok(CommandOutput {
        files: vec![OutputFile::json(
            "mahler.json",
            &json!({
                "config_hash": hash,
                "params": params,
                "measure": m,
                "cyclotomic_like": cyclo,
                "dobrowolski_floor": floor,
                "above_floor": floor.map(|fl| m.value >= fl),
            }),
        )],
        config_hash: hash,
        failure: (!m.within_l2_bound)
            .then(|| "Mahler measure above the coefficient 2-norm".to_string()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyParams {
    pub p: u64,
    pub e: usize,
    #[serde(rename = "H")]
    pub h: u32,
    #[serde(rename = "K")]
    pub k: u32,
    pub c_order: f64,
    /// Elements to classify; every nonzero element when empty.
    pub elements: Vec<String>,
}

/// Largest field whose elements are all classified when none are listed.
const CLASSIFY_ALL_LIMIT: u64 = 1_000_000;

/// CSV `element,order,threshold,class` plus the low-order count.
pub fn cmd_classify(params: &ClassifyParams) -> HarnessResult<CommandOutput> {
    let ctx = FieldCtx::new(params.p, params.e, None, 0)?;
    let thr = OrderThresholdParams::new(
        params.h,
        params.k,
        params.e as u32,
        params.p,
        params.c_order,
    )?;
    let m = order_threshold(&thr);
    let elements: Vec<_> = if params.elements.is_empty() {
        let size = ctx
            .size()
            .ok_or_else(|| HarnessError::invalid("field too large"))?;
        if size > CLASSIFY_ALL_LIMIT as u128 {
            return Err(ffuniv::Error::ResourceCap(format!(
                "{size} elements; list elements explicitly"
            ))
            .into());
        }
        ctx.elements().filter(|a| !a.is_zero()).collect()
    } else {
        params
            .elements
            .iter()
            .map(|s| ctx.parse_element(s))
            .collect::<ffuniv::Result<_>>()?
    };
    let mut csv = String::from("element,order,threshold,class\n");
    let mut low = 0u64;
    for a in &elements {
        let c = classify_element(&ctx, a, &thr)?;
        if c.class == OrderClass::Low {
            low += 1;
        }
        let class = if c.class == OrderClass::Low {
            "low"
        } else {
            "high"
        };
        csv.push_str(&format!(
            "{},{},{:.6},{class}\n",
            c.element, c.order, c.threshold
        ));
    }
    // Orders strictly below m.
    let below = if m <= 1.0 {
        0
    } else {
        (m.ceil() as u64).saturating_sub(1)
    };
    let count = if below == 0 {
        0
    } else {
        count_low_order(&ctx, below)?
    };
    let hash = params_hash(params);
    let data = OutputFile::data("classify.csv", csv.into_bytes());
    let side = sidecar(
        &data,
        &hash,
        json!({
            "threshold": m,
            "classified": elements.len(),
            "low_in_list": low,
            "low_order_count_in_field": count.to_string(),
        }),
    );
    Ok(CommandOutput {
        config_hash: hash,
        files: vec![data, side],
        failure: None,
    })
}
