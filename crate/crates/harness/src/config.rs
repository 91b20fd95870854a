//! Experiment configuration: a TOML file with command-line overrides, and the
//! hash that tags every output.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use ffuniv::field::FieldCtx;
use ffuniv::models::CoefficientDistribution;
use ffuniv::Polynomial;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, HarnessResult};

/// How each trial's polynomial is drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    /// n+1 coefficients i.i.d. from μ, conditioned on f ≠ 0.
    #[default]
    Mu,
    /// Uniform monic polynomial of degree n.
    UniformMonic,
}

impl FromStr for Model {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s {
            "mu" => Ok(Model::Mu),
            "uniform-monic" => Ok(Model::UniformMonic),
            _ => Err(HarnessError::invalid(format!(
                "unknown model '{s}' (mu | uniform-monic)"
            ))),
        }
    }
}

/// What the simulated distribution is compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Exact uniform law when affordable, sampled uniform-monic otherwise.
    #[default]
    Auto,
    Exact,
    Sampled,
    None,
}

/// A recorded statistic. Keys of the resulting CSV:
/// `distinct` (N_1..N_N), `with-mult` (N'_1..N'_N), `largest`
/// (largest factor degree, deg f), `total` (factor count with multiplicity),
/// `mult:c0,c1,...` (multiplicity of the listed monic irreducible φ).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Statistic {
    Distinct,
    WithMult,
    Largest,
    Total,
    Multiplicity(String),
}

impl Statistic {
    /// File-name stem for the outputs of this statistic.
    pub fn slug(&self) -> String {
        match self {
            Statistic::Multiplicity(c) => {
                let body: String = c
                    .chars()
                    .map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' })
                    .collect();
                format!("mult_{body}")
            }
            other => other.to_string(),
        }
    }

    pub fn needs_full_factorization(&self) -> bool {
        matches!(self, Statistic::Largest | Statistic::Total)
    }

    /// The polynomial φ of a `mult:` statistic.
    pub fn phi(&self, ctx: &FieldCtx) -> HarnessResult<Option<Polynomial>> {
        let Statistic::Multiplicity(text) = self else {
            return Ok(None);
        };
        let coeffs = text
            .split(',')
            .map(|s| ctx.parse_element(s.trim()))
            .collect::<ffuniv::Result<Vec<_>>>()?;
        let phi = Polynomial::new(ctx, coeffs)?;
        if !phi.is_monic() || phi.degree().unwrap_or(0) == 0 || !phi.is_irreducible()? {
            return Err(HarnessError::invalid(format!(
                "mult:{text} is not monic irreducible"
            )));
        }
        Ok(Some(phi))
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Distinct => write!(f, "distinct"),
            Statistic::WithMult => write!(f, "with-mult"),
            Statistic::Largest => write!(f, "largest"),
            Statistic::Total => write!(f, "total"),
            Statistic::Multiplicity(c) => write!(f, "mult:{c}"),
        }
    }
}

impl FromStr for Statistic {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        match s.trim() {
            "distinct" => Ok(Statistic::Distinct),
            "with-mult" => Ok(Statistic::WithMult),
            "largest" => Ok(Statistic::Largest),
            "total" => Ok(Statistic::Total),
            other => match other.strip_prefix("mult:") {
                Some(c) if !c.is_empty() => Ok(Statistic::Multiplicity(c.to_string())),
                _ => Err(HarnessError::invalid(format!(
                    "unknown statistic '{other}' (distinct | with-mult | largest | total | mult:c0,c1,...)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for Statistic {
    type Error = HarnessError;

    fn try_from(s: String) -> HarnessResult<Self> {
        s.parse()
    }
}

impl From<Statistic> for String {
    fn from(s: Statistic) -> String {
        s.to_string()
    }
}

fn one() -> usize {
    1
}

fn default_max_degree() -> usize {
    3
}

fn default_mu() -> String {
    "uniform:-1,0,1".to_string()
}

fn default_trials() -> u64 {
    10_000
}

fn default_stats() -> Vec<Statistic> {
    vec![Statistic::WithMult]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: u64,
    #[serde(default = "one")]
    pub e: usize,
    /// Defining polynomial of F_{p^e}, coefficients lowest first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u64>>,
    pub n: usize,
    #[serde(rename = "N", default = "default_max_degree")]
    pub max_degree: usize,
    #[serde(default = "default_mu")]
    pub mu: String,
    #[serde(default)]
    pub model: Model,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_stats")]
    pub stat: Vec<Statistic>,
    #[serde(default)]
    pub reference: Reference,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

/// Flags that override the configuration file.
#[derive(Clone, Debug, Default, Args)]
pub struct ConfigOverrides {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub e: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest tracked factor degree.
    #[arg(long = "N")]
    pub max_degree: Option<usize>,
    /// Coefficient law, e.g. `uniform:-1,0,1`, `0:1/3,1:2/3`, `uniform`.
    #[arg(long)]
    pub mu: Option<String>,
    /// mu | uniform-monic
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated statistics: distinct, with-mult, largest, total, mult:c0;c1;...
    #[arg(long)]
    pub stat: Option<String>,
    /// auto | exact | sampled | none
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(p: u64, n: usize) -> Self {
        ExperimentConfig {
            p,
            e: 1,
            modulus: None,
            n,
            max_degree: default_max_degree(),
            mu: default_mu(),
            model: Model::Mu,
            trials: default_trials(),
            seed: 0,
            workers: 1,
            stat: default_stats(),
            reference: Reference::Auto,
            out: default_out(),
        }
    }

    pub fn from_toml(text: &str) -> HarnessResult<Self> {
        toml::from_str(text).map_err(|e| HarnessError::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> HarnessResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Starts from `base` (or a file), applies the flags, and validates.
    pub fn resolve(file: Option<&Path>, o: &ConfigOverrides) -> HarnessResult<Self> {
        let mut cfg = match file {
            Some(path) => Self::load(path)?,
            None => {
                let p =
                    o.p.ok_or_else(|| HarnessError::invalid("--p is required without --config"))?;
                let n =
                    o.n.ok_or_else(|| HarnessError::invalid("--n is required without --config"))?;
                Self::new(p, n)
            }
        };
        cfg.apply(o)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) -> HarnessResult<()> {
        if let Some(p) = o.p {
            self.p = p;
        }
        if let Some(e) = o.e {
            self.e = e;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
        if let Some(m) = o.max_degree {
            self.max_degree = m;
        }
        if let Some(mu) = &o.mu {
            self.mu = mu.clone();
        }
        if let Some(model) = o.model {
            self.model = model;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(s) = &o.stat {
            self.stat = s
                .split(',')
                .map(|x| x.replace(';', ",").parse())
                .collect::<HarnessResult<_>>()?;
        }
        if let Some(r) = &o.reference {
            self.reference =
                serde_json::from_value(serde_json::Value::String(r.clone())).map_err(|_| {
                    HarnessError::invalid(format!(
                        "unknown reference '{r}' (auto | exact | sampled | none)"
                    ))
                })?;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        Ok(())
    }

    pub fn validate(&self) -> HarnessResult<()> {
        if self.trials == 0 {
            return Err(HarnessError::invalid("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(HarnessError::invalid("workers must be at least 1"));
        }
        if self.max_degree == 0 {
            return Err(HarnessError::invalid("N must be at least 1"));
        }
        if self.n == 0 {
            return Err(HarnessError::invalid("n must be at least 1"));
        }
        if self.stat.is_empty() {
            return Err(HarnessError::invalid("at least one statistic is required"));
        }
        let ctx = self.field()?;
        self.law(&ctx)?;
        for s in &self.stat {
            s.phi(&ctx)?;
        }
        Ok(())
    }

    pub fn field(&self) -> HarnessResult<FieldCtx> {
        Ok(FieldCtx::new(self.p, self.e, self.modulus.as_deref(), 0)?)
    }

    pub fn law(&self, ctx: &FieldCtx) -> HarnessResult<CoefficientDistribution> {
        Ok(CoefficientDistribution::parse(ctx, &self.mu)?)
    }

    /// SHA-256 over the fields that determine the data. Worker count and
    /// output location are excluded, so the hash (and every file carrying
    /// it) is the same however the run is scheduled.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("config is an object");
        obj.remove("workers");
        obj.remove("out");
        hex(&Sha256::digest(v.to_string().as_bytes()))
    }

    /// Stream key for the sampled polynomials: depends only on how they are
    /// drawn, not on which statistics are recorded.
    pub fn sampling_key(&self) -> u64 {
        let text = format!(
            "{}|{}|{:?}|{}|{}|{:?}",
            self.p, self.e, self.modulus, self.n, self.mu, self.model
        );
        let d = Sha256::digest(text.as_bytes());
        u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}
