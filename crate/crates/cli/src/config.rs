//! Run configuration: command-line flags layered over an optional TOML file.
//!
//! Precedence is flag, then the subcommand's table, then `[common]`, then
//! the built-in default.

use std::path::{Path, PathBuf};

use hypershift::potentials::{make_potential, PotentialSpec, RadialPotential};
use hypershift::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_POTENTIAL: &str = "gaussian_rho:A=1,sigma=1";

/// Keys allowed both in `[common]` and in subcommand tables.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Section {
    pub dim: Option<u32>,
    pub potential: Option<String>,
    pub lambda: Option<f64>,
    pub lambda_list: Option<Vec<f64>>,
    pub kmax: Option<u64>,
    pub tol: Option<f64>,
    pub p_list: Option<Vec<u32>>,
    pub reg: Option<f64>,
    pub out: Option<PathBuf>,
    pub r_max: Option<f64>,
    pub r_step: Option<f64>,
    pub r_grid: Option<String>,
    pub rho_max: Option<f64>,
    pub knot_spacing: Option<f64>,
    pub profile: Option<PathBuf>,
    pub tail_exponent: Option<f64>,
    pub multiplicity: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub common: Section,
    #[serde(default)]
    pub xray: Section,
    #[serde(default)]
    pub shifts: Section,
    #[serde(default)]
    pub trace: Section,
    #[serde(default)]
    pub invert: Section,
    #[serde(default)]
    pub freespec: Section,
    #[serde(default)]
    pub selftest: Section,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn section(&self, cmd: &str) -> &Section {
        match cmd {
            "xray" => &self.xray,
            "shifts" => &self.shifts,
            "trace" => &self.trace,
            "invert" => &self.invert,
            "freespec" => &self.freespec,
            _ => &self.selftest,
        }
    }
}

/// Fully resolved settings. Serialized (without `out`) to form the
/// configuration hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dim: u32,
    /// None means the default gaussian_rho:A=1,sigma=1
    pub potential: Option<String>,
    pub lambda_list: Vec<f64>,
    pub kmax: Option<u64>,
    pub tol: f64,
    pub p_list: Vec<u32>,
    pub reg: Option<f64>,
    #[serde(skip)]
    pub out: PathBuf,
    pub r_max: f64,
    pub r_step: f64,
    pub r_grid: String,
    pub rho_max: f64,
    pub knot_spacing: f64,
    pub profile: Option<PathBuf>,
    pub tail_exponent: Option<f64>,
    pub multiplicity: String,
}

fn pick<T: Clone>(flag: &Option<T>, sec: &Option<T>, common: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| sec.clone()).or_else(|| common.clone())
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Section, file: Option<&ConfigFile>) -> Result<Self> {
        let empty = ConfigFile::default();
        let file = file.unwrap_or(&empty);
        let sec = file.section(command);
        let com = &file.common;
        macro_rules! get {
            ($f:ident) => {
                pick(&flags.$f, &sec.$f, &com.$f)
            };
        }
        let default_tol = match command {
            "trace" => 1e-6,
            "xray" | "invert" => 1e-12,
            _ => 1e-10,
        };
        let lambda_list = match (get!(lambda_list), get!(lambda)) {
            (Some(l), _) => l,
            (None, Some(l)) => vec![l],
            (None, None) => match command {
                "trace" => vec![50.0, 100.0, 200.0],
                "freespec" => vec![1.0, 10.0, 100.0],
                _ => vec![50.0],
            },
        };
        let cfg = RunConfig {
            command: command.to_string(),
            dim: get!(dim).unwrap_or(1),
            potential: get!(potential),
            lambda_list,
            kmax: get!(kmax),
            tol: get!(tol).unwrap_or(default_tol),
            p_list: get!(p_list).unwrap_or_else(|| vec![1]),
            reg: get!(reg),
            out: get!(out).unwrap_or_else(|| PathBuf::from(".")),
            r_max: get!(r_max).unwrap_or(200.0),
            r_step: get!(r_step).unwrap_or(0.025),
            r_grid: get!(r_grid).unwrap_or_else(|| "asinh".into()),
            rho_max: get!(rho_max).unwrap_or(6.0),
            knot_spacing: get!(knot_spacing).unwrap_or(0.1),
            profile: get!(profile),
            tail_exponent: get!(tail_exponent),
            multiplicity: get!(multiplicity).unwrap_or_else(|| "harmonic".into()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.lambda_list.is_empty() || self.lambda_list.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return bad("lambda values must be positive".into());
        }
        if self.lambda_list.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("lambda list must be strictly increasing".into());
        }
        if self.p_list.iter().any(|p| *p < 1) {
            return bad("p values must be at least 1".into());
        }
        if let Some(r) = self.reg {
            if !(r >= 0.0) {
                return bad(format!("reg must be nonnegative, got {r}"));
            }
        }
        for (name, v) in [("r_max", self.r_max), ("r_step", self.r_step), ("rho_max", self.rho_max), ("knot_spacing", self.knot_spacing)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !["asinh", "uniform"].contains(&self.r_grid.as_str()) {
            return bad(format!("r_grid must be 'asinh' or 'uniform', got '{}'", self.r_grid));
        }
        if !["harmonic", "binomial"].contains(&self.multiplicity.as_str()) {
            return bad(format!("multiplicity must be 'harmonic' or 'binomial', got '{}'", self.multiplicity));
        }
        Ok(())
    }

    /// `family:key=value,...` or `csv:PATH` (columns rho,value).
    pub fn potential(&self) -> Result<RadialPotential> {
        let text = self.potential.as_deref().unwrap_or(DEFAULT_POTENTIAL);
        let spec = match text.strip_prefix("csv:") {
            Some(path) => {
                let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
                PotentialSpec::from_csv(f, self.tail_exponent)?
            }
            None => PotentialSpec::parse(text)?,
        };
        make_potential(&spec)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_list[0]
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    pub fn generated_by(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "hypershift",
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.hash(),
            "config": self,
        })
    }
}
