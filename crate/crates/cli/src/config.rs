//! TOML run configuration with `[problem]`, `[data]`, `[study]` and `[output]`
//! sections.
//!
//! Sources are layered, later ones winning: the config file, then
//! `LOWREG_<SECTION>_<KEY>` environment variables, then `--set section.key=value`,
//! then the dedicated command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};

use lowreg::harness::{DataSpec, ProblemSpec, ReferenceMode, StudySpec};
use lowreg::{Method, Nonlinearity};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "LOWREG_";
const SECTIONS: [&str; 4] = ["problem", "data", "study", "output"];

/// Usage or configuration error (exit code 1).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub nonlinearity: String,
    pub d: usize,
    pub n_x: usize,
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    pub dealias: bool,
}

impl Default for ProblemSection {
    fn default() -> Self {
        let p = ProblemSpec::default();
        Self { nonlinearity: p.nonlinearity, d: p.dim, n_x: p.n_x, rho: p.rho, a: p.a, b: p.b, dealias: p.dealias }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Rough,
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub kind: DataKind,
    pub theta: f64,
    pub seed: u64,
    /// Seeds averaged in studies with rough data.
    pub ensemble: usize,
}

impl Default for DataSection {
    fn default() -> Self {
        Self { kind: DataKind::Rough, theta: 2.0, seed: 1, ensemble: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    /// Final time; 1 for `converge` and `spatial`, 5 for `efficiency` when unset.
    #[serde(rename = "T", alias = "t_end")]
    pub t_end: Option<f64>,
    pub methods: Vec<Method>,
    pub k_min: u32,
    pub k_max: u32,
    /// Inclusive `k` range for the slope fit; drops the two coarsest `k` when unset.
    pub fit_window: Option<[u32; 2]>,
    pub reference: ReferenceMode,
    /// Reference stepsize; `2^{−(k_max+6)}` when unset.
    pub h_ref: Option<f64>,
    /// `run`: method and stepsize.
    pub method: Method,
    pub h: Option<f64>,
    /// `run`: number of steps, overriding `T`.
    pub steps: Option<usize>,
    pub n_x_list: Vec<usize>,
    /// Spatial reference resolution; 4× the largest `n_x_list` entry when unset.
    pub n_x_ref: Option<usize>,
    pub target_err: f64,
    /// `run`: report the initial and final energy and their relative drift.
    pub energy: bool,
}

impl Default for StudySection {
    fn default() -> Self {
        let s = StudySpec::default();
        Self {
            t_end: None,
            methods: s.methods,
            k_min: s.k_min,
            k_max: s.k_max,
            fit_window: None,
            reference: s.reference,
            h_ref: None,
            method: Method::Lri3,
            h: None,
            steps: None,
            n_x_list: s.spatial_n_x,
            n_x_ref: None,
            target_err: s.target_err,
            energy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub threads: Option<usize>,
    pub quiet: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("lowreg-out"), threads: None, quiet: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub data: DataSection,
    pub study: StudySection,
    pub output: OutputSection,
}

/// Command-line values that take precedence over every other source.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Converge,
    Spatial,
    Efficiency,
}

/// Parses a scalar or array as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_key(table: &mut toml::Table, section: &str, key: &str, value: toml::Value, origin: &str) -> Result<(), ConfigError> {
    if !SECTIONS.contains(&section) {
        return Err(bad(format!("{origin}: unknown section `{section}` (expected problem, data, study or output)")));
    }
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(bad(format!("{origin}: `{section}` is not a section"))),
    }
}

/// `LOWREG_STUDY_K_MAX=7` sets `study.k_max`. The final-time key is `T`.
fn env_overrides(table: &mut toml::Table, vars: impl Iterator<Item = (String, String)>) -> Result<(), ConfigError> {
    for (name, value) in vars {
        let Some(rest) = name.strip_prefix(ENV_PREFIX) else { continue };
        let Some((section, key)) = rest.split_once('_') else { continue };
        let section = section.to_ascii_lowercase();
        if !SECTIONS.contains(&section.as_str()) {
            continue;
        }
        let key = if key == "T" { key.to_string() } else { key.to_ascii_lowercase() };
        set_key(table, &section, &key, parse_value(&value), &name)?;
    }
    Ok(())
}

fn set_overrides(table: &mut toml::Table, sets: &[String]) -> Result<(), ConfigError> {
    for item in sets {
        let (path, value) =
            item.split_once('=').ok_or_else(|| bad(format!("--set `{item}`: expected section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| bad(format!("--set `{item}`: key must be written section.key")))?;
        set_key(table, section, key, parse_value(value), &format!("--set {path}"))?;
    }
    Ok(())
}

impl RunConfig {
    /// Parses a config document. Syntax errors and unknown keys carry the line number.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str::<RunConfig>(text).map_err(|e| bad(format!("{origin}: {e}")))
    }

    /// Layers file, environment, `--set` and flags, then validates.
    pub fn load(
        path: Option<&Path>,
        sets: &[String],
        env: impl Iterator<Item = (String, String)>,
        flags: &FlagOverrides,
    ) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| bad(format!("cannot read config {}: {e}", p.display())))?;
                let origin = p.display().to_string();
                Self::from_toml(&text, &origin)?;
                toml::from_str::<toml::Table>(&text).map_err(|e| bad(format!("{origin}: {e}")))?
            }
            None => toml::Table::new(),
        };
        env_overrides(&mut table, env)?;
        set_overrides(&mut table, sets)?;
        let mut config: RunConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| bad(format!("override: {e}")))?;
        if let Some(out) = &flags.out {
            config.output.dir = out.clone();
        }
        if let Some(t) = flags.threads {
            config.output.threads = Some(t);
        }
        if let Some(seed) = flags.seed {
            config.data.seed = seed;
        }
        config.output.quiet |= flags.quiet;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        if !(1..=3).contains(&p.d) {
            return Err(bad(format!("d must be 1, 2 or 3 (got {})", p.d)));
        }
        if p.n_x < 4 || !p.n_x.is_power_of_two() {
            return Err(bad(format!("n_x must be a power of two ≥ 4 (got {})", p.n_x)));
        }
        if !(p.a < p.b) || !p.a.is_finite() || !p.b.is_finite() {
            return Err(bad(format!("box must satisfy a < b (got a = {}, b = {})", p.a, p.b)));
        }
        if !(p.rho >= 0.0) || !p.rho.is_finite() {
            return Err(bad(format!("rho must be finite and ≥ 0 (got {})", p.rho)));
        }
        Nonlinearity::catalogue(&p.nonlinearity).map_err(|e| bad(format!("nonlinearity: {e}")))?;
        if self.data.kind == DataKind::Rough && !(self.data.theta > 0.5) {
            return Err(bad(format!("theta must satisfy θ > 1/2 (got {})", self.data.theta)));
        }
        if self.data.ensemble == 0 {
            return Err(bad("ensemble must be ≥ 1"));
        }
        let s = &self.study;
        if let Some(t) = s.t_end {
            if !(t > 0.0) || !t.is_finite() {
                return Err(bad(format!("T must be > 0 (got {t})")));
            }
        }
        if let Some(h) = s.h {
            if !(h > 0.0) || !h.is_finite() {
                return Err(bad(format!("h must be > 0 (got {h})")));
            }
        }
        if let Some(h) = s.h_ref {
            if !(h > 0.0) || !h.is_finite() {
                return Err(bad(format!("h_ref must be > 0 (got {h})")));
            }
        }
        if s.k_min > s.k_max || s.k_max > 30 {
            return Err(bad(format!("need k_min ≤ k_max ≤ 30 (got {}..{})", s.k_min, s.k_max)));
        }
        if let Some([lo, hi]) = s.fit_window {
            if lo > hi {
                return Err(bad(format!("fit_window must be increasing (got [{lo}, {hi}])")));
            }
        }
        for &n in s.n_x_list.iter().chain(s.n_x_ref.iter()) {
            if n < 4 || !n.is_power_of_two() {
                return Err(bad(format!("n_x must be a power of two ≥ 4 (got {n} in n_x_list/n_x_ref)")));
            }
        }
        if !(s.target_err > 0.0) {
            return Err(bad("target_err must be > 0"));
        }
        if self.output.threads == Some(0) {
            return Err(bad("threads must be ≥ 1"));
        }
        Ok(())
    }

    pub fn t_end(&self, command: Command) -> f64 {
        self.study.t_end.unwrap_or(match command {
            Command::Efficiency => 5.0,
            _ => 1.0,
        })
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        let p = &self.problem;
        ProblemSpec {
            dim: p.d,
            n_x: p.n_x,
            a: p.a,
            b: p.b,
            rho: p.rho,
            nonlinearity: p.nonlinearity.clone(),
            dealias: p.dealias,
        }
    }

    pub fn data_spec(&self) -> DataSpec {
        match self.data.kind {
            DataKind::Rough => DataSpec::Rough { theta: self.data.theta },
            DataKind::Smooth => DataSpec::Smooth,
        }
    }

    /// Harness spec for a study command, checked against the harness invariants.
    pub fn study_spec(&self, command: Command) -> Result<StudySpec, ConfigError> {
        let s = &self.study;
        let largest = s.n_x_list.iter().copied().max().unwrap_or(self.problem.n_x);
        let spec = StudySpec {
            problem: self.problem_spec(),
            data: self.data_spec(),
            seed: self.data.seed,
            ensemble: self.data.ensemble,
            t_end: self.t_end(command),
            methods: s.methods.clone(),
            k_min: s.k_min,
            k_max: s.k_max,
            fit_window: s.fit_window.map(|[a, b]| (a, b)).unwrap_or(((s.k_min + 2).min(s.k_max), s.k_max)),
            reference: s.reference,
            h_ref: s.h_ref.unwrap_or(2f64.powi(-(s.k_max as i32 + 6))),
            spatial_h: s.h.unwrap_or(1e-5),
            spatial_n_x: s.n_x_list.clone(),
            spatial_n_ref: s.n_x_ref.unwrap_or(4 * largest),
            target_err: s.target_err,
        };
        let checked = match command {
            Command::Spatial => spec.validate_spatial(),
            _ => spec.validate_temporal(),
        };
        checked.map_err(|e| bad(e.to_string()))?;
        Ok(spec)
    }
}
