use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{OrderFit, ReferenceMode, StudySpec};
use crate::error::Result;
use crate::integrators::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Temporal,
    Spatial,
    Efficiency,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Temporal => "temporal",
            StudyKind::Spatial => "spatial",
            StudyKind::Efficiency => "efficiency",
        }
    }
}

/// One `(method, h)` cell, averaged over the seed ensemble.
///
/// For spatial studies `k = log₂ n_x` and `h` is the fixed stepsize.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub method: Method,
    pub k: u32,
    pub h: f64,
    pub n_x: usize,
    pub steps: usize,
    pub err: f64,
    pub wall_ns: u64,
    pub flags: Vec<String>,
}

/// A single run before seed averaging.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRun {
    pub seed: u64,
    pub method: Method,
    pub k: u32,
    pub err: f64,
    pub wall_ns: u64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub method: Method,
    pub window: (u32, u32),
    /// Mean of the per-seed slopes that could be fitted.
    pub slope: Option<f64>,
    pub residual: Option<f64>,
    pub per_seed: Vec<(u64, Option<OrderFit>)>,
    /// Fit of the seed-averaged errors.
    pub mean_error_fit: Option<OrderFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceInfo {
    pub mode: ReferenceMode,
    pub h_ref: f64,
    pub n_x: usize,
    /// Richardson estimate of the reference error, per seed: the metric between
    /// the runs at `h_ref` and `2 h_ref`, divided by `2^p − 1` for a reference of order `p`.
    pub self_error: Vec<(u64, f64)>,
    /// Errors below this (per seed) are flagged `at-reference-floor`.
    pub floor: Vec<(u64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRanking {
    pub method: Method,
    pub rank: Option<usize>,
    /// Cheapest run reaching the target, if any.
    pub k: Option<u32>,
    pub steps: Option<usize>,
    pub wall_ns: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub kind: StudyKind,
    pub version: &'static str,
    pub spec: StudySpec,
    /// Resolved configuration supplied by the caller.
    pub config: Option<serde_json::Value>,
    pub seeds: Vec<u64>,
    pub rows: Vec<Row>,
    pub runs: Vec<SeedRun>,
    pub fits: Vec<FitSummary>,
    pub reference: Option<ReferenceInfo>,
    pub ranking: Vec<MethodRanking>,
    /// Spatial studies: metric between runs at `h` and `2h` on the finest grid.
    pub temporal_probe: Option<f64>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub(crate) fn new(kind: StudyKind, spec: &StudySpec) -> Self {
        Self {
            kind,
            version: env!("CARGO_PKG_VERSION"),
            spec: spec.clone(),
            config: None,
            seeds: spec.seeds(),
            rows: Vec::new(),
            runs: Vec::new(),
            fits: Vec::new(),
            reference: None,
            ranking: Vec::new(),
            temporal_probe: None,
            warnings: Vec::new(),
        }
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn fit_for(&self, method: Method) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.method == method)
    }

    pub fn slope(&self, method: Method) -> Option<f64> {
        self.fit_for(method).and_then(|f| f.slope)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut file = File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }

    /// Columns `method,k,h,err,wall_ns,flags`; flags are `;`-separated.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["method", "k", "h", "err", "wall_ns", "flags"])?;
        for r in &self.rows {
            w.write_record([
                r.method.name().to_string(),
                r.k.to_string(),
                r.h.to_string(),
                r.err.to_string(),
                r.wall_ns.to_string(),
                r.flags.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `x_<method>,y_<method>` column pairs: `(h, err)` for temporal studies,
    /// `(n_x, err)` for spatial ones and `(seconds, err)` for efficiency.
    pub fn write_plot_data(&self, path: &Path) -> Result<()> {
        let methods: Vec<Method> = self.fits.iter().map(|f| f.method).collect();
        let columns: Vec<Vec<(f64, f64)>> = methods
            .iter()
            .map(|&m| {
                self.rows_for(m)
                    .map(|r| {
                        let x = match self.kind {
                            StudyKind::Temporal => r.h,
                            StudyKind::Spatial => r.n_x as f64,
                            StudyKind::Efficiency => r.wall_ns as f64 * 1e-9,
                        };
                        (x, r.err)
                    })
                    .collect()
            })
            .collect();
        let mut w = csv::Writer::from_path(path)?;
        let header: Vec<String> =
            methods.iter().flat_map(|m| [format!("x_{}", m.name()), format!("y_{}", m.name())]).collect();
        w.write_record(&header)?;
        let len = columns.iter().map(Vec::len).max().unwrap_or(0);
        for i in 0..len {
            let record: Vec<String> = columns
                .iter()
                .flat_map(|c| match c.get(i) {
                    Some((x, y)) => [x.to_string(), y.to_string()],
                    None => [String::new(), String::new()],
                })
                .collect();
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}
