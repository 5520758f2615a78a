//! Batch experiments: a spec names graphs, a fugacity grid and the
//! operations to run; the runner produces one row per `(graph, λ)` with
//! every inequality tagged pass, fail or skipped.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds;
use crate::error::ExactError;
use crate::exact::{self, ExactConfig, ExactReport, Fugacity, Number};
use crate::fractional::{self, CertificateMode, FractionalConfig, EXHAUSTIVE_CAP};
use crate::generators::GenSpec;
use crate::graph::{audit, load_graph, Graph, GraphFormat, SparsityAudit};
use crate::sampler::{self, ChainConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 21] = [
    "graph",
    "n",
    "max_degree",
    "implied_f",
    "triangles",
    "lambda",
    "occupancy_fraction",
    "occupancy_source",
    "std_error",
    "occ_lower",
    "asymptotic_occ",
    "ratio",
    "occ_lower_check",
    "genhcm_check",
    "local_bound_check",
    "chif",
    "certified_upper",
    "certificate_check",
    "chif_vs_certified_check",
    "failed_checks",
    "time_ms",
];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("graph {name}: {message}")]
    Graph { name: String, message: String },
    #[error("writing report: {0}")]
    Output(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Audit,
    Exact,
    Sample,
    Bound,
    Chif,
    Certify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    File {
        path: PathBuf,
        #[serde(default = "default_format")]
        format: GraphFormat,
        #[serde(default)]
        name: Option<String>,
    },
    Generated(GenSpec),
}

fn default_format() -> GraphFormat {
    GraphFormat::EdgeList
}

impl GraphSource {
    pub fn name(&self) -> String {
        match self {
            GraphSource::File { path, name, .. } => name.clone().unwrap_or_else(|| path.display().to_string()),
            GraphSource::Generated(spec) => spec.label(),
        }
    }

    pub fn load(&self) -> Result<Graph, ExperimentError> {
        match self {
            GraphSource::File { path, format, .. } => {
                let file = File::open(path).map_err(|e| ExperimentError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
                load_graph(BufReader::new(file), *format).map_err(|e| ExperimentError::Graph {
                    name: self.name(),
                    message: e.to_string(),
                })
            }
            GraphSource::Generated(spec) => spec.build().map_err(|e| ExperimentError::Graph {
                name: self.name(),
                message: e.to_string(),
            }),
        }
    }
}

/// Glauber settings in units of sweeps (`n` steps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSettings {
    pub samples: u64,
    pub chains: usize,
    pub burn_in_sweeps: u64,
    pub thin_sweeps: u64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        SamplerSettings {
            samples: 10_000,
            chains: 8,
            burn_in_sweeps: 100,
            thin_sweeps: 1,
        }
    }
}

impl SamplerSettings {
    pub fn chain_config(&self, g: &Graph, lambda: f64, seed: u64) -> ChainConfig {
        let sweep = g.n().max(1) as u64;
        ChainConfig {
            lambda,
            burn_in: self.burn_in_sweeps * sweep,
            samples: self.samples,
            thinning: self.thin_sweeps.max(1) * sweep,
            seed,
            chains: self.chains,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub graphs: Vec<GraphSource>,
    pub lambdas: Vec<Fugacity>,
    #[serde(default)]
    pub eps: Option<f64>,
    pub operations: Vec<Operation>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerSettings,
    /// Random subgraphs checked when a certificate cannot be exhaustive.
    #[serde(default = "default_certify_samples")]
    pub certify_samples: usize,
    #[serde(default)]
    pub exact: ExactConfig,
    #[serde(default)]
    pub fractional: FractionalConfig,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_certify_samples() -> usize {
    64
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Spec(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        if self.graphs.is_empty() {
            return bad("no graphs listed".into());
        }
        if self.lambdas.is_empty() {
            return bad("fugacity grid is empty".into());
        }
        if self.operations.is_empty() {
            return bad("no operations listed".into());
        }
        let values: Vec<f64> = self.lambdas.iter().map(Fugacity::to_f64).collect();
        if values.iter().any(|&x| !(x > 0.0)) || values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("fugacity grid must be positive and strictly increasing".into());
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return bad(format!("eps must be positive, got {eps}"));
            }
        }
        for source in &self.graphs {
            if let GraphSource::File { path, .. } = source {
                if !path.exists() {
                    return bad(format!("graph file {} does not exist", path.display()));
                }
            }
        }
        Ok(())
    }

    fn wants(&self, op: Operation) -> bool {
        self.operations.contains(&op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowCheck {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl RowCheck {
    fn skipped(reason: impl Into<String>) -> Self {
        RowCheck {
            status: Status::Skipped,
            margin: None,
            detail: Some(reason.into()),
        }
    }

    fn judged(ok: bool, margin: f64) -> Self {
        RowCheck {
            status: Status::from_bool(ok),
            margin: Some(margin),
            detail: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupancySource {
    Exact,
    Sampled,
    Skipped,
}

/// One `(graph, λ)` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub graph: String,
    pub n: usize,
    pub max_degree: usize,
    pub implied_f: f64,
    pub triangles: u64,
    pub lambda: Fugacity,
    pub occupancy_fraction: Option<Number>,
    pub occupancy_source: OccupancySource,
    pub std_error: Option<f64>,
    pub occ_lower: Option<f64>,
    pub asymptotic_occ: Option<f64>,
    /// Occupancy fraction over `occ_lower`.
    pub ratio: Option<f64>,
    pub admissibility: Option<bounds::Admissibility>,
    pub occ_lower_check: RowCheck,
    pub genhcm_check: RowCheck,
    pub local_bound_check: RowCheck,
    #[serde(serialize_with = "opt_ratio")]
    pub chif: Option<BigRational>,
    #[serde(serialize_with = "opt_ratio")]
    pub certified_upper: Option<BigRational>,
    pub certificate_check: RowCheck,
    pub chif_vs_certified_check: RowCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_ms: Option<f64>,
}

fn opt_ratio<S: serde::Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl Row {
    fn checks(&self) -> [&RowCheck; 5] {
        [
            &self.occ_lower_check,
            &self.genhcm_check,
            &self.local_bound_check,
            &self.certificate_check,
            &self.chif_vs_certified_check,
        ]
    }

    pub fn failed(&self) -> usize {
        self.checks().iter().filter(|c| c.status == Status::Fail).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub deterministic: bool,
    pub rows: Vec<Row>,
    pub violations: usize,
    pub skipped: usize,
}

impl Report {
    pub fn has_violation(&self) -> bool {
        self.violations > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation is infallible")
    }

    pub fn to_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| ExperimentError::Output(e.to_string());
        w.write_record(CSV_COLUMNS).map_err(err)?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let source = match r.occupancy_source {
                OccupancySource::Exact => "exact",
                OccupancySource::Sampled => "sampled",
                OccupancySource::Skipped => "skipped",
            };
            w.write_record([
                r.graph.clone(),
                r.n.to_string(),
                r.max_degree.to_string(),
                r.implied_f.to_string(),
                r.triangles.to_string(),
                r.lambda.to_string(),
                r.occupancy_fraction.as_ref().map(|x| x.to_string()).unwrap_or_default(),
                source.to_string(),
                opt(r.std_error),
                opt(r.occ_lower),
                opt(r.asymptotic_occ),
                opt(r.ratio),
                r.occ_lower_check.status.as_str().to_string(),
                r.genhcm_check.status.as_str().to_string(),
                r.local_bound_check.status.as_str().to_string(),
                r.chif.as_ref().map(|x| x.to_string()).unwrap_or_default(),
                r.certified_upper.as_ref().map(|x| x.to_string()).unwrap_or_default(),
                r.certificate_check.status.as_str().to_string(),
                r.chif_vs_certified_check.status.as_str().to_string(),
                r.failed().to_string(),
                opt(r.time_ms),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| ExperimentError::Output(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Runs every `(graph, λ)` row. Rows are computed in parallel and reported
/// in `(graph, λ)` order; with `deterministic` set, timings are omitted so
/// identical specs give byte-identical JSON.
pub fn run_experiment(spec: &ExperimentSpec, deterministic: bool) -> Result<Report, ExperimentError> {
    spec.validate()?;
    let graphs: Vec<(String, Graph)> = spec
        .graphs
        .iter()
        .map(|s| s.load().map(|g| (s.name(), g)))
        .collect::<Result<_, _>>()?;

    let per_graph: Vec<Vec<Row>> = graphs
        .par_iter()
        .map(|(name, g)| graph_rows(spec, name, g, deterministic))
        .collect();
    let rows: Vec<Row> = per_graph.into_iter().flatten().collect();
    let violations = rows.iter().map(Row::failed).sum();
    let skipped = rows
        .iter()
        .flat_map(|r| r.checks())
        .filter(|c| c.status == Status::Skipped)
        .count();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        deterministic,
        rows,
        violations,
        skipped,
    })
}

/// `(Δ, f)` fed to the bounds; edgeless graphs use the `Δ = 1`, `f = 2`
/// convention so that the bound is still defined.
fn bound_parameters(a: &SparsityAudit) -> (usize, f64) {
    if a.max_degree == 0 {
        (1, 2.0)
    } else {
        (a.max_degree, a.implied_f)
    }
}

fn graph_rows(spec: &ExperimentSpec, name: &str, g: &Graph, deterministic: bool) -> Vec<Row> {
    let a = audit(g);
    let chif = if spec.wants(Operation::Chif) {
        fractional::chif_exact(g, &spec.fractional).ok().map(|c| c.value)
    } else {
        None
    };
    spec.lambdas
        .par_iter()
        .enumerate()
        .map(|(i, lambda)| {
            let started = Instant::now();
            let mut row = single_row(spec, name, g, &a, lambda, chif.clone(), i as u64);
            if !deterministic {
                row.time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            row
        })
        .collect()
}

fn single_row(
    spec: &ExperimentSpec,
    name: &str,
    g: &Graph,
    a: &SparsityAudit,
    lambda: &Fugacity,
    chif: Option<BigRational>,
    lambda_index: u64,
) -> Row {
    let lam = lambda.to_f64();
    let (delta, f) = bound_parameters(a);
    let bound = bounds::occupancy_lower_bound(delta, f, lam).ok();
    let wants_bound = spec.wants(Operation::Bound) || spec.wants(Operation::Exact) || spec.wants(Operation::Sample);
    let occ_lower = bound.filter(|_| wants_bound).map(|b| b.value);
    let asymptotic_occ = if spec.wants(Operation::Bound) {
        bounds::asymptotic_occupancy(delta, lam).ok()
    } else {
        None
    };
    let admissibility = if spec.wants(Operation::Bound) {
        bounds::admissibility(delta, f, lam).ok()
    } else {
        None
    };

    let mut row = Row {
        graph: name.to_string(),
        n: g.n(),
        max_degree: a.max_degree,
        implied_f: a.implied_f,
        triangles: a.triangle_total,
        lambda: lambda.clone(),
        occupancy_fraction: None,
        occupancy_source: OccupancySource::Skipped,
        std_error: None,
        occ_lower,
        asymptotic_occ,
        ratio: None,
        admissibility,
        occ_lower_check: RowCheck::skipped("no occupancy computed"),
        genhcm_check: RowCheck::skipped("exact engine not requested"),
        local_bound_check: RowCheck::skipped("exact engine not requested"),
        chif,
        certified_upper: None,
        certificate_check: RowCheck::skipped("certify not requested"),
        chif_vs_certified_check: RowCheck::skipped("needs chif and a verified certificate"),
        time_ms: None,
    };

    let mut exact_done = false;
    if spec.wants(Operation::Exact) {
        match exact::exact_marginals(g, lambda, &spec.exact) {
            Ok(report) => {
                exact_done = true;
                fill_exact(&mut row, g, a, lambda, &report, spec);
            }
            Err(e) => {
                let reason = format!("exact engine: {e}");
                row.genhcm_check = RowCheck::skipped(reason.clone());
                row.local_bound_check = RowCheck::skipped(reason.clone());
                row.occ_lower_check = RowCheck::skipped(reason);
            }
        }
    }
    if !exact_done && spec.wants(Operation::Sample) && g.n() > 0 {
        let seed = spec.seed.wrapping_add(lambda_index);
        let cfg = spec.sampler.chain_config(g, lam, seed);
        match sampler::glauber_run(g, &cfg) {
            Ok(est) => {
                row.occupancy_fraction = Some(Number::Float(est.mean_occupancy_fraction));
                row.occupancy_source = OccupancySource::Sampled;
                row.std_error = Some(est.std_error);
                if let Some(lower) = row.occ_lower {
                    let margin = est.mean_occupancy_fraction - lower;
                    row.ratio = Some(est.mean_occupancy_fraction / lower);
                    let mut check = RowCheck::judged(margin >= -3.0 * est.std_error, margin);
                    check.detail = Some("sampled: passes within 3 standard errors".into());
                    row.occ_lower_check = check;
                }
            }
            Err(e) => row.occ_lower_check = RowCheck::skipped(format!("sampler: {e}")),
        }
    }

    if spec.wants(Operation::Certify) {
        certify_row(&mut row, g, a, lambda, spec);
    }
    row
}

fn fill_exact(row: &mut Row, g: &Graph, a: &SparsityAudit, lambda: &Fugacity, report: &ExactReport, spec: &ExperimentSpec) {
    let occ = report.occupancy_fraction();
    let occ_f = occ.to_f64();
    row.occupancy_fraction = Some(occ);
    row.occupancy_source = OccupancySource::Exact;
    if let Some(lower) = row.occ_lower {
        let tol = report.tolerance();
        row.ratio = Some(occ_f / lower);
        row.occ_lower_check = RowCheck::judged(g.n() == 0 || tol.accepts(occ_f, lower), occ_f - lower);
    }
    match exact::verify_genhcm(g, lambda, &spec.exact) {
        Ok(r) => {
            let margin = r
                .per_vertex
                .iter()
                .map(|c| c.margin)
                .fold(r.global.margin, f64::min);
            let mut check = RowCheck::judged(r.holds, margin);
            if let Some(v) = r.witness {
                check.detail = Some(format!("fails at vertex {v}"));
            }
            row.genhcm_check = check;
        }
        Err(e) => row.genhcm_check = RowCheck::skipped(e.to_string()),
    }
    row.local_bound_check = if a.max_degree == 0 {
        RowCheck::skipped("maximum degree 0")
    } else {
        match bounds::alpha_beta(a.max_degree, a.implied_f, lambda.to_f64())
            .map_err(ExactError::from)
            .and_then(|ab| exact::verify_hcmbound_local(g, lambda, ab.alpha, ab.beta, &spec.exact))
        {
            Ok(r) => {
                let margin = r.per_vertex.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
                RowCheck::judged(r.holds, margin)
            }
            Err(e) => RowCheck::skipped(e.to_string()),
        }
    };
}

fn certify_row(row: &mut Row, g: &Graph, a: &SparsityAudit, lambda: &Fugacity, spec: &ExperimentSpec) {
    if a.max_degree == 0 {
        row.certificate_check = RowCheck::skipped("maximum degree 0");
        return;
    }
    let ab = match bounds::alpha_beta(a.max_degree, a.implied_f, lambda.to_f64()) {
        Ok(ab) => ab,
        Err(e) => {
            row.certificate_check = RowCheck::skipped(e.to_string());
            return;
        }
    };
    let (alpha, beta) = match (BigRational::from_float(ab.alpha), BigRational::from_float(ab.beta)) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            row.certificate_check = RowCheck::skipped("non-finite weights");
            return;
        }
    };
    let mode = if g.n() <= EXHAUSTIVE_CAP {
        CertificateMode::Exhaustive
    } else {
        CertificateMode::Sampled {
            samples: spec.certify_samples,
            seed: spec.seed,
        }
    };
    match fractional::verify_certificate(g, &alpha, &beta, lambda, mode) {
        Ok(cert) => {
            let mut check = RowCheck::judged(cert.verified, cert.worst_margin);
            check.detail = cert.disclaimer.clone();
            row.certificate_check = check;
            if let Ok(upper) = fractional::certified_upper_bound(g, &cert) {
                if let Some(chif) = &row.chif {
                    let ok = *chif <= upper;
                    let margin = crate::exact::Scalar::approx(&(&upper - chif));
                    row.chif_vs_certified_check = RowCheck::judged(ok, margin);
                }
                row.certified_upper = Some(upper);
            }
        }
        Err(e) => row.certificate_check = RowCheck::skipped(e.to_string()),
    }
}

/// One row of an occupancy sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub occupancy_fraction: f64,
    pub std_error: Option<f64>,
    pub exact: bool,
    pub occ_lower: f64,
    pub asymptotic_occ: f64,
    /// `occupancy_fraction / occ_lower`.
    pub ratio: f64,
}

/// Where sweep occupancies come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepEngine {
    Exact(ExactConfig),
    Sampler { settings: SamplerSettings, seed: u64 },
}

/// Occupancy fraction against the min–max lower bound and the asymptotic
/// formula along a fugacity grid. Edgeless graphs use the `Δ = 1`, `f = 2`
/// convention.
pub fn compare_occupancy_sweep(
    g: &Graph,
    grid: &[Fugacity],
    engine: SweepEngine,
) -> Result<Vec<SweepRow>, ExperimentError> {
    if g.n() == 0 {
        return Err(ExperimentError::Spec("graph has no vertices".into()));
    }
    let a = audit(g);
    let (delta, f) = bound_parameters(&a);
    grid.iter()
        .enumerate()
        .map(|(i, lambda)| {
            let lam = lambda.to_f64();
            let (occ, se, exact_flag) = match engine {
                SweepEngine::Exact(cfg) => {
                    let r = exact::exact_marginals(g, lambda, &cfg).map_err(|e| ExperimentError::Spec(e.to_string()))?;
                    (r.occupancy_fraction().to_f64(), None, true)
                }
                SweepEngine::Sampler { settings, seed } => {
                    let cfg = settings.chain_config(g, lam, seed.wrapping_add(i as u64));
                    let est = sampler::glauber_run(g, &cfg).map_err(|e| ExperimentError::Spec(e.to_string()))?;
                    (est.mean_occupancy_fraction, Some(est.std_error), false)
                }
            };
            let lower = bounds::occupancy_lower_bound(delta, f, lam)
                .map_err(|e| ExperimentError::Spec(e.to_string()))?
                .value;
            let asym = bounds::asymptotic_occupancy(delta, lam).map_err(|e| ExperimentError::Spec(e.to_string()))?;
            Ok(SweepRow {
                lambda: lam,
                occupancy_fraction: occ,
                std_error: se,
                exact: exact_flag,
                occ_lower: lower,
                asymptotic_occ: asym,
                ratio: occ / lower,
            })
        })
        .collect()
}
