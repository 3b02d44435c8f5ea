//! Config-driven time sweeps and artifact emission.
//!
//! Every `(t, basis)` cell is an independent work unit; cells run on a rayon
//! pool and the report is assembled afterwards in time order. Data files are
//! deterministic for a given config and worker count. `report.json` also
//! carries wall-clock timings and so differs between runs.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analytic::{analytic_density_matrix, asymptotic_widths};
use crate::config::{ExperimentConfig, Output};
use crate::error::{Error, Result};
use crate::evolution::{
    brute_force_reduced, DensityMatrix, DiagonalDistribution, FactorizedKernel, InvariantReport,
    Mass,
};
use crate::grid::{Basis, Grid};
use crate::metrics::{
    analyze, fit_cut_widths, fit_power_law, profile_width, CutWidths, MetricReport, ScalingFit,
    MIN_SCALING_TIME,
};

/// Largest accepted oracle-versus-kernel discrepancy.
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Negative eigenvalues below this (but within the hard PSD tolerance) are
/// reported as warnings, or as errors under `strict`.
pub const PSD_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// Overrides `output_dir` from the config.
    pub output_dir: Option<PathBuf>,
    /// Promote PSD warnings to errors.
    pub strict: bool,
    /// Skip the sweep and run only the oracle comparison.
    pub oracle_only: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub output_dir: PathBuf,
    pub workers: usize,
    pub rows: Vec<MetricRow>,
    pub widths: Vec<WidthRow>,
    pub heatmaps: Vec<HeatmapRow>,
    pub scaling: Vec<ScalingRow>,
    pub oracle: Vec<OracleRow>,
    pub warnings: Vec<String>,
    pub timings: Vec<StageTiming>,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    #[serde(flatten)]
    pub metrics: MetricReport,
    /// Trace of the sampled kernel before renormalization.
    pub raw_trace: f64,
    pub trace_error: f64,
    pub hermiticity_error: f64,
    /// Largest elementwise gap to the Gaussian closed form (infinite mass only).
    pub analytic_residual: Option<f64>,
}

/// Gaussian widths of `|ρ|` along `(q − q̄)/√2` and `(q + q̄)/√2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WidthRow {
    pub t: f64,
    pub basis: Basis,
    /// Fitted on the kernel evaluated pointwise, independent of the grid.
    pub numeric_offdiag: f64,
    pub numeric_diag: f64,
    pub analytic_offdiag: Option<f64>,
    pub analytic_diag: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeatmapRow {
    pub t: f64,
    pub basis: Basis,
    pub n: usize,
    pub half_width: f64,
    pub fitted: CutWidths,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingRow {
    pub basis: Basis,
    pub field: &'static str,
    pub source: &'static str,
    pub fit: ScalingFit,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleRow {
    pub t: f64,
    pub basis: Basis,
    pub grid_n: usize,
    pub half_width: f64,
    pub max_abs_diff: f64,
    pub oracle_min_eigenvalue: f64,
    pub kernel_min_eigenvalue: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub t: f64,
    pub basis: Basis,
    pub stage: &'static str,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

pub const REPORT_FILE: &str = "report.json";

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    run_with(config, &RunOptions::default())
}

pub fn run_with(config: &ExperimentConfig, options: &RunOptions) -> Result<RunReport> {
    let dir = options
        .output_dir
        .clone()
        .unwrap_or_else(|| config.output_dir.clone());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = options.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut report = RunReport {
        config: config.clone(),
        output_dir: dir.clone(),
        workers: pool.current_num_threads(),
        rows: Vec::new(),
        widths: Vec::new(),
        heatmaps: Vec::new(),
        scaling: Vec::new(),
        oracle: Vec::new(),
        warnings: Vec::new(),
        timings: Vec::new(),
        files: Vec::new(),
    };
    let mut written = Vec::new();
    let outcome = pool.install(|| {
        if !options.oracle_only {
            sweep(config, &dir, options.strict, &mut report, &mut written)?;
        }
        if config.oracle.is_some() {
            oracle_stage(config, &dir, &mut report, &mut written)?;
        } else if options.oracle_only {
            return Err(Error::Validation(vec![
                "oracle mode needs an `oracle` section in the config".into(),
            ]));
        }
        Ok(())
    });
    outcome?;
    written.sort();
    written.dedup();
    report.files = written
        .iter()
        .map(|rel| digest(&dir, rel))
        .collect::<Result<_>>()?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_text(&dir, REPORT_FILE, &json)?;
    let failed: Vec<String> = report
        .oracle
        .iter()
        .filter(|r| !r.passed)
        .map(|r| {
            format!(
                "oracle residual {:e} exceeds {ORACLE_TOLERANCE:e} at t = {} ({})",
                r.max_abs_diff, r.t, r.basis
            )
        })
        .collect();
    if !failed.is_empty() {
        return Err(Error::Invariant(failed.join("; ")));
    }
    Ok(report)
}

/// Everything computed for one `(t, basis)` cell.
struct Cell {
    row: MetricRow,
    widths: WidthRow,
    heatmap: Option<HeatmapRow>,
    warnings: Vec<String>,
    timings: Vec<StageTiming>,
    files: Vec<String>,
}

fn sweep(
    config: &ExperimentConfig,
    dir: &Path,
    strict: bool,
    report: &mut RunReport,
    written: &mut Vec<String>,
) -> Result<()> {
    let cells: Vec<(usize, f64, Basis)> = config
        .times
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| config.bases().into_iter().map(move |b| (i, t, b)))
        .collect();
    let outcomes: Vec<Result<Cell>> = cells
        .par_iter()
        .map(|&(i, t, basis)| evaluate_cell(config, dir, i, t, basis, strict))
        .collect();
    for outcome in outcomes {
        let cell = outcome?;
        report.rows.push(cell.row);
        report.widths.push(cell.widths);
        report.heatmaps.extend(cell.heatmap);
        report.warnings.extend(cell.warnings);
        report.timings.extend(cell.timings);
        written.extend(cell.files);
    }
    if config.wants(Output::Metrics) {
        write_text(dir, "metrics.csv", &metrics_csv(&report.rows, &report.widths))?;
        written.push("metrics.csv".into());
    }
    if config.wants(Output::ScalingFits) {
        report.scaling = scaling_fits(&report.widths)?;
        write_text(dir, "scaling_fits.csv", &scaling_csv(&report.scaling))?;
        written.push("scaling_fits.csv".into());
    }
    Ok(())
}

fn timed<T>(
    log: &mut Vec<StageTiming>,
    t: f64,
    basis: Basis,
    stage: &'static str,
    f: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let start = Instant::now();
    let out = f();
    log.push(StageTiming {
        t,
        basis,
        stage,
        ms: start.elapsed().as_secs_f64() * 1e3,
    });
    out.map_err(|e| e.at(t, stage))
}

fn evaluate_cell(
    config: &ExperimentConfig,
    dir: &Path,
    index: usize,
    t: f64,
    basis: Basis,
    strict: bool,
) -> Result<Cell> {
    let mut timings = Vec::new();
    let mut warnings = Vec::new();
    let mut files = Vec::new();
    let params = config.params(t).map_err(|e| e.at(t, "setup"))?;
    let grid = config.grid(basis).expect("validated basis");
    let stem = format!("{basis}_t{index:03}");

    let (kernel, rho) = timed(&mut timings, t, basis, "kernel", || {
        params.check_grid(basis, &grid)?;
        let kernel = FactorizedKernel::new(&params, basis)?;
        let rho = kernel.density_matrix(&grid)?;
        Ok((kernel, rho))
    })?;
    let invariants = timed(&mut timings, t, basis, "invariants", || rho.check())?;
    if invariants.min_eigenvalue < -PSD_WARNING {
        let min_eigenvalue = invariants.min_eigenvalue;
        if strict {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue }.at(t, "invariants"));
        }
        let msg = format!("t = {t} ({basis}): minimum eigenvalue {min_eigenvalue:e}");
        warn!("{msg}");
        warnings.push(msg);
    }
    let metrics = timed(&mut timings, t, basis, "metrics", || analyze(&rho, t))?;
    let model = config.gaussian_model();
    let analytic_residual = match config.model.mass {
        Mass::Infinite => Some(timed(&mut timings, t, basis, "analytic", || {
            Ok(rho.max_abs_diff(&analytic_density_matrix(&model, t, &grid, basis)?))
        })?),
        Mass::Finite(_) => None,
    };
    let widths = timed(&mut timings, t, basis, "widths", || {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let numeric_offdiag = profile_width(|u| kernel.eval(u * r, -u * r).norm(), 1.0)?;
        let numeric_diag = profile_width(|v| kernel.eval_diagonal(v * r), 1.0)?;
        let analytic = config.model.mass.is_infinite().then(|| {
            let w = asymptotic_widths(&model, t);
            match basis {
                Basis::Position => (w.offdiag_pos, w.diag_pos),
                Basis::Momentum => (w.offdiag_mom, w.diag_mom),
            }
        });
        Ok(WidthRow {
            t,
            basis,
            numeric_offdiag,
            numeric_diag,
            analytic_offdiag: analytic.map(|a| a.0),
            analytic_diag: analytic.map(|a| a.1),
        })
    })?;
    let heatmap = if config.wants(Output::Heatmaps) {
        let display = config.heatmap.grid(basis);
        Some(timed(&mut timings, t, basis, "heatmap", || {
            let dq = display.spacing();
            let magnitudes = kernel.sample(&display).mapv(|e| e.norm() / dq);
            let fitted = fit_cut_widths(&magnitudes, &display)?;
            let row = HeatmapRow {
                t,
                basis,
                n: display.len(),
                half_width: display.half_width(),
                fitted,
            };
            files.extend(write_heatmap(dir, &stem, &display, &magnitudes, &row)?);
            Ok(row)
        })?)
    } else {
        None
    };
    timed(&mut timings, t, basis, "write", || {
        if config.wants(Output::Matrices) {
            files.extend(write_matrix(dir, &stem, t, &rho, &invariants)?);
        }
        if config.wants(Output::Diagonals) {
            let dist = DiagonalDistribution::from_density_matrix(&rho)?;
            files.push(write_diagonal(dir, &stem, &dist)?);
        }
        Ok(())
    })?;
    info!(
        "t = {t} {basis}: purity {:.6}, entropy {:.6}",
        metrics.purity, metrics.entropy
    );
    Ok(Cell {
        row: MetricRow {
            metrics,
            raw_trace: rho.raw_trace(),
            trace_error: invariants.trace_error,
            hermiticity_error: invariants.hermiticity_error,
            analytic_residual,
        },
        widths,
        heatmap,
        warnings,
        timings,
        files,
    })
}

fn scaling_fits(widths: &[WidthRow]) -> Result<Vec<ScalingRow>> {
    let mut rows = Vec::new();
    for basis in [Basis::Position, Basis::Momentum] {
        let late: Vec<&WidthRow> = widths
            .iter()
            .filter(|w| w.basis == basis && w.t >= MIN_SCALING_TIME)
            .collect();
        if late.is_empty() {
            continue;
        }
        type Pick = fn(&WidthRow) -> Option<f64>;
        let series: [(&'static str, &'static str, Pick); 4] = [
            ("offdiag_width", "numeric", |w| Some(w.numeric_offdiag)),
            ("diag_width", "numeric", |w| Some(w.numeric_diag)),
            ("offdiag_width", "analytic", |w| w.analytic_offdiag),
            ("diag_width", "analytic", |w| w.analytic_diag),
        ];
        for (field, source, pick) in series {
            let points: Option<Vec<(f64, f64)>> =
                late.iter().map(|w| pick(w).map(|v| (w.t, v))).collect();
            if let Some(points) = points {
                rows.push(ScalingRow {
                    basis,
                    field,
                    source,
                    fit: fit_power_law(&points)?,
                });
            }
        }
    }
    Ok(rows)
}

fn oracle_stage(
    config: &ExperimentConfig,
    dir: &Path,
    report: &mut RunReport,
    written: &mut Vec<String>,
) -> Result<()> {
    let oracle = config.oracle.as_ref().expect("checked by caller");
    let cells: Vec<(f64, Basis)> = oracle
        .times
        .iter()
        .flat_map(|&t| config.bases().into_iter().map(move |b| (t, b)))
        .collect();
    let rows: Vec<Result<(OracleRow, StageTiming)>> = cells
        .par_iter()
        .map(|&(t, basis)| {
            let mut log = Vec::new();
            let row = timed(&mut log, t, basis, "oracle", || {
                let params = config.params(t)?;
                let grid = Grid::covering(oracle.grid_n, params.required_half_width(basis))?;
                let brute = brute_force_reduced(&params, &grid, basis)?;
                let kernel = FactorizedKernel::new(&params, basis)?.density_matrix(&grid)?;
                let brute_inv = brute.check()?;
                let kernel_inv = kernel.check()?;
                let max_abs_diff = brute.max_abs_diff(&kernel);
                Ok(OracleRow {
                    t,
                    basis,
                    grid_n: oracle.grid_n,
                    half_width: grid.half_width(),
                    max_abs_diff,
                    oracle_min_eigenvalue: brute_inv.min_eigenvalue,
                    kernel_min_eigenvalue: kernel_inv.min_eigenvalue,
                    passed: max_abs_diff <= ORACLE_TOLERANCE,
                })
            })?;
            Ok((row, log.pop().expect("one timing")))
        })
        .collect();
    for r in rows {
        let (row, timing) = r?;
        info!("oracle t = {} {}: max|Δ| = {:e}", row.t, row.basis, row.max_abs_diff);
        report.oracle.push(row);
        report.timings.push(timing);
    }
    let mut csv = String::from("t,basis,grid_n,half_width,max_abs_diff,oracle_min_eigenvalue,kernel_min_eigenvalue,passed\n");
    for r in &report.oracle {
        writeln!(
            csv,
            "{:e},{},{},{:e},{:e},{:e},{:e},{}",
            r.t, r.basis, r.grid_n, r.half_width, r.max_abs_diff, r.oracle_min_eigenvalue,
            r.kernel_min_eigenvalue, r.passed
        )
        .unwrap();
    }
    write_text(dir, "oracle.csv", &csv)?;
    written.push("oracle.csv".into());
    Ok(())
}

fn metrics_csv(rows: &[MetricRow], widths: &[WidthRow]) -> String {
    let mut out = String::from(
        "t,basis,purity,entropy,l1_coherence,offdiag_width,diag_width,offdiag_resolved,diag_resolved,\
         flatness_cv,min_eigenvalue,raw_trace,trace_error,hermiticity_error,analytic_residual,\
         numeric_offdiag_width,numeric_diag_width\n",
    );
    for (r, w) in rows.iter().zip(widths) {
        let m = &r.metrics;
        let residual = r.analytic_residual.map(|x| format!("{x:e}")).unwrap_or_default();
        writeln!(
            out,
            "{:e},{},{:e},{:e},{:e},{:e},{:e},{},{},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e}",
            m.t,
            m.basis,
            m.purity,
            m.entropy,
            m.l1_coherence,
            m.offdiag_width,
            m.diag_width,
            m.offdiag_resolved,
            m.diag_resolved,
            m.flatness_cv,
            m.min_eigenvalue,
            r.raw_trace,
            r.trace_error,
            r.hermiticity_error,
            residual,
            w.numeric_offdiag,
            w.numeric_diag
        )
        .unwrap();
    }
    out
}

fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("basis,field,source,exponent,prefactor,r_squared,t_min,t_max,points\n");
    for r in rows {
        let f = &r.fit;
        writeln!(
            out,
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{}",
            r.basis, r.field, r.source, f.exponent, f.prefactor, f.r_squared, f.t_range.0, f.t_range.1,
            f.points
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct MatrixHeader<'a> {
    t: f64,
    basis: Basis,
    n: usize,
    min: f64,
    max: f64,
    spacing: f64,
    /// Elements are `ρ(q_j, q_k)·dq`, trace-normalized.
    convention: &'static str,
    raw_trace: f64,
    invariants: &'a InvariantReport,
}

fn write_matrix(
    dir: &Path,
    stem: &str,
    t: f64,
    rho: &DensityMatrix,
    invariants: &InvariantReport,
) -> Result<Vec<String>> {
    let rel = format!("matrices/{stem}.csv");
    let path = prepare(dir, &rel)?;
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(&path, e);
    writeln!(w, "row,col,re,im").map_err(io)?;
    for ((j, k), e) in rho.elems().indexed_iter() {
        writeln!(w, "{j},{k},{:e},{:e}", e.re, e.im).map_err(io)?;
    }
    w.flush().map_err(io)?;
    let g = rho.grid();
    let header = MatrixHeader {
        t,
        basis: rho.basis(),
        n: g.len(),
        min: g.min(),
        max: g.last(),
        spacing: g.spacing(),
        convention: "rho(q_j, q_k) * dq, trace-normalized",
        raw_trace: rho.raw_trace(),
        invariants,
    };
    let meta = format!("matrices/{stem}.json");
    write_text(dir, &meta, &serde_json::to_string_pretty(&header).expect("header"))?;
    Ok(vec![rel, meta])
}

fn write_diagonal(dir: &Path, stem: &str, dist: &DiagonalDistribution) -> Result<String> {
    let rel = format!("diagonals/{stem}.csv");
    let mut out = String::from("q,probability,density\n");
    for ((q, p), d) in dist.grid().points().zip(dist.probs()).zip(dist.density()) {
        writeln!(out, "{q:e},{p:e},{d:e}").unwrap();
    }
    write_text(dir, &rel, &out)?;
    Ok(rel)
}

#[derive(Serialize)]
struct HeatmapHeader<'a> {
    #[serde(flatten)]
    row: &'a HeatmapRow,
    axis_min: f64,
    axis_max: f64,
    /// Row index runs over `q`, column index over `q̄`.
    layout: &'static str,
}

fn write_heatmap(
    dir: &Path,
    stem: &str,
    display: &Grid,
    magnitudes: &Array2<f64>,
    row: &HeatmapRow,
) -> Result<Vec<String>> {
    let rel = format!("heatmaps/{stem}.csv");
    let mut out = String::new();
    for line in magnitudes.rows() {
        let cells: Vec<String> = line.iter().map(|m| format!("{m:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(dir, &rel, &out)?;
    let header = HeatmapHeader {
        row,
        axis_min: display.min(),
        axis_max: display.last(),
        layout: "dense |rho(q, qbar)|, rows q ascending, columns qbar ascending",
    };
    let meta = format!("heatmaps/{stem}.json");
    write_text(dir, &meta, &serde_json::to_string_pretty(&header).expect("header"))?;
    Ok(vec![rel, meta])
}

fn prepare(dir: &Path, rel: &str) -> Result<PathBuf> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(path)
}

fn write_text(dir: &Path, rel: &str, text: &str) -> Result<()> {
    let path = prepare(dir, rel)?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn digest(dir: &Path, rel: &str) -> Result<FileDigest> {
    let path = dir.join(rel);
    let mut file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(&path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(FileDigest {
        path: rel.to_string(),
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}
