//! Subcommands behind the `lrf` binary. Each writes its outputs and the
//! resolved configuration into the output directory and returns the paths.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use lrfield::experiments::{estimate_hurst, run_scaling, ExperimentReport};
use lrfield::field::{CirculantEmbedding, CovarianceModel};
use lrfield::limit::{
    integrability_scan, limit_covariance, Classification, LimitSampler, McBudget, ScalingParams, ScanSpec,
};
use lrfield::seed::child_seed;
use lrfield::stats::{fit_line, moments, variance_stderr};
use lrfield::{Error, Result};
use serde::Serialize;

pub use config::{Overrides, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Scaling,
    LimitSample,
    Integrability,
}

/// 2 for configuration and validation problems, 3 when a numerical target
/// was not met, 4 for I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => 4,
        Error::PrecisionNotReached { .. }
        | Error::Quadrature { .. }
        | Error::InconclusiveScan { .. }
        | Error::EmbeddingFailure { .. }
        | Error::RankUndetermined { .. } => 3,
        _ => 2,
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = &cfg.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = match cmd {
        Command::Synth => synth(cfg)?,
        Command::Scaling => scaling(cfg)?,
        Command::LimitSample => limit_sample(cfg)?,
        Command::Integrability => integrability(cfg)?,
    };
    written.push(write_text(&out.join("resolved_config.toml"), &cfg.to_toml())?);
    Ok(written)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    write_bytes(path, text.as_bytes())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_text(path, &s)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn check_budget(cfg: &RunConfig, bytes: u64, what: f64) -> Result<()> {
    if let Some(budget_mb) = cfg.memory_budget_mb {
        let needed_mb = bytes.div_ceil(1 << 20);
        if needed_mb > budget_mb {
            return Err(Error::MemoryBudget {
                radius: what,
                needed_mb,
                budget_mb,
            });
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct DumpHeader<'a> {
    data_file: &'a str,
    dtype: &'a str,
    layout: &'a str,
    n: usize,
    alpha: f64,
    shape: &'a [usize],
    spacing: f64,
    origin: &'a [usize],
    seed: u64,
    embedding_padding: usize,
    clamped_eigenvalues: usize,
    values: usize,
    software_version: &'a str,
}

fn synth(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = &cfg.params;
    let model = CovarianceModel::new(p.n, p.alpha)?;
    let shape = cfg.synth.shape.clone().unwrap_or_default();
    if shape.len() != p.n {
        return Err(Error::Config(format!(
            "synth.shape has {} axes but params.n = {}",
            shape.len(),
            p.n
        )));
    }
    check_budget(cfg, CirculantEmbedding::working_bytes(&shape, 2), shape.iter().copied().max().unwrap_or(0) as f64)?;
    let emb = CirculantEmbedding::new(model, &shape, cfg.synth.spacing)?;
    let field = emb.sample_seeded(cfg.seed);
    let mut bytes = Vec::with_capacity(8 * field.values.len());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let data = cfg.out.join("field.bin");
    let header = DumpHeader {
        data_file: "field.bin",
        dtype: "f64-le",
        layout: "row-major, last axis fastest",
        n: p.n,
        alpha: p.alpha,
        shape: &field.shape,
        spacing: field.spacing,
        origin: &field.origin,
        seed: cfg.seed,
        embedding_padding: emb.padding(),
        clamped_eigenvalues: emb.clamped_eigenvalues(),
        values: field.values.len(),
        software_version: env!("CARGO_PKG_VERSION"),
    };
    Ok(vec![write_bytes(&data, &bytes)?, write_json(&cfg.out.join("field.json"), &header)?])
}

/// `κ!`-scaled limit variance target and limit draws at each `t`.
fn limit_draws(
    cfg: &RunConfig,
    p: &ScalingParams,
    sampler: &LimitSampler,
    ts: &[f64],
    count: usize,
) -> Result<Vec<LimitRow>> {
    let seed = child_seed(cfg.seed, "limit-sample");
    let fact = (1..=p.kappa).product::<usize>() as f64;
    let mut rows = Vec::with_capacity(ts.len());
    let joint = if cfg.limit.gaussian_tail {
        None
    } else {
        Some(sampler.samples(ts, seed, count))
    };
    for (i, &t) in ts.iter().enumerate() {
        let mc = McBudget::new(cfg.limit.mc_samples, cfg.limit.mc_rel_tol, child_seed(cfg.seed, "limit-covariance"));
        let cov = limit_covariance(p, t, t, &mc)?;
        let target = fact * cov.estimate;
        let (draws, tail) = match &joint {
            Some(all) => (all[i].clone(), 0.0),
            None => sampler.samples_with_gaussian_tail(t, target, child_seed(seed, &format!("t={t}")), count),
        };
        rows.push(LimitRow {
            t,
            draws,
            limit_covariance: cov.estimate,
            limit_covariance_stderr: cov.stderr,
            expected_variance: target,
            discretized_variance: sampler.variance(t),
            tail_variance: tail,
        });
    }
    Ok(rows)
}

struct LimitRow {
    t: f64,
    draws: Vec<f64>,
    limit_covariance: f64,
    limit_covariance_stderr: f64,
    expected_variance: f64,
    discretized_variance: f64,
    tail_variance: f64,
}

#[derive(Serialize)]
struct PlotFit {
    n: usize,
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
    hurst_estimate: Option<f64>,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    hurst_target: f64,
}

fn scaling(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let exp = cfg.experiment()?;
    if cfg.scaling.compare_limit && exp.replicates < 500 {
        return Err(Error::Config(format!(
            "scaling.compare_limit needs at least 500 replicates, got {}",
            exp.replicates
        )));
    }
    let mut run = run_scaling(&exp)?;
    if cfg.scaling.compare_limit {
        let p = &exp.params;
        let sampler = LimitSampler::new(p, &cfg.limit_grid()?)?;
        let rows = limit_draws(cfg, p, &sampler, &exp.t_grid, cfg.limit.count)?;
        let pairs: Vec<(f64, Vec<f64>)> = rows.into_iter().map(|r| (r.t, r.draws)).collect();
        run.attach_limit_samples(&pairs)?;
    }
    let report = &run.report;
    let out = &cfg.out;
    let mut written = vec![
        write_json(&out.join("report.json"), report)?,
        write_text(&out.join("cells.csv"), &report.cells_csv().replace('\n', "\r\n"))?,
    ];
    written.extend(plot_data(out, report)?);
    Ok(written)
}

/// `log r` against `log Var` at `t = 1` plus the fitted line.
fn plot_data(out: &Path, report: &ExperimentReport) -> Result<Vec<PathBuf>> {
    let rows: Vec<_> = report.cells.iter().filter(|c| c.t == 1.0).collect();
    let x: Vec<f64> = rows.iter().map(|c| c.r.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|c| c.unnormalized_variance.ln()).collect();
    let fit = if y.iter().all(|v| v.is_finite()) { fit_line(&x, &y).ok() } else { None };
    let path = out.join("plot.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["r", "log_r", "log_variance", "fitted_log_variance"])
        .map_err(|e| csv_err(&path, e))?;
    for (c, (&lx, &ly)) in rows.iter().zip(x.iter().zip(&y)) {
        let fitted = fit.map(|f| (f.intercept + f.slope * lx).to_string()).unwrap_or_default();
        w.write_record([c.r.to_string(), lx.to_string(), ly.to_string(), fitted])
            .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    let n = report.params.n;
    let h = estimate_hurst(report, n).ok();
    let sidecar = PlotFit {
        n,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        r_squared: fit.map(|f| f.r_squared),
        hurst_estimate: h.as_ref().map(|h| h.estimate),
        ci_low: h.as_ref().map(|h| h.ci_low),
        ci_high: h.as_ref().map(|h| h.ci_high),
        hurst_target: report.hurst_target,
    };
    Ok(vec![path, write_json(&out.join("plot_fit.json"), &sidecar)?])
}

#[derive(Serialize)]
struct LimitSummaryRow {
    t: f64,
    count: usize,
    mean: f64,
    variance: f64,
    variance_stderr: f64,
    skewness: f64,
    excess_kurtosis: f64,
    discretized_variance: f64,
    tail_variance: f64,
    limit_covariance: f64,
    limit_covariance_stderr: f64,
    /// `κ!` times the covariance integral.
    expected_variance: f64,
    variance_z: f64,
    within_3_stderr: bool,
}

#[derive(Serialize)]
struct LimitSummary<'a> {
    params: &'a ScalingParams,
    validity_mode: &'a str,
    seed: u64,
    truncation_radius: f64,
    bins_per_axis: usize,
    excluded: &'a str,
    gaussian_tail: bool,
    rows: Vec<LimitSummaryRow>,
}

fn limit_sample(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = cfg.scaling_params()?;
    let grid = cfg.limit_grid()?;
    let sampler = LimitSampler::new(&p, &grid)?;
    p.validate(cfg.validity_mode)?;
    let ts = &cfg.limit.t_grid;
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Config("limit.t_grid must be non-empty with values in (0, 1]".into()));
    }
    if cfg.limit.count < 2 {
        return Err(Error::Config("limit.count must be at least 2".into()));
    }
    let rows = limit_draws(cfg, &p, &sampler, ts, cfg.limit.count)?;

    let path = cfg.out.join("samples.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["t", "index", "value"]).map_err(|e| csv_err(&path, e))?;
    for row in &rows {
        for (i, v) in row.draws.iter().enumerate() {
            w.write_record([row.t.to_string(), i.to_string(), v.to_string()])
                .map_err(|e| csv_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let summary_rows = rows
        .iter()
        .map(|r| {
            let m = moments(&r.draws);
            let se = variance_stderr(&r.draws);
            let fact = r.expected_variance / r.limit_covariance;
            let combined = (se * se + (fact * r.limit_covariance_stderr).powi(2)).sqrt();
            let z = (m.variance - r.expected_variance) / combined;
            LimitSummaryRow {
                t: r.t,
                count: m.count,
                mean: m.mean,
                variance: m.variance,
                variance_stderr: se,
                skewness: m.skewness,
                excess_kurtosis: m.excess_kurtosis,
                discretized_variance: r.discretized_variance,
                tail_variance: r.tail_variance,
                limit_covariance: r.limit_covariance,
                limit_covariance_stderr: r.limit_covariance_stderr,
                expected_variance: r.expected_variance,
                variance_z: z,
                within_3_stderr: z.abs() < 3.0,
            }
        })
        .collect();
    let summary = LimitSummary {
        params: &p,
        validity_mode: cfg.validity_mode.as_str(),
        seed: cfg.seed,
        truncation_radius: grid.truncation_radius,
        bins_per_axis: grid.bins_per_axis,
        excluded: grid.excluded(),
        gaussian_tail: cfg.limit.gaussian_tail,
        rows: summary_rows,
    };
    Ok(vec![path, write_json(&cfg.out.join("summary.json"), &summary)?])
}

fn integrability(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let sec = &cfg.integrability;
    if sec.windows.is_empty() || sec.exponents.is_empty() {
        return Err(Error::Config("integrability needs at least one window and one exponent".into()));
    }
    let windows = sec
        .windows
        .iter()
        .map(|s| config::parse_window(s).map(|w| (s.as_str(), w)))
        .collect::<Result<Vec<_>>>()?;
    let path = cfg.out.join("integrability.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "window",
        "n",
        "exponent",
        "hurst",
        "gamma",
        "classification",
        "fitted_power",
        "r_squared",
        "inner_integral",
    ])
    .map_err(|e| csv_err(&path, e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (name, win) in &windows {
        let n = win.dim();
        for &p in &sec.exponents {
            let hurst = 1.0 - p / (2.0 * n as f64);
            let (class, q, r2, inner) = match integrability_scan(win, p, &ScanSpec::for_window(win)) {
                Ok(r) => (r.classification.as_str(), r.fitted_power, r.r_squared, r.inner_integral),
                Err(Error::InconclusiveScan {
                    r_squared,
                    fitted_power,
                }) => {
                    log::warn!("{name} p = {p}: inconclusive tail fit (R^2 = {r_squared:.4})");
                    ("inconclusive", Some(fitted_power), Some(r_squared), None)
                }
                Err(e) => return Err(e),
            };
            if class == Classification::Boundary.as_str() {
                log::info!("{name} p = {p}: fitted power within the boundary band around -1");
            }
            w.write_record([
                name.to_string(),
                n.to_string(),
                p.to_string(),
                hurst.to_string(),
                win.gamma_lower_bound().to_string(),
                class.to_string(),
                opt(q),
                opt(r2),
                opt(inner),
            ])
            .map_err(|e| csv_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(vec![path])
}
