//! End-to-end scaling experiments: synthesis, pointwise Hermite transform,
//! spectral filter, window integration and normalization, plus the
//! statistical checks run on the resulting replicate table.
//!
//! One realization is drawn per replicate on a grid that covers the largest
//! window plus a guard margin. Every smaller window `Δ(r t^{1/n})` is nested
//! inside it, so all `(r, t)` integrals of a replicate come from one prefix
//! sum over the sites sorted by gauge.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{CirculantEmbedding, CovarianceModel, LatticeField};
use crate::filters::{guard_margin_cells_with, default_guard_fraction, DcTreatment, FilterSpec, SpectralFilter};
use crate::hermite::{self, hermite_unchecked, MAX_DEGREE};
use crate::limit::{ScalingParams, ValidityMode};
use crate::seed::{child_seed, stream_rng};
use crate::stats::{self, fit_line, ks_critical_5pct, ks_two_sample, pearson, Moments, RunningStats};
use crate::windows::{inside, GridSpec};

/// What is applied to the field before filtering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `H_κ(ξ)` with `κ = params.kappa`.
    PureHermite,
    /// `S(ξ) − C₀` for the polynomial `S(x) = Σ coeffs[k] x^k`, whose Hermite
    /// rank must equal both `expected_rank` and `params.kappa`.
    General { coeffs: Vec<f64>, expected_rank: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingExperimentConfig {
    pub params: ScalingParams,
    pub functional: Functional,
    pub radii: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub replicates: usize,
    pub base_seed: u64,
    pub spacing: f64,
    /// Width of the Gaussian taper `g(u) = exp(−u²/2σ²)`.
    pub filter_sigma: f64,
    /// Off only for `β = 0`: integrate the transformed field directly.
    pub filtered: bool,
    /// Guard margin per side as a share of the largest window's width;
    /// `None` picks [`default_guard_fraction`].
    pub guard_fraction: Option<f64>,
    pub validity_mode: ValidityMode,
    pub memory_budget_mb: Option<u64>,
}

impl ScalingExperimentConfig {
    /// Unit spacing, `σ = 1`, filtered, window mode, no memory cap.
    pub fn new(params: ScalingParams, radii: Vec<f64>, t_grid: Vec<f64>, replicates: usize, base_seed: u64) -> Self {
        Self {
            params,
            functional: Functional::PureHermite,
            radii,
            t_grid,
            replicates,
            base_seed,
            spacing: 1.0,
            filter_sigma: 1.0,
            filtered: true,
            guard_fraction: None,
            validity_mode: ValidityMode::Window,
            memory_budget_mb: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate(self.validity_mode)?;
        if self.radii.len() < 3 {
            return Err(Error::Config(format!("need at least 3 radii, got {}", self.radii.len())));
        }
        if self.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::Config("radii must be positive".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("radii must be strictly increasing".into()));
        }
        check_t_grid(&self.t_grid)?;
        if self.replicates < 30 {
            return Err(Error::Config(format!("need at least 30 replicates, got {}", self.replicates)));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::Config("spacing must be positive".into()));
        }
        if !(self.filter_sigma > 0.0 && self.filter_sigma.is_finite()) {
            return Err(Error::Config("filter_sigma must be positive".into()));
        }
        if self.guard_fraction.is_some_and(|f| !(f >= 0.0 && f.is_finite())) {
            return Err(Error::Config("guard_fraction must be non-negative".into()));
        }
        if !self.filtered && self.params.beta != 0.0 {
            return Err(Error::Config("an unfiltered run requires beta = 0".into()));
        }
        if let Functional::General { expected_rank, .. } = &self.functional {
            if *expected_rank != self.params.kappa {
                return Err(Error::Config(format!(
                    "functional rank {expected_rank} differs from params.kappa = {}",
                    self.params.kappa
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Config("t_grid is empty".into()));
    }
    if t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::Config("t values must lie in (0, 1]".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub r: f64,
    pub t: f64,
    pub count: usize,
    /// Statistics of the normalized functional.
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub variance_stderr: f64,
    pub unnormalized_mean: f64,
    pub unnormalized_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub slope: f64,
    pub slope_r2: f64,
    pub radii: usize,
    pub min_count: usize,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsStat {
    pub r: f64,
    pub t: f64,
    pub ks_distance: f64,
    pub critical_5pct: f64,
    pub empirical_count: usize,
    pub limit_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub r: f64,
    pub t: f64,
    #[serde(flatten)]
    pub moments: Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub base_seed: u64,
    pub validity_mode: String,
    pub admissible_modes: Vec<String>,
    pub software_version: String,
    pub dc_treatment: String,
    pub embedding_padding: usize,
    pub grid_shape: Vec<usize>,
    pub guard_margin_cells: usize,
    pub normalization: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub provenance: Provenance,
    pub params: ScalingParams,
    pub hurst_target: f64,
    pub cells: Vec<CellStats>,
    pub hurst_estimate: Option<HurstEstimate>,
    pub slope_r2: Option<f64>,
    pub ks_stats: Vec<KsStat>,
    pub moments: Vec<MomentRow>,
}

impl ExperimentReport {
    pub fn cell(&self, r: f64, t: f64) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.r == r && c.t == t)
    }

    /// CSV with columns `r,t,replicate_count,mean,variance,stderr`.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("r,t,replicate_count,mean,variance,stderr\n");
        for c in &self.cells {
            out.push_str(&format!("{},{},{},{:e},{:e},{:e}\n", c.r, c.t, c.count, c.mean, c.variance, c.stderr));
        }
        out
    }
}

/// Per-replicate values, indexed `[radius][t][replicate]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSamples {
    pub radii: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub normalized: Vec<Vec<Vec<f64>>>,
    pub unnormalized: Vec<Vec<Vec<f64>>>,
}

impl ScalingSamples {
    pub fn normalized_at(&self, r: f64, t: f64) -> Option<&[f64]> {
        let i = self.radii.iter().position(|&x| x == r)?;
        let j = self.t_grid.iter().position(|&x| x == t)?;
        Some(&self.normalized[i][j])
    }
}

#[derive(Debug, Clone)]
pub struct ScalingRun {
    pub report: ExperimentReport,
    pub samples: ScalingSamples,
}

impl ScalingRun {
    /// Fills `ks_stats` at the largest radius with distances to limit draws
    /// given per `t`; `t` values without draws are skipped.
    pub fn attach_limit_samples(&mut self, limit: &[(f64, Vec<f64>)]) -> Result<()> {
        let r = *self.samples.radii.last().unwrap();
        self.report.ks_stats.clear();
        for (t, draws) in limit {
            let Some(emp) = self.samples.normalized_at(r, *t) else {
                continue;
            };
            let cmp = distribution_compare(emp, draws)?;
            self.report.ks_stats.push(KsStat {
                r,
                t: *t,
                ks_distance: cmp.ks_distance,
                critical_5pct: cmp.critical_5pct,
                empirical_count: emp.len(),
                limit_count: draws.len(),
            });
        }
        Ok(())
    }
}

/// The pointwise map applied before filtering.
#[derive(Debug, Clone)]
enum Transform {
    Hermite(usize),
    Polynomial { coeffs: Vec<f64>, c0: f64 },
}

impl Transform {
    fn resolve(functional: &Functional, kappa: usize) -> Result<Self> {
        match functional {
            Functional::PureHermite => {
                if kappa > MAX_DEGREE {
                    return Err(Error::UnsupportedDegree {
                        degree: kappa,
                        max: MAX_DEGREE,
                    });
                }
                Ok(Transform::Hermite(kappa))
            }
            Functional::General { coeffs, expected_rank } => {
                let poly = coeffs.clone();
                let (exp, rank) = expand_checked(move |x| horner(&poly, x), coeffs.len().max(*expected_rank + 1))?;
                if rank != *expected_rank {
                    return Err(Error::contract(format!(
                        "functional has Hermite rank {rank}, expected {expected_rank}"
                    )));
                }
                Ok(Transform::Polynomial {
                    coeffs: coeffs.clone(),
                    c0: exp.coeffs[0],
                })
            }
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Hermite(k) => hermite_unchecked(*k, x),
            Transform::Polynomial { coeffs, c0 } => horner(coeffs, x) - c0,
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn expand_checked<F: Fn(f64) -> f64>(s: F, min_degree: usize) -> Result<(hermite::HermiteExpansion, usize)> {
    let degree = (min_degree + 2).clamp(8, MAX_DEGREE);
    let exp = hermite::expand(s, degree, hermite::DEFAULT_QUAD_NODES)?;
    let rank = hermite::hermite_rank(&exp, hermite::DEFAULT_RANK_TOLERANCE)?;
    Ok((exp, rank))
}

/// Lattice layout shared by every replicate of a run.
struct Plan {
    grid: GridSpec,
    margin: usize,
    /// Flat indices of sites inside the largest window, by increasing gauge.
    order: Vec<usize>,
    /// `cutoffs[i][j]`: number of leading `order` entries inside
    /// `Δ(r_i t_j^{1/n})`.
    cutoffs: Vec<Vec<usize>>,
    cell_volume: f64,
}

impl Plan {
    fn new(p: &ScalingParams, radii: &[f64], t_grid: &[f64], spacing: f64, margin_for: impl Fn(usize) -> usize) -> Result<Self> {
        let w = &p.window;
        let big = *radii.last().unwrap();
        let (lo, hi) = w.extent(big);
        let below = (-lo / spacing - 1e-9).ceil().max(0.0) as usize;
        let above = (hi / spacing - 1e-9).ceil().max(0.0) as usize;
        let window_cells = below + above + 1;
        let margin = margin_for(window_cells);
        let shape = vec![window_cells + 2 * margin; p.n];
        let grid = GridSpec {
            shape,
            spacing,
            origin: vec![margin + below; p.n],
        };
        grid.check_covers(w, big)?;
        let gauges = grid.gauges(w);
        let mut order: Vec<usize> = (0..gauges.len()).filter(|&i| inside(gauges[i], big)).collect();
        order.sort_by(|&a, &b| gauges[a].total_cmp(&gauges[b]).then(a.cmp(&b)));
        let nf = p.n as f64;
        let cutoffs = radii
            .iter()
            .map(|&r| {
                t_grid
                    .iter()
                    .map(|&t| {
                        let rho = r * t.powf(1.0 / nf);
                        order.partition_point(|&i| inside(gauges[i], rho))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            grid,
            margin,
            order,
            cutoffs,
            cell_volume: spacing.powi(p.n as i32),
        })
    }

    /// Riemann sums of `values` over every nested window.
    fn integrate(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let mut needed: Vec<usize> = self.cutoffs.iter().flatten().copied().collect();
        needed.sort_unstable();
        needed.dedup();
        let mut partial = Vec::with_capacity(needed.len());
        let mut acc = 0.0;
        let mut k = 0;
        for &c in &needed {
            while k < c {
                acc += values[self.order[k]];
                k += 1;
            }
            partial.push(acc);
        }
        self.cutoffs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| self.cell_volume * partial[needed.binary_search(c).unwrap()])
                    .collect()
            })
            .collect()
    }

    fn sites(&self) -> usize {
        self.grid.len()
    }
}

fn memory_check(budget_mb: Option<u64>, radius: f64, plan: &Plan, padding: usize) -> Result<()> {
    let Some(budget_mb) = budget_mb else {
        return Ok(());
    };
    let m = plan.sites() as u64;
    let ext = m * (padding as u64).pow(plan.grid.shape.len() as u32);
    let fixed = 8 * ext + 24 * m;
    let per_replicate = CirculantEmbedding::working_bytes(&plan.grid.shape, padding) + 40 * m;
    let needed = fixed + rayon::current_num_threads() as u64 * per_replicate;
    let needed_mb = needed.div_ceil(1 << 20);
    if needed_mb > budget_mb {
        return Err(Error::MemoryBudget {
            radius,
            needed_mb,
            budget_mb,
        });
    }
    Ok(())
}

/// Runs the full pipeline with circulant-embedding synthesis.
pub fn run_scaling(cfg: &ScalingExperimentConfig) -> Result<ScalingRun> {
    cfg.validate()?;
    let p = &cfg.params;
    let (plan, filter) = build_plan(cfg)?;
    let big = *cfg.radii.last().unwrap();
    memory_check(cfg.memory_budget_mb, big, &plan, 2)?;
    let embedding = CirculantEmbedding::new(CovarianceModel::new(p.n, p.alpha)?, &plan.grid.shape, cfg.spacing)?;
    memory_check(cfg.memory_budget_mb, big, &plan, embedding.padding())?;
    let seed = child_seed(cfg.base_seed, "pipeline");
    let padding = embedding.padding();
    run_planned(cfg, plan, filter, padding, |grid, rep| {
        let mut f = embedding.sample(&mut stream_rng(seed, rep));
        f.origin = grid.origin.clone();
        f
    })
}

/// Same pipeline with the field drawn from `source(grid, replicate)`, which
/// must return a field on `grid`. Used to test the plumbing with fields of
/// known content.
pub fn run_scaling_with_source<F>(cfg: &ScalingExperimentConfig, source: F) -> Result<ScalingRun>
where
    F: Fn(&GridSpec, u64) -> LatticeField + Sync,
{
    cfg.validate()?;
    let (plan, filter) = build_plan(cfg)?;
    memory_check(cfg.memory_budget_mb, *cfg.radii.last().unwrap(), &plan, 2)?;
    run_planned(cfg, plan, filter, 0, source)
}

fn build_plan(cfg: &ScalingExperimentConfig) -> Result<(Plan, Option<SpectralFilter>)> {
    let p = &cfg.params;
    let spec = FilterSpec::new(p.n, p.beta, p.h1, cfg.filter_sigma)?;
    let plan = Plan::new(p, &cfg.radii, &cfg.t_grid, cfg.spacing, |cells| {
        if cfg.filtered {
            guard_margin_cells_with(&spec, cfg.spacing, cells, cfg.guard_fraction.unwrap_or(default_guard_fraction(&spec)))
        } else {
            0
        }
    })?;
    let filter = if cfg.filtered {
        Some(SpectralFilter::new(spec, &plan.grid.shape, cfg.spacing)?)
    } else {
        None
    };
    Ok((plan, filter))
}

fn run_planned<F>(
    cfg: &ScalingExperimentConfig,
    plan: Plan,
    filter: Option<SpectralFilter>,
    padding: usize,
    source: F,
) -> Result<ScalingRun>
where
    F: Fn(&GridSpec, u64) -> LatticeField + Sync,
{
    let p = &cfg.params;
    let transform = Transform::resolve(&cfg.functional, p.kappa)?;
    let per_replicate: Vec<Vec<Vec<f64>>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Vec<f64>>> {
            let field = source(&plan.grid, rep);
            if field.shape != plan.grid.shape {
                return Err(Error::contract("field source returned a field of the wrong shape"));
            }
            let mut v = field.map(|x| transform.apply(x));
            if let Some(filter) = &filter {
                v = filter.apply(&v)?;
            }
            Ok(plan.integrate(&v.values))
        })
        .collect::<Result<_>>()?;

    let (nr, nt) = (cfg.radii.len(), cfg.t_grid.len());
    let mut unnormalized = vec![vec![Vec::with_capacity(cfg.replicates); nt]; nr];
    let mut normalized = unnormalized.clone();
    for rep in &per_replicate {
        for (i, &r) in cfg.radii.iter().enumerate() {
            let scale = p.pipeline_normalization(r);
            for j in 0..nt {
                unnormalized[i][j].push(rep[i][j]);
                normalized[i][j].push(scale * rep[i][j]);
            }
        }
    }

    let mut cells = Vec::with_capacity(nr * nt);
    let mut moment_rows = Vec::with_capacity(nr * nt);
    for (i, &r) in cfg.radii.iter().enumerate() {
        for (j, &t) in cfg.t_grid.iter().enumerate() {
            let xs = &normalized[i][j];
            let s: RunningStats = xs.iter().copied().collect();
            let u: RunningStats = unnormalized[i][j].iter().copied().collect();
            cells.push(CellStats {
                r,
                t,
                count: s.count as usize,
                mean: s.mean,
                variance: s.variance(),
                stderr: s.stderr(),
                variance_stderr: stats::variance_stderr(xs),
                unnormalized_mean: u.mean,
                unnormalized_variance: u.variance(),
            });
            moment_rows.push(MomentRow {
                r,
                t,
                moments: stats::moments(xs),
            });
        }
    }

    let spec = filter.as_ref().map(|f| *f.spec());
    let dc = match spec.map(|s| s.dc_treatment()) {
        Some(DcTreatment::Multiplied) => "multiplied",
        Some(DcTreatment::Annihilated) => "annihilated",
        None => "unfiltered",
    };
    let provenance = Provenance {
        config_hash: cfg.hash(),
        base_seed: cfg.base_seed,
        validity_mode: cfg.validity_mode.as_str().to_string(),
        admissible_modes: p.admissible_modes().iter().map(|m| m.as_str().to_string()).collect(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        dc_treatment: dc.to_string(),
        embedding_padding: padding,
        grid_shape: plan.grid.shape.clone(),
        guard_margin_cells: plan.margin,
        normalization: "r^(beta + kappa*alpha/2 - n) / (c1^(kappa/2) g(0) h(1)); variance tends to kappa! times the limit covariance"
            .to_string(),
    };
    let mut report = ExperimentReport {
        provenance,
        params: *p,
        hurst_target: p.hurst_unchecked(),
        cells,
        hurst_estimate: None,
        slope_r2: None,
        ks_stats: Vec::new(),
        moments: moment_rows,
    };
    if cfg.t_grid.contains(&1.0) {
        match estimate_hurst(&report, p.n) {
            Ok(h) => {
                report.slope_r2 = Some(h.slope_r2);
                report.hurst_estimate = Some(h);
            }
            Err(e) => log::warn!("no Hurst estimate: {e}"),
        }
    }
    Ok(ScalingRun {
        report,
        samples: ScalingSamples {
            radii: cfg.radii.clone(),
            t_grid: cfg.t_grid.clone(),
            normalized,
            unnormalized,
        },
    })
}

/// Slope of `log Var` (unnormalized, `t = 1`) against `log r`, divided by
/// `2n`, with the regression 95% interval.
pub fn estimate_hurst(report: &ExperimentReport, n: usize) -> Result<HurstEstimate> {
    let rows: Vec<&CellStats> = report.cells.iter().filter(|c| c.t == 1.0).collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientDesign(format!(
            "need at least 3 radii at t = 1, got {}",
            rows.len()
        )));
    }
    let min_count = rows.iter().map(|c| c.count).min().unwrap();
    if min_count < 30 {
        return Err(Error::InsufficientDesign(format!(
            "need at least 30 replicates per radius, got {min_count}"
        )));
    }
    if rows.iter().any(|c| !(c.unnormalized_variance > 0.0)) {
        return Err(Error::InsufficientDesign("a radius has zero variance".into()));
    }
    let x: Vec<f64> = rows.iter().map(|c| c.r.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|c| c.unnormalized_variance.ln()).collect();
    let fit = fit_line(&x, &y)?;
    let scale = 2.0 * n as f64;
    let (lo, hi) = fit.slope_interval(0.95);
    let estimate = fit.slope / scale;
    let gamma = report.params.window.gamma_lower_bound();
    let warning = (!(estimate > gamma && estimate < 1.0)).then(|| {
        format!("implausible estimate {estimate:.4}: H must lie in ({gamma}, 1) for this window")
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(HurstEstimate {
        estimate,
        ci_low: lo / scale,
        ci_high: hi / scale,
        slope: fit.slope,
        slope_r2: fit.r_squared,
        radii: rows.len(),
        min_count,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub t: f64,
    pub ratio: f64,
    pub target: f64,
    /// Delta-method error from the two variance errors, correlation ignored.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarity {
    pub r: f64,
    pub max_deviation: f64,
    pub rows: Vec<RatioRow>,
}

/// `max_t |Var(t)/Var(1) − t^{2H}|` at the largest radius.
pub fn self_similarity_check(report: &ExperimentReport, h: f64) -> Result<SelfSimilarity> {
    let r = report
        .cells
        .iter()
        .map(|c| c.r)
        .fold(f64::NEG_INFINITY, f64::max);
    let one = report
        .cell(r, 1.0)
        .ok_or_else(|| Error::contract("self-similarity needs t = 1 in the grid"))?;
    let mut rows = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for c in report.cells.iter().filter(|c| c.r == r && c.t != 1.0) {
        let ratio = c.variance / one.variance;
        let target = c.t.powf(2.0 * h);
        let rel = ((c.variance_stderr / c.variance).powi(2) + (one.variance_stderr / one.variance).powi(2)).sqrt();
        max_deviation = max_deviation.max((ratio - target).abs());
        rows.push(RatioRow {
            t: c.t,
            ratio,
            target,
            stderr: ratio * rel,
        });
    }
    Ok(SelfSimilarity { r, max_deviation, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentGaps {
    /// Difference of means in units of the pooled standard deviation.
    pub mean: f64,
    /// `Var_a / Var_b − 1`.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionComparison {
    pub ks_distance: f64,
    pub critical_5pct: f64,
    pub moment_gaps: MomentGaps,
    pub empirical: Moments,
    pub limit: Moments,
}

/// Two-sample KS distance after each sample is standardized by its own mean
/// and standard deviation, plus the gaps of the first four moments.
pub fn distribution_compare(empirical: &[f64], limit: &[f64]) -> Result<DistributionComparison> {
    if empirical.len() < 500 || limit.len() < 500 {
        return Err(Error::contract(format!(
            "distribution comparison needs at least 500 samples each, got {} and {}",
            empirical.len(),
            limit.len()
        )));
    }
    let a = stats::moments(empirical);
    let b = stats::moments(limit);
    if !(a.variance > 0.0) || !(b.variance > 0.0) {
        return Err(Error::contract("degenerate sample with zero variance"));
    }
    let standardize = |xs: &[f64], m: &Moments| -> Vec<f64> {
        let sd = m.variance.sqrt();
        xs.iter().map(|x| (x - m.mean) / sd).collect()
    };
    let ks_distance = ks_two_sample(&standardize(empirical, &a), &standardize(limit, &b));
    let pooled = (0.5 * (a.variance + b.variance)).sqrt();
    Ok(DistributionComparison {
        ks_distance,
        critical_5pct: ks_critical_5pct(empirical.len(), limit.len()),
        moment_gaps: MomentGaps {
            mean: (a.mean - b.mean) / pooled,
            variance: a.variance / b.variance - 1.0,
            skewness: a.skewness - b.skewness,
            excess_kurtosis: a.excess_kurtosis - b.excess_kurtosis,
        },
        empirical: a,
        limit: b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub r: f64,
    pub replicates: usize,
    pub kappa: usize,
    pub correlation: f64,
    pub c0: f64,
    pub c_kappa: f64,
    /// Normalized `∫(S − C₀)(ξ)` per replicate.
    pub full: Vec<f64>,
    /// Normalized `(C_κ/κ!) ∫H_κ(ξ)` per replicate.
    pub rank_term: Vec<f64>,
}

/// Correlation across replicates between the unfiltered functional of
/// `S − C₀` and its leading Hermite term over `Δ(r)`, both computed from the
/// same realization. `p.beta` is not used; spacing is one lattice unit.
pub fn reduction_check<S>(s: S, p: &ScalingParams, r: f64, replicates: usize, seed: u64) -> Result<ReductionCheck>
where
    S: Fn(f64) -> f64 + Sync,
{
    p.check_domain()?;
    if !(r > 0.0) {
        return Err(Error::contract("radius must be positive"));
    }
    if replicates < 2 {
        return Err(Error::contract("need at least 2 replicates"));
    }
    let (exp, rank) = expand_checked(&s, p.kappa + 1)?;
    if rank != p.kappa {
        return Err(Error::contract(format!(
            "functional has Hermite rank {rank} but params.kappa = {}",
            p.kappa
        )));
    }
    let c0 = exp.coeffs[0];
    let c_kappa = exp.coeffs[p.kappa];
    let weight = exp.leading_weight(p.kappa);
    let plan = Plan::new(p, &[r], &[1.0], 1.0, |_| 0)?;
    let embedding = CirculantEmbedding::new(CovarianceModel::new(p.n, p.alpha)?, &plan.grid.shape, 1.0)?;
    let seed = child_seed(seed, "reduction");
    let k = p.kappa as f64;
    let scale = r.powf(0.5 * k * p.alpha - p.n as f64) / crate::field::c1(p.n, p.alpha).powf(0.5 * k);
    let pairs: Vec<(f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let f = embedding.sample(&mut stream_rng(seed, rep));
            let full = f.map(|x| s(x) - c0);
            let term = f.map(|x| weight * hermite_unchecked(p.kappa, x));
            (
                scale * plan.integrate(&full.values)[0][0],
                scale * plan.integrate(&term.values)[0][0],
            )
        })
        .collect();
    let (full, rank_term): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let correlation = pearson(&full, &rank_term)?;
    Ok(ReductionCheck {
        r,
        replicates,
        kappa: p.kappa,
        correlation,
        c0,
        c_kappa,
        full,
        rank_term,
    })
}
