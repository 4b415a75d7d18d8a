//! Direct samplers of `X_κ(t)` for κ ∈ {1, 2} from a discretized white
//! noise on a symmetric frequency grid.
//!
//! The grid has `M` (even) cells per axis of width `w = 2Λ/M`, centred at
//! `(k + ½)w − Λ`, so no centre sits at the origin and every cell has a
//! distinct mirror image. Noise is drawn per mirror pair: `Z_c = (u + iv)/√2`
//! and `Z_{−c} = conj(Z_c)`. Cell weights are exact integrals of the singular
//! power over the cell, which keeps the cells adjacent to the origin honest.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::params::ScalingParams;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::seed::stream_rng;

/// Largest real dimension of the rank-2 quadratic form.
pub const MAX_FORM_DIM: usize = 4096;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalTreatment {
    /// Pairs with `λ_j = ±λ_k` are dropped.
    #[default]
    Excluded,
    /// Those pairs are kept as Wick products `Z_j² ` and `|Z_j|² − 1`.
    Wick,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSampleGrid {
    pub truncation_radius: f64,
    pub bins_per_axis: usize,
    #[serde(default)]
    pub diagonal: DiagonalTreatment,
}

impl LimitSampleGrid {
    pub fn new(truncation_radius: f64, bins_per_axis: usize) -> Result<Self> {
        if !(truncation_radius > 0.0) {
            return Err(Error::Config("truncation radius must be positive".into()));
        }
        if bins_per_axis < 2 || bins_per_axis % 2 != 0 {
            return Err(Error::Config(format!(
                "bins per axis must be even and at least 2 (got {bins_per_axis})"
            )));
        }
        Ok(Self {
            truncation_radius,
            bins_per_axis,
            diagonal: DiagonalTreatment::Excluded,
        })
    }

    pub fn with_diagonal(mut self, diagonal: DiagonalTreatment) -> Self {
        self.diagonal = diagonal;
        self
    }

    pub fn width(&self) -> f64 {
        2.0 * self.truncation_radius / self.bins_per_axis as f64
    }

    /// Description of the cells left out of the rank-2 form.
    pub fn excluded(&self) -> &'static str {
        match self.diagonal {
            DiagonalTreatment::Excluded => "index pairs (j, k) with lambda_j = lambda_k or lambda_j = -lambda_k",
            DiagonalTreatment::Wick => "none; pairs with lambda_j = +-lambda_k enter as Wick products",
        }
    }
}

/// One representative of each mirror pair: centre and lower corner.
struct Cells {
    centres: Vec<Vec<f64>>,
    corners: Vec<Vec<f64>>,
}

fn representative_cells(n: usize, grid: &LimitSampleGrid) -> Cells {
    let m = grid.bins_per_axis;
    let w = grid.width();
    let lam = grid.truncation_radius;
    let total = m.pow(n as u32);
    let mut centres = Vec::new();
    let mut corners = Vec::new();
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..n).rev() {
            idx[axis] = rem % m;
            rem /= m;
        }
        let mirror = idx.iter().fold(0usize, |acc, &i| acc * m + (m - 1 - i));
        if flat < mirror {
            corners.push(idx.iter().map(|&i| i as f64 * w - lam).collect());
            centres.push(idx.iter().map(|&i| (i as f64 + 0.5) * w - lam).collect());
        }
    }
    Cells { centres, corners }
}

/// `∫_cell ‖λ‖^q dλ` over the cube `[lo, lo + w]ⁿ`.
fn cell_integral(lo: &[f64], w: f64, q: f64, rule: &GaussLegendre) -> f64 {
    let n = lo.len();
    if n == 1 {
        let (a, b) = (lo[0], lo[0] + w);
        let e = q + 1.0;
        return if a >= 0.0 {
            (b.powf(e) - a.powf(e)) / e
        } else if b <= 0.0 {
            ((-a).powf(e) - (-b).powf(e)) / e
        } else {
            (b.powf(e) + (-a).powf(e)) / e
        };
    }
    let touches_origin = lo.iter().all(|&v| v.abs() < 1e-12 * w || (v + w).abs() < 1e-12 * w);
    if touches_origin {
        // split the cube by its largest coordinate and map each pyramid to
        // s · (1, v), which factors out s^{q+n−1}
        let m = n - 1;
        let mut j = 0.0;
        let mut idx = vec![0usize; m];
        let k = rule.order();
        for flat in 0..k.pow(m as u32) {
            let mut rem = flat;
            for slot in idx.iter_mut() {
                *slot = rem % k;
                rem /= k;
            }
            let mut wt = 1.0;
            let mut s2 = 1.0;
            for &i in &idx {
                let v = 0.5 * (rule.nodes()[i] + 1.0);
                wt *= 0.5 * rule.weights()[i];
                s2 += v * v;
            }
            j += wt * s2.powf(0.5 * q);
        }
        return n as f64 * w.powf(q + n as f64) / (q + n as f64) * j;
    }
    let k = rule.order();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    for flat in 0..k.pow(n as u32) {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = rem % k;
            rem /= k;
        }
        let mut wt = 1.0;
        let mut r2 = 0.0;
        for (axis, &i) in idx.iter().enumerate() {
            let x = lo[axis] + 0.5 * w * (rule.nodes()[i] + 1.0);
            wt *= 0.5 * w * rule.weights()[i];
            r2 += x * x;
        }
        total += wt * r2.powf(0.5 * q);
    }
    total
}

/// Calls `visit(λ, weight)` on quadrature nodes for `∫_cell f(λ) ‖λ‖^q dλ`.
/// Cells with a corner at the origin are split into pyramids by their largest
/// coordinate (as in [`cell_integral`]) and the radial variable is resolved
/// with dyadic panels toward the singularity.
fn visit_cell(lo: &[f64], w: f64, q: f64, rule: &GaussLegendre, visit: &mut dyn FnMut(&[f64], f64)) {
    let n = lo.len();
    let k = rule.order();
    let mut x = vec![0.0; n];
    let touches_origin = lo.iter().all(|&v| v.abs() < 1e-12 * w || (v + w).abs() < 1e-12 * w);
    if !touches_origin {
        let mut idx = vec![0usize; n];
        for flat in 0..k.pow(n as u32) {
            let mut rem = flat;
            for slot in idx.iter_mut() {
                *slot = rem % k;
                rem /= k;
            }
            let mut wt = 1.0;
            let mut r2 = 0.0;
            for (axis, &i) in idx.iter().enumerate() {
                x[axis] = lo[axis] + 0.5 * w * (rule.nodes()[i] + 1.0);
                wt *= 0.5 * w * rule.weights()[i];
                r2 += x[axis] * x[axis];
            }
            visit(&x, wt * r2.powf(0.5 * q));
        }
        return;
    }
    let sign: Vec<f64> = lo.iter().map(|&v| if v.abs() < 1e-12 * w { 1.0 } else { -1.0 }).collect();
    let e = q + n as f64;
    let levels = ((17.0 * std::f64::consts::LOG2_10 / e).ceil() as usize).clamp(8, 4000);
    let m = n - 1;
    let mut idx = vec![0usize; m];
    let mut v = vec![0.0; m];
    for j in 0..n {
        for flat in 0..k.pow(m as u32) {
            let mut rem = flat;
            for slot in idx.iter_mut() {
                *slot = rem % k;
                rem /= k;
            }
            let mut wv = 1.0;
            let mut s2 = 1.0;
            for (vi, &i) in v.iter_mut().zip(&idx) {
                *vi = 0.5 * (rule.nodes()[i] + 1.0);
                wv *= 0.5 * rule.weights()[i];
                s2 += *vi * *vi;
            }
            wv *= s2.powf(0.5 * q);
            let place = |s: f64, x: &mut [f64]| {
                let mut c = 0;
                for axis in 0..n {
                    let u = if axis == j {
                        1.0
                    } else {
                        c += 1;
                        v[c - 1]
                    };
                    x[axis] = sign[axis] * s * u;
                }
            };
            let mut hi = w;
            for _ in 0..levels {
                let lo_s = 0.5 * hi;
                for (s, ws) in rule.mapped(lo_s, hi) {
                    place(s, &mut x);
                    visit(&x, wv * ws * s.powf(e - 1.0));
                }
                hi = lo_s;
            }
            place(0.0, &mut x);
            visit(&x, wv * hi.powf(e) / e);
        }
    }
}

/// Prepared sampler for one parameter set and grid.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    p: ScalingParams,
    grid: LimitSampleGrid,
    centres: Vec<Vec<f64>>,
    corners: Vec<Vec<f64>>,
    sqrt_weights: Vec<f64>,
    /// Root mean of `‖λ_j + λ_k‖^{2β}` over a cell and its mirror image.
    antidiagonal_norm: f64,
}

impl LimitSampler {
    pub fn new(p: &ScalingParams, grid: &LimitSampleGrid) -> Result<Self> {
        p.check_domain()?;
        if p.kappa == 0 || p.kappa > 2 {
            return Err(Error::UnsupportedRank(p.kappa));
        }
        let cells = representative_cells(p.n, grid);
        if p.kappa == 2 && 2 * cells.centres.len() > MAX_FORM_DIM {
            return Err(Error::InsufficientDesign(format!(
                "rank-2 form of dimension {} exceeds the cap {MAX_FORM_DIM}; use fewer bins",
                2 * cells.centres.len()
            )));
        }
        let nf = p.n as f64;
        // rank 1 folds ‖λ‖^{2β} into the cell weight
        let q = if p.kappa == 1 { p.exponent() - nf } else { p.alpha - nf };
        let rule = GaussLegendre::new(if p.n == 1 { 1 } else { 8 });
        let w = grid.width();
        let sqrt_weights = cells
            .corners
            .iter()
            .map(|lo| cell_integral(lo, w, q, &rule).sqrt())
            .collect();
        Ok(Self {
            p: *p,
            grid: *grid,
            centres: cells.centres,
            corners: cells.corners,
            sqrt_weights,
            antidiagonal_norm: antidiagonal_norm(p.n, w, p.beta),
        })
    }

    pub fn grid(&self) -> &LimitSampleGrid {
        &self.grid
    }

    fn k_at(&self, lambda: &[f64], t: f64) -> Complex64 {
        let s = t.powf(1.0 / self.p.n as f64);
        let x: Vec<f64> = lambda.iter().map(|v| v * s).collect();
        self.p.window.k_delta(&x)
    }

    /// Rank-1 coefficients `(√2 Re A_c, −√2 Im A_c)` against `(u_c, v_c)`.
    ///
    /// `|A_c|² = ∫_cell |K_Δ(λ t^{1/n})|² ‖λ‖^{2β+α−n} dλ`, so each marginal
    /// variance is the truncated integral itself rather than a centre-point
    /// value; the phase is that of the weighted cell mean of `K_Δ`.
    fn linear_coefficients(&self, t: f64) -> Vec<(f64, f64)> {
        let q = self.p.exponent() - self.p.n as f64;
        let rule = GaussLegendre::new(8);
        let w = self.grid.width();
        let scale = t.powf(1.0 / self.p.n as f64);
        self.corners
            .par_iter()
            .map(|lo| {
                let mut energy = 0.0;
                let mut mean = Complex64::new(0.0, 0.0);
                let mut x = vec![0.0; lo.len()];
                visit_cell(lo, w, q, &rule, &mut |lam, wt| {
                    for (xi, li) in x.iter_mut().zip(lam) {
                        *xi = li * scale;
                    }
                    let k = self.p.window.k_delta(&x);
                    energy += wt * k.norm_sqr();
                    mean += k * wt;
                });
                let phase = if mean.norm() > 0.0 { mean / mean.norm() } else { Complex64::new(1.0, 0.0) };
                let a = phase * energy.sqrt();
                (std::f64::consts::SQRT_2 * a.re, -std::f64::consts::SQRT_2 * a.im)
            })
            .collect()
    }

    /// Real symmetric matrix `S_t` with `X(t) = t · wᵀ S_t w`, `w ~ N(0, I)`.
    pub fn quadratic_form(&self, t: f64) -> DMatrix<f64> {
        let pcount = self.centres.len();
        let n = self.p.n;
        let mut s = DMatrix::<f64>::zeros(2 * pcount, 2 * pcount);
        let mut sum = vec![0.0; n];
        let mut diff = vec![0.0; n];
        for c in 0..pcount {
            for d in (c + 1)..pcount {
                for i in 0..n {
                    sum[i] = self.centres[c][i] + self.centres[d][i];
                    diff[i] = self.centres[c][i] - self.centres[d][i];
                }
                let wcd = self.sqrt_weights[c] * self.sqrt_weights[d];
                let a = self.k_at(&sum, t) * (super::covariance::norm(&sum).powf(self.p.beta) * wcd);
                let b = self.k_at(&diff, t) * (super::covariance::norm(&diff).powf(self.p.beta) * wcd);
                let (uc, vc, ud, vd) = (2 * c, 2 * c + 1, 2 * d, 2 * d + 1);
                let entries = [
                    (uc, ud, a.re + b.re),
                    (vc, vd, -a.re + b.re),
                    (uc, vd, -a.im + b.im),
                    (vc, ud, -a.im - b.im),
                ];
                for (x, y, v) in entries {
                    s[(x, y)] = v;
                    s[(y, x)] = v;
                }
            }
            if self.grid.diagonal == DiagonalTreatment::Wick {
                let m = self.sqrt_weights[c] * self.sqrt_weights[c];
                for i in 0..n {
                    sum[i] = 2.0 * self.centres[c][i];
                }
                let a = self.k_at(&sum, t) * (super::covariance::norm(&sum).powf(self.p.beta) * m);
                let zero = vec![0.0; n];
                let b = self.k_at(&zero, t).re * self.antidiagonal_norm * m;
                let (u, v) = (2 * c, 2 * c + 1);
                s[(u, u)] = a.re + b;
                s[(v, v)] = -a.re + b;
                s[(u, v)] = -a.im;
                s[(v, u)] = -a.im;
            }
        }
        s
    }

    /// Variance and third cumulant of `X(t) = t (wᵀ S_t w − tr S_t)`.
    fn form_cumulants(&self, t: f64) -> (f64, f64) {
        let s = self.quadratic_form(t);
        let s2 = &s * &s;
        let tr2: f64 = s.iter().map(|v| v * v).sum();
        let tr3: f64 = s2.iter().zip(s.iter()).map(|(a, b)| a * b).sum();
        (2.0 * t * t * tr2, 8.0 * t.powi(3) * tr3)
    }

    /// Rank-2 spectrum `t μ_i`, so that `X(t) = Σ t μ_i (g_i² − 1)`.
    pub fn spectrum(&self, t: f64) -> Vec<f64> {
        let s = self.quadratic_form(t);
        SymmetricEigen::new(s).eigenvalues.iter().map(|&m| t * m).collect()
    }

    /// Variance of the discretized `X(t)`.
    pub fn variance(&self, t: f64) -> f64 {
        match self.p.kappa {
            1 => t * t * self.linear_coefficients(t).iter().map(|(a, b)| a * a + b * b).sum::<f64>(),
            _ => self.form_cumulants(t).0,
        }
    }

    /// Skewness of the discretized `X(t)`; zero for rank 1.
    pub fn skewness(&self, t: f64) -> f64 {
        match self.p.kappa {
            1 => 0.0,
            _ => {
                let (k2, k3) = self.form_cumulants(t);
                k3 / k2.powf(1.5)
            }
        }
    }

    /// `count` draws of `X(t)` for each `t`, jointly over the list (same noise).
    /// Rank 2 evaluates the form through its spectrum, one `t` at a time.
    pub fn samples(&self, ts: &[f64], seed: u64, count: usize) -> Vec<Vec<f64>> {
        match self.p.kappa {
            1 => {
                let coeffs: Vec<Vec<(f64, f64)>> = ts.iter().map(|&t| self.linear_coefficients(t)).collect();
                let chunks = chunked(count, seed, |rng, out_len| {
                    let mut out = vec![Vec::with_capacity(out_len); ts.len()];
                    for _ in 0..out_len {
                        let noise: Vec<(f64, f64)> = (0..self.centres.len())
                            .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
                            .collect();
                        for (ti, &t) in ts.iter().enumerate() {
                            let x: f64 = coeffs[ti]
                                .iter()
                                .zip(&noise)
                                .map(|((a, b), (u, v))| a * u + b * v)
                                .sum();
                            out[ti].push(t * x);
                        }
                    }
                    out
                });
                merge_chunks(chunks, ts.len())
            }
            _ => ts
                .iter()
                .map(|&t| {
                    let mu = self.spectrum(t);
                    let chunks = chunked(count, seed, |rng, out_len| {
                        let draws = (0..out_len)
                            .map(|_| {
                                mu.iter()
                                    .map(|&m| {
                                        let g: f64 = rng.sample(StandardNormal);
                                        m * (g * g - 1.0)
                                    })
                                    .sum()
                            })
                            .collect();
                        vec![draws]
                    });
                    merge_chunks(chunks, 1).pop().unwrap()
                })
                .collect(),
        }
    }
}

impl LimitSampler {
    /// Draws of `X(t)` plus an independent Gaussian carrying the variance the
    /// truncated grid misses, `target_variance − variance(t)` (clamped at 0).
    /// Frequencies beyond `Λ` contribute many weakly dependent terms, so their
    /// sum is close to Gaussian. Returns the samples and the variance added.
    pub fn samples_with_gaussian_tail(
        &self,
        t: f64,
        target_variance: f64,
        seed: u64,
        count: usize,
    ) -> (Vec<f64>, f64) {
        let mut xs = self.samples(&[t], seed, count).pop().unwrap();
        let tail = (target_variance - self.variance(t)).max(0.0);
        let sd = tail.sqrt();
        let mut rng = stream_rng(crate::seed::child_seed(seed, "tail"), 0);
        for x in xs.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *x += sd * g;
        }
        (xs, tail)
    }
}

/// `sqrt(E‖s‖^{2β})` for `s` the difference of two uniform points of a cell
/// of width `w`; each coordinate of `s` is triangular on `[−w, w]`.
fn antidiagonal_norm(n: usize, w: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    if n == 1 {
        let e = 2.0 * beta;
        return (2.0 * w.powf(e) * (1.0 / (e + 1.0) - 1.0 / (e + 2.0))).sqrt();
    }
    let rule = GaussLegendre::new(16);
    let k = rule.order();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    for flat in 0..k.pow(n as u32) {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = rem % k;
            rem /= k;
        }
        let mut wt = 1.0;
        let mut r2 = 0.0;
        for &i in &idx {
            // |s_i| = w x, density 2(1 − x) on [0, 1]
            let x = 0.5 * (rule.nodes()[i] + 1.0);
            wt *= rule.weights()[i] * (1.0 - x);
            r2 += (w * x).powi(2);
        }
        total += wt * r2.powf(beta);
    }
    total.sqrt()
}

/// `8 Σμ³ / (2 Σμ²)^{3/2}` for `Σ μ_i (g_i² − 1)`.
pub fn spectrum_skewness(mu: &[f64]) -> f64 {
    let m2: f64 = mu.iter().map(|m| m * m).sum();
    let m3: f64 = mu.iter().map(|m| m * m * m).sum();
    8.0 * m3 / (2.0 * m2).powf(1.5)
}

fn chunked<F>(count: usize, seed: u64, f: F) -> Vec<Vec<Vec<f64>>>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> Vec<Vec<f64>> + Sync,
{
    (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let len = CHUNK.min(count - k * CHUNK);
            f(&mut stream_rng(seed, k as u64), len)
        })
        .collect()
}

fn merge_chunks(chunks: Vec<Vec<Vec<f64>>>, width: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); width];
    for chunk in chunks {
        for (o, c) in out.iter_mut().zip(chunk) {
            o.extend(c);
        }
    }
    out
}

/// `count` draws of `X_κ(t)`; deterministic in `(grid, seed)`.
pub fn sample_limit(
    p: &ScalingParams,
    t: f64,
    grid: &LimitSampleGrid,
    seed: u64,
    count: usize,
) -> Result<Vec<f64>> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::contract(format!("t = {t} must lie in (0, 1]")));
    }
    let s = LimitSampler::new(p, grid)?;
    Ok(s.samples(&[t], seed, count).pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::windows::Window;

    #[test]
    fn cell_integral_closed_forms() {
        let rule = GaussLegendre::new(8);
        let v = cell_integral(&[-0.5], 0.5, -0.6, &rule);
        assert!((v - 0.5f64.powf(0.4) / 0.4).abs() < 1e-14);
        // corner cell in 2-D: ∫_{[0,w]²} ‖x‖^q against polar integration
        let (w, q) = (0.3f64, -1.2f64);
        let got = cell_integral(&[0.0, 0.0], w, q, &rule);
        let fine = GaussLegendre::new(30);
        // ∫_0^{π/4} ∫_0^{w/cosθ} ρ^{q+1} dρ dθ, doubled
        let want = 2.0 * fine.integrate(0.0, std::f64::consts::FRAC_PI_4, |th| {
            (w / th.cos()).powf(q + 2.0) / (q + 2.0)
        });
        assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn cell_nodes_reproduce_cell_integrals() {
        let rule = GaussLegendre::new(8);
        for (lo, w, q) in [
            (vec![0.0], 1.25, -0.6),
            (vec![-0.5], 0.5, -0.2),
            (vec![-0.3, 0.0], 0.3, -1.2),
            (vec![0.3, -0.6], 0.3, -1.5),
            (vec![0.0, -0.2, 0.0], 0.2, -2.1),
        ] {
            let mut total = 0.0;
            visit_cell(&lo, w, q, &rule, &mut |_, wt| total += wt);
            let want = cell_integral(&lo, w, q, &rule);
            assert!((total / want - 1.0).abs() < 1e-9, "{lo:?}: {total} vs {want}");
        }
    }

    #[test]
    fn mirror_pairs_cover_the_grid() {
        let g = LimitSampleGrid::new(3.0, 6).unwrap();
        let c = representative_cells(2, &g);
        assert_eq!(c.centres.len(), 18);
    }

    #[test]
    fn rank_two_form_has_zero_trace() {
        let p = ScalingParams::new(1, 2, 0.4, 0.0, Window::interval(1.0, 1.0).unwrap()).unwrap();
        let s = LimitSampler::new(&p, &LimitSampleGrid::new(10.0, 40).unwrap()).unwrap();
        let mu = s.spectrum(1.0);
        let scale = mu.iter().map(|m| m.abs()).fold(0.0, f64::max);
        assert!(mu.iter().sum::<f64>().abs() < 1e-10 * scale);
        assert!(s.skewness(1.0) > 0.0);
    }

    #[test]
    fn unsupported_rank() {
        let p = ScalingParams::new(1, 3, 0.2, 0.0, Window::interval(1.0, 1.0).unwrap()).unwrap();
        let g = LimitSampleGrid::new(10.0, 16).unwrap();
        assert!(matches!(sample_limit(&p, 1.0, &g, 1, 10), Err(Error::UnsupportedRank(3))));
    }

    #[test]
    fn deterministic() {
        let p = ScalingParams::new(1, 1, 0.4, 0.0, Window::interval(1.0, 1.0).unwrap()).unwrap();
        let g = LimitSampleGrid::new(20.0, 32).unwrap();
        let a = sample_limit(&p, 0.5, &g, 5, 600).unwrap();
        let b = sample_limit(&p, 0.5, &g, 5, 600).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 600);
    }
}
