//! Observation windows: interval `[−b, a]`, the unit ball and the cube
//! `[−1, 1]ⁿ`, with their indicator Fourier transforms
//! `K_Δ(λ) = ∫_Δ e^{i⟨u,λ⟩} du` and lattice masks for dilations `Δ(ρ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{check_dim, LatticeField};
use crate::special::{bessel_j_scaled, unit_ball_volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Interval { a: f64, b: f64 },
    Ball { n: usize },
    Box { n: usize },
}

impl Window {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a + b > 0.0) {
            return Err(Error::Config(format!(
                "interval needs a, b >= 0 with a + b > 0 (got a = {a}, b = {b})"
            )));
        }
        if a == 0.0 || b == 0.0 {
            log::warn!("interval [-{b}, {a}] has the origin on its boundary");
        }
        Ok(Window::Interval { a, b })
    }

    pub fn ball(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Window::Ball { n })
    }

    pub fn cube(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Window::Box { n })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Window::Interval { .. } => 1,
            Window::Ball { n } | Window::Box { n } => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Window::Interval { .. } => "interval",
            Window::Ball { .. } => "ball",
            Window::Box { .. } => "box",
        }
    }

    /// Lebesgue measure `|Δ|`.
    pub fn measure(&self) -> f64 {
        match *self {
            Window::Interval { a, b } => a + b,
            Window::Ball { n } => unit_ball_volume(n),
            Window::Box { n } => 2f64.powi(n as i32),
        }
    }

    pub fn k_delta(&self, lambda: &[f64]) -> Complex64 {
        assert_eq!(lambda.len(), self.dim(), "frequency has the wrong dimension");
        match *self {
            Window::Interval { a, b } => interval_transform(a, b, lambda[0]),
            Window::Ball { n } => {
                let rho = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
                Complex64::new(ball_transform(n, rho), 0.0)
            }
            Window::Box { .. } => Complex64::new(lambda.iter().map(|&l| 2.0 * sinc(l)).product(), 0.0),
        }
    }

    /// `|K_Δ(λ)|²`, real-valued shortcut used by the integrators.
    pub fn k_delta_sq(&self, lambda: &[f64]) -> f64 {
        match *self {
            Window::Ball { n } => {
                let rho = lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
                ball_transform(n, rho).powi(2)
            }
            _ => self.k_delta(lambda).norm_sqr(),
        }
    }

    /// Smallest `ρ ≥ 0` with `x ∈ Δ(ρ)`; windows are star-shaped about 0.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        match *self {
            Window::Interval { a, b } => {
                let v = x[0];
                let side = if v >= 0.0 { a } else { b };
                if v == 0.0 {
                    0.0
                } else if side == 0.0 {
                    f64::INFINITY
                } else {
                    v.abs() / side
                }
            }
            Window::Ball { .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Window::Box { .. } => x.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Per-axis extent `(lower, upper)` of `Δ(ρ)`.
    pub fn extent(&self, rho: f64) -> (f64, f64) {
        match *self {
            Window::Interval { a, b } => (-b * rho, a * rho),
            _ => (-rho, rho),
        }
    }

    /// Lower end of the admissible Hurst range.
    pub fn gamma_lower_bound(&self) -> f64 {
        match *self {
            Window::Interval { .. } | Window::Box { .. } => 0.0,
            Window::Ball { n } => 0.5 - 0.5 / n as f64,
        }
    }

    /// Upper bound `U` on `κα + 2β` for finiteness of the limit variance.
    pub fn exponent_upper_bound(&self) -> f64 {
        match *self {
            Window::Interval { .. } => 2.0,
            Window::Ball { n } => n as f64 + 1.0,
            Window::Box { n } => 2.0 * n as f64,
        }
    }
}

fn interval_transform(a: f64, b: f64, lambda: f64) -> Complex64 {
    let scale = a.max(b);
    if (lambda * scale).abs() < 0.5 {
        // Σ (iλ)^k (a^{k+1} − (−b)^{k+1}) / (k+1)!
        let il = Complex64::new(0.0, lambda);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut pa = a;
        let mut pb = -b;
        let mut fact = 1.0;
        let mut sum = Complex64::default();
        for k in 0..30 {
            fact *= (k + 1) as f64;
            sum += pow * ((pa - pb) / fact);
            pow *= il;
            pa *= a;
            pb *= -b;
        }
        sum
    } else {
        let num = Complex64::from_polar(1.0, a * lambda) - Complex64::from_polar(1.0, -b * lambda);
        num / Complex64::new(0.0, lambda)
    }
}

/// `(2π)^{n/2} J_{n/2}(ρ) / ρ^{n/2}`.
fn ball_transform(n: usize, rho: f64) -> f64 {
    (2.0 * PI).powf(0.5 * n as f64) * bessel_j_scaled(n as i32, rho)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Geometry of a lattice without its values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub origin: Vec<usize>,
}

impl From<&LatticeField> for GridSpec {
    fn from(f: &LatticeField) -> Self {
        Self {
            shape: f.shape.clone(),
            spacing: f.spacing,
            origin: f.origin.clone(),
        }
    }
}

impl GridSpec {
    pub fn centred(shape: &[usize], spacing: f64) -> Self {
        Self {
            shape: shape.to_vec(),
            spacing,
            origin: shape.iter().map(|&m| m / 2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for axis in (0..self.shape.len()).rev() {
            let m = self.shape[axis];
            out[axis] = ((rem % m) as f64 - self.origin[axis] as f64) * self.spacing;
            rem /= m;
        }
    }

    /// Fails with a coverage error when `Δ(ρ)` leaves the grid.
    pub fn check_covers(&self, w: &Window, rho: f64) -> Result<()> {
        let (lo, hi) = w.extent(rho);
        let tol = 1e-9 * self.spacing;
        for (axis, &m) in self.shape.iter().enumerate() {
            let min = -(self.origin[axis] as f64) * self.spacing;
            let max = (m as f64 - 1.0 - self.origin[axis] as f64) * self.spacing;
            if lo < min - tol || hi > max + tol {
                return Err(Error::Coverage {
                    window: w.name().to_string(),
                    radius: rho,
                });
            }
        }
        Ok(())
    }

    /// Gauge of every site under `w`, flattened row-major.
    pub fn gauges(&self, w: &Window) -> Vec<f64> {
        let mut x = vec![0.0; self.shape.len()];
        (0..self.len())
            .map(|flat| {
                self.position(flat, &mut x);
                w.gauge(&x)
            })
            .collect()
    }
}

/// Membership tolerance so that sites exactly on the boundary count as inside.
pub(crate) fn inside(gauge: f64, rho: f64) -> bool {
    gauge <= rho * (1.0 + 1e-12) + 1e-12
}

/// Cell-centre membership in `Δ(r t^{1/n})`.
pub fn indicator_mask(w: &Window, r: f64, t: f64, grid: &GridSpec) -> Result<Vec<bool>> {
    if w.dim() != grid.shape.len() {
        return Err(Error::contract("window and grid dimensions differ"));
    }
    if !(r > 0.0) || !(t > 0.0 && t <= 1.0) {
        return Err(Error::contract(format!("need r > 0 and t in (0, 1], got r = {r}, t = {t}")));
    }
    let rho = r * t.powf(1.0 / w.dim() as f64);
    grid.check_covers(w, rho)?;
    Ok(grid.gauges(w).into_iter().map(|g| inside(g, rho)).collect())
}
