//! Numerical scans of `I₁(p) = ∫ |K_Δ(λ)|² ‖λ‖^{p−n} dλ`.
//!
//! The unit ball is integrated directly. Outside it, the integral over
//! dyadic shells `ρ ≤ ‖λ‖ ≤ 2ρ` is fitted against `ρ` on a log-log scale:
//! shell values scaling like `ρ^{q+1}` mean a radial integrand `~ ρ^q`,
//! which is integrable at infinity iff `q < −1`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_power_singular, neumaier_sum, GaussLegendre};
use crate::special::unit_sphere_area;
use crate::stats::fit_line;
use crate::windows::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Convergent,
    /// Fitted power within the boundary band around −1.
    Boundary,
    DivergentAtOrigin,
    DivergentAtInfinity,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Convergent => "convergent",
            Classification::Boundary => "boundary",
            Classification::DivergentAtOrigin => "divergent-at-origin",
            Classification::DivergentAtInfinity => "divergent-at-infinity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    /// Inner radius of the first shell.
    pub first_shell: f64,
    /// Number of dyadic shells.
    pub shells: usize,
    pub order: usize,
    /// Largest panel width in ρ (and arc length for the cube).
    pub panel_width: f64,
    /// Half-width of the band `|q + 1| ≤ band` reported as boundary.
    pub boundary_band: f64,
    pub min_r_squared: f64,
}

impl ScanSpec {
    /// Defaults sized per window: the cube needs a 2-D angular integral per
    /// radius, so its shells stay smaller.
    pub fn for_window(w: &Window) -> Self {
        match w {
            Window::Box { .. } => Self {
                first_shell: 8.0,
                ..Self::default()
            },
            _ => Self::default(),
        }
    }
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            first_shell: 32.0,
            shells: 6,
            order: 12,
            panel_width: 0.5,
            boundary_band: 0.05,
            min_r_squared: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub exponent: f64,
    pub classification: Classification,
    /// Fitted radial power `q`; absent when the origin already diverges.
    pub fitted_power: Option<f64>,
    pub r_squared: Option<f64>,
    /// `∫_{‖λ‖≤1}`, finite whenever `p > 0`.
    pub inner_integral: Option<f64>,
    /// `(inner radius, shell integral)` pairs.
    pub shells: Vec<(f64, f64)>,
}

pub fn integrability_scan(w: &Window, exponent: f64, scan: &ScanSpec) -> Result<ScanResult> {
    if let Window::Box { n } = w {
        if *n > 2 {
            return Err(Error::contract("integrability scan supports the cube only for n <= 2"));
        }
    }
    if exponent <= 0.0 {
        return Ok(ScanResult {
            exponent,
            classification: Classification::DivergentAtOrigin,
            fitted_power: None,
            r_squared: None,
            inner_integral: None,
            shells: Vec::new(),
        });
    }
    let rule = GaussLegendre::new(scan.order);
    let inner = integrate_power_singular(&rule, exponent - 1.0, 0.5, 1.0, 0.25, |rho| {
        angular_mean_sq(w, rho, &rule, scan.panel_width)
    }) * unit_sphere_area(w.dim());

    let mut shells = Vec::with_capacity(scan.shells);
    let period = oscillation_period(w);
    let mut rho = scan.first_shell;
    for _ in 0..scan.shells {
        let lo = rho;
        let mut hi = 2.0 * rho;
        if let Some(tp) = period {
            // whole periods of the leading oscillation per shell
            hi = lo + tp * ((hi - lo) / tp).round().max(1.0);
        }
        let panels = ((hi - lo) / scan.panel_width).ceil() as usize;
        let v = rule.integrate_composite(lo, hi, panels, |r| {
            angular_mean_sq(w, r, &rule, scan.panel_width) * r.powf(exponent - 1.0)
        }) * unit_sphere_area(w.dim());
        shells.push((lo, v));
        rho = hi;
    }
    let xs: Vec<f64> = shells.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = shells.iter().map(|s| s.1.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let q = fit.slope - 1.0;
    // a flat profile has almost no variance to explain, so R² says nothing
    // there; the boundary band is checked first
    let classification = if (q + 1.0).abs() <= scan.boundary_band {
        Classification::Boundary
    } else if fit.r_squared < scan.min_r_squared {
        return Err(Error::InconclusiveScan {
            r_squared: fit.r_squared,
            fitted_power: q,
        });
    } else if q < -1.0 {
        Classification::Convergent
    } else {
        Classification::DivergentAtInfinity
    };
    Ok(ScanResult {
        exponent,
        classification,
        fitted_power: Some(q),
        r_squared: Some(fit.r_squared),
        inner_integral: Some(inner),
        shells,
    })
}

/// Period in ρ of the leading oscillation of `|K_Δ|²`, when there is one.
fn oscillation_period(w: &Window) -> Option<f64> {
    match *w {
        Window::Interval { a, b } => Some(2.0 * PI / (a + b)),
        Window::Ball { .. } => Some(PI),
        Window::Box { .. } => None,
    }
}

/// Mean of `|K_Δ|²` over the sphere of radius `rho`.
fn angular_mean_sq(w: &Window, rho: f64, rule: &GaussLegendre, panel_width: f64) -> f64 {
    match *w {
        Window::Interval { .. } => 0.5 * (w.k_delta_sq(&[rho]) + w.k_delta_sq(&[-rho])),
        Window::Ball { n } => {
            let mut x = vec![0.0; n];
            x[0] = rho;
            w.k_delta_sq(&x)
        }
        Window::Box { n } => {
            if n == 1 {
                return w.k_delta_sq(&[rho]);
            }
            // eightfold symmetry of the square: θ ∈ [0, π/4]
            let arc = 0.25 * PI * rho;
            let panels = (arc / panel_width).ceil().max(1.0) as usize;
            let h = 0.25 * PI / panels as f64;
            let parts = (0..panels).map(|k| {
                rule.integrate(k as f64 * h, (k + 1) as f64 * h, |th| {
                    w.k_delta_sq(&[rho * th.cos(), rho * th.sin()])
                })
            });
            neumaier_sum(parts) / (0.25 * PI)
        }
    }
}
