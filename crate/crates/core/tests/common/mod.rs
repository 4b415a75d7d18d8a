//! Oracles shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use lrfield::quadrature::GaussLegendre;
use lrfield::windows::Window;
use num_complex::Complex64;
use rand::Rng;

/// Composite Gauss–Legendre with enough panels for oscillation at |λ| ≤ 20.
fn integrate_c(rule: &GaussLegendre, a: f64, b: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    let panels = 24;
    let h = (b - a) / panels as f64;
    let mut s = Complex64::default();
    for k in 0..panels {
        for (x, w) in rule.mapped(a + k as f64 * h, a + (k + 1) as f64 * h) {
            s += f(x) * w;
        }
    }
    s
}

fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// ∫_Δ e^{i⟨u,λ⟩} du in Cartesian coordinates. Ball boundaries use
/// u₁ = sin φ (and u₂ = cos φ sin ψ in 3-D) so the integrands stay smooth.
pub fn brute_force(w: &Window, l: &[f64]) -> Complex64 {
    let rule = GaussLegendre::new(20);
    match *w {
        Window::Interval { a, b } => integrate_c(&rule, -b, a, |u| phase(u * l[0])),
        Window::Box { n } => (0..n).map(|i| integrate_c(&rule, -1.0, 1.0, |u| phase(u * l[i]))).product(),
        Window::Ball { n: 2 } => integrate_c(&rule, -0.5 * PI, 0.5 * PI, |p| {
            let (x, c) = (p.sin(), p.cos());
            // ∫_{−c}^{c} e^{i y λ₂} dy = 2 sin(cλ₂)/λ₂
            let inner = if l[1] == 0.0 { 2.0 * c } else { 2.0 * (c * l[1]).sin() / l[1] };
            phase(x * l[0]) * inner * c
        }),
        Window::Ball { n: 3 } => integrate_c(&rule, -0.5 * PI, 0.5 * PI, |p| {
            let (x, c) = (p.sin(), p.cos());
            let disc = integrate_c(&rule, -0.5 * PI, 0.5 * PI, |q| {
                let (y, d) = (c * q.sin(), c * q.cos());
                let inner = if l[2] == 0.0 { 2.0 * d } else { 2.0 * (d * l[2]).sin() / l[2] };
                phase(y * l[1]) * inner * c * q.cos()
            });
            phase(x * l[0]) * disc * c
        }),
        _ => unreachable!(),
    }
}

pub fn random_frequency(rng: &mut impl Rng, n: usize, max_norm: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-max_norm..max_norm)).collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() <= max_norm {
            return v;
        }
    }
}

/// Mean of `x_i x_{i+lag}` along one realization.
pub fn lag_products(values: &[f64], lag: usize) -> f64 {
    let m = values.len() - lag;
    values[..m].iter().zip(&values[lag..]).map(|(a, b)| a * b).sum::<f64>() / m as f64
}
