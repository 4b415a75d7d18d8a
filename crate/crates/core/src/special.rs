//! Bessel functions of the first kind for the integer and half-integer
//! orders that appear in radial Fourier transforms in one to three
//! dimensions.

use std::f64::consts::PI;

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Orders are passed doubled so half-integers stay exact: `twice_nu = 1`
/// means ν = 1/2.
const SERIES_SWITCH: f64 = 12.0;

/// J_ν(z) for ν = twice_nu / 2 ≥ -1/2 and z ≥ 0.
pub fn bessel_j(twice_nu: i32, z: f64) -> f64 {
    assert!(twice_nu >= -1, "order below -1/2 is not supported");
    assert!(z >= 0.0, "argument must be non-negative");
    if twice_nu % 2 != 0 {
        return half_integer(twice_nu, z);
    }
    if z <= SERIES_SWITCH {
        z.powf(twice_nu as f64 / 2.0) * series_scaled(twice_nu as f64 / 2.0, z)
    } else {
        hankel_asymptotic(twice_nu as f64 / 2.0, z)
    }
}

/// J_ν(z) / z^ν, finite at z = 0 where it equals 1 / (2^ν Γ(ν+1)).
pub fn bessel_j_scaled(twice_nu: i32, z: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    if z <= 1.0 || (twice_nu % 2 == 0 && z <= SERIES_SWITCH) {
        series_scaled(nu, z)
    } else {
        bessel_j(twice_nu, z) / z.powf(nu)
    }
}

/// Power series of J_ν(z) / z^ν.
fn series_scaled(nu: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn half_integer(twice_nu: i32, z: f64) -> f64 {
    let nu = twice_nu as f64 / 2.0;
    if z == 0.0 {
        return if twice_nu == -1 { f64::INFINITY } else { 0.0 };
    }
    if z < 1.0 && twice_nu > 0 {
        return z.powf(nu) * series_scaled(nu, z);
    }
    // upward recurrence from J_{-1/2}, J_{1/2}; stable while ν < z, and the
    // orders used here never exceed 3/2 with z ≥ 1
    let pref = (2.0 / (PI * z)).sqrt();
    let mut jm = pref * z.cos();
    let mut j = pref * z.sin();
    if twice_nu == -1 {
        return jm;
    }
    let mut order = 0.5;
    while (2.0 * order) as i32 != twice_nu {
        let next = 2.0 * order / z * j - jm;
        jm = j;
        j = next;
        order += 1.0;
    }
    j
}

fn hankel_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Surface area of the unit sphere S^{n-1} in ℝⁿ.
pub fn unit_sphere_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}
