use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{c1, check_dim};
use crate::windows::Window;

/// Which admissibility gate a parameter set is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ValidityMode {
    /// `α < (n − 2β)/κ`, the sufficient range of the limit theorem.
    Theorem,
    /// `0 < κα + 2β < U(Δ)`, finiteness of the limit variance for the window.
    #[default]
    Window,
}

impl ValidityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValidityMode::Theorem => "theorem",
            ValidityMode::Window => "window",
        }
    }
}

impl std::str::FromStr for ValidityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(ValidityMode::Theorem),
            "window" => Ok(ValidityMode::Window),
            other => Err(Error::Config(format!("unknown validity mode '{other}' (theorem|window)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub n: usize,
    pub kappa: usize,
    pub alpha: f64,
    pub beta: f64,
    pub window: Window,
    pub g0: f64,
    pub h1: f64,
}

impl ScalingParams {
    /// Checks the domain common to both gates; admissibility is separate.
    pub fn new(n: usize, kappa: usize, alpha: f64, beta: f64, window: Window) -> Result<Self> {
        let p = Self {
            n,
            kappa,
            alpha,
            beta,
            window,
            g0: 1.0,
            h1: 1.0,
        };
        p.check_domain()?;
        Ok(p)
    }

    pub fn check_domain(&self) -> Result<()> {
        check_dim(self.n)?;
        let nf = self.n as f64;
        if self.window.dim() != self.n {
            return Err(Error::Config(format!(
                "window is {}-dimensional but n = {}",
                self.window.dim(),
                self.n
            )));
        }
        if self.kappa < 1 {
            return Err(Error::Config("Hermite rank kappa must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < nf) {
            return Err(Error::Config(format!("alpha = {} must lie in (0, n)", self.alpha)));
        }
        if !(self.beta > -0.5 * nf && self.beta < 0.5 * nf) {
            return Err(Error::Config(format!("beta = {} must lie in (-n/2, n/2)", self.beta)));
        }
        if self.g0 == 0.0 || self.h1 == 0.0 {
            return Err(Error::Config("g(0) and h(1) must be nonzero".into()));
        }
        Ok(())
    }

    /// `p = κα + 2β`, the exponent that decides integrability.
    pub fn exponent(&self) -> f64 {
        self.kappa as f64 * self.alpha + 2.0 * self.beta
    }

    /// The first violated inequality for `mode`, if any.
    pub fn violation(&self, mode: ValidityMode) -> Option<String> {
        let nf = self.n as f64;
        let k = self.kappa as f64;
        // κα < n keeps H_κ(ξ) long-range dependent; without it the limit
        // integral is infinite whatever the window
        if k * self.alpha >= nf {
            return Some(format!("kappa*alpha = {} must be below n = {}", k * self.alpha, self.n));
        }
        match mode {
            ValidityMode::Theorem => {
                let bound = (nf - 2.0 * self.beta) / k;
                (self.alpha >= bound).then(|| {
                    format!(
                        "alpha = {} must lie in (0, (n - 2*beta)/kappa) = (0, {})",
                        self.alpha,
                        short(bound)
                    )
                })
            }
            ValidityMode::Window => {
                let p = self.exponent();
                let u = self.window.exponent_upper_bound();
                if p <= 0.0 {
                    Some(format!("kappa*alpha + 2*beta = {p} must be positive"))
                } else if p >= u {
                    Some(format!(
                        "kappa*alpha + 2*beta = {p} must be below U = {u} for the {} window",
                        self.window.name()
                    ))
                } else {
                    None
                }
            }
        }
    }

    pub fn validate(&self, mode: ValidityMode) -> Result<()> {
        self.check_domain()?;
        match self.violation(mode) {
            None => Ok(()),
            Some(violated) => Err(Error::Inadmissible {
                mode: mode.as_str().to_string(),
                violated,
            }),
        }
    }

    /// Gates this parameter set passes.
    pub fn admissible_modes(&self) -> Vec<ValidityMode> {
        [ValidityMode::Theorem, ValidityMode::Window]
            .into_iter()
            .filter(|&m| self.violation(m).is_none())
            .collect()
    }

    /// `1 − κα/(2n) − β/n`.
    pub fn hurst_unchecked(&self) -> f64 {
        let nf = self.n as f64;
        1.0 - self.kappa as f64 * self.alpha / (2.0 * nf) - self.beta / nf
    }

    pub fn hurst(&self) -> Result<f64> {
        self.check_domain()?;
        if self.admissible_modes().is_empty() {
            return Err(Error::Inadmissible {
                mode: "theorem and window".into(),
                violated: self.violation(ValidityMode::Window).unwrap_or_default(),
            });
        }
        Ok(self.hurst_unchecked())
    }

    /// `r^{β+κα/2−n} / ((2π)ⁿ c₁^{κ/2} g(0) h(1))` with `L ≡ 1`.
    pub fn normalization(&self, r: f64) -> f64 {
        self.pipeline_normalization(r) / (2.0 * PI).powi(self.n as i32)
    }

    /// The factor that makes the variance of the normalized lattice functional
    /// converge to `κ!` times the covariance integral of the limit. It differs
    /// from [`Self::normalization`] by `(2π)ⁿ`, because the filter kernel is
    /// defined so that its Fourier transform is exactly `h g`.
    pub fn pipeline_normalization(&self, r: f64) -> f64 {
        let k = self.kappa as f64;
        let e = self.beta + 0.5 * k * self.alpha - self.n as f64;
        r.powf(e) / (c1(self.n, self.alpha).powf(0.5 * k) * self.g0 * self.h1)
    }
}

/// Up to ten decimals, trailing zeros trimmed.
fn short(x: f64) -> String {
    let s = format!("{x:.10}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
