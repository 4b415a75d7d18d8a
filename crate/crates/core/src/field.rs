//! Stationary isotropic Gaussian lattice fields with Cauchy-type covariance
//! `B(r) = (1 + r²)^{-α/2}`, synthesized by circulant embedding.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::seed::stream_rng;
use crate::special::gamma;

/// Relative threshold below which negative embedding eigenvalues are clamped.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Padding factors tried in order before embedding fails.
pub const PADDING_FACTORS: [usize; 3] = [2, 4, 8];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceModel {
    pub n: usize,
    pub alpha: f64,
}

impl CovarianceModel {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        check_dim(n)?;
        if !(alpha > 0.0 && alpha < n as f64) {
            return Err(Error::Config(format!(
                "alpha = {alpha} must lie in (0, n) = (0, {n})"
            )));
        }
        Ok(Self { n, alpha })
    }

    pub fn covariance(&self, r: f64) -> f64 {
        covariance(self.alpha, r)
    }
}

/// `(1 + r²)^{-α/2}`.
pub fn covariance(alpha: f64, r: f64) -> f64 {
    (1.0 + r * r).powf(-0.5 * alpha)
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::Config(format!("dimension n = {n} must be 1, 2 or 3")))
    }
}

/// Low-frequency asymptote `c₁(n,α) ρ^{α−n}` of the spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub n: usize,
    pub alpha: f64,
    pub c1: f64,
}

impl SpectralModel {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let m = CovarianceModel::new(n, alpha)?;
        Ok(Self::from(m))
    }

    pub fn spectral_density_asymptote(&self, rho: f64) -> Result<f64> {
        if rho <= 0.0 {
            return Err(Error::SpectralSingularity);
        }
        Ok(self.c1 * rho.powf(self.alpha - self.n as f64))
    }
}

impl From<CovarianceModel> for SpectralModel {
    fn from(m: CovarianceModel) -> Self {
        Self {
            n: m.n,
            alpha: m.alpha,
            c1: c1(m.n, m.alpha),
        }
    }
}

/// `c₁(n,α) = Γ((n−α)/2) / (2^α π^{n/2} Γ(α/2))`.
pub fn c1(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    gamma(0.5 * (nf - alpha)) / (2f64.powf(alpha) * PI.powf(0.5 * nf) * gamma(0.5 * alpha))
}

/// A real field sampled on a regular grid, stored row-major (last axis
/// fastest). Site `i` sits at `(i − origin) · spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    pub n: usize,
    pub shape: Vec<usize>,
    pub spacing: f64,
    pub values: Vec<f64>,
    pub origin: Vec<usize>,
}

impl LatticeField {
    /// A zero field centred on the grid.
    pub fn zeros(shape: &[usize], spacing: f64) -> Self {
        Self {
            n: shape.len(),
            shape: shape.to_vec(),
            spacing,
            values: vec![0.0; shape.iter().product()],
            origin: shape.iter().map(|&m| m / 2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Physical coordinates of the site with flat index `flat`.
    pub fn position(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for axis in (0..self.n).rev() {
            let m = self.shape[axis];
            let i = rem % m;
            rem /= m;
            out[axis] = (i as f64 - self.origin[axis] as f64) * self.spacing;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = f(*v);
        }
        out
    }
}

/// Cached square-root eigenvalues of the embedded covariance ring. Build once
/// per (model, shape, spacing) and draw as many realizations as needed.
#[derive(Debug, Clone)]
pub struct CirculantEmbedding {
    model: CovarianceModel,
    shape: Vec<usize>,
    spacing: f64,
    ext_shape: Vec<usize>,
    padding: usize,
    sqrt_eig: Vec<f64>,
    clamped: usize,
    fft: NdFft,
}

impl CirculantEmbedding {
    pub fn new(model: CovarianceModel, shape: &[usize], spacing: f64) -> Result<Self> {
        if shape.len() != model.n {
            return Err(Error::contract(format!(
                "shape has {} axes but the model has n = {}",
                shape.len(),
                model.n
            )));
        }
        if shape.iter().any(|&m| m == 0) {
            return Err(Error::contract("shape must be strictly positive"));
        }
        if !(spacing > 0.0) {
            return Err(Error::contract("spacing must be positive"));
        }
        let mut last = None;
        for &padding in &PADDING_FACTORS {
            let ext_shape: Vec<usize> = shape.iter().map(|&m| (padding * m).max(2)).collect();
            let fft = NdFft::new(&ext_shape);
            let mut ring = covariance_ring(&model, &ext_shape, spacing);
            fft.forward(&mut ring);
            let eig: Vec<f64> = ring.iter().map(|c| c.re).collect();
            let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            if min >= -NEGATIVITY_TOLERANCE * max {
                let total = eig.len() as f64;
                let clamped = eig.iter().filter(|&&l| l < 0.0).count();
                let sqrt_eig = eig.iter().map(|&l| (l.max(0.0) / total).sqrt()).collect();
                if clamped > 0 {
                    log::debug!("clamped {clamped} slightly negative embedding eigenvalues");
                }
                return Ok(Self {
                    model,
                    shape: shape.to_vec(),
                    spacing,
                    ext_shape,
                    padding,
                    sqrt_eig,
                    clamped,
                    fft,
                });
            }
            last = Some((min, max, padding));
        }
        let (min_eigenvalue, max_eigenvalue, padding) = last.unwrap();
        Err(Error::EmbeddingFailure {
            min_eigenvalue,
            max_eigenvalue,
            padding,
        })
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn clamped_eigenvalues(&self) -> usize {
        self.clamped
    }

    pub fn ext_shape(&self) -> &[usize] {
        &self.ext_shape
    }

    /// Bytes held while drawing one realization.
    pub fn working_bytes(shape: &[usize], padding: usize) -> u64 {
        let ext: u64 = shape.iter().map(|&m| (padding * m) as u64).product();
        ext * (16 + 8) + shape.iter().product::<usize>() as u64 * 8
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticeField {
        let mut buf: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(s * a, s * b)
            })
            .collect();
        self.fft.forward(&mut buf);
        let mut field = LatticeField::zeros(&self.shape, self.spacing);
        let n = self.shape.len();
        let mut idx = vec![0usize; n];
        for (flat, v) in field.values.iter_mut().enumerate() {
            let mut rem = flat;
            for axis in (0..n).rev() {
                idx[axis] = rem % self.shape[axis];
                rem /= self.shape[axis];
            }
            let mut e = 0;
            for axis in 0..n {
                e = e * self.ext_shape[axis] + idx[axis];
            }
            *v = buf[e].re;
        }
        field
    }

    pub fn sample_seeded(&self, seed: u64) -> LatticeField {
        self.sample(&mut stream_rng(seed, 0))
    }

    pub fn model(&self) -> &CovarianceModel {
        &self.model
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

fn covariance_ring(model: &CovarianceModel, ext_shape: &[usize], spacing: f64) -> Vec<Complex64> {
    let total: usize = ext_shape.iter().product();
    let n = ext_shape.len();
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut r2 = 0.0;
        for axis in (0..n).rev() {
            let m = ext_shape[axis];
            let i = rem % m;
            rem /= m;
            let d = i.min(m - i) as f64 * spacing;
            r2 += d * d;
        }
        out.push(Complex64::new(model.covariance(r2.sqrt()), 0.0));
    }
    out
}

/// One realization on `shape`, deterministic in `seed`.
pub fn synthesize(model: CovarianceModel, shape: &[usize], spacing: f64, seed: u64) -> Result<LatticeField> {
    Ok(CirculantEmbedding::new(model, shape, spacing)?.sample_seeded(seed))
}
