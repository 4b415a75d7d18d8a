//! Multi-dimensional complex FFTs over row-major buffers.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Plans for every axis of a fixed shape. Cheap to clone; plans are shared.
#[derive(Clone)]
pub struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("shape", &self.shape).finish()
    }
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&m| planner.plan_fft_forward(m)).collect();
        let inverse = shape.iter().map(|&m| planner.plan_fft_inverse(m)).collect();
        Self {
            shape: shape.to_vec(),
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform, `Σ x_j e^{-2πi jk/M}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Inverse transform including the `1/M` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT shape");
        let total = data.len();
        let mut stride = 1;
        let mut line = Vec::new();
        for axis in (0..self.shape.len()).rev() {
            let m = self.shape[axis];
            let plan = &plans[axis];
            if stride == 1 {
                plan.process(data);
            } else {
                line.resize(m, Complex64::default());
                let block = m * stride;
                for outer in (0..total).step_by(block) {
                    for inner in 0..stride {
                        let base = outer + inner;
                        for (k, slot) in line.iter_mut().enumerate() {
                            *slot = data[base + k * stride];
                        }
                        plan.process(&mut line);
                        for (k, v) in line.iter().enumerate() {
                            data[base + k * stride] = *v;
                        }
                    }
                }
            }
            stride *= m;
        }
    }
}

/// Signed frequency index of DFT bin `k` on an axis of length `m`.
pub fn signed_index(k: usize, m: usize) -> f64 {
    if 2 * k <= m {
        k as f64
    } else {
        k as f64 - m as f64
    }
}
