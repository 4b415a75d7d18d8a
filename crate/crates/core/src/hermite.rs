//! Probabilists' Hermite polynomials, Hermite expansions of functionals in
//! L₂(ℝ, φ dω), and Hermite-rank detection.
//!
//! The convention is `H₀ = 1, H₁ = x, H₂ = x² − 1, H₃ = x³ − 3x`, orthogonal
//! under the standard normal density φ with `∫ H_i H_j φ = δ_ij · i!`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::neumaier_sum;

/// Largest degree accepted by [`hermite_eval`].
pub const MAX_DEGREE: usize = 60;

/// Default Gauss–Hermite node count for [`expand`].
pub const DEFAULT_QUAD_NODES: usize = 128;

/// Default rank tolerance, relative to `sqrt(l2_norm_sq)`.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-9;

/// H_m(x) by the three-term recurrence `H_{m+1} = x H_m − m H_{m−1}`.
pub fn hermite_eval(m: usize, x: f64) -> Result<f64> {
    if m > MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree: m,
            max: MAX_DEGREE,
        });
    }
    Ok(hermite_unchecked(m, x))
}

pub(crate) fn hermite_unchecked(m: usize, x: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => x,
        _ => {
            let mut h0 = 1.0;
            let mut h1 = x;
            for k in 1..m {
                let h2 = x * h1 - k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// Writes H_0(x)..=H_degree(x) into `out`.
fn hermite_table(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 2..out.len() {
        out[k] = x * out[k - 1] - (k - 1) as f64 * out[k - 2];
    }
}

/// Gauss–Hermite rule for the standard normal weight: `Σ w_i f(x_i) ≈ ∫ f φ`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub–Welsch for starting values, then Newton polishing on the
    /// orthonormal recurrence. Weights are the Christoffel numbers
    /// `1 / Σ_k ψ_k(x_i)²`, which keeps them accurate to a few ulps.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "need at least one node");
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = (k as f64).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let mut nodes: Vec<f64> = jacobi.symmetric_eigen().eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut weights = Vec::with_capacity(order);
        for x in nodes.iter_mut() {
            for _ in 0..8 {
                let (psi_n, psi_nm1, _) = orthonormal_at(order, *x);
                let deriv = (order as f64).sqrt() * psi_nm1;
                // extreme nodes of very large rules overflow; their weights
                // underflow to zero anyway
                if deriv == 0.0 || !psi_n.is_finite() || !deriv.is_finite() {
                    break;
                }
                let dx = psi_n / deriv;
                *x -= dx;
                if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, _, norm_sq) = orthonormal_at(order, *x);
            weights.push(1.0 / norm_sq);
        }
        // symmetrize against residual rounding
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f φ` by the rule, with compensated summation.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        neumaier_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }
}

/// Returns (ψ_N(x), ψ_{N−1}(x), Σ_{k<N} ψ_k(x)²) for the orthonormal
/// polynomials ψ_k = H_k / sqrt(k!).
fn orthonormal_at(order: usize, x: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut norm_sq = 1.0;
    for k in 0..order {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if k + 1 < order {
            norm_sq += cur * cur;
        }
    }
    (cur, prev, norm_sq)
}

/// Hermite coefficients `C_j = ∫ S H_j φ` of a functional S.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    pub coeffs: Vec<f64>,
    pub truncation_degree: usize,
    /// Rank detected at [`DEFAULT_RANK_TOLERANCE`]; `None` when undetermined.
    pub rank: Option<usize>,
    /// Quadrature value of `∫ S² φ`.
    pub l2_norm_sq: f64,
}

impl HermiteExpansion {
    /// Partial sum `Σ_{j≤J} C_j H_j(x) / j!`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut h = vec![0.0; self.coeffs.len()];
        hermite_table(x, &mut h);
        let mut factorial = 1.0;
        let mut sum = 0.0;
        for (j, (&c, &hj)) in self.coeffs.iter().zip(&h).enumerate() {
            if j > 0 {
                factorial *= j as f64;
            }
            sum += c * hj / factorial;
        }
        sum
    }

    /// `|Σ_{j≤degree} C_j²/j! − l2_norm_sq|`.
    pub fn parseval_residual(&self, degree: usize) -> f64 {
        let mut factorial = 1.0;
        let mut partial = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().take(degree + 1) {
            if j > 0 {
                factorial *= j as f64;
            }
            partial += c * c / factorial;
        }
        (partial - self.l2_norm_sq).abs()
    }

    /// `C_κ / κ!`, the weight of the leading Hermite term.
    pub fn leading_weight(&self, kappa: usize) -> f64 {
        let factorial: f64 = (1..=kappa).map(|k| k as f64).product();
        self.coeffs[kappa] / factorial
    }
}

/// Expands `s` up to degree `degree` using a `quad_nodes`-point
/// Gauss–Hermite rule.
pub fn expand<F: Fn(f64) -> f64>(s: F, degree: usize, quad_nodes: usize) -> Result<HermiteExpansion> {
    expand_with(&GaussHermite::new(quad_nodes), s, degree)
}

/// Same as [`expand`] with a prebuilt rule.
pub fn expand_with<F: Fn(f64) -> f64>(
    rule: &GaussHermite,
    s: F,
    degree: usize,
) -> Result<HermiteExpansion> {
    if degree > MAX_DEGREE {
        return Err(Error::UnsupportedDegree {
            degree,
            max: MAX_DEGREE,
        });
    }
    if rule.nodes.len() < 2 * degree {
        return Err(Error::contract(format!(
            "quadrature nodes ({}) must be at least twice the truncation degree ({degree})",
            rule.nodes.len()
        )));
    }
    let values: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&x| {
            let v = s(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Evaluation { node: x })
            }
        })
        .collect::<Result<_>>()?;

    let mut table = vec![0.0; degree + 1];
    let mut terms: Vec<Vec<f64>> = vec![Vec::with_capacity(values.len()); degree + 1];
    for ((&x, &w), &v) in rule.nodes.iter().zip(&rule.weights).zip(&values) {
        hermite_table(x, &mut table);
        for (j, &h) in table.iter().enumerate() {
            terms[j].push(w * v * h);
        }
    }
    let coeffs: Vec<f64> = terms.into_iter().map(neumaier_sum).collect();
    let l2_norm_sq = neumaier_sum(rule.weights.iter().zip(&values).map(|(&w, &v)| w * v * v));

    let mut exp = HermiteExpansion {
        coeffs,
        truncation_degree: degree,
        rank: None,
        l2_norm_sq,
    };
    exp.rank = hermite_rank(&exp, DEFAULT_RANK_TOLERANCE).ok();
    Ok(exp)
}

/// Smallest `j ≥ 1` with `|C_j| > rank_tolerance · sqrt(l2_norm_sq)`.
/// `C₀` is ignored.
pub fn hermite_rank(exp: &HermiteExpansion, rank_tolerance: f64) -> Result<usize> {
    if exp.truncation_degree < 1 {
        return Err(Error::contract("rank needs coefficients up to degree >= 1"));
    }
    let threshold = rank_tolerance * exp.l2_norm_sq.sqrt();
    exp.coeffs
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, c)| c.abs() > threshold)
        .map(|(j, _)| j)
        .ok_or(Error::RankUndetermined {
            degree: exp.truncation_degree,
            tolerance: threshold,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn low_degree_values() {
        assert_eq!(hermite_eval(0, 7.3).unwrap(), 1.0);
        assert_eq!(hermite_eval(2, 3.0).unwrap(), 8.0);
        assert_eq!(hermite_eval(3, 2.0).unwrap(), 2.0);
        assert!(matches!(
            hermite_eval(61, 0.5),
            Err(Error::UnsupportedDegree { degree: 61, .. })
        ));
    }

    #[test]
    fn orthogonality_to_1e_minus_8() {
        let rule = GaussHermite::new(64);
        let mut factorial = 1.0;
        for i in 0..=10usize {
            if i > 0 {
                factorial *= i as f64;
            }
            for j in 0..=10usize {
                let q = rule.integrate(|x| hermite_unchecked(i, x) * hermite_unchecked(j, x));
                let expected = if i == j { factorial } else { 0.0 };
                assert!((q - expected).abs() < 1e-8, "({i},{j}): {q} vs {expected}");
            }
        }
    }

    #[test]
    fn expansion_of_identity_and_square() {
        let e = expand(|x| x, 4, 128).unwrap();
        for (j, c) in e.coeffs.iter().enumerate() {
            let want = if j == 1 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-12, "C_{j} = {c}");
        }
        assert_eq!(e.rank, Some(1));

        let e = expand(|x| x * x, 4, 128).unwrap();
        let want = [1.0, 0.0, 2.0, 0.0, 0.0];
        for (c, w) in e.coeffs.iter().zip(want) {
            assert!((c - w).abs() < 1e-12);
        }
        assert_eq!(hermite_rank(&e, 1e-9).unwrap(), 2);
        // Parseval: 1 + 4/2 = 3 = E x⁴
        assert!((e.l2_norm_sq - 3.0).abs() < 1e-10);
        assert!(e.parseval_residual(4) < 1e-8);
    }

    #[test]
    fn expansion_of_sign() {
        // the jump at 0 limits Gauss–Hermite to first-order convergence in
        // the node count, so the tolerance scales with 1/nodes
        let target = (2.0 / PI).sqrt();
        let mut last = f64::INFINITY;
        for nodes in [128, 256, 512] {
            let e = expand(|x: f64| x.signum(), 3, nodes).unwrap();
            let err = (e.coeffs[1] - target).abs();
            assert!(err < 0.4 / nodes as f64, "{nodes}: {}", e.coeffs[1]);
            assert!(err < last);
            last = err;
            assert!(e.coeffs[0].abs() < 1e-12);
            assert!(e.coeffs[2].abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_has_rank_one() {
        let e = expand(|x| x * x * x, 5, 128).unwrap();
        assert!((e.coeffs[1] - 3.0).abs() < 1e-11);
        assert_eq!(hermite_rank(&e, DEFAULT_RANK_TOLERANCE).unwrap(), 1);
    }

    #[test]
    fn non_finite_functional_reports_node() {
        let err = expand(|x: f64| 1.0 / x, 2, 129).unwrap_err();
        assert!(matches!(err, Error::Evaluation { node } if node == 0.0));
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(matches!(expand(|x| x, 10, 16), Err(Error::Contract(_))));
    }

    #[test]
    fn even_functional_rank_undetermined_at_low_degree() {
        let e = expand(|x| x * x, 1, 16).unwrap();
        assert!(matches!(hermite_rank(&e, 1e-9), Err(Error::RankUndetermined { .. })));
    }

    #[test]
    fn reconstruction_at_legendre_points() {
        let rule = crate::quadrature::GaussLegendre::new(12);
        let s = |x: f64| 2.0 - x + 0.5 * x.powi(3) - 0.1 * x.powi(4);
        let e = expand(s, 6, 128).unwrap();
        for (x, _) in rule.mapped(-3.0, 3.0) {
            assert!((e.evaluate(x) - s(x)).abs() < 1e-10);
        }
    }
}
