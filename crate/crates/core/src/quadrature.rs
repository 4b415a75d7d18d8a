//! Gauss–Legendre rules and a few composite integrators built on them.
//!
//! Everything here is deterministic and allocation-light; rules are cheap
//! enough to rebuild per call for the orders used in this crate (≤ 64).

use std::f64::consts::PI;

/// A Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `order`-point rule by Newton iteration on the Legendre
    /// recurrence, starting from the Tricomi initial guesses.
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        let nf = order as f64;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrates `u^power * f(u)` over `[0, upper]` where `f` is smooth and
/// `power > -1`.
///
/// The head `[0, head]` is split into dyadic panels `[head/2^{k+1}, head/2^k]`
/// on which `u^power` is analytic; the last sliver is taken as
/// `f(0) δ^{power+1}/(power+1)`. The remainder uses composite Gauss–Legendre
/// with panels no wider than `panel_width`.
pub fn integrate_power_singular<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    power: f64,
    head: f64,
    upper: f64,
    panel_width: f64,
    mut f: F,
) -> f64 {
    debug_assert!(power > -1.0);
    let head = head.min(upper);
    let e = power + 1.0;
    let levels = ((17.0 * std::f64::consts::LOG2_10 / e).ceil() as usize).clamp(8, 4000);
    let mut hi = head;
    let mut parts = Vec::with_capacity(levels + 2);
    for _ in 0..levels {
        let lo = 0.5 * hi;
        parts.push(rule.integrate(lo, hi, |u| u.powf(power) * f(u)));
        hi = lo;
    }
    parts.push(f(0.0) * hi.powf(e) / e);
    if upper > head {
        let panels = ((upper - head) / panel_width).ceil().max(1.0) as usize;
        parts.push(rule.integrate_composite(head, upper, panels, |u| u.powf(power) * f(u)));
    }
    neumaier_sum(parts.into_iter().rev())
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
