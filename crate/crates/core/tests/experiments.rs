use std::sync::Mutex;

use lrfield::experiments::*;
use lrfield::field::LatticeField;
use lrfield::limit::{ScalingParams, ValidityMode};
use lrfield::windows::{indicator_mask, GridSpec, Window};
use lrfield::Error;

fn interval() -> Window {
    Window::interval(1.0, 1.0).unwrap()
}

fn params(kappa: usize, alpha: f64, beta: f64) -> ScalingParams {
    ScalingParams::new(1, kappa, alpha, beta, interval()).unwrap()
}

fn small(kappa: usize, alpha: f64, beta: f64, reps: usize, seed: u64) -> ScalingExperimentConfig {
    ScalingExperimentConfig::new(params(kappa, alpha, beta), vec![16.0, 32.0, 64.0], vec![0.5, 1.0], reps, seed)
}

#[test]
fn zero_field_gives_zero_report() {
    let cfg = small(1, 0.4, 0.0, 30, 1);
    let run = run_scaling_with_source(&cfg, |g, _| {
        let mut f = LatticeField::zeros(&g.shape, g.spacing);
        f.origin = g.origin.clone();
        f
    })
    .unwrap();
    for c in &run.report.cells {
        assert_eq!((c.mean, c.variance, c.unnormalized_mean), (0.0, 0.0, 0.0), "{c:?}");
        assert_eq!(c.count, 30);
    }
    // a zero-variance table has no slope
    assert!(run.report.hurst_estimate.is_none());
}

#[test]
fn half_window_is_the_restricted_integral() {
    let mut cfg = small(1, 0.4, 0.0, 30, 2);
    cfg.filtered = false;
    let seen: Mutex<Option<GridSpec>> = Mutex::new(None);
    let value = |flat: usize, rep: u64| ((flat as f64 * 0.37 + rep as f64).sin() * 3.0).round() / 3.0;
    let run = run_scaling_with_source(&cfg, |g, rep| {
        *seen.lock().unwrap() = Some(g.clone());
        let mut f = LatticeField::zeros(&g.shape, g.spacing);
        f.origin = g.origin.clone();
        for (i, v) in f.values.iter_mut().enumerate() {
            *v = value(i, rep);
        }
        f
    })
    .unwrap();
    let grid = seen.into_inner().unwrap().unwrap();
    for (ri, &r) in cfg.radii.iter().enumerate() {
        let full = indicator_mask(&interval(), r, 1.0, &grid).unwrap();
        let half = indicator_mask(&interval(), r, 0.5, &grid).unwrap();
        for rep in [0u64, 7, 29] {
            let sum = |mask: &[bool]| -> f64 {
                mask.iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(i, _)| value(i, rep))
                    .sum()
            };
            let (h, f) = (sum(&half), sum(&full));
            let got_half = run.samples.unnormalized[ri][0][rep as usize];
            let got_full = run.samples.unnormalized[ri][1][rep as usize];
            assert!((got_half - h).abs() < 1e-9, "r={r}: {got_half} vs {h}");
            assert!((got_full - f).abs() < 1e-9);
            // the annulus carries the rest
            let ring: Vec<bool> = full.iter().zip(&half).map(|(&a, &b)| a && !b).collect();
            assert!((got_full - got_half - sum(&ring)).abs() < 1e-9);
        }
    }
}

#[test]
fn identical_config_gives_identical_report() {
    let cfg = small(2, 0.3, 0.1, 40, 9);
    let a = run_scaling(&cfg).unwrap();
    let b = run_scaling(&cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a.report).unwrap(),
        serde_json::to_string(&b.report).unwrap()
    );
    assert_eq!(a.samples, b.samples);
    let c = run_scaling(&small(2, 0.3, 0.1, 40, 10)).unwrap();
    assert_ne!(a.samples.normalized, c.samples.normalized);
    assert_eq!(a.report.provenance.config_hash, cfg.hash());
    assert_eq!(a.report.provenance.validity_mode, "window");
}

#[test]
fn rank_one_variance_is_finite_and_positive() {
    let mut cfg = ScalingExperimentConfig::new(params(1, 0.4, 0.0), vec![128.0, 256.0, 512.0], vec![1.0], 60, 4);
    cfg.filtered = false;
    let run = run_scaling(&cfg).unwrap();
    for c in &run.report.cells {
        assert!(c.variance.is_finite() && c.variance > 0.0);
        assert!(c.mean.abs() < 4.0 * c.stderr + 1e-12);
    }
    let csv = run.report.cells_csv();
    assert!(csv.starts_with("r,t,replicate_count,mean,variance,stderr\n"));
    assert_eq!(csv.lines().count(), 4);
}

fn with_variances(report: &ExperimentReport, f: impl Fn(f64) -> f64) -> ExperimentReport {
    let mut out = report.clone();
    for c in out.cells.iter_mut() {
        c.unnormalized_variance = f(c.r);
    }
    out
}

#[test]
fn hurst_from_exact_power_laws() {
    let base = run_scaling(&small(1, 0.4, 0.0, 30, 5)).unwrap().report;
    let h = estimate_hurst(&with_variances(&base, |r| 3.0 * r.powf(1.6)), 1).unwrap();
    assert!((h.estimate - 0.8).abs() < 1e-12);
    assert!((h.slope_r2 - 1.0).abs() < 1e-12);
    assert!(h.ci_low <= h.estimate && h.estimate <= h.ci_high);
    assert!(h.warning.is_none());

    let h = estimate_hurst(&with_variances(&base, |r| r.powf(-0.2)), 1).unwrap();
    assert!(h.estimate < 0.0);
    assert!(h.warning.unwrap().contains("implausible"));

    let mut two = base.clone();
    two.cells.retain(|c| c.r != 16.0);
    assert!(matches!(estimate_hurst(&two, 1), Err(Error::InsufficientDesign(_))));
}

#[test]
fn self_similarity_edge_cases() {
    let mut cfg = small(1, 0.4, 0.0, 30, 6);
    cfg.t_grid = vec![1.0];
    let run = run_scaling(&cfg).unwrap();
    let s = self_similarity_check(&run.report, 0.8).unwrap();
    assert_eq!(s.max_deviation, 0.0);
    assert!(s.rows.is_empty());

    let run = run_scaling(&small(1, 0.4, 0.0, 30, 6)).unwrap();
    let s = self_similarity_check(&run.report, 0.8).unwrap();
    assert_eq!(s.rows.len(), 1);
    assert!((s.rows[0].target - 0.5f64.powf(1.6)).abs() < 1e-15);
    assert!(s.rows[0].stderr > 0.0);
}

#[test]
fn memory_budget_names_the_radius() {
    let mut cfg = ScalingExperimentConfig::new(params(1, 0.4, 0.0), vec![1e4, 1e5, 1e6], vec![1.0], 30, 1);
    cfg.memory_budget_mb = Some(64);
    match run_scaling(&cfg) {
        Err(e @ Error::MemoryBudget { .. }) => {
            assert!(e.to_string().contains("1000000"), "{e}");
        }
        other => panic!("expected a budget error, got {other:?}"),
    }
}

#[test]
fn inadmissible_parameters_propagate() {
    let mut cfg = small(1, 0.5, 0.4, 30, 1);
    cfg.validity_mode = ValidityMode::Theorem;
    match run_scaling(&cfg) {
        Err(Error::Inadmissible { mode, violated }) => {
            assert_eq!(mode, "theorem");
            assert!(violated.contains("(n - 2*beta)/kappa"), "{violated}");
        }
        other => panic!("{other:?}"),
    }
    cfg.validity_mode = ValidityMode::Window;
    let run = run_scaling(&cfg).unwrap();
    assert_eq!(run.report.provenance.admissible_modes, vec!["window".to_string()]);

    let bad = small(2, 0.6, 0.0, 30, 1);
    assert!(matches!(run_scaling(&bad), Err(Error::Inadmissible { .. })));
    let mut few = small(1, 0.4, 0.0, 29, 1);
    assert!(matches!(run_scaling(&few), Err(Error::Config(_))));
    few.replicates = 30;
    few.radii = vec![10.0, 20.0];
    assert!(matches!(run_scaling(&few), Err(Error::Config(_))));
}

#[test]
fn reduction_of_identical_functionals_is_exact() {
    let p = params(1, 0.4, 0.0);
    let c = reduction_check(|x| 2.5 * x, &p, 128.0, 50, 3).unwrap();
    assert!((c.correlation - 1.0).abs() < 1e-12);
    assert!((c.c_kappa - 2.5).abs() < 1e-10);
    assert_eq!(c.full.len(), 50);
    let p2 = params(2, 0.3, 0.0);
    let c = reduction_check(|x| 0.5 * (x * x - 1.0), &p2, 128.0, 50, 3).unwrap();
    assert!((c.correlation - 1.0).abs() < 1e-12);
}

#[test]
fn reduction_of_a_rank_one_polynomial() {
    let p = params(1, 0.4, 0.0);
    let c = reduction_check(|x| x + x * x * x, &p, 256.0, 300, 8).unwrap();
    assert!((c.c_kappa - 4.0).abs() < 1e-10);
    assert!(c.correlation > 0.95, "correlation {}", c.correlation);
}

#[test]
fn reduction_rejects_rank_mismatch() {
    let p = params(1, 0.4, 0.0);
    assert!(matches!(reduction_check(|x| x * x, &p, 64.0, 30, 1), Err(Error::Contract(_))));
}

#[test]
fn distribution_compare_contracts() {
    let xs: Vec<f64> = (0..600).map(|i| ((i * 7919) % 600) as f64 / 600.0).collect();
    let d = distribution_compare(&xs, &xs).unwrap();
    assert_eq!(d.ks_distance, 0.0);
    assert_eq!(d.moment_gaps.mean, 0.0);
    // standardization removes location and scale
    let ys: Vec<f64> = xs.iter().map(|x| 5.0 - 2.0 * x).collect();
    let d = distribution_compare(&xs, &ys).unwrap();
    assert!(d.ks_distance < 0.01);
    assert!((d.critical_5pct - 1.358 * (2.0f64 / 600.0).sqrt()).abs() < 1e-3);
    assert!(matches!(distribution_compare(&xs[..499], &xs), Err(Error::Contract(_))));
    assert!(matches!(distribution_compare(&xs, &vec![1.0; 600]), Err(Error::Contract(_))));
}

#[test]
fn normalized_variance_stabilizes() {
    let mut cfg = ScalingExperimentConfig::new(
        params(1, 0.4, 0.0),
        vec![128.0, 256.0, 512.0, 1024.0],
        vec![1.0],
        200,
        12,
    );
    cfg.filtered = false;
    let run = run_scaling(&cfg).unwrap();
    let cells: Vec<&CellStats> = run.report.cells.iter().collect();
    for w in cells.windows(2) {
        let se = (w[0].variance_stderr.powi(2) + w[1].variance_stderr.powi(2)).sqrt();
        assert!((w[0].variance - w[1].variance).abs() < 3.0 * se, "{} vs {}", w[0].variance, w[1].variance);
    }
}

#[test]
fn limit_samples_attach_to_the_largest_radius() {
    let mut run = run_scaling(&small(1, 0.4, 0.0, 600, 3)).unwrap();
    let draws: Vec<f64> = run.samples.normalized_at(64.0, 1.0).unwrap().to_vec();
    run.attach_limit_samples(&[(1.0, draws), (0.3, vec![0.0; 10])]).unwrap();
    assert_eq!(run.report.ks_stats.len(), 1);
    let k = &run.report.ks_stats[0];
    assert_eq!((k.r, k.t, k.ks_distance), (64.0, 1.0, 0.0));
}
