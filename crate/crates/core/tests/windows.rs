mod common;

use std::f64::consts::PI;

use common::{brute_force, random_frequency};
use lrfield::seed::stream_rng;
use lrfield::windows::{indicator_mask, GridSpec, Window};
use lrfield::Error;

#[test]
fn analytic_transforms_match_brute_force_quadrature() {
    let windows = [
        Window::interval(1.0, 1.0).unwrap(),
        Window::interval(1.5, 0.25).unwrap(),
        Window::ball(2).unwrap(),
        Window::ball(3).unwrap(),
        Window::cube(2).unwrap(),
    ];
    let mut rng = stream_rng(21, 0);
    for w in &windows {
        let n = w.dim();
        let mut points = vec![vec![0.0; n], {
            let mut e = vec![0.0; n];
            e[0] = 20.0;
            e
        }];
        for _ in 0..25 {
            points.push(random_frequency(&mut rng, n, 20.0));
        }
        for l in &points {
            let got = w.k_delta(l);
            let want = brute_force(w, l);
            let rel = (got - want).norm() / want.norm().max(1e-8);
            assert!(rel < 1e-4, "{} at {l:?}: {got} vs {want}", w.name());
        }
    }
}

#[test]
fn masks_nest_and_count_sites() {
    let w = Window::interval(1.0, 1.0).unwrap();
    let grid = GridSpec::centred(&[101], 1.0);
    let full = indicator_mask(&w, 50.0, 1.0, &grid).unwrap();
    let half = indicator_mask(&w, 50.0, 0.5, &grid).unwrap();
    assert_eq!(full.iter().filter(|&&m| m).count(), 101);
    assert_eq!(half.iter().filter(|&&m| m).count(), 51);
    assert!(half.iter().zip(&full).all(|(h, f)| !h || *f));

    let disk = Window::ball(2).unwrap();
    let grid = GridSpec::centred(&[81, 81], 0.5);
    let big = indicator_mask(&disk, 20.0, 1.0, &grid).unwrap();
    let small = indicator_mask(&disk, 20.0, 0.25, &grid).unwrap();
    assert!(small.iter().zip(&big).all(|(s, b)| !s || *b));
    let area = big.iter().filter(|&&m| m).count() as f64 * 0.25;
    assert!((area / (PI * 400.0) - 1.0).abs() < 0.01);
}

#[test]
fn coverage_and_contract_errors() {
    let w = Window::cube(2).unwrap();
    let grid = GridSpec::centred(&[21, 21], 1.0);
    assert!(indicator_mask(&w, 10.0, 1.0, &grid).is_ok());
    assert!(matches!(indicator_mask(&w, 11.0, 1.0, &grid), Err(Error::Coverage { .. })));
    assert!(matches!(indicator_mask(&w, 10.0, 0.0, &grid), Err(Error::Contract(_))));
    let line = GridSpec::centred(&[21], 1.0);
    assert!(matches!(indicator_mask(&w, 5.0, 1.0, &line), Err(Error::Contract(_))));
    assert!(Window::interval(0.0, 0.0).is_err());
}

#[test]
fn admissible_hurst_bounds() {
    assert_eq!(Window::interval(1.0, 1.0).unwrap().gamma_lower_bound(), 0.0);
    assert_eq!(Window::ball(2).unwrap().gamma_lower_bound(), 0.25);
    assert!((Window::ball(3).unwrap().gamma_lower_bound() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(Window::cube(2).unwrap().gamma_lower_bound(), 0.0);
}
