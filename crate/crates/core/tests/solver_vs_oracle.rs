//! Shooting and transfer-matrix solvers against the finite-difference oracle.

mod common;

use std::f64::consts::PI;

use fiberspec::oracle::{fd_spectrum_extrapolated, FdDiscretization};
use fiberspec::*;

fn assert_close(profile: &CelerityProfile, mu: f64, num: usize, rel: f64) {
    let oracle = fd_spectrum_extrapolated(profile, mu, num, &[1024, 2048, 4096]).unwrap();
    let solver: Vec<f64> = (1..=num).map(|l| eigenvalue(profile, mu, l).unwrap()).collect();
    let rep = compare(&solver, &oracle, rel).unwrap();
    assert!(rep.passed, "worst {} at {}", rep.worst_error, rep.worst_index);
}

#[test]
fn smooth_presets_match_extrapolated_fd() {
    let presets = [
        Preset::SineBump { base: 2.0, amplitude: 0.5 },
        Preset::LinearRamp { start: 1.0, end: 3.0 },
        Preset::SmoothWell { outer: 4.0, inner: 1.0, center: 1.5, width: 0.4 },
    ];
    for preset in presets {
        let p = CelerityProfile::preset(preset, 3.0).unwrap();
        for mu in [0.5, 2.0, 5.0] {
            assert_close(&p, mu, 8, 1e-7);
        }
    }
}

#[test]
fn sampled_linear_matches_fd() {
    let p = CelerityProfile::sampled(vec![0.0, 0.7, 1.5, 2.0], vec![1.0, 2.5, 0.8, 1.2], Interpolation::Linear).unwrap();
    assert_close(&p, 1.5, 6, 1e-6);
}

#[test]
fn random_layers_match_fd() {
    let mut rng = common::rng(7);
    for _ in 0..5 {
        let p = common::random_pc(&mut rng, 2.0, 6, 0.5, 5.0, 6.0);
        let fd = FdDiscretization::new(&p, 2.0, 8192).unwrap();
        for ell in 1..=6 {
            let l = eigenvalue(&p, 2.0, ell).unwrap();
            let o = fd.eigenvalue(ell);
            assert!((l - o).abs() <= 1e-4 * o, "l={ell}: {l} vs {o}");
        }
    }
}

#[test]
fn window_returns_every_eigenvalue() {
    let p = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0, 3.0], vec![4.0, 1.0, 4.0]).unwrap();
    let fd = FdDiscretization::new(&p, 3.0, 4096).unwrap();
    let found = spectrum_in_range(&p, 3.0, 20.0, 120.0).unwrap();
    let expected = fd.sturm_count(120.0) - fd.sturm_count(20.0);
    assert_eq!(found.len(), expected);
    for w in found.windows(2) {
        assert_eq!(w[1].0, w[0].0 + 1);
        assert!(w[1].1 > w[0].1);
    }
}

#[test]
fn eigenvector_matches_fd_on_smooth_profile() {
    let p = CelerityProfile::preset(Preset::SineBump { base: 2.0, amplitude: 0.5 }, PI).unwrap();
    let e = eigenpair(&p, 2.0, 4, &GridSpec::Uniform(100)).unwrap();
    let v = fd_eigenvector(&p, 2.0, e.lambda(), 4096).unwrap();
    let err = v.nodes.iter().zip(&v.values).map(|(&y, &x)| (e.value_at(y) - x).abs()).fold(0.0, f64::max);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn step_sampled_equals_layered() {
    let s = CelerityProfile::sampled(vec![0.0, 1.0, 2.5], vec![2.0, 0.7, 9.0], Interpolation::Step).unwrap();
    let p = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.5], vec![2.0, 0.7]).unwrap();
    for ell in 1..5 {
        assert_eq!(eigenvalue(&s, 1.3, ell).unwrap(), eigenvalue(&p, 1.3, ell).unwrap());
    }
}
