//! Profile file to spectrum table to diagnostics.

use std::f64::consts::PI;

use fiberspec::spectral_grid::SectorLabel;
use fiberspec::*;

const WELL: &str = "type = \"piecewise-constant\"\nH = 3\nbreakpoints = [0, 1, 2, 3]\nvalues = [4, 1, 4]\n";

#[test]
fn constant_profile_table() {
    let p = parse_profile("type = \"preset\"\nH = 3.141592653589793\npreset = \"constant\"\nparams = [1]\n").unwrap();
    let t = enumerate(&p, &CrossSection::parse("interval:pi").unwrap(), 9.0, None, None).unwrap();
    let rows: Vec<(usize, usize, f64)> = t.rows.iter().map(|r| (r.k, r.ell, r.lambda)).collect();
    let expected = [(1, 1, 2.0), (1, 2, 5.0), (2, 1, 5.0), (2, 2, 8.0)];
    assert_eq!(rows.len(), expected.len());
    for (r, e) in rows.iter().zip(expected) {
        assert_eq!((r.0, r.1), (e.0, e.1));
        assert!((r.2 - e.2).abs() < 1e-12);
    }
    assert_eq!(t.to_csv().lines().next(), Some("k,mu,ell,lambda"));
}

#[test]
fn well_table_labels() {
    let p = parse_profile(WELL).unwrap();
    let well = p.find_well(4.0).unwrap();
    assert_eq!(well.map(|w| (w.alpha, w.beta)), Some((1.0, 2.0)));
    let t = enumerate(&p, &CrossSection::Interval { length: PI }, 80.0, Some(0.5), well.as_ref()).unwrap();
    for r in &t.rows {
        let mu2 = r.mu * r.mu;
        match r.sector.unwrap() {
            SectorLabel::Guided { .. } => assert!(r.lambda <= 3.5 * mu2 && r.lambda >= mu2),
            SectorLabel::NonGuided { .. } => assert!(r.lambda >= 4.5 * mu2),
            SectorLabel::Residual => {}
        }
    }
    assert!(t.rows.iter().any(|r| r.sector.unwrap().is_guided()));
    assert!(t.rows.iter().any(|r| r.sector.unwrap().is_non_guided()));
}

#[test]
fn diagnose_well_profile() {
    let p = parse_profile(WELL).unwrap();
    let well = p.find_well(4.0).unwrap();
    let t = enumerate(&p, &CrossSection::Interval { length: PI }, 150.0, Some(0.5), well.as_ref()).unwrap();
    let opts = DiagnoseOptions { eps: 0.5, well, layer: Layer::new(2.25, 3.0), grid: 64 };
    let rep = diagnose(&p, &t, &opts).unwrap();
    assert_eq!(rep.rows.len(), t.rows.len());
    for r in &rep.rows {
        assert!(r.mass >= 0.0 && r.mass <= 1.0);
        assert!((r.r_omega - r.mass).abs() < 1e-15, "full cross-section window");
        assert!(r.min_r2 > 0.0);
    }
    assert!(rep.guided_decay.is_some());
    let csv = rep.to_csv();
    assert_eq!(csv.lines().next(), Some("k,mu,ell,lambda,sector,mass,R_omega,min_r2,max_gap"));
    assert!(rep.summary().contains("guided decay fitted exponent"));
}

#[test]
fn layer_window_scales_ratio() {
    let p = CelerityProfile::constant(1.0, PI).unwrap();
    let cs = CrossSection::Interval { length: PI };
    let modes = spectral_grid::cross_section_modes(&cs, 2).unwrap();
    let e = eigenpair(&p, 1.0, 1, &GridSpec::Uniform(50)).unwrap();
    let layer = Layer::new(0.0, PI).with_window(vec![(0.0, PI / 2.0)]);
    let r = concentration_ratio(&e, &cs, &modes.modes[0], &layer).unwrap();
    assert!((r - 0.5).abs() < 1e-12);
}

#[test]
fn smooth_well_liouville() {
    let p = CelerityProfile::preset(Preset::SmoothWell { outer: 3.0, inner: 1.5, center: 1.0, width: 0.3 }, 2.0).unwrap();
    for mu in [4.0, 8.0] {
        let first = spectral_grid::first_non_guided_index(&p, mu, 0.5).unwrap();
        let e = eigenpair(&p, mu, first + 1, &GridSpec::Uniform(200)).unwrap();
        let lt = fiber::liouville_transform(&p, &e, 0.5, 30.0).unwrap();
        assert!(lt.r1 <= lt.alpha.abs() && lt.alpha.abs() <= lt.r2);
        assert!(lt.residual_sup < 1.0);
    }
}
