//! Fixtures shared by the benchmarks.

use fiberspec::{CelerityProfile, Preset};

/// The three-layer well `c = [4, 1, 4]` on `[0, 3]`.
pub fn well() -> CelerityProfile {
    CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0, 3.0], vec![4.0, 1.0, 4.0]).unwrap()
}

/// Eight layers with alternating contrast on `[0, pi]`.
pub fn layered() -> CelerityProfile {
    let n = 8;
    let bp = (0..=n).map(|i| std::f64::consts::PI * i as f64 / n as f64).collect();
    let values = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect();
    CelerityProfile::piecewise_constant(bp, values).unwrap()
}

pub fn sine_bump() -> CelerityProfile {
    CelerityProfile::preset(Preset::SineBump { base: 2.0, amplitude: 0.5 }, std::f64::consts::PI).unwrap()
}
