//! Liouville normal form of non-guided eigenfunctions on smooth profiles.
//!
//! With `p = lambda / mu^2 - c`, the substitution
//! `xi(y) = int_0^y sqrt(p / c)` and `eta = (c p)^{1/4} u` turns the fiber
//! equation into `eta'' + mu^2 eta = rho eta` with a bounded `rho`, so that
//! `eta` is a sine of frequency `mu` up to `O(1 / mu)`.

use crate::error::{Error, Result};
use crate::profile::CelerityProfile;
use crate::quadrature::{gl4, GL4_NODES, GL4_WEIGHTS};

use super::eigenfunction::FiberEigenpair;

/// Result of [`liouville_transform`].
#[derive(Debug, Clone)]
pub struct LiouvilleTransform {
    /// `xi` at the eigenpair grid points.
    pub xi: Vec<f64>,
    /// `eta` at the eigenpair grid points.
    pub eta: Vec<f64>,
    /// Least-squares amplitude of `alpha sin(mu xi)`.
    pub alpha: f64,
    /// `sup |eta - alpha sin(mu xi)|` over grid points and quadrature nodes.
    pub residual_sup: f64,
    /// `L2(d xi)` norm of the same residual.
    pub residual_l2: f64,
    /// `L2(d xi)` norm of `sin(mu xi)`.
    pub sine_l2: f64,
    /// Bounds `zeta1 <= int eta^2 d xi <= zeta2`, namely `min p` and `max p`.
    pub zeta1: f64,
    pub zeta2: f64,
    /// Amplitude bounds implied by the two identities above.
    pub r1: f64,
    pub r2: f64,
}

/// Transform a normalized eigenpair of a smooth profile.
///
/// Requires `(c_M + eps) mu^2 <= lambda <= (c_M + big_lambda) mu^2`.
pub fn liouville_transform(
    profile: &CelerityProfile,
    pair: &FiberEigenpair,
    eps: f64,
    big_lambda: f64,
) -> Result<LiouvilleTransform> {
    if !profile.is_smooth() {
        return Err(Error::NotSmoothProfile);
    }
    let (mu, lambda) = (pair.mu(), pair.lambda());
    let mu2 = mu * mu;
    if !(eps > 0.0 && big_lambda >= eps) {
        return Err(Error::InvalidArgument(format!("need 0 < eps <= Lambda, got {eps}, {big_lambda}")));
    }
    if lambda < (profile.c_max() + eps) * mu2 || lambda > (profile.c_max() + big_lambda) * mu2 {
        return Err(Error::OutOfSector { mu, lambda });
    }

    let p = |y: f64| lambda / mu2 - profile.value(y);
    let speed = |y: f64| (p(y) / profile.value(y)).sqrt();
    let eta_at = |y: f64| (profile.value(y) * p(y)).powf(0.25) * pair.value_at(y);

    let grid = pair.grid();
    let n = grid.len();
    let mut xi = vec![0.0; n];
    for i in 1..n {
        xi[i] = xi[i - 1] + gl4(grid[i - 1], grid[i], &speed);
    }
    let eta: Vec<f64> = grid.iter().map(|&y| eta_at(y)).collect();

    // quadrature nodes in y with their xi values and d xi weights
    let mut nodes = Vec::with_capacity(4 * (n - 1));
    for i in 0..n - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            let y = mid + half * x;
            let xi_y = xi[i] + gl4(a, y, &speed);
            nodes.push((eta_at(y), xi_y, w * half * speed(y)));
        }
    }

    let mut dot = 0.0;
    let mut sin_sq = 0.0;
    for &(e, x, w) in &nodes {
        let s = (mu * x).sin();
        dot += w * e * s;
        sin_sq += w * s * s;
    }
    let alpha = dot / sin_sq;

    let mut residual_sup: f64 = 0.0;
    let mut residual_sq = 0.0;
    for &(e, x, w) in &nodes {
        let r = e - alpha * (mu * x).sin();
        residual_sup = residual_sup.max(r.abs());
        residual_sq += w * r * r;
    }
    for (e, x) in eta.iter().zip(&xi) {
        residual_sup = residual_sup.max((e - alpha * (mu * x).sin()).abs());
    }

    let samples = profile.dense_sample();
    let (zeta1, zeta2) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
        let v = p(y);
        (lo.min(v), hi.max(v))
    });
    let residual_l2 = residual_sq.sqrt();
    let sine_l2 = sin_sq.sqrt();
    Ok(LiouvilleTransform {
        xi,
        eta,
        alpha,
        residual_sup,
        residual_l2,
        sine_l2,
        zeta1,
        zeta2,
        r1: (zeta1.sqrt() - residual_l2) / sine_l2,
        r2: (zeta2.sqrt() + residual_l2) / sine_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{eigenpair, GridSpec};
    use crate::profile::{PiecewiseConstant, Preset, Representation};

    #[test]
    fn constant_profile_is_exactly_sinusoidal() {
        let p = CelerityProfile::preset(Preset::Constant { value: 1.0 }, std::f64::consts::PI).unwrap();
        let e = eigenpair(&p, 1.0, 3, &GridSpec::Uniform(400)).unwrap();
        let lt = liouville_transform(&p, &e, 0.5, 20.0).unwrap();
        assert!(lt.residual_sup < 1e-8, "{}", lt.residual_sup);
        assert!(lt.r1 <= lt.alpha.abs() && lt.alpha.abs() <= lt.r2);
    }

    #[test]
    fn rejects_rough_profiles_and_outside_sector() {
        let pc = CelerityProfile::new(
            Representation::PiecewiseConstant(PiecewiseConstant::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0]).unwrap()),
            2.0,
        )
        .unwrap();
        let e = eigenpair(&pc, 1.0, 1, &GridSpec::Uniform(20)).unwrap();
        assert!(matches!(liouville_transform(&pc, &e, 0.5, 5.0), Err(Error::NotSmoothProfile)));

        let p = CelerityProfile::preset(Preset::SineBump { base: 2.0, amplitude: 0.5 }, 3.0).unwrap();
        let e = eigenpair(&p, 5.0, 1, &GridSpec::Uniform(50)).unwrap();
        assert!(matches!(liouville_transform(&p, &e, 0.5, 5.0), Err(Error::OutOfSector { .. })));
    }
}
