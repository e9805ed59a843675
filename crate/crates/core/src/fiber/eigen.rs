//! Eigenvalues by index and windows of the spectrum.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::profile::CelerityProfile;

use super::pruefer::{advance_smooth, PruferState};
use super::transfer::pc_phase_at_end;

/// Pruefer phase `theta(H; lambda)` of the solution with `u(0) = 0`.
///
/// Exact for piecewise-constant profiles; otherwise integrated knot to
/// knot. The number of eigenvalues `<= lambda` is `floor(theta / pi)`.
pub fn winding(profile: &CelerityProfile, mu: f64, lambda: f64) -> Result<f64> {
    if let Some(pc) = profile.as_piecewise_constant() {
        return Ok(pc_phase_at_end(pc, mu, lambda).theta);
    }
    let mut state = PruferState::new(0.0, 0.0);
    for w in profile.knots().windows(2) {
        state = advance_smooth(profile, mu, lambda, w[0], w[1], state, |_| {})?;
    }
    Ok(state.theta)
}

/// Number of eigenvalues `<= lambda` of the fiber with frequency `mu`.
pub fn eigenvalue_count(profile: &CelerityProfile, mu: f64, lambda: f64) -> Result<usize> {
    Ok((winding(profile, mu, lambda)? / PI).floor().max(0.0) as usize)
}

/// The `ell`-th eigenvalue (`ell >= 1`) of the fiber with frequency `mu`.
///
/// The search starts from the comparison bracket
/// `c_m (mu^2 + (ell pi / H)^2) <= lambda <= c_M (mu^2 + (ell pi / H)^2)`.
/// Piecewise-constant profiles are bisected to full double precision on the
/// exact phase; other profiles use an Illinois iteration on the integrated
/// phase.
pub fn eigenvalue(profile: &CelerityProfile, mu: f64, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidArgument("eigenvalue index starts at 1".into()));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    let base = mu * mu + (ell as f64 * PI / profile.height()).powi(2);
    let lo = profile.c_min() * base * (1.0 - 1e-8);
    let hi = profile.c_max() * base * (1.0 + 1e-8);
    let target = ell as f64 * PI;
    let g = |lambda: f64| winding(profile, mu, lambda).map(|t| t - target);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if !(g_lo <= 0.0 && g_hi >= 0.0) {
        return Err(Error::BracketFailure { ell, lo, hi });
    }
    if profile.as_piecewise_constant().is_some() {
        bisect(g, lo, hi)
    } else {
        illinois(g, lo, hi, g_lo, g_hi)
    }
}

fn bisect<G: Fn(f64) -> Result<f64>>(g: G, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn illinois<G: Fn(f64) -> Result<f64>>(g: G, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64> {
    let mut side = 0i8;
    let mut x = 0.5 * (a + b);
    for iter in 0..200 {
        if b - a <= 1e-13 * b.abs().max(1e-2) {
            return Ok(0.5 * (a + b));
        }
        let width = b - a;
        x = if fb != fa { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        // Every fourth step is a plain bisection to guarantee progress.
        if !(x > a && x < b) || iter % 4 == 3 {
            x = 0.5 * (a + b);
        }
        let fx = g(x)?;
        if fx.abs() <= 1e-13 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        debug_assert!(b - a <= width);
    }
    Ok(x)
}

/// All eigenvalues in `(lambda_lo, lambda_hi]` with their indices, in
/// increasing order.
pub fn spectrum_in_range(
    profile: &CelerityProfile,
    mu: f64,
    lambda_lo: f64,
    lambda_hi: f64,
) -> Result<Vec<(usize, f64)>> {
    if !(lambda_lo < lambda_hi) {
        return Err(Error::InvalidArgument(format!("empty window ({lambda_lo}, {lambda_hi})")));
    }
    let first = eigenvalue_count(profile, mu, lambda_lo)? + 1;
    let last = eigenvalue_count(profile, mu, lambda_hi)?;
    let mut out = Vec::new();
    for ell in first..=last {
        let lambda = eigenvalue(profile, mu, ell)?;
        if lambda > lambda_lo && lambda <= lambda_hi {
            out.push((ell, lambda));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{Interpolation, Preset};

    #[test]
    fn constant_closed_form() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let l = eigenvalue(&p, 3.0, 2).unwrap();
        assert!((l - 13.0).abs() < 1e-12 * 13.0);
        let p = CelerityProfile::constant(4.0, PI).unwrap();
        let l = eigenvalue(&p, 1.0, 2).unwrap();
        assert!((l - 20.0).abs() < 1e-12 * 20.0);
    }

    #[test]
    fn constant_preset_uses_exact_path() {
        let p = CelerityProfile::preset(Preset::Constant { value: 2.5 }, 2.0).unwrap();
        let l = eigenvalue(&p, 1.5, 3).unwrap();
        let exact = 2.5 * (2.25 + (3.0 * PI / 2.0).powi(2));
        assert!((l - exact).abs() < 1e-13 * exact);
    }

    #[test]
    fn smooth_profile_phase_hits_target() {
        let p = CelerityProfile::preset(Preset::LinearRamp { start: 1.0, end: 2.0 }, PI).unwrap();
        for ell in 1..=4 {
            let l = eigenvalue(&p, 2.0, ell).unwrap();
            let th = winding(&p, 2.0, l).unwrap();
            assert!((th / PI - ell as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn step_samples_match_piecewise_constant() {
        let a = CelerityProfile::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 4.0, 9.0], Interpolation::Step).unwrap();
        let b = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0], vec![1.0, 4.0]).unwrap();
        assert_eq!(eigenvalue(&a, 1.0, 2).unwrap(), eigenvalue(&b, 1.0, 2).unwrap());
    }

    #[test]
    fn spectrum_window() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let s = spectrum_in_range(&p, 1.0, 1.5, 11.0).unwrap();
        let idx: Vec<usize> = s.iter().map(|x| x.0).collect();
        assert_eq!(idx, vec![1, 2, 3]);
        for ((_, l), e) in s.iter().zip([2.0, 5.0, 10.0]) {
            assert!((l - e).abs() < 1e-12 * e);
        }
        assert!(spectrum_in_range(&p, 1.0, 2.1, 2.2).unwrap().is_empty());
        assert!(spectrum_in_range(&p, 1.0, 3.0, 3.0).is_err());
    }

    #[test]
    fn index_zero_rejected() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        assert!(matches!(eigenvalue(&p, 1.0, 0), Err(Error::InvalidArgument(_))));
    }
}
