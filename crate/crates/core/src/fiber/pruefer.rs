//! Pruefer phase/amplitude integration for arbitrary profiles.

use std::f64::consts::PI;

use crate::error::Result;
use crate::ode::{Dopri5, Step};
use crate::profile::CelerityProfile;
use crate::quadrature::Hermite;

/// Polar form of the state: `u = r sin(theta)`, `c u' = r cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruferState {
    pub theta: f64,
    pub log_r: f64,
}

impl PruferState {
    pub fn new(theta: f64, log_r: f64) -> Self {
        Self { theta, log_r }
    }

    /// `r^2 = u^2 + (c u')^2`.
    pub fn amplitude_sq(&self) -> f64 {
        (2.0 * self.log_r).exp()
    }

    pub fn u(&self) -> f64 {
        self.log_r.exp() * self.theta.sin()
    }

    pub fn flux(&self) -> f64 {
        self.log_r.exp() * self.theta.cos()
    }
}

/// Right-hand side of the phase/amplitude system at coefficient value `c`.
#[inline]
pub(crate) fn rhs(c: f64, mu2: f64, lambda: f64, theta: f64) -> [f64; 2] {
    let (s, co) = theta.sin_cos();
    let g = lambda - c * mu2;
    [co * co / c + g * s * s, (1.0 / c - g) * s * co]
}

pub(crate) fn integrator() -> Dopri5<2> {
    Dopri5::new([1e-11, 1e-11], [1e-12, 1e-12])
}

/// Coefficient seen by the integrator on the knot interval `[a, b]`.
/// Piecewise-constant profiles use the piece value so that breakpoints are
/// never sampled from the wrong side.
pub(crate) fn segment_coefficient(profile: &CelerityProfile, a: f64, b: f64) -> impl Fn(f64) -> f64 + '_ {
    let frozen = profile.as_piecewise_constant().map(|_| profile.value(0.5 * (a + b)));
    let (lo, hi) = (a.min(b), a.max(b));
    move |y: f64| match frozen {
        Some(c) => c,
        None => profile.value(y.clamp(lo, hi)),
    }
}

/// Integrate the Pruefer system from `y0` to `y1` (either direction), which
/// must not straddle a knot. Every accepted step is passed to `observer`.
pub(crate) fn advance_smooth<O>(
    profile: &CelerityProfile,
    mu: f64,
    lambda: f64,
    y0: f64,
    y1: f64,
    state: PruferState,
    observer: O,
) -> Result<PruferState>
where
    O: FnMut(&Step<2>),
{
    let coef = segment_coefficient(profile, y0, y1);
    let mu2 = mu * mu;
    let end = integrator().integrate(
        |y, s: &[f64; 2]| rhs(coef(y), mu2, lambda, s[0]),
        y0,
        y1,
        [state.theta, state.log_r],
        observer,
    )?;
    Ok(PruferState { theta: end[0], log_r: end[1] })
}

/// Output of [`shoot_pruefer`].
#[derive(Debug, Clone)]
pub struct PruferShot {
    /// Phase at `y = H`.
    pub theta_end: f64,
    /// `(y, state)` at every accepted integrator step, starting at `y = 0`.
    pub trace: Vec<(f64, PruferState)>,
    /// Zeros of `u` in `(0, H]`, where the phase crosses a multiple of pi.
    pub zeros: Vec<f64>,
}

/// Integrate the Pruefer system from `theta(0) = 0`, `log r(0) = 0` across
/// the whole interval with an adaptive Runge-Kutta method, stopping at
/// every knot of the profile.
pub fn shoot_pruefer(profile: &CelerityProfile, mu: f64, lambda: f64) -> Result<PruferShot> {
    let knots = profile.knots();
    let mut state = PruferState::new(0.0, 0.0);
    let mut trace = vec![(0.0, state)];
    let mut zeros = Vec::new();
    for w in knots.windows(2) {
        state = advance_smooth(profile, mu, lambda, w[0], w[1], state, |s| {
            trace.push((s.x1, PruferState::new(s.y1[0], s.y1[1])));
            locate_crossings(s, 0.0, &mut zeros);
        })?;
    }
    Ok(PruferShot { theta_end: state.theta, trace, zeros })
}

/// Append the positions inside a forward step where the phase crosses
/// `offset + m pi` for some integer `m`, located on the Hermite interpolant
/// of the phase.
pub(crate) fn locate_crossings(step: &Step<2>, offset: f64, out: &mut Vec<f64>) {
    let k0 = ((step.y0[0] - offset) / PI).floor();
    let k1 = ((step.y1[0] - offset) / PI).floor();
    if k1 <= k0 {
        return;
    }
    let h = Hermite::new(step.x0, step.x1, step.y0[0], step.y1[0], step.dy0[0], step.dy1[0]);
    let mut m = k0 + 1.0;
    while m <= k1 {
        out.push(hermite_root(&h, step.x0, step.x1, offset + m * PI));
        m += 1.0;
    }
}

/// Root of `h(x) = target` on `[a, b]` assuming `h(a) <= target <= h(b)`.
pub(crate) fn hermite_root(h: &Hermite, a: f64, b: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h.value(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_phase_is_multiple_of_pi() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        for l in 1..=5 {
            let shot = shoot_pruefer(&p, 1.0, 1.0 + (l * l) as f64).unwrap();
            assert!((shot.theta_end - l as f64 * PI).abs() < 1e-8, "{l}: {}", shot.theta_end);
            // interior zeros at k pi / l, plus the endpoint
            assert_eq!(shot.zeros.len() as i32, l - 1 + i32::from(shot.theta_end >= l as f64 * PI));
            for (i, z) in shot.zeros.iter().take((l - 1) as usize).enumerate() {
                assert!((z - (i + 1) as f64 * PI / l as f64).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn amplitude_matches_closed_form() {
        // u = sin(2y)/2, c u' = cos(2y): r^2 = sin^2/4 + cos^2.
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let shot = shoot_pruefer(&p, 1.0, 5.0).unwrap();
        for (y, s) in &shot.trace {
            let exact = (2.0 * y).sin().powi(2) / 4.0 + (2.0 * y).cos().powi(2);
            assert!((s.amplitude_sq() - exact).abs() < 1e-8 * exact.max(1.0));
        }
    }

    #[test]
    fn phase_increases_with_lambda() {
        let p = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0], vec![1.0, 4.0]).unwrap();
        let mut last = -1.0;
        for i in 0..20 {
            let th = shoot_pruefer(&p, 1.0, 1.0 + 3.0 * i as f64).unwrap().theta_end;
            assert!(th > last);
            last = th;
        }
    }
}
