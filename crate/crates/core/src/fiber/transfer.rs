//! Exact propagation across constant-coefficient pieces.
//!
//! Inside a piece of value `c` the fiber equation reduces to
//! `u'' = -q u` with `q = (lambda - c mu^2) / c`, so the state `(u, c u')`
//! moves by a rotation (`q > 0`), a hyperbolic map (`q < 0`) or a shear
//! (`q = 0`). All three have unit determinant.

use crate::error::{Error, Result};
use crate::profile::PiecewiseConstant;
use crate::quadrature::{sinh_minus_x, x_minus_sin};
use std::f64::consts::PI;

use super::pruefer::PruferState;

/// 2x2 map taking `(u, c u')` at the start of a piece to its end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix2x2 {
    pub m: [[f64; 2]; 2],
}

impl TransferMatrix2x2 {
    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0], [0.0, 1.0]] }
    }

    /// Transfer matrix across a piece of value `c` and length `len`.
    pub fn for_piece(c: f64, mu: f64, lambda: f64, len: f64) -> Self {
        Segment::new(c, mu, lambda).matrix(len)
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, state: (f64, f64)) -> (f64, f64) {
        (
            self.m[0][0] * state.0 + self.m[0][1] * state.1,
            self.m[1][0] * state.0 + self.m[1][1] * state.1,
        )
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Self) -> Self {
        let a = &self.m;
        let b = &first.m;
        Self {
            m: [
                [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
                [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Regime {
    Oscillatory,
    Evanescent,
    Linear,
}

/// Closed-form solution of the fiber equation on one constant piece.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub c: f64,
    /// `sqrt(|q|)`.
    pub rate: f64,
    pub regime: Regime,
}

impl Segment {
    pub fn new(c: f64, mu: f64, lambda: f64) -> Self {
        let q = (lambda - c * mu * mu) / c;
        let regime = if q > 0.0 {
            Regime::Oscillatory
        } else if q < 0.0 {
            Regime::Evanescent
        } else {
            Regime::Linear
        };
        Self { c, rate: q.abs().sqrt(), regime }
    }

    pub fn matrix(&self, s: f64) -> TransferMatrix2x2 {
        let (c, w) = (self.c, self.rate);
        let m = match self.regime {
            Regime::Oscillatory => {
                let (sn, cs) = (w * s).sin_cos();
                [[cs, sn / (c * w)], [-c * w * sn, cs]]
            }
            Regime::Evanescent => {
                let (sh, ch) = ((w * s).sinh(), (w * s).cosh());
                [[ch, sh / (c * w)], [c * w * sh, ch]]
            }
            Regime::Linear => [[1.0, s / c], [0.0, 1.0]],
        };
        TransferMatrix2x2 { m }
    }

    /// State after travelling `s` from `(u0, f0)`.
    pub fn state_at(&self, u0: f64, f0: f64, s: f64) -> (f64, f64) {
        self.matrix(s).apply((u0, f0))
    }

    /// `int_0^s u^2` for the solution starting at `(u0, f0)`.
    pub fn integral_u2(&self, u0: f64, f0: f64, s: f64) -> f64 {
        let c = self.c;
        let w = self.rate;
        match self.regime {
            Regime::Oscillatory => {
                let a = u0;
                let b = f0 / (c * w);
                let x = w * s;
                // int cos^2 = (2x + sin 2x)/(4w), int sin^2 = (2x - sin 2x)/(4w)
                let sin2 = x_minus_sin(2.0 * x) / (4.0 * w);
                let cos2 = s - sin2;
                let cross = 2.0 * x.sin().powi(2) / (2.0 * w);
                a * a * cos2 + b * b * sin2 + a * b * cross
            }
            Regime::Evanescent => {
                let a = u0;
                let b = f0 / (c * w);
                let x = w * s;
                let sinh2 = sinh_minus_x(2.0 * x) / (4.0 * w);
                let cosh2 = s + sinh2;
                let cross = 2.0 * x.sinh().powi(2) / (2.0 * w);
                a * a * cosh2 + b * b * sinh2 + a * b * cross
            }
            Regime::Linear => {
                let b = f0 / c;
                u0 * u0 * s + u0 * b * s * s + b * b * s * s * s / 3.0
            }
        }
    }

    /// Scale linking the Pruefer angle to the uniformly rotating angle of
    /// an oscillatory piece: `tan(theta) = tan(phi) / scale`.
    pub fn phase_scale(&self) -> f64 {
        self.c * self.rate
    }

    /// Advance a Pruefer state by `s` (either sign) exactly, keeping the
    /// angle continuous.
    pub fn advance(&self, state: PruferState, s: f64) -> PruferState {
        match self.regime {
            Regime::Oscillatory => {
                let sigma = self.phase_scale();
                let phi0 = rescale_angle(state.theta, sigma);
                let phi1 = phi0 + self.rate * s;
                let theta = rescale_angle(phi1, 1.0 / sigma);
                let norm = |phi: f64| {
                    let (sn, cs) = phi.sin_cos();
                    sn * sn + sigma * sigma * cs * cs
                };
                let log_r = state.log_r + 0.5 * (norm(phi1) / norm(phi0)).ln();
                PruferState { theta, log_r }
            }
            Regime::Evanescent => {
                let x = self.rate * s;
                let t = x.tanh();
                let cw = self.c * self.rate;
                let (sn, cs) = state.theta.sin_cos();
                let u = sn + cs * t / cw;
                let f = sn * cw * t + cs;
                let log_cosh = x.abs() + (-2.0 * x.abs()).exp().ln_1p() - std::f64::consts::LN_2;
                PruferState {
                    theta: lift_near(u.atan2(f), state.theta),
                    log_r: state.log_r + log_cosh + 0.5 * (u * u + f * f).ln(),
                }
            }
            Regime::Linear => {
                let (sn, cs) = state.theta.sin_cos();
                let u = sn + cs * s / self.c;
                let f = cs;
                PruferState {
                    theta: lift_near(u.atan2(f), state.theta),
                    log_r: state.log_r + 0.5 * (u * u + f * f).ln(),
                }
            }
        }
    }
}

/// Map an angle through `tan(out) = scale * tan(in)`, continuously and
/// fixing every multiple of pi/2.
pub(crate) fn rescale_angle(angle: f64, scale: f64) -> f64 {
    let m = (angle / PI).round();
    let r = angle - m * PI;
    if r.abs() >= 0.5 * PI {
        return m * PI + r.signum() * 0.5 * PI;
    }
    m * PI + (scale * r.tan()).atan()
}

/// The lift of `raw` (defined modulo 2 pi) within pi of `reference`.
pub(crate) fn lift_near(raw: f64, reference: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut d = (raw - reference) % two_pi;
    if d > PI {
        d -= two_pi;
    } else if d <= -PI {
        d += two_pi;
    }
    reference + d
}

/// One piece of a piecewise-constant propagation.
#[derive(Debug, Clone, Copy)]
pub struct PieceTrace {
    pub start: f64,
    pub end: f64,
    pub c: f64,
    pub matrix: TransferMatrix2x2,
    pub state_in: (f64, f64),
    pub state_out: (f64, f64),
}

/// Result of [`propagate_pc`].
#[derive(Debug, Clone)]
pub struct PcPropagation {
    pub end: (f64, f64),
    pub pieces: Vec<PieceTrace>,
}

/// Propagate `(u, c u')` from `y = 0` to `y = H` across every piece.
///
/// `u` and the flux `c u'` are continuous at every breakpoint; the slope
/// `u'` jumps by the ratio of adjacent values.
pub fn propagate_pc(
    pc: &PiecewiseConstant,
    mu: f64,
    lambda: f64,
    state0: (f64, f64),
) -> Result<PcPropagation> {
    if state0 == (0.0, 0.0) {
        return Err(Error::InvalidArgument("initial state must be non-zero".into()));
    }
    let bp = pc.breakpoints();
    let mut state = state0;
    let mut pieces = Vec::with_capacity(pc.num_pieces());
    for (j, &c) in pc.values().iter().enumerate() {
        let matrix = TransferMatrix2x2::for_piece(c, mu, lambda, bp[j + 1] - bp[j]);
        let out = matrix.apply(state);
        pieces.push(PieceTrace { start: bp[j], end: bp[j + 1], c, matrix, state_in: state, state_out: out });
        state = out;
    }
    Ok(PcPropagation { end: state, pieces })
}

/// Exact Pruefer state at `y = H` for the solution with `u(0) = 0`,
/// `c u'(0) = 1`.
pub(crate) fn pc_phase_at_end(pc: &PiecewiseConstant, mu: f64, lambda: f64) -> PruferState {
    let bp = pc.breakpoints();
    let mut state = PruferState { theta: 0.0, log_r: 0.0 };
    for (j, &c) in pc.values().iter().enumerate() {
        state = Segment::new(c, mu, lambda).advance(state, bp[j + 1] - bp[j]);
    }
    state
}
