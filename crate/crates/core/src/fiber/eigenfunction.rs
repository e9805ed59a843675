//! Normalized eigenfunctions sampled on a grid.
//!
//! The solution is built from both ends: a forward sweep from `y = 0` and a
//! backward sweep from `y = H` meet at the knot where `lambda - c mu^2` is
//! largest. Each sweep only ever follows the solution in the direction in
//! which it grows, so evanescent regions do not amplify rounding errors.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::profile::CelerityProfile;
use crate::quadrature::{gl4, Hermite};

use super::eigen::eigenvalue;
use super::pruefer::{rhs, segment_coefficient, PruferState};
use super::transfer::Segment;

/// Phase mismatch (radians) above which `lambda` is rejected.
const MATCH_TOL: f64 = 1e-6;

/// Sampling grid for an eigenfunction. Profile knots are always added.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// `n` equal intervals on `[0, H]`.
    Uniform(usize),
    /// Explicit sample positions inside `[0, H]`.
    Points(Vec<f64>),
}

impl GridSpec {
    /// Sorted grid containing `0`, `H`, every profile knot and the requested
    /// points. Requested points closer than `1e-12 H` to a knot are dropped.
    pub fn build(&self, profile: &CelerityProfile) -> Result<Vec<f64>> {
        let h = profile.height();
        let mut pts: Vec<f64> = match self {
            GridSpec::Uniform(n) => {
                if *n < 2 {
                    return Err(Error::InvalidArgument("grid needs at least two intervals".into()));
                }
                (0..=*n).map(|i| h * i as f64 / *n as f64).collect()
            }
            GridSpec::Points(p) => {
                if let Some(&y) = p.iter().find(|&&y| !(0.0..=h).contains(&y)) {
                    return Err(Error::OutOfDomain { y, height: h });
                }
                p.clone()
            }
        };
        let knots = profile.knots();
        let tol = 1e-12 * h;
        pts.retain(|&y| {
            let i = knots.partition_point(|&k| k < y);
            let near = |j: usize| knots.get(j).is_some_and(|&k| (k - y).abs() <= tol);
            !(near(i) || (i > 0 && near(i - 1)))
        });
        pts.extend(knots);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
        if pts.len() < 3 {
            // a single interior point is always available
            pts.insert(1, 0.5 * h);
        }
        Ok(pts)
    }
}

/// A normalized fiber eigenpair: `int_0^H u^2 = 1`, `u'(0) > 0`.
#[derive(Debug, Clone)]
pub struct FiberEigenpair {
    mu: f64,
    ell: usize,
    lambda: f64,
    grid: Vec<f64>,
    u: Vec<f64>,
    flux: Vec<f64>,
    phase: Vec<f64>,
    c_right: Vec<f64>,
    c_left: Vec<f64>,
    cell_mass: Vec<f64>,
    exact: bool,
    mismatch: f64,
}

impl FiberEigenpair {
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Samples of `c u'`.
    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    /// Continuous Pruefer phase at each grid point; starts at 0 and ends at
    /// `ell * pi`.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn height(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Phase discrepancy observed where the two sweeps met.
    pub fn phase_mismatch(&self) -> f64 {
        self.mismatch
    }

    /// True when the eigenfunction is represented by closed-form pieces.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// `c` just right of grid point `i`.
    pub fn coefficient_right(&self, i: usize) -> f64 {
        self.c_right[i]
    }

    /// `c` just left of grid point `i`.
    pub fn coefficient_left(&self, i: usize) -> f64 {
        self.c_left[i]
    }

    /// `int u^2` over grid interval `i`.
    pub fn cell_mass(&self, i: usize) -> f64 {
        self.cell_mass[i]
    }

    /// Grid interval containing `y` (the last one for `y = H`).
    pub fn interval_index(&self, y: f64) -> usize {
        self.grid.partition_point(|&g| g <= y).saturating_sub(1).min(self.grid.len() - 2)
    }

    fn segment(&self, i: usize) -> Segment {
        Segment::new(self.c_right[i], self.mu, self.lambda)
    }

    fn hermite_pair(&self, i: usize) -> (Hermite, Hermite) {
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let g = |c: f64| c * self.mu * self.mu - self.lambda;
        let hu = Hermite::new(
            a,
            b,
            self.u[i],
            self.u[i + 1],
            self.flux[i] / self.c_right[i],
            self.flux[i + 1] / self.c_left[i + 1],
        );
        let hf = Hermite::new(
            a,
            b,
            self.flux[i],
            self.flux[i + 1],
            g(self.c_right[i]) * self.u[i],
            g(self.c_left[i + 1]) * self.u[i + 1],
        );
        (hu, hf)
    }

    /// `(u(y), c u'(y))`, exact on piecewise-constant profiles and cubic
    /// Hermite otherwise.
    pub fn state_at(&self, y: f64) -> (f64, f64) {
        let y = y.clamp(0.0, self.height());
        let i = self.interval_index(y);
        if y == self.grid[i] {
            return (self.u[i], self.flux[i]);
        }
        if self.exact {
            self.segment(i).state_at(self.u[i], self.flux[i], y - self.grid[i])
        } else {
            let (hu, hf) = self.hermite_pair(i);
            (hu.value(y), hf.value(y))
        }
    }

    pub fn value_at(&self, y: f64) -> f64 {
        self.state_at(y).0
    }

    pub fn flux_at(&self, y: f64) -> f64 {
        self.state_at(y).1
    }

    fn partial_mass(&self, i: usize, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if lo <= self.grid[i] && hi >= self.grid[i + 1] {
            return self.cell_mass[i];
        }
        if self.exact {
            let seg = self.segment(i);
            let (u0, f0) = seg.state_at(self.u[i], self.flux[i], lo - self.grid[i]);
            seg.integral_u2(u0, f0, hi - lo)
        } else {
            let (hu, _) = self.hermite_pair(i);
            gl4(lo, hi, |y| hu.value(y).powi(2))
        }
    }

    /// `int_a^b u^2 dy`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let h = self.height();
        let (a, b) = (a.clamp(0.0, h), b.clamp(0.0, h));
        if b <= a {
            return 0.0;
        }
        let (i0, i1) = (self.interval_index(a), self.interval_index(b));
        (i0..=i1).map(|i| self.partial_mass(i, a.max(self.grid[i]), b.min(self.grid[i + 1]))).sum()
    }

    /// `int_0^H u^2 dy`; equals one up to quadrature error.
    pub fn norm_sq(&self) -> f64 {
        self.cell_mass.iter().sum()
    }

    /// Sign changes between consecutive interior samples.
    pub fn interior_sign_changes(&self) -> usize {
        let n = self.u.len();
        let mut last = 0.0f64;
        let mut count = 0;
        for &v in &self.u[1..n - 1] {
            if v != 0.0 {
                if last != 0.0 && v.signum() != last.signum() {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }

    /// `int_0^H u v dy` on the union of both grids.
    pub fn inner_product(&self, other: &FiberEigenpair) -> f64 {
        let mut pts: Vec<f64> = self.grid.iter().chain(other.grid.iter()).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let rate = self.local_rate(mid).max(other.local_rate(mid));
                // keep the phase advance per quadrature panel below 1/4
                let m = (4.0 * rate * (w[1] - w[0])).ceil().max(1.0) as usize;
                let len = (w[1] - w[0]) / m as f64;
                (0..m)
                    .map(|j| {
                        let a = w[0] + j as f64 * len;
                        gl4(a, a + len, |y| self.value_at(y) * other.value_at(y))
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// `sqrt(|lambda / c - mu^2|)` on the grid interval containing `y`.
    fn local_rate(&self, y: f64) -> f64 {
        let i = self.interval_index(y);
        let c = 0.5 * (self.c_right[i] + self.c_left[i + 1]);
        (self.lambda / c - self.mu * self.mu).abs().sqrt()
    }
}

/// Eigenvalue by index together with its eigenfunction.
pub fn eigenpair(profile: &CelerityProfile, mu: f64, ell: usize, grid: &GridSpec) -> Result<FiberEigenpair> {
    let lambda = eigenvalue(profile, mu, ell)?;
    eigenfunction(profile, mu, lambda, grid)
}

/// Sample the normalized eigenfunction for the eigenvalue `lambda`.
pub fn eigenfunction(profile: &CelerityProfile, mu: f64, lambda: f64, grid: &GridSpec) -> Result<FiberEigenpair> {
    let grid = grid.build(profile)?;
    let n = grid.len();
    let exact = profile.as_piecewise_constant().is_some();
    let c_right: Vec<f64> = grid.iter().map(|&y| profile.value(y)).collect();
    let c_left: Vec<f64> = grid.iter().map(|&y| profile.value_left(y)).collect();

    let m = matching_index(&grid, &c_left, &c_right, mu, lambda);
    let mut theta = vec![0.0; n];
    let mut log_r = vec![0.0; n];
    // local int u^2 per interval, in units of exp(2 log_r) at its starting knot
    let mut local = vec![0.0; n - 1];

    let mut state = PruferState::new(0.0, 0.0);
    for i in 0..m {
        let (next, mass) = step(profile, mu, lambda, exact, &c_right, grid[i], grid[i + 1], i, state)?;
        local[i] = mass;
        state = next;
        theta[i + 1] = state.theta;
        log_r[i + 1] = state.log_r;
    }
    let left_at_match = state;

    let mut state = PruferState::new(0.0, 0.0);
    let mut right = vec![PruferState::new(0.0, 0.0); n];
    for i in (m..n - 1).rev() {
        let (next, mass) = step(profile, mu, lambda, exact, &c_right, grid[i + 1], grid[i], i, state)?;
        local[i] = mass;
        state = next;
        right[i] = state;
    }

    let diff = left_at_match.theta - right[m].theta;
    let ell = (diff / PI).round();
    let mismatch = diff - ell * PI;
    if ell < 1.0 || mismatch.abs() > MATCH_TOL {
        return Err(Error::NotAnEigenvalue { lambda, mismatch });
    }
    let shift = left_at_match.log_r - right[m].log_r;
    for i in m + 1..n {
        theta[i] = right[i].theta + ell * PI;
        log_r[i] = right[i].log_r + shift;
    }

    let top = log_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut u: Vec<f64> = (0..n).map(|i| (log_r[i] - top).exp() * theta[i].sin()).collect();
    let mut flux: Vec<f64> = (0..n).map(|i| (log_r[i] - top).exp() * theta[i].cos()).collect();
    u[0] = 0.0;
    u[n - 1] = 0.0;

    // interval masses: forward intervals start at knot i, backward ones at i + 1
    let mut cell_mass: Vec<f64> = (0..n - 1)
        .map(|i| {
            let anchor = if i < m { i } else { i + 1 };
            local[i] * (2.0 * (log_r[anchor] - top)).exp()
        })
        .collect();
    if exact {
        for (i, cm) in cell_mass.iter_mut().enumerate() {
            *cm = exact_cell_mass(Segment::new(c_right[i], mu, lambda), u[i], flux[i], u[i + 1], flux[i + 1], grid[i + 1] - grid[i]);
        }
    }

    let norm_sq: f64 = cell_mass.iter().sum();
    let scale = norm_sq.sqrt().recip();
    u.iter_mut().for_each(|v| *v *= scale);
    flux.iter_mut().for_each(|v| *v *= scale);
    cell_mass.iter_mut().for_each(|v| *v /= norm_sq);

    Ok(FiberEigenpair {
        mu,
        ell: ell as usize,
        lambda,
        grid,
        u,
        flux,
        phase: theta,
        c_right,
        c_left,
        cell_mass,
        exact,
        mismatch,
    })
}

/// Interior knot where the solution oscillates fastest; ties resolved by
/// taking the median candidate.
fn matching_index(grid: &[f64], c_left: &[f64], c_right: &[f64], mu: f64, lambda: f64) -> usize {
    let n = grid.len();
    let score: Vec<f64> = (1..n - 1).map(|i| lambda - mu * mu * c_left[i].max(c_right[i])).collect();
    let best = score.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (best.abs() + lambda.abs());
    let candidates: Vec<usize> = (1..n - 1).filter(|&i| score[i - 1] >= best - tol).collect();
    candidates[candidates.len() / 2]
}

/// Advance from `from` to `to` across one grid interval, returning the new
/// state and `int u^2` over the interval relative to the starting amplitude.
#[allow(clippy::too_many_arguments)]
fn step(
    profile: &CelerityProfile,
    mu: f64,
    lambda: f64,
    exact: bool,
    c_right: &[f64],
    from: f64,
    to: f64,
    interval: usize,
    state: PruferState,
) -> Result<(PruferState, f64)> {
    if exact {
        let seg = Segment::new(c_right[interval], mu, lambda);
        // masses are recomputed from the final samples
        return Ok((seg.advance(state, to - from), 0.0));
    }
    let coef = segment_coefficient(profile, from, to);
    let mu2 = mu * mu;
    let solver: Dopri5<3> = Dopri5::new([1e-11, 1e-11, 1e-14], [1e-12, 1e-12, 1e-11]);
    let l0 = state.log_r;
    let end = solver.integrate(
        |y, s: &[f64; 3]| {
            let d = rhs(coef(y), mu2, lambda, s[0]);
            [d[0], d[1], (2.0 * (s[1] - l0)).exp() * s[0].sin().powi(2)]
        },
        from,
        to,
        [state.theta, state.log_r, 0.0],
        |_| {},
    )?;
    Ok((PruferState::new(end[0], end[1]), end[2].abs()))
}

/// `int u^2` over one constant piece, integrated from whichever end carries
/// the larger amplitude to avoid cancellation in decaying solutions.
fn exact_cell_mass(seg: Segment, u0: f64, f0: f64, u1: f64, f1: f64, len: f64) -> f64 {
    if u0 * u0 + f0 * f0 >= u1 * u1 + f1 * f1 {
        seg.integral_u2(u0, f0, len)
    } else {
        // y -> -y maps the backward solution to a forward one with flux negated
        seg.integral_u2(u1, -f1, len)
    }
}
