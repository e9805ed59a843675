//! Quantities bounded by the concentration and non-concentration
//! estimates: layer masses, concentration ratios, Pruefer amplitudes, arch
//! structure, piecewise amplitude ratios and family-level checks.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::{advance_smooth, eigenfunction, rescale_angle, FiberEigenpair, GridSpec, PruferState, Regime, Segment};
use crate::profile::{CelerityProfile, WellInterval};
use crate::quadrature::Hermite;
use crate::report::{g12, Csv};
use crate::spectral_grid::{CrossSection, CrossSectionMode, SectorLabel, SpectrumTable};

/// A horizontal slab `a < y < b`, optionally restricted to a window of the
/// cross-section (one sub-interval per side).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub a: f64,
    pub b: f64,
    pub window: Option<Vec<(f64, f64)>>,
}

impl Layer {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b, window: None }
    }

    pub fn with_window(mut self, window: Vec<(f64, f64)>) -> Self {
        self.window = Some(window);
        self
    }

    pub fn validate(&self, height: f64) -> Result<()> {
        check_interval(self.a, self.b, height)
    }
}

fn check_interval(a: f64, b: f64, height: f64) -> Result<()> {
    if 0.0 <= a && a < b && b <= height * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(Error::BadLayer { a, b })
    }
}

/// `int_a^b u^2 dy` for a normalized eigenpair.
pub fn layer_mass(pair: &FiberEigenpair, a: f64, b: f64) -> Result<f64> {
    check_interval(a, b, pair.height())?;
    Ok(pair.mass(a, b))
}

/// Mass fraction of the product mode `phi_k(x') u(y)` inside the layer.
pub fn concentration_ratio(
    pair: &FiberEigenpair,
    cs: &CrossSection,
    mode: &CrossSectionMode,
    layer: &Layer,
) -> Result<f64> {
    layer.validate(pair.height())?;
    let window = match &layer.window {
        Some(w) => cs.window_factor(&mode.indices, w)?,
        None => 1.0,
    };
    Ok((window * pair.mass(layer.a, layer.b)).clamp(0.0, 1.0))
}

/// One arch of the eigenfunction between consecutive zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arch {
    pub left: f64,
    pub right: f64,
    /// Position of the extremum of `|u|` (a zero of the flux).
    pub peak_y: f64,
    /// `u` at the extremum.
    pub peak_u: f64,
    /// `|c u'|` at both ends.
    pub flux_left: f64,
    pub flux_right: f64,
}

impl Arch {
    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

/// Zeros, arches and the Pruefer amplitude `r^2 = u^2 + (c u')^2`.
#[derive(Debug, Clone)]
pub struct AmplitudeTrace {
    /// `0 = z_0 < ... < z_s = H`.
    pub zeros: Vec<f64>,
    pub arches: Vec<Arch>,
    /// `(y, r^2)` at grid points, zeros, flux zeros and integrator steps.
    pub samples: Vec<(f64, f64)>,
    pub min_r2: f64,
    pub min_r2_at: f64,
    pub max_gap: f64,
}

impl AmplitudeTrace {
    /// Number of zeros strictly inside `(0, H)`.
    pub fn interior_zero_count(&self) -> usize {
        self.zeros.len() - 2
    }

    /// `min_i u(z_{i+1/2})^2` over all arches.
    pub fn min_arch_peak_sq(&self) -> f64 {
        self.arches.iter().map(|a| a.peak_u * a.peak_u).fold(f64::INFINITY, f64::min)
    }

    /// Total length of arches lying entirely inside `[a, b]`.
    pub fn covered_length(&self, a: f64, b: f64) -> f64 {
        let tol = 1e-9 * self.zeros.last().copied().unwrap_or(1.0);
        self.arches.iter().filter(|x| x.left >= a - tol && x.right <= b + tol).map(Arch::length).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    Zero,
    FluxZero,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    y: f64,
    kind: EventKind,
    u: f64,
    flux: f64,
}

/// Trace zeros, arch extrema and the amplitude of a normalized eigenpair.
///
/// Zeros are where the Pruefer phase crosses a multiple of pi and arch
/// extrema where it crosses an odd multiple of pi/2. Between those points
/// `r^2` is monotone on constant pieces, so its minimum over the recorded
/// samples is exact there; on smooth profiles every integrator step is
/// sampled as well.
pub fn amplitude_trace(profile: &CelerityProfile, pair: &FiberEigenpair) -> Result<AmplitudeTrace> {
    let grid = pair.grid();
    let n = grid.len();
    let (u, flux, phase) = (pair.u(), pair.flux(), pair.phase());
    let mut events = Vec::new();
    let mut samples: Vec<(f64, f64)> = (0..n).map(|i| (grid[i], u[i] * u[i] + flux[i] * flux[i])).collect();

    for i in 0..n - 1 {
        if pair.is_exact() {
            exact_events(pair, i, &mut events);
        } else {
            smooth_events(profile, pair, i, &mut events, &mut samples)?;
        }
    }
    let _ = phase;

    let h = pair.height();
    let edge = 1e-8 * h;
    let mut zeros = vec![0.0];
    let mut zero_flux = vec![flux[0].abs()];
    for e in events.iter().filter(|e| e.kind == EventKind::Zero && e.y > edge && e.y < h - edge) {
        zeros.push(e.y);
        zero_flux.push(e.flux.abs());
    }
    zeros.push(h);
    zero_flux.push(flux[n - 1].abs());
    for e in &events {
        let r2 = match e.kind {
            EventKind::Zero => e.flux * e.flux,
            EventKind::FluxZero => e.u * e.u,
        };
        samples.push((e.y, r2));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));

    let peaks: Vec<&Event> = events.iter().filter(|e| e.kind == EventKind::FluxZero).collect();
    let arches = zeros
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let best = peaks
                .iter()
                .filter(|p| p.y > w[0] && p.y < w[1])
                .max_by(|a, b| a.u.abs().total_cmp(&b.u.abs()));
            let (peak_y, peak_u) = match best {
                Some(p) => (p.y, p.u),
                None => (0..n)
                    .filter(|&j| grid[j] >= w[0] && grid[j] <= w[1])
                    .map(|j| (grid[j], u[j]))
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .unwrap_or((0.5 * (w[0] + w[1]), pair.value_at(0.5 * (w[0] + w[1])))),
            };
            Arch { left: w[0], right: w[1], peak_y, peak_u, flux_left: zero_flux[i], flux_right: zero_flux[i + 1] }
        })
        .collect();

    let (min_r2_at, min_r2) = samples
        .iter()
        .copied()
        .fold((0.0, f64::INFINITY), |best, s| if s.1 < best.1 { s } else { best });
    let max_gap = zeros.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(AmplitudeTrace { zeros, arches, samples, min_r2, min_r2_at, max_gap })
}

/// Levels `j pi / 2` crossed between two phase values, with the direction.
fn crossed_levels(theta0: f64, theta1: f64) -> Vec<i64> {
    let a = (2.0 * theta0 / PI).floor() as i64;
    let b = (2.0 * theta1 / PI).floor() as i64;
    if b > a {
        (a + 1..=b).collect()
    } else if a > b {
        (b + 1..=a).rev().collect()
    } else {
        Vec::new()
    }
}

fn level_kind(j: i64) -> EventKind {
    if j.rem_euclid(2) == 0 {
        EventKind::Zero
    } else {
        EventKind::FluxZero
    }
}

fn exact_events(pair: &FiberEigenpair, i: usize, out: &mut Vec<Event>) {
    let grid = pair.grid();
    let (y0, len) = (grid[i], grid[i + 1] - grid[i]);
    let (u0, f0) = (pair.u()[i], pair.flux()[i]);
    let seg = Segment::new(pair.coefficient_right(i), pair.mu(), pair.lambda());
    let (th0, th1) = (pair.phase()[i], pair.phase()[i + 1]);
    for j in crossed_levels(th0, th1) {
        let kind = level_kind(j);
        let s = match seg.regime {
            Regime::Oscillatory => {
                let phi0 = rescale_angle(th0, seg.phase_scale());
                ((j as f64 * 0.5 * PI - phi0) / seg.rate).clamp(0.0, len)
            }
            _ => {
                let component = |s: f64| {
                    let (u, f) = seg.state_at(u0, f0, s);
                    if kind == EventKind::Zero {
                        u
                    } else {
                        f
                    }
                };
                sign_change_root(component, 0.0, len)
            }
        };
        let (u, flux) = seg.state_at(u0, f0, s);
        out.push(Event { y: y0 + s, kind, u, flux });
    }
}

/// Root of `f` on `[a, b]` by bisection; when the endpoint signs agree
/// (a root sitting on an endpoint) the endpoint with smaller `|f|` wins.
fn sign_change_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 || fa.signum() == fb.signum() {
        return if fa.abs() <= fb.abs() { a } else { b };
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == fa.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn smooth_events(
    profile: &CelerityProfile,
    pair: &FiberEigenpair,
    i: usize,
    out: &mut Vec<Event>,
    samples: &mut Vec<(f64, f64)>,
) -> Result<()> {
    let grid = pair.grid();
    let (u0, f0) = (pair.u()[i], pair.flux()[i]);
    let start = PruferState::new(pair.phase()[i], 0.5 * (u0 * u0 + f0 * f0).ln());
    let mut steps = Vec::new();
    advance_smooth(profile, pair.mu(), pair.lambda(), grid[i], grid[i + 1], start, |s| steps.push(*s))?;
    let last = steps.len().saturating_sub(1);
    for (k, s) in steps.iter().enumerate() {
        // the last step ends on the stored phase so that counts agree across knots
        let th1 = if k == last { pair.phase()[i + 1] } else { s.y1[0] };
        let theta = Hermite::new(s.x0, s.x1, s.y0[0], th1, s.dy0[0], s.dy1[0]);
        let log_r = Hermite::new(s.x0, s.x1, s.y0[1], s.y1[1], s.dy0[1], s.dy1[1]);
        for j in crossed_levels(s.y0[0], th1) {
            let level = j as f64 * 0.5 * PI;
            let y = sign_change_root(|x| theta.value(x) - level, s.x0, s.x1);
            let r = log_r.value(y).exp();
            let (sn, cs) = level.sin_cos();
            out.push(Event { y, kind: level_kind(j), u: r * sn, flux: r * cs });
        }
        if k != last {
            samples.push((s.x1, (2.0 * s.y1[1]).exp()));
        }
    }
    Ok(())
}

/// Infimum of `min_r2` over a family of non-guided eigenpairs (an estimate
/// of the minimal amplitude restricted to the computed family).
pub fn minimal_amplitude(profile: &CelerityProfile, eps: f64, family: &[FiberEigenpair]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mins: Vec<f64> = family
        .par_iter()
        .map(|pair| {
            require_non_guided(profile, pair, eps)?;
            Ok(amplitude_trace(profile, pair)?.min_r2)
        })
        .collect::<Result<_>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

fn require_non_guided(profile: &CelerityProfile, pair: &FiberEigenpair, eps: f64) -> Result<()> {
    if pair.lambda() >= (profile.c_max() + eps) * pair.mu() * pair.mu() {
        Ok(())
    } else {
        Err(Error::NotInSector { mu: pair.mu(), lambda: pair.lambda() })
    }
}

/// `kappa = (1 / c_m) max(1, (c_M - eps) / eps)`.
pub fn kappa(profile: &CelerityProfile, eps: f64) -> f64 {
    (1.0 / profile.c_min()) * 1f64.max((profile.c_max() - eps) / eps)
}

/// Per-piece amplitudes of a piecewise-constant eigenpair.
#[derive(Debug, Clone)]
pub struct AmplitudeRatios {
    /// `beta_j^2 = u^2 + (c u')^2 / (c_j mu^2 p_j)`, from the start of piece `j`.
    pub beta_sq: Vec<f64>,
    pub max_ratio: f64,
    pub kappa: f64,
    /// `exp(2 kappa TV)`.
    pub envelope: f64,
    /// `1 / (H exp(kappa TV))`.
    pub normalization_floor: f64,
    /// Largest relative defect of the one-step interface identity.
    pub one_step_defect: f64,
    /// Largest relative variation of `beta_j^2` across its own piece.
    pub in_piece_defect: f64,
}

impl AmplitudeRatios {
    pub fn envelope_holds(&self) -> bool {
        self.max_ratio <= self.envelope
    }

    pub fn normalization_holds(&self) -> bool {
        self.beta_sq.iter().cloned().fold(0.0, f64::max) >= self.normalization_floor
    }
}

/// Amplitudes `beta_j` on each piece and the checks tying them together.
pub fn amplitude_ratios(profile: &CelerityProfile, pair: &FiberEigenpair, eps: f64) -> Result<AmplitudeRatios> {
    let pc = profile.as_piecewise_constant().ok_or(Error::NotPiecewiseConstant)?;
    let (mu, lambda) = (pair.mu(), pair.lambda());
    let mu2 = mu * mu;
    let p: Vec<f64> = pc.values().iter().map(|c| lambda / mu2 - c).collect();
    if p.iter().any(|&v| v < eps) {
        return Err(Error::NotInSector { mu, lambda });
    }
    let grid = pair.grid();
    let index_of = |y: f64| -> Result<usize> {
        let i = grid.partition_point(|&g| g < y);
        match (grid.get(i), i.checked_sub(1).map(|j| grid[j])) {
            (Some(&g), _) if (g - y).abs() <= 1e-12 * pair.height() => Ok(i),
            (_, Some(g)) if (g - y).abs() <= 1e-12 * pair.height() => Ok(i - 1),
            _ => Err(Error::InvalidArgument(format!("grid lacks breakpoint {y}"))),
        }
    };
    let bp = pc.breakpoints();
    let idx: Vec<usize> = bp.iter().map(|&y| index_of(y)).collect::<Result<_>>()?;
    let (u, f) = (pair.u(), pair.flux());
    let beta = |j: usize, at: usize| u[at] * u[at] + f[at] * f[at] / (pc.values()[j] * mu2 * p[j]);

    let beta_sq: Vec<f64> = (0..pc.num_pieces()).map(|j| beta(j, idx[j])).collect();
    let in_piece_defect = (0..pc.num_pieces())
        .map(|j| (beta(j, idx[j + 1]) / beta_sq[j] - 1.0).abs())
        .fold(0.0, f64::max);

    let mut one_step_defect: f64 = 0.0;
    for j in 0..pc.num_pieces() - 1 {
        let at = idx[j + 1];
        let (cj, cn) = (pc.values()[j], pc.values()[j + 1]);
        let next = beta_sq[j + 1];
        let cos2 = f[at] * f[at] / (cn * mu2 * p[j + 1] * next);
        let rhs = next * (1.0 + (p[j + 1] * cn / (p[j] * cj) - 1.0) * cos2);
        one_step_defect = one_step_defect.max((beta_sq[j] / rhs - 1.0).abs());
    }

    let hi = beta_sq.iter().cloned().fold(0.0, f64::max);
    let lo = beta_sq.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = kappa(profile, eps);
    let tv = profile.total_variation();
    Ok(AmplitudeRatios {
        max_ratio: hi / lo,
        beta_sq,
        kappa: k,
        envelope: (2.0 * k * tv).exp(),
        normalization_floor: 1.0 / (profile.height() * (k * tv).exp()),
        one_step_defect,
        in_piece_defect,
    })
}

/// Lower bound on `min_r2` for Lipschitz profiles: with
/// `C = (1 + c_M / eps) sup|c'|` and `T = t(H)`,
/// `min_r2 >= min(1, eps c_m mu^2) / (c_M T exp(C T))`.
pub fn lipschitz_amplitude_floor(profile: &CelerityProfile, eps: f64, mu: f64) -> Result<f64> {
    if profile.as_piecewise_constant().is_some() && profile.total_variation() > 0.0 {
        return Err(Error::NotSmoothProfile);
    }
    let ys = profile.dense_sample();
    let slope = ys
        .windows(2)
        .map(|w| ((profile.value(w[1]) - profile.value(w[0])) / (w[1] - w[0])).abs())
        .fold(0.0, f64::max);
    let t = profile.total_travel_time();
    let growth = ((1.0 + profile.c_max() / eps) * slope * t).exp();
    Ok(1f64.min(eps * profile.c_min() * mu * mu) / (profile.c_max() * t * growth))
}

/// Sufficient condition for the arch-extremum characterization:
/// `c_m eps mu^2 > 1`.
pub fn above_lambda_tilde(profile: &CelerityProfile, eps: f64, mu: f64) -> bool {
    profile.c_min() * eps * mu * mu > 1.0
}

/// Smallest `lambda` of the family from which on every member satisfies
/// [`above_lambda_tilde`].
pub fn lambda_tilde_0(profile: &CelerityProfile, eps: f64, family: &[FiberEigenpair]) -> Option<f64> {
    threshold_from_above(family.iter().map(|p| (p.lambda(), above_lambda_tilde(profile, eps, p.mu()))))
}

/// Given `(lambda, ok)` pairs, the smallest `lambda` such that every pair
/// at or above it is `ok`.
fn threshold_from_above<I: Iterator<Item = (f64, bool)>>(items: I) -> Option<f64> {
    let mut v: Vec<(f64, bool)> = items.collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut result = None;
    for &(lambda, ok) in v.iter().rev() {
        if !ok {
            break;
        }
        result = Some(lambda);
    }
    result
}

/// Result of [`guided_decay_check`].
#[derive(Debug, Clone)]
pub struct GuidedDecayReport {
    pub mus: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub masses: Vec<f64>,
    /// `(1 + xi_M^2)^{3/4} / (d xi_1^2)` per member.
    pub envelope: Vec<f64>,
    /// Smallest constant making the envelope hold on the first quarter.
    pub gamma: f64,
    /// Members past the first quarter with `mass > gamma * envelope`.
    pub envelope_violations: usize,
    /// Least-squares slope of `ln mass` against `ln mu`.
    pub slope: f64,
}

impl GuidedDecayReport {
    /// True when masses strictly decrease from member `start` on.
    pub fn strictly_decreasing_from(&self, start: usize) -> bool {
        self.masses.windows(2).skip(start).all(|w| w[1] < w[0])
    }
}

/// Mass of guided eigenpairs in a layer outside the well, and its decay.
pub fn guided_decay_check(
    profile: &CelerityProfile,
    well: Option<&WellInterval>,
    family: &[FiberEigenpair],
    a: f64,
    b: f64,
    eps: f64,
) -> Result<GuidedDecayReport> {
    let well = well.ok_or(Error::MissingWell)?;
    check_interval(a, b, profile.height())?;
    let d = if a >= well.beta {
        a - well.beta
    } else if b <= well.alpha {
        well.alpha - b
    } else {
        0.0
    };
    if !(d > 0.0) {
        return Err(Error::LayerIntersectsWell);
    }
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut order: Vec<&FiberEigenpair> = family.iter().collect();
    order.sort_by(|x, y| x.mu().total_cmp(&y.mu()).then(x.lambda().total_cmp(&y.lambda())));
    let (c_m, c_max, c1) = (profile.c_min(), profile.c_max(), well.c1);
    for p in &order {
        let mu2 = p.mu() * p.mu();
        if !(c_m * mu2 <= p.lambda() && p.lambda() <= (c1 - eps) * mu2) {
            return Err(Error::NotInSector { mu: p.mu(), lambda: p.lambda() });
        }
    }
    let mus: Vec<f64> = order.iter().map(|p| p.mu()).collect();
    let lambdas: Vec<f64> = order.iter().map(|p| p.lambda()).collect();
    let masses: Vec<f64> = order.iter().map(|p| p.mass(a, b)).collect();
    let envelope: Vec<f64> = order
        .iter()
        .map(|p| {
            let mu2 = p.mu() * p.mu();
            let xi_m = c_max * mu2 - p.lambda();
            let xi_1 = mu2 - p.lambda() / c1;
            (1.0 + xi_m).powf(0.75) / (d * xi_1)
        })
        .collect();
    let fit = (order.len() / 4).max(1);
    let gamma = (0..fit).map(|i| masses[i] / envelope[i]).fold(0.0, f64::max);
    let envelope_violations = (fit..order.len()).filter(|&i| masses[i] > gamma * envelope[i]).count();
    let slope = log_log_slope(&mus, &masses);
    Ok(GuidedDecayReport { mus, lambdas, masses, envelope, gamma, envelope_violations, slope })
}

/// Least-squares slope of `ln y` against `ln x`, skipping non-positive data.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Outcome of the mass floor check for one eigenpair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassFloorStatus {
    Checked { mass: f64, floor: f64 },
    /// Below the family's `lambda_0`: no complete arch fits in the layer.
    SkippedSmallLambda,
}

#[derive(Debug, Clone)]
pub struct MassFloorEntry {
    pub mu: f64,
    pub ell: usize,
    pub lambda: f64,
    pub min_r2: f64,
    pub covered: f64,
    pub status: MassFloorStatus,
}

/// Result of [`mass_floor_check`].
#[derive(Debug, Clone)]
pub struct MassFloorReport {
    pub entries: Vec<MassFloorEntry>,
    /// Smallest `lambda` from which on every member has a complete arch
    /// inside the layer.
    pub lambda0: Option<f64>,
    /// `min mass / floor` over checked members.
    pub worst_ratio: f64,
    pub violations: usize,
}

/// Compare layer masses of non-guided eigenpairs with the per-arch floor
/// `(c_m / (3 c_M)) min_r2 (covered arch length)`.
pub fn mass_floor_check(
    profile: &CelerityProfile,
    eps: f64,
    family: &[FiberEigenpair],
    a: f64,
    b: f64,
) -> Result<MassFloorReport> {
    check_interval(a, b, profile.height())?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let factor = profile.c_min() / (3.0 * profile.c_max());
    let partial: Vec<(f64, usize, f64, f64, f64, f64)> = family
        .par_iter()
        .map(|pair| {
            require_non_guided(profile, pair, eps)?;
            let trace = amplitude_trace(profile, pair)?;
            let covered = trace.covered_length(a, b);
            Ok((pair.mu(), pair.ell(), pair.lambda(), trace.min_r2, covered, pair.mass(a, b)))
        })
        .collect::<Result<_>>()?;
    let lambda0 = threshold_from_above(partial.iter().map(|e| (e.2, e.4 > 0.0)));
    let mut worst_ratio = f64::INFINITY;
    let mut violations = 0;
    let entries = partial
        .into_iter()
        .map(|(mu, ell, lambda, min_r2, covered, mass)| {
            let status = match lambda0 {
                Some(l0) if lambda >= l0 => {
                    let floor = factor * min_r2 * covered;
                    worst_ratio = worst_ratio.min(mass / floor);
                    if mass < floor {
                        violations += 1;
                    }
                    MassFloorStatus::Checked { mass, floor }
                }
                _ => MassFloorStatus::SkippedSmallLambda,
            };
            MassFloorEntry { mu, ell, lambda, min_r2, covered, status }
        })
        .collect();
    Ok(MassFloorReport { entries, lambda0, worst_ratio, violations })
}

/// One row of the diagnostics table.
#[derive(Debug, Clone)]
pub struct DiagnosticsRow {
    pub k: usize,
    pub mu: f64,
    pub ell: usize,
    pub lambda: f64,
    pub sector: Option<SectorLabel>,
    pub mass: f64,
    pub r_omega: f64,
    pub min_r2: f64,
    pub max_gap: f64,
    pub arch_peaks: Vec<f64>,
}

/// Per-eigenpair diagnostics and family aggregates.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub layer: Layer,
    pub rows: Vec<DiagnosticsRow>,
    /// Infimum of the layer mass over the computed non-guided family.
    pub family_inf_mass: Option<f64>,
    /// Infimum of `min_r2` over the computed non-guided family.
    pub family_inf_min_r2: Option<f64>,
    pub mass_floor: Option<MassFloorReport>,
    pub guided_decay: Option<GuidedDecayReport>,
}

impl DiagnosticsReport {
    /// One row per eigenpair.
    pub fn to_csv(&self) -> String {
        let mut csv = Csv::new(&["k", "mu", "ell", "lambda", "sector", "mass", "R_omega", "min_r2", "max_gap"]);
        for r in &self.rows {
            csv.row(&[
                r.k.to_string(),
                g12(r.mu),
                r.ell.to_string(),
                g12(r.lambda),
                r.sector.map_or("", |s| s.name()).to_string(),
                g12(r.mass),
                g12(r.r_omega),
                g12(r.min_r2),
                g12(r.max_gap),
            ]);
        }
        csv.finish()
    }

    /// Human-readable summary of the family aggregates.
    pub fn summary(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), g12);
        let mut s = String::new();
        s.push_str(&format!("layer = ({}, {})\n", g12(self.layer.a), g12(self.layer.b)));
        s.push_str(&format!("eigenpairs = {}\n", self.rows.len()));
        s.push_str(&format!("non-guided family infimum of layer mass = {}\n", opt(self.family_inf_mass)));
        s.push_str(&format!("non-guided family infimum of min_r2 = {}\n", opt(self.family_inf_min_r2)));
        if let Some(m) = &self.mass_floor {
            let checked = m.entries.iter().filter(|e| matches!(e.status, MassFloorStatus::Checked { .. })).count();
            s.push_str(&format!("mass floor lambda_0 = {}\n", opt(m.lambda0)));
            s.push_str(&format!(
                "mass floor checked = {checked}, skipped = {}, violations = {}, worst mass/floor = {}\n",
                m.entries.len() - checked,
                m.violations,
                if checked > 0 { g12(m.worst_ratio) } else { "n/a".into() }
            ));
        }
        if let Some(g) = &self.guided_decay {
            s.push_str(&format!("guided family size = {}\n", g.masses.len()));
            s.push_str(&format!("guided decay fitted exponent = {}\n", g12(g.slope)));
            s.push_str(&format!("guided decay fitted gamma = {}\n", g12(g.gamma)));
            s.push_str(&format!("guided decay envelope violations = {}\n", g.envelope_violations));
        }
        s
    }
}

/// Options for [`diagnose`].
#[derive(Debug, Clone)]
pub struct DiagnoseOptions {
    pub eps: f64,
    pub well: Option<WellInterval>,
    pub layer: Layer,
    pub grid: usize,
}

/// Compute eigenfunctions for every row of a classified spectrum table and
/// run the sector-appropriate family diagnostics.
///
/// Non-guided rows feed the minimal amplitude and mass floor aggregates;
/// guided ground states (one per mode) feed the decay check when the layer
/// lies outside the well.
pub fn diagnose(profile: &CelerityProfile, table: &SpectrumTable, opts: &DiagnoseOptions) -> Result<DiagnosticsReport> {
    opts.layer.validate(profile.height())?;
    let cs = &table.modes.cross_section;
    let computed: Vec<(DiagnosticsRow, FiberEigenpair)> = table
        .rows
        .par_iter()
        .map(|row| {
            let pair = eigenfunction(profile, row.mu, row.lambda, &GridSpec::Uniform(opts.grid))?;
            let trace = amplitude_trace(profile, &pair)?;
            let mode = &table.modes.modes[row.k - 1];
            let r_omega = concentration_ratio(&pair, cs, mode, &opts.layer)?;
            let diag = DiagnosticsRow {
                k: row.k,
                mu: row.mu,
                ell: row.ell,
                lambda: row.lambda,
                sector: row.sector,
                mass: pair.mass(opts.layer.a, opts.layer.b),
                r_omega,
                min_r2: trace.min_r2,
                max_gap: trace.max_gap,
                arch_peaks: trace.arches.iter().map(|a| a.peak_u).collect(),
            };
            Ok((diag, pair))
        })
        .collect::<Result<_>>()?;

    let is_ng = |r: &DiagnosticsRow| r.lambda >= (profile.c_max() + opts.eps) * r.mu * r.mu;
    let non_guided: Vec<FiberEigenpair> =
        computed.iter().filter(|(r, _)| is_ng(r)).map(|(_, p)| p.clone()).collect();
    let ng_rows: Vec<&DiagnosticsRow> = computed.iter().map(|(r, _)| r).filter(|r| is_ng(r)).collect();
    let family_inf_mass = ng_rows.iter().map(|r| r.mass).reduce(f64::min);
    let family_inf_min_r2 = ng_rows.iter().map(|r| r.min_r2).reduce(f64::min);
    let mass_floor = if non_guided.is_empty() {
        None
    } else {
        Some(mass_floor_check(profile, opts.eps, &non_guided, opts.layer.a, opts.layer.b)?)
    };

    let guided_decay = match &opts.well {
        Some(w) => {
            let mut ground: Vec<FiberEigenpair> = Vec::new();
            for (r, p) in &computed {
                let in_cone = profile.c_min() * r.mu * r.mu <= r.lambda && r.lambda <= (w.c1 - opts.eps) * r.mu * r.mu;
                if in_cone && r.ell == 1 {
                    ground.push(p.clone());
                }
            }
            match guided_decay_check(profile, Some(w), &ground, opts.layer.a, opts.layer.b, opts.eps) {
                Ok(rep) => Some(rep),
                Err(Error::LayerIntersectsWell) | Err(Error::EmptyFamily) => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };

    Ok(DiagnosticsReport {
        layer: opts.layer.clone(),
        rows: computed.into_iter().map(|(r, _)| r).collect(),
        family_inf_mass,
        family_inf_min_r2,
        mass_floor,
        guided_decay,
    })
}
