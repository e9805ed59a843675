//! Celerity profiles `c(y)` on `[0, H]`.
//!
//! Three representations are supported: piecewise-constant layers, sampled
//! grids (step or linear interpolation) and a handful of smooth analytic
//! presets. Every profile caches its essential range `[c_m, c_M]` and its
//! total variation at construction time and is immutable afterwards.
//!
//! Piecewise-constant data is right-continuous at interior breakpoints; the
//! value at `y = H` is the last piece's value.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Interpolation rule for [`Representation::Sampled`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Right-continuous step function: `c(y) = cs[i]` on `[ys[i], ys[i+1])`.
    Step,
    Linear,
}

/// Closed-form smooth profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Constant { value: f64 },
    /// `c(y) = start + (end - start) y / H`.
    LinearRamp { start: f64, end: f64 },
    /// `c(y) = base + amplitude sin(pi y / H)`.
    SineBump { base: f64, amplitude: f64 },
    /// `c(y) = outer - (outer - inner) exp(-((y - center) / width)^2)`.
    SmoothWell { outer: f64, inner: f64, center: f64, width: f64 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Constant { .. } => "constant",
            Preset::LinearRamp { .. } => "linear-ramp",
            Preset::SineBump { .. } => "sine-bump",
            Preset::SmoothWell { .. } => "smooth-well",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Preset::Constant { value } => vec![value],
            Preset::LinearRamp { start, end } => vec![start, end],
            Preset::SineBump { base, amplitude } => vec![base, amplitude],
            Preset::SmoothWell { outer, inner, center, width } => vec![outer, inner, center, width],
        }
    }

    /// Build a preset from its file name and parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let expect = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::MalformedProfile(format!(
                    "preset `{name}` takes {n} parameters, got {}",
                    params.len()
                )))
            }
        };
        match name {
            "constant" => {
                expect(1)?;
                Ok(Preset::Constant { value: params[0] })
            }
            "linear-ramp" => {
                expect(2)?;
                Ok(Preset::LinearRamp { start: params[0], end: params[1] })
            }
            "sine-bump" => {
                expect(2)?;
                Ok(Preset::SineBump { base: params[0], amplitude: params[1] })
            }
            "smooth-well" => {
                expect(4)?;
                Ok(Preset::SmoothWell {
                    outer: params[0],
                    inner: params[1],
                    center: params[2],
                    width: params[3],
                })
            }
            other => Err(Error::MalformedProfile(format!("unknown preset `{other}`"))),
        }
    }

    fn eval(&self, y: f64, height: f64) -> f64 {
        match *self {
            Preset::Constant { value } => value,
            Preset::LinearRamp { start, end } => start + (end - start) * y / height,
            Preset::SineBump { base, amplitude } => {
                base + amplitude * (std::f64::consts::PI * y / height).sin()
            }
            Preset::SmoothWell { outer, inner, center, width } => {
                let s = (y - center) / width;
                outer - (outer - inner) * (-s * s).exp()
            }
        }
    }

    /// Interior extrema of the preset on `[0, height]`.
    fn critical_points(&self, height: f64) -> Vec<f64> {
        match *self {
            Preset::SineBump { .. } => vec![0.5 * height],
            Preset::SmoothWell { center, .. } => vec![center],
            _ => Vec::new(),
        }
    }

    fn range(&self, height: f64) -> (f64, f64) {
        match *self {
            Preset::Constant { value } => (value, value),
            Preset::LinearRamp { start, end } => (start.min(end), start.max(end)),
            Preset::SineBump { base, amplitude } => {
                (base + amplitude.min(0.0), base + amplitude.max(0.0))
            }
            Preset::SmoothWell { outer, inner, center, width } => {
                let g = |y: f64| (-((y - center) / width).powi(2)).exp();
                let g_max = g(center.clamp(0.0, height));
                let g_min = g(0.0).min(g(height));
                let a = outer - (outer - inner) * g_max;
                let b = outer - (outer - inner) * g_min;
                (a.min(b), a.max(b))
            }
        }
    }
}

/// A validated piecewise-constant coefficient.
///
/// Piece `j` occupies `[breakpoints[j], breakpoints[j + 1])` and carries
/// `values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::MalformedProfile(format!(
                "{} values need {} breakpoints, got {}",
                values.len(),
                values.len() + 1,
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::MalformedProfile("first breakpoint must be 0".into()));
        }
        check_increasing(&breakpoints)?;
        check_positive(&values)?;
        Ok(Self { breakpoints, values })
    }

    /// Single piece of value `value` on `[0, height]`.
    pub fn constant(value: f64, height: f64) -> Result<Self> {
        Self::new(vec![0.0, height], vec![value])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_pieces(&self) -> usize {
        self.values.len()
    }

    pub fn height(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Piece containing `y` under the right-continuous convention.
    pub fn piece_index(&self, y: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= y);
        k.saturating_sub(1).min(self.values.len() - 1)
    }

    /// Piece containing `y` approached from the left.
    pub fn piece_index_left(&self, y: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b < y);
        k.saturating_sub(1).min(self.values.len() - 1)
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }
}

/// Concrete representation of a profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    PiecewiseConstant(PiecewiseConstant),
    Sampled { ys: Vec<f64>, cs: Vec<f64>, interp: Interpolation },
    Analytic(Preset),
}

/// Cached summary of a validated profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSummary {
    pub c_min: f64,
    pub c_max: f64,
    pub tv: f64,
    pub height: f64,
}

/// The coefficient `c(y)` of the layered operator, validated and immutable.
#[derive(Debug, Clone)]
pub struct CelerityProfile {
    repr: Representation,
    height: f64,
    c_min: f64,
    c_max: f64,
    tv: f64,
    piecewise: Option<PiecewiseConstant>,
    travel_knots: Vec<f64>,
    travel_cum: Vec<f64>,
}

const PRESET_TRAVEL_PANELS: usize = 512;

impl CelerityProfile {
    /// Validate `repr` on `[0, height]` and cache its range and variation.
    pub fn new(repr: Representation, height: f64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return Err(Error::MalformedProfile(format!("H must be positive, got {height}")));
        }
        let repr = match repr {
            Representation::PiecewiseConstant(pc) => {
                let end = pc.height();
                if (end - height).abs() > 1e-12 * height {
                    return Err(Error::MalformedProfile(format!(
                        "last breakpoint {end} differs from H = {height}"
                    )));
                }
                let mut bp = pc.breakpoints;
                *bp.last_mut().unwrap() = height;
                Representation::PiecewiseConstant(PiecewiseConstant::new(bp, pc.values)?)
            }
            Representation::Sampled { mut ys, cs, interp } => {
                if ys.is_empty() || cs.is_empty() {
                    return Err(Error::EmptyProfile);
                }
                if ys.len() != cs.len() {
                    return Err(Error::MalformedProfile(format!(
                        "{} samples but {} values",
                        ys.len(),
                        cs.len()
                    )));
                }
                if ys.len() < 2 {
                    return Err(Error::MalformedProfile("need at least two samples".into()));
                }
                check_positive(&cs)?;
                check_increasing(&ys)?;
                if ys[0].abs() > 1e-12 * height || (ys[ys.len() - 1] - height).abs() > 1e-12 * height {
                    return Err(Error::MalformedProfile("samples must span [0, H]".into()));
                }
                ys[0] = 0.0;
                *ys.last_mut().unwrap() = height;
                Representation::Sampled { ys, cs, interp }
            }
            Representation::Analytic(preset) => {
                for (i, p) in preset.params().iter().enumerate() {
                    if !p.is_finite() {
                        return Err(Error::MalformedProfile(format!("parameter {i} is not finite")));
                    }
                }
                if let Preset::SmoothWell { width, .. } = preset {
                    if !(width > 0.0) {
                        return Err(Error::MalformedProfile("smooth-well width must be positive".into()));
                    }
                }
                let (lo, _) = preset.range(height);
                if !(lo > 0.0) {
                    return Err(Error::NonPositiveValue { index: 0, value: lo });
                }
                Representation::Analytic(preset)
            }
        };

        let piecewise = match &repr {
            Representation::PiecewiseConstant(pc) => Some(pc.clone()),
            Representation::Sampled { ys, cs, interp: Interpolation::Step } => {
                Some(PiecewiseConstant::new(ys.clone(), cs[..cs.len() - 1].to_vec())?)
            }
            Representation::Analytic(Preset::Constant { value }) => {
                Some(PiecewiseConstant::constant(*value, height)?)
            }
            _ => None,
        };

        let (c_min, c_max, tv) = match (&repr, &piecewise) {
            (_, Some(pc)) => {
                let lo = pc.values().iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = pc.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi, pc.total_variation())
            }
            (Representation::Sampled { cs, .. }, None) => {
                let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = cs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi, cs.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
            }
            (Representation::Analytic(preset), None) => {
                let (lo, hi) = preset.range(height);
                (lo, hi, adaptive_total_variation(|y| preset.eval(y, height), height, &preset.critical_points(height)))
            }
            (Representation::PiecewiseConstant(_), None) => unreachable!(),
        };

        let mut profile = Self {
            repr,
            height,
            c_min,
            c_max,
            tv,
            piecewise,
            travel_knots: Vec::new(),
            travel_cum: Vec::new(),
        };
        profile.build_travel_table();
        Ok(profile)
    }

    /// Convenience constructor for a piecewise-constant profile.
    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let height = *breakpoints.last().ok_or(Error::EmptyProfile)?;
        Self::new(
            Representation::PiecewiseConstant(PiecewiseConstant::new(breakpoints, values)?),
            height,
        )
    }

    pub fn constant(value: f64, height: f64) -> Result<Self> {
        Self::new(Representation::Analytic(Preset::Constant { value }), height)
    }

    pub fn sampled(ys: Vec<f64>, cs: Vec<f64>, interp: Interpolation) -> Result<Self> {
        let height = *ys.last().ok_or(Error::EmptyProfile)?;
        Self::new(Representation::Sampled { ys, cs, interp }, height)
    }

    pub fn preset(preset: Preset, height: f64) -> Result<Self> {
        Self::new(Representation::Analytic(preset), height)
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn total_variation(&self) -> f64 {
        self.tv
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary { c_min: self.c_min, c_max: self.c_max, tv: self.tv, height: self.height }
    }

    /// Piecewise-constant view, available for layered data, step grids and
    /// the constant preset.
    pub fn as_piecewise_constant(&self) -> Option<&PiecewiseConstant> {
        self.piecewise.as_ref()
    }

    /// True for presets, which are smooth on the whole interval.
    pub fn is_smooth(&self) -> bool {
        matches!(self.repr, Representation::Analytic(_))
    }

    /// Points where the coefficient may fail to be smooth, including both
    /// endpoints. Integrators never step across them.
    pub fn knots(&self) -> Vec<f64> {
        match (&self.repr, &self.piecewise) {
            (_, Some(pc)) => pc.breakpoints().to_vec(),
            (Representation::Sampled { ys, .. }, None) => ys.clone(),
            _ => vec![0.0, self.height],
        }
    }

    fn check_domain(&self, y: f64) -> Result<()> {
        if (0.0..=self.height).contains(&y) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { y, height: self.height })
        }
    }

    /// `c(y)` with right-continuity at breakpoints.
    pub fn evaluate(&self, y: f64) -> Result<f64> {
        self.check_domain(y)?;
        Ok(self.value(y))
    }

    /// Unchecked evaluation; `y` is clamped into `[0, H]`.
    pub fn value(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.height);
        if let Some(pc) = &self.piecewise {
            return pc.values[pc.piece_index(y)];
        }
        match &self.repr {
            Representation::Sampled { ys, cs, .. } => {
                let i = ys.partition_point(|&s| s <= y).saturating_sub(1).min(ys.len() - 2);
                let w = (y - ys[i]) / (ys[i + 1] - ys[i]);
                cs[i] + w * (cs[i + 1] - cs[i])
            }
            Representation::Analytic(p) => p.eval(y, self.height),
            Representation::PiecewiseConstant(_) => unreachable!(),
        }
    }

    /// Left limit `c(y-)`; equals `value` wherever `c` is continuous.
    pub fn value_left(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.height);
        match &self.piecewise {
            Some(pc) if y > 0.0 => pc.values[pc.piece_index_left(y)],
            _ => self.value(y),
        }
    }

    /// Travel time `t(y) = int_0^y dσ / c(σ)`.
    pub fn travel_time(&self, y: f64) -> Result<f64> {
        self.check_domain(y)?;
        Ok(self.travel(y))
    }

    /// Total travel time `t(H)`.
    pub fn total_travel_time(&self) -> f64 {
        *self.travel_cum.last().unwrap()
    }

    pub(crate) fn travel(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.height);
        let i = self
            .travel_knots
            .partition_point(|&k| k <= y)
            .saturating_sub(1)
            .min(self.travel_knots.len() - 2);
        self.travel_cum[i] + self.partial_travel(i, y)
    }

    fn partial_travel(&self, i: usize, y: f64) -> f64 {
        let a = self.travel_knots[i];
        let len = y - a;
        if len <= 0.0 {
            return 0.0;
        }
        if let Some(pc) = &self.piecewise {
            return len / pc.values[i];
        }
        match &self.repr {
            Representation::Sampled { cs, ys, .. } => {
                let slope = (cs[i + 1] - cs[i]) / (ys[i + 1] - ys[i]);
                linear_travel(cs[i], slope, len)
            }
            Representation::Analytic(Preset::LinearRamp { start, end }) => {
                linear_travel(*start, (end - start) / self.height, y)
            }
            Representation::Analytic(p) => {
                let (x, w) = gauss_legendre(12);
                let mid = 0.5 * (a + y);
                let half = 0.5 * len;
                x.iter().zip(&w).map(|(x, w)| w / p.eval(mid + half * x, self.height)).sum::<f64>()
                    * half
            }
            Representation::PiecewiseConstant(_) => unreachable!(),
        }
    }

    fn build_travel_table(&mut self) {
        let knots = match (&self.repr, &self.piecewise) {
            (Representation::Analytic(Preset::SineBump { .. }), _)
            | (Representation::Analytic(Preset::SmoothWell { .. }), _) => (0..=PRESET_TRAVEL_PANELS)
                .map(|i| self.height * i as f64 / PRESET_TRAVEL_PANELS as f64)
                .collect(),
            _ => self.knots(),
        };
        self.travel_knots = knots;
        let mut cum = vec![0.0; self.travel_knots.len()];
        for i in 1..cum.len() {
            cum[i] = cum[i - 1] + self.partial_travel(i - 1, self.travel_knots[i]);
        }
        self.travel_cum = cum;
    }

    /// Inverse of [`travel_time`](Self::travel_time): the `y` with `t(y) = t`.
    pub fn inverse_travel_time(&self, t: f64) -> Result<f64> {
        let total = self.total_travel_time();
        if !(0.0..=total * (1.0 + 1e-15)).contains(&t) {
            return Err(Error::OutOfDomain { y: t, height: total });
        }
        let t = t.min(total);
        let (mut lo, mut hi) = (0.0, self.height);
        let mut y = t / total * self.height;
        for _ in 0..200 {
            let r = self.travel(y) - t;
            if r > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            if r == 0.0 || hi - lo <= 1e-15 * self.height {
                break;
            }
            // Newton step in t, falling back to bisection when it leaves the bracket.
            let next = y - r * self.value(y);
            y = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        Ok(y)
    }

    /// Locate the single well of depth `c1`: the smallest `(alpha, beta)`
    /// outside of which `c >= c1`.
    ///
    /// Returns `None` when the sublevel set `{c < c1}` has more than one
    /// component.
    pub fn find_well(&self, c1: f64) -> Result<Option<WellInterval>> {
        if !(c1 > self.c_min && c1 <= self.c_max) {
            return Err(Error::ThresholdOutOfRange { c1, c_min: self.c_min, c_max: self.c_max });
        }
        if let Some(pc) = &self.piecewise {
            let below: Vec<bool> = pc.values().iter().map(|&v| v < c1).collect();
            return Ok(single_run(&below).map(|(s, e)| WellInterval {
                alpha: pc.breakpoints[s],
                beta: pc.breakpoints[e + 1],
                c1,
            }));
        }
        let ys = self.dense_sample();
        let below: Vec<bool> = ys.iter().map(|&y| self.value(y) < c1).collect();
        let Some((s, e)) = single_run(&below) else {
            return Ok(None);
        };
        let refine = |mut inside: f64, mut outside: f64| {
            for _ in 0..80 {
                let mid = 0.5 * (inside + outside);
                if self.value(mid) < c1 {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            outside
        };
        let alpha = if s == 0 { 0.0 } else { refine(ys[s], ys[s - 1]) };
        let beta = if e == ys.len() - 1 { self.height } else { refine(ys[e], ys[e + 1]) };
        Ok(Some(WellInterval { alpha, beta, c1 }))
    }

    /// Dense sample used by well detection and range checks.
    pub fn dense_sample(&self) -> Vec<f64> {
        let knots = self.knots();
        let n = (10 * knots.len()).max(10_000);
        let mut ys: Vec<f64> = (0..=n).map(|i| self.height * i as f64 / n as f64).collect();
        ys.extend(knots);
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        ys
    }
}

/// A well `(alpha, beta)` for the threshold `c1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellInterval {
    pub alpha: f64,
    pub beta: f64,
    pub c1: f64,
}

impl WellInterval {
    /// Check the well property on a dense sample: `c >= c1 - tol` outside
    /// `(alpha, beta)` and `inf c < c1` inside.
    pub fn verify(&self, profile: &CelerityProfile, tol: f64) -> bool {
        let mut inside_min = f64::INFINITY;
        for y in profile.dense_sample() {
            let c = profile.value(y);
            if y > self.alpha && y < self.beta {
                inside_min = inside_min.min(c);
            } else if c < self.c1 - tol && profile.value_left(y) < self.c1 - tol {
                return false;
            }
        }
        if let Some(pc) = profile.as_piecewise_constant() {
            for j in 0..pc.num_pieces() {
                let mid = 0.5 * (pc.breakpoints[j] + pc.breakpoints[j + 1]);
                if mid > self.alpha && mid < self.beta {
                    inside_min = inside_min.min(pc.values[j]);
                }
            }
        }
        inside_min < self.c1
    }
}

fn single_run(flags: &[bool]) -> Option<(usize, usize)> {
    let start = flags.iter().position(|&b| b)?;
    let end = flags.iter().rposition(|&b| b)?;
    if flags[start..=end].iter().all(|&b| b) {
        Some((start, end))
    } else {
        None
    }
}

fn linear_travel(c0: f64, slope: f64, len: f64) -> f64 {
    let rel = slope * len / c0;
    if rel.abs() < 1e-8 {
        len / c0 * (1.0 - 0.5 * rel)
    } else {
        rel.ln_1p() / slope
    }
}

fn check_positive(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveValue { index, value });
        }
    }
    Ok(())
}

fn check_increasing(xs: &[f64]) -> Result<()> {
    for i in 1..xs.len() {
        if !(xs[i] > xs[i - 1]) {
            return Err(Error::UnsortedBreakpoints { index: i });
        }
    }
    Ok(())
}

/// Total variation of a smooth function by uniform sampling, doubling the
/// sample count until successive sums agree to 1e-8.
/// Variation of `f` on uniform samples refined until successive sums agree
/// to `1e-8`. Known interior extrema are always sampled.
fn adaptive_total_variation<F: Fn(f64) -> f64>(f: F, height: f64, critical: &[f64]) -> f64 {
    let sum = |n: usize| -> f64 {
        let mut ys: Vec<f64> = (0..=n).map(|i| height * i as f64 / n as f64).collect();
        ys.extend(critical.iter().filter(|&&y| y > 0.0 && y < height));
        ys.sort_by(f64::total_cmp);
        ys.windows(2).map(|w| (f(w[1]) - f(w[0])).abs()).sum()
    };
    let mut n = 64;
    let mut tv = sum(n);
    while n < (1 << 24) {
        n *= 2;
        let next = sum(n);
        let done = (next - tv).abs() <= 1e-8 * tv.max(1.0);
        tv = next;
        if done {
            break;
        }
    }
    tv
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pc(bp: &[f64], v: &[f64]) -> CelerityProfile {
        CelerityProfile::piecewise_constant(bp.to_vec(), v.to_vec()).unwrap()
    }

    #[test]
    fn validate_piecewise_summary() {
        let s = pc(&[0.0, 1.0, 2.0, 3.0], &[1.0, 4.0, 2.0]).summary();
        assert_eq!(s, ProfileSummary { c_min: 1.0, c_max: 4.0, tv: 5.0, height: 3.0 });
    }

    #[test]
    fn validate_constant_summary() {
        let s = CelerityProfile::constant(2.0, PI).unwrap().summary();
        assert_eq!(s, ProfileSummary { c_min: 2.0, c_max: 2.0, tv: 0.0, height: PI });
    }

    #[test]
    fn validate_rejects_zero_sample() {
        let err = CelerityProfile::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], Interpolation::Linear);
        assert!(matches!(err, Err(Error::NonPositiveValue { index: 1, .. })));
    }

    #[test]
    fn validate_rejects_unsorted_and_empty() {
        let err = PiecewiseConstant::new(vec![0.0, 2.0, 1.0, 3.0], vec![1.0, 1.0, 1.0]);
        assert!(matches!(err, Err(Error::UnsortedBreakpoints { index: 2 })));
        assert_eq!(PiecewiseConstant::new(vec![0.0], vec![]), Err(Error::EmptyProfile));
        assert!(matches!(
            CelerityProfile::sampled(vec![], vec![], Interpolation::Step),
            Err(Error::EmptyProfile)
        ));
    }

    #[test]
    fn evaluate_right_continuous() {
        let p = pc(&[0.0, 1.0, 2.0], &[1.0, 4.0]);
        assert_eq!(p.evaluate(0.5).unwrap(), 1.0);
        assert_eq!(p.evaluate(1.0).unwrap(), 4.0);
        assert_eq!(p.value_left(1.0), 1.0);
        assert_eq!(p.evaluate(2.0).unwrap(), 4.0);
        assert!(matches!(p.evaluate(2.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(p.evaluate(-0.1), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn evaluate_linear_sampled() {
        let p = CelerityProfile::sampled(vec![0.0, 2.0], vec![1.0, 3.0], Interpolation::Linear).unwrap();
        assert!((p.evaluate(1.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn step_sampled_is_piecewise_constant() {
        let p = CelerityProfile::sampled(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 9.0], Interpolation::Step)
            .unwrap();
        assert_eq!(p.evaluate(1.5).unwrap(), 3.0);
        assert_eq!(p.evaluate(2.0).unwrap(), 3.0);
        assert_eq!(p.c_max(), 3.0);
        assert_eq!(p.total_variation(), 2.0);
    }

    #[test]
    fn travel_time_examples() {
        let c2 = CelerityProfile::constant(2.0, 3.0).unwrap();
        assert!((c2.travel_time(1.0).unwrap() - 0.5).abs() < 1e-15);
        let p = pc(&[0.0, 1.0, 2.0], &[1.0, 4.0]);
        assert!((p.travel_time(2.0).unwrap() - 1.25).abs() < 1e-15);
        let one = CelerityProfile::constant(1.0, 2.5).unwrap();
        assert!((one.travel_time(2.5).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn travel_time_of_presets_matches_quadrature() {
        let ramp = CelerityProfile::preset(Preset::LinearRamp { start: 1.0, end: 2.0 }, 1.0).unwrap();
        assert!((ramp.travel_time(1.0).unwrap() - 2f64.ln()).abs() < 1e-14);
        let bump = CelerityProfile::preset(Preset::SineBump { base: 2.0, amplitude: 1.0 }, PI).unwrap();
        // int_0^pi dy / (2 + sin y) = 2 pi / (3 sqrt 3)... over the half period it is
        // 2/sqrt(3) * (pi/2 - atan(1/sqrt(3))) * 2 = 2 pi / (3 sqrt(3))
        let expected = 2.0 * PI / (3.0 * 3f64.sqrt());
        assert!((bump.total_travel_time() - expected).abs() < 1e-13);
    }

    #[test]
    fn inverse_travel_round_trip() {
        let bump = CelerityProfile::preset(Preset::SineBump { base: 2.0, amplitude: -1.0 }, 2.0).unwrap();
        let p = pc(&[0.0, 0.3, 1.1, 2.0], &[1.0, 5.0, 0.5]);
        for prof in [&bump, &p] {
            for i in 0..=1000 {
                let y = prof.height() * i as f64 / 1000.0;
                let t = prof.travel_time(y).unwrap();
                let back = prof.inverse_travel_time(t).unwrap();
                assert!((back - y).abs() <= 1e-10, "y={y} back={back}");
            }
        }
    }

    #[test]
    fn preset_total_variation_is_adaptive_and_accurate() {
        let bump = CelerityProfile::preset(Preset::SineBump { base: 2.0, amplitude: 0.7 }, 3.0).unwrap();
        assert!((bump.total_variation() - 1.4).abs() < 1e-8);
        let ramp = CelerityProfile::preset(Preset::LinearRamp { start: 3.0, end: 1.0 }, 2.0).unwrap();
        assert!((ramp.total_variation() - 2.0).abs() < 1e-12);
        let well = CelerityProfile::preset(
            Preset::SmoothWell { outer: 4.0, inner: 1.0, center: 1.3, width: 0.2 },
            3.0,
        )
        .unwrap();
        let e = |y: f64| (-((y - 1.3) / 0.2f64).powi(2)).exp();
        let expected = 3.0 * ((1.0 - e(0.0)) + (1.0 - e(3.0)));
        assert!((well.total_variation() - expected).abs() < 1e-7, "{} vs {expected}", well.total_variation());
        assert!((well.c_min() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn find_well_examples() {
        let p = pc(&[0.0, 1.0, 2.0, 3.0], &[4.0, 1.0, 4.0]);
        let w = p.find_well(4.0).unwrap().unwrap();
        assert_eq!((w.alpha, w.beta), (1.0, 2.0));
        assert!(w.verify(&p, 1e-12));

        let c = CelerityProfile::constant(2.0, 1.0).unwrap();
        assert!(matches!(c.find_well(2.5), Err(Error::ThresholdOutOfRange { .. })));

        let two = pc(&[0.0, 1.0, 2.0, 3.0], &[1.0, 4.0, 1.0]);
        assert_eq!(two.find_well(4.0).unwrap(), None);
    }

    #[test]
    fn find_well_on_smooth_preset() {
        let well = CelerityProfile::preset(
            Preset::SmoothWell { outer: 4.0, inner: 1.0, center: 1.5, width: 0.3 },
            3.0,
        )
        .unwrap();
        let w = well.find_well(3.0).unwrap().unwrap();
        // 4 - 3 exp(-s^2) = 3  =>  s = sqrt(ln 3)
        let half = 0.3 * 3f64.ln().sqrt();
        assert!((w.alpha - (1.5 - half)).abs() < 1e-12);
        assert!((w.beta - (1.5 + half)).abs() < 1e-12);
        assert!(w.verify(&well, 1e-9));
    }

    #[test]
    fn dense_range_invariant() {
        let p = CelerityProfile::sampled(
            vec![0.0, 0.5, 1.7, 2.0],
            vec![2.0, 0.7, 3.0, 1.1],
            Interpolation::Linear,
        )
        .unwrap();
        for y in p.dense_sample() {
            let c = p.value(y);
            assert!(c >= p.c_min() && c <= p.c_max());
        }
    }
}
