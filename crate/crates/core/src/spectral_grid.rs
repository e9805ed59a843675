//! The two-index spectrum `beta_{k, l}` over cross-section modes and its
//! sector classification.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fiber::{eigenvalue, eigenvalue_count, spectrum_in_range};
use crate::profile::{CelerityProfile, WellInterval};
use crate::report::{g12, Csv};

/// Cross-section with a closed-form Dirichlet spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum CrossSection {
    Interval { length: f64 },
    /// Product of one to three intervals.
    Box { lengths: Vec<f64> },
}

/// One Dirichlet mode of the cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionMode {
    /// 1-based position in the sorted mode list.
    pub k: usize,
    pub mu: f64,
    pub mu_sq: f64,
    /// Sine index along each side.
    pub indices: Vec<usize>,
}

/// The first modes of a cross-section, sorted by `mu^2` with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSectionModes {
    pub cross_section: CrossSection,
    pub modes: Vec<CrossSectionMode>,
}

impl CrossSection {
    fn lengths(&self) -> Vec<f64> {
        match self {
            CrossSection::Interval { length } => vec![*length],
            CrossSection::Box { lengths } => lengths.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let lengths = self.lengths();
        if lengths.is_empty() || lengths.len() > 3 {
            return Err(Error::UnsupportedCrossSection(format!("{} sides", lengths.len())));
        }
        if let Some(l) = lengths.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::UnsupportedCrossSection(format!("side length {l}")));
        }
        Ok(())
    }

    /// Parse `interval:<L>` or `box:<L1>,<L2>[,<L3>]`. Lengths accept
    /// `pi`, `2pi`, `2*pi` and `pi/2` style multiples as well as decimals.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::UnsupportedCrossSection(format!("`{spec}` (expected kind:lengths)")))?;
        let lengths: Vec<f64> = rest.split(',').map(parse_length).collect::<Result<_>>()?;
        let cs = match kind.trim() {
            "interval" if lengths.len() == 1 => CrossSection::Interval { length: lengths[0] },
            "box" => CrossSection::Box { lengths },
            other => return Err(Error::UnsupportedCrossSection(format!("`{other}` with {} lengths", lengths.len()))),
        };
        cs.validate()?;
        Ok(cs)
    }

    /// `int_{window} phi^2` for the normalized product of sines with the
    /// given indices; `window` holds one sub-interval per side.
    pub fn window_factor(&self, indices: &[usize], window: &[(f64, f64)]) -> Result<f64> {
        let lengths = self.lengths();
        if window.len() != lengths.len() || indices.len() != lengths.len() {
            return Err(Error::UnsupportedCrossSection(format!(
                "window has {} sides, cross-section {}",
                window.len(),
                lengths.len()
            )));
        }
        let mut factor = 1.0;
        for ((&l, &n), &(a, b)) in lengths.iter().zip(indices).zip(window) {
            if !(0.0 <= a && a < b && b <= l * (1.0 + 1e-12)) {
                return Err(Error::BadLayer { a, b });
            }
            let w = n as f64 * PI / l;
            let prim = |x: f64| x / 2.0 - (2.0 * w * x).sin() / (4.0 * w);
            factor *= 2.0 / l * (prim(b.min(l)) - prim(a));
        }
        Ok(factor.clamp(0.0, 1.0))
    }
}

fn parse_length(s: &str) -> Result<f64> {
    let t: String = s.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::UnsupportedCrossSection(format!("length `{s}`"));
    if let Some(pos) = t.find("pi") {
        let coef = t[..pos].trim_end_matches('*');
        let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        let tail = &t[pos + 2..];
        let div = if tail.is_empty() {
            1.0
        } else {
            tail.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?
        };
        return Ok(coef * PI / div);
    }
    t.parse().map_err(|_| bad())
}

/// First `k_max` modes of `cs`, sorted by `mu^2` (ties by index tuple).
pub fn cross_section_modes(cs: &CrossSection, k_max: usize) -> Result<CrossSectionModes> {
    cs.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("K_max must be at least 1".into()));
    }
    let lengths = cs.lengths();
    let w: Vec<f64> = lengths.iter().map(|l| PI / l).collect();
    // grow the enumeration radius until at least k_max modes fit inside it
    let mut radius_sq = w.iter().map(|x| x * x).sum::<f64>() * 4.0;
    loop {
        let modes = modes_below(&w, radius_sq);
        if modes.len() >= k_max {
            let mut modes = modes;
            modes.truncate(k_max);
            return Ok(CrossSectionModes { cross_section: cs.clone(), modes });
        }
        radius_sq *= 2.0;
    }
}

/// Every mode with `mu^2 <= mu_sq_max`.
pub fn modes_up_to(cs: &CrossSection, mu_sq_max: f64) -> Result<CrossSectionModes> {
    cs.validate()?;
    let w: Vec<f64> = cs.lengths().iter().map(|l| PI / l).collect();
    Ok(CrossSectionModes { cross_section: cs.clone(), modes: modes_below(&w, mu_sq_max) })
}

fn modes_below(w: &[f64], radius_sq: f64) -> Vec<CrossSectionMode> {
    let mut found: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut idx = vec![1usize; w.len()];
    let sum = |idx: &[usize]| idx.iter().zip(w).map(|(&n, w)| (n as f64 * w).powi(2)).sum::<f64>();
    'outer: loop {
        let s = sum(&idx);
        if s <= radius_sq {
            found.push((s, idx.clone()));
            idx[0] += 1;
            continue;
        }
        // carry: reset the first coordinate and bump the next one
        for d in 0..w.len() {
            if d + 1 == w.len() {
                break 'outer;
            }
            idx[d] = 1;
            idx[d + 1] += 1;
            if sum(&idx) <= radius_sq {
                continue 'outer;
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    found
        .into_iter()
        .enumerate()
        .map(|(i, (mu_sq, indices))| CrossSectionMode {
            k: i + 1,
            mu: if indices.len() == 1 { indices[0] as f64 * w[0] } else { mu_sq.sqrt() },
            mu_sq,
            indices,
        })
        .collect()
}

/// Sector of a point `(mu^2, lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectorLabel {
    /// `c_m mu^2 <= lambda <= (c1 - eps) mu^2` below a verified well.
    Guided { c1: f64, eps: f64 },
    /// `lambda >= (c_M + eps) mu^2`; `first_index` is the smallest index of
    /// the fiber satisfying this, when known.
    NonGuided { eps: f64, first_index: Option<usize> },
    Residual,
}

impl SectorLabel {
    pub fn name(&self) -> &'static str {
        match self {
            SectorLabel::Guided { .. } => "guided",
            SectorLabel::NonGuided { .. } => "non-guided",
            SectorLabel::Residual => "residual",
        }
    }

    pub fn is_guided(&self) -> bool {
        matches!(self, SectorLabel::Guided { .. })
    }

    pub fn is_non_guided(&self) -> bool {
        matches!(self, SectorLabel::NonGuided { .. })
    }
}

/// Classify `(mu, lambda)`. Both cones are closed on their own side.
pub fn classify(
    profile: &CelerityProfile,
    mu: f64,
    lambda: f64,
    eps: f64,
    well: Option<&WellInterval>,
) -> SectorLabel {
    if lambda >= (profile.c_max() + eps) * mu * mu {
        return SectorLabel::NonGuided { eps, first_index: None };
    }
    classify_verified(profile, mu, lambda, eps, well.filter(|w| w.verify(profile, 1e-12)))
}

/// Smallest index `l` of the fiber with `beta_l >= (c_M + eps) mu^2`.
pub fn first_non_guided_index(profile: &CelerityProfile, mu: f64, eps: f64) -> Result<usize> {
    let threshold = (profile.c_max() + eps) * mu * mu;
    let below = eigenvalue_count(profile, mu, threshold)?;
    if below >= 1 && eigenvalue(profile, mu, below)? >= threshold {
        return Ok(below);
    }
    Ok(below + 1)
}

/// One row of the spectrum table.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub k: usize,
    pub mu: f64,
    pub ell: usize,
    pub lambda: f64,
    pub sector: Option<SectorLabel>,
}

/// All fiber eigenvalues up to `lambda_max`, sorted by `lambda` then `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub lambda_max: f64,
    pub modes: CrossSectionModes,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    /// CSV with columns `k,mu,ell,lambda` and `sector` when classified.
    pub fn to_csv(&self) -> String {
        let classified = self.rows.iter().any(|r| r.sector.is_some());
        let mut header = vec!["k", "mu", "ell", "lambda"];
        if classified {
            header.push("sector");
        }
        let mut csv = Csv::new(&header);
        for r in &self.rows {
            let mut cells = vec![r.k.to_string(), g12(r.mu), r.ell.to_string(), g12(r.lambda)];
            if classified {
                cells.push(r.sector.map_or("", |s| s.name()).to_string());
            }
            csv.row(&cells);
        }
        csv.finish()
    }
}

/// Enumerate every `beta_{k, l} <= lambda_max` over all modes with
/// `mu_k^2 <= lambda_max / c_m`, optionally classifying each point.
pub fn enumerate(
    profile: &CelerityProfile,
    cs: &CrossSection,
    lambda_max: f64,
    eps: Option<f64>,
    well: Option<&WellInterval>,
) -> Result<SpectrumTable> {
    let first = cross_section_modes(cs, 1)?.modes[0].mu_sq;
    let floor = profile.c_min() * (first + (PI / profile.height()).powi(2));
    if !(lambda_max > floor) {
        return Err(Error::InvalidArgument(format!(
            "lambda_max = {lambda_max} must exceed the lowest possible eigenvalue bound {floor}"
        )));
    }
    if let Some(e) = eps {
        if !(e > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {e}")));
        }
    }
    let modes = modes_up_to(cs, lambda_max / profile.c_min())?;
    let well_ok = well.filter(|w| w.verify(profile, 1e-12));
    let per_mode: Vec<Vec<SpectrumRow>> = modes
        .modes
        .par_iter()
        .map(|m| -> Result<Vec<SpectrumRow>> {
            let eig = spectrum_in_range(profile, m.mu, 0.0, lambda_max)?;
            let first_index = match eps {
                Some(e) if !eig.is_empty() => Some(first_non_guided_index(profile, m.mu, e)?),
                _ => None,
            };
            Ok(eig
                .into_iter()
                .map(|(ell, lambda)| SpectrumRow {
                    k: m.k,
                    mu: m.mu,
                    ell,
                    lambda,
                    sector: eps.map(|e| match classify_verified(profile, m.mu, lambda, e, well_ok) {
                        SectorLabel::NonGuided { eps, .. } => SectorLabel::NonGuided { eps, first_index },
                        other => other,
                    }),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SpectrumRow> = per_mode.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.k.cmp(&b.k)));
    Ok(SpectrumTable { lambda_max, modes, rows })
}

/// [`classify`] with a well already verified by the caller.
fn classify_verified(
    profile: &CelerityProfile,
    mu: f64,
    lambda: f64,
    eps: f64,
    well: Option<&WellInterval>,
) -> SectorLabel {
    let mu2 = mu * mu;
    if lambda >= (profile.c_max() + eps) * mu2 {
        return SectorLabel::NonGuided { eps, first_index: None };
    }
    match well {
        Some(w) if profile.c_min() * mu2 <= lambda && lambda <= (w.c1 - eps) * mu2 => {
            SectorLabel::Guided { c1: w.c1, eps }
        }
        _ => SectorLabel::Residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_and_box_modes() {
        let m = cross_section_modes(&CrossSection::Interval { length: PI }, 3).unwrap();
        let mus: Vec<f64> = m.modes.iter().map(|m| m.mu).collect();
        assert_eq!(mus, vec![1.0, 2.0, 3.0]);
        let m = cross_section_modes(&CrossSection::Box { lengths: vec![PI, PI] }, 4).unwrap();
        let sq: Vec<f64> = m.modes.iter().map(|m| m.mu_sq.round()).collect();
        assert_eq!(sq, vec![2.0, 5.0, 5.0, 8.0]);
        let m = cross_section_modes(&CrossSection::Interval { length: 1.0 }, 1).unwrap();
        assert_eq!(m.modes[0].mu, PI);
    }

    #[test]
    fn three_dimensional_box_counts() {
        let m = cross_section_modes(&CrossSection::Box { lengths: vec![PI, PI, PI] }, 10).unwrap();
        let sq: Vec<f64> = m.modes.iter().map(|m| m.mu_sq.round()).collect();
        assert_eq!(sq, vec![3.0, 6.0, 6.0, 6.0, 9.0, 9.0, 9.0, 11.0, 11.0, 11.0]);
        assert!(cross_section_modes(&CrossSection::Box { lengths: vec![1.0; 4] }, 1).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(CrossSection::parse("interval:pi").unwrap(), CrossSection::Interval { length: PI });
        assert_eq!(CrossSection::parse("interval:2*pi").unwrap(), CrossSection::Interval { length: 2.0 * PI });
        assert_eq!(CrossSection::parse("box:2pi,1.5").unwrap(), CrossSection::Box { lengths: vec![2.0 * PI, 1.5] });
        assert_eq!(CrossSection::parse("interval:pi/2").unwrap(), CrossSection::Interval { length: PI / 2.0 });
        assert!(CrossSection::parse("disk:1").is_err());
        assert!(CrossSection::parse("interval:-1").is_err());
    }

    #[test]
    fn classify_examples() {
        let c1 = CelerityProfile::constant(1.0, PI).unwrap();
        assert!(classify(&c1, 1.0, 2.0, 0.5, None).is_non_guided());
        let well = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0, 3.0], vec![4.0, 1.0, 4.0]).unwrap();
        let w = well.find_well(4.0).unwrap().unwrap();
        assert!(classify(&well, 10.0, 200.0, 0.5, Some(&w)).is_guided());
        assert_eq!(classify(&well, 10.0, 420.0, 0.5, Some(&w)), SectorLabel::Residual);
        assert_eq!(classify(&well, 10.0, 200.0, 0.5, None), SectorLabel::Residual);
        // closed on the cone side
        assert!(classify(&well, 10.0, 350.0, 0.5, Some(&w)).is_guided());
        assert!(classify(&well, 10.0, 450.0, 0.5, Some(&w)).is_non_guided());
    }

    #[test]
    fn enumerate_constant_profile() {
        let p = CelerityProfile::constant(1.0, PI).unwrap();
        let t = enumerate(&p, &CrossSection::Interval { length: PI }, 9.0, Some(0.5), None).unwrap();
        let got: Vec<(usize, usize, f64)> = t.rows.iter().map(|r| (r.k, r.ell, (r.lambda * 1e9).round() / 1e9)).collect();
        assert_eq!(got, vec![(1, 1, 2.0), (1, 2, 5.0), (2, 1, 5.0), (2, 2, 8.0)]);
        // (k, l) = (2, 1) has lambda = 5 < 1.5 mu^2 = 6 and is not in the cone
        let labels: Vec<&str> = t.rows.iter().map(|r| r.sector.unwrap().name()).collect();
        assert_eq!(labels, vec!["non-guided", "non-guided", "residual", "non-guided"]);
        let csv = t.to_csv();
        assert!(csv.starts_with("k,mu,ell,lambda,sector\n1,1,1,2,non-guided\n"));
    }

    #[test]
    fn first_index_is_minimal() {
        let p = CelerityProfile::piecewise_constant(vec![0.0, 1.0, 2.0, 3.0], vec![4.0, 1.0, 4.0]).unwrap();
        for mu in [1.0, 3.0, 7.0] {
            let l0 = first_non_guided_index(&p, mu, 0.5).unwrap();
            let thr = 4.5 * mu * mu;
            assert!(eigenvalue(&p, mu, l0).unwrap() >= thr);
            if l0 > 1 {
                assert!(eigenvalue(&p, mu, l0 - 1).unwrap() < thr);
            }
        }
    }

    #[test]
    fn window_factor_halves() {
        let cs = CrossSection::Interval { length: PI };
        for n in 1..5 {
            assert!((cs.window_factor(&[n], &[(0.0, PI / 2.0)]).unwrap() - 0.5).abs() < 1e-14);
            assert!((cs.window_factor(&[n], &[(0.0, PI)]).unwrap() - 1.0).abs() < 1e-14);
        }
    }
}
