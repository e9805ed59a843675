//! Profile files.
//!
//! A profile file is a TOML document:
//!
//! ```toml
//! type = "piecewise-constant"   # or "sampled", "preset"
//! H = 3.0
//! breakpoints = [0, 1, 2, 3]    # piecewise-constant
//! values = [4, 1, 4]
//! # ys = [...], cs = [...], interp = "step" | "linear"   (sampled)
//! # preset = "sine-bump", params = [2.0, 0.5]           (preset)
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{CelerityProfile, Interpolation, PiecewiseConstant, Preset, Representation};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    #[serde(rename = "type")]
    kind: String,
    #[serde(rename = "H")]
    height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakpoints: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ys: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<Vec<f64>>,
}

fn field<T>(v: Option<T>, name: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| Error::MalformedProfile(format!("`{kind}` profile needs `{name}`")))
}

fn check_height(declared: Option<f64>, actual: f64) -> Result<()> {
    match declared {
        Some(h) if (h - actual).abs() > 1e-12 * actual.abs().max(1.0) => Err(Error::MalformedProfile(format!(
            "H = {h} disagrees with the last grid point {actual}"
        ))),
        _ => Ok(()),
    }
}

/// Parse a profile from the text of a profile file.
pub fn parse_profile(text: &str) -> Result<CelerityProfile> {
    let f: ProfileFile = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
    match f.kind.as_str() {
        "piecewise-constant" => {
            let bp = field(f.breakpoints, "breakpoints", &f.kind)?;
            let values = field(f.values, "values", &f.kind)?;
            check_height(f.height, *bp.last().ok_or(Error::EmptyProfile)?)?;
            CelerityProfile::piecewise_constant(bp, values)
        }
        "sampled" => {
            let ys = field(f.ys, "ys", &f.kind)?;
            let cs = field(f.cs, "cs", &f.kind)?;
            let interp = match f.interp.as_deref() {
                Some("step") => Interpolation::Step,
                Some("linear") | None => Interpolation::Linear,
                Some(other) => {
                    return Err(Error::MalformedProfile(format!("unknown interpolation `{other}`")))
                }
            };
            check_height(f.height, *ys.last().ok_or(Error::EmptyProfile)?)?;
            CelerityProfile::sampled(ys, cs, interp)
        }
        "preset" => {
            let name = field(f.preset, "preset", &f.kind)?;
            let params = f.params.unwrap_or_default();
            let height = field(f.height, "H", &f.kind)?;
            CelerityProfile::preset(Preset::from_name(&name, &params)?, height)
        }
        other => Err(Error::MalformedProfile(format!("unknown profile type `{other}`"))),
    }
}

/// Read and parse a profile file.
pub fn read_profile(path: &Path) -> Result<CelerityProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_profile(&text)
}

/// Serialize a profile in the profile file format. Numbers round-trip.
pub fn profile_to_string(profile: &CelerityProfile) -> String {
    let mut f = ProfileFile { height: Some(profile.height()), ..Default::default() };
    match profile.representation() {
        Representation::PiecewiseConstant(pc) => {
            f.kind = "piecewise-constant".into();
            f.breakpoints = Some(pc.breakpoints().to_vec());
            f.values = Some(pc.values().to_vec());
        }
        Representation::Sampled { ys, cs, interp } => {
            f.kind = "sampled".into();
            f.ys = Some(ys.clone());
            f.cs = Some(cs.clone());
            f.interp = Some(match interp {
                Interpolation::Step => "step".into(),
                Interpolation::Linear => "linear".into(),
            });
        }
        Representation::Analytic(p) => {
            f.kind = "preset".into();
            f.preset = Some(p.name().into());
            f.params = Some(p.params());
        }
    }
    toml::to_string(&f).expect("profile fields always serialize")
}

/// Piecewise-constant data as a profile file.
pub fn piecewise_to_string(pc: &PiecewiseConstant) -> String {
    let f = ProfileFile {
        kind: "piecewise-constant".into(),
        height: Some(pc.height()),
        breakpoints: Some(pc.breakpoints().to_vec()),
        values: Some(pc.values().to_vec()),
        ..Default::default()
    };
    toml::to_string(&f).expect("profile fields always serialize")
}
