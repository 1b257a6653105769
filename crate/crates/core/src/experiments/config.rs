//! Flat `key = value` scenario files.
//!
//! ```text
//! # start from a preset, then override
//! preset = fig8
//! seed = 7
//! methods = exact, master-correlator
//! ```
//!
//! A `preset` line, if present, must come first. Lists are comma separated.

use super::{preset, IcKind, Method, Scenario, Spectrum};
use crate::error::{Error, Result};

fn number(key: &str, v: &str) -> Result<f64> {
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => v
            .parse::<f64>()
            .map_err(|_| Error::InvalidScenario(format!("{key}: '{v}' is not a number"))),
    }
}

fn integer<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::InvalidScenario(format!("{key}: '{v}' is not a non-negative integer")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| number(key, x.trim())).collect()
}

/// Sets one field of `s`.
pub fn apply_setting(s: &mut Scenario, key: &str, value: &str) -> Result<()> {
    let v = value.trim();
    match key {
        "name" => s.name = v.to_string(),
        "omega0" => s.omega0 = number(key, v)?,
        "lambda" => s.lambda = number(key, v)?,
        "beta" => s.beta = number(key, v)?,
        "t_end" => s.t_end = number(key, v)?,
        "samples" => s.sample_count = integer(key, v)?,
        "rel_tol" => s.rel_tol = number(key, v)?,
        "abs_tol" => s.abs_tol = number(key, v)?,
        "ic" => s.ic = IcKind::parse(v)?,
        "methods" => {
            s.methods = v
                .split(',')
                .map(str::trim)
                .filter(|m| !m.is_empty())
                .map(Method::parse)
                .collect::<Result<_>>()?
        }
        "omegas" => s.spectrum = Spectrum::Explicit(list(key, v)?),
        "spectrum" => {
            s.spectrum = match v {
                "uniform" => match s.spectrum {
                    Spectrum::Uniform { .. } => s.spectrum.clone(),
                    _ => Spectrum::Uniform { lo: 0.9, hi: 1.1, count: 50, seed: 1 },
                },
                "progression" => match s.spectrum {
                    Spectrum::Progression { .. } => s.spectrum.clone(),
                    _ => Spectrum::Progression { step: 0.02, count: 50 },
                },
                _ => return Err(Error::InvalidScenario(format!("unknown spectrum kind '{v}'"))),
            }
        }
        "band" | "seed" | "count" | "step" => {
            let kind_err = || Error::InvalidScenario(format!("'{key}' does not apply to this spectrum"));
            match (&mut s.spectrum, key) {
                (Spectrum::Uniform { lo, hi, .. }, "band") => {
                    let b = list(key, v)?;
                    if b.len() != 2 {
                        return Err(Error::InvalidScenario(format!("band needs two values, got '{v}'")));
                    }
                    (*lo, *hi) = (b[0], b[1]);
                }
                (Spectrum::Uniform { seed, .. }, "seed") => *seed = integer(key, v)?,
                (Spectrum::Uniform { count, .. } | Spectrum::Progression { count, .. }, "count") => {
                    *count = integer(key, v)?
                }
                (Spectrum::Progression { step, .. }, "step") => *step = number(key, v)?,
                _ => return Err(kind_err()),
            }
        }
        _ => return Err(Error::InvalidScenario(format!("unknown key '{key}'"))),
    }
    Ok(())
}

/// The settings that reproduce `s` through [`apply_setting`].
pub fn scenario_settings(s: &Scenario) -> Vec<(String, String)> {
    let mut out = vec![("name".to_string(), s.name.clone()), ("omega0".into(), format!("{}", s.omega0))];
    let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
    match &s.spectrum {
        Spectrum::Explicit(r) => out.push(("omegas".into(), join(r))),
        Spectrum::Uniform { lo, hi, count, seed } => {
            out.push(("spectrum".into(), "uniform".into()));
            out.push(("band".into(), join(&[*lo, *hi])));
            out.push(("count".into(), format!("{count}")));
            out.push(("seed".into(), format!("{seed}")));
        }
        Spectrum::Progression { step, count } => {
            out.push(("spectrum".into(), "progression".into()));
            out.push(("step".into(), format!("{step}")));
            out.push(("count".into(), format!("{count}")));
        }
    }
    out.extend([
        ("lambda".into(), format!("{}", s.lambda)),
        ("beta".into(), format!("{}", s.beta)),
        ("ic".into(), s.ic.as_str().into()),
        (
            "methods".into(),
            s.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
        ),
        ("t_end".into(), format!("{}", s.t_end)),
        ("samples".into(), format!("{}", s.sample_count)),
        ("rel_tol".into(), format!("{:e}", s.rel_tol)),
        ("abs_tol".into(), format!("{:e}", s.abs_tol)),
    ]);
    out
}

/// Parses a scenario file. Errors carry the 1-based line number.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut s = Scenario::default();
    let mut seen_setting = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let at = |message: String| Error::Config { line, message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        if key == "preset" {
            if seen_setting {
                return Err(at("'preset' must precede every other setting".into()));
            }
            s = preset(value.trim()).map_err(|e| at(e.to_string()))?;
        } else {
            apply_setting(&mut s, key, value).map_err(|e| at(e.to_string()))?;
        }
        seen_setting = true;
    }
    Ok(s)
}
