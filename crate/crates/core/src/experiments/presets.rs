//! Parameter sets of the reference figures.
//!
//! `fig1`..`fig7` are the single-bath-oscillator figures. `fig8`..`fig12`
//! are the 50-oscillator resonant-band figures, and `nonresonant` is the
//! 50-oscillator band `[2, 3]` used for the weak-coupling average.

use super::{IcKind, Method, Scenario, Spectrum};
use crate::error::{Error, Result};

/// Seed of the `fig8` draw, whose master run destabilizes near `omega0 t = 288`.
pub const FIG8_SEED: u64 = 3;
/// Seed of the `fig12` draw, whose master run destabilizes near `omega0 t = 121`.
pub const FIG12_SEED: u64 = 2;
/// Seed of the remaining drawn spectra.
pub const DEFAULT_SEED: u64 = 1;

const NAMES: [&str; 13] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11",
    "fig12", "nonresonant",
];

pub fn preset_names() -> &'static [&'static str] {
    &NAMES
}

/// Samples per unit of `omega0 t`.
const DENSITY: f64 = 10.0;

fn single(name: &str, omega1: f64, lambda: f64, beta: f64, t_end: f64) -> Scenario {
    Scenario {
        name: name.into(),
        spectrum: Spectrum::Explicit(vec![omega1]),
        lambda,
        beta,
        methods: vec![
            Method::Exact,
            Method::AnalyticN1,
            Method::MasterCorrelator,
            Method::MasterCoeff,
            Method::DensityMatrixN1,
        ],
        t_end,
        sample_count: (t_end * DENSITY) as usize + 1,
        ..Scenario::default()
    }
}

fn bath(name: &str, spectrum: Spectrum, lambda: f64, beta: f64, t_end: f64) -> Scenario {
    Scenario {
        name: name.into(),
        spectrum,
        lambda,
        beta,
        methods: vec![Method::Exact, Method::MasterCorrelator, Method::MasterCoeff],
        t_end,
        sample_count: (t_end * DENSITY) as usize + 1,
        ..Scenario::default()
    }
}

fn band(lo: f64, hi: f64, seed: u64) -> Spectrum {
    Spectrum::Uniform {
        lo,
        hi,
        count: 50,
        seed,
    }
}

/// The named preset.
pub fn preset(name: &str) -> Result<Scenario> {
    let s = match name {
        // phase-space area and entropy, zero and high temperature
        "fig1" | "fig3" => single(name, 2.0, 0.5, 2000.0, 50.0),
        "fig2" | "fig4" => single(name, 2.0, 0.5, 0.2, 50.0),
        // long horizon showing quasi-periodic recurrences
        "fig5" => single(name, 2.0, 0.5, 0.2, LONG_HORIZON),
        "fig6" => single(name, 201.0 / 200.0, 0.25, 0.2, 200.0),
        "fig7" => Scenario {
            ic: IcKind::TimeTranslationInvariant,
            methods: vec![Method::Exact, Method::AnalyticN1, Method::DensityMatrixN1],
            ..single(name, 2.0, 0.25, 2.0, 100.0)
        },
        "fig8" => bath(name, band(0.9, 1.1, FIG8_SEED), 1.0 / 40.0, 1.0, 600.0),
        "fig9" => bath(name, Spectrum::Progression { step: 1.0 / 50.0, count: 50 }, 3.0 / 40.0, 2.0, 300.0),
        "fig10" => bath(name, Spectrum::Progression { step: 1.0 / 100.0, count: 50 }, 3.0 / 40.0, 2.0, 300.0),
        "fig11" => bath(name, band(0.75, 1.5, DEFAULT_SEED), 1.0 / 16.0, 2.0, LONG_HORIZON),
        "fig12" => bath(name, band(0.95, 1.05, FIG12_SEED), 0.1, 0.1, 300.0),
        "nonresonant" => bath(name, band(2.0, 3.0, DEFAULT_SEED), 1.0 / 8.0, 2.0, 300.0),
        _ => return Err(Error::UnknownPreset(name.into())),
    };
    Ok(s)
}

/// Shared horizon of the recurrence comparison between `fig5` and `fig11`.
pub const LONG_HORIZON: f64 = 1000.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in preset_names() {
            let s = preset(name).unwrap();
            s.validate().unwrap();
            s.params().unwrap();
            assert_eq!(s.name, *name);
        }
        assert!(matches!(preset("fig13"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn caption_transcriptions() {
        let s = preset("fig5").unwrap();
        assert_eq!((s.spectrum.clone(), s.lambda, s.beta), (Spectrum::Explicit(vec![2.0]), 0.5, 0.2));
        assert!(s.t_end >= 500.0);
        let s = preset("fig10").unwrap();
        assert_eq!(s.spectrum, Spectrum::Progression { step: 0.01, count: 50 });
        assert_eq!((s.lambda, s.beta), (3.0 / 40.0, 2.0));
        let f = s.spectrum.frequencies(1.0).unwrap();
        assert!((f[0] - 1.01).abs() < 1e-15 && (f[49] - 1.5).abs() < 1e-15);
        let s = preset("fig12").unwrap();
        assert_eq!((s.lambda, s.beta), (0.1, 0.1));
        assert!(matches!(s.spectrum, Spectrum::Uniform { lo, hi, count: 50, .. } if lo == 0.95 && hi == 1.05));
        assert_eq!(preset("fig7").unwrap().ic, IcKind::TimeTranslationInvariant);
        assert!(preset_names().iter().filter(|n| **n != "fig7").all(|n| preset(n).unwrap().ic == IcKind::PureThermal));
    }
}
