//! Reference scenarios, the multi-method runner and CSV export.

mod config;
mod output;
mod presets;
mod run;

pub use config::{apply_setting, parse_config, scenario_settings};
pub use output::{emit_csv, emit_method_csv, write_atomic};
pub use presets::{preset, preset_names, DEFAULT_SEED, FIG12_SEED, FIG8_SEED, LONG_HORIZON};
pub use run::{
    breakdown_time, decoherence_rate, run_scenario, thermal_baseline, ConservationReport,
    EntropyRecord, MethodSeries, Trajectory,
};

use crate::error::{Error, Result};
use crate::exact::{random_spectrum, ModelParams};
use crate::gaussian::InverseTemperature;

/// How the bath frequencies are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// Explicit `omega_n / omega0`.
    Explicit(Vec<f64>),
    /// `count` draws uniform in `[lo, hi] * omega0`.
    Uniform { lo: f64, hi: f64, count: usize, seed: u64 },
    /// `omega_n / omega0 = 1 + n * step` for `n = 1..=count`.
    Progression { step: f64, count: usize },
}

impl Spectrum {
    /// Bath frequencies in absolute units.
    pub fn frequencies(&self, omega0: f64) -> Result<Vec<f64>> {
        let ratios = match self {
            Spectrum::Explicit(r) => r.clone(),
            Spectrum::Uniform { lo, hi, count, seed } => random_spectrum(*lo, *hi, *count, *seed)?,
            Spectrum::Progression { step, count } => {
                (1..=*count).map(|n| 1.0 + n as f64 * step).collect()
            }
        };
        Ok(ratios.into_iter().map(|r| r * omega0).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            Spectrum::Explicit(r) => r.len(),
            Spectrum::Uniform { count, .. } | Spectrum::Progression { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Spectrum::Uniform { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Initial state of the joint system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    /// System ground state, bath modes thermal, uncorrelated.
    PureThermal,
    /// The stationary correlated state of one system and one bath oscillator.
    TimeTranslationInvariant,
}

impl IcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IcKind::PureThermal => "pure-thermal",
            IcKind::TimeTranslationInvariant => "time-translation-invariant",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pure-thermal" => Ok(IcKind::PureThermal),
            "time-translation-invariant" | "tti" => Ok(IcKind::TimeTranslationInvariant),
            _ => Err(Error::InvalidScenario(format!("unknown initial condition '{s}'"))),
        }
    }
}

/// Ways of computing the system entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Exact,
    AnalyticN1,
    MasterCorrelator,
    MasterCoeff,
    DensityMatrixN1,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Exact,
        Method::AnalyticN1,
        Method::MasterCorrelator,
        Method::MasterCoeff,
        Method::DensityMatrixN1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::AnalyticN1 => "analytic-n1",
            Method::MasterCorrelator => "master-correlator",
            Method::MasterCoeff => "master-coeff",
            Method::DensityMatrixN1 => "density-matrix-n1",
        }
    }

    /// Short tag used in CSV column names.
    pub fn column_tag(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::AnalyticN1 => "analytic",
            Method::MasterCorrelator => "master",
            Method::MasterCoeff => "master_coeff",
            Method::DensityMatrixN1 => "density",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidScenario(format!("unknown method '{s}'")))
    }

    pub fn is_master(self) -> bool {
        matches!(self, Method::MasterCorrelator | Method::MasterCoeff)
    }

    pub fn requires_single_mode(self) -> bool {
        matches!(self, Method::AnalyticN1 | Method::DensityMatrixN1)
    }
}

/// A fully specified run. Frequencies, couplings and temperatures are in
/// units of `omega0`, times in units of `1/omega0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub omega0: f64,
    pub spectrum: Spectrum,
    /// Common coupling `lambda / omega0^2` of every bath mode.
    pub lambda: f64,
    /// `beta * omega0`; infinite means zero temperature. Ignored for the
    /// time-translation-invariant state, whose temperature is fixed.
    pub beta: f64,
    pub ic: IcKind,
    pub methods: Vec<Method>,
    pub t_end: f64,
    pub sample_count: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            omega0: 1.0,
            spectrum: Spectrum::Explicit(vec![2.0]),
            lambda: 0.5,
            beta: 2.0,
            ic: IcKind::PureThermal,
            methods: vec![Method::Exact, Method::MasterCorrelator],
            t_end: 50.0,
            sample_count: 1001,
            // one decade tighter than the integrator default: over ~1000
            // periods this keeps det(cov) drift below 1e-8 for N = 50
            rel_tol: 1e-11,
            abs_tol: 1e-13,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return bad(format!("omega0 must be positive, got {}", self.omega0));
        }
        if self.spectrum.is_empty() {
            return bad("the bath needs at least one mode".into());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.sample_count < 2 {
            return bad(format!("need at least 2 samples, got {}", self.sample_count));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        let single = self.spectrum.len() == 1;
        for m in &self.methods {
            if m.requires_single_mode() && !single {
                return bad(format!("{} needs exactly one bath mode", m.as_str()));
            }
            if m.is_master() && self.ic == IcKind::TimeTranslationInvariant {
                return bad(format!(
                    "{} assumes an uncorrelated initial state",
                    m.as_str()
                ));
            }
        }
        if self.ic == IcKind::TimeTranslationInvariant && !single {
            return bad("the time-translation-invariant state needs exactly one bath mode".into());
        }
        Ok(())
    }

    /// Model parameters in absolute units.
    pub fn params(&self) -> Result<ModelParams> {
        let w0 = self.omega0;
        ModelParams::equal_coupling(w0, self.spectrum.frequencies(w0)?, self.lambda * w0 * w0)
    }

    pub fn inverse_temperature(&self) -> Result<InverseTemperature> {
        InverseTemperature::finite(self.beta / self.omega0)
    }

    /// Uniform sample grid with `sample_count` points.
    pub fn times(&self) -> Vec<f64> {
        let unit = 1.0 / self.omega0;
        crate::integrator::linspace(0.0, self.t_end * unit, self.sample_count - 1)
    }
}
