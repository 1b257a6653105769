use std::f64::consts::PI;
use std::time::Instant;

use super::{IcKind, Method, Scenario};
use crate::analytic::{time_translation_invariant_beta, time_translation_invariant_ic, AnalyticSolution, InitialConditions10};
use crate::density;
use crate::error::{Error, Result};
use crate::exact::{self, CorrelatorState, Mode, ModelParams};
use crate::gaussian::{
    correlators_to_coeffs, entropy_from_delta, InverseTemperature, PhaseSpaceArea, ThermalSpec,
};
use crate::integrator::IntegratorOpts;
use crate::master;

/// Minimum samples per period of the fastest normal mode for a rate estimate.
const SAMPLES_PER_PERIOD: f64 = 20.0;

/// One method's system trajectory on the shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSeries {
    pub method: Method,
    /// `Delta_S^2`; `None` after the method failed.
    pub delta_squared: Vec<Option<f64>>,
    /// First failure, if any; samples from then on are `None`.
    pub error: Option<String>,
    /// First time the breakdown detector fired (master methods only).
    pub breakdown: Option<f64>,
}

impl MethodSeries {
    fn new(method: Method, n: usize) -> Self {
        Self {
            method,
            delta_squared: vec![None; n],
            error: None,
            breakdown: None,
        }
    }

    /// `Delta_S`, or `None` where undefined or unphysical.
    pub fn delta(&self, i: usize) -> Option<f64> {
        area(self.delta_squared[i]).map(|a| a.value())
    }

    /// `S_S`, or `None` where undefined or unphysical.
    pub fn entropy(&self, i: usize) -> Option<f64> {
        area(self.delta_squared[i]).map(entropy_from_delta)
    }

    /// True when a value exists but lies below the pure-state bound.
    pub fn unphysical(&self, i: usize) -> bool {
        self.delta_squared[i].is_some() && area(self.delta_squared[i]).is_none()
    }

    pub fn entropies(&self) -> Vec<Option<f64>> {
        (0..self.delta_squared.len()).map(|i| self.entropy(i)).collect()
    }
}

fn area(d2: Option<f64>) -> Option<PhaseSpaceArea> {
    d2.and_then(|v| PhaseSpaceArea::from_delta_squared(v).ok())
}

/// Drift of the conserved quantities along the exact trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    /// `max |E(t) - E(0)| / |E(0)|`
    pub energy_drift: f64,
    /// `max |det cov(t) / det cov(0) - 1|`
    pub det_drift: f64,
    /// Smallest marginal `Delta` of any oscillator at any sample.
    pub min_subsystem_delta: f64,
}

/// One output row.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRecord {
    pub t: f64,
    /// `(method, Delta_S, S_S)` for each requested method.
    pub methods: Vec<(Method, Option<f64>, Option<f64>)>,
    pub s_env: Option<f64>,
    pub s_corr: Option<f64>,
    pub gamma: Option<f64>,
    pub unphysical: Vec<Method>,
    pub breakdown_crossed: Vec<Method>,
}

/// Everything produced by [`run_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub times: Vec<f64>,
    pub series: Vec<MethodSeries>,
    /// Summed bath entropy from the exact run.
    pub s_env: Vec<Option<f64>>,
    /// `S_total - S_S - S_E` from the exact run.
    pub s_corr: Vec<Option<f64>>,
    /// Smoothed decoherence rate of the first method's `Delta_S`.
    pub gamma: Vec<Option<f64>>,
    pub delta_th: f64,
    pub s_th: f64,
    pub conservation: Option<ConservationReport>,
    /// Ordered `key=value` pairs echoed into every output file.
    pub metadata: Vec<(String, String)>,
    pub wall_time_secs: f64,
}

impl Trajectory {
    pub fn series(&self, m: Method) -> Option<&MethodSeries> {
        self.series.iter().find(|s| s.method == m)
    }

    pub fn records(&self) -> Vec<EntropyRecord> {
        (0..self.times.len())
            .map(|i| EntropyRecord {
                t: self.times[i],
                methods: self
                    .series
                    .iter()
                    .map(|s| (s.method, s.delta(i), s.entropy(i)))
                    .collect(),
                s_env: self.s_env[i],
                s_corr: self.s_corr[i],
                gamma: self.gamma[i],
                unphysical: self
                    .series
                    .iter()
                    .filter(|s| s.unphysical(i))
                    .map(|s| s.method)
                    .collect(),
                breakdown_crossed: self
                    .series
                    .iter()
                    .filter(|s| s.breakdown.is_some_and(|tb| self.times[i] >= tb))
                    .map(|s| s.method)
                    .collect(),
            })
            .collect()
    }
}

/// `(Delta_th, S_th)` of an oscillator of frequency `omega0` at `beta`.
pub fn thermal_baseline(beta: InverseTemperature, omega0: f64) -> Result<(f64, f64)> {
    let spec = ThermalSpec::new(beta, omega0)?;
    let d = spec.coth_factor();
    Ok((d, entropy_from_delta(PhaseSpaceArea::from_delta(d)?)))
}

/// First time at which `Delta^2 < 1 - 1e-6` or `S > S_th + max(0.5, S_th)`.
/// Non-finite values also count.
pub fn breakdown_time(times: &[f64], delta_squared: &[Option<f64>], s_th: f64) -> Option<f64> {
    let ceiling = s_th + s_th.max(0.5);
    times.iter().zip(delta_squared).find_map(|(&t, d2)| {
        let d2 = (*d2)?;
        let fired = match PhaseSpaceArea::from_delta_squared(d2) {
            Ok(a) => !d2.is_finite() || entropy_from_delta(a) > ceiling,
            Err(_) => true,
        };
        fired.then_some(t)
    })
}

/// `Gamma = -dDelta/dt / Delta` by second-order differences, then a centred
/// moving average of width `window`. Needs a uniform grid.
pub fn decoherence_rate(times: &[f64], delta: &[f64], window: f64) -> Result<Vec<f64>> {
    let n = times.len();
    let short = |m: String| Err(Error::InsufficientSampling(m));
    if n < 3 || delta.len() != n {
        return short(format!("{n} times for {} values", delta.len()));
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(h > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return short("the time grid must be uniform and increasing".into());
    }
    if !(window >= 0.0) {
        return short(format!("window {window} must be non-negative"));
    }
    let deriv = |i: usize| -> f64 {
        if i == 0 {
            (-3.0 * delta[0] + 4.0 * delta[1] - delta[2]) / (2.0 * h)
        } else if i == n - 1 {
            (3.0 * delta[n - 1] - 4.0 * delta[n - 2] + delta[n - 3]) / (2.0 * h)
        } else {
            (delta[i + 1] - delta[i - 1]) / (2.0 * h)
        }
    };
    let raw: Vec<f64> = (0..n).map(|i| -deriv(i) / delta[i]).collect();
    let half = (0.5 * window / h).round() as usize;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in &raw {
        prefix.push(prefix.last().unwrap() + v);
    }
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect())
}

fn initial_state(s: &Scenario, params: &ModelParams, beta: InverseTemperature) -> Result<CorrelatorState> {
    match s.ic {
        IcKind::PureThermal => Ok(exact::pure_thermal_ic(params, beta)),
        IcKind::TimeTranslationInvariant => {
            let ic = time_translation_invariant_ic(params.omega0(), params.omegas()[0], params.lambdas()[0])?;
            CorrelatorState::new(ic.to_cov(), 0.0)
        }
    }
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

/// Runs every requested method on a shared grid. Failures of individual
/// methods are recorded in their series and the metadata.
pub fn run_scenario(s: &Scenario) -> Result<Trajectory> {
    let start = Instant::now();
    s.validate()?;
    let params = s.params()?;
    let times = s.times();
    let n = times.len();
    let (beta, beta_note) = match s.ic {
        IcKind::PureThermal => (s.inverse_temperature()?, None),
        IcKind::TimeTranslationInvariant => {
            let b = time_translation_invariant_beta(params.omega0(), params.omegas()[0]);
            let beta = b.map_or(Ok(InverseTemperature::Zero), InverseTemperature::finite)?;
            (beta, Some(beta.beta() * params.omega0()))
        }
    };
    let s0 = initial_state(s, &params, beta)?;
    let (delta_th, s_th) = thermal_baseline(beta, params.omega0())?;
    let opts = IntegratorOpts {
        rel_tol: s.rel_tol,
        abs_tol: s.abs_tol,
        ..IntegratorOpts::for_frequency(params.omega_max())
    }
    .with_output_times(times.clone());

    let mut series = Vec::new();
    let mut s_env = vec![None; n];
    let mut s_corr = vec![None; n];
    let mut conservation = None;

    for &m in &s.methods {
        let mut out = MethodSeries::new(m, n);
        let d2 = &mut out.delta_squared;
        let mut i = 0usize;
        let result: Result<()> = match m {
            Method::Exact => {
                let s_total = total_entropy(&s0);
                let e0 = exact::energy(&params, &s0);
                let ld0 = s0.log_det();
                let mut report = ConservationReport {
                    energy_drift: 0.0,
                    det_drift: 0.0,
                    min_subsystem_delta: f64::INFINITY,
                };
                let r = exact::evolve_with(&params, &s0, &opts, |st| {
                    let sys = st.marginal(Mode::System).delta_squared();
                    d2[i] = Some(sys);
                    let mut env = 0.0;
                    let mut min_d = sys.sqrt();
                    for k in 0..st.n_env() {
                        let e2 = st.marginal(Mode::Env(k)).delta_squared();
                        min_d = min_d.min(e2.sqrt());
                        env += area(Some(e2)).map_or(f64::NAN, entropy_from_delta);
                    }
                    let s_sys = area(Some(sys)).map(entropy_from_delta);
                    s_env[i] = env.is_finite().then_some(env);
                    s_corr[i] = match (s_total, s_sys, s_env[i]) {
                        (Some(a), Some(b), Some(c)) => Some(a - b - c),
                        _ => None,
                    };
                    report.energy_drift = report
                        .energy_drift
                        .max(((exact::energy(&params, st) - e0) / e0).abs());
                    if let (Ok(l0), Ok(l)) = (&ld0, st.log_det()) {
                        report.det_drift = report.det_drift.max((l - l0).exp_m1().abs());
                    } else {
                        report.det_drift = f64::NAN;
                    }
                    report.min_subsystem_delta = report.min_subsystem_delta.min(min_d);
                    i += 1;
                    Ok(())
                });
                conservation = Some(report);
                r
            }
            Method::AnalyticN1 => InitialConditions10::from_cov(s0.cov()).and_then(|ic| {
                let sol = AnalyticSolution::from_ics(
                    params.omega0(),
                    params.omegas()[0],
                    params.lambdas()[0],
                    &ic,
                )?;
                for (k, &t) in times.iter().enumerate() {
                    d2[k] = Some(sol.equal_time_x(t).correlators().delta_squared());
                }
                Ok(())
            }),
            Method::MasterCorrelator => master::separable_system_state(&s0, 1e-14).and_then(|ic| {
                master::evolve_correlators(&params, beta, &ic, &opts, |_, c| {
                    d2[i] = Some(c.delta_squared());
                    i += 1;
                    Ok(())
                })
            }),
            Method::MasterCoeff => master::separable_system_state(&s0, 1e-14)
                .and_then(|ic| correlators_to_coeffs(&ic))
                .and_then(|g0| {
                    master::evolve_coeffs(&params, beta, &g0, &opts, |_, g| {
                        d2[i] = Some(g.delta_squared()?);
                        i += 1;
                        Ok(())
                    })
                }),
            Method::DensityMatrixN1 => {
                density::coeffs2d_from_covariance(s0.cov()).and_then(|g0| {
                    density::evolve(&params, &g0, &opts, |_, g| {
                        d2[i] = Some(density::reduced_delta_squared(g)?);
                        i += 1;
                        Ok(())
                    })
                })
            }
        };
        if let Err(e) = result {
            out.error = Some(e.to_string());
        }
        if m.is_master() {
            out.breakdown = breakdown_time(&times, &out.delta_squared, s_th);
        }
        series.push(out);
    }

    let mut metadata = vec![
        ("name".to_string(), s.name.clone()),
        ("omega0".into(), format!("{}", s.omega0)),
        ("n_env".into(), format!("{}", params.n_env())),
    ];
    match &s.spectrum {
        super::Spectrum::Explicit(r) => metadata.push(("spectrum".into(), format!("explicit:{}", fmt_list(r)))),
        super::Spectrum::Uniform { lo, hi, count, seed } => {
            metadata.push(("spectrum".into(), format!("uniform:{lo},{hi},{count}")));
            metadata.push(("seed".into(), format!("{seed}")));
        }
        super::Spectrum::Progression { step, count } => {
            metadata.push(("spectrum".into(), format!("progression:{step},{count}")))
        }
    }
    metadata.push(("frequencies".into(), fmt_list(params.omegas())));
    metadata.push(("lambda".into(), format!("{}", s.lambda)));
    metadata.push(("beta".into(), format!("{}", s.beta)));
    if let Some(b) = beta_note {
        metadata.push(("beta_effective".into(), format!("{b}")));
    }
    metadata.push(("ic".into(), s.ic.as_str().into()));
    metadata.push((
        "methods".into(),
        s.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
    ));
    metadata.push(("t_end".into(), format!("{}", s.t_end)));
    metadata.push(("samples".into(), format!("{}", s.sample_count)));
    metadata.push(("rel_tol".into(), format!("{:e}", s.rel_tol)));
    metadata.push(("abs_tol".into(), format!("{:e}", s.abs_tol)));
    metadata.push(("max_step".into(), format!("{}", opts.max_step)));
    metadata.push(("delta_th".into(), format!("{delta_th}")));
    metadata.push(("s_th".into(), format!("{s_th}")));

    let gamma = rate_series(&params, &times, &series, &mut metadata);

    for ser in &series {
        let tag = ser.method.as_str();
        if let Some(t) = ser.breakdown {
            metadata.push((format!("breakdown_{tag}"), format!("{t}")));
        }
        if let Some(e) = &ser.error {
            metadata.push((format!("error_{tag}"), e.replace(['\n', '\r'], " ")));
        }
    }
    if let Some(c) = &conservation {
        metadata.push(("energy_drift".into(), format!("{:e}", c.energy_drift)));
        metadata.push(("det_drift".into(), format!("{:e}", c.det_drift)));
        metadata.push(("min_subsystem_delta".into(), format!("{}", c.min_subsystem_delta)));
    }

    Ok(Trajectory {
        scenario: s.clone(),
        times,
        series,
        s_env,
        s_corr,
        gamma,
        delta_th,
        s_th,
        conservation,
        metadata,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Entropy of the whole state, `sum S(2 nu_k)`; `None` for a formal state
/// with a symplectic eigenvalue below `1/2`.
fn total_entropy(s: &CorrelatorState) -> Option<f64> {
    let nu = s.symplectic_eigenvalues().ok()?;
    nu.iter()
        .map(|&v| PhaseSpaceArea::from_delta(2.0 * v).ok().map(entropy_from_delta))
        .sum()
}

fn rate_series(
    params: &ModelParams,
    times: &[f64],
    series: &[MethodSeries],
    metadata: &mut Vec<(String, String)>,
) -> Vec<Option<f64>> {
    let n = times.len();
    let none = vec![None; n];
    let Some(first) = series.first() else { return none };
    let dt = times[1] - times[0];
    let finest = 2.0 * PI / params.omega_max();
    if dt * SAMPLES_PER_PERIOD > finest * (1.0 + 1e-12) {
        metadata.push(("gamma".into(), "insufficient sampling".into()));
        return none;
    }
    let delta: Option<Vec<f64>> = (0..n).map(|i| first.delta(i)).collect();
    let Some(delta) = delta else {
        metadata.push(("gamma".into(), format!("{} series incomplete", first.method.as_str())));
        return none;
    };
    let window = 2.0 * PI / params.omega0();
    metadata.push(("gamma_source".into(), first.method.as_str().into()));
    metadata.push(("gamma_window".into(), format!("{window}")));
    match decoherence_rate(times, &delta, window) {
        Ok(g) => g.into_iter().map(Some).collect(),
        Err(e) => {
            metadata.push(("gamma".into(), e.to_string()));
            none
        }
    }
}
