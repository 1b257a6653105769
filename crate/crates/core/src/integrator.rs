//! Adaptive Dormand–Prince 5(4) integrator with cubic Hermite dense output.
//!
//! The right-hand side writes the derivative into a caller-provided buffer and
//! may fail (density-matrix coefficients can lose normalizability). Samples are
//! handed to a callback so that large covariance trajectories need not be
//! stored.

use crate::error::{Error, Result};

/// Controller settings and requested sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    /// Non-decreasing sample times, all at or after the initial time.
    pub output_times: Vec<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorOpts {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: None,
            output_times: Vec::new(),
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorOpts {
    /// Defaults with the step ceiling `0.05 / omega_max`.
    pub fn for_frequency(omega_max: f64) -> Self {
        Self {
            max_step: 0.05 / omega_max,
            ..Self::default()
        }
    }

    pub fn with_output_times(mut self, times: Vec<f64>) -> Self {
        self.output_times = times;
        self
    }

    fn validate(&self, t0: f64) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "max step must be positive, got {}",
                self.max_step
            )));
        }
        if let Some(h) = self.initial_step {
            if !(h > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "initial step must be positive, got {h}"
                )));
            }
        }
        let mut prev = t0;
        for &t in &self.output_times {
            if !t.is_finite() || t < prev {
                return Err(Error::InvalidParameter(format!(
                    "output times must be finite, non-decreasing and >= {t0}; got {t} after {prev}"
                )));
            }
            prev = t;
        }
        Ok(())
    }
}

/// `n + 1` equally spaced times from `t0` to `t1` inclusive.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![t0];
    }
    let h = (t1 - t0) / n as f64;
    (0..=n)
        .map(|i| if i == n { t1 } else { t0 + i as f64 * h })
        .collect()
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the fifth- and fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_new: Vec<f64>,
}

impl Stages {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            y_new: vec![0.0; n],
        }
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` and calls `sample(t, y)` at every
/// requested output time. Returns the state at the last output time.
pub fn integrate<F, S>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    opts: &IntegratorOpts,
    mut sample: S,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    S: FnMut(f64, &[f64]) -> Result<()>,
{
    opts.validate(t0)?;
    let n = y0.len();
    let mut y = y0.to_vec();
    let Some(&t_end) = opts.output_times.last() else {
        return Ok(y);
    };

    let mut out = opts.output_times.iter().copied().peekable();
    while let Some(&ts) = out.peek() {
        if ts > t0 {
            break;
        }
        sample(t0, &y)?;
        out.next();
    }
    if out.peek().is_none() {
        return Ok(y);
    }

    let span = t_end - t0;
    let min_step = 1e-14 * span;
    let mut st = Stages::new(n);
    rhs(t0, &y, &mut st.k[0])?;

    let mut t = t0;
    let mut h = match opts.initial_step {
        Some(h) => h,
        None => initial_step(&mut rhs, t0, &y, &st.k[0], opts, &mut st.tmp)?,
    }
    .min(opts.max_step)
    .min(span);
    let mut interp = vec![0.0; n];
    let mut steps = 0usize;

    while t < t_end {
        if steps >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        if h < min_step {
            return Err(Error::StepUnderflow { time: t, step: h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        steps += 1;

        let err = trial_step(&mut rhs, t, &y, h, opts, &mut st)?;
        if err <= 1.0 {
            let t_new = if last { t_end } else { t + h };
            // Hermite segment uses k[0] = f(t, y) and k[6] = f(t_new, y_new)
            while let Some(&ts) = out.peek() {
                if ts > t_new {
                    break;
                }
                if ts == t_new {
                    sample(ts, &st.y_new)?;
                } else {
                    hermite(t, h, &y, &st.y_new, &st.k[0], &st.k[6], ts, &mut interp);
                    sample(ts, &interp)?;
                }
                out.next();
            }
            std::mem::swap(&mut y, &mut st.y_new);
            st.k.swap(0, 6);
            t = t_new;
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h = (h * factor).min(opts.max_step);
        } else {
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            h *= factor;
        }
    }
    Ok(y)
}

/// Convenience wrapper collecting every sample.
pub fn integrate_collect<F>(
    rhs: F,
    t0: f64,
    y0: &[f64],
    opts: &IntegratorOpts,
) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let mut samples = Vec::with_capacity(opts.output_times.len());
    integrate(rhs, t0, y0, opts, |t, y| {
        samples.push((t, y.to_vec()));
        Ok(())
    })?;
    Ok(samples)
}

/// One DP5(4) step. Fills `st.y_new` and `st.k[6]`, returns the scaled RMS error.
fn trial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    opts: &IntegratorOpts,
    st: &mut Stages,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let Stages { k, tmp, y_new } = st;
    let [k1, k2, k3, k4, k5, k6, k7] = k;

    for i in 0..n {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    rhs(t + C2 * h, tmp, k2)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    rhs(t + C3 * h, tmp, k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs(t + C4 * h, tmp, k4)?;
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs(t + C5 * h, tmp, k5)?;
    for i in 0..n {
        tmp[i] = y[i]
            + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs(t + h, tmp, k6)?;
    for i in 0..n {
        y_new[i] = y[i]
            + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    rhs(t + h, y_new, k7)?;

    let mut acc = 0.0;
    for i in 0..n {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
        acc += (e / scale).powi(2);
    }
    let err = (acc / n.max(1) as f64).sqrt();
    if !err.is_finite() {
        // treat overflow as a rejected step so the controller shrinks h
        return Ok(1e10);
    }
    Ok(err)
}

#[allow(clippy::too_many_arguments)]
fn hermite(t0: f64, h: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64, out: &mut [f64]) {
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
    }
}

/// Starting step from the local scale of the solution and its derivative.
fn initial_step<F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    opts: &IntegratorOpts,
    tmp: &mut [f64],
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len().max(1) as f64;
    let scale = |v: f64| opts.abs_tol + opts.rel_tol * v.abs();
    let d0 = (y0.iter().map(|&v| (v / scale(v)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (y0
        .iter()
        .zip(f0)
        .map(|(&v, &f)| (f / scale(v)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(opts.max_step);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(&v, &f)| v + h0 * f).collect();
    rhs(t0 + h0, &y1, tmp)?;
    let d2 = (y0
        .iter()
        .zip(f0)
        .zip(tmp.iter())
        .map(|((&v, &a), &b)| ((b - a) / scale(v)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}
