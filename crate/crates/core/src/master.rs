//! Perturbative master equation for the reduced system oscillator.
//!
//! To second order in the couplings the reduced density matrix obeys
//!
//! ```text
//! d rho/dt = -i [H_S + Omega^2(t) x^2 / 2, rho] - i gamma(t) [x, {p, rho}]
//!            - D(t) [x, [x, rho]] - f(t) [x, [p, rho]],
//! ```
//!
//! with coefficients built from the bath noise and dissipation kernels. The
//! bath is assumed thermal at `beta` and uncorrelated with the system at
//! `t = 0`. Two equivalent evolutions are provided: the three equal-time
//! correlators, and the Gaussian coefficients `(a_R, a_I, c, ln N)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{CorrelatorState, ModelParams};
use crate::gaussian::{CorrelatorTriple, GaussianCoeffs1D, InverseTemperature};
use crate::integrator::{integrate, IntegratorOpts};

/// Relative gap `|w0^2 - w_n^2| / w0^2` below which a mode counts as resonant.
pub const RESONANCE_EPS: f64 = 1e-12;

/// Frequency shift, damping and the two diffusion coefficients at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MasterCoeffs {
    pub omega2_shift: f64,
    pub gamma: f64,
    pub big_d: f64,
    pub f: f64,
}

impl MasterCoeffs {
    fn add(&mut self, o: MasterCoeffs) {
        self.omega2_shift += o.omega2_shift;
        self.gamma += o.gamma;
        self.big_d += o.big_d;
        self.f += o.f;
    }
}

/// Noise kernel `nu(t)` and dissipation kernel `eta(t)` of the bath.
#[derive(Debug, Clone, Copy)]
pub struct Kernels<'a> {
    params: &'a ModelParams,
    beta: InverseTemperature,
}

impl Kernels<'_> {
    /// `sum l^2 cos(w t) / (2 w) coth(beta w / 2)`
    pub fn nu(&self, t: f64) -> f64 {
        self.modes()
            .map(|(w, l)| l * l * (w * t).cos() / (2.0 * w) * self.beta.coth_factor(w))
            .sum()
    }

    /// `sum l^2 sin(w t) / (2 w)`
    pub fn eta(&self, t: f64) -> f64 {
        self.modes().map(|(w, l)| l * l * (w * t).sin() / (2.0 * w)).sum()
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.params
            .omegas()
            .iter()
            .copied()
            .zip(self.params.lambdas().iter().copied())
    }
}

pub fn kernels(params: &ModelParams, beta: InverseTemperature) -> Kernels<'_> {
    Kernels { params, beta }
}

fn is_resonant(omega0: f64, omega: f64) -> bool {
    (omega0 * omega0 - omega * omega).abs() < RESONANCE_EPS * omega0 * omega0
}

/// One mode's contribution from the closed-form sums.
fn mode_closed_form(w0: f64, w: f64, l: f64, coth: f64, t: f64) -> MasterCoeffs {
    let den = w0 * w0 - w * w;
    let (s0, c0) = (w0 * t).sin_cos();
    let (sn, cn) = (w * t).sin_cos();
    let l2 = l * l;
    MasterCoeffs {
        omega2_shift: -l2 / (w * den) * (w * (c0 * cn - 1.0) + w0 * s0 * sn),
        gamma: l2 / (2.0 * w0 * w * den) * (w * cn * s0 - w0 * c0 * sn),
        big_d: l2 * coth / (2.0 * w * den) * (w0 * cn * s0 - w * c0 * sn),
        f: l2 * coth / (2.0 * w0 * w * den) * (w0 * (c0 * cn - 1.0) + w * s0 * sn),
    }
}

/// One mode's contribution at exact resonance `w_n = w0`.
fn mode_resonant(w: f64, l: f64, coth: f64, t: f64) -> MasterCoeffs {
    let l2 = l * l;
    let s = (w * t).sin();
    let s2 = (2.0 * w * t).sin();
    MasterCoeffs {
        omega2_shift: -l2 * s * s / (2.0 * w * w),
        gamma: l2 / (2.0 * w * w) * (0.5 * t - s2 / (4.0 * w)),
        big_d: l2 * coth / (2.0 * w) * (0.5 * t + s2 / (4.0 * w)),
        f: -l2 * coth / (2.0 * w * w) * s * s / (2.0 * w),
    }
}

/// Master-equation coefficients at time `t`.
///
/// Resonant modes (relative gap below [`RESONANCE_EPS`]) use the analytic
/// `w_n -> w0` limit of the closed form, so this never fails on valid input.
pub fn master_coeffs(params: &ModelParams, beta: InverseTemperature, t: f64) -> MasterCoeffs {
    let w0 = params.omega0();
    let mut acc = MasterCoeffs::default();
    for (&w, &l) in params.omegas().iter().zip(params.lambdas()) {
        let coth = beta.coth_factor(w);
        acc.add(if is_resonant(w0, w) {
            mode_resonant(w0, l, coth, t)
        } else {
            mode_closed_form(w0, w, l, coth, t)
        });
    }
    acc
}

/// The closed-form sums only; fails on a resonant mode.
pub fn master_coeffs_closed_form(
    params: &ModelParams,
    beta: InverseTemperature,
    t: f64,
) -> Result<MasterCoeffs> {
    let w0 = params.omega0();
    let mut acc = MasterCoeffs::default();
    for (n, (&w, &l)) in params.omegas().iter().zip(params.lambdas()).enumerate() {
        if is_resonant(w0, w) {
            return Err(Error::ResonantDivergence {
                mode: n,
                gap: (w0 * w0 - w * w).abs(),
            });
        }
        acc.add(mode_closed_form(w0, w, l, beta.coth_factor(w), t));
    }
    Ok(acc)
}

/// The defining integrals over the kernels, by adaptive Simpson quadrature:
/// `Omega^2 = -2 int eta cos(w0 s)`, `gamma = int eta sin(w0 s)/w0`,
/// `D = int nu cos(w0 s)`, `f = -int nu sin(w0 s)/w0`.
pub fn master_coeffs_quadrature(
    params: &ModelParams,
    beta: InverseTemperature,
    t: f64,
    tol: f64,
) -> MasterCoeffs {
    let k = kernels(params, beta);
    let w0 = params.omega0();
    MasterCoeffs {
        omega2_shift: -2.0 * adaptive_simpson(&|s| k.eta(s) * (w0 * s).cos(), 0.0, t, tol),
        gamma: adaptive_simpson(&|s| k.eta(s) * (w0 * s).sin() / w0, 0.0, t, tol),
        big_d: adaptive_simpson(&|s| k.nu(s) * (w0 * s).cos(), 0.0, t, tol),
        f: -adaptive_simpson(&|s| k.nu(s) * (w0 * s).sin() / w0, 0.0, t, tol),
    }
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // split long ranges so oscillatory integrands are resolved from the start
    let pieces = ((b - a).abs().ceil() as usize).max(1);
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == pieces { b } else { lo + h };
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 50)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `lambda_n / (w0^2 - w_n^2)`, the size of the perturbation for mode `n`
/// (indexed from 0).
pub fn effective_coupling(params: &ModelParams, n: usize) -> Result<f64> {
    let w = *params.omegas().get(n).ok_or(Error::DimensionMismatch {
        expected: params.n_env(),
        got: n + 1,
    })?;
    let l = params.lambdas()[n];
    if l == 0.0 {
        return Ok(0.0);
    }
    let w0 = params.omega0();
    if is_resonant(w0, w) {
        return Err(Error::ResonantDivergence {
            mode: n,
            gap: (w0 * w0 - w * w).abs(),
        });
    }
    Ok(l / (w0 * w0 - w * w))
}

/// Time derivative of `(<x^2>, <p^2>, <{x,p}>/2)`.
pub fn master_correlator_rhs(
    params: &ModelParams,
    beta: InverseTemperature,
    t: f64,
    c: &CorrelatorTriple,
) -> CorrelatorTriple {
    correlator_rhs_with(params.omega0(), &master_coeffs(params, beta, t), c)
}

fn correlator_rhs_with(w0: f64, m: &MasterCoeffs, c: &CorrelatorTriple) -> CorrelatorTriple {
    let w2 = w0 * w0 + m.omega2_shift;
    CorrelatorTriple {
        xx: 2.0 * c.xp,
        pp: -2.0 * w2 * c.xp - 4.0 * m.gamma * c.pp + 2.0 * m.big_d,
        xp: -w2 * c.xx + c.pp - m.f - 2.0 * m.gamma * c.xp,
    }
}

/// Time derivatives of the reduced density-matrix coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffDerivatives {
    pub a_re: f64,
    pub a_im: f64,
    pub c: f64,
    pub log_norm: f64,
}

/// Time derivative of `(a_R, a_I, c, ln N)`.
pub fn master_coeff_ode_rhs(
    params: &ModelParams,
    beta: InverseTemperature,
    t: f64,
    g: &GaussianCoeffs1D,
) -> Result<CoeffDerivatives> {
    let width = g.a.re - g.c;
    if !(width > 0.0) {
        return Err(Error::DegenerateCoeffs(width));
    }
    let m = master_coeffs(params, beta, t);
    let w0 = params.omega0();
    let (ar, ai, c) = (g.a.re, g.a.im, g.c);
    Ok(CoeffDerivatives {
        a_re: 4.0 * ai * ar - 2.0 * m.gamma * (ar + c) + m.big_d - 2.0 * m.f * ai,
        a_im: 2.0 * (ai * ai - ar * ar + c * c) + 0.5 * (w0 * w0 + m.omega2_shift)
            - 2.0 * m.gamma * ai
            + 2.0 * m.f * (ar - c),
        c: 4.0 * ai * c - 2.0 * m.gamma * (ar + c) + m.big_d - 2.0 * m.f * ai,
        log_norm: 2.0 * ai,
    })
}

/// System marginal of a joint state, rejecting any system-bath correlation
/// larger than `tol` in absolute value.
pub fn separable_system_state(s: &CorrelatorState, tol: f64) -> Result<CorrelatorTriple> {
    let cov = s.cov();
    for i in 0..2 {
        for j in 2..s.dim() {
            if cov[(i, j)].abs() > tol {
                return Err(Error::EntangledInitialState(format!(
                    "system-bath correlation {} at ({i}, {j})",
                    cov[(i, j)]
                )));
            }
        }
    }
    Ok(s.marginal(crate::exact::Mode::System))
}

/// Integrates the correlator form from `ic` at `t = 0`, calling `sample` at
/// each output time. Unphysical states are passed on, not rejected.
pub fn evolve_correlators<S>(
    params: &ModelParams,
    beta: InverseTemperature,
    ic: &CorrelatorTriple,
    opts: &IntegratorOpts,
    mut sample: S,
) -> Result<()>
where
    S: FnMut(f64, &CorrelatorTriple) -> Result<()>,
{
    let w0 = params.omega0();
    integrate(
        |t, y, dy| {
            let d = correlator_rhs_with(
                w0,
                &master_coeffs(params, beta, t),
                &CorrelatorTriple::new(y[0], y[1], y[2]),
            );
            dy.copy_from_slice(&[d.xx, d.pp, d.xp]);
            Ok(())
        },
        0.0,
        &[ic.xx, ic.pp, ic.xp],
        opts,
        |t, y| sample(t, &CorrelatorTriple::new(y[0], y[1], y[2])),
    )?;
    Ok(())
}

/// Integrates the coefficient form from `g0` at `t = 0`.
pub fn evolve_coeffs<S>(
    params: &ModelParams,
    beta: InverseTemperature,
    g0: &GaussianCoeffs1D,
    opts: &IntegratorOpts,
    mut sample: S,
) -> Result<()>
where
    S: FnMut(f64, &GaussianCoeffs1D) -> Result<()>,
{
    let unpack = |y: &[f64]| GaussianCoeffs1D {
        a: Complex64::new(y[0], y[1]),
        c: y[2],
        log_norm: y[3],
    };
    integrate(
        |t, y, dy| {
            let d = master_coeff_ode_rhs(params, beta, t, &unpack(y))?;
            dy.copy_from_slice(&[d.a_re, d.a_im, d.c, d.log_norm]);
            Ok(())
        },
        0.0,
        &[g0.a.re, g0.a.im, g0.c, g0.log_norm],
        opts,
        |t, y| sample(t, &unpack(y)),
    )?;
    Ok(())
}
