//! Closed-form solution for one system oscillator coupled to a single bath
//! oscillator.
//!
//! Rotating `(x, q)` by an angle `theta` decouples the pair into normal modes
//! with frequencies `wb0 <= wb1`:
//!
//! ```text
//! x = cos(theta) xb + sin(theta) qb,   q = -sin(theta) xb + cos(theta) qb,
//! xb(t) = A0 cos(wb0 t) + B0 sin(wb0 t),   qb(t) = A1 cos(wb1 t) + B1 sin(wb1 t).
//! ```
//!
//! All two-time statistical propagators are then bilinear forms in
//! `phi(t) = [cos wb0 t, sin wb0 t, cos wb1 t, sin wb1 t]` whose kernels are
//! built from the ten second moments of the amplitudes `A0, B0, A1, B1`.
//! Initial time is `t0 = 0`.

use nalgebra::{DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::gaussian::{phase_space_area, CorrelatorTriple, InverseTemperature, PhaseSpaceArea};

/// Normal-mode frequencies and rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeBasis {
    pub omega_bar0: f64,
    pub omega_bar1: f64,
    /// In `(-pi/2, pi/2]`, with `theta = 0` when the oscillators decouple.
    pub theta: f64,
    pub cos2theta: f64,
    pub sin2theta: f64,
}

impl NormalModeBasis {
    pub fn cos_sq(&self) -> f64 {
        0.5 * (1.0 + self.cos2theta)
    }

    pub fn sin_sq(&self) -> f64 {
        0.5 * (1.0 - self.cos2theta)
    }

    /// `R = [[cos, -sin], [sin, cos]]`, mapping `(x, q)` to the normal modes.
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        [[c, -s], [s, c]]
    }
}

/// Normal modes of the frequency-squared matrix `[[w0^2, l], [l, w1^2]]`.
pub fn diagonalize(omega0: f64, omega1: f64, lambda1: f64) -> Result<NormalModeBasis> {
    if !(omega0 > 0.0 && omega1 > 0.0 && omega0.is_finite() && omega1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequencies must be positive, got {omega0}, {omega1}"
        )));
    }
    if !lambda1.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite coupling {lambda1}")));
    }
    let bound = omega0 * omega1;
    let product = bound * bound - lambda1 * lambda1;
    if !(product > 0.0) {
        return Err(Error::InvertedOscillator {
            lambda: lambda1,
            bound,
        });
    }
    let split = omega1 * omega1 - omega0 * omega0;
    let root = (split * split + 4.0 * lambda1 * lambda1).sqrt();
    let upper = 0.5 * (omega0 * omega0 + omega1 * omega1 + root);
    // det = wb0^2 wb1^2 avoids cancellation in the lower root
    let lower = product / upper;
    let (cos2theta, sin2theta) = if root == 0.0 {
        (1.0, 0.0)
    } else {
        (split / root, 2.0 * lambda1 / root)
    };
    Ok(NormalModeBasis {
        omega_bar0: lower.sqrt(),
        omega_bar1: upper.sqrt(),
        theta: 0.5 * sin2theta.atan2(cos2theta),
        cos2theta,
        sin2theta,
    })
}

/// Second moments of the normal-mode amplitudes. Cross terms are full
/// anticommutators, e.g. `a0b0 = <{A0, B0}>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeAmplitudeCorrelators {
    pub a0a0: f64,
    pub b0b0: f64,
    pub a1a1: f64,
    pub b1b1: f64,
    pub a0b0: f64,
    pub a1b1: f64,
    pub a0a1: f64,
    pub b0b1: f64,
    pub a0b1: f64,
    pub b0a1: f64,
}

impl ModeAmplitudeCorrelators {
    /// Symmetrized moment matrix over `(A0, B0, A1, B1)`.
    pub fn moment_matrix(&self) -> Matrix4<f64> {
        Matrix4::new(
            self.a0a0,
            0.5 * self.a0b0,
            0.5 * self.a0a1,
            0.5 * self.a0b1,
            0.5 * self.a0b0,
            self.b0b0,
            0.5 * self.b0a1,
            0.5 * self.b0b1,
            0.5 * self.a0a1,
            0.5 * self.b0a1,
            self.a1a1,
            0.5 * self.a1b1,
            0.5 * self.a0b1,
            0.5 * self.b0b1,
            0.5 * self.a1b1,
            self.b1b1,
        )
    }
}

/// Ten second moments of `(x, p_x, q, p_q)` at the initial time.
/// `xpx` and `qpq` are symmetrized: `<{x, p_x}>/2`, `<{q, p_q}>/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialConditions10 {
    pub xx: f64,
    pub qq: f64,
    pub xq: f64,
    pub pxpx: f64,
    pub pqpq: f64,
    pub pxpq: f64,
    pub xpx: f64,
    pub qpq: f64,
    pub xpq: f64,
    pub qpx: f64,
}

impl InitialConditions10 {
    /// Ground-state system, thermal bath oscillator, uncorrelated.
    pub fn pure_thermal(omega0: f64, omega1: f64, beta: InverseTemperature) -> Self {
        let k = beta.coth_factor(omega1);
        Self {
            xx: 1.0 / (2.0 * omega0),
            pxpx: omega0 / 2.0,
            qq: k / (2.0 * omega1),
            pqpq: omega1 * k / 2.0,
            ..Self::default()
        }
    }

    /// Covariance over `(x, p_x, q, p_q)`.
    pub fn to_cov(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[
                self.xx, self.xpx, self.xq, self.xpq, //
                self.xpx, self.pxpx, self.qpx, self.pxpq, //
                self.xq, self.qpx, self.qq, self.qpq, //
                self.xpq, self.pxpq, self.qpq, self.pqpq,
            ],
        )
    }

    pub fn from_cov(cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != 4 || cov.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: cov.nrows(),
            });
        }
        Ok(Self {
            xx: cov[(0, 0)],
            xpx: cov[(0, 1)],
            xq: cov[(0, 2)],
            xpq: cov[(0, 3)],
            pxpx: cov[(1, 1)],
            qpx: cov[(1, 2)],
            pxpq: cov[(1, 3)],
            qq: cov[(2, 2)],
            qpq: cov[(2, 3)],
            pqpq: cov[(3, 3)],
        })
    }
}

/// Amplitude moments from initial correlators, term by term.
pub fn amplitudes_from_ics(b: &NormalModeBasis, ic: &InitialConditions10) -> ModeAmplitudeCorrelators {
    let (c2, s2) = (b.cos2theta, b.sin2theta);
    let (w0, w1) = (b.omega_bar0, b.omega_bar1);
    let xp = 2.0 * ic.xpx;
    let qp = 2.0 * ic.qpq;
    let mixed = ic.qpx + ic.xpq;
    ModeAmplitudeCorrelators {
        a0a0: 0.5 * (ic.xx + ic.qq + c2 * (ic.xx - ic.qq) - 2.0 * s2 * ic.xq),
        a1a1: 0.5 * (ic.xx + ic.qq - c2 * (ic.xx - ic.qq) + 2.0 * s2 * ic.xq),
        a0a1: (ic.xx - ic.qq) * s2 + 2.0 * c2 * ic.xq,
        b0b0: (ic.pxpx + ic.pqpq + c2 * (ic.pxpx - ic.pqpq) - 2.0 * s2 * ic.pxpq) / (2.0 * w0 * w0),
        b1b1: (ic.pxpx + ic.pqpq - c2 * (ic.pxpx - ic.pqpq) + 2.0 * s2 * ic.pxpq) / (2.0 * w1 * w1),
        b0b1: ((ic.pxpx - ic.pqpq) * s2 + 2.0 * c2 * ic.pxpq) / (w0 * w1),
        a0b0: (xp + qp + c2 * (xp - qp) - 2.0 * s2 * mixed) / (2.0 * w0),
        a1b1: (xp + qp - c2 * (xp - qp) + 2.0 * s2 * mixed) / (2.0 * w1),
        a0b1: (s2 * (xp - qp) + 2.0 * (ic.xpq - ic.qpx) + 2.0 * c2 * mixed) / (2.0 * w1),
        b0a1: (s2 * (xp - qp) - 2.0 * (ic.xpq - ic.qpx) + 2.0 * c2 * mixed) / (2.0 * w0),
    }
}

/// Initial correlators from amplitude moments, term by term.
pub fn ics_from_amplitudes(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators) -> InitialConditions10 {
    let (c2, s2) = (b.cos2theta, b.sin2theta);
    let (cc, ss) = (b.cos_sq(), b.sin_sq());
    let (w0, w1) = (b.omega_bar0, b.omega_bar1);
    let anti_xp = cc * w0 * a.a0b0 + ss * w1 * a.a1b1 + 0.5 * s2 * (w1 * a.a0b1 + w0 * a.b0a1);
    let anti_qp = ss * w0 * a.a0b0 + cc * w1 * a.a1b1 - 0.5 * s2 * (w1 * a.a0b1 + w0 * a.b0a1);
    InitialConditions10 {
        xx: cc * a.a0a0 + ss * a.a1a1 + 0.5 * s2 * a.a0a1,
        qq: ss * a.a0a0 + cc * a.a1a1 - 0.5 * s2 * a.a0a1,
        xq: 0.5 * (s2 * (a.a1a1 - a.a0a0) + c2 * a.a0a1),
        pxpx: cc * w0 * w0 * a.b0b0 + ss * w1 * w1 * a.b1b1 + 0.5 * s2 * w0 * w1 * a.b0b1,
        pqpq: ss * w0 * w0 * a.b0b0 + cc * w1 * w1 * a.b1b1 - 0.5 * s2 * w0 * w1 * a.b0b1,
        pxpq: 0.5 * (s2 * (w1 * w1 * a.b1b1 - w0 * w0 * a.b0b0) + c2 * w0 * w1 * a.b0b1),
        xpx: 0.5 * anti_xp,
        qpq: 0.5 * anti_qp,
        xpq: 0.5 * (0.5 * s2 * (w1 * a.a1b1 - w0 * a.a0b0) + cc * w1 * a.a0b1 - ss * w0 * a.b0a1),
        qpx: 0.5 * (0.5 * s2 * (w1 * a.a1b1 - w0 * a.a0b0) + cc * w0 * a.b0a1 - ss * w1 * a.a0b1),
    }
}

/// A two-time function and its derivatives on the diagonal `t = t'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualTimePropagator {
    /// `F(t; t)`
    pub f: f64,
    /// `d/dt F(t; t')` at `t' = t`
    pub dt: f64,
    /// `d/dt d/dt' F(t; t')` at `t' = t`
    pub dt_dtp: f64,
}

impl EqualTimePropagator {
    pub fn correlators(&self) -> CorrelatorTriple {
        CorrelatorTriple::new(self.f, self.dt_dtp, self.dt)
    }
}

/// `Delta^2 = 4 [F d_t d_t' F - (d_t F)^2]` at equal times.
pub fn delta_from_propagator(p: &EqualTimePropagator) -> Result<PhaseSpaceArea> {
    phase_space_area(&p.correlators())
}

fn phi(b: &NormalModeBasis, t: f64) -> [f64; 4] {
    let (s0, c0) = (b.omega_bar0 * t).sin_cos();
    let (s1, c1) = (b.omega_bar1 * t).sin_cos();
    [c0, s0, c1, s1]
}

fn dphi(b: &NormalModeBasis, t: f64) -> [f64; 4] {
    let (s0, c0) = (b.omega_bar0 * t).sin_cos();
    let (s1, c1) = (b.omega_bar1 * t).sin_cos();
    let (w0, w1) = (b.omega_bar0, b.omega_bar1);
    [-w0 * s0, w0 * c0, -w1 * s1, w1 * c1]
}

fn bilinear(u: &[f64; 4], k: &Matrix4<f64>, v: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += u[i] * k[(i, j)] * v[j];
        }
    }
    acc
}

/// Kernels of `F_x`, `F_q` and `F_xq` for a given initial state.
///
/// `F_xq(t; t') = <{x(t'), q(t)}>/2`: rows of `kxq` refer to `q(t)`, columns
/// to `x(t')`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    pub basis: NormalModeBasis,
    pub amplitudes: ModeAmplitudeCorrelators,
    kx: Matrix4<f64>,
    kq: Matrix4<f64>,
    kxq: Matrix4<f64>,
}

impl AnalyticSolution {
    pub fn new(basis: NormalModeBasis, amplitudes: ModeAmplitudeCorrelators) -> Self {
        let g = amplitudes.moment_matrix();
        let (s, c) = basis.theta.sin_cos();
        let dx = Matrix4::from_diagonal(&[c, c, s, s].into());
        let dq = Matrix4::from_diagonal(&[-s, -s, c, c].into());
        Self {
            basis,
            amplitudes,
            kx: dx * g * dx,
            kq: dq * g * dq,
            kxq: dq * g * dx,
        }
    }

    pub fn from_ics(omega0: f64, omega1: f64, lambda1: f64, ic: &InitialConditions10) -> Result<Self> {
        let basis = diagonalize(omega0, omega1, lambda1)?;
        Ok(Self::new(basis, amplitudes_from_ics(&basis, ic)))
    }

    pub fn f_x(&self, t: f64, tp: f64) -> f64 {
        bilinear(&phi(&self.basis, t), &self.kx, &phi(&self.basis, tp))
    }

    pub fn f_q(&self, t: f64, tp: f64) -> f64 {
        bilinear(&phi(&self.basis, t), &self.kq, &phi(&self.basis, tp))
    }

    pub fn f_xq(&self, t: f64, tp: f64) -> f64 {
        bilinear(&phi(&self.basis, t), &self.kxq, &phi(&self.basis, tp))
    }

    /// `d/dt F_x(t; t')`.
    pub fn f_x_dt(&self, t: f64, tp: f64) -> f64 {
        bilinear(&dphi(&self.basis, t), &self.kx, &phi(&self.basis, tp))
    }

    pub fn equal_time_x(&self, t: f64) -> EqualTimePropagator {
        self.equal_time(&self.kx, t)
    }

    pub fn equal_time_q(&self, t: f64) -> EqualTimePropagator {
        self.equal_time(&self.kq, t)
    }

    fn equal_time(&self, k: &Matrix4<f64>, t: f64) -> EqualTimePropagator {
        let p = phi(&self.basis, t);
        let dp = dphi(&self.basis, t);
        EqualTimePropagator {
            f: bilinear(&p, k, &p),
            dt: bilinear(&dp, k, &p),
            dt_dtp: bilinear(&dp, k, &dp),
        }
    }

    /// Full covariance over `(x, p_x, q, p_q)` at time `t`.
    pub fn covariance(&self, t: f64) -> DMatrix<f64> {
        let p = phi(&self.basis, t);
        let dp = dphi(&self.basis, t);
        let ex = self.equal_time_x(t);
        let eq = self.equal_time_q(t);
        let xq = bilinear(&p, &self.kxq, &p);
        let x_pq = bilinear(&dp, &self.kxq, &p);
        let px_q = bilinear(&p, &self.kxq, &dp);
        let px_pq = bilinear(&dp, &self.kxq, &dp);
        let ic = InitialConditions10 {
            xx: ex.f,
            xpx: ex.dt,
            pxpx: ex.dt_dtp,
            qq: eq.f,
            qpq: eq.dt,
            pqpq: eq.dt_dtp,
            xq,
            xpq: x_pq,
            qpx: px_q,
            pxpq: px_pq,
        };
        ic.to_cov()
    }

    pub fn delta_system(&self, t: f64) -> Result<PhaseSpaceArea> {
        delta_from_propagator(&self.equal_time_x(t))
    }

    pub fn delta_environment(&self, t: f64) -> Result<PhaseSpaceArea> {
        delta_from_propagator(&self.equal_time_q(t))
    }
}

/// `F_x(t; t')`.
pub fn statistical_propagator_x(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
    AnalyticSolution::new(*b, *a).f_x(t, tp)
}

/// `F_q(t; t')`.
pub fn statistical_propagator_q(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
    AnalyticSolution::new(*b, *a).f_q(t, tp)
}

/// `F_xq(t; t') = <{x(t'), q(t)}>/2`.
pub fn statistical_propagator_xq(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
    AnalyticSolution::new(*b, *a).f_xq(t, tp)
}

/// `F_qx(t; t') = F_xq(t'; t)`.
pub fn statistical_propagator_qx(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
    statistical_propagator_xq(b, a, tp, t)
}

/// Expanded trigonometric forms of the propagators. Independent of the
/// kernel construction and used to cross-check it.
pub mod expanded {
    use super::{ModeAmplitudeCorrelators, NormalModeBasis};

    struct Trig {
        c0: f64,
        s0: f64,
        c1: f64,
        s1: f64,
        c0p: f64,
        s0p: f64,
        c1p: f64,
        s1p: f64,
    }

    fn trig(b: &NormalModeBasis, t: f64, tp: f64) -> Trig {
        let (w0, w1) = (b.omega_bar0, b.omega_bar1);
        Trig {
            c0: (w0 * t).cos(),
            s0: (w0 * t).sin(),
            c1: (w1 * t).cos(),
            s1: (w1 * t).sin(),
            c0p: (w0 * tp).cos(),
            s0p: (w0 * tp).sin(),
            c1p: (w1 * tp).cos(),
            s1p: (w1 * tp).sin(),
        }
    }

    fn diagonal_blocks(a: &ModeAmplitudeCorrelators, g: &Trig) -> (f64, f64) {
        let mode0 = a.a0a0 * g.c0 * g.c0p
            + a.b0b0 * g.s0 * g.s0p
            + 0.5 * a.a0b0 * (g.c0 * g.s0p + g.s0 * g.c0p);
        let mode1 = a.a1a1 * g.c1 * g.c1p
            + a.b1b1 * g.s1 * g.s1p
            + 0.5 * a.a1b1 * (g.c1 * g.s1p + g.s1 * g.c1p);
        (mode0, mode1)
    }

    fn mixed_block(a: &ModeAmplitudeCorrelators, g: &Trig) -> f64 {
        a.a0a1 * (g.c0 * g.c1p + g.c1 * g.c0p)
            + a.b0b1 * (g.s0 * g.s1p + g.s1 * g.s0p)
            + a.a0b1 * (g.c0 * g.s1p + g.s1 * g.c0p)
            + a.b0a1 * (g.s0 * g.c1p + g.c1 * g.s0p)
    }

    pub fn f_x(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
        let g = trig(b, t, tp);
        let (m0, m1) = diagonal_blocks(a, &g);
        b.cos_sq() * m0 + b.sin_sq() * m1 + 0.25 * b.sin2theta * mixed_block(a, &g)
    }

    pub fn f_q(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
        let g = trig(b, t, tp);
        let (m0, m1) = diagonal_blocks(a, &g);
        b.sin_sq() * m0 + b.cos_sq() * m1 - 0.25 * b.sin2theta * mixed_block(a, &g)
    }

    pub fn f_xq(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, t: f64, tp: f64) -> f64 {
        let g = trig(b, t, tp);
        let (m0, m1) = diagonal_blocks(a, &g);
        let forward = a.a0a1 * g.c1 * g.c0p
            + a.b0b1 * g.s1 * g.s0p
            + a.a0b1 * g.s1 * g.c0p
            + a.b0a1 * g.c1 * g.s0p;
        let backward = a.a0a1 * g.c0 * g.c1p
            + a.b0b1 * g.s0 * g.s1p
            + a.a0b1 * g.c0 * g.s1p
            + a.b0a1 * g.s0 * g.c1p;
        0.5 * b.sin2theta * (m1 - m0) + 0.5 * b.cos_sq() * forward - 0.5 * b.sin_sq() * backward
    }

    /// `F_x` in average time `tau = (t + t')/2` and separation `dt = t - t'`.
    pub fn f_x_average_time(b: &NormalModeBasis, a: &ModeAmplitudeCorrelators, tau: f64, dt: f64) -> f64 {
        let (w0, w1) = (b.omega_bar0, b.omega_bar1);
        let wm = 0.5 * (w0 + w1);
        let dw = w0 - w1;
        let mode0 = (w0 * dt).cos() * (a.a0a0 + a.b0b0)
            + (2.0 * w0 * tau).cos() * (a.a0a0 - a.b0b0)
            + (2.0 * w0 * tau).sin() * a.a0b0;
        let mode1 = (w1 * dt).cos() * (a.a1a1 + a.b1b1)
            + (2.0 * w1 * tau).cos() * (a.a1a1 - a.b1b1)
            + (2.0 * w1 * tau).sin() * a.a1b1;
        let mixed = (dw * tau).cos() * (wm * dt).cos() * (a.a0a1 + a.b0b1)
            + (2.0 * wm * tau).cos() * (0.5 * dw * dt).cos() * (a.a0a1 - a.b0b1)
            + (dw * tau).sin() * (wm * dt).cos() * (a.b0a1 - a.a0b1)
            + (2.0 * wm * tau).sin() * (0.5 * dw * dt).cos() * (a.b0a1 + a.a0b1);
        0.5 * b.cos_sq() * mode0 + 0.5 * b.sin_sq() * mode1 + 0.25 * b.sin2theta * mixed
    }
}

/// Initial state whose system propagator depends only on `t - t'`, with the
/// system pure: `<x^2> = <q^2> = 1/(2 w0)`, `<p_x^2> = w0/2`,
/// `<p_q^2> = w1^2/(2 w0)`, `<p_x p_q> = l/(2 w0)`.
///
/// The system and bath marginals are physical, but the joint covariance is
/// not: the slow normal mode has symplectic eigenvalue `wb0/(2 w0) < 1/2`.
pub fn time_translation_invariant_ic(omega0: f64, omega1: f64, lambda1: f64) -> Result<InitialConditions10> {
    diagonalize(omega0, omega1, lambda1)?;
    Ok(InitialConditions10 {
        xx: 1.0 / (2.0 * omega0),
        pxpx: omega0 / 2.0,
        qq: 1.0 / (2.0 * omega0),
        pqpq: omega1 * omega1 / (2.0 * omega0),
        pxpq: lambda1 / (2.0 * omega0),
        ..InitialConditions10::default()
    })
}

/// Inverse temperature of the bath marginal of the time-translation-invariant
/// state, from `coth(beta w1 / 2) = w1 / w0`. Needs `w1 > w0`.
pub fn time_translation_invariant_beta(omega0: f64, omega1: f64) -> Option<f64> {
    (omega1 > omega0).then(|| 2.0 / omega1 * (omega0 / omega1).atanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn random_ic(rng: &mut ChaCha8Rng) -> InitialConditions10 {
        let m = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        InitialConditions10::from_cov(&(&m * m.transpose() + DMatrix::identity(4, 4) * 0.6)).unwrap()
    }

    /// Amplitudes by inverting `z(0) = M a` numerically.
    fn amplitudes_by_matrix(b: &NormalModeBasis, ic: &InitialConditions10) -> Matrix4<f64> {
        let (s, c) = b.theta.sin_cos();
        let (w0, w1) = (b.omega_bar0, b.omega_bar1);
        let m = Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c * w0, 0.0, s * w1, //
            -s, 0.0, c, 0.0, //
            0.0, -s * w0, 0.0, c * w1,
        );
        let cov = ic.to_cov();
        let cov4 = Matrix4::from_fn(|i, j| cov[(i, j)]);
        let inv = m.try_inverse().unwrap();
        inv * cov4 * inv.transpose()
    }

    #[test]
    fn diagonalize_examples() {
        let b = diagonalize(1.0, 2.0, 0.0).unwrap();
        assert_eq!((b.omega_bar0, b.omega_bar1, b.theta), (1.0, 2.0, 0.0));

        let b = diagonalize(1.0, 2.0, 0.5).unwrap();
        let r = 10.0_f64.sqrt();
        assert!((b.omega_bar0.powi(2) - (2.5 - r / 2.0)).abs() < 1e-14);
        assert!((b.omega_bar0.powi(2) - 0.918_861).abs() < 1e-6);
        assert!((b.omega_bar1.powi(2) - 4.081_139).abs() < 1e-6);
        assert!((b.cos2theta - 3.0 / r).abs() < 1e-15);
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 4.0]));
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - b.omega_bar0.powi(2)).abs() < 1e-12);
        assert!((ev[1] - b.omega_bar1.powi(2)).abs() < 1e-12);

        let b = diagonalize(1.5, 1.5, 0.3).unwrap();
        assert!((b.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((b.omega_bar0.powi(2) - (2.25 - 0.3)).abs() < 1e-14);
        assert!((b.omega_bar1.powi(2) - (2.25 + 0.3)).abs() < 1e-14);

        assert!(matches!(
            diagonalize(1.0, 2.0, 2.5),
            Err(Error::InvertedOscillator { .. })
        ));
    }

    #[test]
    fn rotation_diagonalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w0 = rng.gen_range(0.2..3.0);
            let w1 = rng.gen_range(0.2..3.0);
            let l = rng.gen_range(-0.99..0.99) * w0 * w1;
            let b = diagonalize(w0, w1, l).unwrap();
            let r = b.rotation();
            let om = [[w0 * w0, l], [l, w1 * w1]];
            let mut d = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for m in 0..2 {
                            d[i][j] += r[i][k] * om[k][m] * r[j][m];
                        }
                    }
                }
            }
            let scale = w0 * w0 + w1 * w1;
            assert!(d[0][1].abs() < 1e-12 * scale);
            assert!((d[0][0] - b.omega_bar0.powi(2)).abs() < 1e-12 * scale);
            assert!((d[1][1] - b.omega_bar1.powi(2)).abs() < 1e-12 * scale);
            assert!(b.sin2theta * l >= 0.0);
        }
    }

    #[test]
    fn amplitude_round_trip_and_matrix_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let b = diagonalize(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(-0.2..0.2)).unwrap();
            let ic = random_ic(&mut rng);
            let a = amplitudes_from_ics(&b, &ic);
            let back = ics_from_amplitudes(&b, &a);
            assert!((back.to_cov() - ic.to_cov()).amax() < 1e-12);
            let g = amplitudes_by_matrix(&b, &ic);
            assert!((g - a.moment_matrix()).amax() < 1e-12);
        }
    }

    #[test]
    fn pure_thermal_amplitudes() {
        let (w0, w1) = (1.0, 2.0);
        let beta = InverseTemperature::Finite(0.2);
        let b = diagonalize(w0, w1, 0.5).unwrap();
        let a = amplitudes_from_ics(&b, &InitialConditions10::pure_thermal(w0, w1, beta));
        let k = beta.coth_factor(w1);
        let (xs, xe) = (1.0 / (2.0 * w0), k / (2.0 * w1));
        let (ps, pe) = (w0 / 2.0, w1 * k / 2.0);
        let c2 = b.cos2theta;
        let s2 = b.sin2theta;
        assert!((a.a0a0 - 0.5 * (xs + xe + c2 * (xs - xe))).abs() < 1e-14);
        assert!((a.a1a1 - 0.5 * (xs + xe - c2 * (xs - xe))).abs() < 1e-14);
        assert!((a.a0a1 - s2 * (xs - xe)).abs() < 1e-14);
        let (wb0, wb1) = (b.omega_bar0, b.omega_bar1);
        assert!((a.b0b0 - (ps + pe + c2 * (ps - pe)) / (2.0 * wb0 * wb0)).abs() < 1e-14);
        assert!((a.b1b1 - (ps + pe - c2 * (ps - pe)) / (2.0 * wb1 * wb1)).abs() < 1e-14);
        assert!((a.b0b1 - s2 * (ps - pe) / (wb0 * wb1)).abs() < 1e-14);
        assert_eq!((a.a0b0, a.a1b1, a.a0b1, a.b0a1), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn tti_amplitudes() {
        let (w0, w1, l) = (1.0, 2.0, 0.25);
        let b = diagonalize(w0, w1, l).unwrap();
        let a = amplitudes_from_ics(&b, &time_translation_invariant_ic(w0, w1, l).unwrap());
        for v in [a.a0a0, a.a1a1, a.b0b0, a.b1b1] {
            assert!((v - 0.5 / w0).abs() < 1e-14);
        }
        for v in [a.a0b0, a.a1b1, a.a0a1, a.b0b1, a.a0b1, a.b0a1] {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn tti_temperature_and_limits() {
        let beta = time_translation_invariant_beta(1.0, 2.0).unwrap();
        assert!((1.0 / (beta * 2.0 / 2.0).tanh() - 2.0).abs() < 1e-13);
        assert!(time_translation_invariant_beta(1.0, 0.5).is_none());
        let ic = time_translation_invariant_ic(1.0, 2.0, 0.0).unwrap();
        let thermal = InitialConditions10::pure_thermal(1.0, 2.0, InverseTemperature::Finite(beta));
        assert!((ic.to_cov() - thermal.to_cov()).amax() < 1e-13);
        assert!(matches!(
            time_translation_invariant_ic(1.0, 2.0, 3.0),
            Err(Error::InvertedOscillator { .. })
        ));
    }

    #[test]
    fn tti_propagator_is_stationary() {
        let (w0, w1, l) = (1.0, 2.0, 0.25);
        let sol = AnalyticSolution::from_ics(w0, w1, l, &time_translation_invariant_ic(w0, w1, l).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let tau = rng.gen_range(0.0..50.0);
            let delta = rng.gen_range(0.0..50.0);
            let dt = rng.gen_range(-10.0..10.0);
            let f = |tau: f64| sol.f_x(tau + dt / 2.0, tau - dt / 2.0);
            assert!((f(tau + delta) - f(tau)).abs() < 1e-10);
            let e = expanded::f_x_average_time(&sol.basis, &sol.amplitudes, tau, dt);
            let e2 = expanded::f_x_average_time(&sol.basis, &sol.amplitudes, tau + delta, dt);
            assert!((e - e2).abs() < 1e-10);
        }
        for t in [0.0, 1.0, 17.3, 99.0] {
            assert!((sol.delta_system(t).unwrap().value() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_matches_expanded_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let b = diagonalize(1.0, rng.gen_range(0.5..3.0), rng.gen_range(-0.3..0.3)).unwrap();
            let ic = random_ic(&mut rng);
            let sol = AnalyticSolution::new(b, amplitudes_from_ics(&b, &ic));
            let a = &sol.amplitudes;
            let t = rng.gen_range(-20.0..20.0);
            let tp = rng.gen_range(-20.0..20.0);
            assert!((sol.f_x(t, tp) - expanded::f_x(&b, a, t, tp)).abs() < 1e-12);
            assert!((sol.f_q(t, tp) - expanded::f_q(&b, a, t, tp)).abs() < 1e-12);
            assert!((sol.f_xq(t, tp) - expanded::f_xq(&b, a, t, tp)).abs() < 1e-12);
            let tau = 0.5 * (t + tp);
            let avg = expanded::f_x_average_time(&b, a, tau, t - tp);
            assert!((avg - expanded::f_x(&b, a, t, tp)).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = diagonalize(1.0, 2.0, 0.5).unwrap();
        let a = amplitudes_from_ics(&b, &random_ic(&mut rng));
        for _ in 0..100 {
            let t = rng.gen_range(0.0..30.0);
            let tp = rng.gen_range(0.0..30.0);
            assert!((statistical_propagator_x(&b, &a, t, tp) - statistical_propagator_x(&b, &a, tp, t)).abs() < 1e-13);
            assert!((statistical_propagator_q(&b, &a, t, tp) - statistical_propagator_q(&b, &a, tp, t)).abs() < 1e-13);
            assert_eq!(
                statistical_propagator_qx(&b, &a, t, tp),
                statistical_propagator_xq(&b, &a, tp, t)
            );
        }
    }

    #[test]
    fn equal_time_initial_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ic = random_ic(&mut rng);
        let sol = AnalyticSolution::from_ics(1.0, 2.0, 0.5, &ic).unwrap();
        assert!((sol.f_x(0.0, 0.0) - ic.xx).abs() < 1e-13);
        assert!((sol.f_q(0.0, 0.0) - ic.qq).abs() < 1e-13);
        assert!((sol.f_xq(0.0, 0.0) - ic.xq).abs() < 1e-13);
        assert!((sol.covariance(0.0) - ic.to_cov()).amax() < 1e-13);
    }

    #[test]
    fn decoupled_limits() {
        let w0 = 1.3;
        let ic = InitialConditions10::pure_thermal(w0, 2.0, InverseTemperature::Finite(0.4));
        let sol = AnalyticSolution::from_ics(w0, 2.0, 0.0, &ic).unwrap();
        for (t, tp) in [(0.3, 1.7), (5.0, -2.0), (10.0, 10.0)] {
            assert!((sol.f_x(t, tp) - (w0 * (t - tp)).cos() / (2.0 * w0)).abs() < 1e-14);
            assert!(sol.f_xq(t, tp).abs() < 1e-15);
        }
        let th = 1.0 / (0.4_f64).tanh();
        for t in [0.0, 3.0, 11.0] {
            assert!((sol.delta_system(t).unwrap().value() - 1.0).abs() < 1e-13);
            assert!((sol.delta_environment(t).unwrap().value() - th).abs() < 1e-13);
        }
    }

    #[test]
    fn hand_derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ic = random_ic(&mut rng);
        let sol = AnalyticSolution::from_ics(1.0, 2.0, 0.5, &ic).unwrap();
        let h = 1e-5;
        for t in [0.0, 1.3, 7.7, 42.0] {
            let e = sol.equal_time_x(t);
            let dt = (sol.f_x(t + h, t) - sol.f_x(t - h, t)) / (2.0 * h);
            assert!((sol.f_x_dt(t, t) - e.dt).abs() < 1e-15);
            let dtdtp = (sol.f_x_dt(t, t + h) - sol.f_x_dt(t, t - h)) / (2.0 * h);
            assert!((e.dt - dt).abs() < 1e-6);
            assert!((e.dt_dtp - dtdtp).abs() < 1e-6);
            let cov = sol.covariance(t);
            let x_pq = (sol.f_xq(t + h, t) - sol.f_xq(t - h, t)) / (2.0 * h);
            let px_q = (sol.f_xq(t, t + h) - sol.f_xq(t, t - h)) / (2.0 * h);
            assert!((cov[(0, 3)] - x_pq).abs() < 1e-6);
            assert!((cov[(1, 2)] - px_q).abs() < 1e-6);
        }
    }

    #[test]
    fn covariance_flow_matches_hamiltonian_equations() {
        // d cov/dt from the closed form against A cov + cov A^T
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (w0, w1, l) = (1.0, 2.0, 0.5);
        let sol = AnalyticSolution::from_ics(w0, w1, l, &random_ic(&mut rng)).unwrap();
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 1.0, 0.0, 0.0, -w0 * w0, 0.0, -l, 0.0, 0.0, 0.0, 0.0, 1.0, -l, 0.0, -w1 * w1, 0.0],
        );
        let h = 1e-5;
        for t in [0.5, 3.0, 9.0] {
            let c = sol.covariance(t);
            let fd = (sol.covariance(t + h) - sol.covariance(t - h)) / (2.0 * h);
            let exact = &a * &c + &c * a.transpose();
            assert!((fd - exact).amax() < 1e-7);
        }
    }
}
