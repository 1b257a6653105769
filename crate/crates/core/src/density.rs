//! Full two-oscillator Gaussian density matrix (`N = 1`).
//!
//! In position representation
//!
//! ```text
//! rho(X; Y) = N exp[-X^T A X - Y^T A* Y + 2 X^T C Y],
//! A = [[a, d1/2], [d1/2, a1]],   C = [[c, e1/2], [e1*/2, c1]],
//! ```
//!
//! with `X = (x, q)`, `c` and `c1` real. The ten real coefficients are
//! evolved directly by the von Neumann equation, independently of the
//! covariance route, and the bath is traced out in closed form.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::ModelParams;
use crate::gaussian::{entropy_from_delta, GaussianCoeffs1D, PhaseSpaceArea};
use crate::integrator::{integrate, IntegratorOpts};

/// Coefficients of the two-mode Gaussian density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCoeffs2D {
    pub a: Complex64,
    pub a1: Complex64,
    pub c: f64,
    pub c1: f64,
    pub d1: Complex64,
    pub e1: Complex64,
    pub log_norm: f64,
}

impl GaussianCoeffs2D {
    /// `4 (a_R - c)(a1_R - c1) - (d1_R - e1_R)^2`, positive for a
    /// normalizable state.
    pub fn normalization_discriminant(&self) -> f64 {
        4.0 * (self.a.re - self.c) * (self.a1.re - self.c1) - (self.d1.re - self.e1.re).powi(2)
    }

    pub fn is_normalizable(&self) -> bool {
        self.a1.re - self.c1 > 0.0 && self.normalization_discriminant() > 0.0
    }

    /// `ln N` from the trace condition, independent of the carried value.
    pub fn closed_form_log_norm(&self) -> Result<f64> {
        self.check(f64::NAN)?;
        Ok(0.5 * self.normalization_discriminant().ln() - std::f64::consts::PI.ln())
    }

    /// Sets `log_norm` from the trace condition.
    pub fn normalized(mut self) -> Result<Self> {
        self.log_norm = self.closed_form_log_norm()?;
        Ok(self)
    }

    fn check(&self, time: f64) -> Result<()> {
        if self.is_normalizable() {
            return Ok(());
        }
        Err(Error::NormalizabilityLoss {
            time,
            reason: format!(
                "a1_R - c1 = {}, discriminant = {}",
                self.a1.re - self.c1,
                self.normalization_discriminant()
            ),
        })
    }

    fn to_array(self) -> [f64; 11] {
        [
            self.a.re, self.a.im, self.c, self.a1.re, self.a1.im, self.c1, self.d1.re,
            self.d1.im, self.e1.re, self.e1.im, self.log_norm,
        ]
    }

    fn from_slice(y: &[f64]) -> Self {
        Self {
            a: Complex64::new(y[0], y[1]),
            c: y[2],
            a1: Complex64::new(y[3], y[4]),
            c1: y[5],
            d1: Complex64::new(y[6], y[7]),
            e1: Complex64::new(y[8], y[9]),
            log_norm: y[10],
        }
    }

    /// Real parts `A_R - C_s` and `A_R + C_s` and the imaginary parts
    /// `A_I`, `C_I` of the exponent matrices.
    fn blocks(&self) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
        let ar = Matrix2::new(self.a.re, self.d1.re / 2.0, self.d1.re / 2.0, self.a1.re);
        let ai = Matrix2::new(self.a.im, self.d1.im / 2.0, self.d1.im / 2.0, self.a1.im);
        let cs = Matrix2::new(self.c, self.e1.re / 2.0, self.e1.re / 2.0, self.c1);
        let ci = Matrix2::new(0.0, self.e1.im / 2.0, -self.e1.im / 2.0, 0.0);
        (ar - cs, ar + cs, ai, ci)
    }
}

fn single_env(params: &ModelParams) -> Result<(f64, f64, f64)> {
    if params.n_env() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: params.n_env(),
        });
    }
    Ok((params.omega0(), params.omegas()[0], params.lambdas()[0]))
}

/// Time derivative of every coefficient, including `ln N`.
pub fn full_vn_rhs(params: &ModelParams, t: f64, g: &GaussianCoeffs2D) -> Result<GaussianCoeffs2D> {
    let (w0, w1, lambda) = single_env(params)?;
    g.check(t)?;
    let (ar, ai, c) = (g.a.re, g.a.im, g.c);
    let (a1r, a1i, c1) = (g.a1.re, g.a1.im, g.c1);
    let (dr, di, er, ei) = (g.d1.re, g.d1.im, g.e1.re, g.e1.im);
    let mix = 0.5 * (dr * dr - er * er - di * di + ei * ei);
    let si = ai + a1i;
    Ok(GaussianCoeffs2D {
        a: Complex64::new(
            4.0 * ai * ar + (dr * di - er * ei),
            0.5 * w0 * w0 + 2.0 * (ai * ai - ar * ar + c * c) - mix,
        ),
        c: 4.0 * ai * c - (dr * ei - er * di),
        // the cross term enters with the sign that mirrors the a_R equation
        // under system <-> bath exchange (e1 -> e1*)
        a1: Complex64::new(
            4.0 * a1i * a1r + (dr * di + er * ei),
            0.5 * w1 * w1 + 2.0 * (a1i * a1i - a1r * a1r + c1 * c1) - mix,
        ),
        c1: 4.0 * a1i * c1 + (dr * ei + er * di),
        d1: Complex64::new(
            2.0 * ((ar + a1r) * di + si * dr + (c - c1) * ei),
            lambda + 2.0 * (-(ar + a1r) * dr + si * di + (c + c1) * er),
        ),
        e1: Complex64::new(
            2.0 * ((ar - a1r) * ei + si * er + (c + c1) * di),
            2.0 * (-(ar - a1r) * er + si * ei + (c - c1) * dr),
        ),
        log_norm: 2.0 * si,
    })
}

/// Integrates the coefficients from `g0` at `t = 0`, calling `sample` at
/// each output time.
pub fn evolve<S>(
    params: &ModelParams,
    g0: &GaussianCoeffs2D,
    opts: &IntegratorOpts,
    mut sample: S,
) -> Result<()>
where
    S: FnMut(f64, &GaussianCoeffs2D) -> Result<()>,
{
    single_env(params)?;
    g0.check(0.0)?;
    integrate(
        |t, y, dy| {
            let d = full_vn_rhs(params, t, &GaussianCoeffs2D::from_slice(y))?;
            dy.copy_from_slice(&d.to_array());
            Ok(())
        },
        0.0,
        &g0.to_array(),
        opts,
        |t, y| {
            let g = GaussianCoeffs2D::from_slice(y);
            g.check(t)?;
            sample(t, &g)
        },
    )?;
    Ok(())
}

/// Reduced system density matrix after integrating out the bath oscillator.
pub fn trace_out_environment(g: &GaussianCoeffs2D) -> Result<GaussianCoeffs1D> {
    let width = g.a1.re - g.c1;
    if !(width > 0.0) {
        return Err(Error::DegenerateEnvironment(width));
    }
    let diff = g.d1 - g.e1;
    let c = g.c + diff.norm_sqr() / (8.0 * width);
    let a = g.a - diff * diff / (8.0 * width);
    let reduced = 2.0 * (g.a.re - g.c) / std::f64::consts::PI
        - (g.d1.re - g.e1.re).powi(2) / (2.0 * std::f64::consts::PI * width);
    if !(reduced > 0.0) {
        return Err(Error::DegenerateCoeffs(a.re - c));
    }
    Ok(GaussianCoeffs1D {
        a,
        c,
        log_norm: 0.5 * reduced.ln(),
    })
}

/// `Delta^2 = (a_R + c) / (a_R - c)` of the reduced state.
pub fn reduced_delta_squared(g: &GaussianCoeffs2D) -> Result<f64> {
    trace_out_environment(g)?.delta_squared()
}

/// Von Neumann entropy of the reduced system state.
pub fn reduced_entropy(g: &GaussianCoeffs2D) -> Result<f64> {
    Ok(entropy_from_delta(PhaseSpaceArea::from_delta_squared(
        reduced_delta_squared(g)?,
    )?))
}

/// The 4x4 symmetrized covariance over `(x, p_x, q, p_q)`.
///
/// With `R = (X+Y)/2` the Wigner function is Gaussian with
/// `<R R^T> = (4 (A_R - C_s))^-1`, conditional momentum mean
/// `-2 (A_I - C_I) R` and conditional momentum covariance `A_R + C_s`.
pub fn moments(g: &GaussianCoeffs2D) -> Result<DMatrix<f64>> {
    g.check(f64::NAN)?;
    let (minus, plus, ai, ci) = g.blocks();
    let sxx = (4.0 * minus)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateCoeffs(minus.determinant()))?;
    let gain = -2.0 * (ai - ci);
    let spx = gain * sxx;
    let spp = plus + gain * sxx * gain.transpose();
    let mut cov = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            cov[(2 * i, 2 * j)] = sxx[(i, j)];
            cov[(2 * i + 1, 2 * j + 1)] = spp[(i, j)];
            cov[(2 * i + 1, 2 * j)] = spx[(i, j)];
            cov[(2 * j, 2 * i + 1)] = spx[(i, j)];
        }
    }
    Ok(cov)
}

/// Exponent coefficients whose second moments are `cov` (basis
/// `(x, p_x, q, p_q)`), normalized.
pub fn coeffs2d_from_covariance(cov: &DMatrix<f64>) -> Result<GaussianCoeffs2D> {
    if cov.nrows() != 4 || cov.ncols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: cov.nrows(),
        });
    }
    let pick = |ri: usize, ci: usize| {
        Matrix2::new(cov[(ri, ci)], cov[(ri, ci + 2)], cov[(ri + 2, ci)], cov[(ri + 2, ci + 2)])
    };
    let sxx = pick(0, 0);
    let spp = pick(1, 1);
    let spx = pick(1, 0);
    if !(sxx[(0, 0)] > 0.0 && sxx.determinant() > 0.0) {
        return Err(Error::UnphysicalState(
            "position block is not positive definite".into(),
        ));
    }
    let sxx_inv = sxx.try_inverse().expect("positive-definite block");
    let minus = 0.25 * sxx_inv;
    let gain = spx * sxx_inv;
    let plus = spp - gain * sxx * gain.transpose();
    // gain = -2 (A_I - C_I) with A_I symmetric and C_I antisymmetric
    let ai = -0.25 * (gain + gain.transpose());
    let ci = 0.25 * (gain - gain.transpose());
    let ar = 0.5 * (minus + plus);
    let cs = 0.5 * (plus - minus);
    GaussianCoeffs2D {
        a: Complex64::new(ar[(0, 0)], ai[(0, 0)]),
        a1: Complex64::new(ar[(1, 1)], ai[(1, 1)]),
        c: cs[(0, 0)],
        c1: cs[(1, 1)],
        d1: Complex64::new(2.0 * ar[(0, 1)], 2.0 * ai[(0, 1)]),
        e1: Complex64::new(2.0 * cs[(0, 1)], 2.0 * ci[(0, 1)]),
        log_norm: 0.0,
    }
    .normalized()
}
