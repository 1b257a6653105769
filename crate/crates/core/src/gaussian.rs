//! Single-mode Gaussian states.
//!
//! A Gaussian density matrix centred at the origin,
//!
//! ```text
//! rho(x, y) = N exp[-a x^2 - a* y^2 + 2 c x y],
//! ```
//!
//! is fixed by three numbers: the complex width `a` and the real cross
//! coefficient `c`. Equivalently it is fixed by the three equal-time second
//! moments `<x^2>`, `<p^2>` and `<{x, p}>/2`. The phase-space area
//! `Delta = 2 sqrt(<x^2><p^2> - <{x,p}/2>^2)` is 1 for a pure state and grows
//! with mixing; the von Neumann entropy is a function of `Delta` alone.
//!
//! Units: hbar = k_B = 1, masses scaled out.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Deficit below `Delta^2 = 1` that is clamped to a pure state instead of
/// rejected.
pub const DELTA_SQUARED_CLAMP: f64 = 1e-6;

/// Below `Delta = 1 + PURE_STATE_WINDOW` the entropy is reported as exactly 0.
pub const PURE_STATE_WINDOW: f64 = 1e-12;

/// The three equal-time second moments of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorTriple {
    /// `<x^2>`
    pub xx: f64,
    /// `<p^2>`
    pub pp: f64,
    /// `<{x, p}>/2`
    pub xp: f64,
}

impl CorrelatorTriple {
    pub fn new(xx: f64, pp: f64, xp: f64) -> Self {
        Self { xx, pp, xp }
    }

    /// Ground state of an oscillator with frequency `omega`.
    pub fn ground_state(omega: f64) -> Self {
        Self::new(1.0 / (2.0 * omega), omega / 2.0, 0.0)
    }

    /// Thermal state of a free oscillator.
    pub fn thermal(spec: ThermalSpec) -> Self {
        let k = spec.coth_factor();
        Self::new(k / (2.0 * spec.omega), spec.omega * k / 2.0, 0.0)
    }

    /// `<x^2><p^2> - <{x,p}/2>^2`, i.e. `Delta^2 / 4`.
    pub fn determinant(&self) -> f64 {
        self.xx * self.pp - self.xp * self.xp
    }

    /// `Delta^2` without any clamping or validation.
    pub fn delta_squared(&self) -> f64 {
        4.0 * self.determinant()
    }
}

/// Coefficients of a single-mode Gaussian density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCoeffs1D {
    pub a: Complex64,
    pub c: f64,
    /// `ln N`
    pub log_norm: f64,
}

impl GaussianCoeffs1D {
    /// Builds the coefficients and fills in the trace normalization
    /// `N = sqrt(2 (a_R - c) / pi)`.
    pub fn normalized(a: Complex64, c: f64) -> Result<Self> {
        let width = a.re - c;
        if !(width > 0.0) {
            return Err(Error::DegenerateCoeffs(width));
        }
        Ok(Self {
            a,
            c,
            log_norm: 0.5 * (2.0 * width / PI).ln(),
        })
    }

    /// `Delta^2 = (a_R + c) / (a_R - c)`.
    pub fn delta_squared(&self) -> Result<f64> {
        let width = self.a.re - self.c;
        if !(width > 0.0) {
            return Err(Error::DegenerateCoeffs(width));
        }
        Ok((self.a.re + self.c) / width)
    }
}

/// Phase-space area `Delta` of a single-mode Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceArea {
    delta: f64,
    clamped: bool,
}

impl PhaseSpaceArea {
    /// Validates `Delta^2`.
    ///
    /// Values in `[1 - 1e-6, 1)` are clamped to a pure state and flagged;
    /// anything lower is an [`Error::UnphysicalState`].
    pub fn from_delta_squared(delta_squared: f64) -> Result<Self> {
        if !delta_squared.is_finite() {
            return Err(Error::UnphysicalState(format!(
                "non-finite Delta^2 = {delta_squared}"
            )));
        }
        if delta_squared >= 1.0 {
            Ok(Self {
                delta: delta_squared.sqrt(),
                clamped: false,
            })
        } else if delta_squared >= 1.0 - DELTA_SQUARED_CLAMP {
            Ok(Self {
                delta: 1.0,
                clamped: true,
            })
        } else {
            Err(Error::UnphysicalState(format!(
                "Delta^2 = {delta_squared} < 1 violates the uncertainty relation"
            )))
        }
    }

    pub fn from_delta(delta: f64) -> Result<Self> {
        if delta < 0.0 {
            return Err(Error::UnphysicalState(format!("negative Delta = {delta}")));
        }
        Self::from_delta_squared(delta * delta)
    }

    pub fn value(&self) -> f64 {
        self.delta
    }

    /// True when a slightly sub-unit `Delta^2` was clamped to 1.
    pub fn was_clamped(&self) -> bool {
        self.clamped
    }
}

/// Inverse temperature, with an exact zero-temperature variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseTemperature {
    Finite(f64),
    /// `T = 0`: every `coth(beta omega / 2)` is exactly 1.
    Zero,
}

impl InverseTemperature {
    pub fn finite(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta.is_finite() {
            Ok(Self::Finite(beta))
        } else if beta == f64::INFINITY {
            Ok(Self::Zero)
        } else {
            Err(Error::InvalidParameter(format!(
                "inverse temperature must be positive, got {beta}"
            )))
        }
    }

    /// `coth(beta omega / 2)`.
    pub fn coth_factor(&self, omega: f64) -> f64 {
        match *self {
            Self::Zero => 1.0,
            Self::Finite(beta) => 1.0 / (0.5 * beta * omega).tanh(),
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Self::Zero => f64::INFINITY,
            Self::Finite(beta) => beta,
        }
    }
}

/// A free oscillator of frequency `omega` in equilibrium at `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    pub beta: InverseTemperature,
    pub omega: f64,
}

impl ThermalSpec {
    pub fn new(beta: InverseTemperature, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "frequency must be positive, got {omega}"
            )));
        }
        if let InverseTemperature::Finite(b) = beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "inverse temperature must be positive, got {b}"
                )));
            }
        }
        Ok(Self { beta, omega })
    }

    pub fn coth_factor(&self) -> f64 {
        self.beta.coth_factor(self.omega)
    }
}

/// `Delta = 2 sqrt(<x^2><p^2> - <{x,p}/2>^2)`.
pub fn phase_space_area(c: &CorrelatorTriple) -> Result<PhaseSpaceArea> {
    if !(c.xx > 0.0 && c.pp > 0.0) {
        return Err(Error::UnphysicalState(format!(
            "non-positive variance: <x^2> = {}, <p^2> = {}",
            c.xx, c.pp
        )));
    }
    PhaseSpaceArea::from_delta_squared(c.delta_squared())
}

/// Von Neumann entropy (nats) of a Gaussian state with phase-space area `d`:
/// `S = (D+1)/2 ln((D+1)/2) - (D-1)/2 ln((D-1)/2)`.
pub fn entropy_from_delta(d: PhaseSpaceArea) -> f64 {
    entropy_of_delta_value(d.value())
}

/// Same as [`entropy_from_delta`] on a raw `Delta >= 1`.
pub(crate) fn entropy_of_delta_value(delta: f64) -> f64 {
    if delta < 1.0 + PURE_STATE_WINDOW {
        return 0.0;
    }
    let plus = 0.5 * (delta + 1.0);
    let minus = 0.5 * (delta - 1.0);
    plus * plus.ln() - minus * minus.ln()
}

/// Statistical particle number `n = (Delta - 1)/2`.
pub fn particle_number(d: PhaseSpaceArea) -> f64 {
    0.5 * (d.value() - 1.0)
}

/// Second moments of a Gaussian density matrix.
pub fn coeffs_to_correlators(g: &GaussianCoeffs1D) -> Result<CorrelatorTriple> {
    let width = g.a.re - g.c;
    if !(width > 0.0) {
        return Err(Error::DegenerateCoeffs(width));
    }
    Ok(CorrelatorTriple {
        xx: 1.0 / (4.0 * width),
        xp: -g.a.im / (2.0 * width),
        pp: (g.a.norm_sqr() - g.c * g.c) / width,
    })
}

/// Inverse of [`coeffs_to_correlators`].
pub fn correlators_to_coeffs(c: &CorrelatorTriple) -> Result<GaussianCoeffs1D> {
    phase_space_area(c)?;
    // the unclamped value keeps the map an exact inverse
    let d2 = c.delta_squared();
    let a_im = -c.xp / (2.0 * c.xx);
    let a_re = (d2 + 1.0) / (8.0 * c.xx);
    let cross = (d2 - 1.0) / (8.0 * c.xx);
    GaussianCoeffs1D::normalized(Complex64::new(a_re, a_im), cross)
}

/// `F(t; t') = cos(omega (t - t')) / (2 omega) * coth(beta omega / 2)`.
pub fn free_thermal_statistical_propagator(s: ThermalSpec, t: f64, t_prime: f64) -> f64 {
    (s.omega * (t - t_prime)).cos() / (2.0 * s.omega) * s.coth_factor()
}

/// Density-matrix coefficients of a free thermal state.
///
/// In centre/relative coordinates the exponent is
/// `-Delta_th^2 (x-y)^2 / (8 <x^2>_th) - (x+y)^2 / (8 <x^2>_th)`.
pub fn thermal_density_matrix(s: ThermalSpec) -> GaussianCoeffs1D {
    let xx = free_thermal_statistical_propagator(s, 0.0, 0.0);
    let delta = s.coth_factor();
    let relative = delta * delta / (8.0 * xx);
    let centre = 1.0 / (8.0 * xx);
    // -r (x-y)^2 - k (x+y)^2 = -(r+k) x^2 - (r+k) y^2 + 2 (r-k) x y
    let a = Complex64::new(relative + centre, 0.0);
    GaussianCoeffs1D {
        a,
        c: relative - centre,
        log_norm: 0.5 * (2.0 * (2.0 * centre) / PI).ln(),
    }
}

/// `S_SE = S_total - S_S - S_E`, negative when the subsystems gain entropy.
pub fn correlation_entropy(s_total: f64, s_sys: f64, s_env: f64) -> f64 {
    s_total - s_sys - s_env
}
