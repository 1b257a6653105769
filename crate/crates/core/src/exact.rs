//! Exact Gaussian evolution of one oscillator coupled to `N` bath oscillators.
//!
//! The Hamiltonian is quadratic, so the covariance matrix over
//! `(x, p_x, q_1, p_1, ..., q_N, p_N)` obeys the closed linear equation
//! `d cov/dt = A cov + cov A^T`, with `A` the Hamiltonian flow matrix
//! (`dz/dt = A z`). The rhs is applied sparsely; a dense `A` is kept for
//! testing.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gaussian::{phase_space_area, CorrelatorTriple, InverseTemperature, PhaseSpaceArea};
use crate::integrator::{integrate, IntegratorOpts};

/// Tolerated dip of a marginal `Delta` below 1 during evolution.
pub const MARGINAL_DELTA_TOL: f64 = 1e-9;

/// Frequencies and couplings of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    omega0: f64,
    omegas: Vec<f64>,
    lambdas: Vec<f64>,
    normal_mode_max: f64,
}

impl ModelParams {
    /// Validates frequencies and checks that the frequency-squared matrix
    /// (diagonal `omega0^2, omega_n^2`, couplings in row and column 0) is
    /// positive definite.
    pub fn new(omega0: f64, omegas: Vec<f64>, lambdas: Vec<f64>) -> Result<Self> {
        if omegas.len() != lambdas.len() {
            return Err(Error::DimensionMismatch {
                expected: omegas.len(),
                got: lambdas.len(),
            });
        }
        for &w in std::iter::once(&omega0).chain(&omegas) {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "frequencies must be positive and finite, got {w}"
                )));
            }
        }
        if let Some(l) = lambdas.iter().find(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coupling {l}")));
        }
        let mut params = Self {
            omega0,
            omegas,
            lambdas,
            normal_mode_max: 0.0,
        };
        let eig = SymmetricEigen::new(params.frequency_matrix()).eigenvalues;
        let min = eig.min();
        if !(min > 0.0) {
            if params.n_env() == 1 {
                return Err(Error::InvertedOscillator {
                    lambda: params.lambdas[0],
                    bound: omega0 * params.omegas[0],
                });
            }
            return Err(Error::NotPositiveDefinite(min));
        }
        params.normal_mode_max = eig.max().sqrt();
        Ok(params)
    }

    /// Every mode coupled with the same `lambda`.
    pub fn equal_coupling(omega0: f64, omegas: Vec<f64>, lambda: f64) -> Result<Self> {
        let lambdas = vec![lambda; omegas.len()];
        Self::new(omega0, omegas, lambdas)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn n_env(&self) -> usize {
        self.omegas.len()
    }

    /// Phase-space dimension `2N + 2`.
    pub fn dim(&self) -> usize {
        2 * self.omegas.len() + 2
    }

    /// Fastest frequency in the problem, bare or normal mode.
    pub fn omega_max(&self) -> f64 {
        self.omegas
            .iter()
            .copied()
            .fold(self.omega0.max(self.normal_mode_max), f64::max)
    }

    /// The `(N+1) x (N+1)` frequency-squared matrix.
    pub fn frequency_matrix(&self) -> DMatrix<f64> {
        let n = self.n_env() + 1;
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = self.omega0 * self.omega0;
        for (k, (&w, &l)) in self.omegas.iter().zip(&self.lambdas).enumerate() {
            m[(k + 1, k + 1)] = w * w;
            m[(0, k + 1)] = l;
            m[(k + 1, 0)] = l;
        }
        m
    }

    /// Dense flow matrix `A` with `dz/dt = A z`.
    pub fn flow_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut a = DMatrix::zeros(d, d);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -self.omega0 * self.omega0;
        for (n, (&w, &l)) in self.omegas.iter().zip(&self.lambdas).enumerate() {
            let q = 2 + 2 * n;
            a[(1, q)] = -l;
            a[(q, q + 1)] = 1.0;
            a[(q + 1, q)] = -w * w;
            a[(q + 1, 0)] = -l;
        }
        a
    }
}

/// `n` frequencies drawn uniformly from `[lo, hi]` with a seeded ChaCha8 stream.
pub fn random_spectrum(lo: f64, hi: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "frequency band [{lo}, {hi}] must be positive and ordered"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.gen_range(lo..=hi)).collect())
}

/// Which oscillator a marginal refers to. Bath modes are indexed from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    System,
    Env(usize),
}

impl Mode {
    fn offset(self) -> usize {
        match self {
            Mode::System => 0,
            Mode::Env(n) => 2 + 2 * n,
        }
    }
}

/// Symmetrized second moments `<{z_i, z_j}>/2` at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorState {
    cov: DMatrix<f64>,
    time: f64,
}

impl CorrelatorState {
    pub fn new(cov: DMatrix<f64>, time: f64) -> Result<Self> {
        let d = cov.nrows();
        if cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.ncols(),
            });
        }
        if d < 2 || !d.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "covariance dimension must be even and at least 2, got {d}"
            )));
        }
        let scale = cov.amax().max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { cov, time })
    }

    pub(crate) fn from_slice(d: usize, data: &[f64], time: f64) -> Self {
        Self {
            cov: DMatrix::from_column_slice(d, d, data),
            time,
        }
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    pub fn n_env(&self) -> usize {
        self.dim() / 2 - 1
    }

    /// The three second moments of one oscillator.
    pub fn marginal(&self, mode: Mode) -> CorrelatorTriple {
        let i = mode.offset();
        CorrelatorTriple::new(self.cov[(i, i)], self.cov[(i + 1, i + 1)], self.cov[(i, i + 1)])
    }

    /// Symplectic eigenvalues in ascending order (`1/2` for a pure mode).
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.cov)
    }

    /// `ln det cov`.
    pub fn log_det(&self) -> Result<f64> {
        let chol = self
            .cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::UnphysicalState("covariance is not positive definite".into()))?;
        Ok(2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>())
    }

    /// True when every symplectic eigenvalue is at least `1/2 - tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        matches!(self.symplectic_eigenvalues(), Ok(nu) if nu.iter().all(|&v| v >= 0.5 - tol))
    }
}

/// Symplectic eigenvalues of a positive-definite covariance in the
/// `(x_1, p_1, x_2, p_2, ...)` ordering. A pure state gives `1/2` per mode,
/// so each value is half the corresponding normal-mode `Delta`.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = cov.nrows();
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::UnphysicalState("covariance is not positive definite".into()))?;
    let l = chol.l();
    let mut j = DMatrix::zeros(d, d);
    for k in 0..d / 2 {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    // L^T J L is antisymmetric with eigenvalues +-i nu
    let k = l.transpose() * j * &l;
    let m = k.transpose() * &k;
    let mut ev: Vec<f64> = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// `d cov/dt = B + B^T` with `B = A cov`, on row-major flat storage.
/// `b` is scratch of the same length.
pub(crate) fn rhs_into(params: &ModelParams, cov: &[f64], b: &mut [f64], out: &mut [f64]) {
    let d = params.dim();
    let w0sq = params.omega0 * params.omega0;
    let row = |i: usize| &cov[i * d..(i + 1) * d];

    b[..d].copy_from_slice(row(1));
    {
        let (r0, r1) = (row(0), &mut b[d..2 * d]);
        for j in 0..d {
            r1[j] = -w0sq * r0[j];
        }
    }
    for (n, (&w, &l)) in params.omegas.iter().zip(&params.lambdas).enumerate() {
        let q = 2 + 2 * n;
        let rq = row(q);
        let rp = row(q + 1);
        let r0 = row(0);
        for j in 0..d {
            b[d + j] -= l * rq[j];
        }
        let wsq = w * w;
        for j in 0..d {
            b[q * d + j] = rp[j];
            b[(q + 1) * d + j] = -wsq * rq[j] - l * r0[j];
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = b[i * d + j] + b[j * d + i];
            out[i * d + j] = v;
            out[j * d + i] = v;
        }
    }
}

/// Time derivative of the covariance.
pub fn exact_rhs(params: &ModelParams, s: &CorrelatorState) -> Result<DMatrix<f64>> {
    check_dim(params, s)?;
    let d = params.dim();
    let flat: Vec<f64> = s.cov.transpose().as_slice().to_vec();
    let mut b = vec![0.0; d * d];
    let mut out = vec![0.0; d * d];
    rhs_into(params, &flat, &mut b, &mut out);
    Ok(DMatrix::from_row_slice(d, d, &out))
}

/// The same derivative written out correlator by correlator, one family of
/// equations per block of the covariance. Kept as an independent check of
/// [`exact_rhs`].
pub fn exact_rhs_families(params: &ModelParams, s: &CorrelatorState) -> Result<DMatrix<f64>> {
    check_dim(params, s)?;
    let c = &s.cov;
    let n_env = params.n_env();
    let w0sq = params.omega0 * params.omega0;
    let w = &params.omegas;
    let l = &params.lambdas;
    let (x, px) = (0usize, 1usize);
    let q = |n: usize| 2 + 2 * n;
    let pq = |n: usize| 3 + 2 * n;
    let mut d = DMatrix::zeros(params.dim(), params.dim());
    let mut set = |i: usize, j: usize, v: f64| {
        d[(i, j)] = v;
        d[(j, i)] = v;
    };

    // <x^2>
    set(x, x, 2.0 * c[(x, px)]);
    // <p_x^2>
    set(
        px,
        px,
        -2.0 * w0sq * c[(x, px)] - 2.0 * (0..n_env).map(|n| l[n] * c[(px, q(n))]).sum::<f64>(),
    );
    // <{x, p_x}>/2
    set(
        x,
        px,
        -w0sq * c[(x, x)] + c[(px, px)] - (0..n_env).map(|n| l[n] * c[(x, q(n))]).sum::<f64>(),
    );
    for n in 0..n_env {
        let wnsq = w[n] * w[n];
        // <q_n^2>
        set(q(n), q(n), 2.0 * c[(q(n), pq(n))]);
        // <p_n^2>
        set(pq(n), pq(n), -2.0 * wnsq * c[(q(n), pq(n))] - 2.0 * l[n] * c[(pq(n), x)]);
        // <{q_n, p_n}>/2
        set(q(n), pq(n), -wnsq * c[(q(n), q(n))] + c[(pq(n), pq(n))] - l[n] * c[(x, q(n))]);
        // <x q_n>
        set(x, q(n), c[(px, q(n))] + c[(x, pq(n))]);
        // <p_x q_n>
        set(
            px,
            q(n),
            c[(px, pq(n))] - w0sq * c[(x, q(n))]
                - (0..n_env).map(|i| l[i] * c[(q(i), q(n))]).sum::<f64>(),
        );
        // <x p_n>
        set(x, pq(n), c[(px, pq(n))] - wnsq * c[(x, q(n))] - l[n] * c[(x, x)]);
        // <p_x p_n>
        set(
            px,
            pq(n),
            -w0sq * c[(x, pq(n))] - wnsq * c[(px, q(n))] - l[n] * c[(x, px)] - l[n] * c[(q(n), pq(n))]
                - (0..n_env)
                    .filter(|&i| i != n)
                    .map(|i| l[i] * c[(q(i), pq(n))])
                    .sum::<f64>(),
        );
        for m in 0..n_env {
            if m == n {
                continue;
            }
            let wmsq = w[m] * w[m];
            // <q_n q_m>
            set(q(n), q(m), c[(q(n), pq(m))] + c[(q(m), pq(n))]);
            // <q_n p_m>
            set(q(n), pq(m), c[(pq(n), pq(m))] - wmsq * c[(q(n), q(m))] - l[m] * c[(x, q(n))]);
            // <p_n p_m>
            set(
                pq(n),
                pq(m),
                -wnsq * c[(q(n), pq(m))] - wmsq * c[(q(m), pq(n))] - l[n] * c[(x, pq(m))]
                    - l[m] * c[(x, pq(n))],
            );
        }
    }
    Ok(d)
}

fn check_dim(params: &ModelParams, s: &CorrelatorState) -> Result<()> {
    if s.dim() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: s.dim(),
        });
    }
    Ok(())
}

/// Evolves `s0` and calls `sample` at each of `opts.output_times`.
///
/// Every sampled marginal must keep `Delta >= 1 - 1e-9`. The joint state is
/// not required to be physical, so that formal initial states can still be
/// propagated; see [`CorrelatorState::is_physical`].
pub fn evolve_with<S>(
    params: &ModelParams,
    s0: &CorrelatorState,
    opts: &IntegratorOpts,
    mut sample: S,
) -> Result<()>
where
    S: FnMut(&CorrelatorState) -> Result<()>,
{
    check_dim(params, s0)?;
    let d = params.dim();
    let y0: Vec<f64> = s0.cov.transpose().as_slice().to_vec();
    let mut scratch = vec![0.0; d * d];
    integrate(
        |_, y, dy| {
            rhs_into(params, y, &mut scratch, dy);
            Ok(())
        },
        s0.time,
        &y0,
        opts,
        |t, y| {
            // row-major flat of a symmetric matrix reads the same column-major
            let s = CorrelatorState::from_slice(d, y, t);
            check_marginals(&s)?;
            sample(&s)
        },
    )?;
    Ok(())
}

/// Evolves `s0` up to `t_end`, returning the samples at `opts.output_times`
/// (with `t_end` appended when it is not the last requested time).
pub fn evolve(
    params: &ModelParams,
    s0: &CorrelatorState,
    t_end: f64,
    opts: &IntegratorOpts,
) -> Result<Vec<CorrelatorState>> {
    if t_end < s0.time {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} precedes the initial time {}",
            s0.time
        )));
    }
    let mut opts = opts.clone();
    if let Some(&last) = opts.output_times.last() {
        if last > t_end {
            return Err(Error::InvalidParameter(format!(
                "output time {last} lies beyond t_end = {t_end}"
            )));
        }
    }
    if opts.output_times.last() != Some(&t_end) {
        opts.output_times.push(t_end);
    }
    let mut out = Vec::with_capacity(opts.output_times.len());
    evolve_with(params, s0, &opts, |s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

fn check_marginals(s: &CorrelatorState) -> Result<()> {
    let floor = (1.0 - MARGINAL_DELTA_TOL).powi(2);
    for k in 0..=s.n_env() {
        let mode = if k == 0 { Mode::System } else { Mode::Env(k - 1) };
        let d2 = s.marginal(mode).delta_squared();
        if !(d2 >= floor) {
            return Err(Error::UnphysicalState(format!(
                "marginal {mode:?} has Delta^2 = {d2} at t = {}",
                s.time
            )));
        }
    }
    Ok(())
}

/// Pure system ground state, each bath mode thermal at `beta`, no correlations.
pub fn pure_thermal_ic(params: &ModelParams, beta: InverseTemperature) -> CorrelatorState {
    let d = params.dim();
    let mut cov = DMatrix::zeros(d, d);
    let w0 = params.omega0;
    cov[(0, 0)] = 1.0 / (2.0 * w0);
    cov[(1, 1)] = w0 / 2.0;
    for (n, &w) in params.omegas.iter().enumerate() {
        let k = beta.coth_factor(w);
        let q = 2 + 2 * n;
        cov[(q, q)] = k / (2.0 * w);
        cov[(q + 1, q + 1)] = w * k / 2.0;
    }
    CorrelatorState { cov, time: 0.0 }
}

/// Expectation value of the Hamiltonian.
pub fn energy(params: &ModelParams, s: &CorrelatorState) -> f64 {
    let c = &s.cov;
    let w0 = params.omega0;
    let mut e = 0.5 * c[(1, 1)] + 0.5 * w0 * w0 * c[(0, 0)];
    for (n, (&w, &l)) in params.omegas.iter().zip(&params.lambdas).enumerate() {
        let q = 2 + 2 * n;
        e += 0.5 * c[(q + 1, q + 1)] + 0.5 * w * w * c[(q, q)] + l * c[(0, q)];
    }
    e
}

/// Phase-space area of one oscillator's reduced state.
pub fn subsystem_delta(s: &CorrelatorState, mode: Mode) -> Result<PhaseSpaceArea> {
    if let Mode::Env(n) = mode {
        if n >= s.n_env() {
            return Err(Error::DimensionMismatch {
                expected: s.n_env(),
                got: n + 1,
            });
        }
    }
    phase_space_area(&s.marginal(mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::linspace;
    use std::f64::consts::PI;

    fn fig1() -> ModelParams {
        ModelParams::equal_coupling(1.0, vec![2.0], 0.5).unwrap()
    }

    fn random_physical_cov(d: usize, seed: u64) -> DMatrix<f64> {
        // anything >= I/2 satisfies cov + iJ/2 >= 0
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        &m * m.transpose() + DMatrix::identity(d, d) * (0.5 + d as f64)
    }

    #[test]
    fn frequency_matrix_check() {
        assert!(matches!(
            ModelParams::equal_coupling(1.0, vec![2.0], 2.5),
            Err(Error::InvertedOscillator { .. })
        ));
        assert!(matches!(
            ModelParams::equal_coupling(1.0, vec![1.0, 1.0], 0.8),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(ModelParams::equal_coupling(1.0, vec![2.0], 1.9).is_ok());
        assert!(ModelParams::new(1.0, vec![2.0], vec![]).is_err());
        assert!(ModelParams::new(0.0, vec![2.0], vec![0.1]).is_err());
    }

    #[test]
    fn flow_matrix_agrees_with_sparse_and_families() {
        let params = ModelParams::new(1.1, vec![0.9, 1.3, 2.0], vec![0.1, -0.2, 0.15]).unwrap();
        let s = CorrelatorState::new(random_physical_cov(8, 3), 0.0).unwrap();
        let a = params.flow_matrix();
        let dense = &a * s.cov() + s.cov() * a.transpose();
        let sparse = exact_rhs(&params, &s).unwrap();
        let families = exact_rhs_families(&params, &s).unwrap();
        assert!((&dense - &sparse).amax() < 1e-13);
        assert!((&dense - &families).amax() < 1e-13);
    }

    #[test]
    fn random_4x4_matrix_form() {
        let params = fig1();
        let s = CorrelatorState::new(random_physical_cov(4, 11), 0.0).unwrap();
        let a = params.flow_matrix();
        let dense = &a * s.cov() + s.cov() * a.transpose();
        assert!((dense - exact_rhs(&params, &s).unwrap()).amax() < 1e-13);
    }

    #[test]
    fn decoupled_thermal_is_stationary() {
        let params = ModelParams::equal_coupling(1.0, vec![2.0], 0.0).unwrap();
        let s = pure_thermal_ic(&params, InverseTemperature::Finite(0.5));
        let d = exact_rhs(&params, &s).unwrap();
        assert_eq!(d[(0, 0)], 0.0);
        assert_eq!(d[(1, 1)], 0.0);
        assert!(d.amax() == 0.0);
    }

    #[test]
    fn cross_momentum_derivative_vanishes_initially() {
        let s = pure_thermal_ic(&fig1(), InverseTemperature::Zero);
        assert_eq!(exact_rhs(&fig1(), &s).unwrap()[(1, 3)], 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = pure_thermal_ic(&fig1(), InverseTemperature::Zero);
        let p2 = ModelParams::equal_coupling(1.0, vec![2.0, 3.0], 0.1).unwrap();
        assert!(matches!(exact_rhs(&p2, &s), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn free_oscillator_period() {
        let params = ModelParams::equal_coupling(1.0, vec![2.0], 0.0).unwrap();
        let mut cov = pure_thermal_ic(&params, InverseTemperature::Zero).cov().clone();
        cov[(0, 1)] = 0.2;
        cov[(1, 0)] = 0.2;
        cov[(0, 0)] = 0.8;
        let s0 = CorrelatorState::new(cov, 0.0).unwrap();
        let period = 2.0 * PI;
        let opts = IntegratorOpts::for_frequency(params.omega_max());
        let out = evolve(&params, &s0, period, &opts).unwrap();
        let end = out.last().unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            assert!((end.cov()[(i, j)] - s0.cov()[(i, j)]).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_thermal_examples() {
        let params = fig1();
        let s = pure_thermal_ic(&params, InverseTemperature::Finite(0.2));
        assert!((s.cov()[(2, 2)] - 1.0 / 0.2_f64.tanh() / 4.0).abs() < 1e-15);
        assert!((s.cov()[(2, 2)] - 1.266_62).abs() < 1e-5);
        assert!((subsystem_delta(&s, Mode::System).unwrap().value() - 1.0).abs() < 1e-15);
        let de = subsystem_delta(&s, Mode::Env(0)).unwrap().value();
        assert!((de - 1.0 / 0.2_f64.tanh()).abs() < 1e-14);
        assert!(subsystem_delta(&s, Mode::Env(1)).is_err());
        // E = 1/2 + 1/2 coth(0.2) * 2
        let e = energy(&params, &s);
        assert!((e - (0.5 + 1.0 / 0.2_f64.tanh())).abs() < 1e-14);
        assert!((e - 5.566_49).abs() < 1e-5);
    }

    #[test]
    fn ground_state_energy_uncoupled() {
        let params = ModelParams::equal_coupling(1.3, vec![0.7, 2.1], 0.0).unwrap();
        let s = pure_thermal_ic(&params, InverseTemperature::Zero);
        assert!((energy(&params, &s) - (1.3 + 0.7 + 2.1) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn conservation_along_trajectory() {
        let params = ModelParams::new(1.0, vec![0.8, 1.4, 2.2], vec![0.2, 0.15, 0.3]).unwrap();
        let s0 = pure_thermal_ic(&params, InverseTemperature::Finite(0.5));
        let e0 = energy(&params, &s0);
        let nu0 = s0.symplectic_eigenvalues().unwrap();
        let ld0 = s0.log_det().unwrap();
        let opts = IntegratorOpts::for_frequency(params.omega_max())
            .with_output_times(linspace(0.0, 60.0, 120));
        evolve_with(&params, &s0, &opts, |s| {
            assert!(((energy(&params, s) - e0) / e0).abs() < 1e-8);
            assert!((s.log_det().unwrap() - ld0).abs() < 1e-8);
            let nu = s.symplectic_eigenvalues().unwrap();
            for (a, b) in nu.iter().zip(&nu0) {
                assert!((a - b).abs() < 1e-7);
            }
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn symplectic_eigenvalues_of_thermal_product() {
        let params = ModelParams::equal_coupling(1.0, vec![2.0, 3.0], 0.0).unwrap();
        let s = pure_thermal_ic(&params, InverseTemperature::Finite(1.0));
        let nu = s.symplectic_eigenvalues().unwrap();
        let mut expected = vec![
            0.5,
            0.5 / (1.0_f64).tanh(),
            0.5 / (1.5_f64).tanh(),
        ];
        expected.sort_by(f64::total_cmp);
        for (a, b) in nu.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.is_physical(1e-9));
    }

    #[test]
    fn random_spectrum_is_seeded_and_in_band() {
        let a = random_spectrum(2.0, 3.0, 50, 7).unwrap();
        let b = random_spectrum(2.0, 3.0, 50, 7).unwrap();
        let c = random_spectrum(2.0, 3.0, 50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|&w| (2.0..=3.0).contains(&w)));
        assert!(random_spectrum(3.0, 2.0, 5, 0).is_err());
    }
}
