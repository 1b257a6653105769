//! Entropy generation for one harmonic oscillator bilinearly coupled to a
//! bath of oscillators.
//!
//! Two routes are implemented side by side: the exact unitary evolution of all
//! Gaussian correlators ([`exact`], with the closed-form two-oscillator
//! solution in [`analytic`]) and the perturbative master equation for the
//! reduced system ([`master`]). [`density`] evolves the full two-oscillator
//! density matrix and [`experiments`] runs the reference scenarios.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gaussian;
pub mod integrator;
pub mod exact;
pub mod analytic;
pub mod master;
pub mod density;
pub mod experiments;

pub use error::{Error, Result};
