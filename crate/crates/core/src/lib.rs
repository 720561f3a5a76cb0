//! Stochastic resonance in two-state Markov chains with time-periodic
//! transition probabilities.
//!
//! The chain lives on `{-1, +1}` and switches between two transition matrices
//! every `m` steps. This crate computes its exact periodic stationary law,
//! the spectral power amplification (SPA) at the forcing frequency, the
//! noise level that maximises it, and Monte Carlo and diffusion cross-checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod cli;
pub mod diffusion;
pub mod error;
pub mod matrix;
pub mod montecarlo;
pub mod params;
pub mod spectral;
pub mod tuning;

pub use chain::{
    monodromy, rates, stationary_distribution, stationary_oracle, transition_matrices, RateParams,
    StationaryDistribution, TransitionPair,
};
pub use error::{Error, Result};
pub use matrix::{matrix_power_2x2, Mat2};
pub use params::{ChainParams, NoiseLevel};
pub use spectral::{
    expected_output_component, input_signal_power, spa_closed_form, spa_from_distribution,
    SpaResult,
};
