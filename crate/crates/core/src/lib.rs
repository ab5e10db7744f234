//! Models for the photonic link of a two-node neutral-atom quantum network.
//!
//! The crate covers the chain from a single emitting atom to a heralded
//! atom-atom entangled pair:
//!
//! - [`dipole_optics`]: free-space lens collection and single-mode fiber
//!   coupling of σ± and π dipole emission.
//! - [`cavity`]: finesse, decay rate, near-concentric waist, cooperativity
//!   and transverse-mode spacing of a two-mirror resonator.
//! - [`collection`]: cavity collection efficiency for a two-level emitter and
//!   for the Purcell-modified ⁸⁷Rb branching.
//! - [`mirror_opt`]: out-coupler transmission optimization and parameter sweeps.
//! - [`entangle`]: heralding probability, analytic entanglement time and an
//!   attempt-level Monte Carlo of the generation sequence.
//! - [`fidelity`]: the entanglement infidelity budget.
//! - [`config`], [`report`] and [`cli`]: the JSON configuration, CSV tables
//!   and the `qnet` command-line front end.
//!
//! All rates are angular frequencies (rad/s) internally; convert with
//! [`units::to_hz`] at the edges.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod cli;
pub mod collection;
pub mod config;
pub mod dipole_optics;
pub mod entangle;
mod error;
pub mod fidelity;
pub mod mirror_opt;
pub mod quadrature;
pub mod report;
pub mod search;
pub mod units;

pub use error::{Error, Result};
