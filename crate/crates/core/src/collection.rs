//! Photon collection efficiencies: cavity (two-level and ⁸⁷Rb) and the
//! free-space lens reference.
//!
//! Fiber coupling from the TEM₀₀ cavity mode is taken as unity, and the
//! dipole-to-mode overlap for cavity modes (waist ≫ λ) is omitted.

use serde::Serialize;

use crate::cavity::{AtomLine, CqedParams, MirrorSet};
use crate::dipole_optics::{fiber_coupled_efficiency, DipolePolarization};
use crate::{Error, Result};

/// Decay branching of the excited state among σ₊, σ₋ and π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchingProbs {
    pub p_plus: f64,
    pub p_minus: f64,
    pub p_pi: f64,
}

impl BranchingProbs {
    /// Combined probability 2P_σ of emitting into a cavity-coupled channel.
    pub fn sigma_total(&self) -> f64 {
        self.p_plus + self.p_minus
    }
}

/// Free-space branching fraction of the σ channels.
pub const FREE_SPACE_SIGMA_FRACTION: f64 = 2.0 / 3.0;

/// Cavity collection efficiency of a two-level σ emitter:
/// 2C/(1+2C) · κ/(κ+γ) · T_high/(T_low+T_high+𝓛_RT).
pub fn two_level_efficiency(params: &CqedParams, mirrors: &MirrorSet, line: &AtomLine) -> f64 {
    let c = params.cooperativity;
    2.0 * c / (1.0 + 2.0 * c) * escape_fraction(params, line) * mirrors.outcoupling_fraction()
}

fn escape_fraction(params: &CqedParams, line: &AtomLine) -> f64 {
    params.kappa / (params.kappa + line.gamma())
}

/// Purcell-modified branching: P± = (1+2C)/(3+4C), P_π = 1/(3+4C).
pub fn branching(cooperativity: f64) -> Result<BranchingProbs> {
    if !(cooperativity >= 0.0) {
        return Err(Error::invalid("cooperativity", cooperativity, "must be non-negative"));
    }
    if cooperativity.is_infinite() {
        return Ok(BranchingProbs {
            p_plus: 0.5,
            p_minus: 0.5,
            p_pi: 0.0,
        });
    }
    let denom = 3.0 + 4.0 * cooperativity;
    let p_sigma = (1.0 + 2.0 * cooperativity) / denom;
    Ok(BranchingProbs {
        p_plus: p_sigma,
        p_minus: p_sigma,
        p_pi: 1.0 / denom,
    })
}

/// ⁸⁷Rb collection efficiency 4C/(3+4C) · κ/(κ+γ) · T_high/(T_low+T_high+𝓛_RT),
/// which equals 2P_σ times [`two_level_efficiency`].
pub fn rb_efficiency(params: &CqedParams, mirrors: &MirrorSet, line: &AtomLine) -> f64 {
    let c = params.cooperativity;
    4.0 * c / (3.0 + 4.0 * c) * escape_fraction(params, line) * mirrors.outcoupling_fraction()
}

/// Lens collection into a single-mode fiber for the ⁸⁷Rb scheme: the σ
/// fiber-coupled efficiency scaled by the free-space branching 2/3.
pub fn rb_free_space_efficiency(na: f64) -> Result<f64> {
    Ok(FREE_SPACE_SIGMA_FRACTION * fiber_coupled_efficiency(DipolePolarization::SigmaPlus, na)?)
}
