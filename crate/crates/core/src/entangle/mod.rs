//! Heralded atom-atom entanglement: success probability per attempt,
//! expected time to entanglement, and rate tables across link designs.

mod montecarlo;

pub use montecarlo::{simulate, LossModel, McResult, SimSettings};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collection::rb_free_space_efficiency;
use crate::mirror_opt::{optimize_t_high, CavitySetup, Objective};
use crate::{Error, Result};

/// Success probability of the linear-optics Bell-state measurement.
pub const BELL_SUCCESS: f64 = 0.5;

/// Photon detection path from each node to the Bell-state analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Single-photon detector quantum efficiency.
    pub detector_qe: f64,
    pub fiber_length_km: f64,
    /// Fiber 1/e attenuation length.
    pub attenuation_length_km: f64,
}

impl Default for DetectionChain {
    /// SPCM at 780 nm behind 10 m of fiber with L_att = 1.091 km.
    fn default() -> Self {
        Self {
            detector_qe: 0.7,
            fiber_length_km: 0.01,
            attenuation_length_km: 1.091,
        }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.detector_qe > 0.0 && self.detector_qe <= 1.0) {
            return Err(Error::invalid("detector_qe", self.detector_qe, "must lie in (0, 1]"));
        }
        if !(self.fiber_length_km >= 0.0 && self.fiber_length_km.is_finite()) {
            return Err(Error::invalid("fiber_length_km", self.fiber_length_km, "must be non-negative"));
        }
        if !(self.attenuation_length_km > 0.0) {
            return Err(Error::invalid("attenuation_length_km", self.attenuation_length_km, "must be positive"));
        }
        Ok(())
    }

    /// Detector efficiency including fiber transmission e^{−L_f/L_att}.
    pub fn effective_efficiency(&self) -> f64 {
        self.detector_qe * (-self.fiber_length_km / self.attenuation_length_km).exp()
    }
}

/// Durations (s) of the generation sequence and the atom-loss budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTimings {
    pub t_load: f64,
    pub t_pump: f64,
    pub t_pi: f64,
    pub t_det: f64,
    pub t_cool: f64,
    /// Attempts between cooling intervals.
    pub n1: u32,
    /// Per-atom loss probability over one block of `n1` attempts.
    pub p_loss_per_block: f64,
    pub background_lifetime: f64,
    /// Photons scattered per optical-pumping cycle.
    pub scatter_per_pump: f64,
    /// Also cool once after a successful attempt.
    pub cool_after_success: bool,
}

impl Default for ProtocolTimings {
    fn default() -> Self {
        Self {
            t_load: 100e-3,
            t_pump: 6e-6,
            t_pi: 30e-9,
            t_det: 1e-6,
            t_cool: 100e-6,
            n1: 10,
            p_loss_per_block: 1e-4,
            background_lifetime: 10.0,
            scatter_per_pump: 5.0,
            cool_after_success: false,
        }
    }
}

impl ProtocolTimings {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_load", self.t_load),
            ("t_pump", self.t_pump),
            ("t_pi", self.t_pi),
            ("t_det", self.t_det),
            ("t_cool", self.t_cool),
            ("background_lifetime", self.background_lifetime),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, v, "must be positive"));
            }
        }
        if self.n1 < 1 {
            return Err(Error::invalid("n1", 0.0, "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.p_loss_per_block) {
            return Err(Error::invalid("p_loss_per_block", self.p_loss_per_block, "must lie in [0, 1)"));
        }
        if !(self.scatter_per_pump >= 0.0) {
            return Err(Error::invalid("scatter_per_pump", self.scatter_per_pump, "must be non-negative"));
        }
        Ok(())
    }

    /// Duration of one attempt: pump, π-pulse, detection.
    pub fn attempt_duration(&self) -> f64 {
        self.t_pump + self.t_pi + self.t_det
    }

    /// One block of `n1` attempts followed by cooling.
    pub fn block_duration(&self) -> f64 {
        f64::from(self.n1) * self.attempt_duration() + self.t_cool
    }
}

/// P_aa = ½(η^(Rb)·η_det)², with η_det including fiber loss.
pub fn p_atom_atom(eta_rb: f64, chain: &DetectionChain) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta_rb) {
        return Err(Error::invalid("eta_rb", eta_rb, "must lie in [0, 1]"));
    }
    chain.validate()?;
    let e = eta_rb * chain.effective_efficiency();
    Ok(BELL_SUCCESS * e * e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Epoch count N_epoch = max(1, 1/(P_aa·N₁)), every epoch charged a full
    /// block of N₁ attempts plus cooling.
    EpochCount,
    /// Renewal expectation with a geometric number of attempts.
    Exact,
}

/// Expected number of completed cooling intervals before success,
/// E⌊(G−1)/N₁⌋ = q^{N₁}/(1−q^{N₁}) for G ~ Geometric(p), q = 1 − p.
pub fn expected_cooling_intervals(p_aa: f64, n1: u32) -> f64 {
    let qn = (1.0 - p_aa).powi(n1 as i32);
    qn / (1.0 - qn)
}

/// Expected time from prepared atoms to a heralded entangled pair.
pub fn analytic_entanglement_time(p_aa: f64, timings: &ProtocolTimings, convention: RateConvention) -> Result<f64> {
    if !(p_aa > 0.0 && p_aa <= 1.0) {
        return Err(Error::invalid("p_aa", p_aa, "must lie in (0, 1]"));
    }
    timings.validate()?;
    let t = match convention {
        RateConvention::EpochCount => {
            let n_epoch = (1.0 / (p_aa * f64::from(timings.n1))).max(1.0);
            n_epoch * timings.block_duration()
        }
        RateConvention::Exact => {
            let cool_after = if timings.cool_after_success { timings.t_cool } else { 0.0 };
            timings.attempt_duration() / p_aa
                + expected_cooling_intervals(p_aa, timings.n1) * timings.t_cool
                + cool_after
        }
    };
    Ok(t)
}

pub fn entanglement_rate(p_aa: f64, timings: &ProtocolTimings, convention: RateConvention) -> Result<f64> {
    Ok(1.0 / analytic_entanglement_time(p_aa, timings, convention)?)
}

/// A photon collection front end for one node.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkDesign {
    /// Cavity with T_high optimized for the ⁸⁷Rb efficiency.
    Cavity { name: String, setup: CavitySetup },
    Lens { name: String, na: f64 },
    /// Fixed collection efficiency η^(Rb).
    Fixed { name: String, eta_rb: f64 },
}

impl LinkDesign {
    pub fn name(&self) -> &str {
        match self {
            Self::Cavity { name, .. } | Self::Lens { name, .. } | Self::Fixed { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Cavity { .. } => "cavity",
            Self::Lens { .. } => "lens",
            Self::Fixed { .. } => "fixed",
        }
    }

    /// η^(Rb), with T_high optimized for cavities (returned as the second
    /// element).
    pub fn rb_efficiency(&self) -> Result<(f64, Option<f64>)> {
        match self {
            Self::Cavity { setup, .. } => {
                let r = optimize_t_high(setup, Objective::Rb)?;
                Ok((r.eta_opt, Some(r.t_high_opt)))
            }
            Self::Lens { na, .. } => Ok((rb_free_space_efficiency(*na)?, None)),
            Self::Fixed { eta_rb, .. } => Ok((*eta_rb, None)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub name: String,
    pub kind: &'static str,
    pub t_high: Option<f64>,
    pub eta_rb: f64,
    pub p_aa: f64,
    pub rate: f64,
    pub error: Option<String>,
}

impl RateRow {
    pub fn is_valid(&self) -> bool {
        self.error.is_none()
    }
}

/// Rate per design. A design with zero efficiency, or failing its
/// preconditions, yields an invalid row with rate 0.
pub fn rate_sweep(
    designs: &[LinkDesign],
    timings: &ProtocolTimings,
    chain: &DetectionChain,
    convention: RateConvention,
) -> Vec<RateRow> {
    designs
        .par_iter()
        .map(|d| {
            let computed = d.rb_efficiency().and_then(|(eta_rb, t_high)| {
                let p_aa = p_atom_atom(eta_rb, chain)?;
                let rate = entanglement_rate(p_aa, timings, convention)?;
                Ok((eta_rb, t_high, p_aa, rate))
            });
            match computed {
                Ok((eta_rb, t_high, p_aa, rate)) => RateRow {
                    name: d.name().to_string(),
                    kind: d.kind(),
                    t_high,
                    eta_rb,
                    p_aa,
                    rate,
                    error: None,
                },
                Err(e) => RateRow {
                    name: d.name().to_string(),
                    kind: d.kind(),
                    t_high: None,
                    eta_rb: 0.0,
                    p_aa: 0.0,
                    rate: 0.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
