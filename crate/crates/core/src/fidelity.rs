//! Atom-atom entanglement infidelity budget.

use serde::Serialize;

use crate::cavity::{AtomLine, CqedParams};
use crate::units::BOLTZMANN;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetEntry {
    pub name: String,
    pub infidelity: f64,
}

impl BudgetEntry {
    pub fn new(name: impl Into<String>, infidelity: f64) -> Self {
        Self {
            name: name.into(),
            infidelity,
        }
    }
}

/// Named infidelity contributions with their additive total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityBudget {
    pub entries: Vec<BudgetEntry>,
    /// Sum of the entries, clamped to 1.
    pub total: f64,
    /// ∏(1 − εᵢ).
    pub multiplicative_fidelity: f64,
    /// Set when the unclamped sum exceeded 1.
    pub clamped: bool,
}

impl FidelityBudget {
    /// Fidelity implied by the additive total.
    pub fn fidelity(&self) -> f64 {
        1.0 - self.total
    }
}

/// The default budget: temporal overlap 5%, spatial overlap 1%, optics 0.2%,
/// qubit rotation 2%, state readout 6% (both atoms); dephasing, dark counts,
/// multi-photon scattering and off-resonant excitation are negligible.
pub fn default_entries() -> Vec<BudgetEntry> {
    vec![
        BudgetEntry::new("temporal overlap of photons", 0.05),
        BudgetEntry::new("spatial overlap of photons", 0.01),
        BudgetEntry::new("imperfect beamsplitter and waveplates", 0.002),
        BudgetEntry::new("atom qubit rotation (2 atoms)", 0.02),
        BudgetEntry::new("atom state readout (2 atoms)", 0.06),
        BudgetEntry::new("atom qubit dephasing", 0.0),
        BudgetEntry::new("detector dark count", 0.0),
        BudgetEntry::new("multi-photon scattering", 0.0),
        BudgetEntry::new("off-resonant excitation", 0.0),
    ]
}

pub fn compose_budget(entries: Vec<BudgetEntry>) -> Result<FidelityBudget> {
    for e in &entries {
        if !(0.0..=1.0).contains(&e.infidelity) {
            return Err(Error::invalid("budget entry", e.infidelity, "must lie in [0, 1]"));
        }
    }
    let sum: f64 = entries.iter().map(|e| e.infidelity).sum();
    let product: f64 = entries.iter().map(|e| 1.0 - e.infidelity).product();
    Ok(FidelityBudget {
        entries,
        total: sum.min(1.0),
        multiplicative_fidelity: product,
        clamped: sum > 1.0,
    })
}

/// Photon-shape mismatch from atoms displaced from the cavity antinode.
///
/// Each atom couples with C·cos²(kz) and emits an exponential wavepacket with
/// decay rate γ(1+2C(z)). The amplitude overlap of two such packets is
/// 2√(Γ₁Γ₂)/(Γ₁+Γ₂); the error is (1 − overlap)/2.
pub fn temporal_overlap_error(params: &CqedParams, line: &AtomLine, displacement_1: f64, displacement_2: f64) -> Result<f64> {
    for (name, z) in [("displacement_1", displacement_1), ("displacement_2", displacement_2)] {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::invalid(name, z, "must be non-negative"));
        }
    }
    let k = line.wavenumber();
    let rate = |z: f64| line.gamma() * (1.0 + 2.0 * params.cooperativity * (k * z).cos().powi(2));
    let (g1, g2) = (rate(displacement_1), rate(displacement_2));
    let overlap = 2.0 * (g1 * g2).sqrt() / (g1 + g2);
    Ok(((1.0 - overlap) / 2.0).clamp(0.0, 0.5))
}

/// Gaussian dephasing loss 1 − exp(−(t/T₂*)²).
pub fn dephasing_error(delay: f64, t2_star: f64) -> Result<f64> {
    if !(t2_star > 0.0) {
        return Err(Error::invalid("t2_star", t2_star, "must be positive"));
    }
    if !(delay >= 0.0) {
        return Err(Error::invalid("delay", delay, "must be non-negative"));
    }
    Ok(-(-(delay / t2_star).powi(2)).exp_m1())
}

/// Thermal position spread of an atom in a tweezer, w·√(k_B·T_a/U), with the
/// trap depth `u` in joules.
pub fn localization(tweezer_waist: f64, temperature: f64, trap_depth: f64) -> Result<f64> {
    if !(trap_depth > 0.0) {
        return Err(Error::invalid("trap depth", trap_depth, "must be positive"));
    }
    if !(temperature >= 0.0) {
        return Err(Error::invalid("temperature", temperature, "must be non-negative"));
    }
    Ok(tweezer_waist * (BOLTZMANN * temperature / trap_depth).sqrt())
}
