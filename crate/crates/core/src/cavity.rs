//! Two-mirror resonator and atom-cavity coupling parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::units::{EPSILON_0, HBAR, MHZ, NM, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// An atomic transition: wavelength and FWHM decay rate γ (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomLine {
    wavelength: f64,
    gamma: f64,
}

impl AtomLine {
    pub fn new(wavelength: f64, gamma: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::invalid("wavelength", wavelength, "must be positive"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", gamma, "must be positive"));
        }
        Ok(Self { wavelength, gamma })
    }

    /// ⁸⁷Rb D2 line: 780 nm, γ/2π = 6.07 MHz.
    pub fn rb87_d2() -> Self {
        Self {
            wavelength: 780.0 * NM,
            gamma: 2.0 * PI * 6.07 * MHZ,
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// FWHM decay rate, rad/s.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Angular optical frequency ω = 2πc/λ.
    pub fn omega(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Transition dipole element from the free-space decay rate,
    /// d² = 3πε₀ħc³γ/ω³.
    pub fn dipole_element(&self) -> f64 {
        let w = self.omega();
        (3.0 * PI * EPSILON_0 * HBAR * SPEED_OF_LIGHT.powi(3) * self.gamma / w.powi(3)).sqrt()
    }
}

impl Default for AtomLine {
    fn default() -> Self {
        Self::rb87_d2()
    }
}

/// Mirror transmissions and round-trip loss, as dimensionless fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSet {
    pub t_high: f64,
    pub t_low: f64,
    pub loss_rt: f64,
}

impl MirrorSet {
    pub fn new(t_high: f64, t_low: f64, loss_rt: f64) -> Result<Self> {
        for (name, v) in [("t_high", t_high), ("t_low", t_low), ("loss_rt", loss_rt)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(name, v, "must lie in [0, 1)"));
            }
        }
        let total = t_high + t_low + loss_rt;
        if total >= 1.0 {
            return Err(Error::invalid("total mirror loss", total, "must be below 1"));
        }
        Ok(Self {
            t_high,
            t_low,
            loss_rt,
        })
    }

    pub fn total_loss(&self) -> f64 {
        self.t_high + self.t_low + self.loss_rt
    }

    /// Probability that a photon leaving the cavity exits through the
    /// high-transmission mirror.
    pub fn outcoupling_fraction(&self) -> f64 {
        let total = self.total_loss();
        if total == 0.0 {
            0.0
        } else {
            self.t_high / total
        }
    }
}

/// Mirror separation and radius of curvature of a symmetric resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    length: f64,
    mirror_roc: f64,
}

impl CavityGeometry {
    /// Validates stability, 0 ≤ s² ≤ 1 with s = 1 − L/R_m.
    pub fn new(length: f64, mirror_roc: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("cavity length", length, "must be positive"));
        }
        if !(mirror_roc > 0.0 && mirror_roc.is_finite()) {
            return Err(Error::invalid("mirror radius of curvature", mirror_roc, "must be positive"));
        }
        let g = Self { length, mirror_roc };
        let s = g.stability();
        if s * s > 1.0 {
            return Err(Error::invalid("stability parameter", s, "s² must not exceed 1"));
        }
        Ok(g)
    }

    /// Near-concentric cavity at distance `d_crit` from the concentric point.
    pub fn near_concentric(mirror_roc: f64, d_crit: f64) -> Result<Self> {
        if !(d_crit > 0.0) {
            return Err(Error::invalid("critical distance", d_crit, "must be positive"));
        }
        Self::new(2.0 * mirror_roc - d_crit, mirror_roc)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mirror_roc(&self) -> f64 {
        self.mirror_roc
    }

    /// d_crit = 2R_m − L.
    pub fn d_crit(&self) -> f64 {
        2.0 * self.mirror_roc - self.length
    }

    /// s = 1 − L/R_m.
    pub fn stability(&self) -> f64 {
        1.0 - self.length / self.mirror_roc
    }

    pub fn free_spectral_range(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.length)
    }
}

/// Cavity-QED parameters of one design. Rates in rad/s (FWHM).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CqedParams {
    pub finesse: f64,
    pub kappa: f64,
    pub g: f64,
    pub cooperativity: f64,
    pub waist: f64,
    pub mode_volume: f64,
    pub vacuum_field: f64,
    pub gamma: f64,
}

/// Finesse of a cavity with imperfect mirrors,
/// 𝓕 = π R^{1/4} / (1 − R^{1/2}) with R = (1−T_low)(1−T_high)(1−𝓛_RT).
pub fn finesse(mirrors: &MirrorSet) -> Result<f64> {
    if mirrors.total_loss() <= 0.0 {
        return Err(Error::invalid("total mirror loss", 0.0, "finesse is unbounded without loss"));
    }
    let r = (1.0 - mirrors.t_low) * (1.0 - mirrors.t_high) * (1.0 - mirrors.loss_rt);
    Ok(PI * r.powf(0.25) / (1.0 - r.sqrt()))
}

/// Cavity energy decay rate κ = πc/(L𝓕), rad/s.
pub fn kappa(length: f64, finesse: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::invalid("cavity length", length, "must be positive"));
    }
    if !(finesse > 0.0) {
        return Err(Error::invalid("finesse", finesse, "must be positive"));
    }
    Ok(PI * SPEED_OF_LIGHT / (length * finesse))
}

/// TEM₀₀ waist w0 = √(Lλ/2π)·((R_m − L/2)/(L/2))^{1/4}.
///
/// For L ≤ R_m the expression is evaluated as written (it equals the
/// confocal waist at L = R_m).
pub fn near_concentric_waist(geom: &CavityGeometry, line: &AtomLine) -> Result<f64> {
    if geom.d_crit() <= 0.0 {
        return Err(Error::invalid("critical distance", geom.d_crit(), "concentric or beyond"));
    }
    let l = geom.length();
    let confocal = (l * line.wavelength() / (2.0 * PI)).sqrt();
    let ratio = (geom.mirror_roc() - l / 2.0) / (l / 2.0);
    Ok(confocal * ratio.powf(0.25))
}

/// Full chain w0 → V → ℰ → g, together with 𝓕 → κ and C = 2g²/(κγ).
pub fn cqed_params(geom: &CavityGeometry, mirrors: &MirrorSet, line: &AtomLine) -> Result<CqedParams> {
    let waist = near_concentric_waist(geom, line)?;
    let finesse = finesse(mirrors)?;
    let kappa = kappa(geom.length(), finesse)?;
    let mode_volume = PI * waist * waist * geom.length() / 4.0;
    let vacuum_field = (HBAR * line.omega() / (2.0 * EPSILON_0 * mode_volume)).sqrt();
    let g = line.dipole_element() * vacuum_field / HBAR;
    let cooperativity = 2.0 * g * g / (kappa * line.gamma());
    Ok(CqedParams {
        finesse,
        kappa,
        g,
        cooperativity,
        waist,
        mode_volume,
        vacuum_field,
        gamma: line.gamma(),
    })
}

/// Spacing between the fundamental and first transverse mode, in Hz:
/// Δν = c/2L · (1 − cos⁻¹(s)/π).
pub fn transverse_mode_spacing(geom: &CavityGeometry) -> Result<f64> {
    let s = geom.stability();
    if s.abs() > 1.0 {
        return Err(Error::invalid("stability parameter", s, "|s| must not exceed 1"));
    }
    Ok(geom.free_spectral_range() * (1.0 - s.acos() / PI))
}
