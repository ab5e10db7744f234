//! JSON run configuration. Key names carry their units; unknown keys are
//! rejected and every nested value is validated on load.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cavity::{AtomLine, CavityGeometry, MirrorSet};
use crate::entangle::{DetectionChain, LinkDesign, ProtocolTimings};
use crate::fidelity::BudgetEntry;
use crate::mirror_opt::{CavitySetup, Spacing};
use crate::units::{from_hz, MHZ, MM, NM, PPM, UM};
use crate::{Error, Result};

/// The shipped configuration with all tabulated design and timing values.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub atom: AtomConfig,
    pub mirrors: MirrorConfig,
    pub cavity_designs: Vec<CavityDesignConfig>,
    pub lens_na: Vec<f64>,
    pub detection: DetectionChain,
    pub timings: TimingsConfig,
    pub sweeps: SweepsConfig,
    pub simulation: SimulationConfig,
    pub fidelity: FidelityConfig,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub wavelength_nm: f64,
    pub gamma_over_2pi_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorConfig {
    pub t_low_ppm: f64,
    pub loss_rt_ppm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityDesignConfig {
    pub name: String,
    pub length_mm: f64,
    pub mirror_roc_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingsConfig {
    pub t_load_ms: f64,
    pub t_pump_us: f64,
    pub t_pi_ns: f64,
    pub t_det_us: f64,
    pub t_cool_us: f64,
    pub n1: u32,
    pub loss_per_block: f64,
    pub background_lifetime_s: f64,
    pub scatter_per_pump: f64,
    pub cool_after_success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepsConfig {
    pub fig2_na: RangeConfig,
    pub fig3_t_high_ppm: RangeConfig,
    pub fig3_lengths_mm: Vec<f64>,
    pub d_crit_um: RangeConfig,
    pub anchor_d_crit_um: f64,
    pub d_crit_designs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
    pub loss_enabled: bool,
    /// Cavity design whose optimized P_aa drives the simulation.
    pub design: String,
    #[serde(default)]
    pub p_aa_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelityEntryConfig {
    pub name: String,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FidelityConfig {
    pub entries: Vec<FidelityEntryConfig>,
    pub displacement_nm: f64,
    pub dephasing_delay_us: f64,
    pub t2_star_ms: f64,
    pub model_design: String,
}

fn config_err(path: impl Into<String>, message: impl std::fmt::Display) -> Error {
    Error::Config {
        path: path.into(),
        message: message.to_string(),
    }
}

/// Re-labels a domain validation error with the offending key path.
fn at<T>(path: impl Into<String>, r: Result<T>) -> Result<T> {
    r.map_err(|e| config_err(path, e))
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_json_str(DEFAULT_CONFIG_JSON).expect("shipped default config is valid")
    }
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(path, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.cavity_designs.is_empty() {
            return Err(config_err("cavity_designs", "section is empty; at least one design is required"));
        }
        self.atom_line()?;
        self.timings()?;
        at("detection", self.detection.validate())?;
        for (i, d) in self.cavity_designs.iter().enumerate() {
            self.cavity_setup_at(i, d)?;
        }
        let mut names: Vec<&str> = self.cavity_designs.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("cavity_designs", "design names must be unique"));
        }
        for (i, &na) in self.lens_na.iter().enumerate() {
            if !(na > 0.0 && na < 1.0) {
                return Err(config_err(format!("lens_na[{i}]"), format!("{na} is outside (0, 1)")));
            }
        }
        self.validate_sweeps()?;
        let s = &self.simulation;
        if s.trials == 0 {
            return Err(config_err("simulation.trials", "must be at least 1"));
        }
        if let Some(p) = s.p_aa_override {
            if !(p > 0.0 && p <= 1.0) {
                return Err(config_err("simulation.p_aa_override", format!("{p} is outside (0, 1]")));
            }
        }
        self.find_design("simulation.design", &s.design)?;
        let f = &self.fidelity;
        for (i, e) in f.entries.iter().enumerate() {
            if !(0.0..=100.0).contains(&e.percent) {
                return Err(config_err(format!("fidelity.entries[{i}].percent"), format!("{} is outside [0, 100]", e.percent)));
            }
        }
        for (key, v) in [
            ("fidelity.displacement_nm", f.displacement_nm),
            ("fidelity.dephasing_delay_us", f.dephasing_delay_us),
        ] {
            if !(v >= 0.0) {
                return Err(config_err(key, "must be non-negative"));
            }
        }
        if !(f.t2_star_ms > 0.0) {
            return Err(config_err("fidelity.t2_star_ms", "must be positive"));
        }
        self.find_design("fidelity.model_design", &f.model_design)?;
        Ok(())
    }

    fn validate_sweeps(&self) -> Result<()> {
        let s = &self.sweeps;
        for (key, r) in [
            ("sweeps.fig2_na", &s.fig2_na),
            ("sweeps.fig3_t_high_ppm", &s.fig3_t_high_ppm),
            ("sweeps.d_crit_um", &s.d_crit_um),
        ] {
            if !(r.lo < r.hi) {
                return Err(config_err(key, "lo must be below hi"));
            }
            if r.points < 2 {
                return Err(config_err(format!("{key}.points"), "need at least 2 points"));
            }
            if r.lo <= 0.0 {
                return Err(config_err(format!("{key}.lo"), "must be positive"));
            }
        }
        if !(s.fig2_na.hi < 1.0) {
            return Err(config_err("sweeps.fig2_na.hi", "NA must stay below 1"));
        }
        if !(s.anchor_d_crit_um > 0.0) {
            return Err(config_err("sweeps.anchor_d_crit_um", "must be positive"));
        }
        for (i, &l) in s.fig3_lengths_mm.iter().enumerate() {
            if !(l > 0.0) {
                return Err(config_err(format!("sweeps.fig3_lengths_mm[{i}]"), "must be positive"));
            }
        }
        for (i, name) in s.d_crit_designs.iter().enumerate() {
            self.find_design(&format!("sweeps.d_crit_designs[{i}]"), name)?;
        }
        Ok(())
    }

    fn find_design(&self, key: &str, name: &str) -> Result<usize> {
        self.cavity_designs
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| config_err(key, format!("no cavity design named `{name}`")))
    }

    pub fn atom_line(&self) -> Result<AtomLine> {
        at(
            "atom",
            AtomLine::new(self.atom.wavelength_nm * NM, from_hz(self.atom.gamma_over_2pi_mhz * MHZ)),
        )
    }

    pub fn timings(&self) -> Result<ProtocolTimings> {
        let t = &self.timings;
        let timings = ProtocolTimings {
            t_load: t.t_load_ms / 1e3,
            t_pump: t.t_pump_us / 1e6,
            t_pi: t.t_pi_ns / 1e9,
            t_det: t.t_det_us / 1e6,
            t_cool: t.t_cool_us / 1e6,
            n1: t.n1,
            p_loss_per_block: t.loss_per_block,
            background_lifetime: t.background_lifetime_s,
            scatter_per_pump: t.scatter_per_pump,
            cool_after_success: t.cool_after_success,
        };
        at("timings", timings.validate())?;
        Ok(timings)
    }

    fn cavity_setup_at(&self, i: usize, d: &CavityDesignConfig) -> Result<CavitySetup> {
        let path = format!("cavity_designs[{i}]");
        let geometry = at(path.clone(), CavityGeometry::new(d.length_mm * MM, d.mirror_roc_mm * MM))?;
        if geometry.d_crit() <= 0.0 {
            return Err(config_err(path, "geometry is at or beyond the concentric point"));
        }
        self.setup_for(geometry).map_err(|e| config_err("mirrors", e))
    }

    /// Cavity setup for an arbitrary geometry with the configured mirrors.
    pub fn setup_for(&self, geometry: CavityGeometry) -> Result<CavitySetup> {
        let t_low = self.mirrors.t_low_ppm * PPM;
        let loss_rt = self.mirrors.loss_rt_ppm * PPM;
        MirrorSet::new(0.0, t_low, loss_rt)?;
        Ok(CavitySetup {
            geometry,
            t_low,
            loss_rt,
            line: self.atom_line()?,
        })
    }

    /// Named cavity setups in file order. Errors if the section is empty.
    pub fn cavity_setups(&self) -> Result<Vec<(String, CavitySetup)>> {
        if self.cavity_designs.is_empty() {
            return Err(config_err("cavity_designs", "section is empty; at least one design is required"));
        }
        self.cavity_designs
            .iter()
            .enumerate()
            .map(|(i, d)| Ok((d.name.clone(), self.cavity_setup_at(i, d)?)))
            .collect()
    }

    pub fn cavity_setup(&self, name: &str) -> Result<CavitySetup> {
        let i = self.find_design("cavity_designs", name)?;
        self.cavity_setup_at(i, &self.cavity_designs[i])
    }

    /// Cavity designs followed by one lens design per configured NA.
    pub fn link_designs(&self) -> Result<Vec<LinkDesign>> {
        let mut out: Vec<LinkDesign> = self
            .cavity_setups()?
            .into_iter()
            .map(|(name, setup)| LinkDesign::Cavity { name, setup })
            .collect();
        out.extend(self.lens_na.iter().map(|&na| LinkDesign::Lens {
            name: format!("lens NA={na}"),
            na,
        }));
        Ok(out)
    }

    pub fn budget_entries(&self) -> Vec<BudgetEntry> {
        self.fidelity
            .entries
            .iter()
            .map(|e| BudgetEntry::new(e.name.clone(), e.percent / 100.0))
            .collect()
    }

    pub fn anchor_d_crit(&self) -> f64 {
        self.sweeps.anchor_d_crit_um * UM
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_loads() {
        let c = RunConfig::default();
        assert_eq!(c.cavity_designs.len(), 3);
        assert_eq!(c.timings().unwrap(), ProtocolTimings::default());
        assert_eq!(c.detection, DetectionChain::default());
    }

    #[test]
    fn unknown_key_rejected_with_path() {
        let text = DEFAULT_CONFIG_JSON.replace("\"t_low_ppm\"", "\"t_low_percent\"");
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("mirrors"), "{err}");
    }

    #[test]
    fn invalid_value_reports_key_path() {
        let text = DEFAULT_CONFIG_JSON.replace("\"lens_na\": [0.5, 0.7, 0.9]", "\"lens_na\": [0.5, 1.7]");
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("lens_na[1]"), "{err}");
    }

    #[test]
    fn missing_section_named() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v.as_object_mut().unwrap().remove("cavity_designs");
        let err = RunConfig::from_json_str(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("cavity_designs"), "{err}");
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let back = RunConfig::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(c, back);
    }
}
