//! Lens collection of dipole emission and its coupling into a single-mode
//! fiber.
//!
//! Fields are kept in a dimensionless normalization where the power radiated
//! into a hemisphere is 1/2 for every polarization. Behind the lens a ray
//! leaving the atom at polar angle θ crosses the collimated plane at radius
//! ρ = f·tanθ, with θ̂ → ρ̂ and φ̂ → φ̂. The factor f^{1/2}/(f²+ρ²)^{3/4}
//! carries the √cosθ projection onto the lens plane.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::{adaptive_gauss_legendre, periodic_trapezoid_converged, AdaptiveOptions};
use crate::search::golden_section_max;
use crate::{Error, Result};

/// Focal length used when only the numerical aperture is given. All results
/// are independent of it.
pub const REFERENCE_FOCAL_LENGTH: f64 = 1e-3;

/// Numerical aperture used in place of NA = 1, where ρ_NA diverges.
pub const LIMIT_NA: f64 = 0.999;

/// Waist search bracket, in units of ρ_NA.
pub const WAIST_SEARCH_RANGE: (f64, f64) = (0.05, 5.0);
pub const WAIST_SEARCH_REL_TOL: f64 = 1e-6;

const QUAD_TOL: f64 = 1e-8;
const PHI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DipolePolarization {
    SigmaPlus,
    SigmaMinus,
    Pi,
}

impl DipolePolarization {
    pub const ALL: [DipolePolarization; 3] = [Self::SigmaPlus, Self::SigmaMinus, Self::Pi];

    /// Field amplitude prefactor giving a hemisphere power of 1/2.
    fn prefactor(self) -> f64 {
        match self {
            Self::SigmaPlus | Self::SigmaMinus => (3.0 / (16.0 * PI)).sqrt(),
            Self::Pi => (3.0 / (8.0 * PI)).sqrt(),
        }
    }
}

/// A collection lens. Only the numerical aperture matters physically; the
/// focal length sets the scale of the collimated plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSpec {
    numerical_aperture: f64,
    focal_length: f64,
}

impl LensSpec {
    pub fn new(numerical_aperture: f64, focal_length: f64) -> Result<Self> {
        if !(numerical_aperture > 0.0 && numerical_aperture < 1.0) {
            return Err(Error::invalid("numerical aperture", numerical_aperture, "must lie in (0, 1)"));
        }
        if !(focal_length > 0.0 && focal_length.is_finite()) {
            return Err(Error::invalid("focal length", focal_length, "must be positive and finite"));
        }
        Ok(Self {
            numerical_aperture,
            focal_length,
        })
    }

    /// Lens with the reference focal length.
    pub fn with_na(numerical_aperture: f64) -> Result<Self> {
        Self::new(numerical_aperture, REFERENCE_FOCAL_LENGTH)
    }

    pub fn numerical_aperture(&self) -> f64 {
        self.numerical_aperture
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    /// Radius of the collimated beam behind the lens, f·NA/√(1−NA²).
    pub fn rho_na(&self) -> f64 {
        let na = self.numerical_aperture;
        self.focal_length * na / (1.0 - na * na).sqrt()
    }

    /// Half-angle of the collected cone.
    pub fn half_angle(&self) -> f64 {
        self.numerical_aperture.asin()
    }
}

/// Collimated circularly polarized Gaussian mode of the fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMode {
    waist: f64,
}

impl GaussianMode {
    pub fn new(waist: f64) -> Result<Self> {
        if !(waist > 0.0 && waist.is_finite()) {
            return Err(Error::invalid("Gaussian waist", waist, "must be positive and finite"));
        }
        Ok(Self { waist })
    }

    pub fn waist(&self) -> f64 {
        self.waist
    }
}

/// Handedness of a circularly polarized fiber mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Handedness {
    Plus,
    Minus,
}

/// (θ̂, φ̂) components of the far field on the unit sphere.
pub fn angular_field(pol: DipolePolarization, theta: f64, phi: f64) -> [Complex64; 2] {
    let a = pol.prefactor();
    let i = Complex64::i();
    match pol {
        DipolePolarization::SigmaPlus => {
            let p = i * Complex64::from_polar(a, phi);
            [p * theta.cos(), p * i]
        }
        DipolePolarization::SigmaMinus => {
            let p = i * Complex64::from_polar(a, -phi);
            [-p * theta.cos(), p * i]
        }
        DipolePolarization::Pi => [i * a * theta.sin(), Complex64::new(0.0, 0.0)],
    }
}

/// (ρ̂, φ̂) components of the collimated dipole field behind a lens of focal
/// length `f`.
pub fn lens_plane_field(pol: DipolePolarization, f: f64, rho: f64, phi: f64) -> [Complex64; 2] {
    let r2 = f * f + rho * rho;
    let r = r2.sqrt();
    let projection = f.sqrt() / r2.powf(0.75);
    let cos_t = f / r;
    let sin_t = rho / r;
    let a = pol.prefactor() * projection;
    let i = Complex64::i();
    match pol {
        DipolePolarization::SigmaPlus => {
            let p = i * Complex64::from_polar(a, phi);
            [p * cos_t, p * i]
        }
        DipolePolarization::SigmaMinus => {
            let p = i * Complex64::from_polar(a, -phi);
            [-p * cos_t, p * i]
        }
        DipolePolarization::Pi => [i * a * sin_t, Complex64::new(0.0, 0.0)],
    }
}

fn gaussian_field(hand: Handedness, waist: f64, rho: f64, phi: f64) -> [Complex64; 2] {
    let amp = (-rho * rho / (waist * waist)).exp() / (PI.sqrt() * waist);
    match hand {
        Handedness::Plus => {
            let p = Complex64::from_polar(amp, phi);
            [p, p * Complex64::i()]
        }
        Handedness::Minus => {
            let p = Complex64::from_polar(amp, -phi);
            [p, -p * Complex64::i()]
        }
    }
}

/// Power of the Gaussian mode inside radius `rho`.
fn gaussian_power_within(waist: f64, rho: f64) -> f64 {
    -(-2.0 * rho * rho / (waist * waist)).exp_m1()
}

fn norm_sqr(v: [Complex64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn quad_opts() -> AdaptiveOptions {
    AdaptiveOptions {
        abs_tol: QUAD_TOL,
        max_panels: 1 << 14,
    }
}

/// Fraction of all emitted photons entering the lens: ∫|E_D|² over the
/// collected solid angle. Lies in [0, 1/2].
pub fn collection_fraction(pol: DipolePolarization, lens: &LensSpec) -> Result<f64> {
    collection_fraction_at_na(pol, lens.numerical_aperture())
}

/// As [`collection_fraction`] but accepting the closed range `0 ≤ na ≤ 1`,
/// so the hemisphere limit NA = 1 can be evaluated directly.
pub fn collection_fraction_at_na(pol: DipolePolarization, na: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&na) {
        return Err(Error::invalid("numerical aperture", na, "must lie in [0, 1]"));
    }
    let theta_max = na.asin();
    let r = adaptive_gauss_legendre(
        |theta: f64| {
            let ring = periodic_trapezoid_converged(|phi| norm_sqr(angular_field(pol, theta, phi)), PHI_TOL);
            ring * theta.sin()
        },
        0.0,
        theta_max,
        quad_opts(),
    )?;
    Ok(r.value)
}

/// ∫ρdρ∫dφ |E_D|² over the collimated aperture. Equal to
/// [`collection_fraction`] by the ρ = f·tanθ mapping.
pub fn lens_plane_power(pol: DipolePolarization, lens: &LensSpec) -> Result<f64> {
    let f = lens.focal_length();
    let r = adaptive_gauss_legendre(
        |rho: f64| {
            let ring = periodic_trapezoid_converged(|phi| norm_sqr(lens_plane_field(pol, f, rho, phi)), PHI_TOL);
            ring * rho
        },
        0.0,
        lens.rho_na(),
        quad_opts(),
    )?;
    Ok(r.value)
}

fn overlap_amplitude(pol: DipolePolarization, lens: &LensSpec, waist: f64, hand: Handedness) -> Result<Complex64> {
    let f = lens.focal_length();
    let r = adaptive_gauss_legendre(
        |rho: f64| {
            let ring = periodic_trapezoid_converged(
                |phi| {
                    let g = gaussian_field(hand, waist, rho, phi);
                    let d = lens_plane_field(pol, f, rho, phi);
                    g[0] * d[0].conj() + g[1] * d[1].conj()
                },
                PHI_TOL,
            );
            ring * rho
        },
        0.0,
        lens.rho_na(),
        quad_opts(),
    )?;
    Ok(r.value)
}

/// Mode-overlap factor O between the collimated dipole field and the
/// Gaussian fiber mode, both restricted to the lens aperture.
///
/// O = Σ_h |∫ E_G,h · E_D*|² / (P_G · P_D), summed over the two circular
/// polarization modes h of the fiber; O ∈ [0, 1] by Cauchy-Schwarz.
pub fn fiber_overlap(pol: DipolePolarization, lens: &LensSpec, mode: &GaussianMode) -> Result<f64> {
    let power_d = lens_plane_power(pol, lens)?;
    overlap_with_power(pol, lens, mode.waist(), power_d)
}

fn overlap_with_power(pol: DipolePolarization, lens: &LensSpec, waist: f64, power_d: f64) -> Result<f64> {
    let power_g = gaussian_power_within(waist, lens.rho_na());
    if power_d <= 0.0 || power_g <= 0.0 {
        return Ok(0.0);
    }
    let mut coupled = 0.0;
    for hand in [Handedness::Plus, Handedness::Minus] {
        coupled += overlap_amplitude(pol, lens, waist, hand)?.norm_sqr();
    }
    Ok((coupled / (power_g * power_d)).clamp(0.0, 1.0))
}

/// Result of adjusting the fiber-mode waist for best overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberCoupling {
    pub numerical_aperture: f64,
    /// Free-space collection fraction η_col.
    pub collection: f64,
    /// Overlap factor O at the optimal waist.
    pub overlap: f64,
    /// η = η_col·O.
    pub efficiency: f64,
    /// Optimal waist divided by ρ_NA.
    pub waist_ratio: f64,
    pub evaluations: usize,
}

/// Maximizes the overlap over the Gaussian waist by golden-section search on
/// w ∈ [0.05, 5]·ρ_NA.
pub fn optimize_waist(pol: DipolePolarization, lens: &LensSpec) -> Result<FiberCoupling> {
    optimize_waist_with_tol(pol, lens, WAIST_SEARCH_REL_TOL)
}

pub fn optimize_waist_with_tol(pol: DipolePolarization, lens: &LensSpec, rel_tol: f64) -> Result<FiberCoupling> {
    let rho_na = lens.rho_na();
    let power_d = lens_plane_power(pol, lens)?;
    let collection = collection_fraction(pol, lens)?;
    let (lo, hi) = WAIST_SEARCH_RANGE;
    let best = golden_section_max(
        |w| overlap_with_power(pol, lens, w, power_d),
        lo * rho_na,
        hi * rho_na,
        rel_tol,
        200,
    )?;
    Ok(FiberCoupling {
        numerical_aperture: lens.numerical_aperture(),
        collection,
        overlap: best.value,
        efficiency: collection * best.value,
        waist_ratio: best.x / rho_na,
        evaluations: best.evaluations,
    })
}

/// Fiber-coupled efficiency η = η_col·O with the waist chosen to maximize O.
pub fn fiber_coupled_efficiency(pol: DipolePolarization, na: f64) -> Result<f64> {
    Ok(fiber_coupling(pol, na)?.efficiency)
}

pub fn fiber_coupling(pol: DipolePolarization, na: f64) -> Result<FiberCoupling> {
    optimize_waist(pol, &LensSpec::with_na(na)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lens_rejects_bad_na() {
        assert!(LensSpec::with_na(0.0).is_err());
        assert!(LensSpec::with_na(1.0).is_err());
        assert!(LensSpec::with_na(f64::NAN).is_err());
        assert!(LensSpec::new(0.5, -1.0).is_err());
        assert!(GaussianMode::new(0.0).is_err());
    }

    #[test]
    fn rho_na_formula() {
        let lens = LensSpec::new(0.6, 2.0).unwrap();
        assert!((lens.rho_na() - 2.0 * 0.6 / 0.8).abs() < 1e-15);
    }

    #[test]
    fn hemisphere_is_half_for_every_polarization() {
        for pol in DipolePolarization::ALL {
            let c = collection_fraction_at_na(pol, 1.0).unwrap();
            assert!((c - 0.5).abs() < 1e-6, "{pol:?}: {c}");
        }
    }

    #[test]
    fn zero_aperture_collects_nothing() {
        assert_eq!(collection_fraction_at_na(DipolePolarization::SigmaPlus, 0.0).unwrap(), 0.0);
        assert!(collection_fraction_at_na(DipolePolarization::Pi, 1.5).is_err());
    }

    #[test]
    fn lens_plane_matches_angular_form() {
        for pol in DipolePolarization::ALL {
            let lens = LensSpec::new(0.8, 0.01).unwrap();
            let a = collection_fraction(pol, &lens).unwrap();
            let b = lens_plane_power(pol, &lens).unwrap();
            assert!((a - b).abs() < 1e-8, "{pol:?}: {a} vs {b}");
        }
    }

    #[test]
    fn sigma_minus_mirrors_sigma_plus() {
        let lens = LensSpec::with_na(0.7).unwrap();
        let mode = GaussianMode::new(0.8 * lens.rho_na()).unwrap();
        let p = fiber_overlap(DipolePolarization::SigmaPlus, &lens, &mode).unwrap();
        let m = fiber_overlap(DipolePolarization::SigmaMinus, &lens, &mode).unwrap();
        assert!((p - m).abs() < 1e-12);
    }

    #[test]
    fn pi_does_not_couple() {
        let lens = LensSpec::with_na(0.8).unwrap();
        let mode = GaussianMode::new(0.7 * lens.rho_na()).unwrap();
        assert!(fiber_overlap(DipolePolarization::Pi, &lens, &mode).unwrap() < 1e-12);
        assert!(fiber_coupled_efficiency(DipolePolarization::Pi, 0.8).unwrap() < 1e-12);
    }

    #[test]
    fn efficiency_never_exceeds_collection() {
        let c = fiber_coupling(DipolePolarization::SigmaPlus, 0.9).unwrap();
        assert!(c.efficiency <= c.collection);
        assert!(c.overlap > 0.9 && c.overlap <= 1.0);
    }
}
