//! Physical constants (CODATA 2018) and unit helpers.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub const PPM: f64 = 1e-6;
pub const MM: f64 = 1e-3;
pub const UM: f64 = 1e-6;
pub const NM: f64 = 1e-9;
pub const MHZ: f64 = 1e6;

/// Angular frequency (rad/s) to ordinary frequency (Hz).
#[inline]
pub fn to_hz(angular: f64) -> f64 {
    angular / (2.0 * PI)
}

/// Ordinary frequency (Hz) to angular frequency (rad/s).
#[inline]
pub fn from_hz(hz: f64) -> f64 {
    hz * 2.0 * PI
}
