//! Physical constants and the GHz / angular-frequency boundary.
//!
//! Every public input and output quotes frequencies as ordinary frequencies in
//! GHz. Inside the crate all frequencies and rates are angular, in rad/s. The
//! factor `2π × 10⁹` is applied once, by [`ghz`] on the way in and [`to_ghz`]
//! on the way out.

use std::f64::consts::PI;

/// CODATA 2018 values (exact in the 2019 SI), truncated to 10 significant digits.
pub mod constants {
    /// Elementary charge, C.
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_150e-34;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Superconducting resistance quantum h / (4 e²), Ω.
    pub const RESISTANCE_QUANTUM: f64 = 6_453.201_865;

    /// Label carried in run provenance.
    pub const VERSION: &str = "CODATA-2018/10-digit";
}

/// Angular frequency (rad/s) from an ordinary frequency in GHz.
#[inline]
pub fn ghz(f: f64) -> f64 {
    2.0 * PI * 1e9 * f
}

/// Ordinary frequency in GHz from an angular frequency (rad/s).
#[inline]
pub fn to_ghz(w: f64) -> f64 {
    w / (2.0 * PI * 1e9)
}

/// Unit convention string recorded in every run.
pub const UNIT_CONVENTION: &str =
    "I/O: ordinary frequency in GHz (pulse width d likewise); internal: angular rad/s";
