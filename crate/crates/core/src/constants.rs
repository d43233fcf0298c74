//! Physical constants used across the toolkit (SI units).

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
