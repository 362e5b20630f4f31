//! Physical constants and the ⁴⁰Ca⁺ data table.
//!
//! CODATA 2018 exact/recommended values. Atomic data for Ca⁺ are the usual
//! literature numbers: P1/2 lifetime 7.1 ns (Γ/2π = 22.4 MHz), P1/2 → D3/2
//! branching about 6 %, Landé factors from LS coupling.

use core::f64::consts::PI;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Bohr magneton over h, in Hz per gauss.
pub const BOHR_MAGNETON_HZ_PER_GAUSS: f64 = 1.399_624_49e6;

/// Neutral ⁴⁰Ca atomic mass in u.
pub const CA40_ATOMIC_MASS_U: f64 = 39.962_590_863;

/// Mass of the singly charged ⁴⁰Ca⁺ ion.
pub const CA40_ION_MASS: f64 = CA40_ATOMIC_MASS_U * ATOMIC_MASS_UNIT - ELECTRON_MASS;

/// Default trap drive frequency (Hz).
pub const DEFAULT_RF_FREQUENCY: f64 = 25.8e6;

/// S1/2 - P1/2 transition.
pub const LAMBDA_COOLING: f64 = 396.959e-9;
/// D3/2 - P1/2 transition.
pub const LAMBDA_REPUMP: f64 = 866.214e-9;

/// Natural linewidth of P1/2 in rad/s.
pub const GAMMA_P: f64 = 2.0 * PI * 22.4e6;
/// Fraction of P1/2 decays that end in D3/2.
pub const BRANCHING_P_TO_D: f64 = 0.06;

pub const G_S12: f64 = 2.0;
pub const G_P12: f64 = 2.0 / 3.0;
pub const G_D32: f64 = 4.0 / 5.0;

pub const JOULES_PER_EV: f64 = ELEMENTARY_CHARGE;

pub fn ev(joules: f64) -> f64 {
    joules / JOULES_PER_EV
}

pub fn joules(ev: f64) -> f64 {
    ev * JOULES_PER_EV
}

pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

pub fn hertz(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}
