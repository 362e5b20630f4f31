//! Numerical core for modelling symmetric six-wire surface-electrode Paul traps.
//!
//! Everything here is `no_std` with `alloc`: electrode layouts, closed-form
//! gapless-plane fields, quadratic basis fits and voltage synthesis, secular
//! mode analysis, radial-plane trajectory integration and the modulated
//! 8-level optical Bloch solver. File formats, the CLI and thread-level
//! parallelism live in the `sixwire` companion crate.
//!
//! Units are SI throughout. Electron volts and MHz only appear in helper
//! conversions meant for reporting.

#![no_std]

extern crate alloc;

pub mod basis;
pub mod bloch;
pub mod constants;
pub mod dynamics;
pub mod fields;
pub mod geometry;
pub mod linalg;
mod roots;

pub use basis::{
    analyze_modes, fit_control_bases, fit_quadratic, infer_rf_amplitude, micromotion, solve_voltages,
    standard_bases, Frame, StandardBases,
    MicromotionResult, ModeAnalysis, PotentialBasis, SolveError, SymmetryClass, VoltageSet,
    VoltageSolution,
};
pub use bloch::{
    build_liouvillian, fit_lineshape, lineshape, repumper_scan, sensitivity, solve_modulated,
    BlochError, LaserParams, LineshapeFit, ModulatedSteadyState, ModulationModel,
};
pub use dynamics::{
    heating_to_spectral_density, integrate_trajectory, CollisionTrial, DynamicsError, LossCurve,
    Trajectory,
};
pub use fields::{
    find_rf_null, pseudopotential, trap_depth, unit_gradient, unit_hessian, unit_potential,
    FieldError, FieldModel, FieldPoint, OperatingPoint, TrapDepth,
};
pub use geometry::{
    reconstruct_six_wire, solve_heights, Electrode, ElectrodeLayout, GeometryError, Rect, Role,
    SixWireParams,
};
