//! Planar Bragg reflection waveguide (BRW) simulator and design toolkit.
//!
//! The crate models symmetric layered AlGaN waveguides: transfer-matrix
//! mode solving for TIR-like and Bragg-guided modes, quasi-phase-matching
//! analysis of three-wave interactions, and spectral-density / pair-flux
//! estimates for spontaneous parametric downconversion in a periodically
//! poled core. Two reference designs ship as presets: a
//! dispersion-engineered BRW (`brw-paper`) whose Bragg idler mode flattens
//! the pump-wavelength dependence of the phase mismatch, and a
//! conventional TIR waveguide (`conventional-paper`) used as the contrast
//! case.

pub mod error;
pub mod materials;
pub mod modes;
pub mod numeric;
pub mod phasematch;
pub mod spdc;
pub mod stack;

pub use error::{Error, Result};
pub use materials::{DispersionLaw, MaterialDb, MaterialModel, CONSTANTS};
pub use modes::{
    find_brw_mode, find_tir_modes, normalize_profile, FieldProfile, ModeFamily, ModeKind,
    ModeSolution, Parity, SolverOptions,
};
pub use stack::{
    bloch_analyze, layer_matrix, stack_matrix, BlochAnalysis, Layer, LayerStack, Polarization,
    Side, TransferMatrix,
};
