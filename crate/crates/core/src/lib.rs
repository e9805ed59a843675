//! Spectral analysis of layered divergence-form operators `-div(c(y) grad)`.
//!
//! The operator splits into one-dimensional fiber problems indexed by the
//! cross-section modes. This crate solves those fibers, classifies their
//! eigenvalues into guided and non-guided sectors and measures how the
//! eigenfunctions distribute their mass.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bv_approx;
pub mod diagnostics;
pub mod error;
pub mod fiber;
pub mod io;
pub mod ode;
pub mod oracle;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod spectral_grid;

pub use bv_approx::{approximate_pc, eigenpair_convergence, ApproximationLadder, ConvergenceTable};
pub use diagnostics::{
    amplitude_ratios, amplitude_trace, concentration_ratio, diagnose, guided_decay_check, layer_mass, mass_floor_check,
    minimal_amplitude, AmplitudeTrace, DiagnoseOptions, DiagnosticsReport, Layer,
};
pub use error::{Error, Result};
pub use fiber::{
    eigenfunction, eigenpair, eigenvalue, propagate_pc, shoot_pruefer, spectrum_in_range, FiberEigenpair,
    GridSpec, PruferState, TransferMatrix2x2,
};
pub use io::{parse_profile, read_profile};
pub use oracle::{compare, fd_eigenvector, fd_spectrum, CompareReport};
pub use profile::{CelerityProfile, Interpolation, PiecewiseConstant, Preset, ProfileSummary, Representation, WellInterval};
pub use spectral_grid::{classify, enumerate, CrossSection, SectorLabel, SpectrumTable};
