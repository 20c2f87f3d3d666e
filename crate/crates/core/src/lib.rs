//! Landau-de Gennes model of a nematic liquid crystal outside a spherical
//! colloid of unit radius.
//!
//! The crate is organised bottom-up:
//!
//! * [`qtensor`] and [`eigen`]: algebra on symmetric traceless 3×3 tensors.
//! * [`quadrupole`]: the closed-form small-particle limit `Q0` and its
//!   Saturn-ring locus.
//! * [`grid`], [`ldg`]: the mapped exterior grid and the axisymmetric
//!   Landau-de Gennes energy minimiser.
//! * [`harmonic`]: the axisymmetric S²-harmonic map (angle field ψ) and
//!   its defect census.
//! * [`analysis`]: decay profiles, convergence studies, eigenvalue exchange.
//! * [`io`]: fixed-precision CSV emitters shared by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod axi;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod harmonic;
pub mod io;
pub mod ldg;
mod linalg;
mod newton;
pub mod qtensor;
pub mod quadrupole;

pub use axi::AxiTensor;
pub use error::{NematicError, Result};
pub use grid::ExteriorGrid;
pub use harmonic::{DefectCensus, FarField, PsiField};
pub use ldg::{AxiQField, SolveReport, StepSchedule};
pub use qtensor::{EigenSystem, Mat3, MaterialParams, QTensor};
pub use quadrupole::{QuadrupolarConfig, RingResult};
