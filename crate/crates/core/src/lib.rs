//! Reconstruction of structural temperature-difference fields from sparse
//! displacement/strain measurements.
//!
//! The forward model is linear thermoelasticity: K·u = f_ext + f_ΔT, where
//! the equivalent thermal load f_ΔT is linear in the nodal ΔT field. The
//! inverse problem minimizes a weighted least-squares sensor misfit by
//! steepest descent with Barzilai-Borwein steps; the gradient comes from one
//! adjoint solve per load case and can be regularized by a vertex-morphing
//! filter with sigmoid bound projection. k-nearest-neighbor and kriging
//! interpolators over point temperature samples serve as baselines.

pub mod cli;
pub mod error;
pub mod fem;
pub mod field;
pub mod interp;
pub mod inverse;
pub mod mesh;
pub mod optimize;
pub mod regularize;
pub mod scenario;
pub mod sensors;
pub mod util;
pub mod vtk;

pub use error::{Error, Result};
