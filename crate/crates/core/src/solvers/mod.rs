//! Exact and iterative solvers for projections onto dual unit balls.

mod clamp;
mod polar_lp;
mod subgradient;
mod witness;

pub use clamp::clamp_project;
pub use polar_lp::{project_onto_polar, ArgminFace, FACE_TOL};
pub use subgradient::{tv_projected_subgradient, SubgradientConfig, SubgradientRun};
pub use witness::{witness_from_triple, NonUniqueInstance};
