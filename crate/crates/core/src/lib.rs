//! Total variation image decomposition as a projection onto the polar of a
//! norm's unit ball.
//!
//! * [`grid`]: discrete gradient, divergence, total variation and the
//!   mean-zero reduction on `n x n` images.
//! * [`polytope`]: gauge norms of symmetric polytopes, their duals and
//!   polars, and the vertex/edge orthogonality test that decides whether
//!   projections onto the dual ball are unique.
//! * [`solvers`]: exact 2D projection onto the dual ball, non-uniqueness
//!   witnesses, clamp projection and the projected subgradient method for the
//!   discrete decomposition problem.
//! * [`oracle`]: brute-force grid references for validation.
//! * [`io`]: text formats for images, fields and polytopes.
//! * [`experiment`]: the multi-start diameter study.

pub mod dual_norm;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod oracle;
pub mod polytope;
pub mod solvers;
pub mod vector;

pub use dual_norm::{tv_dual_norm, DualNormConfig, DualNormEstimate};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentRecord, ExperimentReport};
pub use grid::{divergence, field_sup_norm, gradient, mean_zero_split, tv, GridImage, VectorField};
pub use oracle::GridSearchSpec;
pub use polytope::{Halfspace, PolytopeNorm, WSet, WTriple};
pub use solvers::{
    clamp_project, project_onto_polar, tv_projected_subgradient, witness_from_triple, ArgminFace,
    NonUniqueInstance, SubgradientConfig, SubgradientRun,
};
