//! Constraint operators and constructive constants for Poincaré and Korn
//! type inequalities.
//!
//! The crate builds polynomial trial spaces on analytic balls or planar
//! triangle meshes, assembles the Gram matrices of the relevant bilinear
//! forms, represents every constraint operator (subset averages, affine and
//! rigid least-squares trace fits) as a matrix, and certifies that each
//! composed bound dominates the worst case over the trial space.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod operators;
pub mod poly;
pub mod polyspace;
pub mod verify;

pub use constants::{
    meyers_compose, paper_bound, sharp_constant, BoundCase, BoundInputs, ConstantEstimate, ConstantKind,
};
pub use error::{Error, Result};
pub use geometry::{BoundaryPortion, Domain, Region, Target};
pub use operators::{build_projection, e_inverse_norm, op_subtract, operator_norm, NormKind, ProjKind, ProjectionOp};
pub use polyspace::{Form, FormKind, GramMatrix, NullKind, NullSpaceBasis, PolySpace};
pub use verify::{BoundReport, CaseKind, CertifySetup};
