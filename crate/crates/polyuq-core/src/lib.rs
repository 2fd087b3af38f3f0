//! Virtual element solver for 2D elliptic problems on polygonal meshes, with
//! Monte Carlo and multilevel Monte Carlo estimators for problems whose
//! diffusion coefficient is a random field.
//!
//! The crate is organised around the pipeline
//!
//! * [`geometry`] — polygonal meshes, nested refinement hierarchies and
//!   quadrature on polygons;
//! * [`vem`] — the order-`p` enhanced virtual element discretization: local
//!   projector matrices, stabilized stiffness, assembly, solve, error norms
//!   and the computable quantity of interest;
//! * [`fields`] — piecewise polynomial fields on a mesh, with exact
//!   cross-level restriction and broken norms;
//! * [`stochastic`] — sampleable diffusion coefficient models with
//!   reproducible, counter-based sample streams;
//! * [`estimators`] — single-level and multilevel Monte Carlo estimators for
//!   the expected solution field and for linear quantities of interest.
//!
//! The crate is `no_std`-compatible (it requires `alloc`): disable the
//! default `std` feature and enable `libm` instead. File formats, the
//! experiment drivers and the command line live in the companion `polyuq`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("polyuq-core needs either the `std` or the `libm` feature");

extern crate alloc;

pub mod estimators;
pub mod exec;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub(crate) mod math;
pub mod stats;
pub mod stochastic;
pub mod vem;

pub use geometry::{MeshHierarchy, PolygonQuadrature, PolygonalMesh};
pub use vem::{DofLayout, ElementOperators, ScaledMonomialBasis, VemSolution};

/// A point in the plane, in the length units of the computational domain.
pub type Point = [f64; 2];
