//! Order-`p` enhanced virtual element discretization of
//! `-div(alpha grad u) = f` with homogeneous Dirichlet data: local
//! projector matrices, stabilized stiffness, global assembly, solve, error
//! norms and the computable quantity of interest.
//!
//! Shape functions are never evaluated; everything is expressed through the
//! two computable projections onto `P_p(E)` — the energy projection fixed
//! by a boundary (`p = 1`) or volume (`p > 1`) mean, and the L2 projection
//! recovered from the enhancement constraint.

use core::fmt;

use crate::linalg::CgFailure;
use crate::Point;

pub mod basis;
mod dofs;
mod element;
mod space;

pub use basis::ScaledMonomialBasis;
pub use dofs::DofLayout;
pub use element::{volume_quadrature_degree, ElementBase, ElementOperators};
pub use space::{qoi_field, GlobalSystem, VemSolution, VemSpace, DEFAULT_SOLVER_TOL};

/// A scalar function of position: diffusion coefficients, sources, QoI
/// weights, exact solutions.
pub trait ScalarField: Sync {
    fn eval(&self, x: Point) -> f64;
}

impl<F> ScalarField for F
where
    F: Fn(Point) -> f64 + Sync,
{
    fn eval(&self, x: Point) -> f64 {
        self(x)
    }
}

/// A vector-valued function of position (exact gradients).
pub trait VectorField: Sync {
    fn eval(&self, x: Point) -> [f64; 2];
}

impl<F> VectorField for F
where
    F: Fn(Point) -> [f64; 2] + Sync,
{
    fn eval(&self, x: Point) -> [f64; 2] {
        self(x)
    }
}

/// Which computable projection of the virtual solution to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// The energy projection fixed by a mean condition.
    Energy,
    /// The L2 projection recovered from the enhancement constraint.
    L2,
}

/// Errors from element operator construction, assembly and solves.
#[derive(Debug)]
pub enum VemError {
    Geometry {
        element: usize,
        source: crate::geometry::GeometryError,
    },
    NonPositiveCoefficient {
        element: usize,
        point: Point,
        value: f64,
    },
    SingularProjector {
        element: usize,
    },
    SolverDiverged(CgFailure),
}

impl fmt::Display for VemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometry { element, source } => {
                write!(f, "element {element}: {source}")
            }
            Self::NonPositiveCoefficient {
                element,
                point,
                value,
            } => write!(
                f,
                "coefficient is not strictly positive on element {element}: value {value:.3e} at ({}, {})",
                point[0], point[1]
            ),
            Self::SingularProjector { element } => {
                write!(f, "projector system of element {element} is singular")
            }
            Self::SolverDiverged(fail) => write!(
                f,
                "conjugate gradients stopped after {} iterations at relative residual {:.3e}",
                fail.iterations, fail.relative_residual
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for VemError {}
