//! Polygonal meshes, nested refinement hierarchies, element geometry and
//! quadrature on polygons.

use alloc::vec::Vec;
use core::fmt;

mod hierarchy;
mod mesh;
pub mod polygon;
mod quadrature;
mod refine;

pub use hierarchy::{MeshHierarchy, Rectangle};
pub use mesh::{Edge, PolygonalMesh, DEFAULT_MIN_VERTEX_SPACING, VERTEX_MERGE_TOL};
pub use quadrature::{gauss_legendre, gauss_legendre_unit, gauss_lobatto, PolygonQuadrature};
pub use refine::refine_uniform;

/// Errors raised while building or refining meshes.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    EmptyMesh,
    DegenerateElement { element: usize },
    VertexIndexOutOfRange { element: usize, vertex: usize },
    NotCounterClockwise { element: usize },
    SelfIntersecting { element: usize },
    VertexSpacing { element: usize, ratio: f64 },
    NonManifoldEdge { vertices: (usize, usize), elements: Vec<usize> },
    NotStarShaped { vertex: usize },
    RefinementFailed { element: usize },
    InvalidHierarchyParameters,
    NonCommensurableDomain,
    HierarchyTooLarge,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyMesh => write!(f, "mesh has no elements"),
            Self::DegenerateElement { element } => {
                write!(f, "element {element} is degenerate")
            }
            Self::VertexIndexOutOfRange { element, vertex } => {
                write!(f, "element {element} references missing vertex {vertex}")
            }
            Self::NotCounterClockwise { element } => {
                write!(f, "element {element} is not counterclockwise")
            }
            Self::SelfIntersecting { element } => {
                write!(f, "element {element} has a self-intersecting boundary")
            }
            Self::VertexSpacing { element, ratio } => write!(
                f,
                "element {element}: vertex spacing {ratio:.3e} of the diameter is below the bound"
            ),
            Self::NonManifoldEdge { vertices, elements } => write!(
                f,
                "edge ({}, {}) is shared by more than two elements: {:?}",
                vertices.0, vertices.1, elements
            ),
            Self::NotStarShaped { vertex } => write!(
                f,
                "polygon is not star-shaped about its centroid (fan triangle at vertex {vertex} inverted)"
            ),
            Self::RefinementFailed { element } => write!(
                f,
                "element {element} cannot be split through its centroid (not star-shaped)"
            ),
            Self::InvalidHierarchyParameters => write!(f, "hierarchy needs at least one level and one cell"),
            Self::NonCommensurableDomain => write!(
                f,
                "domain sides do not carry an integer number of square cells"
            ),
            Self::HierarchyTooLarge => write!(f, "hierarchy exceeds the supported index range"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GeometryError {}
