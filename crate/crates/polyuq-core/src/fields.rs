//! Piecewise polynomial fields on a mesh — the computable representatives
//! of virtual element functions — with exact cross-level restriction,
//! arithmetic and broken norms. These are the substrate of the multilevel
//! telescoping sum: coefficients move across nested meshes by re-expanding
//! each parent polynomial in the child's scaled monomials, which is exact
//! linear algebra.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{MeshHierarchy, PolygonQuadrature, PolygonalMesh};
use crate::linalg::Matrix;
use crate::math;
use crate::vem::basis::{monomial_count, monomial_index, ScaledMonomialBasis};
use crate::vem::volume_quadrature_degree;
use crate::Point;

/// A field that is polynomial of degree `<= order` on every element,
/// stored as scaled-monomial coefficients per element.
#[derive(Debug, Clone)]
pub struct PiecewisePolyField {
    mesh: Arc<PolygonalMesh>,
    order: usize,
    /// `n_elements * n_p` coefficients, element-major.
    coeffs: Vec<f64>,
}

/// Errors from field arithmetic across meshes or orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    MeshMismatch,
    OrderMismatch,
    LevelOrder { field_level: usize, target_level: usize },
}

impl core::fmt::Display for FieldError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::MeshMismatch => write!(f, "fields live on different meshes"),
            Self::OrderMismatch => write!(f, "fields have different polynomial orders"),
            Self::LevelOrder {
                field_level,
                target_level,
            } => write!(
                f,
                "cannot restrict from level {field_level} to coarser level {target_level}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}

impl PiecewisePolyField {
    pub fn zero(mesh: Arc<PolygonalMesh>, order: usize) -> Self {
        let n = mesh.n_elements() * monomial_count(order);
        Self {
            mesh,
            order,
            coeffs: vec![0.0; n],
        }
    }

    pub fn from_raw(mesh: Arc<PolygonalMesh>, order: usize, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), mesh.n_elements() * monomial_count(order));
        Self {
            mesh,
            order,
            coeffs,
        }
    }

    pub fn mesh(&self) -> &Arc<PolygonalMesh> {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn element_coeffs(&self, e: usize) -> &[f64] {
        let n_p = monomial_count(self.order);
        &self.coeffs[e * n_p..(e + 1) * n_p]
    }

    pub fn element_coeffs_mut(&mut self, e: usize) -> &mut [f64] {
        let n_p = monomial_count(self.order);
        &mut self.coeffs[e * n_p..(e + 1) * n_p]
    }

    /// Value at a point of a given element.
    pub fn eval_in_element(&self, e: usize, x: Point) -> f64 {
        self.element_basis(e).eval_poly(self.element_coeffs(e), x)
    }

    pub fn element_basis(&self, e: usize) -> ScaledMonomialBasis {
        ScaledMonomialBasis::new(
            self.order,
            self.mesh.element_centroid(e),
            self.mesh.element_diameter(e),
        )
    }

    fn compatible(&self, other: &Self) -> Result<(), FieldError> {
        if !Arc::ptr_eq(&self.mesh, &other.mesh)
            && (self.mesh.n_elements() != other.mesh.n_elements()
                || self.mesh.n_vertices() != other.mesh.n_vertices())
        {
            return Err(FieldError::MeshMismatch);
        }
        if self.order != other.order {
            return Err(FieldError::OrderMismatch);
        }
        Ok(())
    }

    /// In-place `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) -> Result<(), FieldError> {
        self.compatible(x)?;
        for (s, v) in self.coeffs.iter_mut().zip(x.coeffs.iter()) {
            *s += a * v;
        }
        Ok(())
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// Coefficientwise linear combination `a * x + y`.
    pub fn linear_combination(a: f64, x: &Self, y: &Self) -> Result<Self, FieldError> {
        let mut out = y.clone();
        out.axpy(a, x)?;
        Ok(out)
    }

    /// Broken H1 seminorm, by exact quadrature of the elementwise gradient.
    pub fn broken_h1_seminorm(&self) -> f64 {
        math::sqrt(self.norms_squared().0)
    }

    /// L2 norm over the mesh.
    pub fn l2_norm(&self) -> f64 {
        math::sqrt(self.norms_squared().1)
    }

    /// Squared broken H1 seminorm and squared L2 norm in one sweep, summed
    /// in element order.
    pub fn norms_squared(&self) -> (f64, f64) {
        let gram = GramCache::new(&self.mesh, self.order);
        self.norms_squared_with(&gram)
    }

    /// As [`norms_squared`](Self::norms_squared) with precomputed element
    /// Gram matrices (the hot path of the estimators).
    pub fn norms_squared_with(&self, gram: &GramCache) -> (f64, f64) {
        let mut h1 = 0.0;
        let mut l2 = 0.0;
        for e in 0..self.mesh.n_elements() {
            let c = self.element_coeffs(e);
            let (eh1, el2) = gram.element_norms_squared(e, c);
            h1 += eh1;
            l2 += el2;
        }
        (h1, l2)
    }
}

/// Per-element monomial mass and stiffness matrices of a mesh, for norm
/// evaluation of fields without re-deriving quadrature per call.
#[derive(Debug, Clone)]
pub struct GramCache {
    order: usize,
    mass: Vec<Matrix>,
    stiffness: Vec<Matrix>,
}

impl GramCache {
    pub fn new(mesh: &PolygonalMesh, order: usize) -> Self {
        let n_p = monomial_count(order);
        let degree = volume_quadrature_degree(order);
        let mut mass = Vec::with_capacity(mesh.n_elements());
        let mut stiffness = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            let verts = mesh.element_vertices(e);
            let basis = ScaledMonomialBasis::new(
                order,
                mesh.element_centroid(e),
                mesh.element_diameter(e),
            );
            let rule = PolygonQuadrature::build(&verts, degree)
                .expect("mesh elements were validated at construction");
            let mut h = Matrix::zeros(n_p, n_p);
            let mut g = Matrix::zeros(n_p, n_p);
            for (pt, w) in rule.points.iter().zip(&rule.weights) {
                let mv = basis.eval_all(*pt);
                let gv = basis.grad_all(*pt);
                for i in 0..n_p {
                    for j in i..n_p {
                        h[(i, j)] += w * mv[i] * mv[j];
                        g[(i, j)] += w * (gv[i][0] * gv[j][0] + gv[i][1] * gv[j][1]);
                    }
                }
            }
            for i in 0..n_p {
                for j in 0..i {
                    h[(i, j)] = h[(j, i)];
                    g[(i, j)] = g[(j, i)];
                }
            }
            mass.push(h);
            stiffness.push(g);
        }
        Self {
            order,
            mass,
            stiffness,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn element_norms_squared(&self, e: usize, coeffs: &[f64]) -> (f64, f64) {
        let g = &self.stiffness[e];
        let h = &self.mass[e];
        let n = coeffs.len();
        let mut h1 = 0.0;
        let mut l2 = 0.0;
        for i in 0..n {
            let ci = coeffs[i];
            if ci == 0.0 {
                continue;
            }
            for j in 0..n {
                h1 += ci * g[(i, j)] * coeffs[j];
                l2 += ci * h[(i, j)] * coeffs[j];
            }
        }
        (h1, l2)
    }
}

/// Exact re-expansion of polynomials from the elements of one level onto
/// the elements of a finer nested level; a linear map per fine element.
#[derive(Debug, Clone)]
pub struct RestrictionTable {
    from: usize,
    to: usize,
    /// Parent element (on `from`) of each fine element.
    ancestors: Vec<usize>,
    /// Change-of-basis matrix per fine element.
    transforms: Vec<Matrix>,
}

impl RestrictionTable {
    /// Builds the restriction from level `from` to level `to >= from` of a
    /// hierarchy (0-based levels), for fields of the given `order`.
    pub fn new(
        hierarchy: &MeshHierarchy,
        from: usize,
        to: usize,
        order: usize,
    ) -> Result<Self, FieldError> {
        if to < from {
            return Err(FieldError::LevelOrder {
                field_level: from,
                target_level: to,
            });
        }
        let fine = hierarchy.mesh(to);
        let coarse = hierarchy.mesh(from);
        let mut ancestors = Vec::with_capacity(fine.n_elements());
        let mut transforms = Vec::with_capacity(fine.n_elements());
        for e in 0..fine.n_elements() {
            let parent = hierarchy.ancestor(to, e, from);
            ancestors.push(parent);
            let parent_basis = ScaledMonomialBasis::new(
                order,
                coarse.element_centroid(parent),
                coarse.element_diameter(parent),
            );
            let child_basis = ScaledMonomialBasis::new(
                order,
                fine.element_centroid(e),
                fine.element_diameter(e),
            );
            transforms.push(rebase_matrix(&parent_basis, &child_basis));
        }
        Ok(Self {
            from,
            to,
            ancestors,
            transforms,
        })
    }

    pub fn levels(&self) -> (usize, usize) {
        (self.from, self.to)
    }

    /// Applies the restriction to a field on the source level.
    pub fn apply(
        &self,
        field: &PiecewisePolyField,
        fine_mesh: Arc<PolygonalMesh>,
    ) -> PiecewisePolyField {
        let n_p = monomial_count(field.order());
        let mut out = vec![0.0; self.ancestors.len() * n_p];
        for (e, (&parent, t)) in self.ancestors.iter().zip(&self.transforms).enumerate() {
            let c = field.element_coeffs(parent);
            let rc = t.matvec(c);
            out[e * n_p..(e + 1) * n_p].copy_from_slice(&rc);
        }
        PiecewisePolyField::from_raw(fine_mesh, field.order(), out)
    }
}

/// Restricts a field defined on hierarchy level `field_level` to the finer
/// `target_level`, re-expanding each parent polynomial exactly in the fine
/// elements' bases.
pub fn restrict_to_fine(
    field: &PiecewisePolyField,
    hierarchy: &MeshHierarchy,
    field_level: usize,
    target_level: usize,
) -> Result<PiecewisePolyField, FieldError> {
    let table = RestrictionTable::new(hierarchy, field_level, target_level, field.order())?;
    Ok(table.apply(field, hierarchy.mesh(target_level).clone()))
}

/// Change-of-basis matrix taking coefficients in `parent` to coefficients
/// of the same polynomial in `child`: expands
/// `((x - x_P)/h_P)^a ((y - y_P)/h_P)^b` binomially around the child
/// centre.
fn rebase_matrix(parent: &ScaledMonomialBasis, child: &ScaledMonomialBasis) -> Matrix {
    let n_p = parent.len();
    let order = parent.order;
    let t = child.diameter / parent.diameter;
    let ax = (child.centroid[0] - parent.centroid[0]) / parent.diameter;
    let ay = (child.centroid[1] - parent.centroid[1]) / parent.diameter;
    // binomial table
    let mut binom = vec![vec![0.0f64; order + 1]; order + 1];
    for n in 0..=order {
        binom[n][0] = 1.0;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k <= n - 1 { binom[n - 1][k] } else { 0.0 };
        }
    }
    let mut out = Matrix::zeros(n_p, n_p);
    for src in 0..n_p {
        let (a, b) = parent.exponents(src);
        // ((ax + t xi)^a) ((ay + t eta)^b): expand in xi^i eta^j
        for i in 0..=a {
            let cx = binom[a][i] * math::powi(ax, (a - i) as i32) * math::powi(t, i as i32);
            for j in 0..=b {
                let cy = binom[b][j] * math::powi(ay, (b - j) as i32) * math::powi(t, j as i32);
                out[(monomial_index(i, j), src)] += cx * cy;
            }
        }
    }
    out
}
