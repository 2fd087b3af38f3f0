use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::fields::PiecewisePolyField;
use crate::geometry::PolygonalMesh;
use crate::linalg::{CgOutcome, CsrMatrix};
use crate::math;
use crate::vem::element::ElementBase;
use crate::vem::{DofLayout, Projection, ScalarField, VectorField, VemError};

/// The order-`p` virtual element space on a mesh: DOF layout plus the
/// coefficient-independent local operators of every element. Built once and
/// shared across coefficient samples.
#[derive(Debug, Clone)]
pub struct VemSpace {
    mesh: Arc<PolygonalMesh>,
    p: usize,
    layout: DofLayout,
    elements: Vec<ElementBase>,
}

/// Assembled global system with homogeneous Dirichlet data eliminated
/// symmetrically: `a_ii` couples free DOFs, `a_ib` free-to-boundary.
#[derive(Debug)]
pub struct GlobalSystem {
    pub a_ii: CsrMatrix,
    pub a_ib: CsrMatrix,
    /// Load vector over the full DOF layout (before elimination).
    pub load: Vec<f64>,
}

/// A solved discrete problem: full DOF vector (Dirichlet entries included)
/// and solver diagnostics.
#[derive(Debug, Clone)]
pub struct VemSolution {
    pub mesh: Arc<PolygonalMesh>,
    pub p: usize,
    pub dofs: Vec<f64>,
    pub solver: CgOutcome,
}

pub const DEFAULT_SOLVER_TOL: f64 = 1e-10;

impl VemSpace {
    pub fn build(mesh: Arc<PolygonalMesh>, p: usize) -> Result<Self, VemError> {
        let layout = DofLayout::new(&mesh, p);
        let mut elements = Vec::with_capacity(mesh.n_elements());
        for e in 0..mesh.n_elements() {
            elements.push(ElementBase::build_for_mesh(&mesh, e, p)?);
        }
        Ok(Self {
            mesh,
            p,
            layout,
            elements,
        })
    }

    pub fn mesh(&self) -> &Arc<PolygonalMesh> {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn element_base(&self, e: usize) -> &ElementBase {
        &self.elements[e]
    }

    /// Assembles the stiffness matrix for `alpha` and the load for `f`,
    /// eliminating homogeneous Dirichlet DOFs symmetrically.
    pub fn assemble(
        &self,
        alpha: &dyn ScalarField,
        f: &dyn ScalarField,
    ) -> Result<GlobalSystem, VemError> {
        let (a_ii, a_ib) = self.assemble_matrix(alpha)?;
        Ok(GlobalSystem {
            a_ii,
            a_ib,
            load: self.load_vector(f),
        })
    }

    /// Assembles only the stiffness part: the free-free block and the
    /// free-boundary coupling.
    pub fn assemble_matrix(
        &self,
        alpha: &dyn ScalarField,
    ) -> Result<(CsrMatrix, CsrMatrix), VemError> {
        let n_total = self.layout.total();
        let n_free = self.layout.n_free();
        let mut ii: Vec<(usize, usize, f64)> = Vec::new();
        let mut ib: Vec<(usize, usize, f64)> = Vec::new();
        for (e, base) in self.elements.iter().enumerate() {
            let (_, _, a_local) = base.weight(alpha, e)?;
            let map = self.layout.local_to_global(e);
            for (r, &gr) in map.iter().enumerate() {
                let Some(fr) = self.layout.free_index(gr) else {
                    continue;
                };
                for (s, &gs) in map.iter().enumerate() {
                    let v = a_local[(r, s)];
                    if v == 0.0 {
                        continue;
                    }
                    match self.layout.free_index(gs) {
                        Some(fs) => ii.push((fr, fs, v)),
                        None => ib.push((fr, boundary_index(&self.layout, gs), v)),
                    }
                }
            }
        }
        let n_bdry = n_total - n_free;
        Ok((
            CsrMatrix::from_triplets(n_free, n_free, &ii),
            CsrMatrix::from_triplets(n_free, n_bdry, &ib),
        ))
    }

    /// Global load vector `r -> int (Pi^0 f)(Pi^0 phi_r)` over the full
    /// layout (no boundary elimination).
    pub fn load_vector(&self, f: &dyn ScalarField) -> Vec<f64> {
        let mut load = vec![0.0; self.layout.total()];
        for (e, base) in self.elements.iter().enumerate() {
            let local = base.load_vector(f);
            for (r, &g) in self.layout.local_to_global(e).iter().enumerate() {
                load[g] += local[r];
            }
        }
        load
    }

    /// Expands a free-DOF vector to the full layout with zero boundary
    /// values.
    pub fn scatter_free(&self, x: &[f64]) -> Vec<f64> {
        let mut dofs = vec![0.0; self.layout.total()];
        for g in 0..self.layout.total() {
            if let Some(fidx) = self.layout.free_index(g) {
                dofs[g] = x[fidx];
            }
        }
        dofs
    }

    /// Solves with homogeneous Dirichlet data.
    pub fn solve(&self, system: &GlobalSystem, rel_tol: f64) -> Result<VemSolution, VemError> {
        self.solve_with_boundary(system, None, rel_tol)
    }

    /// Solves with boundary DOFs set by interpolating `g`; used by the
    /// verification harnesses (patch tests with nonzero exact solutions).
    pub fn solve_lifted(
        &self,
        system: &GlobalSystem,
        g: &dyn ScalarField,
        rel_tol: f64,
    ) -> Result<VemSolution, VemError> {
        let positions = self.layout.node_positions(&self.mesh);
        let mut boundary = vec![0.0; self.layout.total() - self.layout.n_free()];
        for gdof in 0..self.layout.total() {
            if self.layout.is_dirichlet(gdof) {
                let x = positions[gdof].expect("Dirichlet DOFs are nodal");
                boundary[boundary_index(&self.layout, gdof)] = g.eval(x);
            }
        }
        self.solve_with_boundary(system, Some(&boundary), rel_tol)
    }

    fn solve_with_boundary(
        &self,
        system: &GlobalSystem,
        boundary: Option<&[f64]>,
        rel_tol: f64,
    ) -> Result<VemSolution, VemError> {
        let mut rhs: Vec<f64> = Vec::with_capacity(self.layout.n_free());
        for g in 0..self.layout.total() {
            if self.layout.free_index(g).is_some() {
                rhs.push(system.load[g]);
            }
        }
        if let Some(gb) = boundary {
            let correction = system.a_ib.matvec(gb);
            for (r, c) in rhs.iter_mut().zip(correction.iter()) {
                *r -= c;
            }
        }
        let (x, outcome) = system
            .a_ii
            .cg_solve(&rhs, rel_tol)
            .map_err(VemError::SolverDiverged)?;
        let mut dofs = vec![0.0; self.layout.total()];
        for g in 0..self.layout.total() {
            match self.layout.free_index(g) {
                Some(f) => dofs[g] = x[f],
                None => {
                    if let Some(gb) = boundary {
                        dofs[g] = gb[boundary_index(&self.layout, g)];
                    }
                }
            }
        }
        Ok(VemSolution {
            mesh: self.mesh.clone(),
            p: self.p,
            dofs,
            solver: outcome,
        })
    }

    /// DOF interpolant of a smooth function (point values plus moments).
    pub fn interpolate(&self, f: &dyn ScalarField) -> Vec<f64> {
        let mut dofs = vec![0.0; self.layout.total()];
        for (e, base) in self.elements.iter().enumerate() {
            let local = base.interpolate(f);
            for (r, &g) in self.layout.local_to_global(e).iter().enumerate() {
                dofs[g] = local[r];
            }
        }
        dofs
    }

    /// Per-element polynomial projection of a solved (or any) DOF vector.
    pub fn project_dofs(&self, dofs: &[f64], which: Projection) -> PiecewisePolyField {
        assert_eq!(dofs.len(), self.layout.total());
        let n_p = crate::vem::basis::monomial_count(self.p);
        let mut coeffs = vec![0.0; self.mesh.n_elements() * n_p];
        let mut local = Vec::new();
        for (e, base) in self.elements.iter().enumerate() {
            let map = self.layout.local_to_global(e);
            local.clear();
            local.extend(map.iter().map(|&g| dofs[g]));
            let star = match which {
                Projection::Energy => &base.pi_nabla_star,
                Projection::L2 => &base.pi0_star,
            };
            let c = star.matvec(&local);
            coeffs[e * n_p..(e + 1) * n_p].copy_from_slice(&c);
        }
        PiecewisePolyField::from_raw(self.mesh.clone(), self.p, coeffs)
    }

    /// Polynomial projection of a solution.
    pub fn project(&self, solution: &VemSolution, which: Projection) -> PiecewisePolyField {
        self.project_dofs(&solution.dofs, which)
    }

    /// Discretization errors against a known exact solution: the broken H1
    /// seminorm of `grad u_ex - grad (Pi^nabla u_h)` and the L2 norm of
    /// `u_ex - Pi^0 u_h`.
    pub fn error_norms(
        &self,
        solution: &VemSolution,
        exact: &dyn ScalarField,
        exact_gradient: &dyn VectorField,
    ) -> (f64, f64) {
        let energy = self.project(solution, Projection::Energy);
        let l2 = self.project(solution, Projection::L2);
        let mut h1_sq = 0.0;
        let mut l2_sq = 0.0;
        for (e, base) in self.elements.iter().enumerate() {
            let ce = energy.element_coeffs(e);
            let cl = l2.element_coeffs(e);
            let (dx, dy) = base.basis.gradient_coefficients(ce);
            let rule = &base.quadrature;
            for q in 0..rule.rule.points.len() {
                let x = rule.rule.points[q];
                let w = rule.rule.weights[q];
                let mv = &rule.values[q];
                let g_exact = exact_gradient.eval(x);
                let mut gx = 0.0;
                let mut gy = 0.0;
                let mut val = 0.0;
                for i in 0..mv.len() {
                    gx += dx[i] * mv[i];
                    gy += dy[i] * mv[i];
                    val += cl[i] * mv[i];
                }
                let ex = g_exact[0] - gx;
                let ey = g_exact[1] - gy;
                h1_sq += w * (ex * ex + ey * ey);
                let d = exact.eval(x) - val;
                l2_sq += w * d * d;
            }
        }
        (math::sqrt(h1_sq), math::sqrt(l2_sq))
    }

    /// The computable quantity of interest of a solution for weight `q`:
    /// `int (Pi^0 q)(Pi^0 u_h)`, evaluated through the L2 projection so the
    /// identity with [`qoi_field`] holds exactly.
    pub fn qoi(&self, solution: &VemSolution, q: &dyn ScalarField) -> f64 {
        qoi_field(&self.project(solution, Projection::L2), q)
    }

    /// Dimension of the global space.
    pub fn dof_count(&self) -> usize {
        self.layout.total()
    }
}

/// `int (Pi^0 q) v` for a piecewise polynomial `v`, computed elementwise
/// from the moments of `q`; linear in the field.
pub fn qoi_field(field: &PiecewisePolyField, q: &dyn ScalarField) -> f64 {
    let mesh = field.mesh();
    let basis_order = field.order();
    let degree = crate::vem::element::volume_quadrature_degree(basis_order);
    let mut acc = 0.0;
    for e in 0..mesh.n_elements() {
        let verts = mesh.element_vertices(e);
        let basis = crate::vem::basis::ScaledMonomialBasis::new(
            basis_order,
            mesh.element_centroid(e),
            mesh.element_diameter(e),
        );
        let rule = crate::geometry::PolygonQuadrature::build(&verts, degree)
            .expect("field mesh was validated at construction");
        let coeffs = field.element_coeffs(e);
        let mut elem = 0.0;
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            elem += w * q.eval(*pt) * basis.eval_poly(coeffs, *pt);
        }
        acc += elem;
    }
    acc
}

fn boundary_index(layout: &DofLayout, g: usize) -> usize {
    layout
        .constrained_index(g)
        .expect("DOF is constrained")
}
