use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{gauss_lobatto, PolygonQuadrature, PolygonalMesh};
use crate::linalg::Matrix;
use crate::math;
use crate::vem::basis::{monomial_count, ScaledMonomialBasis};
use crate::vem::{ScalarField, VemError};
use crate::Point;

/// Quadrature degree used for all element integrals of order `p`.
pub fn volume_quadrature_degree(p: usize) -> usize {
    2 * p + 2
}

/// Element quadrature with tabulated monomial values and gradients.
#[derive(Debug, Clone)]
pub struct TabulatedQuadrature {
    pub rule: PolygonQuadrature,
    /// `values[q][i]` = m_i at point q.
    pub values: Vec<Vec<f64>>,
    /// `gradients[q][i]` = grad m_i at point q.
    pub gradients: Vec<Vec<[f64; 2]>>,
}

/// The coefficient-independent part of the local virtual element operators
/// of one element: DOF geometry, projector matrices and monomial Gram
/// matrices. Weighting by a sampled diffusion coefficient is a cheap
/// per-sample step on top of this.
#[derive(Debug, Clone)]
pub struct ElementBase {
    pub basis: ScaledMonomialBasis,
    pub area: f64,
    pub n_dofs: usize,
    /// DOF values of the monomials, `N_E x n_p`.
    pub d: Matrix,
    /// Energy-projector system matrix (constant row replaced by the mean
    /// condition), `n_p x n_p`.
    pub g: Matrix,
    /// Energy-projector right-hand side in the same convention, `n_p x N_E`.
    pub b: Matrix,
    /// DOF -> monomial coefficients of the energy projection, `n_p x N_E`.
    pub pi_nabla_star: Matrix,
    /// DOF -> DOF form `D * pi_nabla_star`, `N_E x N_E`.
    pub pi_nabla_dof: Matrix,
    /// DOF -> monomial coefficients of the L2 projection, `n_p x N_E`.
    pub pi0_star: Matrix,
    /// Monomial mass matrix, `n_p x n_p`.
    pub h_mass: Matrix,
    /// Unweighted monomial stiffness matrix, `n_p x n_p`.
    pub g_stiff: Matrix,
    /// `(I - pi_nabla_dof)^T (I - pi_nabla_dof)`, the unscaled dofi-dofi
    /// stabilization.
    pub s0: Matrix,
    pub quadrature: TabulatedQuadrature,
    /// Positions of the vertex and edge DOF nodes (local order); moment
    /// DOFs carry no node.
    pub node_positions: Vec<Option<Point>>,
}

/// Local operators of one element for a given diffusion coefficient.
#[derive(Debug, Clone)]
pub struct ElementOperators {
    pub base: ElementBase,
    /// Monomial stiffness weighted by the coefficient, `n_p x n_p`.
    pub k_alpha: Matrix,
    /// Mean of the coefficient over the element.
    pub alpha_bar: f64,
    /// Stabilized local stiffness matrix, `N_E x N_E`.
    pub a_local: Matrix,
}

impl ElementBase {
    /// Builds the coefficient-independent operators for the polygon with
    /// the given counterclockwise `vertices` and space order `p`.
    pub fn build(vertices: &[Point], p: usize, element: usize) -> Result<Self, VemError> {
        assert!(p >= 1);
        let n_e = vertices.len();
        let n_p = monomial_count(p);
        let n_low = if p >= 2 { monomial_count(p - 2) } else { 0 };
        let n_dofs = n_e * p + p * (p - 1) / 2;
        debug_assert_eq!(n_low, p * (p - 1) / 2);

        let area = crate::geometry::polygon::signed_area(vertices);
        let centroid = crate::geometry::polygon::centroid(vertices);
        let diameter = crate::geometry::polygon::diameter(vertices);
        let basis = ScaledMonomialBasis::new(p, centroid, diameter);

        let rule = PolygonQuadrature::build(vertices, volume_quadrature_degree(p))
            .map_err(|source| VemError::Geometry { element, source })?;
        let values: Vec<Vec<f64>> = rule.points.iter().map(|&x| basis.eval_all(x)).collect();
        let gradients: Vec<Vec<[f64; 2]>> =
            rule.points.iter().map(|&x| basis.grad_all(x)).collect();

        // monomial mass and stiffness
        let mut h_mass = Matrix::zeros(n_p, n_p);
        let mut g_stiff = Matrix::zeros(n_p, n_p);
        for q in 0..rule.points.len() {
            let w = rule.weights[q];
            let mv = &values[q];
            let gv = &gradients[q];
            for i in 0..n_p {
                for j in i..n_p {
                    h_mass[(i, j)] += w * mv[i] * mv[j];
                    g_stiff[(i, j)] += w * (gv[i][0] * gv[j][0] + gv[i][1] * gv[j][1]);
                }
            }
        }
        for i in 0..n_p {
            for j in 0..i {
                h_mass[(i, j)] = h_mass[(j, i)];
                g_stiff[(i, j)] = g_stiff[(j, i)];
            }
        }

        // DOF node positions, local ordering: vertices, then per-edge
        // interior Gauss-Lobatto nodes from the smaller endpoint to the
        // larger (matching the global layout), then moments.
        let lobatto = gauss_lobatto(p + 1);
        let mut node_positions: Vec<Option<Point>> = Vec::with_capacity(n_dofs);
        for &v in vertices {
            node_positions.push(Some(v));
        }
        // Callers pass vertex loops; the global orientation of an edge is
        // decided by vertex ids, which the caller mirrors via `edge_flip`.
        // Built standalone (no mesh), edges run in loop order.
        for k in 0..n_e {
            let a = vertices[k];
            let b = vertices[(k + 1) % n_e];
            for j in 0..p.saturating_sub(1) {
                let t = lobatto[j + 1].0;
                let s = 0.5 * (t + 1.0);
                node_positions.push(Some([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]));
            }
        }
        for _ in 0..n_low {
            node_positions.push(None);
        }

        // D matrix: DOF values of monomials
        let mut d = Matrix::zeros(n_dofs, n_p);
        for (r, pos) in node_positions.iter().enumerate() {
            if let Some(x) = pos {
                let mv = basis.eval_all(*x);
                d.row_mut(r).copy_from_slice(&mv);
            }
        }
        for m in 0..n_low {
            let r = n_e * p + m;
            for i in 0..n_p {
                d[(r, i)] = h_mass[(m, i)] / area;
            }
        }

        // B matrix: boundary fluxes plus interior Laplacian moments
        let mut b = Matrix::zeros(n_p, n_dofs);
        let perimeter: f64 = (0..n_e)
            .map(|k| {
                crate::geometry::polygon::distance(vertices[k], vertices[(k + 1) % n_e])
            })
            .sum();
        for k in 0..n_e {
            let pa = vertices[k];
            let pb = vertices[(k + 1) % n_e];
            let len = crate::geometry::polygon::distance(pa, pb);
            let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
            // Lobatto node i of this edge: local DOF and position
            for (i, &(t, w)) in lobatto.iter().enumerate() {
                let local = if i == 0 {
                    k
                } else if i == p {
                    (k + 1) % n_e
                } else {
                    n_e + k * (p - 1) + (i - 1)
                };
                let s = 0.5 * (t + 1.0);
                let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                let wq = 0.5 * len * w;
                for alpha in 1..n_p {
                    let g = basis.grad(alpha, x);
                    b[(alpha, local)] += wq * (g[0] * normal[0] + g[1] * normal[1]);
                }
                if p == 1 {
                    // constant fixed by the boundary mean
                    b[(0, local)] += wq / perimeter;
                }
            }
        }
        for alpha in 1..n_p {
            for (idx, c) in basis.laplacian_coefficients(alpha) {
                // moment DOFs store (1/|E|) int m_idx phi
                b[(alpha, n_e * p + idx)] -= c * area;
            }
        }
        if p > 1 {
            // constant fixed by the volume mean: the first moment DOF
            b[(0, n_e * p)] = 1.0;
        }

        // G matrix with the constant row replaced by the matching mean
        let mut g = g_stiff.clone();
        if p == 1 {
            // boundary mean of each monomial
            for beta in 0..n_p {
                let mut mean = 0.0;
                for k in 0..n_e {
                    let pa = vertices[k];
                    let pb = vertices[(k + 1) % n_e];
                    let len = crate::geometry::polygon::distance(pa, pb);
                    for &(t, w) in &lobatto {
                        let s = 0.5 * (t + 1.0);
                        let x = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                        mean += 0.5 * len * w * basis.eval(beta, x);
                    }
                }
                g[(0, beta)] = mean / perimeter;
            }
        } else {
            for beta in 0..n_p {
                g[(0, beta)] = h_mass[(0, beta)] / area;
            }
        }

        let pi_nabla_star = g
            .lu_solve(&b)
            .ok_or(VemError::SingularProjector { element })?;
        let pi_nabla_dof = d.matmul(&pi_nabla_star);

        let mut eye_minus = Matrix::identity(n_dofs);
        eye_minus.add_scaled(-1.0, &pi_nabla_dof);
        let s0 = eye_minus.transpose_matmul(&eye_minus);

        // L2 projector: moments of degree <= p-2 are DOFs; the two top
        // degrees use the enhancement constraint, correcting the energy
        // projection by the part of the monomial seen by the moment DOFs.
        let hp = h_mass.matmul(&pi_nabla_star);
        let mut c = Matrix::zeros(n_p, n_dofs);
        for m in 0..n_low {
            c[(m, n_e * p + m)] = area;
        }
        if n_low > 0 {
            let mut h_low = Matrix::zeros(n_low, n_low);
            for i in 0..n_low {
                for j in 0..n_low {
                    h_low[(i, j)] = h_mass[(i, j)];
                }
            }
            for beta in n_low..n_p {
                let mut rhs = Matrix::zeros(n_low, 1);
                for i in 0..n_low {
                    rhs[(i, 0)] = h_mass[(i, beta)];
                }
                let dcoef = h_low
                    .cholesky_solve(&rhs)
                    .ok_or(VemError::SingularProjector { element })?;
                for r in 0..n_dofs {
                    let mut v = hp[(beta, r)];
                    for gamma in 0..n_low {
                        v += dcoef[(gamma, 0)] * (c[(gamma, r)] - hp[(gamma, r)]);
                    }
                    c[(beta, r)] = v;
                }
            }
        } else {
            for beta in 0..n_p {
                for r in 0..n_dofs {
                    c[(beta, r)] = hp[(beta, r)];
                }
            }
        }
        let pi0_star = h_mass
            .cholesky_solve(&c)
            .ok_or(VemError::SingularProjector { element })?;

        Ok(Self {
            basis,
            area,
            n_dofs,
            d,
            g,
            b,
            pi_nabla_star,
            pi_nabla_dof,
            pi0_star,
            h_mass,
            g_stiff,
            s0,
            quadrature: TabulatedQuadrature {
                rule,
                values,
                gradients,
            },
            node_positions,
        })
    }

    /// Builds the base operators for element `e` of a mesh, with edge DOF
    /// nodes oriented by global vertex ids so neighbours agree.
    pub fn build_for_mesh(mesh: &PolygonalMesh, e: usize, p: usize) -> Result<Self, VemError> {
        let loop_ = mesh.element(e);
        let verts = mesh.element_vertices(e);
        let mut base = Self::build(&verts, p, e)?;
        if p >= 2 {
            base.reorient_edges(loop_);
        }
        Ok(base)
    }

    /// Flips the interior edge-node ordering of edges whose loop direction
    /// runs from a larger to a smaller global vertex id, matching the
    /// global convention. Lobatto nodes are symmetric, so flipping permutes
    /// rows of `D` and the node list; all other matrices are rebuilt from
    /// scratch only if needed — instead we permute the DOF rows/columns.
    fn reorient_edges(&mut self, loop_: &[usize]) {
        let p = self.basis.order;
        let n_e = loop_.len();
        let per_edge = p - 1;
        if per_edge < 2 {
            return; // a single interior node is orientation-free
        }
        let mut perm: Vec<usize> = (0..self.n_dofs).collect();
        let mut changed = false;
        for k in 0..n_e {
            let a = loop_[k];
            let b = loop_[(k + 1) % n_e];
            if a > b {
                let base = n_e + k * per_edge;
                for j in 0..per_edge {
                    perm[base + j] = base + (per_edge - 1 - j);
                }
                changed = true;
            }
        }
        if !changed {
            return;
        }
        self.apply_dof_permutation(&perm);
    }

    fn apply_dof_permutation(&mut self, perm: &[usize]) {
        let n = self.n_dofs;
        let permute_rows = |m: &Matrix| -> Matrix {
            let mut out = Matrix::zeros(m.rows(), m.cols());
            for r in 0..n {
                out.row_mut(r).copy_from_slice(m.row(perm[r]));
            }
            out
        };
        let permute_cols = |m: &Matrix| -> Matrix {
            let mut out = Matrix::zeros(m.rows(), m.cols());
            for r in 0..m.rows() {
                for c in 0..n {
                    out[(r, c)] = m[(r, perm[c])];
                }
            }
            out
        };
        self.d = permute_rows(&self.d);
        self.b = permute_cols(&self.b);
        self.pi_nabla_star = permute_cols(&self.pi_nabla_star);
        self.pi0_star = permute_cols(&self.pi0_star);
        self.pi_nabla_dof = permute_cols(&permute_rows(&self.pi_nabla_dof));
        self.s0 = permute_cols(&permute_rows(&self.s0));
        let node_positions = core::mem::take(&mut self.node_positions);
        self.node_positions = perm.iter().map(|&r| node_positions[r]).collect();
    }

    /// Weights the base operators with a diffusion coefficient, producing
    /// the stabilized local stiffness. The coefficient must be strictly
    /// positive at every quadrature point.
    pub fn weight(
        &self,
        alpha: &dyn ScalarField,
        element: usize,
    ) -> Result<(Matrix, f64, Matrix), VemError> {
        let n_p = self.basis.len();
        let rule = &self.quadrature.rule;
        let mut k_alpha = Matrix::zeros(n_p, n_p);
        let mut alpha_int = 0.0;
        for q in 0..rule.points.len() {
            let a = alpha.eval(rule.points[q]);
            if !(a > 0.0) {
                return Err(VemError::NonPositiveCoefficient {
                    element,
                    point: rule.points[q],
                    value: a,
                });
            }
            let w = rule.weights[q] * a;
            alpha_int += rule.weights[q] * a;
            let gv = &self.quadrature.gradients[q];
            for i in 0..n_p {
                for j in i..n_p {
                    k_alpha[(i, j)] += w * (gv[i][0] * gv[j][0] + gv[i][1] * gv[j][1]);
                }
            }
        }
        for i in 0..n_p {
            for j in 0..i {
                k_alpha[(i, j)] = k_alpha[(j, i)];
            }
        }
        let alpha_bar = alpha_int / self.area;

        let mut a_local = self
            .pi_nabla_star
            .transpose_matmul(&k_alpha.matmul(&self.pi_nabla_star));
        a_local.add_scaled(alpha_bar, &self.s0);
        // enforce exact symmetry against quadrature roundoff
        for i in 0..self.n_dofs {
            for j in (i + 1)..self.n_dofs {
                let v = 0.5 * (a_local[(i, j)] + a_local[(j, i)]);
                a_local[(i, j)] = v;
                a_local[(j, i)] = v;
            }
        }
        Ok((k_alpha, alpha_bar, a_local))
    }

    /// Moments `int_E f m_i` of a source against the basis monomials.
    pub fn moments_of(&self, f: &dyn ScalarField) -> Vec<f64> {
        let n_p = self.basis.len();
        let rule = &self.quadrature.rule;
        let mut out = vec![0.0; n_p];
        for q in 0..rule.points.len() {
            let w = rule.weights[q] * f.eval(rule.points[q]);
            let mv = &self.quadrature.values[q];
            for i in 0..n_p {
                out[i] += w * mv[i];
            }
        }
        out
    }

    /// Local load vector `r -> int_E (Pi^0 f)(Pi^0 phi_r)`.
    pub fn load_vector(&self, f: &dyn ScalarField) -> Vec<f64> {
        let moments = self.moments_of(f);
        self.pi0_star.transpose_matvec(&moments)
    }

    /// DOF values of a smooth function: point values at the nodes and
    /// scaled moments for the interior DOFs.
    pub fn interpolate(&self, f: &dyn ScalarField) -> Vec<f64> {
        let p = self.basis.order;
        let n_low = p * (p - 1) / 2;
        let mut dofs = vec![0.0; self.n_dofs];
        for (r, pos) in self.node_positions.iter().enumerate() {
            if let Some(x) = pos {
                dofs[r] = f.eval(*x);
            }
        }
        if n_low > 0 {
            let moments = self.moments_of(f);
            for m in 0..n_low {
                dofs[self.n_dofs - n_low + m] = moments[m] / self.area;
            }
        }
        dofs
    }

    /// Largest deviation of `pi_nabla_star * D` from the identity; a
    /// direct check that the energy projection reproduces polynomials.
    pub fn projector_consistency_error(&self) -> f64 {
        let prod = self.pi_nabla_star.matmul(&self.d);
        let n = self.basis.len();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max(math::abs(prod[(i, j)] - target));
            }
        }
        err
    }
}

impl ElementOperators {
    /// Builds the complete local operator set for element `e` of `mesh`
    /// with diffusion coefficient `alpha`.
    pub fn build(
        mesh: &PolygonalMesh,
        e: usize,
        p: usize,
        alpha: &dyn ScalarField,
    ) -> Result<Self, VemError> {
        let base = ElementBase::build_for_mesh(mesh, e, p)?;
        Self::from_base(base, alpha, e)
    }

    /// Builds the operators for a standalone polygon (edges in loop order).
    pub fn build_standalone(
        vertices: &[Point],
        p: usize,
        alpha: &dyn ScalarField,
    ) -> Result<Self, VemError> {
        let base = ElementBase::build(vertices, p, 0)?;
        Self::from_base(base, alpha, 0)
    }

    pub fn from_base(
        base: ElementBase,
        alpha: &dyn ScalarField,
        element: usize,
    ) -> Result<Self, VemError> {
        let (k_alpha, alpha_bar, a_local) = base.weight(alpha, element)?;
        Ok(Self {
            base,
            k_alpha,
            alpha_bar,
            a_local,
        })
    }
}
