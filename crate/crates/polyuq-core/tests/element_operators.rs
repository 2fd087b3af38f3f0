//! Local operator verification: frozen hand-derived matrices for the unit
//! square, projector reproduction of polynomials and stabilization
//! consistency on random convex polygons.

use polyuq_core::geometry::polygon::convex_hull;
use polyuq_core::linalg::Matrix;
use polyuq_core::stochastic::SampleStream;
use polyuq_core::vem::basis::{monomial_count, monomial_index};
use polyuq_core::vem::{ElementBase, ElementOperators};
use polyuq_core::Point;

const UNIT_SQUARE: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

fn ones(_: Point) -> f64 {
    1.0
}

/// Hand-assembled order-1 stiffness of the unit square with unit
/// coefficient.
///
/// With centroid scaling the monomial stiffness is
/// `diag(0, area/h^2, area/h^2) = diag(0, 1/2, 1/2)`. Solving the
/// projector system by hand gives, in terms of the sign patterns
/// `s1 = [-1, 1, 1, -1]`, `s2 = [-1, -1, 1, 1]`, `s3 = [1, -1, 1, -1]`:
/// consistency `(s1 s1^T + s2 s2^T) / 4`, stabilization `s3 s3^T / 4`,
/// hence `A = I - J/4` with `J` the all-ones matrix.
fn reference_square_stiffness() -> Matrix {
    let mut a = Matrix::identity(4);
    for i in 0..4 {
        for j in 0..4 {
            a[(i, j)] -= 0.25;
        }
    }
    a
}

#[test]
fn unit_square_p1_matches_hand_derived_stiffness() {
    let ops = ElementOperators::build_standalone(&UNIT_SQUARE, 1, &ones).unwrap();
    let expect = reference_square_stiffness();
    for i in 0..4 {
        for j in 0..4 {
            assert!(
                (ops.a_local[(i, j)] - expect[(i, j)]).abs() < 1e-13,
                "A[{i}][{j}] = {} vs {}",
                ops.a_local[(i, j)],
                expect[(i, j)]
            );
        }
    }
    // row sums vanish (constants are in the kernel)
    for i in 0..4 {
        let s: f64 = (0..4).map(|j| ops.a_local[(i, j)]).sum();
        assert!(s.abs() < 1e-13);
    }
    // the monomial stiffness against which the consistency term is built
    assert!((ops.k_alpha[(1, 1)] - 0.5).abs() < 1e-13);
    assert!((ops.k_alpha[(2, 2)] - 0.5).abs() < 1e-13);
    assert!(ops.k_alpha[(1, 2)].abs() < 1e-13);
    assert!((ops.alpha_bar - 1.0).abs() < 1e-13);
}

#[test]
fn unit_square_p1_energy_projection_of_boundary_x() {
    // DOFs (0, 1, 1, 0) represent u = x on the boundary; the projection is
    // x - 1/2 plus the boundary-mean constant 1/2 (hand-solved 2x2 system)
    let ops = ElementOperators::build_standalone(&UNIT_SQUARE, 1, &ones).unwrap();
    let c = ops.base.pi_nabla_star.matvec(&[0.0, 1.0, 1.0, 0.0]);
    let h = 2.0f64.sqrt();
    assert!((c[0] - 0.5).abs() < 1e-13, "constant part {}", c[0]);
    assert!((c[1] - h).abs() < 1e-13, "x-monomial coefficient {}", c[1]);
    assert!(c[2].abs() < 1e-13);
    // gradient of the projection is exactly (1, 0)
    let grad_coeff = c[1] / h;
    assert!((grad_coeff - 1.0).abs() < 1e-13);
}

#[test]
fn local_dimension_matches_formula() {
    for p in 1..=3usize {
        let ops = ElementOperators::build_standalone(&UNIT_SQUARE, p, &ones).unwrap();
        assert_eq!(ops.base.n_dofs, 4 * p + p * (p - 1) / 2);
    }
    // p = 2 on a quadrilateral: 9 local DOFs
    let ops = ElementOperators::build_standalone(&UNIT_SQUARE, 2, &ones).unwrap();
    assert_eq!(ops.base.n_dofs, 9);
}

fn random_convex_polygon(stream: &SampleStream, k: usize) -> Vec<Point> {
    for attempt in 0.. {
        let base = attempt * 1000;
        let n_pts = 6 + (stream.uniform01(0, k, base) * 7.0) as usize;
        let pts: Vec<Point> = (0..n_pts)
            .map(|i| {
                [
                    stream.uniform(1, k, base + 2 * i + 1, -1.0, 1.0),
                    stream.uniform(1, k, base + 2 * i + 2, -1.0, 1.0),
                ]
            })
            .collect();
        let hull = convex_hull(&pts);
        if hull.len() >= 3 {
            // shape-regular polygons only, matching the mesh assumptions
            // (vertex spacing and star-shapedness relative to the diameter)
            let diam = polyuq_core::geometry::polygon::diameter(&hull);
            let min_d = polyuq_core::geometry::polygon::min_vertex_distance(&hull);
            let area = polyuq_core::geometry::polygon::signed_area(&hull);
            if min_d > 0.1 * diam && area > 0.12 * diam * diam {
                return hull;
            }
        }
    }
    unreachable!()
}

#[test]
fn projectors_reproduce_monomials_on_random_convex_polygons() {
    let stream = SampleStream::new(2024, 4);
    for k in 0..100 {
        let poly = random_convex_polygon(&stream, k);
        for p in 1..=3usize {
            let base = ElementBase::build(&poly, p, k).unwrap();
            let n_p = monomial_count(p);
            for alpha in 0..n_p {
                // DOF vector of the monomial, via interpolation
                let basis = base.basis.clone();
                let dofs = base.interpolate(&move |x: Point| basis.eval(alpha, x));
                let c_energy = base.pi_nabla_star.matvec(&dofs);
                let c_l2 = base.pi0_star.matvec(&dofs);
                for i in 0..n_p {
                    let target = if i == alpha { 1.0 } else { 0.0 };
                    assert!(
                        (c_energy[i] - target).abs() < 1e-10,
                        "Pi-nabla p={p} poly={k} monomial={alpha}: {:?}",
                        c_energy
                    );
                    assert!(
                        (c_l2[i] - target).abs() < 1e-10,
                        "Pi0 p={p} poly={k} monomial={alpha}: {:?}",
                        c_l2
                    );
                }
            }
            assert!(base.projector_consistency_error() < 1e-10);
        }
    }
}

#[test]
fn stiffness_is_symmetric_psd_with_constant_kernel() {
    let stream = SampleStream::new(7, 9);
    let alpha = |x: Point| 1.5 + 0.5 * (3.0 * x[0]).sin() * (2.0 * x[1]).cos();
    for k in 0..40 {
        let poly = random_convex_polygon(&stream, k);
        for p in 1..=3usize {
            let ops = ElementOperators::build_standalone(&poly, p, &alpha).unwrap();
            let a = &ops.a_local;
            let scale = a.max_abs();
            assert!(a.max_asymmetry() <= 1e-12 * scale);
            let eigs = a.symmetric_eigenvalues();
            assert!(
                eigs[0] >= -1e-10 * scale,
                "negative eigenvalue {} (scale {scale})",
                eigs[0]
            );
            // constants lie in the kernel before boundary conditions
            let ones_dofs = ops.base.interpolate(&ones);
            let av = a.matvec(&ones_dofs);
            for v in av {
                assert!(v.abs() <= 1e-11 * scale.max(1.0));
            }
        }
    }
}

#[test]
fn stabilization_vanishes_on_polynomial_dof_vectors() {
    let stream = SampleStream::new(11, 3);
    for k in 0..40 {
        let poly = random_convex_polygon(&stream, k);
        for p in 1..=3usize {
            let base = ElementBase::build(&poly, p, k).unwrap();
            let n_p = monomial_count(p);
            for alpha in 0..n_p {
                let basis = base.basis.clone();
                let dofs = base.interpolate(&move |x: Point| basis.eval(alpha, x));
                // (I - D pi*) annihilates polynomial DOF vectors, so the
                // stabilization form is exactly zero on them
                let projected = base.pi_nabla_dof.matvec(&dofs);
                let mut residual: f64 = 0.0;
                for (d, pr) in dofs.iter().zip(projected.iter()) {
                    residual = residual.max((d - pr).abs());
                }
                assert!(residual < 1e-10, "p={p} poly={k} m={alpha}: {residual}");
                let s = base.s0.matvec(&dofs);
                let s_norm: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(s_norm < 1e-10);
            }
        }
    }
}

#[test]
fn projector_system_identity_g_pi_equals_b() {
    let stream = SampleStream::new(5, 1);
    for k in 0..20 {
        let poly = random_convex_polygon(&stream, k);
        for p in 1..=3usize {
            let base = ElementBase::build(&poly, p, k).unwrap();
            let lhs = base.g.matmul(&base.pi_nabla_star);
            let scale = base.b.max_abs().max(1.0);
            for i in 0..lhs.rows() {
                for j in 0..lhs.cols() {
                    assert!((lhs[(i, j)] - base.b[(i, j)]).abs() <= 1e-11 * scale);
                }
            }
        }
    }
}

#[test]
fn non_positive_coefficient_is_rejected() {
    let alpha = |x: Point| 1.0 - 3.0 * x[0]; // negative on part of the square
    let err = ElementOperators::build_standalone(&UNIT_SQUARE, 1, &alpha).unwrap_err();
    assert!(matches!(
        err,
        polyuq_core::vem::VemError::NonPositiveCoefficient { .. }
    ));
}

#[test]
fn moment_dofs_scale_like_means() {
    // the moment DOF of the constant function is the mean of the monomial
    let ops = ElementOperators::build_standalone(&UNIT_SQUARE, 2, &ones).unwrap();
    let dofs = ops.base.interpolate(&ones);
    // vertex and edge DOFs are 1; the single moment DOF is (1/|E|) int 1
    for (r, v) in dofs.iter().enumerate().take(8) {
        assert!((v - 1.0).abs() < 1e-13, "dof {r}");
    }
    assert!((dofs[8] - 1.0).abs() < 1e-13);
    let _ = monomial_index(0, 0);
}
