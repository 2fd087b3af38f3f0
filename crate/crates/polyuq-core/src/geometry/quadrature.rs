//! Quadrature: Gauss–Legendre and Gauss–Lobatto rules on `[-1, 1]`, and
//! polygon rules built by fan triangulation about the centroid with a
//! tensor rule collapsed onto each triangle.

use alloc::vec::Vec;

use crate::geometry::polygon;
use crate::geometry::GeometryError;
use crate::math;
use crate::Point;

/// Quadrature rule on a polygon: points in element coordinates, weights in
/// area units.
#[derive(Debug, Clone)]
pub struct PolygonQuadrature {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl PolygonQuadrature {
    /// Builds a rule exact for polynomials of total degree `degree` on the
    /// polygon with the given counterclockwise vertices. The polygon is fan
    /// triangulated about its area centroid; fails when a fan triangle is
    /// inverted (element not star-shaped about its centroid).
    pub fn build(vertices: &[Point], degree: usize) -> Result<Self, GeometryError> {
        let centroid = polygon::centroid(vertices);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let area2 = (b[0] - a[0]) * (centroid[1] - a[1]) - (b[1] - a[1]) * (centroid[0] - a[0]);
            if area2 <= 0.0 {
                return Err(GeometryError::NotStarShaped { vertex: i });
            }
            triangle_rule_into(a, b, centroid, area2 * 0.5, degree, &mut points, &mut weights);
        }
        Ok(Self { points, weights })
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrates `f` over the polygon.
    pub fn integrate(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += w * f(*p);
        }
        acc
    }
}

/// Appends a rule for the triangle `(a, b, c)` with the given area, exact to
/// `degree`, by collapsing a Gauss–Legendre tensor rule onto the triangle.
fn triangle_rule_into(
    a: Point,
    b: Point,
    c: Point,
    area: f64,
    degree: usize,
    points: &mut Vec<Point>,
    weights: &mut Vec<f64>,
) {
    // Map (u, v) in [0,1]^2 to barycentric (x, y) = (u, v(1-u)); the extra
    // factor (1-u) raises the u-degree by one.
    let nu = (degree + 3) / 2;
    let nv = (degree + 2) / 2;
    let gu = gauss_legendre_unit(nu.max(1));
    let gv = gauss_legendre_unit(nv.max(1));
    for &(u, wu) in &gu {
        for &(v, wv) in &gv {
            let l1 = u;
            let l2 = v * (1.0 - u);
            let l0 = 1.0 - l1 - l2;
            let x = l0 * a[0] + l1 * b[0] + l2 * c[0];
            let y = l0 * a[1] + l1 * b[1] + l2 * c[1];
            // jacobian of the collapse is (1-u); it integrates to the
            // reference triangle area 1/2, so the total weight is `area`
            points.push([x, y]);
            weights.push(2.0 * area * wu * wv * (1.0 - u));
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration from the Chebyshev estimate
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((-x, w)); // ascending node order
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN quadrature node"));
    rule
}

/// Gauss–Lobatto nodes and weights on `[-1, 1]` (`n >= 2` points, endpoints
/// included), exact for degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2);
    let m = n - 1;
    let mut nodes = Vec::with_capacity(n);
    nodes.push(-1.0);
    // interior nodes are the roots of P'_{n-1}
    for i in 1..m {
        let mut x = math::cos(core::f64::consts::PI * (m as f64 - i as f64) / m as f64);
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            // P''_m from the Legendre ODE: (1-x^2) P'' = 2x P' - m(m+1) P
            let ddp = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if math::abs(dx) < 1e-15 {
                break;
            }
        }
        nodes.push(x);
    }
    nodes.push(1.0);
    nodes
        .into_iter()
        .map(|x| {
            let (p, _) = legendre_with_derivative(m, x);
            (x, 2.0 / ((m * (m + 1)) as f64 * p * p))
        })
        .collect()
}

/// `(P_n(x), P'_n(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT_SQUARE: [Point; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..=6 {
            let rule = gauss_legendre(n);
            for d in 0..=(2 * n - 1) {
                let exact = if d % 2 == 0 {
                    2.0 / (d as f64 + 1.0)
                } else {
                    0.0
                };
                let approx: f64 = rule.iter().map(|&(x, w)| w * x.powi(d as i32)).sum();
                assert!(
                    (approx - exact).abs() < 1e-13,
                    "n={n} d={d}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gauss_lobatto_matches_known_rules() {
        let r2 = gauss_lobatto(2);
        assert!((r2[0].0 + 1.0).abs() < 1e-15 && (r2[0].1 - 1.0).abs() < 1e-15);
        let r3 = gauss_lobatto(3);
        assert!(r3[1].0.abs() < 1e-15);
        assert!((r3[1].1 - 4.0 / 3.0).abs() < 1e-14);
        assert!((r3[0].1 - 1.0 / 3.0).abs() < 1e-14);
        let r4 = gauss_lobatto(4);
        let inner = 1.0 / 5.0f64.sqrt();
        assert!((r4[1].0 + inner).abs() < 1e-14);
        assert!((r4[2].0 - inner).abs() < 1e-14);
        assert!((r4[1].1 - 5.0 / 6.0).abs() < 1e-14);
        assert!((r4[0].1 - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn unit_square_weights_sum_to_area() {
        let q = PolygonQuadrature::build(&UNIT_SQUARE, 0).unwrap();
        assert!((q.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_xy_moment() {
        let q = PolygonQuadrature::build(&UNIT_SQUARE, 3).unwrap();
        let m = q.integrate(|p| p[0] * p[1]);
        assert!((m - 0.25).abs() < 1e-14);
    }

    #[test]
    fn regular_pentagon_area() {
        let mut verts = Vec::new();
        for k in 0..5 {
            let t = 2.0 * core::f64::consts::PI * k as f64 / 5.0;
            verts.push([t.cos(), t.sin()]);
        }
        let q = PolygonQuadrature::build(&verts, 2).unwrap();
        let exact = 2.5 * (2.0 * core::f64::consts::PI / 5.0).sin();
        assert!((q.total_weight() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn monomial_exactness_on_square_and_triangle() {
        // oracle: analytic integrals; on [0,1]^2 ∫ x^a y^b = 1/((a+1)(b+1));
        // on the unit triangle ∫ x^a y^b = a! b! / (a+b+2)!
        fn factorial(n: usize) -> f64 {
            (1..=n).map(|v| v as f64).product()
        }
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for degree in 0..=8usize {
            let qs = PolygonQuadrature::build(&UNIT_SQUARE, degree).unwrap();
            let qt = PolygonQuadrature::build(&tri, degree).unwrap();
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let approx = qs.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    let exact = 1.0 / ((a as f64 + 1.0) * (b as f64 + 1.0));
                    assert!(
                        (approx - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                        "square deg {degree} a={a} b={b}"
                    );
                    let approx = qt.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!(
                        (approx - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                        "triangle deg {degree} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn inverted_fan_triangle_is_rejected() {
        // non-convex "bowtie-like" chevron whose centroid fan flips
        let bad = [[0.0, 0.0], [2.0, 0.0], [0.1, 0.1], [0.0, 2.0]];
        assert!(PolygonQuadrature::build(&bad, 2).is_err());
    }
}
