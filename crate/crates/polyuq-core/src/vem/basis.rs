use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::Point;

/// Number of monomials of total degree at most `p` in two variables.
pub const fn monomial_count(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Exponent pair of the monomial at `index` in graded lexicographic order:
/// `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...`.
pub fn monomial_exponents(index: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= index {
        d += 1;
    }
    let offset = index - d * (d + 1) / 2;
    (d - offset, offset)
}

/// Index of the monomial `x^a y^b` in graded lexicographic order.
pub fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// The scaled monomial basis of `P_p(E)`:
/// `m_i(x) = ((x - x_E) / h_E)^{a_i} ((y - y_E) / h_E)^{b_i}`,
/// graded-lex ordered, where `x_E` is the element centroid and `h_E` its
/// diameter.
#[derive(Debug, Clone)]
pub struct ScaledMonomialBasis {
    pub order: usize,
    pub centroid: Point,
    pub diameter: f64,
    exponents: Vec<(usize, usize)>,
}

impl ScaledMonomialBasis {
    pub fn new(order: usize, centroid: Point, diameter: f64) -> Self {
        let n = monomial_count(order);
        Self {
            order,
            centroid,
            diameter,
            exponents: (0..n).map(monomial_exponents).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self, i: usize) -> (usize, usize) {
        self.exponents[i]
    }

    #[inline]
    fn local(&self, x: Point) -> (f64, f64) {
        (
            (x[0] - self.centroid[0]) / self.diameter,
            (x[1] - self.centroid[1]) / self.diameter,
        )
    }

    /// Value of the `i`-th basis monomial at `x`.
    pub fn eval(&self, i: usize, x: Point) -> f64 {
        let (xi, eta) = self.local(x);
        let (a, b) = self.exponents[i];
        math::powi(xi, a as i32) * math::powi(eta, b as i32)
    }

    /// Values of all basis monomials at `x`.
    pub fn eval_all(&self, x: Point) -> Vec<f64> {
        let (xi, eta) = self.local(x);
        self.powers(xi, eta)
    }

    fn powers(&self, xi: f64, eta: f64) -> Vec<f64> {
        let mut pow_x = vec![1.0; self.order + 1];
        let mut pow_y = vec![1.0; self.order + 1];
        for k in 1..=self.order {
            pow_x[k] = pow_x[k - 1] * xi;
            pow_y[k] = pow_y[k - 1] * eta;
        }
        self.exponents
            .iter()
            .map(|&(a, b)| pow_x[a] * pow_y[b])
            .collect()
    }

    /// Gradient of the `i`-th basis monomial at `x`.
    pub fn grad(&self, i: usize, x: Point) -> [f64; 2] {
        let (xi, eta) = self.local(x);
        let (a, b) = self.exponents[i];
        let h = self.diameter;
        let gx = if a == 0 {
            0.0
        } else {
            a as f64 / h * math::powi(xi, a as i32 - 1) * math::powi(eta, b as i32)
        };
        let gy = if b == 0 {
            0.0
        } else {
            b as f64 / h * math::powi(xi, a as i32) * math::powi(eta, b as i32 - 1)
        };
        [gx, gy]
    }

    /// Gradients of all basis monomials at `x`, flattened as `[gx, gy]`
    /// pairs.
    pub fn grad_all(&self, x: Point) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.grad(i, x)).collect()
    }

    /// Expansion of the Laplacian of the `i`-th monomial in this basis:
    /// pairs `(index, coefficient)`. Empty below degree two.
    pub fn laplacian_coefficients(&self, i: usize) -> Vec<(usize, f64)> {
        let (a, b) = self.exponents[i];
        let h2 = self.diameter * self.diameter;
        let mut terms = Vec::new();
        if a >= 2 {
            terms.push((monomial_index(a - 2, b), (a * (a - 1)) as f64 / h2));
        }
        if b >= 2 {
            terms.push((monomial_index(a, b - 2), (b * (b - 1)) as f64 / h2));
        }
        terms
    }

    /// Coefficients of the x/y partial derivatives of a polynomial given by
    /// `coeffs` in this basis, expressed in the same basis (degree drops by
    /// one; trailing entries are zero).
    pub fn gradient_coefficients(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut dx = vec![0.0; n];
        let mut dy = vec![0.0; n];
        for i in 0..n.min(coeffs.len()) {
            let c = coeffs[i];
            if c == 0.0 {
                continue;
            }
            let (a, b) = self.exponents[i];
            if a > 0 {
                dx[monomial_index(a - 1, b)] += c * a as f64 / self.diameter;
            }
            if b > 0 {
                dy[monomial_index(a, b - 1)] += c * b as f64 / self.diameter;
            }
        }
        (dx, dy)
    }

    /// Evaluates the polynomial with the given coefficients at `x`.
    pub fn eval_poly(&self, coeffs: &[f64], x: Point) -> f64 {
        let vals = self.eval_all(x);
        coeffs.iter().zip(vals.iter()).map(|(c, m)| c * m).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let expect = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0)];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(monomial_exponents(i), e);
            assert_eq!(monomial_index(e.0, e.1), i);
        }
        assert_eq!(monomial_count(1), 3);
        assert_eq!(monomial_count(2), 6);
        assert_eq!(monomial_count(3), 10);
    }

    #[test]
    fn first_monomial_is_one_and_values_are_bounded() {
        let basis = ScaledMonomialBasis::new(3, [0.3, 0.7], 2.0);
        assert_eq!(basis.eval(0, [10.0, -4.0]), 1.0);
        // |m| <= 1 on the box of half-width h_E around the centroid
        for &x in &[[0.3 + 2.0, 0.7 - 2.0], [0.3 - 1.0, 0.7 + 0.5], [0.3, 0.7]] {
            for i in 0..basis.len() {
                assert!(basis.eval(i, x).abs() <= 1.0 + 1e-14);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let basis = ScaledMonomialBasis::new(3, [0.2, -0.1], 0.7);
        let x = [0.37, 0.11];
        let eps = 1e-6;
        for i in 0..basis.len() {
            let g = basis.grad(i, x);
            let fx = (basis.eval(i, [x[0] + eps, x[1]]) - basis.eval(i, [x[0] - eps, x[1]]))
                / (2.0 * eps);
            let fy = (basis.eval(i, [x[0], x[1] + eps]) - basis.eval(i, [x[0], x[1] - eps]))
                / (2.0 * eps);
            assert!((g[0] - fx).abs() < 1e-6 * (1.0 + fx.abs()));
            assert!((g[1] - fy).abs() < 1e-6 * (1.0 + fy.abs()));
        }
    }

    #[test]
    fn laplacian_expansion_matches_finite_differences() {
        let basis = ScaledMonomialBasis::new(3, [0.0, 0.0], 1.5);
        let x = [0.21, -0.33];
        let eps = 1e-4;
        for i in 0..basis.len() {
            let lap: f64 = basis
                .laplacian_coefficients(i)
                .iter()
                .map(|&(j, c)| c * basis.eval(j, x))
                .sum();
            let f0 = basis.eval(i, x);
            let fd = (basis.eval(i, [x[0] + eps, x[1]])
                + basis.eval(i, [x[0] - eps, x[1]])
                + basis.eval(i, [x[0], x[1] + eps])
                + basis.eval(i, [x[0], x[1] - eps])
                - 4.0 * f0)
                / (eps * eps);
            assert!((lap - fd).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn gradient_coefficients_consistent_with_pointwise_gradient() {
        let basis = ScaledMonomialBasis::new(2, [0.4, 0.6], 1.2);
        let coeffs = [0.3, -1.0, 2.0, 0.25, -0.5, 1.5];
        let (dx, dy) = basis.gradient_coefficients(&coeffs);
        let x = [0.9, 0.1];
        let mut gx = 0.0;
        let mut gy = 0.0;
        for i in 0..basis.len() {
            let g = basis.grad(i, x);
            gx += coeffs[i] * g[0];
            gy += coeffs[i] * g[1];
        }
        assert!((basis.eval_poly(&dx, x) - gx).abs() < 1e-13);
        assert!((basis.eval_poly(&dy, x) - gy).abs() < 1e-13);
    }
}
