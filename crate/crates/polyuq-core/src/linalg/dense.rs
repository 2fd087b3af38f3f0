use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for j in 0..other.cols {
                    out_row[j] += a * orow[j];
                }
            }
        }
        out
    }

    /// `self^T * other`.
    pub fn transpose_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = self[(k, i)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for j in 0..other.cols {
                    out_row[j] += a * orow[j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `self * v` for a vector `v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += row[j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `self^T * v`.
    pub fn transpose_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..self.cols {
                out[j] += row[j] * v[i];
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn add_scaled(&mut self, s: f64, other: &Matrix) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(math::abs(v)))
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`; zero for square symmetric
    /// matrices.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                m = m.max(math::abs(self[(i, j)] - self[(j, i)]));
            }
        }
        m
    }

    /// Solves `self * X = B` for the matrix `X` by LU factorization with
    /// partial pivoting and row equilibration. Returns `None` when the
    /// matrix is numerically singular.
    pub fn lu_solve(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "square matrix required");
        assert_eq!(self.rows, b.rows, "dimension mismatch");
        let n = self.rows;
        let mut lu = self.clone();
        let mut x = b.clone();
        // scale rows to unit max magnitude; the solution is unchanged
        for i in 0..n {
            let m = lu.row(i).iter().fold(0.0f64, |m, &v| m.max(math::abs(v)));
            if m == 0.0 {
                return None;
            }
            let s = 1.0 / m;
            for v in lu.row_mut(i) {
                *v *= s;
            }
            for v in x.row_mut(i) {
                *v *= s;
            }
        }
        let mut piv: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut max_val = math::abs(lu[(k, k)]);
            let mut max_row = k;
            for i in (k + 1)..n {
                let v = math::abs(lu[(i, k)]);
                if v > max_val {
                    max_val = v;
                    max_row = i;
                }
            }
            if max_val == 0.0 {
                return None;
            }
            if max_row != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(max_row, j)];
                    lu[(max_row, j)] = t;
                }
                for j in 0..x.cols {
                    let t = x[(k, j)];
                    x[(k, j)] = x[(max_row, j)];
                    x[(max_row, j)] = t;
                }
                piv.swap(k, max_row);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    lu[(i, j)] -= f * lu[(k, j)];
                }
                for j in 0..x.cols {
                    x[(i, j)] -= f * x[(k, j)];
                }
            }
        }
        // back substitution
        for j in 0..x.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k in (i + 1)..n {
                    acc -= lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / lu[(i, i)];
            }
        }
        Some(x)
    }

    /// Solves `self * X = B` for symmetric positive definite `self` via
    /// Cholesky with symmetric diagonal equilibration and one step of
    /// iterative refinement. Returns `None` when the factorization breaks
    /// down.
    pub fn cholesky_solve(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        // symmetric Jacobi scaling evens out the decades between graded
        // basis functions
        let mut scale = vec![0.0f64; n];
        for i in 0..n {
            let d = self[(i, i)];
            if d <= 0.0 {
                return None;
            }
            scale[i] = 1.0 / math::sqrt(d);
        }
        let mut a = self.clone();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] *= scale[i] * scale[j];
            }
        }
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[(i, j)] = math::sqrt(s);
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        let solve_scaled = |rhs: &Matrix| -> Matrix {
            // rhs is in original coordinates; returns X in original ones
            let mut x = rhs.clone();
            for c in 0..x.cols {
                for i in 0..n {
                    x[(i, c)] *= scale[i];
                }
                for i in 0..n {
                    let mut acc = x[(i, c)];
                    for k in 0..i {
                        acc -= l[(i, k)] * x[(k, c)];
                    }
                    x[(i, c)] = acc / l[(i, i)];
                }
                for i in (0..n).rev() {
                    let mut acc = x[(i, c)];
                    for k in (i + 1)..n {
                        acc -= l[(k, i)] * x[(k, c)];
                    }
                    x[(i, c)] = acc / l[(i, i)];
                }
                for i in 0..n {
                    x[(i, c)] *= scale[i];
                }
            }
            x
        };
        let mut x = solve_scaled(b);
        // one refinement pass
        let mut residual = b.clone();
        residual.add_scaled(-1.0, &self.matmul(&x));
        let dx = solve_scaled(&residual);
        x.add_scaled(1.0, &dx);
        Some(x)
    }

    /// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
    /// Returned in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        // symmetrize to guard against roundoff asymmetry
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (a[(i, j)] + a[(j, i)]);
                a[(i, j)] = m;
                a[(j, i)] = m;
            }
        }
        let scale = a.max_abs();
        if scale == 0.0 {
            return vec![0.0; n];
        }
        for _sweep in 0..64 {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(math::abs(a[(i, j)]));
                }
            }
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if math::abs(apq) <= 1e-18 * scale {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + math::sqrt(1.0 + theta * theta))
                    } else {
                        -1.0 / (-theta + math::sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / math::sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
        eig.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
        eig
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}
