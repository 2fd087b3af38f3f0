use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Conjugate gradient convergence report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final relative residual `||b - A x|| / ||b||`.
    pub relative_residual: f64,
}

/// Conjugate gradient failure: the iteration cap was reached before the
/// requested tolerance.
#[derive(Debug, Clone)]
pub struct CgFailure {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Relative residual recorded every few iterations, most recent last.
    pub residual_history: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from unsorted triplets, summing duplicates.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; rows + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..rows {
            counts[i + 1] += counts[i];
        }
        let mut col_idx = vec![0usize; triplets.len()];
        let mut values = vec![0.0f64; triplets.len()];
        let mut next = counts.clone();
        for &(i, j, v) in triplets {
            let slot = next[i];
            col_idx[slot] = j;
            values[slot] = v;
            next[i] += 1;
        }
        // sort each row by column and merge duplicates
        let mut row_ptr = vec![0usize; rows + 1];
        let mut out_cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut out_vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..rows {
            scratch.clear();
            for k in counts[i]..counts[i + 1] {
                scratch.push((col_idx[k], values[k]));
            }
            scratch.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < scratch.len() {
                let c = scratch[k].0;
                let mut v = scratch[k].1;
                k += 1;
                while k < scratch.len() && scratch[k].0 == c {
                    v += scratch[k].1;
                    k += 1;
                }
                out_cols.push(c);
                out_vals.push(v);
            }
            row_ptr[i + 1] = out_cols.len();
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx: out_cols,
            values: out_vals,
        }
    }

    /// Builds the sparsity pattern only; values start at zero. Entries can
    /// then be accumulated with [`CsrMatrix::add_at`] without reallocation.
    pub fn pattern_from_pairs(rows: usize, cols: usize, pairs: &[(usize, usize)]) -> Self {
        let triplets: Vec<(usize, usize, f64)> =
            pairs.iter().map(|&(i, j)| (i, j, 0.0)).collect();
        Self::from_triplets(rows, cols, &triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn reset_values(&mut self) {
        for v in &mut self.values {
            *v = 0.0;
        }
    }

    /// Accumulates into an existing structural entry; panics if `(i, j)` is
    /// not part of the pattern.
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.values[lo + pos] += v,
            Err(_) => panic!("entry ({i}, {j}) outside the assembled pattern"),
        }
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for i in 0..self.rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            out[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows];
        for i in 0..self.rows.min(self.cols) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.values[k];
                }
            }
        }
        d
    }

    /// Jacobi-preconditioned conjugate gradients for a symmetric positive
    /// definite matrix. Iterates until `||b - A x|| <= rel_tol * ||b||` or
    /// the cap `10 sqrt(n) + 1000` is hit.
    pub fn cg_solve(&self, b: &[f64], rel_tol: f64) -> Result<(Vec<f64>, CgOutcome), CgFailure> {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let n = self.rows;
        let b_norm = math::sqrt(dot(b, b));
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok((
                x,
                CgOutcome {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let max_iter = (10.0 * math::sqrt(n as f64)) as usize + 1000;
        let inv_diag: Vec<f64> = self
            .diagonal()
            .iter()
            .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect();

        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        let mut history = Vec::new();

        for iter in 1..=max_iter {
            self.matvec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                // not SPD or fully converged in exact arithmetic
                let res = residual_norm(self, &x, b) / b_norm;
                if res <= rel_tol {
                    return Ok((
                        x,
                        CgOutcome {
                            iterations: iter - 1,
                            relative_residual: res,
                        },
                    ));
                }
                history.push(res);
                return Err(CgFailure {
                    iterations: iter - 1,
                    relative_residual: res,
                    residual_history: history,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let r_norm = math::sqrt(dot(&r, &r));
            if iter % 8 == 0 || r_norm <= rel_tol * b_norm {
                history.push(r_norm / b_norm);
                if history.len() > 64 {
                    history.remove(0);
                }
            }
            if r_norm <= rel_tol * b_norm {
                return Ok((
                    x,
                    CgOutcome {
                        iterations: iter,
                        relative_residual: r_norm / b_norm,
                    },
                ));
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let res = residual_norm(self, &x, b) / b_norm;
        history.push(res);
        Err(CgFailure {
            iterations: max_iter,
            relative_residual: res,
            residual_history: history,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let mut acc = 0.0;
    for i in 0..b.len() {
        let d = b[i] - ax[i];
        acc += d * d;
    }
    math::sqrt(acc)
}
