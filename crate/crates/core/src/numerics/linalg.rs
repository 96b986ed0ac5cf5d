//! Dense LU with partial pivoting and a few matrix norms.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::eigen::sym_eigenvalues;

/// Pivots below this magnitude are treated as exact zeros.
const PIVOT_EPS: f64 = 1e-13;

/// Row-pivoted LU factorization `P A = L U`, packed in one matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, lu[(r, k)].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pivot <= PIVOT_EPS * scale {
                return Err(Error::Singular { column: k, pivot });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let diag = lu[(k, k)];
            for r in (k + 1)..n {
                let factor = lu[(r, k)] / diag;
                lu[(r, k)] = factor;
                if factor != 0.0 {
                    for c in (k + 1)..n {
                        let u = lu[(k, c)];
                        lu[(r, c)] -= factor * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.lu.nrows();
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.lu.nrows();
        let mut inv = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = DVector::zeros(n);
            e[c] = 1.0;
            inv.set_column(c, &self.solve(&e));
        }
        inv
    }
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::Domain(format!(
            "right-hand side has length {} for a {}x{} system",
            b.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(Lu::new(a)?.inverse())
}

/// Largest absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    max_abs(&(a - a.transpose()))
}

pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Spectral norm of a square matrix, `sqrt(lambda_max(A^T A))`.
pub fn spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    let gram = symmetrize(&(a.transpose() * a));
    let top = sym_eigenvalues(&gram)?.first().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}
