//! Symmetric eigenvalues by the cyclic Jacobi method.
//!
//! Jacobi rotations are slower than tridiagonal QR for large matrices but
//! give eigenvalues with small relative error, and the state spaces handled
//! here are a few hundred states at most.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::linalg::max_asymmetry;

pub const SYMMETRY_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in descending order.
pub fn sym_eigenvalues(s: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    let asym = max_asymmetry(s);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let n = s.nrows();
    let mut a = (s + s.transpose()) * 0.5;
    let frob = a.norm();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * frob * 1e-2 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
            }
        }
    }
    if !converged {
        // The last sweep may still have reached machine precision.
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].abs())
            .fold(0.0, f64::max);
        if off > 1e-12 * frob {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Apply the Jacobi rotation `J^T A J` zeroing entry `(p, q)`.
fn rotate(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
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
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}
