use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::linalg::{inverse, max_abs};

pub const AXIOM_TOL: f64 = 1e-8;

/// Group inverse `A#` of `A = I - P` for an ergodic transition matrix `P`.
#[derive(Debug, Clone)]
pub struct GroupInverse {
    pub a_sharp: DMatrix<f64>,
    pub residuals: AxiomResiduals,
}

/// Max-entry residuals of the three defining identities, plus the
/// projector identity `A A# = I - 1 pi` that ties `A#` to `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomResiduals {
    /// `|| A A# A - A ||`
    pub outer: f64,
    /// `|| A# A A# - A# ||`
    pub inner: f64,
    /// `|| A# A - A A# ||`
    pub commute: f64,
    /// `|| A A# - (I - 1 pi) ||`
    pub projector: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.outer.max(self.inner).max(self.commute)
    }
}

/// Compute the group inverse of `I - P` as `Z - 1 pi` with the fundamental
/// matrix `Z = (I - P + 1 pi)^-1`.
///
/// `pi` must be the stationary distribution of `p`.
pub fn group_inverse(p: &DMatrix<f64>, pi: &DVector<f64>) -> Result<GroupInverse> {
    let d = p.nrows();
    if !p.is_square() || pi.len() != d {
        return Err(Error::Domain(format!(
            "group_inverse: P is {}x{}, pi has length {}",
            p.nrows(),
            p.ncols(),
            pi.len()
        )));
    }
    let eye = DMatrix::<f64>::identity(d, d);
    let one_pi = DMatrix::from_fn(d, d, |_, j| pi[j]);
    let a = &eye - p;
    let z = inverse(&(&a + &one_pi))?;
    let a_sharp = z - &one_pi;
    let residuals = axiom_residuals(&a, &a_sharp, pi);
    if residuals.max() > AXIOM_TOL {
        return Err(Error::AxiomViolation(residuals.max()));
    }
    Ok(GroupInverse { a_sharp, residuals })
}

pub fn axiom_residuals(
    a: &DMatrix<f64>,
    a_sharp: &DMatrix<f64>,
    pi: &DVector<f64>,
) -> AxiomResiduals {
    let d = a.nrows();
    let aa = a * a_sharp;
    let projector = DMatrix::<f64>::identity(d, d) - DMatrix::from_fn(d, d, |_, j| pi[j]);
    AxiomResiduals {
        outer: max_abs(&(&aa * a - a)),
        inner: max_abs(&(a_sharp * a * a_sharp - a_sharp)),
        commute: max_abs(&(a_sharp * a - &aa)),
        projector: max_abs(&(&aa - projector)),
    }
}

/// `1/2 * max_j (A#_jj - min_i A#_ij)`, the sensitivity of the stationary
/// distribution to entrywise perturbations of `P`.
pub fn sensitivity(a_sharp: &DMatrix<f64>) -> f64 {
    let d = a_sharp.ncols();
    0.5 * (0..d)
        .map(|j| {
            let col_min = a_sharp.column(j).min();
            a_sharp[(j, j)] - col_min
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `A# = A / (p+q)^2` for the two-state chain, since `A^2 = (p+q) A`.
    fn two_state_closed_form(p: f64, q: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[p, -p, -q, q]) / (p + q).powi(2)
    }

    #[test]
    fn two_state_matches_closed_form() {
        let (p, q) = (0.1, 0.5);
        let pm = DMatrix::from_row_slice(2, 2, &[1.0 - p, p, q, 1.0 - q]);
        let pi = DVector::from_vec(vec![q / (p + q), p / (p + q)]);
        let gi = group_inverse(&pm, &pi).unwrap();
        let want = two_state_closed_form(p, q);
        assert!(max_abs(&(&gi.a_sharp - &want)) < 1e-12);
        assert!(gi.residuals.max() < 1e-12);
        assert!(gi.residuals.projector < 1e-12);
    }

    #[test]
    fn closed_form_satisfies_axioms() {
        let (p, q) = (0.1, 0.5);
        let a = DMatrix::from_row_slice(2, 2, &[p, -p, -q, q]);
        let pi = DVector::from_vec(vec![q / (p + q), p / (p + q)]);
        let r = axiom_residuals(&a, &two_state_closed_form(p, q), &pi);
        assert!(r.max() < 1e-14 && r.projector < 1e-14);
    }

    #[test]
    fn uniform_chain_is_idempotent_case() {
        let d = 5;
        let p = DMatrix::from_element(d, d, 1.0 / d as f64);
        let pi = DVector::from_element(d, 1.0 / d as f64);
        let gi = group_inverse(&p, &pi).unwrap();
        let want = DMatrix::<f64>::identity(d, d) - DMatrix::from_element(d, d, 1.0 / d as f64);
        assert!(max_abs(&(&gi.a_sharp - &want)) < 1e-14);
        // A# annihilates the constant vector and pi.
        assert!((&gi.a_sharp * DVector::from_element(d, 1.0)).amax() < 1e-14);
        assert!((pi.transpose() * &gi.a_sharp).amax() < 1e-14);
    }

    #[test]
    fn sensitivity_two_state() {
        let (p, q) = (0.1, 0.5);
        // Column 0: A#_00 - A#_10 = (p+q)/(p+q)^2; same for column 1.
        let k = sensitivity(&two_state_closed_form(p, q));
        assert!((k - 0.5 / (p + q)).abs() < 1e-14);
    }
}
