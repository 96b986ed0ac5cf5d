//! Validated transition matrices and their exact spectral quantities.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::linalg::{max_asymmetry, symmetrize, Lu};
use crate::numerics::sym_eigenvalues;

/// Row sums must equal one to this tolerance.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance on detailed balance `pi_i P_ij = pi_j P_ji`.
pub const REVERSIBILITY_TOL: f64 = 1e-10;
/// Non-unit eigenvalues must have modulus below `1 - ERGODIC_MARGIN`.
pub const ERGODIC_MARGIN: f64 = 1e-12;
/// Largest asymmetry of `Diag(pi)^1/2 P Diag(pi)^-1/2` accepted before it is
/// symmetrized.
pub const L_ASYMMETRY_TOL: f64 = 1e-8;

/// A row-stochastic transition matrix on states `0..d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    d: usize,
    p: DMatrix<f64>,
    pi_known: Option<DVector<f64>>,
}

impl ChainSpec {
    pub fn new(p: DMatrix<f64>, pi_known: Option<Vec<f64>>) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::NotSquare {
                rows: p.nrows(),
                cols: p.ncols(),
            });
        }
        let d = p.nrows();
        if d < 2 {
            return Err(Error::TooSmall(d));
        }
        for i in 0..d {
            let row = p.row(i);
            if let Some(j) = (0..d).find(|&j| !(row[j] >= 0.0 && row[j] <= 1.0 + ROW_SUM_TOL)) {
                return Err(Error::NonStochastic(format!(
                    "entry ({i},{j}) = {} is not a probability",
                    row[j]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NonStochastic(format!("row {i} sums to {sum}")));
            }
        }
        let pi_known = match pi_known {
            None => None,
            Some(pi) => {
                if pi.len() != d {
                    return Err(Error::Domain(format!(
                        "known stationary distribution has length {}, expected {d}",
                        pi.len()
                    )));
                }
                if pi.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::Domain(
                        "known stationary distribution must be strictly positive".into(),
                    ));
                }
                let sum: f64 = pi.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::Domain(format!(
                        "known stationary distribution sums to {sum}"
                    )));
                }
                Some(DVector::from_vec(pi))
            }
        };
        Ok(Self { d, p, pi_known })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn pi_known(&self) -> Option<&DVector<f64>> {
        self.pi_known.as_ref()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.d)
            .map(|i| self.p.row(i).iter().copied().collect())
            .collect()
    }

    /// Transition matrix of the chain observed every `a` steps.
    pub fn power(&self, a: u32) -> Result<ChainSpec> {
        if a == 0 {
            return Err(Error::Domain("matrix power must be at least 1".into()));
        }
        let mut out = self.p.clone();
        for _ in 1..a {
            out = &out * &self.p;
        }
        // Renormalize rows to absorb rounding drift in long products.
        for mut row in out.row_iter_mut() {
            let s: f64 = row.iter().sum();
            row /= s;
        }
        ChainSpec::new(
            out,
            self.pi_known.as_ref().map(|v| v.iter().copied().collect()),
        )
    }
}

/// Validate a raw row-major matrix as a transition matrix.
pub fn validate_chain(rows: &[Vec<f64>]) -> Result<ChainSpec> {
    let d = rows.len();
    if d < 2 {
        return Err(Error::TooSmall(d));
    }
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::NotSquare {
            rows: d,
            cols: r.len(),
        });
    }
    let p = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    ChainSpec::new(p, None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryDistribution {
    pub pi: Vec<f64>,
    pub pi_min: f64,
}

impl StationaryDistribution {
    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.pi)
    }
}

/// Solve `pi (I - P) = 0, sum(pi) = 1` with the last balance equation
/// replaced by the normalization.
pub fn stationary_vector(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let d = p.nrows();
    let mut a = (DMatrix::<f64>::identity(d, d) - p).transpose();
    a.row_mut(d - 1).fill(1.0);
    let mut b = DVector::zeros(d);
    b[d - 1] = 1.0;
    let lu = Lu::new(&a).map_err(|e| Error::NotErgodic(format!("stationary system: {e}")))?;
    Ok(lu.solve(&b))
}

pub fn stationary_distribution(chain: &ChainSpec) -> Result<StationaryDistribution> {
    let pi = stationary_vector(chain.p())?;
    if let Some(i) = (0..pi.len()).find(|&i| !(pi[i] > 0.0)) {
        return Err(Error::NotErgodic(format!(
            "stationary probability of state {i} is {}",
            pi[i]
        )));
    }
    let pi_min = pi.min();
    Ok(StationaryDistribution {
        pi: pi.iter().copied().collect(),
        pi_min,
    })
}

/// `max_ij |pi_i P_ij - pi_j P_ji|`.
pub fn detailed_balance_residual(p: &DMatrix<f64>, pi: &DVector<f64>) -> f64 {
    let d = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            worst = worst.max((pi[i] * p[(i, j)] - pi[j] * p[(j, i)]).abs());
        }
    }
    worst
}

/// `Diag(pi)^1/2 P Diag(pi)^-1/2`, similar to `P` and symmetric exactly when
/// `P` is reversible with respect to `pi`.
pub fn similarity_transform(p: &DMatrix<f64>, pi: &DVector<f64>) -> DMatrix<f64> {
    let d = p.nrows();
    DMatrix::from_fn(d, d, |i, j| (pi[i] / pi[j]).sqrt() * p[(i, j)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainFlags {
    pub ergodic: bool,
    pub reversible: bool,
}

pub fn check_ergodic_reversible(chain: &ChainSpec) -> ChainFlags {
    let pi = match stationary_distribution(chain) {
        Ok(s) => s.as_vector(),
        Err(_) => {
            return ChainFlags {
                ergodic: false,
                reversible: false,
            }
        }
    };
    let reversible = detailed_balance_residual(chain.p(), &pi) <= REVERSIBILITY_TOL;
    let second_modulus = if reversible {
        let l = symmetrize(&similarity_transform(chain.p(), &pi));
        match sym_eigenvalues(&l) {
            Ok(eig) => eig[1].max(eig[eig.len() - 1].abs()),
            Err(_) => f64::INFINITY,
        }
    } else {
        let mut moduli: Vec<f64> = chain
            .p()
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        moduli[1]
    };
    ChainFlags {
        ergodic: second_modulus < 1.0 - ERGODIC_MARGIN,
        reversible,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// Descending eigenvalues of `P`.
    pub eigenvalues: Vec<f64>,
    pub lambda_star: f64,
    pub gap: f64,
    pub t_relax: f64,
    pub pi_min: f64,
    pub tmix_lower: f64,
    pub tmix_upper: f64,
}

/// Exact spectrum of an ergodic reversible chain through its symmetric
/// similarity transform.
pub fn exact_spectral_summary(chain: &ChainSpec) -> Result<SpectralSummary> {
    let stat = stationary_distribution(chain)?;
    let pi = stat.as_vector();
    let l = similarity_transform(chain.p(), &pi);
    let asym = max_asymmetry(&l);
    if asym > L_ASYMMETRY_TOL {
        return Err(Error::NotReversible(asym));
    }
    let eigenvalues = sym_eigenvalues(&symmetrize(&l))?;
    let d = eigenvalues.len();
    let lambda_star = eigenvalues[1].max(eigenvalues[d - 1].abs());
    if lambda_star >= 1.0 - ERGODIC_MARGIN {
        return Err(Error::NotErgodic(format!(
            "second largest eigenvalue modulus {lambda_star}"
        )));
    }
    let gap = 1.0 - lambda_star;
    let (tmix_lower, tmix_upper) = mixing_time_bounds(gap, stat.pi_min)?;
    Ok(SpectralSummary {
        eigenvalues,
        lambda_star,
        gap,
        t_relax: 1.0 / gap,
        pi_min: stat.pi_min,
        tmix_lower,
        tmix_upper,
    })
}

/// Relaxation-time sandwich on the mixing time:
/// `(1/gap - 1) ln 2 <= t_mix <= (1/gap) ln(4/pi_min)`.
pub fn mixing_time_bounds(gap: f64, pi_min: f64) -> Result<(f64, f64)> {
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(Error::Domain(format!("gap must lie in (0, 1], got {gap}")));
    }
    if !(pi_min > 0.0 && pi_min <= 1.0) {
        return Err(Error::Domain(format!(
            "pi_min must lie in (0, 1], got {pi_min}"
        )));
    }
    let t_relax = 1.0 / gap;
    Ok((
        (t_relax - 1.0) * std::f64::consts::LN_2,
        t_relax * (4.0 / pi_min).ln(),
    ))
}
