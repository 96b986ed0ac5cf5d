//! Visit and doublet counts of a sample path, and the Laplace-smoothed
//! transition matrix built from them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::path::SamplePath;

#[derive(Debug, Clone, PartialEq)]
pub struct PathStatistics {
    pub n: usize,
    pub d: usize,
    /// Visits over the first `n - 1` positions, i.e. transitions out of each state.
    pub n_first: Vec<u64>,
    /// Visits over all `n` positions.
    pub n_full: Vec<u64>,
    /// `n_pair[i][j]` counts consecutive pairs `(i, j)`.
    pub n_pair: Vec<Vec<u64>>,
    /// Empirical doublet frequencies, `n_pair / (n - 1)`.
    pub m_hat: DMatrix<f64>,
    /// Empirical occupancy, `n_full / n`.
    pub pi_hat_emp: DVector<f64>,
}

pub fn collect_statistics(path: &SamplePath) -> Result<PathStatistics> {
    let n = path.len();
    if n < 2 {
        return Err(Error::PathTooShort { needed: 2, got: n });
    }
    let d = path.d();
    let states = path.states();
    let mut n_pair = vec![vec![0u64; d]; d];
    let mut n_first = vec![0u64; d];
    for w in states.windows(2) {
        n_pair[w[0]][w[1]] += 1;
        n_first[w[0]] += 1;
    }
    let mut n_full = n_first.clone();
    n_full[states[n - 1]] += 1;

    let pairs = (n - 1) as f64;
    let m_hat = DMatrix::from_fn(d, d, |i, j| n_pair[i][j] as f64 / pairs);
    let pi_hat_emp = DVector::from_fn(d, |i, _| n_full[i] as f64 / n as f64);
    Ok(PathStatistics {
        n,
        d,
        n_first,
        n_full,
        n_pair,
        m_hat,
        pi_hat_emp,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedTransitionEstimate {
    pub p_hat: DMatrix<f64>,
    pub alpha: f64,
}

/// `(N_ij + 1/d) / (N_i + 1)`: transition counts with pseudo-count `1/d`
/// added to every cell, so every entry is positive.
pub fn smoothed_transitions(stats: &PathStatistics) -> SmoothedTransitionEstimate {
    let d = stats.d;
    let alpha = 1.0 / d as f64;
    let p_hat = DMatrix::from_fn(d, d, |i, j| {
        (stats.n_pair[i][j] as f64 + alpha) / (stats.n_first[i] as f64 + d as f64 * alpha)
    });
    SmoothedTransitionEstimate { p_hat, alpha }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_ergodic_reversible, ChainSpec};
    use crate::family::ChainFamily;
    use crate::path::{simulate_path, Init};
    use proptest::prelude::*;

    #[test]
    fn hand_counted_alternating_path() {
        let p = SamplePath::new(2, vec![0, 1, 0, 1, 0]).unwrap();
        let s = collect_statistics(&p).unwrap();
        assert_eq!(s.n_pair, vec![vec![0, 2], vec![2, 0]]);
        assert_eq!(s.n_first, vec![2, 2]);
        assert_eq!(s.n_full, vec![3, 2]);
        assert_eq!(s.pi_hat_emp.as_slice(), &[0.6, 0.4]);
    }

    #[test]
    fn constant_path() {
        let s = collect_statistics(&SamplePath::new(2, vec![0, 0, 0]).unwrap()).unwrap();
        assert_eq!(
            s.m_hat,
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn smoothing_values() {
        // State 1 never left: pure prior.
        let s = collect_statistics(&SamplePath::new(2, vec![0, 0, 0, 0, 1]).unwrap()).unwrap();
        let est = smoothed_transitions(&s);
        assert_eq!(
            est.p_hat.row(1).iter().copied().collect::<Vec<_>>(),
            vec![0.5, 0.5]
        );
        // Row 0 has N_00 = 3, N_01 = 1, N_0 = 4.
        assert!((est.p_hat[(0, 0)] - 0.7).abs() < 1e-15);
        assert!((est.p_hat[(0, 1)] - 0.3).abs() < 1e-15);
        assert_eq!(est.alpha, 0.5);
    }

    #[test]
    fn smoothing_bias_shrinks_with_visits() {
        let chain = ChainFamily::TwoStateB { pibar: 0.2 }.build().unwrap();
        let mut prev = f64::INFINITY;
        for &n in &[100usize, 1_000, 10_000, 100_000] {
            let s = collect_statistics(&simulate_path(&chain, n, &Init::Stationary, 5).unwrap())
                .unwrap();
            let p_hat = smoothed_transitions(&s).p_hat;
            let mut worst = 0.0f64;
            let mut bound = 0.0f64;
            for i in 0..2 {
                let ni = s.n_first[i] as f64;
                for j in 0..2 {
                    let mle = s.n_pair[i][j] as f64 / ni;
                    worst = worst.max((p_hat[(i, j)] - mle).abs());
                    bound = bound.max(1.0 / (ni + 1.0));
                }
            }
            assert!(worst <= bound);
            assert!(worst < prev);
            prev = worst;
        }
    }

    fn arb_path() -> impl Strategy<Value = SamplePath> {
        (2usize..8).prop_flat_map(|d| {
            proptest::collection::vec(0..d, 2..300)
                .prop_map(move |s| SamplePath::new(d, s).unwrap())
        })
    }

    proptest! {
        #[test]
        fn count_conservation(path in arb_path()) {
            let s = collect_statistics(&path).unwrap();
            let n = path.len() as u64;
            prop_assert_eq!(s.n_pair.iter().flatten().sum::<u64>(), n - 1);
            prop_assert_eq!(s.n_first.iter().sum::<u64>(), n - 1);
            prop_assert_eq!(s.n_full.iter().sum::<u64>(), n);
            for i in 0..s.d {
                prop_assert_eq!(s.n_pair[i].iter().sum::<u64>(), s.n_first[i]);
                let row: f64 = s.m_hat.row(i).sum();
                prop_assert!((row - s.n_first[i] as f64 / (n - 1) as f64).abs() < 1e-12);
            }
            prop_assert!((s.m_hat.sum() - 1.0).abs() < 1e-12);
            prop_assert!((s.pi_hat_emp.sum() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn smoothed_is_an_ergodic_chain(path in arb_path()) {
            let est = smoothed_transitions(&collect_statistics(&path).unwrap());
            prop_assert!(est.p_hat.iter().all(|&x| x > 0.0));
            let chain = ChainSpec::new(est.p_hat, None).unwrap();
            prop_assert!(check_ergodic_reversible(&chain).ergodic);
        }
    }
}
