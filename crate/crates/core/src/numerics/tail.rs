//! Deviation threshold for the martingale bounds on transition estimates.

use crate::error::{Error, Result};

/// Confidence-peeling base used by the interval procedure.
pub const PEELING_BASE: f64 = 1.1;

const ABS_TOL: f64 = 1e-9;
const BRACKET_LO: f64 = 1e-12;
const GROWTH: f64 = 4.0;

/// Left side of the defining inequality, `2 d^2 (1 + ceil(log_c(2n/t))_+) e^-t`.
pub fn tail_bound(n: u64, d: usize, c: f64, t: f64) -> f64 {
    let peel = ((2.0 * n as f64 / t).ln() / c.ln()).ceil().max(0.0);
    2.0 * (d as f64).powi(2) * (1.0 + peel) * (-t).exp()
}

/// `inf { t >= 0 : tail_bound(n, d, c, t) <= delta }`, by bisection.
///
/// The bound is non-increasing and right-continuous in `t`, so the returned
/// upper bracket always satisfies the inequality.
pub fn tail_threshold(n: u64, d: usize, delta: f64, c: f64) -> Result<f64> {
    if n < 2 || d < 2 || !(delta > 0.0 && delta < 1.0) || !(c > 1.0) {
        return Err(Error::Domain(format!(
            "tail_threshold needs n >= 2, d >= 2, delta in (0,1), c > 1; got n={n}, d={d}, delta={delta}, c={c}"
        )));
    }
    let holds = |t: f64| tail_bound(n, d, c, t) <= delta;

    let mut lo = BRACKET_LO;
    if holds(lo) {
        return Ok(lo);
    }
    let mut hi = (2.0 * (d as f64).powi(2) / delta).ln() + 1.0;
    while !holds(hi) {
        lo = hi;
        hi *= GROWTH;
    }
    while hi - lo > ABS_TOL {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn satisfies_and_is_tight() {
        for &(n, d, delta) in &[(1000u64, 2usize, 0.05), (10_000, 10, 0.01), (50, 3, 0.5)] {
            let t = tail_threshold(n, d, delta, PEELING_BASE).unwrap();
            assert!(tail_bound(n, d, PEELING_BASE, t + 1e-9) <= delta);
            assert!(tail_bound(n, d, PEELING_BASE, (t - 1e-6).max(0.0)) > delta);
        }
    }

    #[test]
    fn smaller_delta_needs_larger_threshold() {
        let a = tail_threshold(1000, 4, 0.01, PEELING_BASE).unwrap();
        let b = tail_threshold(1000, 4, 0.1, PEELING_BASE).unwrap();
        assert!(a >= b);
    }

    #[test]
    fn grows_slowly_with_d() {
        let small = tail_threshold(10_000, 10, 0.05, PEELING_BASE).unwrap();
        let large = tail_threshold(10_000, 100, 0.05, PEELING_BASE).unwrap();
        let ratio = large / small;
        assert!(ratio > 1.0 && ratio < 3.0, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(tail_threshold(1, 2, 0.1, 1.1).is_err());
        assert!(tail_threshold(10, 2, 1.0, 1.1).is_err());
        assert!(tail_threshold(10, 2, 0.1, 1.0).is_err());
    }
}
