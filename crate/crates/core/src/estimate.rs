//! Point estimators of the spectral gap and minimum stationary probability.
//!
//! * [`plugin_estimate`] symmetrizes the empirical `Diag(pi)^-1/2 M Diag(pi)^-1/2`
//!   and reads the gap off its spectrum.
//! * [`bootstrap_estimate`] applies the plug-in to the chain observed every
//!   `a = 1, 2, 4, ...` steps and stops once the skipped chain's gap is
//!   comfortably away from zero, then maps it back with `1 - (1 - g)^(1/a)`.
//! * [`theory_bounds`] evaluates the a-priori deviation bounds, which carry an
//!   unspecified absolute constant `C` and are therefore only indicative.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{sym_eigenvalues, symmetrize};
use crate::path::{skip_path, SamplePath};
use crate::stats::{collect_statistics, PathStatistics};

/// The skipped chain is accepted once its estimated gap exceeds this.
pub const BOOTSTRAP_THRESHOLD: f64 = 0.31;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PluginEstimate {
    pub gamma_hat: f64,
    pub pimin_hat: f64,
    /// Descending eigenvalues of the symmetrized estimate; empty if degenerate.
    pub eigenvalues_hat: Vec<f64>,
    /// Some state was never visited, so `gamma_hat` is set to 0.
    pub degenerate: bool,
}

/// Empirical `Diag(pi)^-1/2 M Diag(pi)^-1/2`, or `None` if a state is unvisited.
pub fn empirical_operator(stats: &PathStatistics) -> Option<DMatrix<f64>> {
    let pi = &stats.pi_hat_emp;
    if pi.iter().any(|&x| x == 0.0) {
        return None;
    }
    let d = stats.d;
    Some(DMatrix::from_fn(d, d, |i, j| {
        stats.m_hat[(i, j)] / (pi[i] * pi[j]).sqrt()
    }))
}

pub fn plugin_estimate(stats: &PathStatistics) -> Result<PluginEstimate> {
    let pimin_hat = stats.pi_hat_emp.min();
    let Some(l_hat) = empirical_operator(stats) else {
        return Ok(PluginEstimate {
            gamma_hat: 0.0,
            pimin_hat,
            eigenvalues_hat: Vec::new(),
            degenerate: true,
        });
    };
    let eig = sym_eigenvalues(&symmetrize(&l_hat))?;
    let lambda_star = eig[1].max(eig[eig.len() - 1].abs());
    Ok(PluginEstimate {
        gamma_hat: 1.0 - lambda_star.min(1.0),
        pimin_hat,
        eigenvalues_hat: eig,
        degenerate: false,
    })
}

pub fn plugin_from_path(path: &SamplePath) -> Result<PluginEstimate> {
    plugin_estimate(&collect_statistics(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapLevel {
    pub a: usize,
    pub gamma_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapEstimate {
    pub gamma_tilde: f64,
    /// Selected skip amount, a power of two.
    #[serde(rename = "A")]
    pub a: usize,
    pub per_level: Vec<BootstrapLevel>,
}

/// Largest power of two `a` with `floor(n / a) >= 2`.
fn max_skip(n: usize) -> usize {
    let mut a = 1usize;
    while n / (2 * a) >= 2 {
        a *= 2;
    }
    a
}

pub fn bootstrap_estimate(path: &SamplePath) -> Result<BootstrapEstimate> {
    let n = path.len();
    if n < 2 {
        return Err(Error::PathTooShort { needed: 2, got: n });
    }
    let cap = max_skip(n);
    let mut per_level = Vec::new();
    let mut a = 1usize;
    loop {
        let g = plugin_from_path(&skip_path(path, a)?)?.gamma_hat;
        per_level.push(BootstrapLevel { a, gamma_hat: g });
        if g > BOOTSTRAP_THRESHOLD || a >= cap {
            let g = g.clamp(0.0, 1.0);
            let gamma_tilde = 1.0 - (1.0 - g).powf(1.0 / a as f64);
            return Ok(BootstrapEstimate {
                gamma_tilde,
                a,
                per_level,
            });
        }
        a *= 2;
    }
}

/// Inputs of [`theory_bounds`]. `gap` and `pimin` are guesses of the unknown
/// chain parameters and `c` the unknown absolute constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryInputs {
    pub n: u64,
    pub d: usize,
    pub delta: f64,
    pub gap: f64,
    pub pimin: f64,
    pub c: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryBounds {
    pub c: f64,
    pub epsilon: f64,
    /// Deviation bound for the plug-in minimum stationary probability.
    pub pimin_dev: f64,
    /// Deviation bound for the plug-in gap.
    pub gap_dev: f64,
    /// Number of doubling levels, `floor(log2(1/gap))`.
    pub k_gamma: u32,
    /// Per-level confidence, `delta / (k_gamma + 1)`.
    pub delta_gamma: f64,
    /// Polylogarithmic factor of the bootstrap sample size.
    pub l_factor: f64,
    /// Path length sufficient for relative accuracy `epsilon` of the bootstrap.
    pub n0: f64,
    /// Path length at which the plug-in gap bound drops below `epsilon`.
    pub n1: f64,
}

fn doubling_levels(gap: f64) -> u32 {
    (1.0 / gap).log2().floor() as u32
}

/// Path length at which the plug-in gap deviation reaches `epsilon`.
pub fn plugin_sample_size(epsilon: f64, delta: f64, d: usize, gap: f64, pimin: f64, c: f64) -> f64 {
    let k = 3.0 * c * c / (epsilon * epsilon);
    k / (pimin * gap) * (d as f64 / delta).ln() * (k / (pimin * pimin * gap * delta)).ln()
}

pub fn theory_bounds(inp: &TheoryInputs) -> Result<TheoryBounds> {
    let TheoryInputs {
        n,
        d,
        delta,
        gap,
        pimin,
        c,
        epsilon,
    } = *inp;
    let unit = |x: f64| x > 0.0 && x < 1.0;
    if n < 2 || d < 2 || !unit(delta) || !unit(gap) || !unit(pimin) || !(c > 0.0) || !unit(epsilon)
    {
        return Err(Error::Domain(format!(
            "theory_bounds: invalid inputs {inp:?}"
        )));
    }
    let nf = n as f64;
    let df = d as f64;

    let log_pi = (1.0 / (pimin * delta)).ln();
    let pimin_dev = c * ((pimin * log_pi / (gap * nf)).sqrt() + log_pi / (gap * nf));
    let gap_dev = c * ((df / delta).ln() * (nf / (pimin * delta)).ln() / (pimin * gap * nf)).sqrt();

    let k_gamma = doubling_levels(gap);
    let levels = k_gamma as f64 + 1.0;
    let delta_gamma = delta / levels;
    let scale = 3.0 * (16.0 * 2f64.sqrt()).powi(2);
    let l_factor = scale
        * (df * levels / delta).ln()
        * (scale * c * c * levels / (epsilon * epsilon * pimin * pimin * gap * delta)).ln();
    let n0 = l_factor / (pimin * gap * epsilon * epsilon);
    let n1 = plugin_sample_size(epsilon, delta, d, gap, pimin, c);

    Ok(TheoryBounds {
        c,
        epsilon,
        pimin_dev,
        gap_dev,
        k_gamma,
        delta_gamma,
        l_factor,
        n0,
        n1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::exact_spectral_summary;
    use crate::family::ChainFamily;
    use crate::path::{simulate_path, Init};

    #[test]
    fn unvisited_state_is_degenerate() {
        let path = SamplePath::new(2, vec![0; 20]).unwrap();
        let est = plugin_from_path(&path).unwrap();
        assert!(est.degenerate);
        assert_eq!(est.gamma_hat, 0.0);
        assert_eq!(est.pimin_hat, 0.0);
    }

    #[test]
    fn alternating_path_has_no_absolute_gap() {
        let states: Vec<usize> = (0..1000).map(|t| t % 2).collect();
        let est = plugin_from_path(&SamplePath::new(2, states).unwrap()).unwrap();
        // N_01 = 500, N_10 = 499 and pi = (1/2, 1/2), so Sym(L) has zero
        // diagonal and off-diagonal (500 + 499) / 999 / 2 / (1/2) = 1.
        assert!((est.eigenvalues_hat[0] - 1.0).abs() < 1e-12);
        assert!((est.eigenvalues_hat[1] + 1.0).abs() < 1e-12);
        assert!(est.gamma_hat < 1e-12);
    }

    #[test]
    fn plugin_is_bounded() {
        let chain = ChainFamily::LazyUniform { d: 3, beta: 0.9 }
            .build()
            .unwrap();
        for seed in 0..20 {
            let path = simulate_path(&chain, 50, &Init::State(0), seed).unwrap();
            let e = plugin_from_path(&path).unwrap();
            assert!((0.0..=1.0).contains(&e.gamma_hat));
            assert!((0.0..=1.0).contains(&e.pimin_hat));
        }
    }

    #[test]
    fn plugin_is_deterministic() {
        let chain = ChainFamily::TwoStateB { pibar: 0.1 }.build().unwrap();
        let path = simulate_path(&chain, 5000, &Init::Stationary, 3).unwrap();
        let a = plugin_from_path(&path).unwrap();
        let b = plugin_from_path(&path).unwrap();
        assert_eq!(a.gamma_hat.to_bits(), b.gamma_hat.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn max_skip_leaves_two_samples() {
        assert_eq!(max_skip(2), 1);
        assert_eq!(max_skip(3), 1);
        assert_eq!(max_skip(4), 2);
        assert_eq!(max_skip(1024), 512);
        assert_eq!(max_skip(1500), 512);
    }

    #[test]
    fn bootstrap_accepts_fast_chain_immediately() {
        let chain = ChainFamily::TwoStateA { pibar: 0.2 }.build().unwrap();
        let path = simulate_path(&chain, 10_000, &Init::Stationary, 11).unwrap();
        let b = bootstrap_estimate(&path).unwrap();
        assert_eq!(b.a, 1);
        assert_eq!(b.per_level.len(), 1);
        assert_eq!(b.gamma_tilde, b.per_level[0].gamma_hat);
    }

    #[test]
    fn bootstrap_doubles_on_slow_chain() {
        let chain = ChainFamily::LazyUniform { d: 3, beta: 0.02 }
            .build()
            .unwrap();
        let path = simulate_path(&chain, 200_000, &Init::Stationary, 1).unwrap();
        let b = bootstrap_estimate(&path).unwrap();
        assert!(b.a >= 8);
        assert!(b.a.is_power_of_two());
        let gap = exact_spectral_summary(&chain).unwrap().gap;
        assert!(
            (b.gamma_tilde / gap - 1.0).abs() < 0.5,
            "{} vs {gap}",
            b.gamma_tilde
        );
        for w in b.per_level.windows(2) {
            assert_eq!(w[1].a, 2 * w[0].a);
            assert!(w[0].gamma_hat <= BOOTSTRAP_THRESHOLD);
        }
    }

    #[test]
    fn bootstrap_on_uninformative_path_stops_at_cap() {
        let path = SamplePath::new(2, vec![0; 37]).unwrap();
        let b = bootstrap_estimate(&path).unwrap();
        assert_eq!(b.a, 16);
        assert_eq!(b.gamma_tilde, 0.0);
    }

    #[test]
    fn skipped_gap_identity_on_exact_chains() {
        let chain = ChainFamily::PerturbedUniformI {
            d: 5,
            gammabar: 0.1,
            index: 3,
        }
        .build()
        .unwrap();
        let mut prev = exact_spectral_summary(&chain).unwrap().gap;
        for k in 1..5u32 {
            let a = 1u32 << k;
            let g = exact_spectral_summary(&chain.power(a).unwrap())
                .unwrap()
                .gap;
            assert!((g - (1.0 - (1.0 - prev).powi(2))).abs() < 1e-12);
            prev = g;
        }
        // A gap of 0.2 doubles to 0.36.
        let g = 0.2f64;
        assert!((1.0 - (1.0 - g).powi(2) - 0.36).abs() < 1e-15);
    }

    fn base_inputs() -> TheoryInputs {
        TheoryInputs {
            n: 1_000_000,
            d: 10,
            delta: 0.05,
            gap: 0.1,
            pimin: 0.05,
            c: 1.0,
            epsilon: 0.1,
        }
    }

    #[test]
    fn gap_deviation_value() {
        let t = theory_bounds(&base_inputs()).unwrap();
        // ln(200) * ln(4e8) / 5000, square-rooted.
        let want = (200f64.ln() * 4e8f64.ln() / 5000.0).sqrt();
        assert!((t.gap_dev - want).abs() < 1e-15);
        assert!((t.gap_dev - 0.144_87).abs() < 1e-4);
    }

    #[test]
    fn deviations_decrease_in_n() {
        let a = theory_bounds(&base_inputs()).unwrap();
        let b = theory_bounds(&TheoryInputs {
            n: 2_000_000,
            ..base_inputs()
        })
        .unwrap();
        assert!(b.gap_dev < a.gap_dev && b.pimin_dev < a.pimin_dev);
        assert!(a.pimin_dev > 0.0 && a.n0 > 0.0);
    }

    #[test]
    fn bootstrap_sample_size() {
        let inp = TheoryInputs {
            n: 1000,
            d: 2,
            delta: 0.1,
            gap: 0.5,
            pimin: 0.25,
            c: 1.0,
            epsilon: 0.1,
        };
        let t = theory_bounds(&inp).unwrap();
        assert_eq!(t.k_gamma, 1);
        assert!((t.delta_gamma - 0.05).abs() < 1e-15);
        // 1536 * ln(2*2/0.1) * ln(1536*2 / (0.01 * 0.0625 * 0.5 * 0.1))
        let want = 1536.0 * 40f64.ln() * (3072.0f64 / (0.01 * 0.0625 * 0.5 * 0.1)).ln();
        assert!((t.l_factor - want).abs() < 1e-9 * want);
        // With C = 1 the bootstrap size equals the plug-in size at a
        // 16*sqrt(2)-fold tighter accuracy and per-level confidence.
        let via_n1 =
            plugin_sample_size(0.1 / (16.0 * 2f64.sqrt()), t.delta_gamma, 2, 0.5, 0.25, 1.0);
        assert!((t.n0 - via_n1).abs() < 1e-9 * t.n0);
    }

    #[test]
    fn theory_domain_errors() {
        assert!(theory_bounds(&TheoryInputs {
            gap: 0.0,
            ..base_inputs()
        })
        .is_err());
        assert!(theory_bounds(&TheoryInputs {
            delta: 1.0,
            ..base_inputs()
        })
        .is_err());
        assert!(theory_bounds(&TheoryInputs {
            c: -1.0,
            ..base_inputs()
        })
        .is_err());
    }
}
