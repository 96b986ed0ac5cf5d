//! Monte Carlo experiments against chains whose spectrum is known exactly,
//! and a brute-force total-variation mixing time for small chains.
//!
//! Trial `i` of an experiment with master seed `s` simulates with seed
//! [`trial_seed`]`(s, i)`. Trials may run on several threads; results are
//! collected in trial order, so reports do not depend on the thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chain::{exact_spectral_summary, stationary_distribution, ChainSpec};
use crate::error::{Error, Result};
use crate::estimate::{bootstrap_estimate, plugin_estimate};
use crate::interval::{algorithm1, combined_intervals};
use crate::path::{simulate_path, Init, SamplePath};
use crate::rng::{seeded_rng, trial_seed};
use crate::stats::collect_statistics;

pub const TV_THRESHOLD: f64 = 0.25;
pub const TV_MAX_STEPS: u64 = 1_000_000;
pub const SEED_RULE: &str = "splitmix64(master_seed + (trial + 1) * 0x9E3779B97F4A7C15)";

/// Smallest `t >= 1` with `max_x TV(P^t(x, .), pi) <= threshold`.
///
/// The worst initial law is always a point mass, so only those are iterated.
pub fn tv_mixing_oracle(chain: &ChainSpec, threshold: f64) -> Result<u64> {
    let d = chain.d();
    if d > 64 {
        return Err(Error::Domain(format!("TV oracle is for d <= 64, got {d}")));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let pi = match chain.pi_known() {
        Some(pi) => pi.clone(),
        None => stationary_distribution(chain)?.as_vector(),
    };
    let p = chain.p();
    let mut dist = p.clone();
    for t in 1..=TV_MAX_STEPS {
        let worst = (0..d)
            .map(|x| 0.5 * (0..d).map(|y| (dist[(x, y)] - pi[y]).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= threshold {
            return Ok(t);
        }
        dist = &dist * p;
    }
    Err(Error::Diverged(TV_MAX_STEPS))
}

/// Random reversible chain: symmetric weights `W_ij = W_ji ~ U(floor, 1)`,
/// `P = W / rowsum`, `pi ∝ rowsum`.
pub fn random_reversible_chain(d: usize, floor: f64, seed: u64) -> Result<ChainSpec> {
    if d < 2 {
        return Err(Error::TooSmall(d));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::Domain(format!(
            "weight floor must lie in [0, 1), got {floor}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut w = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let x = rng.random_range(floor..1.0);
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let sums: Vec<f64> = (0..d).map(|i| w.row(i).sum()).collect();
    let total: f64 = sums.iter().sum();
    let p = DMatrix::from_fn(d, d, |i, j| w[(i, j)] / sums[i]);
    ChainSpec::new(p, Some(sums.iter().map(|s| s / total).collect()))
}

fn serialize_init<S: Serializer>(init: &Init, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&init.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub trials: usize,
    /// Path lengths; every trial is evaluated on prefixes of one path.
    pub steps: Vec<usize>,
    pub delta: f64,
    pub master_seed: u64,
    #[serde(serialize_with = "serialize_init")]
    pub init: Init,
    /// Constant of the combined intervals, if they are to be evaluated too.
    pub constant: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.steps.is_empty() || self.steps[0] < 2 {
            return Err(Error::Domain("every path length must be at least 2".into()));
        }
        if self.steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "path length grid must be strictly increasing".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if let Some(c) = self.constant {
            if !(c > 0.0) {
                return Err(Error::Domain(format!("constant must be positive, got {c}")));
            }
        }
        Ok(())
    }

    fn max_steps(&self) -> usize {
        *self.steps.last().unwrap_or(&2)
    }
}

/// Exact parameters of the chain under test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truth {
    pub gap: f64,
    pub pi: Vec<f64>,
    pub pimin: f64,
    pub tmix_lower: f64,
    pub tmix_upper: f64,
}

pub fn truth(chain: &ChainSpec) -> Result<Truth> {
    let summary = exact_spectral_summary(chain)?;
    let pi: Vec<f64> = match chain.pi_known() {
        Some(pi) => pi.iter().copied().collect(),
        None => stationary_distribution(chain)?.pi,
    };
    Ok(Truth {
        gap: summary.gap,
        pimin: pi.iter().copied().fold(f64::INFINITY, f64::min),
        pi,
        tmix_lower: summary.tmix_lower,
        tmix_upper: summary.tmix_upper,
    })
}

/// Run `f(trial)` for every trial on `jobs` threads, in trial order.
pub fn run_trials<T, F>(trials: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if jobs <= 1 {
        return (0..trials).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| (0..trials).into_par_iter().map(f).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub hits: usize,
    pub trials: usize,
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / trials)`.
    pub se: f64,
}

impl Proportion {
    pub fn from_flags(flags: impl Iterator<Item = bool>) -> Self {
        let (mut hits, mut trials) = (0, 0);
        for f in flags {
            trials += 1;
            hits += f as usize;
        }
        let rate = if trials > 0 {
            hits as f64 / trials as f64
        } else {
            0.0
        };
        let se = if trials > 0 {
            (rate * (1.0 - rate) / trials as f64).sqrt()
        } else {
            0.0
        };
        Self {
            hits,
            trials,
            rate,
            se,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub finite: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let median = match m {
            0 => f64::NAN,
            _ if m % 2 == 1 => v[m / 2],
            _ => 0.5 * (v[m / 2 - 1] + v[m / 2]),
        };
        let mean = if m == 0 {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / m as f64
        };
        Self {
            mean,
            median,
            finite: v.iter().filter(|x| x.is_finite()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialCertificate {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub gamma_hat: f64,
    pub kappa_hat: f64,
    pub b_hat: f64,
    pub w_hat: f64,
    pub gap_covered: bool,
    pub pi_covered: bool,
    pub joint_covered: bool,
    pub tmix_covered: bool,
    pub gap_width: f64,
    pub combined_gap_width: Option<f64>,
    pub combined_gap_covered: Option<bool>,
    pub combined_pimin_covered: Option<bool>,
    pub combined_fallback: Option<bool>,
}

fn certify(
    path: &SamplePath,
    truth: &Truth,
    cfg: &ExperimentConfig,
    trial: usize,
    seed: u64,
) -> Result<TrialCertificate> {
    let (cert, report) = algorithm1(path, cfg.delta)?;
    let gap_covered = report.gap_interval.contains(truth.gap);
    let pi_covered = report
        .pi_intervals
        .iter()
        .zip(&truth.pi)
        .all(|(iv, &p)| iv.contains(p));
    let tmix_covered =
        report.tmix_interval.lo <= truth.tmix_lower && truth.tmix_upper <= report.tmix_interval.hi;
    let mut out = TrialCertificate {
        trial,
        seed,
        n: path.len(),
        gamma_hat: cert.gamma_hat,
        kappa_hat: cert.kappa_hat,
        b_hat: cert.b_hat,
        w_hat: cert.w_hat,
        gap_covered,
        pi_covered,
        joint_covered: gap_covered && pi_covered,
        tmix_covered,
        gap_width: report.gap_interval.width(),
        combined_gap_width: None,
        combined_gap_covered: None,
        combined_pimin_covered: None,
        combined_fallback: None,
    };
    if let Some(c) = cfg.constant {
        let combined = combined_intervals(path, cfg.delta, c)?;
        if let Some(cb) = combined.combined {
            out.combined_gap_width = Some(cb.v.width());
            out.combined_gap_covered = Some(cb.v.contains(truth.gap));
            out.combined_pimin_covered = Some(cb.u.contains(truth.pimin));
            out.combined_fallback = Some(cb.fallback);
        }
    }
    Ok(out)
}

/// Certificates for every trial (outer) and path length (inner).
pub fn certificate_runs(
    chain: &ChainSpec,
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<(Truth, Vec<Vec<TrialCertificate>>)> {
    cfg.validate()?;
    let truth = truth(chain)?;
    let runs = run_trials(cfg.trials, jobs, |trial| {
        let seed = trial_seed(cfg.master_seed, trial as u64);
        let path = simulate_path(chain, cfg.max_steps(), &cfg.init, seed)?;
        cfg.steps
            .iter()
            .map(|&n| certify(&path.prefix(n)?, &truth, cfg, trial, seed))
            .collect()
    })?;
    Ok((truth, runs))
}

fn by_level<T: Clone>(runs: &[Vec<T>], level: usize) -> Vec<T> {
    runs.iter().map(|r| r[level].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageLevel {
    pub n: usize,
    pub gap: Proportion,
    pub pi: Proportion,
    pub joint: Proportion,
    pub tmix: Proportion,
    pub combined_gap: Option<Proportion>,
    pub combined_pimin: Option<Proportion>,
    pub w_hat: Summary,
    pub b_hat: Summary,
    pub gap_width: Summary,
    pub per_trial: Vec<TrialCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub schema: u32,
    pub experiment: &'static str,
    pub seed_rule: &'static str,
    pub config: ExperimentConfig,
    pub truth: Truth,
    pub levels: Vec<CoverageLevel>,
}

pub fn coverage_experiment(
    chain: &ChainSpec,
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<CoverageReport> {
    let (truth, runs) = certificate_runs(chain, cfg, jobs)?;
    let levels = cfg
        .steps
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let trials = by_level(&runs, k);
            let optional = |f: fn(&TrialCertificate) -> Option<bool>| {
                cfg.constant
                    .map(|_| Proportion::from_flags(trials.iter().filter_map(f)))
            };
            CoverageLevel {
                n,
                gap: Proportion::from_flags(trials.iter().map(|t| t.gap_covered)),
                pi: Proportion::from_flags(trials.iter().map(|t| t.pi_covered)),
                joint: Proportion::from_flags(trials.iter().map(|t| t.joint_covered)),
                tmix: Proportion::from_flags(trials.iter().map(|t| t.tmix_covered)),
                combined_gap: optional(|t| t.combined_gap_covered),
                combined_pimin: optional(|t| t.combined_pimin_covered),
                w_hat: Summary::of(&trials.iter().map(|t| t.w_hat).collect::<Vec<_>>()),
                b_hat: Summary::of(&trials.iter().map(|t| t.b_hat).collect::<Vec<_>>()),
                gap_width: Summary::of(&trials.iter().map(|t| t.gap_width).collect::<Vec<_>>()),
                per_trial: trials,
            }
        })
        .collect();
    Ok(CoverageReport {
        schema: 1,
        experiment: "coverage",
        seed_rule: SEED_RULE,
        config: cfg.clone(),
        truth,
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthLevel {
    pub n: usize,
    pub w_hat: Summary,
    pub b_hat: Summary,
    pub per_trial_w_hat: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthReport {
    pub schema: u32,
    pub experiment: &'static str,
    pub seed_rule: &'static str,
    pub config: ExperimentConfig,
    pub truth: Truth,
    pub levels: Vec<WidthLevel>,
    /// Mean `w_hat` at each length over the mean at the previous one.
    pub mean_ratios: Vec<f64>,
}

pub fn width_experiment(
    chain: &ChainSpec,
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<WidthReport> {
    let (truth, runs) = certificate_runs(chain, cfg, jobs)?;
    let levels: Vec<WidthLevel> = cfg
        .steps
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let trials = by_level(&runs, k);
            let w: Vec<f64> = trials.iter().map(|t| t.w_hat).collect();
            WidthLevel {
                n,
                w_hat: Summary::of(&w),
                b_hat: Summary::of(&trials.iter().map(|t| t.b_hat).collect::<Vec<_>>()),
                per_trial_w_hat: w,
            }
        })
        .collect();
    let mean_ratios = levels
        .windows(2)
        .map(|w| w[1].w_hat.mean / w[0].w_hat.mean)
        .collect();
    Ok(WidthReport {
        schema: 1,
        experiment: "width",
        seed_rule: SEED_RULE,
        config: cfg.clone(),
        truth,
        levels,
        mean_ratios,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyTrial {
    pub trial: usize,
    pub seed: u64,
    pub gamma_hat: f64,
    pub pimin_hat: f64,
    pub degenerate: bool,
    pub gamma_tilde: f64,
    #[serde(rename = "A")]
    pub a: usize,
    pub plugin_error: f64,
    pub bootstrap_error: f64,
    pub pimin_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyLevel {
    pub n: usize,
    pub plugin_error: Summary,
    pub bootstrap_error: Summary,
    pub bootstrap_relative_error: Summary,
    pub pimin_error: Summary,
    pub per_trial: Vec<AccuracyTrial>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub schema: u32,
    pub experiment: &'static str,
    pub seed_rule: &'static str,
    pub config: ExperimentConfig,
    pub truth: Truth,
    pub levels: Vec<AccuracyLevel>,
}

pub fn accuracy_experiment(
    chain: &ChainSpec,
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<AccuracyReport> {
    cfg.validate()?;
    let truth = truth(chain)?;
    let runs = run_trials(cfg.trials, jobs, |trial| {
        let seed = trial_seed(cfg.master_seed, trial as u64);
        let path = simulate_path(chain, cfg.max_steps(), &cfg.init, seed)?;
        cfg.steps
            .iter()
            .map(|&n| {
                let prefix = path.prefix(n)?;
                let plugin = plugin_estimate(&collect_statistics(&prefix)?)?;
                let boot = bootstrap_estimate(&prefix)?;
                Ok(AccuracyTrial {
                    trial,
                    seed,
                    gamma_hat: plugin.gamma_hat,
                    pimin_hat: plugin.pimin_hat,
                    degenerate: plugin.degenerate,
                    gamma_tilde: boot.gamma_tilde,
                    a: boot.a,
                    plugin_error: (plugin.gamma_hat - truth.gap).abs(),
                    bootstrap_error: (boot.gamma_tilde - truth.gap).abs(),
                    pimin_error: (plugin.pimin_hat - truth.pimin).abs(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let levels = cfg
        .steps
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let trials = by_level(&runs, k);
            let col = |f: fn(&AccuracyTrial) -> f64| {
                Summary::of(&trials.iter().map(f).collect::<Vec<_>>())
            };
            AccuracyLevel {
                n,
                plugin_error: col(|t| t.plugin_error),
                bootstrap_error: col(|t| t.bootstrap_error),
                bootstrap_relative_error: Summary::of(
                    &trials
                        .iter()
                        .map(|t| t.bootstrap_error / truth.gap)
                        .collect::<Vec<_>>(),
                ),
                pimin_error: col(|t| t.pimin_error),
                per_trial: trials,
            }
        })
        .collect();
    Ok(AccuracyReport {
        schema: 1,
        experiment: "accuracy",
        seed_rule: SEED_RULE,
        config: cfg.clone(),
        truth,
        levels,
    })
}

/// Exact distribution of `X_t` from `init`, used by tests of the simulator.
pub fn distribution_at(chain: &ChainSpec, init: &DVector<f64>, t: usize) -> DVector<f64> {
    let mut q = init.transpose();
    for _ in 0..t {
        q = &q * chain.p();
    }
    q.transpose()
}
