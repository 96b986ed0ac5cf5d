//! Fully empirical confidence intervals for the stationary probabilities, the
//! spectral gap and the mixing time.
//!
//! [`algorithm1`] turns one sample path into a certificate:
//!
//! 1. smoothed transition estimate `P^ = (N_ij + 1/d) / (N_i + 1)`;
//! 2. group inverse `A#` of `I - P^`;
//! 3. stationary law `pi^` of `P^`;
//! 4. eigenvalues of `Sym(Diag(pi^)^1/2 P^ Diag(pi^)^-1/2)`;
//! 5. gap estimate `1 - max(lambda_2, |lambda_d|)`;
//! 6. entrywise bounds `B_ij` on `|P^_ij - P_ij|` from a martingale tail bound;
//! 7. sensitivity `kappa` of `pi` read off `A#`;
//! 8. `b = kappa max B_ij` bounds `|pi^_i - pi_i|`, `rho` bounds the ratios
//!    `sqrt(pi_i / pi^_i)`;
//! 9. `w` bounds the gap error through Weyl's inequality.
//!
//! All intervals hold simultaneously with probability at least `1 - delta`.
//! [`combined_intervals`] intersects them with the plug-in deviation bounds,
//! which depend on an absolute constant that has to be supplied.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::chain::{similarity_transform, stationary_vector, ChainSpec};
use crate::error::{Error, Result};
use crate::estimate::plugin_estimate;
use crate::numerics::group_inverse::{group_inverse, sensitivity, AxiomResiduals, AXIOM_TOL};
use crate::numerics::{sym_eigenvalues, symmetrize, tail_threshold, PEELING_BASE};
use crate::path::{Init, SamplePath, Simulator};
use crate::stats::{collect_statistics, smoothed_transitions, PathStatistics};

pub const REPORT_SCHEMA: u32 = 1;
/// Default constant of the plug-in deviation bounds. It is not known; results
/// that use it are conditional on it.
pub const DEFAULT_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    /// Centered interval clipped to `[0, 1]`. An infinite radius gives `[0, 1]`.
    pub fn around_unit(center: f64, radius: f64) -> Self {
        Self {
            lo: (center - radius).clamp(0.0, 1.0),
            hi: (center + radius).clamp(0.0, 1.0),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `width / lo`, infinite unless the lower end is positive.
    pub fn relative_width(&self) -> f64 {
        if self.lo > 0.0 {
            self.width() / self.lo
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalCertificate {
    pub t_hat: f64,
    #[serde(rename = "B_hat")]
    pub b_matrix: Vec<Vec<f64>>,
    pub kappa_hat: f64,
    pub b_hat: f64,
    pub rho_hat: f64,
    pub w_hat: f64,
    pub pi_hat: Vec<f64>,
    pub gamma_hat: f64,
    pub eigenvalues: Vec<f64>,
    pub residuals: AxiomResiduals,
    #[serde(skip)]
    pub p_hat: DMatrix<f64>,
    #[serde(skip)]
    pub a_sharp: DMatrix<f64>,
    #[serde(skip)]
    pub n_first: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalReport {
    pub schema: u32,
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub pi_hat: Vec<f64>,
    pub pi_intervals: Vec<Interval>,
    pub pimin_interval: Interval,
    pub gamma_hat: f64,
    pub gap_interval: Interval,
    pub pimin_lb: f64,
    pub gap_lb: f64,
    pub tmix_interval: Interval,
    pub combined: Option<CombinedBounds>,
}

impl IntervalReport {
    pub fn final_pimin_interval(&self) -> Interval {
        self.combined.as_ref().map_or(self.pimin_interval, |c| c.u)
    }

    pub fn final_gap_interval(&self) -> Interval {
        self.combined.as_ref().map_or(self.gap_interval, |c| c.v)
    }

    pub fn final_tmix_interval(&self) -> Interval {
        self.combined
            .as_ref()
            .map_or(self.tmix_interval, |c| c.tmix_interval)
    }
}

/// Intervals refined with the plug-in deviation bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedBounds {
    /// The absolute constant the plug-in bounds were evaluated with.
    pub constant: f64,
    /// Simultaneous coverage level, `1 - 2 delta`.
    pub confidence: f64,
    /// A lower bound from the certificate was zero, so nothing was refined.
    pub fallback: bool,
    /// The refined interval missed the certificate interval; the latter is kept.
    pub empty_intersection: bool,
    pub pimin_plugin: Option<f64>,
    pub gamma_plugin: Option<f64>,
    pub b_prime: Option<f64>,
    pub w_prime: Option<f64>,
    #[serde(rename = "U")]
    pub u: Interval,
    #[serde(rename = "V")]
    pub v: Interval,
    pub tmix_interval: Interval,
}

/// Upper bound on `|P^_ij - P_ij|` from the transitions out of state `i`.
///
/// This is the largest root of the quadratic inequality in `sqrt|P^ - P|`
/// that follows from the martingale bound with the unknown variance
/// `P(1-P)` replaced by its empirical value. An unvisited row gets the trivial
/// bound 1.
pub fn entrywise_bound(p_hat_ij: f64, n_i: u64, d: usize, t_hat: f64, c: f64) -> Result<f64> {
    if !(p_hat_ij > 0.0 && p_hat_ij < 1.0) || d < 2 || !(t_hat > 0.0) || !(c > 1.0) {
        return Err(Error::Domain(format!(
            "entrywise_bound: P={p_hat_ij}, d={d}, t={t_hat}, c={c}"
        )));
    }
    if n_i == 0 {
        return Ok(1.0);
    }
    let ni = n_i as f64;
    let half = c * t_hat / (2.0 * ni);
    let variance = (2.0 * c * p_hat_ij * (1.0 - p_hat_ij) * t_hat / ni).sqrt();
    let bias = ((4.0 / 3.0) * t_hat + (p_hat_ij - 1.0 / d as f64).abs()) / ni;
    Ok((half.sqrt() + (half + variance + bias).sqrt()).powi(2))
}

/// `x / [y]_+` with `x / 0 = +inf`.
fn div_pos(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x / y
    } else {
        f64::INFINITY
    }
}

pub fn certificate(stats: &PathStatistics, delta: f64) -> Result<EmpiricalCertificate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let d = stats.d;
    let p_hat = smoothed_transitions(stats).p_hat;

    let pi = stationary_vector(&p_hat)?;
    if pi.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NotErgodic(
            "smoothed estimate has a non-positive stationary entry".into(),
        ));
    }
    let gi = group_inverse(&p_hat, &pi)?;
    if gi.residuals.projector > AXIOM_TOL {
        return Err(Error::AxiomViolation(gi.residuals.projector));
    }

    let eigenvalues = sym_eigenvalues(&symmetrize(&similarity_transform(&p_hat, &pi)))?;
    let gamma_hat = 1.0 - eigenvalues[1].max(eigenvalues[d - 1].abs());

    let t_hat = tail_threshold(stats.n as u64, d, delta, PEELING_BASE)?;
    let mut b_matrix = vec![vec![0.0; d]; d];
    for (i, row) in b_matrix.iter_mut().enumerate() {
        for (j, b) in row.iter_mut().enumerate() {
            *b = entrywise_bound(p_hat[(i, j)], stats.n_first[i], d, t_hat, PEELING_BASE)?;
        }
    }

    let kappa_hat = sensitivity(&gi.a_sharp);
    let b_max = b_matrix.iter().flatten().copied().fold(0.0, f64::max);
    let b_hat = kappa_hat * b_max;
    let rho_hat = 0.5
        * pi.iter()
            .map(|&p| (b_hat / p).max(div_pos(b_hat, p - b_hat)))
            .fold(0.0, f64::max);
    let w_hat = gap_radius(rho_hat, &pi, &b_matrix);

    Ok(EmpiricalCertificate {
        t_hat,
        b_matrix,
        kappa_hat,
        b_hat,
        rho_hat,
        w_hat,
        pi_hat: pi.iter().copied().collect(),
        gamma_hat,
        eigenvalues,
        residuals: gi.residuals,
        p_hat,
        a_sharp: gi.a_sharp,
        n_first: stats.n_first.clone(),
    })
}

/// `2 rho + rho^2 + (1 + rho)^2 * sqrt(sum_ij pi_i / pi_j B_ij^2)`.
fn gap_radius(rho: f64, pi: &DVector<f64>, b: &[Vec<f64>]) -> f64 {
    if !rho.is_finite() {
        return f64::INFINITY;
    }
    let d = pi.len();
    let frob: f64 = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| pi[i] / pi[j] * b[i][j] * b[i][j])
        .sum::<f64>()
        .sqrt();
    2.0 * rho + rho * rho + (1.0 + 2.0 * rho + rho * rho) * frob
}

/// `[(1/gap_hi - 1) ln 2, (1/gap_lo) ln(4/pimin_lo)]`, open-ended when a lower
/// bound is zero.
pub fn tmix_interval(gap: &Interval, pimin_lo: f64) -> Interval {
    let lo = if gap.hi > 0.0 {
        (1.0 / gap.hi - 1.0).max(0.0) * std::f64::consts::LN_2
    } else {
        0.0
    };
    let hi = if gap.lo > 0.0 && pimin_lo > 0.0 {
        (1.0 / gap.lo) * (4.0 / pimin_lo).ln()
    } else {
        f64::INFINITY
    };
    Interval { lo, hi }
}

fn report_from_certificate(cert: &EmpiricalCertificate, n: usize, delta: f64) -> IntervalReport {
    let pi_intervals: Vec<Interval> = cert
        .pi_hat
        .iter()
        .map(|&p| Interval::around_unit(p, cert.b_hat))
        .collect();
    let pimin_lb = pi_intervals
        .iter()
        .map(|iv| iv.lo)
        .fold(f64::INFINITY, f64::min);
    let pimin_hi = pi_intervals
        .iter()
        .map(|iv| iv.hi)
        .fold(f64::INFINITY, f64::min);
    let pimin_interval = Interval::new(pimin_lb, pimin_hi);
    let gap_interval = Interval::around_unit(cert.gamma_hat, cert.w_hat);
    IntervalReport {
        schema: REPORT_SCHEMA,
        n,
        d: cert.pi_hat.len(),
        delta,
        pi_hat: cert.pi_hat.clone(),
        pi_intervals,
        pimin_interval,
        gamma_hat: cert.gamma_hat,
        gap_interval,
        pimin_lb,
        gap_lb: gap_interval.lo,
        tmix_interval: tmix_interval(&gap_interval, pimin_lb),
        combined: None,
    }
}

pub fn algorithm1(path: &SamplePath, delta: f64) -> Result<(EmpiricalCertificate, IntervalReport)> {
    let stats = collect_statistics(path)?;
    let cert = certificate(&stats, delta)?;
    let report = report_from_certificate(&cert, stats.n, delta);
    Ok((cert, report))
}

/// Observable plug-in deviation radius for the gap, with the unknown
/// `pi_min` and gap replaced by certified lower bounds.
pub fn plugin_gap_radius(
    n: usize,
    d: usize,
    delta: f64,
    pimin_lb: f64,
    gap_lb: f64,
    c: f64,
) -> f64 {
    let nf = n as f64;
    let x = (d as f64 / delta).ln() * (nf / (pimin_lb * delta)).ln() / (pimin_lb * gap_lb * nf);
    c * (x.sqrt() + x + (1.0 / gap_lb).ln() / (gap_lb * nf))
}

/// Observable plug-in deviation radius for `pi_min`.
///
/// From `|p^ - p| <= C (sqrt(p a) + a)` and `p <= p^ + |p^ - p|` the error `x`
/// satisfies `x <= C sqrt(a) sqrt(x) + C sqrt(a p^) + C a`, whose largest
/// root gives the bound.
pub fn plugin_pimin_radius(
    n: usize,
    d: usize,
    delta: f64,
    pimin_hat: f64,
    pimin_lb: f64,
    gap_lb: f64,
    c: f64,
) -> f64 {
    let a = (d as f64 / (pimin_lb * delta)).ln() / (gap_lb * n as f64);
    let half = 0.5 * c * a.sqrt();
    let rest = c * (a * pimin_hat).sqrt() + c * a;
    (half + (half * half + rest).sqrt()).powi(2)
}

pub fn combined_intervals(path: &SamplePath, delta: f64, c: f64) -> Result<IntervalReport> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("constant must be positive, got {c}")));
    }
    let stats = collect_statistics(path)?;
    let cert = certificate(&stats, delta)?;
    let mut report = report_from_certificate(&cert, stats.n, delta);

    let fallback = |report: &IntervalReport| CombinedBounds {
        constant: c,
        confidence: 1.0 - 2.0 * delta,
        fallback: true,
        empty_intersection: false,
        pimin_plugin: None,
        gamma_plugin: None,
        b_prime: None,
        w_prime: None,
        u: report.pimin_interval,
        v: report.gap_interval,
        tmix_interval: report.tmix_interval,
    };

    let plugin = plugin_estimate(&stats)?;
    if report.pimin_lb <= 0.0 || report.gap_lb <= 0.0 || plugin.degenerate {
        report.combined = Some(fallback(&report));
        return Ok(report);
    }

    let (n, d) = (stats.n, stats.d);
    let w_prime = plugin_gap_radius(n, d, delta, report.pimin_lb, report.gap_lb, c);
    let b_prime = plugin_pimin_radius(
        n,
        d,
        delta,
        plugin.pimin_hat,
        report.pimin_lb,
        report.gap_lb,
        c,
    );

    let u_raw = Interval::around_unit(plugin.pimin_hat, b_prime);
    let v_raw = Interval::around_unit(plugin.gamma_hat, w_prime);
    let u = u_raw.intersect(&report.pimin_interval);
    let v = v_raw.intersect(&report.gap_interval);
    let empty_intersection = u.is_none() || v.is_none();
    let u = u.unwrap_or(report.pimin_interval);
    let v = v.unwrap_or(report.gap_interval);

    report.combined = Some(CombinedBounds {
        constant: c,
        confidence: 1.0 - 2.0 * delta,
        fallback: false,
        empty_intersection,
        pimin_plugin: Some(plugin.pimin_hat),
        gamma_plugin: Some(plugin.gamma_hat),
        b_prime: Some(b_prime),
        w_prime: Some(w_prime),
        u,
        v,
        tmix_interval: tmix_interval(&v, u.lo),
    });
    Ok(report)
}

/// A path that can be read in growing prefixes.
pub trait PathSource {
    fn d(&self) -> usize;
    /// The first `n` states, or `None` once the source cannot supply them.
    fn prefix(&mut self, n: usize) -> Option<SamplePath>;
}

/// Serves prefixes of a fixed, already observed path.
#[derive(Debug, Clone)]
pub struct FixedSource(pub SamplePath);

impl PathSource for FixedSource {
    fn d(&self) -> usize {
        self.0.d()
    }

    fn prefix(&mut self, n: usize) -> Option<SamplePath> {
        (n <= self.0.len()).then(|| self.0.prefix(n).ok()).flatten()
    }
}

/// Simulates a chain on demand, up to a step budget.
#[derive(Debug, Clone)]
pub struct SimulatedSource {
    sim: Simulator,
    states: Vec<usize>,
    max_steps: usize,
}

impl SimulatedSource {
    pub fn new(chain: &ChainSpec, init: &Init, seed: u64, max_steps: usize) -> Result<Self> {
        Ok(Self {
            sim: Simulator::new(chain, init, seed)?,
            states: Vec::new(),
            max_steps,
        })
    }
}

impl PathSource for SimulatedSource {
    fn d(&self) -> usize {
        self.sim.d()
    }

    fn prefix(&mut self, n: usize) -> Option<SamplePath> {
        if n > self.max_steps {
            return None;
        }
        while self.states.len() < n {
            self.states.push(self.sim.next_state());
        }
        SamplePath::new(self.sim.d(), self.states[..n].to_vec()).ok()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StopStep {
    pub k: u32,
    pub n: usize,
    pub delta_k: f64,
    pub pimin_interval: Interval,
    pub gap_interval: Interval,
    pub pimin_ratio: f64,
    pub gap_ratio: f64,
    pub fallback: bool,
    pub stop: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StopTrace {
    pub schema: u32,
    pub epsilon: f64,
    pub delta: f64,
    pub constant: f64,
    pub stopped: bool,
    /// The source ran out before the stopping condition was met.
    pub exhausted: bool,
    pub stop_n: Option<usize>,
    pub steps: Vec<StopStep>,
}

impl StopTrace {
    pub fn last(&self) -> Option<&StopStep> {
        self.steps.last()
    }
}

/// Evaluate the combined intervals at `n = 2^k`, `k = 1, 2, ...`, with
/// confidence `delta / (k (k+1))`, until both the `pi_min` and gap intervals
/// have width below `epsilon` times their (positive) lower end.
pub fn stopping_rule(
    source: &mut dyn PathSource,
    epsilon: f64,
    delta: f64,
    c: f64,
) -> Result<StopTrace> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let mut trace = StopTrace {
        schema: REPORT_SCHEMA,
        epsilon,
        delta,
        constant: c,
        stopped: false,
        exhausted: false,
        stop_n: None,
        steps: Vec::new(),
    };
    for k in 1u32..63 {
        let n = 1usize << k;
        let Some(path) = source.prefix(n) else {
            trace.exhausted = true;
            break;
        };
        let delta_k = delta / (k as f64 * (k as f64 + 1.0));
        let report = combined_intervals(&path, delta_k, c)?;
        let pimin_interval = report.final_pimin_interval();
        let gap_interval = report.final_gap_interval();
        let pimin_ratio = pimin_interval.relative_width();
        let gap_ratio = gap_interval.relative_width();
        let stop = pimin_ratio < epsilon && gap_ratio < epsilon;
        trace.steps.push(StopStep {
            k,
            n,
            delta_k,
            pimin_interval,
            gap_interval,
            pimin_ratio,
            gap_ratio,
            fallback: report.combined.as_ref().is_some_and(|cb| cb.fallback),
            stop,
        });
        if stop {
            trace.stopped = true;
            trace.stop_n = Some(n);
            break;
        }
    }
    Ok(trace)
}
