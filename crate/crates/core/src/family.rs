//! Built-in chain families: two-state chains that are hard to tell apart
//! from short paths, perturbed-uniform chains whose gap halves when a single
//! state's holding probability is raised, and lazy uniform walks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ChainFamily {
    /// `[[1-p, p], [1-p, p]]`, gap 1.
    TwoStateA { pibar: f64 },
    /// `[[1-p, p], [1/2, 1/2]]`, gap `1/2 + p`.
    TwoStateB { pibar: f64 },
    /// All states leave with probability `eps = 2 (d-1)/d * gammabar`.
    PerturbedUniform0 { d: usize, gammabar: f64 },
    /// As above, except state `index` leaves with `eps' = (d/2-1)/(d-1) * eps`.
    PerturbedUniformI {
        d: usize,
        gammabar: f64,
        index: usize,
    },
    /// `1 - beta` on the diagonal, `beta/(d-1)` elsewhere.
    LazyUniform { d: usize, beta: f64 },
}

/// Loosely-typed parameters, as they arrive from a command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FamilyParams {
    pub d: Option<usize>,
    pub pibar: Option<f64>,
    pub gammabar: Option<f64>,
    pub index: Option<usize>,
    pub beta: Option<f64>,
}

pub const FAMILY_NAMES: [&str; 5] = [
    "two-state-A",
    "two-state-B",
    "perturbed-uniform-0",
    "perturbed-uniform-i",
    "lazy-uniform",
];

fn need<T: Copy>(v: Option<T>, name: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::BadParams(format!("family {family} requires --{name}")))
}

impl ChainFamily {
    pub fn from_name(name: &str, params: &FamilyParams) -> Result<Self> {
        let fam = match name {
            "two-state-A" => ChainFamily::TwoStateA {
                pibar: need(params.pibar, "pibar", name)?,
            },
            "two-state-B" => ChainFamily::TwoStateB {
                pibar: need(params.pibar, "pibar", name)?,
            },
            "perturbed-uniform-0" => ChainFamily::PerturbedUniform0 {
                d: need(params.d, "d", name)?,
                gammabar: need(params.gammabar, "gammabar", name)?,
            },
            "perturbed-uniform-i" => ChainFamily::PerturbedUniformI {
                d: need(params.d, "d", name)?,
                gammabar: need(params.gammabar, "gammabar", name)?,
                index: params.index.unwrap_or(0),
            },
            "lazy-uniform" => ChainFamily::LazyUniform {
                d: need(params.d, "d", name)?,
                beta: need(params.beta, "beta", name)?,
            },
            other => {
                return Err(Error::BadParams(format!(
                    "unknown family {other:?}; expected one of {}",
                    FAMILY_NAMES.join(", ")
                )))
            }
        };
        fam.check()?;
        Ok(fam)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadParams(msg));
        match *self {
            ChainFamily::TwoStateA { pibar } | ChainFamily::TwoStateB { pibar } => {
                if !(pibar > 0.0 && pibar < 0.25) {
                    return bad(format!("pibar must lie in (0, 1/4), got {pibar}"));
                }
            }
            ChainFamily::PerturbedUniform0 { d, gammabar }
            | ChainFamily::PerturbedUniformI { d, gammabar, .. } => {
                if d < 3 {
                    return bad(format!("perturbed-uniform families need d >= 3, got {d}"));
                }
                if !(gammabar > 0.0 && gammabar < 0.5) {
                    return bad(format!("gammabar must lie in (0, 1/2), got {gammabar}"));
                }
                if let ChainFamily::PerturbedUniformI { index, .. } = *self {
                    if index >= d {
                        return bad(format!("index {index} out of range for d = {d}"));
                    }
                }
            }
            ChainFamily::LazyUniform { d, beta } => {
                if d < 2 {
                    return bad(format!("lazy-uniform needs d >= 2, got {d}"));
                }
                if !(beta > 0.0 && beta <= 1.0) || (d == 2 && beta >= 1.0) {
                    return bad(format!(
                        "beta must lie in (0, 1] (and below 1 when d = 2), got {beta}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Common exit probability `eps` of the perturbed-uniform families.
    fn eps(d: usize, gammabar: f64) -> f64 {
        (d as f64 - 1.0) / (d as f64 / 2.0) * gammabar
    }

    /// Exit probability of the perturbed state.
    fn eps_prime(d: usize, gammabar: f64) -> f64 {
        let d = d as f64;
        (d / 2.0 - 1.0) / (d - 1.0) * Self::eps(d as usize, gammabar)
    }

    pub fn build(&self) -> Result<ChainSpec> {
        self.check()?;
        match *self {
            ChainFamily::TwoStateA { pibar } => ChainSpec::new(
                DMatrix::from_row_slice(2, 2, &[1.0 - pibar, pibar, 1.0 - pibar, pibar]),
                Some(vec![1.0 - pibar, pibar]),
            ),
            ChainFamily::TwoStateB { pibar } => {
                let z = 1.0 + 2.0 * pibar;
                ChainSpec::new(
                    DMatrix::from_row_slice(2, 2, &[1.0 - pibar, pibar, 0.5, 0.5]),
                    Some(vec![1.0 / z, 2.0 * pibar / z]),
                )
            }
            ChainFamily::PerturbedUniform0 { d, gammabar } => {
                holding_chain(&vec![Self::eps(d, gammabar); d])
            }
            ChainFamily::PerturbedUniformI { d, gammabar, index } => {
                let mut exits = vec![Self::eps(d, gammabar); d];
                exits[index] = Self::eps_prime(d, gammabar);
                holding_chain(&exits)
            }
            ChainFamily::LazyUniform { d, beta } => holding_chain(&vec![beta; d]),
        }
    }

    /// Closed-form `(lambda_2, lambda_d)` where the family has one.
    pub fn closed_form_extremes(&self) -> (f64, f64) {
        match *self {
            ChainFamily::TwoStateA { .. } => (0.0, 0.0),
            ChainFamily::TwoStateB { pibar } => (0.5 - pibar, 0.5 - pibar),
            ChainFamily::PerturbedUniform0 { d, gammabar } => {
                let l = 1.0 - d as f64 / (d as f64 - 1.0) * Self::eps(d, gammabar);
                (l, l)
            }
            ChainFamily::PerturbedUniformI { d, gammabar, .. } => {
                let dd = d as f64;
                let eps = Self::eps(d, gammabar);
                (
                    1.0 - (dd / 2.0) / (dd - 1.0) * eps,
                    1.0 - dd / (dd - 1.0) * eps,
                )
            }
            ChainFamily::LazyUniform { d, beta } => {
                let l = 1.0 - beta * d as f64 / (d as f64 - 1.0);
                (l, l)
            }
        }
    }

    /// Closed-form spectral gap.
    pub fn closed_form_gap(&self) -> f64 {
        let (l2, ld) = self.closed_form_extremes();
        1.0 - l2.max(ld.abs())
    }
}

/// Chain that holds with probability `1 - exits[i]` and otherwise jumps to a
/// uniformly chosen other state. Stationary law is proportional to `1/exits[i]`.
fn holding_chain(exits: &[f64]) -> Result<ChainSpec> {
    let d = exits.len();
    let off = d as f64 - 1.0;
    let p = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0 - exits[i]
        } else {
            exits[i] / off
        }
    });
    let z: f64 = exits.iter().map(|e| 1.0 / e).sum();
    let pi = exits.iter().map(|e| (1.0 / e) / z).collect::<Vec<_>>();
    let sum: f64 = pi.iter().sum();
    ChainSpec::new(p, Some(pi.iter().map(|x| x / sum).collect()))
}

pub fn chain_family(name: &str, params: &FamilyParams) -> Result<ChainSpec> {
    ChainFamily::from_name(name, params)?.build()
}

/// A spread of family instances with at most `max_d` states, used by
/// oracle checks.
pub fn catalogue(max_d: usize) -> Vec<ChainFamily> {
    let mut out = Vec::new();
    for &pibar in &[0.01, 0.05, 0.1, 0.2, 0.24] {
        out.push(ChainFamily::TwoStateA { pibar });
        out.push(ChainFamily::TwoStateB { pibar });
    }
    for &d in &[3usize, 4, 5, 8, 16] {
        if d > max_d {
            continue;
        }
        for &gammabar in &[0.02, 0.1, 0.25, 0.45] {
            out.push(ChainFamily::PerturbedUniform0 { d, gammabar });
            for index in [0, d - 1] {
                out.push(ChainFamily::PerturbedUniformI { d, gammabar, index });
            }
        }
    }
    for &d in &[2usize, 3, 4, 8, 16] {
        if d > max_d {
            continue;
        }
        for &beta in &[0.01, 0.1, 0.5, 0.9, 1.0] {
            let fam = ChainFamily::LazyUniform { d, beta };
            if fam.check().is_ok() {
                out.push(fam);
            }
        }
    }
    out
}
