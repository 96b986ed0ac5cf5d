//! Sample paths: simulation, sub-sampling and the plain-text path format.
//!
//! The text format is one 0-based state per line. Lines starting with `#`
//! are comments and blank lines are ignored. The first non-comment line may
//! be `d=<int>` to declare the state count; otherwise `d = 1 + max state`.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::chain::{stationary_distribution, ChainSpec};
use crate::error::{Error, Result};
use crate::rng::{seeded_rng, SimRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePath {
    d: usize,
    states: Vec<usize>,
}

impl SamplePath {
    pub fn new(d: usize, states: Vec<usize>) -> Result<Self> {
        if d < 2 {
            return Err(Error::TooSmall(d));
        }
        if states.len() < 2 {
            return Err(Error::PathTooShort {
                needed: 2,
                got: states.len(),
            });
        }
        if let Some(&s) = states.iter().find(|&&s| s >= d) {
            return Err(Error::StateOutOfRange { state: s, d });
        }
        Ok(Self { d, states })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    /// First `n` states as a new path.
    pub fn prefix(&self, n: usize) -> Result<SamplePath> {
        SamplePath::new(self.d, self.states[..n.min(self.len())].to_vec())
    }
}

/// The `a`-skipped path `(X_a, X_2a, ...)`, i.e. 0-based indices
/// `a-1, 2a-1, ...`, of length `floor(n / a)`.
pub fn skip_path(path: &SamplePath, a: usize) -> Result<SamplePath> {
    if a == 0 {
        return Err(Error::Domain("skip amount must be at least 1".into()));
    }
    if a == 1 {
        return Ok(path.clone());
    }
    let kept = path.len() / a;
    if kept < 2 {
        return Err(Error::EmptyResult {
            skip: a,
            len: path.len(),
        });
    }
    let states = (1..=kept).map(|s| path.states[s * a - 1]).collect();
    SamplePath::new(path.d, states)
}

/// Initial state law of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Stationary,
    Uniform,
    State(usize),
    Distribution(Vec<f64>),
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stationary" => Ok(Init::Stationary),
            "uniform" => Ok(Init::Uniform),
            _ => match s.strip_prefix("state:") {
                Some(i) => i
                    .trim()
                    .parse()
                    .map(Init::State)
                    .map_err(|_| Error::BadInit(format!("bad state index in {s:?}"))),
                None => Err(Error::BadInit(format!(
                    "expected stationary, uniform or state:<i>, got {s:?}"
                ))),
            },
        }
    }
}

impl std::fmt::Display for Init {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Init::Stationary => f.write_str("stationary"),
            Init::Uniform => f.write_str("uniform"),
            Init::State(i) => write!(f, "state:{i}"),
            Init::Distribution(v) => write!(f, "distribution:{v:?}"),
        }
    }
}

impl Init {
    fn resolve(&self, chain: &ChainSpec) -> Result<Vec<f64>> {
        let d = chain.d();
        let dist = match self {
            Init::Stationary => match chain.pi_known() {
                Some(pi) => pi.iter().copied().collect(),
                None => {
                    stationary_distribution(chain)
                        .map_err(|e| Error::BadInit(format!("no stationary start: {e}")))?
                        .pi
                }
            },
            Init::Uniform => vec![1.0 / d as f64; d],
            Init::State(i) => {
                if *i >= d {
                    return Err(Error::BadInit(format!(
                        "start state {i} out of range for d = {d}"
                    )));
                }
                let mut v = vec![0.0; d];
                v[*i] = 1.0;
                v
            }
            Init::Distribution(v) => {
                let sum: f64 = v.iter().sum();
                if v.len() != d || v.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::BadInit(format!(
                        "initial distribution must be {d} non-negative weights summing to 1"
                    )));
                }
                v.clone()
            }
        };
        Ok(dist)
    }
}

/// Cumulative row sums for inverse-CDF sampling.
#[derive(Debug, Clone)]
struct CdfTable {
    cum: Vec<f64>,
    /// Last state with positive mass in each row, the fallback when rounding
    /// leaves the final cumulative sum just below the draw.
    last: Vec<usize>,
    d: usize,
}

impl CdfTable {
    fn new(rows: &[Vec<f64>]) -> Self {
        let d = rows[0].len();
        let mut cum = Vec::with_capacity(rows.len() * d);
        let mut last = Vec::with_capacity(rows.len());
        for row in rows {
            let mut acc = 0.0;
            for &x in row {
                acc += x;
                cum.push(acc);
            }
            last.push(row.iter().rposition(|&x| x > 0.0).unwrap_or(d - 1));
        }
        Self { cum, last, d }
    }

    fn sample(&self, row: usize, u: f64) -> usize {
        let cum = &self.cum[row * self.d..(row + 1) * self.d];
        cum.iter().position(|&c| u < c).unwrap_or(self.last[row])
    }
}

/// Step-by-step simulator; one uniform draw per state, including the first.
#[derive(Debug, Clone)]
pub struct Simulator {
    table: CdfTable,
    init: CdfTable,
    rng: SimRng,
    current: Option<usize>,
}

impl Simulator {
    pub fn new(chain: &ChainSpec, init: &Init, seed: u64) -> Result<Self> {
        let dist = init.resolve(chain)?;
        Ok(Self {
            table: CdfTable::new(&chain.rows()),
            init: CdfTable::new(&[dist]),
            rng: seeded_rng(seed),
            current: None,
        })
    }

    pub fn d(&self) -> usize {
        self.table.d
    }

    pub fn next_state(&mut self) -> usize {
        let u: f64 = self.rng.random();
        let next = match self.current {
            None => self.init.sample(0, u),
            Some(s) => self.table.sample(s, u),
        };
        self.current = Some(next);
        next
    }
}

pub fn simulate_path(chain: &ChainSpec, n: usize, init: &Init, seed: u64) -> Result<SamplePath> {
    if n < 2 {
        return Err(Error::PathTooShort { needed: 2, got: n });
    }
    let mut sim = Simulator::new(chain, init, seed)?;
    let states = (0..n).map(|_| sim.next_state()).collect();
    SamplePath::new(chain.d(), states)
}

pub fn parse_path(text: &str) -> Result<SamplePath> {
    let mut declared_d = None;
    let mut states = Vec::new();
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_data {
            seen_data = true;
            if let Some(v) = line.strip_prefix("d=") {
                let d = v.trim().parse::<usize>().map_err(|_| {
                    Error::Parse(format!("line {}: bad state count {v:?}", lineno + 1))
                })?;
                declared_d = Some(d);
                continue;
            }
        }
        let s = line.parse::<usize>().map_err(|_| {
            Error::Parse(format!(
                "line {}: expected a state index, got {line:?}",
                lineno + 1
            ))
        })?;
        states.push(s);
    }
    let d = match declared_d {
        Some(d) => d,
        None => states.iter().max().map_or(0, |m| m + 1),
    };
    SamplePath::new(d, states)
}

pub fn format_path(path: &SamplePath) -> String {
    let mut out = String::with_capacity(path.len() * 3 + 32);
    out.push_str("# sample path, 0-based states\n");
    let _ = writeln!(out, "d={}", path.d());
    for s in path.states() {
        let _ = writeln!(out, "{s}");
    }
    out
}

pub fn read_path(file: &Path) -> Result<SamplePath> {
    parse_path(&std::fs::read_to_string(file)?)
}

pub fn write_path(file: &Path, path: &SamplePath) -> Result<()> {
    std::fs::write(file, format_path(path))?;
    Ok(())
}
