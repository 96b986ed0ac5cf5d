//! Estimation of the spectral gap, the minimum stationary probability and the
//! mixing time of an ergodic reversible Markov chain from one sample path,
//! with confidence intervals computed from the same path.
//!
//! ```
//! use mixcert::{algorithm1, simulate_path, ChainFamily, Init};
//!
//! let chain = ChainFamily::TwoStateB { pibar: 0.2 }.build().unwrap();
//! let path = simulate_path(&chain, 20_000, &Init::Stationary, 1).unwrap();
//! let (_, report) = algorithm1(&path, 0.1).unwrap();
//! assert!(report.gap_interval.lo <= report.gap_interval.hi);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod estimate;
pub mod family;
pub mod harness;
pub mod interval;
pub mod json;
pub mod numerics;
pub mod path;
pub mod rng;
pub mod stats;

pub use chain::{
    check_ergodic_reversible, exact_spectral_summary, mixing_time_bounds, stationary_distribution,
    validate_chain, ChainFlags, ChainSpec, SpectralSummary, StationaryDistribution,
};
pub use error::{Error, Result};
pub use estimate::{
    bootstrap_estimate, plugin_estimate, plugin_from_path, theory_bounds, BootstrapEstimate,
    PluginEstimate, TheoryBounds, TheoryInputs,
};
pub use family::{chain_family, ChainFamily, FamilyParams, FAMILY_NAMES};
pub use harness::{
    accuracy_experiment, coverage_experiment, tv_mixing_oracle, width_experiment, ExperimentConfig,
};
pub use interval::{
    algorithm1, combined_intervals, entrywise_bound, stopping_rule, EmpiricalCertificate,
    FixedSource, Interval, IntervalReport, PathSource, SimulatedSource, StopTrace,
};
pub use json::{read_chain, to_json_string, write_chain};
pub use path::{read_path, simulate_path, skip_path, write_path, Init, SamplePath};
pub use stats::{collect_statistics, smoothed_transitions, PathStatistics};
