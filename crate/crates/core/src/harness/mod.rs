//! Monte Carlo experiments: specifications, the replicate loop, summaries and the
//! martingale condition scan.

pub mod martingale;
pub mod run;
pub mod spec;
pub mod stats;

pub use martingale::{martingale_condition_scan, ScanReport};
pub use run::{run_experiment, ExperimentResult, SizeResult};
pub use spec::{BetaRule, Config, ExperimentKind, ExperimentSpec, NamedFunction, TestFunction};
pub use stats::{ks_distance_to_normal, normal_cdf, semicircle_ks, Summary};
