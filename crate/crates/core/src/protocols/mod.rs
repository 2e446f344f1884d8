//! Executable in-silico versions of each experiment, producing named scalar
//! observables, time-resolved traces, and optional quantum states.

mod ghz;
mod photon_number;
mod rabi;
mod ramsey;
mod result;
mod spinprep;
mod storage;
mod timebin;

pub use ghz::{
    even_bins_mask, ghz_generation, ghz_ideal_target, ghz_map_outcome, odd_bins_mask,
    trajectory_pattern_stats, GhzOutcome, MAX_PHOTONS,
};
pub use photon_number::photon_number_distribution;
pub use rabi::rabi_experiment;
pub use ramsey::ramsey_experiment;
pub use result::{ProtocolResult, Scalar, Trace};
pub use spinprep::spin_preparation_trace;
pub use storage::hole_storage_trace;
pub use timebin::{map_conditionals, timebin_experiment};
