//! Simulator of a singly charged quantum dot in a Voigt magnetic field with one
//! cavity-enhanced vertical transition, used as a source of time-bin-encoded
//! multi-photon entangled states.
//!
//! The crate is organized around the experiment it models:
//!
//! * [`hilbert`] — states and operators for the four-level emitter plus an
//!   optional register of time-bin photon modes.
//! * [`pulses`] — pulse segments and sequences, AC-Stark spin rotations,
//!   composite-rotation calibration, and builders for every pulse sequence.
//! * [`dynamics`] — Lindblad master-equation propagation and quantum-jump
//!   Monte Carlo trajectories with time-tagged photon records.
//! * [`protocols`] — in-silico versions of each experiment (spin pumping,
//!   Rabi, Ramsey, time-bin correlations, GHZ/cluster generation, ...).
//! * [`estimators`] — statistical estimators over time-tag streams: degree of
//!   correlation, conditional time-bin probabilities, fringe visibility,
//!   exponential-envelope fits, and the stream file format.
//!
//! Internal units: times in nanoseconds, rates in 1/ns, angular frequencies in
//! rad/ns. Time tags are serialized as integer picoseconds.

pub mod dynamics;
pub mod estimators;
pub mod hilbert;
mod linalg;
pub mod protocols;
pub mod pulses;
pub mod rng;

pub use dynamics::{CollapseChannel, EnsembleStats, JumpRecord, SimConfig};
pub use estimators::{FitResult, TimeTagStream};
pub use hilbert::{Level, Operator, QuantumState, Transition, TransitionClass};
pub use protocols::ProtocolResult;
pub use pulses::{CompositeRotation, PulseSegment, PulseSequence, SegmentKind};

/// Errors produced by the simulation layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("time {t} ns outside sequence span [0, {span} ns]")]
    OutsideSequence { t: f64, span: f64 },
    #[error("step size {dt} ns exceeds the resolution bound {bound} ns")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("composite calibration below threshold: best fidelity {best_fidelity}")]
    CalibrationFailed {
        best: Box<pulses::CompositeRotation>,
        best_fidelity: f64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("estimator input: {0}")]
    EstimatorInput(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
