//! Time evolution of the emitter: deterministic Lindblad master-equation
//! integration and quantum-jump Monte Carlo trajectories emitting time-tagged
//! photon records.
//!
//! Frame and channels: the rotating frame is anchored to the driven vertical
//! |T> -> |hbar> transition. Vertical decays are Purcell enhanced (rate
//! F_P*gamma0 each), diagonal decays run at gamma0, pure spin dephasing acts
//! on the ground doublet at rate 1/T2*, and hole escape empties the dot at
//! rate 1/holeEscapeTime. Escape commutes with everything and factorizes as
//! exp(-t/tau_esc); the master path exploits that exactly, the trajectory
//! path realizes escape as a terminal jump.

mod compile;
mod config;
mod master;
mod trajectory;

pub use compile::resolve_dt;
pub use config::{SimConfig, Timings};
pub use master::{master_trace, master_trace_scaled, propagate_master, MasterInit, MasterTrace};
pub(crate) use master::{initial_block, MasterEngine};
pub use trajectory::{
    run_ensemble, run_ensemble_records, run_trajectory, run_trajectory_indexed, FinalState, Jump,
    JumpRecord, TrajectoryInit,
};
pub(crate) use trajectory::stream_from_records;

use crate::hilbert::{lowering_operator, Level, Operator, Transition};
use crate::pulses::PulseSequence;
use crate::{Error, Result};
use num_complex::Complex64 as C64;

/// What a collapse channel does to the emitter.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    /// Radiative decay on one of the four optical transitions.
    Radiative(Transition),
    /// Pure spin dephasing on the ground doublet (no photon).
    Dephasing,
    /// Hole escape: the emitter goes dark; trajectories terminate.
    HoleEscape,
}

/// A Lindblad collapse channel: rate plus jump operator. The escape channel
/// leaves the four-level space, so it carries no matrix and is handled as
/// trajectory termination (master path: exact exp(-t/tau_esc) factor).
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    /// Channel rate, 1/ns.
    pub rate: f64,
    pub kind: ChannelKind,
    pub operator: Option<Operator>,
}

/// All collapse channels of the configured system: the four radiative decays
/// (vertical at purcellFactor*gamma0 each, diagonal at gamma0 each), ground
/// spin dephasing at 1/t2Star, and hole escape at 1/holeEscapeTime.
pub fn collapse_operators(config: &SimConfig) -> Vec<CollapseChannel> {
    let mut channels = Vec::with_capacity(6);
    for t in Transition::table(config.hole_splitting, config.trion_splitting) {
        let rate = match t.class {
            crate::hilbert::TransitionClass::Vertical => config.vertical_rate(),
            crate::hilbert::TransitionClass::Diagonal => config.diagonal_rate(),
        };
        channels.push(CollapseChannel {
            rate,
            kind: ChannelKind::Radiative(t),
            operator: Some(lowering_operator(t)),
        });
    }
    // sigma_z / sqrt(2) on the ground doublet: coherence decays at the channel
    // rate, populations are preserved.
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut deph = [[C64::new(0.0, 0.0); 4]; 4];
    deph[Level::H.index()][Level::H.index()] = s;
    deph[Level::HBar.index()][Level::HBar.index()] = -s;
    channels.push(CollapseChannel {
        rate: config.dephasing_rate(),
        kind: ChannelKind::Dephasing,
        operator: Some(Operator::from_emitter(&deph, 0)),
    });
    channels.push(CollapseChannel {
        rate: config.escape_rate(),
        kind: ChannelKind::HoleEscape,
        operator: None,
    });
    channels
}

/// Hermitian Hamiltonian (rad/ns) at time `t` of the sequence, in the frame
/// rotating at the driven-transition frequency.
///
/// Free part: Zeeman precession, diag(+w_h/2, -w_h/2, -w_h/2, -w_h/2 + w_T).
/// Resonant segments add (Omega/2)(sigma + sigma^dag) on their target
/// transition, minus the segment detuning on the driven trion level.
/// Rotation-pulse segments add the AC-Stark effective spin Hamiltonian of
/// `pulses::rotation_unitary`.
pub fn hamiltonian_at(config: &SimConfig, seq: &PulseSequence, t: f64) -> Result<Operator> {
    if t < 0.0 || t > seq.span() {
        return Err(Error::OutsideSequence { t, span: seq.span() });
    }
    let seg = seq.segment_at(t);
    let m = compile::segment_hamiltonian(
        config,
        seg.map(|s| (&s.kind, s.duration)),
        1.0,
    );
    Ok(Operator::from_emitter(&m, 0))
}

/// Mean and standard error of one ensemble observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableStat {
    pub name: String,
    pub mean: f64,
    pub std_error: f64,
}

/// Aggregated trajectory observables with statistical errors and RNG
/// provenance.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub observables: Vec<ObservableStat>,
    pub trajectory_count: usize,
    pub master_seed: u64,
}

impl EnsembleStats {
    pub fn get(&self, name: &str) -> Option<&ObservableStat> {
        self.observables.iter().find(|o| o.name == name)
    }

    pub(crate) fn from_samples(
        names: Vec<String>,
        samples: &[Vec<f64>],
        master_seed: u64,
    ) -> EnsembleStats {
        let n = samples.len().max(1);
        let observables = names
            .into_iter()
            .enumerate()
            .map(|(k, name)| {
                let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n as f64;
                let var = if samples.len() > 1 {
                    samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>()
                        / (samples.len() - 1) as f64
                } else {
                    0.0
                };
                ObservableStat { name, mean, std_error: (var / n as f64).sqrt() }
            })
            .collect();
        EnsembleStats { observables, trajectory_count: samples.len(), master_seed }
    }
}
