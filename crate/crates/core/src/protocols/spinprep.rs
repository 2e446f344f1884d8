//! Optical spin pumping: drive the cycling |hbar> -> |T> transition from a
//! mixed spin state; the resonance-fluorescence rate decays exponentially as
//! population shelves into |h> via the diagonal decay.

use super::{ProtocolResult, Trace};
use crate::dynamics::{
    master_trace, run_ensemble_records, FinalState, MasterInit, SimConfig, TrajectoryInit,
};
use crate::estimators::fit_exponential_envelope;
use crate::hilbert::Level;
use crate::pulses::build_spin_preparation;
use crate::Result;

/// Time-resolved emission while pumping, the fitted pumping time constant,
/// and the final |h> population. With `reps > 0` a trajectory ensemble
/// cross-checks the master-path observables.
pub fn spin_preparation_trace(
    config: &SimConfig,
    drive_duration: f64,
    reps: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    let seq = build_spin_preparation(config, drive_duration)?;
    let window = seq.window("prep").expect("prep window").clone();
    let trace = master_trace(config, &seq, MasterInit::Auto);

    let mut result = ProtocolResult::default();

    // Emission-rate trace restricted to the drive window, decimated.
    let mut rows = Vec::new();
    let stride = (trace.times.len() / 4000).max(1);
    for k in (0..trace.times.len()).step_by(stride) {
        let t = trace.times[k];
        if t >= window.start && t <= window.end {
            rows.push(vec![t, trace.collected_rate[k]]);
        }
    }
    result.traces.push(Trace {
        name: "emission".into(),
        columns: vec!["time_ns".into(), "detected_rate_per_ns".into()],
        rows,
    });

    // Fit the exponential tail after the Rabi transient (a few trion
    // lifetimes into the drive).
    let transient = window.start + 5.0 / config.trion_total_rate();
    let floor = trace
        .collected_rate
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        * 1e-6;
    let points: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(trace.collected_rate.iter())
        .filter(|(t, r)| **t >= transient && **t < window.end && **r > floor)
        .step_by(stride.max(5))
        .map(|(t, r)| (*t - transient, *r))
        .collect();
    // A non-decaying trace (ideal cycling limit) has no finite pump constant.
    let tau = match fit_exponential_envelope(&points) {
        Ok(fit) => fit.get("time_constant").expect("time constant").value,
        Err(crate::Error::DegenerateFit(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    result.push_scalar("pump_time_constant_ns", tau);

    // Final populations conditional on the hole being present.
    let pops = trace.populations.last().expect("nonempty trace");
    result.push_scalar("final_h_population", pops[0]);
    result.push_scalar("final_hbar_population", pops[1]);
    // Conditional on the hole being present, matching the trajectory stats.
    result.push_scalar(
        "emission_integral",
        trace.window_integral(window.start, window.end) / trace.charged_weight,
    );

    if reps > 0 {
        let records =
            run_ensemble_records(config, &seq, reps, seed, TrajectoryInit::Auto);
        let usable: Vec<_> = records
            .iter()
            .filter(|r| r.charged && r.final_state != FinalState::Dark)
            .collect();
        let n = usable.len().max(1);
        let final_h = usable
            .iter()
            .filter(|r| r.final_state == FinalState::Level(Level::H))
            .count() as f64
            / n as f64;
        let err = (final_h * (1.0 - final_h) / n as f64).sqrt();
        result.push_ensemble_scalar("traj_final_h_population", final_h, err, n);
        let counts: Vec<f64> = usable
            .iter()
            .map(|r| r.collected_in(window.start, window.end) as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
        result.push_ensemble_scalar(
            "traj_emission_integral",
            mean,
            (var / n as f64).sqrt(),
            n,
        );
    }
    Ok(result)
}
