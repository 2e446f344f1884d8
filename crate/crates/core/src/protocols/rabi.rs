//! Rabi oscillations of the readout intensity versus the square root of the
//! rotation-pulse power. Pulse-area drift noise damps the fringes and pushes
//! the mean intensity up with power.

use super::{ProtocolResult, Trace};
use crate::dynamics::{
    master_trace_scaled, run_ensemble_records, MasterInit, SimConfig, TrajectoryInit,
};
use crate::pulses::build_rabi;
use crate::Result;

/// Gauss-Hermite quadrature (7 nodes) for averaging over the Gaussian
/// rotation-area drift: integral of exp(-x^2) f(x) / sqrt(pi).
pub(crate) const GH_NODES: [(f64, f64); 7] = [
    (-2.651961356835233, 0.0009717812450995192),
    (-1.673551628767471, 0.05451558281912703),
    (-0.8162878828589647, 0.4256072526101278),
    (0.0, 0.8102646175568073),
    (0.8162878828589647, 0.4256072526101278),
    (1.673551628767471, 0.05451558281912703),
    (2.651961356835233, 0.0009717812450995192),
];
pub(crate) const SQRT_PI: f64 = 1.7724538509055159;

/// Area scales and weights of the drift average for the given RMS error.
pub(crate) fn area_noise_nodes(sigma: f64) -> Vec<(f64, f64)> {
    if sigma <= 0.0 {
        return vec![(1.0, 1.0)];
    }
    GH_NODES
        .iter()
        .map(|(x, w)| (((1.0 + sigma * std::f64::consts::SQRT_2 * x).max(0.0)), w / SQRT_PI))
        .collect()
}

/// Readout intensity for each rotation-pulse power: master path averaged over
/// the area-drift distribution, plus trajectory statistics when `reps > 0`.
pub fn rabi_experiment(
    config: &SimConfig,
    powers: &[f64],
    reps: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    if powers.is_empty() {
        return Err(crate::Error::EstimatorInput("powers must be non-empty".into()));
    }
    if powers.iter().any(|p| *p < 0.0) {
        return Err(crate::Error::EstimatorInput("powers must be non-negative".into()));
    }
    let nodes = area_noise_nodes(config.pulse_area_error);
    let mut rows = Vec::with_capacity(powers.len());
    let mut max_intensity: f64 = 0.0;
    for &power in powers {
        let seq = build_rabi(config, power)?;
        let w = seq.window("readout").expect("readout window").clone();
        let mut intensity = 0.0;
        for (scale, weight) in &nodes {
            let trace = master_trace_scaled(config, &seq, MasterInit::Auto, *scale);
            intensity += weight * trace.window_integral(w.start, w.end);
        }
        let mut row = vec![power.sqrt(), power, intensity];
        if reps > 0 {
            let records = run_ensemble_records(config, &seq, reps, seed, TrajectoryInit::Auto);
            let counts: Vec<f64> =
                records.iter().map(|r| r.collected_in(w.start, w.end) as f64).collect();
            let mean = counts.iter().sum::<f64>() / reps as f64;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>()
                / (reps as f64 - 1.0).max(1.0);
            row.push(mean);
            row.push((var / reps as f64).sqrt());
        }
        max_intensity = max_intensity.max(intensity);
        rows.push(row);
    }
    let mut columns = vec!["sqrt_power".into(), "power".into(), "intensity".into()];
    if reps > 0 {
        columns.push("traj_intensity".into());
        columns.push("traj_intensity_err".into());
    }
    let mut result = ProtocolResult::default();
    result.push_scalar("max_intensity", max_intensity);
    result.push_scalar("intensity_at_first_power", rows[0][2]);
    result.traces.push(Trace { name: "rabi".into(), columns, rows });
    Ok(result)
}
