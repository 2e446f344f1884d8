//! Ramsey interference: two composite rotations separated by a variable
//! delay, read out on the cycling transition. Fringes oscillate at the hole
//! Zeeman splitting and decay with T2*; pi-area composites flip the spin
//! outright and show no fringes.

use super::rabi::area_noise_nodes;
use super::{ProtocolResult, Trace};
use crate::dynamics::{
    initial_block, run_ensemble_records, MasterEngine, MasterInit, SimConfig, TrajectoryInit,
};
use crate::estimators::{fit_exponential_envelope, fit_fringe, visibility};
use crate::pulses::{build_ramsey, RotationArea, SegmentKind};
use crate::Result;

/// Readout intensity versus Ramsey delay, with fitted fringe frequency,
/// small-delay visibility, fringe amplitude, and envelope time constant.
/// `reps > 0` adds per-delay trajectory statistics.
pub fn ramsey_experiment(
    config: &SimConfig,
    delays: &[f64],
    area: RotationArea,
    reps: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    if delays.is_empty() {
        return Err(crate::Error::EstimatorInput("delays must be non-empty".into()));
    }
    if delays.iter().any(|d| *d < 0.0) {
        return Err(crate::Error::EstimatorInput("delays must be >= 0".into()));
    }
    let nodes = area_noise_nodes(config.pulse_area_error);

    // The sequence prefix (injection, preparation, first composite) does not
    // depend on the delay; evolve it once per drift node and resume. Delays
    // evaluate in parallel and reduce in index order.
    let seq0 = build_ramsey(config, delays[0], area)?;
    let prefix_end = second_rotation_end(&seq0);
    let mut intensities = vec![0.0f64; delays.len()];
    for (scale, weight) in &nodes {
        let engine0 = MasterEngine::with_area_scale(config, &seq0, *scale);
        let (rho0, charged_weight) = initial_block(config, &seq0, MasterInit::Auto);
        let rho_prefix = engine0.evolve(rho0, 0.0, prefix_end, |_, _| {});
        let contributions: Vec<crate::Result<f64>> = {
            use rayon::prelude::*;
            delays
                .par_iter()
                .map(|&delay| {
                    let seq = build_ramsey(config, delay, area)?;
                    let w = seq.window("readout").expect("readout window").clone();
                    let engine = MasterEngine::with_area_scale(config, &seq, *scale);
                    let eta = config.detection_efficiency;
                    let gv = config.vertical_rate();
                    let esc = config.escape_rate();
                    let mut acc = 0.0;
                    let mut last: Option<(f64, f64)> = None;
                    engine.evolve(rho_prefix, prefix_end, seq.span(), |t, rho| {
                        let rate =
                            eta * gv * rho[2][2].re * charged_weight * (-esc * t).exp();
                        if let Some((t0, r0)) = last {
                            let lo = t0.max(w.start);
                            let hi = t.min(w.end);
                            if hi > lo {
                                acc += 0.5 * (r0 + rate) * (hi - lo);
                            }
                        }
                        last = Some((t, rate));
                    });
                    Ok(acc)
                })
                .collect()
        };
        for (k, contrib) in contributions.into_iter().enumerate() {
            intensities[k] += weight * contrib?;
        }
    }

    let mut rows: Vec<Vec<f64>> = delays
        .iter()
        .zip(intensities.iter())
        .map(|(d, i)| vec![*d, *i])
        .collect();
    let mut columns = vec!["delay_ns".into(), "intensity".into()];

    if reps > 0 {
        for (k, &delay) in delays.iter().enumerate() {
            let seq = build_ramsey(config, delay, area)?;
            let w = seq.window("readout").expect("readout window").clone();
            let records = run_ensemble_records(config, &seq, reps, seed, TrajectoryInit::Auto);
            let counts: Vec<f64> =
                records.iter().map(|r| r.collected_in(w.start, w.end) as f64).collect();
            let mean = counts.iter().sum::<f64>() / reps as f64;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>()
                / (reps as f64 - 1.0).max(1.0);
            rows[k].push(mean);
            rows[k].push((var / reps as f64).sqrt());
        }
        columns.push("traj_intensity".into());
        columns.push("traj_intensity_err".into());
    }

    let mut result = ProtocolResult::default();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();

    if points.len() >= 8 {
        let span = points.last().unwrap().0 - points.first().unwrap().0;
        let min_dx = points
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        if span > 0.0 && min_dx.is_finite() {
            let band = (2.0 * std::f64::consts::PI * 0.25 / span, std::f64::consts::PI / min_dx);
            let fit = fit_fringe(&points, band, 4096)?;
            result.push_scalar("fringe_frequency_ghz", fit.omega / (2.0 * std::f64::consts::PI));
            result.push_scalar("fringe_amplitude", fit.amplitude);
            result.push_scalar("fringe_amplitude_sigma", fit.amplitude_sigma);
            result.push_scalar("fringe_offset", fit.offset);

            // Visibility over the first few fringe periods.
            let period = 2.0 * std::f64::consts::PI / fit.omega.max(1e-9);
            let small: Vec<(f64, f64)> = points
                .iter()
                .copied()
                .filter(|(t, _)| *t <= points[0].0 + 6.0 * period)
                .collect();
            if small.len() >= 8 {
                if let Ok((vis, vis_sigma)) = visibility(&small) {
                    result.push_scalar("visibility", vis);
                    result.push_scalar("visibility_sigma", vis_sigma);
                }
            }

            // Envelope: parabola-refined local fringe maxima above the offset.
            let peaks = fringe_peaks(&points, fit.offset);
            if peaks.len() >= 3 {
                if let Ok(env) = fit_exponential_envelope(&peaks) {
                    let tau = env.get("time_constant").expect("time constant");
                    result.push_scalar("envelope_time_constant_ns", tau.value);
                    result.push_scalar("envelope_time_constant_sigma", tau.sigma);
                }
            }
        }
    }

    result.traces.push(Trace { name: "ramsey".into(), columns, rows });
    Ok(result)
}

/// End time of the second rotation segment (= end of the first composite).
fn second_rotation_end(seq: &crate::pulses::PulseSequence) -> f64 {
    seq.segments()
        .iter()
        .filter(|s| matches!(s.kind, SegmentKind::RotationPulse { .. }))
        .nth(1)
        .map(|s| s.end())
        .unwrap_or(0.0)
}

/// Local maxima of y above the fitted offset, parabola-refined.
fn fringe_peaks(points: &[(f64, f64)], offset: f64) -> Vec<(f64, f64)> {
    let max_excursion = points
        .iter()
        .map(|(_, y)| (y - offset).abs())
        .fold(0.0f64, f64::max);
    let floor = 0.02 * max_excursion;
    let mut peaks = Vec::new();
    for i in 1..points.len().saturating_sub(1) {
        let (ym, y0, yp) = (points[i - 1].1, points[i].1, points[i + 1].1);
        if y0 >= ym && y0 >= yp && (y0 - offset) > floor {
            let denom = ym - 2.0 * y0 + yp;
            let amp = if denom < -1e-30 {
                y0 - (ym - yp) * (ym - yp) / (8.0 * denom)
            } else {
                y0
            };
            peaks.push((points[i].0, amp - offset));
        }
    }
    peaks.retain(|(_, a)| *a > 0.0);
    peaks
}
