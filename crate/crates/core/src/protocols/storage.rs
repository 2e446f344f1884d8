//! Hole-storage lifetime: inject, wait, read out. The survival probability is
//! exponential in the wait time with the configured escape lifetime.

use super::{ProtocolResult, Trace};
use crate::dynamics::{run_ensemble_records, SimConfig, TrajectoryInit};
use crate::estimators::fit_exponential_envelope;
use crate::pulses::build_storage;
use crate::Result;

/// Probability the emitter is still charged at readout versus wait time:
/// exact analytic curve plus Monte Carlo estimates and an exponential fit of
/// the simulated survival.
pub fn hole_storage_trace(
    config: &SimConfig,
    wait_times: &[f64],
    reps: usize,
    seed: u64,
) -> Result<ProtocolResult> {
    if wait_times.iter().any(|w| *w < 0.0) {
        return Err(crate::Error::EstimatorInput("wait times must be >= 0".into()));
    }
    let mut result = ProtocolResult::default();
    let mut rows = Vec::new();
    let mut mc_points = Vec::new();
    for &wait in wait_times {
        let analytic = config.hole_injection_prob * (-wait / config.hole_escape_time).exp();
        let mut row = vec![wait, analytic];
        if reps > 0 {
            let seq = build_storage(config, wait)?;
            let readout_start = seq.window("readout").expect("readout window").start;
            let records = run_ensemble_records(config, &seq, reps, seed, TrajectoryInit::Auto);
            let surviving = records
                .iter()
                .filter(|r| r.charged && r.final_state.charged_at(readout_start))
                .count();
            let p = surviving as f64 / reps as f64;
            let err = (p * (1.0 - p) / reps as f64).sqrt();
            row.push(p);
            row.push(err);
            if p > 0.0 {
                mc_points.push((wait, p));
            }
        }
        rows.push(row);
    }
    let mut columns = vec!["wait_ns".into(), "analytic_survival".into()];
    if reps > 0 {
        columns.push("mc_survival".into());
        columns.push("mc_survival_err".into());
    }
    result.traces.push(Trace { name: "storage".into(), columns, rows });
    result.push_scalar(
        "survival_at_zero_wait",
        config.hole_injection_prob,
    );
    if mc_points.len() >= 3 {
        let fit = fit_exponential_envelope(&mc_points)?;
        let tau = fit.get("time_constant").expect("time constant");
        result.push_ensemble_scalar("fitted_escape_time_ns", tau.value, tau.sigma, reps);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_wait_is_injection_probability() {
        let cfg = SimConfig::default_6t();
        let res = hole_storage_trace(&cfg, &[0.0], 0, 0).unwrap();
        assert_eq!(res.value("survival_at_zero_wait").unwrap(), cfg.hole_injection_prob);
        let trace = res.trace("storage").unwrap();
        assert_eq!(trace.rows[0][1], cfg.hole_injection_prob);
    }

    #[test]
    fn fitted_escape_time_matches_configuration() {
        let cfg = SimConfig::default_6t();
        let waits: Vec<f64> = (0..8).map(|k| k as f64 * 300.0).collect();
        let res = hole_storage_trace(&cfg, &waits, 10_000, 9).unwrap();
        let fitted = res.value("fitted_escape_time_ns").unwrap();
        assert!(
            (fitted - cfg.hole_escape_time).abs() / cfg.hole_escape_time < 0.10,
            "fitted {fitted} vs configured {}",
            cfg.hole_escape_time
        );
    }

    #[test]
    fn microsecond_lifetime_keeps_hole_beyond_50ns() {
        let cfg = SimConfig::default_6t();
        let res = hole_storage_trace(&cfg, &[50.0], 4000, 12).unwrap();
        let trace = res.trace("storage").unwrap();
        let analytic = trace.rows[0][1];
        let mc = trace.rows[0][2];
        assert!(analytic >= 0.95 * cfg.hole_injection_prob);
        assert!(mc >= 0.9 * cfg.hole_injection_prob, "survival {mc}");
    }
}
