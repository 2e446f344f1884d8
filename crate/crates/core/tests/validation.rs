//! Statistical validation of the trajectory sampler against analytic laws and
//! the master-equation path.

use trionsim::dynamics::{
    master_trace, run_ensemble_records, FinalState, MasterInit, SimConfig, TrajectoryInit,
};
use trionsim::hilbert::{Level, TransitionClass};
use trionsim::pulses::{build_idle, build_ramsey, RotationArea};

/// Asymptotic Kolmogorov-Smirnov p-value.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let lambda = (n as f64).sqrt() * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        p += 2.0 * sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
    }
    p.clamp(0.0, 1.0)
}

#[test]
fn jump_times_from_excited_state_are_exponential() {
    let cfg = SimConfig::default_6t();
    let seq = build_idle(&cfg, 2.0).unwrap();
    let n = 10_000;
    let records = run_ensemble_records(&cfg, &seq, n, 314, TrajectoryInit::Level(Level::T));
    let gamma_tot = cfg.trion_total_rate();
    let mut times: Vec<f64> = records
        .iter()
        .filter_map(|r| r.jumps.first().map(|j| j.time))
        .collect();
    assert!(times.len() > n * 9 / 10, "most trajectories decay well inside the window");
    times.sort_by(|a, b| a.total_cmp(b));
    let m = times.len() as f64;
    let mut d: f64 = 0.0;
    for (i, t) in times.iter().enumerate() {
        let cdf = 1.0 - (-gamma_tot * t).exp();
        let hi = (i as f64 + 1.0) / m - cdf;
        let lo = cdf - i as f64 / m;
        d = d.max(hi.max(lo));
    }
    let p = ks_p_value(d, times.len());
    assert!(p > 0.01, "KS statistic {d}, p = {p}");
}

#[test]
fn branching_ratio_and_detection_fraction() {
    let cfg = SimConfig::default_6t();
    let seq = build_idle(&cfg, 2.0).unwrap();
    let n = 6000;
    let records = run_ensemble_records(&cfg, &seq, n, 2718, TrajectoryInit::Level(Level::T));
    let mut vertical = 0usize;
    let mut total = 0usize;
    let mut detected = 0usize;
    for r in &records {
        for j in &r.jumps {
            if j.transition.from == Level::T {
                total += 1;
                if j.transition.class == TransitionClass::Vertical {
                    vertical += 1;
                }
                if j.detected {
                    detected += 1;
                }
            }
        }
    }
    let frac = vertical as f64 / total as f64;
    let expect = cfg.purcell_factor / (cfg.purcell_factor + 1.0);
    let sigma = (expect * (1.0 - expect) / total as f64).sqrt();
    assert!(
        (frac - expect).abs() < 3.0 * sigma,
        "vertical fraction {frac} vs {expect} (sigma {sigma})"
    );
    let det = detected as f64 / total as f64;
    let sigma_d = (cfg.detection_efficiency * (1.0 - cfg.detection_efficiency) / total as f64)
        .sqrt();
    assert!(
        (det - cfg.detection_efficiency).abs() < 3.0 * sigma_d,
        "detected fraction {det} vs {} (sigma {sigma_d})",
        cfg.detection_efficiency
    );
}

#[test]
fn standard_error_scales_as_inverse_sqrt_n() {
    // Emission-count observable during optical pumping (tracks the trion
    // population); quadrupling n halves the standard error within 20%.
    let cfg = SimConfig::default_6t();
    let seq = trionsim::pulses::build_spin_preparation(&cfg, 1.5).unwrap();
    let (stats_1k, _) = trionsim::dynamics::run_ensemble(&cfg, &seq, 1000, 99);
    let (stats_4k, _) = trionsim::dynamics::run_ensemble(&cfg, &seq, 4000, 99);
    let e1 = stats_1k.get("counts_prep").unwrap().std_error;
    let e4 = stats_4k.get("counts_prep").unwrap().std_error;
    let ratio = e1 / e4;
    assert!(
        (ratio - 2.0).abs() < 0.4,
        "error ratio {ratio} (e1 {e1}, e4 {e4})"
    );
}

#[test]
fn ramsey_ensemble_matches_master_populations() {
    // Deterministic master path vs 10^4 trajectories on a Ramsey sequence:
    // final-state populations and readout emission agree within 3 sigma.
    let mut cfg = SimConfig::default_6t();
    cfg.pulse_area_error = 0.0;
    cfg.detection_efficiency = 1.0;
    let seq = build_ramsey(&cfg, 0.4, RotationArea::Half).unwrap();
    let w = seq.window("readout").unwrap().clone();
    let trace = master_trace(&cfg, &seq, MasterInit::Auto);
    let master_intensity = trace.window_integral(w.start, w.end);

    let n = 10_000;
    let records = run_ensemble_records(&cfg, &seq, n, 424_242, TrajectoryInit::Auto);
    let counts: Vec<f64> = records.iter().map(|r| r.collected_in(w.start, w.end) as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sigma = (var / n as f64).sqrt();
    assert!(
        (mean - master_intensity).abs() < 3.0 * sigma,
        "readout intensity: master {master_intensity} vs trajectories {mean} ± {sigma}"
    );

    // Final |h> population among charged, unescaped repetitions.
    let final_h = records
        .iter()
        .filter(|r| r.charged && !r.final_state.escaped())
        .filter(|r| r.final_state == FinalState::Level(Level::H))
        .count() as f64;
    let charged = records
        .iter()
        .filter(|r| r.charged && !r.final_state.escaped())
        .count() as f64;
    let traj_h = final_h / charged;
    let pops = trace.populations.last().unwrap();
    let sigma_h = (traj_h * (1.0 - traj_h) / charged).sqrt();
    assert!(
        (traj_h - pops[0]).abs() < 3.0 * sigma_h.max(2e-3),
        "final h: master {} vs trajectories {traj_h} ± {sigma_h}",
        pops[0]
    );
}

#[test]
fn master_preserves_density_matrix_structure_on_protocol_sequences() {
    // Trace, Hermiticity, positivity after evolving every builder's sequence
    // (the constructor of QuantumState validates all three).
    let mut cfg = SimConfig::default_6t();
    cfg.pulse_area_error = 0.0;
    let seqs = vec![
        build_ramsey(&cfg, 0.3, RotationArea::Half).unwrap(),
        build_ramsey(&cfg, 0.3, RotationArea::Full).unwrap(),
        trionsim::pulses::build_timebin(&cfg, trionsim::pulses::TimebinVariant::A).unwrap(),
        trionsim::pulses::build_timebin(&cfg, trionsim::pulses::TimebinVariant::B).unwrap(),
        trionsim::pulses::build_ghz(&cfg, 2, trionsim::pulses::GhzMode::Ghz).unwrap(),
        trionsim::pulses::build_spin_preparation(&cfg, 3.0).unwrap(),
    ];
    for seq in seqs {
        let mut rho0 = ndarray::Array2::zeros((4, 4));
        rho0[(0, 0)] = num_complex::Complex64::new(0.5, 0.0);
        rho0[(1, 1)] = num_complex::Complex64::new(0.5, 0.0);
        let rho0 = trionsim::hilbert::QuantumState::from_density(rho0, 0).unwrap();
        let dt = trionsim::dynamics::resolve_dt(&cfg, &seq);
        let out =
            trionsim::dynamics::propagate_master(&rho0, &cfg, &seq, 0.0, seq.span(), dt)
                .unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-8, "trace drift on {}", seq.describe());
    }
}
