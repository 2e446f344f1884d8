//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured values (run with `-- --nocapture --test-threads=1` to see the
//! report in order). Every tolerance is pinned in code.

mod common;

use std::time::Instant;
use trionsim::dynamics::{
    resolve_dt, run_ensemble, run_ensemble_records, FinalState, SimConfig, TrajectoryInit,
};
use trionsim::estimators::{degree_of_correlation, parse_stream, serialize_stream};
use trionsim::hilbert::{Level, QuantumState, TransitionClass};
use trionsim::protocols::{
    ghz_map_outcome, map_conditionals, photon_number_distribution, rabi_experiment,
    ramsey_experiment, spin_preparation_trace, timebin_experiment, trajectory_pattern_stats,
};
use trionsim::pulses::{
    best_composite_flip, best_single_pulse_flip, build_ghz, build_idle, build_ramsey,
    build_single_pulse, GhzMode, RotationArea, TimebinVariant,
};

fn pass(criterion: u32, detail: String) {
    println!("criterion {criterion:>2} PASS: {detail}");
}

/// Criterion 1: on-resonance two-level drive with all decays zero matches
/// sin^2(Omega t / 2) with max population error < 1e-6 over 10 Rabi periods,
/// in under 5 seconds.
#[test]
fn criterion_01_rabi_oracle() {
    let start = Instant::now();
    let mut cfg = SimConfig::default_6t();
    cfg.gamma0 = 1e-30;
    cfg.hole_splitting = 0.0;
    cfg.trion_splitting = 0.0;
    cfg.t2_star = 1e30;
    cfg.hole_escape_time = 1e30;
    let omega = 40.0;
    let span = 10.0 * 2.0 * std::f64::consts::PI / omega;
    let seq = build_single_pulse(&cfg, span, omega).unwrap();
    let dt = resolve_dt(&cfg, &seq) / 16.0;
    let mut worst: f64 = 0.0;
    let mut state = QuantumState::basis(Level::HBar, 0);
    for k in 1..=40 {
        let (t0, t1) = (span * (k - 1) as f64 / 40.0, span * k as f64 / 40.0);
        state = trionsim::dynamics::propagate_master(&state, &cfg, &seq, t0, t1, dt).unwrap();
        let p_t = state.emitter_populations()[2];
        worst = worst.max((p_t - (omega * t1 / 2.0).sin().powi(2)).abs());
    }
    let elapsed = start.elapsed();
    assert!(worst < 1e-6, "max population error {worst}");
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(1, format!("max |P_T - sin^2| = {worst:.2e} over 10 Rabi periods in {elapsed:?}"));
}

/// Criterion 2: with purcellFactor = 5 the vertical fraction of radiative
/// jumps from |T> equals 5/6 within 3 sigma over 2e4 trajectories, under 60 s.
#[test]
fn criterion_02_branching_ratio() {
    let start = Instant::now();
    let cfg = SimConfig::default_6t();
    let seq = build_idle(&cfg, 2.0).unwrap();
    let records = run_ensemble_records(&cfg, &seq, 20_000, 206, TrajectoryInit::Level(Level::T));
    let mut vertical = 0usize;
    let mut total = 0usize;
    for r in &records {
        for j in &r.jumps {
            if j.transition.from == Level::T {
                total += 1;
                if j.transition.class == TransitionClass::Vertical {
                    vertical += 1;
                }
            }
        }
    }
    let frac = vertical as f64 / total as f64;
    let expect = 5.0 / 6.0;
    let sigma = (expect * (1.0 - expect) / total as f64).sqrt();
    let elapsed = start.elapsed();
    assert!(
        (frac - expect).abs() < 3.0 * sigma,
        "vertical fraction {frac} vs {expect} (sigma {sigma})"
    );
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        2,
        format!("vertical fraction {frac:.4} vs 5/6 (3 sigma = {:.4}) in {elapsed:?}", 3.0 * sigma),
    );
}

/// Criterion 3: with T2* = 2.445 ns input the fitted envelope recovers
/// 2.445 ns within 10% and the fitted fringe frequency equals the hole
/// splitting within one frequency bin; the pi-area variant's fringe amplitude
/// is consistent with zero under trajectory statistics.
#[test]
fn criterion_03_ramsey_self_consistency() {
    let mut cfg = SimConfig::default_6t();
    cfg.pulse_area_error = 0.0;
    assert_eq!(cfg.t2_star, 2.445);

    // Envelope + frequency on the deterministic master path.
    let delays: Vec<f64> = (0..1000).map(|k| k as f64 * 0.006).collect();
    let res = ramsey_experiment(&cfg, &delays, RotationArea::Half, 0, 0).unwrap();
    let tau = res.value("envelope_time_constant_ns").unwrap();
    assert!(
        (tau - 2.445).abs() / 2.445 < 0.10,
        "fitted envelope {tau} ns vs 2.445 ns"
    );
    let freq = res.value("fringe_frequency_ghz").unwrap();
    let expect = cfg.hole_splitting / (2.0 * std::f64::consts::PI);
    let bin = 1.0 / (delays.last().unwrap() - delays[0]);
    assert!((freq - expect).abs() <= bin, "fitted {freq} GHz vs {expect} GHz (bin {bin})");

    // Pi-area variant: fit the trajectory intensities at the known fringe
    // frequency (scanning frequency over noise-only data would inflate the
    // amplitude by the look-elsewhere effect); the amplitude must be
    // consistent with zero at 3 sigma.
    let pi_delays: Vec<f64> = (0..30).map(|k| k as f64 * 0.003).collect();
    let full = ramsey_experiment(&cfg, &pi_delays, RotationArea::Full, 250, 303).unwrap();
    let trace = full.trace("ramsey").unwrap();
    let points: Vec<(f64, f64)> = trace.rows.iter().map(|r| (r[0], r[3])).collect();
    let band = (cfg.hole_splitting * 0.999, cfg.hole_splitting * 1.001);
    let fit = trionsim::estimators::fit_fringe(&points, band, 3).unwrap();
    assert!(
        fit.amplitude < 3.0 * fit.amplitude_sigma,
        "pi-variant fringe amplitude {} vs 3 sigma {}",
        fit.amplitude,
        3.0 * fit.amplitude_sigma
    );
    pass(
        3,
        format!(
            "envelope {tau:.3} ns (target 2.445 ± 10%), fringe {freq:.3} GHz (target {expect:.3}), \
             pi-variant amplitude {:.2e} < 3 sigma {:.2e}",
            fit.amplitude,
            3.0 * fit.amplitude_sigma
        ),
    );
}

/// Criterion 4: spin-preparation emission decays exponentially with the
/// 4-level rate-equation pumping rate (5%) and the final |h> population
/// reaches 0.98 at long drive.
#[test]
fn criterion_04_spin_preparation() {
    let cfg = SimConfig::default_6t();
    let res = spin_preparation_trace(&cfg, 11.0, 0, 0).unwrap();
    let fitted = res.value("pump_time_constant_ns").unwrap();
    let final_h = res.value("final_h_population").unwrap();
    assert!(final_h >= 0.98, "final |h> population {final_h}");

    // Rate-equation oracle (independent populations-only model).
    let omega = cfg.timings.preparation_rabi;
    let gtot = cfg.trion_total_rate();
    let (gv, gd) = (cfg.vertical_rate(), cfg.diagonal_rate());
    let w = omega * omega / gtot;
    let mut p = [0.5f64, 0.0, 0.5];
    let dt = 1e-4;
    let mut pts = Vec::new();
    for k in 0..(11.0 / dt) as usize {
        let d = |p: &[f64; 3]| {
            [
                -w * (p[0] - p[1]) + gv * p[1],
                w * (p[0] - p[1]) - gtot * p[1],
                gd * p[1],
            ]
        };
        let k1 = d(&p);
        let mid = [p[0] + 0.5 * dt * k1[0], p[1] + 0.5 * dt * k1[1], p[2] + 0.5 * dt * k1[2]];
        let k2 = d(&mid);
        for i in 0..3 {
            p[i] += dt * k2[i];
        }
        let t = (k + 1) as f64 * dt;
        if t >= 5.0 / gtot && gv * p[1] > 1e-12 {
            pts.push((t - 5.0 / gtot, gv * p[1]));
        }
    }
    let oracle = trionsim::estimators::fit_exponential_envelope(
        &pts.iter().step_by(50).copied().collect::<Vec<_>>(),
    )
    .unwrap();
    let oracle_tau = oracle.get("time_constant").unwrap().value;
    assert!(
        (fitted - oracle_tau).abs() / oracle_tau < 0.05,
        "fitted pump constant {fitted} vs rate-equation {oracle_tau}"
    );
    pass(
        4,
        format!(
            "pump constant {fitted:.3} ns vs rate-equation {oracle_tau:.3} ns, final |h> {final_h:.4}"
        ),
    );
}

/// Criterion 5: ideal limit gives variant-A second-bin probability 1 within
/// 3 sigma; the experiment-tuned configuration lands at 0.77 +- 0.10 (A) and
/// 0.68 +- 0.10 (B); A and B mirror under ideal operations.
#[test]
fn criterion_05_timebin_correlations() {
    let ideal = SimConfig::ideal();
    let (a_ideal, _) = timebin_experiment(&ideal, TimebinVariant::A, 4000, 505).unwrap();
    let p2 = a_ideal.scalar("p_second_bin").unwrap();
    let sig = p2.std_error.unwrap().max(1e-3);
    assert!((p2.value - 1.0).abs() < 3.0 * sig, "ideal A second bin {} ± {sig}", p2.value);

    let (b_ideal, _) = timebin_experiment(&ideal, TimebinVariant::B, 4000, 506).unwrap();
    let p1b = b_ideal.scalar("p_first_bin").unwrap();
    let mirror_sigma =
        (p2.std_error.unwrap().powi(2) + p1b.std_error.unwrap().powi(2)).sqrt().max(1e-3);
    assert!(
        (p2.value - p1b.value).abs() < 3.0 * mirror_sigma,
        "mirror symmetry: A {} vs B {}",
        p2.value,
        p1b.value
    );

    // Experiment-tuned configuration; unit detection efficiency for statistics
    // (the normalized estimator is detection-efficiency invariant, criterion 8).
    let mut tuned = SimConfig::experiment_timebin();
    tuned.detection_efficiency = 1.0;
    let (a, _) = timebin_experiment(&tuned, TimebinVariant::A, 20_000, 550).unwrap();
    let pa = a.value("p_second_bin").unwrap();
    assert!(
        (pa - 0.77).abs() <= 0.10,
        "tuned variant A second-bin probability {pa} outside 0.77 ± 0.10"
    );
    let (b, _) = timebin_experiment(&tuned, TimebinVariant::B, 20_000, 551).unwrap();
    let pb = b.value("p_first_bin").unwrap();
    assert!(
        (pb - 0.68).abs() <= 0.10,
        "tuned variant B first-bin probability {pb} outside 0.68 ± 0.10"
    );
    pass(
        5,
        format!(
            "ideal A = {:.3} ± {sig:.3}; tuned A = {pa:.3} (0.77 ± 0.10), tuned B = {pb:.3} \
             (0.68 ± 0.10); mirror gap {:.3}",
            p2.value,
            (p2.value - p1b.value).abs()
        ),
    );
}

/// Criterion 6: ideal 3-photon fidelity 1 within 1e-9; at F_P = 5 the map
/// matches the brute-force oracle within 1e-6 and trajectory estimates agree
/// within 3 sigma at 1e4 runs; fidelity is monotone in Purcell factor and
/// photon count.
#[test]
fn criterion_06_ghz() {
    let ideal = SimConfig::ideal();
    let out = ghz_map_outcome(&ideal, 3, GhzMode::Ghz).unwrap();
    assert!((out.fidelity - 1.0).abs() < 1e-9, "ideal fidelity {}", out.fidelity);

    let mut fp5 = SimConfig::ideal();
    fp5.gamma0 = 2.0;
    fp5.purcell_factor = 5.0;
    // Short, cleanly driven pulses and wide windows: re-excitation within the
    // pulse and decay tails spilling past a window edge are the two physical
    // effects the 0/1-occupancy map cannot carry; both are first order in
    // Gamma*tau and exp(-Gamma*gap).
    fp5.timings.generation_pulse = 0.001;
    fp5.timings.gap_after_generation = 1.0;
    let map = ghz_map_outcome(&fp5, 3, GhzMode::Ghz).unwrap();
    let oracle = common::ghz_brute_force(&fp5, 3);
    assert!(
        (map.fidelity - oracle.fidelity).abs() < 1e-6,
        "map {} vs oracle {}",
        map.fidelity,
        oracle.fidelity
    );

    // Trajectory cross-check at 1e4 runs: the joint probability of the
    // all-odd logical pattern with exactly one photon per bin pair is
    // map-predictable (success * population); the trajectory success itself
    // also includes loss branches that mimic one-photon pairs, so the joint
    // observable is the clean comparison.
    let seq = build_ghz(&fp5, 3, GhzMode::Ghz).unwrap();
    let records = run_ensemble_records(&fp5, &seq, 10_000, 606, TrajectoryInit::Auto);
    let stats = trajectory_pattern_stats(&records, &seq, 3);
    let (succ, succ_err) = stats[0];
    let (odd_frac, odd_err) = stats[1];
    let joint = succ * odd_frac;
    let joint_err = ((succ_err * odd_frac).powi(2) + (succ * odd_err).powi(2)).sqrt();
    let predicted = map.success_probability * map.p_logical_ones;
    assert!(
        (joint - predicted).abs() < 3.0 * joint_err.max(2e-3),
        "joint all-odd probability {joint} ± {joint_err} vs map {predicted}"
    );

    // Monotonicity on 3-point grids (dephasing-limited configuration).
    let mut noisy = SimConfig::ideal();
    noisy.gamma0 = 2.0;
    noisy.purcell_factor = 5.0;
    noisy.t2_star = 20.0;
    let over_n: Vec<f64> = (1..=3)
        .map(|n| ghz_map_outcome(&noisy, n, GhzMode::Ghz).unwrap().fidelity)
        .collect();
    assert!(
        over_n[0] >= over_n[1] - 1e-9 && over_n[1] >= over_n[2] - 1e-9,
        "fidelity vs photon count {over_n:?}"
    );
    let over_fp: Vec<f64> = [3.0, 5.0, 10.0]
        .iter()
        .map(|&fp| {
            let mut c = noisy.clone();
            c.purcell_factor = fp;
            ghz_map_outcome(&c, 2, GhzMode::Ghz).unwrap().fidelity
        })
        .collect();
    assert!(
        over_fp[1] >= over_fp[0] - 1e-9 && over_fp[2] >= over_fp[1] - 1e-9,
        "fidelity vs Purcell factor {over_fp:?}"
    );
    pass(
        6,
        format!(
            "ideal fidelity 1 - {:.1e}; map vs oracle gap {:.1e}; joint all-odd {joint:.4} vs \
             predicted {predicted:.4}; monotone over n {over_n:?}",
            1.0 - out.fidelity,
            (map.fidelity - oracle.fidelity).abs()
        ),
    );
}

/// Criterion 7: every protocol's scalar observables agree between the master
/// and trajectory paths within 3 standard errors at 1e4 trajectories.
#[test]
fn criterion_07_master_trajectory_equivalence() {
    let mut clean = SimConfig::default_6t();
    clean.pulse_area_error = 0.0;
    clean.detection_efficiency = 1.0;
    let mut checks: Vec<(String, f64, f64, f64)> = Vec::new(); // (name, master, traj, sigma)

    // Spin preparation: final |h> population and emission integral.
    let prep = spin_preparation_trace(&clean, 4.0, 10_000, 700).unwrap();
    checks.push((
        "spinprep final_h".into(),
        prep.value("final_h_population").unwrap(),
        prep.value("traj_final_h_population").unwrap(),
        prep.scalar("traj_final_h_population").unwrap().std_error.unwrap().max(2e-3),
    ));
    checks.push((
        "spinprep emission".into(),
        prep.value("emission_integral").unwrap(),
        prep.value("traj_emission_integral").unwrap(),
        prep.scalar("traj_emission_integral").unwrap().std_error.unwrap(),
    ));

    // Rabi: readout intensity at two powers.
    let rabi = rabi_experiment(&clean, &[0.25, 1.0], 10_000, 701).unwrap();
    for row in &rabi.trace("rabi").unwrap().rows {
        checks.push((
            format!("rabi intensity @P={}", row[1]),
            row[2],
            row[3],
            row[4].max(1e-4),
        ));
    }

    // Ramsey: readout intensity at two delays.
    let ramsey = ramsey_experiment(&clean, &[0.1, 0.4], RotationArea::Half, 10_000, 702).unwrap();
    for row in &ramsey.trace("ramsey").unwrap().rows {
        checks.push((
            format!("ramsey intensity @dt={}", row[0]),
            row[1],
            row[2],
            row[3].max(1e-4),
        ));
    }

    // Photon number: mean emissions per pulse.
    let pn = photon_number_distribution(&clean, 0.25, None, 10_000, 703).unwrap();
    checks.push((
        "photnum mean".into(),
        pn.value("master_mean_photons").unwrap(),
        pn.value("mean_photons").unwrap(),
        pn.scalar("mean_photons").unwrap().std_error.unwrap(),
    ));

    // Storage: survival at one wait against the exact analytic curve.
    let mut esc = clean.clone();
    esc.hole_escape_time = 500.0;
    let seqw = trionsim::pulses::build_storage(&esc, 300.0).unwrap();
    let readout_start = seqw.window("readout").unwrap().start;
    let records = run_ensemble_records(&esc, &seqw, 10_000, 704, TrajectoryInit::Auto);
    let surv = records
        .iter()
        .filter(|r| r.charged && r.final_state.charged_at(readout_start))
        .count() as f64
        / records.len() as f64;
    let analytic = esc.hole_injection_prob * (-300.0 / 500.0f64).exp();
    checks.push((
        "storage survival @300ns".into(),
        analytic,
        surv,
        (analytic * (1.0 - analytic) / 10_000.0).sqrt(),
    ));

    // Timebin: trajectory conditional vs branch-map prediction in the
    // short-pulse regime.
    let mut short = clean.clone();
    short.hole_injection_prob = 1.0;
    short.timings.generation_pulse = 0.002;
    short.timings.gap_after_generation = 1.0;
    short.timings.generation_area = std::f64::consts::PI;
    let (tb, _) = timebin_experiment(&short, TimebinVariant::A, 10_000, 705).unwrap();
    checks.push((
        "timebin p_second".into(),
        map_conditionals(&short, TimebinVariant::A).unwrap().1,
        tb.value("p_second_bin").unwrap(),
        tb.scalar("p_second_bin").unwrap().std_error.unwrap().max(2e-3),
    ));

    // GHZ: joint all-odd pattern probability (as in criterion 6) at 1e4.
    let mut fp5 = SimConfig::ideal();
    fp5.gamma0 = 2.0;
    fp5.purcell_factor = 5.0;
    fp5.timings.generation_pulse = 0.001;
    fp5.timings.gap_after_generation = 1.0;
    let map = ghz_map_outcome(&fp5, 2, GhzMode::Ghz).unwrap();
    let seq = build_ghz(&fp5, 2, GhzMode::Ghz).unwrap();
    let records = run_ensemble_records(&fp5, &seq, 10_000, 706, TrajectoryInit::Auto);
    let stats = trajectory_pattern_stats(&records, &seq, 2);
    let joint = stats[0].0 * stats[1].0;
    let joint_err =
        ((stats[0].1 * stats[1].0).powi(2) + (stats[0].0 * stats[1].1).powi(2)).sqrt();
    checks.push((
        "ghz joint all-odd".into(),
        map.success_probability * map.p_logical_ones,
        joint,
        joint_err.max(2e-3),
    ));

    let mut worst_pull: f64 = 0.0;
    for (name, master, traj, sigma) in &checks {
        let pull = (master - traj).abs() / sigma;
        worst_pull = worst_pull.max(pull);
        assert!(
            pull < 3.0,
            "{name}: master {master} vs trajectories {traj} (pull {pull:.2} sigma)"
        );
    }
    pass(
        7,
        format!("{} observables agree; worst pull {worst_pull:.2} sigma (limit 3)", checks.len()),
    );
}

/// Criterion 8: degree of correlation on an independent-click stream is
/// 1.00 +- 0.05 at 1e4 repetitions; thinning invariance within 3 sigma;
/// serialization round-trips bit-exactly on 100 randomized streams.
#[test]
fn criterion_08_estimator_calibration() {
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeMap;
    use trionsim::estimators::{TimeTag, TimeTagStream};

    let mut windows = BTreeMap::new();
    windows.insert("gen1".to_string(), (0i64, 100i64));
    windows.insert("readout".to_string(), (200i64, 300i64));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(808);
    let reps: Vec<Vec<TimeTag>> = (0..10_000)
        .map(|_| {
            let mut tags = Vec::new();
            if rng.random::<f64>() < 0.35 {
                tags.push(TimeTag { time_ps: 50, channel: 0 });
            }
            if rng.random::<f64>() < 0.40 {
                tags.push(TimeTag { time_ps: 250, channel: 0 });
            }
            tags
        })
        .collect();
    let stream = TimeTagStream::new(1000, windows.clone(), reps.clone()).unwrap();
    let (value, err) = degree_of_correlation(&stream, "gen1", "readout").unwrap();
    assert!((value - 1.0).abs() < 0.05, "independent-stream correlation {value}");

    // Thinning invariance of a correlated stream.
    let correlated: Vec<Vec<TimeTag>> = (0..20_000)
        .map(|_| {
            if rng.random::<f64>() < 0.4 {
                vec![
                    TimeTag { time_ps: 30, channel: 0 },
                    TimeTag { time_ps: 230, channel: 0 },
                ]
            } else {
                Vec::new()
            }
        })
        .collect();
    let full = TimeTagStream::new(1000, windows.clone(), correlated.clone()).unwrap();
    let thinned: Vec<Vec<TimeTag>> = correlated
        .iter()
        .map(|tags| tags.iter().filter(|_| rng.random::<f64>() < 0.35).copied().collect())
        .collect();
    let thin = TimeTagStream::new(1000, windows, thinned).unwrap();
    let (v_full, e_full) = degree_of_correlation(&full, "gen1", "readout").unwrap();
    let (v_thin, e_thin) = degree_of_correlation(&thin, "gen1", "readout").unwrap();
    let sigma = (e_full * e_full + e_thin * e_thin).sqrt();
    assert!(
        (v_full - v_thin).abs() < 3.0 * sigma,
        "thinning moved the estimator: {v_full} vs {v_thin} ± {sigma}"
    );

    // 100 randomized streams round-trip bit-exactly.
    for case in 0..100u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9000 + case);
        let period = rng.random_range(10i64..100_000);
        let mut windows = BTreeMap::new();
        let mut cursor = 0i64;
        for k in 0..rng.random_range(0..4usize) {
            let start = cursor + rng.random_range(0..(period / 8).max(1));
            let end = (start + rng.random_range(1..(period / 8).max(2))).min(period);
            if start < end {
                windows.insert(format!("w{k}"), (start, end));
                cursor = end;
            }
        }
        let reps: Vec<Vec<TimeTag>> = (0..rng.random_range(0..20usize))
            .map(|_| {
                (0..rng.random_range(0..5usize))
                    .map(|_| TimeTag {
                        time_ps: rng.random_range(0..period),
                        channel: rng.random_range(0..3),
                    })
                    .collect()
            })
            .collect();
        let stream = TimeTagStream::new(period, windows, reps).unwrap();
        let parsed = parse_stream(&serialize_stream(&stream)).unwrap();
        assert_eq!(stream, parsed, "round trip failed for case {case}");
    }
    pass(
        8,
        format!(
            "independent stream = {value:.3} ± {err:.3}; thinning shift {:.4} < 3 sigma; \
             100 streams round-tripped",
            (v_full - v_thin).abs()
        ),
    );
}

/// Criterion 9: the 6 T composite flip calibrates to >= 0.99 and the 9 T
/// single-pulse flip is strictly below the 9 T composite.
#[test]
fn criterion_09_composite_calibration() {
    let six = SimConfig::default_6t();
    let flip = best_composite_flip(&six);
    assert!(flip.fidelity >= 0.99, "6 T composite flip fidelity {}", flip.fidelity);

    let nine = SimConfig::default_9t();
    let (_, single) = best_single_pulse_flip(&nine);
    let composite = best_composite_flip(&nine);
    assert!(
        single < composite.fidelity,
        "9 T single-pulse {single} not below composite {}",
        composite.fidelity
    );
    pass(
        9,
        format!(
            "6 T composite flip {:.6}; 9 T single {single:.4} < composite {:.4}",
            flip.fidelity, composite.fidelity
        ),
    );
}

/// Criterion 10: identical seeds reproduce byte-identical outputs across
/// thread counts (library-level; the CLI test suite covers the binary).
#[test]
fn criterion_10_determinism() {
    let cfg = SimConfig::experiment_timebin();
    let seq = trionsim::pulses::build_timebin(&cfg, TimebinVariant::A).unwrap();
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let (stats, stream) = run_ensemble(&cfg, &seq, 600, 1010);
            (stats, serialize_stream(&stream))
        })
    };
    let (stats_1, stream_1) = run_with(1);
    let (stats_4, stream_4) = run_with(4);
    assert_eq!(stream_1, stream_4, "streams differ across thread counts");
    for (a, b) in stats_1.observables.iter().zip(stats_4.observables.iter()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
    // Escaped/dark bookkeeping is part of the record stream too.
    let records_a = run_ensemble_records(&cfg, &seq, 64, 11, TrajectoryInit::Auto);
    let records_b = run_ensemble_records(&cfg, &seq, 64, 11, TrajectoryInit::Auto);
    for (a, b) in records_a.iter().zip(records_b.iter()) {
        assert_eq!(a.jumps.len(), b.jumps.len());
        assert_eq!(a.final_state == FinalState::Dark, b.final_state == FinalState::Dark);
    }
    pass(10, "ensemble stream and statistics byte-identical at 1 and 4 threads".into());
}
