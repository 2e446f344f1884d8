//! The production branch map against the exhaustive pure-ket oracle.

mod common;

use trionsim::dynamics::SimConfig;
use trionsim::protocols::ghz_map_outcome;
use trionsim::pulses::GhzMode;

#[test]
fn branch_map_matches_exhaustive_oracle() {
    // Criterion-6 configuration: F_P = 5, everything else ideal.
    let mut cfg = SimConfig::ideal();
    cfg.gamma0 = 2.0;
    cfg.purcell_factor = 5.0;
    cfg.timings.generation_pulse = 0.002;
    for n in 1..=3usize {
        let oracle = common::ghz_brute_force(&cfg, n);
        let out = ghz_map_outcome(&cfg, n, GhzMode::Ghz).unwrap();
        assert!(
            (out.fidelity - oracle.fidelity).abs() < 1e-6,
            "n={n}: map fidelity {} vs oracle {}",
            out.fidelity,
            oracle.fidelity
        );
        assert!(
            (out.success_probability - oracle.success).abs() < 1e-9,
            "n={n}: map success {} vs oracle {}",
            out.success_probability,
            oracle.success
        );
        let map_rho = out.photonic_state.density();
        for b1 in 0..oracle.rho.nrows() {
            for b2 in 0..oracle.rho.ncols() {
                assert!(
                    (map_rho[(b1, b2)] - oracle.rho[(b1, b2)]).norm() < 1e-9,
                    "n={n}: rho mismatch at ({b1},{b2})"
                );
            }
        }
        // Loss bookkeeping closed form: each photon costs one excitation, so
        // the heralded probability is (F_P/(F_P+1))^n.
        let expect = (5.0f64 / 6.0).powi(n as i32);
        assert!((oracle.success - expect).abs() < 1e-9);
    }
}
