//! Multi-photon GHZ / linear-cluster state generation scored by a
//! branch-enumeration (Kraus) map on spin x time-bin-register space.
//!
//! Each generation window applies three branches to the |hbar> component:
//! vertical emission into the window's bin (amplitude -i sin(theta/2)
//! sqrt(F_P/(F_P+1)), coherent), diagonal decay (weight sin^2(theta/2)/(F_P+1),
//! removed as flagged loss), and no excitation (amplitude cos(theta/2),
//! coherent). Composite rotations enter as their calibrated unitaries and
//! Markovian dephasing as phase damping over the sequence's gap times, so the
//! map shares every parameter with the trajectory path while staying exact.
//!
//! Readout model: an ideal projective spin measurement after the final
//! composite pi/2. A detected photon projects onto |hbar>; with unit
//! detection efficiency the no-click outcome is an unambiguous |h> herald and
//! both outcomes are kept (each with its deterministic phase-frame
//! correction, as in the ideal protocol); below unit efficiency the no-click
//! outcome is ambiguous and is discarded (post-selection on the click).

use super::rabi::area_noise_nodes;
use super::{ProtocolResult, Trace};
use crate::dynamics::SimConfig;
use crate::hilbert::QuantumState;
use crate::pulses::{
    build_ghz, rotation_unitary_scaled, GhzMode, PulseSequence, SegmentKind,
};
use crate::{Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Maximum photon number supported by the register (2n bins, dim 2 * 4^n).
pub const MAX_PHOTONS: usize = 4;

/// Outcome of a branch-map run.
#[derive(Debug, Clone)]
pub struct GhzOutcome {
    /// Photonic reduced state after readout (register-only density matrix).
    pub photonic_state: QuantumState,
    /// Fidelity against the ideal target state (the x-rotation-frame GHZ or
    /// cluster ket). At finite field the calibrated composites carry
    /// deterministic axis phases, so this literal fidelity is lowered by
    /// known, correctable local frames as well as by genuine decoherence.
    pub fidelity: f64,
    /// Probability per repetition that the heralded state is delivered.
    pub success_probability: f64,
    /// Population of the all-odd-bins (logical 1...1) pattern.
    pub p_logical_ones: f64,
    /// Population of the all-even-bins (logical 0...0) pattern.
    pub p_logical_zeros: f64,
}

/// One scheduled map operation extracted from the pulse sequence.
pub(super) enum MapOp {
    /// Composite rotation: unitary factory over the area-noise scale.
    Composite { power: f64, axis_phase: f64, delay: f64, start: f64, end: f64 },
    /// Generation pulse filling the given bin (0-based).
    Generation { bin: usize, start: f64, end: f64 },
}

/// Spin x register density matrix, subnormalized by removed loss branches.
pub(super) struct SpinRegister {
    rho: Array2<C64>,
    bins: usize,
}

impl SpinRegister {
    fn new(bins: usize) -> SpinRegister {
        let dim = 2 << bins;
        let mut rho = Array2::zeros((dim, dim));
        rho[(0, 0)] = C64::new(1.0, 0.0); // |h> vacuum
        SpinRegister { rho, bins }
    }

    fn dim(&self) -> usize {
        2 << self.bins
    }

    fn pd(&self) -> usize {
        1 << self.bins
    }

    /// Index of |spin> |bits>.
    fn idx(&self, spin: usize, bits: usize) -> usize {
        spin * self.pd() + bits
    }

    fn apply_spin_unitary(&mut self, u: &[[C64; 2]; 2]) {
        let pd = self.pd();
        let dim = self.dim();
        // rho <- (U x I) rho (U x I)^dag, exploiting the block structure.
        let mut out: Array2<C64> = Array2::zeros((dim, dim));
        for s1 in 0..2 {
            for s2 in 0..2 {
                for k1 in 0..2 {
                    for k2 in 0..2 {
                        let f = u[s1][k1] * u[s2][k2].conj();
                        if f.norm_sqr() == 0.0 {
                            continue;
                        }
                        for b1 in 0..pd {
                            for b2 in 0..pd {
                                let v = self.rho[(k1 * pd + b1, k2 * pd + b2)];
                                if v.norm_sqr() != 0.0 {
                                    out[(s1 * pd + b1, s2 * pd + b2)] += f * v;
                                }
                            }
                        }
                    }
                }
            }
        }
        self.rho = out;
    }

    /// Markovian spin dephasing over `dt`: spin off-diagonals times
    /// exp(-dt/t2star).
    fn dephase(&mut self, dt: f64, t2_star: f64) {
        if dt <= 0.0 || !(t2_star < f64::INFINITY) {
            return;
        }
        let f = C64::new((-dt / t2_star).exp(), 0.0);
        let pd = self.pd();
        for b1 in 0..pd {
            for b2 in 0..pd {
                let i01 = (self.idx(0, b1), self.idx(1, b2));
                let i10 = (self.idx(1, b1), self.idx(0, b2));
                self.rho[i01] = self.rho[i01] * f;
                self.rho[i10] = self.rho[i10] * f;
            }
        }
    }

    /// Generation window on `bin`: returns the removed (diagonal-loss)
    /// weight. theta is the pulse area; q_v the vertical branching fraction.
    ///
    /// The vertical photon is emitted into the register (a tracked mode),
    /// so no-excitation and vertical-emission amplitudes stay in ONE coherent
    /// Kraus operator
    ///   K = |h><h| (x) I + |hbar><hbar| (x) (cos(theta/2) I
    ///       - i sin(theta/2) sqrt(q_v) set_bit(bin));
    /// only the diagonal decay (photon lost to an orthogonal frequency mode)
    /// is a separate branch, removed as flagged loss.
    fn generation(&mut self, bin: usize, theta: f64, q_v: f64) -> f64 {
        let pd = self.pd();
        let dim = self.dim();
        let half = theta / 2.0;
        let c_ne = C64::new(half.cos(), 0.0);
        let a_v = C64::new(0.0, -1.0) * half.sin() * q_v.sqrt();
        let p_exc = half.sin().powi(2);
        let loss_weight_fraction = p_exc * (1.0 - q_v);

        // Loss branch weight: population of |hbar> (any register state).
        let mut hbar_pop = 0.0;
        for b in 0..pd {
            hbar_pop += self.rho[(self.idx(1, b), self.idx(1, b))].re;
        }
        let lost = hbar_pop * loss_weight_fraction;

        let bit = 1usize << bin;
        // K maps |0,b> -> |0,b>; |1,b> -> c_ne |1,b> + a_v |1, b|bit> (the
        // emission term vanishes if the bin is somehow already occupied).
        let expand = |spin: usize, b: usize| -> [(usize, usize, C64); 2] {
            if spin == 0 {
                [(0, b, C64::new(1.0, 0.0)), (0, b, C64::new(0.0, 0.0))]
            } else if b & bit == 0 {
                [(1, b, c_ne), (1, b | bit, a_v)]
            } else {
                [(1, b, c_ne), (1, b, C64::new(0.0, 0.0))]
            }
        };
        let mut out: Array2<C64> = Array2::zeros((dim, dim));
        for s1 in 0..2 {
            for b1 in 0..pd {
                for s2 in 0..2 {
                    for b2 in 0..pd {
                        let v = self.rho[(self.idx(s1, b1), self.idx(s2, b2))];
                        if v.norm_sqr() == 0.0 {
                            continue;
                        }
                        for (o1s, o1b, amp1) in expand(s1, b1) {
                            if amp1.norm_sqr() == 0.0 {
                                continue;
                            }
                            for (o2s, o2b, amp2) in expand(s2, b2) {
                                if amp2.norm_sqr() == 0.0 {
                                    continue;
                                }
                                out[(self.idx(o1s, o1b), self.idx(o2s, o2b))] +=
                                    amp1 * amp2.conj() * v;
                            }
                        }
                    }
                }
            }
        }
        self.rho = out;
        lost
    }

    #[allow(dead_code)]
    fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[(i, i)].re).sum()
    }

    /// Spin-conditioned register block <spin| rho |spin>.
    pub(super) fn spin_block(&self, spin: usize) -> Array2<C64> {
        let pd = self.pd();
        let mut out = Array2::zeros((pd, pd));
        for b1 in 0..pd {
            for b2 in 0..pd {
                out[(b1, b2)] = self.rho[(self.idx(spin, b1), self.idx(spin, b2))];
            }
        }
        out
    }
}

/// Extract the map schedule (composites and generation windows, in time
/// order) from a built sequence; generation window `k` fills register bit `k`.
pub(super) fn schedule(seq: &PulseSequence, gen_windows: &[String]) -> Vec<MapOp> {
    let mut ops: Vec<MapOp> = Vec::new();
    for (k, name) in gen_windows.iter().enumerate() {
        let w = seq.window(name).expect("generation window");
        ops.push(MapOp::Generation { bin: k, start: w.start, end: w.end });
    }
    // Composites: consecutive rotation-segment pairs.
    let rotations: Vec<_> = seq
        .segments()
        .iter()
        .filter(|s| matches!(s.kind, SegmentKind::RotationPulse { .. }))
        .collect();
    assert!(rotations.len() % 2 == 0, "rotation pulses come in composite pairs");
    for pair in rotations.chunks(2) {
        let (power, axis_phase) = match pair[0].kind {
            SegmentKind::RotationPulse { power, axis_phase } => (power, axis_phase),
            _ => unreachable!(),
        };
        let delay = pair[1].start - pair[0].end();
        ops.push(MapOp::Composite {
            power,
            axis_phase,
            delay,
            start: pair[0].start,
            end: pair[1].end(),
        });
    }
    ops.sort_by(|a, b| {
        let ta = match a {
            MapOp::Composite { start, .. } => *start,
            MapOp::Generation { start, .. } => *start,
        };
        let tb = match b {
            MapOp::Composite { start, .. } => *start,
            MapOp::Generation { start, .. } => *start,
        };
        ta.total_cmp(&tb)
    });
    ops
}

/// Run the branch map once at a fixed area scale. Returns the subnormalized
/// final spin-register state and the accumulated loss weight.
pub(super) fn run_map(
    config: &SimConfig,
    seq: &PulseSequence,
    gen_windows: &[String],
    area_scale: f64,
) -> (SpinRegister, f64) {
    let bins = gen_windows.len();
    let mut state = SpinRegister::new(bins);
    let q_v = config.purcell_factor / (config.purcell_factor + 1.0);
    let theta_gen = config.timings.generation_area * area_scale;
    let tau_rot = config.timings.rotation_pulse;
    let mut lost = 0.0;
    let mut cursor = 0.0f64;
    for op in schedule(seq, gen_windows) {
        match op {
            MapOp::Composite { power, axis_phase, delay, start, end } => {
                state.dephase(start - cursor, config.t2_star);
                let u1 = rotation_unitary_scaled(config, power, tau_rot, axis_phase, area_scale);
                let p = crate::pulses::precession_unitary(config, delay);
                let u = crate::linalg::mat2_mul(&u1, &crate::linalg::mat2_mul(&p, &u1));
                state.apply_spin_unitary(&u);
                cursor = end;
            }
            MapOp::Generation { bin, start, end } => {
                state.dephase(start - cursor, config.t2_star);
                lost += state.generation(bin, theta_gen, q_v);
                cursor = end;
            }
        }
    }
    // Dephase up to the readout drive.
    let readout = seq.window("readout").expect("readout window").start;
    state.dephase(readout - cursor, config.t2_star);
    (state, lost)
}

/// Pattern bitmask with every odd time bin occupied (logical 1...1):
/// tau = 1, 3, 5, ... map to register bits 0, 2, 4, ...
pub fn odd_bins_mask(n_photons: usize) -> usize {
    (0..n_photons).map(|k| 1usize << (2 * k)).sum()
}

pub fn even_bins_mask(n_photons: usize) -> usize {
    (0..n_photons).map(|k| 1usize << (2 * k + 1)).sum()
}

/// Ideal pure-state fold of the protocol with exact x-frame rotations:
/// returns (hbar-branch, h-branch) register kets after the final composite
/// pi/2 (unnormalized by the 1/2 measurement weights).
fn ideal_branches(n_photons: usize, mode: GhzMode) -> (Array1<C64>, Array1<C64>) {
    let bins = 2 * n_photons;
    let pd = 1usize << bins;
    // Pure state over spin x register as two register-sized blocks.
    let mut h: Array1<C64> = Array1::zeros(pd);
    let mut hb: Array1<C64> = Array1::zeros(pd);
    h[0] = C64::new(1.0, 0.0);
    let rx = |theta: f64| {
        crate::linalg::su2_exp(theta / 2.0, 0.0, 0.0, 1.0)
    };
    let ry = |theta: f64| {
        crate::linalg::su2_exp(0.0, theta / 2.0, 0.0, 1.0)
    };
    let apply = |u: &[[C64; 2]; 2], h: &mut Array1<C64>, hb: &mut Array1<C64>| {
        for b in 0..h.len() {
            let (a0, a1) = (h[b], hb[b]);
            h[b] = u[0][0] * a0 + u[0][1] * a1;
            hb[b] = u[1][0] * a0 + u[1][1] * a1;
        }
    };
    let generate = |bin: usize, h: &mut Array1<C64>, hb: &mut Array1<C64>| {
        // Photon into `bin` iff the spin is |hbar>, amplitude -i.
        let bit = 1usize << bin;
        let minus_i = C64::new(0.0, -1.0);
        let mut next: Array1<C64> = Array1::zeros(hb.len());
        for b in 0..hb.len() {
            if hb[b].norm_sqr() != 0.0 {
                debug_assert_eq!(b & bit, 0, "ideal protocol fills each bin once");
                next[b | bit] = minus_i * hb[b];
            }
        }
        let _ = h;
        *hb = next;
    };
    apply(&rx(PI / 2.0), &mut h, &mut hb);
    for k in 0..n_photons {
        generate(2 * k, &mut h, &mut hb);
        apply(&rx(PI), &mut h, &mut hb);
        generate(2 * k + 1, &mut h, &mut hb);
        match mode {
            GhzMode::Ghz => apply(&rx(PI), &mut h, &mut hb),
            GhzMode::Cluster => apply(&ry(PI / 2.0), &mut h, &mut hb),
        }
    }
    apply(&rx(PI / 2.0), &mut h, &mut hb);
    (hb, h)
}

/// Ideal target photonic state of the protocol (the hbar-heralded branch of
/// the ideal operations). For GHZ mode this is exactly
/// (|odd bins> + |even bins>)/sqrt(2) in the logical encoding.
pub fn ghz_ideal_target(n_photons: usize, mode: GhzMode) -> QuantumState {
    let (hb, _) = ideal_branches(n_photons, mode);
    let norm = hb.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v = hb.mapv(|z| z / norm);
    QuantumState::from_photon_pure(v, 2 * n_photons)
        .expect("ideal branch is a valid ket")
        .canonicalized()
}

/// Deterministic frame correction for the unambiguous no-click (|h>) readout
/// outcome: a Z operation on one time-bin qubit (sign flip of components
/// with that bin occupied) that maps the ideal h-heralded branch onto the
/// hbar-heralded branch, up to a global phase that drops out of the merged
/// density matrix. The smallest working bin is chosen; for the GHZ protocol
/// it is the first bin (tau = 1). Returns None if no single-bin Z works.
fn no_click_correction(n_photons: usize, mode: GhzMode) -> Option<Array1<C64>> {
    let (hb, h) = ideal_branches(n_photons, mode);
    let pd = hb.len();
    'bins: for k in 0..(2 * n_photons) {
        let bit = 1usize << k;
        let z = |b: usize| if b & bit != 0 { -1.0 } else { 1.0 };
        // Global phase from the first component with support in both.
        let mut global: Option<C64> = None;
        for b in 0..pd {
            let corrected = z(b) * h[b];
            match (corrected.norm() > 1e-12, hb[b].norm() > 1e-12) {
                (false, false) => continue,
                (true, true) => {
                    let ratio = hb[b] / corrected;
                    if (ratio.norm() - 1.0).abs() > 1e-9 {
                        continue 'bins;
                    }
                    match global {
                        None => global = Some(ratio),
                        Some(g) => {
                            if (ratio - g).norm() > 1e-9 {
                                continue 'bins;
                            }
                        }
                    }
                }
                _ => continue 'bins,
            }
        }
        if global.is_some() {
            let phases =
                Array1::from((0..pd).map(|b| C64::new(z(b), 0.0)).collect::<Vec<_>>());
            return Some(phases);
        }
    }
    None
}

/// Generate an n-photon GHZ or cluster state: branch-map evolution over
/// emitter x 2n-bin register, simulated readout projection, fidelity against
/// the ideal target, and success probability.
pub fn ghz_generation(
    config: &SimConfig,
    n_photons: usize,
    mode: GhzMode,
) -> Result<ProtocolResult> {
    if n_photons < 1 || n_photons > MAX_PHOTONS {
        return Err(Error::InvalidSequence(format!(
            "photon count {n_photons} outside 1..={MAX_PHOTONS} (register bound)"
        )));
    }
    let outcome = ghz_map_outcome(config, n_photons, mode)?;
    let mut result = ProtocolResult::default();
    result.push_scalar("fidelity", outcome.fidelity);
    result.push_scalar("success_probability", outcome.success_probability);
    result.push_scalar("p_logical_ones", outcome.p_logical_ones);
    result.push_scalar("p_logical_zeros", outcome.p_logical_zeros);
    let pd = 1usize << (2 * n_photons);
    let rho = outcome.photonic_state.density();
    result.traces.push(Trace {
        name: "pattern_populations".into(),
        columns: vec!["pattern".into(), "population".into()],
        rows: (0..pd).map(|b| vec![b as f64, rho[(b, b)].re]).collect(),
    });
    result.states.push(("photonic".into(), outcome.photonic_state));
    Ok(result)
}

/// Branch-map outcome with the readout model applied.
pub fn ghz_map_outcome(
    config: &SimConfig,
    n_photons: usize,
    mode: GhzMode,
) -> Result<GhzOutcome> {
    if n_photons < 1 || n_photons > MAX_PHOTONS {
        return Err(Error::InvalidSequence(format!(
            "photon count {n_photons} outside 1..={MAX_PHOTONS} (register bound)"
        )));
    }
    let seq = build_ghz(config, n_photons, mode)?;
    let pd = 1usize << (2 * n_photons);
    let nodes = area_noise_nodes(config.pulse_area_error);

    let gen_windows: Vec<String> =
        (0..(2 * n_photons)).map(|k| format!("tau{}", k + 1)).collect();
    let mut click_block: Array2<C64> = Array2::zeros((pd, pd));
    let mut noclick_block: Array2<C64> = Array2::zeros((pd, pd));
    for (scale, weight) in &nodes {
        let (state, _lost) = run_map(config, &seq, &gen_windows, *scale);
        let w = C64::new(*weight, 0.0);
        click_block = click_block + state.spin_block(1).mapv(|z| z * w);
        noclick_block = noclick_block + state.spin_block(0).mapv(|z| z * w);
    }

    let survival = (-seq.span() / config.hole_escape_time).exp();
    let p_click: f64 = (0..pd).map(|b| click_block[(b, b)].re).sum();
    let p_noclick: f64 = (0..pd).map(|b| noclick_block[(b, b)].re).sum();

    let unit_efficiency = (config.detection_efficiency - 1.0).abs() < 1e-12;
    let correction = if unit_efficiency { no_click_correction(n_photons, mode) } else { None };

    let (mut rho_phot, success) = match correction {
        Some(phases) => {
            let mut merged = click_block.clone();
            for b1 in 0..pd {
                for b2 in 0..pd {
                    merged[(b1, b2)] +=
                        phases[b1] * noclick_block[(b1, b2)] * phases[b2].conj();
                }
            }
            (merged, survival * (p_click + p_noclick))
        }
        None => (click_block, survival * p_click),
    };
    let trace: f64 = (0..pd).map(|b| rho_phot[(b, b)].re).sum();
    if trace <= 0.0 {
        return Err(Error::InvalidState("readout projection has zero weight".into()));
    }
    let inv = C64::new(1.0 / trace, 0.0);
    rho_phot.mapv_inplace(|z| z * inv);
    // Hermitize the numerical residue.
    let mut sym = Array2::zeros((pd, pd));
    for b1 in 0..pd {
        for b2 in 0..pd {
            sym[(b1, b2)] = 0.5 * (rho_phot[(b1, b2)] + rho_phot[(b2, b1)].conj());
        }
    }
    let photonic_state = QuantumState::from_photon_density(sym, 2 * n_photons)?;
    let target = ghz_ideal_target(n_photons, mode);
    let fidelity = photonic_state.fidelity(&target)?;
    let ones = odd_bins_mask(n_photons);
    let zeros = even_bins_mask(n_photons);
    let rho = photonic_state.density();
    Ok(GhzOutcome {
        photonic_state,
        fidelity,
        success_probability: success,
        p_logical_ones: rho[(ones, ones)].re,
        p_logical_zeros: rho[(zeros, zeros)].re,
    })
}

/// Trajectory-side pattern statistics for the GHZ cross-check: repetitions
/// where every bin pair holds exactly one collected photon count as
/// successes; among them, the fractions landing on the all-odd and all-even
/// logical patterns. Returns (success fraction, p_odd, p_even) with their
/// binomial standard errors.
pub fn trajectory_pattern_stats(
    records: &[crate::dynamics::JumpRecord],
    seq: &PulseSequence,
    n_photons: usize,
) -> [(f64, f64); 3] {
    let windows: Vec<_> = (0..(2 * n_photons))
        .map(|k| seq.window(&format!("tau{}", k + 1)).expect("tau window").clone())
        .collect();
    let mut successes = 0usize;
    let mut odd = 0usize;
    let mut even = 0usize;
    let odd_mask = odd_bins_mask(n_photons);
    let even_mask = even_bins_mask(n_photons);
    for r in records {
        if !r.charged {
            continue;
        }
        let mut pattern = 0usize;
        let mut ok = true;
        for k in 0..n_photons {
            let c_odd = r.collected_in(windows[2 * k].start, windows[2 * k].end);
            let c_even = r.collected_in(windows[2 * k + 1].start, windows[2 * k + 1].end);
            if c_odd + c_even != 1 {
                ok = false;
                break;
            }
            if c_odd == 1 {
                pattern |= 1 << (2 * k);
            } else {
                pattern |= 1 << (2 * k + 1);
            }
        }
        if !ok {
            continue;
        }
        successes += 1;
        if pattern == odd_mask {
            odd += 1;
        } else if pattern == even_mask {
            even += 1;
        }
    }
    let n = records.len().max(1) as f64;
    let s = successes.max(1) as f64;
    let frac = |num: usize, den: f64| {
        let p = num as f64 / den;
        (p, (p * (1.0 - p) / den).sqrt())
    };
    [frac(successes, n), frac(odd, s), frac(even, s)]
}
