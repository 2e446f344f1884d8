//! Quantum-jump (Monte Carlo wavefunction) trajectories.
//!
//! Standard norm-threshold unraveling: the state evolves under the
//! non-Hermitian drift H - (i/2) sum rate L^dag L until its squared norm
//! crosses a uniform draw, then one channel fires (selected proportionally to
//! rate * expectation) and the state collapses. Radiative jumps append
//! time-tagged records; dephasing jumps collapse silently; hole escape
//! terminates the trajectory (the emitter goes dark).
//!
//! Per-trajectory draw order (fixed for reproducibility): rotation-area drift
//! noise (iff pulseAreaError > 0), injection Bernoulli (iff the sequence has
//! an injection pulse), initial spin coin (iff injected), then the jump
//! threshold / channel / detection draws as the evolution proceeds, and a
//! final-state measurement draw.

use super::compile::{self, Mat4, Vec4};
use super::{EnsembleStats, SimConfig};
use crate::estimators::{TimeTag, TimeTagStream};
use crate::hilbert::{Level, Transition, TransitionClass};
use crate::pulses::PulseSequence;
use crate::rng::trajectory_rng;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// One recorded radiative jump.
#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    /// Emission time, ns from the repetition origin.
    pub time: f64,
    pub transition: Transition,
    /// Whether the photon was detected (drawn at detectionEfficiency).
    pub detected: bool,
}

/// Emitter state at the end of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinalState {
    Level(Level),
    /// Never charged (injection failed).
    Dark,
    /// Hole escaped at the given time (ns).
    Escaped(f64),
}

impl FinalState {
    pub fn escaped(&self) -> bool {
        matches!(self, FinalState::Escaped(_))
    }

    /// Whether the hole is present at time `t` (charged and not yet escaped).
    pub fn charged_at(&self, t: f64) -> bool {
        match self {
            FinalState::Level(_) => true,
            FinalState::Dark => false,
            FinalState::Escaped(when) => *when > t,
        }
    }
}

/// Full record of one trajectory repetition.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub jumps: Vec<Jump>,
    pub final_state: FinalState,
    /// Master seed of the RNG...
    pub seed: u64,
    /// ...and the counter stream index used for this trajectory.
    pub stream: u64,
    pub charged: bool,
}

impl JumpRecord {
    /// Detected jumps on the cavity-collected transition (driven vertical
    /// |T> -> |hbar>) inside [start, end) ns.
    pub fn collected_in(&self, start: f64, end: f64) -> usize {
        self.jumps
            .iter()
            .filter(|j| {
                j.detected
                    && j.transition.from == Level::T
                    && j.transition.class == TransitionClass::Vertical
                    && j.time >= start
                    && j.time < end
            })
            .count()
    }

    pub fn radiative_count(&self) -> usize {
        self.jumps.len()
    }
}

/// Initial condition override for trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryInit {
    /// Injection rules: sequences with an injection pulse draw a Bernoulli
    /// charge and a mixed initial spin; sequences without start in |h>.
    Auto,
    /// Start charged in the given level.
    Level(Level),
}

struct Channels {
    /// (from, to, rate, transition) for the four radiative decays.
    radiative: [(usize, usize, f64, Transition); 4],
    dephasing_rate: f64,
    escape_rate: f64,
    /// Non-Hermitian damping diag of H_eff: (1/2) sum rate L^dag L.
    damping: [f64; 4],
}

impl Channels {
    fn of(config: &SimConfig) -> Channels {
        let table = Transition::table(config.hole_splitting, config.trion_splitting);
        let mut radiative = [(0usize, 0usize, 0.0, table[0]); 4];
        for (k, t) in table.into_iter().enumerate() {
            let rate = match t.class {
                TransitionClass::Vertical => config.vertical_rate(),
                TransitionClass::Diagonal => config.diagonal_rate(),
            };
            radiative[k] = (t.from.index(), t.to.index(), rate, t);
        }
        let gphi = config.dephasing_rate();
        let gesc = config.escape_rate();
        let gtot = config.trion_total_rate();
        Channels {
            radiative,
            dephasing_rate: gphi,
            escape_rate: gesc,
            damping: [
                0.5 * (gphi / 2.0 + gesc),
                0.5 * (gphi / 2.0 + gesc),
                0.5 * (gtot + gesc),
                0.5 * (gtot + gesc),
            ],
        }
    }
}

fn effective_hamiltonian(h: &Mat4, ch: &Channels) -> Mat4 {
    let mut heff = *h;
    for k in 0..4 {
        heff[k][k] -= C64::new(0.0, ch.damping[k]);
    }
    heff
}

fn schrodinger_rk4(heff: &Mat4, psi: &Vec4, dt: f64) -> Vec4 {
    let minus_i = C64::new(0.0, -1.0);
    let f = |v: &Vec4| -> Vec4 {
        let hv = compile::mat4_vec(heff, v);
        [minus_i * hv[0], minus_i * hv[1], minus_i * hv[2], minus_i * hv[3]]
    };
    let k1 = f(psi);
    let mut tmp = *psi;
    for i in 0..4 {
        tmp[i] += 0.5 * dt * k1[i];
    }
    let k2 = f(&tmp);
    tmp = *psi;
    for i in 0..4 {
        tmp[i] += 0.5 * dt * k2[i];
    }
    let k3 = f(&tmp);
    tmp = *psi;
    for i in 0..4 {
        tmp[i] += dt * k3[i];
    }
    let k4 = f(&tmp);
    let mut out = *psi;
    for i in 0..4 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn normalize(psi: &mut Vec4) {
    let n = compile::norm_sqr4(psi).sqrt();
    if n > 0.0 {
        for z in psi.iter_mut() {
            *z /= n;
        }
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 in (0,1].
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// One quantum-jump trajectory (stream 0 of `seed`, injection-rule initial
/// state). Deterministic for fixed inputs.
pub fn run_trajectory(config: &SimConfig, seq: &PulseSequence, seed: u64) -> JumpRecord {
    run_trajectory_indexed(config, seq, seed, 0, TrajectoryInit::Auto)
}

/// Trajectory on counter stream `stream` of `seed` with an explicit initial
/// condition.
pub fn run_trajectory_indexed(
    config: &SimConfig,
    seq: &PulseSequence,
    seed: u64,
    stream: u64,
    init: TrajectoryInit,
) -> JumpRecord {
    let mut rng = trajectory_rng(seed, stream);

    let area_scale = if config.pulse_area_error > 0.0 {
        (1.0 + config.pulse_area_error * gauss(&mut rng)).max(0.0)
    } else {
        1.0
    };

    let (charged, mut psi): (bool, Vec4) = match init {
        TrajectoryInit::Level(l) => {
            let mut v = [C64::new(0.0, 0.0); 4];
            v[l.index()] = C64::new(1.0, 0.0);
            (true, v)
        }
        TrajectoryInit::Auto => {
            if seq.has_injection() {
                let injected = rng.random::<f64>() < config.hole_injection_prob;
                if injected {
                    let spin = if rng.random::<f64>() < 0.5 { Level::H } else { Level::HBar };
                    let mut v = [C64::new(0.0, 0.0); 4];
                    v[spin.index()] = C64::new(1.0, 0.0);
                    (true, v)
                } else {
                    (false, [C64::new(0.0, 0.0); 4])
                }
            } else {
                let mut v = [C64::new(0.0, 0.0); 4];
                v[Level::H.index()] = C64::new(1.0, 0.0);
                (true, v)
            }
        }
    };

    if !charged {
        return JumpRecord {
            jumps: Vec::new(),
            final_state: FinalState::Dark,
            seed,
            stream,
            charged,
        };
    }

    let channels = Channels::of(config);
    let intervals = compile::compile(config, seq, area_scale);
    let dt = compile::resolve_dt(config, seq);
    let eta = config.detection_efficiency;

    let mut jumps = Vec::new();
    let mut escaped_at: Option<f64> = None;
    let mut threshold: f64 = rng.random();

    'timeline: for iv in &intervals {
        // Drive-free interval with the emitter in the ground doublet: the
        // Hamiltonian is diagonal and only dephasing/escape can fire, so the
        // evolution (phases + uniform norm decay) is handled in closed form.
        // This makes microsecond-scale storage waits exact and cheap.
        let diagonal = iv.h[0][1].norm_sqr() == 0.0
            && iv.h[1][0].norm_sqr() == 0.0
            && iv.h[1][2].norm_sqr() == 0.0
            && iv.h[2][1].norm_sqr() == 0.0;
        let ground_only = psi[2].norm_sqr() + psi[3].norm_sqr() < 1e-28;
        if diagonal && ground_only {
            let decay = 0.5 * channels.dephasing_rate + channels.escape_rate;
            let mut t = iv.t0;
            loop {
                let norm2 = compile::norm_sqr4(&psi);
                let remaining = iv.t1 - t;
                // Time until the norm crosses the threshold.
                let t_jump = if decay > 0.0 && threshold < norm2 {
                    (norm2 / threshold).ln() / decay
                } else {
                    f64::INFINITY
                };
                let minus_i = C64::new(0.0, -1.0);
                let advance = |psi: &mut Vec4, dt: f64| {
                    let damp = (-0.5 * decay * dt).exp();
                    for (k, z) in psi.iter_mut().enumerate() {
                        let phase = (minus_i * iv.h[k][k].re * dt).exp();
                        *z *= phase * damp;
                    }
                };
                if t_jump >= remaining {
                    advance(&mut psi, remaining);
                    break;
                }
                advance(&mut psi, t_jump);
                t += t_jump;
                // Select dephasing vs escape.
                let ground = psi[0].norm_sqr() + psi[1].norm_sqr();
                let w_deph = channels.dephasing_rate * 0.5 * ground;
                let w_esc = channels.escape_rate * compile::norm_sqr4(&psi);
                let wsum = w_deph + w_esc;
                if wsum <= 0.0 {
                    normalize(&mut psi);
                    threshold = rng.random();
                    continue;
                }
                if rng.random::<f64>() * wsum < w_deph {
                    psi = [psi[0], -psi[1], C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
                    normalize(&mut psi);
                    threshold = rng.random();
                } else {
                    escaped_at = Some(t);
                    break 'timeline;
                }
            }
            continue;
        }

        let heff = effective_hamiltonian(&iv.h, &channels);
        let mut t = iv.t0;
        while t < iv.t1 - 1e-15 {
            let step = dt.min(iv.t1 - t);
            let before = compile::norm_sqr4(&psi);
            let advanced = schrodinger_rk4(&heff, &psi, step);
            let after = compile::norm_sqr4(&advanced);
            if after > threshold {
                psi = advanced;
                t += step;
                continue;
            }
            // Jump inside this step: exponential-in-step interpolation of the
            // crossing time, then a partial step up to it.
            let frac = if before > after && threshold < before {
                ((before / threshold).ln() / (before / after).ln()).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let t_jump = t + frac * step;
            let mut at_jump = if frac > 0.0 {
                schrodinger_rk4(&heff, &psi, frac * step)
            } else {
                psi
            };
            // Channel weights: rate * <psi|L^dag L|psi>.
            let pop = |k: usize| at_jump[k].norm_sqr();
            let ground = pop(0) + pop(1);
            let total_norm = compile::norm_sqr4(&at_jump);
            let mut weights = [0.0f64; 6];
            for (k, (from, _, rate, _)) in channels.radiative.iter().enumerate() {
                weights[k] = rate * pop(*from);
            }
            weights[4] = channels.dephasing_rate * 0.5 * ground;
            weights[5] = channels.escape_rate * total_norm;
            let wsum: f64 = weights.iter().sum();
            if wsum <= 0.0 {
                psi = at_jump;
                normalize(&mut psi);
                threshold = rng.random();
                t = t_jump;
                continue;
            }
            let mut u = rng.random::<f64>() * wsum;
            let mut chosen = 5;
            for (k, w) in weights.iter().enumerate() {
                if u < *w {
                    chosen = k;
                    break;
                }
                u -= w;
            }
            match chosen {
                k if k < 4 => {
                    let (from, to, _, transition) = channels.radiative[k];
                    let detected = rng.random::<f64>() < eta;
                    jumps.push(Jump { time: t_jump, transition, detected });
                    let amp = at_jump[from];
                    at_jump = [C64::new(0.0, 0.0); 4];
                    at_jump[to] = amp;
                    normalize(&mut at_jump);
                    psi = at_jump;
                }
                4 => {
                    // sigma_z/sqrt(2) collapse: ground phase flip, trion
                    // amplitudes are annihilated by the jump operator.
                    at_jump =
                        [at_jump[0], -at_jump[1], C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
                    normalize(&mut at_jump);
                    psi = at_jump;
                }
                _ => {
                    escaped_at = Some(t_jump);
                    break 'timeline;
                }
            }
            threshold = rng.random();
            t = t_jump;
        }
    }

    let final_state = if let Some(when) = escaped_at {
        FinalState::Escaped(when)
    } else {
        // Measure the final emitter state in the level basis.
        normalize(&mut psi);
        let mut u = rng.random::<f64>();
        let mut level = Level::TBar;
        for l in Level::ALL {
            let p = psi[l.index()].norm_sqr();
            if u < p {
                level = l;
                break;
            }
            u -= p;
        }
        FinalState::Level(level)
    };

    JumpRecord { jumps, final_state, seed, stream, charged }
}

/// All trajectory records of an ensemble, computed in parallel but collected
/// in stream-index order (results are independent of thread count).
pub fn run_ensemble_records(
    config: &SimConfig,
    seq: &PulseSequence,
    n: usize,
    master_seed: u64,
    init: TrajectoryInit,
) -> Vec<JumpRecord> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| run_trajectory_indexed(config, seq, master_seed, i, init))
        .collect()
}

/// Run `n` independent trajectories; aggregate named-window detected counts
/// and outcome fractions, and emit the full time-tag stream.
pub fn run_ensemble(
    config: &SimConfig,
    seq: &PulseSequence,
    n: usize,
    master_seed: u64,
) -> (EnsembleStats, TimeTagStream) {
    let records = run_ensemble_records(config, seq, n, master_seed, TrajectoryInit::Auto);
    let stats = ensemble_stats(seq, &records, master_seed);
    let stream = stream_from_records(seq, &records);
    (stats, stream)
}

pub(crate) fn ensemble_stats(
    seq: &PulseSequence,
    records: &[JumpRecord],
    master_seed: u64,
) -> EnsembleStats {
    let mut names: Vec<String> = vec![
        "charged".into(),
        "escaped".into(),
        "radiative_jumps".into(),
        "final_h".into(),
        "final_hbar".into(),
        "final_T".into(),
        "final_Tbar".into(),
    ];
    for w in seq.windows() {
        names.push(format!("counts_{}", w.name));
    }
    let samples: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            let mut row = vec![
                if r.charged { 1.0 } else { 0.0 },
                if r.final_state.escaped() { 1.0 } else { 0.0 },
                r.radiative_count() as f64,
                if r.final_state == FinalState::Level(Level::H) { 1.0 } else { 0.0 },
                if r.final_state == FinalState::Level(Level::HBar) { 1.0 } else { 0.0 },
                if r.final_state == FinalState::Level(Level::T) { 1.0 } else { 0.0 },
                if r.final_state == FinalState::Level(Level::TBar) { 1.0 } else { 0.0 },
            ];
            for w in seq.windows() {
                row.push(r.collected_in(w.start, w.end) as f64);
            }
            row
        })
        .collect();
    EnsembleStats::from_samples(names, &samples, master_seed)
}

/// Build the per-repetition time-tag stream of detected collected photons.
pub(crate) fn stream_from_records(seq: &PulseSequence, records: &[JumpRecord]) -> TimeTagStream {
    let period_ps = (seq.repetition_period() * 1000.0).round().max(1.0) as i64;
    let mut windows = std::collections::BTreeMap::new();
    for w in seq.windows() {
        windows.insert(
            w.name.clone(),
            ((w.start * 1000.0).round() as i64, (w.end * 1000.0).round() as i64),
        );
    }
    let repetitions = records
        .iter()
        .map(|r| {
            let mut tags: Vec<TimeTag> = r
                .jumps
                .iter()
                .filter(|j| {
                    j.detected
                        && j.transition.from == Level::T
                        && j.transition.class == TransitionClass::Vertical
                })
                .map(|j| TimeTag {
                    time_ps: ((j.time * 1000.0).round() as i64).clamp(0, period_ps - 1),
                    channel: 0,
                })
                .collect();
            tags.sort_by_key(|t| t.time_ps);
            tags
        })
        .collect();
    TimeTagStream::new(period_ps, windows, repetitions)
        .expect("stream built from records is valid")
}
