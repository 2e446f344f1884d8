//! Piecewise-constant compilation of a pulse sequence into 4x4 Hamiltonian
//! blocks, plus the fixed-step resolution rule shared by both evolution paths.

use super::SimConfig;
use crate::hilbert::Level;
use crate::pulses::{PulseSequence, SegmentKind};
use num_complex::Complex64 as C64;

pub type Mat4 = [[C64; 4]; 4];
pub type Vec4 = [C64; 4];

pub const ZERO4: Mat4 = [[C64::new(0.0, 0.0); 4]; 4];

/// Free-evolution Hamiltonian in the rotating frame (rad/ns).
pub fn free_hamiltonian(config: &SimConfig) -> Mat4 {
    let mut h = ZERO4;
    let wh = config.hole_splitting;
    let wt = config.trion_splitting;
    h[0][0] = C64::new(wh / 2.0, 0.0);
    h[1][1] = C64::new(-wh / 2.0, 0.0);
    h[2][2] = C64::new(-wh / 2.0, 0.0);
    h[3][3] = C64::new(-wh / 2.0 + wt, 0.0);
    h
}

/// Hermitian Hamiltonian of one segment (None = free evolution). The
/// rotation-pulse area is scaled by `area_scale` (per-repetition drift noise).
pub fn segment_hamiltonian(
    config: &SimConfig,
    segment: Option<(&SegmentKind, f64)>,
    area_scale: f64,
) -> Mat4 {
    let mut h = free_hamiltonian(config);
    match segment {
        None | Some((SegmentKind::Delay, _)) | Some((SegmentKind::NonResonantInjection, _)) => {}
        Some((SegmentKind::ResonantDrive { rabi, detuning, target }, _)) => {
            let half = C64::new(rabi / 2.0, 0.0);
            let from = target.from.index();
            let to = target.to.index();
            h[from][to] += half;
            h[to][from] += half;
            h[from][from] -= C64::new(*detuning, 0.0);
        }
        Some((SegmentKind::RotationPulse { power, axis_phase }, duration)) => {
            let theta = config.rotation_angle(*power) * area_scale;
            let transverse = theta / (2.0 * duration);
            let coupling = C64::new(
                transverse * axis_phase.cos(),
                -transverse * axis_phase.sin(),
            );
            let hi = Level::H.index();
            let bi = Level::HBar.index();
            h[hi][bi] += coupling;
            h[bi][hi] += coupling.conj();
        }
    }
    h
}

/// One compiled timeline interval with its constant Hamiltonian.
#[derive(Debug, Clone)]
pub struct Interval {
    pub t0: f64,
    pub t1: f64,
    pub h: Mat4,
}

/// The sequence span tiled into constant-Hamiltonian intervals (gaps between
/// segments become free-evolution intervals).
pub fn compile(config: &SimConfig, seq: &PulseSequence, area_scale: f64) -> Vec<Interval> {
    let mut intervals = Vec::new();
    let mut cursor = 0.0f64;
    for seg in seq.segments() {
        if seg.start > cursor + 1e-12 {
            intervals.push(Interval {
                t0: cursor,
                t1: seg.start,
                h: free_hamiltonian(config),
            });
        }
        intervals.push(Interval {
            t0: seg.start,
            t1: seg.end(),
            h: segment_hamiltonian(config, Some((&seg.kind, seg.duration)), area_scale),
        });
        cursor = seg.end();
    }
    let span = seq.span();
    if span > cursor + 1e-12 {
        intervals.push(Interval {
            t0: cursor,
            t1: span,
            h: free_hamiltonian(config),
        });
    }
    intervals
}

/// Largest admissible fixed step: (1/20) min(2 pi / holeSplitting,
/// 2 pi / Omega_max, 1 / (purcellFactor gamma0)); infinite terms (zero
/// frequencies) drop out.
pub fn resolve_dt(config: &SimConfig, seq: &PulseSequence) -> f64 {
    let mut bound = 1.0 / config.vertical_rate();
    if config.hole_splitting > 0.0 {
        bound = bound.min(2.0 * std::f64::consts::PI / config.hole_splitting);
    }
    let omega_max = seq.max_drive_frequency(config);
    if omega_max > 0.0 {
        bound = bound.min(2.0 * std::f64::consts::PI / omega_max);
    }
    bound / 20.0
}

pub fn mat4_vec(m: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (i, row) in m.iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (j, item) in row.iter().enumerate() {
            acc += item * v[j];
        }
        out[i] = acc;
    }
    out
}

pub fn norm_sqr4(v: &Vec4) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}
