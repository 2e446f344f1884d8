//! Shared test support: the exhaustive branch-enumeration oracle for the
//! GHZ protocol (pure-ket algebra, independent of the production map).

use ndarray::Array2;
use num_complex::Complex64 as C64;
use trionsim::dynamics::SimConfig;
use trionsim::protocols::ghz_ideal_target;
use trionsim::pulses::{
    build_ghz, precession_unitary, rotation_unitary_with_axis, GhzMode, SegmentKind,
};

#[derive(Clone)]
struct Ket {
    // amp[bits][spin], spin 0 = h, 1 = hbar
    amp: Vec<[C64; 2]>,
}

impl Ket {
    fn new(bins: usize) -> Ket {
        let mut amp = vec![[C64::new(0.0, 0.0); 2]; 1 << bins];
        amp[0][0] = C64::new(1.0, 0.0);
        Ket { amp }
    }

    fn apply_spin(&mut self, u: &[[C64; 2]; 2]) {
        for slot in self.amp.iter_mut() {
            let (h, hb) = (slot[0], slot[1]);
            slot[0] = u[0][0] * h + u[0][1] * hb;
            slot[1] = u[1][0] * h + u[1][1] * hb;
        }
    }

    fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|s| s[0].norm_sqr() + s[1].norm_sqr()).sum()
    }
}

enum Branch {
    Coherent,
    Loss,
}

fn generation(ket: &mut Ket, bin: usize, theta: f64, q_v: f64, branch: &Branch) -> bool {
    let half = theta / 2.0;
    let c_ne = C64::new(half.cos(), 0.0);
    let a_v = C64::new(0.0, -1.0) * half.sin() * q_v.sqrt();
    let a_d = C64::new(half.sin() * (1.0 - q_v).sqrt(), 0.0);
    let bit = 1usize << bin;
    let mut out = vec![[C64::new(0.0, 0.0); 2]; ket.amp.len()];
    match branch {
        Branch::Coherent => {
            for (bits, slot) in ket.amp.iter().enumerate() {
                out[bits][0] += slot[0];
                out[bits][1] += c_ne * slot[1];
                if bits & bit == 0 {
                    out[bits | bit][1] += a_v * slot[1];
                }
            }
        }
        Branch::Loss => {
            for (bits, slot) in ket.amp.iter().enumerate() {
                out[bits][0] += a_d * slot[1];
            }
        }
    }
    ket.amp = out;
    ket.norm_sqr() > 1e-30
}

pub struct OracleOutcome {
    pub fidelity: f64,
    pub success: f64,
    pub rho: Array2<C64>,
}

/// Enumerate every loss/coherent branch string of the n-photon GHZ protocol
/// at unit detection efficiency and return the heralded photonic state.
pub fn ghz_brute_force(cfg: &SimConfig, n: usize) -> OracleOutcome {
    let bins = 2 * n;
    let q_v = cfg.purcell_factor / (cfg.purcell_factor + 1.0);
    let theta = cfg.timings.generation_area;

    let seq = build_ghz(cfg, n, GhzMode::Ghz).unwrap();
    let rotations: Vec<_> = seq
        .segments()
        .iter()
        .filter(|s| matches!(s.kind, SegmentKind::RotationPulse { .. }))
        .collect();
    assert_eq!(rotations.len() % 2, 0);
    let mul = |a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]| {
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        m
    };
    let mut composites = Vec::new();
    for pair in rotations.chunks(2) {
        let (power, axis) = match pair[0].kind {
            SegmentKind::RotationPulse { power, axis_phase } => (power, axis_phase),
            _ => unreachable!(),
        };
        let delay = pair[1].start - pair[0].end();
        let u1 = rotation_unitary_with_axis(cfg, power, pair[0].duration, axis);
        let p = precession_unitary(cfg, delay);
        composites.push(mul(&u1, &mul(&p, &u1)));
    }
    assert_eq!(composites.len(), 2 * n + 2);

    let pd = 1usize << bins;
    let mut rho: Array2<C64> = Array2::zeros((pd, pd));
    let mut success = 0.0f64;
    for mask in 0..(1u32 << bins) {
        let mut ket = Ket::new(bins);
        let mut comp_iter = composites.iter();
        ket.apply_spin(comp_iter.next().unwrap());
        let mut alive = true;
        for k in 0..n {
            for half in 0..2 {
                let window = 2 * k + half;
                let branch =
                    if mask & (1 << window) != 0 { Branch::Loss } else { Branch::Coherent };
                if !generation(&mut ket, window, theta, q_v, &branch) {
                    alive = false;
                    break;
                }
                ket.apply_spin(comp_iter.next().unwrap());
            }
            if !alive {
                break;
            }
        }
        if !alive || mask != 0 {
            // Loss branches are flagged failures and never heralded.
            continue;
        }
        let final_half = comp_iter.next().unwrap();
        ket.apply_spin(final_half);
        success += ket.norm_sqr();
        for b1 in 0..pd {
            for b2 in 0..pd {
                rho[(b1, b2)] += ket.amp[b1][1] * ket.amp[b2][1].conj();
                let z1 = if b1 & 1 != 0 { -1.0 } else { 1.0 };
                let z2 = if b2 & 1 != 0 { -1.0 } else { 1.0 };
                rho[(b1, b2)] += z1 * z2 * ket.amp[b1][0] * ket.amp[b2][0].conj();
            }
        }
    }
    let trace: f64 = (0..pd).map(|i| rho[(i, i)].re).sum();
    let scale = C64::new(1.0 / trace, 0.0);
    rho.mapv_inplace(|z| z * scale);

    let target = ghz_ideal_target(n, GhzMode::Ghz);
    let t = target.amplitudes().unwrap();
    let mut fid = C64::new(0.0, 0.0);
    for b1 in 0..pd {
        for b2 in 0..pd {
            fid += t[b1].conj() * rho[(b1, b2)] * t[b2];
        }
    }
    OracleOutcome { fidelity: fid.re, success, rho }
}
