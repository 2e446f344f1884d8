//! Deterministic Lindblad master-equation integration (fixed-step RK4).
//!
//! Two engines share the same segment Hamiltonians: the public
//! [`propagate_master`] works on full `QuantumState` density matrices of any
//! register size, while the emitter-only [`MasterEngine`] (4x4 fixed arrays)
//! backs the protocol oracles, where it is run many times per experiment.

use super::compile::{self, Interval, Mat4, ZERO4};
use super::{collapse_operators, ChannelKind, SimConfig};
use crate::hilbert::{Level, QuantumState};
use crate::pulses::PulseSequence;
use crate::{Error, Result};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// Decay rates entering the emitter-block Lindbladian (escape excluded: it
/// factorizes exactly and is applied as a survival weight).
#[derive(Debug, Clone, Copy)]
struct Rates {
    vertical: f64,
    diagonal: f64,
    dephasing: f64,
}

impl Rates {
    fn of(config: &SimConfig) -> Rates {
        Rates {
            vertical: config.vertical_rate(),
            diagonal: config.diagonal_rate(),
            dephasing: config.dephasing_rate(),
        }
    }
}

/// Radiative channels as (from, to, rate) index triples.
fn radiative_channels(r: &Rates) -> [(usize, usize, f64); 4] {
    let h = Level::H.index();
    let hb = Level::HBar.index();
    let t = Level::T.index();
    let tb = Level::TBar.index();
    [
        (t, hb, r.vertical),
        (t, h, r.diagonal),
        (tb, h, r.vertical),
        (tb, hb, r.diagonal),
    ]
}

fn lindblad_deriv(h: &Mat4, rho: &Mat4, r: &Rates) -> Mat4 {
    let mut d = ZERO4;
    let i = C64::new(0.0, 1.0);
    // -i [H, rho]
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += h[a][k] * rho[k][b] - rho[a][k] * h[k][b];
            }
            d[a][b] = -i * acc;
        }
    }
    // Radiative dissipators.
    for (from, to, gamma) in radiative_channels(r) {
        d[to][to] += gamma * rho[from][from];
        for k in 0..4 {
            d[from][k] -= 0.5 * gamma * rho[from][k];
            d[k][from] -= 0.5 * gamma * rho[k][from];
        }
    }
    // Ground-spin dephasing with L = sigma_z/sqrt(2):
    // coefficient (d_i d_j - e_i - e_j)/2, d = (1,-1,0,0), e = (1,1,0,0)/2.
    let dz = [1.0, -1.0, 0.0, 0.0];
    let e = [0.5, 0.5, 0.0, 0.0];
    for a in 0..4 {
        for b in 0..4 {
            let coef = 0.5 * dz[a] * dz[b] - 0.5 * (e[a] + e[b]);
            if coef != 0.0 {
                d[a][b] += r.dephasing * coef * rho[a][b];
            }
        }
    }
    d
}

fn axpy(dst: &mut Mat4, a: f64, x: &Mat4) {
    for i in 0..4 {
        for j in 0..4 {
            dst[i][j] += a * x[i][j];
        }
    }
}

fn rk4_step(h: &Mat4, rho: &Mat4, dt: f64, r: &Rates) -> Mat4 {
    let k1 = lindblad_deriv(h, rho, r);
    let mut tmp = *rho;
    axpy(&mut tmp, dt / 2.0, &k1);
    let k2 = lindblad_deriv(h, &tmp, r);
    tmp = *rho;
    axpy(&mut tmp, dt / 2.0, &k2);
    let k3 = lindblad_deriv(h, &tmp, r);
    tmp = *rho;
    axpy(&mut tmp, dt, &k3);
    let k4 = lindblad_deriv(h, &tmp, r);
    let mut out = *rho;
    axpy(&mut out, dt / 6.0, &k1);
    axpy(&mut out, dt / 3.0, &k2);
    axpy(&mut out, dt / 3.0, &k3);
    axpy(&mut out, dt / 6.0, &k4);
    out
}

/// Emitter-only master-equation engine over a compiled sequence.
pub(crate) struct MasterEngine {
    intervals: Vec<Interval>,
    rates: Rates,
    pub dt: f64,
}

impl MasterEngine {
    pub fn with_area_scale(
        config: &SimConfig,
        seq: &PulseSequence,
        area_scale: f64,
    ) -> MasterEngine {
        MasterEngine {
            intervals: compile::compile(config, seq, area_scale),
            rates: Rates::of(config),
            dt: compile::resolve_dt(config, seq),
        }
    }

    /// Evolve `rho` over [t0, t1], invoking `on_step(t, rho)` after every step
    /// (and once at t0).
    pub fn evolve(
        &self,
        mut rho: Mat4,
        t0: f64,
        t1: f64,
        mut on_step: impl FnMut(f64, &Mat4),
    ) -> Mat4 {
        on_step(t0, &rho);
        for iv in &self.intervals {
            let lo = iv.t0.max(t0);
            let hi = iv.t1.min(t1);
            if hi <= lo + 1e-15 {
                continue;
            }
            let steps = ((hi - lo) / self.dt).ceil().max(1.0) as usize;
            let h = (hi - lo) / steps as f64;
            let mut t = lo;
            for _ in 0..steps {
                rho = rk4_step(&iv.h, &rho, h, &self.rates);
                t += h;
                on_step(t, &rho);
            }
        }
        rho
    }
}

/// Initial condition for a master run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MasterInit {
    /// Injection rules: if the sequence has an injection pulse, start as the
    /// charged mixed-spin block weighted by the injection probability;
    /// otherwise start prepared in |h>.
    Auto,
    /// Start in a specific emitter level (weight 1).
    Level(Level),
}

/// Deterministic master-equation run over one full sequence with the exact
/// hole-escape survival factor folded into the collected emission rate.
#[derive(Debug, Clone)]
pub struct MasterTrace {
    /// Step-time grid, ns.
    pub times: Vec<f64>,
    /// Detected collected-photon rate per ns: eta * Gamma_v * rho_TT *
    /// survival(t) * charged weight.
    pub collected_rate: Vec<f64>,
    /// Emitter populations conditional on the hole being present.
    pub populations: Vec<[f64; 4]>,
    /// Final conditional emitter density matrix (4x4, trace 1).
    pub final_rho: Array2<C64>,
    /// Weight of the charged block (injection probability or 1).
    pub charged_weight: f64,
}

impl MasterTrace {
    /// Integral of the detected collected rate over [start, end] ns
    /// (trapezoidal on the step grid).
    pub fn window_integral(&self, start: f64, end: f64) -> f64 {
        let mut acc = 0.0;
        for k in 1..self.times.len() {
            let (t0, t1) = (self.times[k - 1], self.times[k]);
            if t1 <= start || t0 >= end {
                continue;
            }
            let lo = t0.max(start);
            let hi = t1.min(end);
            // Linear interpolation of the rate at the clipped endpoints.
            let f = |t: f64| {
                let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                self.collected_rate[k - 1] * (1.0 - w) + self.collected_rate[k] * w
            };
            acc += 0.5 * (f(lo) + f(hi)) * (hi - lo);
        }
        acc
    }
}

/// Run the master equation over the whole sequence, recording the collected
/// emission rate and conditional populations at every step.
pub fn master_trace(config: &SimConfig, seq: &PulseSequence, init: MasterInit) -> MasterTrace {
    master_trace_scaled(config, seq, init, 1.0)
}

/// [`master_trace`] with a rotation-area scale factor (used to average over
/// pulse-area drift noise).
pub fn master_trace_scaled(
    config: &SimConfig,
    seq: &PulseSequence,
    init: MasterInit,
    area_scale: f64,
) -> MasterTrace {
    let engine = MasterEngine::with_area_scale(config, seq, area_scale);
    let (mut rho, weight) = initial_block(config, seq, init);
    let span = seq.span();
    let eta = config.detection_efficiency;
    let gv = config.vertical_rate();
    let esc = config.escape_rate();
    let mut times = Vec::new();
    let mut rate = Vec::new();
    let mut pops = Vec::new();
    rho = engine.evolve(rho, 0.0, span, |t, r| {
        times.push(t);
        let tt = r[2][2].re;
        rate.push(eta * gv * tt * weight * (-esc * t).exp());
        pops.push([r[0][0].re, r[1][1].re, r[2][2].re, r[3][3].re]);
    });
    let mut final_rho = Array2::zeros((4, 4));
    for i in 0..4 {
        for j in 0..4 {
            final_rho[(i, j)] = rho[i][j];
        }
    }
    MasterTrace { times, collected_rate: rate, populations: pops, final_rho, charged_weight: weight }
}

pub(crate) fn initial_block(
    config: &SimConfig,
    seq: &PulseSequence,
    init: MasterInit,
) -> (Mat4, f64) {
    let mut rho = ZERO4;
    match init {
        MasterInit::Level(l) => {
            rho[l.index()][l.index()] = C64::new(1.0, 0.0);
            (rho, 1.0)
        }
        MasterInit::Auto => {
            if seq.has_injection() {
                rho[0][0] = C64::new(0.5, 0.0);
                rho[1][1] = C64::new(0.5, 0.0);
                (rho, config.hole_injection_prob)
            } else {
                rho[0][0] = C64::new(1.0, 0.0);
                (rho, 1.0)
            }
        }
    }
}

/// Lindblad evolution of `rho` from `t0` to `t1` with fixed RK4 steps of at
/// most `dt`. The step must satisfy the resolution precondition
/// dt <= (1/20) min(2pi/holeSplitting, 2pi/Omega_max, 1/(F_P gamma0)).
/// Trace drift beyond 1e-8 is renormalized (and reported on stderr).
///
/// The hole-escape channel is not part of this generator: escape is uniform
/// over the occupied levels, so it factorizes exactly as exp(-t/tau_esc) and
/// is applied by the callers that need it.
pub fn propagate_master(
    rho: &QuantumState,
    config: &SimConfig,
    seq: &PulseSequence,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<QuantumState> {
    if !rho.has_emitter() {
        return Err(Error::InvalidState("master evolution needs the emitter factor".into()));
    }
    if t1 < t0 || t0 < 0.0 || t1 > seq.span() + 1e-12 {
        return Err(Error::OutsideSequence { t: t1, span: seq.span() });
    }
    let bound = compile::resolve_dt(config, seq);
    if dt > bound * (1.0 + 1e-9) || dt <= 0.0 {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let bins = rho.photon_bins();
    let pd = rho.photon_dim();
    let dim = rho.dim();
    let intervals = compile::compile(config, seq, 1.0);

    // Lift a 4x4 block to emitter x register.
    let lift = |m4: &Mat4| {
        let mut out: Array2<C64> = Array2::zeros((dim, dim));
        for e1 in 0..4 {
            for e2 in 0..4 {
                let z = m4[e1][e2];
                if z.norm_sqr() == 0.0 {
                    continue;
                }
                for b in 0..pd {
                    out[(e1 * pd + b, e2 * pd + b)] = z;
                }
            }
        }
        out
    };
    let channels: Vec<(f64, Array2<C64>)> = collapse_operators(config)
        .into_iter()
        .filter(|c| !matches!(c.kind, ChannelKind::HoleEscape))
        .map(|c| {
            let op = c.operator.expect("matrix channels carry operators");
            let m = op.matrix();
            let mut m4 = ZERO4;
            for i in 0..4 {
                for j in 0..4 {
                    m4[i][j] = m[(i, j)];
                }
            }
            (c.rate, lift(&m4))
        })
        .collect();
    let ldagl: Vec<Array2<C64>> = channels
        .iter()
        .map(|(_, l)| {
            let mut dag: Array2<C64> = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    dag[(i, j)] = l[(j, i)].conj();
                }
            }
            dag.dot(l)
        })
        .collect();

    let deriv = |h: &Array2<C64>, r: &Array2<C64>| -> Array2<C64> {
        let i = C64::new(0.0, 1.0);
        let mut d = (h.dot(r) - r.dot(h)).mapv(|z| -i * z);
        for (k, (gamma, l)) in channels.iter().enumerate() {
            let g = C64::new(*gamma, 0.0);
            let ldag = {
                let mut dag: Array2<C64> = Array2::zeros((dim, dim));
                for a in 0..dim {
                    for b in 0..dim {
                        dag[(a, b)] = l[(b, a)].conj();
                    }
                }
                dag
            };
            let sandwich = l.dot(r).dot(&ldag);
            let anticomm = ldagl[k].dot(r) + r.dot(&ldagl[k]);
            d = d + sandwich.mapv(|z| g * z) - anticomm.mapv(|z| 0.5 * g * z);
        }
        d
    };

    let mut state = rho.density();
    let initial_trace: f64 = (0..dim).map(|i| state[(i, i)].re).sum();
    for iv in &intervals {
        let lo = iv.t0.max(t0);
        let hi = iv.t1.min(t1);
        if hi <= lo + 1e-15 {
            continue;
        }
        let h_full = lift(&iv.h);
        let steps = ((hi - lo) / dt).ceil().max(1.0) as usize;
        let h_step = (hi - lo) / steps as f64;
        for _ in 0..steps {
            let k1 = deriv(&h_full, &state);
            let k2 = deriv(&h_full, &(&state + &k1.mapv(|z| z * (h_step / 2.0))));
            let k3 = deriv(&h_full, &(&state + &k2.mapv(|z| z * (h_step / 2.0))));
            let k4 = deriv(&h_full, &(&state + &k3.mapv(|z| z * h_step)));
            state = &state
                + &(k1.mapv(|z| z * (h_step / 6.0))
                    + k2.mapv(|z| z * (h_step / 3.0))
                    + k3.mapv(|z| z * (h_step / 3.0))
                    + k4.mapv(|z| z * (h_step / 6.0)));
        }
    }
    let trace: f64 = (0..dim).map(|i| state[(i, i)].re).sum();
    let drift = (trace - initial_trace).abs();
    if drift > 1e-8 {
        eprintln!("propagate_master: trace drift {drift:.3e} exceeded 1e-8, renormalizing");
        let scale = C64::new(initial_trace / trace, 0.0);
        state.mapv_inplace(|z| z * scale);
    }
    // Symmetrize away the antihermitian numerical residue before validation.
    let mut sym = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            sym[(i, j)] = 0.5 * (state[(i, j)] + state[(j, i)].conj());
        }
    }
    QuantumState::from_density(sym, bins)
}
