//! Pulse segments, timed sequences, AC-Stark spin rotations with
//! precession-during-pulse, composite-rotation calibration searches, and
//! builders for every pulse sequence of the experiment.
//!
//! A rotation pulse of power P applies the effective spin Hamiltonian
//! H = (omega_L/2) sigma_z + (theta/(2 tau)) sigma_x over its duration tau,
//! with theta = kappa*sqrt(P). When omega_L*tau is not negligible the rotation
//! axis tilts out of the equator, which is why single pulses cannot flip the
//! spin at high field and two-pulse composites are calibrated instead.

use crate::dynamics::SimConfig;
use crate::hilbert::Transition;
use crate::linalg::{mat2_mul, su2_exp, Mat2};
use crate::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// 2x2 unitary on the (|h>, |hbar>) spin subspace, row major.
pub type SpinUnitary = Mat2;

/// Drive segment kinds. Times are carried by [`PulseSegment`].
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    /// Non-resonant charging pulse; injects a hole with the configured
    /// probability, no coherent dynamics.
    NonResonantInjection,
    /// Resonant drive of one optical transition.
    ResonantDrive {
        /// Rabi frequency, rad/ns.
        rabi: f64,
        /// Drive detuning from the transition, rad/ns.
        detuning: f64,
        target: Transition,
    },
    /// Red-detuned AC-Stark rotation pulse acting on the spin subspace.
    RotationPulse {
        /// Pulse power, arbitrary units; theta = kappa * sqrt(power).
        power: f64,
        /// Equatorial rotation-axis angle, rad; 0 is the nominal x axis.
        axis_phase: f64,
    },
    Delay,
}

impl SegmentKind {
    fn label(&self) -> &'static str {
        match self {
            SegmentKind::NonResonantInjection => "injection",
            SegmentKind::ResonantDrive { .. } => "drive",
            SegmentKind::RotationPulse { .. } => "rotation",
            SegmentKind::Delay => "delay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSegment {
    pub kind: SegmentKind,
    /// Segment start, ns from the repetition origin.
    pub start: f64,
    /// Segment duration, ns (> 0).
    pub duration: f64,
}

impl PulseSegment {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Named time window of a repetition (generation bins, readout, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct NamedWindow {
    pub name: String,
    pub start: f64,
    pub end: f64,
}

/// Ordered, non-overlapping list of timed segments plus named windows.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    segments: Vec<PulseSegment>,
    windows: Vec<NamedWindow>,
    repetition_period: f64,
}

const TIME_EPS: f64 = 1e-12;

impl PulseSequence {
    pub fn new(mut segments: Vec<PulseSegment>, repetition_period: f64) -> Result<PulseSequence> {
        segments.sort_by(|a, b| a.start.total_cmp(&b.start));
        for seg in &segments {
            if seg.duration <= 0.0 {
                return Err(Error::InvalidSequence(format!(
                    "{} segment at {} ns has non-positive duration",
                    seg.kind.label(),
                    seg.start
                )));
            }
            if seg.start < -TIME_EPS {
                return Err(Error::InvalidSequence("segment starts before 0".into()));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].start < pair[0].end() - TIME_EPS {
                return Err(Error::InvalidSequence(format!(
                    "{} segment at {} ns overlaps {} segment at {} ns",
                    pair[0].kind.label(),
                    pair[0].start,
                    pair[1].kind.label(),
                    pair[1].start
                )));
            }
        }
        let span = segments.last().map(|s| s.end()).unwrap_or(0.0);
        if span > repetition_period + TIME_EPS {
            return Err(Error::InvalidSequence(format!(
                "sequence span {span} ns exceeds repetition period {repetition_period} ns"
            )));
        }
        Ok(PulseSequence { segments, windows: Vec::new(), repetition_period })
    }

    pub fn segments(&self) -> &[PulseSegment] {
        &self.segments
    }

    pub fn windows(&self) -> &[NamedWindow] {
        &self.windows
    }

    pub fn window(&self, name: &str) -> Option<&NamedWindow> {
        self.windows.iter().find(|w| w.name == name)
    }

    pub fn add_window(&mut self, name: impl Into<String>, start: f64, end: f64) {
        self.windows.push(NamedWindow { name: name.into(), start, end });
    }

    pub fn repetition_period(&self) -> f64 {
        self.repetition_period
    }

    /// End of the last segment, ns.
    pub fn span(&self) -> f64 {
        self.segments.last().map(|s| s.end()).unwrap_or(0.0)
    }

    /// Active segment at time `t`, if any.
    pub fn segment_at(&self, t: f64) -> Option<&PulseSegment> {
        self.segments
            .iter()
            .find(|s| t >= s.start - TIME_EPS && t < s.end() - TIME_EPS)
    }

    pub fn has_injection(&self) -> bool {
        self.segments
            .iter()
            .any(|s| matches!(s.kind, SegmentKind::NonResonantInjection))
    }

    /// Largest drive frequency appearing in the sequence (resonant Rabi or
    /// rotation-pulse effective frequency), rad/ns; used for step-size bounds.
    pub fn max_drive_frequency(&self, config: &SimConfig) -> f64 {
        self.segments
            .iter()
            .map(|s| match &s.kind {
                SegmentKind::ResonantDrive { rabi, detuning, .. } => rabi.abs() + detuning.abs(),
                SegmentKind::RotationPulse { power, .. } => {
                    config.rotation_angle(*power) / s.duration
                }
                _ => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// Human-readable structured description; times in ps.
    pub fn describe(&self) -> String {
        let ps = |t: f64| format!("{:.3}", t * 1000.0);
        let mut out = String::from("# pulse sequence (times in ps)\n");
        out.push_str(&format!("repetition_period {}\n", ps(self.repetition_period)));
        for seg in &self.segments {
            let extra = match &seg.kind {
                SegmentKind::ResonantDrive { rabi, detuning, target } => format!(
                    " rabi_per_ns={rabi:.6} detuning_per_ns={detuning:.6} target={}",
                    target.label()
                ),
                SegmentKind::RotationPulse { power, axis_phase } => {
                    format!(" power={power:.9} axis_phase={axis_phase:.9}")
                }
                _ => String::new(),
            };
            out.push_str(&format!(
                "segment {} {} {}{extra}\n",
                seg.kind.label(),
                ps(seg.start),
                ps(seg.duration)
            ));
        }
        for w in &self.windows {
            out.push_str(&format!("window {} {} {}\n", w.name, ps(w.start), ps(w.end)));
        }
        out
    }
}

/// Free spin precession by `omega_L * delay` about z.
pub fn precession_unitary(config: &SimConfig, delay: f64) -> SpinUnitary {
    su2_exp(0.0, 0.0, config.hole_splitting / 2.0, delay)
}

/// Exact exponential of the rotation-pulse Hamiltonian over `duration`:
/// exp(-i [ (omega_L/2) sigma_z + (theta/(2 duration)) sigma_x ] duration),
/// theta = kappa * sqrt(power).
pub fn rotation_unitary(config: &SimConfig, power: f64, duration: f64) -> SpinUnitary {
    rotation_unitary_with_axis(config, power, duration, 0.0)
}

/// Rotation about an equatorial axis at angle `axis_phase` from x.
pub fn rotation_unitary_with_axis(
    config: &SimConfig,
    power: f64,
    duration: f64,
    axis_phase: f64,
) -> SpinUnitary {
    rotation_unitary_scaled(config, power, duration, axis_phase, 1.0)
}

/// Rotation with the pulse area multiplied by `area_scale` (drift noise).
pub fn rotation_unitary_scaled(
    config: &SimConfig,
    power: f64,
    duration: f64,
    axis_phase: f64,
    area_scale: f64,
) -> SpinUnitary {
    let theta = config.rotation_angle(power.max(0.0)) * area_scale;
    let transverse = theta / (2.0 * duration);
    su2_exp(
        transverse * axis_phase.cos(),
        transverse * axis_phase.sin(),
        config.hole_splitting / 2.0,
        duration,
    )
}

/// Analytic derivative of [`rotation_unitary`] with respect to power.
pub fn rotation_unitary_dpower(config: &SimConfig, power: f64, duration: f64) -> Mat2 {
    // U = cos(phi/2) I - i sin(phi/2) (theta sx + w sz)/phi,
    // phi = sqrt(theta^2 + w^2), w = omega_L * duration, theta = kappa sqrt(P).
    let w = config.hole_splitting * duration;
    let theta = config.rotation_angle(power);
    let phi = (theta * theta + w * w).sqrt();
    let dtheta_dp = 0.5 * config.kappa / power.sqrt();
    let i = C64::new(0.0, 1.0);
    if phi < 1e-12 {
        // Near the zero generator U ~ I - i/2 (theta sx + w sz).
        let m = [[C64::new(0.0, 0.0), -i * 0.5], [-i * 0.5, C64::new(0.0, 0.0)]];
        return m.map(|row| row.map(|z| z * dtheta_dp));
    }
    let half = phi / 2.0;
    let (s, c) = (half.sin(), half.cos());
    let dphi_dtheta = theta / phi;
    // d/dtheta cos(phi/2)
    let dcos = -0.5 * s * dphi_dtheta;
    // d/dtheta [sin(phi/2)/phi]
    let dsinc = dphi_dtheta * (0.5 * c / phi - s / (phi * phi));
    let sinc = s / phi;
    let du00 = C64::new(dcos, 0.0) - i * w * dsinc;
    let du01 = -i * (sinc + theta * dsinc);
    let du11 = C64::new(dcos, 0.0) + i * w * dsinc;
    [
        [du00 * dtheta_dp, du01 * dtheta_dp],
        [du01 * dtheta_dp, du11 * dtheta_dp],
    ]
}

/// Net unitary of a two-pulse composite: U(power) . P(delay) . U(power).
pub fn composite_unitary(config: &SimConfig, power: f64, delay: f64) -> SpinUnitary {
    let u = rotation_unitary(config, power, config.timings.rotation_pulse);
    let p = precession_unitary(config, delay);
    mat2_mul(&u, &mat2_mul(&p, &u))
}

/// Conjugate a spin unitary into the y-equivalent axis frame:
/// Rz(pi/2) U Rz(-pi/2).
pub fn to_y_axis(u: &SpinUnitary) -> SpinUnitary {
    let rz = su2_exp(0.0, 0.0, 0.5, PI / 2.0);
    let rz_dag = su2_exp(0.0, 0.0, 0.5, -PI / 2.0);
    mat2_mul(&rz, &mat2_mul(u, &rz_dag))
}

/// Population-flip quality of a spin unitary: |<hbar|U|h>|^2.
pub fn flip_fidelity(u: &SpinUnitary) -> f64 {
    u[1][0].norm_sqr()
}

/// Quality of U as a pi/2 rotation about some equatorial axis (the
/// equal-superposition creator class, phase fixed only up to the azimuth of
/// the rotation axis): max over azimuth of |Tr(R_axis(pi/2)^dag U)|^2 / 4.
pub fn half_fidelity(u: &SpinUnitary) -> f64 {
    // Pauli components of U: tu = Tr(U)/2, tx = Tr(sx U)/2, ty = Tr(sy U)/2.
    let tu = (u[0][0] + u[1][1]) * 0.5;
    let tx = (u[0][1] + u[1][0]) * 0.5;
    let ty = C64::new(0.0, 1.0) * (u[0][1] - u[1][0]) * 0.5;
    // |Tr(R^dag U)/2|^2 = |tu + i (cos a tx + sin a ty)|^2 / 2 for the
    // rotation R about axis (cos a, sin a, 0) by pi/2.
    let f = |a: f64| {
        let w = tx * a.cos() + ty * a.sin();
        (tu + C64::new(0.0, 1.0) * w).norm_sqr() / 2.0
    };
    let mut best = (0.0f64, f(0.0));
    for k in 1..180 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 180.0;
        let v = f(a);
        if v > best.1 {
            best = (a, v);
        }
    }
    let mut width = 2.0 * std::f64::consts::PI / 180.0;
    for _ in 0..4 {
        let center = best.0;
        for k in 0..33 {
            let a = center - width + 2.0 * width * k as f64 / 32.0;
            let v = f(a);
            if v > best.1 {
                best = (a, v);
            }
        }
        width /= 8.0;
    }
    best.1.min(1.0)
}

/// A calibrated two-pulse rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRotation {
    pub pulse_power: f64,
    /// Free-precession delay between the two pulses, ns.
    pub inter_pulse_delay: f64,
    /// Achieved net unitary on the spin subspace.
    pub unitary: SpinUnitary,
    /// Fidelity of the calibration objective at the optimum.
    pub fidelity: f64,
}

const CALIBRATION_THRESHOLD: f64 = 0.99;
const POWER_RANGE: (f64, f64) = (1e-3, 4.0);
const GRID: usize = 64;
const REFINE_ROUNDS: usize = 5;
const REFINE_GRID: usize = 17;

/// Calibrations depend only on (hole splitting, kappa, pulse length); they
/// are memoized so sequence builders can call them freely.
type CalKey = (u64, u64, u64, bool);
static CALIBRATION_CACHE: std::sync::Mutex<Option<std::collections::HashMap<CalKey, CompositeRotation>>> =
    std::sync::Mutex::new(None);

fn cal_key(config: &SimConfig, flip: bool) -> CalKey {
    (
        config.hole_splitting.to_bits(),
        config.kappa.to_bits(),
        config.timings.rotation_pulse.to_bits(),
        flip,
    )
}

fn cached_calibration(
    config: &SimConfig,
    flip: bool,
    compute: impl FnOnce() -> CompositeRotation,
) -> CompositeRotation {
    let key = cal_key(config, flip);
    {
        let guard = CALIBRATION_CACHE.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(hit) = map.get(&key) {
                return hit.clone();
            }
        }
    }
    let value = compute();
    let mut guard = CALIBRATION_CACHE.lock().unwrap();
    guard
        .get_or_insert_with(std::collections::HashMap::new)
        .insert(key, value.clone());
    value
}

fn delay_window(config: &SimConfig) -> f64 {
    if config.hole_splitting.abs() < 1e-9 {
        0.0
    } else {
        2.0 * PI / config.hole_splitting
    }
}

/// Deterministic grid-plus-refinement maximization of `objective` over
/// (power, delay in one precession period). Ties at 1e-12 break toward the
/// smaller delay, then smaller power.
fn calibrate(config: &SimConfig, objective: impl Fn(&SpinUnitary) -> f64) -> CompositeRotation {
    let delay_max = delay_window(config);
    let mut best = (POWER_RANGE.0, 0.0, f64::NEG_INFINITY);
    let consider = |power: f64, delay: f64, f: f64, best: &mut (f64, f64, f64)| {
        let better = f > best.2 + 1e-12
            || ((f - best.2).abs() <= 1e-12
                && (delay < best.1 - 1e-15
                    || ((delay - best.1).abs() <= 1e-15 && power < best.0)));
        if better {
            *best = (power, delay, f);
        }
    };

    let delays: Vec<f64> = if delay_max == 0.0 {
        vec![0.0]
    } else {
        (0..GRID).map(|i| delay_max * i as f64 / (GRID - 1) as f64).collect()
    };
    for i in 0..GRID {
        let power =
            POWER_RANGE.0 + (POWER_RANGE.1 - POWER_RANGE.0) * i as f64 / (GRID - 1) as f64;
        for &delay in &delays {
            let f = objective(&composite_unitary(config, power, delay));
            consider(power, delay, f, &mut best);
        }
    }

    let mut power_half = (POWER_RANGE.1 - POWER_RANGE.0) / (GRID - 1) as f64;
    let mut delay_half = if delay_max == 0.0 {
        0.0
    } else {
        delay_max / (GRID - 1) as f64
    };
    for _ in 0..REFINE_ROUNDS {
        let center = best;
        let lo_p = (center.0 - power_half).max(POWER_RANGE.0);
        let hi_p = (center.0 + power_half).min(POWER_RANGE.1);
        let lo_d = (center.1 - delay_half).max(0.0);
        let hi_d = if delay_max == 0.0 { 0.0 } else { (center.1 + delay_half).min(delay_max) };
        for i in 0..REFINE_GRID {
            let power = lo_p + (hi_p - lo_p) * i as f64 / (REFINE_GRID - 1) as f64;
            if delay_max == 0.0 {
                let f = objective(&composite_unitary(config, power, 0.0));
                consider(power, 0.0, f, &mut best);
            } else {
                for j in 0..REFINE_GRID {
                    let delay = lo_d + (hi_d - lo_d) * j as f64 / (REFINE_GRID - 1) as f64;
                    let f = objective(&composite_unitary(config, power, delay));
                    consider(power, delay, f, &mut best);
                }
            }
        }
        power_half /= 6.0;
        delay_half /= 6.0;
    }

    let unitary = composite_unitary(config, best.0, best.1);
    CompositeRotation {
        pulse_power: best.0,
        inter_pulse_delay: best.1,
        unitary,
        fidelity: objective(&unitary),
    }
}

fn threshold(result: CompositeRotation) -> Result<CompositeRotation> {
    if result.fidelity >= CALIBRATION_THRESHOLD {
        Ok(result)
    } else {
        let best_fidelity = result.fidelity;
        Err(Error::CalibrationFailed { best: Box::new(result), best_fidelity })
    }
}

/// Calibrate a two-pulse composite pi rotation (population flip |h> -> |hbar>).
pub fn calibrate_composite_flip(config: &SimConfig) -> Result<CompositeRotation> {
    threshold(best_composite_flip(config))
}

/// Best composite flip even when below the quality threshold.
pub fn best_composite_flip(config: &SimConfig) -> CompositeRotation {
    cached_calibration(config, true, || calibrate(config, flip_fidelity))
}

/// Calibrate a two-pulse composite pi/2 rotation (an equal-superposition
/// creator: a pi/2 rotation about an equatorial axis).
pub fn calibrate_composite_half(config: &SimConfig) -> Result<CompositeRotation> {
    threshold(best_composite_half(config))
}

pub fn best_composite_half(config: &SimConfig) -> CompositeRotation {
    cached_calibration(config, false, || calibrate(config, half_fidelity))
}

/// Best single-pulse flip fidelity over the power range (no composite), used
/// to compare against the two-pulse scheme.
pub fn best_single_pulse_flip(config: &SimConfig) -> (f64, f64) {
    let mut best = (POWER_RANGE.0, f64::NEG_INFINITY);
    for i in 0..(GRID * 8) {
        let power = POWER_RANGE.0
            + (POWER_RANGE.1 - POWER_RANGE.0) * i as f64 / (GRID * 8 - 1) as f64;
        let u = rotation_unitary(config, power, config.timings.rotation_pulse);
        let f = flip_fidelity(&u);
        if f > best.1 {
            best = (power, f);
        }
    }
    best
}

/// Ramsey rotation area selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationArea {
    /// Composite pi/2 pulses (fringes).
    Half,
    /// Composite pi pulses (fringe-free control).
    Full,
}

/// Readout variant of the time-bin sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimebinVariant {
    /// Resonant readout only; a click projects onto |hbar>.
    A,
    /// Composite flip then resonant readout; a click projects onto |h>.
    B,
}

/// Multi-photon state flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzMode {
    Ghz,
    Cluster,
}

/// Incremental sequence assembly with a time cursor.
struct SequenceBuilder<'a> {
    config: &'a SimConfig,
    segments: Vec<PulseSegment>,
    windows: Vec<NamedWindow>,
    cursor: f64,
}

impl<'a> SequenceBuilder<'a> {
    fn new(config: &'a SimConfig) -> Self {
        SequenceBuilder { config, segments: Vec::new(), windows: Vec::new(), cursor: 0.0 }
    }

    fn push(&mut self, kind: SegmentKind, duration: f64) -> f64 {
        let start = self.cursor;
        if duration > 0.0 {
            self.segments.push(PulseSegment { kind, start, duration });
            self.cursor += duration;
        }
        start
    }

    fn delay(&mut self, duration: f64) {
        self.push(SegmentKind::Delay, duration);
    }

    fn injection_and_preparation(&mut self) {
        let t = self.config.timings.clone();
        if t.injection_pulse > 0.0 {
            self.push(SegmentKind::NonResonantInjection, t.injection_pulse);
            self.delay(t.gap_after_injection);
        }
        if t.preparation_pulse > 0.0 {
            self.push(
                SegmentKind::ResonantDrive {
                    rabi: t.preparation_rabi,
                    detuning: 0.0,
                    target: Transition::enhanced(),
                },
                t.preparation_pulse,
            );
            self.delay(t.gap_after_preparation);
        }
    }

    /// Two-pulse composite with the given calibration; both pulses share one
    /// power and are separated by the calibrated free-precession delay.
    fn composite(&mut self, cal: &CompositeRotation, axis_phase: f64) {
        let tau = self.config.timings.rotation_pulse;
        self.push(SegmentKind::RotationPulse { power: cal.pulse_power, axis_phase }, tau);
        self.delay(cal.inter_pulse_delay);
        self.push(SegmentKind::RotationPulse { power: cal.pulse_power, axis_phase }, tau);
    }

    /// Resonant generation pulse; returns (pulse start, window start).
    fn generation_pulse(&mut self) -> f64 {
        let t = self.config.timings.clone();
        let start = self.push(
            SegmentKind::ResonantDrive {
                rabi: self.config.generation_rabi(),
                detuning: 0.0,
                target: Transition::enhanced(),
            },
            t.generation_pulse,
        );
        self.delay(t.gap_after_generation);
        start
    }

    fn readout(&mut self) -> f64 {
        let t = self.config.timings.clone();
        let start = self.push(
            SegmentKind::ResonantDrive {
                rabi: t.readout_rabi,
                detuning: 0.0,
                target: Transition::enhanced(),
            },
            t.readout_pulse,
        );
        self.delay(t.tail);
        start
    }

    fn window(&mut self, name: impl Into<String>, start: f64, end: f64) {
        self.windows.push(NamedWindow { name: name.into(), start, end });
    }

    fn finish(self) -> Result<PulseSequence> {
        let span = self.cursor;
        let period = match self.config.timings.repetition_period {
            Some(p) => {
                if span > p + TIME_EPS {
                    return Err(Error::InvalidSequence(format!(
                        "sequence span {span} ns exceeds configured repetition period {p} ns"
                    )));
                }
                p
            }
            None => span,
        };
        let mut seq = PulseSequence::new(self.segments, period)?;
        seq.windows = self.windows;
        Ok(seq)
    }
}

/// Rabi sequence: single rotation pulse at `power`, then resonant readout.
/// The spin starts prepared in |h> (no injection or pumping stages).
pub fn build_rabi(config: &SimConfig, power: f64) -> Result<PulseSequence> {
    let mut b = SequenceBuilder::new(config);
    b.push(SegmentKind::RotationPulse { power, axis_phase: 0.0 }, config.timings.rotation_pulse);
    b.delay(0.05);
    let r = b.readout();
    let end = b.cursor;
    b.window("readout", r, end);
    b.finish()
}

/// Ramsey sequence: injection, preparation, composite(area), delay dt,
/// composite(area), readout.
pub fn build_ramsey(config: &SimConfig, dt: f64, area: RotationArea) -> Result<PulseSequence> {
    if dt < 0.0 {
        return Err(Error::InvalidSequence("Ramsey delay must be >= 0".into()));
    }
    let cal = match area {
        RotationArea::Half => best_composite_half(config),
        RotationArea::Full => best_composite_flip(config),
    };
    let mut b = SequenceBuilder::new(config);
    b.injection_and_preparation();
    b.composite(&cal, 0.0);
    b.delay(dt);
    b.composite(&cal, 0.0);
    b.delay(0.05);
    let r = b.readout();
    let end = b.cursor;
    b.window("readout", r, end);
    b.finish()
}

/// Time-bin entanglement sequence of the proof-of-principle experiment:
/// injection, preparation, composite pi/2, generation pulse 1, composite pi,
/// generation pulse 2, then readout (variant A) or composite pi plus readout
/// (variant B). Named windows: gen1, gen2, readout.
pub fn build_timebin(config: &SimConfig, variant: TimebinVariant) -> Result<PulseSequence> {
    let half = best_composite_half(config);
    let flip = best_composite_flip(config);
    let mut b = SequenceBuilder::new(config);
    b.injection_and_preparation();
    b.composite(&half, 0.0);
    b.delay(0.02);
    let g1 = b.generation_pulse();
    let g1_end = b.cursor;
    b.composite(&flip, 0.0);
    b.delay(0.02);
    let g2 = b.generation_pulse();
    let g2_end = b.cursor;
    if variant == TimebinVariant::B {
        b.composite(&flip, 0.0);
        b.delay(0.02);
    }
    let r = b.readout();
    let end = b.cursor;
    b.window("gen1", g1, g1_end);
    b.window("gen2", g2, g2_end);
    b.window("readout", r, end);
    b.finish()
}

/// GHZ / linear-cluster generation sequence: preparation stages, composite
/// pi/2, then for each photon [generation pulse (odd bin), composite pi,
/// generation pulse (even bin), boundary rotation], then a final composite
/// pi/2 and readout. Boundary rotations are composite pi for GHZ mode and
/// composite pi/2 about the y-equivalent axis for cluster mode. Windows are
/// named tau1..tau{2n} plus readout.
pub fn build_ghz(config: &SimConfig, n_photons: usize, mode: GhzMode) -> Result<PulseSequence> {
    if n_photons < 1 {
        return Err(Error::InvalidSequence("need at least one photon".into()));
    }
    let half = best_composite_half(config);
    let flip = best_composite_flip(config);
    let mut b = SequenceBuilder::new(config);
    b.injection_and_preparation();
    b.composite(&half, 0.0);
    b.delay(0.02);
    let mut windows = Vec::new();
    for k in 0..n_photons {
        let odd_start = b.generation_pulse();
        windows.push((format!("tau{}", 2 * k + 1), odd_start, b.cursor));
        b.composite(&flip, 0.0);
        b.delay(0.02);
        let even_start = b.generation_pulse();
        windows.push((format!("tau{}", 2 * k + 2), even_start, b.cursor));
        match mode {
            GhzMode::Ghz => b.composite(&flip, 0.0),
            GhzMode::Cluster => b.composite(&half, PI / 2.0),
        }
        b.delay(0.02);
    }
    b.composite(&half, 0.0);
    b.delay(0.02);
    let r = b.readout();
    let end = b.cursor;
    for (name, start, stop) in windows {
        b.window(name, start, stop);
    }
    b.window("readout", r, end);
    b.finish()
}

/// Spin-preparation sequence: injection then a resonant pumping drive of the
/// given duration; window "prep" covers the drive.
pub fn build_spin_preparation(config: &SimConfig, drive_duration: f64) -> Result<PulseSequence> {
    if drive_duration <= 0.0 {
        return Err(Error::InvalidSequence("drive duration must be > 0".into()));
    }
    let t = &config.timings;
    let mut b = SequenceBuilder::new(config);
    if t.injection_pulse > 0.0 {
        b.push(SegmentKind::NonResonantInjection, t.injection_pulse);
        b.delay(t.gap_after_injection);
    }
    let p = b.push(
        SegmentKind::ResonantDrive {
            rabi: t.preparation_rabi,
            detuning: 0.0,
            target: Transition::enhanced(),
        },
        drive_duration,
    );
    let p_end = b.cursor;
    b.delay(t.tail);
    b.window("prep", p, p_end);
    b.finish()
}

/// Hole-storage sequence: injection, wait, resonant readout.
pub fn build_storage(config: &SimConfig, wait: f64) -> Result<PulseSequence> {
    if wait < 0.0 {
        return Err(Error::InvalidSequence("wait must be >= 0".into()));
    }
    let t = &config.timings;
    let mut b = SequenceBuilder::new(config);
    b.push(
        SegmentKind::NonResonantInjection,
        if t.injection_pulse > 0.0 { t.injection_pulse } else { 0.1 },
    );
    b.delay(wait.max(TIME_EPS * 10.0));
    let r = b.readout();
    let end = b.cursor;
    b.window("readout", r, end);
    b.finish()
}

/// Single resonant pulse of given duration and Rabi frequency; window "gen"
/// covers the pulse and its decay tail. Starts prepared in |hbar> so the pulse
/// drives the cycling transition immediately.
pub fn build_single_pulse(config: &SimConfig, duration: f64, rabi: f64) -> Result<PulseSequence> {
    if duration <= 0.0 {
        return Err(Error::InvalidSequence("pulse duration must be > 0".into()));
    }
    let mut b = SequenceBuilder::new(config);
    let g = b.push(
        SegmentKind::ResonantDrive { rabi, detuning: 0.0, target: Transition::enhanced() },
        duration,
    );
    let tail = 8.0 / config.trion_total_rate();
    b.delay(tail);
    let end = b.cursor;
    b.window("gen", g, end);
    b.finish()
}

/// Drive-free sequence of the given length (precession / decay tests).
pub fn build_idle(config: &SimConfig, duration: f64) -> Result<PulseSequence> {
    let _ = config;
    let mut b = SequenceBuilder::new(config);
    b.delay(duration);
    b.finish()
}
