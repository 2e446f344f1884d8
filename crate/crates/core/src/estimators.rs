//! Statistical estimators over time-tag streams: the degree of correlation
//! between named windows, conditional time-bin probabilities, fringe
//! visibility, exponential-envelope fits, and the line-oriented stream file
//! format (times stored as integer picoseconds for bit-exact round trips).

use crate::rng::bootstrap_rng;
use crate::{Error, Result};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One detected photon: arrival time within the repetition (integer ps) and
/// detector channel label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeTag {
    pub time_ps: i64,
    pub channel: u32,
}

/// Per-repetition records of detected-photon times plus the named windows of
/// the pulse sequence. All tag times lie in [0, repetition_period_ps).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTagStream {
    repetition_period_ps: i64,
    windows: BTreeMap<String, (i64, i64)>,
    repetitions: Vec<Vec<TimeTag>>,
}

impl TimeTagStream {
    pub fn new(
        repetition_period_ps: i64,
        windows: BTreeMap<String, (i64, i64)>,
        repetitions: Vec<Vec<TimeTag>>,
    ) -> Result<TimeTagStream> {
        if repetition_period_ps <= 0 {
            return Err(Error::EstimatorInput("repetition period must be positive".into()));
        }
        for (name, (start, end)) in &windows {
            if *start < 0 || *end > repetition_period_ps || start >= end {
                return Err(Error::EstimatorInput(format!(
                    "window {name} [{start}, {end}) outside the repetition"
                )));
            }
        }
        let mut sorted: Vec<_> = windows.values().collect();
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[1].0 < pair[0].1 {
                return Err(Error::EstimatorInput("windows overlap".into()));
            }
        }
        for (r, tags) in repetitions.iter().enumerate() {
            for tag in tags {
                if tag.time_ps < 0 || tag.time_ps >= repetition_period_ps {
                    return Err(Error::EstimatorInput(format!(
                        "tag at {} ps in repetition {r} outside [0, {repetition_period_ps})",
                        tag.time_ps
                    )));
                }
            }
        }
        Ok(TimeTagStream { repetition_period_ps, windows, repetitions })
    }

    pub fn repetition_period_ps(&self) -> i64 {
        self.repetition_period_ps
    }

    pub fn windows(&self) -> &BTreeMap<String, (i64, i64)> {
        &self.windows
    }

    pub fn repetitions(&self) -> &[Vec<TimeTag>] {
        &self.repetitions
    }

    pub fn len(&self) -> usize {
        self.repetitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.repetitions.is_empty()
    }

    /// Detected counts per repetition inside the named window.
    pub fn counts_in(&self, window: &str) -> Result<Vec<u32>> {
        let (start, end) = *self.windows.get(window).ok_or_else(|| {
            Error::EstimatorInput(format!(
                "window {window:?} not found; available: {}",
                self.windows.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })?;
        Ok(self
            .repetitions
            .iter()
            .map(|tags| {
                tags.iter().filter(|t| t.time_ps >= start && t.time_ps < end).count() as u32
            })
            .collect())
    }
}

/// Bootstrap resample count for correlation error bars (fixed, seeded).
const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x7472_696f_6e73;

fn correlation_value(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let same: f64 = pairs.iter().map(|(g, r)| g * r).sum();
    let sum_g: f64 = pairs.iter().map(|(g, _)| g).sum();
    let sum_r: f64 = pairs.iter().map(|(_, r)| r).sum();
    if sum_g == 0.0 || sum_r == 0.0 {
        // A window with no clicks at all carries zero correlation.
        return Some(0.0);
    }
    // Mean over all ordered cross-repetition pairs (every nonzero offset).
    let cross = (sum_g * sum_r - same) / (n * (n - 1.0));
    if cross <= 0.0 {
        return None;
    }
    Some((same / n) / cross)
}

/// Degree of correlation between a generation window and the readout window:
/// same-repetition coincidences divided by the mean cross-repetition
/// coincidences over all ordered repetition pairs at nonzero offset. The
/// standard error comes from a seeded 200-resample bootstrap over
/// repetitions (coincidences are not Poisson under post-selection).
pub fn degree_of_correlation(
    stream: &TimeTagStream,
    gen_window: &str,
    read_window: &str,
) -> Result<(f64, f64)> {
    degree_of_correlation_with_offsets(stream, gen_window, read_window, None)
}

/// [`degree_of_correlation`] with the cross-repetition normalization
/// restricted to ordered pairs at offsets 1..=K (None = all offsets, the
/// lowest-variance default).
pub fn degree_of_correlation_with_offsets(
    stream: &TimeTagStream,
    gen_window: &str,
    read_window: &str,
    max_offset: Option<usize>,
) -> Result<(f64, f64)> {
    if stream.len() < 2 {
        return Err(Error::EstimatorInput("need at least 2 repetitions".into()));
    }
    let g = stream.counts_in(gen_window)?;
    let r = stream.counts_in(read_window)?;
    let mut pairs: Vec<(f64, f64)> =
        g.iter().zip(r.iter()).map(|(&a, &b)| (a as f64, b as f64)).collect();
    if let Some(k_max) = max_offset {
        // Direct evaluation over the limited offsets; no bootstrap here
        // (the windowed normalization is an ad-hoc diagnostic).
        let n = pairs.len();
        let k_max = k_max.clamp(1, n - 1);
        let same: f64 = pairs.iter().map(|(a, b)| a * b).sum::<f64>() / n as f64;
        let mut cross = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            for k in 1..=k_max {
                let j = (i + k) % n;
                cross += pairs[i].0 * pairs[j].1;
                cross += pairs[j].0 * pairs[i].1;
                count += 2;
            }
        }
        if cross <= 0.0 {
            return Err(Error::EstimatorInput(
                "zero cross-repetition coincidences: normalization undefined".into(),
            ));
        }
        return Ok((same / (cross / count as f64), f64::NAN));
    }
    let value = correlation_value(&pairs).ok_or_else(|| {
        Error::EstimatorInput("zero cross-repetition coincidences: normalization undefined".into())
    })?;

    // Canonical order makes the bootstrapped error bit-identical under
    // repetition reordering (the value itself is exactly invariant).
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rng = bootstrap_rng(BOOTSTRAP_SEED);
    let n = pairs.len();
    let mut resampled = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let sample: Vec<(f64, f64)> =
            (0..n).map(|_| pairs[rng.random_range(0..n)]).collect();
        if let Some(v) = correlation_value(&sample) {
            resampled.push(v);
        }
    }
    let stderr = if resampled.len() > 1 {
        let mean = resampled.iter().sum::<f64>() / resampled.len() as f64;
        (resampled.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
            / (resampled.len() - 1) as f64)
            .sqrt()
    } else {
        f64::NAN
    };
    Ok((value, stderr))
}

/// Conditional time-bin probability g_which / (g1 + g2). The two choices
/// partition unity exactly (the second is computed as one minus the first).
pub fn conditional_timebin_probability(g1: f64, g2: f64, which: TimebinChoice) -> Result<f64> {
    if !(g1 + g2 > 0.0) {
        return Err(Error::EstimatorInput("g1 + g2 must be positive".into()));
    }
    let first = g1 / (g1 + g2);
    Ok(match which {
        TimebinChoice::First => first,
        TimebinChoice::Second => 1.0 - first,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimebinChoice {
    First,
    Second,
}

/// One fitted parameter with its 1-sigma uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct FitParam {
    pub name: &'static str,
    pub value: f64,
    pub sigma: f64,
}

/// Parameter estimates, uncertainties, and the residual norm of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Vec<FitParam>,
    pub residual_norm: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Solve the 3x3 normal equations of y ~ c + a cos(w x) + b sin(w x).
fn sinusoid_lsq(points: &[(f64, f64)], omega: f64) -> Option<(f64, f64, f64, f64)> {
    let n = points.len();
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(x, y) in points {
        let basis = [1.0, (omega * x).cos(), (omega * x).sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += basis[i] * basis[j];
            }
            aty[i] += basis[i] * y;
        }
    }
    let sol = solve3(&ata, &aty)?;
    let mut ss = 0.0;
    for &(x, y) in points {
        let model = sol[0] + sol[1] * (omega * x).cos() + sol[2] * (omega * x).sin();
        ss += (y - model).powi(2);
    }
    let _ = n;
    Some((sol[0], sol[1], sol[2], ss))
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Detailed sinusoid fit: scans `omega` over a band, refines, and reports the
/// amplitude, offset, frequency, and the amplitude's 1-sigma uncertainty from
/// the residual-based covariance.
pub struct FringeFit {
    pub offset: f64,
    pub amplitude: f64,
    pub amplitude_sigma: f64,
    pub omega: f64,
    pub residual_norm: f64,
}

/// Fit y ~ c + A cos(w x + phi) with w scanned over `band` (rad per x unit).
pub fn fit_fringe(points: &[(f64, f64)], band: (f64, f64), scan: usize) -> Result<FringeFit> {
    if points.len() < 4 {
        return Err(Error::EstimatorInput("need at least 4 points for a fringe fit".into()));
    }
    let (lo, hi) = band;
    if !(hi > lo) || lo < 0.0 {
        return Err(Error::DegenerateFit("empty frequency band".into()));
    }
    let mut best: Option<(f64, f64, f64, f64, f64)> = None; // (ss, w, c, a, b)
    let consider = |omega: f64, best: &mut Option<(f64, f64, f64, f64, f64)>| {
        if let Some((c, a, b, ss)) = sinusoid_lsq(points, omega) {
            if best.is_none() || ss < best.unwrap().0 {
                *best = Some((ss, omega, c, a, b));
            }
        }
    };
    for k in 0..scan {
        let omega = lo + (hi - lo) * k as f64 / (scan - 1).max(1) as f64;
        consider(omega, &mut best);
    }
    let coarse = best.ok_or_else(|| Error::DegenerateFit("singular normal equations".into()))?;
    let mut width = (hi - lo) / scan as f64;
    let mut center = coarse.1;
    for _ in 0..3 {
        for k in 0..33 {
            let omega = (center - width + 2.0 * width * k as f64 / 32.0).max(lo);
            consider(omega, &mut best);
        }
        let b = best.unwrap();
        center = b.1;
        width /= 8.0;
    }
    let (ss, omega, c, a, b) = best.unwrap();
    let amplitude = (a * a + b * b).sqrt();
    let dof = (points.len() as f64 - 4.0).max(1.0);
    let sigma2 = ss / dof;
    // Amplitude variance from the quadrature components; the cos/sin basis is
    // near-orthogonal over several periods, giving var(a) ~ 2 sigma^2 / n.
    let amplitude_sigma = (2.0 * sigma2 / points.len() as f64).sqrt();
    Ok(FringeFit { offset: c, amplitude, amplitude_sigma, omega, residual_norm: ss.sqrt() })
}

/// Fringe visibility of a non-negative trace: sinusoid-plus-offset least
/// squares with the frequency scanned over a band derived from the sample
/// spacing (Nyquist) and span, visibility = amplitude/offset clamped to [0,1].
pub fn visibility(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::EstimatorInput("need at least 2 points".into()));
    }
    if points.iter().any(|(_, y)| *y < 0.0) {
        return Err(Error::EstimatorInput("visibility input must be non-negative".into()));
    }
    let mut xs: Vec<f64> = points.iter().map(|(x, _)| *x).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    let span = xs.last().unwrap() - xs.first().unwrap();
    let min_dx = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !(span > 0.0) || !min_dx.is_finite() {
        return Err(Error::DegenerateFit("degenerate abscissa".into()));
    }
    let band = (2.0 * std::f64::consts::PI * 0.25 / span, std::f64::consts::PI / min_dx);
    let fit = fit_fringe(points, band, 2048)?;
    if fit.offset <= 0.0 {
        return Ok((0.0, fit.amplitude_sigma));
    }
    let vis = (fit.amplitude / fit.offset).clamp(0.0, 1.0);
    let sigma = fit.amplitude_sigma / fit.offset;
    Ok((vis, sigma))
}

/// Least squares on log-amplitude vs delay: amplitude ~ A exp(-dt/tau).
/// Returns the time constant and amplitude with linear-fit uncertainties.
pub fn fit_exponential_envelope(peaks: &[(f64, f64)]) -> Result<FitResult> {
    if peaks.len() < 3 {
        return Err(Error::EstimatorInput("need at least 3 points".into()));
    }
    if peaks.iter().any(|(_, a)| *a <= 0.0) {
        return Err(Error::EstimatorInput("amplitudes must be positive".into()));
    }
    let n = peaks.len() as f64;
    let logs: Vec<(f64, f64)> = peaks.iter().map(|(t, a)| (*t, a.ln())).collect();
    let sx: f64 = logs.iter().map(|(t, _)| t).sum();
    let sy: f64 = logs.iter().map(|(_, y)| y).sum();
    let sxx: f64 = logs.iter().map(|(t, _)| t * t).sum();
    let sxy: f64 = logs.iter().map(|(t, y)| t * y).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateFit("collinear abscissa".into()));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    if slope >= 0.0 {
        return Err(Error::DegenerateFit("envelope does not decay".into()));
    }
    let ss: f64 = logs.iter().map(|(t, y)| (y - intercept - slope * t).powi(2)).sum();
    let dof = (n - 2.0).max(1.0);
    let sigma2 = ss / dof;
    let slope_sigma = (sigma2 * n / det).sqrt();
    let tau = -1.0 / slope;
    let tau_sigma = slope_sigma / (slope * slope);
    Ok(FitResult {
        params: vec![
            FitParam { name: "time_constant", value: tau, sigma: tau_sigma },
            FitParam {
                name: "amplitude",
                value: intercept.exp(),
                sigma: intercept.exp() * (sigma2 * sxx / det).sqrt(),
            },
        ],
        residual_norm: ss.sqrt(),
    })
}

/// Serialize a stream to the line-oriented text format:
/// `period_ps`, `window <name> <start_ps> <end_ps>`, then `rep <index>`
/// blocks of `tag <time_ps> <channel>` lines. Bit-exact round trip.
pub fn serialize_stream(stream: &TimeTagStream) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "period_ps {}", stream.repetition_period_ps);
    for (name, (start, end)) in &stream.windows {
        let _ = writeln!(out, "window {name} {start} {end}");
    }
    for (i, tags) in stream.repetitions.iter().enumerate() {
        let _ = writeln!(out, "rep {i}");
        for tag in tags {
            let _ = writeln!(out, "tag {} {}", tag.time_ps, tag.channel);
        }
    }
    out
}

/// Parse the stream text format; malformed input is reported with its line
/// number and field.
pub fn parse_stream(text: &str) -> Result<TimeTagStream> {
    let mut period: Option<i64> = None;
    let mut windows = BTreeMap::new();
    let mut repetitions: Vec<Vec<TimeTag>> = Vec::new();
    let parse_int = |line: usize, field: &str, value: &str| -> Result<i64> {
        value.parse::<i64>().map_err(|_| Error::Parse {
            line,
            message: format!("invalid {field} {value:?}"),
        })
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let keyword = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match keyword {
            "period_ps" => {
                if rest.len() != 1 {
                    return Err(Error::Parse { line, message: "period_ps takes one value".into() });
                }
                period = Some(parse_int(line, "period", rest[0])?);
            }
            "window" => {
                if rest.len() != 3 {
                    return Err(Error::Parse {
                        line,
                        message: "window takes <name> <start_ps> <end_ps>".into(),
                    });
                }
                let start = parse_int(line, "window start", rest[1])?;
                let end = parse_int(line, "window end", rest[2])?;
                windows.insert(rest[0].to_string(), (start, end));
            }
            "rep" => {
                if rest.len() != 1 {
                    return Err(Error::Parse { line, message: "rep takes one index".into() });
                }
                let index = parse_int(line, "repetition index", rest[0])?;
                if index != repetitions.len() as i64 {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "repetition index {index} out of order (expected {})",
                            repetitions.len()
                        ),
                    });
                }
                repetitions.push(Vec::new());
            }
            "tag" => {
                if rest.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        message: "tag takes <time_ps> <channel>".into(),
                    });
                }
                let time_ps = parse_int(line, "tag time", rest[0])?;
                let channel = parse_int(line, "tag channel", rest[1])?;
                let period = period.ok_or(Error::Parse {
                    line,
                    message: "tag before period_ps header".into(),
                })?;
                if time_ps < 0 || time_ps >= period {
                    return Err(Error::Parse {
                        line,
                        message: format!("tag time {time_ps} outside [0, {period})"),
                    });
                }
                let rep = repetitions.last_mut().ok_or(Error::Parse {
                    line,
                    message: "tag before any rep block".into(),
                })?;
                rep.push(TimeTag { time_ps, channel: channel as u32 });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown record {other:?}"),
                });
            }
        }
    }
    let period = period.ok_or(Error::Parse { line: 0, message: "missing period_ps".into() })?;
    TimeTagStream::new(period, windows, repetitions)
}
