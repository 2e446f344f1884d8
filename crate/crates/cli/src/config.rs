//! Flat key-value configuration files with units in the key names.
//!
//! Format: one `key = value` per line, `#` comments, blank lines ignored.
//! Unknown keys are rejected (typo safety). `write_config` emits the
//! canonical serialization used for manifest snapshots.

use std::f64::consts::PI;
use trionsim::dynamics::SimConfig;

#[derive(Debug)]
pub struct ParsedConfig {
    pub config: SimConfig,
}

fn ghz_to_rad_per_ns(ghz: f64) -> f64 {
    2.0 * PI * ghz
}

fn rad_per_ns_to_ghz(w: f64) -> f64 {
    w / (2.0 * PI)
}

const PS: f64 = 1e-3;

pub fn parse_config(text: &str) -> Result<ParsedConfig, String> {
    let mut cfg = SimConfig::default_6t();
    let mut period: Option<f64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {line_no}: expected `key = value`, got {line:?}"))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("line {line_no}: invalid number {:?} for {key}", value.trim()))?;
        let t = &mut cfg.timings;
        match key {
            "gamma0_per_ns" => cfg.gamma0 = value,
            "purcell_factor" => cfg.purcell_factor = value,
            "hole_splitting_ghz" => cfg.hole_splitting = ghz_to_rad_per_ns(value),
            "trion_splitting_ghz" => cfg.trion_splitting = ghz_to_rad_per_ns(value),
            "t2star_ns" => cfg.t2_star = value,
            "hole_injection_prob" => cfg.hole_injection_prob = value,
            "hole_escape_time_ns" => cfg.hole_escape_time = value,
            "detection_efficiency" => cfg.detection_efficiency = value,
            "pulse_area_error" => cfg.pulse_area_error = value,
            "kappa_rad" => cfg.kappa = value,
            "rotation_pulse_ps" => t.rotation_pulse = value * PS,
            "injection_pulse_ps" => t.injection_pulse = value * PS,
            "gap_after_injection_ps" => t.gap_after_injection = value * PS,
            "preparation_pulse_ns" => t.preparation_pulse = value,
            "preparation_rabi_per_ns" => t.preparation_rabi = value,
            "gap_after_preparation_ps" => t.gap_after_preparation = value * PS,
            "generation_pulse_ps" => t.generation_pulse = value * PS,
            "generation_area_rad" => t.generation_area = value,
            "gap_after_generation_ps" => t.gap_after_generation = value * PS,
            "readout_pulse_ns" => t.readout_pulse = value,
            "readout_rabi_per_ns" => t.readout_rabi = value,
            "tail_ps" => t.tail = value * PS,
            "repetition_period_ns" => period = Some(value),
            other => return Err(format!("line {line_no}: unknown key {other:?}")),
        }
    }
    cfg.timings.repetition_period = period;
    Ok(ParsedConfig { config: cfg })
}

/// Canonical flat serialization (the manifest's config snapshot).
pub fn write_config(cfg: &SimConfig) -> String {
    let t = &cfg.timings;
    let mut out = String::new();
    let mut push = |key: &str, value: f64| {
        out.push_str(&format!("{key} = {value:.12}\n"));
    };
    push("gamma0_per_ns", cfg.gamma0);
    push("purcell_factor", cfg.purcell_factor);
    push("hole_splitting_ghz", rad_per_ns_to_ghz(cfg.hole_splitting));
    push("trion_splitting_ghz", rad_per_ns_to_ghz(cfg.trion_splitting));
    push("t2star_ns", cfg.t2_star);
    push("hole_injection_prob", cfg.hole_injection_prob);
    push("hole_escape_time_ns", cfg.hole_escape_time);
    push("detection_efficiency", cfg.detection_efficiency);
    push("pulse_area_error", cfg.pulse_area_error);
    push("kappa_rad", cfg.kappa);
    push("rotation_pulse_ps", t.rotation_pulse / PS);
    push("injection_pulse_ps", t.injection_pulse / PS);
    push("gap_after_injection_ps", t.gap_after_injection / PS);
    push("preparation_pulse_ns", t.preparation_pulse);
    push("preparation_rabi_per_ns", t.preparation_rabi);
    push("gap_after_preparation_ps", t.gap_after_preparation / PS);
    push("generation_pulse_ps", t.generation_pulse / PS);
    push("generation_area_rad", t.generation_area);
    push("gap_after_generation_ps", t.gap_after_generation / PS);
    push("readout_pulse_ns", t.readout_pulse);
    push("readout_rabi_per_ns", t.readout_rabi);
    push("tail_ps", t.tail / PS);
    if let Some(p) = t.repetition_period {
        push("repetition_period_ns", p);
    }
    out
}
