//! Protocol execution, output files, and the run manifest.

use crate::config::{parse_config, write_config};
use crate::{AreaArg, ModeArg, ProtocolName, VariantArg};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use trionsim::dynamics::SimConfig;
use trionsim::estimators::{
    conditional_timebin_probability, degree_of_correlation, parse_stream, serialize_stream,
    TimebinChoice,
};
use trionsim::protocols::{self, ProtocolResult};
use trionsim::pulses::{GhzMode, RotationArea, TimebinVariant};

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

pub struct RunOptions {
    pub protocol: ProtocolName,
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub reps: Option<usize>,
    pub variant: Option<VariantArg>,
    pub mode: Option<ModeArg>,
    pub photons: Option<usize>,
    pub delays: Option<String>,
    pub powers: Option<String>,
    pub waits: Option<String>,
    pub duration_ns: Option<f64>,
    pub rabi_per_ns: Option<f64>,
    pub area: Option<AreaArg>,
    pub threads: Option<usize>,
    pub force: bool,
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

pub fn cmd_validate(path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_VALIDATION, &format!("cannot read {}: {e}", path.display())),
    };
    let parsed = match parse_config(&text) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_VALIDATION, &e),
    };
    let errors = parsed.config.validate();
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("invalid: {e}");
        }
        return ExitCode::from(EXIT_VALIDATION);
    }
    for w in parsed.config.sanity_warnings() {
        eprintln!("note: {w}");
    }
    println!("configuration is valid");
    ExitCode::SUCCESS
}

/// Parse "start:stop:step" into an inclusive range.
fn parse_range(text: &str, what: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("{what}: expected start:stop:step, got {text:?}"));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    let nums = nums.map_err(|_| format!("{what}: invalid number in {text:?}"))?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(format!("{what}: need stop >= start and step > 0"));
    }
    let mut out = Vec::new();
    let n = ((stop - start) / step).round() as usize;
    for k in 0..=n {
        let v = start + step * k as f64;
        if v <= stop + 1e-9 * step {
            out.push(v);
        }
    }
    Ok(out)
}

struct Outputs {
    base: PathBuf,
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new(out_dir: &Path, protocol: &str) -> Outputs {
        Outputs { base: out_dir.join(protocol), files: Vec::new() }
    }

    fn push(&mut self, suffix: &str, content: String) {
        let name = format!(
            "{}.{suffix}",
            self.base.file_name().unwrap().to_string_lossy()
        );
        self.files.push((name, content));
    }

    fn write_all(&self, out_dir: &Path, force: bool) -> Result<Vec<String>, (u8, String)> {
        let mut names = Vec::new();
        for (name, _) in &self.files {
            let path = out_dir.join(name);
            if path.exists() && !force {
                return Err((
                    EXIT_VALIDATION,
                    format!("{} exists; pass --force to overwrite", path.display()),
                ));
            }
        }
        std::fs::create_dir_all(out_dir)
            .map_err(|e| (EXIT_RUNTIME, format!("cannot create {}: {e}", out_dir.display())))?;
        for (name, content) in &self.files {
            let path = out_dir.join(name);
            std::fs::write(&path, content)
                .map_err(|e| (EXIT_RUNTIME, format!("cannot write {}: {e}", path.display())))?;
            names.push(name.clone());
        }
        Ok(names)
    }
}

fn manifest(
    protocol: &str,
    seed: u64,
    config: &SimConfig,
    params: &[(String, String)],
    outputs: &[String],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# trionsim manifest v1");
    let _ = writeln!(out, "version {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "protocol {protocol}");
    let _ = writeln!(out, "seed {seed}");
    let mut sorted: Vec<_> = params.to_vec();
    sorted.sort();
    for (k, v) in sorted {
        let _ = writeln!(out, "param {k} {v}");
    }
    let _ = writeln!(out, "config_begin");
    out.push_str(&write_config(config));
    let _ = writeln!(out, "config_end");
    for name in outputs {
        let _ = writeln!(out, "output {name}");
    }
    out
}

fn push_traces(outputs: &mut Outputs, result: &ProtocolResult) {
    for trace in &result.traces {
        outputs.push(&format!("{}.csv", trace.name), trace.to_csv());
    }
}

pub fn cmd_run(opts: RunOptions) -> ExitCode {
    let config = match &opts.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    return fail(EXIT_VALIDATION, &format!("cannot read {}: {e}", path.display()))
                }
            };
            match parse_config(&text) {
                Ok(p) => p.config,
                Err(e) => return fail(EXIT_VALIDATION, &e),
            }
        }
        None => SimConfig::default_6t(),
    };
    let errors = config.validate();
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("invalid: {e}");
        }
        return ExitCode::from(EXIT_VALIDATION);
    }

    // Flag-compatibility checks.
    let p = opts.protocol;
    let bad_flag = |name: &str| {
        fail(EXIT_VALIDATION, &format!("--{name} is not valid for protocol {}", p.as_str()))
    };
    if opts.variant.is_some() && p != ProtocolName::Timebin {
        return bad_flag("variant");
    }
    if (opts.mode.is_some() || opts.photons.is_some()) && p != ProtocolName::Ghz {
        return bad_flag("mode/photons");
    }
    if (opts.delays.is_some() || opts.area.is_some()) && p != ProtocolName::Ramsey {
        return bad_flag("delays/area");
    }
    if opts.powers.is_some() && p != ProtocolName::Rabi {
        return bad_flag("powers");
    }
    if opts.waits.is_some() && p != ProtocolName::Storage {
        return bad_flag("waits");
    }
    if opts.rabi_per_ns.is_some() && p != ProtocolName::Photnum {
        return bad_flag("rabi-per-ns");
    }
    if opts.duration_ns.is_some() && !matches!(p, ProtocolName::Spinprep | ProtocolName::Photnum) {
        return bad_flag("duration-ns");
    }

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => return fail(EXIT_RUNTIME, &format!("thread pool: {e}")),
    };
    pool.install(|| cmd_run_inner(opts, config))
}

fn cmd_run_inner(opts: RunOptions, config: SimConfig) -> ExitCode {
    let protocol = opts.protocol.as_str();
    let seed = opts.seed;
    let mut params: Vec<(String, String)> = Vec::new();
    let mut outputs = Outputs::new(&opts.out, protocol);

    let result: Result<ProtocolResult, trionsim::Error> = match opts.protocol {
        ProtocolName::Spinprep => {
            let duration = opts.duration_ns.unwrap_or(6.0);
            let reps = opts.reps.unwrap_or(0);
            params.push(("duration_ns".into(), format!("{duration}")));
            params.push(("reps".into(), format!("{reps}")));
            protocols::spin_preparation_trace(&config, duration, reps, seed)
        }
        ProtocolName::Rabi => {
            let powers = match opts
                .powers
                .as_deref()
                .map(|t| parse_range(t, "--powers"))
                .unwrap_or_else(|| parse_range("0:4:0.05", "--powers"))
            {
                Ok(v) => v,
                Err(e) => return fail(EXIT_VALIDATION, &e),
            };
            let reps = opts.reps.unwrap_or(0);
            params.push(("powers".into(), opts.powers.clone().unwrap_or("0:4:0.05".into())));
            params.push(("reps".into(), format!("{reps}")));
            protocols::rabi_experiment(&config, &powers, reps, seed)
        }
        ProtocolName::Ramsey => {
            let delays_ps = match opts
                .delays
                .as_deref()
                .map(|t| parse_range(t, "--delays"))
                .unwrap_or_else(|| parse_range("0:6000:5", "--delays"))
            {
                Ok(v) => v,
                Err(e) => return fail(EXIT_VALIDATION, &e),
            };
            let delays: Vec<f64> = delays_ps.iter().map(|ps| ps * 1e-3).collect();
            let area = match opts.area.unwrap_or(AreaArg::Half) {
                AreaArg::Half => RotationArea::Half,
                AreaArg::Full => RotationArea::Full,
            };
            let reps = opts.reps.unwrap_or(0);
            params.push(("delays_ps".into(), opts.delays.clone().unwrap_or("0:6000:5".into())));
            params.push((
                "area".into(),
                match area {
                    RotationArea::Half => "half".into(),
                    RotationArea::Full => "full".into(),
                },
            ));
            params.push(("reps".into(), format!("{reps}")));
            protocols::ramsey_experiment(&config, &delays, area, reps, seed)
        }
        ProtocolName::Timebin => {
            let variant = match opts.variant.unwrap_or(VariantArg::A) {
                VariantArg::A => TimebinVariant::A,
                VariantArg::B => TimebinVariant::B,
            };
            let reps = opts.reps.unwrap_or(20_000);
            params.push((
                "variant".into(),
                if variant == TimebinVariant::A { "A".into() } else { "B".into() },
            ));
            params.push(("reps".into(), format!("{reps}")));
            match protocols::timebin_experiment(&config, variant, reps, seed) {
                Ok((result, stream)) => {
                    outputs.push("stream.txt", serialize_stream(&stream));
                    if let Ok(seq) = trionsim::pulses::build_timebin(&config, variant) {
                        outputs.push("sequence.txt", seq.describe());
                    }
                    Ok(result)
                }
                Err(e) => Err(e),
            }
        }
        ProtocolName::Ghz => {
            let photons = opts.photons.unwrap_or(3);
            let mode = match opts.mode.unwrap_or(ModeArg::Ghz) {
                ModeArg::Ghz => GhzMode::Ghz,
                ModeArg::Cluster => GhzMode::Cluster,
            };
            params.push(("photons".into(), format!("{photons}")));
            params.push((
                "mode".into(),
                if mode == GhzMode::Ghz { "ghz".into() } else { "cluster".into() },
            ));
            if let Ok(seq) = trionsim::pulses::build_ghz(&config, photons, mode) {
                outputs.push("sequence.txt", seq.describe());
            }
            protocols::ghz_generation(&config, photons, mode)
        }
        ProtocolName::Photnum => {
            let duration = opts.duration_ns.unwrap_or(config.timings.generation_pulse);
            let reps = opts.reps.unwrap_or(5000);
            params.push(("duration_ns".into(), format!("{duration}")));
            params.push(("reps".into(), format!("{reps}")));
            if let Some(r) = opts.rabi_per_ns {
                params.push(("rabi_per_ns".into(), format!("{r}")));
            }
            protocols::photon_number_distribution(&config, duration, opts.rabi_per_ns, reps, seed)
        }
        ProtocolName::Storage => {
            let waits = match opts
                .waits
                .as_deref()
                .map(|t| parse_range(t, "--waits"))
                .unwrap_or_else(|| parse_range("0:2000:250", "--waits"))
            {
                Ok(v) => v,
                Err(e) => return fail(EXIT_VALIDATION, &e),
            };
            let reps = opts.reps.unwrap_or(5000);
            params.push(("waits_ns".into(), opts.waits.clone().unwrap_or("0:2000:250".into())));
            params.push(("reps".into(), format!("{reps}")));
            protocols::hole_storage_trace(&config, &waits, reps, seed)
        }
    };

    let result = match result {
        Ok(r) => r,
        Err(e) => return fail(EXIT_RUNTIME, &format!("{e}")),
    };

    outputs.push("summary.txt", result.to_summary(protocol));
    push_traces(&mut outputs, &result);
    // The manifest lists every output including itself.
    let mut names: Vec<String> = outputs.files.iter().map(|(n, _)| n.clone()).collect();
    names.push(format!("{protocol}.manifest.txt"));
    outputs.push("manifest.txt", manifest(protocol, seed, &config, &params, &names));

    match outputs.write_all(&opts.out, opts.force) {
        Ok(written) => {
            for name in written {
                println!("wrote {}", opts.out.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err((code, message)) => fail(code, &message),
    }
}

pub fn cmd_analyze(path: &Path, gen: Option<&str>, read: &str) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_VALIDATION, &format!("cannot read {}: {e}", path.display())),
    };
    let stream = match parse_stream(&text) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_VALIDATION, &format!("{e}")),
    };
    let available: Vec<String> = stream.windows().keys().cloned().collect();
    let missing = |name: &str| {
        fail(
            EXIT_VALIDATION,
            &format!("window {name:?} not in stream; available: {}", available.join(", ")),
        )
    };
    if !stream.windows().contains_key(read) {
        return missing(read);
    }
    let gen_windows: Vec<String> = match gen {
        Some(name) => {
            if !stream.windows().contains_key(name) {
                return missing(name);
            }
            vec![name.to_string()]
        }
        None => {
            let gens: Vec<String> = ["gen1", "gen2"]
                .iter()
                .filter(|n| stream.windows().contains_key(**n))
                .map(|n| n.to_string())
                .collect();
            if gens.is_empty() {
                return fail(
                    EXIT_VALIDATION,
                    &format!(
                        "no gen1/gen2 windows in stream; available: {}",
                        available.join(", ")
                    ),
                );
            }
            gens
        }
    };

    let mut values = Vec::new();
    for name in &gen_windows {
        match degree_of_correlation(&stream, name, read) {
            Ok((value, err)) => {
                println!("g2_{name}_{read} {value:.12e} {err:.12e} {}", stream.len());
                values.push(value);
            }
            Err(e) => return fail(EXIT_RUNTIME, &format!("{e}")),
        }
    }
    if values.len() == 2 {
        match conditional_timebin_probability(values[0], values[1], TimebinChoice::Second) {
            Ok(p) => {
                println!("p_second_bin {p:.12e}");
                println!("p_first_bin {:.12e}", 1.0 - p);
            }
            Err(e) => return fail(EXIT_RUNTIME, &format!("{e}")),
        }
    }
    ExitCode::SUCCESS
}
