//! Experiment configuration: a sectioned key-value file plus command-line
//! flags, flags winning. The file format:
//!
//! ```text
//! [experiment]
//! arch = programs/single_queue.basel   # or template:multiqueue:<sched>
//! policy = fifo-fifo
//! slots = 10000
//! oracle = true
//! out = results.csv
//!
//! [mmpp]
//! lambda = 0.5
//! k = 8
//!
//! [consts]
//! B = 8
//!
//! [sweep]
//! C = 1, 2, 4, 8
//! seeds = 1..20
//! ```

use std::path::PathBuf;

use super::{ArchSource, ExperimentSpec, MmppConfig, TraceSource};
use crate::oracle::OracleBounds;
use crate::traffic::QueueAssignment;

#[derive(Debug)]
pub enum CliCommand {
    Run(Box<ExperimentSpec>),
    ListBuiltins,
    Help,
}

pub const USAGE: &str = "\
basel — buffering-architecture interpreter, simulator and experiment runner

usage: basel [flags]
       basel --list-builtins

flags:
  --arch <file>             architecture source (.basel), or
                            template:multiqueue:<sched> with sched one of
                            lqf|sqf|maxqf|minqf|crr|prr
  --config <file>           experiment config file (flags override it)
  --const <name=value>      bind a program constant (repeatable), e.g. B=8
  --trace <file>            replay a trace file (excludes --mmpp)
  --mmpp <k=v,...>          generate traffic: lambda, k, pon, poff, queues,
                            assignment, size, value, slack
  --slots <N>               time slots per run
  --speedup <C[,C...]>      processing cycles per port per slot; a comma
                            list sweeps the axis
  --seed <S>                single seed
  --seeds <A..B>            inclusive seed range sweep
  --oracle                  compute offline-optimal value and ratio per row
  --oracle-max-packets <N>  exhaustive-search packet bound
  --out <path>              write the result table here (default stdout);
                            aggregates go next to it as <out>.agg.<axis>.csv
  --no-timestamp            omit the generation-time header comment
  --workers <N>             parallel sweep workers (deterministic output)
  --list-builtins           print the builtin comparator/action catalog
  --help                    this text

exit codes: 0 success, 1 any failed row, 2 invalid configuration or program
";

pub fn parse_args(args: &[String]) -> Result<CliCommand, String> {
    if args.iter().any(|a| a == "--help" || a == "-h") {
        return Ok(CliCommand::Help);
    }
    if args.iter().any(|a| a == "--list-builtins") {
        return Ok(CliCommand::ListBuiltins);
    }

    // config file first, flags override
    let mut spec = ExperimentSpec::default();
    if let Some(path) = flag_value(args, "--config")? {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("config file {}: {}", path, e))?;
        apply_config(&mut spec, &text)?;
    }

    let mut mmpp_from_flags: Option<MmppConfig> = None;
    let mut trace_from_flags: Option<PathBuf> = None;
    let mut i = 0;
    while i < args.len() {
        let flag = args[i].as_str();
        let mut take = || -> Result<&str, String> {
            i += 1;
            args.get(i)
                .map(|s| s.as_str())
                .ok_or_else(|| format!("flag {} needs a value", flag))
        };
        match flag {
            "--config" => {
                take()?;
            }
            "--arch" => {
                spec.arch = parse_arch_source(take()?);
            }
            "--const" => {
                let (name, value) = split_kv(take()?)?;
                let value: i64 = value
                    .parse()
                    .map_err(|_| format!("--const {}: not an integer", name))?;
                spec.consts.insert(name.to_string(), value);
            }
            "--trace" => {
                trace_from_flags = Some(PathBuf::from(take()?));
            }
            "--mmpp" => {
                let mut mc = match &spec.trace {
                    TraceSource::Mmpp(existing) => existing.clone(),
                    _ => MmppConfig::with_defaults(),
                };
                apply_mmpp_pairs(&mut mc, take()?)?;
                mmpp_from_flags = Some(mc);
            }
            "--slots" => {
                spec.slots = parse_int(take()?, "--slots")?;
            }
            "--speedup" => {
                spec.sweep.speedup = parse_int_list(take()?, "--speedup")?;
            }
            "--seed" => {
                spec.sweep.seeds = vec![parse_int(take()?, "--seed")? as u64];
            }
            "--seeds" => {
                spec.sweep.seeds = parse_seed_range(take()?)?;
            }
            "--oracle" => {
                spec.oracle.get_or_insert_with(OracleBounds::default);
            }
            "--oracle-max-packets" => {
                let n = parse_int(take()?, "--oracle-max-packets")? as usize;
                spec.oracle.get_or_insert_with(OracleBounds::default).max_packets = n;
            }
            "--out" => {
                spec.out = Some(PathBuf::from(take()?));
            }
            "--no-timestamp" => {
                spec.timestamp = false;
            }
            "--workers" => {
                spec.workers = parse_int(take()?, "--workers")? as usize;
            }
            other => return Err(format!("unknown flag '{}' (see --help)", other)),
        }
        i += 1;
    }

    match (trace_from_flags, mmpp_from_flags) {
        (Some(_), Some(_)) => {
            return Err("exactly one trace source: --trace and --mmpp both given".to_string())
        }
        (Some(path), None) => spec.trace = TraceSource::File(path),
        (None, Some(mc)) => spec.trace = TraceSource::Mmpp(mc),
        (None, None) => {}
    }

    if matches!(&spec.arch, ArchSource::Inline(s) if s.is_empty()) {
        return Err("no architecture given: use --arch <file> or a config file".to_string());
    }
    if spec.policy_label == "policy" {
        spec.policy_label = default_label(&spec.arch);
    }
    Ok(CliCommand::Run(Box::new(spec)))
}

fn default_label(arch: &ArchSource) -> String {
    match arch {
        ArchSource::File(path) => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "policy".to_string()),
        ArchSource::MultiQueueTemplate { sched } => format!("multiqueue-{}", sched),
        ArchSource::Inline(_) => "policy".to_string(),
    }
}

fn parse_arch_source(value: &str) -> ArchSource {
    match value.strip_prefix("template:multiqueue:") {
        Some(sched) => ArchSource::MultiQueueTemplate {
            sched: sched.to_string(),
        },
        None => ArchSource::File(PathBuf::from(value)),
    }
}

fn flag_value(args: &[String], flag: &str) -> Result<Option<String>, String> {
    for (i, a) in args.iter().enumerate() {
        if a == flag {
            return args
                .get(i + 1)
                .cloned()
                .map(Some)
                .ok_or_else(|| format!("flag {} needs a value", flag));
        }
    }
    Ok(None)
}

fn split_kv(text: &str) -> Result<(&str, &str), String> {
    text.split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{}'", text))
}

fn parse_int(text: &str, what: &str) -> Result<i64, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("{}: '{}' is not an integer", what, text))
}

fn parse_float(text: &str, what: &str) -> Result<f64, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("{}: '{}' is not a number", what, text))
}

fn parse_int_list(text: &str, what: &str) -> Result<Vec<i64>, String> {
    text.split(',').map(|v| parse_int(v, what)).collect()
}

fn parse_float_list(text: &str, what: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(|v| parse_float(v, what)).collect()
}

/// `A..B` inclusive, or a comma list.
fn parse_seed_range(text: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .map_err(|_| format!("bad seed range '{}'", text))?;
        let b: u64 = b
            .trim()
            .parse()
            .map_err(|_| format!("bad seed range '{}'", text))?;
        if b < a {
            return Err(format!("empty seed range '{}'", text));
        }
        Ok((a..=b).collect())
    } else {
        text.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| format!("bad seed '{}'", v))
            })
            .collect()
    }
}

fn parse_bool(text: &str, what: &str) -> Result<bool, String> {
    match text.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("{}: '{}' is not a boolean", what, other)),
    }
}

fn apply_mmpp_pairs(mc: &mut MmppConfig, text: &str) -> Result<(), String> {
    for pair in text.split(',') {
        let (key, value) = split_kv(pair.trim())?;
        match key {
            "lambda" => mc.lambda = parse_float(value, "mmpp lambda")?,
            "k" => mc.max_processing = parse_int(value, "mmpp k")?,
            "pon" => mc.p_on_to_off = parse_float(value, "mmpp pon")?,
            "poff" => mc.p_off_to_on = parse_float(value, "mmpp poff")?,
            "queues" => mc.queue_count = Some(parse_int(value, "mmpp queues")? as usize),
            "assignment" => {
                mc.assignment = Some(match value {
                    "byProcessing" => QueueAssignment::ByProcessing,
                    "uniformRandom" => QueueAssignment::UniformRandom,
                    other => return Err(format!("unknown assignment '{}'", other)),
                })
            }
            "size" => mc.size = parse_int(value, "mmpp size")?,
            "value" => mc.value = parse_int(value, "mmpp value")?,
            "slack" => {
                mc.slack = match value {
                    "inf" => None,
                    v => Some(parse_int(v, "mmpp slack")?),
                }
            }
            other => return Err(format!("unknown mmpp parameter '{}'", other)),
        }
    }
    Ok(())
}

pub fn apply_config(spec: &mut ExperimentSpec, text: &str) -> Result<(), String> {
    let mut section = String::new();
    let mut mmpp = match &spec.trace {
        TraceSource::Mmpp(mc) => mc.clone(),
        _ => MmppConfig::with_defaults(),
    };
    let mut mmpp_touched = false;
    let mut trace_file: Option<PathBuf> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = split_kv(line).map_err(|e| format!("line {}: {}", line_no, e))?;
        let (key, value) = (key.trim(), value.trim());
        let fail = |msg: String| format!("line {}: {}", line_no, msg);
        match section.as_str() {
            "experiment" => match key {
                "arch" => spec.arch = parse_arch_source(value),
                "policy" => spec.policy_label = value.to_string(),
                "slots" => spec.slots = parse_int(value, "slots").map_err(fail)?,
                "oracle" => {
                    if parse_bool(value, "oracle").map_err(fail)? {
                        spec.oracle.get_or_insert_with(OracleBounds::default);
                    } else {
                        spec.oracle = None;
                    }
                }
                "oracle-max-packets" => {
                    let n = parse_int(value, "oracle-max-packets").map_err(fail)? as usize;
                    spec.oracle.get_or_insert_with(OracleBounds::default).max_packets = n;
                }
                "out" => spec.out = Some(PathBuf::from(value)),
                "workers" => spec.workers = parse_int(value, "workers").map_err(fail)? as usize,
                "timestamp" => spec.timestamp = parse_bool(value, "timestamp").map_err(fail)?,
                "slack" => {
                    spec.slack_enforced = parse_bool(value, "slack").map_err(fail)?
                }
                "trace" => trace_file = Some(PathBuf::from(value)),
                other => return Err(fail(format!("unknown experiment key '{}'", other))),
            },
            "mmpp" => {
                apply_mmpp_pairs(&mut mmpp, &format!("{}={}", key, value)).map_err(fail)?;
                mmpp_touched = true;
            }
            "consts" => {
                let v = parse_int(value, key).map_err(fail)?;
                spec.consts.insert(key.to_string(), v);
            }
            "sweep" => match key {
                "lambda" => spec.sweep.lambda = parse_float_list(value, "sweep lambda").map_err(fail)?,
                "k" => {
                    spec.sweep.max_processing = parse_int_list(value, "sweep k").map_err(fail)?
                }
                "B" => spec.sweep.capacity = parse_int_list(value, "sweep B").map_err(fail)?,
                "C" => spec.sweep.speedup = parse_int_list(value, "sweep C").map_err(fail)?,
                "seeds" => spec.sweep.seeds = parse_seed_range(value).map_err(fail)?,
                other => return Err(fail(format!("unknown sweep axis '{}'", other))),
            },
            other => {
                return Err(fail(format!(
                    "unknown section '[{}]' (expected experiment, mmpp, consts, sweep)",
                    other
                )))
            }
        }
    }

    match (trace_file, mmpp_touched) {
        (Some(_), true) => {
            return Err("exactly one trace source: both trace file and mmpp configured".into())
        }
        (Some(path), false) => spec.trace = TraceSource::File(path),
        (None, true) => spec.trace = TraceSource::Mmpp(mmpp),
        (None, false) => {}
    }
    Ok(())
}
