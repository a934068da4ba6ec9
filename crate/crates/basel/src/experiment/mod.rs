//! Batch experiment runner: sweep parameters over an architecture, run the
//! simulator (and optionally the offline-optimal oracle) per point, and emit
//! reproducible CSV tables plus per-axis aggregates.
//!
//! Sweep points are independent: each materializes its own constants, trace
//! and simulator run, so results for a tuple do not depend on what else is
//! in the sweep. Rows are written in sweep order regardless of how many
//! worker threads computed them; with `timestamp` off, reruns are
//! byte-identical.

pub mod config;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::dsl::{builtins, ArchSpec};
use crate::engine::{self, Metrics, SimConfig};
use crate::oracle::{self, OracleBounds, OracleShape, RatioReport};
use crate::traffic::{MmppParams, QueueAssignment, Trace};

#[derive(Debug, Clone, PartialEq)]
pub enum ArchSource {
    File(PathBuf),
    Inline(String),
    /// Per-class queues `q1..qk = Queue(B/k)` under one port, with the named
    /// scheduling policy. Materialized per sweep point since `k` varies.
    MultiQueueTemplate { sched: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    File(PathBuf),
    Mmpp(MmppConfig),
}

/// Generator settings before per-point resolution. Queue count and
/// assignment normally follow the architecture (one target queue per
/// processing class when there are several queues).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MmppConfig {
    pub lambda: f64,
    pub p_on_to_off: f64,
    pub p_off_to_on: f64,
    pub max_processing: i64,
    pub queue_count: Option<usize>,
    pub assignment: Option<QueueAssignment>,
    pub size: i64,
    pub value: i64,
    pub slack: Option<i64>,
}

impl MmppConfig {
    pub fn with_defaults() -> MmppConfig {
        let d = MmppParams::default();
        MmppConfig {
            lambda: d.lambda,
            p_on_to_off: d.p_on_to_off,
            p_off_to_on: d.p_off_to_on,
            max_processing: d.max_processing,
            queue_count: None,
            assignment: None,
            size: d.size,
            value: d.value,
            slack: d.slack,
        }
    }
}

/// Axes to sweep; an empty axis means "not swept, use the base value".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sweep {
    pub lambda: Vec<f64>,
    pub max_processing: Vec<i64>,
    pub capacity: Vec<i64>,
    pub speedup: Vec<i64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub arch: ArchSource,
    pub policy_label: String,
    pub trace: TraceSource,
    pub slots: i64,
    pub sweep: Sweep,
    pub consts: BTreeMap<String, i64>,
    /// `Some` enables the exhaustive oracle with these bounds.
    pub oracle: Option<OracleBounds>,
    pub out: Option<PathBuf>,
    pub timestamp: bool,
    pub workers: usize,
    pub slack_enforced: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            arch: ArchSource::Inline(String::new()),
            policy_label: "policy".to_string(),
            trace: TraceSource::Mmpp(MmppConfig::with_defaults()),
            slots: 1000,
            sweep: Sweep::default(),
            consts: BTreeMap::new(),
            oracle: None,
            out: None,
            timestamp: true,
            workers: 1,
            slack_enforced: true,
        }
    }
}

/// One sweep point: the axis values applied on top of the base config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub lambda: Option<f64>,
    pub max_processing: Option<i64>,
    pub capacity: Option<i64>,
    pub speedup: i64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowData {
    pub metrics: Metrics,
    pub ratio: Option<RatioReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub point: SweepPoint,
    pub outcome: Result<RowData, String>,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub rows: Vec<RunRow>,
    /// Main result table, including the header (and timestamp line when on).
    pub table: String,
    /// `(axis name, csv)` per swept axis, when the oracle produced ratios.
    pub aggregates: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.outcome.is_err())
    }
}

#[derive(Debug)]
pub enum ExperimentError {
    /// Bad experiment configuration or an architecture that fails to parse:
    /// nothing ran.
    Invalid(String),
    Io(std::io::Error),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Invalid(msg) => write!(f, "{}", msg),
            ExperimentError::Io(e) => write!(f, "i/o error: {}", e),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e)
    }
}

pub const RESULT_HEADER: &str = "lambda,k,B,C,seed,slots,policy,transmitted,value,\
    drops.pushout,drops.self,drops.slack,meanQlen,maxQlen,meanLatency,\
    optValue,algValue,ratio,error";

/// Run the full sweep. The cross-product size is reported through the
/// returned rows; callers wanting a preflight count can use
/// [`sweep_points`].
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, ExperimentError> {
    if spec.workers == 0 {
        return Err(ExperimentError::Invalid("workers must be at least 1".into()));
    }
    // trace-source / sweep-axis compatibility
    if matches!(spec.trace, TraceSource::File(_))
        && (!spec.sweep.lambda.is_empty() || !spec.sweep.max_processing.is_empty())
    {
        return Err(ExperimentError::Invalid(
            "lambda/k sweeps need generated traffic, not a trace file".into(),
        ));
    }
    // surface unparseable architectures before any point runs; templates
    // materialize with a placeholder k just for this syntax check
    let preflight = materialize_arch(&spec.arch, 2).map_err(ExperimentError::Invalid)?;
    ArchSpec::parse(&preflight).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        ExperimentError::Invalid(format!("architecture: {}", lines.join("; ")))
    })?;
    let file_trace = match &spec.trace {
        TraceSource::File(path) => Some(
            Trace::load_path(path)
                .map_err(|e| ExperimentError::Invalid(format!("trace file: {}", e)))?,
        ),
        TraceSource::Mmpp(_) => None,
    };

    let points = sweep_points(spec);
    let results: Mutex<Vec<Option<RunRow>>> = Mutex::new(vec![None; points.len()]);
    let next: AtomicUsize = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..spec.workers.min(points.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= points.len() {
                    break;
                }
                let row = run_point(spec, &points[idx], file_trace.as_ref());
                results.lock().unwrap()[idx] = Some(row);
            });
        }
    });
    let rows: Vec<RunRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every point ran"))
        .collect();

    let mut table = String::new();
    if spec.timestamp {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        table.push_str(&format!("# generated at unix {}\n", now));
    }
    table.push_str(RESULT_HEADER);
    table.push('\n');
    for row in &rows {
        table.push_str(&render_row(spec, row));
        table.push('\n');
    }

    let aggregates = build_aggregates(spec, &rows);
    Ok(ExperimentOutput {
        rows,
        table,
        aggregates,
    })
}

/// The cross product of all sweep axes, base values filling unswept axes.
pub fn sweep_points(spec: &ExperimentSpec) -> Vec<SweepPoint> {
    let lambdas: Vec<Option<f64>> = if spec.sweep.lambda.is_empty() {
        vec![None]
    } else {
        spec.sweep.lambda.iter().map(|&l| Some(l)).collect()
    };
    let ks: Vec<Option<i64>> = if spec.sweep.max_processing.is_empty() {
        vec![None]
    } else {
        spec.sweep.max_processing.iter().map(|&k| Some(k)).collect()
    };
    let bs: Vec<Option<i64>> = if spec.sweep.capacity.is_empty() {
        vec![None]
    } else {
        spec.sweep.capacity.iter().map(|&b| Some(b)).collect()
    };
    let cs: Vec<i64> = if spec.sweep.speedup.is_empty() {
        vec![1]
    } else {
        spec.sweep.speedup.clone()
    };
    let seeds: Vec<u64> = if spec.sweep.seeds.is_empty() {
        vec![0]
    } else {
        spec.sweep.seeds.clone()
    };

    let mut points = Vec::new();
    for &lambda in &lambdas {
        for &k in &ks {
            for &b in &bs {
                for &c in &cs {
                    for &seed in &seeds {
                        points.push(SweepPoint {
                            lambda,
                            max_processing: k,
                            capacity: b,
                            speedup: c,
                            seed,
                        });
                    }
                }
            }
        }
    }
    points
}

fn run_point(spec: &ExperimentSpec, point: &SweepPoint, file_trace: Option<&Trace>) -> RunRow {
    let outcome = run_point_inner(spec, point, file_trace);
    RunRow {
        point: point.clone(),
        outcome,
    }
}

fn run_point_inner(
    spec: &ExperimentSpec,
    point: &SweepPoint,
    file_trace: Option<&Trace>,
) -> Result<RowData, String> {
    // constants for this point: base consts overlaid with swept B and k
    let mut consts = spec.consts.clone();
    if let Some(b) = point.capacity {
        consts.insert("B".to_string(), b);
    }
    if let Some(k) = point.max_processing {
        consts.insert("k".to_string(), k);
    }

    let template_k = consts.get("k").copied();
    let arch_src = materialize_arch(&spec.arch, template_k.unwrap_or(0))?;
    let arch = ArchSpec::parse(&arch_src).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        format!("architecture: {}", lines.join("; "))
    })?;
    let queue_count = arch
        .declarations
        .iter()
        .filter(|d| d.kind == crate::dsl::ast::ObjectKind::Queue)
        .count();

    let trace_storage;
    let trace: &Trace = match (&spec.trace, file_trace) {
        (TraceSource::File(_), Some(t)) => t,
        (TraceSource::Mmpp(mc), _) => {
            let params = resolve_mmpp(mc, point, queue_count);
            trace_storage =
                Trace::generate(&params, point.seed, spec.slots).map_err(|e| e.to_string())?;
            &trace_storage
        }
        (TraceSource::File(_), None) => unreachable!("file trace loaded upfront"),
    };

    let cfg = SimConfig {
        slots: spec.slots,
        speedup: point.speedup,
        constants: consts.clone(),
        seed: point.seed,
        slack_enforced: spec.slack_enforced,
    };
    let metrics = engine::run(&arch, trace, &cfg).map_err(|e| e.to_string())?;

    let ratio = match &spec.oracle {
        Some(bounds) => {
            let shape = OracleShape::from_spec(&arch, &consts).map_err(|e| e.to_string())?;
            let opt = oracle::brute_force_opt(&shape, trace, spec.slots, bounds)
                .map_err(|e| e.to_string())?;
            Some(oracle::competitive_ratio(opt, metrics.transmitted_value))
        }
        None => None,
    };

    Ok(RowData { metrics, ratio })
}

fn resolve_mmpp(mc: &MmppConfig, point: &SweepPoint, queue_count: usize) -> MmppParams {
    let max_processing = point.max_processing.unwrap_or(mc.max_processing);
    let queues = mc.queue_count.unwrap_or(queue_count.max(1));
    let assignment = mc.assignment.unwrap_or(if queues > 1 {
        QueueAssignment::ByProcessing
    } else {
        QueueAssignment::UniformRandom
    });
    MmppParams {
        lambda: point.lambda.unwrap_or(mc.lambda),
        p_on_to_off: mc.p_on_to_off,
        p_off_to_on: mc.p_off_to_on,
        max_processing,
        queue_count: queues,
        assignment,
        size: mc.size,
        value: mc.value,
        slack: mc.slack,
    }
}

fn materialize_arch(arch: &ArchSource, k: i64) -> Result<String, String> {
    match arch {
        ArchSource::Inline(src) => Ok(src.clone()),
        ArchSource::File(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("architecture file {}: {}", path.display(), e)),
        ArchSource::MultiQueueTemplate { sched } => multi_queue_source(sched, k),
    }
}

/// Materialize the per-class multi-queue architecture for a concrete `k`:
/// `q1..qk = Queue(B/k)` under one port with the requested scheduling
/// policy. Round-robin policies also get their weight ladder and
/// post-scheduling action.
pub fn multi_queue_source(sched: &str, k: i64) -> Result<String, String> {
    if k < 1 {
        return Err(format!(
            "multiqueue template needs k >= 1 (swept or via --const k=...), got {}",
            k
        ));
    }
    let comparator = builtins::find(sched)
        .filter(|b| b.kind == builtins::BuiltinKind::Comparator)
        .ok_or_else(|| format!("unknown scheduling policy '{}' for multiqueue template", sched))?;
    let mut src = String::new();
    src.push_str(comparator.source);
    src.push('\n');
    let action = match sched {
        "crr" => Some(builtins::find("crrPostSchedAct").unwrap()),
        "prr" => Some(builtins::find("prrPostSchedAct").unwrap()),
        _ => None,
    };
    if let Some(a) = action {
        src.push_str(a.source);
        src.push('\n');
    }
    for i in 1..=k {
        src.push_str(&format!("q{} = Queue(B/k)\n", i));
    }
    let members: Vec<String> = (1..=k).map(|i| format!("q{}", i)).collect();
    src.push_str(&format!("out = Port({})\n", members.join(", ")));
    src.push_str(&format!("out.schedPrio = {}\n", sched));
    if let Some(a) = action {
        src.push_str(&format!("out.postSchedAct = {}(out)\n", a.name));
    }
    if matches!(sched, "minqf" | "maxqf" | "crr" | "prr") {
        for i in 1..=k {
            src.push_str(&format!("q{}.weightSched = {}\n", i, i));
        }
    }
    Ok(src)
}

fn opt_text<T: fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

fn render_row(spec: &ExperimentSpec, row: &RunRow) -> String {
    let p = &row.point;
    let prefix = format!(
        "{},{},{},{},{},{}",
        opt_text(&p.lambda),
        opt_text(&p.max_processing),
        opt_text(&p.capacity),
        p.speedup,
        p.seed,
        spec.slots
    );
    match &row.outcome {
        Ok(data) => {
            let m = &data.metrics;
            let ratio_fields = match &data.ratio {
                Some(r) => r.csv_fields(),
                None => ",,".to_string(),
            };
            format!(
                "{},{},{},{},{},{},{},{:.6},{},{:.6},{},",
                prefix,
                spec.policy_label,
                m.transmitted_count,
                m.transmitted_value,
                m.drops_pushout,
                m.drops_self_rejected,
                m.drops_slack_expired,
                m.mean_queue_length(),
                m.max_queue_length(),
                m.mean_latency(),
                ratio_fields
            )
        }
        Err(msg) => format!(
            "{},{},,,,,,,,,,,,{}",
            prefix,
            spec.policy_label,
            msg.replace(',', ";")
        ),
    }
}

/// Per-axis mean and max ratio, ascending by axis value — the plottable
/// trend tables. Only swept axes with oracle ratios produce output.
fn build_aggregates(spec: &ExperimentSpec, rows: &[RunRow]) -> Vec<(String, String)> {
    if spec.oracle.is_none() {
        return Vec::new();
    }
    let mut out = Vec::new();
    type AxisValue = Box<dyn Fn(&SweepPoint) -> Option<String>>;
    let axes: [(&str, AxisValue); 4] = [
        ("lambda", Box::new(|p| p.lambda.map(|v| v.to_string()))),
        ("k", Box::new(|p| p.max_processing.map(|v| v.to_string()))),
        ("B", Box::new(|p| p.capacity.map(|v| v.to_string()))),
        ("C", Box::new(|p| Some(p.speedup.to_string()))),
    ];
    let swept = [
        spec.sweep.lambda.len() > 1,
        spec.sweep.max_processing.len() > 1,
        spec.sweep.capacity.len() > 1,
        spec.sweep.speedup.len() > 1,
    ];
    for ((axis, extract), is_swept) in axes.iter().zip(swept) {
        if !is_swept {
            continue;
        }
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for row in rows {
            if let (Some(key), Ok(data)) = (extract(&row.point), &row.outcome) {
                if let Some(r) = &data.ratio {
                    groups.entry(key).or_default().push(r.ratio);
                }
            }
        }
        if groups.is_empty() {
            continue;
        }
        let mut csv = format!("{},meanRatio,maxRatio\n", axis);
        let mut keys: Vec<(f64, String)> = groups
            .keys()
            .map(|k| (k.parse::<f64>().unwrap_or(f64::MAX), k.clone()))
            .collect();
        keys.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (_, key) in keys {
            let ratios = &groups[&key];
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
            csv.push_str(&format!("{},{:.6},{:.6}\n", key, mean, max));
        }
        out.push((axis.to_string(), csv));
    }
    out
}

/// The builtin catalog as `--list-builtins` prints it: one definitional
/// source line per entry.
pub fn builtin_catalog() -> String {
    let mut out = String::new();
    for b in builtins::BUILTINS {
        out.push_str(b.source);
        out.push('\n');
    }
    out
}
