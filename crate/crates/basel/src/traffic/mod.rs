//! Trace generation and the trace file format.
//!
//! Traffic is an ON-OFF modulated Poisson process: each slot the modulating
//! state evolves by its transition probabilities, then an ON slot draws a
//! Poisson number of arrivals and an OFF slot none. Each arrival draws its
//! processing requirement uniformly from `1..=k` and a destination queue
//! either by processing class or uniformly.
//!
//! Trace files are CSV with header `arrival,size,value,processing,slack,queue`
//! (`slack` may be omitted, and accepts `inf`), `#` comment lines, and an
//! optional metadata comment that lets a generated trace round-trip exactly.

pub mod rng;

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::arch::Packet;
use rng::{poisson, stream};

#[derive(Debug)]
pub enum TraceError {
    InvalidParams(String),
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::InvalidParams(msg) => write!(f, "invalid parameters: {}", msg),
            TraceError::Io(e) => write!(f, "i/o error: {}", e),
            TraceError::Parse { line, message } => write!(f, "line {}: {}", line, message),
        }
    }
}

impl std::error::Error for TraceError {}

impl From<io::Error> for TraceError {
    fn from(e: io::Error) -> Self {
        TraceError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueAssignment {
    /// Processing requirement `i` goes to queue `i - 1`; requires exactly
    /// `k` queues. The natural fit for per-class multi-queue architectures.
    ByProcessing,
    UniformRandom,
}

impl QueueAssignment {
    fn keyword(self) -> &'static str {
        match self {
            QueueAssignment::ByProcessing => "byProcessing",
            QueueAssignment::UniformRandom => "uniformRandom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmppParams {
    /// Mean arrivals per slot while ON.
    pub lambda: f64,
    pub p_on_to_off: f64,
    pub p_off_to_on: f64,
    /// Maximum processing requirement k; draws are uniform on 1..=k.
    pub max_processing: i64,
    pub queue_count: usize,
    pub assignment: QueueAssignment,
    pub size: i64,
    pub value: i64,
    pub slack: Option<i64>,
}

impl Default for MmppParams {
    fn default() -> Self {
        MmppParams {
            lambda: 0.5,
            p_on_to_off: 0.1,
            p_off_to_on: 0.1,
            max_processing: 1,
            queue_count: 1,
            assignment: QueueAssignment::ByProcessing,
            size: 1,
            value: 1,
            slack: None,
        }
    }
}

impl MmppParams {
    fn validate(&self) -> Result<(), TraceError> {
        let fail = |msg: String| Err(TraceError::InvalidParams(msg));
        if !(self.lambda > 0.0 && self.lambda <= 100.0) {
            return fail(format!("lambda must be in (0, 100], got {}", self.lambda));
        }
        for (name, p) in [("pon", self.p_on_to_off), ("poff", self.p_off_to_on)] {
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("{} must be in (0, 1], got {}", name, p));
            }
        }
        if self.max_processing < 1 {
            return fail(format!("k must be at least 1, got {}", self.max_processing));
        }
        if self.queue_count < 1 {
            return fail("queue count must be at least 1".to_string());
        }
        if self.assignment == QueueAssignment::ByProcessing
            && self.queue_count as i64 != self.max_processing
        {
            return fail(format!(
                "byProcessing assignment needs one queue per processing class: k = {} but {} queues",
                self.max_processing, self.queue_count
            ));
        }
        if self.size < 1 {
            return fail("packet size must be at least 1 byte".to_string());
        }
        if self.value < 0 {
            return fail("packet value must be non-negative".to_string());
        }
        if let Some(s) = self.slack {
            if s < 0 {
                return fail("slack must be non-negative".to_string());
            }
        }
        Ok(())
    }
}

/// Generator parameters and seed carried alongside a generated trace so that
/// a saved file reproduces itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetadata {
    pub seed: u64,
    pub slots: i64,
    pub params: MmppParams,
}

/// A replayable arrival sequence: seq strictly increasing, arrivals
/// non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub packets: Vec<Packet>,
    pub metadata: Option<TraceMetadata>,
}

impl Trace {
    /// Wrap externally built packets, enforcing trace invariants.
    pub fn new(packets: Vec<Packet>) -> Result<Trace, TraceError> {
        for (i, p) in packets.iter().enumerate() {
            validate_packet(p, i + 1)?;
            if i > 0 {
                let prev = &packets[i - 1];
                if p.seq <= prev.seq {
                    return Err(TraceError::Parse {
                        line: i + 1,
                        message: "sequence numbers must be strictly increasing".to_string(),
                    });
                }
                if p.arrival < prev.arrival {
                    return Err(TraceError::Parse {
                        line: i + 1,
                        message: "arrival slots must be non-decreasing".to_string(),
                    });
                }
            }
        }
        Ok(Trace {
            packets,
            metadata: None,
        })
    }

    /// Unit-size unit-value packets from (arrival, processing, queue)
    /// triples; a convenience for hand-built instances.
    pub fn from_unit_arrivals(
        arrivals: impl IntoIterator<Item = (i64, i64, usize)>,
    ) -> Result<Trace, TraceError> {
        let packets = arrivals
            .into_iter()
            .enumerate()
            .map(|(seq, (arrival, processing, queue))| {
                Packet::unit(seq as u64, arrival, processing, queue)
            })
            .collect();
        Trace::new(packets)
    }

    /// Generate a seeded trace. Identical `(params, seed, slots)` always
    /// produce the identical trace.
    pub fn generate(params: &MmppParams, seed: u64, slots: i64) -> Result<Trace, TraceError> {
        params.validate()?;
        if slots < 0 {
            return Err(TraceError::InvalidParams("slots must be non-negative".into()));
        }
        let mut state_stream = stream(seed, 1);
        let mut count_stream = stream(seed, 2);
        let mut proc_stream = stream(seed, 3);
        let mut queue_stream = stream(seed, 4);

        let mut packets = Vec::new();
        let mut on = true;
        let mut seq: u64 = 0;
        for slot in 0..slots {
            let u = state_stream.next_f64();
            on = if on {
                u >= params.p_on_to_off
            } else {
                u < params.p_off_to_on
            };
            let arrivals = if on {
                poisson(params.lambda, count_stream.next_f64())
            } else {
                0
            };
            for _ in 0..arrivals {
                let processing = 1 + proc_stream.below(params.max_processing as u64) as i64;
                let queue = match params.assignment {
                    QueueAssignment::ByProcessing => (processing - 1) as usize,
                    QueueAssignment::UniformRandom => {
                        queue_stream.below(params.queue_count as u64) as usize
                    }
                };
                packets.push(Packet {
                    seq,
                    size: params.size,
                    value: params.value,
                    processing,
                    arrival: slot,
                    slack: params.slack,
                    queue,
                });
                seq += 1;
            }
        }
        Ok(Trace {
            packets,
            metadata: Some(TraceMetadata {
                seed,
                slots,
                params: params.clone(),
            }),
        })
    }

    pub fn total_value(&self) -> i64 {
        self.packets.iter().map(|p| p.value).sum()
    }

    // ---- file format ----

    pub fn save(&self, mut w: impl Write) -> io::Result<()> {
        if let Some(meta) = &self.metadata {
            let p = &meta.params;
            writeln!(
                w,
                "# generator=mmpp seed={} slots={} lambda={} pon={} poff={} k={} queues={} \
                 assignment={} size={} value={} slack={}",
                meta.seed,
                meta.slots,
                p.lambda,
                p.p_on_to_off,
                p.p_off_to_on,
                p.max_processing,
                p.queue_count,
                p.assignment.keyword(),
                p.size,
                p.value,
                slack_text(p.slack),
            )?;
        }
        writeln!(w, "arrival,size,value,processing,slack,queue")?;
        for p in &self.packets {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.arrival,
                p.size,
                p.value,
                p.processing,
                slack_text(p.slack),
                p.queue
            )?;
        }
        Ok(())
    }

    pub fn save_path(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.save(&mut w)?;
        w.flush()
    }

    pub fn load(r: impl BufRead) -> Result<Trace, TraceError> {
        let mut packets: Vec<Packet> = Vec::new();
        let mut metadata = None;
        let mut columns: Option<Columns> = None;
        let mut seq: u64 = 0;
        for (idx, line) in r.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            if let Some(comment) = text.strip_prefix('#') {
                if metadata.is_none() {
                    metadata = parse_metadata(comment.trim());
                }
                continue;
            }
            if columns.is_none() {
                columns = Some(Columns::from_header(text, line_no)?);
                continue;
            }
            let cols = columns.as_ref().unwrap();
            let packet = cols.parse_row(text, line_no, seq)?;
            if let Some(prev) = packets.last() {
                if packet.arrival < prev.arrival {
                    return Err(TraceError::Parse {
                        line: line_no,
                        message: format!(
                            "arrival {} is before previous arrival {}",
                            packet.arrival, prev.arrival
                        ),
                    });
                }
            }
            packets.push(packet);
            seq += 1;
        }
        if columns.is_none() && !packets.is_empty() {
            unreachable!("rows only parse after a header");
        }
        Ok(Trace { packets, metadata })
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Trace, TraceError> {
        Trace::load(BufReader::new(File::open(path)?))
    }
}

fn slack_text(slack: Option<i64>) -> String {
    match slack {
        Some(s) => s.to_string(),
        None => "inf".to_string(),
    }
}

fn validate_packet(p: &Packet, line: usize) -> Result<(), TraceError> {
    let fail = |message: String| Err(TraceError::Parse { line, message });
    if p.size < 1 {
        return fail(format!("size must be at least 1, got {}", p.size));
    }
    if p.processing < 1 {
        return fail(format!(
            "processing must be at least 1, got {}",
            p.processing
        ));
    }
    if p.arrival < 0 {
        return fail(format!("arrival must be non-negative, got {}", p.arrival));
    }
    if p.value < 0 {
        return fail(format!("value must be non-negative, got {}", p.value));
    }
    if let Some(s) = p.slack {
        if s < 0 {
            return fail(format!("slack must be non-negative, got {}", s));
        }
    }
    Ok(())
}

struct Columns {
    arrival: usize,
    size: usize,
    value: usize,
    processing: usize,
    slack: Option<usize>,
    queue: usize,
    count: usize,
}

impl Columns {
    fn from_header(text: &str, line: usize) -> Result<Columns, TraceError> {
        let names: Vec<&str> = text.split(',').map(str::trim).collect();
        let find = |name: &str| names.iter().position(|n| *n == name);
        let required = |name: &str| {
            find(name).ok_or_else(|| TraceError::Parse {
                line,
                message: format!("header is missing the '{}' column", name),
            })
        };
        Ok(Columns {
            arrival: required("arrival")?,
            size: required("size")?,
            value: required("value")?,
            processing: required("processing")?,
            slack: find("slack"),
            queue: required("queue")?,
            count: names.len(),
        })
    }

    fn parse_row(&self, text: &str, line: usize, seq: u64) -> Result<Packet, TraceError> {
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != self.count {
            return Err(TraceError::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    self.count,
                    fields.len()
                ),
            });
        }
        let int = |idx: usize, what: &str| -> Result<i64, TraceError> {
            fields[idx].parse().map_err(|_| TraceError::Parse {
                line,
                message: format!("invalid {} '{}'", what, fields[idx]),
            })
        };
        let slack = match self.slack {
            None => None,
            Some(idx) => {
                if fields[idx] == "inf" {
                    None
                } else {
                    Some(int(idx, "slack")?)
                }
            }
        };
        let packet = Packet {
            seq,
            arrival: int(self.arrival, "arrival")?,
            size: int(self.size, "size")?,
            value: int(self.value, "value")?,
            processing: int(self.processing, "processing")?,
            slack,
            queue: int(self.queue, "queue")? as usize,
        };
        validate_packet(&packet, line)?;
        Ok(packet)
    }
}

fn parse_metadata(comment: &str) -> Option<TraceMetadata> {
    let mut pairs = std::collections::BTreeMap::new();
    for part in comment.split_whitespace() {
        let (k, v) = part.split_once('=')?;
        pairs.insert(k, v);
    }
    if pairs.get("generator") != Some(&"mmpp") {
        return None;
    }
    let params = MmppParams {
        lambda: pairs.get("lambda")?.parse().ok()?,
        p_on_to_off: pairs.get("pon")?.parse().ok()?,
        p_off_to_on: pairs.get("poff")?.parse().ok()?,
        max_processing: pairs.get("k")?.parse().ok()?,
        queue_count: pairs.get("queues")?.parse().ok()?,
        assignment: match *pairs.get("assignment")? {
            "byProcessing" => QueueAssignment::ByProcessing,
            "uniformRandom" => QueueAssignment::UniformRandom,
            _ => return None,
        },
        size: pairs.get("size")?.parse().ok()?,
        value: pairs.get("value")?.parse().ok()?,
        slack: match *pairs.get("slack")? {
            "inf" => None,
            s => Some(s.parse().ok()?),
        },
    };
    Some(TraceMetadata {
        seed: pairs.get("seed")?.parse().ok()?,
        slots: pairs.get("slots")?.parse().ok()?,
        params,
    })
}
