//! Per-run counters and their flat CSV row / event-log renderings.

use crate::arch::Packet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueueLengthStats {
    pub name: String,
    pub(crate) sum: i64,
    pub max: i64,
    pub(crate) samples: i64,
}

impl QueueLengthStats {
    pub fn mean(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.sum as f64 / self.samples as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Mark,
    Notify,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Mark => "MARK",
            SignalKind::Notify => "NOTIFY",
        }
    }
}

/// One MARK/NOTIFY raised by an action, with where and when.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalEvent {
    pub slot: i64,
    pub object: String,
    pub signal: SignalKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub seed: u64,
    pub slots: i64,
    pub speedup: i64,
    /// Packets offered to admission (arrival slot within the run).
    pub arrivals: u64,
    pub transmitted_count: u64,
    pub transmitted_value: i64,
    pub drops_pushout: u64,
    pub drops_self_rejected: u64,
    pub drops_slack_expired: u64,
    /// Packets still stored when the run ended.
    pub stored_at_end: u64,
    pub per_queue: Vec<QueueLengthStats>,
    pub events: Vec<SignalEvent>,
    pub(crate) latency_sum: i64,
    pub(crate) total_len_sum: i64,
    pub(crate) total_len_samples: i64,
    pub(crate) single_queue_len_max: i64,
}

impl Metrics {
    pub(crate) fn new(seed: u64, slots: i64, speedup: i64, queue_names: Vec<String>) -> Metrics {
        Metrics {
            seed,
            slots,
            speedup,
            arrivals: 0,
            transmitted_count: 0,
            transmitted_value: 0,
            drops_pushout: 0,
            drops_self_rejected: 0,
            drops_slack_expired: 0,
            stored_at_end: 0,
            per_queue: queue_names
                .into_iter()
                .map(|name| QueueLengthStats {
                    name,
                    sum: 0,
                    max: 0,
                    samples: 0,
                })
                .collect(),
            events: Vec::new(),
            latency_sum: 0,
            total_len_sum: 0,
            total_len_samples: 0,
            single_queue_len_max: 0,
        }
    }

    pub(crate) fn record_transmit(&mut self, p: &Packet, slot: i64) {
        self.transmitted_count += 1;
        self.transmitted_value += p.value;
        // a packet admitted and finished in its arrival slot spent one slot
        self.latency_sum += (slot + 1) - p.arrival;
    }

    pub(crate) fn sample_queue_lengths(&mut self, lengths: &[i64]) {
        let mut total = 0;
        for (stats, len) in self.per_queue.iter_mut().zip(lengths) {
            stats.sum += len;
            stats.samples += 1;
            stats.max = stats.max.max(*len);
            total += len;
            self.single_queue_len_max = self.single_queue_len_max.max(*len);
        }
        self.total_len_sum += total;
        self.total_len_samples += 1;
    }

    /// Mean over slots of total buffered bytes across all queues.
    pub fn mean_queue_length(&self) -> f64 {
        if self.total_len_samples == 0 {
            0.0
        } else {
            self.total_len_sum as f64 / self.total_len_samples as f64
        }
    }

    /// Largest single-queue occupancy observed at any slot end.
    pub fn max_queue_length(&self) -> i64 {
        self.single_queue_len_max
    }

    /// Mean slots-in-system of transmitted packets.
    pub fn mean_latency(&self) -> f64 {
        if self.transmitted_count == 0 {
            0.0
        } else {
            self.latency_sum as f64 / self.transmitted_count as f64
        }
    }

    pub fn total_drops(&self) -> u64 {
        self.drops_pushout + self.drops_self_rejected + self.drops_slack_expired
    }

    /// Arrivals are either transmitted, dropped, or still stored.
    pub fn conservation_holds(&self) -> bool {
        self.arrivals == self.transmitted_count + self.total_drops() + self.stored_at_end
    }

    pub fn csv_header() -> &'static str {
        "seed,slots,C,policy,transmitted,value,drops.pushout,drops.self,drops.slack,\
         meanQlen,maxQlen,meanLatency"
    }

    pub fn csv_row(&self, policy: &str) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{},{:.6}",
            self.seed,
            self.slots,
            self.speedup,
            policy,
            self.transmitted_count,
            self.transmitted_value,
            self.drops_pushout,
            self.drops_self_rejected,
            self.drops_slack_expired,
            self.mean_queue_length(),
            self.max_queue_length(),
            self.mean_latency(),
        )
    }

    /// One JSON object per line, in slot order.
    pub fn render_event_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&format!(
                "{{\"slot\":{},\"object\":\"{}\",\"event\":\"{}\"}}\n",
                e.slot,
                e.object,
                e.signal.name()
            ));
        }
        out
    }
}
