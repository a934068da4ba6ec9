//! Runtime instances and the operations over them: HOL access, victim
//! selection, virtual admission with push-out, and per-cycle processing.
//!
//! Admission protocol: an arrival is first placed in the target queue's
//! priority views but not counted in `currSize` (virtual admission). While
//! the congestion predicate holds over the committed state, the head of the
//! push-out view — which may be the arrival itself — is evicted. An arrival
//! that survives is then committed. `currSize` therefore always reports
//! committed bytes, including while the congestion predicate runs.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::view::{PriorityView, TieBreak};
use super::{Effect, Packet};
use crate::diag::{Diagnostic, EvalError};
use crate::dsl::ast::{
    ActionDef, ArchSpec, BindingValue, ComparatorDef, LambdaBody, ObjectKind, PredicateDef,
};
use crate::dsl::validate::const_eval;
use crate::eval::{self, ProgramDefs, Value};

#[derive(Debug, Clone)]
pub(crate) struct NamedComparator {
    pub name: String,
    pub def: ComparatorDef,
}

#[derive(Debug, Clone)]
pub(crate) struct NamedPredicate {
    pub name: String,
    pub def: PredicateDef,
    pub subject: Option<Value>,
}

#[derive(Debug, Clone)]
pub(crate) struct NamedAction {
    pub name: String,
    pub def: ActionDef,
    pub subject: Option<Value>,
}

#[derive(Debug)]
pub struct QueueState {
    pub name: String,
    /// Capacity in bytes.
    pub capacity: i64,
    /// Committed bytes.
    pub curr_size: i64,
    pub weight_adm: i64,
    pub weight_sched: i64,
    /// Owning buffer, when the queue shares memory.
    pub buffer: Option<usize>,
    /// Owning port.
    pub port: Option<usize>,
    pub(crate) store: BTreeMap<u64, Packet>,
    pub(crate) proc_view: PriorityView,
    pub(crate) adm_view: PriorityView,
    pub(crate) proc_prio: Option<NamedComparator>,
    pub(crate) adm_prio: Option<NamedComparator>,
    pub(crate) congestion: Option<NamedPredicate>,
    pub(crate) post_adm: Option<NamedAction>,
}

impl QueueState {
    pub fn packet_count(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.store.values()
    }
}

#[derive(Debug)]
pub struct PortState {
    pub name: String,
    pub members: Vec<usize>,
    pub curr_queue: Option<usize>,
    pub(crate) sched_prio: Option<NamedComparator>,
    pub(crate) post_sched: Option<NamedAction>,
}

#[derive(Debug)]
pub struct BufferState {
    pub name: String,
    /// Shared capacity in bytes.
    pub capacity: i64,
    pub members: Vec<usize>,
    pub curr_queue: Option<usize>,
    pub(crate) congestion: Option<NamedPredicate>,
    pub(crate) queue_prio: Option<NamedComparator>,
    pub(crate) post_adm: Option<NamedAction>,
}

/// Result of one admission: whether the arrival survived, which stored
/// packets were pushed out for it, and any action effects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissionOutcome {
    pub admitted: bool,
    pub pushed_out: Vec<Packet>,
    pub effects: Vec<Effect>,
}

#[derive(Debug)]
pub struct World {
    defs: Arc<ProgramDefs>,
    queues: Vec<QueueState>,
    ports: Vec<PortState>,
    buffers: Vec<BufferState>,
}

impl World {
    /// Build runtime state from a validated program. `overrides` supplies or
    /// replaces constants (command-line `--const`); validation runs against
    /// the merged set and any diagnostics abort instantiation.
    pub fn instantiate(
        spec: &ArchSpec,
        overrides: &BTreeMap<String, i64>,
    ) -> Result<World, Vec<Diagnostic>> {
        let diags = spec.validate(overrides);
        if !diags.is_empty() {
            return Err(diags);
        }
        let consts = spec.resolved_constants(overrides);

        let mut queues = Vec::new();
        let mut ports = Vec::new();
        let mut buffers = Vec::new();
        let mut queue_ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut port_ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut buffer_ids: BTreeMap<&str, usize> = BTreeMap::new();

        for decl in &spec.declarations {
            match decl.kind {
                ObjectKind::Queue => {
                    let capacity = const_eval(decl.capacity.as_ref().unwrap(), &consts)
                        .expect("validated capacity evaluates");
                    queue_ids.insert(&decl.name, queues.len());
                    queues.push(QueueState {
                        name: decl.name.clone(),
                        capacity,
                        curr_size: 0,
                        weight_adm: 0,
                        weight_sched: 0,
                        buffer: None,
                        port: None,
                        store: BTreeMap::new(),
                        proc_view: PriorityView::default(),
                        adm_view: PriorityView::default(),
                        proc_prio: None,
                        adm_prio: None,
                        congestion: None,
                        post_adm: None,
                    });
                }
                ObjectKind::Port => {
                    let pid = ports.len();
                    let members: Vec<usize> =
                        decl.members.iter().map(|m| queue_ids[m.as_str()]).collect();
                    for &q in &members {
                        queues[q].port = Some(pid);
                    }
                    port_ids.insert(&decl.name, pid);
                    ports.push(PortState {
                        name: decl.name.clone(),
                        members,
                        curr_queue: None,
                        sched_prio: None,
                        post_sched: None,
                    });
                }
                ObjectKind::Buffer => {
                    let bid = buffers.len();
                    let capacity = const_eval(decl.capacity.as_ref().unwrap(), &consts)
                        .expect("validated capacity evaluates");
                    let members: Vec<usize> =
                        decl.members.iter().map(|m| queue_ids[m.as_str()]).collect();
                    for &q in &members {
                        queues[q].buffer = Some(bid);
                    }
                    buffer_ids.insert(&decl.name, bid);
                    buffers.push(BufferState {
                        name: decl.name.clone(),
                        capacity,
                        members,
                        curr_queue: None,
                        congestion: None,
                        queue_prio: None,
                        post_adm: None,
                    });
                }
            }
        }

        let object_value = |name: &str| -> Option<Value> {
            if let Some(&q) = queue_ids.get(name) {
                return Some(Value::QueueRef(q));
            }
            if let Some(&p) = port_ids.get(name) {
                return Some(Value::PortRef(p));
            }
            buffer_ids.get(name).map(|&b| Value::BufRef(b))
        };

        let comparator_of = |binding: &BindingValue, label: &str| -> Option<NamedComparator> {
            match binding {
                BindingValue::Named(n) => Some(NamedComparator {
                    name: n.clone(),
                    def: spec.comparators[n].clone(),
                }),
                BindingValue::InlineComparator(def) => Some(NamedComparator {
                    name: label.to_string(),
                    def: def.clone(),
                }),
                _ => None,
            }
        };
        let predicate_of = |binding: &BindingValue, label: &str| -> Option<NamedPredicate> {
            match binding {
                BindingValue::Named(n) => Some(NamedPredicate {
                    name: n.clone(),
                    def: spec.predicates[n].clone(),
                    subject: None,
                }),
                BindingValue::NamedCall(n, args) => Some(NamedPredicate {
                    name: n.clone(),
                    def: spec.predicates[n].clone(),
                    subject: args.first().and_then(|a| match a {
                        crate::dsl::ast::Expr::Name(obj) => object_value(obj),
                        _ => None,
                    }),
                }),
                BindingValue::InlineLambda(param, LambdaBody::Expr(body)) => {
                    Some(NamedPredicate {
                        name: label.to_string(),
                        def: PredicateDef {
                            param: param.clone(),
                            body: body.clone(),
                        },
                        subject: None,
                    })
                }
                _ => None,
            }
        };
        let action_of = |binding: &BindingValue, label: &str| -> Option<NamedAction> {
            match binding {
                BindingValue::Named(n) => Some(NamedAction {
                    name: n.clone(),
                    def: spec.actions[n].clone(),
                    subject: None,
                }),
                BindingValue::NamedCall(n, args) => Some(NamedAction {
                    name: n.clone(),
                    def: spec.actions[n].clone(),
                    subject: args.first().and_then(|a| match a {
                        crate::dsl::ast::Expr::Name(obj) => object_value(obj),
                        _ => None,
                    }),
                }),
                BindingValue::InlineLambda(param, LambdaBody::Stmt(body)) => Some(NamedAction {
                    name: label.to_string(),
                    def: ActionDef {
                        param: param.clone(),
                        body: body.clone(),
                    },
                    subject: None,
                }),
                _ => None,
            }
        };

        for binding in &spec.bindings {
            let label = format!("{}.{}", binding.object, binding.property);
            if let Some(&qid) = queue_ids.get(binding.object.as_str()) {
                let q = &mut queues[qid];
                match binding.property.as_str() {
                    "procPrio" => q.proc_prio = comparator_of(&binding.value, &label),
                    "admPrio" => q.adm_prio = comparator_of(&binding.value, &label),
                    "congestion" => q.congestion = predicate_of(&binding.value, &label),
                    "postAdmAct" => q.post_adm = action_of(&binding.value, &label),
                    "weightAdm" | "weightSched" => {
                        if let BindingValue::Value(expr) = &binding.value {
                            let v = const_eval(expr, &consts).expect("validated weight evaluates");
                            if binding.property == "weightAdm" {
                                q.weight_adm = v;
                            } else {
                                q.weight_sched = v;
                            }
                        }
                    }
                    _ => unreachable!("validated property"),
                }
            } else if let Some(&pid) = port_ids.get(binding.object.as_str()) {
                let p = &mut ports[pid];
                match binding.property.as_str() {
                    "schedPrio" => p.sched_prio = comparator_of(&binding.value, &label),
                    "postSchedAct" => p.post_sched = action_of(&binding.value, &label),
                    _ => unreachable!("validated property"),
                }
            } else if let Some(&bid) = buffer_ids.get(binding.object.as_str()) {
                let b = &mut buffers[bid];
                match binding.property.as_str() {
                    "congestion" => b.congestion = predicate_of(&binding.value, &label),
                    "queuePrio" => b.queue_prio = comparator_of(&binding.value, &label),
                    "postAdmAct" => b.post_adm = action_of(&binding.value, &label),
                    _ => unreachable!("validated property"),
                }
            }
        }

        Ok(World {
            defs: Arc::new(ProgramDefs {
                comparators: spec.comparators.clone(),
                predicates: spec.predicates.clone(),
                actions: spec.actions.clone(),
                consts,
            }),
            queues,
            ports,
            buffers,
        })
    }

    // ---- accessors ----

    pub fn defs(&self) -> &ProgramDefs {
        &self.defs
    }

    pub fn queue(&self, qid: usize) -> &QueueState {
        &self.queues[qid]
    }

    pub fn port(&self, pid: usize) -> &PortState {
        &self.ports[pid]
    }

    pub fn buffer(&self, bid: usize) -> &BufferState {
        &self.buffers[bid]
    }

    pub fn queue_count(&self) -> usize {
        self.queues.len()
    }

    pub fn port_count(&self) -> usize {
        self.ports.len()
    }

    pub fn buffer_count(&self) -> usize {
        self.buffers.len()
    }

    pub fn queue_names(&self) -> Vec<String> {
        self.queues.iter().map(|q| q.name.clone()).collect()
    }

    pub fn buffer_occupancy(&self, bid: usize) -> i64 {
        self.buffers[bid]
            .members
            .iter()
            .map(|&q| self.queues[q].curr_size)
            .sum()
    }

    pub(crate) fn weight(&self, qid: usize, prop: super::WeightProp) -> i64 {
        match prop {
            super::WeightProp::Adm => self.queues[qid].weight_adm,
            super::WeightProp::Sched => self.queues[qid].weight_sched,
        }
    }

    pub(crate) fn set_weight(&mut self, qid: usize, prop: super::WeightProp, v: i64) {
        match prop {
            super::WeightProp::Adm => self.queues[qid].weight_adm = v,
            super::WeightProp::Sched => self.queues[qid].weight_sched = v,
        }
    }

    // ---- head-of-line and victim selection ----

    /// The packet the queue would process next. Faults on an empty queue.
    pub fn hol(&self, qid: usize) -> Result<Packet, EvalError> {
        let q = &self.queues[qid];
        match q.proc_view.head() {
            Some(seq) => Ok(q.store[&seq]),
            None => Err(EvalError::new(format!(
                "getHOL() on empty queue '{}'",
                q.name
            ))),
        }
    }

    /// The stored packet dropped first under the push-out priority.
    pub fn select_victim(&self, qid: usize) -> Result<Packet, EvalError> {
        let q = &self.queues[qid];
        match q.adm_view.head() {
            Some(seq) => Ok(q.store[&seq]),
            None => Err(EvalError::new(format!(
                "victim selection on empty queue '{}'",
                q.name
            ))),
        }
    }

    /// Scheduling selector: the head under `schedPrio` restricted to
    /// non-empty member queues; `None` when every member is empty. Without a
    /// bound comparator, members are served in declaration order.
    pub fn best_queue_opt(&self, pid: usize) -> Result<Option<usize>, EvalError> {
        self.best_queue_inner(pid, 0)
    }

    /// As [`World::best_queue_opt`] but faulting when all members are empty,
    /// which is the semantics of `getBestQueue()` in expressions.
    pub fn best_queue(&self, pid: usize) -> Result<usize, EvalError> {
        self.best_queue_guarded(pid, 0)
    }

    pub(crate) fn best_queue_guarded(&self, pid: usize, depth: u32) -> Result<usize, EvalError> {
        self.best_queue_inner(pid, depth)?.ok_or_else(|| {
            EvalError::new(format!(
                "getBestQueue() on port '{}' with all queues empty",
                self.ports[pid].name
            ))
        })
    }

    fn best_queue_inner(&self, pid: usize, depth: u32) -> Result<Option<usize>, EvalError> {
        let port = &self.ports[pid];
        let candidates = port
            .members
            .iter()
            .copied()
            .filter(|&q| !self.queues[q].is_empty());
        self.fold_queue_head(candidates, &port.sched_prio, depth)
    }

    /// Victim-queue selector for shared buffers: the head under `queuePrio`
    /// restricted to non-empty members. The head is the queue dropped from.
    pub fn select_victim_queue(&self, bid: usize) -> Result<usize, EvalError> {
        self.buffer_best_queue_guarded(bid, 0)
    }

    pub(crate) fn buffer_best_queue_guarded(
        &self,
        bid: usize,
        depth: u32,
    ) -> Result<usize, EvalError> {
        let buffer = &self.buffers[bid];
        let candidates = buffer
            .members
            .iter()
            .copied()
            .filter(|&q| !self.queues[q].is_empty());
        self.fold_queue_head(candidates, &buffer.queue_prio, depth)?
            .ok_or_else(|| {
                EvalError::new(format!(
                    "queue selection on buffer '{}' with all queues empty",
                    buffer.name
                ))
            })
    }

    /// Fold members in declaration order, keeping the earlier queue on ties,
    /// replacing only when the candidate strictly precedes the current best.
    fn fold_queue_head(
        &self,
        candidates: impl Iterator<Item = usize>,
        cmp: &Option<NamedComparator>,
        depth: u32,
    ) -> Result<Option<usize>, EvalError> {
        let mut best: Option<usize> = None;
        for q in candidates {
            match best {
                None => best = Some(q),
                Some(b) => {
                    if let Some(nc) = cmp {
                        let qb = eval::queue_comparator(self, &nc.def, q, b, depth + 1)
                            .map_err(|e| e.in_def(&nc.name))?;
                        let bq = eval::queue_comparator(self, &nc.def, b, q, depth + 1)
                            .map_err(|e| e.in_def(&nc.name))?;
                        if qb && !bq {
                            best = Some(q);
                        }
                    }
                    // no comparator: declaration order wins
                }
            }
        }
        Ok(best)
    }

    // ---- congestion ----

    fn queue_congested(&self, qid: usize) -> Result<bool, EvalError> {
        let q = &self.queues[qid];
        match &q.congestion {
            Some(p) => {
                let subject = p.subject.unwrap_or(Value::QueueRef(qid));
                eval::predicate(self, &p.def, subject).map_err(|e| e.in_def(&p.name))
            }
            None => Ok(q.curr_size >= q.capacity),
        }
    }

    fn buffer_congested(&self, bid: usize) -> Result<bool, EvalError> {
        let b = &self.buffers[bid];
        match &b.congestion {
            Some(p) => {
                let subject = p.subject.unwrap_or(Value::BufRef(bid));
                eval::predicate(self, &p.def, subject).map_err(|e| e.in_def(&p.name))
            }
            None => Ok(self.buffer_occupancy(bid) >= b.capacity),
        }
    }

    // ---- view maintenance ----

    /// Insert `p` into both views; `p` may be absent from the store (the
    /// virtual phase of admission) or already stored (re-keying).
    fn insert_views(&mut self, qid: usize, p: &Packet) -> Result<(), EvalError> {
        let defs = Arc::clone(&self.defs);
        let q = &mut self.queues[qid];
        let store = &q.store;
        let extra = *p;
        let resolve = move |s: u64| {
            if s == extra.seq {
                store.get(&s).copied().unwrap_or(extra)
            } else {
                store[&s]
            }
        };

        match &q.proc_prio {
            Some(nc) => {
                let cmp = |a: &Packet, b: &Packet| {
                    eval::packet_comparator(&defs, &nc.def, a, b).map_err(|e| e.in_def(&nc.name))
                };
                q.proc_view
                    .insert(p.seq, &resolve, &cmp, TieBreak::SmallerSeqFirst)?;
            }
            None => {
                let cmp = |a: &Packet, b: &Packet| Ok(a.arrival < b.arrival);
                q.proc_view
                    .insert(p.seq, &resolve, &cmp, TieBreak::SmallerSeqFirst)?;
            }
        }
        match &q.adm_prio {
            Some(nc) => {
                let cmp = |a: &Packet, b: &Packet| {
                    eval::packet_comparator(&defs, &nc.def, a, b).map_err(|e| e.in_def(&nc.name))
                };
                q.adm_view
                    .insert(p.seq, &resolve, &cmp, TieBreak::LargerSeqFirst)?;
            }
            None => {
                // default push-out priority: the latest arrival goes first
                let cmp = |a: &Packet, b: &Packet| Ok(a.arrival > b.arrival);
                q.adm_view
                    .insert(p.seq, &resolve, &cmp, TieBreak::LargerSeqFirst)?;
            }
        }
        Ok(())
    }

    fn remove_from_views(&mut self, qid: usize, seq: u64) {
        let q = &mut self.queues[qid];
        q.proc_view.remove(seq);
        q.adm_view.remove(seq);
    }

    /// Remove a committed packet entirely. No consistency check here: this
    /// runs inside admission while an arrival is still virtual.
    pub(crate) fn remove_stored(&mut self, qid: usize, seq: u64) -> Packet {
        self.remove_from_views(qid, seq);
        let q = &mut self.queues[qid];
        let p = q.store.remove(&seq).expect("packet is stored");
        q.curr_size -= p.size;
        p
    }

    fn commit(&mut self, qid: usize, p: Packet) {
        let q = &mut self.queues[qid];
        q.curr_size += p.size;
        q.store.insert(p.seq, p);
        self.debug_check(qid);
    }

    // ---- admission ----

    /// Admit an arrival into its destination queue, dispatching to the
    /// shared-buffer protocol when the queue belongs to a buffer.
    pub fn admit(&mut self, p: Packet) -> Result<AdmissionOutcome, EvalError> {
        if p.queue >= self.queues.len() {
            return Err(EvalError::new(format!(
                "packet {} targets unknown queue index {}",
                p.seq, p.queue
            )));
        }
        match self.queues[p.queue].buffer {
            Some(bid) => self.admit_to_buffer(bid, p),
            None => self.admit_to_queue(p.queue, p),
        }
    }

    /// Queue-level admission: virtual insert, evict push-out heads while the
    /// queue is congested, commit the survivor, then run `postAdmAct`.
    /// Queues owned by a buffer go through [`World::admit_to_buffer`].
    pub fn admit_to_queue(&mut self, qid: usize, p: Packet) -> Result<AdmissionOutcome, EvalError> {
        debug_assert_eq!(p.queue, qid);
        debug_assert!(self.queues[qid].buffer.is_none());
        self.insert_views(qid, &p)?;
        let mut pushed_out = Vec::new();
        loop {
            if !self.queue_congested(qid)? {
                break;
            }
            let victim = self.queues[qid]
                .adm_view
                .head()
                .expect("views hold at least the arrival");
            if victim == p.seq {
                self.remove_from_views(qid, p.seq);
                self.debug_check(qid);
                return Ok(AdmissionOutcome {
                    admitted: false,
                    pushed_out,
                    effects: Vec::new(),
                });
            }
            pushed_out.push(self.remove_stored(qid, victim));
        }
        self.commit(qid, p);
        let effects = self.run_queue_post_adm(qid)?;
        Ok(AdmissionOutcome {
            admitted: true,
            pushed_out,
            effects,
        })
    }

    /// Shared-buffer admission: buffer congestion is resolved first by
    /// dropping from the victim queue under `queuePrio`, then the target
    /// queue's own congestion the usual way.
    pub fn admit_to_buffer(
        &mut self,
        bid: usize,
        p: Packet,
    ) -> Result<AdmissionOutcome, EvalError> {
        let target = p.queue;
        debug_assert_eq!(self.queues[target].buffer, Some(bid));
        self.insert_views(target, &p)?;
        let mut pushed_out = Vec::new();
        let mut admitted = true;

        loop {
            if !self.buffer_congested(bid)? {
                break;
            }
            // Victim queue over committed occupancy; when nothing is
            // committed anywhere the arrival itself is all that can go.
            let victim_queue = {
                let buffer = &self.buffers[bid];
                let candidates = buffer
                    .members
                    .iter()
                    .copied()
                    .filter(|&q| !self.queues[q].is_empty());
                match self.fold_queue_head(candidates, &buffer.queue_prio, 0)? {
                    Some(q) => q,
                    None => target,
                }
            };
            let victim = if victim_queue == target {
                self.queues[target]
                    .adm_view
                    .head()
                    .expect("target views hold at least the arrival")
            } else {
                self.queues[victim_queue]
                    .adm_view
                    .head()
                    .expect("victim queue is non-empty")
            };
            if victim_queue == target && victim == p.seq {
                self.remove_from_views(target, p.seq);
                admitted = false;
                break;
            }
            pushed_out.push(self.remove_stored(victim_queue, victim));
        }

        if admitted {
            loop {
                if !self.queue_congested(target)? {
                    break;
                }
                let victim = self.queues[target]
                    .adm_view
                    .head()
                    .expect("views hold at least the arrival");
                if victim == p.seq {
                    self.remove_from_views(target, p.seq);
                    admitted = false;
                    break;
                }
                pushed_out.push(self.remove_stored(target, victim));
            }
        }

        if admitted {
            self.commit(target, p);
        }
        self.buffers[bid].curr_queue = Some(target);
        let effects = if admitted {
            self.run_buffer_post_adm(bid)?
        } else {
            Vec::new()
        };
        self.debug_check(target);
        Ok(AdmissionOutcome {
            admitted,
            pushed_out,
            effects,
        })
    }

    // ---- processing ----

    /// One processing cycle on the queue's HOL packet: decrement, re-key in
    /// both views, and report completion without removing the packet yet.
    /// Post-scheduling actions observe the completed packet at processing 0;
    /// callers finish with [`World::finish_hol_cycle`].
    pub fn begin_hol_cycle(&mut self, qid: usize) -> Result<(u64, bool), EvalError> {
        let seq = self.queues[qid].proc_view.head().ok_or_else(|| {
            EvalError::new(format!(
                "processing cycle on empty queue '{}'",
                self.queues[qid].name
            ))
        })?;
        self.remove_from_views(qid, seq);
        let q = &mut self.queues[qid];
        let packet = q.store.get_mut(&seq).expect("HOL packet is stored");
        packet.processing -= 1;
        let completed = packet.processing == 0;
        let copy = *packet;
        self.insert_views(qid, &copy)?;
        Ok((seq, completed))
    }

    /// Remove a completed packet and return it as transmitted.
    pub fn finish_hol_cycle(&mut self, qid: usize, seq: u64) -> Packet {
        let p = self.remove_stored(qid, seq);
        self.debug_check(qid);
        p
    }

    /// Decrement the HOL packet's remaining processing; on completion the
    /// packet is removed and returned.
    pub fn remove_hol_cycle(&mut self, qid: usize) -> Result<Option<Packet>, EvalError> {
        let (seq, completed) = self.begin_hol_cycle(qid)?;
        Ok(if completed {
            Some(self.finish_hol_cycle(qid, seq))
        } else {
            None
        })
    }

    pub fn set_curr_queue(&mut self, pid: usize, qid: Option<usize>) {
        self.ports[pid].curr_queue = qid;
    }

    // ---- actions ----

    fn run_queue_post_adm(&mut self, qid: usize) -> Result<Vec<Effect>, EvalError> {
        match self.queues[qid].post_adm.clone() {
            Some(act) => {
                let subject = act.subject.unwrap_or(Value::QueueRef(qid));
                eval::action(self, &act.def, subject).map_err(|e| e.in_def(&act.name))
            }
            None => Ok(Vec::new()),
        }
    }

    fn run_buffer_post_adm(&mut self, bid: usize) -> Result<Vec<Effect>, EvalError> {
        match self.buffers[bid].post_adm.clone() {
            Some(act) => {
                let subject = act.subject.unwrap_or(Value::BufRef(bid));
                eval::action(self, &act.def, subject).map_err(|e| e.in_def(&act.name))
            }
            None => Ok(Vec::new()),
        }
    }

    /// Run the port's post-scheduling action, if bound.
    pub fn run_post_sched(&mut self, pid: usize) -> Result<Vec<Effect>, EvalError> {
        match self.ports[pid].post_sched.clone() {
            Some(act) => {
                let subject = act.subject.unwrap_or(Value::PortRef(pid));
                eval::action(self, &act.def, subject).map_err(|e| e.in_def(&act.name))
            }
            None => Ok(Vec::new()),
        }
    }

    // ---- integrity ----

    /// Single-store and view-permutation invariants; panics on violation.
    pub fn assert_consistent(&self) {
        for (qid, q) in self.queues.iter().enumerate() {
            let stored: Vec<u64> = q.store.keys().copied().collect();
            assert_eq!(
                q.proc_view.len(),
                stored.len(),
                "queue {} proc view size mismatch",
                qid
            );
            assert_eq!(
                q.adm_view.len(),
                stored.len(),
                "queue {} adm view size mismatch",
                qid
            );
            for seq in &stored {
                assert!(q.proc_view.contains(*seq), "proc view missing {}", seq);
                assert!(q.adm_view.contains(*seq), "adm view missing {}", seq);
            }
            let bytes: i64 = q.store.values().map(|p| p.size).sum();
            assert_eq!(q.curr_size, bytes, "queue {} size accounting", qid);
            for p in q.store.values() {
                assert!(p.processing >= 1, "stored packet with no work left");
            }
        }
    }

    #[inline]
    fn debug_check(&self, _qid: usize) {
        #[cfg(debug_assertions)]
        self.assert_consistent();
    }
}
