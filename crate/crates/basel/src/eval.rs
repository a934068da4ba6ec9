//! Expression and action evaluation over a running [`World`].
//!
//! Comparators over packets are pure: they see only the two packets and the
//! program constants, which is what lets priority views evaluate them during
//! ordered insertion without touching live queue state. Comparators over
//! queues, congestion predicates and actions read (and for actions, write)
//! the world.
//!
//! All numbers are 64-bit signed integers. Division is integer division and
//! faults on zero; arithmetic overflow faults rather than wrapping.

use std::collections::BTreeMap;

use crate::arch::{Effect, Packet, WeightProp, World};
use crate::diag::EvalError;
use crate::dsl::ast::{
    ActionDef, ActionStmt, AssignOp, BinOp, ComparatorDef, Expr, PredicateDef, Signal, UnaryOp,
};

/// The immutable program context shared by every evaluation in a run:
/// definition tables for comparator/predicate calls plus resolved constants.
#[derive(Debug, Default)]
pub struct ProgramDefs {
    pub comparators: BTreeMap<String, ComparatorDef>,
    pub predicates: BTreeMap<String, PredicateDef>,
    pub actions: BTreeMap<String, ActionDef>,
    pub consts: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Pkt(Packet),
    QueueRef(usize),
    PortRef(usize),
    BufRef(usize),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Pkt(_) => "packet",
            Value::QueueRef(_) => "queue",
            Value::PortRef(_) => "port",
            Value::BufRef(_) => "buffer",
        }
    }

    fn as_int(&self) -> Result<i64, EvalError> {
        match self {
            Value::Int(n) => Ok(*n),
            other => Err(EvalError::new(format!("expected integer, found {}", other.kind()))),
        }
    }

    fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::new(format!("expected boolean, found {}", other.kind()))),
        }
    }
}

const MAX_DEPTH: u32 = 64;

struct Scope<'a> {
    defs: &'a ProgramDefs,
    /// `None` for pure packet comparators: any attempt to read live object
    /// state faults instead of observing stale data.
    world: Option<&'a World>,
    locals: Vec<(String, Value)>,
}

impl<'a> Scope<'a> {
    fn lookup(&self, name: &str) -> Result<Value, EvalError> {
        if let Some((_, v)) = self.locals.iter().rev().find(|(n, _)| n == name) {
            return Ok(*v);
        }
        if let Some(c) = self.defs.consts.get(name) {
            return Ok(Value::Int(*c));
        }
        Err(EvalError::new(format!("unresolved name '{}'", name)))
    }

    fn world(&self) -> Result<&'a World, EvalError> {
        self.world
            .ok_or_else(|| EvalError::new("object state is not accessible in a packet comparator"))
    }
}

fn eval(scope: &mut Scope, expr: &Expr, depth: u32) -> Result<Value, EvalError> {
    if depth > MAX_DEPTH {
        return Err(EvalError::new("evaluation depth limit exceeded"));
    }
    match expr {
        Expr::Number(n) => Ok(Value::Int(*n)),
        Expr::Name(name) => scope.lookup(name),
        Expr::Attr(obj, attr) => {
            let obj = eval(scope, obj, depth + 1)?;
            attr_read(scope, obj, attr)
        }
        Expr::Method(obj, name) => {
            let obj = eval(scope, obj, depth + 1)?;
            method_call(scope, obj, name, depth)
        }
        Expr::Call(name, args) => {
            let mut values = Vec::with_capacity(args.len());
            for a in args {
                values.push(eval(scope, a, depth + 1)?);
            }
            if let Some(def) = scope.defs.comparators.get(name) {
                if values.len() != 2 {
                    return Err(EvalError::new(format!(
                        "comparator '{}' takes two arguments",
                        name
                    )));
                }
                let mut inner = Scope {
                    defs: scope.defs,
                    world: scope.world,
                    locals: vec![
                        (def.params[0].clone(), values[0]),
                        (def.params[1].clone(), values[1]),
                    ],
                };
                return eval(&mut inner, &def.body, depth + 1).map_err(|e| e.in_def(name));
            }
            if let Some(def) = scope.defs.predicates.get(name) {
                if values.len() != 1 {
                    return Err(EvalError::new(format!(
                        "predicate '{}' takes one argument",
                        name
                    )));
                }
                let mut inner = Scope {
                    defs: scope.defs,
                    world: scope.world,
                    locals: vec![(def.param.clone(), values[0])],
                };
                return eval(&mut inner, &def.body, depth + 1).map_err(|e| e.in_def(name));
            }
            Err(EvalError::new(format!("unresolved call '{}'", name)))
        }
        Expr::Unary(UnaryOp::Neg, inner) => {
            let v = eval(scope, inner, depth + 1)?.as_int()?;
            v.checked_neg()
                .map(Value::Int)
                .ok_or_else(|| EvalError::new("integer overflow"))
        }
        Expr::Unary(UnaryOp::Not, inner) => {
            let v = eval(scope, inner, depth + 1)?.as_bool()?;
            Ok(Value::Bool(!v))
        }
        Expr::Binary(op, lhs, rhs) => match op {
            BinOp::And => {
                // short-circuit, so a guarded right side is never evaluated
                if !eval(scope, lhs, depth + 1)?.as_bool()? {
                    return Ok(Value::Bool(false));
                }
                Ok(Value::Bool(eval(scope, rhs, depth + 1)?.as_bool()?))
            }
            BinOp::Or => {
                if eval(scope, lhs, depth + 1)?.as_bool()? {
                    return Ok(Value::Bool(true));
                }
                Ok(Value::Bool(eval(scope, rhs, depth + 1)?.as_bool()?))
            }
            _ => {
                let l = eval(scope, lhs, depth + 1)?.as_int()?;
                let r = eval(scope, rhs, depth + 1)?.as_int()?;
                match op {
                    BinOp::Add => l
                        .checked_add(r)
                        .map(Value::Int)
                        .ok_or_else(|| EvalError::new("integer overflow")),
                    BinOp::Sub => l
                        .checked_sub(r)
                        .map(Value::Int)
                        .ok_or_else(|| EvalError::new("integer overflow")),
                    BinOp::Mul => l
                        .checked_mul(r)
                        .map(Value::Int)
                        .ok_or_else(|| EvalError::new("integer overflow")),
                    BinOp::Div => {
                        if r == 0 {
                            Err(EvalError::new("division by zero"))
                        } else {
                            Ok(Value::Int(l / r))
                        }
                    }
                    BinOp::Lt => Ok(Value::Bool(l < r)),
                    BinOp::Gt => Ok(Value::Bool(l > r)),
                    BinOp::Le => Ok(Value::Bool(l <= r)),
                    BinOp::Ge => Ok(Value::Bool(l >= r)),
                    BinOp::Eq => Ok(Value::Bool(l == r)),
                    BinOp::Ne => Ok(Value::Bool(l != r)),
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        },
        Expr::Let { name, value, body } => {
            let v = eval(scope, value, depth + 1)?;
            scope.locals.push((name.clone(), v));
            let result = eval(scope, body, depth + 1);
            scope.locals.pop();
            result
        }
        Expr::If {
            cond,
            then_val,
            else_val,
        } => {
            if eval(scope, cond, depth + 1)?.as_bool()? {
                eval(scope, then_val, depth + 1)
            } else {
                eval(scope, else_val, depth + 1)
            }
        }
    }
}

fn attr_read(scope: &Scope, obj: Value, attr: &str) -> Result<Value, EvalError> {
    match obj {
        Value::Pkt(p) => {
            let v = match attr {
                "arrival" => p.arrival,
                "size" => p.size,
                "value" => p.value,
                "processing" => p.processing,
                "slack" => p.slack_value(),
                "queue" => p.queue as i64,
                other => {
                    return Err(EvalError::new(format!(
                        "unknown attribute '{}' on packet",
                        other
                    )))
                }
            };
            Ok(Value::Int(v))
        }
        Value::QueueRef(qid) => {
            let q = scope.world()?.queue(qid);
            let v = match attr {
                "currSize" => q.curr_size,
                "size" => q.capacity,
                "weightAdm" => q.weight_adm,
                "weightSched" => q.weight_sched,
                other => {
                    return Err(EvalError::new(format!(
                        "unknown attribute '{}' on queue",
                        other
                    )))
                }
            };
            Ok(Value::Int(v))
        }
        Value::BufRef(bid) => {
            let world = scope.world()?;
            let v = match attr {
                "currSize" => world.buffer_occupancy(bid),
                "size" => world.buffer(bid).capacity,
                other => {
                    return Err(EvalError::new(format!(
                        "unknown attribute '{}' on buffer",
                        other
                    )))
                }
            };
            Ok(Value::Int(v))
        }
        other => Err(EvalError::new(format!(
            "attribute '{}' not available on {}",
            attr,
            other.kind()
        ))),
    }
}

fn method_call(scope: &Scope, obj: Value, name: &str, depth: u32) -> Result<Value, EvalError> {
    let world = scope.world()?;
    match (obj, name) {
        (Value::QueueRef(qid), "getHOL") => Ok(Value::Pkt(world.hol(qid)?)),
        (Value::PortRef(pid), "getCurrQueue") => match world.port(pid).curr_queue {
            Some(q) => Ok(Value::QueueRef(q)),
            None => Err(EvalError::new(format!(
                "getCurrQueue() on port '{}' with no scheduled queue this cycle",
                world.port(pid).name
            ))),
        },
        (Value::PortRef(pid), "getBestQueue") => {
            Ok(Value::QueueRef(world.best_queue_guarded(pid, depth)?))
        }
        (Value::BufRef(bid), "getCurrQueue") => match world.buffer(bid).curr_queue {
            Some(q) => Ok(Value::QueueRef(q)),
            None => Err(EvalError::new(format!(
                "getCurrQueue() on buffer '{}' before any admission",
                world.buffer(bid).name
            ))),
        },
        (Value::BufRef(bid), "getBestQueue") => {
            Ok(Value::QueueRef(world.buffer_best_queue_guarded(bid, depth)?))
        }
        (other, name) => Err(EvalError::new(format!(
            "unknown method '{}()' on {}",
            name,
            other.kind()
        ))),
    }
}

/// Evaluate a packet comparator: pure over the two packets and constants.
pub fn packet_comparator(
    defs: &ProgramDefs,
    def: &ComparatorDef,
    a: &Packet,
    b: &Packet,
) -> Result<bool, EvalError> {
    let mut scope = Scope {
        defs,
        world: None,
        locals: vec![
            (def.params[0].clone(), Value::Pkt(*a)),
            (def.params[1].clone(), Value::Pkt(*b)),
        ],
    };
    eval(&mut scope, &def.body, 0)?.as_bool()
}

/// Evaluate a queue comparator against live state, e.g. for scheduling.
pub fn queue_comparator(
    world: &World,
    def: &ComparatorDef,
    qa: usize,
    qb: usize,
    depth: u32,
) -> Result<bool, EvalError> {
    let mut scope = Scope {
        defs: world.defs(),
        world: Some(world),
        locals: vec![
            (def.params[0].clone(), Value::QueueRef(qa)),
            (def.params[1].clone(), Value::QueueRef(qb)),
        ],
    };
    eval(&mut scope, &def.body, depth)?.as_bool()
}

/// Evaluate a predicate with its lambda parameter bound to `subject`.
pub fn predicate(world: &World, def: &PredicateDef, subject: Value) -> Result<bool, EvalError> {
    let mut scope = Scope {
        defs: world.defs(),
        world: Some(world),
        locals: vec![(def.param.clone(), subject)],
    };
    eval(&mut scope, &def.body, 0)?.as_bool()
}

/// Run an action, applying weight updates in statement order and returning
/// the effects for logging.
pub fn action(
    world: &mut World,
    def: &ActionDef,
    subject: Value,
) -> Result<Vec<Effect>, EvalError> {
    let mut effects = Vec::new();
    let mut locals = vec![(def.param.clone(), subject)];
    exec(world, &mut locals, &def.body, &mut effects, 0)?;
    Ok(effects)
}

fn exec(
    world: &mut World,
    locals: &mut Vec<(String, Value)>,
    stmt: &ActionStmt,
    effects: &mut Vec<Effect>,
    depth: u32,
) -> Result<(), EvalError> {
    if depth > MAX_DEPTH {
        return Err(EvalError::new("evaluation depth limit exceeded"));
    }
    match stmt {
        ActionStmt::Seq(stmts) => {
            for s in stmts {
                exec(world, locals, s, effects, depth + 1)?;
            }
            Ok(())
        }
        ActionStmt::Let { name, value, body } => {
            let v = {
                let mut scope = Scope {
                    defs: world.defs(),
                    world: Some(world),
                    locals: std::mem::take(locals),
                };
                let v = eval(&mut scope, value, depth + 1);
                *locals = scope.locals;
                v?
            };
            locals.push((name.clone(), v));
            let result = exec(world, locals, body, effects, depth + 1);
            locals.pop();
            result
        }
        ActionStmt::If { cond, then_stmt } => {
            let c = {
                let mut scope = Scope {
                    defs: world.defs(),
                    world: Some(world),
                    locals: std::mem::take(locals),
                };
                let c = eval(&mut scope, cond, depth + 1).and_then(|v| v.as_bool());
                *locals = scope.locals;
                c?
            };
            if c {
                exec(world, locals, then_stmt, effects, depth + 1)?;
            }
            Ok(())
        }
        ActionStmt::Assign {
            target,
            prop,
            op,
            value,
        } => {
            let (target_v, value_v) = {
                let mut scope = Scope {
                    defs: world.defs(),
                    world: Some(world),
                    locals: std::mem::take(locals),
                };
                let t = eval(&mut scope, target, depth + 1);
                let v = eval(&mut scope, value, depth + 1);
                *locals = scope.locals;
                (t?, v?)
            };
            let qid = match target_v {
                Value::QueueRef(q) => q,
                other => {
                    return Err(EvalError::new(format!(
                        "assignment target must be a queue, found {}",
                        other.kind()
                    )))
                }
            };
            let v = value_v.as_int()?;
            let weight_prop = match prop.as_str() {
                "weightAdm" => WeightProp::Adm,
                "weightSched" => WeightProp::Sched,
                other => {
                    return Err(EvalError::new(format!(
                        "property '{}' cannot be assigned",
                        other
                    )))
                }
            };
            let old = world.weight(qid, weight_prop);
            let new = match op {
                AssignOp::Set => v,
                AssignOp::Add => old
                    .checked_add(v)
                    .ok_or_else(|| EvalError::new("integer overflow"))?,
            };
            world.set_weight(qid, weight_prop, new);
            effects.push(Effect::Weight {
                queue: qid,
                prop: weight_prop,
                delta: new - old,
            });
            Ok(())
        }
        ActionStmt::Emit(Signal::Mark) => {
            effects.push(Effect::Mark);
            Ok(())
        }
        ActionStmt::Emit(Signal::Notify) => {
            effects.push(Effect::Notify);
            Ok(())
        }
        ActionStmt::Emit(Signal::None) => Ok(()),
    }
}
