//! Static checks: name resolution, attribute/method typing, property
//! writability, arity, membership constraints, and constant boundness.
//!
//! Constant boundness is the one check with two modes. A program may leave
//! capacity constants like `B` or `k` to be supplied at run time, so
//! [`check`] in lenient mode treats free names in expression position as
//! integers, while strict mode (given the externally supplied constants)
//! reports anything still unbound.

use std::collections::BTreeMap;

use super::ast::*;
use crate::diag::Diagnostic;

/// Object kinds plus the two value types expressions work over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Int,
    Bool,
    Packet,
    Queue,
    Port,
    Buffer,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "integer",
            Ty::Bool => "boolean",
            Ty::Packet => "packet",
            Ty::Queue => "queue",
            Ty::Port => "port",
            Ty::Buffer => "buffer",
        }
    }
}

fn attr_ty(obj: Ty, name: &str) -> Option<Ty> {
    let known: &[&str] = match obj {
        Ty::Packet => &["arrival", "size", "value", "processing", "slack", "queue"],
        Ty::Queue => &["currSize", "size", "weightAdm", "weightSched"],
        Ty::Buffer => &["currSize", "size"],
        _ => &[],
    };
    known.contains(&name).then_some(Ty::Int)
}

fn method_ty(obj: Ty, name: &str) -> Option<Ty> {
    match (obj, name) {
        (Ty::Queue, "getHOL") => Some(Ty::Packet),
        (Ty::Port, "getCurrQueue") | (Ty::Port, "getBestQueue") => Some(Ty::Queue),
        (Ty::Buffer, "getCurrQueue") | (Ty::Buffer, "getBestQueue") => Some(Ty::Queue),
        _ => None,
    }
}

/// What a bound property expects on its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PropKind {
    PacketComparator,
    QueueComparator,
    Predicate,
    Action,
    Weight,
}

enum PropInfo {
    Writable(PropKind),
    ReadOnly,
    Unknown,
}

fn property(kind: ObjectKind, name: &str) -> PropInfo {
    use PropInfo::*;
    use PropKind::*;
    match (kind, name) {
        (ObjectKind::Queue, "procPrio") | (ObjectKind::Queue, "admPrio") => {
            Writable(PacketComparator)
        }
        (ObjectKind::Queue, "congestion") => Writable(Predicate),
        (ObjectKind::Queue, "postAdmAct") => Writable(Action),
        (ObjectKind::Queue, "weightAdm") | (ObjectKind::Queue, "weightSched") => Writable(Weight),
        (ObjectKind::Queue, "currSize")
        | (ObjectKind::Queue, "size")
        | (ObjectKind::Queue, "buffer") => ReadOnly,
        (ObjectKind::Port, "schedPrio") => Writable(QueueComparator),
        (ObjectKind::Port, "postSchedAct") => Writable(Action),
        (ObjectKind::Buffer, "congestion") => Writable(Predicate),
        (ObjectKind::Buffer, "queuePrio") => Writable(QueueComparator),
        (ObjectKind::Buffer, "postAdmAct") => Writable(Action),
        (ObjectKind::Buffer, "currSize") | (ObjectKind::Buffer, "size") => ReadOnly,
        _ => Unknown,
    }
}

fn object_ty(kind: ObjectKind) -> Ty {
    match kind {
        ObjectKind::Queue => Ty::Queue,
        ObjectKind::Port => Ty::Port,
        ObjectKind::Buffer => Ty::Buffer,
    }
}

/// Evaluate a constants-only expression (capacities, weight initialisers).
pub fn const_eval(expr: &Expr, consts: &BTreeMap<String, i64>) -> Result<i64, String> {
    let overflow = || "integer overflow in constant expression".to_string();
    match expr {
        Expr::Number(n) => Ok(*n),
        Expr::Name(name) => consts
            .get(name)
            .copied()
            .ok_or_else(|| format!("unbound constant '{}'", name)),
        Expr::Unary(UnaryOp::Neg, inner) => {
            const_eval(inner, consts)?.checked_neg().ok_or_else(overflow)
        }
        Expr::Binary(op, lhs, rhs) => {
            let l = const_eval(lhs, consts)?;
            let r = const_eval(rhs, consts)?;
            match op {
                BinOp::Add => l.checked_add(r).ok_or_else(overflow),
                BinOp::Sub => l.checked_sub(r).ok_or_else(overflow),
                BinOp::Mul => l.checked_mul(r).ok_or_else(overflow),
                BinOp::Div => {
                    if r == 0 {
                        Err("division by zero in constant expression".to_string())
                    } else {
                        Ok(l / r)
                    }
                }
                other => Err(format!(
                    "operator '{}' not allowed in constant expressions",
                    other.symbol()
                )),
            }
        }
        _ => Err("not a constant expression".to_string()),
    }
}

pub enum ConstMode<'a> {
    /// Free names are assumed to be integer constants bound later.
    Lenient,
    /// Free names must resolve against declared plus provided constants.
    Strict(&'a BTreeMap<String, i64>),
}

struct Checker<'a> {
    spec: &'a ArchSpec,
    mode: &'a ConstMode<'a>,
    objects: BTreeMap<String, ObjectKind>,
    diags: Vec<Diagnostic>,
}

pub fn check(spec: &ArchSpec, mode: ConstMode) -> Vec<Diagnostic> {
    let mut objects = BTreeMap::new();
    for decl in &spec.declarations {
        objects.insert(decl.name.clone(), decl.kind);
    }
    let mut checker = Checker {
        spec,
        mode: &mode,
        objects,
        diags: Vec::new(),
    };
    checker.run();
    let mut diags = checker.diags;
    diags.sort_by_key(|d| (d.line, d.col));
    diags
}

impl<'a> Checker<'a> {
    fn run(&mut self) {
        self.check_declarations();
        let bound_defs = self.check_bindings();
        self.check_unused_definitions(&bound_defs);
    }

    fn report(&mut self, line: u32, message: String) {
        self.diags.push(Diagnostic::at_line(line, message));
    }

    // ---- declarations ----

    fn check_declarations(&mut self) {
        let mut port_of: BTreeMap<&str, &str> = BTreeMap::new();
        let mut buffer_of: BTreeMap<&str, &str> = BTreeMap::new();
        for decl in &self.spec.declarations {
            if let Some(capacity) = &decl.capacity {
                self.check_const_expr(capacity, decl.line, &format!("capacity of '{}'", decl.name));
            }
            for member in &decl.members {
                match self.objects.get(member.as_str()) {
                    None => {
                        self.report(decl.line, format!("unresolved name '{}'", member));
                        continue;
                    }
                    Some(ObjectKind::Queue) => {}
                    Some(_) => {
                        self.report(
                            decl.line,
                            format!("'{}' is not a queue and cannot be a member", member),
                        );
                        continue;
                    }
                }
                let table = match decl.kind {
                    ObjectKind::Port => &mut port_of,
                    ObjectKind::Buffer => &mut buffer_of,
                    ObjectKind::Queue => unreachable!("queues have no members"),
                };
                if let Some(first) = table.insert(member, &decl.name) {
                    self.report(
                        decl.line,
                        format!(
                            "queue '{}' is already a member of '{}'",
                            member, first
                        ),
                    );
                }
            }
        }
    }

    fn check_const_expr(&mut self, expr: &Expr, line: u32, what: &str) {
        match self.mode {
            ConstMode::Lenient => {
                let mut scratch = Vec::new();
                if let Some(ty) = self.expr_ty(expr, &mut scratch, false, line, &mut Vec::new()) {
                    if ty != Ty::Int {
                        self.report(line, format!("{} must be an integer expression", what));
                    }
                }
            }
            ConstMode::Strict(provided) => {
                let mut all = self.spec.constants.clone();
                all.extend(provided.iter().map(|(k, v)| (k.clone(), *v)));
                match const_eval(expr, &all) {
                    Ok(v) if what.starts_with("capacity") && v < 1 => {
                        self.report(
                            line,
                            format!("{} evaluates to {}; must be at least 1", what, v),
                        );
                    }
                    Ok(_) => {}
                    Err(msg) => self.report(line, format!("{}: {}", what, msg)),
                }
            }
        }
    }

    // ---- bindings ----

    fn check_bindings(&mut self) -> Vec<String> {
        let mut used = Vec::new();
        for binding in &self.spec.bindings {
            let kind = match self.objects.get(binding.object.as_str()) {
                Some(kind) => *kind,
                None => {
                    self.report(
                        binding.line,
                        format!("unresolved name '{}'", binding.object),
                    );
                    continue;
                }
            };
            let prop_kind = match property(kind, &binding.property) {
                PropInfo::Writable(p) => p,
                PropInfo::ReadOnly => {
                    self.report(
                        binding.line,
                        format!(
                            "read-only property '{}' of {} '{}' cannot be assigned",
                            binding.property,
                            object_ty(kind).name(),
                            binding.object
                        ),
                    );
                    continue;
                }
                PropInfo::Unknown => {
                    self.report(
                        binding.line,
                        format!(
                            "unknown property '{}' on {} '{}'",
                            binding.property,
                            object_ty(kind).name(),
                            binding.object
                        ),
                    );
                    continue;
                }
            };
            if let Some(name) = self.check_binding_value(binding, kind, prop_kind) {
                used.push(name);
            }
        }
        used
    }

    fn check_binding_value(
        &mut self,
        binding: &PropertyBinding,
        obj_kind: ObjectKind,
        prop_kind: PropKind,
    ) -> Option<String> {
        let line = binding.line;
        let owner_ty = object_ty(obj_kind);
        match prop_kind {
            PropKind::PacketComparator | PropKind::QueueComparator => {
                let operand = if prop_kind == PropKind::PacketComparator {
                    Ty::Packet
                } else {
                    Ty::Queue
                };
                match &binding.value {
                    BindingValue::Named(name) => {
                        if let Some(def) = self.spec.comparators.get(name) {
                            self.check_comparator_body(def, operand, line);
                            return Some(name.clone());
                        }
                        self.report(
                            line,
                            format!("'{}' is not a defined comparator", name),
                        );
                    }
                    BindingValue::InlineComparator(def) => {
                        self.check_comparator_body(def, operand, line);
                    }
                    _ => self.report(
                        line,
                        format!(
                            "property '{}' takes a comparator name or an inline \
                             comparator definition",
                            binding.property
                        ),
                    ),
                }
            }
            PropKind::Predicate => match &binding.value {
                BindingValue::Named(name) | BindingValue::NamedCall(name, _) => {
                    if let BindingValue::NamedCall(_, args) = &binding.value {
                        self.check_lambda_args(args, line);
                    }
                    if let Some(def) = self.spec.predicates.get(name) {
                        self.check_predicate_body(def, owner_ty, line);
                        return Some(name.clone());
                    }
                    self.report(line, format!("'{}' is not a defined predicate", name));
                }
                BindingValue::InlineLambda(param, LambdaBody::Expr(body)) => {
                    let def = PredicateDef {
                        param: param.clone(),
                        body: body.clone(),
                    };
                    self.check_predicate_body(&def, owner_ty, line);
                }
                _ => self.report(
                    line,
                    format!(
                        "property '{}' takes a predicate (a boolean lambda)",
                        binding.property
                    ),
                ),
            },
            PropKind::Action => match &binding.value {
                BindingValue::Named(name) | BindingValue::NamedCall(name, _) => {
                    if let BindingValue::NamedCall(_, args) = &binding.value {
                        self.check_lambda_args(args, line);
                    }
                    if let Some(def) = self.spec.actions.get(name) {
                        self.check_action_body(def, owner_ty, line);
                        return Some(name.clone());
                    }
                    self.report(line, format!("'{}' is not a defined action", name));
                }
                BindingValue::InlineLambda(param, LambdaBody::Stmt(body)) => {
                    let def = ActionDef {
                        param: param.clone(),
                        body: body.clone(),
                    };
                    self.check_action_body(&def, owner_ty, line);
                }
                _ => self.report(
                    line,
                    format!("property '{}' takes an action (a lambda with statements)", binding.property),
                ),
            },
            PropKind::Weight => match &binding.value {
                BindingValue::Value(expr) => {
                    self.check_const_expr(expr, line, &format!(
                        "initial value of '{}.{}'",
                        binding.object, binding.property
                    ));
                }
                _ => self.report(
                    line,
                    format!(
                        "property '{}' takes a constant integer expression",
                        binding.property
                    ),
                ),
            },
        }
        None
    }

    /// Arguments in `prop = name(obj)` form: at most one, naming an object.
    fn check_lambda_args(&mut self, args: &[Expr], line: u32) {
        if args.len() > 1 {
            self.report(
                line,
                format!("at most one argument expected, found {}", args.len()),
            );
        }
        for arg in args {
            match arg {
                Expr::Name(n) if self.objects.contains_key(n.as_str()) => {}
                Expr::Name(n) => self.report(line, format!("unresolved name '{}'", n)),
                _ => self.report(line, "argument must name a declared object".to_string()),
            }
        }
    }

    fn check_comparator_body(&mut self, def: &ComparatorDef, operand: Ty, line: u32) {
        let mut locals = vec![
            (def.params[0].clone(), operand),
            (def.params[1].clone(), operand),
        ];
        if let Some(ty) = self.expr_ty(&def.body, &mut locals, false, line, &mut Vec::new()) {
            if ty != Ty::Bool {
                self.report(
                    line,
                    format!("comparator body must be boolean, found {}", ty.name()),
                );
            }
        }
    }

    fn check_predicate_body(&mut self, def: &PredicateDef, owner: Ty, line: u32) {
        let mut locals = vec![(def.param.clone(), owner)];
        if let Some(ty) = self.expr_ty(&def.body, &mut locals, false, line, &mut Vec::new()) {
            if ty != Ty::Bool {
                self.report(
                    line,
                    format!("predicate body must be boolean, found {}", ty.name()),
                );
            }
        }
    }

    fn check_action_body(&mut self, def: &ActionDef, owner: Ty, line: u32) {
        let mut locals = vec![(def.param.clone(), owner)];
        self.stmt_check(&def.body, &mut locals, line);
    }

    fn stmt_check(&mut self, stmt: &ActionStmt, locals: &mut Vec<(String, Ty)>, line: u32) {
        match stmt {
            ActionStmt::Seq(stmts) => {
                for s in stmts {
                    self.stmt_check(s, locals, line);
                }
            }
            ActionStmt::Let { name, value, body } => {
                let ty = self.expr_ty(value, locals, false, line, &mut Vec::new());
                locals.push((name.clone(), ty.unwrap_or(Ty::Int)));
                self.stmt_check(body, locals, line);
                locals.pop();
            }
            ActionStmt::If { cond, then_stmt } => {
                if let Some(ty) = self.expr_ty(cond, locals, false, line, &mut Vec::new()) {
                    if ty != Ty::Bool {
                        self.report(line, "if condition must be boolean".to_string());
                    }
                }
                self.stmt_check(then_stmt, locals, line);
            }
            ActionStmt::Assign {
                target,
                prop,
                op: _,
                value,
            } => {
                let target_ty = self.expr_ty(target, locals, false, line, &mut Vec::new());
                if let Some(ty) = target_ty {
                    if ty != Ty::Queue {
                        self.report(
                            line,
                            format!("assignment target must be a queue, found {}", ty.name()),
                        );
                    } else if prop != "weightAdm" && prop != "weightSched" {
                        let msg = if attr_ty(Ty::Queue, prop).is_some() {
                            format!("read-only property '{}' cannot be assigned", prop)
                        } else {
                            format!("unknown property '{}' in assignment", prop)
                        };
                        self.report(line, msg);
                    }
                }
                if let Some(ty) = self.expr_ty(value, locals, false, line, &mut Vec::new()) {
                    if ty != Ty::Int {
                        self.report(line, "assigned value must be an integer".to_string());
                    }
                }
            }
            ActionStmt::Emit(_) => {}
        }
    }

    /// Definitions never referenced by a binding still get a standalone
    /// check: the parameter kind is inferred by trying each object kind.
    fn check_unused_definitions(&mut self, bound: &[String]) {
        let comparators: Vec<_> = self
            .spec
            .comparators
            .iter()
            .filter(|(name, _)| !bound.contains(name))
            .map(|(n, d)| (n.clone(), d.clone()))
            .collect();
        for (name, def) in comparators {
            let trials = [Ty::Packet, Ty::Queue, Ty::Buffer, Ty::Port];
            let ok = trials.iter().any(|ty| {
                let mut locals = vec![
                    (def.params[0].clone(), *ty),
                    (def.params[1].clone(), *ty),
                ];
                self.expr_ty_silent(&def.body, &mut locals) == Some(Ty::Bool)
            });
            if !ok {
                let before = self.diags.len();
                // surface the concrete reason using the packet trial
                let mut locals = vec![
                    (def.params[0].clone(), Ty::Packet),
                    (def.params[1].clone(), Ty::Packet),
                ];
                self.expr_ty(&def.body, &mut locals, false, 0, &mut Vec::new());
                if self.diags.len() == before {
                    self.report(0, format!("comparator '{}' does not type-check", name));
                }
            }
        }
        let predicates: Vec<_> = self
            .spec
            .predicates
            .iter()
            .filter(|(name, _)| !bound.contains(name))
            .map(|(n, d)| (n.clone(), d.clone()))
            .collect();
        for (name, def) in predicates {
            let trials = [Ty::Queue, Ty::Buffer, Ty::Packet, Ty::Port];
            let ok = trials.iter().any(|ty| {
                let mut locals = vec![(def.param.clone(), *ty)];
                self.expr_ty_silent(&def.body, &mut locals) == Some(Ty::Bool)
            });
            if !ok {
                let before = self.diags.len();
                let mut locals = vec![(def.param.clone(), Ty::Queue)];
                self.expr_ty(&def.body, &mut locals, false, 0, &mut Vec::new());
                if self.diags.len() == before {
                    self.report(0, format!("predicate '{}' does not type-check", name));
                }
            }
        }
        let actions: Vec<_> = self
            .spec
            .actions
            .iter()
            .filter(|(name, _)| !bound.contains(name))
            .map(|(n, d)| (n.clone(), d.clone()))
            .collect();
        for (name, def) in actions {
            let trials = [Ty::Port, Ty::Queue, Ty::Buffer];
            let ok = trials.iter().any(|ty| {
                let mut locals = vec![(def.param.clone(), *ty)];
                let before = self.diags.len();
                self.stmt_check(&def.body, &mut locals, 0);
                let clean = self.diags.len() == before;
                self.diags.truncate(before);
                clean
            });
            if !ok {
                let before = self.diags.len();
                let mut locals = vec![(def.param.clone(), Ty::Port)];
                self.stmt_check(&def.body, &mut locals, 0);
                if self.diags.len() == before {
                    self.report(0, format!("action '{}' does not type-check", name));
                }
            }
        }
    }

    fn expr_ty_silent(&mut self, expr: &Expr, locals: &mut Vec<(String, Ty)>) -> Option<Ty> {
        let before = self.diags.len();
        let ty = self.expr_ty(expr, locals, false, 0, &mut Vec::new());
        let clean = self.diags.len() == before;
        self.diags.truncate(before);
        if clean {
            ty
        } else {
            None
        }
    }

    // ---- expression typing ----

    fn expr_ty(
        &mut self,
        expr: &Expr,
        locals: &mut Vec<(String, Ty)>,
        objects_visible: bool,
        line: u32,
        call_stack: &mut Vec<String>,
    ) -> Option<Ty> {
        match expr {
            Expr::Number(_) => Some(Ty::Int),
            Expr::Name(name) => {
                if let Some((_, ty)) = locals.iter().rev().find(|(n, _)| n == name) {
                    return Some(*ty);
                }
                if self.spec.constants.contains_key(name) {
                    return Some(Ty::Int);
                }
                if objects_visible {
                    if let Some(kind) = self.objects.get(name.as_str()) {
                        return Some(object_ty(*kind));
                    }
                }
                match self.mode {
                    ConstMode::Lenient => Some(Ty::Int),
                    ConstMode::Strict(provided) => {
                        if provided.contains_key(name) {
                            Some(Ty::Int)
                        } else {
                            self.report(line, format!("unbound constant '{}'", name));
                            Some(Ty::Int)
                        }
                    }
                }
            }
            Expr::Attr(obj, attr) => {
                let obj_ty = self.expr_ty(obj, locals, objects_visible, line, call_stack)?;
                match attr_ty(obj_ty, attr) {
                    Some(ty) => Some(ty),
                    None => {
                        self.report(
                            line,
                            format!("unknown attribute '{}' on {}", attr, obj_ty.name()),
                        );
                        None
                    }
                }
            }
            Expr::Method(obj, name) => {
                let obj_ty = self.expr_ty(obj, locals, objects_visible, line, call_stack)?;
                match method_ty(obj_ty, name) {
                    Some(ty) => Some(ty),
                    None => {
                        self.report(
                            line,
                            format!("unknown method '{}()' on {}", name, obj_ty.name()),
                        );
                        None
                    }
                }
            }
            Expr::Call(name, args) => {
                if call_stack.iter().any(|n| n == name) || call_stack.len() > 32 {
                    self.report(line, format!("recursive definition '{}'", name));
                    return None;
                }
                let arg_tys: Vec<Option<Ty>> = args
                    .iter()
                    .map(|a| self.expr_ty(a, locals, objects_visible, line, call_stack))
                    .collect();
                if let Some(def) = self.spec.comparators.get(name).cloned() {
                    if args.len() != 2 {
                        self.report(
                            line,
                            format!(
                                "comparator '{}' takes two arguments, found {}",
                                name,
                                args.len()
                            ),
                        );
                        return Some(Ty::Bool);
                    }
                    if let (Some(a), Some(b)) = (arg_tys[0], arg_tys[1]) {
                        if a != b {
                            self.report(
                                line,
                                format!(
                                    "comparator '{}' applied to mixed kinds {} and {}",
                                    name,
                                    a.name(),
                                    b.name()
                                ),
                            );
                        } else {
                            call_stack.push(name.clone());
                            let mut inner = vec![
                                (def.params[0].clone(), a),
                                (def.params[1].clone(), a),
                            ];
                            self.expr_ty(&def.body, &mut inner, false, line, call_stack);
                            call_stack.pop();
                        }
                    }
                    return Some(Ty::Bool);
                }
                if let Some(def) = self.spec.predicates.get(name).cloned() {
                    if args.len() != 1 {
                        self.report(
                            line,
                            format!(
                                "predicate '{}' takes one argument, found {}",
                                name,
                                args.len()
                            ),
                        );
                        return Some(Ty::Bool);
                    }
                    if let Some(a) = arg_tys[0] {
                        call_stack.push(name.clone());
                        let mut inner = vec![(def.param.clone(), a)];
                        self.expr_ty(&def.body, &mut inner, false, line, call_stack);
                        call_stack.pop();
                    }
                    return Some(Ty::Bool);
                }
                self.report(
                    line,
                    format!("unresolved name '{}' (not a defined comparator or predicate)", name),
                );
                Some(Ty::Bool)
            }
            Expr::Unary(UnaryOp::Neg, inner) => {
                let ty = self.expr_ty(inner, locals, objects_visible, line, call_stack)?;
                if ty != Ty::Int {
                    self.report(line, "negation needs an integer operand".to_string());
                }
                Some(Ty::Int)
            }
            Expr::Unary(UnaryOp::Not, inner) => {
                let ty = self.expr_ty(inner, locals, objects_visible, line, call_stack)?;
                if ty != Ty::Bool {
                    self.report(line, "'not' needs a boolean operand".to_string());
                }
                Some(Ty::Bool)
            }
            Expr::Binary(op, lhs, rhs) => {
                let lt = self.expr_ty(lhs, locals, objects_visible, line, call_stack);
                let rt = self.expr_ty(rhs, locals, objects_visible, line, call_stack);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        for ty in [lt, rt].into_iter().flatten() {
                            if ty != Ty::Int {
                                self.report(
                                    line,
                                    format!(
                                        "arithmetic '{}' needs integer operands, found {}",
                                        op.symbol(),
                                        ty.name()
                                    ),
                                );
                            }
                        }
                        Some(Ty::Int)
                    }
                    BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => {
                        for ty in [lt, rt].into_iter().flatten() {
                            if ty != Ty::Int {
                                self.report(
                                    line,
                                    format!(
                                        "comparison '{}' needs integer operands, found {}",
                                        op.symbol(),
                                        ty.name()
                                    ),
                                );
                            }
                        }
                        Some(Ty::Bool)
                    }
                    BinOp::And | BinOp::Or => {
                        for ty in [lt, rt].into_iter().flatten() {
                            if ty != Ty::Bool {
                                self.report(
                                    line,
                                    format!(
                                        "'{}' needs boolean operands, found {}",
                                        op.symbol(),
                                        ty.name()
                                    ),
                                );
                            }
                        }
                        Some(Ty::Bool)
                    }
                }
            }
            Expr::Let { name, value, body } => {
                let value_ty =
                    self.expr_ty(value, locals, objects_visible, line, call_stack)?;
                locals.push((name.clone(), value_ty));
                let ty = self.expr_ty(body, locals, objects_visible, line, call_stack);
                locals.pop();
                ty
            }
            Expr::If {
                cond,
                then_val,
                else_val,
            } => {
                if let Some(ty) = self.expr_ty(cond, locals, objects_visible, line, call_stack) {
                    if ty != Ty::Bool {
                        self.report(line, "if condition must be boolean".to_string());
                    }
                }
                let tt = self.expr_ty(then_val, locals, objects_visible, line, call_stack)?;
                let et = self.expr_ty(else_val, locals, objects_visible, line, call_stack)?;
                if tt != et {
                    self.report(
                        line,
                        format!(
                            "conditional branches have different kinds: {} and {}",
                            tt.name(),
                            et.name()
                        ),
                    );
                }
                Some(tt)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    fn strict(src: &str, consts: &[(&str, i64)]) -> Vec<Diagnostic> {
        let spec = parse_program(src).unwrap();
        let map: BTreeMap<String, i64> =
            consts.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        check(&spec, ConstMode::Strict(&map))
    }

    #[test]
    fn clean_single_queue_program() {
        let src = "fifo(p1,p2) = (p1.arrival < p2.arrival)\n\
                   defCongestion() = lambda q, (q.currSize >= q.size)\n\
                   q1 = Queue(B)\nout = Port(q1)\n\
                   q1.procPrio = fifo\nq1.congestion = defCongestion(q1)";
        assert_eq!(strict(src, &[("B", 6)]), vec![]);
    }

    #[test]
    fn read_only_property_rejected() {
        let diags = strict("q1 = Queue(4)\nq1.currSize = 5", &[]);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("read-only property"));
    }

    #[test]
    fn undeclared_member_is_unresolved() {
        let diags = strict("q1 = Queue(4)\nout = Port(q1, q2)", &[]);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("unresolved name 'q2'"));
    }

    #[test]
    fn unbound_constant_reported_in_strict_mode() {
        let diags = strict("q1 = Queue(B)", &[]);
        assert!(diags.iter().any(|d| d.message.contains("capacity")));
        assert_eq!(strict("q1 = Queue(B)", &[("B", 4)]), vec![]);
    }

    #[test]
    fn lenient_mode_defers_constants() {
        let spec = parse_program("q1 = Queue(B)").unwrap();
        assert_eq!(check(&spec, ConstMode::Lenient), vec![]);
    }

    #[test]
    fn queue_in_two_ports_rejected() {
        let diags = strict("q1 = Queue(2)\na = Port(q1)\nb = Port(q1)", &[]);
        assert!(diags[0].message.contains("already a member"));
    }

    #[test]
    fn packet_attribute_on_queue_comparator_rejected() {
        let diags = strict(
            "bad(q1,q2) = (q1.arrival < q2.arrival)\n\
             qa = Queue(2)\nqb = Queue(2)\nout = Port(qa, qb)\nout.schedPrio = bad",
            &[],
        );
        assert!(diags
            .iter()
            .any(|d| d.message.contains("unknown attribute 'arrival' on queue")));
    }

    #[test]
    fn inferred_kinds_for_unbound_definitions() {
        // queue comparator via getHOL and buffer-or-queue predicate both pass
        let diags = strict(
            "byValue(q1,q2) = (q1.getHOL().value > q2.getHOL().value)\n\
             full() = lambda q, (q.currSize >= q.size)",
            &[],
        );
        assert_eq!(diags, vec![]);
    }

    #[test]
    fn weight_binding_must_be_constant() {
        let diags = strict("q1 = Queue(2)\nq1.weightSched = q1.currSize", &[]);
        assert!(!diags.is_empty());
    }

    #[test]
    fn action_assignment_targets_checked() {
        let diags = strict(
            "bad() = lambda q, (q.currSize += 1)\nq1 = Queue(2)\nq1.postAdmAct = bad(q1)",
            &[],
        );
        assert!(diags
            .iter()
            .any(|d| d.message.contains("read-only property 'currSize'")));
    }

    #[test]
    fn capacity_must_be_positive_when_known() {
        let diags = strict("q1 = Queue(B/k)", &[("B", 2), ("k", 3)]);
        assert!(diags[0].message.contains("must be at least 1"));
    }

    #[test]
    fn comparator_binding_kind_checked() {
        let diags = strict(
            "defCongestion() = lambda q, (q.currSize >= q.size)\n\
             q1 = Queue(2)\nq1.procPrio = defCongestion",
            &[],
        );
        assert!(diags[0].message.contains("not a defined comparator"));
    }

    #[test]
    fn recursive_definition_rejected() {
        let diags = strict(
            "loop(p1,p2) = (loop(p1,p2))\nq1 = Queue(2)\nq1.procPrio = loop",
            &[],
        );
        assert!(diags.iter().any(|d| d.message.contains("recursive")));
    }

    #[test]
    fn const_eval_reports_overflow_and_bad_forms() {
        let consts: BTreeMap<String, i64> = [("big".to_string(), i64::MAX)].into();
        let spec = parse_program("q1 = Queue(big * 2)").unwrap();
        let capacity = spec.declarations[0].capacity.as_ref().unwrap();
        assert!(const_eval(capacity, &consts)
            .unwrap_err()
            .contains("overflow"));

        let spec = parse_program("q1 = Queue(4 / 0)").unwrap();
        let capacity = spec.declarations[0].capacity.as_ref().unwrap();
        assert!(const_eval(capacity, &BTreeMap::new())
            .unwrap_err()
            .contains("division by zero"));
    }
}
