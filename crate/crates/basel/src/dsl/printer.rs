//! Canonical source form: one statement per line, definitions grouped before
//! declarations and bindings. Parsing the printed form yields a structurally
//! identical [`ArchSpec`].

use super::ast::*;

/// Operator precedence for minimal re-parenthesisation.
fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge | BinOp::Eq | BinOp::Ne => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div => 6,
    }
}

pub fn print_spec(spec: &ArchSpec) -> String {
    let mut out = String::new();
    for (name, value) in &spec.constants {
        out.push_str(&format!("const {} = {}\n", name, value));
    }
    for (name, def) in &spec.comparators {
        out.push_str(&format!(
            "{}({},{}) = ({})\n",
            name,
            def.params[0],
            def.params[1],
            print_expr(&def.body, 0)
        ));
    }
    for (name, def) in &spec.predicates {
        out.push_str(&format!(
            "{}() = lambda {}, ({})\n",
            name,
            def.param,
            print_expr(&def.body, 0)
        ));
    }
    for (name, def) in &spec.actions {
        out.push_str(&format!(
            "{}() = lambda {}, ({})\n",
            name,
            def.param,
            print_stmt(&def.body)
        ));
    }
    for decl in &spec.declarations {
        match decl.kind {
            ObjectKind::Queue => out.push_str(&format!(
                "{} = Queue({})\n",
                decl.name,
                print_expr(decl.capacity.as_ref().unwrap(), 0)
            )),
            ObjectKind::Port => out.push_str(&format!(
                "{} = Port({})\n",
                decl.name,
                decl.members.join(", ")
            )),
            ObjectKind::Buffer => out.push_str(&format!(
                "{} = Buffer({}, {})\n",
                decl.name,
                print_expr(decl.capacity.as_ref().unwrap(), 0),
                decl.members.join(", ")
            )),
        }
    }
    for binding in &spec.bindings {
        let rhs = match &binding.value {
            BindingValue::Named(n) => n.clone(),
            BindingValue::NamedCall(n, args) => format!(
                "{}({})",
                n,
                args.iter()
                    .map(|a| print_expr(a, 0))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            BindingValue::InlineComparator(def) => {
                // re-emitted with its parameter list on the left-hand side
                out.push_str(&format!(
                    "{}.{}({},{}) = ({})\n",
                    binding.object,
                    binding.property,
                    def.params[0],
                    def.params[1],
                    print_expr(&def.body, 0)
                ));
                continue;
            }
            BindingValue::InlineLambda(param, LambdaBody::Expr(e)) => {
                format!("lambda {}, ({})", param, print_expr(e, 0))
            }
            BindingValue::InlineLambda(param, LambdaBody::Stmt(s)) => {
                format!("lambda {}, ({})", param, print_stmt(s))
            }
            BindingValue::Value(e) => print_expr(e, 0),
        };
        out.push_str(&format!(
            "{}.{} = {}\n",
            binding.object, binding.property, rhs
        ));
    }
    out
}

pub fn print_expr(expr: &Expr, parent_prec: u8) -> String {
    match expr {
        Expr::Number(n) => n.to_string(),
        Expr::Name(n) => n.clone(),
        Expr::Attr(obj, attr) => format!("{}.{}", print_expr(obj, 9), attr),
        Expr::Method(obj, name) => format!("{}.{}()", print_expr(obj, 9), name),
        Expr::Call(name, args) => format!(
            "{}({})",
            name,
            args.iter()
                .map(|a| print_expr(a, 0))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        Expr::Unary(UnaryOp::Neg, inner) => format!("-{}", print_expr(inner, 8)),
        Expr::Unary(UnaryOp::Not, inner) => format!("not {}", print_expr(inner, 3)),
        Expr::Binary(op, lhs, rhs) => {
            let prec = precedence(*op);
            // left-associative: right child needs parens at equal precedence
            let text = format!(
                "{} {} {}",
                print_expr(lhs, prec),
                op.symbol(),
                print_expr(rhs, prec + 1)
            );
            if prec < parent_prec {
                format!("({})", text)
            } else {
                text
            }
        }
        Expr::Let { name, value, body } => {
            let text = format!(
                "let {} = {} in {}",
                name,
                print_expr(value, 0),
                print_expr(body, 0)
            );
            if parent_prec > 0 {
                format!("({})", text)
            } else {
                text
            }
        }
        Expr::If {
            cond,
            then_val,
            else_val,
        } => {
            let text = format!(
                "if ({}) {} else {}",
                print_expr(cond, 0),
                print_expr(then_val, 0),
                print_expr(else_val, 0)
            );
            if parent_prec > 0 {
                format!("({})", text)
            } else {
                text
            }
        }
    }
}

pub fn print_stmt(stmt: &ActionStmt) -> String {
    match stmt {
        ActionStmt::Seq(stmts) => stmts
            .iter()
            .map(print_stmt)
            .collect::<Vec<_>>()
            .join("; "),
        ActionStmt::Let { name, value, body } => format!(
            "let {} = {} in {}",
            name,
            print_expr(value, 0),
            wrap_stmt(body)
        ),
        ActionStmt::If { cond, then_stmt } => {
            format!("if ({}) {}", print_expr(cond, 0), wrap_stmt(then_stmt))
        }
        ActionStmt::Assign {
            target,
            prop,
            op,
            value,
        } => {
            let op_text = match op {
                AssignOp::Set => "=",
                AssignOp::Add => "+=",
            };
            format!(
                "{}.{} {} {}",
                print_expr(target, 9),
                prop,
                op_text,
                print_expr(value, 0)
            )
        }
        ActionStmt::Emit(signal) => signal.keyword().to_string(),
    }
}

/// Sequences nested under let/if need their own parens to keep the `;`
/// separators scoped correctly on reparse.
fn wrap_stmt(stmt: &ActionStmt) -> String {
    match stmt {
        ActionStmt::Seq(_) => format!("({})", print_stmt(stmt)),
        other => print_stmt(other),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_program;
    use super::*;

    fn roundtrip(src: &str) {
        let first = parse_program(src).expect("source should parse");
        let printed = print_spec(&first);
        let second = parse_program(&printed)
            .unwrap_or_else(|e| panic!("printed form failed to reparse: {:?}\n{}", e, printed));
        assert_eq!(first, second, "round trip changed structure:\n{}", printed);
    }

    #[test]
    fn roundtrips_definitions() {
        roundtrip("fifo(p1,p2) = (p1.arrival < p2.arrival)");
        roundtrip("defCongestion() = lambda q, (q.currSize >= q.size)");
        roundtrip("crrPostSchedAct() = lambda port, (port.getCurrQueue().weightSched += k)");
    }

    #[test]
    fn roundtrips_arithmetic_structure() {
        roundtrip("f(p1,p2) = (p1.value + 2 * p2.value < (p1.size + p2.size) * 3)");
        roundtrip("g(p1,p2) = ((p1.value + p2.value) / 2 > 1 and not (p1.size == p2.size))");
        roundtrip("h(p1,p2) = (p1.value - (p2.value - 1) == 0)");
    }

    #[test]
    fn roundtrips_declarations_and_bindings() {
        roundtrip(
            "const B = 6\nq1 = Queue(B)\nq2 = Queue(B)\nout = Port(q1, q2)\n\
             shared = Buffer(B, q1, q2)\nq1.weightSched = 1",
        );
        roundtrip("q1 = Queue(4)\nq1.procPrio(p1,p2) = fifo(p1,p2)");
    }

    #[test]
    fn roundtrips_let_if_action() {
        roundtrip(
            "prrPostSchedAct() = lambda port, (let q = port.getCurrQueue() in \
             if (q.getHOL().processing == 0) q.weightSched += k*k)",
        );
        roundtrip("seqAct() = lambda q, (q.weightAdm += 1; MARK; q.weightSched = 0)");
        roundtrip("nested() = lambda q, (if (q.currSize > 0) (q.weightAdm += 1; NOTIFY))");
    }

    #[test]
    fn roundtrips_conditional_expression() {
        roundtrip("pick(p1,p2) = (if (p1.slack < p2.slack) p1.value else p2.value) > 0");
        roundtrip("lt(p1,p2) = (let d = p1.value - p2.value in d < 0)");
    }
}
