//! Recursive-descent parser producing an [`ArchSpec`].
//!
//! Top-level statement forms:
//!
//! ```text
//! const B = 6
//! fifo(p1,p2) = (p1.arrival < p2.arrival)
//! defCongestion() = lambda q, (q.currSize >= q.size)
//! q1 = Queue(B)
//! out = Port(q1)
//! q1.procPrio = fifo
//! q1.procPrio(p1,p2) = fifo(p1,p2)
//! q1.congestion = defCongestion(q1)
//! q1.weightSched = 1
//! ```
//!
//! On a syntax error the parser records a diagnostic and resynchronises at
//! the next statement separator, so one bad line does not hide the rest.

use super::ast::*;
use super::lexer::{lex, Lexeme, Tok};
use crate::diag::Diagnostic;

pub fn parse_program(src: &str) -> Result<ArchSpec, Vec<Diagnostic>> {
    let lexemes = match lex(src) {
        Ok(l) => l,
        Err(d) => return Err(vec![d]),
    };
    let mut parser = Parser {
        toks: lexemes,
        pos: 0,
        diags: Vec::new(),
    };
    let spec = parser.program();
    if parser.diags.is_empty() {
        Ok(spec)
    } else {
        Err(parser.diags)
    }
}

struct Parser {
    toks: Vec<Lexeme>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

/// A lambda or definition body before classification.
enum Body {
    Expr(Expr),
    Stmt(ActionStmt),
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos.min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (u32, u32) {
        let l = &self.toks[self.pos.min(self.toks.len() - 1)];
        (l.line, l.col)
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos.min(self.toks.len() - 1)].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, msg: impl Into<String>) -> Diagnostic {
        let (line, col) = self.here();
        Diagnostic::new(line, col, msg)
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(name)
            }
            other => Err(self.error(format!("expected {}, found {}", what, other.describe()))),
        }
    }

    fn skip_seps(&mut self) {
        while *self.peek() == Tok::Sep {
            self.advance();
        }
    }

    /// Skip to the next statement separator after an error.
    fn resync(&mut self) {
        while !matches!(self.peek(), Tok::Sep | Tok::Eof) {
            self.advance();
        }
    }

    fn program(&mut self) -> ArchSpec {
        let mut spec = ArchSpec::default();
        loop {
            self.skip_seps();
            if *self.peek() == Tok::Eof {
                break;
            }
            if let Err(d) = self.statement(&mut spec) {
                self.diags.push(d);
                self.resync();
            }
        }
        spec
    }

    fn statement(&mut self, spec: &mut ArchSpec) -> PResult<()> {
        let (line, _) = self.here();
        match self.peek().clone() {
            Tok::Const => self.const_stmt(spec, line),
            Tok::Ident(name) => {
                self.advance();
                match self.peek() {
                    Tok::LParen => self.definition(spec, name, line),
                    Tok::Dot => self.binding(spec, name, line),
                    Tok::Assign => self.declaration(spec, name, line),
                    other => Err(self.error(format!(
                        "expected '(', '.' or '=' after '{}', found {}",
                        name,
                        other.describe()
                    ))),
                }
            }
            other => Err(self.error(format!("expected a statement, found {}", other.describe()))),
        }
    }

    fn const_stmt(&mut self, spec: &mut ArchSpec, line: u32) -> PResult<()> {
        self.advance(); // const
        let name = self.expect_ident("constant name")?;
        self.expect(Tok::Assign)?;
        let negative = if *self.peek() == Tok::Minus {
            self.advance();
            true
        } else {
            false
        };
        let value = match self.advance() {
            Tok::Number(n) => {
                if negative {
                    -n
                } else {
                    n
                }
            }
            other => {
                return Err(self.error(format!(
                    "expected number for constant '{}', found {}",
                    name,
                    other.describe()
                )))
            }
        };
        self.check_new_name(spec, &name, line)?;
        spec.constants.insert(name, value);
        self.end_statement()
    }

    fn end_statement(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Sep | Tok::Eof => Ok(()),
            other => Err(self.error(format!(
                "expected end of statement, found {}",
                other.describe()
            ))),
        }
    }

    fn param_list(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                params.push(self.expect_ident("parameter name")?);
                if *self.peek() == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(params)
    }

    fn check_new_name(&self, spec: &ArchSpec, name: &str, line: u32) -> PResult<()> {
        let taken = spec.comparators.contains_key(name)
            || spec.predicates.contains_key(name)
            || spec.actions.contains_key(name)
            || spec.constants.contains_key(name)
            || spec.declaration(name).is_some();
        if taken {
            Err(Diagnostic::at_line(
                line,
                format!("duplicate name '{}'", name),
            ))
        } else {
            Ok(())
        }
    }

    fn definition(&mut self, spec: &mut ArchSpec, name: String, line: u32) -> PResult<()> {
        let params = self.param_list()?;
        self.expect(Tok::Assign)?;
        self.check_new_name(spec, &name, line)?;
        if *self.peek() == Tok::Lambda {
            if !params.is_empty() {
                return Err(Diagnostic::at_line(
                    line,
                    format!(
                        "definition '{}' mixes parameters with a lambda body; \
                         lambda definitions take an empty parameter list",
                        name
                    ),
                ));
            }
            let (param, body) = self.lambda()?;
            match body {
                Body::Expr(body) => {
                    spec.predicates.insert(name, PredicateDef { param, body });
                }
                Body::Stmt(body) => {
                    spec.actions.insert(name, ActionDef { param, body });
                }
            }
        } else {
            let body = self.expr()?;
            match params.len() {
                2 => {
                    spec.comparators.insert(
                        name,
                        ComparatorDef {
                            params: [params[0].clone(), params[1].clone()],
                            body,
                        },
                    );
                }
                1 => {
                    spec.predicates.insert(
                        name,
                        PredicateDef {
                            param: params[0].clone(),
                            body,
                        },
                    );
                }
                n => {
                    return Err(Diagnostic::at_line(
                        line,
                        format!(
                            "definition '{}' takes {} parameters; comparators take two, \
                             predicates one",
                            name, n
                        ),
                    ));
                }
            }
        }
        self.end_statement()
    }

    fn lambda(&mut self) -> PResult<(String, Body)> {
        self.expect(Tok::Lambda)?;
        let param = self.expect_ident("lambda parameter")?;
        self.expect(Tok::Comma)?;
        let body = self.body()?;
        Ok((param, body))
    }

    fn declaration(&mut self, spec: &mut ArchSpec, name: String, line: u32) -> PResult<()> {
        self.advance(); // =
        let kind = match self.peek() {
            Tok::Queue => ObjectKind::Queue,
            Tok::Port => ObjectKind::Port,
            Tok::Buffer => ObjectKind::Buffer,
            other => {
                return Err(self.error(format!(
                    "expected Queue(...), Port(...) or Buffer(...) after '{} =', found {}",
                    name,
                    other.describe()
                )))
            }
        };
        self.advance();
        self.check_new_name(spec, &name, line)?;
        self.expect(Tok::LParen)?;
        let mut capacity = None;
        let mut members = Vec::new();
        match kind {
            ObjectKind::Queue => {
                capacity = Some(self.expr()?);
            }
            ObjectKind::Port => {
                members = self.ident_list()?;
            }
            ObjectKind::Buffer => {
                capacity = Some(self.expr()?);
                self.expect(Tok::Comma)?;
                members = self.ident_list()?;
            }
        }
        self.expect(Tok::RParen)?;
        spec.declarations.push(ObjectDecl {
            name,
            kind,
            capacity,
            members,
            line,
        });
        self.end_statement()
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.expect_ident("queue name")?];
        while *self.peek() == Tok::Comma {
            self.advance();
            names.push(self.expect_ident("queue name")?);
        }
        Ok(names)
    }

    fn binding(&mut self, spec: &mut ArchSpec, object: String, line: u32) -> PResult<()> {
        self.advance(); // .
        let property = self.expect_ident("property name")?;
        // optional inline comparator parameter list: q1.procPrio(p1,p2) = ...
        let inline_params = if *self.peek() == Tok::LParen {
            Some(self.param_list()?)
        } else {
            None
        };
        self.expect(Tok::Assign)?;
        let value = if let Some(params) = inline_params {
            if params.len() != 2 {
                return Err(Diagnostic::at_line(
                    line,
                    format!(
                        "inline comparator for '{}.{}' takes {} parameters, expected two",
                        object,
                        property,
                        params.len()
                    ),
                ));
            }
            let body = self.expr()?;
            BindingValue::InlineComparator(ComparatorDef {
                params: [params[0].clone(), params[1].clone()],
                body,
            })
        } else if *self.peek() == Tok::Lambda {
            let (param, body) = self.lambda()?;
            match body {
                Body::Expr(e) => BindingValue::InlineLambda(param, LambdaBody::Expr(e)),
                Body::Stmt(s) => BindingValue::InlineLambda(param, LambdaBody::Stmt(s)),
            }
        } else {
            match self.expr()? {
                Expr::Name(n) => BindingValue::Named(n),
                Expr::Call(n, args) => BindingValue::NamedCall(n, args),
                other => BindingValue::Value(other),
            }
        };
        spec.bindings.push(PropertyBinding {
            object,
            property,
            value,
            line,
        });
        self.end_statement()
    }

    // ---- bodies: expression or action statement ----

    fn body(&mut self) -> PResult<Body> {
        match self.peek().clone() {
            Tok::Let => {
                self.advance();
                let name = self.expect_ident("let binding name")?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::In)?;
                match self.body()? {
                    Body::Expr(body) => Ok(Body::Expr(Expr::Let {
                        name,
                        value: Box::new(value),
                        body: Box::new(body),
                    })),
                    Body::Stmt(body) => Ok(Body::Stmt(ActionStmt::Let {
                        name,
                        value,
                        body: Box::new(body),
                    })),
                }
            }
            Tok::If => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_body = self.body()?;
                if *self.peek() == Tok::Else {
                    self.advance();
                    let then_val = match then_body {
                        Body::Expr(e) => e,
                        Body::Stmt(_) => {
                            return Err(self
                                .error("'else' after an action statement; only conditional \
                                        expressions take an else branch"))
                        }
                    };
                    let else_body = self.body()?;
                    let else_val = match else_body {
                        Body::Expr(e) => e,
                        Body::Stmt(_) => {
                            return Err(self.error("expected an expression in the else branch"))
                        }
                    };
                    Ok(Body::Expr(Expr::If {
                        cond: Box::new(cond),
                        then_val: Box::new(then_val),
                        else_val: Box::new(else_val),
                    }))
                } else {
                    match then_body {
                        Body::Stmt(s) => Ok(Body::Stmt(ActionStmt::If {
                            cond,
                            then_stmt: Box::new(s),
                        })),
                        Body::Expr(_) => Err(self.error(
                            "'if' without 'else' must contain an action statement, \
                             not a bare expression",
                        )),
                    }
                }
            }
            Tok::Mark => {
                self.advance();
                Ok(Body::Stmt(ActionStmt::Emit(Signal::Mark)))
            }
            Tok::Notify => {
                self.advance();
                Ok(Body::Stmt(ActionStmt::Emit(Signal::Notify)))
            }
            Tok::NoneKw => {
                self.advance();
                Ok(Body::Stmt(ActionStmt::Emit(Signal::None)))
            }
            Tok::LParen => {
                // Either a grouped body (possibly a `;`-separated statement
                // sequence) or a parenthesised subexpression of something
                // larger. Try the group first, back off if an operator
                // follows the closing paren.
                let start = self.pos;
                self.advance(); // (
                let mut items = Vec::new();
                loop {
                    while *self.peek() == Tok::Sep {
                        self.advance();
                    }
                    if *self.peek() == Tok::RParen {
                        break;
                    }
                    items.push(self.body()?);
                    if !matches!(self.peek(), Tok::Sep | Tok::RParen) {
                        // not a clean group: reparse the whole thing as expr
                        self.pos = start;
                        return Ok(Body::Expr(self.expr()?));
                    }
                }
                self.expect(Tok::RParen)?;
                if items.len() == 1 && matches!(items[0], Body::Expr(_)) {
                    if self.continues_expression() {
                        self.pos = start;
                        return Ok(Body::Expr(self.expr()?));
                    }
                    return Ok(items.pop_unwrap_expr());
                }
                if items.is_empty() {
                    return Err(self.error("empty parenthesised body"));
                }
                let mut stmts = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        Body::Stmt(s) => stmts.push(s),
                        Body::Expr(_) => {
                            return Err(self.error(
                                "expression has no effect inside an action sequence",
                            ))
                        }
                    }
                }
                if stmts.len() == 1 {
                    Ok(Body::Stmt(stmts.into_iter().next().unwrap()))
                } else {
                    Ok(Body::Stmt(ActionStmt::Seq(stmts)))
                }
            }
            _ => {
                let e = self.expr()?;
                match self.peek() {
                    Tok::Assign | Tok::PlusAssign => self.assignment(e).map(Body::Stmt),
                    _ => Ok(Body::Expr(e)),
                }
            }
        }
    }

    /// After a closed paren group parsed as a lone expression: does the next
    /// token extend it into a larger expression?
    fn continues_expression(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Plus
                | Tok::Minus
                | Tok::Star
                | Tok::Slash
                | Tok::Lt
                | Tok::Gt
                | Tok::Le
                | Tok::Ge
                | Tok::EqEq
                | Tok::Ne
                | Tok::And
                | Tok::Or
                | Tok::Dot
        )
    }

    fn assignment(&mut self, target: Expr) -> PResult<ActionStmt> {
        let op = match self.advance() {
            Tok::Assign => AssignOp::Set,
            Tok::PlusAssign => AssignOp::Add,
            _ => unreachable!(),
        };
        let (object, prop) = match target {
            Expr::Attr(object, prop) => (*object, prop),
            _ => return Err(self.error("assignment target must be object.property")),
        };
        let value = self.expr()?;
        Ok(ActionStmt::Assign {
            target: object,
            prop,
            op,
            value,
        })
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Let => {
                self.advance();
                let name = self.expect_ident("let binding name")?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                Ok(Expr::Let {
                    name,
                    value: Box::new(value),
                    body: Box::new(body),
                })
            }
            Tok::If => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let then_val = self.expr()?;
                self.expect(Tok::Else)?;
                let else_val = self.expr()?;
                Ok(Expr::If {
                    cond: Box::new(cond),
                    then_val: Box::new(then_val),
                    else_val: Box::new(else_val),
                })
            }
            _ => self.or_expr(),
        }
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.not_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Not {
            self.advance();
            let inner = self.not_expr()?;
            Ok(Expr::Unary(UnaryOp::Not, Box::new(inner)))
        } else {
            self.cmp_expr()
        }
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Lt => BinOp::Lt,
            Tok::Gt => BinOp::Gt,
            Tok::Le => BinOp::Le,
            Tok::Ge => BinOp::Ge,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            _ => return Ok(lhs),
        };
        self.advance();
        let rhs = self.add_expr()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.unary_expr()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            self.advance();
            let inner = self.unary_expr()?;
            Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)))
        } else {
            self.postfix_expr()
        }
    }

    fn postfix_expr(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while *self.peek() == Tok::Dot {
            self.advance();
            let name = self.expect_ident("attribute or method name")?;
            if *self.peek() == Tok::LParen {
                self.advance();
                self.expect(Tok::RParen)?;
                e = Expr::Method(Box::new(e), name);
            } else {
                e = Expr::Attr(Box::new(e), name);
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.advance();
                Ok(Expr::Number(n))
            }
            Tok::Ident(name) => {
                self.advance();
                if *self.peek() == Tok::LParen {
                    self.advance();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            args.push(self.expr()?);
                            if *self.peek() == Tok::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Let | Tok::If => self.expr(),
            other => Err(self.error(format!("expected an expression, found {}", other.describe()))),
        }
    }
}

trait PopExpr {
    fn pop_unwrap_expr(self) -> Body;
}

impl PopExpr for Vec<Body> {
    fn pop_unwrap_expr(mut self) -> Body {
        match self.pop() {
            Some(Body::Expr(e)) => Body::Expr(e),
            _ => unreachable!("caller checked the single item is an expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comparator_definition() {
        let spec = parse_program("fifo(p1,p2) = (p1.arrival < p2.arrival)").unwrap();
        let fifo = &spec.comparators["fifo"];
        assert_eq!(fifo.params, ["p1".to_string(), "p2".to_string()]);
        assert_eq!(
            fifo.body,
            Expr::Binary(
                BinOp::Lt,
                Box::new(Expr::Attr(
                    Box::new(Expr::Name("p1".into())),
                    "arrival".into()
                )),
                Box::new(Expr::Attr(
                    Box::new(Expr::Name("p2".into())),
                    "arrival".into()
                )),
            )
        );
    }

    #[test]
    fn empty_input_gives_empty_spec() {
        let spec = parse_program("").unwrap();
        assert!(spec.is_empty());
        let spec = parse_program("  \n // only a comment\n").unwrap();
        assert!(spec.is_empty());
    }

    #[test]
    fn parses_predicate_with_lambda() {
        let spec = parse_program("defCongestion() = lambda q, (q.currSize >= q.size)").unwrap();
        let p = &spec.predicates["defCongestion"];
        assert_eq!(p.param, "q");
        assert!(matches!(p.body, Expr::Binary(BinOp::Ge, _, _)));
    }

    #[test]
    fn parses_action_with_let_and_if() {
        let src = "prrPostSchedAct() = lambda port, \n  (let q = port.getCurrQueue() in \n    if (q.getHOL().processing == 0) \n        q.weightSched += k*k)";
        let spec = parse_program(src).unwrap();
        let a = &spec.actions["prrPostSchedAct"];
        assert_eq!(a.param, "port");
        match &a.body {
            ActionStmt::Let { name, body, .. } => {
                assert_eq!(name, "q");
                assert!(matches!(**body, ActionStmt::If { .. }));
            }
            other => panic!("expected let, got {:?}", other),
        }
    }

    #[test]
    fn parses_declarations_and_bindings() {
        let src = "q1=Queue(B); out=Port(q1);\nq1.procPrio(p1,p2)=fifo(p1,p2);\nq1.congestion=defCongestion(q1);";
        let spec = parse_program(src).unwrap();
        assert_eq!(spec.declarations.len(), 2);
        assert_eq!(spec.declarations[0].kind, ObjectKind::Queue);
        assert_eq!(spec.declarations[1].members, vec!["q1".to_string()]);
        assert_eq!(spec.bindings.len(), 2);
        assert!(matches!(
            spec.bindings[0].value,
            BindingValue::InlineComparator(_)
        ));
        assert!(matches!(
            &spec.bindings[1].value,
            BindingValue::NamedCall(n, args) if n == "defCongestion" && args.len() == 1
        ));
    }

    #[test]
    fn parses_buffer_declaration() {
        let spec = parse_program("shared = Buffer(B, q1, q2)").unwrap();
        let d = &spec.declarations[0];
        assert_eq!(d.kind, ObjectKind::Buffer);
        assert_eq!(d.members, vec!["q1".to_string(), "q2".to_string()]);
        assert!(d.capacity.is_some());
    }

    #[test]
    fn parses_weight_binding_and_named_binding() {
        let spec = parse_program("q1.weightSched = 1\nq1.admPrio = fifo").unwrap();
        assert!(matches!(
            spec.bindings[0].value,
            BindingValue::Value(Expr::Number(1))
        ));
        assert!(matches!(
            &spec.bindings[1].value,
            BindingValue::Named(n) if n == "fifo"
        ));
    }

    #[test]
    fn reports_duplicate_object_name() {
        let err = parse_program("q1 = Queue(4)\nq1 = Queue(2)").unwrap_err();
        assert!(err.iter().any(|d| d.message.contains("duplicate name 'q1'")));
    }

    #[test]
    fn reports_syntax_error_with_position_and_recovers() {
        let err = parse_program("q1 = Fifo(2)\nq2 = Queue(2)\nq3 = ").unwrap_err();
        // the bad first line and the dangling q3, with the good line between
        assert_eq!(err.len(), 2);
        assert_eq!(err[0].line, 1);
        assert_eq!(err[1].line, 3);
    }

    #[test]
    fn parses_action_sequence() {
        let spec =
            parse_program("both() = lambda q, (q.weightAdm += 1; q.weightSched += 2)").unwrap();
        let a = &spec.actions["both"];
        assert!(matches!(&a.body, ActionStmt::Seq(s) if s.len() == 2));
    }

    #[test]
    fn parses_signal_actions() {
        let spec = parse_program("markAct() = lambda q, MARK\nnoop() = lambda q, NONE").unwrap();
        assert!(matches!(
            spec.actions["markAct"].body,
            ActionStmt::Emit(Signal::Mark)
        ));
        assert!(matches!(
            spec.actions["noop"].body,
            ActionStmt::Emit(Signal::None)
        ));
    }

    #[test]
    fn grouped_expression_continues_after_paren() {
        let spec = parse_program("odd(q) = (q.currSize / 2) * 2 != q.currSize").unwrap();
        assert!(matches!(
            spec.predicates["odd"].body,
            Expr::Binary(BinOp::Ne, _, _)
        ));
    }

    #[test]
    fn conditional_expression_requires_else() {
        let spec = parse_program("pick(p1,p2) = if (p1.value > p2.value) 1 else 0 > 0").unwrap();
        assert!(spec.comparators.contains_key("pick"));
    }
}
