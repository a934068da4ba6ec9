//! Abstract syntax of a program: constants, named definitions, object
//! declarations and property bindings.
//!
//! Statement records carry the source line they came from for validator
//! diagnostics; structural equality (`PartialEq`) deliberately ignores those
//! lines so that a parse/print/parse round trip compares equal.

use std::collections::BTreeMap;

/// Binary operators, in one flat enum; precedence lives in the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }
}

/// Pure expression tree. Attribute reads and the three object-returning
/// calls (`getHOL`, `getCurrQueue`, `getBestQueue`) are the only ways an
/// expression can observe runtime state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Number(i64),
    /// Reference to a parameter, let binding, constant or declared object,
    /// resolved during validation.
    Name(String),
    /// `object.attribute`
    Attr(Box<Expr>, String),
    /// `object.method()` — zero-argument runtime accessors.
    Method(Box<Expr>, String),
    /// `name(args)` — call of a user-defined comparator/predicate.
    Call(String, Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `let name = value in body`
    Let {
        name: String,
        value: Box<Expr>,
        body: Box<Expr>,
    },
    /// `if (cond) then_val else else_val` — the `else` arm is mandatory in
    /// expression position.
    If {
        cond: Box<Expr>,
        then_val: Box<Expr>,
        else_val: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

/// Loggable signals an action can raise. `None` is the explicit no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Mark,
    Notify,
    None,
}

impl Signal {
    pub fn keyword(self) -> &'static str {
        match self {
            Signal::Mark => "MARK",
            Signal::Notify => "NOTIFY",
            Signal::None => "NONE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
}

/// Statement language of action bodies: sequencing, let, if without else,
/// weight assignment, and signal emission. Nothing else mutates state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionStmt {
    Seq(Vec<ActionStmt>),
    Let {
        name: String,
        value: Expr,
        body: Box<ActionStmt>,
    },
    If {
        cond: Expr,
        then_stmt: Box<ActionStmt>,
    },
    /// `target.prop op= value` where `prop` is `weightAdm` or `weightSched`.
    Assign {
        target: Expr,
        prop: String,
        op: AssignOp,
        value: Expr,
    },
    Emit(Signal),
}

/// `name(a,b) = (boolean expression over a and b)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparatorDef {
    pub params: [String; 2],
    pub body: Expr,
}

/// `name() = lambda x, (boolean expression over x)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub param: String,
    pub body: Expr,
}

/// `name() = lambda x, (statement over x)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionDef {
    pub param: String,
    pub body: ActionStmt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectKind {
    Queue,
    Port,
    Buffer,
}

impl ObjectKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ObjectKind::Queue => "Queue",
            ObjectKind::Port => "Port",
            ObjectKind::Buffer => "Buffer",
        }
    }
}

/// `q1 = Queue(B)`, `out = Port(q1, q2)`, `shared = Buffer(B, q1, q2)`.
#[derive(Debug, Clone)]
pub struct ObjectDecl {
    pub name: String,
    pub kind: ObjectKind,
    /// Capacity expression; present for queues and buffers.
    pub capacity: Option<Expr>,
    /// Member queue names; present for ports and buffers.
    pub members: Vec<String>,
    pub line: u32,
}

impl PartialEq for ObjectDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.kind == other.kind
            && self.capacity == other.capacity
            && self.members == other.members
    }
}
impl Eq for ObjectDecl {}

/// Right-hand side of a property binding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingValue {
    /// `q1.admPrio = fifo`
    Named(String),
    /// `q1.congestion = defCongestion(q1)` — the argument names the object
    /// the lambda parameter is bound to at evaluation time.
    NamedCall(String, Vec<Expr>),
    /// `q1.procPrio(p1,p2) = fifo(p1,p2)` — an inline comparator.
    InlineComparator(ComparatorDef),
    /// `out.postSchedAct = lambda port, (...)` — inline predicate or action.
    InlineLambda(String, LambdaBody),
    /// `q1.weightSched = 1` — constant expression for weight initialisation.
    Value(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaBody {
    Expr(Expr),
    Stmt(ActionStmt),
}

/// `object.property = value`.
#[derive(Debug, Clone)]
pub struct PropertyBinding {
    pub object: String,
    pub property: String,
    pub value: BindingValue,
    pub line: u32,
}

impl PartialEq for PropertyBinding {
    fn eq(&self, other: &Self) -> bool {
        self.object == other.object
            && self.property == other.property
            && self.value == other.value
    }
}
impl Eq for PropertyBinding {}

/// A parsed program: named definitions plus the ordered declaration and
/// binding statements that instantiate an architecture.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArchSpec {
    pub constants: BTreeMap<String, i64>,
    pub comparators: BTreeMap<String, ComparatorDef>,
    pub predicates: BTreeMap<String, PredicateDef>,
    pub actions: BTreeMap<String, ActionDef>,
    pub declarations: Vec<ObjectDecl>,
    pub bindings: Vec<PropertyBinding>,
}

impl ArchSpec {
    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
            && self.comparators.is_empty()
            && self.predicates.is_empty()
            && self.actions.is_empty()
            && self.declarations.is_empty()
            && self.bindings.is_empty()
    }

    pub fn declaration(&self, name: &str) -> Option<&ObjectDecl> {
        self.declarations.iter().find(|d| d.name == name)
    }
}
