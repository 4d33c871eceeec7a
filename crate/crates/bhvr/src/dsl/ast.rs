//! Syntax tree, source positions, and the value universe.

use std::fmt;
use std::rc::Rc;

/// Where a construct sits in its source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn at(line: u32, col: u32) -> Span {
        Span {
            line,
            col,
            end_line: line,
            end_col: col,
        }
    }

    pub fn to(self, other: Span) -> Span {
        Span {
            line: self.line,
            col: self.col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }
}

/// A diagnostic tied to a source position; renders as
/// `file:line:col: message`.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{span_line}:{span_col}: {message}", span_line = span.line, span_col = span.col)]
pub struct Diag {
    pub span: Span,
    pub message: String,
}

impl Diag {
    pub fn new(span: Span, message: impl Into<String>) -> Diag {
        Diag {
            span,
            message: message.into(),
        }
    }

    pub fn render(&self, file: &str) -> String {
        format!("{}:{}:{}: {}", file, self.span.line, self.span.col, self.message)
    }
}

/// Runtime values of the monomorphic universe.
#[derive(Debug, Clone, PartialEq)]
pub enum Val {
    Null,
    Bool(bool),
    Int(i64),
    Door(String),
    Box(String),
    List(Vec<Val>),
}

impl Val {
    pub fn as_bool(&self) -> bool {
        match self {
            Val::Bool(b) => *b,
            other => panic!("type invariant violated: expected Bool, got {other:?}"),
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Val::Int(n) => *n,
            other => panic!("type invariant violated: expected Int, got {other:?}"),
        }
    }

    pub fn as_list(&self) -> &[Val] {
        match self {
            Val::List(items) => items,
            other => panic!("type invariant violated: expected List, got {other:?}"),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Null => write!(f, "()"),
            Val::Bool(b) => write!(f, "{b}"),
            Val::Int(n) => write!(f, "{n}"),
            Val::Door(id) | Val::Box(id) => write!(f, "{id}"),
            Val::List(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Value types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    Null,
    Bool,
    Int,
    Door,
    Box,
    List(Rc<Ty>),
}

impl Ty {
    pub fn list(elem: Ty) -> Ty {
        Ty::List(Rc::new(elem))
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Null => write!(f, "Null"),
            Ty::Bool => write!(f, "Bool"),
            Ty::Int => write!(f, "Int"),
            Ty::Door => write!(f, "Door"),
            Ty::Box => write!(f, "Box"),
            Ty::List(e) => write!(f, "List<{e}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Unit,
    Bool(bool),
    Int(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn apply(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

/// An expression with its source span. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    /// A bare name: a bound variable, a parameterless definition, a
    /// parameterless action, or a named world object.
    Var(String),
    /// An applied name: a definition or action with arguments.
    Call { name: String, args: Vec<Expr> },
    /// `a ; b` — run `a` to completion, discard, run `b`.
    Seq(Box<Expr>, Box<Expr>),
    /// `x <- a ; body` — run `a`, bind its value, continue.
    Bind {
        var: String,
        value: Box<Expr>,
        body: Box<Expr>,
    },
    /// `a ? b` — non-reactive fallback (catch).
    Fallback(Box<Expr>, Box<Expr>),
    /// `a ||| b` — race, first completion wins.
    Parallel(Box<Expr>, Box<Expr>),
    /// `both(a, b)` — wait for both.
    Both(Box<Expr>, Box<Expr>),
    RSelect {
        test: Box<Expr>,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Monitor {
        test: Box<Expr>,
        recovery: Box<Expr>,
        task: Box<Expr>,
    },
    Attempt { n: u32, body: Box<Expr> },
    /// `fallbackOver(list, f)` — try `f` on each element in order.
    FallbackOver { list: Box<Expr>, func: String },
    /// Non-reactive branch: the condition is evaluated exactly once.
    If {
        cond: Box<Expr>,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    Pure(Literal),
    /// `cmp(op, k, e)` — compare `e`'s integer result against `k`.
    Cmp {
        op: CmpOp,
        constant: i64,
        arg: Box<Expr>,
    },
    /// A runtime-injected value; never produced by the parser.
    Value(Val),
}

/// A top-level definition. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Def {
    pub name: String,
    pub params: Vec<String>,
    pub body: Expr,
    pub span: Span,
}

impl PartialEq for Def {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.params == other.params && self.body == other.body
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub defs: Vec<Def>,
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&Def> {
        self.defs.iter().find(|d| d.name == name)
    }
}
