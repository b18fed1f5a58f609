//! Syntax tree for `.wppl` programs.
//!
//! Every node carries the [`Span`] it was parsed from. Structural comparison
//! that ignores positions goes through [`Program::without_spans`] /
//! [`Expr::without_spans`].

use serde::{Deserialize, Serialize};

use super::span::Span;

/// Where a piece of source came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Gold,
    Synthesized,
    Fixture,
}

/// Source text of a program together with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub text: String,
    pub origin: Origin,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: Origin) -> Self {
        SourceProgram {
            text: text.into(),
            origin,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Var {
        name: String,
        name_span: Span,
        init: Expr,
        span: Span,
    },
    Expr {
        expr: Expr,
        span: Span,
    },
    Return {
        value: Option<Expr>,
        span: Span,
    },
    If {
        test: Expr,
        then: Vec<Stmt>,
        otherwise: Option<Else>,
        span: Span,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Else {
    Block(Vec<Stmt>),
    If(Box<Stmt>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Bool(bool),
    Str(String),
    List(Vec<Expr>),
    Record(Vec<Field>),
    Ident(String),
    Function(Box<Function>),
    Call { callee: Box<Expr>, args: Vec<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Conditional { test: Box<Expr>, then: Box<Expr>, otherwise: Box<Expr> },
    /// `mem(f)`: stochastic memoization of a callable.
    Mem(Box<Expr>),
    /// `condition(e)`: reject the current trace unless `e` is true.
    Condition(Box<Expr>),
    /// `Infer({...})` with its options record.
    Infer(Vec<Field>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub key: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub params: Params,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Positional(Vec<Param>),
    /// A single destructured record parameter, `function({athlete, match})`.
    Record(Vec<Param>),
}

impl Params {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        match self {
            Params::Positional(ps) | Params::Record(ps) => ps.iter().map(|p| p.name.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    /// Binding strength; larger binds tighter. All binary operators are
    /// left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

impl Program {
    /// Names bound by top-level `var` statements, in order.
    pub fn declarations(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.body.iter().filter_map(|s| match s {
            Stmt::Var { name, init, .. } => Some((name.as_str(), init)),
            _ => None,
        })
    }

    pub fn declaration(&self, name: &str) -> Option<&Expr> {
        self.declarations().find(|(n, _)| *n == name).map(|(_, e)| e)
    }

    pub fn without_spans(&self) -> Program {
        Program {
            body: self.body.iter().map(Stmt::without_spans).collect(),
            span: Span::default(),
        }
    }
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Var { span, .. }
            | Stmt::Expr { span, .. }
            | Stmt::Return { span, .. }
            | Stmt::If { span, .. } => *span,
        }
    }

    pub fn without_spans(&self) -> Stmt {
        let z = Span::default();
        match self {
            Stmt::Var { name, init, .. } => Stmt::Var {
                name: name.clone(),
                name_span: z,
                init: init.without_spans(),
                span: z,
            },
            Stmt::Expr { expr, .. } => Stmt::Expr {
                expr: expr.without_spans(),
                span: z,
            },
            Stmt::Return { value, .. } => Stmt::Return {
                value: value.as_ref().map(Expr::without_spans),
                span: z,
            },
            Stmt::If {
                test,
                then,
                otherwise,
                ..
            } => Stmt::If {
                test: test.without_spans(),
                then: then.iter().map(Stmt::without_spans).collect(),
                otherwise: otherwise.as_ref().map(|e| match e {
                    Else::Block(b) => Else::Block(b.iter().map(Stmt::without_spans).collect()),
                    Else::If(s) => Else::If(Box::new(s.without_spans())),
                }),
                span: z,
            },
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn without_spans(&self) -> Expr {
        let z = Span::default();
        let fields = |fs: &[Field]| -> Vec<Field> {
            fs.iter()
                .map(|f| Field {
                    key: f.key.clone(),
                    value: f.value.without_spans(),
                    span: z,
                })
                .collect()
        };
        let kind = match &self.kind {
            ExprKind::Number(n) => ExprKind::Number(*n),
            ExprKind::Bool(b) => ExprKind::Bool(*b),
            ExprKind::Str(s) => ExprKind::Str(s.clone()),
            ExprKind::List(items) => ExprKind::List(items.iter().map(Expr::without_spans).collect()),
            ExprKind::Record(fs) => ExprKind::Record(fields(fs)),
            ExprKind::Ident(n) => ExprKind::Ident(n.clone()),
            ExprKind::Function(f) => {
                let strip = |ps: &[Param]| -> Vec<Param> {
                    ps.iter()
                        .map(|p| Param {
                            name: p.name.clone(),
                            span: z,
                        })
                        .collect()
                };
                ExprKind::Function(Box::new(Function {
                    params: match &f.params {
                        Params::Positional(ps) => Params::Positional(strip(ps)),
                        Params::Record(ps) => Params::Record(strip(ps)),
                    },
                    body: f.body.iter().map(Stmt::without_spans).collect(),
                    span: z,
                }))
            }
            ExprKind::Call { callee, args } => ExprKind::Call {
                callee: Box::new(callee.without_spans()),
                args: args.iter().map(Expr::without_spans).collect(),
            },
            ExprKind::Unary { op, operand } => ExprKind::Unary {
                op: *op,
                operand: Box::new(operand.without_spans()),
            },
            ExprKind::Binary { op, lhs, rhs } => ExprKind::Binary {
                op: *op,
                lhs: Box::new(lhs.without_spans()),
                rhs: Box::new(rhs.without_spans()),
            },
            ExprKind::Conditional {
                test,
                then,
                otherwise,
            } => ExprKind::Conditional {
                test: Box::new(test.without_spans()),
                then: Box::new(then.without_spans()),
                otherwise: Box::new(otherwise.without_spans()),
            },
            ExprKind::Mem(e) => ExprKind::Mem(Box::new(e.without_spans())),
            ExprKind::Condition(e) => ExprKind::Condition(Box::new(e.without_spans())),
            ExprKind::Infer(fs) => ExprKind::Infer(fields(fs)),
        };
        Expr { kind, span: z }
    }

    /// Identifier name when this expression is a bare identifier.
    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(n) => Some(n),
            _ => None,
        }
    }
}
