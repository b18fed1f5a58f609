//! Lowering from the syntax tree to a resolved form the evaluator runs.
//!
//! Scoping is per function body with `var` hoisting, as in the surface
//! language. Every identifier is resolved once here to a (depth, slot) pair,
//! a builtin, or an unbound marker that fails when evaluated.

use std::collections::HashMap;
use std::sync::Arc;

use crate::lang::{self, BinaryOp, Else, Expr, ExprKind, Params, Program, Span, Stmt, UnaryOp};

use super::error::{EvalError, EvalErrorKind, InferError};
use super::stdlib::Builtin;
use super::value::Value;

#[derive(Debug)]
pub(crate) struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

#[derive(Debug)]
pub(crate) enum NodeKind {
    Const(Value),
    Local { depth: u32, slot: u32, name: Arc<str> },
    Builtin(Builtin),
    Unbound(Arc<str>),
    List(Vec<Node>),
    Record(Vec<(String, Node)>),
    Func(Arc<FuncIr>),
    Call { callee: Box<Node>, args: Vec<Node> },
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Cond(Box<Node>, Box<Node>, Box<Node>),
    Mem(Box<Node>),
    Condition(Box<Node>),
    /// `Infer` anywhere but a top-level declaration.
    Infer,
}

#[derive(Debug)]
pub(crate) enum StmtIr {
    Var { slot: u32, init: Node },
    Expr(Node),
    Return(Option<Node>),
    If { test: Node, then: Vec<StmtIr>, otherwise: Vec<StmtIr> },
}

#[derive(Debug)]
pub(crate) enum ParamsIr {
    Positional(u32),
    /// Field names bound to slots `0..n` from a single record argument.
    Record(Vec<String>),
}

#[derive(Debug)]
pub(crate) struct FuncIr {
    pub params: ParamsIr,
    pub n_slots: u32,
    pub body: Vec<StmtIr>,
    pub span: Span,
}

/// A program resolved and ready to evaluate. Immutable and shareable across
/// worker threads.
#[derive(Debug)]
pub struct CompiledProgram {
    pub(crate) top: Vec<StmtIr>,
    pub(crate) n_slots: u32,
    pub(crate) model_slot: u32,
    pub(crate) model_name: String,
    pub(crate) globals: HashMap<String, u32>,
}

impl CompiledProgram {
    /// Resolve `program` and locate its model: the function named by a
    /// top-level `Infer({model: ...})`, else the top-level `model` binding.
    pub fn compile(program: &Program) -> Result<CompiledProgram, InferError> {
        let mut cx = Compiler { scopes: Vec::new() };
        let mut globals = HashMap::new();
        hoist(&program.body, &mut globals);
        cx.scopes.push(globals.clone());

        let mut model_name = None;
        let mut top = Vec::new();
        for stmt in &program.body {
            match stmt {
                Stmt::Var {
                    init:
                        Expr {
                            kind: ExprKind::Infer(fields),
                            ..
                        },
                    ..
                } => {
                    for f in fields {
                        match (f.key.as_str(), &f.value.kind) {
                            ("model", ExprKind::Ident(name)) => model_name = Some(name.clone()),
                            ("method", ExprKind::Str(m)) if m != "rejection" => {
                                return Err(InferError::UnsupportedMethod(m.clone()))
                            }
                            _ => {}
                        }
                    }
                }
                // A bare reference such as a trailing `posterior` has no effect.
                Stmt::Expr {
                    expr: Expr {
                        kind: ExprKind::Ident(_),
                        ..
                    },
                    ..
                } => {}
                Stmt::Return { span, .. } => {
                    return Err(EvalError::new(EvalErrorKind::Unsupported, "`return` outside a function", *span).into())
                }
                other => top.push(cx.stmt(other)?),
            }
        }
        let model_name = model_name.unwrap_or_else(|| "model".to_string());
        let model_slot = *globals.get(&model_name).ok_or(InferError::NoModel)?;
        Ok(CompiledProgram {
            top,
            n_slots: globals.len() as u32,
            model_slot,
            model_name,
            globals,
        })
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }
}

fn hoist(body: &[Stmt], into: &mut HashMap<String, u32>) {
    for s in body {
        match s {
            Stmt::Var { name, .. } => {
                let next = into.len() as u32;
                into.entry(name.clone()).or_insert(next);
            }
            Stmt::If { then, otherwise, .. } => {
                hoist(then, into);
                match otherwise {
                    Some(Else::Block(b)) => hoist(b, into),
                    Some(Else::If(s)) => hoist(std::slice::from_ref(s.as_ref()), into),
                    None => {}
                }
            }
            _ => {}
        }
    }
}

struct Compiler {
    scopes: Vec<HashMap<String, u32>>,
}

impl Compiler {
    fn slot_of(&self, name: &str) -> u32 {
        self.scopes.last().expect("scope")[name]
    }

    fn stmts(&mut self, body: &[Stmt]) -> Result<Vec<StmtIr>, EvalError> {
        body.iter().map(|s| self.stmt(s)).collect()
    }

    fn stmt(&mut self, stmt: &Stmt) -> Result<StmtIr, EvalError> {
        Ok(match stmt {
            Stmt::Var { name, init, .. } => StmtIr::Var {
                slot: self.slot_of(name),
                init: self.expr(init)?,
            },
            Stmt::Expr { expr, .. } => StmtIr::Expr(self.expr(expr)?),
            Stmt::Return { value, .. } => StmtIr::Return(value.as_ref().map(|v| self.expr(v)).transpose()?),
            Stmt::If {
                test,
                then,
                otherwise,
                ..
            } => StmtIr::If {
                test: self.expr(test)?,
                then: self.stmts(then)?,
                otherwise: match otherwise {
                    None => Vec::new(),
                    Some(Else::Block(b)) => self.stmts(b)?,
                    Some(Else::If(s)) => vec![self.stmt(s)?],
                },
            },
        })
    }

    fn resolve(&self, name: &str) -> NodeKind {
        for (depth, scope) in self.scopes.iter().rev().enumerate() {
            if let Some(&slot) = scope.get(name) {
                return NodeKind::Local {
                    depth: depth as u32,
                    slot,
                    name: Arc::from(name),
                };
            }
        }
        match Builtin::from_name(name) {
            Some(b) => NodeKind::Builtin(b),
            None => NodeKind::Unbound(Arc::from(name)),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Node, EvalError> {
        let kind = match &e.kind {
            ExprKind::Number(n) => NodeKind::Const(Value::Num(*n)),
            ExprKind::Bool(b) => NodeKind::Const(Value::Bool(*b)),
            ExprKind::Str(s) => NodeKind::Const(Value::str(s)),
            ExprKind::List(items) => NodeKind::List(items.iter().map(|i| self.expr(i)).collect::<Result<_, _>>()?),
            ExprKind::Record(fields) => NodeKind::Record(
                fields
                    .iter()
                    .map(|f| Ok((f.key.clone(), self.expr(&f.value)?)))
                    .collect::<Result<_, EvalError>>()?,
            ),
            ExprKind::Ident(name) => self.resolve(name),
            ExprKind::Function(f) => NodeKind::Func(Arc::new(self.function(f)?)),
            ExprKind::Call { callee, args } => NodeKind::Call {
                callee: Box::new(self.expr(callee)?),
                args: args.iter().map(|a| self.expr(a)).collect::<Result<_, _>>()?,
            },
            ExprKind::Unary { op, operand } => NodeKind::Unary(*op, Box::new(self.expr(operand)?)),
            ExprKind::Binary { op, lhs, rhs } => {
                NodeKind::Binary(*op, Box::new(self.expr(lhs)?), Box::new(self.expr(rhs)?))
            }
            ExprKind::Conditional {
                test,
                then,
                otherwise,
            } => NodeKind::Cond(
                Box::new(self.expr(test)?),
                Box::new(self.expr(then)?),
                Box::new(self.expr(otherwise)?),
            ),
            ExprKind::Mem(inner) => NodeKind::Mem(Box::new(self.expr(inner)?)),
            ExprKind::Condition(inner) => NodeKind::Condition(Box::new(self.expr(inner)?)),
            ExprKind::Infer(_) => NodeKind::Infer,
        };
        Ok(Node { kind, span: e.span })
    }

    fn function(&mut self, f: &lang::Function) -> Result<FuncIr, EvalError> {
        let mut scope = HashMap::new();
        for name in f.params.names() {
            let next = scope.len() as u32;
            scope.insert(name.to_string(), next);
        }
        let params = match &f.params {
            Params::Positional(ps) => ParamsIr::Positional(ps.len() as u32),
            Params::Record(ps) => ParamsIr::Record(ps.iter().map(|p| p.name.clone()).collect()),
        };
        hoist(&f.body, &mut scope);
        let n_slots = scope.len() as u32;
        self.scopes.push(scope);
        let body = self.stmts(&f.body);
        self.scopes.pop();
        Ok(FuncIr {
            params,
            n_slots,
            body: body?,
            span: f.span,
        })
    }
}
