//! Trace evaluator.
//!
//! A [`Trace`] owns everything one execution of a program touches: the frame
//! arena closures point into, the memo table, and the source of random
//! choices. Nothing outlives the trace, so closures can refer to frames by
//! index without reference cycles.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lang::{BinaryOp, Span, UnaryOp};

use super::compile::{CompiledProgram, FuncIr, Node, NodeKind, ParamsIr, StmtIr};
use super::error::{EvalError, EvalErrorKind};
use super::value::{Callable, Closure, FrameId, Memo, Value};

/// Calls deeper than this are reported as runaway recursion.
pub const MAX_CALL_DEPTH: u32 = 400;

/// Why evaluation stopped early.
#[derive(Debug)]
pub(crate) enum Halt {
    Reject,
    Error(EvalError),
    /// A continuous primitive was reached while enumerating.
    Continuous { primitive: &'static str, span: Span },
}

impl From<EvalError> for Halt {
    fn from(e: EvalError) -> Self {
        Halt::Error(e)
    }
}

pub(crate) type Eval<T> = Result<T, Halt>;

pub(crate) fn fail<T>(kind: EvalErrorKind, message: impl Into<String>, span: Span) -> Eval<T> {
    Err(Halt::Error(EvalError::new(kind, message, span)))
}

/// One recorded choice of an enumerated execution.
#[derive(Debug, Clone)]
pub(crate) struct ChoicePoint {
    pub chosen: usize,
    pub weights: Vec<f64>,
}

#[derive(Debug)]
pub(crate) struct EnumPath {
    pub prefix: Vec<usize>,
    pub taken: Vec<ChoicePoint>,
    pub prob: f64,
}

pub(crate) enum Chooser {
    Random(ChaCha8Rng),
    Enumerate(EnumPath),
}

struct Frame {
    parent: Option<FrameId>,
    base: u32,
}

/// The stream used for attempt `attempt` of a run seeded with `seed`.
pub fn attempt_rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    rng
}

pub struct Trace<'p> {
    program: &'p CompiledProgram,
    frames: Vec<Frame>,
    slots: Vec<Option<Value>>,
    memo: HashMap<(u32, String), Value>,
    next_memo: u32,
    pub(crate) chooser: Chooser,
    rejected: bool,
    depth: u32,
}

impl<'p> Trace<'p> {
    /// A trace drawing its random choices from the stream for
    /// (`seed`, `attempt`).
    pub fn new(program: &'p CompiledProgram, seed: u64, attempt: u64) -> Self {
        Self::with_chooser(program, Chooser::Random(attempt_rng(seed, attempt)))
    }

    pub(crate) fn with_chooser(program: &'p CompiledProgram, chooser: Chooser) -> Self {
        Trace {
            program,
            frames: vec![Frame { parent: None, base: 0 }],
            slots: vec![None; program.n_slots as usize],
            memo: HashMap::new(),
            next_memo: 0,
            chooser,
            rejected: false,
            depth: 0,
        }
    }

    pub fn is_rejected(&self) -> bool {
        self.rejected
    }

    /// Evaluate the top-level statements. `Ok(false)` when a top-level
    /// `condition` rejected the trace.
    pub fn run_top_level(&mut self) -> Result<bool, EvalError> {
        finish(self.top_level()).map(|o| o.is_some())
    }

    /// Value bound to a top-level name, if it has been evaluated.
    pub fn global(&self, name: &str) -> Option<&Value> {
        let slot = *self.program.globals.get(name)?;
        self.slots[slot as usize].as_ref()
    }

    /// Apply `f` to `args`. `Ok(None)` when a `condition` inside rejected the
    /// trace.
    pub fn call(&mut self, f: &Value, args: Vec<Value>) -> Result<Option<Value>, EvalError> {
        if self.rejected {
            return Ok(None);
        }
        finish(self.call_value(f, args, Span::default()))
    }

    /// Run the top level and then the model. `Ok(None)` for a rejected trace.
    pub fn run_model(&mut self) -> Result<Option<Value>, EvalError> {
        finish(self.model_raw())
    }

    pub(crate) fn top_level(&mut self) -> Eval<()> {
        let program = self.program;
        for stmt in &program.top {
            self.exec(stmt, 0)?;
        }
        Ok(())
    }

    pub(crate) fn model_raw(&mut self) -> Eval<Value> {
        self.top_level()?;
        let model = self.slots[self.program.model_slot as usize].clone();
        match model {
            Some(f @ Value::Func(_)) => self.call_value(&f, Vec::new(), Span::default()),
            Some(other) => fail(
                EvalErrorKind::Type,
                format!("`{}` must be a function, found {}", self.program.model_name, other.type_name()),
                Span::default(),
            ),
            None => fail(
                EvalErrorKind::UnboundIdentifier,
                format!("`{}` is never defined", self.program.model_name),
                Span::default(),
            ),
        }
    }

    // ---- random choices -------------------------------------------------

    pub(crate) fn flip(&mut self, p: f64) -> bool {
        match &mut self.chooser {
            Chooser::Random(rng) => rng.random::<f64>() < p,
            Chooser::Enumerate(_) => self.choose(&[p, 1.0 - p]) == 0,
        }
    }

    /// Index drawn with probability proportional to `weights` (non-negative,
    /// positive sum).
    pub(crate) fn discrete(&mut self, weights: &[f64]) -> usize {
        match &mut self.chooser {
            Chooser::Random(rng) => {
                let total: f64 = weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut last = 0;
                for (i, &w) in weights.iter().enumerate() {
                    if w > 0.0 {
                        if u < w {
                            return i;
                        }
                        u -= w;
                        last = i;
                    }
                }
                last
            }
            Chooser::Enumerate(_) => self.choose(weights),
        }
    }

    /// The generator for a continuous draw; fails while enumerating.
    pub(crate) fn continuous(&mut self, primitive: &'static str, span: Span) -> Eval<&mut ChaCha8Rng> {
        match &mut self.chooser {
            Chooser::Random(rng) => Ok(rng),
            Chooser::Enumerate(_) => Err(Halt::Continuous { primitive, span }),
        }
    }

    fn choose(&mut self, weights: &[f64]) -> usize {
        let Chooser::Enumerate(path) = &mut self.chooser else {
            unreachable!("choose is only used while enumerating")
        };
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let pos = path.taken.len();
        let chosen = match path.prefix.get(pos) {
            Some(&i) => i,
            None => weights.iter().position(|&w| w > 0.0).expect("positive total weight"),
        };
        path.prob *= weights[chosen];
        path.taken.push(ChoicePoint { chosen, weights });
        chosen
    }

    // ---- evaluation -----------------------------------------------------

    fn lookup(&self, frame: FrameId, depth: u32, slot: u32) -> Option<&Value> {
        let mut f = frame;
        for _ in 0..depth {
            f = self.frames[f as usize].parent.expect("resolved depth within frame chain");
        }
        let base = self.frames[f as usize].base;
        self.slots[(base + slot) as usize].as_ref()
    }

    fn set(&mut self, frame: FrameId, slot: u32, v: Value) {
        let base = self.frames[frame as usize].base;
        self.slots[(base + slot) as usize] = Some(v);
    }

    /// Execute a statement; `Some` carries a `return` value.
    fn exec(&mut self, stmt: &StmtIr, frame: FrameId) -> Eval<Option<Value>> {
        match stmt {
            StmtIr::Var { slot, init } => {
                let v = self.eval(init, frame)?;
                self.set(frame, *slot, v);
                Ok(None)
            }
            StmtIr::Expr(e) => {
                self.eval(e, frame)?;
                Ok(None)
            }
            StmtIr::Return(v) => Ok(Some(match v {
                Some(e) => self.eval(e, frame)?,
                None => Value::Undefined,
            })),
            StmtIr::If { test, then, otherwise } => {
                let branch = if self.eval_bool(test, frame, "`if` condition")? {
                    then
                } else {
                    otherwise
                };
                self.exec_block(branch, frame)
            }
        }
    }

    fn exec_block(&mut self, body: &[StmtIr], frame: FrameId) -> Eval<Option<Value>> {
        for s in body {
            if let Some(v) = self.exec(s, frame)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    fn eval_bool(&mut self, node: &Node, frame: FrameId, what: &str) -> Eval<bool> {
        match self.eval(node, frame)? {
            Value::Bool(b) => Ok(b),
            other => fail(
                EvalErrorKind::Type,
                format!("{what} must be a boolean, found {}", other.type_name()),
                node.span,
            ),
        }
    }

    pub(crate) fn eval(&mut self, node: &Node, frame: FrameId) -> Eval<Value> {
        let span = node.span;
        match &node.kind {
            NodeKind::Const(v) => Ok(v.clone()),
            NodeKind::Local { depth, slot, name } => match self.lookup(frame, *depth, *slot) {
                Some(v) => Ok(v.clone()),
                None => fail(
                    EvalErrorKind::UnboundIdentifier,
                    format!("`{name}` is used before its definition"),
                    span,
                ),
            },
            NodeKind::Builtin(b) => Ok(Value::Func(Callable::Builtin(*b))),
            NodeKind::Unbound(name) => fail(
                EvalErrorKind::UnboundIdentifier,
                format!("unbound identifier `{name}`"),
                span,
            ),
            NodeKind::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for i in items {
                    out.push(self.eval(i, frame)?);
                }
                Ok(Value::list(out))
            }
            NodeKind::Record(fields) => {
                let mut out = std::collections::BTreeMap::new();
                for (k, v) in fields {
                    let v = self.eval(v, frame)?;
                    out.insert(k.clone(), v);
                }
                Ok(Value::Record(Arc::new(out)))
            }
            NodeKind::Func(f) => Ok(Value::Func(Callable::Closure(Closure {
                func: f.clone(),
                env: frame,
            }))),
            NodeKind::Call { callee, args } => {
                let f = self.eval(callee, frame)?;
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame)?);
                }
                self.call_value(&f, vals, span)
            }
            NodeKind::Unary(op, operand) => {
                let v = self.eval(operand, frame)?;
                match (op, v) {
                    (UnaryOp::Neg, Value::Num(n)) => Ok(Value::Num(-n)),
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (UnaryOp::Neg, other) => fail(
                        EvalErrorKind::Type,
                        format!("cannot negate a {}", other.type_name()),
                        span,
                    ),
                    (UnaryOp::Not, other) => fail(
                        EvalErrorKind::Type,
                        format!("`!` needs a boolean, found {}", other.type_name()),
                        span,
                    ),
                }
            }
            NodeKind::Binary(op, lhs, rhs) => match op {
                BinaryOp::And => Ok(Value::Bool(
                    self.eval_bool(lhs, frame, "operand of `&&`")? && self.eval_bool(rhs, frame, "operand of `&&`")?,
                )),
                BinaryOp::Or => Ok(Value::Bool(
                    self.eval_bool(lhs, frame, "operand of `||`")? || self.eval_bool(rhs, frame, "operand of `||`")?,
                )),
                _ => {
                    let a = self.eval(lhs, frame)?;
                    let b = self.eval(rhs, frame)?;
                    binary(*op, &a, &b, span)
                }
            },
            NodeKind::Cond(test, then, otherwise) => {
                if self.eval_bool(test, frame, "conditional test")? {
                    self.eval(then, frame)
                } else {
                    self.eval(otherwise, frame)
                }
            }
            NodeKind::Mem(inner) => match self.eval(inner, frame)? {
                Value::Func(c) => {
                    let id = self.next_memo;
                    self.next_memo += 1;
                    Ok(Value::Func(Callable::Memo(Arc::new(Memo { id, inner: c }))))
                }
                other => fail(
                    EvalErrorKind::Type,
                    format!("`mem` needs a function, found {}", other.type_name()),
                    span,
                ),
            },
            NodeKind::Condition(inner) => match self.eval(inner, frame)? {
                Value::Bool(true) => Ok(Value::Undefined),
                Value::Bool(false) => {
                    self.rejected = true;
                    Err(Halt::Reject)
                }
                other => fail(
                    EvalErrorKind::NonBooleanCondition,
                    format!("`condition` needs a boolean, found {}", other.type_name()),
                    span,
                ),
            },
            NodeKind::Infer => fail(
                EvalErrorKind::Unsupported,
                "`Infer` is only supported as a top-level declaration",
                span,
            ),
        }
    }

    pub(crate) fn call_value(&mut self, f: &Value, args: Vec<Value>, span: Span) -> Eval<Value> {
        match f {
            Value::Func(c) => self.call_callable(c, args, span),
            other => fail(
                EvalErrorKind::Type,
                format!("cannot call a {}", other.type_name()),
                span,
            ),
        }
    }

    fn call_callable(&mut self, c: &Callable, args: Vec<Value>, span: Span) -> Eval<Value> {
        match c {
            Callable::Builtin(b) => b.call(self, args, span),
            Callable::Closure(cl) => self.call_closure(cl, args, span),
            Callable::Memo(m) => {
                let mut key = String::new();
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        key.push('|');
                    }
                    if !a.write_key(&mut key) {
                        return fail(
                            EvalErrorKind::Type,
                            "memoized functions cannot take function arguments",
                            span,
                        );
                    }
                }
                let key = (m.id, key);
                if let Some(v) = self.memo.get(&key) {
                    return Ok(v.clone());
                }
                let v = self.call_callable(&m.inner, args, span)?;
                self.memo.insert(key, v.clone());
                Ok(v)
            }
        }
    }

    fn call_closure(&mut self, cl: &Closure, args: Vec<Value>, span: Span) -> Eval<Value> {
        if self.depth >= MAX_CALL_DEPTH {
            return fail(
                EvalErrorKind::RecursionLimit,
                format!("call depth exceeded {MAX_CALL_DEPTH}"),
                span,
            );
        }
        let func: &FuncIr = &cl.func;
        let base = self.slots.len() as u32;
        self.slots.resize(self.slots.len() + func.n_slots as usize, None);
        let frame = self.frames.len() as FrameId;
        self.frames.push(Frame {
            parent: Some(cl.env),
            base,
        });
        match &func.params {
            ParamsIr::Positional(n) => {
                if args.len() != *n as usize {
                    return fail(
                        EvalErrorKind::Arity,
                        format!("function defined at {} takes {n} argument(s), got {}", func.span, args.len()),
                        span,
                    );
                }
                for (i, a) in args.into_iter().enumerate() {
                    self.slots[base as usize + i] = Some(a);
                }
            }
            ParamsIr::Record(names) => {
                let rec = match args.as_slice() {
                    [Value::Record(r)] => r.clone(),
                    _ => {
                        return fail(
                            EvalErrorKind::Arity,
                            format!(
                                "function defined at {} takes a single record argument, got {} argument(s)",
                                func.span,
                                args.len()
                            ),
                            span,
                        )
                    }
                };
                for (i, name) in names.iter().enumerate() {
                    self.slots[base as usize + i] = Some(rec.get(name).cloned().unwrap_or(Value::Undefined));
                }
            }
        }
        self.depth += 1;
        let result = self.exec_block(&func.body, frame);
        self.depth -= 1;
        Ok(result?.unwrap_or(Value::Undefined))
    }
}

/// Map an internal halt to the public contract: rejection is `Ok(None)`.
fn finish<T>(r: Eval<T>) -> Result<Option<T>, EvalError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Halt::Reject) => Ok(None),
        Err(Halt::Error(e)) => Err(e),
        Err(Halt::Continuous { primitive, span }) => Err(EvalError::new(
            EvalErrorKind::Unsupported,
            format!("continuous primitive `{primitive}` while enumerating"),
            span,
        )),
    }
}

pub(crate) fn finite(n: f64, what: &str, span: Span) -> Eval<Value> {
    if n.is_finite() {
        Ok(Value::Num(n))
    } else {
        fail(EvalErrorKind::NonFinite, format!("{what} produced {n}"), span)
    }
}

fn binary(op: BinaryOp, a: &Value, b: &Value, span: Span) -> Eval<Value> {
    use Value::{Num, Str};
    match (op, a, b) {
        (BinaryOp::Eq | BinaryOp::Ne, _, _) => match a.structural_eq(b) {
            Some(eq) => Ok(Value::Bool(eq == (op == BinaryOp::Eq))),
            None => fail(
                EvalErrorKind::Type,
                format!("cannot compare {} with {}", a.type_name(), b.type_name()),
                span,
            ),
        },
        (BinaryOp::Add, Num(x), Num(y)) => finite(x + y, "`+`", span),
        (BinaryOp::Add, Str(x), Str(y)) => Ok(Value::str(&format!("{x}{y}"))),
        (BinaryOp::Add, Str(x), Num(y)) => Ok(Value::str(&format!("{x}{y}"))),
        (BinaryOp::Add, Num(x), Str(y)) => Ok(Value::str(&format!("{x}{y}"))),
        (BinaryOp::Sub, Num(x), Num(y)) => finite(x - y, "`-`", span),
        (BinaryOp::Mul, Num(x), Num(y)) => finite(x * y, "`*`", span),
        (BinaryOp::Div, Num(x), Num(y)) => finite(x / y, "`/`", span),
        (BinaryOp::Rem, Num(x), Num(y)) => finite(x % y, "`%`", span),
        (BinaryOp::Lt, Num(x), Num(y)) => Ok(Value::Bool(x < y)),
        (BinaryOp::Le, Num(x), Num(y)) => Ok(Value::Bool(x <= y)),
        (BinaryOp::Gt, Num(x), Num(y)) => Ok(Value::Bool(x > y)),
        (BinaryOp::Ge, Num(x), Num(y)) => Ok(Value::Bool(x >= y)),
        (BinaryOp::Lt, Str(x), Str(y)) => Ok(Value::Bool(x < y)),
        (BinaryOp::Le, Str(x), Str(y)) => Ok(Value::Bool(x <= y)),
        (BinaryOp::Gt, Str(x), Str(y)) => Ok(Value::Bool(x > y)),
        (BinaryOp::Ge, Str(x), Str(y)) => Ok(Value::Bool(x >= y)),
        _ => fail(
            EvalErrorKind::Type,
            format!(
                "operator `{}` is not defined for {} and {}",
                op.symbol(),
                a.type_name(),
                b.type_name()
            ),
            span,
        ),
    }
}
