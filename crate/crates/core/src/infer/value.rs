use std::collections::BTreeMap;
use std::fmt::{self, Write};
use std::sync::Arc;

use super::compile::FuncIr;
use super::stdlib::Builtin;

/// Index of an activation frame in a trace's frame arena.
pub(crate) type FrameId = u32;

/// A runtime value. Numbers are always finite.
///
/// `Undefined` is what a function yields when control falls off its end; it
/// is an error to compute with it.
#[derive(Clone, Debug)]
pub enum Value {
    Num(f64),
    Bool(bool),
    Str(Arc<str>),
    List(Arc<Vec<Value>>),
    Record(Arc<BTreeMap<String, Value>>),
    Func(Callable),
    Undefined,
}

#[derive(Clone, Debug)]
pub enum Callable {
    Closure(Closure),
    Builtin(Builtin),
    Memo(Arc<Memo>),
}

/// A function literal paired with the frame it was created in. Closures are
/// only meaningful inside the trace that created them.
#[derive(Clone, Debug)]
pub struct Closure {
    pub(crate) func: Arc<FuncIr>,
    pub(crate) env: FrameId,
}

#[derive(Debug)]
pub struct Memo {
    pub(crate) id: u32,
    pub(crate) inner: Callable,
}

impl Value {
    pub fn num(n: f64) -> Value {
        Value::Num(n)
    }

    pub fn str(s: &str) -> Value {
        Value::Str(Arc::from(s))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Arc::new(items))
    }

    pub fn record<K: Into<String>>(fields: impl IntoIterator<Item = (K, Value)>) -> Value {
        Value::Record(Arc::new(fields.into_iter().map(|(k, v)| (k.into(), v)).collect()))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Record(_) => "record",
            Value::Func(_) => "function",
            Value::Undefined => "undefined",
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Numeric reading of a query result: numbers as-is, booleans as 1/0.
    pub fn as_query_number(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    /// Structural equality. `None` when either side contains a function or
    /// `undefined`, which have no meaningful equality.
    pub fn structural_eq(&self, other: &Value) -> Option<bool> {
        Some(match (self, other) {
            (Value::Func(_), _) | (_, Value::Func(_)) => return None,
            (Value::Undefined, _) | (_, Value::Undefined) => return None,
            (Value::Num(a), Value::Num(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::List(a), Value::List(b)) => {
                if a.len() != b.len() {
                    return Some(false);
                }
                for (x, y) in a.iter().zip(b.iter()) {
                    if !x.structural_eq(y)? {
                        return Some(false);
                    }
                }
                true
            }
            (Value::Record(a), Value::Record(b)) => {
                if a.len() != b.len() {
                    return Some(false);
                }
                for ((ka, va), (kb, vb)) in a.iter().zip(b.iter()) {
                    if ka != kb || !va.structural_eq(vb)? {
                        return Some(false);
                    }
                }
                true
            }
            _ => false,
        })
    }

    /// Canonical text encoding: type-tagged, record keys sorted, numbers in
    /// shortest round-trip form with `-0` folded into `0`. Two values get the
    /// same key iff they are structurally equal. `None` for functions.
    pub fn canonical_key(&self) -> Option<String> {
        let mut out = String::new();
        self.write_key(&mut out).then_some(out)
    }

    pub(crate) fn write_key(&self, out: &mut String) -> bool {
        match self {
            Value::Num(n) => {
                let n = if *n == 0.0 { 0.0 } else { *n };
                let _ = write!(out, "n{n}");
            }
            Value::Bool(b) => out.push_str(if *b { "T" } else { "F" }),
            Value::Str(s) => {
                let _ = write!(out, "s{s:?}");
            }
            Value::List(items) => {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    if !v.write_key(out) {
                        return false;
                    }
                }
                out.push(']');
            }
            Value::Record(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    let _ = write!(out, "{k:?}:");
                    if !v.write_key(out) {
                        return false;
                    }
                }
                out.push('}');
            }
            Value::Undefined => out.push('U'),
            Value::Func(_) => return false,
        }
        true
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "'{s}'"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Record(fields) => {
                f.write_str("{")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("}")
            }
            Value::Func(_) => f.write_str("<function>"),
            Value::Undefined => f.write_str("undefined"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_key_order_is_irrelevant() {
        let a = Value::record([("a", Value::num(1.0)), ("b", Value::num(2.0))]);
        let b = Value::record([("b", Value::num(2.0)), ("a", Value::num(1.0))]);
        assert_eq!(a.canonical_key(), b.canonical_key());
        assert_eq!(a.structural_eq(&b), Some(true));
    }

    #[test]
    fn key_table() {
        let cases = [
            (Value::num(1.0), "n1"),
            (Value::num(-0.0), "n0"),
            (Value::num(0.1), "n0.1"),
            (Value::Bool(true), "T"),
            (Value::str("kay"), "s\"kay\""),
            (Value::list(vec![Value::num(1.0), Value::str("1")]), "[n1,s\"1\"]"),
            (Value::record([("athlete", Value::str("kay"))]), "{\"athlete\":s\"kay\"}"),
        ];
        for (v, key) in cases {
            assert_eq!(v.canonical_key().unwrap(), key);
        }
    }

    #[test]
    fn type_tags_separate_lookalikes() {
        assert_ne!(Value::num(1.0).canonical_key(), Value::str("1").canonical_key());
        assert_ne!(Value::Bool(true).canonical_key(), Value::num(1.0).canonical_key());
        assert_ne!(
            Value::str("a,b").canonical_key(),
            Value::list(vec![Value::str("a"), Value::str("b")]).canonical_key()
        );
    }
}
