//! Built-in functions.
//!
//! Distribution primitives accept their parameters positionally or as one
//! record (`gaussian(50, 15)` or `gaussian({mu: 50, sigma: 15})`).

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution, Normal};

use crate::lang::Span;

use super::error::EvalErrorKind;
use super::eval::{fail, finite, Eval, Trace};
use super::value::Value;

macro_rules! builtins {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Builtin {
            $($variant),*
        }

        impl Builtin {
            pub const ALL: &'static [Builtin] = &[$(Builtin::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Builtin::$variant => $name),*
                }
            }

            pub fn from_name(name: &str) -> Option<Builtin> {
                match name {
                    $($name => Some(Builtin::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

builtins! {
    Flip => "flip",
    Gaussian => "gaussian",
    Uniform => "uniform",
    Beta => "beta",
    Categorical => "categorical",
    UniformDraw => "uniformDraw",
    Map => "map",
    Filter => "filter",
    Reduce => "reduce",
    Sum => "sum",
    Mean => "mean",
    Length => "length",
    Any => "any",
    All => "all",
    IndexOf => "indexOf",
    Min => "min",
    Max => "max",
    Abs => "abs",
    Floor => "floor",
    Round => "round",
    Exp => "exp",
    Log => "log",
    NormalCdf => "normalCDF",
    AnyPreviousInclusive => "any_previous_time_inclusive",
    AnyPreviousExclusive => "any_previous_time_exclusive",
}

/// Standard normal CDF, or the CDF of N(mu, sigma) when both are given.
pub fn normal_cdf(x: f64, mu: f64, sigma: f64) -> f64 {
    0.5 * libm::erfc(-(x - mu) / (sigma * std::f64::consts::SQRT_2))
}

struct Args<'a> {
    name: &'static str,
    values: &'a [Value],
    span: Span,
}

impl<'a> Args<'a> {
    fn arity(&self, allowed: &[usize]) -> Eval<()> {
        if allowed.contains(&self.values.len()) {
            return Ok(());
        }
        let want = allowed.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" or ");
        fail(
            EvalErrorKind::Arity,
            format!("`{}` takes {want} argument(s), got {}", self.name, self.values.len()),
            self.span,
        )
    }

    fn type_error<T>(&self, what: &str, got: &Value) -> Eval<T> {
        fail(
            EvalErrorKind::Type,
            format!("`{}` expects {what}, found {}", self.name, got.type_name()),
            self.span,
        )
    }

    fn domain<T>(&self, message: String) -> Eval<T> {
        fail(EvalErrorKind::Domain, format!("`{}`: {message}", self.name), self.span)
    }

    fn num(&self, i: usize) -> Eval<f64> {
        num_of(self, &self.values[i])
    }

    fn list(&self, i: usize) -> Eval<&'a Arc<Vec<Value>>> {
        match &self.values[i] {
            Value::List(l) => Ok(l),
            other => self.type_error("a list", other),
        }
    }

    /// Parameters given positionally or as a single record with `keys`.
    fn params(&self, keys: &[&str]) -> Eval<Vec<f64>> {
        if let [Value::Record(r)] = self.values {
            if keys.len() != 1 || r.contains_key(keys[0]) {
                return keys
                    .iter()
                    .map(|k| match r.get(*k) {
                        Some(v) => num_of(self, v),
                        None => self.domain(format!("missing parameter `{k}`")),
                    })
                    .collect();
            }
        }
        self.arity(&[keys.len()])?;
        (0..keys.len()).map(|i| self.num(i)).collect()
    }
}

fn num_of(args: &Args, v: &Value) -> Eval<f64> {
    match v {
        Value::Num(n) => Ok(*n),
        other => args.type_error("a number", other),
    }
}

fn predicate(t: &mut Trace, args: &Args, f: &Value, x: Value) -> Eval<bool> {
    match t.call_value(f, vec![x], args.span)? {
        Value::Bool(b) => Ok(b),
        other => args.type_error("a predicate returning a boolean", &other),
    }
}

/// Numbers from either a single list argument or the arguments themselves.
fn numbers(args: &Args) -> Eval<Vec<f64>> {
    let items: &[Value] = match args.values {
        [Value::List(l)] => l,
        vs => vs,
    };
    items.iter().map(|v| num_of(args, v)).collect()
}

impl Builtin {
    pub(crate) fn call(self, t: &mut Trace, values: Vec<Value>, span: Span) -> Eval<Value> {
        let args = Args {
            name: self.name(),
            values: &values,
            span,
        };
        match self {
            Builtin::Flip => {
                let p = match args.values {
                    [] => 0.5,
                    _ => args.params(&["p"])?[0],
                };
                if !(0.0..=1.0).contains(&p) {
                    return args.domain(format!("probability {p} outside [0, 1]"));
                }
                Ok(Value::Bool(t.flip(p)))
            }
            Builtin::Gaussian => {
                let p = args.params(&["mu", "sigma"])?;
                let (mu, sigma) = (p[0], p[1]);
                if sigma <= 0.0 {
                    return args.domain(format!("standard deviation {sigma} must be positive"));
                }
                let normal = Normal::new(mu, sigma).expect("validated parameters");
                let x = normal.sample(t.continuous("gaussian", span)?);
                finite(x, "gaussian", span)
            }
            Builtin::Uniform => {
                let p = args.params(&["a", "b"])?;
                let (lo, hi) = (p[0], p[1]);
                if lo >= hi {
                    return args.domain(format!("empty interval [{lo}, {hi})"));
                }
                let x = t.continuous("uniform", span)?.random_range(lo..hi);
                Ok(Value::Num(x))
            }
            Builtin::Beta => {
                let p = args.params(&["a", "b"])?;
                if p[0] <= 0.0 || p[1] <= 0.0 {
                    return args.domain(format!("shape parameters ({}, {}) must be positive", p[0], p[1]));
                }
                let beta = Beta::new(p[0], p[1]).expect("validated parameters");
                let x = beta.sample(t.continuous("beta", span)?);
                Ok(Value::Num(x))
            }
            Builtin::Categorical => {
                let (ps, vs) = match args.values {
                    [Value::Record(r)] => (
                        r.get("ps").cloned().unwrap_or(Value::Undefined),
                        r.get("vs").cloned(),
                    ),
                    [ps, vs] => (ps.clone(), Some(vs.clone())),
                    [ps] => (ps.clone(), None),
                    _ => return args.arity(&[1, 2]).map(|_| Value::Undefined),
                };
                let Value::List(ps) = &ps else {
                    return args.type_error("`ps` to be a list", &ps);
                };
                let weights = ps.iter().map(|v| num_of(&args, v)).collect::<Eval<Vec<f64>>>()?;
                if weights.iter().any(|&w| w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
                    return args.domain("weights must be non-negative with a positive sum".into());
                }
                let vs = match vs {
                    Some(Value::List(vs)) => {
                        if vs.len() != weights.len() {
                            return args.domain(format!("{} weights for {} values", weights.len(), vs.len()));
                        }
                        Some(vs)
                    }
                    Some(other) => return args.type_error("`vs` to be a list", &other),
                    None => None,
                };
                let i = t.discrete(&weights);
                Ok(match vs {
                    Some(vs) => vs[i].clone(),
                    None => Value::Num(i as f64),
                })
            }
            Builtin::UniformDraw => {
                args.arity(&[1])?;
                let items = args.list(0)?;
                if items.is_empty() {
                    return args.domain("cannot draw from an empty list".into());
                }
                let i = t.discrete(&vec![1.0; items.len()]);
                Ok(items[i].clone())
            }
            Builtin::Map => {
                args.arity(&[2])?;
                let items = args.list(1)?;
                let mut out = Vec::with_capacity(items.len());
                for x in items.iter() {
                    out.push(t.call_value(&values[0], vec![x.clone()], span)?);
                }
                Ok(Value::list(out))
            }
            Builtin::Filter => {
                args.arity(&[2])?;
                let items = args.list(1)?;
                let mut out = Vec::new();
                for x in items.iter() {
                    if predicate(t, &args, &values[0], x.clone())? {
                        out.push(x.clone());
                    }
                }
                Ok(Value::list(out))
            }
            Builtin::Reduce => {
                // fn(item, acc), folding from the last item to the first
                args.arity(&[3])?;
                let items = args.list(2)?;
                let mut acc = values[1].clone();
                for x in items.iter().rev() {
                    acc = t.call_value(&values[0], vec![x.clone(), acc], span)?;
                }
                Ok(acc)
            }
            Builtin::Sum => {
                args.arity(&[1])?;
                let xs = numbers(&args)?;
                finite(xs.iter().sum(), "sum", span)
            }
            Builtin::Mean => {
                args.arity(&[1])?;
                let xs = numbers(&args)?;
                if xs.is_empty() {
                    return args.domain("mean of an empty list".into());
                }
                finite(xs.iter().sum::<f64>() / xs.len() as f64, "mean", span)
            }
            Builtin::Length => {
                args.arity(&[1])?;
                match &values[0] {
                    Value::List(l) => Ok(Value::Num(l.len() as f64)),
                    Value::Str(s) => Ok(Value::Num(s.chars().count() as f64)),
                    other => args.type_error("a list or string", other),
                }
            }
            Builtin::Any | Builtin::All => {
                args.arity(&[2])?;
                let items = args.list(1)?;
                let want = self == Builtin::Any;
                for x in items.iter() {
                    if predicate(t, &args, &values[0], x.clone())? == want {
                        return Ok(Value::Bool(want));
                    }
                }
                Ok(Value::Bool(!want))
            }
            Builtin::IndexOf => {
                // indexOf(x, list); indexOf(list, x) is accepted when only
                // the first argument is a list
                args.arity(&[2])?;
                let (needle, hay) = match (&values[0], &values[1]) {
                    (_, Value::List(l)) => (&values[0], l),
                    (Value::List(l), _) => (&values[1], l),
                    (_, other) => return args.type_error("a list", other),
                };
                for (i, x) in hay.iter().enumerate() {
                    match x.structural_eq(needle) {
                        Some(true) => return Ok(Value::Num(i as f64)),
                        Some(false) => {}
                        None => return args.type_error("comparable values", x),
                    }
                }
                Ok(Value::Num(-1.0))
            }
            Builtin::Min | Builtin::Max => {
                let xs = numbers(&args)?;
                let pick = if self == Builtin::Min { f64::min } else { f64::max };
                match xs.into_iter().reduce(pick) {
                    Some(x) => Ok(Value::Num(x)),
                    None => args.domain("needs at least one number".into()),
                }
            }
            Builtin::Abs | Builtin::Floor | Builtin::Round | Builtin::Exp | Builtin::Log => {
                args.arity(&[1])?;
                let x = args.num(0)?;
                let y = match self {
                    Builtin::Abs => x.abs(),
                    Builtin::Floor => x.floor(),
                    Builtin::Round => (x + 0.5).floor(),
                    Builtin::Exp => x.exp(),
                    _ => {
                        if x <= 0.0 {
                            return args.domain(format!("logarithm of {x}"));
                        }
                        x.ln()
                    }
                };
                finite(y, self.name(), span)
            }
            Builtin::NormalCdf => {
                args.arity(&[1, 3])?;
                let x = args.num(0)?;
                let (mu, sigma) = if values.len() == 3 {
                    (args.num(1)?, args.num(2)?)
                } else {
                    (0.0, 1.0)
                };
                if sigma <= 0.0 {
                    return args.domain(format!("standard deviation {sigma} must be positive"));
                }
                Ok(Value::Num(normal_cdf(x, mu, sigma)))
            }
            Builtin::AnyPreviousInclusive | Builtin::AnyPreviousExclusive => {
                // pred is asked about times 1, 2, ... up to t (inclusive) or t - 1
                args.arity(&[2])?;
                let t_max = args.num(1)?;
                if t_max.fract() != 0.0 {
                    return args.domain(format!("time index {t_max} is not an integer"));
                }
                let last = if self == Builtin::AnyPreviousInclusive {
                    t_max
                } else {
                    t_max - 1.0
                };
                let mut s = 1.0;
                while s <= last {
                    if predicate(t, &args, &values[0], Value::Num(s))? {
                        return Ok(Value::Bool(true));
                    }
                    s += 1.0;
                }
                Ok(Value::Bool(false))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::STDLIB_NAMES;

    #[test]
    fn every_builtin_is_a_stdlib_name() {
        for b in Builtin::ALL {
            assert!(STDLIB_NAMES.contains(&b.name()), "{}", b.name());
            assert_eq!(Builtin::from_name(b.name()), Some(*b));
        }
        // the special forms are the only stdlib names without a builtin
        let special: Vec<_> = STDLIB_NAMES
            .iter()
            .filter(|n| Builtin::from_name(n).is_none())
            .collect();
        assert_eq!(special, [&"mem", &"condition", &"Infer"]);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96, 0.0, 1.0) - 0.975_002_104_851_780).abs() < 1e-12);
        assert!((normal_cdf(65.0, 50.0, 15.0) - 0.841_344_746_068_543).abs() < 1e-12);
    }
}
