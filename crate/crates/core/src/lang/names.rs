//! Name resolution helpers that work on the syntax tree alone.

use std::collections::{BTreeSet, HashSet};

use super::ast::*;

/// Names bound by the standard library, including the special forms.
pub const STDLIB_NAMES: &[&str] = &[
    "flip",
    "gaussian",
    "uniform",
    "beta",
    "categorical",
    "uniformDraw",
    "mem",
    "condition",
    "Infer",
    "map",
    "filter",
    "reduce",
    "sum",
    "mean",
    "length",
    "any",
    "all",
    "indexOf",
    "min",
    "max",
    "abs",
    "floor",
    "round",
    "exp",
    "log",
    "normalCDF",
    "any_previous_time_inclusive",
    "any_previous_time_exclusive",
];

pub fn is_stdlib(name: &str) -> bool {
    STDLIB_NAMES.contains(&name)
}

/// Identifiers used as call targets in `exprs` that are bound neither by a
/// top-level declaration of `defs`, by an enclosing function, nor by the
/// standard library. Sorted and deduplicated.
pub fn free_functions(exprs: &[Expr], defs: &Program) -> Vec<String> {
    let mut scope: Vec<HashSet<String>> = vec![defs.declarations().map(|(n, _)| n.to_string()).collect()];
    let mut found = BTreeSet::new();
    for e in exprs {
        walk_expr(e, &mut scope, &mut found);
    }
    found.into_iter().collect()
}

/// Unbound call targets anywhere in a program, including function bodies.
pub fn free_functions_in_program(program: &Program) -> Vec<String> {
    let mut scope: Vec<HashSet<String>> = vec![program.declarations().map(|(n, _)| n.to_string()).collect()];
    let mut found = BTreeSet::new();
    walk_stmts(&program.body, &mut scope, &mut found);
    found.into_iter().collect()
}

fn bound(name: &str, scope: &[HashSet<String>]) -> bool {
    is_stdlib(name) || scope.iter().any(|s| s.contains(name))
}

/// `var` declarations are hoisted to the enclosing function body.
fn hoisted(body: &[Stmt], into: &mut HashSet<String>) {
    for s in body {
        match s {
            Stmt::Var { name, .. } => {
                into.insert(name.clone());
            }
            Stmt::If { then, otherwise, .. } => {
                hoisted(then, into);
                match otherwise {
                    Some(Else::Block(b)) => hoisted(b, into),
                    Some(Else::If(s)) => hoisted(std::slice::from_ref(s.as_ref()), into),
                    None => {}
                }
            }
            _ => {}
        }
    }
}

fn walk_stmts(body: &[Stmt], scope: &mut Vec<HashSet<String>>, found: &mut BTreeSet<String>) {
    for s in body {
        match s {
            Stmt::Var { init, .. } => walk_expr(init, scope, found),
            Stmt::Expr { expr, .. } => walk_expr(expr, scope, found),
            Stmt::Return { value, .. } => {
                if let Some(v) = value {
                    walk_expr(v, scope, found);
                }
            }
            Stmt::If {
                test,
                then,
                otherwise,
                ..
            } => {
                walk_expr(test, scope, found);
                walk_stmts(then, scope, found);
                match otherwise {
                    Some(Else::Block(b)) => walk_stmts(b, scope, found),
                    Some(Else::If(s)) => walk_stmts(std::slice::from_ref(s.as_ref()), scope, found),
                    None => {}
                }
            }
        }
    }
}

fn walk_expr(e: &Expr, scope: &mut Vec<HashSet<String>>, found: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::Number(_) | ExprKind::Bool(_) | ExprKind::Str(_) | ExprKind::Ident(_) => {}
        ExprKind::List(items) => items.iter().for_each(|i| walk_expr(i, scope, found)),
        ExprKind::Record(fields) | ExprKind::Infer(fields) => {
            fields.iter().for_each(|f| walk_expr(&f.value, scope, found))
        }
        ExprKind::Function(f) => {
            let mut local: HashSet<String> = f.params.names().map(str::to_owned).collect();
            hoisted(&f.body, &mut local);
            scope.push(local);
            walk_stmts(&f.body, scope, found);
            scope.pop();
        }
        ExprKind::Call { callee, args } => {
            if let Some(name) = callee.as_ident() {
                if !bound(name, scope) {
                    found.insert(name.to_string());
                }
            } else {
                walk_expr(callee, scope, found);
            }
            args.iter().for_each(|a| walk_expr(a, scope, found));
        }
        ExprKind::Unary { operand, .. } => walk_expr(operand, scope, found),
        ExprKind::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, scope, found);
            walk_expr(rhs, scope, found);
        }
        ExprKind::Conditional {
            test,
            then,
            otherwise,
        } => {
            walk_expr(test, scope, found);
            walk_expr(then, scope, found);
            walk_expr(otherwise, scope, found);
        }
        ExprKind::Mem(inner) | ExprKind::Condition(inner) => walk_expr(inner, scope, found),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_expression, parse_source};
    use super::*;

    #[test]
    fn single_unresolved_name() {
        let defs = parse_source("var lost = function(x) { return true };").unwrap();
        let e = parse_expression("condition(beat({team1: ['a'], team2: ['b'], match: 1}))").unwrap();
        assert_eq!(free_functions(&[e], &defs), ["beat"]);
    }

    #[test]
    fn vacuous() {
        let defs = parse_source("var x = 1;").unwrap();
        assert!(free_functions(&[], &defs).is_empty());
    }

    #[test]
    fn locals_and_params_are_bound() {
        let defs = parse_source("").unwrap();
        let e = parse_expression("map(function(g) { var h = function() { return 1 }; return g(h()) }, xs)").unwrap();
        assert!(free_functions(&[e], &defs).is_empty());
    }

    #[test]
    fn program_walk_sorts_and_dedups() {
        let p = parse_source("var m = function() { return zeta(1) + alpha(2) + zeta(3) + flip(0.5) };").unwrap();
        assert_eq!(free_functions_in_program(&p), ["alpha", "zeta"]);
    }
}
