//! Canonical pretty-printer. Output re-parses to an AST equal to the input
//! (spans aside). Blocks indent by two spaces; strings use single quotes.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "  ";

// Expression levels, loosest first. Binary operators sit at their
// precedence (1..=6).
const LEVEL_TERNARY: u8 = 0;
const LEVEL_UNARY: u8 = 7;
const LEVEL_POSTFIX: u8 = 8;

pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for stmt in &program.body {
        print_stmt(&mut out, stmt, 0);
    }
    out
}

pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, LEVEL_TERNARY, 0);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn print_stmt(out: &mut String, stmt: &Stmt, depth: usize) {
    indent(out, depth);
    print_stmt_inline(out, stmt, depth);
    out.push('\n');
}

/// Statement text without leading indentation or trailing newline.
fn print_stmt_inline(out: &mut String, stmt: &Stmt, depth: usize) {
    match stmt {
        Stmt::Var { name, init, .. } => {
            let _ = write!(out, "var {name} = ");
            write_expr(out, init, LEVEL_TERNARY, depth);
            out.push(';');
        }
        Stmt::Expr { expr, .. } => {
            write_expr(out, expr, LEVEL_TERNARY, depth);
            out.push(';');
        }
        Stmt::Return { value, .. } => {
            out.push_str("return");
            if let Some(v) = value {
                out.push(' ');
                write_expr(out, v, LEVEL_TERNARY, depth);
            }
            out.push(';');
        }
        Stmt::If {
            test,
            then,
            otherwise,
            ..
        } => {
            out.push_str("if (");
            write_expr(out, test, LEVEL_TERNARY, depth);
            out.push_str(") ");
            write_block(out, then, depth);
            match otherwise {
                None => {}
                Some(Else::Block(b)) => {
                    out.push_str(" else ");
                    write_block(out, b, depth);
                }
                Some(Else::If(s)) => {
                    out.push_str(" else ");
                    print_stmt_inline(out, s, depth);
                }
            }
        }
    }
}

fn write_block(out: &mut String, body: &[Stmt], depth: usize) {
    if body.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push_str("{\n");
    for s in body {
        print_stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn level(expr: &Expr) -> u8 {
    match &expr.kind {
        ExprKind::Conditional { .. } => LEVEL_TERNARY,
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => LEVEL_UNARY,
        ExprKind::Call { .. } | ExprKind::Mem(_) | ExprKind::Condition(_) | ExprKind::Infer(_) => {
            LEVEL_POSTFIX
        }
        _ => u8::MAX,
    }
}

fn write_expr(out: &mut String, expr: &Expr, min_level: u8, depth: usize) {
    if level(expr) < min_level {
        out.push('(');
        write_expr(out, expr, LEVEL_TERNARY, depth);
        out.push(')');
        return;
    }
    match &expr.kind {
        ExprKind::Number(n) => write_number(out, *n),
        ExprKind::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        ExprKind::Str(s) => write_string(out, s),
        ExprKind::Ident(name) => out.push_str(name),
        ExprKind::List(items) => {
            out.push('[');
            write_list(out, items, depth);
            out.push(']');
        }
        ExprKind::Record(fields) => write_record(out, fields, depth),
        ExprKind::Function(f) => write_function(out, f, depth),
        ExprKind::Call { callee, args } => {
            write_expr(out, callee, LEVEL_POSTFIX, depth);
            out.push('(');
            write_list(out, args, depth);
            out.push(')');
        }
        ExprKind::Mem(inner) => write_form(out, "mem", inner, depth),
        ExprKind::Condition(inner) => write_form(out, "condition", inner, depth),
        ExprKind::Infer(fields) => {
            out.push_str("Infer(");
            write_record(out, fields, depth);
            out.push(')');
        }
        ExprKind::Unary { op, operand } => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            });
            write_expr(out, operand, LEVEL_UNARY, depth);
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            write_expr(out, lhs, p, depth);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, p + 1, depth);
        }
        ExprKind::Conditional {
            test,
            then,
            otherwise,
        } => {
            write_expr(out, test, LEVEL_TERNARY + 1, depth);
            out.push_str(" ? ");
            write_expr(out, then, LEVEL_TERNARY, depth);
            out.push_str(" : ");
            write_expr(out, otherwise, LEVEL_TERNARY, depth);
        }
    }
}

fn write_form(out: &mut String, name: &str, inner: &Expr, depth: usize) {
    out.push_str(name);
    out.push('(');
    write_expr(out, inner, LEVEL_TERNARY, depth);
    out.push(')');
}

fn write_list(out: &mut String, items: &[Expr], depth: usize) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, item, LEVEL_TERNARY, depth);
    }
}

fn write_record(out: &mut String, fields: &[Field], depth: usize) {
    if fields.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push('{');
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if is_identifier(&f.key) {
            out.push_str(&f.key);
        } else {
            write_string(out, &f.key);
        }
        out.push_str(": ");
        write_expr(out, &f.value, LEVEL_TERNARY, depth);
    }
    out.push('}');
}

fn write_function(out: &mut String, f: &Function, depth: usize) {
    out.push_str("function(");
    match &f.params {
        Params::Positional(ps) => {
            out.push_str(&ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", "));
        }
        Params::Record(ps) => {
            out.push('{');
            out.push_str(&ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", "));
            out.push('}');
        }
    }
    out.push_str(") ");
    write_block(out, &f.body, depth);
}

/// Shortest round-trip decimal form. Literals are finite and non-negative.
fn write_number(out: &mut String, n: f64) {
    debug_assert!(n.is_finite());
    let _ = write!(out, "{n}");
}

fn write_string(out: &mut String, s: &str) {
    out.push('\'');
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            c => out.push(c),
        }
    }
    out.push('\'');
}

const KEYWORDS: [&str; 9] = ["var", "let", "const", "function", "return", "if", "else", "true", "false"];

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first == '_' || first == '$' || first.is_alphabetic())
        && chars.all(|c| c == '_' || c == '$' || c.is_alphanumeric())
        && !KEYWORDS.contains(&s)
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_source;
    use super::*;

    #[test]
    fn golden_layout() {
        let src = "var f = mem(function({athlete}) { if (flip(0.5)) { return 1 } else { return -x * (2 + 3) } });\nvar p = Infer({model: model, method: 'rejection'})";
        let printed = print_program(&parse_source(src).unwrap());
        let expected = "var f = mem(function({athlete}) {\n  if (flip(0.5)) {\n    return 1;\n  } else {\n    return -x * (2 + 3);\n  }\n});\nvar p = Infer({model: model, method: 'rejection'});\n";
        assert_eq!(printed, expected);
    }

    #[test]
    fn quotes_and_keys() {
        let src = "var r = {'odd key': 'it\\'s', plain: \"x\"};";
        let printed = print_program(&parse_source(src).unwrap());
        assert_eq!(printed, "var r = {'odd key': 'it\\'s', plain: 'x'};\n");
    }

    #[test]
    fn nested_unary_and_ternary() {
        for src in ["var a = - -x;", "var a = (a ? b : c) ? d : e;", "var a = !(a && b);", "var a = (function() {})();"] {
            let p = parse_source(src).unwrap();
            let again = parse_source(&print_program(&p)).unwrap();
            assert_eq!(p.without_spans(), again.without_spans(), "{src}");
        }
    }
}
