//! Recursive-descent parser.
//!
//! Precedence, loosest first: `?:`, `||`, `&&`, `== !=`, `< <= > >=`,
//! `+ -`, `* / %`, prefix `! -`, call. Semicolons are optional when the next
//! statement starts on a new line or a block closes.

use super::ast::*;
use super::diagnostic::{DiagnosticKind, ParseDiagnostic};
use super::lexer::{Lexer, Token, TokenKind};
use super::span::Span;

/// Parse a whole program.
pub fn parse_program(source: &SourceProgram) -> Result<Program, ParseDiagnostic> {
    parse_source(&source.text)
}

/// Parse program text without provenance.
pub fn parse_source(text: &str) -> Result<Program, ParseDiagnostic> {
    let mut p = Parser::new(text)?;
    let mut body = Vec::new();
    while !p.at(&TokenKind::Eof) {
        body.push(p.statement()?);
    }
    Ok(Program {
        body,
        span: Span::new(0, text.len(), 1, 1),
    })
}

/// Parse a single standalone expression. A trailing `;` is tolerated.
pub fn parse_expression(text: &str) -> Result<Expr, ParseDiagnostic> {
    let mut p = Parser::new(text)?;
    let expr = p.expression()?;
    p.eat(&TokenKind::Semi);
    if !p.at(&TokenKind::Eof) {
        return Err(p.unexpected("end of expression"));
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const MAX_NESTING: usize = 200;

impl Parser {
    fn new(text: &str) -> Result<Self, ParseDiagnostic> {
        Ok(Parser {
            tokens: Lexer::new(text).tokenize()?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.advance();
            true
        } else {
            false
        }
    }

    /// Span of the most recently consumed token.
    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error(&self, span: Span, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic::new(DiagnosticKind::Syntax, message, span)
    }

    fn unexpected(&self, wanted: &str) -> ParseDiagnostic {
        let t = self.peek();
        self.error(t.span, format!("expected {wanted}, found {}", t.kind))
    }

    fn expect(&mut self, kind: TokenKind, wanted: &str) -> Result<Token, ParseDiagnostic> {
        if self.at(&kind) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, Span), ParseDiagnostic> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.advance().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn depth_guard(&self, depth: usize) -> Result<(), ParseDiagnostic> {
        if depth > MAX_NESTING {
            Err(self.error(self.peek().span, "nesting too deep"))
        } else {
            Ok(())
        }
    }

    /// Statement terminator: `;`, or a following `}` / end of input / new line.
    fn terminator(&mut self) -> Result<(), ParseDiagnostic> {
        if self.eat(&TokenKind::Semi) {
            return Ok(());
        }
        let next = self.peek();
        if matches!(next.kind, TokenKind::RBrace | TokenKind::Eof) || next.span.line > self.prev_span().line {
            return Ok(());
        }
        if next.kind == TokenKind::Assign {
            return Err(self.error(next.span, "assignment to an existing binding is not supported"));
        }
        Err(self.unexpected("`;` or a line break"))
    }

    fn statement(&mut self) -> Result<Stmt, ParseDiagnostic> {
        self.statement_at(0)
    }

    fn statement_at(&mut self, depth: usize) -> Result<Stmt, ParseDiagnostic> {
        self.depth_guard(depth)?;
        let start = self.peek().span;
        match self.peek().kind {
            TokenKind::Var => {
                self.advance();
                let (name, name_span) = self.ident("identifier after `var`")?;
                self.expect(TokenKind::Assign, "`=` after variable name")?;
                let init = self.expr_at(depth + 1)?;
                self.terminator()?;
                Ok(Stmt::Var {
                    name,
                    name_span,
                    init,
                    span: start.to(self.prev_span()),
                })
            }
            TokenKind::Function if matches!(self.peek_at(1), TokenKind::Ident(_)) => {
                // `function f(...) {...}` declares `f`
                self.advance();
                let (name, name_span) = self.ident("function name")?;
                let func = self.function_rest(start, depth + 1)?;
                let init = Expr::new(ExprKind::Function(Box::new(func)), start.to(self.prev_span()));
                self.eat(&TokenKind::Semi);
                Ok(Stmt::Var {
                    name,
                    name_span,
                    init,
                    span: start.to(self.prev_span()),
                })
            }
            TokenKind::Return => {
                self.advance();
                let value = if matches!(self.peek().kind, TokenKind::Semi | TokenKind::RBrace | TokenKind::Eof)
                    || self.peek().span.line > start.line
                {
                    None
                } else {
                    Some(self.expr_at(depth + 1)?)
                };
                self.terminator()?;
                Ok(Stmt::Return {
                    value,
                    span: start.to(self.prev_span()),
                })
            }
            TokenKind::If => self.if_statement(depth),
            TokenKind::Else => Err(self.error(start, "`else` without a matching `if`")),
            _ => {
                let expr = self.expr_at(depth + 1)?;
                self.terminator()?;
                Ok(Stmt::Expr {
                    expr,
                    span: start.to(self.prev_span()),
                })
            }
        }
    }

    fn if_statement(&mut self, depth: usize) -> Result<Stmt, ParseDiagnostic> {
        let start = self.advance().span;
        self.expect(TokenKind::LParen, "`(` after `if`")?;
        let test = self.expr_at(depth + 1)?;
        self.expect(TokenKind::RParen, "`)` after condition")?;
        let then = self.branch(depth + 1)?;
        let otherwise = if self.eat(&TokenKind::Else) {
            if self.at(&TokenKind::If) {
                Some(Else::If(Box::new(self.if_statement(depth + 1)?)))
            } else {
                Some(Else::Block(self.branch(depth + 1)?))
            }
        } else {
            None
        };
        Ok(Stmt::If {
            test,
            then,
            otherwise,
            span: start.to(self.prev_span()),
        })
    }

    /// A braced block, or a single statement.
    fn branch(&mut self, depth: usize) -> Result<Vec<Stmt>, ParseDiagnostic> {
        if self.at(&TokenKind::LBrace) {
            self.block(depth)
        } else {
            Ok(vec![self.statement_at(depth)?])
        }
    }

    fn block(&mut self, depth: usize) -> Result<Vec<Stmt>, ParseDiagnostic> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut body = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            if self.at(&TokenKind::Eof) {
                return Err(self.unexpected("`}` to close block"));
            }
            body.push(self.statement_at(depth + 1)?);
        }
        self.advance();
        Ok(body)
    }

    fn expression(&mut self) -> Result<Expr, ParseDiagnostic> {
        self.expr_at(0)
    }

    fn expr_at(&mut self, depth: usize) -> Result<Expr, ParseDiagnostic> {
        self.depth_guard(depth)?;
        let test = self.binary(1, depth)?;
        if !self.eat(&TokenKind::Question) {
            return Ok(test);
        }
        let then = self.expr_at(depth + 1)?;
        self.expect(TokenKind::Colon, "`:` in conditional expression")?;
        let otherwise = self.expr_at(depth + 1)?;
        let span = test.span.to(otherwise.span);
        Ok(Expr::new(
            ExprKind::Conditional {
                test: Box::new(test),
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            },
            span,
        ))
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek().kind {
            TokenKind::OrOr => BinaryOp::Or,
            TokenKind::AndAnd => BinaryOp::And,
            TokenKind::EqEq => BinaryOp::Eq,
            TokenKind::NotEq => BinaryOp::Ne,
            TokenKind::Lt => BinaryOp::Lt,
            TokenKind::Le => BinaryOp::Le,
            TokenKind::Gt => BinaryOp::Gt,
            TokenKind::Ge => BinaryOp::Ge,
            TokenKind::Plus => BinaryOp::Add,
            TokenKind::Minus => BinaryOp::Sub,
            TokenKind::Star => BinaryOp::Mul,
            TokenKind::Slash => BinaryOp::Div,
            TokenKind::Percent => BinaryOp::Rem,
            _ => return None,
        })
    }

    /// Precedence climbing over left-associative binary operators.
    fn binary(&mut self, min_prec: u8, depth: usize) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.unary(depth)?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(op.precedence() + 1, depth + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                span,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, ParseDiagnostic> {
        self.depth_guard(depth)?;
        let op = match self.peek().kind {
            TokenKind::Minus => UnaryOp::Neg,
            TokenKind::Bang => UnaryOp::Not,
            _ => return self.postfix(depth),
        };
        let start = self.advance().span;
        let operand = self.unary(depth + 1)?;
        let span = start.to(operand.span);
        Ok(Expr::new(
            ExprKind::Unary {
                op,
                operand: Box::new(operand),
            },
            span,
        ))
    }

    fn postfix(&mut self, depth: usize) -> Result<Expr, ParseDiagnostic> {
        let mut expr = self.primary(depth)?;
        while self.at(&TokenKind::LParen) {
            let args = self.arguments(depth + 1)?;
            let span = expr.span.to(self.prev_span());
            expr = special_form(expr, args, span).map_err(|(span, msg)| self.error(span, msg))?;
        }
        Ok(expr)
    }

    fn arguments(&mut self, depth: usize) -> Result<Vec<Expr>, ParseDiagnostic> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        while !self.at(&TokenKind::RParen) {
            args.push(self.expr_at(depth + 1)?);
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RParen, "`,` or `)` in argument list")?;
        Ok(args)
    }

    fn primary(&mut self, depth: usize) -> Result<Expr, ParseDiagnostic> {
        let tok = self.peek().clone();
        let span = tok.span;
        let kind = match tok.kind {
            TokenKind::Number(n) => {
                self.advance();
                ExprKind::Number(n)
            }
            TokenKind::Str(s) => {
                self.advance();
                ExprKind::Str(s)
            }
            TokenKind::True => {
                self.advance();
                ExprKind::Bool(true)
            }
            TokenKind::False => {
                self.advance();
                ExprKind::Bool(false)
            }
            TokenKind::Ident(name) => {
                self.advance();
                ExprKind::Ident(name)
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr_at(depth + 1)?;
                self.expect(TokenKind::RParen, "`)`")?;
                return Ok(inner);
            }
            TokenKind::LBracket => {
                self.advance();
                let mut items = Vec::new();
                while !self.at(&TokenKind::RBracket) {
                    items.push(self.expr_at(depth + 1)?);
                    if !self.eat(&TokenKind::Comma) {
                        break;
                    }
                }
                self.expect(TokenKind::RBracket, "`,` or `]` in list")?;
                ExprKind::List(items)
            }
            TokenKind::LBrace => ExprKind::Record(self.record_fields(depth + 1)?),
            TokenKind::Function => {
                self.advance();
                if let TokenKind::Ident(_) = self.peek().kind {
                    return Err(self.error(
                        self.peek().span,
                        "named function expressions are only allowed as statements",
                    ));
                }
                ExprKind::Function(Box::new(self.function_rest(span, depth + 1)?))
            }
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr::new(kind, span.to(self.prev_span())))
    }

    fn record_fields(&mut self, depth: usize) -> Result<Vec<Field>, ParseDiagnostic> {
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut fields: Vec<Field> = Vec::new();
        while !self.at(&TokenKind::RBrace) {
            let start = self.peek().span;
            let key = match &self.peek().kind {
                TokenKind::Ident(k) | TokenKind::Str(k) => k.clone(),
                _ => return Err(self.unexpected("record key")),
            };
            let shorthand = matches!(self.peek().kind, TokenKind::Ident(_));
            self.advance();
            let value = if self.eat(&TokenKind::Colon) {
                self.expr_at(depth + 1)?
            } else if shorthand && matches!(self.peek().kind, TokenKind::Comma | TokenKind::RBrace) {
                Expr::new(ExprKind::Ident(key.clone()), start)
            } else {
                return Err(self.unexpected("`:` after record key"));
            };
            if fields.iter().any(|f| f.key == key) {
                return Err(self.error(start, format!("duplicate record key `{key}`")));
            }
            fields.push(Field {
                key,
                value,
                span: start.to(self.prev_span()),
            });
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::RBrace, "`,` or `}` in record")?;
        Ok(fields)
    }

    /// Parameters and body after `function` (and an optional name).
    fn function_rest(&mut self, start: Span, depth: usize) -> Result<Function, ParseDiagnostic> {
        self.expect(TokenKind::LParen, "`(` to open parameter list")?;
        let params = if self.at(&TokenKind::LBrace) {
            self.advance();
            let ps = self.param_list(&TokenKind::RBrace)?;
            self.expect(TokenKind::RBrace, "`,` or `}` in destructured parameter")?;
            Params::Record(ps)
        } else {
            Params::Positional(self.param_list(&TokenKind::RParen)?)
        };
        self.expect(TokenKind::RParen, "`,` or `)` in parameter list")?;
        let body = self.block(depth)?;
        Ok(Function {
            params,
            body,
            span: start.to(self.prev_span()),
        })
    }

    fn param_list(&mut self, close: &TokenKind) -> Result<Vec<Param>, ParseDiagnostic> {
        let mut ps: Vec<Param> = Vec::new();
        while !self.at(close) {
            let (name, span) = self.ident("parameter name")?;
            if ps.iter().any(|p| p.name == name) {
                return Err(self.error(span, format!("duplicate parameter `{name}`")));
            }
            ps.push(Param { name, span });
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        Ok(ps)
    }
}

/// Turn calls of `mem`, `condition` and `Infer` into their dedicated nodes.
fn special_form(callee: Expr, mut args: Vec<Expr>, span: Span) -> Result<Expr, (Span, String)> {
    let name = callee.as_ident().map(str::to_owned);
    let kind = match name.as_deref() {
        Some(form @ ("mem" | "condition")) => {
            if args.len() != 1 {
                return Err((span, format!("`{form}` takes exactly one argument, got {}", args.len())));
            }
            let arg = Box::new(args.pop().expect("one argument"));
            if form == "mem" {
                ExprKind::Mem(arg)
            } else {
                ExprKind::Condition(arg)
            }
        }
        Some("Infer") => match args.as_slice() {
            [Expr {
                kind: ExprKind::Record(fields),
                ..
            }] => ExprKind::Infer(fields.clone()),
            _ => return Err((span, "`Infer` takes a single options record".into())),
        },
        _ => ExprKind::Call {
            callee: Box::new(callee),
            args,
        },
    };
    Ok(Expr::new(kind, span))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(e: Expr) -> Expr {
        e.without_spans()
    }

    #[test]
    fn minimal_declaration() {
        let prog = parse_source("var x = flip(0.5);").unwrap();
        assert_eq!(prog.body.len(), 1);
        let Stmt::Var { name, init, .. } = &prog.body[0] else {
            panic!("expected var")
        };
        assert_eq!(name, "x");
        let ExprKind::Call { callee, args } = &init.kind else {
            panic!("expected call")
        };
        assert_eq!(callee.as_ident(), Some("flip"));
        assert_eq!(strip(args[0].clone()).kind, ExprKind::Number(0.5));
    }

    #[test]
    fn infer_options() {
        let prog = parse_source("var posterior = Infer({ model: model, method: 'rejection'});").unwrap();
        let ExprKind::Infer(fields) = &prog.declaration("posterior").unwrap().kind else {
            panic!("expected Infer")
        };
        let keys: Vec<_> = fields.iter().map(|f| f.key.as_str()).collect();
        assert_eq!(keys, ["model", "method"]);
    }

    #[test]
    fn missing_identifier() {
        let err = parse_source("var = 3;").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Syntax);
        assert_eq!(err.line(), 1);
        assert_eq!(err.column(), 5);
        assert!(err.message.contains("identifier"), "{}", err.message);
    }

    #[test]
    fn truncated_expression() {
        let err = parse_expression("1 +").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Syntax);
        assert_eq!(err.column(), 4);
    }

    #[test]
    fn condition_node() {
        let e = parse_expression("condition(lost({team1: ['fey', 'ollie'], team2: ['lane', 'jamie'], race: 1}))").unwrap();
        let ExprKind::Condition(inner) = e.kind else {
            panic!("expected condition")
        };
        let ExprKind::Call { args, .. } = inner.kind else {
            panic!("expected call")
        };
        assert!(matches!(args[0].kind, ExprKind::Record(_)));
    }

    #[test]
    fn precedence_and_associativity() {
        let a = parse_expression("1 - 2 - 3 * 4").unwrap().without_spans();
        let b = parse_expression("(1 - 2) - (3 * 4)").unwrap().without_spans();
        assert_eq!(a, b);
        let a = parse_expression("a || b && !c == d").unwrap().without_spans();
        let b = parse_expression("a || (b && ((!c) == d))").unwrap().without_spans();
        assert_eq!(a, b);
        let a = parse_expression("a ? b : c ? d : e").unwrap().without_spans();
        let b = parse_expression("a ? b : (c ? d : e)").unwrap().without_spans();
        assert_eq!(a, b);
    }

    #[test]
    fn record_shorthand_and_destructuring() {
        let prog = parse_source(
            "var f = mem(function ({athlete}) { return gaussian(50, 15) })\nvar g = f({athlete})",
        )
        .unwrap();
        let ExprKind::Mem(inner) = &prog.declaration("f").unwrap().kind else {
            panic!("expected mem")
        };
        let ExprKind::Function(func) = &inner.kind else {
            panic!("expected function")
        };
        assert!(matches!(&func.params, Params::Record(ps) if ps[0].name == "athlete"));
    }

    #[test]
    fn optional_semicolons_need_line_breaks() {
        assert!(parse_source("var a = 1\nvar b = 2").is_ok());
        let err = parse_source("var a = 1 var b = 2").unwrap_err();
        assert_eq!(err.column(), 11);
    }

    #[test]
    fn else_if_chains() {
        let prog = parse_source(
            "var f = function(x) {\n  if (x < 1) { return 1 } else if (x < 2) { return 2 } else { return 3 }\n}",
        )
        .unwrap();
        let ExprKind::Function(func) = &prog.body[0].clone().without_spans_var_init().kind else {
            panic!()
        };
        assert!(matches!(
            &func.body[0],
            Stmt::If {
                otherwise: Some(Else::If(_)),
                ..
            }
        ));
    }

    #[test]
    fn function_declaration_statement() {
        let a = parse_source("function f(a, b) { return a + b }").unwrap().without_spans();
        let b = parse_source("var f = function(a, b) { return a + b };").unwrap().without_spans();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unsupported_constructs() {
        assert!(parse_source("var x = 1; x = 2;").is_err());
        assert!(parse_source("var x = a.b;").is_err());
        assert!(parse_source("var m = mem(f, g);").is_err());
        assert!(parse_source("var p = Infer(model);").is_err());
    }

    impl Stmt {
        fn without_spans_var_init(self) -> Expr {
            match self {
                Stmt::Var { init, .. } => init.without_spans(),
                _ => panic!("expected var"),
            }
        }
    }
}
