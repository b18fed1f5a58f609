//! Tokenizer for `.wppl` sources.
//!
//! `//` line comments and `/* */` block comments are skipped. `===` and `!==`
//! are accepted as spellings of `==` and `!=`.

use std::fmt;

use super::diagnostic::{DiagnosticKind, ParseDiagnostic};
use super::span::Span;

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    Var,
    Function,
    Return,
    If,
    Else,
    True,
    False,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Question,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    NotEq,
    AndAnd,
    OrOr,
    Bang,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(name) => return write!(f, "identifier `{name}`"),
            TokenKind::Number(n) => return write!(f, "number `{n}`"),
            TokenKind::Str(s) => return write!(f, "string '{s}'"),
            TokenKind::Var => "`var`",
            TokenKind::Function => "`function`",
            TokenKind::Return => "`return`",
            TokenKind::If => "`if`",
            TokenKind::Else => "`else`",
            TokenKind::True => "`true`",
            TokenKind::False => "`false`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Comma => "`,`",
            TokenKind::Semi => "`;`",
            TokenKind::Colon => "`:`",
            TokenKind::Question => "`?`",
            TokenKind::Assign => "`=`",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Slash => "`/`",
            TokenKind::Percent => "`%`",
            TokenKind::Lt => "`<`",
            TokenKind::Le => "`<=`",
            TokenKind::Gt => "`>`",
            TokenKind::Ge => "`>=`",
            TokenKind::EqEq => "`==`",
            TokenKind::NotEq => "`!=`",
            TokenKind::AndAnd => "`&&`",
            TokenKind::OrOr => "`||`",
            TokenKind::Bang => "`!`",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

pub struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, ParseDiagnostic> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let start = (self.pos, self.line, self.col);
            let Some(c) = self.peek_char() else {
                out.push(Token {
                    kind: TokenKind::Eof,
                    span: Span::new(self.pos, self.pos, self.line, self.col),
                });
                return Ok(out);
            };
            let kind = if c.is_ascii_digit()
                || (c == '.' && self.peek_byte_at(1).is_some_and(|b| b.is_ascii_digit()))
            {
                self.number(start)?
            } else if c == '_' || c == '$' || c.is_alphabetic() {
                self.word()
            } else if c == '\'' || c == '"' {
                self.string(start)?
            } else {
                self.punct(c, start)?
            };
            out.push(Token {
                kind,
                span: Span::new(start.0, self.pos, start.1, start.2),
            });
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_byte_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, start: (usize, u32, u32), message: String) -> ParseDiagnostic {
        ParseDiagnostic::new(
            DiagnosticKind::Lex,
            message,
            Span::new(start.0, self.pos.max(start.0), start.1, start.2),
        )
    }

    fn skip_trivia(&mut self) -> Result<(), ParseDiagnostic> {
        loop {
            match self.peek_char() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.peek_byte_at(1) == Some(b'/') => {
                    while let Some(c) = self.peek_char() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some('/') if self.peek_byte_at(1) == Some(b'*') => {
                    let start = (self.pos, self.line, self.col);
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek_char() {
                            None => {
                                return Err(self.error(start, "unterminated block comment".into()))
                            }
                            Some('*') if self.peek_byte_at(1) == Some(b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn number(&mut self, start: (usize, u32, u32)) -> Result<TokenKind, ParseDiagnostic> {
        while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if self.peek_char() == Some('.') && self.peek_byte_at(1).is_some_and(|b| b.is_ascii_digit()) {
            self.bump();
            while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        } else if self.peek_char() == Some('.')
            && !self.peek_byte_at(1).is_some_and(|b| b.is_ascii_alphabetic() || b == b'_')
        {
            // `5.` is a complete literal
            self.bump();
        }
        if matches!(self.peek_char(), Some('e' | 'E')) {
            let save = (self.pos, self.line, self.col);
            self.bump();
            if matches!(self.peek_char(), Some('+' | '-')) {
                self.bump();
            }
            if self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
            } else {
                (self.pos, self.line, self.col) = save;
            }
        }
        if self.peek_char().is_some_and(|c| c.is_alphabetic() || c == '_') {
            self.bump();
            return Err(self.error(start, "invalid character in numeric literal".into()));
        }
        let text = &self.src[start.0..self.pos];
        match text.parse::<f64>() {
            Ok(n) if n.is_finite() => Ok(TokenKind::Number(n)),
            Ok(_) => Err(self.error(start, format!("numeric literal `{text}` is out of range"))),
            Err(_) => Err(self.error(start, format!("invalid numeric literal `{text}`"))),
        }
    }

    fn word(&mut self) -> TokenKind {
        let start = self.pos;
        while self
            .peek_char()
            .is_some_and(|c| c == '_' || c == '$' || c.is_alphanumeric())
        {
            self.bump();
        }
        match &self.src[start..self.pos] {
            "var" | "let" | "const" => TokenKind::Var,
            "function" => TokenKind::Function,
            "return" => TokenKind::Return,
            "if" => TokenKind::If,
            "else" => TokenKind::Else,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            other => TokenKind::Ident(other.to_string()),
        }
    }

    fn string(&mut self, start: (usize, u32, u32)) -> Result<TokenKind, ParseDiagnostic> {
        let quote = self.bump().expect("quote");
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(self.error(start, "unterminated string literal".into()))
                }
                Some(c) if c == quote => return Ok(TokenKind::Str(out)),
                Some('\\') => match self.bump() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some('0') => out.push('\0'),
                    Some(c @ ('\\' | '\'' | '"')) => out.push(c),
                    Some(c) => {
                        return Err(self.error(start, format!("unknown escape sequence `\\{c}`")))
                    }
                    None => return Err(self.error(start, "unterminated string literal".into())),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn punct(&mut self, c: char, start: (usize, u32, u32)) -> Result<TokenKind, ParseDiagnostic> {
        let next = self.peek_byte_at(1);
        let next2 = self.peek_byte_at(2);
        let (kind, len) = match c {
            '(' => (TokenKind::LParen, 1),
            ')' => (TokenKind::RParen, 1),
            '{' => (TokenKind::LBrace, 1),
            '}' => (TokenKind::RBrace, 1),
            '[' => (TokenKind::LBracket, 1),
            ']' => (TokenKind::RBracket, 1),
            ',' => (TokenKind::Comma, 1),
            ';' => (TokenKind::Semi, 1),
            ':' => (TokenKind::Colon, 1),
            '?' => (TokenKind::Question, 1),
            '+' => (TokenKind::Plus, 1),
            '-' => (TokenKind::Minus, 1),
            '*' => (TokenKind::Star, 1),
            '/' => (TokenKind::Slash, 1),
            '%' => (TokenKind::Percent, 1),
            '<' if next == Some(b'=') => (TokenKind::Le, 2),
            '<' => (TokenKind::Lt, 1),
            '>' if next == Some(b'=') => (TokenKind::Ge, 2),
            '>' => (TokenKind::Gt, 1),
            '=' if next == Some(b'=') && next2 == Some(b'=') => (TokenKind::EqEq, 3),
            '=' if next == Some(b'=') => (TokenKind::EqEq, 2),
            '=' => (TokenKind::Assign, 1),
            '!' if next == Some(b'=') && next2 == Some(b'=') => (TokenKind::NotEq, 3),
            '!' if next == Some(b'=') => (TokenKind::NotEq, 2),
            '!' => (TokenKind::Bang, 1),
            '&' if next == Some(b'&') => (TokenKind::AndAnd, 2),
            '|' if next == Some(b'|') => (TokenKind::OrOr, 2),
            other => {
                self.bump();
                return Err(self.error(start, format!("unexpected character `{other}`")));
            }
        };
        for _ in 0..len {
            self.bump();
        }
        Ok(kind)
    }
}
