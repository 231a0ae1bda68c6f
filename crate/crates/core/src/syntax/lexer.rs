//! Tokenizer for diagram scripts.
//!
//! Operators are maximal runs of operator characters, so `-->`, `<>--` and
//! `*--` each lex as a single token. A lone `.` is field access and a lone
//! `=` is assignment.

use thiserror::Error;

use super::text::Span;

pub(crate) const OPERATOR_CHARS: &str = "+-*/%<>=!&|#?~.";

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Number(f64),
    Str(String),
    Op(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Newline,
    Semicolon,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(name) => format!("identifier `{name}`"),
            TokenKind::Number(n) => format!("number `{n}`"),
            TokenKind::Str(_) => "string".to_owned(),
            TokenKind::Op(op) => format!("`{op}`"),
            TokenKind::LParen => "`(`".to_owned(),
            TokenKind::RParen => "`)`".to_owned(),
            TokenKind::LBrace => "`{`".to_owned(),
            TokenKind::RBrace => "`}`".to_owned(),
            TokenKind::LBracket => "`[`".to_owned(),
            TokenKind::RBracket => "`]`".to_owned(),
            TokenKind::Comma => "`,`".to_owned(),
            TokenKind::Dot => "`.`".to_owned(),
            TokenKind::Newline => "newline".to_owned(),
            TokenKind::Semicolon => "`;`".to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct LexError {
    pub span: Span,
    pub message: String,
}

/// Strict tokenization: fails on the first lexical error.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let (tokens, mut errors) = tokenize_lenient(text);
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors.remove(0))
    }
}

/// Tokenize everything that can be tokenized, collecting errors on the way.
/// Illegal characters are skipped and unterminated strings end at the line end.
pub fn tokenize_lenient(text: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut lexer = Lexer { text, bytes: text.as_bytes(), pos: 0, tokens: Vec::new(), errors: Vec::new() };
    lexer.run();
    (lexer.tokens, lexer.errors)
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
    tokens: Vec<Token>,
    errors: Vec<LexError>,
}

impl Lexer<'_> {
    fn run(&mut self) {
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let c = self.bytes[self.pos];
            match c {
                b' ' | b'\t' | b'\r' => self.pos += 1,
                b'\n' => self.single(TokenKind::Newline),
                b';' => self.single(TokenKind::Semicolon),
                b'(' => self.single(TokenKind::LParen),
                b')' => self.single(TokenKind::RParen),
                b'{' => self.single(TokenKind::LBrace),
                b'}' => self.single(TokenKind::RBrace),
                b'[' => self.single(TokenKind::LBracket),
                b']' => self.single(TokenKind::RBracket),
                b',' => self.single(TokenKind::Comma),
                b'/' if self.bytes.get(self.pos + 1) == Some(&b'/') => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b'"' => self.string(),
                b'0'..=b'9' => self.number(),
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                    while self.pos < self.bytes.len()
                        && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let name = self.text[start..self.pos].to_owned();
                    self.push(TokenKind::Ident(name), start);
                }
                _ if OPERATOR_CHARS.as_bytes().contains(&c) => {
                    while self.pos < self.bytes.len() && OPERATOR_CHARS.as_bytes().contains(&self.bytes[self.pos]) {
                        // a comment start ends the operator run
                        if self.bytes[self.pos] == b'/' && self.bytes.get(self.pos + 1) == Some(&b'/') && self.pos > start {
                            break;
                        }
                        self.pos += 1;
                    }
                    let op = &self.text[start..self.pos];
                    let kind = if op == "." { TokenKind::Dot } else { TokenKind::Op(op.to_owned()) };
                    self.push(kind, start);
                }
                _ => {
                    let ch = self.text[start..].chars().next().unwrap_or('\u{fffd}');
                    self.pos += ch.len_utf8();
                    self.errors.push(LexError {
                        span: Span::new(start, self.pos),
                        message: format!("illegal character `{}`", ch.escape_default()),
                    });
                }
            }
        }
    }

    fn single(&mut self, kind: TokenKind) {
        let start = self.pos;
        self.pos += 1;
        self.push(kind, start);
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.tokens.push(Token { kind, span: Span::new(start, self.pos) });
    }

    fn number(&mut self) {
        let start = self.pos;
        let digits = |lexer: &mut Self| {
            while lexer.pos < lexer.bytes.len() && lexer.bytes[lexer.pos].is_ascii_digit() {
                lexer.pos += 1;
            }
        };
        digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') && self.bytes.get(self.pos + 1).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let mut look = self.pos + 1;
            if matches!(self.bytes.get(look), Some(b'+' | b'-')) {
                look += 1;
            }
            if self.bytes.get(look).is_some_and(u8::is_ascii_digit) {
                self.pos = look;
                digits(self);
            }
        }
        let value: f64 = self.text[start..self.pos].parse().unwrap_or(f64::NAN);
        self.push(TokenKind::Number(value), start);
    }

    fn string(&mut self) {
        let start = self.pos;
        self.pos += 1;
        let mut value = String::new();
        loop {
            let Some(ch) = self.text[self.pos..].chars().next() else {
                self.unterminated(start);
                return;
            };
            match ch {
                '"' => {
                    self.pos += 1;
                    self.push(TokenKind::Str(value), start);
                    return;
                }
                '\n' => {
                    self.unterminated(start);
                    return;
                }
                '\\' => {
                    let escape_start = self.pos;
                    self.pos += 1;
                    match self.text[self.pos..].chars().next() {
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some('n') => value.push('\n'),
                        Some(other) if other != '\n' => {
                            self.errors.push(LexError {
                                span: Span::new(escape_start, self.pos + other.len_utf8()),
                                message: format!("unknown escape sequence `\\{}`", other.escape_default()),
                            });
                        }
                        _ => {
                            self.unterminated(start);
                            return;
                        }
                    }
                    self.pos += self.text[self.pos..].chars().next().map_or(0, char::len_utf8);
                }
                _ => {
                    value.push(ch);
                    self.pos += ch.len_utf8();
                }
            }
        }
    }

    fn unterminated(&mut self, start: usize) {
        self.errors.push(LexError { span: Span::new(start, self.pos), message: "unterminated string literal".to_owned() });
    }
}
