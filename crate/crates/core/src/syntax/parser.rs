//! Recursive-descent parser with statement-level error recovery.
//!
//! Every node span runs from its first to its last token, so slicing the
//! source by a node span and re-parsing yields the same subtree.

use std::fmt;

use thiserror::Error;

use super::ast::{Node, NodeKind};
use super::lexer::{tokenize_lenient, LexError, Token, TokenKind};
use super::text::Span;

const MAX_NESTING: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: Span,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(", "), self.found),
        }
    }
}

/// Result of parsing: always a `Program`, plus every error encountered.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutput {
    pub program: Node,
    pub errors: Vec<ParseError>,
    pub lex_errors: Vec<LexError>,
}

impl ParseOutput {
    pub fn has_errors(&self) -> bool {
        !self.errors.is_empty() || !self.lex_errors.is_empty()
    }
}

/// Parse a token stream into a `Program`.
pub fn parse(tokens: &[Token]) -> ParseOutput {
    let eof = tokens.last().map_or(0, |t| t.span.end);
    let mut parser = Parser { tokens, pos: 0, prev_end: 0, eof, errors: Vec::new(), newline_modes: Vec::new(), nesting: 0 };
    let statements = parser.statements(false);
    ParseOutput {
        program: Node::new(NodeKind::Program, Span::new(0, eof), statements),
        errors: parser.errors,
        lex_errors: Vec::new(),
    }
}

/// Tokenize leniently and parse. The program span covers the whole text.
pub fn parse_source(text: &str) -> ParseOutput {
    let (tokens, lex_errors) = tokenize_lenient(text);
    let mut out = parse(&tokens);
    out.program.span = Span::new(0, text.len());
    out.lex_errors = lex_errors;
    out
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    prev_end: usize,
    eof: usize,
    errors: Vec<ParseError>,
    /// `true` while inside `(` or `[`, where newlines are insignificant.
    newline_modes: Vec<bool>,
    nesting: usize,
}

fn infix_tier(op: &str) -> u8 {
    match op {
        "*" | "/" | "%" => 4,
        "+" | "-" => 3,
        "==" | "!=" | "<" | "<=" | ">" | ">=" => 2,
        _ => 1,
    }
}

fn is_reserved(name: &str) -> bool {
    matches!(name, "true" | "false" | "null" | "else")
}

impl<'t> Parser<'t> {
    fn skips_newlines(&self) -> bool {
        self.newline_modes.last().copied().unwrap_or(false)
    }

    fn peek(&mut self) -> Option<&'t Token> {
        if self.skips_newlines() {
            while matches!(self.tokens.get(self.pos), Some(Token { kind: TokenKind::Newline, .. })) {
                self.pos += 1;
            }
        }
        self.tokens.get(self.pos)
    }

    fn peek_kind(&mut self) -> Option<&'t TokenKind> {
        self.peek().map(|t| &t.kind)
    }

    /// The `n`-th token after the current one, skipping newlines if they are insignificant.
    fn peek_after(&mut self, n: usize) -> Option<&'t TokenKind> {
        self.peek()?;
        let skip = self.skips_newlines();
        self.tokens[self.pos + 1..]
            .iter()
            .filter(|t| !(skip && t.kind == TokenKind::Newline))
            .nth(n - 1)
            .map(|t| &t.kind)
    }

    fn bump(&mut self) -> &'t Token {
        self.peek();
        let token = &self.tokens[self.pos];
        self.pos += 1;
        self.prev_end = token.span.end;
        token
    }

    fn skip_newlines(&mut self) {
        while matches!(self.tokens.get(self.pos), Some(Token { kind: TokenKind::Newline, .. })) {
            self.pos += 1;
        }
    }

    fn current_start(&mut self) -> usize {
        self.peek().map_or(self.eof, |t| t.span.start)
    }

    fn error_here(&mut self, expected: &[&str]) -> ParseError {
        let (span, found) = match self.peek() {
            Some(token) => (token.span, token.kind.describe()),
            None => (Span::empty(self.eof), "end of input".to_owned()),
        };
        ParseError { span, expected: expected.iter().map(|s| (*s).to_owned()).collect(), found }
    }

    fn expect(&mut self, kind: TokenKind, label: &str) -> PResult<&'t Token> {
        if self.peek_kind() == Some(&kind) {
            Ok(self.bump())
        } else {
            Err(self.error_here(&[label]))
        }
    }

    fn with_newline_mode<T>(&mut self, skip: bool, f: impl FnOnce(&mut Self) -> T) -> T {
        self.newline_modes.push(skip);
        let out = f(self);
        self.newline_modes.pop();
        out
    }

    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        if self.nesting >= MAX_NESTING {
            return Err(ParseError {
                span: self.peek().map_or(Span::empty(self.eof), |t| t.span),
                expected: Vec::new(),
                found: "nesting too deep".to_owned(),
            });
        }
        self.nesting += 1;
        let out = f(self);
        self.nesting -= 1;
        out
    }

    fn statements(&mut self, in_block: bool) -> Vec<Node> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek_kind(), Some(TokenKind::Newline | TokenKind::Semicolon)) {
                self.bump();
            }
            match self.peek_kind() {
                None => break,
                Some(TokenKind::RBrace) if in_block => break,
                Some(TokenKind::RBrace) => {
                    let err = self.error_here(&["statement"]);
                    self.errors.push(err);
                    self.bump();
                    continue;
                }
                _ => {}
            }
            let modes = self.newline_modes.len();
            match self.statement() {
                Ok(node) => {
                    out.push(node);
                    match self.peek_kind() {
                        None | Some(TokenKind::Newline | TokenKind::Semicolon) => {}
                        Some(TokenKind::RBrace) if in_block => {}
                        _ => {
                            let err = self.error_here(&["newline", "`;`"]);
                            self.errors.push(err);
                            self.recover(in_block);
                        }
                    }
                }
                Err(err) => {
                    self.newline_modes.truncate(modes);
                    self.errors.push(err);
                    self.recover(in_block);
                }
            }
        }
        out
    }

    /// Skip to the next statement boundary at the current nesting level.
    fn recover(&mut self, in_block: bool) {
        let mut depth = 0usize;
        while let Some(token) = self.tokens.get(self.pos) {
            match token.kind {
                TokenKind::Newline | TokenKind::Semicolon if depth == 0 => return,
                TokenKind::RBrace if depth == 0 && in_block => return,
                TokenKind::LParen | TokenKind::LBrace | TokenKind::LBracket => depth += 1,
                TokenKind::RParen | TokenKind::RBrace | TokenKind::RBracket => depth = depth.saturating_sub(1),
                _ => {}
            }
            self.pos += 1;
            self.prev_end = token.span.end;
        }
    }

    fn statement(&mut self) -> PResult<Node> {
        let start = self.current_start();
        let target = self.expr(0)?;
        if matches!(self.peek_kind(), Some(TokenKind::Op(op)) if op == "=") {
            if !matches!(target.kind, NodeKind::Ident(_) | NodeKind::FieldAccess { .. }) {
                return Err(ParseError {
                    span: target.span,
                    expected: vec!["identifier or field access before `=`".to_owned()],
                    found: target.kind.name().to_owned(),
                });
            }
            self.bump();
            self.skip_newlines();
            let value = self.nested(|p| p.statement())?;
            return Ok(Node::new(NodeKind::Assign, Span::new(start, self.prev_end), vec![target, value]));
        }
        Ok(target)
    }

    fn expr(&mut self, min_tier: u8) -> PResult<Node> {
        let start = self.current_start();
        let mut lhs = self.unary()?;
        loop {
            let (op, op_span, tier) = match self.peek() {
                Some(Token { kind: TokenKind::Op(op), span }) if op != "=" && op != "->" => (op.clone(), *span, infix_tier(op)),
                Some(Token { kind: TokenKind::Ident(name), span }) if !is_reserved(name) => (name.clone(), *span, 1),
                _ => break,
            };
            if tier < min_tier {
                break;
            }
            self.bump();
            self.skip_newlines();
            let rhs = self.nested(|p| p.expr(tier + 1))?;
            lhs = Node::new(NodeKind::InfixCall { op, op_span }, Span::new(start, self.prev_end), vec![lhs, rhs]);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Node> {
        let op = match self.peek() {
            Some(Token { kind: TokenKind::Op(op), span }) if op == "-" || op == "!" => (op.clone(), *span),
            _ => return self.postfix(),
        };
        self.bump();
        if op.0 == "-" {
            if let Some(Token { kind: TokenKind::Number(value), .. }) = self.peek() {
                let value = -*value;
                self.bump();
                return Ok(Node::leaf(NodeKind::NumberLit(value), Span::new(op.1.start, self.prev_end)));
            }
        }
        let operand = self.nested(|p| p.unary())?;
        let callee = Node::leaf(NodeKind::Ident(op.0), op.1);
        Ok(Node::new(
            NodeKind::Call { arg_names: vec![None] },
            Span::new(op.1.start, self.prev_end),
            vec![callee, operand],
        ))
    }

    fn postfix(&mut self) -> PResult<Node> {
        let start = self.current_start();
        let mut node = self.primary()?;
        loop {
            match self.peek_kind() {
                Some(TokenKind::LParen) => {
                    let (names, args) = self.arguments()?;
                    let mut children = vec![node];
                    children.extend(args);
                    node = Node::new(NodeKind::Call { arg_names: names }, Span::new(start, self.prev_end), children);
                }
                Some(TokenKind::LBrace) => {
                    let block = self.nested(|p| p.function_lit())?;
                    node = append_trailing(node, block, start, self.prev_end);
                }
                Some(TokenKind::Dot) => {
                    self.bump();
                    let name = match self.peek_kind() {
                        Some(TokenKind::Ident(name)) => name.clone(),
                        _ => return Err(self.error_here(&["field name"])),
                    };
                    self.bump();
                    node = Node::new(NodeKind::FieldAccess { name }, Span::new(start, self.prev_end), vec![node]);
                }
                Some(TokenKind::Newline) => {
                    // a leading `.` on the next line continues a call chain
                    let next = self.tokens[self.pos..].iter().find(|t| t.kind != TokenKind::Newline);
                    if matches!(next, Some(Token { kind: TokenKind::Dot, .. })) {
                        self.skip_newlines();
                    } else {
                        break;
                    }
                }
                Some(TokenKind::Ident(name))
                    if name == "else"
                        && matches!(node.kind, NodeKind::Call { .. })
                        && matches!(node.children.last().map(|c| &c.kind), Some(NodeKind::FunctionLit { .. }))
                        && self.peek_after(1) == Some(&TokenKind::LBrace) =>
                {
                    self.bump();
                    let block = self.nested(|p| p.function_lit())?;
                    node = append_trailing(node, block, start, self.prev_end);
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn primary(&mut self) -> PResult<Node> {
        let Some(token) = self.peek() else {
            return Err(self.error_here(&["expression"]));
        };
        let span = token.span;
        let node = match &token.kind {
            TokenKind::Number(value) => Node::leaf(NodeKind::NumberLit(*value), span),
            TokenKind::Str(value) => Node::leaf(NodeKind::StringLit(value.clone()), span),
            TokenKind::Ident(name) => match name.as_str() {
                "true" => Node::leaf(NodeKind::BoolLit(true), span),
                "false" => Node::leaf(NodeKind::BoolLit(false), span),
                "null" => Node::leaf(NodeKind::NullLit, span),
                "else" => return Err(self.error_here(&["expression"])),
                _ => Node::leaf(NodeKind::Ident(name.clone()), span),
            },
            TokenKind::LParen => {
                self.bump();
                return self.nested(|p| {
                    p.with_newline_mode(true, |p| {
                        let inner = p.expr(0)?;
                        p.expect(TokenKind::RParen, "`)`")?;
                        Ok(inner)
                    })
                });
            }
            TokenKind::LBracket => return self.nested(|p| p.list()),
            TokenKind::LBrace => return self.nested(|p| p.function_lit()),
            _ => return Err(self.error_here(&["expression"])),
        };
        self.bump();
        Ok(node)
    }

    fn list(&mut self) -> PResult<Node> {
        let start = self.bump().span.start;
        self.with_newline_mode(true, |p| {
            let mut items = Vec::new();
            loop {
                if p.peek_kind() == Some(&TokenKind::RBracket) {
                    p.bump();
                    break;
                }
                items.push(p.expr(0)?);
                match p.peek_kind() {
                    Some(TokenKind::Comma) => {
                        p.bump();
                    }
                    Some(TokenKind::RBracket) => {}
                    _ => return Err(p.error_here(&["`,`", "`]`"])),
                }
            }
            Ok(Node::new(NodeKind::ListLit, Span::new(start, p.prev_end), items))
        })
    }

    fn arguments(&mut self) -> PResult<(Vec<Option<String>>, Vec<Node>)> {
        self.bump();
        self.with_newline_mode(true, |p| {
            let mut names = Vec::new();
            let mut args = Vec::new();
            loop {
                if p.peek_kind() == Some(&TokenKind::RParen) {
                    p.bump();
                    break;
                }
                let named = match (p.peek_kind(), p.peek_after(1)) {
                    (Some(TokenKind::Ident(name)), Some(TokenKind::Op(op))) if op == "=" => Some(name.clone()),
                    _ => None,
                };
                if named.is_some() {
                    p.bump();
                    p.bump();
                }
                args.push(p.expr(0)?);
                names.push(named);
                match p.peek_kind() {
                    Some(TokenKind::Comma) => {
                        p.bump();
                    }
                    Some(TokenKind::RParen) => {}
                    _ => return Err(p.error_here(&["`,`", "`)`"])),
                }
            }
            Ok((names, args))
        })
    }

    fn function_lit(&mut self) -> PResult<Node> {
        let start = self.bump().span.start;
        self.with_newline_mode(false, |p| {
            let params = p.lambda_params();
            let implicit_it = params.is_none();
            let body = p.statements(true);
            if p.peek_kind() == Some(&TokenKind::RBrace) {
                p.bump();
            } else {
                let err = p.error_here(&["`}`"]);
                p.errors.push(err);
            }
            Ok(Node::new(
                NodeKind::FunctionLit { params: params.unwrap_or_default(), implicit_it },
                Span::new(start, p.prev_end),
                body,
            ))
        })
    }

    /// Recognize `(a, b) ->` at the start of a block.
    fn lambda_params(&mut self) -> Option<Vec<String>> {
        let mut i = self.pos;
        let tokens = self.tokens;
        let significant = |i: &mut usize| {
            while matches!(tokens.get(*i), Some(Token { kind: TokenKind::Newline, .. })) {
                *i += 1;
            }
            let t = tokens.get(*i);
            *i += 1;
            t.map(|t| &t.kind)
        };
        if significant(&mut i) != Some(&TokenKind::LParen) {
            return None;
        }
        let mut names = Vec::new();
        loop {
            match significant(&mut i) {
                Some(TokenKind::Ident(name)) if !is_reserved(name) => names.push(name.clone()),
                Some(TokenKind::RParen) if names.is_empty() => break,
                _ => return None,
            }
            match significant(&mut i) {
                Some(TokenKind::Comma) => continue,
                Some(TokenKind::RParen) => break,
                _ => return None,
            }
        }
        match significant(&mut i) {
            Some(TokenKind::Op(op)) if op == "->" => {
                self.prev_end = tokens[i - 1].span.end;
                self.pos = i;
                Some(names)
            }
            _ => None,
        }
    }
}

fn append_trailing(node: Node, block: Node, start: usize, end: usize) -> Node {
    match node.kind {
        NodeKind::Call { mut arg_names } => {
            arg_names.push(None);
            let mut children = node.children;
            children.push(block);
            Node::new(NodeKind::Call { arg_names }, Span::new(start, end), children)
        }
        _ => Node::new(NodeKind::Call { arg_names: vec![None] }, Span::new(start, end), vec![node, block]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program(text: &str) -> Node {
        let out = parse_source(text);
        assert!(!out.has_errors(), "{:?} {:?}", out.errors, out.lex_errors);
        out.program
    }

    fn kinds(node: &Node) -> String {
        let mut s = node.kind.name().to_owned();
        if !node.children.is_empty() {
            s.push('(');
            s.push_str(&node.children.iter().map(kinds).collect::<Vec<_>>().join(", "));
            s.push(')');
        }
        s
    }

    #[test]
    fn class_with_nested_blocks() {
        let p = program("class(\"Menu\") { public { \"count : int\" } }");
        assert_eq!(
            kinds(&p.children[0]),
            "Call(Ident, StringLit, FunctionLit(Call(Ident, FunctionLit(StringLit))))"
        );
    }

    #[test]
    fn arrow_is_infix_call() {
        let p = program("Menu --> Dish");
        let stmt = &p.children[0];
        assert!(matches!(&stmt.kind, NodeKind::InfixCall { op, op_span } if op == "-->" && *op_span == Span::new(5, 8)));
        assert_eq!(stmt.children[0].as_ident(), Some("Menu"));
        assert_eq!(stmt.children[1].as_ident(), Some("Dish"));
    }

    #[test]
    fn dangling_assignment_recovers() {
        let out = parse_source("x = ");
        assert_eq!(out.errors.len(), 1);
        assert_eq!(out.errors[0].span, Span::empty(3));
        assert_eq!(out.errors[0].found, "end of input");
        assert!(out.program.children.is_empty());
    }

    #[test]
    fn empty_document() {
        let out = parse_source("");
        assert!(!out.has_errors());
        assert!(out.program.children.is_empty());
    }

    #[test]
    fn precedence_tiers() {
        let p = program("a --> b + c * d == e");
        // `-->` binds loosest, then comparison, then additive, then multiplicative
        let top = &p.children[0];
        assert!(matches!(&top.kind, NodeKind::InfixCall { op, .. } if op == "-->"));
        let cmp = &top.children[1];
        assert!(matches!(&cmp.kind, NodeKind::InfixCall { op, .. } if op == "=="));
        let add = &cmp.children[0];
        assert!(matches!(&add.kind, NodeKind::InfixCall { op, .. } if op == "+"));
        assert!(matches!(&add.children[1].kind, NodeKind::InfixCall { op, .. } if op == "*"));
    }

    #[test]
    fn custom_operators_are_left_associative() {
        let p = program("a --> b extends c");
        let top = &p.children[0];
        assert!(matches!(&top.kind, NodeKind::InfixCall { op, .. } if op == "extends"));
        assert!(matches!(&top.children[0].kind, NodeKind::InfixCall { op, .. } if op == "-->"));
    }

    #[test]
    fn named_arguments_and_trailing_blocks() {
        let p = program("class(\"A\", abstract = true) { }\nif (x) { 1 } { 2 }\nif (y) { 1 } else { 2 }");
        let NodeKind::Call { arg_names } = &p.children[0].kind else { panic!() };
        assert_eq!(arg_names, &vec![None, Some("abstract".to_owned()), None]);
        assert_eq!(p.children[1].children.len(), 4);
        assert_eq!(p.children[2].children.len(), 4);
    }

    #[test]
    fn lambda_params_and_implicit_it() {
        let p = program("f = { (a, b) -> a + b }\ng = { it + 1 }");
        let f = &p.children[0].children[1];
        assert_eq!(f.kind, NodeKind::FunctionLit { params: vec!["a".into(), "b".into()], implicit_it: false });
        let g = &p.children[1].children[1];
        assert_eq!(g.kind, NodeKind::FunctionLit { params: vec![], implicit_it: true });
    }

    #[test]
    fn negative_literals_fold() {
        let p = program("apos(-10, - 2.5)");
        let call = &p.children[0];
        assert_eq!(call.children[1].kind, NodeKind::NumberLit(-10.0));
        assert_eq!(call.children[1].span, Span::new(5, 8));
        assert_eq!(call.children[2].kind, NodeKind::NumberLit(-2.5));
    }

    #[test]
    fn method_chain_over_lines() {
        let p = program("over = start(0.25)\n  .axisAligned(0.5, end(0.75))");
        let call = &p.children[0].children[1];
        assert!(matches!(&call.children[0].kind, NodeKind::FieldAccess { name } if name == "axisAligned"));
    }

    #[test]
    fn newlines_inside_parens_and_lists() {
        let p = program("f(\n 1,\n 2\n)\nx = [\n1,\n2,\n]");
        assert_eq!(p.children.len(), 2);
        assert_eq!(p.children[1].children[1].children.len(), 2);
    }

    #[test]
    fn recovery_keeps_later_statements() {
        let out = parse_source("a = 1\nb = (2 +\nc = 3\nd = )\ne = 5");
        assert!(!out.errors.is_empty());
        let names: Vec<_> = out
            .program
            .children
            .iter()
            .filter_map(|s| s.children.first().and_then(Node::as_ident).map(str::to_owned))
            .collect();
        assert!(names.contains(&"a".to_owned()));
        assert!(names.contains(&"e".to_owned()));
    }

    #[test]
    fn recovery_inside_blocks() {
        let out = parse_source("f {\n  x = = 1\n  y = 2\n}\nz = 3");
        assert_eq!(out.errors.len(), 1);
        let block = &out.program.children[0].children[1];
        assert_eq!(block.children.len(), 1);
        assert_eq!(out.program.children.len(), 2);
    }

    #[test]
    fn unclosed_block_still_yields_node() {
        let out = parse_source("f {\n  x = 1\n");
        assert_eq!(out.errors.len(), 1);
        assert_eq!(out.program.children.len(), 1);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("{}1{}", "(".repeat(1000), ")".repeat(1000));
        let out = parse_source(&text);
        assert!(!out.errors.is_empty());
    }

    #[test]
    fn assignment_to_call_is_rejected() {
        let out = parse_source("f() = 3");
        assert_eq!(out.errors.len(), 1);
    }

    #[test]
    fn unary_minus_on_expression() {
        let p = program("x = -y");
        let call = &p.children[0].children[1];
        assert_eq!(call.children[0].as_ident(), Some("-"));
    }
}
