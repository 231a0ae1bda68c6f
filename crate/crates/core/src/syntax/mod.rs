//! Lexing, parsing and span-preserving syntax trees for diagram scripts.

mod ast;
mod lexer;
mod parser;
mod text;

pub use ast::{node_at, Node, NodeKind};
pub use lexer::{tokenize, tokenize_lenient, LexError, Token, TokenKind};
pub use parser::{parse, parse_source, ParseError, ParseOutput};
pub use text::{
    apply_edits, apply_to_text, format_literal, format_number, rebase_edits, validate_edits, EditConflict, SourceDocument, Span,
    TextEdit,
};
