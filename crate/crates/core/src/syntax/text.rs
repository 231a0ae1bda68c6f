//! Source documents, byte spans and text edits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-open byte range `[start, end)` into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub const fn empty(at: usize) -> Self {
        Span { start: at, end: at }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// True if `offset` falls inside the half-open range.
    pub fn contains(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }

    pub fn contains_span(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A versioned source text. The text is the whole diagram definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub uri: String,
    pub text: String,
    pub version: u64,
}

impl SourceDocument {
    pub fn new(uri: impl Into<String>, text: impl Into<String>, version: u64) -> Self {
        SourceDocument { uri: uri.into(), text: text.into(), version }
    }
}

/// Replace the bytes of `span` with `new_text`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextEdit {
    pub span: Span,
    pub new_text: String,
}

impl TextEdit {
    pub fn new(span: Span, new_text: impl Into<String>) -> Self {
        TextEdit { span, new_text: new_text.into() }
    }

    pub fn insert(at: usize, text: impl Into<String>) -> Self {
        TextEdit::new(Span::empty(at), text)
    }

    /// Length change this edit causes.
    pub fn delta(&self) -> isize {
        self.new_text.len() as isize - self.span.len() as isize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditConflict {
    #[error("edits at {0} and {1} overlap or are out of order")]
    Overlap(Span, Span),
    #[error("edit span {span} exceeds document length {len}")]
    OutOfBounds { span: Span, len: usize },
    #[error("edit span {0} does not fall on character boundaries")]
    NotCharBoundary(Span),
}

/// Check that a batch is sorted, pairwise disjoint and inside `text`.
pub fn validate_edits(text: &str, edits: &[TextEdit]) -> Result<(), EditConflict> {
    for edit in edits {
        let span = edit.span;
        if span.start > span.end || span.end > text.len() {
            return Err(EditConflict::OutOfBounds { span, len: text.len() });
        }
        if !text.is_char_boundary(span.start) || !text.is_char_boundary(span.end) {
            return Err(EditConflict::NotCharBoundary(span));
        }
    }
    for pair in edits.windows(2) {
        let (a, b) = (pair[0].span, pair[1].span);
        if a.end > b.start || (a.start > b.start) {
            return Err(EditConflict::Overlap(a, b));
        }
    }
    Ok(())
}

/// Apply a batch of edits to a text, right to left.
pub fn apply_to_text(text: &str, edits: &[TextEdit]) -> Result<String, EditConflict> {
    validate_edits(text, edits)?;
    let mut out = text.to_owned();
    for edit in edits.iter().rev() {
        out.replace_range(edit.span.start..edit.span.end, &edit.new_text);
    }
    Ok(out)
}

/// Apply a batch of edits, producing the next document version.
pub fn apply_edits(doc: &SourceDocument, edits: &[TextEdit]) -> Result<SourceDocument, EditConflict> {
    let text = apply_to_text(&doc.text, edits)?;
    Ok(SourceDocument { uri: doc.uri.clone(), text, version: doc.version + 1 })
}

/// Re-express `later` (spans in coordinates of the original text) in the
/// coordinates of the text after `earlier` has been applied. Both batches
/// must be disjoint from each other.
pub fn rebase_edits(later: &[TextEdit], earlier: &[TextEdit]) -> Vec<TextEdit> {
    later
        .iter()
        .map(|edit| {
            let shift: isize = earlier
                .iter()
                .filter(|e| e.span.end <= edit.span.start)
                .map(TextEdit::delta)
                .sum();
            let start = (edit.span.start as isize + shift) as usize;
            let end = (edit.span.end as isize + shift) as usize;
            TextEdit::new(Span::new(start, end), edit.new_text.clone())
        })
        .collect()
}

/// Canonical number formatting used for generated source text and SVG:
/// at most three fractional digits, no trailing zeros, no negative zero.
pub fn format_number(value: f64) -> String {
    if !value.is_finite() {
        return "0".to_owned();
    }
    let mut s = format!("{:.3}", value);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_owned();
    }
    s
}

/// Source-literal formatting that parses back to the identical float64.
pub fn format_literal(value: f64) -> String {
    if !value.is_finite() {
        return "0".to_owned();
    }
    if value == 0.0 {
        return "0".to_owned();
    }
    // Display for f64 is the shortest round-tripping decimal, never exponential
    format!("{value}")
}
