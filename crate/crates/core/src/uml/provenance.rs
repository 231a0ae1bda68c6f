use std::collections::BTreeMap;

use serde::Serialize;

use crate::syntax::Span;

/// Where the literal that controls a canvas element's position lives.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PosSource {
    /// Target element id for relative positions.
    pub relative_to: Option<String>,
    /// Expression assigned to `pos`.
    pub value_span: Span,
    /// The `apos(...)` / `rpos(...)` call.
    pub call_span: Span,
    /// Spans of the numeric arguments: (x, y) or (dx, dy).
    pub arg_spans: [Span; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementSource {
    pub name: String,
    /// Whole `class(...)` call including its trailing block.
    pub call_span: Span,
    /// The class block literal, if any.
    pub block: Option<Span>,
    /// The most recent `layout { ... }` block literal.
    pub layout_block: Option<Span>,
    pub pos: Option<PosSource>,
    pub width: Option<Span>,
    pub height: Option<Span>,
    /// More than one element came from this call site (e.g. a loop).
    pub shared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectionSource {
    pub expr_span: Span,
    pub with_block: Option<Span>,
    /// Argument of `start(s)`.
    pub start_arg: Option<Span>,
    /// Argument of the final `end(e)`.
    pub end_arg: Option<Span>,
    pub shared: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelSource {
    pub connection: String,
    pub call_span: Span,
    pub t_arg: Span,
    pub shared: bool,
}

/// Source locations recorded during execution, keyed by element id.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub elements: BTreeMap<String, ElementSource>,
    pub connections: BTreeMap<String, ConnectionSource>,
    pub labels: BTreeMap<String, LabelSource>,
}

impl Provenance {
    /// Flag entries whose defining call produced several elements.
    pub(crate) fn mark_shared(&mut self) {
        let mut counts: BTreeMap<Span, usize> = BTreeMap::new();
        for e in self.elements.values() {
            *counts.entry(e.call_span).or_default() += 1;
            if let Some(p) = &e.pos {
                *counts.entry(p.arg_spans[0]).or_default() += 1;
            }
        }
        for e in self.elements.values_mut() {
            let pos_shared = e.pos.as_ref().is_some_and(|p| counts[&p.arg_spans[0]] > 1);
            e.shared = counts[&e.call_span] > 1 || pos_shared;
        }
        let mut counts: BTreeMap<Span, usize> = BTreeMap::new();
        for c in self.connections.values() {
            *counts.entry(c.expr_span).or_default() += 1;
        }
        for c in self.connections.values_mut() {
            c.shared = counts[&c.expr_span] > 1;
        }
        let mut counts: BTreeMap<Span, usize> = BTreeMap::new();
        for l in self.labels.values() {
            *counts.entry(l.call_span).or_default() += 1;
        }
        for l in self.labels.values_mut() {
            l.shared = counts[&l.call_span] > 1;
        }
    }
}
