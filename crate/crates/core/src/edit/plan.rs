use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{perimeter_param, LayoutedDiagram};
use crate::model::ElementKind;
use crate::pipeline::ExecutionResult;
use crate::syntax::{format_literal, Node, NodeKind, Span, TextEdit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InteractionKind {
    MoveElement,
    ResizeElement,
    MoveConnectionAnchor,
    MoveLabel,
}

/// Which end of a connection an anchor interaction drags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AnchorEnd {
    #[default]
    Start,
    End,
}

/// Cumulative interaction parameters, relative to the interaction start.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct InteractionParams {
    pub dx: f64,
    pub dy: f64,
    pub d_width: f64,
    pub d_height: f64,
    pub d_param: f64,
}

impl InteractionParams {
    pub fn translate(dx: f64, dy: f64) -> Self {
        InteractionParams { dx, dy, ..Default::default() }
    }

    pub fn minus(&self, o: &InteractionParams) -> InteractionParams {
        InteractionParams {
            dx: self.dx - o.dx,
            dy: self.dy - o.dy,
            d_width: self.d_width - o.d_width,
            d_height: self.d_height - o.d_height,
            d_param: self.d_param - o.d_param,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == InteractionParams::default()
    }

    pub fn is_finite(&self) -> bool {
        [self.dx, self.dy, self.d_width, self.d_height, self.d_param].iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "code", rename_all = "camelCase")]
pub enum PlanError {
    #[error("{message}")]
    NotEditable { span: Span, message: String },
    #[error("no element `{id}` in the current diagram")]
    UnknownElement { id: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Axis {
    Dx,
    Dy,
    DWidth,
    DHeight,
    DParam,
    /// Constant; for values an interaction carries along unchanged.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Range {
    Free,
    NonNegative,
    /// Perimeter parameter, wraps into [0, 1).
    Perimeter,
    /// Route parameter, clamped into [0, 1].
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
struct Num {
    base: f64,
    axis: Axis,
    range: Range,
}

impl Num {
    fn value(&self, p: &InteractionParams) -> f64 {
        let d = match self.axis {
            Axis::Dx => p.dx,
            Axis::Dy => p.dy,
            Axis::DWidth => p.d_width,
            Axis::DHeight => p.d_height,
            Axis::DParam => p.d_param,
            Axis::Fixed => 0.0,
        };
        let v = self.base + d;
        match self.range {
            Range::Free => v,
            Range::NonNegative => v.max(0.0),
            Range::Perimeter => {
                let w = v.rem_euclid(1.0);
                // rem_euclid can round up to exactly 1 for tiny negatives
                if w >= 1.0 {
                    0.0
                } else {
                    w
                }
            }
            Range::Unit => v.clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Part {
    Lit(String),
    Num(Num),
}

/// One edited region of the start document.
#[derive(Debug, Clone, PartialEq)]
struct Slot {
    span: Span,
    parts: Vec<Part>,
}

impl Slot {
    fn text(&self, p: &InteractionParams) -> String {
        self.parts
            .iter()
            .map(|part| match part {
                Part::Lit(s) => s.clone(),
                Part::Num(n) => format_literal(n.value(p)),
            })
            .collect()
    }
}

/// How any parameter value maps to source edits, computed once per interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct EditPlan {
    pub target: String,
    pub kind: InteractionKind,
    pub anchor: AnchorEnd,
    slots: Vec<Slot>,
}

impl EditPlan {
    /// Edits against the interaction-start document.
    pub fn edits(&self, p: &InteractionParams) -> Vec<TextEdit> {
        self.slots.iter().map(|s| TextEdit::new(s.span, s.text(p))).collect()
    }

    /// Edits turning the document produced for `from` into the one for `to`;
    /// `from = None` stands for the untouched start document `start`.
    pub fn incremental(&self, start: &str, from: Option<&InteractionParams>, to: &InteractionParams) -> Vec<TextEdit> {
        let mut shift: isize = 0;
        let mut out = Vec::new();
        for slot in &self.slots {
            let old = match from {
                Some(p) => slot.text(p),
                None => slot.span.slice(start).to_owned(),
            };
            let new = slot.text(to);
            let start = (slot.span.start as isize + shift) as usize;
            if old != new {
                out.push(TextEdit::new(Span::new(start, start + old.len()), new));
            }
            shift += old.len() as isize - slot.span.len() as isize;
        }
        out
    }

    /// True when the plan inserts new source rather than editing literals.
    pub fn is_insertion(&self) -> bool {
        self.slots.iter().any(|s| s.span.is_empty())
    }

    /// Spans of the start document this plan rewrites.
    pub fn spans(&self) -> Vec<Span> {
        self.slots.iter().map(|s| s.span).collect()
    }
}

fn component_prefix(id: &str, starts: &str) -> Option<String> {
    let parts: Vec<&str> = id.split('/').collect();
    let i = parts.iter().rposition(|p| p.starts_with(starts))?;
    Some(parts[..=i].join("/"))
}

/// Map a hit id (any element inside a class or connection) to the element an
/// interaction of `kind` manipulates.
pub fn interaction_target(id: &str, kind: InteractionKind) -> Option<String> {
    let prefix = match kind {
        InteractionKind::MoveElement | InteractionKind::ResizeElement => "canvasElement",
        InteractionKind::MoveConnectionAnchor => "canvasConnection",
        InteractionKind::MoveLabel => "label",
    };
    component_prefix(id, prefix)
}

fn literal(program: &Node, span: Span) -> Option<f64> {
    match program.find_exact(span)?.kind {
        NodeKind::NumberLit(v) => Some(v),
        _ => None,
    }
}

fn not_editable(span: Span, message: impl Into<String>) -> PlanError {
    PlanError::NotEditable { span, message: message.into() }
}

fn number_slot(program: &Node, span: Span, axis: Axis, range: Range, what: &str) -> Result<Slot, PlanError> {
    let base = literal(program, span)
        .ok_or_else(|| not_editable(span, format!("{what} is computed by an expression, not a number literal")))?;
    Ok(Slot { span, parts: vec![Part::Num(Num { base, axis, range })] })
}

fn num(base: f64, axis: Axis, range: Range) -> Part {
    Part::Num(Num { base, axis, range })
}

fn lit(s: &str) -> Part {
    Part::Lit(s.to_owned())
}

/// Build the edit plan for an interaction on `element_id` (after hit-id
/// resolution) against the source and results of the current render.
pub fn plan_interaction(
    source: &str,
    program: &Node,
    exec: &ExecutionResult,
    layout: &LayoutedDiagram,
    element_id: &str,
    kind: InteractionKind,
    anchor: AnchorEnd,
) -> Result<EditPlan, PlanError> {
    let target = interaction_target(element_id, kind).ok_or_else(|| PlanError::UnknownElement { id: element_id.to_owned() })?;
    let placed = layout.find(&target).ok_or_else(|| PlanError::UnknownElement { id: target.clone() })?;
    let slots = match kind {
        InteractionKind::MoveElement | InteractionKind::ResizeElement => {
            let src = exec
                .provenance
                .elements
                .get(&target)
                .ok_or_else(|| not_editable(placed.origin, "element has no editable definition"))?;
            if src.shared {
                return Err(not_editable(src.call_span, "element is defined by code that creates several elements"));
            }
            let mut slots = Vec::new();
            let mut missing: Vec<Part> = Vec::new();
            if kind == InteractionKind::MoveElement {
                match &src.pos {
                    Some(p) => {
                        slots.push(number_slot(program, p.arg_spans[0], Axis::Dx, Range::Free, "x position")?);
                        slots.push(number_slot(program, p.arg_spans[1], Axis::Dy, Range::Free, "y position")?);
                    }
                    None => missing.extend([
                        lit("pos = apos("),
                        num(placed.x, Axis::Dx, Range::Free),
                        lit(", "),
                        num(placed.y, Axis::Dy, Range::Free),
                        lit(")"),
                    ]),
                }
            } else {
                for (span, axis, name, current) in
                    [(src.width, Axis::DWidth, "width", placed.width), (src.height, Axis::DHeight, "height", placed.height)]
                {
                    match span {
                        Some(span) => slots.push(number_slot(program, span, axis, Range::NonNegative, name)?),
                        None => {
                            if !missing.is_empty() {
                                missing.push(lit("; "));
                            }
                            missing.extend([lit(name), lit(" = "), num(current, axis, Range::NonNegative)]);
                        }
                    }
                }
            }
            if !missing.is_empty() {
                slots.push(insertion(source, src.layout_block, src.block, src.call_span, missing)?);
            }
            slots
        }
        InteractionKind::MoveConnectionAnchor => {
            let src = exec
                .provenance
                .connections
                .get(&target)
                .ok_or_else(|| not_editable(placed.origin, "connection has no editable definition"))?;
            if src.shared {
                return Err(not_editable(src.expr_span, "connection is defined by code that creates several connections"));
            }
            let arg = match anchor {
                AnchorEnd::Start => src.start_arg,
                AnchorEnd::End => src.end_arg,
            };
            match (arg, src.with_block) {
                (Some(span), _) => vec![number_slot(program, span, Axis::DParam, Range::Perimeter, "anchor")?],
                (None, Some(block)) => {
                    return Err(not_editable(block, "route has no anchor literal for this end"));
                }
                (None, None) => {
                    let (s, e) = current_anchors(exec, layout, &target)
                        .ok_or_else(|| not_editable(src.expr_span, "connection is not routed"))?;
                    let (s_axis, e_axis) = match anchor {
                        AnchorEnd::Start => (Axis::DParam, Axis::Fixed),
                        AnchorEnd::End => (Axis::Fixed, Axis::DParam),
                    };
                    let sp = Num { base: s, axis: s_axis, range: Range::Perimeter };
                    let ep = Num { base: e, axis: e_axis, range: Range::Perimeter };
                    vec![Slot {
                        span: Span::empty(src.expr_span.end),
                        parts: vec![
                            lit(" with { over = start("),
                            Part::Num(sp),
                            lit(").line(end("),
                            Part::Num(ep),
                            lit(")) }"),
                        ],
                    }]
                }
            }
        }
        InteractionKind::MoveLabel => {
            let src = exec
                .provenance
                .labels
                .get(&target)
                .ok_or_else(|| not_editable(placed.origin, "label has no editable definition"))?;
            if src.shared {
                return Err(not_editable(src.call_span, "label is defined by code that creates several labels"));
            }
            vec![number_slot(program, src.t_arg, Axis::DParam, Range::Unit, "label position")?]
        }
    };
    Ok(EditPlan { target, kind, anchor, slots })
}

/// Insert `fields` into the last layout block, else a new layout block into
/// the class block, else a new class block after the call.
fn insertion(
    source: &str,
    layout_block: Option<Span>,
    block: Option<Span>,
    call_span: Span,
    fields: Vec<Part>,
) -> Result<Slot, PlanError> {
    let opens = |s: Span| source.as_bytes().get(s.start) == Some(&b'{');
    let mut parts = Vec::new();
    let at = match (layout_block, block) {
        (Some(lb), _) if opens(lb) => {
            parts.push(lit(" "));
            parts.extend(fields);
            parts.push(lit(";"));
            lb.start + 1
        }
        (None, Some(b)) if opens(b) => {
            parts.push(lit(" layout { "));
            parts.extend(fields);
            parts.push(lit(" };"));
            b.start + 1
        }
        (None, None) => {
            parts.push(lit(" { layout { "));
            parts.extend(fields);
            parts.push(lit(" } }"));
            call_span.end
        }
        _ => return Err(not_editable(call_span, "no place to insert a layout block")),
    };
    Ok(Slot { span: Span::empty(at), parts })
}

/// Perimeter parameters of the routed endpoints of a connection.
fn current_anchors(exec: &ExecutionResult, layout: &LayoutedDiagram, id: &str) -> Option<(f64, f64)> {
    let diagram = exec.diagram.as_ref()?;
    let spec = match &diagram.root.find(id)?.props {
        crate::model::Props::Connection(spec) => spec.clone(),
        _ => return None,
    };
    let conn = layout.find(id)?;
    let ends = match &conn.content {
        crate::layout::Content::Connection(ends) => ends.clone(),
        _ => return None,
    };
    let src = layout.find(&spec.source)?.rect();
    let dst = layout.find(&spec.target)?.rect();
    let clamp = |v: f64| if v >= 1.0 { 0.0 } else { v };
    Some((clamp(perimeter_param(&src, ends.start)), clamp(perimeter_param(&dst, ends.end))))
}

/// Elements of kind `kind` the hit resolves to, if any.
pub fn target_kind(kind: InteractionKind) -> ElementKind {
    match kind {
        InteractionKind::MoveElement | InteractionKind::ResizeElement => ElementKind::CanvasElement,
        InteractionKind::MoveConnectionAnchor => ElementKind::CanvasConnection,
        InteractionKind::MoveLabel => ElementKind::Label,
    }
}
