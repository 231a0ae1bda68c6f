//! Association operators, `with` routing blocks, route builders and labels.

use std::any::Any;
use std::rc::Rc;

use super::{native, ConnectionSource, ElementInfo, InfoKind, LabelSource, PointValue, Shared};
use crate::diagnostics::Diagnostic;
use crate::interp::{CallArgs, ElementHandle, EvalError, HostValue, Object, RuntimeError, Value};
use crate::layout::LABEL_OFFSET;
use crate::model::{AttrValue, ConnectionSpec, ElementKind, LabelSpec, Marker, Props, SegmentEnd, SegmentMode, SegmentSpec};
use crate::syntax::Span;

/// Operator names understood inside a diagram.
pub const OPERATORS: [&str; 13] =
    ["--", "-->", "<--", "<-->", "!--", "--!", "<>--", "--<>", "*--", "--*", "extends", "implements", "with"];

/// (start marker, end marker, dashed) for an association operator.
pub fn operator_markers(op: &str) -> Option<(Marker, Marker, bool)> {
    use Marker::*;
    Some(match op {
        "--" => (None, None, false),
        "-->" => (None, OpenArrow, false),
        "<--" => (OpenArrow, None, false),
        "<-->" => (OpenArrow, OpenArrow, false),
        "!--" => (Cross, None, false),
        "--!" => (None, Cross, false),
        "<>--" => (HollowDiamond, None, false),
        "--<>" => (None, HollowDiamond, false),
        "*--" => (FilledDiamond, None, false),
        "--*" => (None, FilledDiamond, false),
        "extends" => (None, HollowTriangle, false),
        "implements" => (None, HollowTriangle, true),
        _ => return Option::None,
    })
}

#[derive(Debug, Clone)]
enum StepEnd {
    Target,
    Anchor { e: f64, span: Span },
    Point(PointValue),
}

#[derive(Debug, Clone)]
struct Step {
    mode: SegmentMode,
    end: StepEnd,
    call_span: Span,
}

/// Value of `start(...)` and of each chained segment call.
#[derive(Debug, Clone)]
struct RouteBuilder {
    start: Option<(f64, Span)>,
    steps: Vec<Step>,
}

#[derive(Debug, Clone)]
struct EndAnchor {
    e: f64,
    span: Span,
}

impl HostValue for EndAnchor {
    fn type_name(&self) -> &'static str {
        "anchor"
    }

    fn field(&self, name: &str) -> Option<Value> {
        (name == "e").then_some(Value::Number(self.e))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn unit_interval(args: &CallArgs, i: usize, what: &str, closed: bool) -> Result<f64, RuntimeError> {
    let v = args.number(i, what)?;
    let ok = v >= 0.0 && if closed { v <= 1.0 } else { v < 1.0 };
    if !ok {
        let range = if closed { "[0, 1]" } else { "[0, 1)" };
        return Err(RuntimeError::new(args.span(i), "InvalidRoute", format!("{what} must be in {range}, got {}", crate::syntax::format_number(v))));
    }
    Ok(v)
}

fn step_end(args: &CallArgs, i: usize) -> Result<StepEnd, RuntimeError> {
    let v = args.get(i);
    if matches!(v, Value::Null) {
        return Ok(StepEnd::Target);
    }
    if let Some(a) = v.as_host::<EndAnchor>() {
        return Ok(StepEnd::Anchor { e: a.e, span: a.span });
    }
    if let Some(p) = v.as_host::<PointValue>() {
        return Ok(StepEnd::Point(p.clone()));
    }
    Err(RuntimeError::type_mismatch(args.span(i), format!("segment target must be end(...), apos or rpos, got {}", v.type_name())))
}

impl RouteBuilder {
    fn then(&self, step: Step) -> Value {
        let mut next = self.clone();
        next.steps.push(step);
        Value::Host(Rc::new(next))
    }
}

impl HostValue for RouteBuilder {
    fn type_name(&self) -> &'static str {
        "route"
    }

    fn field(&self, name: &str) -> Option<Value> {
        let this = self.clone();
        let f = match name {
            "line" => native("line", move |_, args| {
                let end = step_end(&args, 0)?;
                Ok(this.then(Step { mode: SegmentMode::Line, end, call_span: args.call_span }))
            }),
            "axisAligned" => native("axisAligned", move |_, args| {
                let f = unit_interval(&args, 0, "axis position", true)?;
                let end = step_end(&args, 1)?;
                Ok(this.then(Step { mode: SegmentMode::AxisAligned { f }, end, call_span: args.call_span }))
            }),
            "bezier" => native("bezier", move |_, args| {
                let c1x = args.number(0, "c1x")?;
                let c1y = args.number(1, "c1y")?;
                let c2x = args.number(2, "c2x")?;
                let c2y = args.number(3, "c2y")?;
                let end = step_end(&args, 4)?;
                Ok(this.then(Step { mode: SegmentMode::Bezier { c1x, c1y, c2x, c2y }, end, call_span: args.call_span }))
            }),
            _ => return None,
        };
        Some(f)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub(super) fn bindings(state: &Shared) -> Vec<(String, Value)> {
    let mut out = Vec::new();
    for op in OPERATORS {
        let st = state.clone();
        let f = if op == "with" {
            native(op, move |interp, args| with(interp, &st, args))
        } else {
            native(op, move |_, args| connect(&st, op, args))
        };
        out.push((op.to_owned(), f));
    }
    out.push((
        "start".into(),
        native("start", |_, args| {
            let start = if args.is_empty() { None } else { Some((unit_interval(&args, 0, "start anchor", false)?, args.span(0))) };
            Ok(Value::Host(Rc::new(RouteBuilder { start, steps: Vec::new() })))
        }),
    ));
    out.push((
        "end".into(),
        native("end", |_, args| {
            let e = unit_interval(&args, 0, "end anchor", false)?;
            Ok(Value::Host(Rc::new(EndAnchor { e, span: args.span(0) })))
        }),
    ));
    let st = state.clone();
    out.push(("label".into(), native("label", move |_, args| label(&st, args))));
    out
}

fn connect(state: &Shared, op: &str, args: CallArgs) -> Result<Value, EvalError> {
    let (start_marker, end_marker, dashed) = operator_markers(op).expect("bound operators have markers");
    let what = format!("operand of `{op}`");
    let a = super::class_operand(state, &args, 0, &what)?;
    let b = super::class_operand(state, &args, 1, &what)?;
    let mut guard = state.borrow_mut();
    let s = &mut *guard;
    let canvas = s.canvas(args.call_span)?;
    let conn = s.add(canvas, ElementKind::CanvasConnection, args.call_span, &[]);
    let source = s.node_id(s.elements[a].node);
    let target = s.node_id(s.elements[b].node);
    s.builder.node_mut(conn).props =
        Props::Connection(ConnectionSpec { source, target, start_marker, end_marker, dashed, start_anchor: None });
    if dashed {
        s.set_attr(conn, "strokeDash", AttrValue::from("6 4"));
    }
    let id = s.node_id(conn);
    s.provenance.connections.insert(
        id,
        ConnectionSource { expr_span: args.call_span, with_block: None, start_arg: None, end_arg: None, shared: false },
    );
    s.elements.push(ElementInfo { node: conn, kind: InfoKind::Connection, name: op.to_owned(), pos: None, width: None, height: None });
    Ok(Value::Element(ElementHandle(s.elements.len() - 1)))
}

fn connection_operand(state: &Shared, args: &CallArgs) -> Result<usize, RuntimeError> {
    let s = state.borrow();
    match args.get(0) {
        Value::Element(h) if s.elements.get(h.0).is_some_and(|e| e.kind == InfoKind::Connection) => Ok(h.0),
        other => Err(RuntimeError::type_mismatch(args.span(0), format!("`with` needs a connection, got {}", other.type_name()))),
    }
}

fn with(interp: &mut crate::interp::Interpreter, state: &Shared, args: CallArgs) -> Result<Value, EvalError> {
    let index = connection_operand(state, &args)?;
    let block = args.function(1, "with block")?;
    let conn = state.borrow().elements[index].node;
    state.borrow_mut().with_stack.push(conn);
    let target = Object::new_ref();
    let styles = super::scopes::styles_fn(state, index);
    let result = interp.call_block(&block, Some(target.clone()), &[("styles", styles)], args.call_span, true);
    state.borrow_mut().with_stack.pop();
    let obj = target.borrow();
    let mut guard = state.borrow_mut();
    let s = &mut *guard;
    let id = s.node_id(conn);
    if let Some(src) = s.provenance.connections.get_mut(&id) {
        src.with_block = block.body_span();
    }
    for (name, value) in &obj.fields {
        let span = obj.field_spans.get(name).copied().unwrap_or_default();
        if name != "over" {
            interp.report(Diagnostic::warning(span, "UnknownAttribute", format!("unknown connection field `{name}`")));
            continue;
        }
        let Some(route) = value.as_host::<RouteBuilder>() else {
            interp.report(Diagnostic::error(span, "TypeMismatch", format!("over must be a route from start(...), got {}", value.type_name())));
            continue;
        };
        let has_route = s.builder.node(conn).children.iter().any(|c| s.builder.node(*c).kind == ElementKind::ConnectionSegment);
        if has_route {
            interp.report(Diagnostic::error(span, "DuplicateRoute", "this connection already has a route"));
            continue;
        }
        if let Props::Connection(spec) = &mut s.builder.node_mut(conn).props {
            spec.start_anchor = route.start.map(|(v, _)| v);
        }
        let src = s.provenance.connections.get_mut(&id).expect("recorded at creation");
        src.start_arg = route.start.map(|(_, sp)| sp);
        src.end_arg = match route.steps.last().map(|st| &st.end) {
            Some(StepEnd::Anchor { span, .. }) => Some(*span),
            _ => None,
        };
        for step in &route.steps {
            let seg = s.add(conn, ElementKind::ConnectionSegment, step.call_span, &[]);
            let end = match &step.end {
                StepEnd::Target => SegmentEnd::Target,
                StepEnd::Anchor { e, .. } => SegmentEnd::Anchor { e: *e },
                StepEnd::Point(p) => SegmentEnd::Point { position: p.position.clone() },
            };
            s.builder.node_mut(seg).props = Props::Segment(SegmentSpec { mode: step.mode.clone(), end });
        }
    }
    drop(guard);
    drop(obj);
    result?;
    Ok(args.get(0))
}

fn label(state: &Shared, args: CallArgs) -> Result<Value, EvalError> {
    let text = args.string(0, "label text")?;
    let t = unit_interval(&args, 1, "label position", true)?;
    let distance = match args.get(2) {
        Value::Null => LABEL_OFFSET,
        _ => args.number(2, "label distance")?,
    };
    let mut guard = state.borrow_mut();
    let s = &mut *guard;
    let Some(&conn) = s.with_stack.last() else {
        return Err(RuntimeError::new(args.call_span, "MisplacedLabel", "label can only be used inside a with block").into());
    };
    let l = s.add(conn, ElementKind::Label, args.call_span, &[]);
    s.builder.node_mut(l).props = Props::Label(LabelSpec { text: text.to_string(), t, distance });
    let id = s.node_id(l);
    let connection = s.node_id(conn);
    s.provenance.labels.insert(id, LabelSource { connection, call_span: args.call_span, t_arg: args.span(1), shared: false });
    Ok(Value::Null)
}
