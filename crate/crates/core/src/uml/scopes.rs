//! `layout`, `styles`, `apos` and `rpos`.

use std::any::Any;
use std::collections::BTreeMap;

use super::{native, InfoKind, PosSource, Shared};
use crate::diagnostics::Diagnostic;
use crate::interp::{CallArgs, EvalError, Function, HostValue, Interpreter, Object, ObjectRef, RuntimeError, Value};
use crate::model::{is_known_attribute, AttrValue, Attributes, ElementKind, Position, Props, Selector, StyleRule};
use crate::syntax::Span;

/// A position produced by `apos(x, y)` or `rpos(target, dx, dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValue {
    pub position: Position,
    pub call_span: Span,
    pub arg_spans: [Span; 2],
}

impl HostValue for PointValue {
    fn type_name(&self) -> &'static str {
        "point"
    }

    fn field(&self, name: &str) -> Option<Value> {
        match (&self.position, name) {
            (Position::Absolute { x, .. }, "x") => Some(Value::Number(*x)),
            (Position::Absolute { y, .. }, "y") => Some(Value::Number(*y)),
            (Position::Relative { dx, .. }, "dx") => Some(Value::Number(*dx)),
            (Position::Relative { dy, .. }, "dy") => Some(Value::Number(*dy)),
            _ => None,
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub(super) fn bindings(state: &Shared) -> Vec<(String, Value)> {
    let apos = native("apos", |_, args| {
        let x = args.number(0, "x")?;
        let y = args.number(1, "y")?;
        Ok(host(PointValue { position: Position::Absolute { x, y }, call_span: args.call_span, arg_spans: [args.span(0), args.span(1)] }))
    });
    let st = state.clone();
    let rpos = native("rpos", move |_, args| {
        let index = super::class_operand(&st, &args, 0, "rpos target")?;
        let dx = args.number(1, "dx")?;
        let dy = args.number(2, "dy")?;
        let s = st.borrow();
        let target = s.node_id(s.elements[index].node);
        Ok(host(PointValue {
            position: Position::Relative { target, dx, dy },
            call_span: args.call_span,
            arg_spans: [args.span(1), args.span(2)],
        }))
    });
    let st = state.clone();
    let styles = native("styles", move |interp, args| {
        let block = args.function(0, "styles block")?;
        let root = st.borrow().canvas(args.call_span)?;
        run_styles(interp, &st, &block, args.call_span, root, Vec::new())?;
        Ok(Value::Null)
    });
    vec![("apos".into(), apos), ("rpos".into(), rpos), ("styles".into(), styles)]
}

fn host<T: HostValue + 'static>(v: T) -> Value {
    Value::Host(std::rc::Rc::new(v))
}

/// `styles { ... }` bound to a class or connection.
pub(super) fn styles_fn(state: &Shared, index: usize) -> Value {
    let st = state.clone();
    native("styles", move |interp, args| {
        let block = args.function(0, "styles block")?;
        let (sink, scope_node) = {
            let s = st.borrow();
            let info = &s.elements[index];
            match info.kind {
                InfoKind::Class { rect, .. } => (rect, info.node),
                InfoKind::Connection => (info.node, info.node),
            }
        };
        let scope_class = format!("scope-{index}");
        {
            let mut s = st.borrow_mut();
            let classes = &mut s.builder.node_mut(scope_node).classes;
            if !classes.contains(&scope_class) {
                classes.push(scope_class.clone());
            }
        }
        run_styles(interp, &st, &block, args.call_span, sink, vec![Selector::class(&scope_class)])?;
        Ok(Value::Null)
    })
}

fn run_styles(
    interp: &mut Interpreter,
    state: &Shared,
    block: &std::rc::Rc<Function>,
    call_span: Span,
    sink: usize,
    prefix: Vec<Selector>,
) -> Result<(), EvalError> {
    let target = Object::new_ref();
    let bindings = [("cls", rule_fn(state, prefix.clone(), false)), ("type", rule_fn(state, prefix, true))];
    interp.call_block(block, Some(target.clone()), &bindings, call_span, true)?;
    let attrs = collect_attributes(interp, &target);
    let mut s = state.borrow_mut();
    s.builder.node_mut(sink).attributes.extend(attrs);
    Ok(())
}

/// `cls(name) { ... }` or `type(kind) { ... }` inside a styles block.
fn rule_fn(state: &Shared, prefix: Vec<Selector>, by_type: bool) -> Value {
    let st = state.clone();
    let name = if by_type { "type" } else { "cls" };
    native(name, move |interp, args| {
        let name = args.string(0, if by_type { "element kind" } else { "class name" })?;
        let block = args.function(1, "rule block")?;
        let selector = if by_type {
            let kind = ElementKind::parse(&name)
                .ok_or_else(|| RuntimeError::new(args.span(0), "UnknownElementKind", format!("unknown element kind `{name}`")))?;
            Selector::of_type(kind)
        } else {
            Selector::class(&name)
        };
        let mut chain = prefix.clone();
        chain.push(selector);
        // reserve the slot first so nested rules come later in source order
        let slot = {
            let mut s = st.borrow_mut();
            let index = s.rules.len();
            s.rules.push(StyleRule { selectors: chain.clone(), attributes: Attributes::new(), source_index: index });
            index
        };
        let target = Object::new_ref();
        let nested = [("cls", rule_fn(&st, chain.clone(), false)), ("type", rule_fn(&st, chain, true))];
        let result = interp.call_block(&block, Some(target.clone()), &nested, args.call_span, true);
        let attrs = collect_attributes(interp, &target);
        st.borrow_mut().rules[slot].attributes = attrs;
        result.map(|_| Value::Null)
    })
}

fn collect_attributes(interp: &mut Interpreter, target: &ObjectRef) -> Attributes {
    let obj = target.borrow();
    let mut out = BTreeMap::new();
    for (name, value) in &obj.fields {
        let span = obj.field_spans.get(name).copied().unwrap_or_default();
        let v = match value {
            Value::Number(n) => AttrValue::Number(*n),
            Value::Str(s) => AttrValue::Str(s.to_string()),
            Value::Bool(b) => AttrValue::Bool(*b),
            other => {
                interp.report(Diagnostic::error(
                    span,
                    "TypeMismatch",
                    format!("style attribute `{name}` must be a number, string or boolean, got {}", other.type_name()),
                ));
                continue;
            }
        };
        if !is_known_attribute(name) {
            interp.report(Diagnostic::warning(span, "UnknownAttribute", format!("unknown style attribute `{name}`")));
        }
        out.insert(name.clone(), v);
    }
    out
}

/// `layout { pos = ..., width = ..., height = ... }` bound to a class.
pub(super) fn layout_fn(state: &Shared, index: usize) -> Value {
    let st = state.clone();
    native("layout", move |interp, args: CallArgs| {
        let block = args.function(0, "layout block")?;
        let target = Object::new_ref();
        let result = interp.call_block(&block, Some(target.clone()), &[], args.call_span, true);
        let obj = target.borrow();
        let mut guard = st.borrow_mut();
        let s = &mut *guard;
        let node = s.elements[index].node;
        let id = s.node_id(node);
        if let Some(src) = s.provenance.elements.get_mut(&id) {
            src.layout_block = block.body_span();
        }
        for (name, value) in &obj.fields {
            let span = obj.field_spans.get(name).copied().unwrap_or_default();
            match name.as_str() {
                "pos" => match value.as_host::<PointValue>() {
                    Some(p) => {
                        s.builder.node_mut(node).props = Props::Placement { pos: Some(p.position.clone()) };
                        s.elements[index].pos = Some(value.clone());
                        if let Some(src) = s.provenance.elements.get_mut(&id) {
                            src.pos = Some(PosSource {
                                relative_to: match &p.position {
                                    Position::Relative { target, .. } => Some(target.clone()),
                                    Position::Absolute { .. } => None,
                                },
                                value_span: span,
                                call_span: p.call_span,
                                arg_spans: p.arg_spans,
                            });
                        }
                    }
                    None => interp.report(Diagnostic::error(
                        span,
                        "TypeMismatch",
                        format!("pos must be a point from apos or rpos, got {}", value.type_name()),
                    )),
                },
                "width" | "height" => match value {
                    Value::Number(n) if *n >= 0.0 => {
                        s.builder.node_mut(node).attributes.insert(name.clone(), AttrValue::Number(*n));
                        let info = &mut s.elements[index];
                        let src = s.provenance.elements.get_mut(&id);
                        if name == "width" {
                            info.width = Some(*n);
                            if let Some(src) = src {
                                src.width = Some(span);
                            }
                        } else {
                            info.height = Some(*n);
                            if let Some(src) = src {
                                src.height = Some(span);
                            }
                        }
                    }
                    other => interp.report(Diagnostic::error(
                        span,
                        "TypeMismatch",
                        format!("{name} must be a non-negative number, got {}", other.display()),
                    )),
                },
                other => interp.report(Diagnostic::warning(span, "UnknownAttribute", format!("unknown layout field `{other}`"))),
            }
        }
        result.map(|_| Value::Null)
    })
}
