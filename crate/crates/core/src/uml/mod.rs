//! Class-diagram vocabulary: `classDiagram`, `class`, `enum`, member
//! sections, association operators, `with` routing, `layout` and `styles`.

mod provenance;
mod relations;
mod scopes;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

pub use provenance::{ConnectionSource, ElementSource, LabelSource, PosSource, Provenance};
pub use relations::{operator_markers, OPERATORS};
pub use scopes::PointValue;

use crate::diagnostics::Diagnostic;
use crate::interp::{CallArgs, ElementHandle, EvalError, Function, Interpreter, RuntimeError, Value};
use crate::model::{
    AttrValue, Diagram, ElementKind, ElementNode, FontSet, Props, Selector, StyleRule, TreeBuilder,
};
use crate::syntax::{Node, NodeKind, Span};

pub(crate) type Shared = Rc<RefCell<UmlState>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum InfoKind {
    Class { rect: usize, vbox: usize },
    Connection,
}

#[derive(Debug)]
pub(crate) struct ElementInfo {
    pub node: usize,
    pub kind: InfoKind,
    pub name: String,
    pub pos: Option<Value>,
    pub width: Option<f64>,
    pub height: Option<f64>,
}

#[derive(Debug, Default)]
struct PendingClass {
    attributes: Vec<(String, Span)>,
    methods: Vec<(String, Span)>,
}

#[derive(Debug, Default)]
pub(crate) struct UmlState {
    pub builder: TreeBuilder,
    pub canvas: Option<usize>,
    active: bool,
    finished: bool,
    pub rules: Vec<StyleRule>,
    pub elements: Vec<ElementInfo>,
    classes: Vec<PendingClass>,
    /// Connections whose `with` block is running.
    pub with_stack: Vec<usize>,
    pub provenance: Provenance,
}

impl UmlState {
    pub fn node_id(&self, handle: usize) -> String {
        self.builder.node(handle).id.clone()
    }

    pub fn add(&mut self, parent: usize, kind: ElementKind, origin: Span, classes: &[&str]) -> usize {
        let h = self.builder.add_child(parent, kind, origin).expect("DSL builds only legal trees");
        self.builder.node_mut(h).classes = classes.iter().map(|c| (*c).to_owned()).collect();
        h
    }

    pub fn set_attr(&mut self, handle: usize, name: &str, value: AttrValue) {
        self.builder.node_mut(handle).attributes.insert(name.to_owned(), value);
    }

    fn canvas(&self, span: Span) -> Result<usize, RuntimeError> {
        match (self.active, self.canvas) {
            (true, Some(c)) => Ok(c),
            _ => Err(RuntimeError::new(span, "NoDiagram", "diagram elements can only be created inside classDiagram")),
        }
    }
}

/// What a run of the class-diagram module produced.
#[derive(Debug, Clone)]
pub struct UmlOutput {
    pub diagram: Diagram,
    pub origins: BTreeMap<String, Span>,
    pub provenance: Provenance,
}

pub(crate) fn native(
    name: &str,
    f: impl Fn(&mut Interpreter, CallArgs) -> Result<Value, EvalError> + 'static,
) -> Value {
    Value::Function(Function::native(name, f))
}

fn default_rules() -> Vec<StyleRule> {
    let rule = |sel: Selector, name: &str, value: AttrValue| (sel, name.to_owned(), value);
    [
        rule(Selector::of_type(ElementKind::Rect), "fill", AttrValue::from("#ffffff")),
        rule(Selector::class("name"), "fontWeight", AttrValue::from("bold")),
        rule(Selector::class("abstract"), "fontStyle", AttrValue::from("italic")),
        rule(Selector::class("stereotype"), "fontSize", AttrValue::Number(12.0)),
        rule(Selector::of_type(ElementKind::Label), "fontSize", AttrValue::Number(12.0)),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (sel, name, value))| StyleRule {
        selectors: vec![sel],
        attributes: BTreeMap::from([(name, value)]),
        source_index: i,
    })
    .collect()
}

/// Install `classDiagram` into the interpreter's globals.
pub fn install(interp: &mut Interpreter) -> UmlHandle {
    let state: Shared = Rc::new(RefCell::new(UmlState::default()));
    let st = state.clone();
    interp.globals().define(
        "classDiagram",
        native("classDiagram", move |interp, args| class_diagram(interp, &st, args)),
    );
    let st = state.clone();
    interp.set_member_hook(Rc::new(move |interp, handle, name, span| member(interp, &st, handle, name, span)));
    UmlHandle { state }
}

/// Access to the module state after evaluation.
pub struct UmlHandle {
    state: Shared,
}

impl UmlHandle {
    pub fn finish(self) -> UmlOutput {
        let mut s = self.state.borrow_mut();
        let root = match s.canvas {
            Some(c) => s.builder.build(c),
            None => Diagram::empty().root,
        };
        let mut origins = BTreeMap::new();
        root.walk(&mut |n: &ElementNode| {
            origins.insert(n.id.clone(), n.origin);
        });
        s.provenance.mark_shared();
        let rules = if s.canvas.is_some() { std::mem::take(&mut s.rules) } else { Vec::new() };
        UmlOutput {
            diagram: Diagram::new(root, rules, FontSet::bundled()),
            origins,
            provenance: std::mem::take(&mut s.provenance),
        }
    }
}

fn class_diagram(interp: &mut Interpreter, state: &Shared, args: CallArgs) -> Result<Value, EvalError> {
    {
        let s = state.borrow();
        if s.active {
            return Err(RuntimeError::new(args.call_span, "NestedDiagram", "nested diagram: classDiagram cannot be used inside another diagram").into());
        }
        if s.finished {
            return Err(RuntimeError::new(args.call_span, "MultipleDiagrams", "a program may define only one diagram").into());
        }
    }
    let block = args.function(0, "diagram block")?;
    {
        let mut s = state.borrow_mut();
        let root = s.builder.add_root(ElementKind::Canvas, args.call_span);
        s.canvas = Some(root);
        s.active = true;
        s.rules = default_rules();
    }
    let bindings = diagram_bindings(state);
    let refs: Vec<(&str, Value)> = bindings.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    let result = interp.call_block(&block, None, &refs, args.call_span, true);
    {
        let mut s = state.borrow_mut();
        s.active = false;
        s.finished = true;
    }
    result.map(|_| Value::Null)
}

fn diagram_bindings(state: &Shared) -> Vec<(String, Value)> {
    let mut out: Vec<(String, Value)> = Vec::new();
    let st = state.clone();
    out.push(("class".into(), native("class", move |interp, args| class_fn(interp, &st, args, false))));
    let st = state.clone();
    out.push(("enum".into(), native("enum", move |interp, args| class_fn(interp, &st, args, true))));
    for (name, prefix) in [("public", "+"), ("private", "-"), ("protected", "#"), ("package", "~")] {
        let st = state.clone();
        out.push((name.into(), native(name, move |interp, args| section(interp, &st, args, prefix))));
    }
    out.extend(scopes::bindings(state));
    out.extend(relations::bindings(state));
    out
}

fn class_fn(interp: &mut Interpreter, state: &Shared, args: CallArgs, is_enum: bool) -> Result<Value, EvalError> {
    let what = if is_enum { "enum name" } else { "class name" };
    let name = args.string(0, what)?;
    let block = match args.get(1) {
        Value::Function(f) => Some(f),
        Value::Null => None,
        other => return Err(RuntimeError::type_mismatch(args.span(1), format!("expected a block, got {}", other.type_name())).into()),
    };
    let is_abstract = args.named("abstract").is_some_and(Value::is_truthy);
    let stereotype = match args.named.get("stereotype") {
        Some((Value::Str(s), span)) => Some((s.to_string(), *span)),
        Some((other, span)) => {
            return Err(RuntimeError::type_mismatch(*span, format!("stereotype must be a string, got {}", other.type_name())).into())
        }
        None if is_enum => Some(("enumeration".to_owned(), args.span(0))),
        None => None,
    };
    let index = {
        let mut s = state.borrow_mut();
        let canvas = s.canvas(args.call_span)?;
        if !s.classes.is_empty() {
            return Err(RuntimeError::new(args.call_span, "NestedClass", "classes cannot be declared inside a class block").into());
        }
        let ce = s.add(canvas, ElementKind::CanvasElement, args.call_span, &["classElement"]);
        s.builder.node_mut(ce).props = Props::Placement { pos: None };
        let rect = s.add(ce, ElementKind::Rect, args.call_span, &["class"]);
        s.set_attr(rect, "padding", AttrValue::Number(0.0));
        let vbox = s.add(rect, ElementKind::Vbox, args.call_span, &[]);
        s.set_attr(vbox, "align", AttrValue::from("stretch"));
        let title = s.add(vbox, ElementKind::Rect, args.call_span, &["title"]);
        let tv = s.add(title, ElementKind::Vbox, args.call_span, &[]);
        s.set_attr(tv, "align", AttrValue::from("center"));
        if let Some((st, span)) = &stereotype {
            let t = s.add(tv, ElementKind::Text, *span, &["stereotype"]);
            s.builder.node_mut(t).props = Props::Text { content: format!("«{st}»") };
        }
        let classes: &[&str] = if is_abstract { &["name", "abstract"] } else { &["name"] };
        let t = s.add(tv, ElementKind::Text, args.span(0), classes);
        s.builder.node_mut(t).props = Props::Text { content: name.to_string() };
        let id = s.node_id(ce);
        s.provenance.elements.insert(
            id,
            ElementSource {
                name: name.to_string(),
                call_span: args.call_span,
                block: block.as_ref().and_then(|b| b.body_span()),
                layout_block: None,
                pos: None,
                width: None,
                height: None,
                shared: false,
            },
        );
        s.elements.push(ElementInfo {
            node: ce,
            kind: InfoKind::Class { rect, vbox },
            name: name.to_string(),
            pos: None,
            width: None,
            height: None,
        });
        s.classes.push(PendingClass::default());
        s.elements.len() - 1
    };
    let handle = Value::Element(ElementHandle(index));
    if args.env.lookup(&name).is_some() {
        interp.report(Diagnostic::error(args.span(0), "DuplicateName", format!("`{name}` is already defined")));
    } else {
        args.env.define(&name, handle.clone());
    }
    let result = match &block {
        Some(block) if is_enum => {
            let st = state.clone();
            let bindings = [
                ("layout", scopes::layout_fn(state, index)),
                ("styles", scopes::styles_fn(state, index)),
            ];
            interp.for_each_statement(block, &bindings, args.call_span, move |_, value, stmt| match value {
                Value::Str(s) => {
                    let mut s_ = st.borrow_mut();
                    s_.classes.last_mut().expect("pending enum").attributes.push((s.to_string(), stmt.span));
                    Ok(())
                }
                _ if is_scope_call(stmt) => Ok(()),
                other => Err(non_string(stmt.span, &other)),
            })
        }
        Some(block) => {
            let bindings = [
                ("layout", scopes::layout_fn(state, index)),
                ("styles", scopes::styles_fn(state, index)),
            ];
            interp.call_block(block, None, &bindings, args.call_span, true).map(|_| ())
        }
        None => Ok(()),
    };
    let mut s = state.borrow_mut();
    let pending = s.classes.pop().expect("pending class");
    let InfoKind::Class { vbox, .. } = s.elements[index].kind else { unreachable!() };
    for (class, rows) in [("attributes", &pending.attributes), ("methods", &pending.methods)] {
        if rows.is_empty() {
            continue;
        }
        let sep = s.add(vbox, ElementKind::Path, args.call_span, &["separator"]);
        s.builder.node_mut(sep).props = Props::Path { d: "M 0 0 L 1 0".into() };
        let r = s.add(vbox, ElementKind::Rect, args.call_span, &[class]);
        let v = s.add(r, ElementKind::Vbox, args.call_span, &[]);
        for (text, span) in rows {
            let t = s.add(v, ElementKind::Text, *span, &["row"]);
            s.builder.node_mut(t).props = Props::Text { content: text.clone() };
        }
    }
    drop(s);
    result?;
    Ok(handle)
}

/// `layout { ... }` or `styles { ... }` inside an enum block.
fn is_scope_call(stmt: &Node) -> bool {
    matches!(stmt.kind, NodeKind::Call { .. })
        && matches!(&stmt.children[0].kind, NodeKind::Ident(n) if n == "layout" || n == "styles")
}

fn non_string(span: Span, value: &Value) -> EvalError {
    RuntimeError::new(span, "NonStringEntry", format!("member entries must be strings, got {}", value.type_name())).into()
}

fn section(interp: &mut Interpreter, state: &Shared, args: CallArgs, prefix: &'static str) -> Result<Value, EvalError> {
    let block = args.function(0, "section block")?;
    if state.borrow().classes.is_empty() {
        return Err(RuntimeError::new(args.call_span, "MisplacedSection", "member sections are only allowed inside a class block").into());
    }
    let st = state.clone();
    interp.for_each_statement(&block, &[], args.call_span, move |_, value, stmt| match value {
        Value::Str(s) => {
            let row = format!("{prefix} {s}");
            let mut s_ = st.borrow_mut();
            let pending = s_.classes.last_mut().expect("checked above");
            if s.contains('(') {
                pending.methods.push((row, stmt.span));
            } else {
                pending.attributes.push((row, stmt.span));
            }
            Ok(())
        }
        other => Err(non_string(stmt.span, &other)),
    })?;
    Ok(Value::Null)
}

fn member(interp: &mut Interpreter, state: &Shared, handle: ElementHandle, name: &str, span: Span) -> Result<Value, EvalError> {
    let _ = interp;
    let s = state.borrow();
    let info = s.elements.get(handle.0).ok_or_else(|| RuntimeError::new(span, "UnknownElement", "stale element"))?;
    let is_class = matches!(info.kind, InfoKind::Class { .. });
    let value = match name {
        "name" => Value::str(&info.name),
        "id" => Value::str(&s.node_id(info.node)),
        "styles" => {
            drop(s);
            return Ok(scopes::styles_fn(state, handle.0));
        }
        "layout" if is_class => {
            drop(s);
            return Ok(scopes::layout_fn(state, handle.0));
        }
        "pos" if is_class => info.pos.clone().unwrap_or(Value::Null),
        "width" if is_class => info.width.map_or(Value::Null, Value::Number),
        "height" if is_class => info.height.map_or(Value::Null, Value::Number),
        _ => return Err(RuntimeError::new(span, "UnknownField", format!("element has no member `{name}`")).into()),
    };
    Ok(value)
}

/// Resolve an operand that must be a class element; returns its info index.
pub(crate) fn class_operand(state: &Shared, args: &CallArgs, i: usize, what: &str) -> Result<usize, RuntimeError> {
    let s = state.borrow();
    match args.get(i) {
        Value::Element(h) if matches!(s.elements.get(h.0).map(|e| e.kind), Some(InfoKind::Class { .. })) => Ok(h.0),
        other => {
            let got = if matches!(other, Value::Element(_)) { "connection" } else { other.type_name() };
            Err(RuntimeError::type_mismatch(args.span(i), format!("{what} must be a class, got {got}")))
        }
    }
}
