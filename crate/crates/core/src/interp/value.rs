use std::any::Any;
use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use indexmap::IndexMap;
use serde::Serialize;

use super::env::EnvRef;
use super::error::{EvalError, RuntimeError};
use super::Interpreter;
use crate::syntax::{Node, Span};

pub type NativeFn = dyn Fn(&mut Interpreter, CallArgs) -> Result<Value, EvalError>;
pub type ListRef = Rc<RefCell<Vec<Value>>>;
pub type ObjectRef = Rc<RefCell<Object>>;

/// Handle to an element of the diagram under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementHandle(pub usize);

/// Values produced by embedding modules (points, route builders, ...).
pub trait HostValue: fmt::Debug {
    fn type_name(&self) -> &'static str;

    fn field(&self, _name: &str) -> Option<Value> {
        None
    }

    fn as_any(&self) -> &dyn Any;
}

#[derive(Clone)]
pub enum Value {
    Null,
    Bool(bool),
    Number(f64),
    Str(Rc<str>),
    List(ListRef),
    Object(ObjectRef),
    Function(Rc<Function>),
    Element(ElementHandle),
    Host(Rc<dyn HostValue>),
}

/// Ordered field map. `field_spans` remembers the expression that last
/// wrote each field, which the edit engine uses to locate literals.
#[derive(Debug, Default)]
pub struct Object {
    pub fields: IndexMap<String, Value>,
    pub field_spans: IndexMap<String, Span>,
    pub proto: Option<ObjectRef>,
}

impl Object {
    pub fn new_ref() -> ObjectRef {
        Rc::new(RefCell::new(Object::default()))
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        match self.fields.get(name) {
            Some(v) => Some(v.clone()),
            None => self.proto.as_ref().and_then(|p| p.borrow().get(name)),
        }
    }

    pub fn set(&mut self, name: &str, value: Value, span: Option<Span>) {
        self.fields.insert(name.to_owned(), value);
        match span {
            Some(span) => {
                self.field_spans.insert(name.to_owned(), span);
            }
            None => {
                self.field_spans.shift_remove(name);
            }
        }
    }
}

pub struct Function {
    pub name: Option<String>,
    pub kind: FunctionKind,
}

pub enum FunctionKind {
    Scripted { params: Vec<String>, implicit_it: bool, body: Rc<Node>, env: EnvRef },
    Native(Rc<NativeFn>),
}

impl Function {
    pub fn native(name: &str, f: impl Fn(&mut Interpreter, CallArgs) -> Result<Value, EvalError> + 'static) -> Rc<Function> {
        Rc::new(Function { name: Some(name.to_owned()), kind: FunctionKind::Native(Rc::new(f)) })
    }

    /// Span of the literal block, for scripted functions.
    pub fn body_span(&self) -> Option<Span> {
        match &self.kind {
            FunctionKind::Scripted { body, .. } => Some(body.span),
            FunctionKind::Native(_) => None,
        }
    }
}

impl fmt::Debug for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<function {}>", self.name.as_deref().unwrap_or("anonymous"))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Number(n) => write!(f, "{n}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(items) => f.debug_list().entries(items.borrow().iter()).finish(),
            Value::Object(obj) => f.debug_map().entries(obj.borrow().fields.iter()).finish(),
            Value::Function(func) => write!(f, "{func:?}"),
            Value::Element(h) => write!(f, "<element {}>", h.0),
            Value::Host(h) => write!(f, "{h:?}"),
        }
    }
}

impl Value {
    pub fn str(s: &str) -> Value {
        Value::Str(Rc::from(s))
    }

    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(_) => "number",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Object(_) => "object",
            Value::Function(_) => "function",
            Value::Element(_) => "element",
            Value::Host(h) => h.type_name(),
        }
    }

    pub fn is_truthy(&self) -> bool {
        !matches!(self, Value::Null | Value::Bool(false))
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_host<T: 'static>(&self) -> Option<&T> {
        match self {
            Value::Host(h) => h.as_any().downcast_ref::<T>(),
            _ => None,
        }
    }

    /// Text used for string concatenation and display.
    pub fn display(&self) -> String {
        match self {
            Value::Str(s) => s.to_string(),
            Value::Number(n) => format!("{n}"),
            other => format!("{other:?}"),
        }
    }

    /// Equality used by `==`: structural for primitives and lists, identity otherwise.
    pub fn equals(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Null, Value::Null) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Number(a), Value::Number(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::List(a), Value::List(b)) => {
                Rc::ptr_eq(a, b) || {
                    let (a, b) = (a.borrow(), b.borrow());
                    a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.equals(y))
                }
            }
            (Value::Object(a), Value::Object(b)) => Rc::ptr_eq(a, b),
            (Value::Function(a), Value::Function(b)) => Rc::ptr_eq(a, b),
            (Value::Element(a), Value::Element(b)) => a == b,
            (Value::Host(a), Value::Host(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// Detach from the interpreter heap into plain, thread-transferable data.
    pub fn to_data(&self) -> Data {
        self.to_data_bounded(32)
    }

    fn to_data_bounded(&self, depth: usize) -> Data {
        if depth == 0 {
            return Data::Str("…".to_owned());
        }
        match self {
            Value::Null => Data::Null,
            Value::Bool(b) => Data::Bool(*b),
            Value::Number(n) => Data::Number(*n),
            Value::Str(s) => Data::Str(s.to_string()),
            Value::List(items) => Data::List(items.borrow().iter().map(|v| v.to_data_bounded(depth - 1)).collect()),
            Value::Object(obj) => Data::Object(
                obj.borrow().fields.iter().map(|(k, v)| (k.clone(), v.to_data_bounded(depth - 1))).collect(),
            ),
            Value::Function(func) => Data::Function(func.name.clone().unwrap_or_default()),
            Value::Element(h) => Data::Element(h.0),
            Value::Host(h) => Data::Host(format!("{h:?}")),
        }
    }
}

/// Plain snapshot of a `Value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "camelCase")]
pub enum Data {
    Null,
    Bool(bool),
    Number(f64),
    Str(String),
    List(Vec<Data>),
    Object(Vec<(String, Data)>),
    Function(String),
    Element(usize),
    Host(String),
}

/// Evaluated arguments of a call, with the spans of the argument expressions.
pub struct CallArgs {
    pub positional: Vec<Value>,
    pub positional_spans: Vec<Span>,
    pub named: IndexMap<String, (Value, Span)>,
    pub call_span: Span,
    /// Environment of the caller.
    pub env: EnvRef,
}

impl CallArgs {
    pub fn get(&self, index: usize) -> Value {
        self.positional.get(index).cloned().unwrap_or(Value::Null)
    }

    pub fn span(&self, index: usize) -> Span {
        self.positional_spans.get(index).copied().unwrap_or(self.call_span)
    }

    pub fn len(&self) -> usize {
        self.positional.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positional.is_empty()
    }

    pub fn named(&self, name: &str) -> Option<&Value> {
        self.named.get(name).map(|(v, _)| v)
    }

    pub fn number(&self, index: usize, what: &str) -> Result<f64, RuntimeError> {
        match self.positional.get(index) {
            Some(Value::Number(n)) => Ok(*n),
            Some(other) => Err(RuntimeError::type_mismatch(
                self.span(index),
                format!("{what} must be a number, got {}", other.type_name()),
            )),
            None => Err(RuntimeError::new(self.call_span, "MissingArgument", format!("missing argument: {what}"))),
        }
    }

    pub fn string(&self, index: usize, what: &str) -> Result<Rc<str>, RuntimeError> {
        match self.positional.get(index) {
            Some(Value::Str(s)) => Ok(s.clone()),
            Some(other) => Err(RuntimeError::type_mismatch(
                self.span(index),
                format!("{what} must be a string, got {}", other.type_name()),
            )),
            None => Err(RuntimeError::new(self.call_span, "MissingArgument", format!("missing argument: {what}"))),
        }
    }

    pub fn function(&self, index: usize, what: &str) -> Result<Rc<Function>, RuntimeError> {
        match self.positional.get(index) {
            Some(Value::Function(f)) => Ok(f.clone()),
            Some(other) => Err(RuntimeError::type_mismatch(
                self.span(index),
                format!("{what} must be a function, got {}", other.type_name()),
            )),
            None => Err(RuntimeError::new(self.call_span, "MissingArgument", format!("missing argument: {what}"))),
        }
    }

    pub fn list(&self, index: usize, what: &str) -> Result<ListRef, RuntimeError> {
        match self.positional.get(index) {
            Some(Value::List(l)) => Ok(l.clone()),
            Some(other) => Err(RuntimeError::type_mismatch(
                self.span(index),
                format!("{what} must be a list, got {}", other.type_name()),
            )),
            None => Err(RuntimeError::new(self.call_span, "MissingArgument", format!("missing argument: {what}"))),
        }
    }
}
