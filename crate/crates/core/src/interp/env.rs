use std::cell::RefCell;
use std::rc::Rc;

use indexmap::IndexMap;

use super::error::RuntimeError;
use super::value::{ObjectRef, Value};
use crate::syntax::Span;

pub type EnvRef = Rc<Environment>;

/// Lexical scope. A scope may carry an assignment target: bare assignments
/// to names not bound anywhere in the chain become fields of that object.
#[derive(Debug, Default)]
pub struct Environment {
    bindings: RefCell<IndexMap<String, Value>>,
    parent: Option<EnvRef>,
    assign_target: Option<ObjectRef>,
}

impl Environment {
    pub fn root() -> EnvRef {
        Rc::new(Environment::default())
    }

    pub fn child(parent: &EnvRef) -> EnvRef {
        Rc::new(Environment { bindings: RefCell::default(), parent: Some(parent.clone()), assign_target: None })
    }

    pub fn with_target(parent: &EnvRef, target: ObjectRef) -> EnvRef {
        Rc::new(Environment { bindings: RefCell::default(), parent: Some(parent.clone()), assign_target: Some(target) })
    }

    pub fn parent(&self) -> Option<&EnvRef> {
        self.parent.as_ref()
    }

    pub fn assign_target(&self) -> Option<&ObjectRef> {
        self.assign_target.as_ref()
    }

    pub fn define(&self, name: &str, value: Value) {
        self.bindings.borrow_mut().insert(name.to_owned(), value);
    }

    pub fn defines_locally(&self, name: &str) -> bool {
        self.bindings.borrow().contains_key(name)
    }

    fn defines(&self, name: &str) -> bool {
        self.defines_locally(name)
            || self.assign_target.as_ref().is_some_and(|t| t.borrow().fields.contains_key(name))
    }

    pub fn lookup(&self, name: &str) -> Option<Value> {
        let mut env = Some(self);
        while let Some(e) = env {
            if let Some(v) = e.bindings.borrow().get(name) {
                return Some(v.clone());
            }
            if let Some(target) = &e.assign_target {
                if let Some(v) = target.borrow().fields.get(name) {
                    return Some(v.clone());
                }
            }
            env = e.parent.as_deref();
        }
        None
    }

    /// Write to the nearest scope defining `name`; otherwise to this scope's
    /// assignment target if it has one; otherwise define locally.
    pub fn assign(&self, name: &str, value: Value, value_span: Span) {
        let mut env = Some(self);
        while let Some(e) = env {
            if e.defines_locally(name) {
                e.define(name, value);
                return;
            }
            if let Some(target) = &e.assign_target {
                if target.borrow().fields.contains_key(name) {
                    target.borrow_mut().set(name, value, Some(value_span));
                    return;
                }
            }
            env = e.parent.as_deref();
        }
        match &self.assign_target {
            Some(target) => target.borrow_mut().set(name, value, Some(value_span)),
            None => self.define(name, value),
        }
    }

    /// Bind an infix operator (or any name) in exactly this scope.
    pub fn register_infix(&self, name: &str, implementation: Value, span: Span) -> Result<(), RuntimeError> {
        if self.defines(name) {
            return Err(RuntimeError::new(span, "DuplicateOperator", format!("operator `{name}` is already defined in this scope")));
        }
        self.define(name, implementation);
        Ok(())
    }
}
