//! Tree-walking evaluator for diagram scripts.

mod env;
mod error;
mod stdlib;
mod value;

use std::collections::HashMap;
use std::rc::Rc;

use indexmap::IndexMap;

pub use env::{EnvRef, Environment};
pub use error::{EvalError, RuntimeError};
pub use value::{CallArgs, Data, ElementHandle, Function, FunctionKind, HostValue, ListRef, NativeFn, Object, ObjectRef, Value};

use crate::diagnostics::Diagnostic;
use crate::syntax::{Node, NodeKind, Span};

pub const DEFAULT_STEP_BUDGET: u64 = 5_000_000;
pub const MAX_CALL_DEPTH: usize = 512;

/// Resolves `element.name` for diagram elements.
pub type MemberHook = dyn Fn(&mut Interpreter, ElementHandle, &str, Span) -> Result<Value, EvalError>;

/// Run `f` on a thread with a stack large enough for deeply nested
/// scripts. Evaluation recurses on the native stack.
pub fn with_large_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("livediag-eval".into())
            .stack_size(EVAL_STACK_BYTES)
            .spawn_scoped(s, f)
            .expect("spawn evaluation thread")
            .join()
            .unwrap_or_else(|panic| std::panic::resume_unwind(panic))
    })
}

const EVAL_STACK_BYTES: usize = 256 << 20;

pub struct Interpreter {
    budget: u64,
    steps: u64,
    depth: usize,
    globals: EnvRef,
    diagnostics: Vec<Diagnostic>,
    lambdas: HashMap<(usize, usize), Rc<Node>>,
    member_hook: Option<Rc<MemberHook>>,
}

impl Default for Interpreter {
    fn default() -> Self {
        Interpreter::new(DEFAULT_STEP_BUDGET)
    }
}

impl Interpreter {
    /// A fresh interpreter with the base library installed in its global scope.
    pub fn new(budget: u64) -> Self {
        let globals = Environment::root();
        stdlib::install(&globals);
        Interpreter {
            budget,
            steps: 0,
            depth: 0,
            globals,
            diagnostics: Vec::new(),
            lambdas: HashMap::new(),
            member_hook: None,
        }
    }

    pub fn globals(&self) -> &EnvRef {
        &self.globals
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn set_member_hook(&mut self, hook: Rc<MemberHook>) {
        self.member_hook = Some(hook);
    }

    pub fn report(&mut self, diagnostic: Diagnostic) {
        self.diagnostics.push(diagnostic);
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn take_diagnostics(&mut self) -> Vec<Diagnostic> {
        std::mem::take(&mut self.diagnostics)
    }

    /// Evaluate a program. Runtime errors are reported per top-level statement;
    /// only budget exhaustion aborts.
    pub fn run(&mut self, program: &Node) -> Result<Value, EvalError> {
        self.index_lambdas(program);
        let env = self.globals.clone();
        self.eval_recovering(&program.children, &env)
    }

    fn index_lambdas(&mut self, program: &Node) {
        self.lambdas.clear();
        let mut found = Vec::new();
        program.walk(&mut |n| {
            if matches!(n.kind, NodeKind::FunctionLit { .. }) {
                found.push(n);
            }
        });
        for n in found {
            self.lambdas.insert((n.span.start, n.span.end), Rc::new(n.clone()));
        }
    }

    fn tick(&mut self, span: Span) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::BudgetExceeded { span, budget: self.budget });
        }
        Ok(())
    }

    /// Charge `n` steps at once, e.g. before allocating a large list.
    pub fn charge(&mut self, n: u64, span: Span) -> Result<(), EvalError> {
        self.steps = self.steps.saturating_add(n);
        if self.steps > self.budget {
            return Err(EvalError::BudgetExceeded { span, budget: self.budget });
        }
        Ok(())
    }

    pub fn eval_recovering(&mut self, statements: &[Node], env: &EnvRef) -> Result<Value, EvalError> {
        let mut last = Value::Null;
        for stmt in statements {
            match self.eval(stmt, env) {
                Ok(v) => last = v,
                Err(EvalError::Runtime(err)) => {
                    self.diagnostics.push(err.to_diagnostic());
                    last = Value::Null;
                }
                Err(fatal) => return Err(fatal),
            }
        }
        Ok(last)
    }

    pub fn eval(&mut self, node: &Node, env: &EnvRef) -> Result<Value, EvalError> {
        self.tick(node.span)?;
        match &node.kind {
            NodeKind::NumberLit(n) => Ok(Value::Number(*n)),
            NodeKind::StringLit(s) => Ok(Value::str(s)),
            NodeKind::BoolLit(b) => Ok(Value::Bool(*b)),
            NodeKind::NullLit => Ok(Value::Null),
            NodeKind::Ident(name) => env.lookup(name).ok_or_else(|| {
                RuntimeError::new(node.span, "UndefinedVariable", format!("undefined variable `{name}`")).into()
            }),
            NodeKind::Assign => self.eval_assign(node, env),
            NodeKind::Call { arg_names } => {
                let callee = self.eval(&node.children[0], env)?;
                let mut args = CallArgs {
                    positional: Vec::new(),
                    positional_spans: Vec::new(),
                    named: IndexMap::new(),
                    call_span: node.span,
                    env: env.clone(),
                };
                for (arg, name) in node.children[1..].iter().zip(arg_names) {
                    let value = self.eval(arg, env)?;
                    match name {
                        Some(name) => {
                            args.named.insert(name.clone(), (value, arg.span));
                        }
                        None => {
                            args.positional.push(value);
                            args.positional_spans.push(arg.span);
                        }
                    }
                }
                self.call_value(&callee, args)
            }
            NodeKind::InfixCall { op, op_span } => {
                let Some(implementation) = env.lookup(op) else {
                    return Err(RuntimeError::new(*op_span, "UnknownOperator", format!("unknown operator `{op}`")).into());
                };
                let lhs = self.eval(&node.children[0], env)?;
                let rhs = self.eval(&node.children[1], env)?;
                let args = CallArgs {
                    positional: vec![lhs, rhs],
                    positional_spans: vec![node.children[0].span, node.children[1].span],
                    named: IndexMap::new(),
                    call_span: node.span,
                    env: env.clone(),
                };
                self.call_value(&implementation, args)
            }
            NodeKind::FunctionLit { params, implicit_it } => {
                let body = match self.lambdas.get(&(node.span.start, node.span.end)) {
                    Some(body) if body.span == node.span => body.clone(),
                    _ => Rc::new(node.clone()),
                };
                Ok(Value::Function(Rc::new(Function {
                    name: None,
                    kind: FunctionKind::Scripted {
                        params: params.clone(),
                        implicit_it: *implicit_it,
                        body,
                        env: env.clone(),
                    },
                })))
            }
            NodeKind::ListLit => {
                let mut items = Vec::with_capacity(node.children.len());
                for child in &node.children {
                    items.push(self.eval(child, env)?);
                }
                Ok(Value::list(items))
            }
            NodeKind::FieldAccess { name } => {
                let receiver = self.eval(&node.children[0], env)?;
                self.field(&receiver, name, node.span)
            }
            NodeKind::Program => self.eval_recovering(&node.children, env),
        }
    }

    fn eval_assign(&mut self, node: &Node, env: &EnvRef) -> Result<Value, EvalError> {
        let (target, value_node) = (&node.children[0], &node.children[1]);
        let value = self.eval(value_node, env)?;
        match &target.kind {
            NodeKind::Ident(name) => env.assign(name, value.clone(), value_node.span),
            NodeKind::FieldAccess { name } => match self.eval(&target.children[0], env)? {
                Value::Object(obj) => obj.borrow_mut().set(name, value.clone(), Some(value_node.span)),
                other => {
                    return Err(RuntimeError::type_mismatch(
                        target.span,
                        format!("cannot assign field `{name}` on {}", other.type_name()),
                    )
                    .into())
                }
            },
            _ => return Err(RuntimeError::new(target.span, "InvalidAssignment", "invalid assignment target").into()),
        }
        Ok(value)
    }

    pub fn field(&mut self, receiver: &Value, name: &str, span: Span) -> Result<Value, EvalError> {
        let missing = |what: &str| -> EvalError {
            RuntimeError::new(span, "UnknownField", format!("{what} has no field `{name}`")).into()
        };
        match receiver {
            Value::Object(obj) => obj.borrow().get(name).ok_or_else(|| missing("object")),
            Value::List(items) if name == "length" => Ok(Value::Number(items.borrow().len() as f64)),
            Value::Str(s) if name == "length" => Ok(Value::Number(s.chars().count() as f64)),
            Value::Element(handle) => match self.member_hook.clone() {
                Some(hook) => hook(self, *handle, name, span),
                None => Err(missing("element")),
            },
            Value::Host(host) => host.field(name).ok_or_else(|| missing(host.type_name())),
            other => Err(missing(other.type_name())),
        }
    }

    pub fn call_value(&mut self, callee: &Value, args: CallArgs) -> Result<Value, EvalError> {
        match callee {
            Value::Function(f) => self.call_function(f, args),
            other => Err(RuntimeError::type_mismatch(args.call_span, format!("{} is not callable", other.type_name())).into()),
        }
    }

    pub fn call_function(&mut self, f: &Rc<Function>, args: CallArgs) -> Result<Value, EvalError> {
        match &f.kind {
            FunctionKind::Native(native) => {
                let native = native.clone();
                native(self, args)
            }
            FunctionKind::Scripted { params, implicit_it, body, env } => {
                let scope = Environment::child(env);
                if *implicit_it {
                    scope.define("it", args.get(0));
                } else {
                    for (i, p) in params.iter().enumerate() {
                        scope.define(p, args.get(i));
                    }
                }
                for (name, (value, _)) in &args.named {
                    scope.define(name, value.clone());
                }
                self.run_body(body, &scope, args.call_span, false)
            }
        }
    }

    fn run_body(&mut self, body: &Rc<Node>, scope: &EnvRef, call_span: Span, recover: bool) -> Result<Value, EvalError> {
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeError::new(call_span, "StackOverflow", "maximum call depth exceeded").into());
        }
        self.depth += 1;
        let result = if recover {
            self.eval_recovering(&body.children, scope)
        } else {
            let mut last = Ok(Value::Null);
            for stmt in &body.children {
                last = self.eval(stmt, scope);
                if last.is_err() {
                    break;
                }
            }
            last
        };
        self.depth -= 1;
        result
    }

    /// Call a block with an optional assignment target and extra bindings.
    /// With `recover`, failing statements are reported and skipped.
    pub fn call_block(
        &mut self,
        f: &Rc<Function>,
        target: Option<ObjectRef>,
        bindings: &[(&str, Value)],
        call_span: Span,
        recover: bool,
    ) -> Result<Value, EvalError> {
        match &f.kind {
            FunctionKind::Scripted { body, env, implicit_it, .. } => {
                let scope = match target {
                    Some(t) => Environment::with_target(env, t),
                    None => Environment::child(env),
                };
                if *implicit_it {
                    scope.define("it", Value::Null);
                }
                for (name, value) in bindings {
                    scope.define(name, value.clone());
                }
                self.run_body(body, &scope, call_span, recover)
            }
            FunctionKind::Native(_) => {
                let args = CallArgs {
                    positional: Vec::new(),
                    positional_spans: Vec::new(),
                    named: IndexMap::new(),
                    call_span,
                    env: self.globals.clone(),
                };
                self.call_function(f, args)
            }
        }
    }

    /// Evaluate each statement of a block and hand its value and span to
    /// `visit`. Runtime errors in a statement or in `visit` are reported and
    /// the next statement continues.
    pub fn for_each_statement(
        &mut self,
        f: &Rc<Function>,
        bindings: &[(&str, Value)],
        call_span: Span,
        mut visit: impl FnMut(&mut Interpreter, Value, &Node) -> Result<(), EvalError>,
    ) -> Result<(), EvalError> {
        let FunctionKind::Scripted { body, env, .. } = &f.kind else {
            return Err(RuntimeError::type_mismatch(call_span, "expected a block").into());
        };
        if self.depth >= MAX_CALL_DEPTH {
            return Err(RuntimeError::new(call_span, "StackOverflow", "maximum call depth exceeded").into());
        }
        let scope = Environment::child(env);
        for (name, value) in bindings {
            scope.define(name, value.clone());
        }
        let body = body.clone();
        self.depth += 1;
        let mut outcome = Ok(());
        for stmt in &body.children {
            let step = self.eval(stmt, &scope).and_then(|v| visit(self, v, stmt));
            match step {
                Ok(()) => {}
                Err(EvalError::Runtime(err)) => self.diagnostics.push(err.to_diagnostic()),
                Err(fatal) => {
                    outcome = Err(fatal);
                    break;
                }
            }
        }
        self.depth -= 1;
        outcome
    }
}
