use std::rc::Rc;

use indexmap::IndexMap;

use super::env::EnvRef;
use super::error::{EvalError, RuntimeError};
use super::value::{CallArgs, Function, Object, Value};
use super::Interpreter;

type NResult = Result<Value, EvalError>;

fn def(env: &EnvRef, name: &str, f: impl Fn(&mut Interpreter, CallArgs) -> NResult + 'static) {
    env.define(name, Value::Function(Function::native(name, f)));
}

fn binary_numbers(args: &CallArgs, op: &str) -> Result<(f64, f64), RuntimeError> {
    match (&args.get(0), &args.get(1)) {
        (Value::Number(a), Value::Number(b)) => Ok((*a, *b)),
        (a, b) => Err(RuntimeError::type_mismatch(
            args.call_span,
            format!("`{op}` expects numbers, got {} and {}", a.type_name(), b.type_name()),
        )),
    }
}

fn finite(value: f64, args: &CallArgs) -> NResult {
    if value.is_finite() {
        Ok(Value::Number(value))
    } else {
        Err(RuntimeError::new(args.call_span, "NumericOverflow", "result is not a finite number").into())
    }
}

fn arithmetic(env: &EnvRef) {
    def(env, "+", |_, args| match (&args.get(0), &args.get(1)) {
        (Value::Number(a), Value::Number(b)) => finite(a + b, &args),
        (a @ Value::Str(_), b) | (a, b @ Value::Str(_)) => Ok(Value::str(&(a.display() + &b.display()))),
        (a, b) => Err(RuntimeError::type_mismatch(
            args.call_span,
            format!("cannot add {} and {}", a.type_name(), b.type_name()),
        )
        .into()),
    });
    def(env, "-", |_, args| {
        if args.len() == 1 {
            return Ok(Value::Number(-args.number(0, "operand")?));
        }
        let (a, b) = binary_numbers(&args, "-")?;
        finite(a - b, &args)
    });
    def(env, "*", |_, args| {
        let (a, b) = binary_numbers(&args, "*")?;
        finite(a * b, &args)
    });
    def(env, "/", |_, args| {
        let (a, b) = binary_numbers(&args, "/")?;
        if b == 0.0 {
            return Err(RuntimeError::new(args.call_span, "DivisionByZero", "division by zero").into());
        }
        finite(a / b, &args)
    });
    def(env, "%", |_, args| {
        let (a, b) = binary_numbers(&args, "%")?;
        if b == 0.0 {
            return Err(RuntimeError::new(args.call_span, "DivisionByZero", "division by zero").into());
        }
        finite(a % b, &args)
    });
}

fn comparisons(env: &EnvRef) {
    def(env, "==", |_, args| Ok(Value::Bool(args.get(0).equals(&args.get(1)))));
    def(env, "!=", |_, args| Ok(Value::Bool(!args.get(0).equals(&args.get(1)))));
    for op in ["<", "<=", ">", ">="] {
        def(env, op, move |_, args| {
            let ord = match (&args.get(0), &args.get(1)) {
                (Value::Number(a), Value::Number(b)) => a.partial_cmp(b),
                (Value::Str(a), Value::Str(b)) => Some(a.cmp(b)),
                (a, b) => {
                    return Err(RuntimeError::type_mismatch(
                        args.call_span,
                        format!("cannot compare {} and {}", a.type_name(), b.type_name()),
                    )
                    .into())
                }
            };
            let Some(ord) = ord else { return Ok(Value::Bool(false)) };
            Ok(Value::Bool(match op {
                "<" => ord.is_lt(),
                "<=" => ord.is_le(),
                ">" => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        });
    }
    def(env, "&&", |_, args| Ok(Value::Bool(args.get(0).is_truthy() && args.get(1).is_truthy())));
    def(env, "||", |_, args| Ok(Value::Bool(args.get(0).is_truthy() || args.get(1).is_truthy())));
    def(env, "!", |_, args| Ok(Value::Bool(!args.get(0).is_truthy())));
}

fn call_with(interp: &mut Interpreter, f: &Rc<Function>, values: Vec<Value>, args: &CallArgs) -> NResult {
    let spans = vec![args.call_span; values.len()];
    interp.call_function(
        f,
        CallArgs {
            positional: values,
            positional_spans: spans,
            named: IndexMap::new(),
            call_span: args.call_span,
            env: args.env.clone(),
        },
    )
}

fn collections(env: &EnvRef) {
    def(env, "range", |interp, args| {
        let (start, end) = if args.len() >= 2 {
            (args.number(0, "start")?, args.number(1, "end")?)
        } else {
            (0.0, args.number(0, "count")?)
        };
        let count = (end - start).ceil().max(0.0);
        interp.charge(count as u64, args.call_span)?;
        let items = (0..count as u64).map(|i| Value::Number(start + i as f64)).collect();
        Ok(Value::list(items))
    });
    def(env, "list", |_, args| Ok(Value::list(args.positional.clone())));
    def(env, "forEach", |interp, args| {
        let items = args.list(0, "collection")?;
        let f = args.function(1, "body")?;
        let snapshot: Vec<Value> = items.borrow().clone();
        for (i, item) in snapshot.into_iter().enumerate() {
            call_with(interp, &f, vec![item, Value::Number(i as f64)], &args)?;
        }
        Ok(Value::Null)
    });
    def(env, "map", |interp, args| {
        let items = args.list(0, "collection")?;
        let f = args.function(1, "mapper")?;
        let snapshot: Vec<Value> = items.borrow().clone();
        let mut out = Vec::with_capacity(snapshot.len());
        for (i, item) in snapshot.into_iter().enumerate() {
            out.push(call_with(interp, &f, vec![item, Value::Number(i as f64)], &args)?);
        }
        Ok(Value::list(out))
    });
    def(env, "get", |_, args| match args.get(0) {
        Value::List(items) => {
            let index = args.number(1, "index")?;
            let items = items.borrow();
            if index < 0.0 || index.fract() != 0.0 || index as usize >= items.len() {
                return Err(RuntimeError::new(
                    args.span(1),
                    "IndexOutOfRange",
                    format!("index {index} out of range for list of length {}", items.len()),
                )
                .into());
            }
            Ok(items[index as usize].clone())
        }
        Value::Object(obj) => {
            let key = args.string(1, "key")?;
            Ok(obj.borrow().get(&key).unwrap_or(Value::Null))
        }
        other => Err(RuntimeError::type_mismatch(args.span(0), format!("cannot index {}", other.type_name())).into()),
    });
    def(env, "push", |_, args| {
        let items = args.list(0, "list")?;
        items.borrow_mut().push(args.get(1));
        Ok(Value::List(items))
    });
    def(env, "length", |_, args| match args.get(0) {
        Value::List(items) => Ok(Value::Number(items.borrow().len() as f64)),
        Value::Str(s) => Ok(Value::Number(s.chars().count() as f64)),
        other => Err(RuntimeError::type_mismatch(args.span(0), format!("{} has no length", other.type_name())).into()),
    });
    def(env, "object", |_, args| {
        let obj = Object::new_ref();
        for (name, (value, span)) in &args.named {
            obj.borrow_mut().set(name, value.clone(), Some(*span));
        }
        Ok(Value::Object(obj))
    });
    def(env, "toString", |_, args| Ok(Value::str(&args.get(0).display())));
}

fn control(env: &EnvRef) {
    def(env, "if", |interp, args| {
        let branch = if args.get(0).is_truthy() { args.get(1) } else { args.get(2) };
        match branch {
            Value::Function(f) => call_with(interp, &f, Vec::new(), &args),
            other => Ok(other),
        }
    });
    def(env, "registerInfix", |_, args| {
        let name = args.string(0, "operator name")?;
        let implementation = args.get(1);
        if !matches!(implementation, Value::Function(_)) {
            return Err(RuntimeError::type_mismatch(args.span(1), "operator implementation must be a function").into());
        }
        args.env.register_infix(&name, implementation, args.call_span)?;
        Ok(Value::Null)
    });
}

fn math(env: &EnvRef) {
    let unary: [(&str, fn(f64) -> f64); 5] =
        [("floor", f64::floor), ("ceil", f64::ceil), ("round", f64::round), ("abs", f64::abs), ("sqrt", f64::sqrt)];
    for (name, f) in unary {
        def(env, name, move |_, args| {
            let x = args.number(0, "argument")?;
            let r = f(x);
            if r.is_nan() {
                return Err(RuntimeError::new(args.call_span, "DomainError", format!("{name}({x}) is undefined")).into());
            }
            Ok(Value::Number(r))
        });
    }
    def(env, "min", |_, args| {
        let (a, b) = binary_numbers(&args, "min")?;
        Ok(Value::Number(a.min(b)))
    });
    def(env, "max", |_, args| {
        let (a, b) = binary_numbers(&args, "max")?;
        Ok(Value::Number(a.max(b)))
    });
}

pub(super) fn install(env: &EnvRef) {
    arithmetic(env);
    comparisons(env);
    collections(env);
    control(env);
    math(env);
}
