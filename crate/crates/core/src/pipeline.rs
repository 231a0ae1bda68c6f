//! Source text to diagram: parse, execute, lay out, render.

use std::collections::BTreeMap;

use crate::diagnostics::Diagnostic;
use crate::interp::{with_large_stack, Data, Interpreter, DEFAULT_STEP_BUDGET};
use crate::layout::{layout_diagram, LayoutedDiagram};
use crate::model::Diagram;
use crate::render::{render_svg, to_render_model, RenderModel};
use crate::syntax::{parse_source, ParseOutput, Span};
use crate::uml::{self, Provenance};

/// Everything one execution of a program produced.
#[derive(Debug, Clone)]
pub struct ExecutionResult {
    pub value: Data,
    pub diagnostics: Vec<Diagnostic>,
    /// `None` when the program could not be parsed.
    pub diagram: Option<Diagram>,
    pub element_origins: BTreeMap<String, Span>,
    pub provenance: Provenance,
    pub steps: u64,
}

impl ExecutionResult {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

pub fn syntax_diagnostics(parsed: &ParseOutput) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> =
        parsed.lex_errors.iter().map(|e| Diagnostic::error(e.span, "LexError", e.message.clone())).collect();
    out.extend(parsed.errors.iter().map(|e| Diagnostic::error(e.span, "ParseError", e.to_string())));
    out.sort_by_key(|d| d.span);
    out
}

/// Parse and execute `source`. Programs with syntax errors are not run.
pub fn execute(source: &str, budget: u64) -> ExecutionResult {
    with_large_stack(|| execute_here(source, budget))
}

fn execute_here(source: &str, budget: u64) -> ExecutionResult {
    let parsed = parse_source(source);
    if parsed.has_errors() {
        return ExecutionResult {
            value: Data::Null,
            diagnostics: syntax_diagnostics(&parsed),
            diagram: None,
            element_origins: BTreeMap::new(),
            provenance: Provenance::default(),
            steps: 0,
        };
    }
    let mut interp = Interpreter::new(budget);
    let handle = uml::install(&mut interp);
    let outcome = interp.run(&parsed.program);
    let mut diagnostics = interp.take_diagnostics();
    let value = match outcome {
        Ok(v) => v.to_data(),
        Err(e) => {
            diagnostics.push(e.to_diagnostic());
            Data::Null
        }
    };
    let steps = interp.steps();
    drop(interp);
    let out = handle.finish();
    diagnostics.sort_by_key(|d| d.span);
    ExecutionResult {
        value,
        diagnostics,
        diagram: Some(out.diagram),
        element_origins: out.origins,
        provenance: out.provenance,
        steps,
    }
}

/// Execution plus layout.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub execution: ExecutionResult,
    pub layout: Option<LayoutedDiagram>,
}

impl Compiled {
    /// Execution and layout diagnostics together, ordered by position.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut all = self.execution.diagnostics.clone();
        if let Some(l) = &self.layout {
            all.extend(l.diagnostics.iter().cloned());
        }
        all.sort_by_key(|d| d.span);
        all
    }

    pub fn svg(&self) -> Option<String> {
        self.layout.as_ref().map(render_svg)
    }

    pub fn render_model(&self) -> Option<RenderModel> {
        self.layout.as_ref().map(to_render_model)
    }
}

pub fn compile(source: &str) -> Compiled {
    compile_with_budget(source, DEFAULT_STEP_BUDGET)
}

pub fn compile_with_budget(source: &str, budget: u64) -> Compiled {
    let execution = execute(source, budget);
    let layout = execution.diagram.as_ref().map(layout_diagram);
    Compiled { execution, layout }
}
