//! Interaction oracles: every claim about edits and predictions is checked
//! against a fresh pipeline run on the edited text.

#![allow(dead_code)]

use std::path::PathBuf;

use livediag_core::edit::{apply_prediction, rigid_group, AnchorEnd, InteractionKind, InteractionParams, InteractionSession};
use livediag_core::model::{ElementKind, Props};
use livediag_core::pipeline::{compile, Compiled};
use livediag_core::render::{RenderModel, RenderNode};
use livediag_core::syntax::{apply_to_text, SourceDocument};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "diagram"))
        .collect();
    files.sort();
    files.into_iter().map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap())).collect()
}

/// Render model of a program that must compile without errors.
pub fn render(text: &str) -> RenderModel {
    let c = compile(text);
    let errors: Vec<_> = c.diagnostics().into_iter().filter(|d| d.is_error()).collect();
    assert!(errors.is_empty(), "errors in:\n{text}\n{errors:?}");
    c.render_model().unwrap_or_else(|| panic!("no render for:\n{text}"))
}

fn doc(text: &str) -> SourceDocument {
    SourceDocument::new("mem://test.diagram", text, 1)
}

/// Top-level canvas elements of a diagram, in declaration order.
pub fn canvas_elements(c: &Compiled) -> Vec<String> {
    let Some(d) = &c.execution.diagram else { return vec![] };
    d.root.children.iter().filter(|n| n.kind == ElementKind::CanvasElement).map(|n| n.id.clone()).collect()
}

pub fn canvas_connections(c: &Compiled) -> Vec<String> {
    let Some(d) = &c.execution.diagram else { return vec![] };
    d.root.children.iter().filter(|n| n.kind == ElementKind::CanvasConnection).map(|n| n.id.clone()).collect()
}

pub fn begin(text: &str, id: &str, kind: InteractionKind, anchor: AnchorEnd) -> Option<InteractionSession> {
    InteractionSession::begin(&doc(text), &compile(text), id, kind, anchor).ok()
}

fn pos(m: &RenderModel, id: &str) -> Result<(f64, f64, f64, f64), String> {
    let n = m.root.find(id).ok_or_else(|| format!("{id} missing from render"))?;
    Ok((n.x, n.y, n.width, n.height))
}

/// Drive a move interaction through `steps` (cumulative params) and check
/// that the final text alone places the target, and its relative
/// dependents, exactly at their start position plus the final offset while
/// every other element stays put. Also checks that the per-update
/// incremental edits reproduce the cumulative text.
pub fn check_move_round_trip(text: &str, id: &str, steps: &[(f64, f64)]) -> Result<(), String> {
    let compiled = compile(text);
    let mut session = InteractionSession::begin(&doc(text), &compiled, id, InteractionKind::MoveElement, AnchorEnd::Start)
        .map_err(|e| format!("begin {id}: {e}"))?;
    let group = rigid_group(compiled.execution.diagram.as_ref().unwrap(), id);
    let before = compiled.render_model().unwrap();
    let mut live = text.to_owned();
    let mut last = InteractionParams::default();
    for &(dx, dy) in steps {
        let p = InteractionParams::translate(dx, dy);
        let out = session.update(p).map_err(|e| e.to_string())?;
        live = apply_to_text(&live, &out.edits).map_err(|e| format!("{e:?}"))?;
        if live != out.document.text {
            return Err(format!("incremental edits diverge from cumulative text at {p:?}"));
        }
        // same params twice give the same text
        if session.text_for(&p) != out.document.text {
            return Err("text_for is not idempotent".into());
        }
        last = p;
    }
    let after = render(&live);
    for other in canvas_elements(&compiled) {
        let (x0, y0, w0, h0) = pos(&before, &other)?;
        let (x1, y1, w1, h1) = pos(&after, &other)?;
        let (ex, ey) = if group.contains(&other) { (x0 + last.dx, y0 + last.dy) } else { (x0, y0) };
        if (x1, y1, w1, h1) != (ex, ey, w0, h0) {
            return Err(format!(
                "{other} after moving {id} by ({}, {}): got ({x1}, {y1}, {w1}x{h1}), expected ({ex}, {ey}, {w0}x{h0})\n{live}",
                last.dx, last.dy
            ));
        }
    }
    Ok(())
}

/// Compare boxes down to `depth` levels; `tolerance` 0 demands bitwise equality.
fn compare_subtree(predicted: &RenderNode, full: &RenderNode, depth: usize, tolerance: f64) -> Result<(), String> {
    let a = [predicted.x, predicted.y, predicted.width, predicted.height];
    let b = [full.x, full.y, full.width, full.height];
    let same = a.iter().zip(&b).all(|(p, f)| if tolerance == 0.0 { p == f } else { (p - f).abs() <= tolerance });
    if !same {
        return Err(format!(
            "{}: predicted ({}, {}, {}x{}), full render ({}, {}, {}x{})",
            full.id, predicted.x, predicted.y, predicted.width, predicted.height, full.x, full.y, full.width, full.height
        ));
    }
    if depth == 0 {
        return Ok(());
    }
    if predicted.children.len() != full.children.len() {
        return Err(format!("{}: child count differs", full.id));
    }
    for (p, f) in predicted.children.iter().zip(&full.children) {
        compare_subtree(p, f, depth - 1, tolerance)?;
    }
    Ok(())
}

/// Connections whose both ends move rigidly with the dragged group.
fn rigid_connections(c: &Compiled, group: &std::collections::BTreeSet<String>) -> Vec<String> {
    let d = c.execution.diagram.as_ref().unwrap();
    d.root
        .children
        .iter()
        .filter_map(|n| match &n.props {
            Props::Connection(s) if group.contains(&s.source) && group.contains(&s.target) => Some(n.id.clone()),
            _ => None,
        })
        .collect()
}

/// Step through `steps`, rendering fully only at the indices in
/// `renders_at`. After every update the prediction composed on the last
/// full render must equal the full render of the current text. Canvas
/// element subtrees must match bitwise (for a resize, only the resized
/// element's own box, since its content reflows). Connections whose ends
/// both move with the target must match within 1e-9: their anchors come
/// from divisions on absolute coordinates, so a translated route can
/// differ in the last bit.
pub fn check_predictions(
    text: &str,
    id: &str,
    kind: InteractionKind,
    steps: &[InteractionParams],
    renders_at: &[usize],
) -> Result<(), String> {
    let compiled = compile(text);
    let mut session =
        InteractionSession::begin(&doc(text), &compiled, id, kind, AnchorEnd::Start).map_err(|e| format!("begin {id}: {e}"))?;
    let group = rigid_group(compiled.execution.diagram.as_ref().unwrap(), id);
    let mut shown = compiled.render_model().unwrap();
    let elements = canvas_elements(&compiled);
    let connections = rigid_connections(&compiled, &group);
    for (i, p) in steps.iter().enumerate() {
        let out = session.update(*p).map_err(|e| e.to_string())?;
        let mut predicted = shown.clone();
        apply_prediction(&mut predicted, &out.delta);
        let full = render(&out.document.text);
        let checks = elements
            .iter()
            .map(|e| (e, if kind == InteractionKind::ResizeElement && e == id { 0 } else { usize::MAX }, 0.0))
            .chain(connections.iter().map(|c| (c, usize::MAX, 1e-9)));
        for (cid, depth, tolerance) in checks {
            let (Some(a), Some(b)) = (predicted.root.find(cid), full.root.find(cid)) else {
                return Err(format!("{cid} missing"));
            };
            compare_subtree(a, b, depth, tolerance).map_err(|e| format!("step {i} {p:?}: {e}"))?;
        }
        if renders_at.contains(&i) {
            if let Some(catch_up) = session.rendered(*p) {
                if !catch_up.is_empty() {
                    return Err("catch-up delta after rendering the current params".into());
                }
            }
            shown = full;
        }
    }
    Ok(())
}
