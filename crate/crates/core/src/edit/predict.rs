use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AnchorEnd, EditPlan, InteractionKind, InteractionParams};
use crate::model::{Diagram, ElementKind, Position, Props};
use crate::render::{RenderModel, RenderNode};

/// Rigid change to one element subtree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementDelta {
    pub id: String,
    pub dx: f64,
    pub dy: f64,
    pub d_width: f64,
    pub d_height: f64,
}

/// Translation of one end of a routed connection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EndpointDelta {
    pub id: String,
    pub end: AnchorEnd,
    pub dx: f64,
    pub dy: f64,
}

/// Predicted change between two parameter sets of one interaction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PredictionDelta {
    pub elements: Vec<ElementDelta>,
    pub endpoints: Vec<EndpointDelta>,
}

impl PredictionDelta {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.endpoints.is_empty()
    }
}

/// Canvas elements that move with `target`: itself plus everything
/// positioned relative to it, transitively.
pub fn rigid_group(diagram: &Diagram, target: &str) -> BTreeSet<String> {
    let mut group = BTreeSet::from([target.to_owned()]);
    loop {
        let before = group.len();
        for child in &diagram.root.children {
            if let Props::Placement { pos: Some(Position::Relative { target: t, .. }) } = &child.props {
                if group.contains(t) {
                    group.insert(child.id.clone());
                }
            }
        }
        if group.len() == before {
            return group;
        }
    }
}

/// Delta from the parameters of the last full render to `current`.
pub fn predict(plan: &EditPlan, diagram: &Diagram, rendered: &InteractionParams, current: &InteractionParams) -> PredictionDelta {
    let d = current.minus(rendered);
    let mut out = PredictionDelta::default();
    match plan.kind {
        InteractionKind::MoveElement => {
            if d.dx == 0.0 && d.dy == 0.0 {
                return out;
            }
            let group = rigid_group(diagram, &plan.target);
            for id in &group {
                out.elements.push(ElementDelta { id: id.clone(), dx: d.dx, dy: d.dy, d_width: 0.0, d_height: 0.0 });
            }
            for child in &diagram.root.children {
                if child.kind != ElementKind::CanvasConnection {
                    continue;
                }
                let Props::Connection(spec) = &child.props else { continue };
                if group.contains(&spec.source) && group.contains(&spec.target) {
                    // both ends move together: the whole route translates
                    out.elements.push(ElementDelta { id: child.id.clone(), dx: d.dx, dy: d.dy, d_width: 0.0, d_height: 0.0 });
                    continue;
                }
                for (end, attached) in [(AnchorEnd::Start, &spec.source), (AnchorEnd::End, &spec.target)] {
                    if group.contains(attached) {
                        out.endpoints.push(EndpointDelta { id: child.id.clone(), end, dx: d.dx, dy: d.dy });
                    }
                }
            }
        }
        InteractionKind::ResizeElement => {
            if d.d_width != 0.0 || d.d_height != 0.0 {
                out.elements.push(ElementDelta {
                    id: plan.target.clone(),
                    dx: 0.0,
                    dy: 0.0,
                    d_width: d.d_width,
                    d_height: d.d_height,
                });
            }
        }
        // anchor and label moves change routes non-rigidly; the full update shows them
        InteractionKind::MoveConnectionAnchor | InteractionKind::MoveLabel => {}
    }
    out
}

fn shift_end(node: &mut RenderNode, end: AnchorEnd, dx: f64, dy: f64) {
    if let Some(ends) = &mut node.ends {
        let p = match end {
            AnchorEnd::Start => &mut ends.start,
            AnchorEnd::End => &mut ends.end,
        };
        *p = p.offset(dx, dy);
    }
    let segments: Vec<usize> =
        (0..node.children.len()).filter(|&i| node.children[i].kind == ElementKind::ConnectionSegment).collect();
    let pick = match end {
        AnchorEnd::Start => segments.first(),
        AnchorEnd::End => segments.last(),
    };
    if let Some(&i) = pick {
        if let Some(route) = &mut node.children[i].route {
            let p = match end {
                AnchorEnd::Start => route.points.first_mut(),
                AnchorEnd::End => route.points.last_mut(),
            };
            if let Some(p) = p {
                *p = p.offset(dx, dy);
            }
        }
    }
}

/// Compose a prediction onto a render model, as a graphical client does.
pub fn apply_prediction(model: &mut RenderModel, delta: &PredictionDelta) {
    for e in &delta.elements {
        if let Some(node) = model.root.find_mut(&e.id) {
            node.translate(e.dx, e.dy);
            node.width += e.d_width;
            node.height += e.d_height;
        }
    }
    for ep in &delta.endpoints {
        if let Some(node) = model.root.find_mut(&ep.id) {
            shift_end(node, ep.end, ep.dx, ep.dy);
        }
    }
}
