use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::layout::{Content, LayoutedDiagram, LayoutedElement, Point, Rect, SegmentKind};
use crate::model::{AttrValue, ElementKind, Marker};
use crate::syntax::Span;

pub const SCHEMA_VERSION: u32 = 1;

/// Serializable view of a layouted diagram, consumed by graphical clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderModel {
    pub schema_version: u32,
    pub bounds: Rect,
    pub root: RenderNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderText {
    pub lines: Vec<String>,
    pub font_size: f64,
    pub line_height: f64,
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderRoute {
    pub mode: SegmentKind,
    pub points: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderEnds {
    pub start: Point,
    pub end: Point,
    pub start_direction: Point,
    pub end_direction: Point,
    pub start_marker: Marker,
    pub end_marker: Marker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderLabel {
    pub anchor: Point,
    pub t: f64,
    pub distance: f64,
}

/// One element. Which optional fields are present depends only on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderNode {
    pub id: String,
    pub kind: ElementKind,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub attributes: BTreeMap<String, AttrValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
    pub origin_span: Span,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<RenderText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RenderRoute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ends: Option<RenderEnds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<RenderLabel>,
    pub children: Vec<RenderNode>,
}

impl RenderNode {
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a RenderNode)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    pub fn walk_mut(&mut self, visit: &mut impl FnMut(&mut RenderNode)) {
        visit(self);
        for c in &mut self.children {
            c.walk_mut(visit);
        }
    }

    pub fn find(&self, id: &str) -> Option<&RenderNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }

    pub fn find_mut(&mut self, id: &str) -> Option<&mut RenderNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }

    /// Rigidly move this node and its descendants.
    pub fn translate(&mut self, dx: f64, dy: f64) {
        self.walk_mut(&mut |n| {
            n.x += dx;
            n.y += dy;
            if let Some(route) = &mut n.route {
                for p in &mut route.points {
                    *p = p.offset(dx, dy);
                }
            }
            if let Some(ends) = &mut n.ends {
                ends.start = ends.start.offset(dx, dy);
                ends.end = ends.end.offset(dx, dy);
            }
            if let Some(label) = &mut n.label {
                label.anchor = label.anchor.offset(dx, dy);
            }
        });
    }
}

fn text(block: &crate::layout::TextBlock) -> RenderText {
    RenderText {
        lines: block.lines.clone(),
        font_size: block.font_size,
        line_height: block.line_height,
        baseline: block.baseline,
    }
}

fn node(e: &LayoutedElement) -> RenderNode {
    let mut n = RenderNode {
        id: e.id.clone(),
        kind: e.kind,
        x: e.x,
        y: e.y,
        width: e.width,
        height: e.height,
        attributes: e.attributes.clone(),
        classes: e.classes.clone(),
        origin_span: e.origin,
        text: None,
        path: None,
        route: None,
        ends: None,
        label: None,
        children: e.children.iter().map(node).collect(),
    };
    match &e.content {
        Content::None => {}
        Content::Text(block) => n.text = Some(text(block)),
        Content::Path(d) => n.path = Some(d.clone()),
        Content::Segment(seg) => n.route = Some(RenderRoute { mode: seg.kind, points: seg.points.clone() }),
        Content::Connection(c) => {
            n.ends = Some(RenderEnds {
                start: c.start,
                end: c.end,
                start_direction: c.start_direction,
                end_direction: c.end_direction,
                start_marker: c.start_marker,
                end_marker: c.end_marker,
            })
        }
        Content::Label { text: block, anchor, t, distance } => {
            n.text = Some(text(block));
            n.label = Some(RenderLabel { anchor: *anchor, t: *t, distance: *distance });
        }
    }
    n
}

pub fn to_render_model(diagram: &LayoutedDiagram) -> RenderModel {
    RenderModel { schema_version: SCHEMA_VERSION, bounds: diagram.bounds(), root: node(&diagram.root) }
}

/// Optional fields each kind carries; `None` entries must be absent.
pub fn expected_fields(kind: ElementKind) -> &'static [&'static str] {
    match kind {
        ElementKind::Text => &["text"],
        ElementKind::Label => &["text", "label"],
        ElementKind::Path => &["path"],
        ElementKind::ConnectionSegment => &["route"],
        ElementKind::CanvasConnection => &["ends"],
        _ => &[],
    }
}
