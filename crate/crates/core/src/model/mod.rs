//! The pre-layout diagram: element tree, style rules and fonts.

mod fonts;
mod style;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::Span;

pub use fonts::{FontError, FontMetrics, FontSet, LINE_FACTOR};
pub use style::{
    initial_value, is_inheritable, is_known_attribute, resolve_styles, ResolvedStyles, Selector, SelectorKind,
    StyleRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ElementKind {
    Rect,
    Ellipse,
    Path,
    Text,
    Vbox,
    Hbox,
    Canvas,
    CanvasElement,
    CanvasConnection,
    ConnectionSegment,
    Label,
}

impl ElementKind {
    pub const ALL: [ElementKind; 11] = [
        ElementKind::Rect,
        ElementKind::Ellipse,
        ElementKind::Path,
        ElementKind::Text,
        ElementKind::Vbox,
        ElementKind::Hbox,
        ElementKind::Canvas,
        ElementKind::CanvasElement,
        ElementKind::CanvasConnection,
        ElementKind::ConnectionSegment,
        ElementKind::Label,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Rect => "rect",
            ElementKind::Ellipse => "ellipse",
            ElementKind::Path => "path",
            ElementKind::Text => "text",
            ElementKind::Vbox => "vbox",
            ElementKind::Hbox => "hbox",
            ElementKind::Canvas => "canvas",
            ElementKind::CanvasElement => "canvasElement",
            ElementKind::CanvasConnection => "canvasConnection",
            ElementKind::ConnectionSegment => "connectionSegment",
            ElementKind::Label => "label",
        }
    }

    pub fn parse(name: &str) -> Option<ElementKind> {
        ElementKind::ALL.into_iter().find(|k| k.as_str() == name)
    }

    /// Containers removed when the layout is flattened.
    pub fn is_layout_only(self) -> bool {
        matches!(self, ElementKind::Vbox | ElementKind::Hbox)
    }

    pub fn accepts_child(self, child: ElementKind) -> bool {
        use ElementKind::*;
        match self {
            Canvas => matches!(child, CanvasElement | CanvasConnection),
            CanvasConnection => matches!(child, ConnectionSegment | Label),
            Rect | Ellipse | Vbox | Hbox | CanvasElement => matches!(child, Rect | Ellipse | Path | Text | Vbox | Hbox | Canvas),
            Path | Text | ConnectionSegment | Label => false,
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Bool(bool),
    Number(f64),
    Str(String),
}

impl AttrValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttrValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttrValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for AttrValue {
    fn from(n: f64) -> Self {
        AttrValue::Number(n)
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Str(s.to_owned())
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

/// Placement of a canvas element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Position {
    Absolute { x: f64, y: f64 },
    /// Offset from the top-left corner of another canvas element.
    Relative { target: String, dx: f64, dy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Marker {
    None,
    OpenArrow,
    Cross,
    HollowDiamond,
    FilledDiamond,
    HollowTriangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectionSpec {
    pub source: String,
    pub target: String,
    pub start_marker: Marker,
    pub end_marker: Marker,
    pub dashed: bool,
    /// Perimeter parameter of the start anchor; center-line anchor when absent.
    pub start_anchor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum SegmentMode {
    Line,
    AxisAligned { f: f64 },
    /// Control points: `c1` relative to the segment start, `c2` relative to its end.
    Bezier { c1x: f64, c1y: f64, c2x: f64, c2y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SegmentEnd {
    /// A point on the target border at the given perimeter parameter.
    Anchor { e: f64 },
    /// The target's center-line anchor.
    Target,
    Point { position: Position },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentSpec {
    pub mode: SegmentMode,
    pub end: SegmentEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LabelSpec {
    pub text: String,
    pub t: f64,
    pub distance: f64,
}

/// Kind-specific payload of an element.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum Props {
    #[default]
    None,
    Text { content: String },
    /// Path data in coordinates normalized to the element box (0..1).
    Path { d: String },
    Placement { pos: Option<Position> },
    Connection(ConnectionSpec),
    Segment(SegmentSpec),
    Label(LabelSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementNode {
    pub id: String,
    pub kind: ElementKind,
    pub attributes: Attributes,
    pub classes: Vec<String>,
    pub children: Vec<ElementNode>,
    pub origin: Span,
    pub props: Props,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("`{child}` is not allowed inside `{parent}`")]
    IllegalChild { parent: ElementKind, child: ElementKind },
}

impl ElementNode {
    /// Build a node from its parts. Ids are assigned as if the node were a
    /// root; attaching it elsewhere re-derives them.
    pub fn create(
        kind: ElementKind,
        attributes: Attributes,
        classes: Vec<String>,
        children: Vec<ElementNode>,
        origin: Span,
    ) -> Result<ElementNode, ModelError> {
        if let Some(bad) = children.iter().find(|c| !kind.accepts_child(c.kind)) {
            return Err(ModelError::IllegalChild { parent: kind, child: bad.kind });
        }
        let mut node = ElementNode { id: String::new(), kind, attributes, classes, children, origin, props: Props::None };
        node.assign_ids(None);
        Ok(node)
    }

    pub fn with_props(mut self, props: Props) -> ElementNode {
        self.props = props;
        self
    }

    /// Id scheme: `parent-id/kind{n}` where n counts earlier siblings of the
    /// same kind. A root is `kind0`.
    pub fn assign_ids(&mut self, parent: Option<&str>) {
        if parent.is_none() {
            self.id = format!("{}0", self.kind);
        }
        let mut counts: BTreeMap<ElementKind, usize> = BTreeMap::new();
        let own = self.id.clone();
        for child in &mut self.children {
            let n = counts.entry(child.kind).or_default();
            child.id = format!("{own}/{}{n}", child.kind);
            *n += 1;
            child.assign_ids(Some(&own));
        }
    }

    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a ElementNode)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    pub fn find(&self, id: &str) -> Option<&ElementNode> {
        if self.id == id {
            return Some(self);
        }
        // ids are path-shaped, so only descend into the matching prefix
        self.children.iter().filter(|c| id.starts_with(c.id.as_str())).find_map(|c| c.find(id))
    }
}

/// The pre-layout representation: element tree, ordered style rules, fonts.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub root: ElementNode,
    pub rules: Vec<StyleRule>,
    pub fonts: FontSet,
}

impl Diagram {
    pub fn new(root: ElementNode, rules: Vec<StyleRule>, fonts: FontSet) -> Diagram {
        Diagram { root, rules, fonts }
    }

    pub fn empty() -> Diagram {
        let root = ElementNode::create(ElementKind::Canvas, Attributes::new(), Vec::new(), Vec::new(), Span::empty(0))
            .expect("empty canvas is valid");
        Diagram::new(root, Vec::new(), FontSet::bundled())
    }
}

/// Arena used while a script builds its diagram. Children are only ever
/// appended, so ids are fixed at creation time.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<BuildNode>,
}

#[derive(Debug)]
pub struct BuildNode {
    pub id: String,
    pub kind: ElementKind,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub attributes: Attributes,
    pub classes: Vec<String>,
    pub origin: Span,
    pub props: Props,
    kind_counts: BTreeMap<ElementKind, usize>,
}

impl TreeBuilder {
    pub fn new() -> TreeBuilder {
        TreeBuilder::default()
    }

    pub fn add_root(&mut self, kind: ElementKind, origin: Span) -> usize {
        self.push(format!("{kind}0"), kind, None, origin)
    }

    pub fn add_child(&mut self, parent: usize, kind: ElementKind, origin: Span) -> Result<usize, ModelError> {
        let parent_kind = self.nodes[parent].kind;
        if !parent_kind.accepts_child(kind) {
            return Err(ModelError::IllegalChild { parent: parent_kind, child: kind });
        }
        let p = &mut self.nodes[parent];
        let n = p.kind_counts.entry(kind).or_default();
        let id = format!("{}/{kind}{n}", p.id);
        *n += 1;
        let handle = self.push(id, kind, Some(parent), origin);
        self.nodes[parent].children.push(handle);
        Ok(handle)
    }

    fn push(&mut self, id: String, kind: ElementKind, parent: Option<usize>, origin: Span) -> usize {
        self.nodes.push(BuildNode {
            id,
            kind,
            parent,
            children: Vec::new(),
            attributes: Attributes::new(),
            classes: Vec::new(),
            origin,
            props: Props::None,
            kind_counts: BTreeMap::new(),
        });
        self.nodes.len() - 1
    }

    pub fn node(&self, handle: usize) -> &BuildNode {
        &self.nodes[handle]
    }

    pub fn node_mut(&mut self, handle: usize) -> &mut BuildNode {
        &mut self.nodes[handle]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn build(&self, root: usize) -> ElementNode {
        let n = &self.nodes[root];
        ElementNode {
            id: n.id.clone(),
            kind: n.kind,
            attributes: n.attributes.clone(),
            classes: n.classes.clone(),
            children: n.children.iter().map(|&c| self.build(c)).collect(),
            origin: n.origin,
            props: n.props.clone(),
        }
    }
}
