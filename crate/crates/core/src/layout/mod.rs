//! Two-phase layout. `measure` sends constraints down and sizes up; `layout`
//! then assigns absolute rectangles top-down and flattens box containers.

mod geom;
mod route;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use geom::{
    border_intersection, cubic_point, flatten_cubic, perimeter_param, perimeter_point, polyline_at, Point, Rect,
    BEZIER_STEPS,
};
pub use route::{RouteSpec, RoutedConnection, RoutedSegment, SegmentKind};

use crate::diagnostics::Diagnostic;
use crate::model::{
    resolve_styles, AttrValue, Attributes, Diagram, ElementKind, ElementNode, Marker, Position, Props, ResolvedStyles,
};
use crate::syntax::Span;

pub const DEFAULT_PADDING: f64 = 5.0;
pub const CANVAS_MARGIN: f64 = 10.0;
pub const MARKER_SIZE: f64 = 12.0;
pub const LABEL_OFFSET: f64 = 5.0;
pub const DEFAULT_PLACEMENT_GAP: f64 = 20.0;

/// Grid that measured text sizes snap to. Keeping every derived coordinate
/// on a binary grid makes sums of offsets exact, so translating a subtree
/// commutes with re-laying it out.
const GRID: f64 = 1024.0;

fn snap(v: f64) -> f64 {
    (v * GRID).round() / GRID
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    pub min_width: f64,
    pub max_width: f64,
    pub min_height: f64,
    pub max_height: f64,
}

impl Constraints {
    pub const UNBOUNDED: Constraints =
        Constraints { min_width: 0.0, max_width: f64::INFINITY, min_height: 0.0, max_height: f64::INFINITY };

    pub fn new(min_width: f64, max_width: f64, min_height: f64, max_height: f64) -> Constraints {
        Constraints { min_width, max_width, min_height, max_height }
    }

    pub fn tight(width: f64, height: f64) -> Constraints {
        Constraints::new(width, width, height, height)
    }

    /// Clamp into range; a degenerate range (min > max) collapses to min.
    pub fn clamp(&self, width: f64, height: f64) -> Size {
        Size { width: width.min(self.max_width).max(self.min_width), height: height.min(self.max_height).max(self.min_height) }
    }

    pub fn contains(&self, s: Size) -> bool {
        let w_ok = if self.min_width > self.max_width { s.width == self.min_width } else { s.width >= self.min_width && s.width <= self.max_width };
        let h_ok = if self.min_height > self.max_height { s.height == self.min_height } else { s.height >= self.min_height && s.height <= self.max_height };
        w_ok && h_ok
    }

    fn loosen(&self) -> Constraints {
        Constraints::new(0.0, self.max_width, 0.0, self.max_height)
    }

    fn deflate(&self, dw: f64, dh: f64) -> Constraints {
        Constraints::new(
            (self.min_width - dw).max(0.0),
            (self.max_width - dw).max(0.0),
            (self.min_height - dh).max(0.0),
            (self.max_height - dh).max(0.0),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Size {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextBlock {
    pub lines: Vec<String>,
    pub font_size: f64,
    pub line_height: f64,
    /// Distance from the top of a line box to its baseline.
    pub baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectionEnds {
    pub start: Point,
    pub end: Point,
    /// Unit vectors pointing along the route into each tip.
    pub start_direction: Point,
    pub end_direction: Point,
    pub start_marker: Marker,
    pub end_marker: Marker,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Content {
    None,
    Text(TextBlock),
    /// Normalized path data scaled to the element box.
    Path(String),
    Connection(ConnectionEnds),
    Segment(RoutedSegment),
    Label { text: TextBlock, anchor: Point, t: f64, distance: f64 },
}

/// Absolutely positioned element with resolved visual attributes only.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutedElement {
    pub id: String,
    pub kind: ElementKind,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub attributes: Attributes,
    pub classes: Vec<String>,
    pub content: Content,
    pub children: Vec<LayoutedElement>,
    pub origin: Span,
}

impl LayoutedElement {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.width, self.height)
    }

    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a LayoutedElement)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    pub fn find(&self, id: &str) -> Option<&LayoutedElement> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutedDiagram {
    pub root: LayoutedElement,
    pub diagnostics: Vec<Diagnostic>,
}

impl LayoutedDiagram {
    pub fn bounds(&self) -> Rect {
        self.root.rect()
    }

    pub fn find(&self, id: &str) -> Option<&LayoutedElement> {
        self.root.find(id)
    }
}

pub fn visual_attributes(kind: ElementKind) -> &'static [&'static str] {
    match kind {
        ElementKind::Rect | ElementKind::Ellipse | ElementKind::Path => &["fill", "stroke", "strokeDash", "strokeWidth"],
        ElementKind::Text | ElementKind::Label => &["color", "fontFamily", "fontSize", "fontStyle", "fontWeight"],
        ElementKind::CanvasConnection | ElementKind::ConnectionSegment => &["stroke", "strokeDash", "strokeWidth"],
        ElementKind::Canvas => &["fill"],
        ElementKind::CanvasElement | ElementKind::Vbox | ElementKind::Hbox => &[],
    }
}

#[derive(Debug, Default)]
struct CanvasPlan {
    /// Added to local coordinates to get offsets within the canvas box.
    origin: Point,
    elements: HashMap<String, Rect>,
    routes: HashMap<String, RoutedConnection>,
}

/// Runs the measure and layout passes over one diagram.
pub struct Layouter<'a> {
    diagram: &'a Diagram,
    styles: ResolvedStyles,
    sizes: HashMap<String, Size>,
    canvases: HashMap<String, CanvasPlan>,
    dropped: HashSet<String>,
    /// Rectangle assigned to every node, including flattened containers.
    pub assigned: HashMap<String, Rect>,
    /// Constraints each node was last measured under.
    pub constraints: HashMap<String, Constraints>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Resolve styles, measure unbounded, lay out with the root canvas origin
/// fixed, route connections and flatten.
pub fn layout_diagram(diagram: &Diagram) -> LayoutedDiagram {
    let mut l = Layouter::new(diagram);
    l.run(None)
}

impl<'a> Layouter<'a> {
    pub fn new(diagram: &'a Diagram) -> Layouter<'a> {
        Layouter {
            diagram,
            styles: resolve_styles(&diagram.root, &diagram.rules),
            sizes: HashMap::new(),
            canvases: HashMap::new(),
            dropped: HashSet::new(),
            assigned: HashMap::new(),
            constraints: HashMap::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Lay out the whole diagram. With `at`, the root's top-left is placed
    /// there; otherwise a root canvas keeps its coordinate origin at (0, 0).
    pub fn run(&mut self, at: Option<Point>) -> LayoutedDiagram {
        let root = &self.diagram.root;
        let size = self.measure(root, Constraints::UNBOUNDED);
        let pos = at.unwrap_or_else(|| match self.canvases.get(&root.id) {
            Some(plan) => Point::new(-plan.origin.x, -plan.origin.y),
            None => Point::default(),
        });
        let mut out = Vec::new();
        self.layout(root, Rect::new(pos.x, pos.y, size.width, size.height), &mut out);
        let root = out.into_iter().next().unwrap_or_else(|| LayoutedElement {
            id: root.id.clone(),
            kind: root.kind,
            x: pos.x,
            y: pos.y,
            width: 0.0,
            height: 0.0,
            attributes: Attributes::new(),
            classes: root.classes.clone(),
            content: Content::None,
            children: Vec::new(),
            origin: root.origin,
        });
        LayoutedDiagram { root, diagnostics: std::mem::take(&mut self.diagnostics) }
    }

    pub fn styles(&self) -> &ResolvedStyles {
        &self.styles
    }

    pub fn measured(&self, id: &str) -> Option<Size> {
        self.sizes.get(id).copied()
    }

    fn drop_element(&mut self, node: &ElementNode, code: &str, message: String) {
        self.diagnostics.push(Diagnostic::error(node.origin, code, message));
        self.dropped.insert(node.id.clone());
    }

    fn explicit(&self, node: &ElementNode, name: &str) -> Option<f64> {
        self.styles.get(&node.id).and_then(|a| a.get(name)).and_then(AttrValue::as_number)
    }

    fn padding(&self, node: &ElementNode) -> f64 {
        match node.kind {
            ElementKind::CanvasElement => 0.0,
            _ => self.styles.number(&node.id, "padding"),
        }
    }

    fn text_block(&mut self, node: &ElementNode, text: &str) -> Option<(TextBlock, Size)> {
        let family = self.styles.string(&node.id, "fontFamily");
        let size = self.styles.number(&node.id, "fontSize");
        let fonts = &self.diagram.fonts;
        match fonts.measure_text(text, &family, size) {
            Ok((w, h)) => {
                let metrics = fonts.get(&family).expect("family resolved by measure_text");
                let line_height = metrics.line_height(size);
                let em = (metrics.ascent - metrics.descent) * size / metrics.units_per_em;
                let block = TextBlock {
                    lines: text.split('\n').map(str::to_owned).collect(),
                    font_size: size,
                    line_height: snap(line_height),
                    baseline: snap((line_height - em) / 2.0 + metrics.ascent_at(size)),
                };
                Some((block, Size { width: snap(w), height: snap(h) }))
            }
            Err(err) => {
                let code = match err {
                    crate::model::FontError::UnknownFont(_) => "UnknownFont",
                    _ => "InvalidFont",
                };
                self.drop_element(node, code, err.to_string());
                None
            }
        }
    }

    /// Phase 1. Records the size of every visited node.
    pub fn measure(&mut self, node: &ElementNode, c: Constraints) -> Size {
        let raw = match node.kind {
            ElementKind::Text => match &node.props {
                Props::Text { content } => {
                    let content = content.clone();
                    self.text_block(node, &content).map(|(_, s)| s).unwrap_or_default()
                }
                _ => Size::default(),
            },
            ElementKind::Path => Size {
                width: self.explicit(node, "width").unwrap_or(0.0),
                height: self.explicit(node, "height").unwrap_or(0.0),
            },
            ElementKind::Rect | ElementKind::Ellipse | ElementKind::CanvasElement => {
                let p = self.padding(node);
                let ew = self.explicit(node, "width");
                let eh = self.explicit(node, "height");
                let mut inner = c;
                if let Some(w) = ew {
                    let w = w.min(c.max_width).max(c.min_width);
                    inner.min_width = w;
                    inner.max_width = w;
                }
                if let Some(h) = eh {
                    let h = h.min(c.max_height).max(c.min_height);
                    inner.min_height = h;
                    inner.max_height = h;
                }
                let inner = inner.deflate(2.0 * p, 2.0 * p);
                let child_c = Constraints::new(inner.min_width, inner.max_width, inner.min_height, inner.max_height);
                let mut content = Size::default();
                for child in &node.children {
                    let s = self.measure(child, child_c.loosen());
                    content.width = content.width.max(s.width);
                    content.height = content.height.max(s.height);
                }
                Size {
                    width: ew.unwrap_or(content.width + 2.0 * p),
                    height: eh.unwrap_or(content.height + 2.0 * p),
                }
            }
            ElementKind::Vbox | ElementKind::Hbox => {
                let vertical = node.kind == ElementKind::Vbox;
                let (max_cross, max_main) = if vertical { (c.max_width, c.max_height) } else { (c.max_height, c.max_width) };
                let mut remaining = max_main;
                let (mut cross, mut main) = (0.0f64, 0.0f64);
                for child in &node.children {
                    let cc = if vertical {
                        Constraints::new(0.0, max_cross, 0.0, remaining)
                    } else {
                        Constraints::new(0.0, remaining, 0.0, max_cross)
                    };
                    let s = self.measure(child, cc);
                    let (sc, sm) = if vertical { (s.width, s.height) } else { (s.height, s.width) };
                    cross = cross.max(sc);
                    main += sm;
                    remaining = (remaining - sm).max(0.0);
                }
                if vertical {
                    Size { width: cross, height: main }
                } else {
                    Size { width: main, height: cross }
                }
            }
            ElementKind::Canvas => self.measure_canvas(node),
            // measured by their canvas
            ElementKind::CanvasConnection | ElementKind::ConnectionSegment | ElementKind::Label => Size::default(),
        };
        let size = c.clamp(raw.width, raw.height);
        self.sizes.insert(node.id.clone(), size);
        self.constraints.insert(node.id.clone(), c);
        size
    }

    fn measure_canvas(&mut self, node: &ElementNode) -> Size {
        let margin = self.styles.number(&node.id, "margin");
        let elements: Vec<&ElementNode> = node.children.iter().filter(|c| c.kind == ElementKind::CanvasElement).collect();
        for e in &elements {
            self.measure(e, Constraints::UNBOUNDED);
        }
        let positions = self.resolve_positions(&elements);
        let mut plan = CanvasPlan::default();
        for e in &elements {
            if let (Some(p), Some(s)) = (positions.get(&e.id), self.sizes.get(&e.id)) {
                plan.elements.insert(e.id.clone(), Rect::new(p.x, p.y, s.width, s.height));
            }
        }
        let mut bbox: Option<Rect> = None;
        let mut grow = |r: Rect| bbox = Some(bbox.map_or(r, |b| b.union(&r)));
        for e in &elements {
            if let Some(r) = plan.elements.get(&e.id) {
                grow(*r);
            }
        }
        for conn in node.children.iter().filter(|c| c.kind == ElementKind::CanvasConnection) {
            if let Some(routed) = self.route_connection(conn, &plan.elements) {
                for r in routed.extent() {
                    grow(r);
                }
                plan.routes.insert(conn.id.clone(), routed);
            }
        }
        let size = match bbox {
            Some(b) => {
                plan.origin = Point::new(margin - b.x, margin - b.y);
                Size { width: b.width + 2.0 * margin, height: b.height + 2.0 * margin }
            }
            None => Size::default(),
        };
        self.canvases.insert(node.id.clone(), plan);
        size
    }

    /// Canvas-local top-left corners. Unplaced elements stack at x = 0 in
    /// declaration order.
    fn resolve_positions(&mut self, elements: &[&ElementNode]) -> HashMap<String, Point> {
        #[derive(Clone, Copy, PartialEq)]
        enum State {
            Pending,
            Visiting,
            Done(Point),
            Failed,
        }
        let index: HashMap<&str, usize> = elements.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let mut state = vec![State::Pending; elements.len()];
        let mut cursor = 0.0;
        for (i, e) in elements.iter().enumerate() {
            if self.dropped.contains(&e.id) {
                state[i] = State::Failed;
                continue;
            }
            // every element reserves its stack slot, so giving one an explicit
            // position never moves the others
            if matches!(e.props, Props::Placement { pos: None } | Props::None) {
                state[i] = State::Done(Point::new(0.0, cursor));
            }
            cursor += self.sizes[&e.id].height + DEFAULT_PLACEMENT_GAP;
        }
        for start in 0..elements.len() {
            let mut path: Vec<usize> = Vec::new();
            let mut cur = start;
            // walk the rpos chain until something resolved or failed
            loop {
                match state[cur] {
                    State::Done(_) | State::Failed => break,
                    State::Visiting => {
                        let cycle_start = path.iter().position(|&i| i == cur).unwrap_or(0);
                        for &i in &path[cycle_start..] {
                            state[i] = State::Failed;
                            self.drop_element(elements[i], "CyclicReference", "relative positions form a cycle".into());
                        }
                        break;
                    }
                    State::Pending => {
                        state[cur] = State::Visiting;
                        path.push(cur);
                        match &elements[cur].props {
                            Props::Placement { pos: Some(Position::Relative { target, .. }) } => match index.get(target.as_str()) {
                                Some(&t) => cur = t,
                                None => {
                                    state[cur] = State::Failed;
                                    self.drop_element(
                                        elements[cur],
                                        "MissingTarget",
                                        format!("relative position target `{target}` is not on this canvas"),
                                    );
                                    break;
                                }
                            },
                            Props::Placement { pos: Some(Position::Absolute { x, y }) } => {
                                state[cur] = State::Done(Point::new(*x, *y));
                                break;
                            }
                            _ => unreachable!("unplaced elements are resolved up front"),
                        }
                    }
                }
            }
            // unwind: each element on the path depends on the next one
            while let Some(i) = path.pop() {
                if state[i] != State::Visiting {
                    continue;
                }
                let Props::Placement { pos: Some(Position::Relative { target, dx, dy }) } = &elements[i].props else {
                    continue;
                };
                match state[index[target.as_str()]] {
                    State::Done(p) => state[i] = State::Done(Point::new(p.x + dx, p.y + dy)),
                    _ => {
                        state[i] = State::Failed;
                        self.drop_element(
                            elements[i],
                            "MissingTarget",
                            format!("relative position target `{target}` could not be placed"),
                        );
                    }
                }
            }
        }
        elements
            .iter()
            .zip(state)
            .filter_map(|(e, s)| match s {
                State::Done(p) => Some((e.id.clone(), p)),
                _ => None,
            })
            .collect()
    }

    fn route_connection(&mut self, conn: &ElementNode, placed: &HashMap<String, Rect>) -> Option<RoutedConnection> {
        let Props::Connection(spec) = &conn.props else {
            self.drop_element(conn, "InvalidConnection", "connection without endpoints".into());
            return None;
        };
        let (Some(source), Some(target)) = (placed.get(&spec.source), placed.get(&spec.target)) else {
            let missing = if placed.contains_key(&spec.source) { &spec.target } else { &spec.source };
            let message = format!("connection endpoint `{missing}` is not available");
            self.drop_element(conn, "DanglingConnection", message);
            return None;
        };
        let segments: Vec<_> = conn
            .children
            .iter()
            .filter_map(|c| match &c.props {
                Props::Segment(s) => Some((c.id.clone(), s.clone())),
                _ => None,
            })
            .collect();
        let labels: Vec<_> = conn
            .children
            .iter()
            .filter_map(|c| match &c.props {
                Props::Label(l) => Some((c, l.clone())),
                _ => None,
            })
            .collect();
        let route = RouteSpec { start_anchor: spec.start_anchor, segments };
        let routed = match route::route(&route, &conn.id, source, target, placed) {
            Ok(r) => r,
            Err(message) => {
                self.drop_element(conn, "InvalidRoute", message);
                return None;
            }
        };
        let mut routed = routed.with_markers(spec.start_marker, spec.end_marker);
        for (node, label) in labels {
            let Some((block, size)) = self.text_block(node, &label.text) else { continue };
            self.sizes.insert(node.id.clone(), size);
            routed.place_label(&node.id, label.t, label.distance, block, size);
        }
        Some(routed)
    }

    fn visual(&self, node: &ElementNode) -> Attributes {
        visual_attributes(node.kind)
            .iter()
            .filter_map(|name| self.styles.value(&node.id, name).map(|v| ((*name).to_owned(), v)))
            .collect()
    }

    fn leaf(&self, node: &ElementNode, r: Rect, content: Content) -> LayoutedElement {
        LayoutedElement {
            id: node.id.clone(),
            kind: node.kind,
            x: r.x,
            y: r.y,
            width: r.width,
            height: r.height,
            attributes: self.visual(node),
            classes: node.classes.clone(),
            content,
            children: Vec::new(),
            origin: node.origin,
        }
    }

    /// Phase 2. Pushes the layouted form of `node` (or, for box containers,
    /// of its children) onto `out`.
    pub fn layout(&mut self, node: &ElementNode, r: Rect, out: &mut Vec<LayoutedElement>) {
        if self.dropped.contains(&node.id) {
            return;
        }
        self.assigned.insert(node.id.clone(), r);
        match node.kind {
            ElementKind::Vbox | ElementKind::Hbox => {
                let vertical = node.kind == ElementKind::Vbox;
                let align = self.styles.string(&node.id, "align");
                let mut cursor = if vertical { r.y } else { r.x };
                for child in &node.children {
                    let s = self.sizes.get(&child.id).copied().unwrap_or_default();
                    let (cross_start, cross_len, own) =
                        if vertical { (r.x, r.width, s.width) } else { (r.y, r.height, s.height) };
                    let (offset, len) = match align.as_str() {
                        "center" => ((cross_len - own) / 2.0, own),
                        "end" => (cross_len - own, own),
                        "stretch" => (0.0, cross_len),
                        _ => (0.0, own),
                    };
                    let child_rect = if vertical {
                        Rect::new(cross_start + offset, cursor, len, s.height)
                    } else {
                        Rect::new(cursor, cross_start + offset, s.width, len)
                    };
                    cursor += if vertical { s.height } else { s.width };
                    self.layout(child, child_rect, out);
                }
            }
            ElementKind::Rect | ElementKind::Ellipse | ElementKind::CanvasElement => {
                let p = self.padding(node);
                // padding larger than a fixed size shrinks so children stay inside
                let (px, py) = (p.min(r.width / 2.0), p.min(r.height / 2.0));
                let inner = Rect::new(r.x + px, r.y + py, r.width - 2.0 * px, r.height - 2.0 * py);
                let mut children = Vec::new();
                for child in &node.children {
                    self.layout(child, inner, &mut children);
                }
                let mut e = self.leaf(node, r, Content::None);
                e.children = children;
                out.push(e);
            }
            ElementKind::Text => {
                let content = match &node.props {
                    Props::Text { content } => content.clone(),
                    _ => String::new(),
                };
                let Some((block, _)) = self.text_block(node, &content) else { return };
                out.push(self.leaf(node, r, Content::Text(block)));
            }
            ElementKind::Path => {
                let d = match &node.props {
                    Props::Path { d } => d.clone(),
                    _ => String::new(),
                };
                out.push(self.leaf(node, r, Content::Path(d)));
            }
            ElementKind::Canvas => {
                let plan = self.canvases.remove(&node.id).unwrap_or_default();
                let (ox, oy) = (r.x + plan.origin.x, r.y + plan.origin.y);
                let mut children = Vec::new();
                for child in &node.children {
                    match child.kind {
                        ElementKind::CanvasElement => {
                            if let Some(local) = plan.elements.get(&child.id) {
                                self.layout(child, local.translate(ox, oy), &mut children);
                            }
                        }
                        ElementKind::CanvasConnection => {
                            if let Some(routed) = plan.routes.get(&child.id) {
                                let routed = routed.translate(ox, oy);
                                children.push(self.layout_connection(child, &routed));
                            }
                        }
                        _ => {}
                    }
                }
                let mut e = self.leaf(node, r, Content::None);
                e.children = children;
                out.push(e);
            }
            ElementKind::CanvasConnection | ElementKind::ConnectionSegment | ElementKind::Label => {}
        }
    }

    fn layout_connection(&mut self, node: &ElementNode, routed: &RoutedConnection) -> LayoutedElement {
        let bounds = routed.bounds();
        self.assigned.insert(node.id.clone(), bounds);
        let mut e = self.leaf(node, bounds, Content::Connection(routed.ends()));
        let mut explicit = node.children.iter().filter(|c| c.kind == ElementKind::ConnectionSegment);
        for seg in &routed.segments {
            // implicit segments (default route, final leg) borrow the connection's id space
            let child = explicit.next();
            let id = child.map(|c| c.id.clone()).unwrap_or_else(|| seg.id.clone());
            let r = Rect::bounding(seg.points.iter().copied()).unwrap_or_default();
            let mut s = match child {
                Some(c) => self.leaf(c, r, Content::Segment(seg.clone())),
                None => LayoutedElement {
                    id,
                    kind: ElementKind::ConnectionSegment,
                    x: r.x,
                    y: r.y,
                    width: r.width,
                    height: r.height,
                    attributes: self.visual(node),
                    classes: Vec::new(),
                    content: Content::Segment(seg.clone()),
                    children: Vec::new(),
                    origin: node.origin,
                },
            };
            s.attributes = self.visual(child.unwrap_or(node));
            e.children.push(s);
        }
        for label in &routed.labels {
            let Some(ln) = node.children.iter().find(|c| c.id == label.id) else { continue };
            let r = label.rect;
            let content =
                Content::Label { text: label.text.clone(), anchor: label.anchor, t: label.t, distance: label.distance };
            e.children.push(self.leaf(ln, r, content));
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FontSet, StyleRule};

    fn node(kind: ElementKind, attrs: &[(&str, f64)], children: Vec<ElementNode>) -> ElementNode {
        let attributes = attrs.iter().map(|(k, v)| ((*k).to_owned(), AttrValue::Number(*v))).collect();
        ElementNode::create(kind, attributes, vec![], children, Span::empty(0)).unwrap()
    }

    fn diagram(root: ElementNode) -> Diagram {
        Diagram::new(root, Vec::<StyleRule>::new(), FontSet::bundled())
    }

    fn sized_rect(w: f64, h: f64) -> ElementNode {
        node(ElementKind::Rect, &[("width", w), ("height", h)], vec![])
    }

    #[test]
    fn vbox_measures_max_and_sum() {
        let d = diagram(node(ElementKind::Vbox, &[], vec![sized_rect(100.0, 20.0), sized_rect(80.0, 30.0)]));
        let mut l = Layouter::new(&d);
        assert_eq!(l.measure(&d.root, Constraints::UNBOUNDED), Size { width: 100.0, height: 50.0 });
        let out = l.run(Some(Point::default()));
        // the vbox itself is flattened away; its first child becomes the root
        assert_eq!(out.root.id, "vbox0/rect0");
        assert_eq!(l.assigned["vbox0/rect0"], Rect::new(0.0, 0.0, 100.0, 20.0));
        assert_eq!(l.assigned["vbox0/rect1"], Rect::new(0.0, 20.0, 80.0, 30.0));
    }

    #[test]
    fn rect_clamps_to_constraints() {
        let d = diagram(node(ElementKind::Rect, &[], vec![sized_rect(300.0, 10.0)]));
        let mut l = Layouter::new(&d);
        let s = l.measure(&d.root, Constraints::new(0.0, 120.0, 0.0, f64::INFINITY));
        assert_eq!(s.width, 120.0);
        assert_eq!(l.measured("rect0/rect0").unwrap().width, 110.0);
    }

    #[test]
    fn empty_text_is_one_line_high() {
        let text = node(ElementKind::Text, &[], vec![]).with_props(Props::Text { content: String::new() });
        let d = diagram(text);
        let mut l = Layouter::new(&d);
        let s = l.measure(&d.root, Constraints::new(0.0, 50.0, 0.0, 50.0));
        assert_eq!(s.width, 0.0);
        assert_eq!(s.height, snap(0.925 * 14.0 * 1.2));
    }

    #[test]
    fn empty_canvas_is_zero_sized() {
        let d = diagram(node(ElementKind::Canvas, &[], vec![]));
        let out = layout_diagram(&d);
        assert_eq!(out.bounds(), Rect::default());
        assert!(out.root.children.is_empty());
    }
}
