//! Random element trees and the layout properties they must satisfy.
//! Shared by the layout property tests and the acceptance suite.

#![allow(dead_code)]

use livediag_core::layout::{Constraints, Content, LayoutedElement, Layouter, Point, Rect, Size};
use livediag_core::model::{
    AttrValue, Attributes, ConnectionSpec, Diagram, ElementKind, ElementNode, FontSet, Marker, Position, Props, SegmentEnd,
    SegmentMode, SegmentSpec,
};
use livediag_core::syntax::Span;
use proptest::prelude::*;

/// Shape of a generated tree before it becomes an `ElementNode`.
#[derive(Debug, Clone)]
pub enum Tree {
    Boxed { ellipse: bool, width: Option<u16>, height: Option<u16>, padding: u8, kids: Vec<Tree> },
    Stack { vertical: bool, align: u8, kids: Vec<Tree> },
    Text { text: String, size: u8 },
    Path { width: u16, height: u16 },
}

const ALIGNS: [&str; 4] = ["start", "center", "end", "stretch"];

pub fn tree_strategy() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        ("[a-zA-Z :()]{0,12}", 8u8..24).prop_map(|(text, size)| Tree::Text { text, size }),
        (0u16..120, 0u16..60).prop_map(|(width, height)| Tree::Path { width, height }),
        (any::<bool>(), prop::option::of(0u16..200), prop::option::of(0u16..120), 0u8..10)
            .prop_map(|(ellipse, width, height, padding)| Tree::Boxed { ellipse, width, height, padding, kids: vec![] }),
    ];
    leaf.prop_recursive(4, 40, 5, |inner| {
        prop_oneof![
            (any::<bool>(), 0u8..4, prop::collection::vec(inner.clone(), 0..5))
                .prop_map(|(vertical, align, kids)| Tree::Stack { vertical, align, kids }),
            (any::<bool>(), prop::option::of(0u16..300), prop::option::of(0u16..200), 0u8..10, prop::collection::vec(inner, 0..4))
                .prop_map(|(ellipse, width, height, padding, kids)| Tree::Boxed { ellipse, width, height, padding, kids }),
        ]
    })
}

fn node(kind: ElementKind, attributes: Attributes, children: Vec<ElementNode>) -> ElementNode {
    ElementNode::create(kind, attributes, vec![], children, Span::empty(0)).expect("generator builds legal trees")
}

pub fn build(t: &Tree) -> ElementNode {
    match t {
        Tree::Boxed { ellipse, width, height, padding, kids } => {
            let mut a = Attributes::new();
            if let Some(w) = width {
                a.insert("width".into(), AttrValue::Number(*w as f64));
            }
            if let Some(h) = height {
                a.insert("height".into(), AttrValue::Number(*h as f64));
            }
            a.insert("padding".into(), AttrValue::Number(*padding as f64));
            let kind = if *ellipse { ElementKind::Ellipse } else { ElementKind::Rect };
            node(kind, a, kids.iter().map(build).collect())
        }
        Tree::Stack { vertical, align, kids } => {
            let a = Attributes::from([("align".to_owned(), AttrValue::from(ALIGNS[*align as usize]))]);
            let kind = if *vertical { ElementKind::Vbox } else { ElementKind::Hbox };
            node(kind, a, kids.iter().map(build).collect())
        }
        Tree::Text { text, size } => {
            let a = Attributes::from([("fontSize".to_owned(), AttrValue::Number(*size as f64))]);
            node(ElementKind::Text, a, vec![]).with_props(Props::Text { content: text.clone() })
        }
        Tree::Path { width, height } => {
            let a = Attributes::from([
                ("width".to_owned(), AttrValue::Number(*width as f64)),
                ("height".to_owned(), AttrValue::Number(*height as f64)),
            ]);
            node(ElementKind::Path, a, vec![]).with_props(Props::Path { d: "M 0 0 L 1 1".into() })
        }
    }
}

pub fn diagram(t: &Tree) -> Diagram {
    Diagram::new(build(t), vec![], FontSet::bundled())
}

fn all_nodes(root: &ElementNode) -> Vec<&ElementNode> {
    let mut v = Vec::new();
    root.walk(&mut |n| v.push(n));
    v
}

/// Every node's measured size lies inside the constraints it was given,
/// including an arbitrary constraint applied at the root.
pub fn check_constraints(d: &Diagram, c: Constraints) -> Result<(), String> {
    let mut l = Layouter::new(d);
    let root_size = l.measure(&d.root, c);
    if !c.contains(root_size) {
        return Err(format!("root size {root_size:?} outside {c:?}"));
    }
    for n in all_nodes(&d.root) {
        let (Some(size), Some(nc)) = (l.measured(&n.id), l.constraints.get(&n.id)) else { continue };
        if !nc.contains(size) || !size.width.is_finite() || !size.height.is_finite() {
            return Err(format!("{}: {size:?} outside {nc:?}", n.id));
        }
    }
    Ok(())
}

fn contained(outer: &Rect, inner: &Rect) -> bool {
    const EPS: f64 = 1e-9;
    inner.x >= outer.x - EPS
        && inner.y >= outer.y - EPS
        && inner.x + inner.width <= outer.x + outer.width + EPS
        && inner.y + inner.height <= outer.y + outer.height + EPS
}

fn check_contained(e: &LayoutedElement) -> Result<(), String> {
    for c in &e.children {
        if !contained(&e.rect(), &c.rect()) {
            return Err(format!("{} {:?} escapes {} {:?}", c.id, c.rect(), e.id, e.rect()));
        }
        check_contained(c)?;
    }
    Ok(())
}

/// Children of every laid-out element stay inside its box.
pub fn check_containment(d: &Diagram) -> Result<(), String> {
    let out = Layouter::new(d).run(Some(Point::new(0.0, 0.0)));
    check_contained(&out.root)
}

/// A stack's size is the clamped sum of its children along the main axis
/// and the clamped maximum across it; children sit back to back.
pub fn check_additivity(d: &Diagram) -> Result<(), String> {
    let mut l = Layouter::new(d);
    l.run(Some(Point::new(0.0, 0.0)));
    for n in all_nodes(&d.root) {
        if !matches!(n.kind, ElementKind::Vbox | ElementKind::Hbox) {
            continue;
        }
        let vertical = n.kind == ElementKind::Vbox;
        let sizes: Vec<Size> = n.children.iter().map(|c| l.measured(&c.id).unwrap()).collect();
        let main: f64 = sizes.iter().map(|s| if vertical { s.height } else { s.width }).sum();
        let cross = sizes.iter().map(|s| if vertical { s.width } else { s.height }).fold(0.0, f64::max);
        let c = l.constraints[&n.id];
        let expected = if vertical { c.clamp(cross, main) } else { c.clamp(main, cross) };
        let got = l.measured(&n.id).unwrap();
        if got != expected {
            return Err(format!("{}: measured {got:?}, children sum to {expected:?}", n.id));
        }
        let origin = l.assigned[&n.id];
        let mut cursor = if vertical { origin.y } else { origin.x };
        for (c, s) in n.children.iter().zip(&sizes) {
            let r = l.assigned[&c.id];
            let at = if vertical { r.y } else { r.x };
            if at != cursor {
                return Err(format!("{} starts at {at}, expected {cursor}", c.id));
            }
            cursor += if vertical { s.height } else { s.width };
        }
    }
    Ok(())
}

fn flatten(e: &LayoutedElement, out: &mut Vec<(String, f64, f64, f64, f64)>) {
    out.push((e.id.clone(), e.x, e.y, e.width, e.height));
    for c in &e.children {
        flatten(c, out);
    }
}

/// Laying out at an offset moves every element by exactly that offset.
pub fn check_translation(d: &Diagram, dx: f64, dy: f64) -> Result<(), String> {
    let a = Layouter::new(d).run(Some(Point::new(0.0, 0.0)));
    let b = Layouter::new(d).run(Some(Point::new(dx, dy)));
    let (mut fa, mut fb) = (Vec::new(), Vec::new());
    flatten(&a.root, &mut fa);
    flatten(&b.root, &mut fb);
    if fa.len() != fb.len() {
        return Err("element count changed".into());
    }
    for (p, q) in fa.iter().zip(&fb) {
        if p.0 != q.0 || p.1 + dx != q.1 || p.2 + dy != q.2 || p.3 != q.3 || p.4 != q.4 {
            return Err(format!("{p:?} translated by ({dx}, {dy}) gives {q:?}"));
        }
    }
    Ok(())
}

/// A canvas of absolutely placed boxes joined by routed connections.
#[derive(Debug, Clone)]
pub struct CanvasCase {
    pub boxes: Vec<(i16, i16, u16, u16)>,
    /// (source, target, start anchor, end anchor)
    pub links: Vec<(usize, usize, Option<f64>, Option<f64>)>,
}

pub fn canvas_strategy() -> impl Strategy<Value = CanvasCase> {
    prop::collection::vec((-300i16..300, -300i16..300, 10u16..200, 10u16..150), 2..7).prop_flat_map(|boxes| {
        let n = boxes.len();
        let link = (0..n, 0..n, prop::option::of(0.0f64..1.0), prop::option::of(0.0f64..1.0));
        (Just(boxes), prop::collection::vec(link, 1..8))
            .prop_map(|(boxes, links)| CanvasCase { boxes, links: links.into_iter().filter(|l| l.0 != l.1).collect() })
    })
}

pub fn canvas_diagram(case: &CanvasCase) -> Diagram {
    let mut children = Vec::new();
    for (x, y, w, h) in &case.boxes {
        let a = Attributes::from([
            ("width".to_owned(), AttrValue::Number(*w as f64)),
            ("height".to_owned(), AttrValue::Number(*h as f64)),
        ]);
        let rect = node(ElementKind::Rect, Attributes::new(), vec![]);
        let pos = Position::Absolute { x: *x as f64, y: *y as f64 };
        children.push(node(ElementKind::CanvasElement, a, vec![rect]).with_props(Props::Placement { pos: Some(pos) }));
    }
    for (i, (s, t, start, end)) in case.links.iter().enumerate() {
        let mut segs = Vec::new();
        if let Some(e) = end {
            let mode = if i % 2 == 0 { SegmentMode::Line } else { SegmentMode::AxisAligned { f: 0.5 } };
            let spec = SegmentSpec { mode, end: SegmentEnd::Anchor { e: *e } };
            segs.push(node(ElementKind::ConnectionSegment, Attributes::new(), vec![]).with_props(Props::Segment(spec)));
        }
        let spec = ConnectionSpec {
            source: format!("canvas0/canvasElement{s}"),
            target: format!("canvas0/canvasElement{t}"),
            start_marker: Marker::None,
            end_marker: Marker::OpenArrow,
            dashed: false,
            start_anchor: *start,
        };
        children.push(node(ElementKind::CanvasConnection, Attributes::new(), segs).with_props(Props::Connection(spec)));
    }
    let mut root = node(ElementKind::Canvas, Attributes::new(), children);
    root.assign_ids(None);
    Diagram::new(root, vec![], FontSet::bundled())
}

/// Distance from `p` to the border of `r`, computed side by side.
pub fn border_distance(r: &Rect, p: Point) -> f64 {
    let seg = |a: Point, b: Point| {
        let (vx, vy) = (b.x - a.x, b.y - a.y);
        let len2 = vx * vx + vy * vy;
        let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * vx + (p.y - a.y) * vy) / len2).clamp(0.0, 1.0) };
        let (cx, cy) = (a.x + t * vx, a.y + t * vy);
        ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()
    };
    let (x0, y0, x1, y1) = (r.x, r.y, r.x + r.width, r.y + r.height);
    let c = [Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)];
    (0..4).map(|i| seg(c[i], c[(i + 1) % 4])).fold(f64::INFINITY, f64::min)
}

/// Route endpoints lie on the borders of the elements they attach to.
pub fn check_anchors(case: &CanvasCase) -> Result<(), String> {
    let d = canvas_diagram(case);
    let out = Layouter::new(&d).run(None);
    for (i, (s, t, _, _)) in case.links.iter().enumerate() {
        let conn = out.find(&format!("canvas0/canvasConnection{i}")).ok_or("connection missing")?;
        let Content::Connection(ends) = &conn.content else { return Err("not a connection".into()) };
        let src = out.find(&format!("canvas0/canvasElement{s}")).unwrap().rect();
        let dst = out.find(&format!("canvas0/canvasElement{t}")).unwrap().rect();
        let (ds, de) = (border_distance(&src, ends.start), border_distance(&dst, ends.end));
        if ds > 1e-9 || de > 1e-9 {
            return Err(format!("connection {i}: start {ds} / end {de} off the border"));
        }
    }
    Ok(())
}

/// All tree properties for one case; the constraint is derived from the tree seed.
pub fn check_tree(t: &Tree, c: Constraints, dx: i32, dy: i32) -> Result<(), String> {
    let d = diagram(t);
    check_constraints(&d, c)?;
    check_containment(&d)?;
    check_additivity(&d)?;
    check_translation(&d, dx as f64, dy as f64)
}

pub fn constraints_strategy() -> impl Strategy<Value = Constraints> {
    (0u16..200, 0u16..400, 0u16..200, 0u16..400).prop_map(|(a, b, c, d)| {
        let (min_w, max_w) = (a.min(b) as f64, a.max(b) as f64);
        let (min_h, max_h) = (c.min(d) as f64, c.max(d) as f64);
        Constraints::new(min_w, max_w, min_h, max_h)
    })
}
