use livediag_core::layout::Point;
use livediag_core::model::{ElementKind, Marker};
use livediag_core::pipeline::compile;
use livediag_core::render::{RenderModel, RenderNode};

fn model(src: &str) -> RenderModel {
    let c = compile(src);
    let errors: Vec<_> = c.diagnostics().into_iter().filter(|d| d.is_error()).collect();
    assert!(errors.is_empty(), "{errors:?}");
    c.render_model().expect("render model")
}

fn codes(src: &str) -> Vec<String> {
    compile(src).diagnostics().into_iter().map(|d| d.code).collect()
}

fn node<'a>(m: &'a RenderModel, id: &str) -> &'a RenderNode {
    m.root.find(id).unwrap_or_else(|| panic!("no node {id}"))
}

fn text_lines(n: &RenderNode) -> Vec<String> {
    let mut out = Vec::new();
    n.walk(&mut |c| {
        if c.kind == ElementKind::Text {
            out.extend(c.text.as_ref().unwrap().lines.iter().cloned());
        }
    });
    out
}

/// Rows of the compartment with the given class, in order.
fn compartment(n: &RenderNode, class: &str) -> Vec<String> {
    let mut out = Vec::new();
    n.walk(&mut |c| {
        if c.kind == ElementKind::Rect && c.classes.iter().any(|c| c == class) {
            out = text_lines(c);
        }
    });
    out
}

fn two_classes(op: &str) -> String {
    format!(
        "classDiagram {{\n  class(\"A\") {{ layout {{ pos = apos(0, 0) }} }}\n  class(\"B\") {{ layout {{ pos = apos(300, 0) }} }}\n  A {op} B\n}}\n"
    )
}

#[test]
fn operator_table_is_total() {
    use Marker::*;
    let table = [
        ("--", None, None, false),
        ("-->", None, OpenArrow, false),
        ("<--", OpenArrow, None, false),
        ("<-->", OpenArrow, OpenArrow, false),
        ("!--", Cross, None, false),
        ("--!", None, Cross, false),
        ("<>--", HollowDiamond, None, false),
        ("--<>", None, HollowDiamond, false),
        ("*--", FilledDiamond, None, false),
        ("--*", None, FilledDiamond, false),
        ("extends", None, HollowTriangle, false),
        ("implements", None, HollowTriangle, true),
    ];
    for (op, start, end, dashed) in table {
        let m = model(&two_classes(op));
        let conn = node(&m, "canvas0/canvasConnection0");
        let ends = conn.ends.as_ref().unwrap();
        assert_eq!((ends.start_marker, ends.end_marker), (start, end), "{op}");
        let dash = conn.attributes["strokeDash"].as_str().unwrap();
        assert_eq!(dash != "none", dashed, "{op}: {dash}");
        let svg = compile(&two_classes(op)).svg().unwrap();
        assert_eq!(svg.contains("stroke-dasharray"), dashed, "{op}");
    }
    let listed: Vec<_> = livediag_core::uml::OPERATORS.iter().filter(|o| **o != "with").collect();
    assert_eq!(listed.len(), table.len());
}

#[test]
fn connection_runs_from_source_to_target() {
    let m = model(&two_classes("-->"));
    let ends = node(&m, "canvas0/canvasConnection0").ends.clone().unwrap();
    let a = node(&m, "canvas0/canvasElement0");
    let b = node(&m, "canvas0/canvasElement1");
    assert!(ends.start.x >= a.x && ends.start.x <= a.x + a.width);
    assert!(ends.end.x >= b.x && ends.end.x <= b.x + b.width);
}

#[test]
fn class_binds_its_name() {
    let src = "classDiagram {\n  class(\"Dish\")\n  x = class(\"Menu\")\n  x --> Dish\n  Menu -- Dish\n}\n";
    let c = compile(src);
    assert!(c.diagnostics().is_empty(), "{:?}", c.diagnostics());
    let m = c.render_model().unwrap();
    let first = node(&m, "canvas0/canvasConnection0").ends.clone().unwrap();
    let second = node(&m, "canvas0/canvasConnection1").ends.clone().unwrap();
    // both connections join the same two classes
    assert_eq!(first.start, second.start);
    assert_eq!(first.end, second.end);
}

#[test]
fn duplicate_class_name_is_reported() {
    let c = codes("classDiagram {\n  class(\"A\")\n  class(\"A\")\n}\n");
    assert!(c.contains(&"DuplicateName".to_owned()), "{c:?}");
}

#[test]
fn sections_keep_order_and_prefixes() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/03_visibility.diagram")).unwrap();
    let m = model(&src);
    let class = node(&m, "canvas0/canvasElement0");
    assert_eq!(compartment(class, "attributes"), ["+ owner : String", "- balance : int", "# limit : int"]);
    assert_eq!(compartment(class, "methods"), ["+ deposit(amount : int) : void", "- audit() : void", "~ touch() : void"]);
}

#[test]
fn section_examples() {
    let m = model("classDiagram {\n  class(\"A\") {\n    public { \"count : int\" }\n    private { \"render() : void\" }\n  }\n}\n");
    let class = node(&m, "canvas0/canvasElement0");
    assert_eq!(compartment(class, "attributes"), ["+ count : int"]);
    assert_eq!(compartment(class, "methods"), ["- render() : void"]);
    let c = codes("classDiagram {\n  class(\"A\") {\n    public { 42 }\n  }\n}\n");
    assert!(c.contains(&"NonStringEntry".to_owned()), "{c:?}");
}

#[test]
fn stereotype_abstract_and_enum_titles() {
    let m = model(
        "classDiagram {\n  class(\"Shape\", abstract = true, stereotype = \"interface\")\n  enum(\"Color\") {\n    \"RED\"\n    \"GREEN\"\n  }\n}\n",
    );
    let shape = text_lines(node(&m, "canvas0/canvasElement0"));
    assert_eq!(shape, ["«interface»", "Shape"]);
    let mut italic = false;
    node(&m, "canvas0/canvasElement0").walk(&mut |n| {
        if n.text.as_ref().is_some_and(|t| t.lines == ["Shape"]) {
            italic = n.attributes.get("fontStyle").is_some_and(|v| v.as_str() == Some("italic"));
        }
    });
    assert!(italic, "abstract class title is italic");
    let color = node(&m, "canvas0/canvasElement1");
    assert_eq!(text_lines(color), ["«enumeration»", "Color", "RED", "GREEN"]);
}

#[test]
fn type_mismatch_for_non_class_operand() {
    let c = codes("classDiagram {\n  class(\"A\")\n  A --> 5\n}\n");
    assert!(c.contains(&"TypeMismatch".to_owned()), "{c:?}");
}

#[test]
fn route_parameters_out_of_range() {
    let with = |body: &str| {
        format!("classDiagram {{\n  class(\"A\")\n  class(\"B\")\n  A --> B with {{\n    {body}\n  }}\n}}\n")
    };
    for body in ["label(\"x\", 1.5)", "over = start(1).line()", "over = start(0.2).line(end(-0.1))", "over = start().axisAligned(2)"] {
        let c = codes(&with(body));
        assert!(c.contains(&"InvalidRoute".to_owned()), "{body}: {c:?}");
    }
    let m = model(&with("label(\"1..*\", 0.9, 8)"));
    let labels: Vec<_> = {
        let mut v = Vec::new();
        node(&m, "canvas0/canvasConnection0").walk(&mut |n| {
            if n.kind == ElementKind::Label {
                v.push(n.text.clone().unwrap().lines);
            }
        });
        v
    };
    assert_eq!(labels, [vec!["1..*".to_owned()]]);
}

// Independent geometry: perimeter walk clockwise from the top-left corner,
// and the center-line exit point of a rectangle.
fn perimeter(x: f64, y: f64, w: f64, h: f64, s: f64) -> (f64, f64) {
    let mut d = s * 2.0 * (w + h);
    if d <= w {
        return (x + d, y);
    }
    d -= w;
    if d <= h {
        return (x + w, y + d);
    }
    d -= h;
    if d <= w {
        return (x + w - d, y + h);
    }
    d -= w;
    (x, y + h - d)
}

fn exit(x: f64, y: f64, w: f64, h: f64, toward: (f64, f64)) -> (f64, f64) {
    let (cx, cy) = (x + w / 2.0, y + h / 2.0);
    let (dx, dy) = (toward.0 - cx, toward.1 - cy);
    let tx = if dx == 0.0 { f64::INFINITY } else { (w / 2.0) / dx.abs() };
    let ty = if dy == 0.0 { f64::INFINITY } else { (h / 2.0) / dy.abs() };
    let t = tx.min(ty);
    (cx + dx * t, cy + dy * t)
}

fn axis_program(over: &str) -> String {
    format!(
        "classDiagram {{\n  class(\"S\") {{ layout {{ pos = apos(0, 0)\n width = 100\n height = 50 }} }}\n  class(\"T\") {{ layout {{ pos = apos(300, 200)\n width = 100\n height = 50 }} }}\n  S --> T with {{ over = {over} }}\n}}\n"
    )
}

fn route_points(m: &RenderModel) -> Vec<Point> {
    node(m, "canvas0/canvasConnection0/connectionSegment0").route.clone().unwrap().points
}

#[test]
fn axis_aligned_with_perimeter_anchors() {
    let m = model(&axis_program("start(0.25).axisAligned(0.5, end(0.75))"));
    let s = perimeter(0.0, 0.0, 100.0, 50.0, 0.25);
    let e = perimeter(300.0, 200.0, 100.0, 50.0, 0.75);
    let bend = s.0 + (e.0 - s.0) * 0.5;
    let expected = [s, (bend, s.1), (bend, e.1), e].map(|(x, y)| Point::new(x, y));
    assert_eq!(route_points(&m), expected);
    for w in expected.windows(2) {
        assert!(w[0].x == w[1].x || w[0].y == w[1].y, "runs are horizontal or vertical");
    }
}

#[test]
fn axis_aligned_with_center_line_anchors() {
    let m = model(&axis_program("start().axisAligned(0.5)"));
    let s = exit(0.0, 0.0, 100.0, 50.0, (350.0, 225.0));
    let e = exit(300.0, 200.0, 100.0, 50.0, (50.0, 25.0));
    let bend = s.0 + (e.0 - s.0) * 0.5;
    let points = route_points(&m);
    assert_eq!(points[1].x, bend);
    assert_eq!(points[0], Point::new(s.0, s.1));
    assert_eq!(points[3], Point::new(e.0, e.1));
}

#[test]
fn bezier_midpoint_matches_de_casteljau() {
    let m = model(&axis_program("start(0.25).bezier(80, 0, -80, 0, end(0.75))"));
    let p = route_points(&m);
    let lerp = |a: Point, b: Point, t: f64| Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
    let (a, b, c) = (lerp(p[0], p[1], 0.5), lerp(p[1], p[2], 0.5), lerp(p[2], p[3], 0.5));
    let mid = lerp(lerp(a, b, 0.5), lerp(b, c, 0.5), 0.5);
    let ours = livediag_core::layout::cubic_point(p[0], p[1], p[2], p[3], 0.5);
    assert!((ours.x - mid.x).abs() < 1e-9 && (ours.y - mid.y).abs() < 1e-9, "{ours:?} vs {mid:?}");
    // control points are offsets from the segment ends
    let s = perimeter(0.0, 0.0, 100.0, 50.0, 0.25);
    assert_eq!(p[1], Point::new(s.0 + 80.0, s.1));
}

#[test]
fn default_route_is_level_between_side_by_side_boxes() {
    let m = model(&two_classes("--"));
    let ends = node(&m, "canvas0/canvasConnection0").ends.clone().unwrap();
    let a = node(&m, "canvas0/canvasElement0");
    let b = node(&m, "canvas0/canvasElement1");
    if a.height == b.height {
        assert_eq!(ends.start.y, ends.end.y);
    }
    assert_eq!(ends.start.x, a.x + a.width);
    assert_eq!(ends.end.x, b.x);
}

#[test]
fn layout_scope_fields() {
    let m = model("classDiagram {\n  class(\"A\") { layout { pos = apos(100, 200)\n width = 180 } }\n  class(\"B\") { layout { pos = rpos(A, 10, 0) } }\n}\n");
    let a = node(&m, "canvas0/canvasElement0");
    assert_eq!((a.x, a.y, a.width), (100.0, 200.0, 180.0));
    let b = node(&m, "canvas0/canvasElement1");
    assert_eq!((b.x, b.y), (110.0, 200.0));
    let c = codes("classDiagram {\n  class(\"A\") { layout { pos = 5 } }\n}\n");
    assert!(!c.is_empty(), "non-point pos is reported");
}

#[test]
fn rpos_cycle_is_reported() {
    let src = "classDiagram {\n  a = class(\"A\")\n  b = class(\"B\") { layout { pos = rpos(A, 0, 10) } }\n  A.layout { pos = rpos(B, 0, 10) }\n}\n";
    let c = codes(src);
    assert!(c.contains(&"CyclicReference".to_owned()), "{c:?}");
}

#[test]
fn styles_cascade() {
    let src = "classDiagram {\n  styles {\n    type(\"text\") {\n      fontSize = 14\n    }\n  }\n  class(\"A\") {\n    styles { fill = \"#eeeeee\" }\n  }\n  class(\"B\") {\n    styles {\n      type(\"text\") {\n        fontSize = 20\n      }\n    }\n  }\n}\n";
    let m = model(src);
    let size_of = |id: &str| {
        let mut sizes = Vec::new();
        node(&m, id).walk(&mut |n| {
            if let Some(t) = &n.text {
                sizes.push(t.font_size);
            }
        });
        sizes
    };
    assert!(size_of("canvas0/canvasElement0").iter().all(|s| *s == 14.0));
    assert!(size_of("canvas0/canvasElement1").iter().all(|s| *s == 20.0));
    let rect = &node(&m, "canvas0/canvasElement0").children[0];
    assert_eq!(rect.attributes["fill"].as_str(), Some("#eeeeee"));
    let unknown = codes("classDiagram {\n  class(\"A\") { styles { sparkle = 3 } }\n}\n");
    assert_eq!(unknown, ["UnknownAttribute"]);
}

#[test]
fn default_placement_stacks_with_gap() {
    let m = model("classDiagram {\n  class(\"A\")\n  class(\"B\")\n  class(\"C\")\n}\n");
    let boxes: Vec<_> = (0..3).map(|i| node(&m, &format!("canvas0/canvasElement{i}"))).collect();
    assert!(boxes.iter().all(|b| b.x == 0.0));
    assert_eq!(boxes[0].y, 0.0);
    for w in boxes.windows(2) {
        assert_eq!(w[1].y, w[0].y + w[0].height + 20.0);
    }
}
