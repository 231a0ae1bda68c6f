use std::fmt::Write;

use crate::layout::{Content, LayoutedDiagram, LayoutedElement, Point, RoutedSegment, SegmentKind, TextBlock, MARKER_SIZE};
use crate::model::{AttrValue, Marker};
use crate::syntax::format_number as num;

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn attr<'a>(e: &'a LayoutedElement, name: &str) -> Option<&'a AttrValue> {
    e.attributes.get(name)
}

fn attr_str(e: &LayoutedElement, name: &str) -> String {
    match attr(e, name) {
        Some(AttrValue::Str(s)) => s.clone(),
        Some(AttrValue::Number(n)) => num(*n),
        Some(AttrValue::Bool(b)) => b.to_string(),
        None => String::new(),
    }
}

fn stroke_attrs(e: &LayoutedElement, out: &mut String) {
    let _ = write!(out, " stroke=\"{}\"", escape(&attr_str(e, "stroke")));
    if let Some(AttrValue::Number(w)) = attr(e, "strokeWidth") {
        let _ = write!(out, " stroke-width=\"{}\"", num(*w));
    }
    let dash = attr_str(e, "strokeDash");
    if !dash.is_empty() && dash != "none" {
        let _ = write!(out, " stroke-dasharray=\"{}\"", escape(&dash));
    }
}

/// Scale normalized path data (0..1 per axis) into the element box.
pub fn scale_path(d: &str, x: f64, y: f64, w: f64, h: f64) -> String {
    let mut out = Vec::new();
    let mut axis = 0;
    for tok in d.split_whitespace() {
        match tok.parse::<f64>() {
            Ok(v) => {
                let scaled = if axis % 2 == 0 { x + v * w } else { y + v * h };
                out.push(num(scaled));
                axis += 1;
            }
            Err(_) => {
                out.push(tok.to_owned());
                axis = 0;
            }
        }
    }
    out.join(" ")
}

fn pt(p: Point) -> String {
    format!("{} {}", num(p.x), num(p.y))
}

pub fn segment_path(seg: &RoutedSegment) -> String {
    let p = &seg.points;
    match seg.kind {
        SegmentKind::Bezier => format!("M {} C {} {} {}", pt(p[0]), pt(p[1]), pt(p[2]), pt(p[3])),
        SegmentKind::Line | SegmentKind::AxisAligned => {
            let mut d = format!("M {}", pt(p[0]));
            for q in &p[1..] {
                d.push_str(" L ");
                d.push_str(&pt(*q));
            }
            d
        }
    }
}

/// Path data and fill mode for a marker whose tip is at `tip`, with `u`
/// the unit direction of travel into the tip.
pub fn marker_path(marker: Marker, tip: Point, u: Point) -> Option<(String, MarkerFill)> {
    let l = MARKER_SIZE;
    let v = Point::new(-u.y, u.x);
    let at = |back: f64, side: f64| Point::new(tip.x - u.x * back + v.x * side, tip.y - u.y * back + v.y * side);
    Some(match marker {
        Marker::None => return None,
        Marker::OpenArrow => (format!("M {} L {} L {}", pt(at(l, l / 2.0)), pt(tip), pt(at(l, -l / 2.0))), MarkerFill::None),
        Marker::HollowTriangle => {
            (format!("M {} L {} L {} Z", pt(tip), pt(at(l, l / 2.0)), pt(at(l, -l / 2.0))), MarkerFill::Background)
        }
        Marker::HollowDiamond | Marker::FilledDiamond => {
            let d = format!(
                "M {} L {} L {} L {} Z",
                pt(tip),
                pt(at(l / 2.0, l / 3.0)),
                pt(at(l, 0.0)),
                pt(at(l / 2.0, -l / 3.0))
            );
            (d, if marker == Marker::FilledDiamond { MarkerFill::Stroke } else { MarkerFill::Background })
        }
        Marker::Cross => {
            let c = 0.75 * l;
            let h = l / 3.0;
            let d = format!(
                "M {} L {} M {} L {}",
                pt(at(c - h, h)),
                pt(at(c + h, -h)),
                pt(at(c - h, -h)),
                pt(at(c + h, h))
            );
            (d, MarkerFill::None)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerFill {
    None,
    Background,
    Stroke,
}

fn text_lines(e: &LayoutedElement, block: &TextBlock, out: &mut String) {
    for (i, line) in block.lines.iter().enumerate() {
        let baseline = e.y + block.line_height * i as f64 + block.baseline;
        let _ = write!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"{}\" font-size=\"{}\"",
            num(e.x),
            num(baseline),
            escape(&attr_str(e, "fontFamily")),
            num(block.font_size)
        );
        for (name, svg) in [("fontWeight", "font-weight"), ("fontStyle", "font-style")] {
            let v = attr_str(e, name);
            if !v.is_empty() && v != "normal" {
                let _ = write!(out, " {svg}=\"{}\"", escape(&v));
            }
        }
        let _ = write!(out, " fill=\"{}\">{}</text>", escape(&attr_str(e, "color")), escape(line));
    }
}

fn element(e: &LayoutedElement, out: &mut String) {
    let _ = write!(out, "<g data-id=\"{}\" data-kind=\"{}\">", escape(&e.id), e.kind);
    let (x, y, w, h) = (num(e.x), num(e.y), num(e.width), num(e.height));
    match &e.content {
        Content::None => match e.kind {
            crate::model::ElementKind::Rect => {
                let _ = write!(out, "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{}\"", escape(&attr_str(e, "fill")));
                stroke_attrs(e, out);
                out.push_str("/>");
            }
            crate::model::ElementKind::Ellipse => {
                let _ = write!(
                    out,
                    "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"{}\"",
                    num(e.x + e.width / 2.0),
                    num(e.y + e.height / 2.0),
                    num(e.width / 2.0),
                    num(e.height / 2.0),
                    escape(&attr_str(e, "fill"))
                );
                stroke_attrs(e, out);
                out.push_str("/>");
            }
            crate::model::ElementKind::Canvas => {
                let fill = attr_str(e, "fill");
                if !fill.is_empty() && fill != "none" {
                    let _ = write!(out, "<rect x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{}\"/>", escape(&fill));
                }
            }
            _ => {}
        },
        Content::Path(d) => {
            let _ = write!(out, "<path d=\"{}\" fill=\"{}\"", scale_path(d, e.x, e.y, e.width, e.height), escape(&attr_str(e, "fill")));
            stroke_attrs(e, out);
            out.push_str("/>");
        }
        Content::Text(block) => text_lines(e, block, out),
        Content::Label { text, .. } => text_lines(e, text, out),
        Content::Segment(seg) => {
            let _ = write!(out, "<path d=\"{}\" fill=\"none\"", segment_path(seg));
            stroke_attrs(e, out);
            out.push_str("/>");
        }
        Content::Connection(_) => {}
    }
    for child in &e.children {
        element(child, out);
    }
    if let Content::Connection(ends) = &e.content {
        let stroke = escape(&attr_str(e, "stroke"));
        for (marker, tip, dir) in
            [(ends.start_marker, ends.start, ends.start_direction), (ends.end_marker, ends.end, ends.end_direction)]
        {
            if let Some((d, fill)) = marker_path(marker, tip, dir) {
                let fill = match fill {
                    MarkerFill::None => "none".to_owned(),
                    MarkerFill::Background => "#ffffff".to_owned(),
                    MarkerFill::Stroke => stroke.clone(),
                };
                let _ = write!(out, "<path data-marker=\"{}\" d=\"{d}\" fill=\"{fill}\" stroke=\"{stroke}\"", marker_name(marker));
                if let Some(AttrValue::Number(sw)) = attr(e, "strokeWidth") {
                    let _ = write!(out, " stroke-width=\"{}\"", num(*sw));
                }
                out.push_str("/>");
            }
        }
    }
    out.push_str("</g>");
}

pub fn marker_name(marker: Marker) -> &'static str {
    match marker {
        Marker::None => "none",
        Marker::OpenArrow => "openArrow",
        Marker::Cross => "cross",
        Marker::HollowDiamond => "hollowDiamond",
        Marker::FilledDiamond => "filledDiamond",
        Marker::HollowTriangle => "hollowTriangle",
    }
}

/// Standalone SVG 1.1 document. A pure function of the layouted diagram.
pub fn render_svg(diagram: &LayoutedDiagram) -> String {
    let b = diagram.bounds();
    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">\n",
        num(b.x),
        num(b.y),
        num(b.width),
        num(b.height),
        num(b.width),
        num(b.height)
    );
    element(&diagram.root, &mut out);
    out.push_str("\n</svg>\n");
    out
}
