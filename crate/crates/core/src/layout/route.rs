use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::geom::{border_intersection, flatten_cubic, perimeter_point, polyline_at, Point, Rect};
use super::{ConnectionEnds, Size, TextBlock, MARKER_SIZE};
use crate::model::{Marker, Position, SegmentEnd, SegmentMode, SegmentSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SegmentKind {
    Line,
    AxisAligned,
    Bezier,
}

/// Route description in canvas-local terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteSpec {
    pub start_anchor: Option<f64>,
    /// Explicit segments with their element ids.
    pub segments: Vec<(String, SegmentSpec)>,
}

/// Control polygon of one segment: `[p, q]` for lines, `[p, a, b, q]` for
/// axis-aligned runs and `[p, c1, c2, q]` for cubic curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedSegment {
    pub id: String,
    pub kind: SegmentKind,
    pub points: Vec<Point>,
}

impl RoutedSegment {
    /// Points along the drawn curve.
    pub fn polyline(&self) -> Vec<Point> {
        match self.kind {
            SegmentKind::Bezier => flatten_cubic(self.points[0], self.points[1], self.points[2], self.points[3]),
            _ => self.points.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedLabel {
    pub id: String,
    pub t: f64,
    pub distance: f64,
    pub anchor: Point,
    pub rect: Rect,
    pub text: TextBlock,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedConnection {
    pub segments: Vec<RoutedSegment>,
    pub labels: Vec<PlacedLabel>,
    pub start_marker: Marker,
    pub end_marker: Marker,
}

fn unit(from: Point, to: Point) -> Option<Point> {
    let len = from.distance(to);
    (len > 0.0).then(|| Point::new((to.x - from.x) / len, (to.y - from.y) / len))
}

impl RoutedConnection {
    pub fn start(&self) -> Point {
        self.segments[0].points[0]
    }

    pub fn end(&self) -> Point {
        *self.segments.last().unwrap().points.last().unwrap()
    }

    fn all_points(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = Vec::new();
        for s in &self.segments {
            let poly = s.polyline();
            let skip = usize::from(!pts.is_empty());
            pts.extend(poly.into_iter().skip(skip));
        }
        pts
    }

    pub fn ends(&self) -> ConnectionEnds {
        let pts = self.all_points();
        let start = pts[0];
        let end = *pts.last().unwrap();
        let fallback = Point::new(1.0, 0.0);
        let start_direction = pts.iter().skip(1).find_map(|p| unit(*p, start)).unwrap_or(Point::new(-1.0, 0.0));
        let end_direction = pts.iter().rev().skip(1).find_map(|p| unit(*p, end)).unwrap_or(fallback);
        ConnectionEnds {
            start,
            end,
            start_direction,
            end_direction,
            start_marker: self.start_marker,
            end_marker: self.end_marker,
        }
    }

    pub(super) fn with_markers(mut self, start: Marker, end: Marker) -> RoutedConnection {
        self.start_marker = start;
        self.end_marker = end;
        self
    }

    pub(super) fn place_label(&mut self, id: &str, t: f64, distance: f64, text: TextBlock, size: Size) {
        let (p, tangent) = polyline_at(&self.all_points(), t);
        let normal = Point::new(tangent.y, -tangent.x);
        let anchor = Point::new(p.x + normal.x * distance, p.y + normal.y * distance);
        let rect = Rect::new(anchor.x - size.width / 2.0, anchor.y - size.height / 2.0, size.width, size.height);
        self.labels.push(PlacedLabel { id: id.to_owned(), t, distance, anchor, rect, text });
    }

    /// Everything that occupies space: curves, marker boxes, labels.
    pub fn extent(&self) -> Vec<Rect> {
        let mut out = Vec::new();
        for s in &self.segments {
            if let Some(r) = Rect::bounding(s.polyline()) {
                out.push(r);
            }
        }
        let ends = self.ends();
        for (tip, marker) in [(ends.start, self.start_marker), (ends.end, self.end_marker)] {
            if marker != Marker::None {
                out.push(Rect::new(tip.x - MARKER_SIZE, tip.y - MARKER_SIZE, 2.0 * MARKER_SIZE, 2.0 * MARKER_SIZE));
            }
        }
        out.extend(self.labels.iter().map(|l| l.rect));
        out
    }

    pub fn bounds(&self) -> Rect {
        self.extent().into_iter().reduce(|a, b| a.union(&b)).unwrap_or_default()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> RoutedConnection {
        let mut out = self.clone();
        for s in &mut out.segments {
            for p in &mut s.points {
                *p = p.offset(dx, dy);
            }
        }
        for l in &mut out.labels {
            l.anchor = l.anchor.offset(dx, dy);
            l.rect = l.rect.translate(dx, dy);
        }
        out
    }
}

fn resolve_point(position: &Position, placed: &HashMap<String, Rect>) -> Result<Point, String> {
    match position {
        Position::Absolute { x, y } => Ok(Point::new(*x, *y)),
        Position::Relative { target, dx, dy } => placed
            .get(target)
            .map(|r| Point::new(r.x + dx, r.y + dy))
            .ok_or_else(|| format!("waypoint target `{target}` is not available")),
    }
}

/// Build the route between two placed rectangles. Without explicit segments,
/// or when the last one stops at a waypoint, a straight leg to the target's
/// center-line anchor completes it.
pub fn route(
    spec: &RouteSpec,
    connection_id: &str,
    source: &Rect,
    target: &Rect,
    placed: &HashMap<String, Rect>,
) -> Result<RoutedConnection, String> {
    let default_end = border_intersection(target, source.center());
    let mut cur = match spec.start_anchor {
        Some(s) => perimeter_point(source, s),
        None => border_intersection(source, target.center()),
    };
    let mut segments = Vec::new();
    let mut at_target = false;
    for (id, seg) in &spec.segments {
        let p = match &seg.end {
            SegmentEnd::Anchor { e } => perimeter_point(target, *e),
            SegmentEnd::Target => default_end,
            SegmentEnd::Point { position } => resolve_point(position, placed)?,
        };
        at_target = !matches!(seg.end, SegmentEnd::Point { .. });
        let (kind, points) = match seg.mode {
            SegmentMode::Line => (SegmentKind::Line, vec![cur, p]),
            SegmentMode::AxisAligned { f } => {
                let x = cur.x + (p.x - cur.x) * f;
                (SegmentKind::AxisAligned, vec![cur, Point::new(x, cur.y), Point::new(x, p.y), p])
            }
            SegmentMode::Bezier { c1x, c1y, c2x, c2y } => {
                (SegmentKind::Bezier, vec![cur, cur.offset(c1x, c1y), p.offset(c2x, c2y), p])
            }
        };
        segments.push(RoutedSegment { id: id.clone(), kind, points });
        cur = p;
    }
    if !at_target {
        let id = format!("{connection_id}/connectionSegment{}", segments.len());
        segments.push(RoutedSegment { id, kind: SegmentKind::Line, points: vec![cur, default_end] });
    }
    Ok(RoutedConnection { segments, labels: Vec::new(), start_marker: Marker::None, end_marker: Marker::None })
}
