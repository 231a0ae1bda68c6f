use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub const fn new(x: f64, y: f64, width: f64, height: f64) -> Rect {
        Rect { x, y, width, height }
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.width, self.height)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        Rect::new(x, y, self.right().max(other.right()) - x, self.bottom().max(other.bottom()) - y)
    }

    pub fn contains_rect(&self, other: &Rect, eps: f64) -> bool {
        other.x >= self.x - eps
            && other.y >= self.y - eps
            && other.right() <= self.right() + eps
            && other.bottom() <= self.bottom() + eps
    }

    /// Euclidean distance from `p` to the rectangle outline.
    pub fn distance_to_border(&self, p: Point) -> f64 {
        let inside = p.x >= self.x && p.x <= self.right() && p.y >= self.y && p.y <= self.bottom();
        if inside {
            let d = [p.x - self.x, self.right() - p.x, p.y - self.y, self.bottom() - p.y];
            d.into_iter().fold(f64::INFINITY, f64::min)
        } else {
            let dx = (self.x - p.x).max(0.0).max(p.x - self.right());
            let dy = (self.y - p.y).max(0.0).max(p.y - self.bottom());
            dx.hypot(dy)
        }
    }

    pub fn bounding(points: impl IntoIterator<Item = Point>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
        for p in it {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        Some(Rect::new(x0, y0, x1 - x0, y1 - y0))
    }
}

/// Where the ray from the center of `rect` toward `toward` leaves the rectangle.
pub fn border_intersection(rect: &Rect, toward: Point) -> Point {
    let c = rect.center();
    let (dx, dy) = (toward.x - c.x, toward.y - c.y);
    if dx == 0.0 && dy == 0.0 {
        return c;
    }
    let (hw, hh) = (rect.width / 2.0, rect.height / 2.0);
    let tx = if dx != 0.0 { hw / dx.abs() } else { f64::INFINITY };
    let ty = if dy != 0.0 { hh / dy.abs() } else { f64::INFINITY };
    if tx <= ty {
        // leaves through a vertical side; pin x exactly to the side
        let x = if dx > 0.0 { rect.right() } else { rect.x };
        Point::new(x, c.y + dy * tx)
    } else {
        let y = if dy > 0.0 { rect.bottom() } else { rect.y };
        Point::new(c.x + dx * ty, y)
    }
}

/// Point at fraction `s` of the perimeter, clockwise from the top-left corner.
pub fn perimeter_point(rect: &Rect, s: f64) -> Point {
    let (w, h) = (rect.width, rect.height);
    let total = 2.0 * (w + h);
    if total == 0.0 {
        return Point::new(rect.x, rect.y);
    }
    let d = s.rem_euclid(1.0) * total;
    if d < w {
        Point::new(rect.x + d, rect.y)
    } else if d < w + h {
        Point::new(rect.right(), rect.y + (d - w))
    } else if d < 2.0 * w + h {
        Point::new(rect.right() - (d - w - h), rect.bottom())
    } else {
        Point::new(rect.x, rect.bottom() - (d - 2.0 * w - h))
    }
}

/// Inverse of `perimeter_point` for points on the border.
pub fn perimeter_param(rect: &Rect, p: Point) -> f64 {
    let (w, h) = (rect.width, rect.height);
    let total = 2.0 * (w + h);
    if total == 0.0 {
        return 0.0;
    }
    let candidates = [
        ((p.y - rect.y).abs(), (p.x - rect.x).clamp(0.0, w)),
        ((p.x - rect.right()).abs(), w + (p.y - rect.y).clamp(0.0, h)),
        ((p.y - rect.bottom()).abs(), w + h + (rect.right() - p.x).clamp(0.0, w)),
        ((p.x - rect.x).abs(), 2.0 * w + h + (rect.bottom() - p.y).clamp(0.0, h)),
    ];
    let (_, d) = candidates.into_iter().fold((f64::INFINITY, 0.0), |best, c| if c.0 < best.0 { c } else { best });
    (d / total).rem_euclid(1.0)
}

pub fn cubic_point(p0: Point, p1: Point, p2: Point, p3: Point, t: f64) -> Point {
    let u = 1.0 - t;
    let (a, b, c, d) = (u * u * u, 3.0 * u * u * t, 3.0 * u * t * t, t * t * t);
    Point::new(a * p0.x + b * p1.x + c * p2.x + d * p3.x, a * p0.y + b * p1.y + c * p2.y + d * p3.y)
}

pub const BEZIER_STEPS: usize = 32;

pub fn flatten_cubic(p0: Point, p1: Point, p2: Point, p3: Point) -> Vec<Point> {
    (0..=BEZIER_STEPS).map(|i| cubic_point(p0, p1, p2, p3, i as f64 / BEZIER_STEPS as f64)).collect()
}

/// Point and unit tangent at arc-length fraction `t` of a polyline.
pub fn polyline_at(points: &[Point], t: f64) -> (Point, Point) {
    let lengths: Vec<f64> = points.windows(2).map(|w| w[0].distance(w[1])).collect();
    let total: f64 = lengths.iter().sum();
    let fallback = Point::new(1.0, 0.0);
    if points.is_empty() {
        return (Point::default(), fallback);
    }
    if total == 0.0 {
        return (points[0], fallback);
    }
    let mut remaining = t.clamp(0.0, 1.0) * total;
    for (i, len) in lengths.iter().enumerate() {
        if *len == 0.0 {
            continue;
        }
        if remaining <= *len || i == lengths.len() - 1 {
            let (a, b) = (points[i], points[i + 1]);
            let f = (remaining / len).min(1.0);
            let tangent = Point::new((b.x - a.x) / len, (b.y - a.y) / len);
            return (a.lerp(b, f), tangent);
        }
        remaining -= len;
    }
    (*points.last().unwrap(), fallback)
}
