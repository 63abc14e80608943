//! Boxes, overlap measures and bounding rectangles of masks.
//!
//! Coordinates: `x` is the column, `y` the row, origin at the top-left pixel
//! centre. Mask geometry is computed over pixel centres and then inflated by
//! half a pixel on every side, so a single pixel yields a 1x1 box.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::grid::BinaryMask;

/// Loose enough for corners printed with six decimals.
const SIDE_TOL: f64 = 1e-5;
const MIN_SIDE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Axis-aligned box given by centre and extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AABox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl AABox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { cx, cy, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn from_bounds(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.cx, self.cy, self.w, self.h]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::DegenerateGeometry(format!("box {self:?}")));
        }
        Ok(())
    }

    pub fn x0(&self) -> f64 {
        self.cx - self.w / 2.0
    }

    pub fn x1(&self) -> f64 {
        self.cx + self.w / 2.0
    }

    pub fn y0(&self) -> f64 {
        self.cy - self.h / 2.0
    }

    pub fn y1(&self) -> f64 {
        self.cy + self.h / 2.0
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    /// Strict interior test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.x0() && x < self.x1() && y > self.y0() && y < self.y1()
    }

    pub fn center_distance(&self, other: &AABox) -> f64 {
        (self.cx - other.cx).hypot(self.cy - other.cy)
    }

    pub fn to_rotbox(&self) -> RotBox {
        RotBox {
            corners: [
                Point::new(self.x0(), self.y0()),
                Point::new(self.x1(), self.y0()),
                Point::new(self.x1(), self.y1()),
                Point::new(self.x0(), self.y1()),
            ],
        }
    }

    /// Range of pixel indices `[lo, hi)` along one axis whose centres lie
    /// strictly inside `(a, b)`, clipped to `[0, len)`.
    pub(crate) fn pixel_span(a: f64, b: f64, len: usize) -> (usize, usize) {
        // smallest integer > a, largest integer < b
        let lo = (a.floor() + 1.0).max(0.0);
        let hi = (b.ceil() - 1.0).min(len as f64 - 1.0);
        if hi < lo {
            return (0, 0);
        }
        (lo as usize, hi as usize + 1)
    }

    /// Pixel rows and columns whose centres lie strictly inside the box,
    /// clipped to a `width x height` image: `((r0, r1), (c0, c1))`, half-open.
    pub fn pixel_ranges(&self, width: usize, height: usize) -> ((usize, usize), (usize, usize)) {
        (
            Self::pixel_span(self.y0(), self.y1(), height),
            Self::pixel_span(self.x0(), self.x1(), width),
        )
    }

    pub fn pixel_count(&self, width: usize, height: usize) -> usize {
        let ((r0, r1), (c0, c1)) = self.pixel_ranges(width, height);
        (r1 - r0) * (c1 - c0)
    }

    /// Whether the box overlaps the image rectangle `[-0.5, w-0.5] x [-0.5, h-0.5]`.
    pub fn intersects_image(&self, width: usize, height: usize) -> bool {
        self.x1() > -0.5
            && self.x0() < width as f64 - 0.5
            && self.y1() > -0.5
            && self.y0() < height as f64 - 0.5
    }
}

/// Intersection over union of two axis-aligned boxes.
pub fn iou(a: &AABox, b: &AABox) -> f64 {
    let iw = (a.x1().min(b.x1()) - a.x0().max(b.x0())).max(0.0);
    let ih = (a.y1().min(b.y1()) - a.y0().max(b.y0())).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Rotated rectangle stored as four corners in consistent winding order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotBox {
    pub corners: [Point; 4],
}

impl RotBox {
    pub fn new(corners: [Point; 4]) -> Result<Self> {
        let b = Self { corners };
        b.validate()?;
        Ok(b)
    }

    /// Rectangle of size `w x h` centred at `(cx, cy)` whose first side points
    /// along `angle` (radians).
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64, angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        let u = Point::new(c * w / 2.0, s * w / 2.0);
        let v = Point::new(-s * h / 2.0, c * h / 2.0);
        Self::new([
            Point::new(cx - u.x - v.x, cy - u.y - v.y),
            Point::new(cx + u.x - v.x, cy + u.y - v.y),
            Point::new(cx + u.x + v.x, cy + u.y + v.y),
            Point::new(cx - u.x + v.x, cy - u.y + v.y),
        ])
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .corners
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::DegenerateGeometry("non-finite corner".into()));
        }
        let e: Vec<Point> = (0..4)
            .map(|i| self.corners[(i + 1) % 4].sub(self.corners[i]))
            .collect();
        let len: Vec<f64> = e.iter().map(|v| v.norm()).collect();
        if len.iter().any(|&l| l < MIN_SIDE) {
            return Err(Error::DegenerateGeometry("zero-length side".into()));
        }
        if (len[0] - len[2]).abs() > SIDE_TOL || (len[1] - len[3]).abs() > SIDE_TOL {
            return Err(Error::DegenerateGeometry(
                "opposite sides differ in length".into(),
            ));
        }
        for i in 0..4 {
            let j = (i + 1) % 4;
            if (e[i].dot(e[j]) / (len[i] * len[j])).abs() > SIDE_TOL {
                return Err(Error::DegenerateGeometry("sides not perpendicular".into()));
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Point {
        let sx: f64 = self.corners.iter().map(|p| p.x).sum();
        let sy: f64 = self.corners.iter().map(|p| p.y).sum();
        Point::new(sx / 4.0, sy / 4.0)
    }

    /// Lengths of the first and second sides.
    pub fn size(&self) -> (f64, f64) {
        (
            self.corners[1].sub(self.corners[0]).norm(),
            self.corners[2].sub(self.corners[1]).norm(),
        )
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.corners).abs()
    }

    /// Direction of the first side folded into `[0, pi/2)`.
    pub fn angle(&self) -> f64 {
        let e = self.corners[1].sub(self.corners[0]);
        fold_angle(e.y.atan2(e.x))
    }

    /// Inside-or-on-boundary test with a small tolerance.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let p = Point::new(x, y);
        let orient = polygon_area(&self.corners).signum();
        (0..4).all(|i| {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            orient * b.sub(a).cross(p.sub(a)) >= -1e-9
        })
    }

    pub fn bounding_box(&self) -> AABox {
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.corners {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        AABox {
            cx: (x0 + x1) / 2.0,
            cy: (y0 + y1) / 2.0,
            w: x1 - x0,
            h: y1 - y0,
        }
    }

    /// Corner coordinates flattened as `x1,y1,...,x4,y4`.
    pub fn flat(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, p) in self.corners.iter().enumerate() {
            out[2 * i] = p.x;
            out[2 * i + 1] = p.y;
        }
        out
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != 8 {
            return Err(Error::Format(format!(
                "expected 8 corner coordinates, got {}",
                v.len()
            )));
        }
        Self::new([
            Point::new(v[0], v[1]),
            Point::new(v[2], v[3]),
            Point::new(v[4], v[5]),
            Point::new(v[6], v[7]),
        ])
    }
}

fn fold_angle(a: f64) -> f64 {
    let f = a.rem_euclid(FRAC_PI_2);
    if f >= FRAC_PI_2 {
        0.0
    } else {
        f
    }
}

/// Signed shoelace area (positive for counter-clockwise in x-right/y-up terms).
fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| poly[i].cross(poly[(i + 1) % n]))
        .sum::<f64>()
        / 2.0
}

fn ccw(poly: &[Point]) -> Vec<Point> {
    let mut v = poly.to_vec();
    if polygon_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

/// Sutherland-Hodgman clip of `subject` against a convex counter-clockwise `clip`.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let edge = b.sub(a);
        let side = |p: Point| edge.cross(p.sub(a));
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(segment_cut(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(segment_cut(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn segment_cut(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Intersection over union of two rotated rectangles via convex clipping.
pub fn polygon_overlap(a: &RotBox, b: &RotBox) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let pa = ccw(&a.corners);
    let pb = ccw(&b.corners);
    let inter = polygon_area(&clip_convex(&pa, &pb)).abs();
    if inter <= 0.0 {
        return Ok(0.0);
    }
    let union = a.area() + b.area() - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

/// Andrew's monotone chain. Returns the hull counter-clockwise without
/// collinear points; degenerate inputs give one or two points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| a.sub(o).cross(b.sub(o));
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn mask_centers(mask: &BinaryMask) -> Vec<Point> {
    mask.foreground()
        .map(|(r, c)| Point::new(c as f64, r as f64))
        .collect()
}

/// Extent of `points` along direction `angle` and its normal:
/// `(min_u, max_u, min_v, max_v)`.
fn projected_extent(points: &[Point], angle: f64) -> (f64, f64, f64, f64) {
    let (s, c) = angle.sin_cos();
    let mut e = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in points {
        let u = p.x * c + p.y * s;
        let v = -p.x * s + p.y * c;
        e.0 = e.0.min(u);
        e.1 = e.1.max(u);
        e.2 = e.2.min(v);
        e.3 = e.3.max(v);
    }
    e
}

/// Area of the half-pixel-inflated rectangle enclosing `points` at `angle`.
pub fn inflated_area_at(points: &[Point], angle: f64) -> f64 {
    let (u0, u1, v0, v1) = projected_extent(points, angle);
    (u1 - u0 + 1.0) * (v1 - v0 + 1.0)
}

/// Minimum-area rotated rectangle over the mask's foreground pixel centres,
/// inflated by half a pixel on each side.
///
/// Candidate orientations are the hull edge directions (rotating calipers).
/// The inflated area `(W+1)(H+1)` is log-concave in the angle between
/// consecutive edge directions, so its minimum is attained at one of them.
/// Ties resolve to the smallest angle in `[0, 90)` degrees.
pub fn mbr_of_mask(mask: &BinaryMask) -> Result<RotBox> {
    let centers = mask_centers(mask);
    if centers.is_empty() {
        return Err(Error::EmptyMask);
    }
    let hull = convex_hull(&centers);

    let mut angles = vec![0.0];
    for i in 0..hull.len() {
        let e = hull[(i + 1) % hull.len()].sub(hull[i]);
        if e.norm() > 0.0 {
            angles.push(fold_angle(e.y.atan2(e.x)));
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup();

    let mut best = (inflated_area_at(&hull, angles[0]), angles[0]);
    for &a in &angles[1..] {
        let area = inflated_area_at(&hull, a);
        if area < best.0 - 1e-9 * best.0.max(1.0) {
            best = (area, a);
        }
    }
    let angle = best.1;
    let (u0, u1, v0, v1) = projected_extent(&hull, angle);
    let (s, c) = angle.sin_cos();
    let (uc, vc) = ((u0 + u1) / 2.0, (v0 + v1) / 2.0);
    let cx = uc * c - vc * s;
    let cy = uc * s + vc * c;
    RotBox::from_center(cx, cy, u1 - u0 + 1.0, v1 - v0 + 1.0, angle)
}

/// Tightest axis-aligned box over the foreground pixel centres, inflated by
/// half a pixel.
pub fn alb_of_mask(mask: &BinaryMask) -> Result<AABox> {
    let mut it = mask.foreground();
    let (r, c) = it.next().ok_or(Error::EmptyMask)?;
    let (mut r0, mut r1, mut c0, mut c1) = (r, r, c, c);
    for (r, c) in it {
        r0 = r0.min(r);
        r1 = r1.max(r);
        c0 = c0.min(c);
        c1 = c1.max(c);
    }
    AABox::from_bounds(
        c0 as f64 - 0.5,
        r0 as f64 - 0.5,
        c1 as f64 + 0.5,
        r1 as f64 + 0.5,
    )
}
