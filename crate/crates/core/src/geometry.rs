//! Oriented rectangles and the planar primitives around them.
//!
//! Coordinates are image pixels: x grows rightward, y grows downward. A box
//! angle is the direction of its long (`w`) edge measured from the x-axis and
//! lives in the half-open range `[-pi/2, pi/2)`; boxes are symmetric under a
//! half turn, so every angle is only meaningful modulo pi.
//!
//! Polygons are kept "clockwise as seen on screen", which with y pointing down
//! means a positive shoelace sum.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding that two extents or areas tie.
const TIE_EPS: f64 = 1e-12;

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

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

/// Maps any finite angle into `[-pi/2, pi/2)`, keeping it congruent modulo pi.
pub fn normalize_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap_angle(theta))
}

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    if (-FRAC_PI_2..FRAC_PI_2).contains(&theta) {
        return theta;
    }
    let mut t = theta - PI * ((theta + FRAC_PI_2) / PI).floor();
    // floor() can land one step off when theta sits within an ulp of a wrap point
    if t >= FRAC_PI_2 {
        t -= PI;
    }
    if t < -FRAC_PI_2 {
        t += PI;
    }
    t
}

/// Smallest absolute difference between two box angles, modulo pi.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// A rotated rectangle `(cx, cy, h, w, theta)` with `0 < h <= w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedBox {
    cx: f64,
    cy: f64,
    h: f64,
    w: f64,
    theta: f64,
}

impl RotatedBox {
    /// Builds a box, swapping the sides (and turning the angle by pi/2) when
    /// `h > w`, and canonicalizing the angle. Squares keep their angle.
    pub fn new(cx: f64, cy: f64, h: f64, w: f64, theta: f64) -> Result<Self> {
        for (v, name) in [(cx, "cx"), (cy, "cy"), (h, "h"), (w, "w"), (theta, "theta")] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if h <= 0.0 || w <= 0.0 {
            return Err(Error::InvalidBox(format!("sides must be positive, got h={h} w={w}")));
        }
        let (h, w, theta) = if h > w { (w, h, theta + FRAC_PI_2) } else { (h, w, theta) };
        Ok(Self { cx, cy, h, w, theta: wrap_angle(theta) })
    }

    /// Internal constructor for values already known to satisfy the invariants
    /// apart from angle canonicalization.
    pub(crate) fn from_parts(cx: f64, cy: f64, h: f64, w: f64, theta: f64) -> Self {
        debug_assert!(h > 0.0 && h <= w, "h={h} w={w}");
        Self { cx, cy, h, w, theta: wrap_angle(theta) }
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    /// Short side.
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Long side.
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }
    pub fn area(&self) -> f64 {
        self.h * self.w
    }

    /// Same box moved to a new center.
    pub fn with_center(&self, cx: f64, cy: f64) -> Self {
        Self { cx, cy, ..*self }
    }

    /// Same box with a new angle (canonicalized).
    pub fn with_theta(&self, theta: f64) -> Self {
        Self { theta: wrap_angle(theta), ..*self }
    }

    /// Largest componentwise difference to `other`, angles compared modulo pi.
    pub fn max_abs_diff(&self, other: &RotatedBox) -> f64 {
        [
            (self.cx - other.cx).abs(),
            (self.cy - other.cy).abs(),
            (self.h - other.h).abs(),
            (self.w - other.w).abs(),
            angle_distance(self.theta, other.theta),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Four vertices, stored clockwise on screen (positive shoelace sum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pts: [Point; 4],
}

fn shoelace(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>() * 0.5
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = b.sub(a).cross(c.sub(a));
    let d2 = b.sub(a).cross(d.sub(a));
    let d3 = d.sub(c).cross(a.sub(c));
    let d4 = d.sub(c).cross(b.sub(c));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

impl Quad {
    /// Validates the vertices and reorders counter-clockwise input so that the
    /// first vertex is kept and the winding becomes clockwise.
    pub fn new(pts: [Point; 4]) -> Result<Self> {
        if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::NonFinite("quad vertex"));
        }
        if segments_cross(pts[0], pts[1], pts[2], pts[3]) || segments_cross(pts[1], pts[2], pts[3], pts[0]) {
            return Err(Error::SelfIntersectingQuad);
        }
        let area = shoelace(&pts);
        let scale = pts.iter().map(|p| p.x.abs().max(p.y.abs())).fold(1.0, f64::max);
        if area.abs() <= 1e-12 * scale * scale {
            return Err(Error::DegenerateQuad);
        }
        let pts = if area < 0.0 { [pts[0], pts[3], pts[2], pts[1]] } else { pts };
        Ok(Self { pts })
    }

    pub fn points(&self) -> &[Point; 4] {
        &self.pts
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.pts)
    }

    fn is_convex(&self) -> bool {
        (0..4).all(|i| {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % 4];
            let c = self.pts[(i + 2) % 4];
            b.sub(a).cross(c.sub(b)) >= 0.0
        })
    }
}

/// Convex hull with positive orientation (monotone chain).
fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if b.sub(a).cross(p.sub(a)) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Minimum-area enclosing rectangle of the quad (rotating calipers over its
/// convex hull). Equal-area candidates resolve to the earliest hull edge, so
/// a quad produced by [`rbox_to_quad`] maps back to the same angle even for
/// squares.
pub fn quad_to_rbox(q: &Quad) -> Result<RotatedBox> {
    let hull: Vec<Point> = if q.is_convex() { q.pts.to_vec() } else { convex_hull(&q.pts) };
    if hull.len() < 3 {
        return Err(Error::DegenerateQuad);
    }
    let n = hull.len();
    let mut best: Option<(f64, RotatedBox)> = None;
    for i in 0..n {
        let edge = hull[(i + 1) % n].sub(hull[i]);
        let len = edge.dot(edge).sqrt();
        if len == 0.0 {
            continue;
        }
        let u = Point::new(edge.x / len, edge.y / len);
        let v = Point::new(-u.y, u.x);
        let (mut umin, mut umax, mut vmin, mut vmax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &hull {
            let pu = p.dot(u);
            let pv = p.dot(v);
            umin = umin.min(pu);
            umax = umax.max(pu);
            vmin = vmin.min(pv);
            vmax = vmax.max(pv);
        }
        let a = umax - umin;
        let b = vmax - vmin;
        let area = a * b;
        if let Some((best_area, _)) = best {
            if area >= best_area * (1.0 - TIE_EPS) {
                continue;
            }
        }
        let mu = 0.5 * (umin + umax);
        let mv = 0.5 * (vmin + vmax);
        let cx = u.x * mu + v.x * mv;
        let cy = u.y * mu + v.y * mv;
        let theta = if a >= b * (1.0 - TIE_EPS) { u.y.atan2(u.x) } else { v.y.atan2(v.x) };
        if b <= 0.0 || a <= 0.0 {
            return Err(Error::DegenerateQuad);
        }
        best = Some((area, RotatedBox::from_parts(cx, cy, a.min(b), a.max(b), theta)));
    }
    best.map(|(_, b)| b).ok_or(Error::DegenerateQuad)
}

/// Corners of the box, starting at the corner that is top-left for an
/// unrotated box, first edge running along `w`.
pub fn rbox_to_quad(b: &RotatedBox) -> Quad {
    Quad { pts: box_corners(b) }
}

pub(crate) fn box_corners(b: &RotatedBox) -> [Point; 4] {
    let (s, c) = b.theta.sin_cos();
    let hw = 0.5 * b.w;
    let hh = 0.5 * b.h;
    [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)]
        .map(|(dx, dy)| Point::new(b.cx + c * dx - s * dy, b.cy + s * dx + c * dy))
}

/// Clips convex `subject` by convex `clip`, both positively oriented.
fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let edge = b.sub(a);
        let input = std::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let cur = input[j];
            let prev = input[(j + m - 1) % m];
            let cur_side = edge.cross(cur.sub(a));
            let prev_side = edge.cross(prev.sub(a));
            if cur_side >= 0.0 {
                if prev_side < 0.0 {
                    output.push(line_hit(prev, cur, prev_side, cur_side));
                }
                output.push(cur);
            } else if prev_side >= 0.0 {
                output.push(line_hit(prev, cur, prev_side, cur_side));
            }
        }
    }
    output
}

fn line_hit(p: Point, q: Point, sp: f64, sq: f64) -> Point {
    let t = sp / (sp - sq);
    Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Area of the intersection of two boxes.
pub fn intersection_area(a: &RotatedBox, b: &RotatedBox) -> f64 {
    let ra = 0.5 * a.w.hypot(a.h);
    let rb = 0.5 * b.w.hypot(b.h);
    if (a.cx - b.cx).hypot(a.cy - b.cy) > ra + rb {
        return 0.0;
    }
    let poly = clip_convex(&box_corners(a), &box_corners(b));
    if poly.len() < 3 {
        return 0.0;
    }
    shoelace(&poly).max(0.0)
}

/// Intersection over union of two rotated boxes by exact convex clipping.
pub fn rotated_iou(a: &RotatedBox, b: &RotatedBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let inter = intersection_area(a, b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Row-major 2x3 matrix `[a b tx; c d ty]` mapping source pixels to
/// destination pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform {
    m: [f64; 6],
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform { m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0] };

    pub fn new(m: [f64; 6]) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine coefficient"));
        }
        Ok(Self { m })
    }

    /// Scale by `scale` and rotate by `angle` (positive turns +x toward +y),
    /// then translate.
    pub fn similarity(scale: f64, angle: f64, tx: f64, ty: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { m: [scale * c, -scale * s, tx, scale * s, scale * c, ty] }
    }

    /// Similarity taking `src` to `dst` with the given scale and rotation.
    pub fn similarity_about(scale: f64, angle: f64, src: Point, dst: Point) -> Self {
        let t = Self::similarity(scale, angle, 0.0, 0.0);
        let p = t.apply(src);
        Self::similarity(scale, angle, dst.x - p.x, dst.y - p.y)
    }

    pub fn matrix(&self) -> [f64; 6] {
        self.m
    }

    pub fn apply(&self, p: Point) -> Point {
        let [a, b, tx, c, d, ty] = self.m;
        Point::new(a * p.x + b * p.y + tx, c * p.x + d * p.y + ty)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &AffineTransform) -> AffineTransform {
        let [a1, b1, tx1, c1, d1, ty1] = self.m;
        let [a2, b2, tx2, c2, d2, ty2] = other.m;
        AffineTransform {
            m: [
                a2 * a1 + b2 * c1,
                a2 * b1 + b2 * d1,
                a2 * tx1 + b2 * ty1 + tx2,
                c2 * a1 + d2 * c1,
                c2 * b1 + d2 * d1,
                c2 * tx1 + d2 * ty1 + ty2,
            ],
        }
    }

    pub fn is_isotropic(&self) -> bool {
        let [a, b, _, c, d, _] = self.m;
        let s = a.hypot(c);
        s > 0.0 && (a - d).abs() <= 1e-9 * s && (b + c).abs() <= 1e-9 * s
    }

    pub fn scale_factor(&self) -> f64 {
        self.m[0].hypot(self.m[3])
    }

    pub fn rotation_angle(&self) -> f64 {
        self.m[3].atan2(self.m[0])
    }
}

/// Image of a box under an isotropic similarity.
pub fn apply_affine_box(t: &AffineTransform, b: &RotatedBox) -> Result<RotatedBox> {
    if !t.is_isotropic() {
        return Err(Error::NonIsotropic);
    }
    let s = t.scale_factor();
    let c = t.apply(b.center());
    Ok(RotatedBox::from_parts(c.x, c.y, b.h * s, b.w * s, b.theta + t.rotation_angle()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn quad(p: [(f64, f64); 4]) -> Quad {
        Quad::new(p.map(|(x, y)| Point::new(x, y))).unwrap()
    }

    #[test]
    fn normalize_angle_examples() {
        assert_eq!(normalize_angle(0.0).unwrap(), 0.0);
        assert_eq!(normalize_angle(FRAC_PI_2).unwrap(), -FRAC_PI_2);
        assert!((normalize_angle(5.0 * PI / 4.0).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(normalize_angle(-FRAC_PI_2).unwrap(), -FRAC_PI_2);
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn box_swaps_sides() {
        let b = RotatedBox::new(0.0, 0.0, 4.0, 2.0, 0.0).unwrap();
        assert_eq!((b.h(), b.w()), (2.0, 4.0));
        assert_eq!(b.theta(), -FRAC_PI_2);
        let sq = RotatedBox::new(0.0, 0.0, 3.0, 3.0, 0.3).unwrap();
        assert_eq!(sq.theta(), 0.3);
        assert!(RotatedBox::new(0.0, 0.0, 0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn axis_aligned_rect_roundtrip() {
        let b = quad_to_rbox(&quad([(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)])).unwrap();
        assert!(b.max_abs_diff(&RotatedBox::new(2.0, 1.0, 2.0, 4.0, 0.0).unwrap()) < 1e-12);
        let q = rbox_to_quad(&RotatedBox::new(2.0, 1.0, 2.0, 4.0, 0.0).unwrap());
        let expect = [(0.0, 0.0), (4.0, 0.0), (4.0, 2.0), (0.0, 2.0)];
        for (p, e) in q.points().iter().zip(expect) {
            assert!((p.x - e.0).abs() < 1e-12 && (p.y - e.1).abs() < 1e-12);
        }
    }

    #[test]
    fn counter_clockwise_input_is_reordered() {
        let q = quad([(0.0, 0.0), (0.0, 2.0), (4.0, 2.0), (4.0, 0.0)]);
        assert!(q.area() > 0.0);
        assert_eq!(q.points()[0], Point::new(0.0, 0.0));
    }

    #[test]
    fn bad_quads_rejected() {
        let pts = |p: [(f64, f64); 4]| p.map(|(x, y)| Point::new(x, y));
        assert!(matches!(Quad::new(pts([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])), Err(Error::DegenerateQuad)));
        assert!(matches!(
            Quad::new(pts([(0.0, 0.0), (4.0, 2.0), (4.0, 0.0), (0.0, 2.0)])),
            Err(Error::SelfIntersectingQuad)
        ));
    }

    #[test]
    fn rotated_rect_recovers_angle() {
        let b = RotatedBox::new(2.0, 1.0, 2.0, 4.0, FRAC_PI_6).unwrap();
        let r = quad_to_rbox(&rbox_to_quad(&b)).unwrap();
        assert!(r.max_abs_diff(&b) < 1e-12, "{r:?}");
    }

    #[test]
    fn rbox_to_quad_pi_over_4() {
        let b = RotatedBox::new(0.0, 0.0, 2.0, 4.0, FRAC_PI_4).unwrap();
        let q = rbox_to_quad(&b);
        let (s, c) = FRAC_PI_4.sin_cos();
        let expect = [(-2.0, -1.0), (2.0, -1.0), (2.0, 1.0), (-2.0, 1.0)].map(|(x, y)| (c * x - s * y, s * x + c * y));
        for (p, e) in q.points().iter().zip(expect) {
            assert!((p.x - e.0).abs() < 1e-12 && (p.y - e.1).abs() < 1e-12);
        }
    }

    #[test]
    fn concave_quad_uses_hull() {
        // dart shape: the dent vertex lies inside the hull triangle
        let q = quad([(0.0, 0.0), (4.0, 0.0), (1.0, 1.0), (0.0, 4.0)]);
        let b = quad_to_rbox(&q).unwrap();
        // hull is the right triangle with legs 4; best rectangle is the 4x4 square
        // or the hypotenuse-aligned 4*sqrt2 x 2*sqrt2, both area 16
        assert!((b.area() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn iou_closed_forms() {
        let a = RotatedBox::new(0.0, 0.0, 2.0, 4.0, 0.0).unwrap();
        let b = RotatedBox::new(1.0, 0.0, 2.0, 4.0, 0.0).unwrap();
        assert!((rotated_iou(&a, &b) - 0.6).abs() < 1e-12);
        assert_eq!(rotated_iou(&a, &a), 1.0);
        let far = RotatedBox::new(100.0, 0.0, 2.0, 4.0, 0.3).unwrap();
        assert_eq!(rotated_iou(&a, &far), 0.0);
        // half-turn symmetric copy
        let flipped = RotatedBox::new(0.0, 0.0, 2.0, 4.0, -FRAC_PI_2).unwrap();
        let upright = RotatedBox::new(0.0, 0.0, 2.0, 4.0, FRAC_PI_2 - 1e-15).unwrap();
        assert!((rotated_iou(&flipped, &upright) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn affine_examples() {
        let b = RotatedBox::new(100.0, 50.0, 20.0, 60.0, PI / 3.0).unwrap();
        assert_eq!(apply_affine_box(&AffineTransform::IDENTITY, &b).unwrap(), b);
        let half = AffineTransform::similarity(0.5, 0.0, 0.0, 0.0);
        let r = apply_affine_box(&half, &b).unwrap();
        assert!(r.max_abs_diff(&RotatedBox::new(50.0, 25.0, 10.0, 30.0, PI / 3.0).unwrap()) < 1e-12);
        let shear = AffineTransform::new([1.0, 0.5, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(apply_affine_box(&shear, &b), Err(Error::NonIsotropic)));
        let mirror = AffineTransform::new([1.0, 0.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
        assert!(apply_affine_box(&mirror, &b).is_err());
    }

    #[test]
    fn affine_matches_corner_refit() {
        let b = RotatedBox::new(30.0, -12.0, 7.0, 19.0, -1.1).unwrap();
        let t = AffineTransform::similarity(1.0, FRAC_PI_6, 3.0, 4.0)
            .then(&AffineTransform::similarity(2.0, 0.0, 0.0, 0.0));
        let direct = apply_affine_box(&t, &b).unwrap();
        let corners = box_corners(&b).map(|p| t.apply(p));
        let refit = quad_to_rbox(&Quad::new(corners).unwrap()).unwrap();
        assert!(direct.max_abs_diff(&refit) < 1e-9, "{direct:?} vs {refit:?}");
    }

    #[test]
    fn composition_order() {
        let r = AffineTransform::similarity(1.0, FRAC_PI_2, 0.0, 0.0);
        let t = AffineTransform::similarity(1.0, 0.0, 10.0, 0.0);
        let p = r.then(&t).apply(Point::new(1.0, 0.0));
        assert!((p.x - 10.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
    }
}
