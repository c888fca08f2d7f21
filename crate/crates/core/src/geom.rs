//! Planar collision geometry: discs, convex polygons, axis-aligned
//! rectangles, penetration depths, and overlap areas.
//!
//! Shapes are stored in a body frame; queries take the world-frame pose of
//! the shape. Penetration tests return a depth so callers can apply a
//! tolerance instead of a hard boolean.

use crate::se2::Pose2;
use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle `[min_x, max_x] x [min_y, max_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Rect {
        Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.min_x + self.max_x),
            0.5 * (self.min_y + self.max_y),
        )
    }

    /// Closed containment (points on the boundary count as inside).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.min_x < other.max_x
            && other.min_x < self.max_x
            && self.min_y < other.max_y
            && other.min_y < self.max_y
    }

    /// Shrink by `m` on every side; may produce a degenerate rectangle.
    pub fn shrunk(&self, m: f64) -> Rect {
        Rect::new(
            self.min_x + m,
            self.min_y + m,
            self.max_x - m,
            self.max_y - m,
        )
    }

    pub fn is_empty(&self) -> bool {
        self.min_x >= self.max_x || self.min_y >= self.max_y
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.min_x, self.min_y),
            (self.max_x, self.min_y),
            (self.max_x, self.max_y),
            (self.min_x, self.max_y),
        ]
    }

    /// Distance from a point to the rectangle (0 inside).
    pub fn distance_to_point(&self, x: f64, y: f64) -> f64 {
        let dx = (self.min_x - x).max(0.0).max(x - self.max_x);
        let dy = (self.min_y - y).max(0.0).max(y - self.max_y);
        (dx * dx + dy * dy).sqrt()
    }
}

/// A collision shape in its body frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Disc { radius: f64 },
    /// Convex polygon, vertices counter-clockwise in the body frame.
    Polygon { vertices: Vec<(f64, f64)> },
}

impl Shape {
    /// Largest center-to-boundary distance; a cheap broad-phase bound.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Shape::Disc { radius } => *radius,
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|(x, y)| (x * x + y * y).sqrt())
                .fold(0.0, f64::max),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Disc { radius } => std::f64::consts::PI * radius * radius,
            Shape::Polygon { vertices } => polygon_area(vertices),
        }
    }

    /// World-frame vertices for polygons; panics on discs.
    pub fn world_vertices(&self, pose: &Pose2) -> Vec<(f64, f64)> {
        match self {
            Shape::Polygon { vertices } => vertices
                .iter()
                .map(|&(x, y)| pose.transform_point(x, y))
                .collect(),
            Shape::Disc { .. } => panic!("world_vertices on a disc"),
        }
    }

    /// Validity of the stored geometry (used when loading scenarios).
    pub fn check(&self) -> Result<(), String> {
        match self {
            Shape::Disc { radius } => {
                if *radius > 0.0 {
                    Ok(())
                } else {
                    Err(format!("disc radius must be positive, got {radius}"))
                }
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err("polygon needs at least 3 vertices".into());
                }
                if polygon_area(vertices) <= 0.0 {
                    return Err("polygon vertices must be counter-clockwise".into());
                }
                if !is_convex(vertices) {
                    return Err("polygon must be convex".into());
                }
                Ok(())
            }
        }
    }
}

/// Signed area via the shoelace formula (positive for CCW order).
pub fn polygon_area(vertices: &[(f64, f64)]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (x0, y0) = vertices[i];
        let (x1, y1) = vertices[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

fn is_convex(vertices: &[(f64, f64)]) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let (ax, ay) = vertices[i];
        let (bx, by) = vertices[(i + 1) % n];
        let (cx, cy) = vertices[(i + 2) % n];
        let cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        if cross < -1e-12 {
            return false;
        }
    }
    true
}

/// Signed distance from a point to a convex polygon boundary: negative
/// inside, positive outside.
pub fn polygon_signed_distance(vertices: &[(f64, f64)], px: f64, py: f64) -> f64 {
    let n = vertices.len();
    let mut inside = true;
    let mut min_edge_dist = f64::INFINITY;
    for i in 0..n {
        let (ax, ay) = vertices[i];
        let (bx, by) = vertices[(i + 1) % n];
        let ex = bx - ax;
        let ey = by - ay;
        // Left of every edge (CCW) means inside.
        if ex * (py - ay) - ey * (px - ax) < 0.0 {
            inside = false;
        }
        min_edge_dist = min_edge_dist.min(segment_distance(ax, ay, bx, by, px, py));
    }
    if inside {
        -min_edge_dist
    } else {
        min_edge_dist
    }
}

fn segment_distance(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    let ex = bx - ax;
    let ey = by - ay;
    let len_sq = ex * ex + ey * ey;
    let t = if len_sq > 0.0 {
        (((px - ax) * ex + (py - ay) * ey) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let qx = ax + t * ex;
    let qy = ay + t * ey;
    ((px - qx) * (px - qx) + (py - qy) * (py - qy)).sqrt()
}

/// Penetration depth between two posed shapes (<= 0 when separated).
///
/// For convex polygons the depth comes from the best separating axis over
/// both shapes' face normals, which is exact for this shape class.
pub fn penetration_depth(a: &Shape, pa: &Pose2, b: &Shape, pb: &Pose2) -> f64 {
    // Broad phase.
    let center_dist = pa.position_dist(pb);
    let bound = a.bounding_radius() + b.bounding_radius();
    if center_dist > bound {
        return bound - center_dist;
    }
    match (a, b) {
        (Shape::Disc { radius: ra }, Shape::Disc { radius: rb }) => ra + rb - center_dist,
        (Shape::Disc { radius }, Shape::Polygon { .. }) => {
            let verts = b.world_vertices(pb);
            radius - polygon_signed_distance(&verts, pa.x, pa.y)
        }
        (Shape::Polygon { .. }, Shape::Disc { radius }) => {
            let verts = a.world_vertices(pa);
            radius - polygon_signed_distance(&verts, pb.x, pb.y)
        }
        (Shape::Polygon { .. }, Shape::Polygon { .. }) => {
            let va = a.world_vertices(pa);
            let vb = b.world_vertices(pb);
            polygon_polygon_penetration(&va, &vb)
        }
    }
}

fn polygon_polygon_penetration(va: &[(f64, f64)], vb: &[(f64, f64)]) -> f64 {
    // Maximum separation over all face normals; penetration is its negation.
    let mut max_sep = f64::NEG_INFINITY;
    for (verts, other) in [(va, vb), (vb, va)] {
        let n = verts.len();
        for i in 0..n {
            let (ax, ay) = verts[i];
            let (bx, by) = verts[(i + 1) % n];
            // Outward normal of a CCW edge.
            let mut nx = by - ay;
            let mut ny = ax - bx;
            let len = (nx * nx + ny * ny).sqrt();
            if len == 0.0 {
                continue;
            }
            nx /= len;
            ny /= len;
            let sep = other
                .iter()
                .map(|&(px, py)| (px - ax) * nx + (py - ay) * ny)
                .fold(f64::INFINITY, f64::min);
            max_sep = max_sep.max(sep);
        }
    }
    -max_sep
}

/// Area of `disc(center, r)` intersected with the half-plane `x <= bound`.
fn disc_halfplane_area(cx: f64, r: f64, bound: f64) -> f64 {
    let d = bound - cx; // signed distance from center to the boundary
    if d <= -r {
        return 0.0;
    }
    if d >= r {
        return std::f64::consts::PI * r * r;
    }
    // Circular segment on the kept side.
    let full = std::f64::consts::PI * r * r;
    let theta = (d / r).clamp(-1.0, 1.0).acos();
    let cap = r * r * theta - d * (r * r - d * d).sqrt();
    full - cap
}

/// Area of the intersection of a disc with an axis-aligned rectangle.
///
/// Exact via the standard corner decomposition: the quadrant primitive
/// `G(x, y)` is the disc area within `{X <= x, Y <= y}`, combined with
/// inclusion-exclusion over the four rectangle corners.
pub fn disc_rect_overlap_area(cx: f64, cy: f64, r: f64, rect: &Rect) -> f64 {
    let g = |x: f64, y: f64| disc_quadrant_area(cx, cy, r, x, y);
    (g(rect.max_x, rect.max_y) - g(rect.min_x, rect.max_y) - g(rect.max_x, rect.min_y)
        + g(rect.min_x, rect.min_y))
    .max(0.0)
}

/// Disc area inside the quadrant `{X <= x, Y <= y}`.
fn disc_quadrant_area(cx: f64, cy: f64, r: f64, x: f64, y: f64) -> f64 {
    // Work in disc-local coordinates.
    let a = x - cx;
    let b = y - cy;
    if a <= -r || b <= -r {
        return 0.0;
    }
    if a >= r && b >= r {
        return std::f64::consts::PI * r * r;
    }
    if a >= r {
        return disc_halfplane_area(0.0, r, b);
    }
    if b >= r {
        return disc_halfplane_area(0.0, r, a);
    }
    // Both boundaries cut the disc (-r < a < r and -r < b < r). Integrate
    // over the strip X in [-r, a]: the kept column is
    // [-sqrt(r^2-x^2), min(b, sqrt(r^2-x^2))].
    let half = |t: f64| -> f64 {
        // Antiderivative of sqrt(r^2 - u^2).
        let t = t.clamp(-r, r);
        0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).clamp(-1.0, 1.0).asin())
    };
    let f_at = |t: f64| half(t) - half(-r); // area under the upper chord over [-r, t]
    let x0 = (r * r - b * b).max(0.0).sqrt(); // chord half-width at |y| = |b|
    let xm = a.min(x0);
    let area = if b >= 0.0 {
        // Full slice left of a, minus the cap above y=b (present for |x| < x0).
        let mut area = 2.0 * f_at(a);
        if xm > -x0 {
            area -= (f_at(xm) - f_at(-x0)) - b * (xm + x0);
        }
        area
    } else {
        // Only the sliver below y=b survives, where |x| < x0.
        if xm <= -x0 {
            0.0
        } else {
            b * (xm + x0) + (f_at(xm) - f_at(-x0))
        }
    };
    area.max(0.0)
}

/// Clip a convex polygon to an axis-aligned rectangle and return the area.
pub fn polygon_rect_overlap_area(vertices: &[(f64, f64)], rect: &Rect) -> f64 {
    let mut poly: Vec<(f64, f64)> = vertices.to_vec();
    // Sutherland-Hodgman against each rectangle side.
    let sides: [(f64, bool, bool); 4] = [
        (rect.min_x, true, true),   // x >= min_x
        (rect.max_x, true, false),  // x <= max_x
        (rect.min_y, false, true),  // y >= min_y
        (rect.max_y, false, false), // y <= max_y
    ];
    for (bound, is_x, keep_ge) in sides {
        if poly.is_empty() {
            return 0.0;
        }
        let inside = |p: &(f64, f64)| {
            let v = if is_x { p.0 } else { p.1 };
            if keep_ge {
                v >= bound
            } else {
                v <= bound
            }
        };
        let mut out = Vec::with_capacity(poly.len() + 4);
        for i in 0..poly.len() {
            let cur = poly[i];
            let next = poly[(i + 1) % poly.len()];
            let cur_in = inside(&cur);
            let next_in = inside(&next);
            if cur_in {
                out.push(cur);
            }
            if cur_in != next_in {
                let (cx, cy) = cur;
                let (nx, ny) = next;
                let t = if is_x {
                    (bound - cx) / (nx - cx)
                } else {
                    (bound - cy) / (ny - cy)
                };
                out.push((cx + t * (nx - cx), cy + t * (ny - cy)));
            }
        }
        poly = out;
    }
    if poly.len() < 3 {
        0.0
    } else {
        polygon_area(&poly).max(0.0)
    }
}

/// Overlap area of a posed shape with a rectangle.
pub fn shape_rect_overlap_area(shape: &Shape, pose: &Pose2, rect: &Rect) -> f64 {
    match shape {
        Shape::Disc { radius } => disc_rect_overlap_area(pose.x, pose.y, *radius, rect),
        Shape::Polygon { .. } => polygon_rect_overlap_area(&shape.world_vertices(pose), rect),
    }
}

/// Whether the posed shape lies entirely within the rectangle.
pub fn shape_inside_rect(shape: &Shape, pose: &Pose2, rect: &Rect) -> bool {
    match shape {
        Shape::Disc { radius } => {
            pose.x - radius >= rect.min_x
                && pose.x + radius <= rect.max_x
                && pose.y - radius >= rect.min_y
                && pose.y + radius <= rect.max_y
        }
        Shape::Polygon { .. } => shape
            .world_vertices(pose)
            .iter()
            .all(|&(x, y)| rect.contains(x, y)),
    }
}

/// How far the posed shape sticks out beyond the rectangle (0 if inside).
pub fn shape_overhang_beyond_rect(shape: &Shape, pose: &Pose2, rect: &Rect) -> f64 {
    match shape {
        Shape::Disc { radius } => {
            let dx = (rect.min_x - (pose.x - radius))
                .max((pose.x + radius) - rect.max_x)
                .max(0.0);
            let dy = (rect.min_y - (pose.y - radius))
                .max((pose.y + radius) - rect.max_y)
                .max(0.0);
            dx.max(dy)
        }
        Shape::Polygon { .. } => shape
            .world_vertices(pose)
            .iter()
            .map(|&(x, y)| rect.distance_to_point(x, y))
            .fold(0.0, f64::max),
    }
}

/// Boundary point of the shape in direction `dir` (unit vector, world frame),
/// i.e. the support point along `dir`.
pub fn support_point(shape: &Shape, pose: &Pose2, dir: (f64, f64)) -> (f64, f64) {
    match shape {
        Shape::Disc { radius } => (pose.x + radius * dir.0, pose.y + radius * dir.1),
        Shape::Polygon { .. } => {
            let verts = shape.world_vertices(pose);
            verts
                .into_iter()
                .max_by(|a, b| {
                    let da = a.0 * dir.0 + a.1 * dir.1;
                    let db = b.0 * dir.0 + b.1 * dir.1;
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_rect_area_matches_halfplane_cases() {
        let rect = Rect::new(0.0, 0.0, 10.0, 10.0);
        // Fully inside.
        let full = disc_rect_overlap_area(5.0, 5.0, 1.0, &rect);
        assert!((full - std::f64::consts::PI).abs() < 1e-9);
        // Centered on an edge: exactly half.
        let half = disc_rect_overlap_area(0.0, 5.0, 1.0, &rect);
        assert!((half - std::f64::consts::PI / 2.0).abs() < 1e-9, "{half}");
        // Fully outside.
        let none = disc_rect_overlap_area(-3.0, 5.0, 1.0, &rect);
        assert!(none.abs() < 1e-12);
        // Centered on a corner: exactly a quarter.
        let quarter = disc_rect_overlap_area(0.0, 0.0, 1.0, &rect);
        assert!(
            (quarter - std::f64::consts::PI / 4.0).abs() < 1e-9,
            "{quarter}"
        );
    }

    #[test]
    fn disc_rect_area_monte_carlo() {
        // Independent area oracle: uniform sampling over the disc.
        let cases = [
            (0.05f64, 0.35f64, 0.1f64),
            (-0.03, 0.1, 0.12),
            (0.5, 0.5, 0.2),
            (1.02, 0.77, 0.15),
        ];
        let rect = Rect::new(0.0, 0.0, 1.0, 0.8);
        for (cx, cy, r) in cases {
            let analytic = disc_rect_overlap_area(cx, cy, r, &rect);
            // Deterministic low-discrepancy grid over the disc's bounding box.
            let n = 600;
            let mut hits = 0u64;
            let mut total = 0u64;
            for i in 0..n {
                for j in 0..n {
                    let x = cx - r + 2.0 * r * (i as f64 + 0.5) / n as f64;
                    let y = cy - r + 2.0 * r * (j as f64 + 0.5) / n as f64;
                    if (x - cx).powi(2) + (y - cy).powi(2) <= r * r {
                        total += 1;
                        if rect.contains(x, y) {
                            hits += 1;
                        }
                    }
                }
            }
            let disc_area = std::f64::consts::PI * r * r;
            let estimate = disc_area * hits as f64 / total as f64;
            assert!(
                (analytic - estimate).abs() < 2e-3 * disc_area.max(1e-6) + 1e-5,
                "disc ({cx},{cy},{r}): analytic {analytic} vs grid {estimate}"
            );
        }
    }

    #[test]
    fn polygon_clip_area() {
        let square = vec![(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        let rect = Rect::new(1.0, 1.0, 3.0, 3.0);
        let a = polygon_rect_overlap_area(&square, &rect);
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disc_disc_penetration() {
        let a = Shape::Disc { radius: 0.1 };
        let b = Shape::Disc { radius: 0.1 };
        let pa = Pose2::new(0.0, 0.0, 0.0);
        let pb = Pose2::new(0.15, 0.0, 0.0);
        let depth = penetration_depth(&a, &pa, &b, &pb);
        assert!((depth - 0.05).abs() < 1e-12);
        let pb2 = Pose2::new(0.25, 0.0, 0.0);
        assert!(penetration_depth(&a, &pa, &b, &pb2) <= 0.0);
    }

    #[test]
    fn polygon_penetration_depth_via_sat() {
        let unit = Shape::Polygon {
            vertices: vec![(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)],
        };
        let pa = Pose2::identity();
        let pb = Pose2::new(0.9, 0.0, 0.0);
        let depth = penetration_depth(&unit, &pa, &unit, &pb);
        assert!((depth - 0.1).abs() < 1e-12, "depth {depth}");
        let pc = Pose2::new(1.2, 0.0, 0.0);
        let sep = penetration_depth(&unit, &pa, &unit, &pc);
        assert!(sep < 0.0);
    }

    #[test]
    fn signed_distance_inside_and_out() {
        let verts = vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!((polygon_signed_distance(&verts, 0.5, 0.5) + 0.5).abs() < 1e-12);
        assert!((polygon_signed_distance(&verts, 2.0, 0.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overhang_and_containment() {
        let d = Shape::Disc { radius: 0.1 };
        let rect = Rect::new(0.0, 0.0, 1.0, 1.0);
        let inside = Pose2::new(0.5, 0.5, 0.0);
        assert!(shape_inside_rect(&d, &inside, &rect));
        assert_eq!(shape_overhang_beyond_rect(&d, &inside, &rect), 0.0);
        let edge = Pose2::new(0.05, 0.5, 0.0);
        let over = shape_overhang_beyond_rect(&d, &edge, &rect);
        assert!((over - 0.05).abs() < 1e-12);
    }
}
