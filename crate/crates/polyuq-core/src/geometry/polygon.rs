//! Plain polygon helpers shared by the mesh, refinement and quadrature code.

use alloc::vec::Vec;

use crate::math;
use crate::Point;

/// Signed area of a polygon loop (positive for counterclockwise).
pub fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

/// Area centroid of a simple polygon.
pub fn centroid(vertices: &[Point]) -> Point {
    let n = vertices.len();
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut a = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        let cross = p[0] * q[1] - q[0] * p[1];
        a += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    a *= 0.5;
    [cx / (6.0 * a), cy / (6.0 * a)]
}

/// Maximum pairwise vertex distance.
pub fn diameter(vertices: &[Point]) -> f64 {
    let mut d2 = 0.0f64;
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            d2 = d2.max(dist2(vertices[i], vertices[j]));
        }
    }
    math::sqrt(d2)
}

/// Minimum pairwise vertex distance.
pub fn min_vertex_distance(vertices: &[Point]) -> f64 {
    let mut d2 = f64::INFINITY;
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            d2 = d2.min(dist2(vertices[i], vertices[j]));
        }
    }
    math::sqrt(d2)
}

pub fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

pub fn distance(a: Point, b: Point) -> f64 {
    math::sqrt(dist2(a, b))
}

/// Whether the closed vertex loop is simple (no two non-adjacent edges
/// intersect and adjacent edges meet only at their shared vertex).
pub fn is_simple_loop(vertices: &[Point]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
        for j in (i + 1)..n {
            // skip adjacent edges (they share a vertex by construction)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
            if segments_properly_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_properly_intersect(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

/// Even-odd point-in-polygon test; points on the boundary may land on
/// either side but never outside both adjacent polygons of a tiling.
pub fn contains_point(vertices: &[Point], p: Point) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (vertices[i][0], vertices[i][1]);
        let (xj, yj) = (vertices[j][0], vertices[j][1]);
        if ((yi > p[1]) != (yj > p[1]))
            && (p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi)
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Convex hull of a point set (monotone chain), counterclockwise without
/// collinear points. Used to generate random convex test polygons.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .expect("NaN coordinate")
            .then(a[1].partial_cmp(&b[1]).expect("NaN coordinate"))
    });
    pts.dedup_by(|a, b| a == b);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
