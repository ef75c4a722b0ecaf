//! Convex polytopes as half-space intersections with enumerated faces.
//!
//! Exact face geometry covers `d` in {2, 3}: vertices come from pairwise /
//! triple hyperplane intersections filtered by feasibility, faces from
//! incidence. Redundant half-spaces (no face of positive measure) are
//! dropped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::body::ConvexBody;
use crate::geometry::vec::{
    add, cross, dot, norm, normalize, scale, sub, tangent_frame, V, GEOM_TOL,
};

/// `{x : x . normal <= offset}` with a unit normal.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Halfspace {
    pub normal: V,
    pub offset: f64,
}

/// A facet: outward unit normal, `(d-1)`-measure, and its vertices
/// (two segment endpoints for `d = 2`, a cyclically ordered planar polygon
/// for `d = 3`).
#[derive(Debug, Clone, Serialize)]
pub struct Face {
    pub normal: V,
    pub offset: f64,
    pub area: f64,
    pub vertices: Vec<V>,
}

impl Face {
    pub fn centroid(&self) -> V {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            c = add(c, *v);
        }
        scale(c, 1.0 / self.vertices.len() as f64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexPolytope {
    pub d: usize,
    pub halfspaces: Vec<Halfspace>,
    pub faces: Vec<Face>,
    pub vertices: Vec<V>,
}

const VERTEX_MERGE_TOL: f64 = 1e-7;
const INCIDENCE_TOL: f64 = 1e-8;

impl ConvexPolytope {
    /// Intersects half-spaces and enumerates vertices and faces.
    pub fn from_halfspaces(d: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        let mut hs: Vec<Halfspace> = Vec::new();
        for h in halfspaces {
            let n = normalize(h.normal).ok_or(Error::DegenerateBody("zero normal".into()))?;
            let h = Halfspace {
                normal: n,
                offset: h.offset,
            };
            // identical normals: keep the tighter offset
            if let Some(prev) = hs
                .iter_mut()
                .find(|p| norm(sub(p.normal, h.normal)) < GEOM_TOL)
            {
                prev.offset = prev.offset.min(h.offset);
            } else {
                hs.push(h);
            }
        }
        if hs.len() < d + 1 {
            return Err(Error::UnboundedPolytope);
        }
        if !positively_spanning(d, &hs) {
            return Err(Error::UnboundedPolytope);
        }
        let vertices = enumerate_vertices(d, &hs);
        if vertices.len() < d + 1 {
            return Err(Error::UnboundedPolytope);
        }
        let mut kept = Vec::new();
        let mut faces = Vec::new();
        for h in &hs {
            if let Some(face) = build_face(d, h, &vertices) {
                kept.push(*h);
                faces.push(face);
            }
        }
        Ok(ConvexPolytope {
            d,
            halfspaces: kept,
            faces,
            vertices,
        })
    }

    /// Convex hull of a point set (support-hyperplane enumeration).
    pub fn from_points(d: usize, points: &[V]) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        let pts = merge_close(points);
        if pts.len() < d + 1 {
            return Err(Error::DegenerateBody("too few hull points".into()));
        }
        let mut hs: Vec<Halfspace> = Vec::new();
        let mut push = |normal: V, pts: &[V]| {
            let offset = pts.iter().map(|p| dot(*p, normal)).fold(f64::MIN, f64::max);
            if pts.iter().all(|p| dot(*p, normal) <= offset + INCIDENCE_TOL) {
                hs.push(Halfspace { normal, offset });
            }
        };
        if d == 2 {
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    let dir = sub(pts[j], pts[i]);
                    if let Some(u) = normalize([dir[1], -dir[0], 0.0]) {
                        push(u, &pts);
                        push(scale(u, -1.0), &pts);
                    }
                }
            }
        } else {
            for i in 0..pts.len() {
                for j in (i + 1)..pts.len() {
                    for k in (j + 1)..pts.len() {
                        let n = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                        if let Some(u) = normalize(n) {
                            push(u, &pts);
                            push(scale(u, -1.0), &pts);
                        }
                    }
                }
            }
        }
        if hs.is_empty() {
            return Err(Error::DegenerateBody("hull points are degenerate".into()));
        }
        Self::from_halfspaces(d, hs)
    }

    pub fn contains(&self, x: V, tol: f64) -> bool {
        self.halfspaces
            .iter()
            .all(|h| dot(x, h.normal) <= h.offset + tol)
    }

    /// Support function `sup {x . u : x in P}`.
    pub fn support(&self, u: V) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(*v, u))
            .fold(f64::MIN, f64::max)
    }

    pub fn surface_measure(&self) -> f64 {
        self.faces.iter().map(|f| f.area).sum()
    }

    pub fn interior_point(&self) -> V {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            c = add(c, *v);
        }
        scale(c, 1.0 / self.vertices.len() as f64)
    }

    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| norm(*v)).fold(0.0, f64::max)
    }
}

fn merge_close(points: &[V]) -> Vec<V> {
    let mut out: Vec<V> = Vec::new();
    for p in points {
        if !out.iter().any(|q| norm(sub(*q, *p)) < VERTEX_MERGE_TOL) {
            out.push(*p);
        }
    }
    out
}

/// Sampled positive-spanning check: a nonempty intersection is bounded iff
/// every direction is blocked by some half-space normal.
fn positively_spanning(d: usize, hs: &[Halfspace]) -> bool {
    let probes = if d == 2 { 256 } else { 1024 };
    direction_grid(d, probes)
        .into_iter()
        .all(|u| hs.iter().any(|h| dot(u, h.normal) > 1e-6))
}

fn enumerate_vertices(d: usize, hs: &[Halfspace]) -> Vec<V> {
    let m = hs.len();
    let mut verts: Vec<V> = Vec::new();
    let feasible = |x: V| hs.iter().all(|h| dot(x, h.normal) <= h.offset + INCIDENCE_TOL);
    let mut consider = |x: V| {
        if feasible(x) && !verts.iter().any(|v| norm(sub(*v, x)) < VERTEX_MERGE_TOL) {
            verts.push(x);
        }
    };
    if d == 2 {
        for i in 0..m {
            for j in (i + 1)..m {
                if let Some(x) = solve2(hs[i], hs[j]) {
                    consider(x);
                }
            }
        }
    } else {
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    if let Some(x) = solve3(hs[i], hs[j], hs[k]) {
                        consider(x);
                    }
                }
            }
        }
    }
    verts
}

fn solve2(a: Halfspace, b: Halfspace) -> Option<V> {
    let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
    if det.abs() < GEOM_TOL {
        return None;
    }
    Some([
        (a.offset * b.normal[1] - b.offset * a.normal[1]) / det,
        (a.normal[0] * b.offset - b.normal[0] * a.offset) / det,
        0.0,
    ])
}

fn solve3(a: Halfspace, b: Halfspace, c: Halfspace) -> Option<V> {
    let det = dot(a.normal, cross(b.normal, c.normal));
    if det.abs() < GEOM_TOL {
        return None;
    }
    let x = add(
        add(
            scale(cross(b.normal, c.normal), a.offset),
            scale(cross(c.normal, a.normal), b.offset),
        ),
        scale(cross(a.normal, b.normal), c.offset),
    );
    Some(scale(x, 1.0 / det))
}

fn build_face(d: usize, h: &Halfspace, vertices: &[V]) -> Option<Face> {
    let incident: Vec<V> = vertices
        .iter()
        .copied()
        .filter(|v| (dot(*v, h.normal) - h.offset).abs() <= INCIDENCE_TOL)
        .collect();
    if incident.len() < d {
        return None;
    }
    if d == 2 {
        let (u1, _) = tangent_frame(2, h.normal);
        let mut lo = incident[0];
        let mut hi = incident[0];
        for v in &incident {
            if dot(*v, u1) < dot(lo, u1) {
                lo = *v;
            }
            if dot(*v, u1) > dot(hi, u1) {
                hi = *v;
            }
        }
        let area = norm(sub(hi, lo));
        if area < GEOM_TOL {
            return None;
        }
        Some(Face {
            normal: h.normal,
            offset: h.offset,
            area,
            vertices: vec![lo, hi],
        })
    } else {
        let mut c = [0.0; 3];
        for v in &incident {
            c = add(c, *v);
        }
        c = scale(c, 1.0 / incident.len() as f64);
        let (u1, u2) = tangent_frame(3, h.normal);
        let mut ordered = incident;
        ordered.sort_by(|a, b| {
            let pa = sub(*a, c);
            let pb = sub(*b, c);
            let aa = dot(pa, u2).atan2(dot(pa, u1));
            let ab = dot(pb, u2).atan2(dot(pb, u1));
            aa.partial_cmp(&ab).unwrap()
        });
        let mut area2 = [0.0; 3];
        for i in 0..ordered.len() {
            let p = sub(ordered[i], c);
            let q = sub(ordered[(i + 1) % ordered.len()], c);
            area2 = add(area2, cross(p, q));
        }
        let area = 0.5 * norm(area2);
        if area < GEOM_TOL {
            return None;
        }
        Some(Face {
            normal: h.normal,
            offset: h.offset,
            area,
            vertices: ordered,
        })
    }
}

/// Spread directions on the unit sphere: equally spaced angles for `d = 2`,
/// a Fibonacci sphere grid for `d = 3`. `m = 2d` yields exactly the axis
/// directions.
pub fn direction_set(d: usize, m: usize) -> Vec<V> {
    if m == 2 * d {
        let mut dirs = Vec::new();
        for k in 0..d {
            let mut u = [0.0; 3];
            u[k] = 1.0;
            dirs.push(u);
            u[k] = -1.0;
            dirs.push(u);
        }
        return dirs;
    }
    direction_grid(d, m)
}

fn direction_grid(d: usize, m: usize) -> Vec<V> {
    if d == 2 {
        (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                [a.cos(), a.sin(), 0.0]
            })
            .collect()
    } else {
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        (0..m)
            .map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let a = golden * k as f64;
                [r * a.cos(), r * a.sin(), z]
            })
            .collect()
    }
}

/// Circumscribed polytope: intersection of `m` supporting half-spaces of `A`.
pub fn outer_polytope(body: &ConvexBody, m: usize) -> Result<ConvexPolytope> {
    let d = body.dim();
    if m < d + 1 {
        return Err(Error::DegenerateBody(format!("need at least {} directions", d + 1)));
    }
    body.check_non_degenerate()?;
    let hs = direction_set(d, m)
        .into_iter()
        .map(|u| Halfspace {
            normal: u,
            offset: body.support(u),
        })
        .collect();
    ConvexPolytope::from_halfspaces(d, hs)
}

/// Inscribed polytope: convex hull of `m` boundary points of `A`.
///
/// Bodies that are themselves polytopes (or boxes) with at most `m` vertices
/// contribute their own vertex set, so the hull reproduces them exactly;
/// remaining points come from ray-casting out of an interior point along
/// spread directions.
pub fn inner_polytope(body: &ConvexBody, m: usize) -> Result<ConvexPolytope> {
    let d = body.dim();
    if m < d + 1 {
        return Err(Error::DegenerateBody(format!("need at least {} points", d + 1)));
    }
    body.check_non_degenerate()?;
    let mut points: Vec<V> = Vec::new();
    let own = body.vertex_set();
    if !own.is_empty() && own.len() <= m {
        points.extend(own);
    }
    if points.len() < m {
        let center = body.interior_point();
        for u in direction_set(d, m) {
            if points.len() >= m {
                break;
            }
            let t = body.ray_exit(center, u);
            let p = add(center, scale(u, t));
            if !points.iter().any(|q| norm(sub(*q, p)) < VERTEX_MERGE_TOL) {
                points.push(p);
            }
        }
    }
    ConvexPolytope::from_points(d, &points)
}

/// Outer polytope approximation of the Wulff crystal of `nu` over the
/// supplied directions.
pub fn wulff_crystal(nu: impl Fn(V) -> f64, directions: &[V]) -> Result<ConvexPolytope> {
    let d = if directions.iter().all(|u| u[2].abs() < GEOM_TOL) {
        2
    } else {
        3
    };
    let mut hs = Vec::with_capacity(directions.len());
    for &u in directions {
        let u = normalize(u).ok_or(Error::DegenerateBody("zero direction".into()))?;
        let value = nu(u);
        assert!(value > 0.0, "flow constant must be positive on {u:?}");
        hs.push(Halfspace {
            normal: u,
            offset: value,
        });
    }
    ConvexPolytope::from_halfspaces(d, hs).map_err(|_| Error::EmptyCrystal)
}
