//! Compact convex bodies: balls, boxes and polytopes behind one interface.

use crate::error::{Error, Result};
use crate::geometry::polytope::ConvexPolytope;
use crate::geometry::vec::{add, dist, dot, norm, point_segment_dist, scale, sub, V, GEOM_TOL};

#[derive(Debug, Clone)]
pub enum ConvexBody {
    Ball { center: V, radius: f64, d: usize },
    Box { lo: V, hi: V, d: usize },
    Polytope(ConvexPolytope),
}

impl ConvexBody {
    pub fn ball(center: V, radius: f64, d: usize) -> Self {
        ConvexBody::Ball { center, radius, d }
    }

    pub fn box_at(lo: V, hi: V, d: usize) -> Self {
        ConvexBody::Box { lo, hi, d }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { d, .. } | ConvexBody::Box { d, .. } => *d,
            ConvexBody::Polytope(p) => p.d,
        }
    }

    pub fn check_non_degenerate(&self) -> Result<()> {
        match self {
            ConvexBody::Ball { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(Error::DegenerateBody("ball radius must be > 0".into()));
                }
            }
            ConvexBody::Box { lo, hi, d } => {
                for k in 0..*d {
                    if lo[k] >= hi[k] {
                        return Err(Error::DegenerateBody(format!(
                            "box is flat along axis {k}"
                        )));
                    }
                }
            }
            ConvexBody::Polytope(p) => {
                if p.vertices.len() < p.d + 1 {
                    return Err(Error::DegenerateBody("polytope has empty interior".into()));
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: V, tol: f64) -> bool {
        match self {
            ConvexBody::Ball { center, radius, .. } => dist(x, *center) <= radius + tol,
            ConvexBody::Box { lo, hi, d } => {
                (0..*d).all(|k| x[k] >= lo[k] - tol && x[k] <= hi[k] + tol)
            }
            ConvexBody::Polytope(p) => p.contains(x, tol),
        }
    }

    pub fn support(&self, u: V) -> f64 {
        match self {
            ConvexBody::Ball { center, radius, .. } => dot(*center, u) + radius * norm(u),
            ConvexBody::Box { lo, hi, d } => (0..*d)
                .map(|k| (lo[k] * u[k]).max(hi[k] * u[k]))
                .sum(),
            ConvexBody::Polytope(p) => p.support(u),
        }
    }

    pub fn interior_point(&self) -> V {
        match self {
            ConvexBody::Ball { center, .. } => *center,
            ConvexBody::Box { lo, hi, .. } => scale(add(*lo, *hi), 0.5),
            ConvexBody::Polytope(p) => p.interior_point(),
        }
    }

    /// Max Euclidean norm over the body; the truncation schedule scales
    /// with it.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody::Ball { center, radius, .. } => norm(*center) + radius,
            ConvexBody::Box { lo, hi, d } => {
                let mut worst: f64 = 0.0;
                for mask in 0..(1usize << d) {
                    let mut corner = [0.0; 3];
                    for k in 0..*d {
                        corner[k] = if mask >> k & 1 == 1 { hi[k] } else { lo[k] };
                    }
                    worst = worst.max(norm(corner));
                }
                worst
            }
            ConvexBody::Polytope(p) => p.circumradius(),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (V, V) {
        match self {
            ConvexBody::Ball { center, radius, d } => {
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for k in 0..*d {
                    lo[k] = center[k] - radius;
                    hi[k] = center[k] + radius;
                }
                (lo, hi)
            }
            ConvexBody::Box { lo, hi, .. } => (*lo, *hi),
            ConvexBody::Polytope(p) => {
                let mut lo = [f64::MAX; 3];
                let mut hi = [f64::MIN; 3];
                for v in &p.vertices {
                    for k in 0..p.d {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                for k in p.d..3 {
                    lo[k] = 0.0;
                    hi[k] = 0.0;
                }
                (lo, hi)
            }
        }
    }

    /// Exact vertex set, when the body has one (boxes and polytopes).
    pub fn vertex_set(&self) -> Vec<V> {
        match self {
            ConvexBody::Ball { .. } => Vec::new(),
            ConvexBody::Box { lo, hi, d } => {
                let mut out = Vec::new();
                for mask in 0..(1usize << d) {
                    let mut corner = [0.0; 3];
                    for k in 0..*d {
                        corner[k] = if mask >> k & 1 == 1 { hi[k] } else { lo[k] };
                    }
                    out.push(corner);
                }
                out
            }
            ConvexBody::Polytope(p) => p.vertices.clone(),
        }
    }

    /// Largest `t >= 0` with `start + t u` still in the body; `start` must be
    /// interior and `u` a unit vector.
    pub fn ray_exit(&self, start: V, u: V) -> f64 {
        match self {
            ConvexBody::Ball { center, radius, .. } => {
                let w = sub(start, *center);
                let b = dot(w, u);
                let c = dot(w, w) - radius * radius;
                (-b + (b * b - c).max(0.0).sqrt()).max(0.0)
            }
            ConvexBody::Box { lo, hi, d } => {
                let mut t = f64::MAX;
                for k in 0..*d {
                    if u[k] > GEOM_TOL {
                        t = t.min((hi[k] - start[k]) / u[k]);
                    } else if u[k] < -GEOM_TOL {
                        t = t.min((lo[k] - start[k]) / u[k]);
                    }
                }
                t.max(0.0)
            }
            ConvexBody::Polytope(p) => {
                let mut t = f64::MAX;
                for h in &p.halfspaces {
                    let den = dot(u, h.normal);
                    if den > GEOM_TOL {
                        t = t.min((h.offset - dot(start, h.normal)) / den);
                    }
                }
                t.max(0.0)
            }
        }
    }

    /// Euclidean distance from a point to the body (zero inside).
    pub fn distance(&self, x: V) -> f64 {
        match self {
            ConvexBody::Ball { center, radius, .. } => (dist(x, *center) - radius).max(0.0),
            ConvexBody::Box { lo, hi, d } => {
                let mut acc = 0.0;
                for k in 0..*d {
                    let g = (lo[k] - x[k]).max(0.0).max(x[k] - hi[k]);
                    acc += g * g;
                }
                acc.sqrt()
            }
            ConvexBody::Polytope(p) => {
                if p.contains(x, 0.0) {
                    return 0.0;
                }
                let mut best = f64::MAX;
                for f in &p.faces {
                    let d = if p.d == 2 {
                        point_segment_dist(x, f.vertices[0], f.vertices[1])
                    } else {
                        crate::geometry::vec::point_planar_polygon_dist(
                            x, &f.vertices, f.normal,
                        )
                    };
                    best = best.min(d);
                }
                best
            }
        }
    }
}
