//! Small fixed-size vector helpers. `d = 2` vectors keep a zero third
//! component, so all arithmetic is dimension-agnostic.

pub type V = [f64; 3];

pub const GEOM_TOL: f64 = 1e-9;

#[inline]
pub fn dot(a: V, b: V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn add(a: V, b: V) -> V {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: V, b: V) -> V {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: V, s: f64) -> V {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm(a: V) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: V, b: V) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn cross(a: V, b: V) -> V {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn normalize(a: V) -> Option<V> {
    let n = norm(a);
    if n < GEOM_TOL {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

pub fn l1_norm(a: V) -> f64 {
    a[0].abs() + a[1].abs() + a[2].abs()
}

/// Any two unit vectors completing `v` to an orthonormal frame. For `d = 2`
/// only the first tangent is meaningful and lies in the plane.
pub fn tangent_frame(d: usize, v: V) -> (V, V) {
    if d == 2 {
        ([-v[1], v[0], 0.0], [0.0, 0.0, 1.0])
    } else {
        let pick = if v[0].abs() < 0.9 {
            [1.0, 0.0, 0.0]
        } else {
            [0.0, 1.0, 0.0]
        };
        let u1 = normalize(cross(v, pick)).expect("degenerate normal");
        let u2 = cross(v, u1);
        (u1, u2)
    }
}

/// Distance from a point to a closed segment.
pub fn point_segment_dist(p: V, a: V, b: V) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 < GEOM_TOL * GEOM_TOL {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

/// Distance between two closed segments.
pub fn segment_segment_dist(p1: V, q1: V, p2: V, q2: V) -> f64 {
    // Standard clamped closest-point computation.
    let d1 = sub(q1, p1);
    let d2 = sub(q2, p2);
    let r = sub(p1, p2);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    let tiny = GEOM_TOL * GEOM_TOL;
    let (s, t);
    if a <= tiny && e <= tiny {
        return dist(p1, p2);
    }
    if a <= tiny {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= tiny {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let s0 = if denom.abs() > tiny {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                s = s0;
                t = t0;
            }
        }
    }
    dist(add(p1, scale(d1, s)), add(p2, scale(d2, t)))
}

/// Membership in a flat convex set given by its vertices: a segment for two
/// vertices, a cyclically ordered planar polygon otherwise.
pub fn planar_set_contains(verts: &[V], normal: V, p: V, tol: f64) -> bool {
    match verts.len() {
        0 => false,
        1 => dist(p, verts[0]) <= tol,
        2 => point_segment_dist(p, verts[0], verts[1]) <= tol,
        _ => {
            if dot(sub(p, verts[0]), normal).abs() > tol {
                return false;
            }
            for i in 0..verts.len() {
                let a = verts[i];
                let b = verts[(i + 1) % verts.len()];
                if dot(cross(sub(b, a), sub(p, a)), normal) < -tol {
                    return false;
                }
            }
            true
        }
    }
}

/// Distance from a point to a flat convex set (segment or planar polygon).
pub fn point_planar_polygon_dist(p: V, verts: &[V], normal: V) -> f64 {
    match verts.len() {
        0 => f64::MAX,
        1 => dist(p, verts[0]),
        2 => point_segment_dist(p, verts[0], verts[1]),
        _ => {
            let h = dot(sub(p, verts[0]), normal);
            let proj = sub(p, scale(normal, h));
            if planar_set_contains(verts, normal, proj, GEOM_TOL) {
                return h.abs();
            }
            let mut best = f64::MAX;
            for i in 0..verts.len() {
                let a = verts[i];
                let b = verts[(i + 1) % verts.len()];
                best = best.min(point_segment_dist(p, a, b));
            }
            best
        }
    }
}

/// Distance from a segment to a flat convex set (segment or planar polygon).
pub fn segment_planar_set_dist(a: V, b: V, verts: &[V], normal: V) -> f64 {
    match verts.len() {
        0 => f64::MAX,
        1 => point_segment_dist(verts[0], a, b),
        2 => segment_segment_dist(a, b, verts[0], verts[1]),
        _ => {
            let sa = dot(sub(a, verts[0]), normal);
            let sb = dot(sub(b, verts[0]), normal);
            if sa * sb <= 0.0 && (sa - sb).abs() > GEOM_TOL {
                let t = sa / (sa - sb);
                let x = add(a, scale(sub(b, a), t));
                if planar_set_contains(verts, normal, x, GEOM_TOL) {
                    return 0.0;
                }
            }
            let mut best = point_planar_polygon_dist(a, verts, normal)
                .min(point_planar_polygon_dist(b, verts, normal));
            for i in 0..verts.len() {
                let u = verts[i];
                let v = verts[(i + 1) % verts.len()];
                best = best.min(segment_segment_dist(a, b, u, v));
            }
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal() {
        for v in [[0.0, 0.0, 1.0], [0.6, 0.8, 0.0], [1.0, 0.0, 0.0]] {
            let (u1, u2) = tangent_frame(3, v);
            assert!(dot(u1, v).abs() < 1e-12);
            assert!(dot(u2, v).abs() < 1e-12);
            assert!(dot(u1, u2).abs() < 1e-12);
            assert!((norm(u1) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn segment_distances() {
        let d = point_segment_dist([0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert!((d - 1.0).abs() < 1e-12);
        let d = segment_segment_dist(
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, 2.0, 0.0],
            [0.5, 3.0, 0.0],
        );
        assert!((d - 2.0).abs() < 1e-12);
        // crossing segments touch
        let d = segment_segment_dist(
            [-1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0],
        );
        assert!(d < 1e-12);
    }
}
