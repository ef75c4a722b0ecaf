//! Lattice discretizations of bodies and cylinders.
//!
//! The continuous objects live at scale 1; the lattice object is the dilate
//! `nA` on `Z^d`, i.e. a lattice point `x` belongs to the discretization iff
//! `x / n` lies in the closed set. All flow values are later normalized by
//! `n^{d-1}`.

use crate::error::{Error, Result};
use crate::geometry::body::ConvexBody;
use crate::geometry::polytope::Face;
use crate::geometry::vec::{
    add, dot, norm, planar_set_contains, scale, segment_planar_set_dist, sub, tangent_frame, V,
    GEOM_TOL,
};
use crate::lattice::{LatticeEdge, Pt};

/// A flat convex base: two segment endpoints (`d = 2`) or a cyclically
/// ordered planar polygon (`d = 3`), with a unit normal.
#[derive(Debug, Clone)]
pub struct BaseFace {
    pub d: usize,
    pub vertices: Vec<V>,
    pub normal: V,
}

impl BaseFace {
    pub fn new(d: usize, mut vertices: Vec<V>, normal: V) -> Result<Self> {
        if vertices.len() < d {
            return Err(Error::DegenerateCylinder("base needs d vertices".into()));
        }
        if d == 3 && vertices.len() >= 3 {
            // cyclic order, counterclockwise with respect to the normal
            let mut c = [0.0; 3];
            for v in &vertices {
                c = add(c, *v);
            }
            c = scale(c, 1.0 / vertices.len() as f64);
            let (u1, u2) = tangent_frame(3, normal);
            vertices.sort_by(|a, b| {
                let pa = sub(*a, c);
                let pb = sub(*b, c);
                let aa = dot(pa, u2).atan2(dot(pa, u1));
                let ab = dot(pb, u2).atan2(dot(pb, u1));
                aa.partial_cmp(&ab).unwrap()
            });
        }
        let base = BaseFace {
            d,
            vertices,
            normal,
        };
        if base.area() <= GEOM_TOL {
            return Err(Error::DegenerateCylinder("base has zero area".into()));
        }
        Ok(base)
    }

    pub fn from_face(d: usize, face: &Face) -> Result<Self> {
        Self::new(d, face.vertices.clone(), face.normal)
    }

    pub fn center(&self) -> V {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            c = add(c, *v);
        }
        scale(c, 1.0 / self.vertices.len() as f64)
    }

    /// `(d-1)`-measure: segment length or polygon area.
    pub fn area(&self) -> f64 {
        if self.vertices.len() == 2 {
            norm(sub(self.vertices[1], self.vertices[0]))
        } else {
            let c = self.center();
            let mut acc = [0.0; 3];
            for i in 0..self.vertices.len() {
                let p = sub(self.vertices[i], c);
                let q = sub(self.vertices[(i + 1) % self.vertices.len()], c);
                acc = add(acc, crate::geometry::vec::cross(p, q));
            }
            0.5 * norm(acc)
        }
    }

    pub fn contains(&self, p: V, tol: f64) -> bool {
        planar_set_contains(&self.vertices, self.normal, p, tol)
    }

    /// The base translated by `t` along its normal.
    pub fn translated(&self, t: f64) -> Vec<V> {
        self.vertices
            .iter()
            .map(|v| add(*v, scale(self.normal, t)))
            .collect()
    }
}

/// `cyl(A, h) = {x + t v : x in A, t in [-h, h]}` with `v` the base normal.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub base: BaseFace,
    pub height: f64,
}

impl Cylinder {
    pub fn new(base: BaseFace, height: f64) -> Result<Self> {
        if height <= 0.0 {
            return Err(Error::DegenerateCylinder("height must be > 0".into()));
        }
        Ok(Cylinder { base, height })
    }

    /// Signed height of `x` over the base plane.
    pub fn axis_coord(&self, x: V) -> f64 {
        dot(sub(x, self.base.center()), self.base.normal)
    }

    pub fn contains(&self, x: V, tol: f64) -> bool {
        let t = self.axis_coord(x);
        if t.abs() > self.height + tol {
            return false;
        }
        let p = sub(x, scale(self.base.normal, t));
        self.base.contains(p, tol)
    }

    pub fn bounding_box(&self) -> (V, V) {
        let mut lo = [f64::MAX; 3];
        let mut hi = [f64::MIN; 3];
        for t in [-self.height, self.height] {
            for v in self.base.translated(t) {
                for k in 0..self.base.d {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
        }
        for k in self.base.d..3 {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
        (lo, hi)
    }
}

/// Iterates lattice points of the integer box `[lo, hi]` in dimension `d`.
pub fn for_each_lattice_point(d: usize, lo: Pt, hi: Pt, mut f: impl FnMut(Pt)) {
    let mut p = lo;
    loop {
        f(p);
        let mut k = 0;
        loop {
            p[k] += 1;
            if p[k] <= hi[k] {
                break;
            }
            p[k] = lo[k];
            k += 1;
            if k == d {
                return;
            }
        }
    }
}

fn lattice_box(d: usize, lo: V, hi: V, n: i64) -> (Pt, Pt) {
    let mut ilo = [0i64; 3];
    let mut ihi = [0i64; 3];
    for k in 0..d {
        ilo[k] = (lo[k] * n as f64).floor() as i64 - 1;
        ihi[k] = (hi[k] * n as f64).ceil() as i64 + 1;
    }
    (ilo, ihi)
}

fn to_continuous(p: Pt, n: i64) -> V {
    [
        p[0] as f64 / n as f64,
        p[1] as f64 / n as f64,
        p[2] as f64 / n as f64,
    ]
}

/// `nA ∩ Z^d`: lattice points of the dilated body (closed convention).
pub fn discretize_body(body: &ConvexBody, n: i64) -> Result<Vec<Pt>> {
    assert!(n >= 1);
    let d = body.dim();
    let (lo, hi) = body.bounding_box();
    let (ilo, ihi) = lattice_box(d, lo, hi, n);
    let mut out = Vec::new();
    for_each_lattice_point(d, ilo, ihi, |p| {
        if body.contains(to_continuous(p, n), GEOM_TOL) {
            out.push(p);
        }
    });
    if out.is_empty() {
        return Err(Error::EmptyDiscretization);
    }
    Ok(out)
}

/// `∂_e(nA)`: lattice edges with one endpoint in `nA` and one outside.
pub fn edge_boundary(body: &ConvexBody, n: i64) -> Result<Vec<LatticeEdge>> {
    let d = body.dim();
    let inside = discretize_body(body, n)?;
    let mut out = Vec::new();
    for &x in &inside {
        for axis in 0..d {
            for step in [-1i64, 1] {
                let mut y = x;
                y[axis] += step;
                if !body.contains(to_continuous(y, n), GEOM_TOL) {
                    out.push(LatticeEdge::between(x, y));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscretizeMode {
    /// Top / bottom sets of the dilated cylinder.
    TopBottom,
    /// Upper / lower half parts of the lateral boundary.
    HalfBoundary,
}

/// A discretized cylinder: terminal vertex sets and interior edges.
#[derive(Debug, Clone)]
pub struct CylinderSets {
    pub source: Vec<Pt>,
    pub sink: Vec<Pt>,
    pub vertices: Vec<Pt>,
    pub edges: Vec<LatticeEdge>,
}

/// Discretizes `n . cyl(A, h)`.
///
/// `TopBottom` returns the top set (vertices with an outside neighbor whose
/// connecting edge meets the dilate of `A + h v`) as source and the bottom
/// set (`A - h v`) as sink. `HalfBoundary` returns the two lateral boundary
/// half parts. Edges are the lattice edges with both endpoints in the closed
/// dilated cylinder.
pub fn discretize_cylinder(cyl: &Cylinder, n: i64, mode: DiscretizeMode) -> Result<CylinderSets> {
    assert!(n >= 1);
    let d = cyl.base.d;
    let (lo, hi) = cyl.bounding_box();
    let (ilo, ihi) = lattice_box(d, lo, hi, n);
    let mut vertices = Vec::new();
    for_each_lattice_point(d, ilo, ihi, |p| {
        if cyl.contains(to_continuous(p, n), GEOM_TOL) {
            vertices.push(p);
        }
    });
    let top = cyl.base.translated(cyl.height);
    let bottom = cyl.base.translated(-cyl.height);
    let mut source = Vec::new();
    let mut sink = Vec::new();
    let mut edges = Vec::new();
    for &x in &vertices {
        let xc = to_continuous(x, n);
        let mut outside_neighbor = false;
        for axis in 0..d {
            for step in [-1i64, 1] {
                let mut y = x;
                y[axis] += step;
                let yc = to_continuous(y, n);
                if cyl.contains(yc, GEOM_TOL) {
                    if step == 1 {
                        edges.push(LatticeEdge { point: x, axis });
                    }
                    continue;
                }
                outside_neighbor = true;
                if mode == DiscretizeMode::TopBottom {
                    if segment_planar_set_dist(xc, yc, &top, cyl.base.normal) <= GEOM_TOL {
                        source.push(x);
                    }
                    if segment_planar_set_dist(xc, yc, &bottom, cyl.base.normal) <= GEOM_TOL {
                        sink.push(x);
                    }
                }
            }
        }
        if mode == DiscretizeMode::HalfBoundary && outside_neighbor {
            let t = cyl.axis_coord(xc);
            if t > GEOM_TOL {
                source.push(x);
            } else if t < -GEOM_TOL {
                sink.push(x);
            }
        }
    }
    source.sort_unstable();
    source.dedup();
    sink.sort_unstable();
    sink.dedup();
    // a vertex whose outgoing edge meets both translated bases cannot occur
    // once the separation 2 h n exceeds one lattice step; enforce disjointness
    if let Some(x) = source.iter().find(|x| sink.binary_search(x).is_ok()) {
        return Err(Error::DegenerateCylinder(format!(
            "terminal sets overlap at {x:?}; cylinder too thin at this scale"
        )));
    }
    if source.is_empty() || sink.is_empty() {
        return Err(Error::DegenerateCylinder(
            "empty source or sink at this scale".into(),
        ));
    }
    Ok(CylinderSets {
        source,
        sink,
        vertices,
        edges,
    })
}

/// Lattice edges of the box `[lo, hi]` (continuous coordinates, scale 1)
/// whose dilated endpoints both satisfy `pred`.
pub fn edges_in_region(
    d: usize,
    lo: V,
    hi: V,
    n: i64,
    pred: impl Fn(V) -> bool,
) -> Vec<LatticeEdge> {
    let (ilo, ihi) = lattice_box(d, lo, hi, n);
    let mut out = Vec::new();
    for_each_lattice_point(d, ilo, ihi, |p| {
        if !pred(to_continuous(p, n)) {
            return;
        }
        for axis in 0..d {
            let mut q = p;
            q[axis] += 1;
            if q[axis] <= ihi[axis] && pred(to_continuous(q, n)) {
                out.push(LatticeEdge { point: p, axis });
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn unit_square_n1() {
        let body = ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2);
        let pts = discretize_body(&body, 1).unwrap();
        assert_eq!(pts.len(), 4);
        let boundary = edge_boundary(&body, 1).unwrap();
        assert_eq!(boundary.len(), 8);
    }

    #[test]
    fn small_ball_n1() {
        let body = ConvexBody::ball([0.0; 3], 0.4, 2);
        let pts = discretize_body(&body, 1).unwrap();
        assert_eq!(pts, vec![[0, 0, 0]]);
        assert_eq!(edge_boundary(&body, 1).unwrap().len(), 4);
    }

    #[test]
    fn unit_square_boundary_matches_exhaustive_scan() {
        let body = ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2);
        let n = 4;
        let got: HashSet<LatticeEdge> = edge_boundary(&body, n).unwrap().into_iter().collect();
        // brute-force scan over a wide window
        let mut want = HashSet::new();
        let inside = |p: [i64; 3]| p[0] >= 0 && p[0] <= n && p[1] >= 0 && p[1] <= n;
        for x in -3..8i64 {
            for y in -3..8i64 {
                let p = [x, y, 0];
                for (axis, step) in [(0, 1i64), (0, -1), (1, 1), (1, -1)] {
                    let mut q = p;
                    q[axis] += step;
                    if inside(p) && !inside(q) {
                        want.insert(LatticeEdge::between(p, q));
                    }
                }
            }
        }
        assert_eq!(got, want);
        assert_eq!(got.len(), 4 * (n as usize + 1));
    }

    #[test]
    fn edge_boundary_is_a_cutset() {
        // removing the edge boundary disconnects nA from the window border
        let body = ConvexBody::ball([0.1, 0.2, 0.0], 1.3, 2);
        let n = 6;
        let blocked: HashSet<LatticeEdge> =
            edge_boundary(&body, n).unwrap().into_iter().collect();
        let inside = discretize_body(&body, n).unwrap();
        let r = 15i64;
        let mut seen: HashSet<[i64; 3]> = inside.iter().copied().collect();
        let mut queue: Vec<[i64; 3]> = inside.clone();
        while let Some(p) = queue.pop() {
            assert!(
                p[0].abs() < r && p[1].abs() < r,
                "escaped through the edge boundary at {p:?}"
            );
            for (axis, step) in [(0, 1i64), (0, -1), (1, 1), (1, -1)] {
                let mut q = p;
                q[axis] += step;
                if blocked.contains(&LatticeEdge::between(p, q)) || seen.contains(&q) {
                    continue;
                }
                seen.insert(q);
                queue.push(q);
            }
        }
    }

    fn segment_cyl(offset: f64) -> Cylinder {
        let base = BaseFace::new(
            2,
            vec![[offset, 0.0, 0.0], [offset + 1.0, 0.0, 0.0]],
            [0.0, 1.0, 0.0],
        )
        .unwrap();
        Cylinder::new(base, 1.0).unwrap()
    }

    #[test]
    fn top_bottom_sets_for_segment_cylinder() {
        let cyl = segment_cyl(0.0);
        let n = 2;
        let sets = discretize_cylinder(&cyl, n, DiscretizeMode::TopBottom).unwrap();
        assert!(!sets.source.is_empty());
        assert!(!sets.sink.is_empty());
        let src: HashSet<_> = sets.source.iter().collect();
        let snk: HashSet<_> = sets.sink.iter().collect();
        assert!(src.is_disjoint(&snk));
        // top vertices sit on the top row, bottom on the bottom row
        assert!(sets.source.iter().all(|p| p[1] == 2));
        assert!(sets.sink.iter().all(|p| p[1] == -2));
    }

    #[test]
    fn half_boundary_sets_sit_on_the_boundary_layer() {
        let cyl = segment_cyl(0.25);
        let n = 4;
        let sets = discretize_cylinder(&cyl, n, DiscretizeMode::HalfBoundary).unwrap();
        assert!(!sets.source.is_empty() && !sets.sink.is_empty());
        for p in sets.source.iter().chain(&sets.sink) {
            // must have a neighbor outside the dilated cylinder
            let has_outside = [(0i64, 1i64), (0, -1), (1, 1), (1, -1)].iter().any(|&(a, s)| {
                let mut q = *p;
                q[a as usize] += s;
                !cyl.contains(to_continuous(q, n), GEOM_TOL)
            });
            assert!(has_outside);
        }
        assert!(sets.source.iter().all(|p| p[1] > 0));
        assert!(sets.sink.iter().all(|p| p[1] < 0));
    }

    #[test]
    fn definition_chasing_oracle_topbottom() {
        // literal enumeration of the set definitions on a wide window
        for (offset, n, h) in [(0.0, 2i64, 1.0), (0.3, 3, 0.75), (-0.2, 4, 1.0)] {
            let base = BaseFace::new(
                2,
                vec![[offset, 0.0, 0.0], [offset + 1.0, 0.0, 0.0]],
                [0.0, 1.0, 0.0],
            )
            .unwrap();
            let cyl = Cylinder::new(base, h).unwrap();
            let sets = discretize_cylinder(&cyl, n, DiscretizeMode::TopBottom).unwrap();
            let mut want_top = Vec::new();
            let mut want_bot = Vec::new();
            let top = cyl.base.translated(cyl.height);
            let bottom = cyl.base.translated(-cyl.height);
            for x in -20..25i64 {
                for y in -20..25i64 {
                    let p = [x, y, 0];
                    let pc = to_continuous(p, n);
                    if !cyl.contains(pc, GEOM_TOL) {
                        continue;
                    }
                    let mut in_top = false;
                    let mut in_bot = false;
                    for (axis, step) in [(0usize, 1i64), (0, -1), (1, 1), (1, -1)] {
                        let mut q = p;
                        q[axis] += step;
                        let qc = to_continuous(q, n);
                        if cyl.contains(qc, GEOM_TOL) {
                            continue;
                        }
                        if segment_planar_set_dist(pc, qc, &top, cyl.base.normal) <= GEOM_TOL {
                            in_top = true;
                        }
                        if segment_planar_set_dist(pc, qc, &bottom, cyl.base.normal) <= GEOM_TOL {
                            in_bot = true;
                        }
                    }
                    if in_top {
                        want_top.push(p);
                    }
                    if in_bot {
                        want_bot.push(p);
                    }
                }
            }
            want_top.sort_unstable();
            want_bot.sort_unstable();
            assert_eq!(sets.source, want_top);
            assert_eq!(sets.sink, want_bot);
        }
    }

    #[test]
    fn degenerate_cylinder_rejected() {
        let base = BaseFace::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            [0.0, 1.0, 0.0],
        )
        .unwrap();
        assert!(Cylinder::new(base, 0.0).is_err());
    }
}
