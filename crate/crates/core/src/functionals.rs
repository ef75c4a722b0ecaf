//! Flow functionals on dilated bodies: cylinder flows, flow to a certified
//! truncation of infinity, and the glued upper-bound cutset.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::body::ConvexBody;
use crate::geometry::discretize::{
    discretize_body, discretize_cylinder, edges_in_region, BaseFace, Cylinder, CylinderSets,
    DiscretizeMode,
};
use crate::geometry::polytope::ConvexPolytope;
use crate::geometry::vec::{add, dist, point_segment_dist, scale, V};
use crate::lattice::{CapacityField, Environment, LatticeEdge, LatticeRegion, Pt, DEFAULT_EDGE_BUDGET};
use crate::maxflow::{max_flow, min_cut, FlowProblem};

/// A cutset expressed in lattice edges, with its total capacity.
#[derive(Debug, Clone)]
pub struct LatticeCut {
    pub edges: Vec<LatticeEdge>,
    pub capacity: f64,
}

/// Outcome of a flow-to-infinity evaluation.
///
/// `trace` records `(R, value)` along the truncation schedule; the last two
/// entries have equal values and the final cutset stays strictly inside the
/// final box, which certifies that larger boxes cannot change the value.
#[derive(Debug, Clone)]
pub struct FlowToInfinityResult {
    pub value: f64,
    pub cut: LatticeCut,
    pub truncation_radius: f64,
    pub trace: Vec<(f64, f64)>,
}

fn cylinder_problem(
    sets: &CylinderSets,
    cap: impl Fn(&LatticeEdge) -> f64,
) -> (FlowProblem, Vec<LatticeEdge>) {
    let mut index: HashMap<Pt, u32> = HashMap::with_capacity(sets.vertices.len());
    for (i, &p) in sets.vertices.iter().enumerate() {
        index.insert(p, i as u32);
    }
    let mut edges = Vec::with_capacity(sets.edges.len());
    for e in &sets.edges {
        let (a, b) = e.endpoints();
        edges.push((index[&a], index[&b], cap(e)));
    }
    let problem = FlowProblem {
        n_vertices: sets.vertices.len(),
        edges,
        sources: sets.source.iter().map(|p| index[p]).collect(),
        sinks: sets.sink.iter().map(|p| index[p]).collect(),
    };
    (problem, sets.edges.clone())
}

fn solve_sets(
    sets: &CylinderSets,
    cap: impl Fn(&LatticeEdge) -> f64,
) -> Result<(f64, LatticeCut)> {
    let (problem, lattice_edges) = cylinder_problem(sets, cap);
    let res = max_flow(&problem)?;
    let cut = min_cut(&problem, &res);
    Ok((
        res.value,
        LatticeCut {
            edges: cut.edge_indices.iter().map(|&i| lattice_edges[i]).collect(),
            capacity: cut.capacity,
        },
    ))
}

/// Maximal flow from the top to the bottom of the dilated cylinder.
pub fn phi_cylinder(cyl: &Cylinder, n: i64, env: &Environment) -> Result<f64> {
    let sets = discretize_cylinder(cyl, n, DiscretizeMode::TopBottom)?;
    Ok(solve_sets(&sets, |e| env.capacity(e))?.0)
}

/// Maximal flow between the two lateral half boundaries of the cylinder.
pub fn tau_cylinder(cyl: &Cylinder, n: i64, env: &Environment) -> Result<f64> {
    Ok(tau_cylinder_cut(cyl, n, &env.field)?.0)
}

/// Like [`tau_cylinder`] but queried directly from a capacity field and
/// returning the minimal cutset.
pub fn tau_cylinder_cut(
    cyl: &Cylinder,
    n: i64,
    field: &CapacityField,
) -> Result<(f64, LatticeCut)> {
    let sets = discretize_cylinder(cyl, n, DiscretizeMode::HalfBoundary)?;
    solve_sets(&sets, |e| field.capacity(e))
}

/// Number of schedule steps for the truncation radius.
pub const TRUNCATION_STEPS: u32 = 7;

/// Truncation radii: `R_k = rho (1 + 2^k / 4)` around the circumradius.
pub fn truncation_schedule(circumradius: f64) -> Vec<f64> {
    (0..TRUNCATION_STEPS)
        .map(|k| circumradius * (1.0 + (1u64 << k) as f64 / 4.0))
        .collect()
}

/// Minimal cut between the dilated body and the vertex shell of a growing
/// box, stopped once the value repeats exactly with a cutset strictly inside.
///
/// All boxes read capacities from the same field, so shared edges agree and
/// exact value equality across consecutive radii is meaningful.
pub fn phi_to_infinity(
    body: &ConvexBody,
    n: i64,
    field: &CapacityField,
) -> Result<FlowToInfinityResult> {
    body.check_non_degenerate()?;
    let d = body.dim();
    let inner = discretize_body(body, n)?;
    let rho = body.circumradius().max(1.0 / n as f64);
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut prev_value: Option<f64> = None;
    for r in truncation_schedule(rho) {
        let m = (r * n as f64).ceil() as i64 + 2;
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        for k in 0..d {
            lo[k] = -m;
            hi[k] = m;
        }
        let region = LatticeRegion::new(d, lo, hi)?;
        if region.edge_count() > DEFAULT_EDGE_BUDGET {
            return Err(Error::RegionTooLarge {
                edges: region.edge_count(),
                budget: DEFAULT_EDGE_BUDGET,
            });
        }
        let mut edges = Vec::with_capacity(region.edge_count());
        let mut lattice_edges = Vec::with_capacity(region.edge_count());
        for e in region.edges() {
            let (a, b) = e.endpoints();
            edges.push((
                region.vertex_index(a) as u32,
                region.vertex_index(b) as u32,
                field.capacity(&e),
            ));
            lattice_edges.push(e);
        }
        let sources: Vec<u32> = inner.iter().map(|p| region.vertex_index(*p) as u32).collect();
        let sinks: Vec<u32> = region
            .vertices()
            .filter(|p| (0..d).any(|k| p[k] == -m || p[k] == m))
            .map(|p| region.vertex_index(p) as u32)
            .collect();
        let problem = FlowProblem {
            n_vertices: region.vertex_count(),
            edges,
            sources,
            sinks,
        };
        let res = max_flow(&problem)?;
        let cut = min_cut(&problem, &res);
        trace.push((r, res.value));
        let strictly_inside = cut.edge_indices.iter().all(|&i| {
            let (a, b) = lattice_edges[i].endpoints();
            (0..d).all(|k| a[k].abs() < m && b[k].abs() < m)
        });
        if prev_value == Some(res.value) && strictly_inside {
            return Ok(FlowToInfinityResult {
                value: res.value,
                cut: LatticeCut {
                    edges: cut.edge_indices.iter().map(|&i| lattice_edges[i]).collect(),
                    capacity: cut.capacity,
                },
                truncation_radius: r,
                trace,
            });
        }
        prev_value = Some(res.value);
    }
    Err(Error::NoStabilization { trace })
}

/// The glued separating set built from per-face cylinder cutsets and bridges.
#[derive(Debug, Clone)]
pub struct GluedCutset {
    /// τ-minimal cutset of each face cylinder, in face order.
    pub face_cuts: Vec<Vec<LatticeEdge>>,
    /// Bridge edges for each pair of faces sharing a side.
    pub bridges: Vec<(usize, usize, Vec<LatticeEdge>)>,
    /// Extra shell edges; empty for the polytope gluing, used by the
    /// hypersquare covering of a single face.
    pub shell: Vec<LatticeEdge>,
    /// Deduplicated union of all parts.
    pub edges: Vec<LatticeEdge>,
    /// Capacity of the union (shared edges counted once).
    pub capacity: f64,
}

fn shared_side(a: &[V], b: &[V], d: usize) -> Option<Vec<V>> {
    let mut common = Vec::new();
    for &p in a {
        if b.iter().any(|&q| dist(p, q) < 1e-7) {
            common.push(p);
        }
    }
    if common.len() >= d - 1 {
        common.truncate(d - 1);
        Some(common)
    } else {
        None
    }
}

fn dist_to_side(x: V, side: &[V]) -> f64 {
    if side.len() == 1 {
        dist(x, side[0])
    } else {
        point_segment_dist(x, side[0], side[1])
    }
}

/// Builds a separating set for the dilated polytope out of τ-minimal cutsets
/// of the face cylinders `cyl(F_i + ε v_i, ε)` glued with bridge edges around
/// shared face boundaries, then verifies separation by search.
///
/// Its capacity upper-bounds [`phi_to_infinity`] on the same field.
pub fn glued_upper_bound(
    p: &ConvexPolytope,
    n: i64,
    field: &CapacityField,
    eps: f64,
) -> Result<GluedCutset> {
    let d = p.d;
    let zeta = 4.0 * d as f64 / n as f64;
    let body = ConvexBody::Polytope(p.clone());

    let mut cylinders = Vec::new();
    for face in &p.faces {
        let verts: Vec<V> = face
            .vertices
            .iter()
            .map(|v| add(*v, scale(face.normal, eps)))
            .collect();
        let base = BaseFace::new(d, verts, face.normal)?;
        cylinders.push(Cylinder::new(base, eps)?);
    }
    // the face cylinders must have pairwise disjoint interiors
    for i in 0..cylinders.len() {
        for j in i + 1..cylinders.len() {
            let sets = discretize_cylinder(&cylinders[j], n, DiscretizeMode::HalfBoundary)?;
            let nf = n as f64;
            for v in &sets.vertices {
                let x = [v[0] as f64 / nf, v[1] as f64 / nf, v[2] as f64 / nf];
                if cylinders[i].contains(x, -1e-6) && cylinders[j].contains(x, -1e-6) {
                    return Err(Error::DegenerateBody(format!(
                        "face cylinders {i} and {j} overlap; decrease the shell width"
                    )));
                }
            }
        }
    }

    let mut face_cuts = Vec::new();
    for cyl in &cylinders {
        let (_, cut) = tau_cylinder_cut(cyl, n, field)?;
        face_cuts.push(cut.edges);
    }

    let mut bridges = Vec::new();
    for i in 0..p.faces.len() {
        for j in i + 1..p.faces.len() {
            let Some(side) = shared_side(&p.faces[i].vertices, &p.faces[j].vertices, d) else {
                continue;
            };
            let margin = eps + zeta + 2.0 / n as f64;
            let mut lo = [f64::MAX; 3];
            let mut hi = [f64::MIN; 3];
            for v in &side {
                for k in 0..d {
                    lo[k] = lo[k].min(v[k] - margin);
                    hi[k] = hi[k].max(v[k] + margin);
                }
            }
            for k in d..3 {
                lo[k] = 0.0;
                hi[k] = 0.0;
            }
            let edges = edges_in_region(d, lo, hi, n, |x| {
                dist_to_side(x, &side) < eps + zeta && body.distance(x) >= eps - zeta
            });
            bridges.push((i, j, edges));
        }
    }

    let mut union: BTreeSet<LatticeEdge> = BTreeSet::new();
    for cut in &face_cuts {
        union.extend(cut.iter().copied());
    }
    for (_, _, edges) in &bridges {
        union.extend(edges.iter().copied());
    }
    let edges: Vec<LatticeEdge> = union.iter().copied().collect();
    let capacity = edges.iter().map(|e| field.capacity(e)).sum();

    let sources = discretize_body(&body, n)?;
    let reach = body.circumradius() + 2.0 * eps + zeta + 0.5;
    verify_separation(d, n, &sources, &union, reach)?;

    Ok(GluedCutset {
        face_cuts,
        bridges,
        shell: Vec::new(),
        edges,
        capacity,
    })
}

/// Breadth-first check that `blocked` cuts `sources` from the vertex shell of
/// the box of radius `reach` (continuous scale). On failure the witness is an
/// escaping lattice path.
pub fn verify_separation(
    d: usize,
    n: i64,
    sources: &[Pt],
    blocked: &BTreeSet<LatticeEdge>,
    reach: f64,
) -> Result<()> {
    let m = (reach * n as f64).ceil() as i64 + 2;
    let mut parent: HashMap<Pt, Pt> = HashMap::new();
    let mut queue: VecDeque<Pt> = VecDeque::new();
    for &s in sources {
        if parent.insert(s, s).is_none() {
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        if (0..d).any(|k| x[k].abs() >= m) {
            let mut witness = vec![x];
            let mut cur = x;
            while parent[&cur] != cur {
                cur = parent[&cur];
                witness.push(cur);
            }
            witness.reverse();
            return Err(Error::NotSeparating { witness });
        }
        for axis in 0..d {
            for step in [-1i64, 1] {
                let mut y = x;
                y[axis] += step;
                if blocked.contains(&LatticeEdge::between(x, y)) {
                    continue;
                }
                if !parent.contains_key(&y) {
                    parent.insert(y, x);
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(())
}
