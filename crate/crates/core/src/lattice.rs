//! Finite lattice regions and sampled capacity environments.
//!
//! Coordinates use fixed `[i64; 3]` storage; for `d = 2` the third component
//! is always zero. Edges are identified by their lower endpoint and axis.

use std::io::Write;

use crate::error::{Error, Result};
use crate::law::CapacityLaw;
use crate::rng::edge_uniform;

/// Lattice point. Unused trailing coordinates are zero.
pub type Pt = [i64; 3];

/// Default memory budget for dense environments, in edges.
pub const DEFAULT_EDGE_BUDGET: usize = 50_000_000;

/// Undirected lattice edge between `point` and `point + e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeEdge {
    pub point: Pt,
    pub axis: usize,
}

impl LatticeEdge {
    pub fn endpoints(&self) -> (Pt, Pt) {
        let mut other = self.point;
        other[self.axis] += 1;
        (self.point, other)
    }

    /// Canonical edge between two adjacent points, whichever order given.
    pub fn between(a: Pt, b: Pt) -> Self {
        let mut axis = usize::MAX;
        let mut diff = 0i64;
        for k in 0..3 {
            if a[k] != b[k] {
                debug_assert_eq!(axis, usize::MAX, "points not on a lattice edge");
                axis = k;
                diff = b[k] - a[k];
            }
        }
        debug_assert!(diff.abs() == 1, "points not adjacent");
        if diff > 0 {
            LatticeEdge { point: a, axis }
        } else {
            LatticeEdge { point: b, axis }
        }
    }
}

/// Integer box `[lo_1, hi_1] x ... x [lo_d, hi_d]` on `Z^d`, `d` in {2, 3}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeRegion {
    pub d: usize,
    pub lo: Pt,
    pub hi: Pt,
}

impl LatticeRegion {
    pub fn new(d: usize, lo: Pt, hi: Pt) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        for k in 0..d {
            if lo[k] >= hi[k] {
                return Err(Error::Format(format!(
                    "region bounds lo[{k}] = {} must be < hi[{k}] = {}",
                    lo[k], hi[k]
                )));
            }
        }
        let mut lo = lo;
        let mut hi = hi;
        for k in d..3 {
            lo[k] = 0;
            hi[k] = 0;
        }
        Ok(LatticeRegion { d, lo, hi })
    }

    fn extent(&self, k: usize) -> usize {
        (self.hi[k] - self.lo[k] + 1) as usize
    }

    pub fn vertex_count(&self) -> usize {
        (0..self.d).map(|k| self.extent(k)).product()
    }

    /// Edges with both endpoints in the region, counted per axis.
    pub fn edge_count(&self) -> usize {
        (0..self.d)
            .map(|axis| {
                (0..self.d)
                    .map(|k| if k == axis { self.extent(k) - 1 } else { self.extent(k) })
                    .product::<usize>()
            })
            .sum()
    }

    pub fn contains(&self, p: Pt) -> bool {
        (0..self.d).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
            && (self.d..3).all(|k| p[k] == 0)
    }

    pub fn contains_edge(&self, e: &LatticeEdge) -> bool {
        let (a, b) = e.endpoints();
        self.contains(a) && self.contains(b)
    }

    /// Dense vertex index, row-major with the first axis fastest.
    pub fn vertex_index(&self, p: Pt) -> usize {
        debug_assert!(self.contains(p));
        let mut idx = 0usize;
        for k in (0..self.d).rev() {
            idx = idx * self.extent(k) + (p[k] - self.lo[k]) as usize;
        }
        idx
    }

    pub fn vertex_at(&self, mut idx: usize) -> Pt {
        let mut p = [0i64; 3];
        for k in 0..self.d {
            let n = self.extent(k);
            p[k] = self.lo[k] + (idx % n) as i64;
            idx /= n;
        }
        p
    }

    /// Dense edge index: edges are grouped by axis, each group row-major over
    /// the reduced grid of lower endpoints.
    pub fn edge_index(&self, e: &LatticeEdge) -> usize {
        debug_assert!(self.contains_edge(e));
        let mut offset = 0usize;
        for axis in 0..e.axis {
            offset += (0..self.d)
                .map(|k| if k == axis { self.extent(k) - 1 } else { self.extent(k) })
                .product::<usize>();
        }
        let mut idx = 0usize;
        for k in (0..self.d).rev() {
            let n = if k == e.axis { self.extent(k) - 1 } else { self.extent(k) };
            idx = idx * n + (e.point[k] - self.lo[k]) as usize;
        }
        offset + idx
    }

    pub fn edge_at(&self, mut idx: usize) -> LatticeEdge {
        for axis in 0..self.d {
            let group: usize = (0..self.d)
                .map(|k| if k == axis { self.extent(k) - 1 } else { self.extent(k) })
                .product();
            if idx < group {
                let mut p = [0i64; 3];
                let mut rem = idx;
                for k in 0..self.d {
                    let n = if k == axis { self.extent(k) - 1 } else { self.extent(k) };
                    p[k] = self.lo[k] + (rem % n) as i64;
                    rem /= n;
                }
                return LatticeEdge { point: p, axis };
            }
            idx -= group;
        }
        panic!("edge index out of range");
    }

    pub fn vertices(&self) -> impl Iterator<Item = Pt> + '_ {
        (0..self.vertex_count()).map(move |i| self.vertex_at(i))
    }

    pub fn edges(&self) -> impl Iterator<Item = LatticeEdge> + '_ {
        (0..self.edge_count()).map(move |i| self.edge_at(i))
    }
}

/// Pure capacity assignment: `t(e)` as a function of edge identity.
///
/// Cheap to clone and to query anywhere on the lattice; regions sampled from
/// the same field agree on shared edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityField {
    pub law: CapacityLaw,
    pub master_seed: u64,
    pub replica: u64,
}

impl CapacityField {
    pub fn new(law: CapacityLaw, master_seed: u64, replica: u64) -> Self {
        CapacityField {
            law,
            master_seed,
            replica,
        }
    }

    pub fn capacity(&self, e: &LatticeEdge) -> f64 {
        let u = edge_uniform(self.master_seed, self.replica, &e.point, e.axis);
        self.law.quantile(u)
    }
}

/// A dense, immutable assignment of capacities to every edge of a region.
#[derive(Debug, Clone)]
pub struct Environment {
    pub region: LatticeRegion,
    pub field: CapacityField,
    pub capacities: Vec<f64>,
}

impl Environment {
    pub fn capacity(&self, e: &LatticeEdge) -> f64 {
        if self.region.contains_edge(e) {
            self.capacities[self.region.edge_index(e)]
        } else {
            self.field.capacity(e)
        }
    }

    /// CSV dump `edge_index,lo_coords,axis,capacity` for debugging.
    pub fn dump_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "edge_index,x,y,z,axis,capacity")?;
        for (i, &t) in self.capacities.iter().enumerate() {
            let e = self.region.edge_at(i);
            writeln!(
                w,
                "{i},{},{},{},{},{t}",
                e.point[0], e.point[1], e.point[2], e.axis
            )?;
        }
        Ok(())
    }
}

/// Samples a reproducible environment on a region. Deterministic in
/// `(region, law, master_seed, replica)`.
pub fn sample_environment(
    region: &LatticeRegion,
    law: &CapacityLaw,
    master_seed: u64,
    replica: u64,
) -> Result<Environment> {
    sample_environment_with_budget(region, law, master_seed, replica, DEFAULT_EDGE_BUDGET)
}

pub fn sample_environment_with_budget(
    region: &LatticeRegion,
    law: &CapacityLaw,
    master_seed: u64,
    replica: u64,
    budget: usize,
) -> Result<Environment> {
    law.check()?;
    let edges = region.edge_count();
    if edges > budget {
        return Err(Error::RegionTooLarge { edges, budget });
    }
    let field = CapacityField::new(law.clone(), master_seed, replica);
    let capacities = (0..edges)
        .map(|i| field.capacity(&region.edge_at(i)))
        .collect();
    Ok(Environment {
        region: region.clone(),
        field,
        capacities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region2(lo: [i64; 2], hi: [i64; 2]) -> LatticeRegion {
        LatticeRegion::new(2, [lo[0], lo[1], 0], [hi[0], hi[1], 0]).unwrap()
    }

    #[test]
    fn vertex_and_edge_indexing_are_bijections() {
        let r = LatticeRegion::new(3, [-1, 0, 2], [2, 3, 4], ).unwrap();
        for i in 0..r.vertex_count() {
            assert_eq!(r.vertex_index(r.vertex_at(i)), i);
        }
        for i in 0..r.edge_count() {
            assert_eq!(r.edge_index(&r.edge_at(i)), i);
        }
        // 4 x 4 x 3 vertices
        assert_eq!(r.vertex_count(), 48);
        assert_eq!(r.edge_count(), 3 * 4 * 3 + 4 * 3 * 3 + 4 * 4 * 2);
    }

    #[test]
    fn degenerate_region_rejected() {
        assert!(LatticeRegion::new(2, [0, 0, 0], [0, 3, 0]).is_err());
        assert!(LatticeRegion::new(4, [0; 3], [1; 3]).is_err());
    }

    #[test]
    fn sampling_is_reproducible() {
        let r = region2([0, 0], [10, 10]);
        let law = CapacityLaw::Uniform { a: 0.0, b: 2.0 };
        let a = sample_environment(&r, &law, 99, 3).unwrap();
        let b = sample_environment(&r, &law, 99, 3).unwrap();
        assert_eq!(a.capacities, b.capacities);
        let c = sample_environment(&r, &law, 99, 4).unwrap();
        assert_ne!(a.capacities, c.capacities);
    }

    #[test]
    fn constant_law_fills_constant() {
        let r = region2([0, 0], [5, 5]);
        let env = sample_environment(&r, &CapacityLaw::Constant { c: 2.5 }, 1, 0).unwrap();
        assert!(env.capacities.iter().all(|&t| t == 2.5));
    }

    #[test]
    fn regions_couple_on_shared_edges() {
        let law = CapacityLaw::Uniform { a: 0.0, b: 1.0 };
        let small = sample_environment(&region2([0, 0], [4, 4]), &law, 7, 0).unwrap();
        let large = sample_environment(&region2([-3, -3], [8, 8]), &law, 7, 0).unwrap();
        for i in 0..small.capacities.len() {
            let e = small.region.edge_at(i);
            assert_eq!(small.capacity(&e), large.capacity(&e));
        }
    }

    #[test]
    fn budget_guard() {
        let r = region2([0, 0], [1000, 1000]);
        let err = sample_environment_with_budget(&r, &CapacityLaw::Constant { c: 1.0 }, 0, 0, 100);
        assert!(matches!(err, Err(Error::RegionTooLarge { .. })));
    }

    #[test]
    fn bernoulli_zero_fraction_in_confidence_band() {
        // ~10^4 edges; binomial 3-sigma band around p = 0.5 over 100 seeds.
        let r = region2([0, 0], [70, 70]);
        let law = CapacityLaw::BernoulliScaled { p: 0.5, value: 1.0 };
        let mut hits = 0;
        for seed in 0..100u64 {
            let env = sample_environment(&r, &law, seed, 0).unwrap();
            let zeros = env.capacities.iter().filter(|&&t| t == 0.0).count();
            let frac = zeros as f64 / env.capacities.len() as f64;
            if (0.48..=0.52).contains(&frac) {
                hits += 1;
            }
        }
        assert!(hits >= 95, "only {hits}/100 seeds within band");
    }

    #[test]
    fn empirical_cdf_close_to_law() {
        // Kolmogorov-Smirnov distance below 0.01 on 10^5 draws per kind.
        let laws = [
            CapacityLaw::Uniform { a: 0.5, b: 2.0 },
            CapacityLaw::Exponential { rate: 1.3 },
            CapacityLaw::BernoulliScaled { p: 0.7, value: 2.0 },
            CapacityLaw::FiniteDiscrete {
                atoms: vec![(0.0, 0.2), (1.0, 0.5), (2.5, 0.3)],
            },
        ];
        let r = LatticeRegion::new(2, [0, 0, 0], [316, 158, 0]).unwrap();
        assert!(r.edge_count() >= 100_000);
        for law in laws {
            let env = sample_environment(&r, &law, 12345, 0).unwrap();
            let mut draws = env.capacities.clone();
            draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = draws.len() as f64;
            let mut ks: f64 = 0.0;
            let mut prev_cdf = 0.0;
            let mut lo = 0;
            while lo < draws.len() {
                let v = draws[lo];
                let mut hi = lo;
                while hi < draws.len() && draws[hi] == v {
                    hi += 1;
                }
                // compare the jump at v and the flat stretch just before it;
                // atoms make the law's cdf discontinuous at v
                let f = law.cdf(v);
                ks = ks.max((f - hi as f64 / n).abs());
                ks = ks.max((prev_cdf - lo as f64 / n).abs());
                prev_cdf = f;
                lo = hi;
            }
            assert!(ks < 0.01, "KS distance {ks} too large for {law:?}");
        }
    }

    #[test]
    fn zero_atom_matches_empirical_frequency() {
        let law = CapacityLaw::FiniteDiscrete {
            atoms: vec![(0.0, 0.3), (1.0, 0.7)],
        };
        let r = LatticeRegion::new(2, [0, 0, 0], [316, 158, 0]).unwrap();
        let env = sample_environment(&r, &law, 5, 0).unwrap();
        let n = env.capacities.len() as f64;
        let freq = env.capacities.iter().filter(|&&t| t == 0.0).count() as f64 / n;
        let p = law.atom_at_zero();
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((freq - p).abs() <= 3.0 * sigma);
    }
}
