//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;

use percoflow::config::{parse_config, ExperimentKind};
use percoflow::estimators::{classify_capacities, cutset_statistics, estimate_nu};
use percoflow::functionals::{glued_upper_bound, phi_to_infinity};
use percoflow::geometry::body::ConvexBody;
use percoflow::geometry::discretize::{
    discretize_cylinder, edge_boundary, BaseFace, Cylinder, DiscretizeMode,
};
use percoflow::geometry::polytope::{direction_set, wulff_crystal};
use percoflow::geometry::vec::GEOM_TOL;
use percoflow::law::CapacityLaw;
use percoflow::lattice::{CapacityField, LatticeEdge};
use percoflow::maxflow::{brute_force_min_cut, max_flow, min_cut, separates, FlowProblem};
use percoflow::rng::SplitMix;
use percoflow::runner::run;

fn report(num: u32, ok: bool, details: &str) {
    println!(
        "criterion {num}: {} — {details}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {num} failed: {details}");
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let r = self.find(self.0[x]);
            self.0[x] = r;
        }
        self.0[x]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

#[test]
fn criterion_1_max_flow_matches_brute_force() {
    let t0 = Instant::now();
    let mut rng = SplitMix::new(0xACCE01);
    let mut done = 0;
    while done < 1000 {
        let nv = 2 + rng.next_below(4) as usize;
        let ne = 1 + rng.next_below(8) as usize;
        let mut edges = Vec::new();
        for _ in 0..ne {
            let u = rng.next_below(nv as u64) as u32;
            let mut v = rng.next_below(nv as u64) as u32;
            while v == u {
                v = rng.next_below(nv as u64) as u32;
            }
            edges.push((u, v, rng.next_below(4) as f64));
        }
        let mut ds = DisjointSet((0..nv).collect());
        for &(u, v, _) in &edges {
            ds.union(u as usize, v as usize);
        }
        let root = ds.find(0);
        if (1..nv).any(|x| ds.find(x) != root) {
            continue;
        }
        let p = FlowProblem {
            n_vertices: nv,
            edges,
            sources: vec![0],
            sinks: vec![nv as u32 - 1],
        };
        let res = max_flow(&p).unwrap();
        let oracle = brute_force_min_cut(&p).unwrap();
        assert_eq!(
            res.value, oracle.capacity,
            "instance {done}: flow {} vs brute-force cut {}",
            res.value, oracle.capacity
        );
        let cut = min_cut(&p, &res);
        assert!(separates(&p, &cut.edge_indices), "instance {done}: cut does not separate");
        assert!((cut.capacity - res.value).abs() < 1e-12);
        done += 1;
    }
    let elapsed = t0.elapsed();
    report(
        1,
        elapsed.as_secs_f64() < 10.0,
        &format!("1000/1000 exact matches with verified separation in {elapsed:?}"),
    );
}

#[test]
fn criterion_2_discretizations_match_literal_definitions() {
    // literal definition-chasing enumeration over a wide scan window
    fn scan_cylinder(
        cyl: &Cylinder,
        n: i64,
        mode: DiscretizeMode,
        range: i64,
    ) -> (Vec<[i64; 3]>, Vec<[i64; 3]>) {
        let d = cyl.base.d;
        let top = cyl.base.translated(cyl.height);
        let bottom = cyl.base.translated(-cyl.height);
        let mut src = Vec::new();
        let mut snk = Vec::new();
        let zs: Vec<i64> = if d == 3 { (-range..=range).collect() } else { vec![0] };
        for x in -range..=range {
            for y in -range..=range {
                for &z in &zs {
                    let p = [x, y, z];
                    let pc = [
                        x as f64 / n as f64,
                        y as f64 / n as f64,
                        z as f64 / n as f64,
                    ];
                    if !cyl.contains(pc, GEOM_TOL) {
                        continue;
                    }
                    let mut in_src = false;
                    let mut in_snk = false;
                    let mut outside_neighbor = false;
                    for axis in 0..d {
                        for step in [-1i64, 1] {
                            let mut q = p;
                            q[axis] += step;
                            let qc = [
                                q[0] as f64 / n as f64,
                                q[1] as f64 / n as f64,
                                q[2] as f64 / n as f64,
                            ];
                            if cyl.contains(qc, GEOM_TOL) {
                                continue;
                            }
                            outside_neighbor = true;
                            if mode == DiscretizeMode::TopBottom {
                                if percoflow::geometry::vec::segment_planar_set_dist(
                                    pc, qc, &top, cyl.base.normal,
                                ) <= GEOM_TOL
                                {
                                    in_src = true;
                                }
                                if percoflow::geometry::vec::segment_planar_set_dist(
                                    pc, qc, &bottom, cyl.base.normal,
                                ) <= GEOM_TOL
                                {
                                    in_snk = true;
                                }
                            }
                        }
                    }
                    if mode == DiscretizeMode::HalfBoundary && outside_neighbor {
                        let t = cyl.axis_coord(pc);
                        if t > GEOM_TOL {
                            in_src = true;
                        } else if t < -GEOM_TOL {
                            in_snk = true;
                        }
                    }
                    if in_src {
                        src.push(p);
                    }
                    if in_snk {
                        snk.push(p);
                    }
                }
            }
        }
        (src, snk)
    }

    fn scan_boundary(body: &ConvexBody, n: i64, range: i64) -> HashSet<LatticeEdge> {
        let d = body.dim();
        let mut out = HashSet::new();
        let zs: Vec<i64> = if d == 3 { (-range..=range).collect() } else { vec![0] };
        for x in -range..=range {
            for y in -range..=range {
                for &z in &zs {
                    let p = [x, y, z];
                    let pc = [
                        x as f64 / n as f64,
                        y as f64 / n as f64,
                        z as f64 / n as f64,
                    ];
                    if !body.contains(pc, GEOM_TOL) {
                        continue;
                    }
                    for axis in 0..d {
                        for step in [-1i64, 1] {
                            let mut q = p;
                            q[axis] += step;
                            let qc = [
                                q[0] as f64 / n as f64,
                                q[1] as f64 / n as f64,
                                q[2] as f64 / n as f64,
                            ];
                            if !body.contains(qc, GEOM_TOL) {
                                out.insert(LatticeEdge::between(p, q));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    let seg = |o: f64, len: f64| {
        BaseFace::new(
            2,
            vec![[o, 0.0, 0.0], [o + len, 0.0, 0.0]],
            [0.0, 1.0, 0.0],
        )
        .unwrap()
    };
    let mut cyl_cases: Vec<(Cylinder, i64, DiscretizeMode)> = Vec::new();
    for (o, len, h, n) in [
        (0.0, 1.0, 1.0, 2),
        (0.3, 1.0, 0.75, 3),
        (-0.2, 1.4, 1.0, 4),
        (0.1, 0.8, 0.6, 5),
        (0.0, 1.0, 1.0, 8),
        (0.25, 1.0, 1.25, 6),
    ] {
        cyl_cases.push((
            Cylinder::new(seg(o, len), h).unwrap(),
            n,
            DiscretizeMode::TopBottom,
        ));
    }
    for (o, len, h, n) in [
        (0.0, 1.0, 1.0, 2),
        (0.3, 1.0, 0.75, 4),
        (-0.4, 1.2, 0.9, 5),
        (0.2, 0.9, 1.1, 7),
        (0.0, 1.3, 0.8, 8),
    ] {
        cyl_cases.push((
            Cylinder::new(seg(o, len), h).unwrap(),
            n,
            DiscretizeMode::HalfBoundary,
        ));
    }
    // one tilted base and one three-dimensional base
    let s = 1.0 / 2f64.sqrt();
    let diag = percoflow::estimators::unit_base(2, [s, s, 0.0]).unwrap();
    cyl_cases.push((
        Cylinder::new(diag, 0.8).unwrap(),
        4,
        DiscretizeMode::TopBottom,
    ));
    let base3 = percoflow::estimators::unit_base(3, [0.0, 0.0, 1.0]).unwrap();
    cyl_cases.push((
        Cylinder::new(base3.clone(), 0.7).unwrap(),
        3,
        DiscretizeMode::TopBottom,
    ));
    cyl_cases.push((
        Cylinder::new(base3, 0.7).unwrap(),
        2,
        DiscretizeMode::HalfBoundary,
    ));

    let mut checked = 0;
    for (cyl, n, mode) in &cyl_cases {
        let sets = discretize_cylinder(cyl, *n, *mode).unwrap();
        let range = ((cyl.bounding_box().1[0].abs().max(cyl.bounding_box().1[1].abs()) + 2.0)
            * *n as f64) as i64
            + 3;
        let range = range.max((*n).abs() * 3 + 3).min(40);
        let (mut src, mut snk) = scan_cylinder(cyl, *n, *mode, range);
        src.sort_unstable();
        snk.sort_unstable();
        assert_eq!(sets.source, src, "source mismatch on case {checked}");
        assert_eq!(sets.sink, snk, "sink mismatch on case {checked}");
        checked += 1;
    }

    let bodies: Vec<(ConvexBody, i64)> = vec![
        (ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2), 4),
        (ConvexBody::box_at([-0.5, -0.3, 0.0], [0.7, 0.9, 0.0], 2), 5),
        (ConvexBody::ball([0.0; 3], 0.4, 2), 1),
        (ConvexBody::ball([0.2, -0.1, 0.0], 1.1, 2), 6),
        (ConvexBody::ball([0.0; 3], 0.9, 3), 3),
        (
            ConvexBody::box_at([-0.4, -0.4, -0.4], [0.4, 0.4, 0.4], 3),
            4,
        ),
    ];
    for (body, n) in &bodies {
        let got: HashSet<LatticeEdge> = edge_boundary(body, *n).unwrap().into_iter().collect();
        let (_, hi) = body.bounding_box();
        let range = ((hi[0].abs().max(hi[1].abs()) + 2.0) * *n as f64) as i64 + 3;
        let want = scan_boundary(body, *n, range.min(20));
        assert_eq!(got, want, "edge boundary mismatch on case {checked}");
        checked += 1;
    }
    report(
        2,
        checked == 20,
        &format!("{checked}/20 instances equal the definition-chasing enumeration"),
    );
}

#[test]
fn criterion_3_flat_cut_law() {
    let t0 = Instant::now();
    let s = 1.0 / 2f64.sqrt();
    let mut ok = true;
    let mut notes = Vec::new();
    for c in [1.0, 2.5] {
        let law = CapacityLaw::Constant { c };
        let axis = estimate_nu([1.0, 0.0, 0.0], 2, 32, 1.0, &law, 2, 0).unwrap();
        let exact = (axis.mean - c).abs() < 1e-9 && axis.std == 0.0;
        let diag = estimate_nu([s, s, 0.0], 2, 32, 1.0, &law, 2, 0).unwrap();
        let target = c * 2f64.sqrt();
        let rel = (diag.mean - target).abs() / target;
        ok &= exact && rel <= 0.05;
        notes.push(format!(
            "c={c}: axis {} (exact {exact}), diagonal {:.4} vs {target:.4} (rel {rel:.4})",
            axis.mean, diag.mean
        ));
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 60.0;
    report(3, ok, &format!("{} in {elapsed:?}", notes.join("; ")));
}

#[test]
fn criterion_4_constant_law_convergence() {
    let t0 = Instant::now();
    let body = ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2);
    let field = CapacityField::new(CapacityLaw::Constant { c: 1.0 }, 0, 0);
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [4i64, 8, 16, 32] {
        let res = phi_to_infinity(&body, n, &field).unwrap();
        let boundary = edge_boundary(&body, n).unwrap().len() as f64;
        let normalized = res.value / n as f64;
        let exact = (normalized - boundary / n as f64).abs() < 1e-9;
        let gap_ok = (normalized - 4.0).abs() <= 8.0 / n as f64 + 1e-9;
        ok &= exact && gap_ok;
        notes.push(format!("n={n}: {normalized} (|∂_e|/n = {})", boundary / n as f64));
    }
    let elapsed = t0.elapsed();
    ok &= elapsed.as_secs_f64() < 60.0;
    report(4, ok, &format!("{} in {elapsed:?}", notes.join("; ")));
}

#[test]
fn criterion_5_stochastic_convergence() {
    let t0 = Instant::now();
    let body = ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2);
    let law = CapacityLaw::BernoulliScaled { p: 0.9, value: 1.0 };
    let replicas = 50u64;
    let seed = 42u64;
    let mut cvs = Vec::new();
    let mut mean64 = 0.0;
    for n in [8i64, 16, 32, 64] {
        let samples: Vec<f64> = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let field = CapacityField::new(law.clone(), seed, r);
                phi_to_infinity(&body, n, &field).unwrap().value / n as f64
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / replicas as f64;
        let std = (samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (replicas - 1) as f64)
            .sqrt();
        cvs.push((n, std / mean));
        if n == 64 {
            mean64 = mean;
        }
    }
    let decreasing = cvs.windows(2).all(|w| w[0].1 > w[1].1);
    let nu = estimate_nu([1.0, 0.0, 0.0], 2, 64, 1.0, &law, replicas, seed).unwrap();
    let target = 4.0 * nu.mean;
    let rel = (mean64 - target).abs() / target;
    let elapsed = t0.elapsed();
    let ok = decreasing && rel <= 0.10 && elapsed.as_secs_f64() <= 900.0;
    report(
        5,
        ok,
        &format!(
            "cv along schedule {:?} (strictly decreasing {decreasing}); mean(64) = {mean64:.4} vs 4ν̂(e1) = {target:.4} (rel {rel:.4}) in {elapsed:?}",
            cvs.iter().map(|c| (c.0, (c.1 * 1e4).round() / 1e4)).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_6_cutset_bound_invariants() {
    let body = ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2);
    let outer = ConvexBody::box_at([-0.25, -0.25, 0.0], [1.25, 1.25, 0.0], 2);
    let law = CapacityLaw::BernoulliScaled { p: 0.7, value: 1.0 };
    let n = 32i64;
    let eps = 0.5;
    let seed = 7u64;
    let boundary = edge_boundary(&body, n).unwrap();
    let checks: Vec<(bool, bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|r| {
            let field = CapacityField::new(law.clone(), seed, r);
            let res = phi_to_infinity(&body, n, &field).unwrap();
            let v_boundary: f64 = boundary.iter().map(|e| field.capacity(e)).sum();
            let caps: Vec<f64> = res.cut.edges.iter().map(|e| field.capacity(e)).collect();
            let (n_plus, _, _) = classify_capacities(&caps, eps);
            let res_outer = phi_to_infinity(&outer, n, &field).unwrap();
            (
                res.cut.capacity <= v_boundary + 1e-9,
                eps * n_plus as f64 <= res.cut.capacity + 1e-9,
                res.value <= res_outer.value + 1e-9,
            )
        })
        .collect();
    let a = checks.iter().filter(|c| c.0).count();
    let b = checks.iter().filter(|c| c.1).count();
    let c = checks.iter().filter(|c| c.2).count();
    report(
        6,
        a == 100 && b == 100 && c == 100,
        &format!("V(E) ≤ V(∂_e) {a}/100; ε·N⁺ ≤ V(E) {b}/100; monotone under inclusion {c}/100"),
    );
}

#[test]
fn criterion_7_glued_upper_bound() {
    let square = wulff_crystal(&|_| 1.0, &direction_set(2, 4)).unwrap();
    let body = ConvexBody::Polytope(square.clone());
    let law = CapacityLaw::BernoulliScaled { p: 0.9, value: 1.0 };
    let n = 16i64;
    let hits: Vec<bool> = (0..20u64)
        .into_par_iter()
        .map(|r| {
            let field = CapacityField::new(law.clone(), 1234, r);
            // separation of the glued set is verified inside the builder
            let glued = glued_upper_bound(&square, n, &field, 0.4).unwrap();
            let inf = phi_to_infinity(&body, n, &field).unwrap();
            inf.value <= glued.capacity + 1e-9
        })
        .collect();
    let count = hits.iter().filter(|&&b| b).count();
    report(
        7,
        count == 20,
        &format!("glued capacity ≥ flow to infinity with verified separation in {count}/20"),
    );
}

#[test]
fn criterion_8_cutset_size_statistics() {
    let t0 = Instant::now();
    let body = ConvexBody::box_at([0.0; 3], [1.0, 1.0, 0.0], 2);
    let law = CapacityLaw::BernoulliScaled { p: 0.7, value: 1.0 };
    let replicas = 200u64;
    let mut per_n = Vec::new();
    for n in [16i64, 32] {
        let stats = cutset_statistics(&body, &law, n, 0.5, replicas, 99).unwrap();
        // histogram of |E|/n over the replicas
        let mut hist = [0usize; 12];
        for r in &stats.per_replica {
            let bucket = ((r.size as f64 / n as f64).floor() as usize).min(11);
            hist[bucket] += 1;
        }
        println!("criterion 8: n={n} |E|/n histogram (bucket=1): {hist:?}");
        let monotone_beta = stats.beta_frequency.windows(2).all(|w| w[0] >= w[1]);
        let top_beta_zero = stats.beta_frequency[3] == 0.0;
        per_n.push((stats.beta_frequency.clone(), monotone_beta, top_beta_zero));
    }
    let not_increasing = per_n[0]
        .0
        .iter()
        .zip(&per_n[1].0)
        .filter(|(f16, f32)| f32 <= f16)
        .count();
    let elapsed = t0.elapsed();
    let ok = per_n.iter().all(|p| p.1 && p.2)
        && not_increasing >= 3
        && elapsed.as_secs_f64() <= 1200.0;
    report(
        8,
        ok,
        &format!(
            "freq(|E| ≥ 32n) = 0/200 at both scales; β-monotone; {not_increasing}/4 bins non-increasing from n=16 to n=32; β-freqs n=16 {:?}, n=32 {:?} in {elapsed:?}",
            per_n[0].0, per_n[1].0
        ),
    );
}

#[test]
fn criterion_9_determinism_across_worker_counts() {
    let cfg = parse_config(
        ExperimentKind::Converge,
        r#"
n = [8, 16, 32, 64]
replicas = 50
master_seed = 42
[body]
kind = "box"
lo = [0.0, 0.0]
hi = [1.0, 1.0]
[law]
kind = "bernoulli_scaled"
p = 0.9
value = 1.0
"#,
    )
    .unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d8 = tempfile::tempdir().unwrap();
    let o1 = run(&cfg, d1.path(), Some(1)).unwrap();
    let o8 = run(&cfg, d8.path(), Some(8)).unwrap();
    let csv1 = std::fs::read(&o1.csv_path).unwrap();
    let csv8 = std::fs::read(&o8.csv_path).unwrap();
    report(
        9,
        csv1 == csv8,
        &format!(
            "CSV bytes identical across workers 1 and 8 ({} bytes)",
            csv1.len()
        ),
    );
}
