//! Exact maximum flow / minimum cut on capacitated undirected graphs.
//!
//! Undirected edges are modeled as two opposed arcs, each carrying the full
//! edge capacity. Multi-source / multi-sink instances are contracted through
//! supernodes whose arcs exceed the total capacity, so they can never be
//! saturated. The solver is Dinic's algorithm; the canonical minimum cut is
//! the residual-reachable side of the source, the unique inclusion-minimal
//! source side.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Residual slack below this is treated as saturated.
const EPS: f64 = 1e-12;

/// An undirected capacitated graph with disjoint source and sink vertex sets.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub n_vertices: usize,
    /// `(u, v, t(e))` with `t(e) >= 0`.
    pub edges: Vec<(u32, u32, f64)>,
    pub sources: Vec<u32>,
    pub sinks: Vec<u32>,
}

impl FlowProblem {
    pub fn validate(&self) -> Result<()> {
        for &(u, v, c) in &self.edges {
            if (u as usize) >= self.n_vertices || (v as usize) >= self.n_vertices {
                return Err(Error::Format(format!("edge ({u}, {v}) out of range")));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(Error::Format(format!("capacity {c} on ({u}, {v})")));
            }
        }
        for &s in self.sources.iter().chain(&self.sinks) {
            if (s as usize) >= self.n_vertices {
                return Err(Error::Format(format!("terminal {s} out of range")));
            }
        }
        if self.sources.iter().any(|s| self.sinks.contains(s)) {
            return Err(Error::Format("sources and sinks intersect".into()));
        }
        if self.sources.is_empty() || self.sinks.is_empty() {
            return Err(Error::Format("empty terminal set".into()));
        }
        Ok(())
    }

    pub fn total_capacity(&self) -> f64 {
        self.edges.iter().map(|&(_, _, c)| c).sum()
    }

    /// Plain text export: header `n_vertices n_edges |S| |T|`, one `u v cap`
    /// line per edge, then the source and sink index lists.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "{} {} {} {}",
            self.n_vertices,
            self.edges.len(),
            self.sources.len(),
            self.sinks.len()
        )?;
        for &(u, v, c) in &self.edges {
            writeln!(w, "{u} {v} {c}")?;
        }
        let join = |xs: &[u32]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(w, "{}", join(&self.sources))?;
        writeln!(w, "{}", join(&self.sinks))?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Format("truncated flow problem".into()))?
                .map_err(Error::Io)
        };
        let header = next()?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Format(format!("bad header {header:?}"))))
            .collect::<Result<_>>()?;
        if head.len() != 4 {
            return Err(Error::Format(format!("bad header {header:?}")));
        }
        let (n_vertices, n_edges) = (head[0], head[1]);
        let mut edges = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let line = next()?;
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(Error::Format(format!("bad edge line {line:?}")));
            }
            let u: u32 = tok[0].parse().map_err(|_| Error::Format(line.clone()))?;
            let v: u32 = tok[1].parse().map_err(|_| Error::Format(line.clone()))?;
            let c: f64 = tok[2].parse().map_err(|_| Error::Format(line.clone()))?;
            edges.push((u, v, c));
        }
        let parse_list = |line: String, want: usize| -> Result<Vec<u32>> {
            let xs: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Format(line.clone())))
                .collect::<Result<_>>()?;
            if xs.len() != want {
                return Err(Error::Format(format!(
                    "terminal list has {} entries, expected {want}",
                    xs.len()
                )));
            }
            Ok(xs)
        };
        let sources = parse_list(next()?, head[2])?;
        let sinks = parse_list(next()?, head[3])?;
        let p = FlowProblem {
            n_vertices,
            edges,
            sources,
            sinks,
        };
        p.validate()?;
        Ok(p)
    }
}

/// An exact optimum with its flow assignment and residual marking.
#[derive(Debug, Clone)]
pub struct MaxFlowResult {
    pub value: f64,
    /// Net signed flow per original edge, positive from `u` towards `v`.
    pub edge_flow: Vec<f64>,
    /// Vertices reachable from the sources in the residual graph.
    pub source_side: Vec<bool>,
}

/// An edge set separating the sources from the sinks.
#[derive(Debug, Clone)]
pub struct Cutset {
    /// Indices into `FlowProblem::edges`.
    pub edge_indices: Vec<usize>,
    pub capacity: f64,
}

impl Cutset {
    pub fn cardinality(&self) -> usize {
        self.edge_indices.len()
    }
}

struct Dinic {
    head: Vec<Vec<u32>>,
    to: Vec<u32>,
    cap: Vec<f64>,
    level: Vec<u32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add_arc_pair(&mut self, u: usize, v: usize, cap_uv: f64, cap_vu: f64) -> usize {
        let id = self.to.len();
        self.head[u].push(id as u32);
        self.to.push(v as u32);
        self.cap.push(cap_uv);
        self.head[v].push(id as u32 + 1);
        self.to.push(u as u32);
        self.cap.push(cap_vu);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = u32::MAX);
        let mut q = VecDeque::new();
        self.level[s] = 0;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a as usize] as usize;
                if self.cap[a as usize] > EPS && self.level[v] == u32::MAX {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] != u32::MAX
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: f64) -> f64 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.head[u].len() {
            let a = self.head[u][self.iter[u]] as usize;
            let v = self.to[a] as usize;
            if self.cap[a] > EPS && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, pushed.min(self.cap[a]));
                if d > EPS {
                    self.cap[a] -= d;
                    self.cap[a ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(s, t, f64::INFINITY);
                if pushed <= EPS {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        let mut q = VecDeque::new();
        seen[s] = true;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a as usize] as usize;
                if self.cap[a as usize] > EPS && !seen[v] {
                    seen[v] = true;
                    q.push_back(v);
                }
            }
        }
        seen
    }
}

/// Exact maximum flow. Deterministic for a fixed input.
pub fn max_flow(p: &FlowProblem) -> Result<MaxFlowResult> {
    p.validate()?;
    let total = p.total_capacity();
    if !total.is_finite() {
        return Err(Error::OverflowGuard);
    }
    let n = p.n_vertices;
    let (s, t) = (n, n + 1);
    let mut dinic = Dinic::new(n + 2);
    let super_cap = total + 1.0;
    let mut edge_arcs = Vec::with_capacity(p.edges.len());
    for &(u, v, c) in &p.edges {
        // Symmetric arc pair: both orientations start at capacity t(e),
        // which is the standard undirected reduction.
        edge_arcs.push(dinic.add_arc_pair(u as usize, v as usize, c, c));
    }
    for &src in &p.sources {
        dinic.add_arc_pair(s, src as usize, super_cap, 0.0);
    }
    for &snk in &p.sinks {
        dinic.add_arc_pair(snk as usize, t, super_cap, 0.0);
    }
    let value = dinic.run(s, t);
    if value > total + 0.5 {
        return Err(Error::OverflowGuard);
    }
    let edge_flow = p
        .edges
        .iter()
        .zip(&edge_arcs)
        .map(|(&(_, _, _c), &a)| {
            // Residuals of the pair are (c - f, c + f).
            (dinic.cap[a + 1] - dinic.cap[a]) / 2.0
        })
        .collect();
    let mut source_side = dinic.residual_reachable(s);
    source_side.truncate(n);
    Ok(MaxFlowResult {
        value,
        edge_flow,
        source_side,
    })
}

/// Canonical minimum cut: original edges crossing from the residual-reachable
/// source side to its complement.
pub fn min_cut(p: &FlowProblem, r: &MaxFlowResult) -> Cutset {
    let mut edge_indices = Vec::new();
    let mut capacity = 0.0;
    for (i, &(u, v, c)) in p.edges.iter().enumerate() {
        if r.source_side[u as usize] != r.source_side[v as usize] {
            edge_indices.push(i);
            capacity += c;
        }
    }
    Cutset {
        edge_indices,
        capacity,
    }
}

/// Does removing `cut` (set of edge indices) disconnect every source from
/// every sink? Plain breadth-first search.
pub fn separates(p: &FlowProblem, cut: &[usize]) -> bool {
    let mut removed = vec![false; p.edges.len()];
    for &i in cut {
        removed[i] = true;
    }
    let mut adj = vec![Vec::new(); p.n_vertices];
    for (i, &(u, v, _)) in p.edges.iter().enumerate() {
        if !removed[i] {
            adj[u as usize].push(v as usize);
            adj[v as usize].push(u as usize);
        }
    }
    let mut seen = vec![false; p.n_vertices];
    let mut q = VecDeque::new();
    for &s in &p.sources {
        seen[s as usize] = true;
        q.push_back(s as usize);
    }
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    !p.sinks.iter().any(|&t| seen[t as usize])
}

/// Exhaustive minimum-capacity separating edge set. Test oracle; refuses
/// instances with more than 20 edges.
pub fn brute_force_min_cut(p: &FlowProblem) -> Result<Cutset> {
    p.validate()?;
    let m = p.edges.len();
    if m > 20 {
        return Err(Error::TooLarge(m));
    }
    let mut best: Option<Cutset> = None;
    for mask in 0u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        if !separates(p, &subset) {
            continue;
        }
        let capacity: f64 = subset.iter().map(|&i| p.edges[i].2).sum();
        let better = match &best {
            None => true,
            Some(b) => capacity < b.capacity,
        };
        if better {
            best = Some(Cutset {
                edge_indices: subset,
                capacity,
            });
        }
    }
    best.ok_or_else(|| Error::Format("no separating subset found".into()))
}
