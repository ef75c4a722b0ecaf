//! Monte Carlo estimation of the flow constant, polytope surface energies,
//! convergence and deviation tables, and minimal-cutset statistics.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{phi_to_infinity, tau_cylinder_cut};
use crate::geometry::body::ConvexBody;
use crate::geometry::discretize::{BaseFace, Cylinder};
use crate::geometry::polytope::{inner_polytope, outer_polytope, ConvexPolytope};
use crate::geometry::vec::{add, dist, l1_norm, norm, scale, tangent_frame, V};
use crate::law::CapacityLaw;
use crate::lattice::CapacityField;

/// Irrational tangent offset for generic base placement: a generically
/// placed unit base dilated by `n` meets exactly `n` lattice columns per
/// tangent axis, so flat-cut counts carry no `n + 1` boundary column.
pub const GENERIC_OFFSET: f64 = 0.10355339059327376; // (sqrt(2) - 1) / 4

/// Unit-area hyperrectangle base normal to `v`, generically placed.
pub fn unit_base(d: usize, v: V) -> Result<BaseFace> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if (norm(v) - 1.0).abs() > 1e-9 {
        return Err(Error::DegenerateBody(format!(
            "direction {v:?} is not a unit vector"
        )));
    }
    let (u1, u2) = tangent_frame(d, v);
    if d == 2 {
        let c = scale(u1, GENERIC_OFFSET);
        BaseFace::new(
            d,
            vec![add(c, scale(u1, -0.5)), add(c, scale(u1, 0.5))],
            v,
        )
    } else {
        let c = add(scale(u1, GENERIC_OFFSET), scale(u2, GENERIC_OFFSET));
        let mut verts = Vec::new();
        for s1 in [-0.5, 0.5] {
            for s2 in [-0.5, 0.5] {
                verts.push(add(c, add(scale(u1, s1), scale(u2, s2))));
            }
        }
        BaseFace::new(d, verts, v)
    }
}

/// Exact flow constant for the constant capacity law: `nu(v) = c * |v|_1`.
pub fn exact_nu_constant(c: f64, v: V) -> f64 {
    c * l1_norm(v)
}

/// A Monte Carlo estimate of one scalar quantity.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRecord {
    pub quantity: String,
    pub direction: Option<V>,
    pub n: i64,
    pub h: f64,
    pub law: CapacityLaw,
    pub replicas: u64,
    pub master_seed: u64,
    pub replica_seeds: Vec<u64>,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Standard error of the mean; absent for fewer than two replicas.
    pub stderr: Option<f64>,
}

fn summarize(samples: &[f64]) -> (f64, f64, Option<f64>) {
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    if samples.len() < 2 {
        return (mean, 0.0, None);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    let std = var.sqrt();
    (mean, std, Some(std / k.sqrt()))
}

/// Estimates the flow constant in direction `v` as the normalized maximal
/// flow between the half boundaries of a unit-base cylinder of height `h`.
pub fn estimate_nu(
    v: V,
    d: usize,
    n: i64,
    h: f64,
    law: &CapacityLaw,
    replicas: u64,
    master_seed: u64,
) -> Result<EstimateRecord> {
    law.check()?;
    let base = unit_base(d, v)?;
    let cyl = Cylinder::new(base, h)?;
    let samples: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|replica| {
            let field = CapacityField::new(law.clone(), master_seed, replica);
            let (tau, _) = tau_cylinder_cut(&cyl, n, &field)?;
            Ok(tau / (n as f64).powi(d as i32 - 1))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, std, stderr) = summarize(&samples);
    Ok(EstimateRecord {
        quantity: "nu".into(),
        direction: Some(v),
        n,
        h,
        law: law.clone(),
        replicas,
        master_seed,
        replica_seeds: (0..replicas).collect(),
        samples,
        mean,
        std,
        stderr,
    })
}

/// Surface energy of a polytope from per-direction flow-constant estimates.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceEnergyReport {
    /// Per face: `(normal, area, nu_hat, contribution)`.
    pub contributions: Vec<(V, f64, f64, f64)>,
    pub total: f64,
    /// First-order propagated standard error; faces sharing one estimate
    /// are fully correlated through it.
    pub stderr: f64,
}

const ANGULAR_TOL: f64 = 1e-9;

/// `I(P) = sum over faces of nu(normal) * area`, matching each face normal
/// to an estimated direction exactly (angular tolerance 1e-9, no
/// interpolation).
pub fn surface_energy(
    p: &ConvexPolytope,
    estimates: &[EstimateRecord],
) -> Result<SurfaceEnergyReport> {
    let mut contributions = Vec::new();
    let mut total = 0.0;
    // area matched to each estimate, for correlated error propagation
    let mut matched_area = vec![0.0f64; estimates.len()];
    for face in &p.faces {
        let idx = estimates
            .iter()
            .position(|e| match e.direction {
                Some(v) => dist(v, face.normal) <= ANGULAR_TOL,
                None => false,
            })
            .ok_or(Error::MissingDirection(face.normal))?;
        let nu = estimates[idx].mean;
        let contribution = nu * face.area;
        contributions.push((face.normal, face.area, nu, contribution));
        total += contribution;
        matched_area[idx] += face.area;
    }
    let mut var = 0.0;
    for (i, e) in estimates.iter().enumerate() {
        if let Some(se) = e.stderr {
            var += (matched_area[i] * se) * (matched_area[i] * se);
        }
    }
    Ok(SurfaceEnergyReport {
        contributions,
        total,
        stderr: var.sqrt(),
    })
}

/// One scale of a convergence experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: i64,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub stderr: Option<f64>,
    /// `|mean - I(P_outer)|`.
    pub gap_outer: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub i_outer: SurfaceEnergyReport,
    pub i_inner: SurfaceEnergyReport,
}

fn nu_estimates_for(
    p: &ConvexPolytope,
    d: usize,
    law: &CapacityLaw,
    nu_n: i64,
    nu_replicas: u64,
    master_seed: u64,
) -> Result<Vec<EstimateRecord>> {
    let mut out: Vec<EstimateRecord> = Vec::new();
    for face in &p.faces {
        if out
            .iter()
            .any(|e| dist(e.direction.unwrap(), face.normal) <= ANGULAR_TOL)
        {
            continue;
        }
        out.push(estimate_nu(
            face.normal,
            d,
            nu_n,
            1.0,
            law,
            nu_replicas,
            master_seed ^ 0x9e3779b97f4a7c15,
        )?);
    }
    Ok(out)
}

/// Normalized flow-to-infinity samples over a schedule of scales, with the
/// surface energies of inner and outer polytope approximations of the body.
pub fn convergence_experiment(
    body: &ConvexBody,
    law: &CapacityLaw,
    n_schedule: &[i64],
    replicas: u64,
    master_seed: u64,
) -> Result<ConvergenceTable> {
    law.check()?;
    body.check_non_degenerate()?;
    let d = body.dim();
    let m = 2 * d;
    let outer = outer_polytope(body, m)?;
    let inner = inner_polytope(body, m)?;
    let nu_n = *n_schedule.iter().max().ok_or(Error::EmptyDiscretization)?;
    let nu_replicas = replicas.clamp(1, 8);
    let outer_est = nu_estimates_for(&outer, d, law, nu_n, nu_replicas, master_seed)?;
    let inner_est = nu_estimates_for(&inner, d, law, nu_n, nu_replicas, master_seed)?;
    let i_outer = surface_energy(&outer, &outer_est)?;
    let i_inner = surface_energy(&inner, &inner_est)?;
    let mut rows = Vec::new();
    for &n in n_schedule {
        let samples: Vec<f64> = (0..replicas)
            .into_par_iter()
            .map(|replica| {
                let field = CapacityField::new(law.clone(), master_seed, replica);
                let res = phi_to_infinity(body, n, &field)?;
                Ok(res.value / (n as f64).powi(d as i32 - 1))
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, std, stderr) = summarize(&samples);
        rows.push(ConvergenceRow {
            n,
            samples,
            mean,
            std,
            stderr,
            gap_outer: (mean - i_outer.total).abs(),
        });
    }
    Ok(ConvergenceTable {
        rows,
        i_outer,
        i_inner,
    })
}

/// One scale of a deviation-tail experiment.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationRow {
    pub n: i64,
    pub hits: u64,
    pub replicas: u64,
    pub frequency: f64,
    /// `ln(frequency) / n^{d-1}` when the frequency is nonzero.
    pub log_frequency_rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationTable {
    pub reference: f64,
    pub relative_eps: f64,
    pub rows: Vec<DeviationRow>,
    /// The underlying per-replica samples.
    pub convergence: ConvergenceTable,
}

/// Empirical frequency of a relative deviation of the normalized flow to
/// infinity from the outer surface energy, per scale.
pub fn deviation_tail(
    body: &ConvexBody,
    law: &CapacityLaw,
    n_schedule: &[i64],
    relative_eps: f64,
    replicas: u64,
    master_seed: u64,
) -> Result<DeviationTable> {
    if relative_eps <= 0.0 {
        return Err(Error::Format("relative_eps must be > 0".into()));
    }
    let table = convergence_experiment(body, law, n_schedule, replicas, master_seed)?;
    let reference = table.i_outer.total;
    let d = body.dim();
    let mut rows = Vec::new();
    for row in &table.rows {
        let hits = row
            .samples
            .iter()
            .filter(|&&x| (x - reference).abs() >= relative_eps * reference)
            .count() as u64;
        let frequency = hits as f64 / replicas as f64;
        rows.push(DeviationRow {
            n: row.n,
            hits,
            replicas,
            frequency,
            log_frequency_rate: (frequency > 0.0)
                .then(|| frequency.ln() / (row.n as f64).powi(d as i32 - 1)),
        });
    }
    Ok(DeviationTable {
        reference,
        relative_eps,
        rows,
        convergence: table,
    })
}

/// Edge classification of one minimal cutset.
#[derive(Debug, Clone, Serialize)]
pub struct CutsetReplica {
    pub replica: u64,
    pub size: usize,
    pub capacity: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutsetStats {
    pub eps: f64,
    pub per_replica: Vec<CutsetReplica>,
    /// Thresholds for the size tail, as multiples of `n^{d-1}`.
    pub beta_grid: Vec<f64>,
    /// Empirical frequency of `|E| >= beta n^{d-1}` per grid entry.
    pub beta_frequency: Vec<f64>,
}

/// Splits capacities at `eps`: positive above, positive at most `eps`, zero.
pub fn classify_capacities(capacities: &[f64], eps: f64) -> (usize, usize, usize) {
    let mut n_plus = 0;
    let mut n_minus = 0;
    let mut n_zero = 0;
    for &t in capacities {
        if t > eps {
            n_plus += 1;
        } else if t > 0.0 {
            n_minus += 1;
        } else {
            n_zero += 1;
        }
    }
    (n_plus, n_minus, n_zero)
}

/// Default size-tail thresholds: multiples of the flat-cut density `2d`.
pub fn beta_grid(d: usize) -> Vec<f64> {
    [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|m| m * 2.0 * d as f64)
        .collect()
}

/// Statistics of the canonical minimal cutsets from the dilated body to
/// infinity across replicas.
pub fn cutset_statistics(
    body: &ConvexBody,
    law: &CapacityLaw,
    n: i64,
    eps: f64,
    replicas: u64,
    master_seed: u64,
) -> Result<CutsetStats> {
    if eps <= 0.0 {
        return Err(Error::Format("eps must be > 0".into()));
    }
    law.check()?;
    let d = body.dim();
    let per_replica: Vec<CutsetReplica> = (0..replicas)
        .into_par_iter()
        .map(|replica| {
            let field = CapacityField::new(law.clone(), master_seed, replica);
            let res = phi_to_infinity(body, n, &field)?;
            let caps: Vec<f64> = res.cut.edges.iter().map(|e| field.capacity(e)).collect();
            let (n_plus, n_minus, n_zero) = classify_capacities(&caps, eps);
            Ok(CutsetReplica {
                replica,
                size: res.cut.edges.len(),
                capacity: res.cut.capacity,
                n_plus,
                n_minus,
                n_zero,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = beta_grid(d);
    let scale = (n as f64).powi(d as i32 - 1);
    let beta_frequency = grid
        .iter()
        .map(|beta| {
            per_replica
                .iter()
                .filter(|r| r.size as f64 >= beta * scale)
                .count() as f64
                / replicas as f64
        })
        .collect();
    Ok(CutsetStats {
        eps,
        per_replica,
        beta_grid: grid,
        beta_frequency,
    })
}
