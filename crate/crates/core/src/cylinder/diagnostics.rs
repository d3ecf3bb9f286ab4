use serde::Serialize;

use super::energy::{row_theta_energy, rows_energy};
use super::prototype::Prototype;
use super::solve::{solve_punctured_disk, Seed, SolveOutcome, SolveParams};
use super::CylinderSection;
use crate::error::{Error, Result};
use crate::isometry::Isometry;
use crate::npc::{Geometry, MetricTree};

#[derive(Debug, Clone, Serialize)]
pub struct WindowEnergy {
    pub t_start: f64,
    pub t_end: f64,
    pub energy: f64,
    /// `energy - e_rho · length`.
    pub defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyProfile {
    pub e_rho: f64,
    /// Consecutive windows of (roughly) unit length, snapped to grid rows.
    pub windows: Vec<WindowEnergy>,
    /// Least-squares slope of cumulative energy against `t`, over `t ≥ 1`.
    pub slope: f64,
    pub intercept: f64,
    /// Largest window defect.
    pub bounded_defect: f64,
    pub total_energy: f64,
    /// `total_energy - e_rho · T`.
    pub modified_energy: f64,
}

impl EnergyProfile {
    pub fn slope_ratio(&self) -> f64 {
        self.slope / self.e_rho
    }
}

pub fn energy_growth_profile<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    e_rho: f64,
) -> EnergyProfile {
    let grid = s.grid;
    let mut rows = vec![0usize];
    let mut k = 1.0;
    while grid.row_of(k) < grid.n_t && k < grid.t_max + 0.5 {
        let r = grid.row_of(k);
        if r > *rows.last().expect("nonempty") {
            rows.push(r);
        }
        k += 1.0;
    }
    if *rows.last().expect("nonempty") < grid.n_t {
        rows.push(grid.n_t);
    }
    let mut windows = Vec::new();
    let mut cumulative = vec![(0.0, 0.0)];
    let mut total = 0.0;
    for w in rows.windows(2) {
        let e = rows_energy(g, s, w[0], w[1]);
        let (a, b) = (grid.t(w[0]), grid.t(w[1]));
        total += e;
        cumulative.push((b, total));
        windows.push(WindowEnergy {
            t_start: a,
            t_end: b,
            energy: e,
            defect: e - e_rho * (b - a),
        });
    }
    let fit: Vec<(f64, f64)> = cumulative
        .iter()
        .copied()
        .filter(|&(t, _)| t >= 1.0 - 1e-9)
        .collect();
    let (slope, intercept) = least_squares(if fit.len() >= 2 { &fit } else { &cumulative });
    EnergyProfile {
        e_rho,
        bounded_defect: windows
            .iter()
            .map(|w| w.defect)
            .fold(f64::NEG_INFINITY, f64::max),
        windows,
        slope,
        intercept,
        total_energy: total,
        modified_energy: total - e_rho * grid.t_max,
    }
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Smallest per-unit-length defect `(E - e_rho h_t) / h_t` over single row
/// steps. Window energies are additive, so this bounds every window.
pub fn lower_bound_margin<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    e_rho: f64,
) -> f64 {
    let ht = s.grid.h_t();
    (0..s.grid.n_t)
        .map(|i| (rows_energy(g, s, i, i + 1) - e_rho * ht) / ht)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaEnergyReport {
    pub t: Vec<f64>,
    /// `F(t) = ∫ |∂_θ u|² dθ - e_rho` on each row.
    pub f: Vec<f64>,
    pub delta_f: f64,
    /// Largest increase `F(t_{i+1}) - F(t_i)` with `t_i ≥ monotone_from`.
    pub max_increase: f64,
    pub monotone_from: f64,
    pub min_f: f64,
}

impl ThetaEnergyReport {
    pub fn nonincreasing(&self) -> bool {
        self.max_increase <= self.delta_f
    }

    /// `F` at the row nearest `t`.
    pub fn at(&self, t: f64) -> f64 {
        let k = self
            .t
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        self.f[k]
    }

    /// `(b F(b)) / (a F(a))`.
    pub fn decay_ratio(&self, a: f64, b: f64) -> f64 {
        (b * self.at(b)) / (a * self.at(a))
    }
}

/// Slice energies minus `e_rho`, with the slack `δ_F = 3 h² L²` from the
/// largest cell size `h` and discrete Lipschitz constant `L`.
pub fn theta_energy_function<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    e_rho: f64,
    monotone_from: f64,
) -> ThetaEnergyReport {
    let grid = s.grid;
    let t: Vec<f64> = (0..grid.rows()).map(|i| grid.t(i)).collect();
    let f: Vec<f64> = (0..grid.rows())
        .map(|i| row_theta_energy(g, s, i) - e_rho)
        .collect();
    let h = grid.h_t().max(grid.h_theta());
    let l = s.lipschitz(g);
    let mut max_increase = f64::NEG_INFINITY;
    for i in 0..grid.n_t {
        if t[i] >= monotone_from - 1e-12 {
            max_increase = max_increase.max(f[i + 1] - f[i]);
        }
    }
    ThetaEnergyReport {
        min_f: f.iter().copied().fold(f64::INFINITY, f64::min),
        t,
        f,
        delta_f: 3.0 * h * h * l * l,
        max_increase,
        monotone_from,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SublogRow {
    pub eps: f64,
    /// `max (D(t) - ε t)` over the first half of the rows.
    pub c_eps: f64,
    /// `max (D(t) - ε t) - c_eps` over the second half; `≤ 0` passes.
    pub tail_excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SublogReport {
    pub rows: Vec<SublogRow>,
    /// `D(T) / T` with `D(t) = max_θ d²(u(t, θ), ref)`.
    pub final_ratio: f64,
    /// `sup t |∂_t u|²` over row midpoints `t ≥ 1`.
    pub radial_c: f64,
    /// The same supremum restricted to the second half.
    pub radial_c_tail: f64,
}

impl SublogReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.rows
            .iter()
            .all(|r| r.tail_excess <= tol && r.c_eps.is_finite())
            && self.radial_c.is_finite()
    }
}

pub fn sublog_growth_check<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    reference: &G::Point,
    eps: &[f64],
) -> SublogReport {
    let grid = s.grid;
    let d: Vec<f64> = (0..grid.rows())
        .map(|i| {
            (0..grid.n_theta)
                .map(|j| g.distance(s.get(i, j), reference).powi(2))
                .fold(0.0, f64::max)
        })
        .collect();
    let half = grid.rows() / 2;
    let rows = eps
        .iter()
        .map(|&e| {
            let head = (0..half)
                .map(|i| d[i] - e * grid.t(i))
                .fold(f64::NEG_INFINITY, f64::max);
            let tail = (half..grid.rows())
                .map(|i| d[i] - e * grid.t(i))
                .fold(f64::NEG_INFINITY, f64::max);
            SublogRow {
                eps: e,
                c_eps: head,
                tail_excess: tail - head,
            }
        })
        .collect();
    let ht = grid.h_t();
    let (mut c, mut c_tail) = (0.0f64, 0.0f64);
    for i in 0..grid.n_t {
        let t = grid.t(i) + 0.5 * ht;
        if t < 1.0 {
            continue;
        }
        let dt = (0..grid.n_theta)
            .map(|j| (g.distance(s.get(i, j), s.get(i + 1, j)) / ht).powi(2))
            .fold(0.0, f64::max);
        c = c.max(t * dt);
        if i >= half {
            c_tail = c_tail.max(t * dt);
        }
    }
    SublogReport {
        rows,
        final_ratio: d[grid.n_t] / grid.t_max,
        radial_c: c,
        radial_c_tail: c_tail,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub seeds: Vec<Seed>,
    /// Largest pointwise distance on `[0, t0]` over all pairs of solutions.
    pub sup_distance: f64,
    /// Smallest discrete Laplacian of `d²(u_a, u_b)` over interior nodes.
    pub subharmonic_defect: f64,
    /// `3 h² L²`.
    pub slack: f64,
    pub cauchy: Vec<Vec<f64>>,
}

impl UniquenessReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.sup_distance <= tol && self.subharmonic_defect >= -self.slack
    }
}

fn laplacian_min<G: Geometry, I: Isometry<G>>(
    g: &G,
    a: &CylinderSection<G, I>,
    b: &CylinderSection<G, I>,
) -> f64 {
    let grid = a.grid;
    let n = grid.n_theta;
    let f: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(p, q)| g.distance(p, q).powi(2))
        .collect();
    let (ht2, hth2) = (grid.h_t().powi(2), grid.h_theta().powi(2));
    let mut m = f64::INFINITY;
    for i in 1..grid.n_t {
        for j in 0..n {
            let at = |i: usize, j: usize| f[i * n + j];
            let c = at(i, j);
            // d² of two equivariant maps is periodic in θ
            let l = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) / ht2
                + (at(i, (j + 1) % n) - 2.0 * c + at(i, (j + n - 1) % n)) / hth2;
            m = m.min(l);
        }
    }
    m
}

/// Solves from every seed and compares the solutions on `[0, t0]`. Up to
/// `workers` solves run concurrently; results do not depend on the count.
pub fn uniqueness_probe<G, I>(
    proto: &Prototype<G, I>,
    seeds: &[Seed],
    params: &SolveParams,
    workers: usize,
) -> Result<(UniquenessReport, Vec<SolveOutcome<G, I>>)>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    if seeds.len() < 2 {
        return Err(Error::Usage(
            "uniqueness probe needs at least two seeds".into(),
        ));
    }
    let workers = workers.clamp(1, seeds.len());
    let mut results: Vec<Option<Result<SolveOutcome<G, I>>>> =
        (0..seeds.len()).map(|_| None).collect();
    for (chunk_seeds, chunk_out) in seeds.chunks(workers).zip(results.chunks_mut(workers)) {
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk_seeds
                .iter()
                .map(|seed| scope.spawn(move || solve_punctured_disk(proto, seed, params)))
                .collect();
            for (slot, h) in chunk_out.iter_mut().zip(handles) {
                *slot = Some(
                    h.join()
                        .unwrap_or_else(|_| Err(Error::domain("solver thread panicked"))),
                );
            }
        });
    }
    let outcomes = results
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect::<Result<Vec<_>>>()?;
    let report = compare_solutions(&**proto.space(), seeds, &outcomes)?;
    Ok((report, outcomes))
}

/// Pairwise comparison of solutions from different seeds on `[0, t0]`.
pub fn compare_solutions<G: Geometry, I: Isometry<G>>(
    g: &G,
    seeds: &[Seed],
    outcomes: &[SolveOutcome<G, I>],
) -> Result<UniquenessReport> {
    if outcomes.is_empty() {
        return Err(Error::Usage("nothing to compare".into()));
    }
    let mut sup: f64 = 0.0;
    let mut defect = f64::INFINITY;
    let mut lip: f64 = 0.0;
    for (k, a) in outcomes.iter().enumerate() {
        lip = lip.max(a.restricted.lipschitz(g));
        for b in &outcomes[k + 1..] {
            sup = sup.max(a.restricted.sup_distance(g, &b.restricted)?);
            defect = defect.min(laplacian_min(g, &a.restricted, &b.restricted));
        }
    }
    let grid = outcomes[0].restricted.grid;
    let h = grid.h_t().max(grid.h_theta());
    Ok(UniquenessReport {
        seeds: seeds.to_vec(),
        sup_distance: sup,
        subharmonic_defect: defect,
        slack: 3.0 * h * h * lip * lip,
        cauchy: outcomes.iter().map(|o| o.cauchy.clone()).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularSetReport {
    /// `(row, column)` of flagged nodes.
    pub flagged: Vec<(usize, usize)>,
    pub fraction: f64,
    pub branch_vertices: Vec<usize>,
    pub radius: f64,
}

/// Flags nodes whose image lies within one cell size of a vertex of degree
/// at least three.
pub fn singular_set_flags<I: Isometry<MetricTree>>(
    tree: &MetricTree,
    s: &CylinderSection<MetricTree, I>,
) -> SingularSetReport {
    let branch: Vec<usize> = (0..tree.vertex_count())
        .filter(|&v| tree.degree(v) >= 3)
        .collect();
    let points: Vec<_> = branch
        .iter()
        .filter_map(|&v| tree.vertex_point(v))
        .collect();
    let radius = s.grid.h_t().max(s.grid.h_theta());
    let mut flagged = Vec::new();
    for i in 0..s.grid.rows() {
        for j in 0..s.grid.n_theta {
            let p = s.get(i, j);
            if points.iter().any(|v| tree.distance(p, v) <= radius) {
                flagged.push((i, j));
            }
        }
    }
    SingularSetReport {
        fraction: flagged.len() as f64 / s.grid.len() as f64,
        flagged,
        branch_vertices: branch,
        radius,
    }
}
