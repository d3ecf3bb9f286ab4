use rand::Rng;
use serde::Serialize;

use super::diagnostics::lower_bound_margin;
use super::prototype::Prototype;
use super::relax::{relax_dirichlet, RelaxParams};
use super::{CylinderGrid, CylinderSection};
use crate::error::{Error, Result};
use crate::isometry::{min_energy_constant, Isometry};
use crate::npc::Geometry;
use crate::rng::task_rng;

/// Initial guess for the first (shortest) cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seed {
    Prototype,
    /// Every interior node pushed towards an independent random point by a
    /// random fraction of at most `amplitude`.
    Perturbed {
        seed: u64,
        amplitude: f64,
    },
    /// A single point in the middle, bridged to both end rows over unit length.
    ConstantBridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveParams {
    pub t0: f64,
    pub doublings: u32,
    pub n_theta: usize,
    /// Target `h_t / h_θ`.
    pub aspect: f64,
    pub relax: RelaxParams,
    /// Required sup distance on `[0, t0]` between the last two levels.
    pub cauchy_tol: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            t0: 10.0,
            doublings: 2,
            n_theta: 64,
            aspect: 1.0,
            relax: RelaxParams::default(),
            cauchy_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub t_max: f64,
    pub sweeps: usize,
    pub energy: f64,
    pub max_movement: f64,
    pub omega: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome<G: Geometry, I> {
    /// Solution on the longest cylinder.
    pub section: CylinderSection<G, I>,
    /// The same solution restricted to `[0, t0]`.
    pub restricted: CylinderSection<G, I>,
    pub levels: Vec<LevelReport>,
    /// Sup distance on `[0, t0]` between consecutive levels.
    pub cauchy: Vec<f64>,
    pub energy_histories: Vec<Vec<f64>>,
    /// Smallest per-unit-length window defect on each level.
    pub lower_bound_margins: Vec<f64>,
    pub e_rho: f64,
}

fn seeded<G, I>(proto: &Prototype<G, I>, grid: CylinderGrid, seed: &Seed) -> CylinderSection<G, I>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    let g = &**proto.space();
    let mut s = proto.section(grid);
    let last = grid.n_t;
    match *seed {
        Seed::Prototype => {}
        Seed::Perturbed { seed, amplitude } => {
            let mut rng = task_rng(seed, 0);
            for i in 1..last {
                for j in 0..grid.n_theta {
                    let k = s.index(i, j);
                    let target = g.sample_point(&mut rng, 1.0);
                    let f = amplitude * rng.gen::<f64>();
                    s.values[k] = g.geodesic(&s.values[k], &target, f.clamp(0.0, 1.0));
                }
            }
        }
        Seed::ConstantBridge => {
            let centre = proto.value(0.5 * grid.t_max, 0.0);
            let t_max = grid.t_max;
            for i in 1..last {
                let t = grid.t(i);
                for j in 0..grid.n_theta {
                    let th = grid.theta(j);
                    let v = if t < 1.0 {
                        g.geodesic(&(proto.boundary())(th), &centre, t)
                    } else if t > t_max - 1.0 {
                        g.geodesic(&centre, &proto.slice(t_max, th), t - (t_max - 1.0))
                    } else {
                        centre.clone()
                    };
                    let k = s.index(i, j);
                    s.values[k] = v;
                }
            }
        }
    }
    s
}

/// Harmonic section over the punctured disk, approximated by Dirichlet
/// problems on `[0, T]` with `T = t0 · 2^k`: the `t = 0` row is the boundary
/// loop and the far row is the prototype slice. Each level is warm-started
/// from the previous one, and successive solutions must agree on `[0, t0]`
/// to `cauchy_tol`.
pub fn solve_punctured_disk<G, I>(
    proto: &Prototype<G, I>,
    seed: &Seed,
    params: &SolveParams,
) -> Result<SolveOutcome<G, I>>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    let g = &**proto.space();
    let base = CylinderGrid::with_aspect(params.t0, params.n_theta, params.aspect)?;
    let mut levels = Vec::new();
    let mut histories = Vec::new();
    let mut cauchy = Vec::new();
    let mut margins = Vec::new();
    let e_rho = min_energy_constant(proto.twist().translation_length(g));
    let mut previous: Option<CylinderSection<G, I>> = None;
    for k in 0..=params.doublings {
        let scale = 1usize << k;
        let grid = CylinderGrid::new(base.t_max * scale as f64, base.n_t * scale, base.n_theta)?;
        let init = match &previous {
            None => seeded(proto, grid, seed),
            Some(prev) => {
                let mut s = proto.section(grid);
                s.values[..prev.values.len()].clone_from_slice(&prev.values);
                s
            }
        };
        let out = relax_dirichlet(g, init, &params.relax)?;
        levels.push(LevelReport {
            t_max: grid.t_max,
            sweeps: out.sweeps,
            energy: *out
                .energy_history
                .last()
                .expect("history starts with the initial energy"),
            max_movement: out.max_movement,
            omega: out.omega,
        });
        histories.push(out.energy_history);
        margins.push(lower_bound_margin(g, &out.section, e_rho));
        if let Some(prev) = &previous {
            cauchy.push(
                prev.restrict(base.t_max)
                    .sup_distance(g, &out.section.restrict(base.t_max))?,
            );
        }
        previous = Some(out.section);
    }
    let section = previous.expect("at least one level");
    if let Some(&last) = cauchy.last() {
        if last > params.cauchy_tol {
            return Err(Error::Convergence {
                message: format!(
                    "solutions on [0, {}] still move by {last:.3e} after {} doublings",
                    params.t0, params.doublings
                ),
                history: cauchy,
            });
        }
    }
    Ok(SolveOutcome {
        restricted: section.restrict(base.t_max),
        section,
        levels,
        cauchy,
        energy_histories: histories,
        lower_bound_margins: margins,
        e_rho,
    })
}
