use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use super::energy::rows_energy;
use super::CylinderSection;
use crate::error::Error;
use crate::isometry::Isometry;
use crate::npc::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxParams {
    /// Stop once no node moves further than this in one sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Over-relaxation factor; `None` picks the optimal linear SOR value.
    pub omega: Option<f64>,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 200_000,
            omega: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxOutcome<G: Geometry, I> {
    pub section: CylinderSection<G, I>,
    pub sweeps: usize,
    /// Total energy after each sweep, starting with the initial energy.
    pub energy_history: Vec<f64>,
    pub max_movement: f64,
    pub omega: f64,
}

/// Relaxation that hit the sweep limit; keeps the last iterate.
pub struct RelaxFailure<G: Geometry, I> {
    pub section: CylinderSection<G, I>,
    pub energy_history: Vec<f64>,
    pub max_movement: f64,
}

impl<G: Geometry, I> fmt::Debug for RelaxFailure<G, I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RelaxFailure")
            .field("sweeps", &self.energy_history.len().saturating_sub(1))
            .field("max_movement", &self.max_movement)
            .finish()
    }
}

impl<G: Geometry, I> From<RelaxFailure<G, I>> for Error {
    fn from(f: RelaxFailure<G, I>) -> Self {
        Error::Convergence {
            message: format!(
                "relaxation stopped after {} sweeps with max movement {:.3e}",
                f.energy_history.len().saturating_sub(1),
                f.max_movement
            ),
            history: f.energy_history,
        }
    }
}

/// Optimal SOR factor for the weighted five-point Laplacian with Dirichlet
/// rows and periodic columns; the slowest mode is constant in `θ`.
pub(crate) fn optimal_omega(n_t: usize, c_t: f64, c_theta: f64) -> f64 {
    let mu = 1.0 - c_t * (1.0 - (PI / n_t as f64).cos()) / (c_t + c_theta);
    2.0 / (1.0 + (1.0 - mu * mu).max(0.0).sqrt())
}

fn local_cost<G: Geometry>(g: &G, x: &G::Point, nbrs: &[G::Point; 4], w: &[f64; 4]) -> f64 {
    nbrs.iter()
        .zip(w)
        .map(|(p, w)| w * g.distance(x, p).powi(2))
        .sum()
}

/// Red-black Gauss–Seidel relaxation of the interior rows with the first and
/// last rows held fixed. Each node moves towards the weighted barycenter of
/// its four neighbours (over-relaxed by `ω`); a move that raises the local
/// energy is retried with smaller factors, so the total energy never
/// increases.
pub fn relax_dirichlet<G: Geometry, I: Isometry<G>>(
    g: &G,
    mut s: CylinderSection<G, I>,
    params: &RelaxParams,
) -> Result<RelaxOutcome<G, I>, RelaxFailure<G, I>> {
    let grid = s.grid;
    let (n_t, n) = (grid.n_t, grid.n_theta);
    let (ht, hth) = (grid.h_t(), grid.h_theta());
    let (c_t, c_th) = (hth / ht, ht / hth);
    let total = 2.0 * (c_t + c_th);
    let w = [c_t / total, c_t / total, c_th / total, c_th / total];
    let omega = params
        .omega
        .unwrap_or_else(|| optimal_omega(n_t, c_t, c_th));

    let mut energy = rows_energy(g, &s, 0, n_t);
    let mut history = vec![energy];
    let mut movement = 0.0;
    if n_t < 2 {
        return Ok(RelaxOutcome {
            section: s,
            sweeps: 0,
            energy_history: history,
            max_movement: 0.0,
            omega,
        });
    }
    for sweep in 1..=params.max_sweeps {
        movement = 0.0f64;
        for color in 0..2 {
            for i in 1..n_t {
                let start = (i + color) % 2;
                for j in (start..n).step_by(2) {
                    let k = s.index(i, j);
                    let left = if j == 0 {
                        s.twist.apply_inverse(g, s.get(i, n - 1))
                    } else {
                        s.get(i, j - 1).clone()
                    };
                    let right = if j + 1 == n {
                        s.twist.apply(g, s.get(i, 0))
                    } else {
                        s.get(i, j + 1).clone()
                    };
                    let nbrs = [
                        s.get(i - 1, j).clone(),
                        s.get(i + 1, j).clone(),
                        left,
                        right,
                    ];
                    let x = &s.values[k];
                    let before = local_cost(g, x, &nbrs, &w);
                    let mut om = omega;
                    loop {
                        let y = g.relax_update(x, &nbrs, &w, om);
                        let after = local_cost(g, &y, &nbrs, &w);
                        if after <= before {
                            movement = movement.max(g.distance(x, &y));
                            energy += total * (after - before);
                            s.values[k] = y;
                            break;
                        }
                        if om > 1.0 {
                            om = 1.0;
                        } else if om > 0.125 {
                            om *= 0.5;
                        } else {
                            break;
                        }
                    }
                }
            }
        }
        history.push(energy);
        if movement < params.tol {
            return Ok(RelaxOutcome {
                section: s,
                sweeps: sweep,
                energy_history: history,
                max_movement: movement,
                omega,
            });
        }
    }
    Err(RelaxFailure {
        section: s,
        energy_history: history,
        max_movement: movement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::{discrete_energy, CylinderGrid};
    use crate::isometry::{Mobius, RigidMotion};
    use crate::npc::{Euclidean, HyperbolicDisk};
    use std::f64::consts::TAU;

    #[test]
    fn helix_is_a_fixed_point() {
        let m = Mobius::translation(1.0);
        let grid = CylinderGrid::with_aspect(4.0, 16, 1.0).unwrap();
        let s = CylinderSection::from_fn(grid, m, |_, th| m.fermi_point(th / TAU, 0.0).unwrap());
        let before = s.clone();
        let p = RelaxParams {
            tol: 1e-12,
            max_sweeps: 1,
            omega: Some(1.0),
        };
        let out = relax_dirichlet(&HyperbolicDisk, s, &p).unwrap();
        assert!(out.section.sup_distance(&HyperbolicDisk, &before).unwrap() <= 1e-12);
    }

    #[test]
    fn euclidean_linear_interpolant_recovered() {
        // u = (t, cos θ e^{-t}) is not harmonic, but (t, 0) with end rows
        // fixed is; start from a bent guess.
        let g = Euclidean::new(2).unwrap();
        let id = RigidMotion::translation(vec![0.0, 0.0]);
        let grid = CylinderGrid::with_aspect(2.0, 16, 1.0).unwrap();
        let s = CylinderSection::from_fn(grid, id, |t, th| {
            vec![t, if t > 0.0 && t < 2.0 { th.sin() } else { 0.0 }]
        });
        let out = relax_dirichlet(&g, s, &RelaxParams::default()).unwrap();
        for i in 0..grid.rows() {
            for j in 0..grid.n_theta {
                let p = out.section.get(i, j);
                assert!((p[0] - grid.t(i)).abs() < 1e-8 && p[1].abs() < 1e-8);
            }
        }
        let h = &out.energy_history;
        assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let e = discrete_energy(&g, &out.section, (0.0, grid.t_max));
        assert!((e - h[h.len() - 1]).abs() < 1e-8);
    }

    #[test]
    fn sweep_limit_reports_history() {
        let g = Euclidean::new(1).unwrap();
        let id = RigidMotion::translation(vec![0.0]);
        let grid = CylinderGrid::with_aspect(3.0, 16, 1.0).unwrap();
        let s = CylinderSection::from_fn(grid, id, |t, _| vec![if t < 3.0 { 0.0 } else { 1.0 }]);
        let p = RelaxParams {
            tol: 1e-14,
            max_sweeps: 3,
            omega: None,
        };
        match relax_dirichlet(&g, s, &p) {
            Err(f) => {
                let e: Error = f.into();
                match e {
                    Error::Convergence { history, .. } => assert_eq!(history.len(), 4),
                    other => panic!("{other}"),
                }
            }
            Ok(_) => panic!("should not converge in three sweeps"),
        }
    }
}
