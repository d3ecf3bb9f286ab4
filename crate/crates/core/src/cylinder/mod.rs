//! Discrete equivariant sections over the half cylinder `[0, T] × S¹`.
//!
//! The cylinder is the conformal model of the punctured disk
//! (`r = e^{-t}`), and the energy is conformally invariant, so everything is
//! computed with the flat metric `dt² + dθ²`. A section stores one
//! fundamental domain `θ ∈ [0, 2π)`; reading across the seam applies the
//! twist.

mod calculus;
mod diagnostics;
mod energy;
mod prototype;
mod relax;
mod solve;

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

pub use calculus::{calculus_weight_check, clipped_oscillation, CalculusReport};
pub use diagnostics::{
    compare_solutions, energy_growth_profile, lower_bound_margin, singular_set_flags,
    sublog_growth_check, theta_energy_function, uniqueness_probe, EnergyProfile, SingularSetReport,
    SublogReport, SublogRow, ThetaEnergyReport, UniquenessReport, WindowEnergy,
};
pub use energy::{discrete_energy, row_t_energy, row_theta_energy};
pub use prototype::{bump_loop, fermi_loop, helix_loop, prototype_section, Prototype};
pub use relax::{relax_dirichlet, RelaxFailure, RelaxOutcome, RelaxParams};
pub use solve::{solve_punctured_disk, LevelReport, Seed, SolveOutcome, SolveParams};

use crate::error::{Error, Result};
use crate::isometry::Isometry;
use crate::npc::Geometry;

/// A closed-up-to-twist loop or any other curve `θ ↦ point`.
pub type Curve<P> = Arc<dyn Fn(f64) -> P + Send + Sync>;

pub const MIN_N_THETA: usize = 8;
pub const ASPECT_RANGE: (f64, f64) = (0.25, 4.0);

/// Uniform grid with rows `t_i = i h_t` (`i = 0..=n_t`) and columns
/// `θ_j = j h_θ` (`j = 0..n_θ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderGrid {
    pub t_max: f64,
    pub n_t: usize,
    pub n_theta: usize,
}

impl CylinderGrid {
    pub fn new(t_max: f64, n_t: usize, n_theta: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) || n_t == 0 {
            return Err(Error::domain(
                "cylinder needs T > 0 and at least one row step",
            ));
        }
        if n_theta < MIN_N_THETA {
            return Err(Error::domain(format!(
                "n_theta must be at least {MIN_N_THETA}, got {n_theta}"
            )));
        }
        let g = Self {
            t_max,
            n_t,
            n_theta,
        };
        let aspect = g.h_t() / g.h_theta();
        if aspect < ASPECT_RANGE.0 || aspect > ASPECT_RANGE.1 {
            return Err(Error::domain(format!(
                "cell aspect h_t/h_theta = {aspect:.3} outside [{}, {}]",
                ASPECT_RANGE.0, ASPECT_RANGE.1
            )));
        }
        Ok(g)
    }

    /// Grid on `[0, t_max]` with `h_t ≈ aspect · h_θ`.
    pub fn with_aspect(t_max: f64, n_theta: usize, aspect: f64) -> Result<Self> {
        let h_theta = TAU / n_theta.max(1) as f64;
        let n_t = (t_max / (aspect * h_theta)).round().max(1.0) as usize;
        Self::new(t_max, n_t, n_theta)
    }

    pub fn h_t(&self) -> f64 {
        self.t_max / self.n_t as f64
    }

    pub fn h_theta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    pub fn rows(&self) -> usize {
        self.n_t + 1
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.h_t()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 * self.h_theta()
    }

    /// Nearest row to `t`.
    pub fn row_of(&self, t: f64) -> usize {
        ((t / self.h_t()).round().max(0.0) as usize).min(self.n_t)
    }

    pub fn len(&self) -> usize {
        self.rows() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Point values on the grid plus the twist used across the seam.
#[derive(Debug, Clone)]
pub struct CylinderSection<G: Geometry, I> {
    pub grid: CylinderGrid,
    pub values: Vec<G::Point>,
    pub twist: I,
}

impl<G: Geometry, I: Isometry<G>> CylinderSection<G, I> {
    pub fn new(grid: CylinderGrid, values: Vec<G::Point>, twist: I) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "section has {} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            twist,
        })
    }

    pub fn from_fn(grid: CylinderGrid, twist: I, f: impl Fn(f64, f64) -> G::Point) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.rows() {
            for j in 0..grid.n_theta {
                values.push(f(grid.t(i), grid.theta(j)));
            }
        }
        Self {
            grid,
            values,
            twist,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.grid.n_theta + j
    }

    pub fn get(&self, i: usize, j: usize) -> &G::Point {
        &self.values[self.index(i, j)]
    }

    /// Value at column `j` of any integer, transported by powers of the twist.
    pub fn value(&self, g: &G, i: usize, j: i64) -> G::Point {
        let n = self.grid.n_theta as i64;
        let k = j.div_euclid(n);
        let r = j.rem_euclid(n) as usize;
        let p = self.get(i, r);
        if k == 0 {
            p.clone()
        } else {
            self.twist.apply_power(g, p, k)
        }
    }

    /// Right neighbour of `(i, j)` across the seam if needed.
    pub fn right(&self, g: &G, i: usize, j: usize) -> G::Point {
        self.value(g, i, j as i64 + 1)
    }

    /// Rows `0..=row_of(t)` as a new section.
    pub fn restrict(&self, t: f64) -> Self {
        let rows = self.grid.row_of(t);
        let grid = CylinderGrid {
            t_max: self.grid.t(rows),
            n_t: rows.max(1),
            n_theta: self.grid.n_theta,
        };
        let rows = grid.n_t + 1;
        Self {
            grid,
            values: self.values[..rows * self.grid.n_theta].to_vec(),
            twist: self.twist.clone(),
        }
    }

    /// Largest `d / h` over all grid edges (a discrete Lipschitz constant).
    pub fn lipschitz(&self, g: &G) -> f64 {
        let (ht, hth) = (self.grid.h_t(), self.grid.h_theta());
        let mut l: f64 = 0.0;
        for i in 0..self.grid.rows() {
            for j in 0..self.grid.n_theta {
                let p = self.get(i, j);
                l = l.max(g.distance(p, &self.right(g, i, j)) / hth);
                if i + 1 < self.grid.rows() {
                    l = l.max(g.distance(p, self.get(i + 1, j)) / ht);
                }
            }
        }
        l
    }

    /// Sup distance to another section over the common rows.
    pub fn sup_distance(&self, g: &G, other: &Self) -> Result<f64> {
        if self.grid.n_theta != other.grid.n_theta
            || (self.grid.h_t() - other.grid.h_t()).abs() > 1e-12
        {
            return Err(Error::domain("sections live on different grids"));
        }
        let rows = self.grid.rows().min(other.grid.rows());
        let mut d: f64 = 0.0;
        for i in 0..rows {
            for j in 0..self.grid.n_theta {
                d = d.max(g.distance(self.get(i, j), other.get(i, j)));
            }
        }
        Ok(d)
    }

    /// Seam residual `max_i d(u(i, n_θ), I u(i, 0))`; zero by construction.
    pub fn seam_residual(&self, g: &G) -> f64 {
        let n = self.grid.n_theta as i64;
        (0..self.grid.rows())
            .map(|i| g.distance(&self.value(g, i, n), &self.twist.apply(g, self.get(i, 0))))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(CylinderGrid::new(10.0, 100, 4).is_err());
        assert!(CylinderGrid::new(10.0, 10, 64).is_err());
        let g = CylinderGrid::with_aspect(10.0, 64, 1.0).unwrap();
        assert_eq!(g.n_t, 102);
        assert!((g.h_t() / g.h_theta() - 1.0).abs() < 0.01);
    }
}
