use nalgebra::DMatrix;
use serde::Serialize;

use crate::spd::{group_action, spd_distance, sym_eig, symmetrize, GroupElement, SpdPoint};

/// Result of a direct search for the minimal displacement of `G`.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementSearch {
    pub min_displacement: f64,
    pub evaluations: usize,
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub point: DMatrix<f64>,
}

fn coords_to_sym(n: usize, x: &[f64]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        s[(i, i)] = x[k];
        k += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let v = x[k] / std::f64::consts::SQRT_2;
            s[(i, j)] = v;
            s[(j, i)] = v;
            k += 1;
        }
    }
    s
}

fn point_at(n: usize, x: &[f64]) -> SpdPoint {
    let s = symmetrize(&coords_to_sym(n, x));
    let e = sym_eig(&s).expect("symmetric by construction");
    SpdPoint::new(e.map(f64::exp)).unwrap_or_else(|_| SpdPoint::identity(n))
}

/// Minimises `p ↦ d(p, G p Gᵀ)` over `p = exp(S)` with `‖S‖ ≤ radius`:
/// a coarse grid over `[-box, box]` per coordinate (for `n ≤ 3`) followed by
/// compass search down to step `1e-10`.
pub fn minimize_displacement(
    g: &GroupElement,
    grid_box: f64,
    grid_points: usize,
    radius: f64,
) -> DisplacementSearch {
    let n = g.dim();
    let dim = n * (n + 1) / 2;
    let mut evaluations = 0;
    let mut f = |x: &[f64]| -> f64 {
        evaluations += 1;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > radius {
            return f64::INFINITY;
        }
        let p = point_at(n, x);
        spd_distance(&p, &group_action(g, &p).expect("same size")).expect("same size")
    };
    let mut best_x = vec![0.0; dim];
    let mut best = f(&best_x);
    if n <= 3 && grid_points >= 2 {
        let mut idx = vec![0usize; dim];
        'grid: loop {
            let x: Vec<f64> = idx
                .iter()
                .map(|&i| -grid_box + 2.0 * grid_box * i as f64 / (grid_points - 1) as f64)
                .collect();
            let v = f(&x);
            if v < best {
                best = v;
                best_x = x;
            }
            for d in 0..dim {
                idx[d] += 1;
                if idx[d] < grid_points {
                    continue 'grid;
                }
                idx[d] = 0;
            }
            break;
        }
    }
    let mut step = if grid_points >= 2 {
        2.0 * grid_box / (grid_points - 1) as f64
    } else {
        1.0
    };
    while step > 1e-10 {
        let mut improved = false;
        for d in 0..dim {
            for sign in [1.0, -1.0] {
                let mut x = best_x.clone();
                x[d] += sign * step;
                let v = f(&x);
                if v < best {
                    best = v;
                    best_x = x;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    DisplacementSearch {
        min_displacement: best,
        evaluations,
        point: point_at(n, &best_x).matrix().clone(),
    }
}
