use super::CylinderSection;
use crate::isometry::Isometry;
use crate::npc::Geometry;

/// `Σ_j d²(u_{i,j}, u_{i,j+1}) / h_θ`: the discrete `∫ |∂_θ u|² dθ` on row `i`.
pub fn row_theta_energy<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    i: usize,
) -> f64 {
    let h = s.grid.h_theta();
    (0..s.grid.n_theta)
        .map(|j| g.distance(s.get(i, j), &s.right(g, i, j)).powi(2))
        .sum::<f64>()
        / h
}

/// `Σ_j d²(u_{i,j}, u_{i+1,j}) h_θ / h_t²`: the discrete `∫ |∂_t u|² dθ`
/// between rows `i` and `i + 1`.
pub fn row_t_energy<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    i: usize,
) -> f64 {
    let (ht, hth) = (s.grid.h_t(), s.grid.h_theta());
    (0..s.grid.n_theta)
        .map(|j| g.distance(s.get(i, j), s.get(i + 1, j)).powi(2))
        .sum::<f64>()
        * hth
        / (ht * ht)
}

/// Energy of the rows between `row_of(t1)` and `row_of(t2)`.
///
/// Each grid edge contributes `d²/h²` times its share of cell area; θ-edges
/// on the two window rows count half. Windows are additive, and an exact
/// helix with translation length `Δ` gives `(Δ²/2π)(t₂ - t₁)`.
pub fn discrete_energy<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    window: (f64, f64),
) -> f64 {
    let a = s.grid.row_of(window.0.min(window.1));
    let b = s.grid.row_of(window.0.max(window.1));
    if a == b {
        return 0.0;
    }
    rows_energy(g, s, a, b)
}

pub(crate) fn rows_energy<G: Geometry, I: Isometry<G>>(
    g: &G,
    s: &CylinderSection<G, I>,
    a: usize,
    b: usize,
) -> f64 {
    let ht = s.grid.h_t();
    let mut e = 0.0;
    for i in a..=b {
        let tau = if i == a || i == b { 0.5 } else { 1.0 };
        e += tau * ht * row_theta_energy(g, s, i);
    }
    for i in a..b {
        e += ht * row_t_energy(g, s, i);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::CylinderGrid;
    use crate::isometry::{Mobius, RigidMotion};
    use crate::npc::{Euclidean, HyperbolicDisk};
    use std::f64::consts::TAU;

    #[test]
    fn helix_energy_is_exact() {
        let m = Mobius::translation(1.0);
        let grid = CylinderGrid::with_aspect(10.0, 64, 1.0).unwrap();
        let s = CylinderSection::from_fn(grid, m, |_, th| m.fermi_point(th / TAU, 0.0).unwrap());
        let e = discrete_energy(&HyperbolicDisk, &s, (0.0, grid.t_max));
        assert!((e - grid.t_max / TAU).abs() < 1e-11, "{e}");
        // additivity of windows
        let mid = grid.t(grid.n_t / 2);
        let split = discrete_energy(&HyperbolicDisk, &s, (0.0, mid))
            + discrete_energy(&HyperbolicDisk, &s, (mid, grid.t_max));
        assert!((split - e).abs() < 1e-12);
    }

    #[test]
    fn euclidean_translation_in_t() {
        let id = RigidMotion::translation(vec![0.0, 0.0]);
        let grid = CylinderGrid::with_aspect(5.0, 32, 1.0).unwrap();
        let s = CylinderSection::from_fn(grid, id, |t, _| vec![t, 0.0]);
        let e = discrete_energy(&Euclidean::new(2).unwrap(), &s, (0.0, grid.t_max));
        // ∫∫ |∂_t u|² dθ dt = 2π T
        assert!((e - TAU * grid.t_max).abs() < 1e-10);
    }
}
