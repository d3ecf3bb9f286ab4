//! Discrete harmonic sections against closed-form solutions.

use std::f64::consts::TAU;
use std::sync::Arc;

use npch_core::cylinder::{
    discrete_energy, fermi_loop, relax_dirichlet, solve_punctured_disk, CylinderGrid, Prototype,
    RelaxParams, Seed, SolveParams,
};
use npch_core::isometry::{min_energy_constant, Mobius, RigidMotion};
use npch_core::npc::{Euclidean, HyperbolicDisk};

#[test]
fn axis_helix_is_already_harmonic() {
    let delta = 1.3;
    let m = Mobius::translation(delta);
    let boundary = fermi_loop(m, 0.0).unwrap();
    let proto = Prototype::new(Arc::new(HyperbolicDisk), m, boundary).unwrap();
    let params = SolveParams {
        t0: 4.0,
        doublings: 1,
        n_theta: 32,
        cauchy_tol: 1e-9,
        ..SolveParams::default()
    };
    let out = solve_punctured_disk(&proto, &Seed::Prototype, &params).unwrap();
    let e_rho = min_energy_constant(delta);
    assert!((out.e_rho - e_rho).abs() < 1e-15);
    let t_max = out.section.grid.t_max;
    let e = discrete_energy(&HyperbolicDisk, &out.section, (0.0, t_max));
    assert!((e - e_rho * t_max).abs() < 1e-9 * e, "{e} vs {}", e_rho * t_max);
    for m in &out.lower_bound_margins {
        assert!(m.abs() < 1e-9, "{m}");
    }
}

/// Translation by `Δ e₁` in R³ with boundary `(Δθ/2π, a cos θ, 0)`. The
/// harmonic extension to `[0, T]` with far row `(Δθ/2π, a, 0)` is
/// `y = a cos θ sinh(T - t)/sinh T + a t/T` and `x` unchanged.
fn screw_error(n_theta: usize) -> f64 {
    let (delta, a, t_max) = (0.8, 0.3, 4.0);
    let e3 = Arc::new(Euclidean::new(3).unwrap());
    let twist = RigidMotion::translation(vec![delta, 0.0, 0.0]);
    let boundary: npch_core::cylinder::Curve<Vec<f64>> =
        Arc::new(move |th: f64| vec![delta * th / TAU, a * th.cos(), 0.0]);
    let proto = Prototype::new(e3.clone(), twist, boundary).unwrap();
    let grid = CylinderGrid::with_aspect(t_max, n_theta, 1.0).unwrap();
    let init = proto.section(grid);
    for j in 0..n_theta {
        let far = init.get(grid.n_t, j);
        let th = grid.theta(j);
        assert!((far[0] - delta * th / TAU).abs() < 1e-12);
        assert!((far[1] - a).abs() < 1e-12 && far[2].abs() < 1e-12, "{far:?}");
    }
    let params = RelaxParams {
        tol: 1e-14,
        ..RelaxParams::default()
    };
    let out = relax_dirichlet(&*e3, init, &params).unwrap();
    let mut err = 0.0f64;
    for i in 0..=grid.n_t {
        let t = grid.t(i);
        for j in 0..n_theta {
            let th = grid.theta(j);
            let y = a * th.cos() * (t_max - t).sinh() / t_max.sinh() + a * t / t_max;
            let p = out.section.get(i, j);
            err = err
                .max((p[0] - delta * th / TAU).abs())
                .max((p[1] - y).abs())
                .max(p[2].abs());
        }
    }
    err
}

#[test]
fn euclidean_screw_matches_closed_form_at_second_order() {
    let coarse = screw_error(16);
    let fine = screw_error(32);
    assert!(fine < 2e-3, "{fine}");
    let order = (coarse / fine).log2();
    assert!((1.7..2.3).contains(&order), "order {order} ({coarse} -> {fine})");
}
