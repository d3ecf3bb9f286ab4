use serde::Serialize;

use super::Geometry;
use crate::error::{Error, Result};
use crate::rng::task_rng;

const NPC_RADIUS: f64 = 3.0;
const CAT_RADIUS: f64 = 2.0;

/// A single evaluated sample, kept for the worst case.
#[derive(Debug, Clone, Serialize)]
pub struct InequalitySample {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// Result of sampling a comparison inequality; `min_residual` is the
/// smallest `rhs - lhs` seen.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub space: String,
    pub samples: usize,
    pub min_residual: f64,
    pub worst: Option<InequalitySample>,
}

impl InequalityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_residual >= -tol
    }
}

fn run<G: Geometry + ?Sized>(
    g: &G,
    samples: usize,
    seed: u64,
    radius: f64,
    eval: impl Fn(&G::Point, &G::Point, &G::Point, f64) -> (f64, f64),
) -> InequalityReport {
    let mut report = InequalityReport {
        space: g.name().to_string(),
        samples: 0,
        min_residual: 0.0,
        worst: None,
    };
    if g.is_singleton() {
        return report;
    }
    let mut min = f64::INFINITY;
    for k in 0..samples {
        let mut rng = task_rng(seed, k as u64);
        let p = g.sample_point(&mut rng, radius);
        let q = g.sample_point(&mut rng, radius);
        let r = g.sample_point(&mut rng, radius);
        let t = rand::Rng::gen_range(&mut rng, 0.0..=1.0);
        let (lhs, rhs) = eval(&p, &q, &r, t);
        if rhs - lhs < min {
            min = rhs - lhs;
            report.worst = Some(InequalitySample { t, lhs, rhs });
        }
    }
    report.samples = samples;
    report.min_residual = if samples == 0 { 0.0 } else { min };
    report
}

pub fn npc_inequality<G: Geometry + ?Sized>(g: &G, samples: usize, seed: u64) -> InequalityReport {
    run(g, samples, seed, NPC_RADIUS, |p, q, r, t| {
        let qt = g.geodesic(q, r, t);
        let lhs = g.distance(p, &qt).powi(2);
        let rhs = (1.0 - t) * g.distance(p, q).powi(2) + t * g.distance(p, r).powi(2)
            - t * (1.0 - t) * g.distance(q, r).powi(2);
        (lhs, rhs)
    })
}

/// Weight `sinh(s x) / sinh(x)` with its `x → 0` limit.
fn sinh_ratio(s: f64, x: f64) -> f64 {
    if x < 1e-8 {
        s
    } else {
        (s * x).sinh() / x.sinh()
    }
}

/// `cosh(k d(P, Q_t)) ≤ w₀ cosh(k d(P, Q)) + w₁ cosh(k d(P, R))` with
/// `k = √κ`, `w₀ = sinh((1-t) k d(Q,R)) / sinh(k d(Q,R))` and `w₁` likewise.
pub fn cat_kappa_inequality<G: Geometry + ?Sized>(
    g: &G,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("kappa must be positive"));
    }
    if !g.cat_kappa_supported() {
        return Err(Error::UnsupportedSpace(format!(
            "{} contains flats and is not CAT(-kappa)",
            g.name()
        )));
    }
    let k = kappa.sqrt();
    Ok(run(g, samples, seed, CAT_RADIUS, |p, q, r, t| {
        let qt = g.geodesic(q, r, t);
        let dqr = k * g.distance(q, r);
        let lhs = (k * g.distance(p, &qt)).cosh();
        let rhs = sinh_ratio(1.0 - t, dqr) * (k * g.distance(p, q)).cosh()
            + sinh_ratio(t, dqr) * (k * g.distance(p, r)).cosh();
        (lhs, rhs)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::npc::{Euclidean, HyperbolicDisk, MetricTree};
    use crate::spd::SpdSpace;

    #[test]
    fn euclidean_is_tight() {
        let r = npc_inequality(&Euclidean::new(3).unwrap(), 500, 1);
        assert!(r.holds(1e-10));
        // equality holds in flat space up to rounding
        assert!(r.min_residual < 1e-9);
    }

    #[test]
    fn hyperbolic_and_tree_satisfy_cat() {
        assert!(cat_kappa_inequality(&HyperbolicDisk, 1.0, 500, 2)
            .unwrap()
            .holds(1e-10));
        let t = MetricTree::star(4, 1.5).unwrap();
        assert!(cat_kappa_inequality(&t, 3.0, 500, 2).unwrap().holds(1e-10));
    }

    #[test]
    fn spd_cat_unsupported() {
        let r = cat_kappa_inequality(&SpdSpace::new(2).unwrap(), 1.0, 10, 0);
        assert!(matches!(r, Err(Error::UnsupportedSpace(_))));
    }

    #[test]
    fn hyperbolic_fails_stronger_curvature() {
        // the disk is CAT(-1) but not CAT(-4)
        let r = cat_kappa_inequality(&HyperbolicDisk, 4.0, 2000, 5).unwrap();
        assert!(!r.holds(1e-10));
    }
}
