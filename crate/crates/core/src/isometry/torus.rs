//! Equivariant maps of the plane for commuting pairs of isometries.
//!
//! For a semisimple pair the map is a totally geodesic flat; for a pair of
//! parabolics sharing a decay ray it is a family of geodesic quadrilaterals
//! sliding out along the ray.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::decay::{fit_exponential_decay, DecayFit, SpdRay};
use super::spectral::{self, common_frame};
use super::{Isometry, RigidMotion};
use crate::error::{Error, Result};
use crate::npc::{Euclidean, Geometry};
use crate::spd::{group_action, spd_distance, GroupElement, SpdPoint, SpdSpace};

/// A map `(t, x, y) ↦ h(t, x, y)` with `h(t, x + 2π, y) = I₁ h(t, x, y)` and
/// `h(t, x, y + 2π) = I₂ h(t, x, y)`. Flat maps ignore `t`.
pub trait TorusMap<G: Geometry> {
    fn eval(&self, t: f64, x: f64, y: f64) -> G::Point;
    /// Translation lengths `(Δ₁, Δ₂)`.
    fn deltas(&self) -> (f64, f64);
}

/// Flat map `h(x, y) = P diag(exp((x w₁ + y w₂) / 2π)) Pᵀ`.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    frame: DMatrix<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
}

impl TorusMap<SpdSpace> for FlatTorus {
    fn eval(&self, _t: f64, x: f64, y: f64) -> SpdPoint {
        let d = DVector::from_iterator(
            self.w1.len(),
            self.w1
                .iter()
                .zip(&self.w2)
                .map(|(a, b)| ((x * a + y * b) / TAU).exp()),
        );
        SpdPoint::trusted(&self.frame * DMatrix::from_diagonal(&d) * self.frame.transpose())
    }

    fn deltas(&self) -> (f64, f64) {
        let n = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        (n(&self.w1), n(&self.w2))
    }
}

/// Flat torus for a commuting pair of semisimple elements of `GL(n)`.
pub fn flat_torus_map(g1: &GroupElement, g2: &GroupElement) -> Result<FlatTorus> {
    for g in [g1, g2] {
        if spectral::semisimple_frame(g.matrix()).is_none() {
            return Err(Error::domain("flat torus maps need semisimple generators"));
        }
    }
    let frame = common_frame(g1.matrix(), g2.matrix(), true)?;
    let w = |g: &GroupElement| {
        frame
            .column_moduli_sq(g.matrix())
            .iter()
            .map(|m| m.ln())
            .collect()
    };
    Ok(FlatTorus {
        w1: w(g1),
        w2: w(g2),
        frame: frame.frame,
    })
}

/// Flat map `h(x, y) = x b₁ / 2π + y b₂ / 2π` for two translations.
#[derive(Debug, Clone)]
pub struct TranslationTorus {
    b1: Vec<f64>,
    b2: Vec<f64>,
}

impl TranslationTorus {
    pub fn new(m1: &RigidMotion, m2: &RigidMotion) -> Result<Self> {
        for m in [m1, m2] {
            let n = m.rotation().nrows();
            if (m.rotation() - DMatrix::<f64>::identity(n, n)).norm() > 1e-12 {
                return Err(Error::domain("Euclidean torus maps need pure translations"));
            }
        }
        if m1.translation_vector().len() != m2.translation_vector().len() {
            return Err(Error::domain("translations have different dimensions"));
        }
        Ok(Self {
            b1: m1.translation_vector().iter().copied().collect(),
            b2: m2.translation_vector().iter().copied().collect(),
        })
    }
}

impl TorusMap<Euclidean> for TranslationTorus {
    fn eval(&self, _t: f64, x: f64, y: f64) -> Vec<f64> {
        self.b1
            .iter()
            .zip(&self.b2)
            .map(|(a, b)| (x * a + y * b) / TAU)
            .collect()
    }

    fn deltas(&self) -> (f64, f64) {
        let n = |w: &[f64]| w.iter().map(|v| v * v).sum::<f64>().sqrt();
        (n(&self.b1), n(&self.b2))
    }
}

/// Quadrilateral family along a shared decay ray `c(t)`: corners
/// `c, I₁c, I₂c, I₁I₂c`, geodesics in `x` along the bottom edge and its `I₂`
/// image, geodesics in `y` joining them.
#[derive(Debug, Clone)]
pub struct AlmostFlatTorus {
    space: SpdSpace,
    g1: GroupElement,
    g2: GroupElement,
    ray: SpdRay,
    pub fit1: DecayFit,
    pub fit2: DecayFit,
    delta1: f64,
    delta2: f64,
}

impl AlmostFlatTorus {
    pub fn ray(&self) -> &SpdRay {
        &self.ray
    }

    fn cell(&self, t: f64, x: f64, y: f64) -> SpdPoint {
        let s = &self.space;
        let c = self.ray.point(t);
        let i1c = group_action(&self.g1, &c).expect("same size");
        let bottom = s.geodesic(&c, &i1c, x / TAU);
        let top = group_action(&self.g2, &bottom).expect("same size");
        s.geodesic(&bottom, &top, y / TAU)
    }

    /// Allowed `|∂h/∂x|²` and `|∂h/∂y|²` at depth `t`:
    /// `((Δᵢ + bᵢ e^{-aᵢ t}) / 2π)²`.
    pub fn planar_bounds(&self, t: f64) -> (f64, f64) {
        let b = |delta: f64, fit: &DecayFit| ((delta + fit.b * (-fit.a * t).exp()) / TAU).powi(2);
        (b(self.delta1, &self.fit1), b(self.delta2, &self.fit2))
    }
}

impl TorusMap<SpdSpace> for AlmostFlatTorus {
    fn eval(&self, t: f64, x: f64, y: f64) -> SpdPoint {
        let kx = (x / TAU).floor();
        let ky = (y / TAU).floor();
        let p = self.cell(t, x - kx * TAU, y - ky * TAU);
        let p = self.g1.apply_power(&self.space, &p, kx as i64);
        self.g2.apply_power(&self.space, &p, ky as i64)
    }

    fn deltas(&self) -> (f64, f64) {
        (self.delta1, self.delta2)
    }
}

/// Almost-flat torus for commuting generators that can be brought to block
/// upper-triangular form simultaneously. Decay parameters are fitted from
/// displacements sampled on `[0, tmax]`.
pub fn almost_flat_torus_map(
    g1: &GroupElement,
    g2: &GroupElement,
    tmax: f64,
) -> Result<AlmostFlatTorus> {
    if g1.dim() != g2.dim() {
        return Err(Error::domain("generators have different sizes"));
    }
    let frame = common_frame(g1.matrix(), g2.matrix(), false)?;
    let ray = SpdRay::contracting(&frame);
    let space = SpdSpace::new(g1.dim())?;
    let fit = |g: &GroupElement| -> Result<DecayFit> {
        let steps = 200;
        let series: Vec<(f64, f64)> = (0..=steps)
            .map(|k| {
                let t = tmax * k as f64 / steps as f64;
                let c = ray.point(t);
                (
                    t,
                    spd_distance(&c, &group_action(g, &c).expect("same size")).expect("same size"),
                )
            })
            .collect();
        fit_exponential_decay(&series)
    };
    let fit1 = fit(g1)?;
    let fit2 = fit(g2)?;
    Ok(AlmostFlatTorus {
        delta1: spectral::rho(g1.matrix()),
        delta2: spectral::rho(g2.matrix()),
        space,
        g1: g1.clone(),
        g2: g2.clone(),
        ray,
        fit1,
        fit2,
    })
}

/// Squared metric derivatives sampled by central differences of distances.
#[derive(Debug, Clone, Serialize)]
pub struct DerivativeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub dx2: f64,
    pub dy2: f64,
    pub dt2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeBounds {
    pub samples: Vec<DerivativeSample>,
    pub max_dx2: f64,
    pub max_dy2: f64,
    pub max_dt2: f64,
}

impl DerivativeBounds {
    /// Largest `|dx2 - Δ₁²/4π²|` and `|dy2 - Δ₂²/4π²|`.
    pub fn flat_deviation(&self, deltas: (f64, f64)) -> f64 {
        let ex = (deltas.0 / TAU).powi(2);
        let ey = (deltas.1 / TAU).powi(2);
        self.samples
            .iter()
            .map(|s| (s.dx2 - ex).abs().max((s.dy2 - ey).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest excess of sampled derivatives over the almost-flat bounds.
    pub fn almost_flat_excess(&self, torus: &AlmostFlatTorus) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let (bx, by) = torus.planar_bounds(s.t);
                (s.dx2 - bx).max(s.dy2 - by).max(s.dt2 - 1.0)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Samples `m × m` cell-centred `(x, y)` points at each depth in `ts`.
pub fn sample_derivatives<G: Geometry, M: TorusMap<G>>(
    g: &G,
    map: &M,
    ts: &[f64],
    m: usize,
    eps: f64,
) -> DerivativeBounds {
    let mut samples = Vec::new();
    for &t in ts {
        for i in 0..m {
            for j in 0..m {
                let x = TAU * (i as f64 + 0.5) / m as f64;
                let y = TAU * (j as f64 + 0.5) / m as f64;
                let speed = |a: G::Point, b: G::Point| (g.distance(&a, &b) / (2.0 * eps)).powi(2);
                let dx2 = speed(map.eval(t, x - eps, y), map.eval(t, x + eps, y));
                let dy2 = speed(map.eval(t, x, y - eps), map.eval(t, x, y + eps));
                let dt2 = speed(map.eval((t - eps).max(0.0), x, y), map.eval(t + eps, x, y));
                samples.push(DerivativeSample {
                    t,
                    x,
                    y,
                    dx2,
                    dy2,
                    dt2,
                });
            }
        }
    }
    let max = |f: fn(&DerivativeSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    DerivativeBounds {
        max_dx2: max(|s| s.dx2),
        max_dy2: max(|s| s.dy2),
        max_dt2: max(|s| s.dt2),
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(rows: &[Vec<f64>]) -> GroupElement {
        GroupElement::from_rows(rows).unwrap()
    }

    #[test]
    fn flat_torus_is_equivariant_with_constant_derivatives() {
        let g1 = g(&[vec![3.0, 0.0], vec![0.0, 1.0 / 3.0]]);
        let g2 = g(&[vec![2.0, 0.0], vec![0.0, 0.5]]);
        let map = flat_torus_map(&g1, &g2).unwrap();
        let s = SpdSpace::new(2).unwrap();
        let p = map.eval(0.0, 0.7, 1.3);
        let shifted = map.eval(0.0, 0.7 + TAU, 1.3);
        assert!(s.distance(&g1.apply(&s, &p), &shifted) < 1e-12);
        let b = sample_derivatives(&s, &map, &[0.0], 4, 1e-4);
        let d1 = spectral::rho(g1.matrix());
        let d2 = spectral::rho(g2.matrix());
        assert!(b.flat_deviation((d1, d2)) < 1e-8);
    }

    #[test]
    fn non_commuting_pair_rejected() {
        let g1 = g(&[vec![3.0, 0.0], vec![0.0, 1.0 / 3.0]]);
        let g2 = g(&[vec![2.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(flat_torus_map(&g1, &g2), Err(Error::Domain(_))));
        let u = g(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let l = g(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(
            almost_flat_torus_map(&u, &l, 40.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn translation_torus() {
        let m1 = RigidMotion::translation(vec![1.0, 0.0]);
        let m2 = RigidMotion::translation(vec![0.0, 2.0]);
        let map = TranslationTorus::new(&m1, &m2).unwrap();
        let e = Euclidean::new(2).unwrap();
        let b = sample_derivatives(&e, &map, &[0.0], 3, 1e-3);
        assert!(b.flat_deviation((1.0, 2.0)) < 1e-10);
    }

    #[test]
    fn mixed_block_fit_ignores_rounding_tail() {
        let a = g(&[vec![2.0, 2.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.25]]);
        let b = g(&[vec![3.0, 3.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 1.0 / 9.0]]);
        let torus = almost_flat_torus_map(&a, &b, 40.0).unwrap();
        assert!((torus.fit1.a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        let s = SpdSpace::new(3).unwrap();
        let bounds = sample_derivatives(&s, &torus, &[5.0, 10.0, 20.0], 3, 1e-4);
        assert!(bounds.almost_flat_excess(&torus) < 1e-9);
    }
}
