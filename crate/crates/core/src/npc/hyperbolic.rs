use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::Geometry;
use crate::error::{Error, Result};

/// Points must satisfy `|z| < 1 - BOUNDARY_MARGIN`.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// The hyperbolic plane (curvature `-1`) in the Poincaré disk model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicDisk;

/// Disk automorphism `z ↦ (z - a) / (1 - ā z)` sending `a` to the origin.
pub fn to_origin(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// Inverse of [`to_origin`].
pub fn from_origin(a: Complex64, w: Complex64) -> Complex64 {
    (w + a) / (Complex64::new(1.0, 0.0) + a.conj() * w)
}

/// `log_0`: the tangent vector at the origin pointing at `w`.
pub fn log_origin(w: Complex64) -> Complex64 {
    let r = w.norm();
    if r < 1e-300 {
        return Complex64::new(0.0, 0.0);
    }
    w * (2.0 * r.atanh() / r)
}

/// `exp_0`, inverse of [`log_origin`].
pub fn exp_origin(v: Complex64) -> Complex64 {
    let r = v.norm();
    if r < 1e-300 {
        return Complex64::new(0.0, 0.0);
    }
    v * ((r / 2.0).tanh() / r)
}

pub fn disk_distance(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    let den = (Complex64::new(1.0, 0.0) - w.conj() * z).norm();
    2.0 * (num / den).min(1.0).atanh()
}

impl HyperbolicDisk {
    fn karcher_step(
        &self,
        x: Complex64,
        points: &[Complex64],
        weights: &[f64],
        omega: f64,
    ) -> (Complex64, f64) {
        let mut v = Complex64::new(0.0, 0.0);
        for (&p, &w) in points.iter().zip(weights) {
            v += log_origin(to_origin(x, p)) * w;
        }
        (from_origin(x, exp_origin(v * omega)), v.norm())
    }
}

impl Geometry for HyperbolicDisk {
    type Point = Complex64;

    fn name(&self) -> &'static str {
        "hyperbolic2"
    }

    fn distance(&self, p: &Complex64, q: &Complex64) -> f64 {
        disk_distance(*p, *q)
    }

    fn geodesic(&self, p: &Complex64, q: &Complex64, t: f64) -> Complex64 {
        self.extend(p, q, t)
    }

    fn extend(&self, p: &Complex64, q: &Complex64, t: f64) -> Complex64 {
        let w = to_origin(*p, *q);
        from_origin(*p, exp_origin(log_origin(w) * t))
    }

    fn barycenter(&self, points: &[Complex64], weights: &[f64]) -> Complex64 {
        let total: f64 = weights.iter().sum();
        let w: Vec<f64> = weights.iter().map(|x| x / total).collect();
        let mut x = points[0];
        for _ in 0..200 {
            let (next, step) = self.karcher_step(x, points, &w, 1.0);
            x = next;
            if step < 1e-15 {
                break;
            }
        }
        x
    }

    fn relax_update(
        &self,
        x: &Complex64,
        neighbors: &[Complex64],
        weights: &[f64],
        omega: f64,
    ) -> Complex64 {
        self.karcher_step(*x, neighbors, weights, omega).0
    }

    fn validate(&self, p: &Complex64) -> Result<()> {
        if !p.re.is_finite() || !p.im.is_finite() {
            return Err(Error::invalid("non-finite disk coordinate"));
        }
        if p.norm() >= 1.0 - BOUNDARY_MARGIN {
            return Err(Error::invalid(format!(
                "|z| = {} is outside the open unit disk",
                p.norm()
            )));
        }
        Ok(())
    }

    fn coords(&self, p: &Complex64) -> Vec<f64> {
        vec![p.re, p.im]
    }

    fn base_point(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn sample_point(&self, rng: &mut dyn RngCore, radius: f64) -> Complex64 {
        let r = radius * rng.gen_range(0.0..1.0f64);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        exp_origin(Complex64::from_polar(r, angle))
    }

    fn cat_kappa_supported(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn distance_from_origin() {
        let z = Complex64::new(0.5, 0.0);
        // d(0, r) = 2 atanh r = ln((1+r)/(1-r))
        assert_abs_diff_eq!(
            disk_distance(Complex64::new(0.0, 0.0), z),
            3f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn geodesic_is_constant_speed() {
        let h = HyperbolicDisk;
        let p = Complex64::new(0.3, -0.2);
        let q = Complex64::new(-0.6, 0.5);
        let d = h.distance(&p, &q);
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            let m = h.geodesic(&p, &q, t);
            assert_abs_diff_eq!(h.distance(&p, &m), t * d, epsilon = 1e-12);
            assert_abs_diff_eq!(h.distance(&m, &q), (1.0 - t) * d, epsilon = 1e-12);
        }
    }

    #[test]
    fn boundary_points_rejected() {
        assert!(HyperbolicDisk.validate(&Complex64::new(1.0, 0.0)).is_err());
        assert!(HyperbolicDisk.validate(&Complex64::new(0.0, 0.999)).is_ok());
    }
}
