//! Orientation-preserving isometries of the hyperbolic plane.
//!
//! Elements of `SL(2, R)` act on the upper half-plane by fractional linear
//! maps; they act on the disk through the Cayley map `w ↦ (w - i)/(w + i)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Classification, Isometry, Ray};
use crate::error::{Error, Result};
use crate::npc::{Geometry, HyperbolicDisk};

const TRACE_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Upper half-plane to disk.
pub fn to_disk(w: Complex64) -> Complex64 {
    (w - c(0.0, 1.0)) / (w + c(0.0, 1.0))
}

/// Disk to upper half-plane.
pub fn to_half_plane(z: Complex64) -> Complex64 {
    c(0.0, 1.0) * (c(1.0, 0.0) + z) / (c(1.0, 0.0) - z)
}

/// Hyperbolic distance in the upper half-plane.
pub fn half_plane_distance(w1: Complex64, w2: Complex64) -> f64 {
    2.0 * ((w1 - w2).norm() / (2.0 * (w1.im * w2.im).sqrt())).asinh()
}

/// A unimodular real matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Mobius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<Vec<Vec<f64>>> for Mobius {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Mobius::from_rows(&rows)
    }
}

impl From<Mobius> for Vec<Vec<f64>> {
    fn from(m: Mobius) -> Self {
        vec![vec![m.a, m.b], vec![m.c, m.d]]
    }
}

/// Conjugating frame of a hyperbolic or parabolic element.
#[derive(Debug, Clone, Copy)]
enum Frame {
    /// `S M S⁻¹ = (w ↦ e^Δ w)`.
    Axis { s: Mobius },
    /// `S M S⁻¹ = (w ↦ w + τ)`.
    Horocyclic { s: Mobius, tau: f64 },
    /// Fixed point in the upper half-plane (`None` for `±I`).
    Fixed(Option<Complex64>),
}

impl Mobius {
    /// Normalises a matrix with positive determinant to determinant one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(Error::domain("Mobius coefficients must be finite"));
        }
        let det = a * d - b * c;
        let scale = (a * a + b * b + c * c + d * d).max(f64::MIN_POSITIVE);
        if det <= 1e-12 * scale {
            return Err(Error::domain(
                "Mobius matrix needs positive determinant (orientation-preserving)",
            ));
        }
        let s = det.sqrt();
        Ok(Self {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
            return Err(Error::domain("Mobius matrix must be 2x2"));
        }
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Translation of length `delta` along the real diameter of the disk.
    pub fn translation(delta: f64) -> Self {
        let e = (delta / 2.0).exp();
        Self {
            a: e,
            b: 0.0,
            c: 0.0,
            d: 1.0 / e,
        }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn apply_half_plane(&self, w: Complex64) -> Complex64 {
        (w * self.a + self.b) / (w * self.c + self.d)
    }

    /// `z ↦ (α z + β) / (β̄ z + ᾱ)` with `α = (a+d) + i(b-c)`, `β = (a-d) - i(b+c)`.
    pub fn apply_disk(&self, z: Complex64) -> Complex64 {
        let alpha = c(self.a + self.d, self.b - self.c);
        let beta = c(self.a - self.d, -(self.b + self.c));
        (alpha * z + beta) / (beta.conj() * z + alpha.conj())
    }

    fn is_plus_minus_identity(&self) -> bool {
        self.b.abs() <= TRACE_TOL
            && self.c.abs() <= TRACE_TOL
            && (self.a - self.d).abs() <= TRACE_TOL
    }

    pub fn classification(&self) -> Classification {
        let t = self.trace().abs();
        if t < 2.0 - TRACE_TOL || self.is_plus_minus_identity() {
            Classification::Elliptic
        } else if t <= 2.0 + TRACE_TOL {
            Classification::Parabolic
        } else {
            Classification::Hyperbolic
        }
    }

    /// `2 acosh(|tr| / 2)` for hyperbolic elements, zero otherwise.
    pub fn delta(&self) -> f64 {
        match self.classification() {
            Classification::Hyperbolic => 2.0 * (self.trace().abs() / 2.0).acosh(),
            _ => 0.0,
        }
    }

    /// Boundary fixed points `(repelling, attracting)`; `None` stands for `∞`.
    fn boundary_fixed_points(&self) -> (Option<f64>, Option<f64>) {
        let (a, b, cc, d) = (self.a, self.b, self.c, self.d);
        if cc.abs() <= 1e-300 {
            let finite = b / (d - a);
            if (a / d).abs() > 1.0 {
                (Some(finite), None)
            } else {
                (None, Some(finite))
            }
        } else {
            let root = ((a + d).powi(2) - 4.0).max(0.0).sqrt();
            let w1 = ((a - d) + root) / (2.0 * cc);
            let w2 = ((a - d) - root) / (2.0 * cc);
            // |f'(w)| = 1/|c w + d|²
            if (cc * w1 + d).abs() > 1.0 {
                (Some(w2), Some(w1))
            } else {
                (Some(w1), Some(w2))
            }
        }
    }

    fn frame(&self) -> Frame {
        match self.classification() {
            Classification::Hyperbolic => {
                let s = match self.boundary_fixed_points() {
                    (Some(r), None) => Mobius {
                        a: 1.0,
                        b: -r,
                        c: 0.0,
                        d: 1.0,
                    },
                    (None, Some(q)) => Mobius {
                        a: 0.0,
                        b: -1.0,
                        c: 1.0,
                        d: -q,
                    },
                    (Some(r), Some(q)) => {
                        if r > q {
                            Mobius::new(1.0, -r, 1.0, -q).expect("positive determinant")
                        } else {
                            Mobius::new(-1.0, r, 1.0, -q).expect("positive determinant")
                        }
                    }
                    (None, None) => unreachable!("a hyperbolic element has a finite fixed point"),
                };
                Frame::Axis { s }
            }
            Classification::Parabolic => {
                let s = if self.c.abs() <= 1e-300 {
                    Mobius::identity()
                } else {
                    let p = (self.a - self.d) / (2.0 * self.c);
                    Mobius {
                        a: 0.0,
                        b: -1.0,
                        c: 1.0,
                        d: -p,
                    }
                };
                let conj = s.compose(self).compose(&s.inverse());
                Frame::Horocyclic {
                    s,
                    tau: conj.b / conj.d,
                }
            }
            Classification::Elliptic => {
                if self.is_plus_minus_identity() {
                    Frame::Fixed(None)
                } else {
                    let tr = self.trace();
                    let re = (self.a - self.d) / (2.0 * self.c);
                    let im = (4.0 - tr * tr).max(0.0).sqrt() / (2.0 * self.c.abs());
                    Frame::Fixed(Some(c(re, im)))
                }
            }
        }
    }

    /// Point in Fermi coordinates about the axis of a hyperbolic element:
    /// `along` is arclength on the axis (zero at the point nearest the
    /// frame base), `across` the signed normal distance.
    pub fn fermi_point(&self, along: f64, across: f64) -> Result<Complex64> {
        match self.frame() {
            Frame::Axis { s } => {
                let w = c(across.tanh(), 1.0 / across.cosh()) * along.exp();
                Ok(to_disk(s.inverse().apply_half_plane(w)))
            }
            _ => Err(Error::domain("Fermi coordinates need a hyperbolic element")),
        }
    }

    /// Arclength coordinate of the projection of `z` onto the axis.
    pub fn axis_coordinate(&self, z: Complex64) -> Result<f64> {
        match self.frame() {
            Frame::Axis { s } => Ok(s.apply_half_plane(to_half_plane(z)).norm().ln()),
            _ => Err(Error::domain("axis coordinate needs a hyperbolic element")),
        }
    }
}

impl Isometry<HyperbolicDisk> for Mobius {
    fn check(&self, _g: &HyperbolicDisk) -> Result<()> {
        Ok(())
    }

    fn apply(&self, _g: &HyperbolicDisk, p: &Complex64) -> Complex64 {
        self.apply_disk(*p)
    }

    fn apply_inverse(&self, _g: &HyperbolicDisk, p: &Complex64) -> Complex64 {
        self.inverse().apply_disk(*p)
    }

    fn classify(&self, _g: &HyperbolicDisk) -> Classification {
        self.classification()
    }

    fn translation_length(&self, _g: &HyperbolicDisk) -> f64 {
        self.delta()
    }

    fn min_point(&self, g: &HyperbolicDisk, hint: &Complex64) -> Result<Complex64> {
        match self.frame() {
            Frame::Axis { s } => {
                let w = s.apply_half_plane(to_half_plane(*hint));
                Ok(to_disk(s.inverse().apply_half_plane(c(0.0, w.norm()))))
            }
            Frame::Fixed(Some(w)) => Ok(to_disk(w)),
            Frame::Fixed(None) => {
                g.validate(hint)?;
                Ok(*hint)
            }
            Frame::Horocyclic { .. } => {
                Err(Error::domain("parabolic isometries have empty Min set"))
            }
        }
    }

    fn decay_ray(&self, g: &HyperbolicDisk) -> Result<Ray<Complex64>> {
        match self.frame() {
            Frame::Axis { s } | Frame::Horocyclic { s, .. } => {
                let inv = s.inverse();
                Ok(std::sync::Arc::new(move |t: f64| {
                    to_disk(inv.apply_half_plane(c(0.0, t.exp())))
                }))
            }
            Frame::Fixed(_) => {
                let p = self.min_point(g, &c(0.0, 0.0))?;
                Ok(std::sync::Arc::new(move |_t: f64| p))
            }
        }
    }

    fn ray_displacement(&self, g: &HyperbolicDisk, t: f64) -> Result<f64> {
        match self.frame() {
            Frame::Horocyclic { tau, .. } => {
                let w = c(0.0, t.exp());
                Ok(half_plane_distance(w, w + tau))
            }
            Frame::Axis { .. } => Ok(self.delta()),
            Frame::Fixed(_) => {
                let ray = self.decay_ray(g)?;
                let p = ray(t);
                Ok(g.distance(&p, &self.apply_disk(p)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn translation_along_diameter() {
        let m = Mobius::translation(1.0);
        let z0 = c(0.0, 0.0);
        let z1 = m.apply_disk(z0);
        assert_abs_diff_eq!(z1.im, 0.0, epsilon = 1e-15);
        assert!(z1.re > 0.0);
        assert_abs_diff_eq!(HyperbolicDisk.distance(&z0, &z1), 1.0, epsilon = 1e-14);
        assert_eq!(m.classification(), Classification::Hyperbolic);
        assert_abs_diff_eq!(m.delta(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn disk_action_matches_cayley_conjugation() {
        let m = Mobius::new(2.0, 1.0, 0.5, 1.5).unwrap();
        let z = c(0.2, -0.4);
        let direct = m.apply_disk(z);
        let via = to_disk(m.apply_half_plane(to_half_plane(z)));
        assert_abs_diff_eq!((direct - via).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn classification_by_trace() {
        assert_eq!(
            Mobius::new(1.0, 1.0, 0.0, 1.0).unwrap().classification(),
            Classification::Parabolic
        );
        let (cs, sn) = (0.4f64.cos(), 0.4f64.sin());
        assert_eq!(
            Mobius::new(cs, -sn, sn, cs).unwrap().classification(),
            Classification::Elliptic
        );
        assert_eq!(
            Mobius::identity().classification(),
            Classification::Elliptic
        );
        assert!(Mobius::new(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn axis_points_have_minimal_displacement() {
        let m = Mobius::new(2.0, 1.0, 0.5, 1.5).unwrap();
        let hint = c(0.3, 0.1);
        let p = m.min_point(&HyperbolicDisk, &hint).unwrap();
        let dp = HyperbolicDisk.distance(&p, &m.apply_disk(p));
        assert_abs_diff_eq!(dp, m.delta(), epsilon = 1e-12);
        let dh = HyperbolicDisk.distance(&hint, &m.apply_disk(hint));
        assert!(dh >= dp);
        // Fermi points at distance r from the axis are moved by 2 asinh(cosh r sinh(Δ/2))
        let q = m.fermi_point(0.3, 0.7).unwrap();
        let expected = 2.0 * (0.7f64.cosh() * (m.delta() / 2.0).sinh()).asinh();
        assert_abs_diff_eq!(
            HyperbolicDisk.distance(&q, &m.apply_disk(q)),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn parabolic_ray_decays() {
        let m = Mobius::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let ray = m.decay_ray(&HyperbolicDisk).unwrap();
        for t in [0.0, 1.0, 3.0, 6.0] {
            let p = ray(t);
            let direct = HyperbolicDisk.distance(&p, &m.apply_disk(p));
            let exact = m.ray_displacement(&HyperbolicDisk, t).unwrap();
            assert_abs_diff_eq!(direct, exact, epsilon = 1e-9);
            assert_abs_diff_eq!(exact, 2.0 * (0.5 * (-t).exp()).asinh(), epsilon = 1e-14);
        }
    }
}
