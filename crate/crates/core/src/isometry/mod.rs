//! Isometries of the target geometries: classification, translation
//! lengths, minimal-displacement points and rays of decaying displacement.

mod decay;
mod iwasawa;
mod mobius;
mod numeric;
mod rigid;
pub mod spectral;
mod torus;
mod tree;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use decay::{decay_ray, fit_exponential_decay, DecayAnalysis, DecayFit, SpdRay};
pub use iwasawa::{iwasawa, Iwasawa};
pub use mobius::{half_plane_distance, to_disk, to_half_plane, Mobius};
pub use numeric::{minimize_displacement, DisplacementSearch};
pub use rigid::RigidMotion;
pub use torus::{
    almost_flat_torus_map, flat_torus_map, sample_derivatives, AlmostFlatTorus, DerivativeBounds,
    DerivativeSample, FlatTorus, TorusMap, TranslationTorus,
};
pub use tree::TreeAutomorphism;

use crate::error::{Error, Result};
use crate::npc::{Geometry, SpaceDescriptor};
use crate::spd::{group_action, GroupElement, SpdPoint, SpdSpace};

/// Threshold on `ρ` below which a semisimple element counts as elliptic.
pub const ELLIPTIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl Classification {
    pub fn is_semisimple(self) -> bool {
        !matches!(self, Classification::Parabolic)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Elliptic => "elliptic",
            Classification::Hyperbolic => "hyperbolic",
            Classification::Parabolic => "parabolic",
        })
    }
}

/// A unit-speed curve `t ↦ c(t)`, `t ≥ 0`.
pub type Ray<P> = Arc<dyn Fn(f64) -> P + Send + Sync>;

/// An isometry of a geometry `G`.
pub trait Isometry<G: Geometry>: Clone + fmt::Debug + Send + Sync {
    /// Checks that the isometry acts on this particular space.
    fn check(&self, g: &G) -> Result<()>;

    fn apply(&self, g: &G, p: &G::Point) -> G::Point;

    fn apply_inverse(&self, g: &G, p: &G::Point) -> G::Point;

    fn classify(&self, g: &G) -> Classification;

    /// `Δ = inf_x d(x, I x)`.
    fn translation_length(&self, g: &G) -> f64;

    /// A point realising `Δ`; fails for parabolic isometries.
    fn min_point(&self, g: &G, hint: &G::Point) -> Result<G::Point>;

    /// For parabolic isometries a unit-speed ray along which the displacement
    /// decreases to `Δ`; for semisimple ones a ray of constant displacement `Δ`.
    fn decay_ray(&self, g: &G) -> Result<Ray<G::Point>>;

    /// `d(c(t), I c(t))` along [`Isometry::decay_ray`].
    fn ray_displacement(&self, g: &G, t: f64) -> Result<f64> {
        let p = self.decay_ray(g)?(t);
        Ok(g.distance(&p, &self.apply(g, &p)))
    }

    /// `I^k(p)` for any integer `k`.
    fn apply_power(&self, g: &G, p: &G::Point, k: i64) -> G::Point {
        let mut x = p.clone();
        for _ in 0..k.unsigned_abs() {
            x = if k > 0 {
                self.apply(g, &x)
            } else {
                self.apply_inverse(g, &x)
            };
        }
        x
    }
}

/// `E_ρ = Δ² / 2π`, the energy per unit length of an equivariant helix.
pub fn min_energy_constant(delta: f64) -> f64 {
    delta * delta / std::f64::consts::TAU
}

impl Isometry<SpdSpace> for GroupElement {
    fn check(&self, g: &SpdSpace) -> Result<()> {
        if self.dim() != g.n {
            return Err(Error::domain(format!(
                "group element of size {} cannot act on P({})",
                self.dim(),
                g.n
            )));
        }
        Ok(())
    }

    fn apply(&self, _g: &SpdSpace, p: &SpdPoint) -> SpdPoint {
        group_action(self, p).expect("dimension checked")
    }

    fn apply_inverse(&self, _g: &SpdSpace, p: &SpdPoint) -> SpdPoint {
        group_action(&self.inverse(), p).expect("dimension checked")
    }

    fn classify(&self, _g: &SpdSpace) -> Classification {
        classify_matrix(self.matrix())
    }

    fn translation_length(&self, _g: &SpdSpace) -> f64 {
        spectral::rho(self.matrix())
    }

    fn min_point(&self, _g: &SpdSpace, _hint: &SpdPoint) -> Result<SpdPoint> {
        let frame = spectral::semisimple_frame(self.matrix())
            .ok_or_else(|| Error::domain("isometry is not semisimple; Min set is empty"))?;
        let p = &frame.frame;
        Ok(SpdPoint::trusted(p * p.transpose()))
    }

    fn decay_ray(&self, _g: &SpdSpace) -> Result<Ray<SpdPoint>> {
        let ray = SpdRay::for_element(self);
        Ok(Arc::new(move |t| ray.point(t)))
    }
}

/// Jordan-structure classification of an invertible matrix acting on
/// `P(n, R)`.
pub fn classify_matrix(g: &DMatrix<f64>) -> Classification {
    match spectral::semisimple_frame(g) {
        None => Classification::Parabolic,
        Some(_) if spectral::rho(g) > ELLIPTIC_TOL => Classification::Hyperbolic,
        Some(_) => Classification::Elliptic,
    }
}

/// An isometry paired with the space it acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum IsometryDescriptor {
    Spd { matrix: GroupElement },
    Mobius { matrix: Mobius },
    Rigid(RigidMotion),
    Tree(TreeAutomorphism),
}

/// Summary of an isometry for reports.
#[derive(Debug, Clone, Serialize)]
pub struct IsometryAnalysis {
    pub classification: Classification,
    pub translation_length: f64,
    pub e_rho: f64,
}

impl IsometryDescriptor {
    /// Reads a twist given as JSON: a bare matrix for `spd`/`h2`, an object
    /// `{"rotation", "translation"}` for Euclidean space or
    /// `{"vertex_map"}` for trees.
    pub fn from_json(space: &SpaceDescriptor, value: &serde_json::Value) -> Result<Self> {
        let bad = |e: serde_json::Error| Error::Usage(format!("cannot read twist: {e}"));
        let iso = match space {
            SpaceDescriptor::Spd(_) => IsometryDescriptor::Spd {
                matrix: serde_json::from_value(value.clone()).map_err(bad)?,
            },
            SpaceDescriptor::Hyperbolic2(_) => IsometryDescriptor::Mobius {
                matrix: serde_json::from_value(value.clone()).map_err(bad)?,
            },
            SpaceDescriptor::Euclidean(_) => {
                IsometryDescriptor::Rigid(serde_json::from_value(value.clone()).map_err(bad)?)
            }
            SpaceDescriptor::Tree(_) => {
                IsometryDescriptor::Tree(serde_json::from_value(value.clone()).map_err(bad)?)
            }
        };
        iso.check(space)?;
        Ok(iso)
    }

    pub fn check(&self, space: &SpaceDescriptor) -> Result<()> {
        match (space, self) {
            (SpaceDescriptor::Spd(g), IsometryDescriptor::Spd { matrix }) => matrix.check(g),
            (SpaceDescriptor::Hyperbolic2(g), IsometryDescriptor::Mobius { matrix }) => {
                matrix.check(g)
            }
            (SpaceDescriptor::Euclidean(g), IsometryDescriptor::Rigid(m)) => m.check(g),
            (SpaceDescriptor::Tree(g), IsometryDescriptor::Tree(m)) => m.check(g),
            _ => Err(Error::domain("isometry kind does not match the space")),
        }
    }

    pub fn analyze(&self, space: &SpaceDescriptor) -> Result<IsometryAnalysis> {
        self.check(space)?;
        let (classification, delta) = match (space, self) {
            (SpaceDescriptor::Spd(g), IsometryDescriptor::Spd { matrix }) => {
                (matrix.classify(g), matrix.translation_length(g))
            }
            (SpaceDescriptor::Hyperbolic2(g), IsometryDescriptor::Mobius { matrix }) => {
                (matrix.classify(g), matrix.translation_length(g))
            }
            (SpaceDescriptor::Euclidean(g), IsometryDescriptor::Rigid(m)) => {
                (m.classify(g), m.translation_length(g))
            }
            (SpaceDescriptor::Tree(g), IsometryDescriptor::Tree(m)) => {
                (m.classify(g), m.translation_length(g))
            }
            _ => unreachable!("checked above"),
        };
        Ok(IsometryAnalysis {
            classification,
            translation_length: delta,
            e_rho: min_energy_constant(delta),
        })
    }
}

/// Convenience for the generic solver entry points.
pub fn analyze<G: Geometry, I: Isometry<G>>(g: &G, iso: &I) -> IsometryAnalysis {
    let delta = iso.translation_length(g);
    IsometryAnalysis {
        classification: iso.classify(g),
        translation_length: delta,
        e_rho: min_energy_constant(delta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd::matrix_from_rows;

    fn g(rows: &[Vec<f64>]) -> GroupElement {
        GroupElement::from_rows(rows).unwrap()
    }

    #[test]
    fn named_examples() {
        let s = SpdSpace::new(2).unwrap();
        let hyp = g(&[vec![3.0, 0.0], vec![0.0, 1.0 / 3.0]]);
        assert_eq!(hyp.classify(&s), Classification::Hyperbolic);
        let rho = 2f64.sqrt() * 9f64.ln();
        assert!((hyp.translation_length(&s) - rho).abs() < 1e-12);
        assert!(
            (min_energy_constant(hyp.translation_length(&s)) - 1.5367351453835898).abs() < 1e-12
        );
        let par = g(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert_eq!(par.classify(&s), Classification::Parabolic);
        assert!(par.translation_length(&s) < 1e-12);
        assert_eq!(
            GroupElement::identity(2).classify(&s),
            Classification::Elliptic
        );
    }

    #[test]
    fn min_point_attains_rho() {
        let s = SpdSpace::new(3).unwrap();
        let m = matrix_from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.5, 3.0, 1.0],
            vec![0.0, 0.2, 0.7],
        ])
        .unwrap();
        let e = GroupElement::new(m).unwrap();
        assert_eq!(e.classify(&s), Classification::Hyperbolic);
        let p = e.min_point(&s, &SpdPoint::identity(3)).unwrap();
        let d = s.distance(&p, &e.apply(&s, &p));
        assert!((d - e.translation_length(&s)).abs() < 1e-9);
    }

    #[test]
    fn descriptor_parsing() {
        let space = SpaceDescriptor::parse("spd:2").unwrap();
        let v: serde_json::Value = serde_json::from_str("[[3,0],[0,0.3333333333333333]]").unwrap();
        let iso = IsometryDescriptor::from_json(&space, &v).unwrap();
        assert_eq!(
            iso.analyze(&space).unwrap().classification,
            Classification::Hyperbolic
        );
        let wrong: serde_json::Value = serde_json::from_str("[[1,0,0],[0,1,0],[0,0,1]]").unwrap();
        assert!(IsometryDescriptor::from_json(&space, &wrong).is_err());
    }
}
