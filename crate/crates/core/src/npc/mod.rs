//! NPC geometries and comparison-inequality checks.

mod checks;
mod euclidean;
pub mod hyperbolic;
mod tree;

use std::fmt;

use num_complex::Complex64;
use rand::RngCore;
use serde::Serialize;

pub use checks::{cat_kappa_inequality, npc_inequality, InequalityReport, InequalitySample};
pub use euclidean::Euclidean;
pub use hyperbolic::HyperbolicDisk;
pub use tree::{MetricTree, TreeEdge, TreePoint};

use crate::error::{Error, Result};
use crate::spd::{SpdPoint, SpdSpace};

/// A uniquely geodesic complete metric space of non-positive curvature.
pub trait Geometry: Send + Sync {
    type Point: Clone + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;

    fn distance(&self, p: &Self::Point, q: &Self::Point) -> f64;

    /// Constant-speed geodesic from `p` (`t = 0`) to `q` (`t = 1`).
    fn geodesic(&self, p: &Self::Point, q: &Self::Point, t: f64) -> Self::Point;

    /// Geodesic extension beyond `q` for `t > 1` where the space allows it;
    /// spaces with branching clamp to `[0, 1]`.
    fn extend(&self, p: &Self::Point, q: &Self::Point, t: f64) -> Self::Point {
        self.geodesic(p, q, t.clamp(0.0, 1.0))
    }

    /// Minimiser of `x ↦ Σ w_i d²(x, p_i)` for non-negative weights.
    fn barycenter(&self, points: &[Self::Point], weights: &[f64]) -> Self::Point {
        inductive_mean(self, points, weights, 1e-12, 100_000)
    }

    /// One relaxation update of `x` towards the barycenter of its neighbors
    /// with weights summing to one. `omega = 1` is a plain barycentric step;
    /// larger values over-relax where the geometry supports it.
    fn relax_update(
        &self,
        x: &Self::Point,
        neighbors: &[Self::Point],
        weights: &[f64],
        omega: f64,
    ) -> Self::Point {
        let b = self.barycenter(neighbors, weights);
        if omega == 1.0 {
            b
        } else {
            self.extend(x, &b, omega)
        }
    }

    fn validate(&self, p: &Self::Point) -> Result<()>;

    /// Flat coordinates used for binary section dumps.
    fn coords(&self, p: &Self::Point) -> Vec<f64>;

    fn base_point(&self) -> Self::Point;

    /// A random point within roughly `radius` of [`Geometry::base_point`].
    fn sample_point(&self, rng: &mut dyn RngCore, radius: f64) -> Self::Point;

    /// Whether the space is CAT(-κ) for some κ > 0.
    fn cat_kappa_supported(&self) -> bool;

    /// True for spaces with a single point, where no sampling is possible.
    fn is_singleton(&self) -> bool {
        false
    }
}

/// Weighted inductive mean: cyclic geodesic contractions
/// `x ← γ(x, p_i)(w_i / W)` with `W` the running weight total.
///
/// Converges slowly; kept as an independent cross-check of the fast
/// barycenters.
pub fn inductive_mean<G: Geometry + ?Sized>(
    g: &G,
    points: &[G::Point],
    weights: &[f64],
    tol: f64,
    max_rounds: usize,
) -> G::Point {
    let mut x = points[0].clone();
    let mut total = weights[0];
    let mut previous = x.clone();
    for round in 0..max_rounds {
        let start = if round == 0 { 1 } else { 0 };
        for (p, &w) in points.iter().zip(weights).skip(start) {
            total += w;
            if total > 0.0 {
                x = g.geodesic(&x, p, w / total);
            }
        }
        if round > 0 && g.distance(&x, &previous) < tol {
            break;
        }
        previous = x.clone();
    }
    x
}

/// A runtime choice among the concrete geometries.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpaceDescriptor {
    Euclidean(Euclidean),
    Hyperbolic2(HyperbolicDisk),
    Spd(SpdSpace),
    Tree(MetricTree),
}

/// A point of one of the concrete geometries.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Euclidean(Vec<f64>),
    Hyperbolic(Complex64),
    Spd(SpdPoint),
    Tree(TreePoint),
}

/// Wrapping between concrete points and [`Point`].
pub trait DynGeometry: Geometry {
    fn unwrap_point(p: &Point) -> Option<&Self::Point>;
    fn wrap_point(p: Self::Point) -> Point;
}

macro_rules! dyn_geometry {
    ($ty:ty, $variant:ident) => {
        impl DynGeometry for $ty {
            fn unwrap_point(p: &Point) -> Option<&Self::Point> {
                match p {
                    Point::$variant(x) => Some(x),
                    _ => None,
                }
            }
            fn wrap_point(p: Self::Point) -> Point {
                Point::$variant(p)
            }
        }
    };
}

dyn_geometry!(Euclidean, Euclidean);
dyn_geometry!(HyperbolicDisk, Hyperbolic);
dyn_geometry!(SpdSpace, Spd);
dyn_geometry!(MetricTree, Tree);

/// Runs `$body` with `$g` bound to the concrete geometry inside `$space`.
#[macro_export]
macro_rules! with_geometry {
    ($space:expr, $g:ident => $body:expr) => {
        match $space {
            $crate::npc::SpaceDescriptor::Euclidean($g) => $body,
            $crate::npc::SpaceDescriptor::Hyperbolic2($g) => $body,
            $crate::npc::SpaceDescriptor::Spd($g) => $body,
            $crate::npc::SpaceDescriptor::Tree($g) => $body,
        }
    };
}

fn typed<'a, G: DynGeometry>(g: &G, p: &'a Point) -> Result<&'a G::Point> {
    let x = G::unwrap_point(p).ok_or_else(|| {
        Error::invalid(format!("point does not belong to the {} space", g.name()))
    })?;
    g.validate(x)?;
    Ok(x)
}

impl SpaceDescriptor {
    /// Parses `euclidean:<dim>`, `h2`, `spd:<n>` or `tree:<path.json>`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (text, None),
        };
        let number = |a: Option<&str>| -> Result<usize> {
            a.ok_or_else(|| Error::Usage(format!("space {kind:?} needs a dimension")))?
                .parse()
                .map_err(|_| Error::Usage(format!("bad dimension in {text:?}")))
        };
        match kind {
            "euclidean" | "r" => Ok(Self::Euclidean(Euclidean::new(number(arg)?)?)),
            "h2" | "hyperbolic2" => Ok(Self::Hyperbolic2(HyperbolicDisk)),
            "spd" => Ok(Self::Spd(SpdSpace::new(number(arg)?)?)),
            "tree" => {
                let path =
                    arg.ok_or_else(|| Error::Usage("tree space needs a file path".into()))?;
                Ok(Self::Tree(MetricTree::load(std::path::Path::new(path))?))
            }
            other => Err(Error::UnsupportedSpace(format!("unknown space {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        with_geometry!(self, g => g.name())
    }
}

pub fn distance(space: &SpaceDescriptor, p: &Point, q: &Point) -> Result<f64> {
    with_geometry!(space, g => Ok(g.distance(typed(g, p)?, typed(g, q)?)))
}

pub fn geodesic(space: &SpaceDescriptor, p: &Point, q: &Point, t: f64) -> Result<Point> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!(
            "geodesic parameter {t} outside [0, 1]"
        )));
    }
    with_geometry!(space, g => Ok(wrap(g, g.geodesic(typed(g, p)?, typed(g, q)?, t))))
}

fn wrap<G: DynGeometry>(_g: &G, p: G::Point) -> Point {
    G::wrap_point(p)
}

pub fn barycenter(space: &SpaceDescriptor, points: &[Point], weights: &[f64]) -> Result<Point> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::domain(
            "barycenter needs matching non-empty points and weights",
        ));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::domain(
            "barycenter weights must be non-negative with positive sum",
        ));
    }
    with_geometry!(space, g => {
        let pts = points.iter().map(|p| typed(g, p).cloned()).collect::<Result<Vec<_>>>()?;
        Ok(wrap(g, g.barycenter(&pts, weights)))
    })
}

/// Samples the NPC comparison inequality
/// `d²(P, Q_t) ≤ (1-t) d²(P, Q) + t d²(P, R) - t(1-t) d²(Q, R)`.
pub fn check_npc_inequality(
    space: &SpaceDescriptor,
    samples: usize,
    seed: u64,
) -> InequalityReport {
    with_geometry!(space, g => npc_inequality(g, samples, seed))
}

/// Samples the CAT(-κ) comparison inequality; unsupported for spaces
/// containing flats.
pub fn check_cat_kappa(
    space: &SpaceDescriptor,
    kappa: f64,
    samples: usize,
    seed: u64,
) -> Result<InequalityReport> {
    with_geometry!(space, g => cat_kappa_inequality(g, kappa, samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mismatched_points_rejected() {
        let space = SpaceDescriptor::Spd(SpdSpace::new(2).unwrap());
        let p = Point::Spd(SpdPoint::identity(2));
        let q = Point::Hyperbolic(Complex64::new(0.0, 0.0));
        assert!(matches!(
            distance(&space, &p, &q),
            Err(Error::InvalidPoint(_))
        ));
        let r = Point::Spd(SpdPoint::identity(3));
        assert!(matches!(
            distance(&space, &p, &r),
            Err(Error::InvalidPoint(_))
        ));
    }

    #[test]
    fn parse_descriptors() {
        assert_eq!(SpaceDescriptor::parse("h2").unwrap().name(), "hyperbolic2");
        assert_eq!(
            SpaceDescriptor::parse("spd:3").unwrap(),
            SpaceDescriptor::Spd(SpdSpace { n: 3 })
        );
        assert!(matches!(
            SpaceDescriptor::parse("sphere:2"),
            Err(Error::UnsupportedSpace(_))
        ));
    }

    #[test]
    fn geodesic_parameter_checked() {
        let space = SpaceDescriptor::Euclidean(Euclidean::new(1).unwrap());
        let p = Point::Euclidean(vec![0.0]);
        assert!(geodesic(&space, &p, &p, 1.5).is_err());
    }
}
