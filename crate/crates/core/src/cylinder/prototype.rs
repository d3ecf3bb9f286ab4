use std::f64::consts::{LN_2, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use super::{Curve, CylinderGrid, CylinderSection};
use crate::error::{Error, Result};
use crate::isometry::{Classification, Isometry, Mobius};
use crate::npc::{Geometry, HyperbolicDisk};

/// Closure tolerance for `loop(2π) = I loop(0)`, relative to the displacement.
const CLOSURE_TOL: f64 = 1e-9;

/// Straight helix `θ ↦ geodesic(p, I p, θ/2π)`; the minimal-energy loop when
/// `p ∈ Min(I)`.
pub fn helix_loop<G, I>(g: Arc<G>, twist: I, p: G::Point) -> Curve<G::Point>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    let q = twist.apply(&g, &p);
    Arc::new(move |theta: f64| g.geodesic(&p, &q, (theta / TAU).clamp(0.0, 1.0)))
}

/// Loop displaced normally from the axis of a hyperbolic Möbius map by
/// `amplitude · cos θ`, in Fermi coordinates about the axis.
pub fn fermi_loop(m: Mobius, amplitude: f64) -> Result<Curve<Complex64>> {
    if m.classification() != Classification::Hyperbolic {
        return Err(Error::domain("Fermi loops need a hyperbolic twist"));
    }
    let delta = m.delta();
    m.fermi_point(0.0, amplitude)?;
    Ok(Arc::new(move |theta: f64| {
        m.fermi_point(delta * theta / TAU, amplitude * theta.cos())
            .expect("hyperbolic frame checked above")
    }))
}

/// `θ ↦ geodesic(base(θ), σ(θ), amplitude · sin²(θ/2))` where `σ` is the
/// helix through `anchor`. Vanishes at both ends of the fundamental domain, so
/// the result closes up whenever `base` does.
pub fn bump_loop<G, I>(
    g: Arc<G>,
    twist: I,
    base: Curve<G::Point>,
    anchor: G::Point,
    amplitude: f64,
) -> Curve<G::Point>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    let sigma = helix_loop(g.clone(), twist, anchor);
    Arc::new(move |theta: f64| {
        let w = (amplitude * (theta / 2.0).sin().powi(2)).clamp(0.0, 1.0);
        g.geodesic(&base(theta), &sigma(theta), w)
    })
}

enum Slices<P> {
    /// `γ(θ)` independent of `t`, through a point of `Min(I)`.
    Helix(P),
    /// Chords `c(s) → I c(s)` along a decay ray, `s = (t - log 2)^{1/3}`.
    Ray(Curve<P>),
}

/// Explicit finite-energy equivariant section: the boundary loop blended into
/// a family of helices along a minimizing point or a decay ray.
pub struct Prototype<G: Geometry, I> {
    space: Arc<G>,
    twist: I,
    boundary: Curve<G::Point>,
    slices: Slices<G::Point>,
}

impl<G, I> Prototype<G, I>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    pub fn new(space: Arc<G>, twist: I, boundary: Curve<G::Point>) -> Result<Self> {
        twist.check(&space)?;
        let start = boundary(0.0);
        space.validate(&start)?;
        let end = boundary(TAU);
        let target = twist.apply(&space, &start);
        let scale = 1.0 + space.distance(&start, &target);
        let gap = space.distance(&end, &target);
        if gap > CLOSURE_TOL * scale {
            return Err(Error::domain(format!(
                "boundary loop does not close up under the twist (gap {gap:.3e})"
            )));
        }
        let slices = match twist.classify(&space) {
            Classification::Parabolic => Slices::Ray(twist.decay_ray(&space)?),
            _ => Slices::Helix(twist.min_point(&space, &start)?),
        };
        Ok(Self {
            space,
            twist,
            boundary,
            slices,
        })
    }

    pub fn space(&self) -> &Arc<G> {
        &self.space
    }

    pub fn twist(&self) -> &I {
        &self.twist
    }

    pub fn boundary(&self) -> &Curve<G::Point> {
        &self.boundary
    }

    /// Ray parameter used at cylinder height `t`.
    pub fn ray_parameter(t: f64) -> f64 {
        (t - LN_2).max(0.0).cbrt()
    }

    /// Reference slice at height `t`, ignoring the boundary blend.
    pub fn slice(&self, t: f64, theta: f64) -> G::Point {
        let g = &*self.space;
        let s = (theta / TAU).clamp(0.0, 1.0);
        match &self.slices {
            Slices::Helix(p) => g.geodesic(p, &self.twist.apply(g, p), s),
            Slices::Ray(ray) => {
                let c = ray(Self::ray_parameter(t));
                g.geodesic(&c, &self.twist.apply(g, &c), s)
            }
        }
    }

    /// Prototype value; blends from the boundary loop on `t ≤ log 2`.
    pub fn value(&self, t: f64, theta: f64) -> G::Point {
        let target = self.slice(t, theta);
        if t >= LN_2 {
            return target;
        }
        self.space
            .geodesic(&(self.boundary)(theta), &target, (t / LN_2).clamp(0.0, 1.0))
    }

    pub fn section(&self, grid: CylinderGrid) -> CylinderSection<G, I> {
        let mut s = CylinderSection::from_fn(grid, self.twist.clone(), |t, th| self.value(t, th));
        // pin the boundary row exactly
        for j in 0..grid.n_theta {
            let k = s.index(0, j);
            s.values[k] = (self.boundary)(grid.theta(j));
        }
        s
    }
}

pub fn prototype_section<G, I>(
    space: Arc<G>,
    twist: I,
    boundary: Curve<G::Point>,
    grid: CylinderGrid,
) -> Result<CylinderSection<G, I>>
where
    G: Geometry + 'static,
    I: Isometry<G> + 'static,
{
    Ok(Prototype::new(space, twist, boundary)?.section(grid))
}

#[allow(dead_code)]
pub(crate) fn hyperbolic_example(
    delta: f64,
    amplitude: f64,
) -> Result<(Arc<HyperbolicDisk>, Mobius, Curve<Complex64>)> {
    let m = Mobius::translation(delta);
    Ok((Arc::new(HyperbolicDisk), m, fermi_loop(m, amplitude)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::discrete_energy;
    use crate::isometry::min_energy_constant;
    use crate::spd::{GroupElement, SpdPoint, SpdSpace};

    #[test]
    fn fermi_loop_closes() {
        let (g, m, l) = hyperbolic_example(1.0, 0.1).unwrap();
        assert!(Prototype::new(g, m, l).is_ok());
    }

    #[test]
    fn open_loops_rejected() {
        let m = Mobius::translation(1.0);
        let bad: Curve<Complex64> = Arc::new(|th: f64| Complex64::new(0.1 * th.cos(), 0.0));
        assert!(Prototype::new(Arc::new(HyperbolicDisk), m, bad).is_err());
    }

    #[test]
    fn helix_prototype_energy_is_minimal() {
        let (g, m, _) = hyperbolic_example(1.5, 0.0).unwrap();
        let p = m.fermi_point(0.3, 0.0).unwrap();
        let l = helix_loop(g.clone(), m, p);
        let grid = CylinderGrid::with_aspect(6.0, 32, 1.0).unwrap();
        let s = prototype_section(g.clone(), m, l, grid).unwrap();
        let e = discrete_energy(&*g, &s, (0.0, grid.t_max));
        assert!((e - min_energy_constant(1.5) * grid.t_max).abs() < 1e-10);
    }

    #[test]
    fn parabolic_prototype_energy_decreases() {
        let space = Arc::new(SpdSpace::new(2).unwrap());
        let g = GroupElement::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let ray = g.decay_ray(&space).unwrap();
        let c0: SpdPoint = ray(0.0);
        let l = helix_loop(space.clone(), g.clone(), c0);
        let p = Prototype::new(space.clone(), g, l).unwrap();
        let grid = CylinderGrid::with_aspect(40.0, 16, 1.0).unwrap();
        let s = p.section(grid);
        let early = discrete_energy(&*space, &s, (1.0, 2.0));
        let late = discrete_energy(&*space, &s, (39.0, 40.0));
        assert!(late < early && late > 0.0, "{early} {late}");
    }
}
