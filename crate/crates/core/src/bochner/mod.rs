//! Finite-difference checks of the flat-target Bochner identities on the box
//! `[-1, 1]⁴ ⊂ ℂ²`, and a sign probe for the curvature of `P(n, ℝ)`.
//!
//! Maps are polynomial generators, so every residual compares a
//! finite-difference side of an identity against the *other* side evaluated
//! from exact derivatives. A wrong identity leaves an `O(1)` residual; a
//! right one leaves the `O(h²)` error of the central differences.
//!
//! Normalization: with `ω = (i/2) Σ dz^α ∧ dz̄^α` the volume form is
//! `ω²/2 = -¼ dz¹ ∧ dz̄¹ ∧ dz² ∧ dz̄²`, so a top form `c · dz¹dz̄¹dz²dz̄²`
//! equals `(-4c) · vol`. For `u = z¹ z̄² v` this gives
//! `∂∂̄{∂̄u, ∂̄u} = 4|v|² vol`, matching `4 |∂∂̄u|² = 4 Σ |u_{αβ̄}|²`.

mod curvature;
mod forms;
mod generator;

use num_complex::Complex64;
use serde::Serialize;

pub use curvature::{curvature_constant_fd, hermitian_negativity_probe, NegativityReport};
pub use forms::{bracket, Form, VForm};
pub use generator::{standard_generators, Generator, Monomial};

use crate::error::{Error, Result};

type Node = [i64; 4];

/// Sample points `{-½, -¼, 0, ¼, ½}⁴`, grid nodes at every admissible mesh.
const SAMPLE_STEPS: i64 = 2;

/// A generator sampled on the uniform grid with `mesh` cells per axis.
#[derive(Debug, Clone)]
pub struct TestMap {
    pub generator: Generator,
    pub mesh: usize,
}

impl TestMap {
    pub fn new(generator: Generator, mesh: usize) -> Result<Self> {
        if mesh < 8 || !mesh.is_multiple_of(8) {
            return Err(Error::domain(format!(
                "mesh must be a positive multiple of 8 (got {mesh})"
            )));
        }
        Ok(Self { generator, mesh })
    }

    pub fn h(&self) -> f64 {
        2.0 / self.mesh as f64
    }

    pub fn point(&self, n: Node) -> [Complex64; 2] {
        let h = self.h();
        [
            Complex64::new(n[0] as f64 * h, n[1] as f64 * h),
            Complex64::new(n[2] as f64 * h, n[3] as f64 * h),
        ]
    }

    pub fn refined(&self) -> Self {
        Self {
            generator: self.generator.clone(),
            mesh: 2 * self.mesh,
        }
    }

    pub fn sample_nodes(&self) -> Vec<Node> {
        let step = (self.mesh / 8) as i64;
        let r = -SAMPLE_STEPS..=SAMPLE_STEPS;
        let mut out = Vec::new();
        for a in r.clone() {
            for b in r.clone() {
                for c in r.clone() {
                    for d in r.clone() {
                        out.push([a * step, b * step, c * step, d * step]);
                    }
                }
            }
        }
        out
    }

    fn values(&self, g: &Generator, n: Node) -> VForm {
        g.eval(self.point(n))
            .into_iter()
            .map(Form::scalar)
            .collect()
    }
}

const DEL: [usize; 2] = [0, 2];
const DELBAR: [usize; 2] = [1, 3];
const D: [usize; 4] = [0, 1, 2, 3];

fn shifted(n: Node, r: usize, s: i64) -> Node {
    let mut m = n;
    m[r] += s;
    m
}

/// Wirtinger derivative in variable `k` by central differences.
fn wirtinger(f: &dyn Fn(Node) -> VForm, n: Node, k: usize, h: f64) -> VForm {
    let a = k / 2;
    let dx: Vec<Form> = f(shifted(n, 2 * a, 1))
        .into_iter()
        .zip(f(shifted(n, 2 * a, -1)))
        .map(|(p, m)| p - m)
        .collect();
    let dy: Vec<Form> = f(shifted(n, 2 * a + 1, 1))
        .into_iter()
        .zip(f(shifted(n, 2 * a + 1, -1)))
        .map(|(p, m)| p - m)
        .collect();
    // ∂_z = (∂_x - i ∂_y)/2, ∂_z̄ = (∂_x + i ∂_y)/2
    let i = Complex64::new(0.0, if k.is_multiple_of(2) { -1.0 } else { 1.0 });
    let s = Complex64::new(1.0 / (4.0 * h), 0.0);
    dx.into_iter()
        .zip(dy)
        .map(|(x, y)| (x + y * i) * s)
        .collect()
}

/// `Σ_{k ∈ ks} dz^k ∧ ∂_k f` by central differences.
fn fd_d(f: &dyn Fn(Node) -> VForm, n: Node, ks: &[usize], h: f64) -> VForm {
    let mut out: Option<VForm> = None;
    for &k in ks {
        let e = Form::basis(k);
        let t: Vec<Form> = wirtinger(f, n, k, h).iter().map(|c| e.wedge(c)).collect();
        out = Some(match out {
            None => t,
            Some(o) => o.into_iter().zip(t).map(|(a, b)| a + b).collect(),
        });
    }
    out.unwrap_or_default()
}

/// Exact `Σ_{j ∈ outer} dz^j ∧ Σ_{k ∈ inner} dz^k ∂_j ∂_k u` (or the first
/// derivative alone when `outer` is empty).
fn exact_d(g: &Generator, z: [Complex64; 2], inner: &[usize], outer: &[usize]) -> VForm {
    let mut out = vec![Form::zero(); g.dim()];
    for &k in inner {
        let gk = g.derivative(k);
        if outer.is_empty() {
            for (o, v) in out.iter_mut().zip(gk.eval(z)) {
                *o += Form::basis(k) * v;
            }
            continue;
        }
        for &j in outer {
            let e = Form::basis(j).wedge(&Form::basis(k));
            for (o, v) in out.iter_mut().zip(gk.derivative(j).eval(z)) {
                *o += e * v;
            }
        }
    }
    out
}

fn neg(v: &[Form]) -> VForm {
    v.iter().map(|f| -*f).collect()
}

/// First-order forms `∂u, ∂̄u, ∂ū, ∂̄ū` at one node.
#[derive(Debug, Clone)]
pub struct FdForms {
    pub del_u: VForm,
    pub delbar_u: VForm,
    pub del_ubar: VForm,
    pub delbar_ubar: VForm,
}

impl FdForms {
    pub fn brackets(&self) -> [Form; 4] {
        [
            bracket(&self.del_u, &self.del_u),
            bracket(&self.delbar_ubar, &self.delbar_ubar),
            bracket(&self.del_ubar, &self.del_ubar),
            bracket(&self.delbar_u, &self.delbar_u),
        ]
    }
}

pub fn fd_forms(m: &TestMap, n: Node) -> FdForms {
    let h = m.h();
    let gc = m.generator.conj();
    let u = |n: Node| m.values(&m.generator, n);
    let ub = |n: Node| m.values(&gc, n);
    FdForms {
        del_u: fd_d(&u, n, &DEL, h),
        delbar_u: fd_d(&u, n, &DELBAR, h),
        del_ubar: fd_d(&ub, n, &DEL, h),
        delbar_ubar: fd_d(&ub, n, &DELBAR, h),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub mesh: usize,
    pub residual_h: f64,
    pub residual_half_h: f64,
    /// `log₂(residual_h / residual_half_h)`, only above the noise floor.
    pub observed_order: Option<f64>,
    /// `10 ε · scale / h^depth` for the nesting depth of the differences.
    pub noise_floor: f64,
}

impl ResidualReport {
    fn from_pair(mesh: usize, h: f64, depth: i32, scale: f64, r: (f64, f64)) -> Self {
        let noise_floor = 10.0 * f64::EPSILON * scale.max(1.0) / h.powi(depth);
        let observed_order = if r.0 > noise_floor && r.1 > 0.0 {
            Some((r.0 / r.1).log2())
        } else {
            None
        };
        Self {
            mesh,
            residual_h: r.0,
            residual_half_h: r.1,
            observed_order,
            noise_floor,
        }
    }

    pub fn order_in(&self, lo: f64, hi: f64) -> bool {
        self.observed_order.is_some_and(|o| o >= lo && o <= hi)
    }
}

fn scale(m: &TestMap) -> f64 {
    m.sample_nodes()
        .into_iter()
        .flat_map(|n| m.generator.eval(m.point(n)))
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn form4_residual(m: &TestMap) -> f64 {
    let g = &m.generator;
    let gc = g.conj();
    let mut r: f64 = 0.0;
    for n in m.sample_nodes() {
        let z = m.point(n);
        let fd = fd_forms(m, n).brackets();
        let exact = {
            let du = exact_d(g, z, &DEL, &[]);
            let dbu = exact_d(g, z, &DELBAR, &[]);
            let dub = exact_d(&gc, z, &DEL, &[]);
            let dbub = exact_d(&gc, z, &DELBAR, &[]);
            [
                bracket(&du, &du),
                bracket(&dbub, &dbub),
                bracket(&dub, &dub),
                bracket(&dbu, &dbu),
            ]
        };
        // {∂u,∂u} = -{∂̄ū,∂̄ū} and {∂ū,∂ū} = -{∂̄u,∂̄u}, each side against the other's exact value
        for (a, b) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            r = r.max((fd[a] + exact[b]).max_abs());
        }
    }
    r
}

/// `{∂u, ∂u} = -{∂̄ū, ∂̄ū}` and `{∂ū, ∂ū} = -{∂̄u, ∂̄u}`.
pub fn check_form4(m: &TestMap) -> ResidualReport {
    let fine = m.refined();
    ResidualReport::from_pair(
        m.mesh,
        m.h(),
        1,
        scale(m),
        (form4_residual(m), form4_residual(&fine)),
    )
}

fn commutation_residual(m: &TestMap) -> f64 {
    let h = m.h();
    let mut r: f64 = 0.0;
    for g in [m.generator.clone(), m.generator.conj()] {
        let u = |n: Node| m.values(&g, n);
        let du = |n: Node| fd_d(&u, n, &DEL, h);
        let dbu = |n: Node| fd_d(&u, n, &DELBAR, h);
        for n in m.sample_nodes() {
            let z = m.point(n);
            let del_delbar = fd_d(&dbu, n, &DEL, h);
            let delbar_del = fd_d(&du, n, &DELBAR, h);
            r = r.max(forms::vmax_diff(
                &del_delbar,
                &neg(&exact_d(&g, z, &DEL, &DELBAR)),
            ));
            r = r.max(forms::vmax_diff(
                &delbar_del,
                &neg(&exact_d(&g, z, &DELBAR, &DEL)),
            ));
            for v in [fd_d(&du, n, &DEL, h), fd_d(&dbu, n, &DELBAR, h)] {
                r = r.max(v.iter().map(Form::max_abs).fold(0.0, f64::max));
            }
        }
    }
    r
}

/// `∂∂̄u = -∂̄∂u`, `∂∂u = 0`, `∂̄∂̄u = 0`, and the same for `ū`.
pub fn check_commutation(m: &TestMap) -> ResidualReport {
    let fine = m.refined();
    ResidualReport::from_pair(
        m.mesh,
        m.h(),
        2,
        scale(m),
        (commutation_residual(m), commutation_residual(&fine)),
    )
}

/// `4 Σ_i Σ_{α,β} |∂²u^i/∂z^α∂z̄^β|²`.
fn siu_rhs(g: &Generator, z: [Complex64; 2]) -> f64 {
    let mut s = 0.0;
    for a in DEL {
        for b in DELBAR {
            s += g
                .derivative(a)
                .derivative(b)
                .eval(z)
                .iter()
                .map(|v| v.norm_sqr())
                .sum::<f64>();
        }
    }
    4.0 * s
}

/// Scalar function of a top form in units of the volume form.
fn top_to_function(f: &Form) -> Complex64 {
    f.top() * -4.0
}

#[derive(Debug, Clone, Copy)]
struct SiuSides {
    /// `∂∂̄{∂̄u,∂̄u}` and `∂∂̄{∂̄ū,∂̄ū}` as functions.
    siu: [Complex64; 2],
    /// `d{∂̄∂u, ∂̄u - ∂u}` as a function.
    modified: Complex64,
    rhs: f64,
}

fn siu_sides(m: &TestMap, n: Node) -> SiuSides {
    let h = m.h();
    let g = &m.generator;
    let gc = g.conj();
    let u = |n: Node| m.values(g, n);
    let ub = |n: Node| m.values(&gc, n);
    let mut siu = [Complex64::new(0.0, 0.0); 2];
    for (k, f) in [&u as &dyn Fn(Node) -> VForm, &ub].into_iter().enumerate() {
        let b = |n: Node| {
            vec![{
                let d = fd_d(f, n, &DELBAR, h);
                bracket(&d, &d)
            }]
        };
        let db = |n: Node| fd_d(&b, n, &DELBAR, h);
        siu[k] = top_to_function(&fd_d(&db, n, &DEL, h)[0]);
    }
    let three = |n: Node| {
        let du = |n: Node| fd_d(&u, n, &DEL, h);
        let psi = fd_d(&du, n, &DELBAR, h);
        let xi: VForm = fd_d(&u, n, &DELBAR, h)
            .into_iter()
            .zip(fd_d(&u, n, &DEL, h))
            .map(|(a, b)| a - b)
            .collect();
        vec![bracket(&psi, &xi)]
    };
    let modified = top_to_function(&fd_d(&three, n, &D, h)[0]);
    SiuSides {
        siu,
        modified,
        rhs: siu_rhs(g, m.point(n)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SiuReport {
    /// Both Siu sides against `4 |∂∂̄u|²`.
    pub siu: ResidualReport,
    /// The modified identity against `8 |∂∂̄u|²`.
    pub modified: ResidualReport,
    /// `modified - 2 · siu`, both from finite differences.
    pub factor_two: ResidualReport,
    /// Largest `|4 |∂∂̄u|²|` on the samples, for scale.
    pub rhs_max: f64,
}

impl SiuReport {
    /// Factor-two agreement within `1e-10 + O(h²)`.
    pub fn factor_two_holds(&self) -> bool {
        self.factor_two.residual_half_h <= 1e-10 || self.factor_two.order_in(1.8, f64::INFINITY)
    }
}

fn siu_residuals(m: &TestMap) -> (f64, f64, f64, f64) {
    let (mut rs, mut rm, mut rf, mut mx): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for n in m.sample_nodes() {
        let s = siu_sides(m, n);
        for v in s.siu {
            rs = rs.max((v - s.rhs).norm());
        }
        rm = rm.max((s.modified - 2.0 * s.rhs).norm());
        rf = rf.max((s.modified - 2.0 * s.siu[0]).norm());
        mx = mx.max(s.rhs);
    }
    (rs, rm, rf, mx)
}

/// Flat-target Siu–Bochner identity and its modified form. The generator
/// must be harmonic.
pub fn siu_residual_flat(m: &TestMap) -> Result<SiuReport> {
    if !m.generator.is_harmonic() {
        return Err(Error::domain(
            "the Bochner identities need a harmonic generator",
        ));
    }
    let fine = m.refined();
    let (a, b) = (siu_residuals(m), siu_residuals(&fine));
    let sc = scale(m);
    let h = m.h();
    Ok(SiuReport {
        siu: ResidualReport::from_pair(m.mesh, h, 3, sc, (a.0, b.0)),
        modified: ResidualReport::from_pair(m.mesh, h, 3, sc, (a.1, b.1)),
        factor_two: ResidualReport::from_pair(m.mesh, h, 3, sc, (a.2, b.2)),
        rhs_max: a.3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mono(powers: [u32; 4]) -> Generator {
        Generator::new(vec![Monomial {
            powers,
            coeff: vec![[1.0, 0.0]],
        }])
        .unwrap()
    }

    #[test]
    fn linear_maps_exact() {
        let m = TestMap::new(mono([1, 0, 0, 0]), 16).unwrap();
        let f = fd_forms(&m, [1, 2, -1, 0]);
        assert!((f.del_u[0] - Form::basis(0)).max_abs() < 1e-13);
        assert!(f.delbar_u[0].max_abs() < 1e-13);
        let m = TestMap::new(mono([0, 1, 0, 0]), 16).unwrap();
        let f = fd_forms(&m, [0, 0, 0, 0]);
        assert!(f.del_u[0].max_abs() < 1e-13);
        assert!((f.delbar_u[0] - Form::basis(1)).max_abs() < 1e-13);
    }

    #[test]
    fn coarse_mesh_rejected() {
        assert!(TestMap::new(mono([1, 0, 0, 0]), 4).is_err());
        assert!(TestMap::new(mono([1, 0, 0, 0]), 12).is_err());
    }

    #[test]
    fn calibration_example() {
        // u = z¹ z̄² v: every Siu side equals 4|v|²
        let v = [1.0, -2.0];
        let g = Generator::new(vec![Monomial {
            powers: [1, 0, 0, 1],
            coeff: vec![[v[0], v[1]]],
        }])
        .unwrap();
        let m = TestMap::new(g, 8).unwrap();
        let s = siu_sides(&m, [1, 0, -1, 1]);
        let want = 4.0 * (v[0] * v[0] + v[1] * v[1]);
        assert!((s.rhs - want).abs() < 1e-12);
        for x in s.siu {
            assert!((x - want).norm() < 1e-9, "{x}");
        }
        assert!((s.modified - 2.0 * want).norm() < 1e-9);
    }

    #[test]
    fn holomorphic_generators_have_vanishing_sides() {
        let g = mono([2, 0, 1, 0]);
        let m = TestMap::new(g, 8).unwrap();
        let f = fd_forms(&m, [1, 1, 1, 1]);
        assert!(f.delbar_u[0].max_abs() < 1e-13);
        let r = check_form4(&m);
        assert!(r.residual_h < 1e-12);
        let s = siu_residual_flat(&m).unwrap();
        assert!(s.siu.residual_h < 1e-8 && s.rhs_max == 0.0);
    }

    #[test]
    fn non_harmonic_rejected() {
        let m = TestMap::new(mono([1, 1, 0, 0]), 8).unwrap();
        assert!(siu_residual_flat(&m).is_err());
    }

    #[test]
    fn second_order_on_standard_generators() {
        for (name, g) in standard_generators() {
            let m = TestMap::new(g, 16).unwrap();
            let f = check_form4(&m);
            let c = check_commutation(&m);
            assert!(f.order_in(1.8, 2.2), "{name} form4 {f:?}");
            assert!(c.order_in(1.8, 2.2), "{name} commute {c:?}");
        }
    }
}
