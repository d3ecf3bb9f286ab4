//! The symmetric space `P(n, R)` of positive-definite matrices with the
//! affine-invariant metric `<V, W>_p = Tr(p⁻¹ V p⁻¹ W)`.

mod eig;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

pub use eig::{asymmetry, sym_eig, symmetrize, SymEig};

use crate::error::{Error, Result};
use crate::npc::Geometry;

const SPD_EIG_FLOOR: f64 = 1e-12;
const KARCHER_MAX_ITERS: usize = 200;

/// A symmetric positive-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdPoint(DMatrix<f64>);

impl SpdPoint {
    /// Validates symmetry (`1e-12` relative) and positivity (`λ_min > 1e-12`).
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid(
                "SPD point must be a non-empty square matrix",
            ));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("SPD point has non-finite entries"));
        }
        if asymmetry(&m) > 1e-12 {
            return Err(Error::invalid(format!(
                "matrix is not symmetric (relative asymmetry {:.3e})",
                asymmetry(&m)
            )));
        }
        let m = symmetrize(&m);
        let e = eig::jacobi(&m);
        let min = *e.values.last().unwrap();
        if min <= SPD_EIG_FLOOR {
            return Err(Error::invalid(format!(
                "matrix is not positive definite (smallest eigenvalue {min:.3e})"
            )));
        }
        Ok(SpdPoint(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        SpdPoint(DMatrix::identity(n, n))
    }

    /// Wraps a matrix produced by an exact construction; only symmetrizes.
    pub(crate) fn trusted(m: DMatrix<f64>) -> Self {
        SpdPoint(symmetrize(&m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.0)
    }
}

/// A symmetric matrix viewed as a tangent vector at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: SpdPoint,
    pub matrix: DMatrix<f64>,
}

impl TangentVector {
    pub fn new(base: SpdPoint, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.shape() != base.0.shape() {
            return Err(Error::invalid(
                "tangent vector shape does not match base point",
            ));
        }
        if matrix.norm() > 0.0 && asymmetry(&matrix) > 1e-12 {
            return Err(Error::invalid("tangent vector must be symmetric"));
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
            base,
        })
    }

    /// Riemannian norm `sqrt(Tr(p⁻¹ V p⁻¹ V))`.
    pub fn norm(&self) -> f64 {
        let w = whiten(&self.base, &self.matrix);
        w.norm()
    }
}

/// An invertible matrix acting on `P(n, R)` by `p ↦ G p Gᵀ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct GroupElement(DMatrix<f64>);

impl GroupElement {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::domain(
                "group element must be a non-empty square matrix",
            ));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("group element has non-finite entries"));
        }
        let scale = m.norm().powi(m.nrows() as i32).max(f64::MIN_POSITIVE);
        if m.determinant().abs() <= 1e-12 * scale {
            return Err(Error::domain("group element is singular"));
        }
        Ok(GroupElement(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows).map_err(|e| Error::domain(e.to_string()))?)
    }

    pub fn identity(n: usize) -> Self {
        GroupElement(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement(self.0.clone().try_inverse().expect("validated invertible"))
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &other.0)
    }
}

impl TryFrom<Vec<Vec<f64>>> for GroupElement {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        GroupElement::from_rows(&rows)
    }
}

impl From<GroupElement> for Vec<Vec<f64>> {
    fn from(g: GroupElement) -> Self {
        matrix_rows(&g.0)
    }
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::invalid("empty matrix"));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::invalid("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// `(p^{1/2}, p^{-1/2})` from a single eigen-decomposition.
fn half_powers(p: &SpdPoint) -> (DMatrix<f64>, DMatrix<f64>) {
    let e = eig::jacobi(&p.0);
    (e.map(f64::sqrt), e.map(|x| 1.0 / x.sqrt()))
}

/// `p^{-1/2} V p^{-1/2}`: the representative of `V` at the identity.
fn whiten(p: &SpdPoint, v: &DMatrix<f64>) -> DMatrix<f64> {
    let (_, ih) = half_powers(p);
    symmetrize(&(&ih * v * &ih))
}

fn sym_exp(s: &DMatrix<f64>) -> DMatrix<f64> {
    eig::jacobi(&symmetrize(s)).map(f64::exp)
}

fn sym_log(s: &DMatrix<f64>) -> DMatrix<f64> {
    eig::jacobi(&symmetrize(s)).map(f64::ln)
}

/// Geodesic `t ↦ p^{1/2} exp(t p^{-1/2} V p^{-1/2}) p^{1/2}`.
pub fn spd_exp(v: &TangentVector, t: f64) -> SpdPoint {
    let (h, ih) = half_powers(&v.base);
    let w = symmetrize(&(&ih * &v.matrix * &ih));
    SpdPoint::trusted(&h * sym_exp(&(w * t)) * &h)
}

/// Inverse of [`spd_exp`] at `t = 1`.
pub fn spd_log(p: &SpdPoint, q: &SpdPoint) -> Result<TangentVector> {
    check_dims(p, q)?;
    let (h, ih) = half_powers(p);
    let inner = sym_log(&(&ih * &q.0 * &ih));
    Ok(TangentVector {
        base: p.clone(),
        matrix: symmetrize(&(&h * inner * &h)),
    })
}

/// `G p Gᵀ`.
pub fn group_action(g: &GroupElement, p: &SpdPoint) -> Result<SpdPoint> {
    if g.dim() != p.dim() {
        return Err(Error::invalid(format!(
            "group element of size {} cannot act on P({})",
            g.dim(),
            p.dim()
        )));
    }
    Ok(SpdPoint::trusted(&g.0 * &p.0 * g.0.transpose()))
}

/// `sqrt(Σ log² λ_i)` with `λ_i` the eigenvalues of `p^{-1/2} q p^{-1/2}`.
pub fn spd_distance(p: &SpdPoint, q: &SpdPoint) -> Result<f64> {
    check_dims(p, q)?;
    Ok(distance_unchecked(p, q))
}

fn distance_unchecked(p: &SpdPoint, q: &SpdPoint) -> f64 {
    let (_, ih) = half_powers(p);
    let m = symmetrize(&(&ih * &q.0 * &ih));
    eig::jacobi(&m)
        .values
        .iter()
        .map(|l| l.ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_dims(p: &SpdPoint, q: &SpdPoint) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::invalid(format!(
            "points live in P({}) and P({})",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

/// `p^{1/2} (p^{-1/2} q p^{-1/2})^t p^{1/2}`; valid for every real `t`.
fn power_path(p: &SpdPoint, q: &SpdPoint, t: f64) -> SpdPoint {
    let (h, ih) = half_powers(p);
    let m = symmetrize(&(&ih * &q.0 * &ih));
    let mt = eig::jacobi(&m).map(|l| l.powf(t));
    SpdPoint::trusted(&h * mt * &h)
}

/// `P(n, R)` with the affine-invariant metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpdSpace {
    pub n: usize,
}

impl SpdSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("P(n, R) needs n >= 1"));
        }
        Ok(Self { n })
    }

    /// One Riemannian step `exp_x(ω Σ w_i log_x p_i)` carried out in
    /// coordinates whitened at `x`.
    fn karcher_step(
        &self,
        x: &SpdPoint,
        points: &[SpdPoint],
        weights: &[f64],
        omega: f64,
    ) -> (SpdPoint, f64) {
        let (h, ih) = half_powers(x);
        let mut s = DMatrix::<f64>::zeros(self.n, self.n);
        for (p, &w) in points.iter().zip(weights) {
            s += sym_log(&(&ih * &p.0 * &ih)) * w;
        }
        let s = symmetrize(&s);
        let step = s.norm();
        (SpdPoint::trusted(&h * sym_exp(&(s * omega)) * &h), step)
    }
}

impl Geometry for SpdSpace {
    type Point = SpdPoint;

    fn name(&self) -> &'static str {
        "spd"
    }

    fn distance(&self, p: &SpdPoint, q: &SpdPoint) -> f64 {
        distance_unchecked(p, q)
    }

    fn geodesic(&self, p: &SpdPoint, q: &SpdPoint, t: f64) -> SpdPoint {
        power_path(p, q, t)
    }

    fn extend(&self, p: &SpdPoint, q: &SpdPoint, t: f64) -> SpdPoint {
        power_path(p, q, t)
    }

    fn barycenter(&self, points: &[SpdPoint], weights: &[f64]) -> SpdPoint {
        let mut x = points[0].clone();
        for _ in 0..KARCHER_MAX_ITERS {
            let (next, step) = self.karcher_step(&x, points, weights, 1.0);
            x = next;
            if step < 1e-14 {
                break;
            }
        }
        x
    }

    fn relax_update(
        &self,
        x: &SpdPoint,
        neighbors: &[SpdPoint],
        weights: &[f64],
        omega: f64,
    ) -> SpdPoint {
        self.karcher_step(x, neighbors, weights, omega).0
    }

    fn validate(&self, p: &SpdPoint) -> Result<()> {
        if p.dim() != self.n {
            return Err(Error::invalid(format!(
                "expected a point of P({}), got P({})",
                self.n,
                p.dim()
            )));
        }
        SpdPoint::new(p.0.clone()).map(|_| ())
    }

    fn coords(&self, p: &SpdPoint) -> Vec<f64> {
        p.0.iter().copied().collect()
    }

    fn base_point(&self) -> SpdPoint {
        SpdPoint::identity(self.n)
    }

    fn sample_point(&self, rng: &mut dyn RngCore, radius: f64) -> SpdPoint {
        let raw = DMatrix::<f64>::from_fn(self.n, self.n, |_, _| rng.gen_range(-1.0..1.0));
        let v = symmetrize(&raw);
        let norm = v.norm().max(1e-300);
        let r = radius * rng.gen_range(0.0..1.0f64);
        SpdPoint::trusted(sym_exp(&(v * (r / norm))))
    }

    fn cat_kappa_supported(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn diag(d: &[f64]) -> SpdPoint {
        SpdPoint::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            d,
        )))
        .unwrap()
    }

    #[test]
    fn identity_to_diagonal() {
        let e = std::f64::consts::E;
        let d = spd_distance(&SpdPoint::identity(2), &diag(&[e * e, 1.0 / (e * e)])).unwrap();
        assert_abs_diff_eq!(d, 2.0 * 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn distance_matches_polyline_length() {
        // fine polyline along the computed geodesic, chords measured with the metric at midpoints
        let p = SpdPoint::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap();
        let q = SpdPoint::from_rows(&[vec![0.7, -0.2], vec![-0.2, 3.0]]).unwrap();
        let space = SpdSpace::new(2).unwrap();
        let n = 2000;
        let mut len = 0.0;
        for k in 0..n {
            let a = space.geodesic(&p, &q, k as f64 / n as f64);
            let b = space.geodesic(&p, &q, (k + 1) as f64 / n as f64);
            let mid = space.geodesic(&p, &q, (k as f64 + 0.5) / n as f64);
            let v = TangentVector::new(mid, b.matrix() - a.matrix()).unwrap();
            len += v.norm();
        }
        assert_abs_diff_eq!(len, spd_distance(&p, &q).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn exp_log_round_trip() {
        let p = SpdPoint::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap();
        let q = SpdPoint::from_rows(&[vec![0.7, -0.2], vec![-0.2, 3.0]]).unwrap();
        let v = spd_log(&p, &q).unwrap();
        let back = spd_exp(&v, 1.0);
        assert!((back.matrix() - q.matrix()).norm() < 1e-12);
        assert_abs_diff_eq!(v.norm(), spd_distance(&p, &q).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(SpdPoint::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(SpdPoint::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
        assert!(GroupElement::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_err());
        let p = SpdPoint::identity(2);
        let q = SpdPoint::identity(3);
        assert!(matches!(spd_distance(&p, &q), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn action_is_isometric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let space = SpdSpace::new(3).unwrap();
        for _ in 0..20 {
            let g =
                GroupElement::new(DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0))).unwrap();
            let p = space.sample_point(&mut rng, 2.0);
            let q = space.sample_point(&mut rng, 2.0);
            let gp = group_action(&g, &p).unwrap();
            let gq = group_action(&g, &q).unwrap();
            assert_abs_diff_eq!(
                space.distance(&gp, &gq),
                space.distance(&p, &q),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn karcher_mean_of_commuting_points() {
        let space = SpdSpace::new(2).unwrap();
        let pts = vec![diag(&[1.0, 4.0]), diag(&[4.0, 1.0])];
        let m = space.barycenter(&pts, &[0.5, 0.5]);
        assert!((m.matrix() - DMatrix::identity(2, 2) * 2.0).norm() < 1e-13);
    }
}
