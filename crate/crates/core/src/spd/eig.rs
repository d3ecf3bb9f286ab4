//! Cyclic Jacobi eigensolver for real symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SWEEP_LIMIT: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigen-decomposition `S = V diag(values) Vᵀ` with eigenvalues in
/// descending order and orthonormal eigenvectors stored as columns of `V`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEig {
    /// Rebuilds `V diag(f(λ)) Vᵀ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            for r in 0..n {
                scaled[(r, k)] *= fk;
            }
        }
        let out = &scaled * self.vectors.transpose();
        symmetrize(&out)
    }
}

/// Frobenius-relative asymmetry of a square matrix.
pub fn asymmetry(s: &DMatrix<f64>) -> f64 {
    let scale = s.norm().max(f64::MIN_POSITIVE);
    (s - s.transpose()).norm() / scale
}

pub fn symmetrize(s: &DMatrix<f64>) -> DMatrix<f64> {
    (s + s.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix.
///
/// Fails with a domain error when the input is not square or is asymmetric
/// beyond `1e-12` relative Frobenius norm.
pub fn sym_eig(s: &DMatrix<f64>) -> Result<SymEig> {
    if !s.is_square() {
        return Err(Error::domain(format!(
            "expected a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("matrix has non-finite entries"));
    }
    if s.nrows() > 0 && s.norm() > 0.0 && asymmetry(s) > SYMMETRY_TOL {
        return Err(Error::domain(format!(
            "matrix is not symmetric (relative asymmetry {:.3e})",
            asymmetry(s)
        )));
    }
    Ok(jacobi(&symmetrize(s)))
}

/// Jacobi iteration on an input already known to be symmetric.
pub(crate) fn jacobi(s: &DMatrix<f64>) -> SymEig {
    let n = s.nrows();
    let mut a = s.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = s.norm();

    if scale > 0.0 {
        for _ in 0..SWEEP_LIMIT {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += 2.0 * a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() <= OFF_DIAGONAL_TOL * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - sn * akq;
                        a[(k, q)] = sn * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - sn * aqk;
                        a[(q, k)] = sn * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - sn * vkq;
                        v[(k, q)] = sn * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        // sign convention: largest-magnitude component positive
        let col = v.column(src);
        let mut pivot = 0;
        for r in 0..n {
            if col[r].abs() > col[pivot].abs() + 1e-12 {
                pivot = r;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[(r, dst)] = sign * col[r];
        }
    }
    SymEig { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn reconstruct(e: &SymEig) -> DMatrix<f64> {
        e.map(|x| x)
    }

    #[test]
    fn diagonal_input() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let e = sym_eig(&s).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_abs_diff_eq!(e.vectors[(1, 0)].abs(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn quarter_turn_eigenvectors() {
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = sym_eig(&s).unwrap();
        assert_abs_diff_eq!(e.values[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        assert_abs_diff_eq!((v0[0] * h + v0[1] * h).abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eig(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn repeated_eigenvalues() {
        let s = DMatrix::<f64>::identity(4, 4) * 2.5;
        let e = sym_eig(&s).unwrap();
        assert!(e.values.iter().all(|&x| (x - 2.5).abs() < 1e-15));
        assert!((reconstruct(&e) - s).norm() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..7 {
            let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let s = symmetrize(&m);
            let e = sym_eig(&s).unwrap();
            assert!((reconstruct(&e) - &s).norm() < 1e-13 * (1.0 + s.norm()));
            let vtv = e.vectors.transpose() * &e.vectors;
            assert!((vtv - DMatrix::identity(n, n)).norm() < 1e-13);
            for w in e.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }
}
