use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::report::ser_matrix;
use crate::spd::GroupElement;

/// `G = K A N` with `K` orthogonal, `A` positive diagonal and `N` unit upper
/// triangular.
#[derive(Debug, Clone, Serialize)]
pub struct Iwasawa {
    #[serde(serialize_with = "ser_matrix")]
    pub k: DMatrix<f64>,
    pub a: Vec<f64>,
    #[serde(serialize_with = "ser_matrix")]
    pub n: DMatrix<f64>,
    /// `‖G - K A N‖ / ‖G‖`.
    pub residual: f64,
}

/// Gram–Schmidt with one reorthogonalisation pass per column.
pub fn iwasawa(g: &GroupElement) -> Iwasawa {
    let m = g.matrix();
    let n = m.nrows();
    let mut q = DMatrix::<f64>::zeros(n, n);
    let mut r = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut v: DVector<f64> = m.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let c = q.column(i).dot(&v);
                r[(i, j)] += c;
                v -= q.column(i) * c;
            }
        }
        let norm = v.norm();
        r[(j, j)] = norm;
        q.set_column(j, &(v / norm));
    }
    let a: Vec<f64> = (0..n).map(|i| r[(i, i)]).collect();
    let mut unipotent = r.clone();
    for i in 0..n {
        for j in 0..n {
            unipotent[(i, j)] /= a[i];
        }
    }
    let recon = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&a)) * &unipotent;
    let residual = (m - recon).norm() / m.norm();
    Iwasawa {
        k: q,
        a,
        n: unipotent,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_have_the_right_shape() {
        let g = GroupElement::from_rows(&[
            vec![2.0, 1.0, 0.5],
            vec![-1.0, 3.0, 0.0],
            vec![0.2, 0.0, 1.0],
        ])
        .unwrap();
        let f = iwasawa(&g);
        assert!(f.residual < 1e-14);
        assert!(f.a.iter().all(|&x| x > 0.0));
        let ktk = f.k.transpose() * &f.k;
        assert!((ktk - DMatrix::identity(3, 3)).norm() < 1e-14);
        for i in 0..3 {
            assert!((f.n[(i, i)] - 1.0).abs() < 1e-15);
            for j in 0..i {
                assert_eq!(f.n[(i, j)], 0.0);
            }
        }
    }
}
