use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spectral::null_space;
use super::{Classification, Isometry, Ray, ELLIPTIC_TOL};
use crate::error::{Error, Result};
use crate::npc::{Euclidean, Geometry};
use crate::spd::{matrix_from_rows, matrix_rows};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RigidFile {
    #[serde(default)]
    rotation: Option<Vec<Vec<f64>>>,
    translation: Vec<f64>,
}

/// `x ↦ R x + b` with `R` orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RigidFile", into = "RigidFile")]
pub struct RigidMotion {
    rotation: DMatrix<f64>,
    translation: DVector<f64>,
}

impl TryFrom<RigidFile> for RigidMotion {
    type Error = Error;
    fn try_from(f: RigidFile) -> Result<Self> {
        let n = f.translation.len();
        let rotation = match f.rotation {
            Some(rows) => matrix_from_rows(&rows).map_err(|e| Error::domain(e.to_string()))?,
            None => DMatrix::identity(n, n),
        };
        RigidMotion::new(rotation, DVector::from_vec(f.translation))
    }
}

impl From<RigidMotion> for RigidFile {
    fn from(m: RigidMotion) -> Self {
        RigidFile {
            rotation: Some(matrix_rows(&m.rotation)),
            translation: m.translation.iter().copied().collect(),
        }
    }
}

impl RigidMotion {
    pub fn new(rotation: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let n = translation.len();
        if n == 0 || rotation.shape() != (n, n) {
            return Err(Error::domain("rotation and translation sizes disagree"));
        }
        let gram = rotation.transpose() * &rotation;
        if (gram - DMatrix::<f64>::identity(n, n)).norm() > 1e-10 {
            return Err(Error::domain("rotation part is not orthogonal"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn translation(b: Vec<f64>) -> Self {
        let n = b.len();
        Self {
            rotation: DMatrix::identity(n, n),
            translation: DVector::from_vec(b),
        }
    }

    pub fn translation_vector(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    /// Component of `b` along the fixed space of `R`.
    fn axial_translation(&self) -> DVector<f64> {
        let n = self.translation.len();
        let fixed = null_space(&(&self.rotation - DMatrix::<f64>::identity(n, n)), 1e-10);
        let mut out = DVector::zeros(n);
        for c in fixed.column_iter() {
            out += c * c.dot(&self.translation);
        }
        out
    }

    fn min_point_near(&self, hint: &DVector<f64>) -> DVector<f64> {
        let n = hint.len();
        let a = &self.rotation - DMatrix::<f64>::identity(n, n);
        let b_perp = &self.translation - self.axial_translation();
        let residual = &a * hint + b_perp;
        let svd = a.svd(true, true);
        let correction = svd
            .solve(&residual, 1e-10)
            .expect("SVD computed with U and V");
        hint - correction
    }
}

impl Isometry<Euclidean> for RigidMotion {
    fn check(&self, g: &Euclidean) -> Result<()> {
        if self.translation.len() != g.dim {
            return Err(Error::domain(format!(
                "rigid motion of R^{} cannot act on R^{}",
                self.translation.len(),
                g.dim
            )));
        }
        Ok(())
    }

    fn apply(&self, _g: &Euclidean, p: &Vec<f64>) -> Vec<f64> {
        let x = DVector::from_column_slice(p);
        (&self.rotation * x + &self.translation)
            .iter()
            .copied()
            .collect()
    }

    fn apply_inverse(&self, _g: &Euclidean, p: &Vec<f64>) -> Vec<f64> {
        let x = DVector::from_column_slice(p);
        (self.rotation.transpose() * (x - &self.translation))
            .iter()
            .copied()
            .collect()
    }

    fn classify(&self, g: &Euclidean) -> Classification {
        if self.translation_length(g) > ELLIPTIC_TOL {
            Classification::Hyperbolic
        } else {
            Classification::Elliptic
        }
    }

    fn translation_length(&self, _g: &Euclidean) -> f64 {
        self.axial_translation().norm()
    }

    fn min_point(&self, g: &Euclidean, hint: &Vec<f64>) -> Result<Vec<f64>> {
        g.validate(hint)?;
        Ok(self
            .min_point_near(&DVector::from_column_slice(hint))
            .iter()
            .copied()
            .collect())
    }

    fn decay_ray(&self, g: &Euclidean) -> Result<Ray<Vec<f64>>> {
        let base = self.min_point(g, &g.base_point())?;
        let axial = self.axial_translation();
        let dir: Vec<f64> = if axial.norm() > 0.0 {
            (axial.clone() / axial.norm()).iter().copied().collect()
        } else {
            vec![0.0; g.dim]
        };
        Ok(Arc::new(move |t| {
            base.iter().zip(&dir).map(|(b, d)| b + t * d).collect()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn screw_motion_translation_length() {
        // rotation about the z axis followed by a shift (1, 0, 2)
        let (c, s) = (0.5f64.cos(), 0.5f64.sin());
        let r = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
        let m = RigidMotion::new(r, DVector::from_vec(vec![1.0, 0.0, 2.0])).unwrap();
        let e = Euclidean::new(3).unwrap();
        assert!((m.translation_length(&e) - 2.0).abs() < 1e-12);
        let p = m.min_point(&e, &vec![5.0, -3.0, 1.0]).unwrap();
        let d = e.distance(&p, &m.apply(&e, &p));
        assert!((d - 2.0).abs() < 1e-12);
        assert_eq!(m.classify(&e), Classification::Hyperbolic);
    }

    #[test]
    fn json_round_trip() {
        let m: RigidMotion = serde_json::from_str(r#"{"translation":[1.0,2.0]}"#).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: RigidMotion = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<RigidMotion>(
            r#"{"rotation":[[1,1],[0,1]],"translation":[0,0]}"#
        )
        .is_err());
    }
}
