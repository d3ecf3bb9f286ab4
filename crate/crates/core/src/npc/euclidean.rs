use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::Geometry;
use crate::error::{Error, Result};

/// Flat `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Euclidean {
    pub dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("Euclidean space needs dim >= 1"));
        }
        Ok(Self { dim })
    }
}

impl Geometry for Euclidean {
    type Point = Vec<f64>;

    fn name(&self) -> &'static str {
        "euclidean"
    }

    fn distance(&self, p: &Vec<f64>, q: &Vec<f64>) -> f64 {
        p.iter()
            .zip(q)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn geodesic(&self, p: &Vec<f64>, q: &Vec<f64>, t: f64) -> Vec<f64> {
        p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect()
    }

    fn extend(&self, p: &Vec<f64>, q: &Vec<f64>, t: f64) -> Vec<f64> {
        self.geodesic(p, q, t)
    }

    fn barycenter(&self, points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
        let total: f64 = weights.iter().sum();
        let mut out = vec![0.0; self.dim];
        for (p, &w) in points.iter().zip(weights) {
            for (o, x) in out.iter_mut().zip(p) {
                *o += w * x;
            }
        }
        out.iter_mut().for_each(|o| *o /= total);
        out
    }

    fn validate(&self, p: &Vec<f64>) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::invalid(format!(
                "expected {} coordinates, got {}",
                self.dim,
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        Ok(())
    }

    fn coords(&self, p: &Vec<f64>) -> Vec<f64> {
        p.clone()
    }

    fn base_point(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }

    fn sample_point(&self, rng: &mut dyn RngCore, radius: f64) -> Vec<f64> {
        (0..self.dim)
            .map(|_| rng.gen_range(-radius..=radius))
            .collect()
    }

    fn cat_kappa_supported(&self) -> bool {
        false
    }
}
