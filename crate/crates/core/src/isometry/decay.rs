use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::spectral::{self, BlockFrame};
use super::{classify_matrix, Classification, ELLIPTIC_TOL};
use crate::error::{Error, Result};
use crate::spd::{group_action, spd_distance, sym_eig, GroupElement, SpdPoint};

const MIN_FIT_POINTS: usize = 8;
const MONOTONE_TOL: f64 = 1e-9;
/// Excesses are floored at this fraction of the smallest tail sample.
const LOG_FLOOR: f64 = 1e-14;
/// Excesses below this fraction of the limiting displacement are rounding.
const RESOLVABLE_REL: f64 = 1e-7;

/// `t ↦ P exp(t V) Pᵀ` for a frame `P` and a unit diagonal direction `V`.
#[derive(Debug, Clone, Serialize)]
pub struct SpdRay {
    #[serde(serialize_with = "crate::report::ser_matrix")]
    pub frame: DMatrix<f64>,
    pub direction: Vec<f64>,
}

impl SpdRay {
    /// Decay ray of `G`: the flat direction of `log |eigenvalue|²` through
    /// `Min(G)` when `G` is semisimple, otherwise a direction that
    /// contracts the strictly block-upper part of the real Schur form.
    pub fn for_element(g: &GroupElement) -> Self {
        match spectral::semisimple_frame(g.matrix()) {
            Some(frame) => {
                let w: Vec<f64> = frame
                    .column_moduli_sq(g.matrix())
                    .iter()
                    .map(|m| m.ln())
                    .collect();
                let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                let direction = if norm > ELLIPTIC_TOL {
                    w.iter().map(|x| x / norm).collect()
                } else {
                    vec![0.0; w.len()]
                };
                SpdRay {
                    frame: frame.frame,
                    direction,
                }
            }
            None => Self::contracting(&spectral::triangular_frame(g.matrix())),
        }
    }

    /// Direction strictly decreasing across blocks, constant within a block.
    pub fn contracting(frame: &BlockFrame) -> Self {
        let k = frame.blocks.len() as f64;
        let mut direction = Vec::new();
        for (i, &b) in frame.blocks.iter().enumerate() {
            let v = k + 1.0 - 2.0 * (i as f64 + 1.0);
            direction.extend(std::iter::repeat_n(v, b));
        }
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            direction.iter_mut().for_each(|x| *x /= norm);
        }
        SpdRay {
            frame: frame.frame.clone(),
            direction,
        }
    }

    pub fn point(&self, t: f64) -> SpdPoint {
        let d = DVector::from_iterator(
            self.direction.len(),
            self.direction.iter().map(|v| (t * v).exp()),
        );
        let p = &self.frame;
        SpdPoint::trusted(p * DMatrix::from_diagonal(&d) * p.transpose())
    }

    /// `c(t)^{-1/2} (P⁻¹ G P) c(t)^{1/2}` with `c(t) = exp(tV)` computed
    /// through the symmetric eigensolver.
    pub fn conjugated(&self, g: &GroupElement, t: f64) -> Result<DMatrix<f64>> {
        let inv = self
            .frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::domain("ray frame is singular"))?;
        let d = &inv * g.matrix() * &self.frame;
        let c = DMatrix::from_diagonal(&DVector::from_iterator(
            self.direction.len(),
            self.direction.iter().map(|v| (t * v).exp()),
        ));
        let e = sym_eig(&c)?;
        let half = e.map(f64::sqrt);
        let inv_half = e.map(|x| 1.0 / x.sqrt());
        Ok(inv_half * d * half)
    }
}

/// Least-squares fit `d(t) ≈ Δ + b e^{-a t}` of a displacement series.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
    pub classification: Classification,
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

/// Fits the tail (second half) of `(t, d)` samples, ignoring trailing
/// samples whose excess over the final displacement is lost in rounding.
///
/// Δ is chosen by golden-section search to maximise the `R²` of the
/// log-linear fit of `d - Δ`. Constant tails give `a = b = 0`.
pub fn fit_exponential_decay(series: &[(f64, f64)]) -> Result<DecayFit> {
    let fail = |message: &str| Error::Fit {
        message: message.to_string(),
        series: series.to_vec(),
    };
    if series.len() < MIN_FIT_POINTS {
        return Err(fail("need at least 8 samples"));
    }
    if series
        .iter()
        .any(|(t, d)| !t.is_finite() || !d.is_finite() || *d < 0.0)
    {
        return Err(fail("series has non-finite or negative samples"));
    }
    if series.iter().all(|(_, d)| *d <= ELLIPTIC_TOL) {
        return Ok(DecayFit {
            delta: 0.0,
            a: 0.0,
            b: 0.0,
            r_squared: 1.0,
            classification: Classification::Elliptic,
        });
    }
    let tail = &series[series.len() / 2..];
    let max = tail.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if tail
        .windows(2)
        .any(|w| w[1].1 > w[0].1 + MONOTONE_TOL * (1.0 + max))
    {
        return Err(fail("displacement tail is not non-increasing"));
    }
    if max - min <= MONOTONE_TOL * (1.0 + min) {
        let classification = if min > ELLIPTIC_TOL {
            Classification::Hyperbolic
        } else {
            Classification::Elliptic
        };
        return Ok(DecayFit {
            delta: min,
            a: 0.0,
            b: 0.0,
            r_squared: 1.0,
            classification,
        });
    }
    let last = series[series.len() - 1].1;
    let cut = series
        .iter()
        .rposition(|p| p.1 - last > RESOLVABLE_REL * last)
        .map_or(series.len(), |k| k + 1)
        .max((2 * MIN_FIT_POINTS).min(series.len()));
    let usable = &series[..cut];
    let tail = &usable[usable.len() / 2..];
    let min = tail.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ts: Vec<f64> = tail.iter().map(|p| p.0).collect();
    let fit_at = |delta: f64| {
        let ys: Vec<f64> = tail
            .iter()
            .map(|p| (p.1 - delta).max(LOG_FLOOR * min).max(f64::MIN_POSITIVE).ln())
            .collect();
        linear_fit(&ts, &ys)
    };
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, min * (1.0 - 1e-9));
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (fit_at(x1).2, fit_at(x2).2);
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + min) {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = fit_at(x1).2;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = fit_at(x2).2;
        }
    }
    // the endpoint Δ = 0 is the common case for unipotent elements
    let mut delta = 0.5 * (lo + hi);
    if fit_at(0.0).2 >= fit_at(delta).2 {
        delta = 0.0;
    }
    let (slope, intercept, r_squared) = fit_at(delta);
    if slope >= 0.0 {
        return Err(fail("fitted decay rate is not positive"));
    }
    Ok(DecayFit {
        delta,
        a: -slope,
        b: intercept.exp(),
        r_squared,
        classification: Classification::Parabolic,
    })
}

/// Displacement of `G` along its decay ray, sampled on `steps + 1` points
/// of `[0, tmax]`, together with the fit.
#[derive(Debug, Clone, Serialize)]
pub struct DecayAnalysis {
    pub classification: Classification,
    pub rho: f64,
    pub ray: SpdRay,
    pub series: Vec<(f64, f64)>,
    pub fit: DecayFit,
}

pub fn decay_ray(g: &GroupElement, tmax: f64, steps: usize) -> Result<DecayAnalysis> {
    if !(tmax > 0.0 && tmax.is_finite()) || steps == 0 {
        return Err(Error::domain("need tmax > 0 and steps > 0"));
    }
    let ray = SpdRay::for_element(g);
    let mut series = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = tmax * k as f64 / steps as f64;
        let c = ray.point(t);
        series.push((t, spd_distance(&c, &group_action(g, &c)?)?));
    }
    let fit = fit_exponential_decay(&series)?;
    Ok(DecayAnalysis {
        classification: classify_matrix(g.matrix()),
        rho: spectral::rho(g.matrix()),
        ray,
        series,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unipotent_decay_rate() {
        let g = GroupElement::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let a = decay_ray(&g, 40.0, 400).unwrap();
        assert_eq!(a.classification, Classification::Parabolic);
        assert!(a.fit.delta <= 1e-8);
        assert!(
            (a.fit.a - std::f64::consts::FRAC_1_SQRT_2).abs()
                < 0.05 * std::f64::consts::FRAC_1_SQRT_2
        );
        assert!((a.ray.direction[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_constant_displacement() {
        let g = GroupElement::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0 / 3.0]]).unwrap();
        let a = decay_ray(&g, 10.0, 50).unwrap();
        assert_eq!(a.fit.classification, Classification::Hyperbolic);
        assert!((a.fit.delta - a.rho).abs() < 1e-10);
    }

    #[test]
    fn identity_is_elliptic() {
        let a = decay_ray(&GroupElement::identity(3), 5.0, 20).unwrap();
        assert_eq!(a.fit.classification, Classification::Elliptic);
        assert_eq!(a.fit.delta, 0.0);
    }

    #[test]
    fn fit_rejects_short_and_increasing_series() {
        let short: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(
            fit_exponential_decay(&short),
            Err(Error::Fit { .. })
        ));
        let up: Vec<(f64, f64)> = (0..20).map(|k| (k as f64, k as f64)).collect();
        match fit_exponential_decay(&up) {
            Err(Error::Fit { series, .. }) => assert_eq!(series.len(), 20),
            other => panic!("expected a fit error, got {other:?}"),
        }
    }

    #[test]
    fn fit_recovers_synthetic_parameters() {
        let series: Vec<(f64, f64)> = (0..100)
            .map(|k| {
                let t = k as f64 * 0.2;
                (t, 0.7 + 2.0 * (-0.9 * t).exp())
            })
            .collect();
        let fit = fit_exponential_decay(&series).unwrap();
        assert!((fit.delta - 0.7).abs() < 1e-6, "{fit:?}");
        assert!((fit.a - 0.9).abs() < 1e-3, "{fit:?}");
        assert!(fit.r_squared > 0.999999);
    }
}
