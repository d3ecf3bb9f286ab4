//! Dyadic-shell check of the weighted integral inequality
//! `∫₀^{1/4} ψ dr / (r (log r²)²) ≤ c log 2 + ∫₀^{1/4} (ψ - c) dr / r`
//! for `ψ ≥ c ≥ 0`.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};

/// Shells `2^{-i-1} ≤ r ≤ 2^{-i}` for `i = 2..=LAST_SHELL`; below that `ψ` is
/// taken constant at its last sampled value.
const LAST_SHELL: u32 = 60;
const PANELS: usize = 32;
const ORDER: usize = 8;
pub const CLIP_RADIUS: f64 = 9.5367431640625e-7; // 2^-20

#[derive(Debug, Clone, Serialize)]
pub struct CalculusReport {
    pub c: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative when the inequality holds.
    pub residual: f64,
    pub shells: u32,
    pub samples: usize,
    pub min_psi: f64,
}

impl CalculusReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.residual >= -tol
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `c + r² sin²(1/r)` on `r ≥ 2^{-20}` and `c` below.
pub fn clipped_oscillation(c: f64) -> impl Fn(f64) -> f64 + Copy {
    move |r: f64| {
        if r >= CLIP_RADIUS {
            c + r * r * (1.0 / r).sin().powi(2)
        } else {
            c
        }
    }
}

/// Evaluates both sides shell by shell with composite Gauss–Legendre
/// quadrature in `u = -log r`, where both integrands are smooth.
pub fn calculus_weight_check(psi: impl Fn(f64) -> f64, c: f64) -> Result<CalculusReport> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::domain(format!(
            "c must be a nonnegative real, got {c}"
        )));
    }
    let rule = gauss_legendre(ORDER);
    let (mut lhs, mut excess) = (0.0, 0.0);
    let mut min_psi = f64::INFINITY;
    let mut samples = 0;
    let mut last = c;
    for i in 2..=LAST_SHELL {
        // r = e^{-u}, dr/r = -du, log r² = -2u
        let (u0, u1) = (i as f64 * LN_2, (i + 1) as f64 * LN_2);
        let h = (u1 - u0) / PANELS as f64;
        for p in 0..PANELS {
            let mid = u0 + (p as f64 + 0.5) * h;
            for &(x, w) in &rule {
                let u = mid + 0.5 * h * x;
                let v = psi((-u).exp());
                samples += 1;
                if !(v >= c) {
                    return Err(Error::domain(format!(
                        "psi = {v} < c = {c} at r = {:.6e}",
                        (-u).exp()
                    )));
                }
                min_psi = min_psi.min(v);
                let wt = 0.5 * h * w;
                lhs += wt * v / (4.0 * u * u);
                excess += wt * (v - c);
                last = v;
            }
        }
    }
    // ∫_{u ≥ u_end} du / (4u²) = 1 / (4 u_end)
    lhs += last / (4.0 * (LAST_SHELL + 1) as f64 * LN_2);
    let rhs = c * LN_2 + excess;
    Ok(CalculusReport {
        c,
        lhs,
        rhs,
        residual: rhs - lhs,
        shells: LAST_SHELL - 1,
        samples,
        min_psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_rule_integrates_polynomials() {
        let rule = gauss_legendre(ORDER);
        let s: f64 = rule.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn constant_psi_closed_form() {
        let r = calculus_weight_check(|_| 2.0, 2.0).unwrap();
        // ∫ dr / (r (log r²)²) over (0, 1/4] = 1 / (8 log 2)
        assert!((r.lhs - 2.0 / (8.0 * LN_2)).abs() < 1e-12, "{}", r.lhs);
        assert!((r.rhs - 2.0 * LN_2).abs() < 1e-15);
        assert!(r.holds(0.0));
    }

    #[test]
    fn linear_and_clipped() {
        let r = calculus_weight_check(|r| 1.0 + r, 1.0).unwrap();
        // ∫ r dr / r = 1/4 up to the truncated tail
        assert!((r.rhs - (LN_2 + 0.25)).abs() < 1e-12);
        assert!(r.holds(1e-6));
        let r = calculus_weight_check(clipped_oscillation(0.5), 0.5).unwrap();
        assert!(r.holds(1e-6));
    }

    #[test]
    fn psi_below_c_rejected() {
        assert!(matches!(
            calculus_weight_check(|r| if r < 0.1 { 0.9 } else { 1.0 }, 1.0),
            Err(Error::Domain(_))
        ));
    }
}
