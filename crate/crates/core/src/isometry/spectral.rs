//! Spectral frames of invertible matrices.
//!
//! A *block frame* is an invertible `P` such that `P⁻¹ G P` is block
//! diagonal (semisimple case) or block upper triangular (general case) with
//! diagonal blocks that are either `1×1` real or `2×2` rotation-scalings
//! `[[a, -b], [b, a]]`. Block sizes are recorded so that per-block moduli can
//! be read off.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spd::sym_eig;

/// Eigenvalues closer than this (relative) are grouped before null spaces
/// are extracted; split Jordan blocks of size 3 spread by about `1e-5`.
const CLUSTER_TOL: f64 = 1e-4;
/// Singular values below `NULL_TOL · scale` count toward a null space.
const NULL_TOL: f64 = 1e-8;
/// Frames with a larger condition number are treated as defective.
const MAX_FRAME_COND: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct BlockFrame {
    pub frame: DMatrix<f64>,
    /// Block sizes (1 or 2) in column order.
    pub blocks: Vec<usize>,
}

impl BlockFrame {
    /// Start column of each block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = acc;
                acc += b;
                o
            })
            .collect()
    }

    /// `P⁻¹ G P`.
    pub fn conjugate(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let inv = self
            .frame
            .clone()
            .try_inverse()
            .expect("frame is invertible");
        inv * g * &self.frame
    }

    /// Squared modulus of each diagonal block of `P⁻¹ G P`, repeated per column.
    pub fn column_moduli_sq(&self, g: &DMatrix<f64>) -> Vec<f64> {
        let d = self.conjugate(g);
        let mut out = Vec::with_capacity(d.nrows());
        for (o, &b) in self.offsets().iter().zip(&self.blocks) {
            let m2 = if b == 1 {
                d[(*o, *o)].powi(2)
            } else {
                (d[(*o, *o)] * d[(o + 1, o + 1)] - d[(*o, o + 1)] * d[(o + 1, *o)]).abs()
            };
            out.extend(std::iter::repeat_n(m2, b));
        }
        out
    }

    /// Largest entry of `P⁻¹ G P` outside the diagonal blocks, split into the
    /// strictly-lower and strictly-upper block parts.
    pub fn off_block(&self, g: &DMatrix<f64>) -> (f64, f64) {
        let d = self.conjugate(g);
        let n = d.nrows();
        let mut owner = vec![0; n];
        for (k, (o, &b)) in self.offsets().iter().zip(&self.blocks).enumerate() {
            for c in *o..o + b {
                owner[c] = k;
            }
        }
        let (mut lower, mut upper) = (0.0f64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                if owner[i] > owner[j] {
                    lower = lower.max(d[(i, j)].abs());
                } else if owner[i] < owner[j] {
                    upper = upper.max(d[(i, j)].abs());
                }
            }
        }
        (lower, upper)
    }
}

pub fn eigenvalues(g: &DMatrix<f64>) -> Vec<Complex64> {
    Schur::new(g.clone())
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect()
}

/// `ρ(G) = sqrt(Σ (log |λ_i|²)²)`.
pub fn rho(g: &DMatrix<f64>) -> f64 {
    eigenvalues(g)
        .iter()
        .map(|l| (l.norm_sqr()).ln().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn scale_of(g: &DMatrix<f64>) -> f64 {
    g.norm().max(1.0)
}

/// Right null space of `m`: columns spanning `{x : m x ≈ 0}`.
pub(crate) fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let mut cols = Vec::new();
    for &k in &idx {
        if svd.singular_values[k] <= tol {
            cols.push(v_t.row(k).transpose());
        }
    }
    // rows of V^T beyond the rank of a wide SVD are absent; square input only
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&cols)
}

fn cluster(values: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &v in values {
        let tol = CLUSTER_TOL * v.norm().max(1.0);
        let hit: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|w| (w - v).norm() <= tol))
            .map(|(k, _)| k)
            .collect();
        match hit.as_slice() {
            [] => groups.push(vec![v]),
            [first, rest @ ..] => {
                for &r in rest.iter().rev() {
                    let moved = groups.remove(r);
                    groups[*first].extend(moved);
                }
                groups[*first].push(v);
            }
        }
    }
    groups
}

/// Columns spanning the invariant subspace of `G` for eigenvalue `center`
/// of multiplicity `dim` (real) or `dim` conjugate pairs (complex), arranged as real vectors (real center) or
/// rotation-scaling pairs (complex center). `None` when the null space is
/// too small, i.e. the eigenvalue is defective.
fn invariant_columns(
    g: &DMatrix<f64>,
    center: Complex64,
    dim: usize,
) -> Option<(Vec<nalgebra::DVector<f64>>, Vec<usize>)> {
    let n = g.nrows();
    let scale = scale_of(g);
    let id = DMatrix::<f64>::identity(n, n);
    if center.im.abs() <= CLUSTER_TOL * center.norm().max(1.0) {
        let ns = null_space(&(g - &id * center.re), NULL_TOL * scale);
        if ns.ncols() < dim {
            return None;
        }
        let cols = (0..dim).map(|k| ns.column(k).into_owned()).collect();
        return Some((cols, vec![1; dim]));
    }
    let (a, b) = (center.re, center.im.abs());
    let shifted = g - &id * a;
    let k = &shifted * &shifted + &id * (b * b);
    let ns = null_space(&k, NULL_TOL * scale * scale);
    if ns.ncols() < 2 * dim {
        return None;
    }
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut blocks = Vec::new();
    let mut candidates: Vec<nalgebra::DVector<f64>> =
        (0..ns.ncols()).map(|c| ns.column(c).into_owned()).collect();
    while cols.len() < 2 * dim {
        // pick the candidate with the largest component outside current span
        let mut best: Option<(f64, nalgebra::DVector<f64>)> = None;
        for c in &candidates {
            let mut r = c.clone();
            for _ in 0..2 {
                for q in &orthonormalize(&cols) {
                    let proj = q.dot(&r);
                    r -= q * proj;
                }
            }
            let nr = r.norm();
            if best.as_ref().is_none_or(|(bn, _)| nr > *bn) {
                best = Some((nr, r));
            }
        }
        let (nr, x) = best?;
        if nr < 1e-6 {
            return None;
        }
        let x = x / nr;
        let y = &shifted * &x / b;
        cols.push(x);
        cols.push(y);
        blocks.push(2);
        candidates.retain(|c| c.norm() > 0.0);
    }
    Some((cols, blocks))
}

fn orthonormalize(cols: &[nalgebra::DVector<f64>]) -> Vec<nalgebra::DVector<f64>> {
    let mut out: Vec<nalgebra::DVector<f64>> = Vec::new();
    for c in cols {
        let mut r = c.clone();
        for _ in 0..2 {
            for q in &out {
                let proj = q.dot(&r);
                r -= q * proj;
            }
        }
        let nr = r.norm();
        if nr > 1e-14 {
            out.push(r / nr);
        }
    }
    out
}

/// Condition number of `P` after normalising its columns.
pub fn frame_condition(p: &DMatrix<f64>) -> f64 {
    let mut q = p.clone();
    for mut c in q.column_iter_mut() {
        let n = c.norm();
        if n > 0.0 {
            c /= n;
        }
    }
    let gram = q.transpose() * &q;
    match sym_eig(&gram) {
        Ok(e) => {
            let hi = e.values[0];
            let lo = *e.values.last().unwrap();
            if lo <= 0.0 {
                f64::INFINITY
            } else {
                (hi / lo).sqrt()
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Block-diagonalising frame, or `None` when `G` is not diagonalisable
/// over `C` to working precision.
pub fn semisimple_frame(g: &DMatrix<f64>) -> Option<BlockFrame> {
    let mut values = eigenvalues(g);
    values.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    let mut cols = Vec::new();
    let mut blocks = Vec::new();
    for group in cluster(&values) {
        let mean = group.iter().sum::<Complex64>() / group.len() as f64;
        let real_center = mean.im.abs() <= CLUSTER_TOL * mean.norm().max(1.0);
        if !real_center && mean.im < 0.0 {
            continue;
        }
        let dim = group.len();
        if let Some((c, b)) = invariant_columns(g, mean, dim) {
            cols.extend(c);
            blocks.extend(b);
            continue;
        }
        // a cluster of distinct nearby eigenvalues: try each on its own
        for v in &group {
            let own_real = v.im.abs() <= 1e-12 * v.norm().max(1.0);
            if !own_real && v.im < 0.0 {
                continue;
            }
            let center = if own_real {
                Complex64::new(v.re, 0.0)
            } else {
                *v
            };
            let d = if own_real { 1 } else { 2 };
            let (c, b) = invariant_columns(g, center, d)?;
            cols.extend(c);
            blocks.extend(b);
        }
    }
    if cols.len() != g.nrows() {
        return None;
    }
    let frame = DMatrix::from_columns(&cols);
    if frame_condition(&frame) > MAX_FRAME_COND {
        return None;
    }
    Some(BlockFrame { frame, blocks })
}

/// Real Schur frame with complex `2×2` diagonal blocks normalised to
/// rotation-scalings; `P⁻¹ G P` is block upper triangular.
pub fn triangular_frame(g: &DMatrix<f64>) -> BlockFrame {
    let n = g.nrows();
    let (q, t) = Schur::new(g.clone()).unpack();
    let scale = scale_of(g);
    let mut blocks = Vec::new();
    let mut s = DMatrix::<f64>::identity(n, n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-14 * scale {
            let (b00, b01, b10, b11) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = b00 + b11;
            let det = b00 * b11 - b01 * b10;
            let disc = det - tr * tr / 4.0;
            if disc > 0.0 {
                let lambda = Complex64::new(tr / 2.0, disc.sqrt());
                // eigenvector (b01, λ - b00) of the block, split into real and imaginary parts
                let (vr0, vi0) = (b01, 0.0);
                let (vr1, vi1) = (lambda.re - b00, lambda.im);
                // columns (u, -w) give [[a, -b], [b, a]]
                s[(i, i)] = vr0;
                s[(i + 1, i)] = vr1;
                s[(i, i + 1)] = -vi0;
                s[(i + 1, i + 1)] = -vi1;
                blocks.push(2);
                i += 2;
                continue;
            }
        }
        blocks.push(1);
        i += 1;
    }
    BlockFrame {
        frame: q * s,
        blocks,
    }
}

/// Common frame for a commuting pair, from a generic combination.
pub fn common_frame(g1: &DMatrix<f64>, g2: &DMatrix<f64>, semisimple: bool) -> Result<BlockFrame> {
    if g1.shape() != g2.shape() {
        return Err(Error::domain("generators have different sizes"));
    }
    let scale = scale_of(g1) * scale_of(g2);
    let comm = g1 * g2 - g2 * g1;
    if comm.norm() > 1e-10 * scale {
        return Err(Error::domain(format!(
            "generators do not commute (|[G1, G2]| = {:.3e})",
            comm.norm()
        )));
    }
    let tol = 1e-8;
    for c in [
        0.6180339887498949,
        std::f64::consts::SQRT_2,
        -0.7320508075688772,
        std::f64::consts::E,
    ] {
        let combo = g1 + g2 * c;
        let frame = if semisimple {
            match semisimple_frame(&combo) {
                Some(f) => f,
                None => continue,
            }
        } else {
            triangular_frame(&combo)
        };
        let ok = [g1, g2].iter().all(|g| {
            let (lower, upper) = frame.off_block(g);
            let s = frame.conjugate(g).norm().max(1.0);
            lower <= tol * s && (!semisimple || upper <= tol * s)
        });
        if ok {
            return Ok(frame);
        }
    }
    Err(Error::domain(
        "no common block frame found for the generator pair",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn rho_of_diagonal() {
        let g = m(&[&[3.0, 0.0], &[0.0, 1.0 / 3.0]]);
        assert!((rho(&g) - 2f64.sqrt() * 9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn jordan_block_is_not_semisimple() {
        assert!(semisimple_frame(&m(&[&[1.0, 1.0], &[0.0, 1.0]])).is_none());
        let j3 = m(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]);
        assert!(semisimple_frame(&j3).is_none());
    }

    #[test]
    fn rotation_block_frame() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let g = m(&[
            &[2.0 * c, -2.0 * s, 0.0],
            &[2.0 * s, 2.0 * c, 0.0],
            &[0.0, 0.0, 0.5],
        ]);
        let f = semisimple_frame(&g).unwrap();
        let (lower, upper) = f.off_block(&g);
        assert!(lower < 1e-12 && upper < 1e-12);
        let mut mods = f.column_moduli_sq(&g);
        mods.sort_by(f64::total_cmp);
        assert!((mods[0] - 0.25).abs() < 1e-12 && (mods[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn close_but_distinct_eigenvalues_are_semisimple() {
        let g = m(&[&[1.0, 0.0], &[0.0, 1.00001]]);
        assert!(semisimple_frame(&g).is_some());
    }

    #[test]
    fn triangular_frame_normalises_complex_blocks() {
        let g = m(&[&[0.0, -2.0, 1.0], &[2.0, 0.0, 1.0], &[0.0, 0.0, 1.0]]);
        let f = triangular_frame(&g);
        let d = f.conjugate(&g);
        let (lower, _) = f.off_block(&g);
        assert!(lower < 1e-12);
        for (o, &b) in f.offsets().iter().zip(&f.blocks) {
            if b == 2 {
                assert!((d[(*o, *o)] - d[(o + 1, o + 1)]).abs() < 1e-12);
                assert!((d[(*o, o + 1)] + d[(o + 1, *o)]).abs() < 1e-12);
            }
        }
    }
}
