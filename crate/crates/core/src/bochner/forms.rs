//! Exterior algebra over `ℂ²` with basis `dz¹, dz̄¹, dz², dz̄²`.
//!
//! A basis element of any degree is a 4-bit mask; bit `k` is the `k`-th
//! generator above, and masks are read in increasing bit order, so the top
//! form is `dz¹ ∧ dz̄¹ ∧ dz² ∧ dz̄²`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

pub const TOP: usize = 0b1111;

/// Sign of `e_a ∧ e_b` relative to `e_{a|b}`, or zero when they overlap.
pub fn wedge_sign(a: usize, b: usize) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut inversions = 0;
    for i in 0..4 {
        if a >> i & 1 == 1 {
            inversions += (b & ((1 << i) - 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `conj(e_m) = sign · e_{m'}` where conjugation swaps `dz^α ↔ dz̄^α`.
pub fn conj_basis(m: usize) -> (f64, usize) {
    let seq: Vec<usize> = (0..4).filter(|i| m >> i & 1 == 1).map(|i| i ^ 1).collect();
    let mut inversions = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    let mask = seq.iter().fold(0, |acc, b| acc | 1 << b);
    (if inversions % 2 == 0 { 1.0 } else { -1.0 }, mask)
}

/// A mixed-degree complex differential form with constant coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Form(pub [Complex64; 16]);

impl Default for Form {
    fn default() -> Self {
        Self::zero()
    }
}

impl Form {
    pub fn zero() -> Self {
        Form([Complex64::new(0.0, 0.0); 16])
    }

    pub fn scalar(c: Complex64) -> Self {
        let mut f = Self::zero();
        f.0[0] = c;
        f
    }

    /// The one-form for generator `k` (0: dz¹, 1: dz̄¹, 2: dz², 3: dz̄²).
    pub fn basis(k: usize) -> Self {
        let mut f = Self::zero();
        f.0[1 << k] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn wedge(&self, o: &Form) -> Form {
        let mut r = Self::zero();
        for a in 0..16 {
            if self.0[a] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..16 {
                let s = wedge_sign(a, b);
                if s != 0.0 {
                    r.0[a | b] += self.0[a] * o.0[b] * s;
                }
            }
        }
        r
    }

    pub fn conj(&self) -> Form {
        let mut r = Self::zero();
        for m in 0..16 {
            let (s, m2) = conj_basis(m);
            r.0[m2] += self.0[m].conj() * s;
        }
        r
    }

    pub fn top(&self) -> Complex64 {
        self.0[TOP]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, o: Form) -> Form {
        self += o;
        self
    }
}

impl AddAssign for Form {
    fn add_assign(&mut self, o: Form) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, o: Form) -> Form {
        self + (-o)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(mut self) -> Form {
        for a in self.0.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul<Complex64> for Form {
    type Output = Form;
    fn mul(mut self, c: Complex64) -> Form {
        for a in self.0.iter_mut() {
            *a *= c;
        }
        self
    }
}

/// A form with values in `ℂ^m`, one `Form` per component.
pub type VForm = Vec<Form>;

/// `{ψ, ξ} = Σ_i ψ_i ∧ conj(ξ_i)` for the flat Hermitian pairing.
pub fn bracket(psi: &[Form], xi: &[Form]) -> Form {
    psi.iter()
        .zip(xi)
        .fold(Form::zero(), |acc, (p, x)| acc + p.wedge(&x.conj()))
}

pub fn vmax_diff(a: &[Form], b: &[Form]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).max_abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wedge_is_graded_anticommutative() {
        let a = Form::basis(0);
        let b = Form::basis(3);
        assert_eq!(a.wedge(&b), -b.wedge(&a));
        assert_eq!(a.wedge(&a), Form::zero());
        let top = Form::basis(0)
            .wedge(&Form::basis(1))
            .wedge(&Form::basis(2))
            .wedge(&Form::basis(3));
        assert_eq!(top.top(), c(1.0, 0.0));
        let swapped = Form::basis(2)
            .wedge(&Form::basis(1))
            .wedge(&Form::basis(0))
            .wedge(&Form::basis(3));
        assert_eq!(swapped.top(), c(-1.0, 0.0));
    }

    #[test]
    fn conjugation() {
        // conj(dz¹ ∧ dz̄¹) = dz̄¹ ∧ dz¹ = -dz¹ ∧ dz̄¹
        let f = Form::basis(0).wedge(&Form::basis(1)) * c(0.0, 1.0);
        assert_eq!(f.conj().0[0b11], c(0.0, 1.0));
        let g = Form::basis(0).wedge(&Form::basis(2)) * c(2.0, 3.0);
        assert_eq!(g.conj().0[0b1010], c(2.0, -3.0));
        assert_eq!(g.conj().conj(), g);
    }
}
