use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coeff · (z¹)^a (z̄¹)^b (z²)^c (z̄²)^d` with a vector coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    /// Exponents of `z¹, z̄¹, z², z̄²`.
    pub powers: [u32; 4],
    /// One `[re, im]` pair per target component.
    pub coeff: Vec<[f64; 2]>,
}

/// Polynomial map `ℂ² → ℂ^m` in `z` and `z̄`, treated as independent
/// variables so every Wirtinger derivative is again a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorFile", into = "GeneratorFile")]
pub struct Generator {
    dim: usize,
    terms: Vec<(Complex64Vec, [u32; 4])>,
}

type Complex64Vec = Vec<Complex64>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    terms: Vec<Monomial>,
}

impl TryFrom<GeneratorFile> for Generator {
    type Error = Error;
    fn try_from(f: GeneratorFile) -> Result<Self> {
        Generator::new(f.terms)
    }
}

impl From<Generator> for GeneratorFile {
    fn from(g: Generator) -> Self {
        GeneratorFile {
            terms: g
                .terms
                .iter()
                .map(|(c, p)| Monomial {
                    powers: *p,
                    coeff: c.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }
}

impl Generator {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let dim = terms.first().map(|t| t.coeff.len()).unwrap_or(1);
        if dim == 0 {
            return Err(Error::domain(
                "generator coefficients need at least one component",
            ));
        }
        if terms.iter().any(|t| t.coeff.len() != dim) {
            return Err(Error::domain(
                "all generator terms need the same number of components",
            ));
        }
        if terms
            .iter()
            .flat_map(|t| t.coeff.iter())
            .any(|c| !c[0].is_finite() || !c[1].is_finite())
        {
            return Err(Error::domain("generator coefficients must be finite"));
        }
        let terms = terms
            .into_iter()
            .map(|t| {
                (
                    t.coeff.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
                    t.powers,
                )
            })
            .collect();
        Ok(Self { dim, terms }.normalized())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("bad generator file: {e}")))
    }

    /// Combines like monomials and drops zero terms.
    fn normalized(self) -> Self {
        let mut map: BTreeMap<[u32; 4], Vec<Complex64>> = BTreeMap::new();
        for (c, p) in self.terms {
            let e = map
                .entry(p)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.dim]);
            for (a, b) in e.iter_mut().zip(c) {
                *a += b;
            }
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.iter().any(|z| z.norm() > 0.0))
            .map(|(p, c)| (c, p))
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(_, p)| p.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Values at `(z¹, z²)`.
    pub fn eval(&self, z: [Complex64; 2]) -> Vec<Complex64> {
        let vars = [z[0], z[0].conj(), z[1], z[1].conj()];
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (c, p) in &self.terms {
            let mut m = Complex64::new(1.0, 0.0);
            for k in 0..4 {
                for _ in 0..p[k] {
                    m *= vars[k];
                }
            }
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ci * m;
            }
        }
        out
    }

    /// Wirtinger derivative in variable `k` (0: z¹, 1: z̄¹, 2: z², 3: z̄²).
    pub fn derivative(&self, k: usize) -> Generator {
        let terms = self
            .terms
            .iter()
            .filter(|(_, p)| p[k] > 0)
            .map(|(c, p)| {
                let mut q = *p;
                q[k] -= 1;
                (c.iter().map(|z| z * p[k] as f64).collect(), q)
            })
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
        .normalized()
    }

    /// `conj ∘ u`: conjugated coefficients, `z ↔ z̄` exponents swapped.
    pub fn conj(&self) -> Generator {
        let terms = self
            .terms
            .iter()
            .map(|(c, p)| {
                (
                    c.iter().map(|z| z.conj()).collect(),
                    [p[1], p[0], p[3], p[2]],
                )
            })
            .collect();
        Self {
            dim: self.dim,
            terms,
        }
        .normalized()
    }

    fn plus(&self, o: &Generator) -> Generator {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self {
            dim: self.dim,
            terms,
        }
        .normalized()
    }

    /// `Σ_α ∂²u/∂z^α∂z̄^α ≡ 0`, checked symbolically.
    pub fn is_harmonic(&self) -> bool {
        let lap = self
            .derivative(0)
            .derivative(1)
            .plus(&self.derivative(2).derivative(3));
        lap.terms
            .iter()
            .all(|(c, _)| c.iter().all(|z| z.norm() <= 1e-14))
    }
}

fn term(powers: [u32; 4], coeff: &[(f64, f64)]) -> Monomial {
    Monomial {
        powers,
        coeff: coeff.iter().map(|&(a, b)| [a, b]).collect(),
    }
}

/// Three fixed harmonic, non-pluriharmonic generators of degree four used by
/// the acceptance checks: `(name, generator)`.
pub fn standard_generators() -> Vec<(&'static str, Generator)> {
    let mixed = Generator::new(vec![
        term([1, 0, 0, 1], &[(1.0, 0.0), (0.0, 0.0)]),
        term([2, 0, 0, 2], &[(1.0, 0.0), (0.0, 0.0)]),
        term([3, 0, 0, 1], &[(0.0, 0.0), (0.0, 0.5)]),
        term([0, 0, 4, 0], &[(0.0, 0.0), (0.25, 0.0)]),
    ])
    .expect("valid generator");
    // x¹y¹x²y² + Re (z¹)⁴ + |z¹|² - |z²|² written in z, z̄
    let q = -1.0 / 16.0;
    let saddle = Generator::new(vec![
        term([2, 0, 2, 0], &[(q, 0.0)]),
        term([2, 0, 0, 2], &[(-q, 0.0)]),
        term([0, 2, 2, 0], &[(-q, 0.0)]),
        term([0, 2, 0, 2], &[(q, 0.0)]),
        term([4, 0, 0, 0], &[(0.5, 0.0)]),
        term([0, 4, 0, 0], &[(0.5, 0.0)]),
        term([1, 1, 0, 0], &[(1.0, 0.0)]),
        term([0, 0, 1, 1], &[(-1.0, 0.0)]),
    ])
    .expect("valid generator");
    let twisted = Generator::new(vec![
        term([0, 3, 1, 0], &[(0.5, -0.5)]),
        term([0, 1, 3, 0], &[(0.0, 1.0)]),
        term([3, 1, 0, 0], &[(0.2, 0.0)]),
        term([2, 0, 1, 1], &[(-0.6, 0.0)]),
        term([4, 0, 0, 0], &[(1.0, 1.0)]),
    ])
    .expect("valid generator");
    vec![("mixed", mixed), ("saddle", saddle), ("twisted", twisted)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_and_conjugation() {
        // u = (z¹)² z̄²
        let g = Generator::new(vec![term([2, 0, 0, 1], &[(1.0, 0.0)])]).unwrap();
        let z = [Complex64::new(0.3, -0.2), Complex64::new(-0.1, 0.4)];
        let d = g.derivative(0).eval(z)[0];
        assert!((d - 2.0 * z[0] * z[1].conj()).norm() < 1e-15);
        let gc = g.conj().eval(z)[0];
        assert!((gc - g.eval(z)[0].conj()).norm() < 1e-15);
    }

    #[test]
    fn standard_generators_are_harmonic() {
        for (name, g) in standard_generators() {
            assert!(g.is_harmonic(), "{name}");
            assert_eq!(g.degree(), 4, "{name}");
        }
        let bad = Generator::new(vec![term([1, 1, 0, 0], &[(1.0, 0.0)])]).unwrap();
        assert!(!bad.is_harmonic());
    }

    #[test]
    fn json_round_trip() {
        let (_, g) = standard_generators().remove(0);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(Generator::from_json(&text).unwrap(), g);
        assert!(Generator::from_json(r#"{"terms": [], "extra": 1}"#).is_err());
    }
}
