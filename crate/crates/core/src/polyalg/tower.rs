use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::poly::MultiPoly;
use super::{euclid_divide, PolyError};

/// One simple extension `θ` with a monic definer over the levels below.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extension {
    pub sym: String,
    pub minpoly: MultiPoly,
}

/// ℚ followed by simple extensions. Elements are polynomials in the extension
/// symbols, kept in normal form: degree in each symbol below its definer's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTower", into = "RawTower")]
pub struct FieldTower {
    syms: Vec<String>,
    definers: Vec<MultiPoly>,
}

#[derive(Serialize, Deserialize)]
struct RawTower {
    extensions: Vec<Extension>,
}

impl TryFrom<RawTower> for FieldTower {
    type Error = PolyError;
    fn try_from(raw: RawTower) -> Result<Self, PolyError> {
        FieldTower::new(raw.extensions)
    }
}

impl From<FieldTower> for RawTower {
    fn from(t: FieldTower) -> Self {
        RawTower {
            extensions: t
                .syms
                .iter()
                .zip(&t.definers)
                .map(|(s, m)| Extension { sym: s.clone(), minpoly: m.clone() })
                .collect(),
        }
    }
}

impl FieldTower {
    pub fn rationals() -> Self {
        FieldTower { syms: Vec::new(), definers: Vec::new() }
    }

    /// Definers may mention only their own symbol and earlier ones.
    pub fn new(extensions: Vec<Extension>) -> Result<Self, PolyError> {
        let syms: Vec<String> = extensions.iter().map(|e| e.sym.clone()).collect();
        let mut tower = FieldTower { syms: syms.clone(), definers: Vec::new() };
        for (k, ext) in extensions.iter().enumerate() {
            if syms[..k].contains(&ext.sym) {
                return Err(PolyError::BadTower(format!("duplicate symbol {:?}", ext.sym)));
            }
            let m = ext.minpoly.with_vars(&syms[..=k]).map_err(|_| {
                PolyError::BadTower(format!("definer of {} uses a later or unknown symbol", ext.sym))
            })?;
            let m = m.with_vars(&syms)?;
            if m.degree_in(k).unwrap_or(0) == 0 || !m.is_monic_in(k) {
                return Err(PolyError::BadTower(format!("definer of {} must be monic of degree ≥ 1", ext.sym)));
            }
            let reduced_coeffs = m.coefficients_in(k).iter().map(|c| tower.reduce(c)).collect::<Vec<_>>();
            tower.definers.push(MultiPoly::from_coefficients_in(&syms, k, &reduced_coeffs));
        }
        Ok(tower)
    }

    pub fn syms(&self) -> &[String] {
        &self.syms
    }

    pub fn depth(&self) -> usize {
        self.syms.len()
    }

    pub fn degree_of(&self, level: usize) -> u32 {
        self.definers[level].degree_in(level).unwrap_or(0)
    }

    pub fn zero(&self) -> MultiPoly {
        MultiPoly::zero(&self.syms)
    }

    pub fn one(&self) -> MultiPoly {
        MultiPoly::one(&self.syms)
    }

    pub fn constant(&self, c: BigRational) -> MultiPoly {
        MultiPoly::constant(&self.syms, c)
    }

    pub fn generator(&self, level: usize) -> MultiPoly {
        self.reduce(&MultiPoly::var(&self.syms, level))
    }

    /// Canonical form modulo every definer present in the tower.
    pub fn reduce(&self, a: &MultiPoly) -> MultiPoly {
        let mut cur = a.clone();
        for k in (0..self.definers.len()).rev() {
            cur = euclid_divide(&cur, &self.definers[k], k).expect("definers are monic").1;
        }
        cur
    }

    pub fn mul(&self, a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
        self.reduce(&a.mul(b))
    }

    /// Inverse of a nonzero element; a nontrivial gcd with a definer is reported.
    pub fn inverse(&self, a: &MultiPoly) -> Result<MultiPoly, PolyError> {
        let a = self.reduce(a);
        if a.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        self.inverse_at(&a, self.depth())
    }

    /// Inverse in the field generated by the first `level` symbols.
    fn inverse_at(&self, a: &MultiPoly, level: usize) -> Result<MultiPoly, PolyError> {
        if level == 0 {
            let c = a.constant_term();
            if c.is_zero() {
                return Err(PolyError::DivisionByZero);
            }
            return Ok(self.constant(c.recip()));
        }
        let k = level - 1;
        if a.degree_in(k).unwrap_or(0) == 0 {
            return self.inverse_at(a, k);
        }
        // Extended Euclid on (definer, a) as univariate polynomials in θ_k.
        let mut r0 = self.definers[k].coefficients_in(k);
        let mut r1 = a.coefficients_in(k);
        let mut t0: Vec<MultiPoly> = Vec::new();
        let mut t1: Vec<MultiPoly> = vec![self.one()];
        while r1.len() > 1 {
            let (q, r) = self.uni_divrem(&r0, &r1, k)?;
            let t2 = self.uni_sub(&t0, &self.uni_mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            t0 = std::mem::replace(&mut t1, t2);
        }
        if r1.is_empty() {
            let lc_inv = self.inverse_at(r0.last().expect("nonzero remainder"), k)?;
            let factor: Vec<MultiPoly> = r0.iter().map(|c| self.mul(c, &lc_inv)).collect();
            return Err(PolyError::ReducibleDefiner {
                sym: self.syms[k].clone(),
                factor: MultiPoly::from_coefficients_in(&self.syms, k, &factor).to_string(),
            });
        }
        let g_inv = self.inverse_at(&r1[0], k)?;
        let t: Vec<MultiPoly> = t1.iter().map(|c| self.mul(c, &g_inv)).collect();
        Ok(self.reduce(&MultiPoly::from_coefficients_in(&self.syms, k, &t)))
    }

    fn uni_trim(&self, mut p: Vec<MultiPoly>) -> Vec<MultiPoly> {
        while p.last().is_some_and(MultiPoly::is_zero) {
            p.pop();
        }
        p
    }

    fn uni_sub(&self, a: &[MultiPoly], b: &[MultiPoly]) -> Vec<MultiPoly> {
        let n = a.len().max(b.len());
        let zero = self.zero();
        let out = (0..n)
            .map(|i| a.get(i).unwrap_or(&zero).sub(b.get(i).unwrap_or(&zero)))
            .collect();
        self.uni_trim(out)
    }

    fn uni_mul(&self, a: &[MultiPoly], b: &[MultiPoly]) -> Vec<MultiPoly> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&self.mul(x, y));
            }
        }
        self.uni_trim(out)
    }

    /// Division of univariate polynomials whose coefficients lie below level `k`.
    fn uni_divrem(
        &self,
        a: &[MultiPoly],
        b: &[MultiPoly],
        k: usize,
    ) -> Result<(Vec<MultiPoly>, Vec<MultiPoly>), PolyError> {
        let lc_inv = self.inverse_at(b.last().expect("nonzero divisor"), k)?;
        let mut rem = a.to_vec();
        let mut quot = vec![self.zero(); a.len().saturating_sub(b.len()) + 1];
        while rem.len() >= b.len() {
            let shift = rem.len() - b.len();
            let c = self.mul(rem.last().expect("nonempty"), &lc_inv);
            for (i, bi) in b.iter().enumerate() {
                rem[shift + i] = rem[shift + i].sub(&self.mul(&c, bi));
            }
            quot[shift] = c;
            let top = rem.len() - 1;
            rem[top] = self.zero();
            rem = self.uni_trim(rem);
            if rem.is_empty() {
                break;
            }
        }
        Ok((self.uni_trim(quot), rem))
    }

    /// Whether `a` reduces to zero.
    pub fn is_zero(&self, a: &MultiPoly) -> bool {
        self.reduce(a).is_zero()
    }

    /// Value of a univariate rational polynomial `Σ c_i X^i` at `x`.
    pub fn evaluate(&self, coeffs: &[BigRational], x: &MultiPoly) -> MultiPoly {
        let mut acc = self.zero();
        for c in coeffs.iter().rev() {
            acc = self.mul(&acc, x).add(&self.constant(c.clone()));
        }
        acc
    }

    /// The tower extended by `sym` with definer `Σ coeffs_i · sym^i` (rational, monic).
    pub fn extend_rational(&self, sym: &str, coeffs: &[BigRational]) -> Result<FieldTower, PolyError> {
        let mut syms = self.syms.clone();
        syms.push(sym.to_string());
        let k = syms.len() - 1;
        let terms = coeffs.iter().enumerate().map(|(i, c)| {
            let mut e = vec![0; syms.len()];
            e[k] = i as u32;
            (e, c.clone())
        });
        let minpoly = MultiPoly::from_terms(&syms, terms)?;
        let mut extensions: Vec<Extension> = RawTower::from(self.clone()).extensions;
        extensions.push(Extension { sym: sym.to_string(), minpoly });
        FieldTower::new(extensions)
    }

    pub fn is_one(&self, a: &MultiPoly) -> bool {
        self.reduce(a).is_one()
    }
}
