use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{Mono, MultiPoly};
use super::PolyError;

/// Square integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = PolyError;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, PolyError> {
        IntMatrix::from_rows(&rows)
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.rows()
    }
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        IntMatrix { n, entries }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, PolyError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PolyError::NotSquare);
        }
        Ok(IntMatrix { n, entries: rows.concat() })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.entries[row * self.n + col] = value;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n.max(1)).take(self.n).map(<[i64]>::to_vec).collect()
    }

    pub fn column(&self, col: usize) -> Vec<i64> {
        (0..self.n).map(|r| self.get(r, col)).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.n)
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, PolyError> {
        if self.n != other.n {
            return Err(PolyError::NotSquare);
        }
        let n = self.n;
        let mut entries = vec![0i64; n * n];
        for r in 0..n {
            for c in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += i128::from(self.get(r, k)) * i128::from(other.get(k, c));
                }
                entries[r * n + c] = i64::try_from(acc).map_err(|_| PolyError::Overflow)?;
            }
        }
        Ok(IntMatrix { n, entries })
    }

    /// `self · v`.
    pub fn apply(&self, v: &[i64]) -> Result<Vec<i64>, PolyError> {
        if v.len() != self.n {
            return Err(PolyError::ExponentLength { expected: self.n, found: v.len() });
        }
        (0..self.n)
            .map(|r| {
                let acc: i128 = (0..self.n).map(|k| i128::from(self.get(r, k)) * i128::from(v[k])).sum();
                i64::try_from(acc).map_err(|_| PolyError::Overflow)
            })
            .collect()
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> =
            (0..n).map(|r| (0..n).map(|c| BigInt::from(self.get(r, c))).collect()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

/// Substitution `u_q ↦ u'^(column q)`; `unit_tags[q]` marks variables known to be units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentMonomialMap {
    pub matrix: IntMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unit_tags: Vec<bool>,
}

impl LaurentMonomialMap {
    pub fn new(matrix: IntMatrix) -> Self {
        LaurentMonomialMap { matrix, unit_tags: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(IntMatrix::identity(n))
    }

    /// Image exponent `matrix · alpha`; negative entries are a Laurent escape.
    pub fn apply_exponent(&self, alpha: &[u32]) -> Result<Vec<u32>, PolyError> {
        let v: Vec<i64> = alpha.iter().map(|&a| i64::from(a)).collect();
        self.matrix
            .apply(&v)?
            .into_iter()
            .map(|x| {
                if x < 0 {
                    Err(PolyError::LaurentEscape)
                } else {
                    u32::try_from(x).map_err(|_| PolyError::Overflow)
                }
            })
            .collect()
    }
}

/// Each term `c·u^α` becomes `c·u'^(matrix·α)`.
pub fn apply_monomial_map(f: &MultiPoly, map: &LaurentMonomialMap) -> Result<MultiPoly, PolyError> {
    if map.matrix.size() != f.nvars() {
        return Err(PolyError::ExponentLength { expected: f.nvars(), found: map.matrix.size() });
    }
    let mut terms: BTreeMap<Mono, num_rational::BigRational> = BTreeMap::new();
    for (e, c) in f.terms() {
        let image = map.apply_exponent(e)?;
        let slot = terms.entry(Mono(image)).or_insert_with(num_rational::BigRational::zero);
        *slot += c;
    }
    MultiPoly::from_terms(f.vars(), terms.into_iter().map(|(m, c)| (m.0, c)))
}
