use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::PolyError;

/// Exponent vector ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| u64::from(e)).sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with rational coefficients over a named variable list.
///
/// Invariants: no stored coefficient is zero and every exponent vector has
/// one entry per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Mono, BigRational>,
}

impl MultiPoly {
    pub fn zero(vars: &[String]) -> Self {
        MultiPoly { vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &[String], c: BigRational) -> Self {
        Self::monomial(vars, vec![0; vars.len()], c)
    }

    pub fn one(vars: &[String]) -> Self {
        Self::constant(vars, BigRational::one())
    }

    pub fn var(vars: &[String], i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, e, BigRational::one())
    }

    pub fn monomial(vars: &[String], exponent: Vec<u32>, c: BigRational) -> Self {
        assert_eq!(exponent.len(), vars.len(), "exponent length must match variable count");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(exponent), c);
        }
        MultiPoly { vars: vars.to_vec(), terms }
    }

    /// Sums duplicate exponents and drops zero coefficients.
    pub fn from_terms<I>(vars: &[String], terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(PolyError::ExponentLength { expected: vars.len(), found: e.len() });
            }
            p.add_term(Mono(e), c);
        }
        Ok(p)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[u32], &BigRational)> + '_ {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn coefficient(&self, exponent: &[u32]) -> BigRational {
        self.terms.get(&Mono(exponent.to_vec())).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&vec![0; self.nvars()])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }

    /// Single term with coefficient, if the polynomial is a monomial.
    pub fn as_monomial(&self) -> Option<(&[u32], &BigRational)> {
        if self.terms.len() == 1 {
            self.terms().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Mono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn same_vars(&self, other: &MultiPoly) -> Result<(), PolyError> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VariableMismatch { left: self.vars.clone(), right: other.vars.clone() })
        }
    }

    pub fn try_add(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.same_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.same_vars(other)?;
        let mut out = MultiPoly::zero(&self.vars);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
                out.add_term(Mono(e), ca * cb);
            }
        }
        Ok(out)
    }

    /// Arithmetic on polynomials known to share variables; panics otherwise.
    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.try_add(other).expect("operands share variables")
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.try_sub(other).expect("operands share variables")
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.try_mul(other).expect("operands share variables")
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, factor: &BigRational) -> MultiPoly {
        if factor.is_zero() {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplies by the monomial `u^exponent`.
    pub fn mul_monomial(&self, exponent: &[u32]) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (Mono(m.0.iter().zip(exponent).map(|(a, b)| a + b).collect()), c.clone()))
                .collect(),
        }
    }

    /// Exact quotient by `u^exponent`, if every term is divisible.
    pub fn div_monomial(&self, exponent: &[u32]) -> Option<MultiPoly> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m
                .0
                .iter()
                .zip(exponent)
                .map(|(a, b)| a.checked_sub(*b))
                .collect::<Option<Vec<u32>>>()?;
            terms.insert(Mono(e), c.clone());
        }
        Some(MultiPoly { vars: self.vars.clone(), terms })
    }

    /// Componentwise minimum of the exponents of all terms; `None` for zero.
    pub fn min_exponent(&self) -> Option<Vec<u32>> {
        let mut it = self.terms.keys();
        let first = it.next()?.0.clone();
        Some(it.fold(first, |acc, m| acc.iter().zip(&m.0).map(|(a, b)| *a.min(b)).collect()))
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[i]).max()
    }

    /// Coefficients of the powers of variable `i`, each free of variable `i`.
    pub fn coefficients_in(&self, i: usize) -> Vec<MultiPoly> {
        let Some(deg) = self.degree_in(i) else { return Vec::new() };
        let mut out = vec![MultiPoly::zero(&self.vars); deg as usize + 1];
        for (m, c) in &self.terms {
            let mut e = m.0.clone();
            let k = std::mem::replace(&mut e[i], 0) as usize;
            out[k].terms.insert(Mono(e), c.clone());
        }
        out
    }

    /// `Σ coeffs[k] · u_i^k`.
    pub fn from_coefficients_in(vars: &[String], i: usize, coeffs: &[MultiPoly]) -> MultiPoly {
        let mut out = MultiPoly::zero(vars);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, a) in &c.terms {
                let mut e = m.0.clone();
                e[i] += k as u32;
                out.add_term(Mono(e), a.clone());
            }
        }
        out
    }

    pub fn leading_coefficient_in(&self, i: usize) -> MultiPoly {
        self.coefficients_in(i).pop().unwrap_or_else(|| MultiPoly::zero(&self.vars))
    }

    pub fn is_monic_in(&self, i: usize) -> bool {
        self.leading_coefficient_in(i).is_one()
    }

    /// Same polynomial over a different variable list; every used variable must be present.
    pub fn with_vars(&self, vars: &[String]) -> Result<MultiPoly, PolyError> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .map(|(k, v)| match vars.iter().position(|w| w == v) {
                Some(p) => Ok(Some(p)),
                None if self.terms.keys().all(|m| m.0[k] == 0) => Ok(None),
                None => Err(PolyError::UnknownVariable(v.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .map(|p| p.unwrap_or(usize::MAX))
            .collect();
        let mut out = MultiPoly::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (k, &x) in m.0.iter().enumerate() {
                if x > 0 {
                    e[map[k]] += x;
                }
            }
            out.add_term(Mono(e), c.clone());
        }
        Ok(out)
    }

    /// Replaces variable `i` by `g`.
    pub fn substitute(&self, i: usize, g: &MultiPoly) -> Result<MultiPoly, PolyError> {
        self.same_vars(g)?;
        let coeffs = self.coefficients_in(i);
        let mut acc = MultiPoly::zero(&self.vars);
        for c in coeffs.iter().rev() {
            acc = acc.mul(g).add(c);
        }
        Ok(acc)
    }

    /// Exact quotient `self / g` by single-divisor division under graded-lex order.
    pub fn exact_div(&self, g: &MultiPoly) -> Result<Option<MultiPoly>, PolyError> {
        self.same_vars(g)?;
        let Some((lead_g, lc_g)) = g.terms.iter().next_back() else {
            return Err(PolyError::DivisionByZero);
        };
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(&self.vars);
        while let Some((lead, lc)) = rem.terms.iter().next_back() {
            let Some(e) = lead
                .0
                .iter()
                .zip(&lead_g.0)
                .map(|(a, b)| a.checked_sub(*b))
                .collect::<Option<Vec<u32>>>()
            else {
                return Ok(None);
            };
            let c = lc / lc_g;
            let t = MultiPoly::monomial(&self.vars, e, c);
            rem = rem.sub(&t.mul(g));
            quot = quot.add(&t);
        }
        Ok(Some(quot))
    }

    /// Largest `k` with `g^k` dividing `self`; `self` must be nonzero and `g` non-constant.
    pub fn multiplicity_of(&self, g: &MultiPoly) -> Result<u32, PolyError> {
        if self.is_zero() || g.is_constant() {
            return Err(PolyError::DivisionByZero);
        }
        let mut k = 0;
        let mut cur = self.clone();
        while let Some(q) = cur.exact_div(g)? {
            cur = q;
            k += 1;
        }
        Ok(k)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, vars: &[String], e: &[u32], c: &BigRational, first: bool) -> fmt::Result {
    let neg = c.is_negative();
    if !first {
        write!(f, "{}", if neg { " - " } else { " + " })?;
    } else if neg {
        write!(f, "-")?;
    }
    let abs = c.abs();
    let is_const = e.iter().all(|&x| x == 0);
    let mut wrote = false;
    if !abs.is_one() || is_const {
        write!(f, "{abs}")?;
        wrote = true;
    }
    for (v, &x) in vars.iter().zip(e) {
        if x == 0 {
            continue;
        }
        if wrote {
            write!(f, "*")?;
        }
        if x == 1 {
            write!(f, "{v}")?;
        } else {
            write!(f, "{v}^{x}")?;
        }
        wrote = true;
    }
    Ok(())
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            write_term(f, &self.vars, &m.0, c, k == 0)?;
        }
        Ok(())
    }
}

impl MultiPoly {
    /// Parses sums of products such as `x^2 - 3/2*u^3*x + 1` over `vars`.
    pub fn parse(vars: &[String], text: &str) -> Result<MultiPoly, PolyError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolyError::Parse("empty input".into()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for (i, &b) in bytes.iter().enumerate() {
            if (b == b'+' || b == b'-') && i > 0 && !matches!(bytes[i - 1], b'*' | b'^') {
                pieces.push(&compact[start..i]);
                start = i;
            }
        }
        pieces.push(&compact[start..]);
        let mut out = MultiPoly::zero(vars);
        for piece in pieces {
            let (negative, body) = match piece.as_bytes().first() {
                Some(b'-') => (true, &piece[1..]),
                Some(b'+') => (false, &piece[1..]),
                _ => (false, piece),
            };
            if body.is_empty() {
                return Err(PolyError::Parse(format!("dangling sign in {text:?}")));
            }
            let mut coeff = BigRational::one();
            let mut exponent = vec![0u32; vars.len()];
            for factor in body.split('*') {
                if factor.starts_with(|c: char| c.is_ascii_digit()) {
                    coeff *= crate::rat::parse(factor)
                        .ok_or_else(|| PolyError::Parse(format!("bad number {factor:?}")))?;
                    continue;
                }
                let (name, power) = match factor.split_once('^') {
                    Some((n, p)) => (n, p.parse::<u32>().map_err(|_| PolyError::Parse(format!("bad exponent {p:?}")))?),
                    None => (factor, 1),
                };
                let i = vars
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                exponent[i] = exponent[i].checked_add(power).ok_or(PolyError::Overflow)?;
            }
            if negative {
                coeff = -coeff;
            }
            out = out.add(&MultiPoly::monomial(vars, exponent, coeff));
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    e: Vec<u32>,
    #[serde(with = "crate::rat")]
    c: BigRational,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    vars: Vec<String>,
    terms: Vec<TermJson>,
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            vars: self.vars.clone(),
            terms: self.terms.iter().rev().map(|(m, c)| TermJson { e: m.0.clone(), c: c.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        for (i, v) in raw.vars.iter().enumerate() {
            if raw.vars[..i].contains(v) {
                return Err(serde::de::Error::custom(format!("duplicate variable {v:?}")));
            }
        }
        MultiPoly::from_terms(&raw.vars, raw.terms.into_iter().map(|t| (t.e, t.c)))
            .map_err(serde::de::Error::custom)
    }
}
