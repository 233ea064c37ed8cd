//! Finite chains of key polynomials in one distinguished variable.
//!
//! Level 0 is the monomial valuation on the ground variables with `x` weighted
//! by the first entry's value. Level `i ≥ 1` expands in `Q_i` and values each
//! digit at level `i − 1`. Levels are 1-based; level `i` is entry `i − 1`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::polyalg::{q_adic_expansion, MultiPoly, PolyError};
use crate::values::{Value, ValueError, ValueGroup};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeyPolyError {
    #[error("a chain needs at least one entry")]
    EmptyChain,
    #[error("variable {0:?} is repeated")]
    DuplicateVariable(String),
    #[error("{found} ground weights for {expected} ground variables")]
    WeightCount { expected: usize, found: usize },
    #[error("ground weights must be positive (variable {0})")]
    NonPositiveWeight(usize),
    #[error("level {level} out of range 1..={len}")]
    LevelOutOfRange { level: usize, len: usize },
    #[error("zero polynomial has no value")]
    ZeroPolynomial,
    #[error("delta is zero: no coefficient to complete")]
    DeltaZero,
    #[error("unnormalized leading coefficient")]
    Unnormalized,
    #[error("internal: next key polynomial has value {found}, expected {expected}")]
    NoValueJump { expected: Value, found: Value },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Value(#[from] ValueError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyEntry {
    pub q: MultiPoly,
    pub beta: Value,
}

/// Ground variables and weights, `x`, and the key polynomials with their values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPolyChain {
    group: ValueGroup,
    ground_vars: Vec<String>,
    ground_weights: Vec<Value>,
    x: String,
    vars: Vec<String>,
    entries: Vec<KeyEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSpec {
    pub vars: Vec<String>,
    pub weights: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntrySpec {
    #[serde(rename = "Q")]
    pub q: MultiPoly,
    pub beta: Value,
}

/// JSON form of a chain; the value group travels separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub ground: GroundSpec,
    pub x: String,
    pub entries: Vec<EntrySpec>,
}

impl KeyPolyChain {
    pub fn new(
        group: ValueGroup,
        ground_vars: Vec<String>,
        ground_weights: Vec<Value>,
        x: String,
        entries: Vec<(MultiPoly, Value)>,
    ) -> Result<Self, KeyPolyError> {
        if entries.is_empty() {
            return Err(KeyPolyError::EmptyChain);
        }
        if ground_vars.len() != ground_weights.len() {
            return Err(KeyPolyError::WeightCount { expected: ground_vars.len(), found: ground_weights.len() });
        }
        let mut vars = ground_vars.clone();
        vars.push(x.clone());
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(KeyPolyError::DuplicateVariable(v.clone()));
            }
        }
        for (i, w) in ground_weights.iter().enumerate() {
            if group.sign(w)? != Ordering::Greater {
                return Err(KeyPolyError::NonPositiveWeight(i));
            }
        }
        let entries = entries
            .into_iter()
            .map(|(q, beta)| {
                group.sign(&beta)?;
                Ok(KeyEntry { q: q.with_vars(&vars)?, beta })
            })
            .collect::<Result<Vec<_>, KeyPolyError>>()?;
        Ok(KeyPolyChain { group, ground_vars, ground_weights, x, vars, entries })
    }

    pub fn from_spec(group: ValueGroup, spec: ChainSpec) -> Result<Self, KeyPolyError> {
        let entries = spec.entries.into_iter().map(|e| (e.q, e.beta)).collect();
        Self::new(group, spec.ground.vars, spec.ground.weights, spec.x, entries)
    }

    pub fn to_spec(&self) -> ChainSpec {
        ChainSpec {
            ground: GroundSpec { vars: self.ground_vars.clone(), weights: self.ground_weights.clone() },
            x: self.x.clone(),
            entries: self.entries.iter().map(|e| EntrySpec { q: e.q.clone(), beta: e.beta.clone() }).collect(),
        }
    }

    pub fn group(&self) -> &ValueGroup {
        &self.group
    }

    /// Ground variables followed by `x`.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn ground_vars(&self) -> &[String] {
        &self.ground_vars
    }

    pub fn ground_weights(&self) -> &[Value] {
        &self.ground_weights
    }

    pub fn x(&self) -> &str {
        &self.x
    }

    pub fn x_index(&self) -> usize {
        self.ground_vars.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[KeyEntry] {
        &self.entries
    }

    fn check_level(&self, level: usize) -> Result<&KeyEntry, KeyPolyError> {
        if level == 0 || level > self.entries.len() {
            return Err(KeyPolyError::LevelOutOfRange { level, len: self.entries.len() });
        }
        Ok(&self.entries[level - 1])
    }

    pub fn q(&self, level: usize) -> &MultiPoly {
        &self.entries[level - 1].q
    }

    pub fn beta(&self, level: usize) -> &Value {
        &self.entries[level - 1].beta
    }

    pub fn degree(&self, level: usize) -> u32 {
        self.q(level).degree_in(self.x_index()).unwrap_or(0)
    }

    /// `α_i = deg Q_i / deg Q_{i−1}`, with `α_1 = deg Q_1`.
    pub fn alphas(&self) -> Vec<u32> {
        (1..=self.len())
            .map(|i| {
                let prev = if i == 1 { 1 } else { self.degree(i - 1).max(1) };
                self.degree(i) / prev
            })
            .collect()
    }

    /// Ground weights followed by the value of `x`.
    pub fn level0_weights(&self) -> Vec<Value> {
        let mut w = self.ground_weights.clone();
        w.push(self.entries[0].beta.clone());
        w
    }

    /// The chain with one more entry.
    pub fn extended(&self, q: MultiPoly, beta: Value) -> Result<Self, KeyPolyError> {
        let mut entries: Vec<(MultiPoly, Value)> = self.entries.iter().map(|e| (e.q.clone(), e.beta.clone())).collect();
        entries.push((q, beta));
        Self::new(self.group.clone(), self.ground_vars.clone(), self.ground_weights.clone(), self.x.clone(), entries)
    }

    /// The first `level` entries.
    pub fn truncated(&self, level: usize) -> Result<Self, KeyPolyError> {
        self.check_level(level)?;
        let mut out = self.clone();
        out.entries.truncate(level);
        Ok(out)
    }

    /// The constant `1` over the chain variables.
    pub fn one(&self) -> MultiPoly {
        MultiPoly::one(&self.vars)
    }

    fn rebase(&self, f: &MultiPoly) -> Result<MultiPoly, KeyPolyError> {
        Ok(f.with_vars(&self.vars)?)
    }
}

/// `f = Σ_j coefficients[j] · Q_level^j`, each digit expanded one level down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardExpansion {
    pub level: usize,
    pub coefficients: Vec<MultiPoly>,
    /// Expansions of the nonzero digits at `level − 1`; empty at level 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Option<StandardExpansion>>,
}

impl StandardExpansion {
    pub fn reassemble(&self, chain: &KeyPolyChain) -> MultiPoly {
        let q = chain.q(self.level);
        let mut acc = MultiPoly::zero(chain.vars());
        for c in self.coefficients.iter().rev() {
            acc = acc.mul(q).add(c);
        }
        acc
    }

    /// Largest power present.
    pub fn top(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

pub fn standard_expansion(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<StandardExpansion, KeyPolyError> {
    let entry = chain.check_level(level)?;
    let f = chain.rebase(f)?;
    let coefficients = q_adic_expansion(&f, &entry.q, chain.x_index())?;
    let children = if level == 1 {
        Vec::new()
    } else {
        coefficients
            .iter()
            .map(|c| if c.is_zero() { Ok(None) } else { standard_expansion(c, chain, level - 1).map(Some) })
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(StandardExpansion { level, coefficients, children })
}

fn level0_value(f: &MultiPoly, chain: &KeyPolyChain) -> Result<Value, KeyPolyError> {
    let weights = chain.level0_weights();
    let mut best: Option<Value> = None;
    for (e, _) in f.terms() {
        let v = chain.group.value_of_exponent(e, &weights)?;
        if best.as_ref().map_or(Ok(true), |b| chain.group.compare(&v, b).map(|o| o == Ordering::Less))? {
            best = Some(v);
        }
    }
    best.ok_or(KeyPolyError::ZeroPolynomial)
}

fn value_at(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<Value, KeyPolyError> {
    if level == 0 {
        return level0_value(f, chain);
    }
    let values = term_values_rebased(f, chain, level)?;
    least(&chain.group, &values).map(|(v, _)| v)
}

/// Value of `c_j · Q_level^j` for each `j`; `None` where the digit vanishes.
fn term_values_rebased(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<Vec<Option<Value>>, KeyPolyError> {
    let entry = chain.check_level(level)?;
    if f.is_zero() {
        return Err(KeyPolyError::ZeroPolynomial);
    }
    let digits = q_adic_expansion(f, &entry.q, chain.x_index())?;
    digits
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if c.is_zero() {
                return Ok(None);
            }
            let v = value_at(c, chain, level - 1)?;
            Ok(Some(&v + &entry.beta.scale_int(j as i64)))
        })
        .collect()
}

/// Per-power values of the level expansion of `f`.
pub fn term_values(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<Vec<Option<Value>>, KeyPolyError> {
    term_values_rebased(&chain.rebase(f)?, chain, level)
}

/// Least value and the largest index attaining it.
fn least(group: &ValueGroup, values: &[Option<Value>]) -> Result<(Value, usize), KeyPolyError> {
    let mut best: Option<(Value, usize)> = None;
    for (j, v) in values.iter().enumerate() {
        let Some(v) = v else { continue };
        let replace = match &best {
            None => true,
            Some((b, _)) => group.compare(v, b)? != Ordering::Greater,
        };
        if replace {
            best = Some((v.clone(), j));
        }
    }
    best.ok_or(KeyPolyError::ZeroPolynomial)
}

/// `μ'_level(f) = min_j (j·β_level + μ'_{level−1}(c_j))`.
pub fn truncated_valuation(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<Value, KeyPolyError> {
    chain.check_level(level)?;
    value_at(&chain.rebase(f)?, chain, level)
}

/// Largest power attaining the truncated value.
pub fn delta_invariant(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<usize, KeyPolyError> {
    let values = term_values(f, chain, level)?;
    Ok(least(&chain.group, &values)?.1)
}

/// Smallest power above `δ` attaining the least value among powers above `δ`.
pub fn epsilon_invariant(f: &MultiPoly, chain: &KeyPolyChain, level: usize) -> Result<Option<usize>, KeyPolyError> {
    let values = term_values(f, chain, level)?;
    let delta = least(&chain.group, &values)?.1;
    let mut best: Option<(Value, usize)> = None;
    for (j, v) in values.iter().enumerate().skip(delta + 1) {
        let Some(v) = v else { continue };
        let replace = match &best {
            None => true,
            Some((b, _)) => chain.group.compare(v, b)? == Ordering::Less,
        };
        if replace {
            best = Some((v.clone(), j));
        }
    }
    Ok(best.map(|(_, j)| j))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NextKey {
    pub delta: usize,
    pub z: MultiPoly,
    pub q_next: MultiPoly,
}

/// `Q_next = Q_top + c_{δ−1}/δ` for the top-level expansion of `f`.
pub fn next_key_char0(chain: &KeyPolyChain, f: &MultiPoly) -> Result<NextKey, KeyPolyError> {
    let level = chain.len();
    let expansion = standard_expansion(f, chain, level)?;
    let delta = delta_invariant(f, chain, level)?;
    if delta == 0 {
        return Err(KeyPolyError::DeltaZero);
    }
    if !expansion.coefficients[delta].is_one() {
        return Err(KeyPolyError::Unnormalized);
    }
    let z = expansion.coefficients[delta - 1].scale(&BigRational::new(BigInt::one(), (delta as i64).into()));
    let q_next = chain.q(level).add(&z);
    let found = truncated_valuation(&q_next, chain, level)?;
    let expected = chain.beta(level).clone();
    if chain.group.compare(&found, &expected)? != Ordering::Equal {
        return Err(KeyPolyError::NoValueJump { expected, found });
    }
    Ok(NextKey { delta, z, q_next })
}

/// One failed chain condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub level: usize,
    pub detail: String,
}

impl Diagnostic {
    fn new(code: &str, level: usize, detail: String) -> Self {
        Diagnostic { code: code.to_string(), level, detail }
    }
}

/// Every violated chain condition, in level order.
pub fn validate_chain(chain: &KeyPolyChain) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let xi = chain.x_index();
    let g = &chain.group;
    let x = MultiPoly::var(chain.vars(), xi);
    if chain.q(1) != &x {
        out.push(Diagnostic::new("first-not-x", 1, format!("first key polynomial is {}", chain.q(1))));
    }
    if g.sign(chain.beta(1)).ok() != Some(Ordering::Greater) {
        out.push(Diagnostic::new("beta-not-positive", 1, format!("value {} of x", chain.beta(1))));
    }
    let mut all_monic = true;
    for level in 1..=chain.len() {
        let q = chain.q(level);
        let deg = q.degree_in(xi).unwrap_or(0);
        if deg == 0 || !q.is_monic_in(xi) {
            out.push(Diagnostic::new("non-monic", level, format!("{q} is not monic in {}", chain.x())));
            all_monic = false;
        }
        if level == 1 {
            continue;
        }
        let prev_deg = chain.degree(level - 1);
        if prev_deg == 0 || deg < prev_deg || !deg.is_multiple_of(prev_deg) {
            out.push(Diagnostic::new(
                "degree-ratio",
                level,
                format!("degree {deg} is not a multiple of the previous degree {prev_deg}"),
            ));
        }
        let (b, b_prev) = (chain.beta(level), chain.beta(level - 1));
        if g.compare(b, b_prev).ok() != Some(Ordering::Greater) {
            out.push(Diagnostic::new("beta-not-increasing", level, format!("{b} does not exceed {b_prev}")));
        }
        let lhs = b.scale_int(i64::from(prev_deg));
        let rhs = b_prev.scale_int(i64::from(deg));
        if g.compare(&lhs, &rhs).ok() != Some(Ordering::Greater) {
            out.push(Diagnostic::new(
                "slope-not-increasing",
                level,
                format!("{b}/{deg} does not exceed {b_prev}/{prev_deg}"),
            ));
        }
        if all_monic {
            match truncated_valuation(q, chain, level - 1) {
                Ok(v) if g.compare(b, &v).ok() == Some(Ordering::Greater) => {}
                Ok(v) => out.push(Diagnostic::new(
                    "no-value-jump",
                    level,
                    format!("declared value {b} does not exceed the truncated value {v}"),
                )),
                Err(e) => out.push(Diagnostic::new("no-value-jump", level, e.to_string())),
            }
        }
    }
    out
}
