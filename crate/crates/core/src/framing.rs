//! Framed local blow-ups.
//!
//! A step along `(u_J)` with vertex `j` keeps `u_i` for `i ∉ J ∖ {j}` and
//! replaces `u_i` by `u_i / u_j` otherwise. Exponents transform by unimodular
//! matrices: `forward` (`N`) writes old variables in new ones, `inverse` (`M`)
//! the converse, and the image of `u^α` is `u'^(N·α)`.
//!
//! Slots are never deleted. A new variable of value zero is a unit; a
//! constructed step either translates it by its residue polynomial or tags it
//! as transcendental, in which case it stops counting as a parameter.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::polyalg::{apply_monomial_map, IntMatrix, LaurentMonomialMap, MultiPoly, PolyError};
use crate::values::{Value, ValueError, ValueGroup};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FramingError {
    #[error("empty centre")]
    EmptyCentre,
    #[error("centre {0:?} needs at least two indices")]
    CentreTooSmall(Vec<usize>),
    #[error("vertex {vertex} is not in the centre {centre:?}")]
    VertexNotInCentre { vertex: usize, centre: Vec<usize> },
    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("duplicate index {0} in centre")]
    DuplicateIndex(usize),
    #[error("{found} weights for {expected} variables")]
    WeightCount { expected: usize, found: usize },
    #[error("weight of variable {0} becomes negative")]
    NegativeWeight(usize),
    #[error("not purely monomial")]
    NotPurelyMonomial,
    #[error("step {index} expects {expected} variables but {found} are available")]
    IncompatibleCounts { index: usize, expected: usize, found: usize },
    #[error("step {index} touches independent variable {var}")]
    NotIndependent { index: usize, var: usize },
    #[error("inconsistent residue_spec arity: {expected} zero-value variables, {found} entries")]
    ResidueArity { expected: usize, found: usize },
    #[error("residue minimal polynomial must be monic of degree at least 1")]
    NonMonicResidue,
    #[error("variable {0} is translated by a polynomial of degree > 1; its image requires completion")]
    RequiresCompletion(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Value(#[from] ValueError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Monomial,
    Translation,
}

/// Residue of a zero-value variable created by a blow-up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ResidueGenerator {
    /// Dimension-dropping: the variable stays a unit.
    Transcendental,
    /// Monic minimal polynomial over ℚ, coefficients from degree 0 up.
    Algebraic {
        #[serde(with = "crate::rat::vec")]
        minpoly: Vec<BigRational>,
    },
}

/// The new parameter in `slot` is `Σ definition_i · (u'_slot)^i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translation {
    pub slot: usize,
    #[serde(with = "crate::rat::vec")]
    pub definition: Vec<BigRational>,
}

impl Translation {
    /// `u'_slot` in terms of the new parameter, available when the definition is affine.
    pub fn inverse(&self) -> Option<Vec<BigRational>> {
        match self.definition.as_slice() {
            [c0, c1] if c1.is_one() => Some(vec![-c0.clone(), BigRational::one()]),
            _ => None,
        }
    }
}

/// One framed blow-up. Indices are 0-based slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramedStep {
    pub n_before: usize,
    pub n_after: usize,
    #[serde(rename = "J")]
    pub centre: Vec<usize>,
    #[serde(rename = "j")]
    pub vertex: usize,
    pub kind: StepKind,
    #[serde(rename = "N")]
    pub forward: IntMatrix,
    #[serde(rename = "M")]
    pub inverse: IntMatrix,
    #[serde(rename = "Jx")]
    pub j_times: Vec<usize>,
    #[serde(rename = "D1")]
    pub retained: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub translations: Vec<Translation>,
}

impl FramedStep {
    pub fn slots(&self) -> usize {
        self.forward.size()
    }

    pub fn forward_map(&self) -> LaurentMonomialMap {
        LaurentMonomialMap::new(self.forward.clone())
    }

    pub fn inverse_map(&self) -> LaurentMonomialMap {
        LaurentMonomialMap::new(self.inverse.clone())
    }

    /// Exponent of the image of `u^α` in the new variables.
    pub fn forward_exponent(&self, alpha: &[u32]) -> Result<Vec<u32>, FramingError> {
        Ok(self.forward_map().apply_exponent(alpha)?)
    }

    /// Slots tagged as transcendental units by this step.
    pub fn unit_slots(&self) -> Vec<usize> {
        self.j_times
            .iter()
            .copied()
            .filter(|s| self.translations.iter().all(|t| t.slot != *s))
            .collect()
    }

    /// Image of `f` in the new variables.
    pub fn image_of(&self, f: &MultiPoly) -> Result<MultiPoly, FramingError> {
        let mut image = apply_monomial_map(f, &self.forward_map())?;
        for t in &self.translations {
            if image.degree_in(t.slot).unwrap_or(0) == 0 {
                continue;
            }
            let inv = t.inverse().ok_or(FramingError::RequiresCompletion(t.slot))?;
            let sub = univariate(image.vars(), t.slot, &inv);
            image = image.substitute(t.slot, &sub)?;
        }
        Ok(image)
    }
}

/// `Σ coeffs_i · x_slot^i` over `vars`.
pub fn univariate(vars: &[String], slot: usize, coeffs: &[BigRational]) -> MultiPoly {
    let mut acc = MultiPoly::zero(vars);
    for (i, c) in coeffs.iter().enumerate() {
        let mut e = vec![0; vars.len()];
        e[slot] = u32::try_from(i).expect("degree fits in u32");
        acc = acc.add(&MultiPoly::monomial(vars, e, c.clone()));
    }
    acc
}

fn check_centre(n: usize, centre: &[usize]) -> Result<Vec<usize>, FramingError> {
    if centre.is_empty() {
        return Err(FramingError::EmptyCentre);
    }
    let mut sorted = centre.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(FramingError::DuplicateIndex(w[0]));
        }
    }
    if let Some(&index) = sorted.iter().find(|&&i| i >= n) {
        return Err(FramingError::IndexOutOfRange { index, n });
    }
    Ok(sorted)
}

/// Blow-up of `n` slots along `(u_J)` with vertex `j`.
pub fn make_monomial_blowup(n: usize, centre: &[usize], vertex: usize) -> Result<FramedStep, FramingError> {
    let centre = check_centre(n, centre)?;
    if centre.len() < 2 {
        return Err(FramingError::CentreTooSmall(centre));
    }
    if !centre.contains(&vertex) {
        return Err(FramingError::VertexNotInCentre { vertex, centre });
    }
    let mut forward = IntMatrix::identity(n);
    let mut inverse = IntMatrix::identity(n);
    for &q in centre.iter().filter(|&&q| q != vertex) {
        forward.set(vertex, q, 1);
        inverse.set(vertex, q, -1);
    }
    Ok(FramedStep {
        n_before: n,
        n_after: n,
        centre,
        vertex,
        kind: StepKind::Monomial,
        forward,
        inverse,
        j_times: Vec::new(),
        retained: (0..n).collect(),
        translations: Vec::new(),
    })
}

/// Index in `centre` of least weight, smallest index on ties.
pub fn choose_vertex(group: &ValueGroup, centre: &[usize], weights: &[Value]) -> Result<usize, FramingError> {
    let mut best: Option<usize> = None;
    let mut sorted = centre.to_vec();
    sorted.sort_unstable();
    for &i in &sorted {
        let w = weights.get(i).ok_or(FramingError::IndexOutOfRange { index: i, n: weights.len() })?;
        match best {
            Some(b) if group.compare(w, &weights[b])? != Ordering::Less => {}
            _ => best = Some(i),
        }
    }
    best.ok_or(FramingError::EmptyCentre)
}

/// Weights of the new variables from the monomial part of `step`: `β' = Mᵀβ`.
pub fn pushforward_monomial_part(
    group: &ValueGroup,
    weights: &[Value],
    step: &FramedStep,
) -> Result<Vec<Value>, FramingError> {
    let n = step.slots();
    if weights.len() != n {
        return Err(FramingError::WeightCount { expected: n, found: weights.len() });
    }
    (0..n)
        .map(|q| {
            let mut acc = group.zero();
            for (p, w) in weights.iter().enumerate() {
                let m = step.inverse.get(p, q);
                if m != 0 {
                    acc = &acc + &w.scale_int(m);
                }
            }
            if group.sign(&acc)? == Ordering::Less {
                Err(FramingError::NegativeWeight(q))
            } else {
                Ok(acc)
            }
        })
        .collect()
}

/// Weights after a monomial step; zero exactly on the new units.
pub fn pushforward_weights(group: &ValueGroup, weights: &[Value], step: &FramedStep) -> Result<Vec<Value>, FramingError> {
    if step.kind != StepKind::Monomial {
        return Err(FramingError::NotPurelyMonomial);
    }
    pushforward_monomial_part(group, weights, step)
}

/// Blow-up along `(u_J)` followed by the residue substitutions for every new
/// zero-value variable, listed in increasing slot order in `residue_spec`.
pub fn build_constructed_blowup(
    group: &ValueGroup,
    n: usize,
    centre: &[usize],
    vertex: usize,
    weights: &[Value],
    residue_spec: &[ResidueGenerator],
) -> Result<FramedStep, FramingError> {
    let mut step = make_monomial_blowup(n, centre, vertex)?;
    let pushed = pushforward_monomial_part(group, weights, &step)?;
    let j_times: Vec<usize> =
        step.centre.iter().copied().filter(|&i| i != vertex && pushed[i].is_zero()).collect();
    if residue_spec.len() != j_times.len() {
        return Err(FramingError::ResidueArity { expected: j_times.len(), found: residue_spec.len() });
    }
    if j_times.is_empty() {
        return Ok(step);
    }
    let mut dropped = 0;
    for (&slot, generator) in j_times.iter().zip(residue_spec) {
        match generator {
            ResidueGenerator::Transcendental => dropped += 1,
            ResidueGenerator::Algebraic { minpoly } => {
                if minpoly.len() < 2 || !minpoly.last().is_some_and(One::is_one) {
                    return Err(FramingError::NonMonicResidue);
                }
                step.translations.push(Translation { slot, definition: minpoly.clone() });
            }
        }
    }
    step.kind = StepKind::Translation;
    step.n_after = n - dropped;
    step.retained = (0..n).filter(|i| !j_times.contains(i)).collect();
    step.j_times = j_times;
    Ok(step)
}

/// Steps applied in order, optionally declared independent of `T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramedSequence {
    pub slots: usize,
    pub steps: Vec<FramedStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub independence: Option<Vec<usize>>,
}

impl FramedSequence {
    pub fn new(slots: usize, independence: Option<Vec<usize>>) -> Self {
        FramedSequence { slots, steps: Vec::new(), independence }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    fn admissible(&self, index: usize, step: &FramedStep, available: usize) -> Result<(), FramingError> {
        if step.slots() != self.slots || step.inverse.size() != self.slots {
            return Err(FramingError::IncompatibleCounts { index, expected: step.slots(), found: self.slots });
        }
        if step.n_before != available {
            return Err(FramingError::IncompatibleCounts { index, expected: step.n_before, found: available });
        }
        if let Some(t) = &self.independence {
            if let Some(&var) = step.centre.iter().find(|i| t.contains(i)) {
                return Err(FramingError::NotIndependent { index, var });
            }
        }
        Ok(())
    }

    fn available(&self) -> usize {
        self.steps.last().map_or(self.slots, |s| s.n_after)
    }

    pub fn push(&mut self, step: FramedStep) -> Result<(), FramingError> {
        self.admissible(self.steps.len(), &step, self.available())?;
        self.steps.push(step);
        Ok(())
    }

    /// Re-checks every invariant; used on deserialized sequences.
    pub fn validate(&self) -> Result<(), FramingError> {
        let mut available = self.slots;
        for (index, step) in self.steps.iter().enumerate() {
            self.admissible(index, step, available)?;
            available = step.n_after;
        }
        Ok(())
    }

    /// `N_l ⋯ N_1` over the monomial parts.
    pub fn forward_matrix(&self) -> Result<IntMatrix, FramingError> {
        let mut acc = IntMatrix::identity(self.slots);
        for step in &self.steps {
            acc = step.forward.mul(&acc)?;
        }
        Ok(acc)
    }

    /// `M_1 ⋯ M_l`: column `q` is the exponent of the final `u_q` in the original variables.
    pub fn inverse_matrix(&self) -> Result<IntMatrix, FramingError> {
        let mut acc = IntMatrix::identity(self.slots);
        for step in &self.steps {
            acc = acc.mul(&step.inverse)?;
        }
        Ok(acc)
    }

    /// Image of `f` after every step.
    pub fn image_of(&self, f: &MultiPoly) -> Result<MultiPoly, FramingError> {
        self.steps.iter().try_fold(f.clone(), |acc, step| step.image_of(&acc))
    }
}

/// Composite substitution of a purely monomial sequence.
pub fn compose_sequence(seq: &FramedSequence) -> Result<LaurentMonomialMap, FramingError> {
    if seq.steps.iter().any(|s| s.kind != StepKind::Monomial) {
        return Err(FramingError::NotPurelyMonomial);
    }
    Ok(LaurentMonomialMap::new(seq.forward_matrix()?))
}
