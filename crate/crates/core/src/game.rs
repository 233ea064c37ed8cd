//! The descent game for monomials under a monomial valuation.
//!
//! Weights of value zero mark unit slots: they never enter a centre, and
//! divisibility, `τ` and the descent rule look only at the remaining (active)
//! coordinates.

use std::cmp::Ordering;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::framing::{
    choose_vertex, make_monomial_blowup, pushforward_weights, FramedSequence, FramingError,
};
use crate::polyalg::{MultiPoly, PolyError};
use crate::values::{Value, ValueError, ValueGroup};

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("exponent length {found} does not match {expected} variables")]
    LengthMismatch { expected: usize, found: usize },
    #[error("weights must be positive (variable {0})")]
    NonPositiveWeight(usize),
    #[error("nothing to do: one exponent already divides the other")]
    NothingToDo,
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("zero polynomial has no value")]
    ZeroPolynomial,
    #[error("step budget exceeded ({0} steps)")]
    BudgetExceeded(usize),
    #[error("internal: invariant failed to decrease at step {0}")]
    NoDescent(usize),
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `(s, t)` with `s ≤ t`, ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[u64; 2]", into = "[u64; 2]")]
pub struct Tau {
    pub s: u64,
    pub t: u64,
}

impl From<[u64; 2]> for Tau {
    fn from([s, t]: [u64; 2]) -> Self {
        Tau { s, t }
    }
}

impl From<Tau> for [u64; 2] {
    fn from(t: Tau) -> Self {
        [t.s, t.t]
    }
}

/// Variables with weights; a zero weight marks a unit slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialValuationSpec {
    pub group: ValueGroup,
    pub vars: Vec<String>,
    pub weights: Vec<Value>,
}

impl MonomialValuationSpec {
    /// All weights strictly positive.
    pub fn new(group: ValueGroup, vars: Vec<String>, weights: Vec<Value>) -> Result<Self, GameError> {
        let spec = Self::with_units(group, vars, weights)?;
        if let Some(i) = spec.active().iter().position(|a| !a) {
            return Err(GameError::NonPositiveWeight(i));
        }
        Ok(spec)
    }

    /// Weights nonnegative; zero weights are unit slots.
    pub fn with_units(group: ValueGroup, vars: Vec<String>, weights: Vec<Value>) -> Result<Self, GameError> {
        if vars.len() != weights.len() {
            return Err(GameError::LengthMismatch { expected: vars.len(), found: weights.len() });
        }
        for (i, w) in weights.iter().enumerate() {
            if group.sign(w)? == Ordering::Less {
                return Err(GameError::NonPositiveWeight(i));
            }
        }
        Ok(MonomialValuationSpec { group, vars, weights })
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn active(&self) -> Vec<bool> {
        self.weights.iter().map(|w| !w.is_zero()).collect()
    }

    fn value(&self, alpha: &[u32]) -> Result<Value, GameError> {
        Ok(self.group.value_of_exponent(alpha, &self.weights)?)
    }

    fn check_len(&self, alpha: &[u32]) -> Result<(), GameError> {
        if alpha.len() == self.nvars() {
            Ok(())
        } else {
            Err(GameError::LengthMismatch { expected: self.nvars(), found: alpha.len() })
        }
    }
}

/// Which slots a run promises never to touch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Independence {
    /// Every slot on which all inputs agree.
    #[default]
    Auto,
    Off,
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameOptions {
    pub budget: usize,
    pub independence: Independence,
}

impl Default for GameOptions {
    fn default() -> Self {
        GameOptions { budget: DEFAULT_BUDGET, independence: Independence::Auto }
    }
}

fn strip_common(alpha: &[u32], gamma: &[u32], active: &[bool]) -> (Vec<u32>, Vec<u32>) {
    let mut a = Vec::with_capacity(alpha.len());
    let mut g = Vec::with_capacity(alpha.len());
    for ((&x, &y), &on) in alpha.iter().zip(gamma).zip(active) {
        let m = if on { x.min(y) } else { x.max(y) };
        a.push(x.saturating_sub(m));
        g.push(y.saturating_sub(m));
    }
    (a, g)
}

fn norm(v: &[u32]) -> u64 {
    v.iter().map(|&x| u64::from(x)).sum()
}

fn tau_on(alpha: &[u32], gamma: &[u32], active: &[bool]) -> Tau {
    let (a, g) = strip_common(alpha, gamma, active);
    let (x, y) = (norm(&a), norm(&g));
    Tau { s: x.min(y), t: x.max(y) }
}

/// `τ(α, γ)`: norms of the parts left after removing the common factor.
pub fn tau(alpha: &[u32], gamma: &[u32]) -> Result<Tau, GameError> {
    if alpha.len() != gamma.len() {
        return Err(GameError::LengthMismatch { expected: alpha.len(), found: gamma.len() });
    }
    Ok(tau_on(alpha, gamma, &vec![true; alpha.len()]))
}

/// Whether `u^a` divides `u^b` up to units.
pub fn divides_on(a: &[u32], b: &[u32], active: &[bool]) -> bool {
    a.iter().zip(b).zip(active).all(|((x, y), &on)| !on || x <= y)
}

fn centre_on(
    alpha: &[u32],
    gamma: &[u32],
    spec: &MonomialValuationSpec,
    active: &[bool],
) -> Result<(Vec<usize>, usize), GameError> {
    let (mut a, mut g) = strip_common(alpha, gamma, active);
    if norm(&a) > norm(&g) {
        std::mem::swap(&mut a, &mut g);
    }
    let need = norm(&a);
    if need == 0 {
        return Err(GameError::NothingToDo);
    }
    let mut centre: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0).collect();
    let mut order: Vec<usize> = (0..g.len()).filter(|&i| g[i] > 0).collect();
    order.sort_by(|&x, &y| g[y].cmp(&g[x]).then(x.cmp(&y)));
    let mut sum = 0;
    for i in order {
        if sum >= need {
            break;
        }
        sum += u64::from(g[i]);
        centre.push(i);
    }
    centre.sort_unstable();
    let vertex = choose_vertex(&spec.group, &centre, &spec.weights)?;
    Ok((centre, vertex))
}

/// Centre `J` and vertex `j` of the next descent step for the pair.
pub fn descent_center(
    alpha: &[u32],
    gamma: &[u32],
    spec: &MonomialValuationSpec,
) -> Result<(Vec<usize>, usize), GameError> {
    spec.check_len(alpha)?;
    spec.check_len(gamma)?;
    centre_on(alpha, gamma, spec, &spec.active())
}

/// One descent step of a pair run, recorded before the step is applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub step: usize,
    pub tau: Tau,
    #[serde(rename = "J")]
    pub centre: Vec<usize>,
    #[serde(rename = "j")]
    pub vertex: usize,
    pub alpha: Vec<u32>,
    pub gamma: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub sequence: FramedSequence,
    pub alpha: Vec<u32>,
    pub gamma: Vec<u32>,
    /// Weights of the final variables.
    pub weights: Vec<Value>,
    pub trace: Vec<PairRecord>,
}

impl PairOutcome {
    /// Whether the final image of `u^α` divides that of `u^γ`.
    pub fn alpha_divides_gamma(&self) -> bool {
        let active: Vec<bool> = self.weights.iter().map(|w| !w.is_zero()).collect();
        divides_on(&self.alpha, &self.gamma, &active)
    }
}

fn independence_set(mode: &Independence, exponents: &[&[u32]], n: usize) -> Option<Vec<usize>> {
    match mode {
        Independence::Off => None,
        Independence::Explicit(t) => Some(t.clone()),
        Independence::Auto => Some(
            (0..n).filter(|&i| exponents.windows(2).all(|w| w[0][i] == w[1][i])).collect(),
        ),
    }
}

/// One blow-up applied to the running state.
fn advance(
    spec: &mut MonomialValuationSpec,
    seq: &mut FramedSequence,
    centre: &[usize],
    vertex: usize,
    exponents: &mut [Vec<u32>],
) -> Result<(), GameError> {
    let step = make_monomial_blowup(spec.nvars(), centre, vertex)?;
    spec.weights = pushforward_weights(&spec.group, &spec.weights, &step)?;
    for e in exponents.iter_mut() {
        *e = step.forward_exponent(e)?;
    }
    seq.push(step)?;
    Ok(())
}

/// Blow up until one of `u^α`, `u^γ` divides the other.
pub fn monomialize_pair(
    alpha: &[u32],
    gamma: &[u32],
    spec: &MonomialValuationSpec,
    options: &GameOptions,
) -> Result<PairOutcome, GameError> {
    spec.check_len(alpha)?;
    spec.check_len(gamma)?;
    let n = spec.nvars();
    let mut state = spec.clone();
    let mut seq = FramedSequence::new(n, independence_set(&options.independence, &[alpha, gamma], n));
    let mut pair = [alpha.to_vec(), gamma.to_vec()];
    let mut trace = Vec::new();
    loop {
        let active = state.active();
        let tau = tau_on(&pair[0], &pair[1], &active);
        if tau.s == 0 {
            break;
        }
        if trace.len() >= options.budget {
            return Err(GameError::BudgetExceeded(options.budget));
        }
        if trace.last().is_some_and(|r: &PairRecord| tau >= r.tau) {
            return Err(GameError::NoDescent(trace.len()));
        }
        let (centre, vertex) = centre_on(&pair[0], &pair[1], &state, &active)?;
        trace.push(PairRecord {
            step: trace.len(),
            tau,
            centre: centre.clone(),
            vertex,
            alpha: pair[0].clone(),
            gamma: pair[1].clone(),
        });
        advance(&mut state, &mut seq, &centre, vertex, &mut pair)?;
    }
    let [alpha, gamma] = pair;
    Ok(PairOutcome { sequence: seq, alpha, gamma, weights: state.weights, trace })
}

/// `(b, s, t)`: number of extra minimal generators, then the least pairwise `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[u64; 3]", into = "[u64; 3]")]
pub struct IdealTau {
    pub b: u64,
    pub tau: Tau,
}

impl From<[u64; 3]> for IdealTau {
    fn from([b, s, t]: [u64; 3]) -> Self {
        IdealTau { b, tau: Tau { s, t } }
    }
}

impl From<IdealTau> for [u64; 3] {
    fn from(v: IdealTau) -> Self {
        [v.b, v.tau.s, v.tau.t]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealRecord {
    pub step: usize,
    pub tau: IdealTau,
    /// Input indices of the pair being separated.
    pub pair: [usize; 2],
    #[serde(rename = "J")]
    pub centre: Vec<usize>,
    #[serde(rename = "j")]
    pub vertex: usize,
    pub exponents: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealOutcome {
    pub sequence: FramedSequence,
    /// Input index of the generator that generates the transformed ideal.
    pub survivor: usize,
    /// Final images of every input generator.
    pub images: Vec<Vec<u32>>,
    pub weights: Vec<Value>,
    pub trace: Vec<IdealRecord>,
}

/// Input indices of a minimal generating set; the first of equal generators is kept.
fn minimal_set(exponents: &[Vec<u32>], active: &[bool]) -> Vec<usize> {
    (0..exponents.len())
        .filter(|&i| {
            !(0..exponents.len()).any(|k| {
                k != i
                    && divides_on(&exponents[k], &exponents[i], active)
                    && (k < i || !divides_on(&exponents[i], &exponents[k], active))
            })
        })
        .collect()
}

/// Transform until one generator (the first of least value) divides all others.
pub fn principalize_monomial_ideal(
    generators: &[Vec<u32>],
    spec: &MonomialValuationSpec,
    options: &GameOptions,
) -> Result<IdealOutcome, GameError> {
    if generators.is_empty() {
        return Err(GameError::EmptyGenerators);
    }
    for g in generators {
        spec.check_len(g)?;
    }
    let n = spec.nvars();
    let mut survivor = 0;
    let mut best = spec.value(&generators[0])?;
    for (i, g) in generators.iter().enumerate().skip(1) {
        let v = spec.value(g)?;
        if spec.group.compare(&v, &best)? == Ordering::Less {
            best = v;
            survivor = i;
        }
    }
    let refs: Vec<&[u32]> = generators.iter().map(Vec::as_slice).collect();
    let mut state = spec.clone();
    let mut seq = FramedSequence::new(n, independence_set(&options.independence, &refs, n));
    let mut images = generators.to_vec();
    let mut trace: Vec<IdealRecord> = Vec::new();
    loop {
        let active = state.active();
        let minimal = minimal_set(&images, &active);
        if minimal.len() == 1 {
            break;
        }
        let mut best_pair: Option<(Tau, [usize; 2])> = None;
        for (x, &i) in minimal.iter().enumerate() {
            for &k in &minimal[x + 1..] {
                let t = tau_on(&images[i], &images[k], &active);
                if best_pair.is_none_or(|(b, _)| t < b) {
                    best_pair = Some((t, [i, k]));
                }
            }
        }
        let (tau, pair) = best_pair.expect("at least two minimal generators");
        let inv = IdealTau { b: minimal.len() as u64 - 1, tau };
        if trace.len() >= options.budget {
            return Err(GameError::BudgetExceeded(options.budget));
        }
        if trace.last().is_some_and(|r| inv >= r.tau) {
            return Err(GameError::NoDescent(trace.len()));
        }
        let (centre, vertex) = centre_on(&images[pair[0]], &images[pair[1]], &state, &active)?;
        trace.push(IdealRecord {
            step: trace.len(),
            tau: inv,
            pair,
            centre: centre.clone(),
            vertex,
            exponents: images.clone(),
        });
        advance(&mut state, &mut seq, &centre, vertex, &mut images)?;
    }
    let active = state.active();
    if !images.iter().all(|e| divides_on(&images[survivor], e, &active)) {
        return Err(GameError::Internal("least-value generator does not divide the ideal".into()));
    }
    Ok(IdealOutcome { sequence: seq, survivor, images, weights: state.weights, trace })
}

fn check_poly(f: &MultiPoly, spec: &MonomialValuationSpec) -> Result<(), GameError> {
    if f.nvars() != spec.nvars() {
        return Err(GameError::LengthMismatch { expected: spec.nvars(), found: f.nvars() });
    }
    if f.is_zero() {
        return Err(GameError::ZeroPolynomial);
    }
    Ok(())
}

/// Least value of a term of `f`.
pub fn monomial_valuation(f: &MultiPoly, spec: &MonomialValuationSpec) -> Result<Value, GameError> {
    check_poly(f, spec)?;
    let mut terms = f.terms();
    let (first, _) = terms.next().expect("nonzero polynomial has a term");
    let mut best = spec.value(first)?;
    for (e, _) in terms {
        let v = spec.value(e)?;
        if spec.group.compare(&v, &best)? == Ordering::Less {
            best = v;
        }
    }
    Ok(best)
}

/// Sum of the terms of `f` of least value.
pub fn initial_form(f: &MultiPoly, spec: &MonomialValuationSpec) -> Result<MultiPoly, GameError> {
    let least = monomial_valuation(f, spec)?;
    let mut terms: Vec<(Vec<u32>, BigRational)> = Vec::new();
    for (e, c) in f.terms() {
        if spec.group.compare(&spec.value(e)?, &least)? == Ordering::Equal {
            terms.push((e.to_vec(), c.clone()));
        }
    }
    Ok(MultiPoly::from_terms(f.vars(), terms)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NondegOutcome {
    pub principalization: IdealOutcome,
    /// Image of `f` in the final variables.
    pub image: MultiPoly,
    /// `image = u'^exponent · unit`.
    pub exponent: Vec<u32>,
    pub unit: MultiPoly,
}

/// Part of `p` free of the non-unit variables; nonzero exactly when `p` is a unit.
pub fn residue_part(p: &MultiPoly, active: &[bool]) -> MultiPoly {
    let terms = p
        .terms()
        .filter(|(e, _)| e.iter().zip(active).all(|(&x, &on)| !on || x == 0))
        .map(|(e, c)| (e.to_vec(), c.clone()));
    MultiPoly::from_terms(p.vars(), terms).expect("same variables")
}

/// Write `f` as a monomial times a unit after principalizing its support.
pub fn monomialize_nondegenerate(
    f: &MultiPoly,
    spec: &MonomialValuationSpec,
    options: &GameOptions,
) -> Result<NondegOutcome, GameError> {
    check_poly(f, spec)?;
    let support: Vec<Vec<u32>> = f.terms().map(|(e, _)| e.to_vec()).collect();
    let principalization = principalize_monomial_ideal(&support, spec, options)?;
    let image = principalization.sequence.image_of(f)?;
    let active: Vec<bool> = principalization.weights.iter().map(|w| !w.is_zero()).collect();
    let lead = &principalization.images[principalization.survivor];
    let floor = image.min_exponent().expect("image of a nonzero polynomial");
    let exponent: Vec<u32> =
        (0..lead.len()).map(|i| if active[i] { lead[i] } else { floor[i] }).collect();
    let unit = image
        .div_monomial(&exponent)
        .ok_or_else(|| GameError::Internal("survivor does not divide the image".into()))?;
    if residue_part(&unit, &active).is_zero() {
        return Err(GameError::Internal("cofactor is not a unit".into()));
    }
    Ok(NondegOutcome { principalization, image, exponent, unit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("u{i}")).collect()
    }

    fn sqrt_spec(weights: &[&[i64]]) -> MonomialValuationSpec {
        let rank = weights[0].len();
        MonomialValuationSpec::new(
            ValueGroup::sqrt_primes(rank),
            names(weights.len()),
            weights.iter().map(|w| Value::from_ints(w)).collect(),
        )
        .unwrap()
    }

    /// Real value of a weight with coordinates over 1, √2, √3, √5.
    fn real(v: &Value) -> f64 {
        let basis = [1.0, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()];
        v.coords
            .iter()
            .zip(basis)
            .map(|(c, b)| {
                let (n, d): (f64, f64) = (c.numer().to_string().parse().unwrap(), c.denom().to_string().parse().unwrap());
                n / d * b
            })
            .sum()
    }

    fn poly(vars: &[String], terms: &[(&[u32], i64)]) -> MultiPoly {
        MultiPoly::from_terms(vars, terms.iter().map(|(e, c)| (e.to_vec(), BigRational::from_integer((*c).into()))))
            .unwrap()
    }

    /// Straight simulation with floating weights; valid while no two weights tie.
    fn simulate_pair(alpha: &[u32], gamma: &[u32], weights: &[f64]) -> (Vec<u32>, Vec<u32>) {
        let (mut a, mut g, mut w) = (alpha.to_vec(), gamma.to_vec(), weights.to_vec());
        loop {
            let m: Vec<u32> = a.iter().zip(&g).map(|(x, y)| *x.min(y)).collect();
            let mut at: Vec<u32> = a.iter().zip(&m).map(|(x, y)| x - y).collect();
            let mut gt: Vec<u32> = g.iter().zip(&m).map(|(x, y)| x - y).collect();
            if at.iter().sum::<u32>() > gt.iter().sum::<u32>() {
                std::mem::swap(&mut at, &mut gt);
            }
            let need: u32 = at.iter().sum();
            if need == 0 {
                return (a, g);
            }
            let mut centre: Vec<usize> = (0..a.len()).filter(|&i| at[i] > 0).collect();
            let mut cands: Vec<usize> = (0..a.len()).filter(|&i| gt[i] > 0).collect();
            cands.sort_by_key(|&i| (std::cmp::Reverse(gt[i]), i));
            let mut sum = 0;
            for i in cands {
                if sum >= need {
                    break;
                }
                sum += gt[i];
                centre.push(i);
            }
            let j = *centre.iter().min_by(|&&x, &&y| w[x].partial_cmp(&w[y]).unwrap().then(x.cmp(&y))).unwrap();
            a[j] = centre.iter().map(|&i| a[i]).sum();
            g[j] = centre.iter().map(|&i| g[i]).sum();
            for &i in &centre {
                if i != j {
                    w[i] -= w[j];
                }
            }
        }
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(&[1, 2], &[1, 2]).unwrap(), Tau { s: 0, t: 0 });
        assert_eq!(tau(&[2, 0, 1], &[1, 3, 1]).unwrap(), Tau { s: 1, t: 3 });
        assert_eq!(tau(&[0, 1], &[2, 0]).unwrap(), Tau { s: 1, t: 2 });
        assert!(tau(&[0], &[1, 2]).is_err());
        assert!(Tau { s: 0, t: 9 } < Tau { s: 1, t: 0 });
    }

    #[test]
    fn descent_examples() {
        let two = sqrt_spec(&[&[1, 0], &[0, 1]]);
        assert_eq!(descent_center(&[1, 0], &[0, 2], &two).unwrap(), (vec![0, 1], 0));
        let three = sqrt_spec(&[&[1, 0], &[1, 0], &[1, 0]]);
        assert_eq!(descent_center(&[2, 0, 0], &[0, 1, 3], &three).unwrap().0, vec![0, 2]);
        assert_eq!(descent_center(&[1, 0, 0], &[0, 1, 1], &three).unwrap().0, vec![0, 1]);
        assert_eq!(descent_center(&[1, 0, 0], &[1, 1, 1], &three), Err(GameError::NothingToDo));
    }

    #[test]
    fn pair_examples() {
        let spec = sqrt_spec(&[&[1, 0], &[0, 1]]);
        let opts = GameOptions::default();
        let done = monomialize_pair(&[1, 0], &[2, 1], &spec, &opts).unwrap();
        assert!(done.sequence.is_empty());

        let out = monomialize_pair(&[0, 1], &[2, 0], &spec, &opts).unwrap();
        assert!(2f64.sqrt() <= 2.0);
        assert!(out.alpha_divides_gamma());
        assert_eq!((out.alpha.clone(), out.gamma.clone()), simulate_pair(&[0, 1], &[2, 0], &[1.0, 2f64.sqrt()]));
        for w in out.trace.windows(2) {
            assert!(w[1].tau < w[0].tau);
        }

        let flat = sqrt_spec(&[&[1], &[1]]);
        let tie = monomialize_pair(&[1, 0], &[0, 1], &flat, &opts).unwrap();
        let active: Vec<bool> = tie.weights.iter().map(|w| !w.is_zero()).collect();
        assert_eq!(active, vec![true, false]);
        assert!(divides_on(&tie.alpha, &tie.gamma, &active) && divides_on(&tie.gamma, &tie.alpha, &active));
        assert_eq!(tie.alpha[0], tie.gamma[0]);
    }

    #[test]
    fn pair_budget() {
        let spec = sqrt_spec(&[&[1, 0], &[0, 1]]);
        let opts = GameOptions { budget: 1, ..GameOptions::default() };
        assert_eq!(monomialize_pair(&[0, 5], &[7, 0], &spec, &opts).unwrap_err(), GameError::BudgetExceeded(1));
    }

    #[test]
    fn auto_independence() {
        let spec = sqrt_spec(&[&[1, 0], &[0, 1], &[1, 1]]);
        let out = monomialize_pair(&[0, 1, 4], &[2, 0, 4], &spec, &GameOptions::default()).unwrap();
        assert_eq!(out.sequence.independence, Some(vec![2]));
        let off = GameOptions { independence: Independence::Off, ..GameOptions::default() };
        assert_eq!(monomialize_pair(&[0, 1, 4], &[2, 0, 4], &spec, &off).unwrap().sequence.independence, None);
    }

    #[test]
    fn ideal_examples() {
        let spec = sqrt_spec(&[&[1, 0], &[0, 1]]);
        let opts = GameOptions::default();
        let single = principalize_monomial_ideal(&[vec![3, 1]], &spec, &opts).unwrap();
        assert!(single.sequence.is_empty());
        assert_eq!(single.survivor, 0);
        assert_eq!(principalize_monomial_ideal(&[], &spec, &opts).unwrap_err(), GameError::EmptyGenerators);

        let pair = monomialize_pair(&[0, 1], &[2, 0], &spec, &opts).unwrap();
        let ideal = principalize_monomial_ideal(&[vec![0, 1], vec![2, 0]], &spec, &opts).unwrap();
        assert_eq!(ideal.sequence, pair.sequence);
        assert_eq!(ideal.images, vec![pair.alpha, pair.gamma]);
        assert_eq!(ideal.survivor, 0);

        let gens = vec![vec![3, 0], vec![1, 1], vec![0, 2]];
        let values: Vec<f64> = gens.iter().map(|g| f64::from(g[0]) + f64::from(g[1]) * 2f64.sqrt()).collect();
        let least = (0..3).min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap()).unwrap();
        let out = principalize_monomial_ideal(&gens, &spec, &opts).unwrap();
        assert_eq!(out.survivor, least);
        let active: Vec<bool> = out.weights.iter().map(|w| !w.is_zero()).collect();
        for img in &out.images {
            assert!(divides_on(&out.images[least], img, &active));
        }
        for w in out.trace.windows(2) {
            assert!(w[1].tau < w[0].tau);
        }
    }

    #[test]
    fn valuation_and_initial_form() {
        let spec = sqrt_spec(&[&[1, 0], &[0, 1]]);
        let v = names(2);
        let m = poly(&v, &[(&[2, 3], 5)]);
        assert_eq!(monomial_valuation(&m, &spec).unwrap(), Value::from_ints(&[2, 3]));
        assert_eq!(initial_form(&m, &spec).unwrap(), m);

        let f = poly(&v, &[(&[2, 0], 1), (&[0, 1], 1)]);
        assert!(2f64.sqrt() < 2.0);
        assert_eq!(monomial_valuation(&f, &spec).unwrap(), Value::from_ints(&[0, 1]));
        assert_eq!(monomial_valuation(&f.scale(&BigRational::from_integer((-7).into())), &spec).unwrap(), Value::from_ints(&[0, 1]));
        assert_eq!(initial_form(&f, &spec).unwrap(), poly(&v, &[(&[0, 1], 1)]));

        let flat = sqrt_spec(&[&[1], &[1]]);
        let g = poly(&v, &[(&[1, 0], 1), (&[0, 1], 1), (&[1, 1], 1)]);
        assert_eq!(initial_form(&g, &flat).unwrap(), poly(&v, &[(&[1, 0], 1), (&[0, 1], 1)]));
        assert_eq!(monomial_valuation(&MultiPoly::zero(&v), &flat).unwrap_err(), GameError::ZeroPolynomial);
    }

    #[test]
    fn nondegenerate_examples() {
        let opts = GameOptions::default();
        let spec = sqrt_spec(&[&[1, 0], &[0, 1]]);
        let v = names(2);
        let m = poly(&v, &[(&[1, 4], 3)]);
        let out = monomialize_nondegenerate(&m, &spec, &opts).unwrap();
        assert!(out.principalization.sequence.is_empty());
        assert_eq!(out.exponent, vec![1, 4]);

        let f = poly(&v, &[(&[0, 1], 1), (&[2, 0], 1)]);
        let out = monomialize_nondegenerate(&f, &spec, &opts).unwrap();
        let u2_image = out.principalization.sequence.image_of(&poly(&v, &[(&[0, 1], 1)])).unwrap();
        let (e, _) = u2_image.as_monomial().unwrap();
        assert_eq!(out.exponent, e.to_vec());
        assert_eq!(out.image.exact_div(&u2_image).unwrap(), Some(out.unit.clone()));
        assert!(!out.unit.constant_term().is_zero());

        let flat = sqrt_spec(&[&[1], &[1]]);
        let g = poly(&v, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let out = monomialize_nondegenerate(&g, &flat, &opts).unwrap();
        assert_eq!(out.principalization.sequence.len(), 1);
        assert_eq!(out.exponent, vec![1, 0]);
        assert_eq!(out.unit, poly(&v, &[(&[0, 0], 1), (&[0, 1], 1)]));
        assert!(out.unit.constant_term().is_one());
    }

    fn arb_weights(n: usize) -> impl Strategy<Value = Vec<Value>> {
        proptest::collection::vec((0i64..4, 0i64..4, 0i64..3), n).prop_map(|ws| {
            ws.into_iter()
                .map(|(a, b, c)| if a + b + c == 0 { Value::from_ints(&[1, 0, 0]) } else { Value::from_ints(&[a, b, c]) })
                .collect()
        })
    }

    fn arb_case() -> impl Strategy<Value = (Vec<Value>, Vec<u32>, Vec<u32>)> {
        (2usize..=4).prop_flat_map(|n| {
            (arb_weights(n), proptest::collection::vec(0u32..6, n), proptest::collection::vec(0u32..6, n))
        })
    }

    fn spec_of(weights: Vec<Value>) -> MonomialValuationSpec {
        MonomialValuationSpec::new(ValueGroup::sqrt_primes(3), names(weights.len()), weights).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(160))]

        #[test]
        fn pair_direction_matches_values((weights, alpha, gamma) in arb_case()) {
            let reals: Vec<f64> = weights.iter().map(real).collect();
            let spec = spec_of(weights);
            let out = monomialize_pair(&alpha, &gamma, &spec, &GameOptions::default()).unwrap();
            for w in out.trace.windows(2) {
                prop_assert!(w[1].tau < w[0].tau);
            }
            let va: f64 = alpha.iter().zip(&reals).map(|(&a, w)| f64::from(a) * w).sum();
            let vg: f64 = gamma.iter().zip(&reals).map(|(&a, w)| f64::from(a) * w).sum();
            let active: Vec<bool> = out.weights.iter().map(|w| !w.is_zero()).collect();
            if va < vg - 1e-9 {
                prop_assert!(divides_on(&out.alpha, &out.gamma, &active));
                prop_assert!(!divides_on(&out.gamma, &out.alpha, &active));
            } else if vg < va - 1e-9 {
                prop_assert!(divides_on(&out.gamma, &out.alpha, &active));
            } else {
                prop_assert!(divides_on(&out.alpha, &out.gamma, &active) && divides_on(&out.gamma, &out.alpha, &active));
            }
            let fwd = out.sequence.forward_matrix().unwrap();
            prop_assert_eq!(fwd.determinant(), num_bigint::BigInt::one());
        }

        #[test]
        fn pair_matches_float_simulation(alpha in proptest::collection::vec(0u32..6, 3), gamma in proptest::collection::vec(0u32..6, 3)) {
            // ℚ-independent weights never tie, so a float simulation is faithful.
            let spec = sqrt_spec(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
            let out = monomialize_pair(&alpha, &gamma, &spec, &GameOptions::default()).unwrap();
            let (a, g) = simulate_pair(&alpha, &gamma, &[1.0, 2f64.sqrt(), 3f64.sqrt()]);
            prop_assert_eq!(out.alpha, a);
            prop_assert_eq!(out.gamma, g);
        }

        #[test]
        fn ideal_survivor_divides_all(weights in arb_weights(3), gens in proptest::collection::vec(proptest::collection::vec(0u32..5, 3), 1..6)) {
            let spec = spec_of(weights);
            let out = principalize_monomial_ideal(&gens, &spec, &GameOptions::default()).unwrap();
            let active: Vec<bool> = out.weights.iter().map(|w| !w.is_zero()).collect();
            for img in &out.images {
                prop_assert!(divides_on(&out.images[out.survivor], img, &active));
            }
            for w in out.trace.windows(2) {
                prop_assert!(w[1].tau < w[0].tau);
            }
            if let Some(t) = &out.sequence.independence {
                for step in &out.sequence.steps {
                    prop_assert!(step.centre.iter().all(|i| !t.contains(i)));
                }
            }
        }

        #[test]
        fn valuation_is_additive_and_initial_forms_multiply(
            weights in arb_weights(2),
            f in proptest::collection::vec((proptest::collection::vec(0u32..4, 2), 1i64..5), 1..5),
            g in proptest::collection::vec((proptest::collection::vec(0u32..4, 2), 1i64..5), 1..5),
        ) {
            let spec = spec_of(weights);
            let v = names(2);
            let build = |raw: &[(Vec<u32>, i64)]| MultiPoly::from_terms(&v, raw.iter().map(|(e, c)| (e.clone(), BigRational::from_integer((*c).into())))).unwrap();
            let (f, g) = (build(&f), build(&g));
            let fg = f.mul(&g);
            let vf = monomial_valuation(&f, &spec).unwrap();
            let vg = monomial_valuation(&g, &spec).unwrap();
            prop_assert_eq!(monomial_valuation(&fg, &spec).unwrap(), &vf + &vg);
            prop_assert_eq!(initial_form(&fg, &spec).unwrap(), initial_form(&f, &spec).unwrap().mul(&initial_form(&g, &spec).unwrap()));
            let sum = f.add(&g);
            if !sum.is_zero() {
                let least = if spec.group.compare(&vf, &vg).unwrap() == Ordering::Less { vf } else { vg };
                prop_assert_ne!(spec.group.compare(&monomial_valuation(&sum, &spec).unwrap(), &least).unwrap(), Ordering::Less);
            }
        }

        #[test]
        fn nondegenerate_is_monomial_times_unit(
            weights in arb_weights(3),
            f in proptest::collection::vec((proptest::collection::vec(0u32..4, 3), -4i64..5), 1..5),
        ) {
            let spec = spec_of(weights);
            let v = names(3);
            let f = MultiPoly::from_terms(&v, f.into_iter().map(|(e, c)| (e, BigRational::from_integer(c.into())))).unwrap();
            prop_assume!(!f.is_zero());
            let out = monomialize_nondegenerate(&f, &spec, &GameOptions::default()).unwrap();
            prop_assert_eq!(out.unit.mul_monomial(&out.exponent), out.image.clone());
            let active: Vec<bool> = out.principalization.weights.iter().map(|w| !w.is_zero()).collect();
            prop_assert!(!residue_part(&out.unit, &active).is_zero());
        }
    }
}
