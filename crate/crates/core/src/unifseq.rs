//! Elementary uniformizing sequences and the drivers built on them.
//!
//! For a distinguished variable `w_n` whose weight is a rational combination
//! of independent ground weights, `ᾱ·β_n = Σ α_i β_i` with `ᾱ` minimal, and
//! `z = w_n^ᾱ / y` with `y = Π w_i^{α_i}` has value zero. Playing the pair game
//! on the numerator and denominator of `z` ends with a blow-up that turns `z`
//! into a unit slot; that blow-up is replaced by a constructed one whose
//! residue data is either transcendental or the polynomial `P(X) = Σ b_i X^i`.
//!
//! Images are computed in the polynomial ring of the slots after the
//! monomial parts of all steps, where the unit slot carries `z` itself. The
//! local ring of interest sits at the point where the other slots vanish and
//! `z` is a root of `P`; everything checked here is an exact identity in that
//! polynomial ring, with units tested by reduction modulo `P`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::framing::{
    build_constructed_blowup, pushforward_monomial_part, pushforward_weights, univariate, FramedSequence,
    FramingError, ResidueGenerator, StepKind,
};
use crate::game::{
    initial_form, principalize_monomial_ideal, residue_part, GameError, GameOptions, IdealOutcome, IdealRecord,
    Independence, MonomialValuationSpec, PairRecord,
};
use crate::keypoly::{delta_invariant, standard_expansion, truncated_valuation, validate_chain, KeyPolyChain, KeyPolyError};
use crate::polyalg::{apply_monomial_map, euclid_divide, IntMatrix, LaurentMonomialMap, MultiPoly, PolyError};
use crate::values::{Value, ValueError, ValueGroup};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnifSeqError {
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error("ground weights are not linearly independent over ℚ")]
    DependentGround,
    #[error("distinguished weight is not in the rational span of the ground weights")]
    NotInSpan,
    #[error("y is not a monomial: lattice coefficients {0:?} include a negative entry")]
    NegativeLattice(Vec<i64>),
    #[error("residue polynomial must be monic of degree ≥ 1 with nonzero constant term")]
    BadResidue,
    #[error("residue polynomial is reducible: root {0}")]
    ReducibleResidue(String),
    #[error("h too large: its monomial value must exceed that of Q")]
    PerturbationTooLarge,
    #[error("a perturbation needs algebraic residue data")]
    PerturbationWithoutQ,
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("requires completion: {0}")]
    RequiresCompletion(String),
    #[error("initial form of the key polynomial is not Σ b_i y^(d-i) x^(iᾱ): {0}")]
    NotBinomial(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    KeyPoly(#[from] KeyPolyError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Value(#[from] ValueError),
}

fn internal(msg: &str) -> UnifSeqError {
    UnifSeqError::Internal(msg.to_string())
}

/// Ground variables, passive variables and one distinguished variable, with
/// the residue data of `z` and an optional perturbation of `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformizingProblem {
    pub group: ValueGroup,
    pub vars: Vec<String>,
    pub weights: Vec<Value>,
    pub ground: Vec<usize>,
    pub passive: Vec<usize>,
    pub distinguished: usize,
    /// `Algebraic { minpoly: b }` gives `Q = Σ b_i y^{d−i} w_n^{iᾱ}`.
    pub residue: ResidueGenerator,
    pub perturbation: Option<MultiPoly>,
}

impl UniformizingProblem {
    fn validate(&self) -> Result<(), UnifSeqError> {
        let n = self.vars.len();
        if self.weights.len() != n {
            return Err(UnifSeqError::Problem(format!("{} weights for {n} variables", self.weights.len())));
        }
        let mut seen = vec![false; n];
        for &i in self.ground.iter().chain(&self.passive).chain(std::iter::once(&self.distinguished)) {
            if i >= n {
                return Err(UnifSeqError::Problem(format!("index {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(UnifSeqError::Problem(format!("index {i} listed twice")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(UnifSeqError::Problem("every variable must be ground, passive or distinguished".into()));
        }
        if self.ground.is_empty() {
            return Err(UnifSeqError::Problem("at least one ground variable is required".into()));
        }
        Ok(())
    }
}

/// Image of an original variable: `u'^exponent`, where the entry at the unit
/// slot is the power of `z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageWitness {
    pub var: String,
    pub exponent: Vec<u32>,
}

/// A final parameter as a Laurent monomial in the original variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamWitness {
    pub slot: usize,
    pub exponent: Vec<i64>,
}

/// `image(Q̃) = y'^d · quotient` with `quotient = P(z) + correction`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientIdentity {
    pub d: u32,
    pub y_image: Vec<u32>,
    pub image: MultiPoly,
    pub quotient: MultiPoly,
    pub correction: MultiPoly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformizingResult {
    pub sequence: FramedSequence,
    /// Steps spent making `y^d` divide the perturbation.
    pub pre_steps: usize,
    pub pre_trace: Vec<IdealRecord>,
    pub pair_trace: Vec<PairRecord>,
    /// Whether the last blow-up was taken at the other tied vertex so that `z` maps to the unit slot.
    pub reoriented: bool,
    pub alpha_bar: u32,
    /// `α_i` for each ground variable, in ground order.
    pub lattice: Vec<i64>,
    pub z_numerator: Vec<u32>,
    pub z_denominator: Vec<u32>,
    /// Slot that carries `z` and, when algebraic, the new parameter.
    pub unit_slot: usize,
    /// Slot names of the polynomial ring of images; the unit slot is named after `z`.
    pub frame_vars: Vec<String>,
    /// Weights of the slots after the last step; zero at the unit slot.
    pub weights: Vec<Value>,
    pub images: Vec<ImageWitness>,
    pub params: Vec<ParamWitness>,
    pub residue: ResidueGenerator,
    pub identity: Option<QuotientIdentity>,
}

/// A name not in `taken`, starting from `base`.
pub fn fresh_name(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

fn rename(p: &MultiPoly, vars: &[String]) -> MultiPoly {
    MultiPoly::from_terms(vars, p.terms().map(|(e, c)| (e.to_vec(), c.clone()))).expect("same arity")
}

fn monomial(vars: &[String], e: &[u32]) -> MultiPoly {
    MultiPoly::monomial(vars, e.to_vec(), BigRational::one())
}

fn to_i64(v: &[u32]) -> Vec<i64> {
    v.iter().map(|&x| i64::from(x)).collect()
}

fn to_u32(v: &[i64]) -> Result<Vec<u32>, UnifSeqError> {
    v.iter().map(|&x| u32::try_from(x).map_err(|_| internal("negative image exponent"))).collect()
}

/// Image under the monomial parts only, over `vars`.
fn monomial_image(f: &MultiPoly, forward: &IntMatrix, vars: &[String]) -> Result<MultiPoly, UnifSeqError> {
    Ok(rename(&apply_monomial_map(f, &LaurentMonomialMap::new(forward.clone()))?, vars))
}

/// Rejects `P` with a rational root when `deg P ≥ 2`.
fn check_no_rational_root(p: &[BigRational]) -> Result<(), UnifSeqError> {
    if p.len() <= 2 {
        return Ok(());
    }
    let lcm = p.iter().fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from(lcm.clone())).to_integer()).collect();
    let (a0, ad) = (ints[0].abs(), ints[ints.len() - 1].abs());
    let (Some(a0), Some(ad)) = (a0.to_u64(), ad.to_u64()) else { return Ok(()) };
    if a0 > 1 << 40 || ad > 1 << 40 {
        return Ok(());
    }
    let divisors = |n: u64| -> Vec<u64> {
        let mut out = Vec::new();
        let mut i = 1;
        while i * i <= n {
            if n.is_multiple_of(i) {
                out.push(i);
                out.push(n / i);
            }
            i += 1;
        }
        out
    };
    for num in divisors(a0) {
        for den in divisors(ad) {
            for sign in [1i64, -1] {
                let root = BigRational::new(BigInt::from(num) * sign, BigInt::from(den));
                let value = p.iter().rev().fold(BigRational::zero(), |acc, c| acc * &root + c);
                if value.is_zero() {
                    return Err(UnifSeqError::ReducibleResidue(root.to_string()));
                }
            }
        }
    }
    Ok(())
}

/// `p` is invertible at the point where `active` slots vanish and slot `z` is a root of `minpoly`.
pub fn is_unit_at_center(p: &MultiPoly, active: &[bool], z: Option<(usize, &[BigRational])>) -> Result<bool, UnifSeqError> {
    let residue = residue_part(p, active);
    match z {
        None => Ok(!residue.is_zero()),
        Some((slot, minpoly)) => {
            let modulus = univariate(residue.vars(), slot, minpoly);
            Ok(!euclid_divide(&residue, &modulus, slot)?.1.is_zero())
        }
    }
}

/// Runs the elementary uniformizing sequence and checks its conclusions exactly.
pub fn elementary_uniformizing_sequence(
    p: &UniformizingProblem,
    options: &GameOptions,
) -> Result<UniformizingResult, UnifSeqError> {
    p.validate()?;
    let group = &p.group;
    let n = p.vars.len();
    let dn = p.distinguished;
    let spec = MonomialValuationSpec::new(group.clone(), p.vars.clone(), p.weights.clone())?;

    let ground_w: Vec<Value> = p.ground.iter().map(|&i| p.weights[i].clone()).collect();
    if group.rational_rank(&ground_w)? != ground_w.len() {
        return Err(UnifSeqError::DependentGround);
    }
    let (abar, coeffs) = group.min_integer_multiple_in_lattice(&p.weights[dn], &ground_w).map_err(|e| match e {
        ValueError::NotInDivisibleHull => UnifSeqError::NotInSpan,
        other => other.into(),
    })?;
    let abar = abar.to_u32().ok_or_else(|| UnifSeqError::Unsupported("ramification index too large".into()))?;
    let lattice: Vec<i64> = coeffs
        .iter()
        .map(|c| c.to_i64().ok_or_else(|| UnifSeqError::Unsupported("lattice coefficient too large".into())))
        .collect::<Result<_, _>>()?;
    let mut num = vec![0u32; n];
    let mut den = vec![0u32; n];
    num[dn] = abar;
    for (&slot, &c) in p.ground.iter().zip(&lattice) {
        let mag = u32::try_from(c.unsigned_abs()).map_err(|_| UnifSeqError::Unsupported("lattice coefficient too large".into()))?;
        if c > 0 {
            den[slot] = mag;
        } else {
            num[slot] = mag;
        }
    }

    // Q̃ = Σ b_i y^{d−i} w_n^{iᾱ} + h
    let q_data = match &p.residue {
        ResidueGenerator::Algebraic { minpoly } => {
            if minpoly.len() < 2 || !minpoly.last().is_some_and(One::is_one) || minpoly[0].is_zero() {
                return Err(UnifSeqError::BadResidue);
            }
            if lattice.iter().any(|&c| c < 0) {
                return Err(UnifSeqError::NegativeLattice(lattice));
            }
            check_no_rational_root(minpoly)?;
            let d = u32::try_from(minpoly.len() - 1).expect("small degree");
            let mut q = MultiPoly::zero(&p.vars);
            for (i, b) in minpoly.iter().enumerate() {
                let i = i as u32;
                let e: Vec<u32> = (0..n).map(|s| den[s] * (d - i) + num[s] * i).collect();
                q = q.add(&MultiPoly::monomial(&p.vars, e, b.clone()));
            }
            let h = match &p.perturbation {
                Some(h) if !h.is_zero() => Some(h.with_vars(&p.vars)?),
                _ => None,
            };
            if let Some(h) = &h {
                let vq = crate::game::monomial_valuation(&q, &spec)?;
                let vh = crate::game::monomial_valuation(h, &spec)?;
                if group.compare(&vh, &vq)? != std::cmp::Ordering::Greater {
                    return Err(UnifSeqError::PerturbationTooLarge);
                }
            }
            Some((minpoly.clone(), d, q, h))
        }
        ResidueGenerator::Transcendental => {
            if p.perturbation.as_ref().is_some_and(|h| !h.is_zero()) {
                return Err(UnifSeqError::PerturbationWithoutQ);
            }
            None
        }
    };

    // Make y^d divide every monomial of h before the pair game.
    let mut pre_seq = FramedSequence::new(n, None);
    let mut pre_trace = Vec::new();
    let mut weights = p.weights.clone();
    if let Some((_, d, _, Some(h))) = &q_data {
        let yd: Vec<u32> = den.iter().map(|&e| e * d).collect();
        let needs = h.terms().any(|(e, _)| e.iter().zip(&yd).any(|(a, b)| a < b));
        if needs {
            let mut gens = vec![yd];
            gens.extend(h.terms().map(|(e, _)| e.to_vec()));
            let opts = GameOptions { budget: options.budget, independence: Independence::Off };
            let out = principalize_monomial_ideal(&gens, &spec, &opts)?;
            if out.survivor != 0 {
                return Err(internal("y^d is not the least generator"));
            }
            if out.weights.iter().any(Value::is_zero) {
                return Err(UnifSeqError::Unsupported(
                    "making y^d divide the perturbation produced a unit slot".into(),
                ));
            }
            pre_seq = out.sequence;
            pre_trace = out.trace;
            weights = out.weights;
        }
    }
    let pre_fwd = pre_seq.forward_matrix()?;
    let num1 = to_u32(&pre_fwd.apply(&to_i64(&num))?)?;
    let den1 = to_u32(&pre_fwd.apply(&to_i64(&den))?)?;

    let spec1 = MonomialValuationSpec::new(group.clone(), p.vars.clone(), weights.clone())?;
    let pair_opts = GameOptions {
        budget: options.budget.saturating_sub(pre_seq.len()),
        independence: Independence::Off,
    };
    let pair = crate::game::monomialize_pair(&num1, &den1, &spec1, &pair_opts)?;
    let Some(last) = pair.sequence.steps.last() else {
        return Err(internal("pair game made no blow-up"));
    };
    let mut weights_last = weights;
    for step in &pair.sequence.steps[..pair.sequence.len() - 1] {
        weights_last = pushforward_weights(group, &weights_last, step)?;
    }
    let zeros: Vec<usize> = (0..n).filter(|&i| pair.weights[i].is_zero()).collect();
    let &[k0] = zeros.as_slice() else {
        return Err(internal("expected exactly one unit slot after the pair game"));
    };
    let diff: Vec<i64> = num1.iter().zip(&den1).map(|(&a, &b)| i64::from(a) - i64::from(b)).collect();
    let diff = pair.sequence.forward_matrix()?.apply(&diff)?;
    let unit_vec = |k: usize, s: i64| (0..n).map(|i| if i == k { s } else { 0 }).collect::<Vec<i64>>();
    let (vertex, k, reoriented) = if diff == unit_vec(k0, 1) {
        (last.vertex, k0, false)
    } else if diff == unit_vec(k0, -1) {
        (k0, last.vertex, true)
    } else {
        return Err(internal("z is not a unit slot after the pair game"));
    };
    let residue_spec = match &q_data {
        Some((b, ..)) => ResidueGenerator::Algebraic { minpoly: b.clone() },
        None => ResidueGenerator::Transcendental,
    };
    let constructed = build_constructed_blowup(group, n, &last.centre, vertex, &weights_last, std::slice::from_ref(&residue_spec))?;
    if constructed.j_times != [k] {
        return Err(internal("constructed blow-up does not create the expected unit slot"));
    }
    let final_weights = pushforward_monomial_part(group, &weights_last, &constructed)?;

    let mut seq = FramedSequence::new(n, None);
    for step in pre_seq.steps.iter().chain(&pair.sequence.steps[..pair.sequence.len() - 1]) {
        seq.push(step.clone())?;
    }
    seq.push(constructed)?;
    let touched: Vec<usize> = seq.steps.iter().flat_map(|s| s.centre.clone()).collect();
    seq.independence = Some(p.passive.iter().copied().filter(|i| !touched.contains(i)).collect());
    seq.validate()?;

    // (1) all steps but the last are monomial, and z is the unit slot.
    let fwd = seq.forward_matrix()?;
    let inv = seq.inverse_matrix()?;
    if seq.steps[..seq.len() - 1].iter().any(|s| s.kind != StepKind::Monomial) {
        return Err(internal("a step before the last is not monomial"));
    }
    let z_diff: Vec<i64> = num.iter().zip(&den).map(|(&a, &b)| i64::from(a) - i64::from(b)).collect();
    if fwd.apply(&z_diff)? != unit_vec(k, 1) {
        return Err(internal("z does not map to the unit slot"));
    }
    // (2) parameter count.
    let expected_after = if q_data.is_some() { n } else { n - 1 };
    if seq.steps.last().map(|s| s.n_after) != Some(expected_after) {
        return Err(internal("wrong parameter count after the last step"));
    }
    // (3) images of the w variables avoid the passive slots.
    let w_slots: Vec<usize> = p.ground.iter().copied().chain(std::iter::once(dn)).collect();
    let mut images = Vec::new();
    for &j in &w_slots {
        let col = fwd.column(j);
        if p.passive.iter().any(|&v| col[v] != 0) {
            return Err(internal("image of a w variable involves a passive variable"));
        }
        images.push(ImageWitness { var: p.vars[j].clone(), exponent: to_u32(&col)? });
    }
    // (4) the other new w parameters are Laurent monomials in w.
    let mut params = Vec::new();
    for &q in w_slots.iter().filter(|&&q| q != k) {
        let col = inv.column(q);
        if p.passive.iter().any(|&v| col[v] != 0) {
            return Err(internal("a new parameter involves a passive variable"));
        }
        params.push(ParamWitness { slot: q, exponent: col });
    }
    let mut frame_vars = p.vars.clone();
    frame_vars[k] = fresh_name("z", &p.vars);
    // (5) image(Q̃) = y'^d (P(z) + h'').
    let identity = match &q_data {
        None => None,
        Some((b, d, q, h)) => {
            let q_tilde = match h {
                Some(h) => q.add(h),
                None => q.clone(),
            };
            let image = monomial_image(&q_tilde, &fwd, &frame_vars)?;
            let y_image = to_u32(&fwd.apply(&to_i64(&den))?)?;
            let yd: Vec<u32> = y_image.iter().map(|&e| e * d).collect();
            let quotient = image.div_monomial(&yd).ok_or_else(|| internal("y^d does not divide the image of Q"))?;
            let correction = quotient.sub(&univariate(&frame_vars, k, b));
            let in_ideal = correction.terms().all(|(e, _)| {
                (0..n).any(|s| s != k && e[s] > 0 && !final_weights[s].is_zero())
            });
            if !in_ideal {
                return Err(internal("correction is not in the ideal of the other parameters"));
            }
            if h.is_none() && !correction.is_zero() {
                return Err(internal("image of Q is not y^d·P(z)"));
            }
            Some(QuotientIdentity { d: *d, y_image, image, quotient, correction })
        }
    };
    Ok(UniformizingResult {
        sequence: seq,
        pre_steps: pre_seq.len(),
        pre_trace,
        pair_trace: pair.trace,
        reoriented,
        alpha_bar: abar,
        lattice,
        z_numerator: num,
        z_denominator: den,
        unit_slot: k,
        frame_vars,
        weights: final_weights,
        images,
        params,
        // (6) residue field ℚ(X) or ℚ[X]/(P).
        residue: residue_spec,
        identity,
    })
}

/// `image = unit · Π_{q≠param} slot_q^{monomial_q} · param^{monomial[param]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryWitness {
    pub level: usize,
    pub image: MultiPoly,
    pub monomial: Vec<u32>,
    pub unit: MultiPoly,
}

/// Final frame in which every key polynomial is a monomial times a unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyPolyMonomialization {
    pub sequence: FramedSequence,
    pub uniformizing: Option<UniformizingResult>,
    /// Variables of the polynomial ring holding all images.
    pub vars: Vec<String>,
    /// Slot of the new last parameter.
    pub param_slot: usize,
    /// The new last parameter as a polynomial in `vars`.
    pub param: MultiPoly,
    /// Weights of the final parameters, the new last parameter included.
    pub weights: Vec<Value>,
    /// Residue polynomial of the slot variable at `param_slot`, when it is `z`.
    #[serde(with = "crate::rat::opt_vec")]
    pub residue: Option<Vec<BigRational>>,
    pub witnesses: Vec<EntryWitness>,
    /// Number of times the new parameter divides the image of the top key polynomial.
    pub top_multiplicity: u32,
}

impl KeyPolyMonomialization {
    fn center(&self) -> Option<(usize, &[BigRational])> {
        self.residue.as_deref().map(|m| (self.param_slot, m))
    }

    /// Slots that vanish at the centre.
    fn active(&self) -> Vec<bool> {
        (0..self.vars.len()).map(|i| i != self.param_slot || self.residue.is_none()).collect()
    }

    fn assemble(&self, monomial_exp: &[u32], unit: &MultiPoly) -> MultiPoly {
        let mut e = monomial_exp.to_vec();
        let param_power = std::mem::replace(&mut e[self.param_slot], 0);
        if self.residue.is_none() {
            e[self.param_slot] = param_power;
            return unit.mul_monomial(&e);
        }
        unit.mul_monomial(&e).mul(&self.param.pow(param_power))
    }
}

fn check_witness(kp: &KeyPolyMonomialization, w: &EntryWitness) -> Result<(), UnifSeqError> {
    if kp.assemble(&w.monomial, &w.unit) != w.image {
        return Err(internal("witness does not reassemble the image"));
    }
    if !is_unit_at_center(&w.unit, &kp.active(), kp.center())? {
        return Err(internal("witness cofactor is not a unit"));
    }
    Ok(())
}

/// Monomializes every key polynomial of a chain of length at most two.
pub fn monomialize_key_polys(chain: &KeyPolyChain, options: &GameOptions) -> Result<KeyPolyMonomialization, UnifSeqError> {
    let diagnostics = validate_chain(chain);
    if !diagnostics.is_empty() {
        let codes: Vec<String> = diagnostics.iter().map(|d| format!("{}@{}", d.code, d.level)).collect();
        return Err(UnifSeqError::InvalidChain(codes.join(", ")));
    }
    let r = chain.x_index();
    let n = r + 1;
    let vars = chain.vars().to_vec();
    let weights0 = chain.level0_weights();
    if chain.len() == 1 {
        let x = MultiPoly::var(&vars, r);
        let mut e = vec![0; n];
        e[r] = 1;
        let kp = KeyPolyMonomialization {
            sequence: FramedSequence::new(n, Some(Vec::new())),
            uniformizing: None,
            vars: vars.clone(),
            param_slot: r,
            param: x.clone(),
            weights: weights0,
            residue: None,
            witnesses: vec![EntryWitness { level: 1, image: x, monomial: e, unit: MultiPoly::one(&vars) }],
            top_multiplicity: 1,
        };
        check_witness(&kp, &kp.witnesses[0])?;
        return Ok(kp);
    }
    if chain.len() > 2 {
        return Err(UnifSeqError::RequiresCompletion(format!(
            "chains with {} entries need the third level expressed over a residue extension",
            chain.len()
        )));
    }
    let group = chain.group();
    let spec0 = MonomialValuationSpec::new(group.clone(), vars.clone(), weights0.clone())?;
    let q2 = chain.q(2);
    let init = initial_form(q2, &spec0)?;
    let ground_w = chain.ground_weights().to_vec();
    if group.rational_rank(&ground_w)? != ground_w.len() {
        return Err(UnifSeqError::DependentGround);
    }
    let (abar, coeffs) = group.min_integer_multiple_in_lattice(chain.beta(1), &ground_w).map_err(|e| match e {
        ValueError::NotInDivisibleHull => UnifSeqError::NotInSpan,
        other => other.into(),
    })?;
    let abar = abar.to_u32().ok_or_else(|| UnifSeqError::Unsupported("ramification index too large".into()))?;
    let lattice: Vec<u32> = coeffs
        .iter()
        .map(|c| c.to_u32().ok_or_else(|| UnifSeqError::NegativeLattice(coeffs.iter().filter_map(|c| c.to_i64()).collect())))
        .collect::<Result<_, _>>()?;
    let degree = chain.degree(2);
    if !degree.is_multiple_of(abar) {
        return Err(UnifSeqError::NotBinomial(format!("degree {degree} is not a multiple of {abar}")));
    }
    let d = degree / abar;
    let mut b = Vec::new();
    let mut rebuilt = MultiPoly::zero(&vars);
    for i in 0..=d {
        let mut e: Vec<u32> = lattice.iter().map(|&a| a * (d - i)).collect();
        e.push(i * abar);
        let c = init.coefficient(&e);
        rebuilt = rebuilt.add(&MultiPoly::monomial(&vars, e, c.clone()));
        b.push(c);
    }
    if rebuilt != init {
        return Err(UnifSeqError::NotBinomial(init.to_string()));
    }
    let h = q2.sub(&init);
    let problem = UniformizingProblem {
        group: group.clone(),
        vars: vars.clone(),
        weights: weights0,
        ground: (0..r).collect(),
        passive: Vec::new(),
        distinguished: r,
        residue: ResidueGenerator::Algebraic { minpoly: b.clone() },
        perturbation: if h.is_zero() { None } else { Some(h) },
    };
    let res = elementary_uniformizing_sequence(&problem, options)?;
    let id = res.identity.clone().ok_or_else(|| internal("missing quotient identity"))?;
    let k = res.unit_slot;
    let frame = res.frame_vars.clone();
    let y_value = group.value_of_exponent(&res.z_denominator, &chain.level0_weights())?;
    let param_value = chain.beta(2) - &y_value.scale_int(i64::from(d));
    if group.sign(&param_value)? != std::cmp::Ordering::Greater {
        return Err(internal("new parameter does not have positive value"));
    }
    let mut weights = res.weights.clone();
    weights[k] = param_value;
    let fwd = res.sequence.forward_matrix()?;
    let x_image = monomial_image(&MultiPoly::var(&vars, r), &fwd, &frame)?;
    let x_exp = fwd.column(r);
    let mut x_mono = to_u32(&x_exp)?;
    let x_z = std::mem::replace(&mut x_mono[k], 0);
    let mut z_only = vec![0; n];
    z_only[k] = x_z;
    let w1 = EntryWitness { level: 1, image: x_image, monomial: x_mono, unit: monomial(&frame, &z_only) };
    let mut q_mono: Vec<u32> = id.y_image.iter().map(|&e| e * d).collect();
    let q_z = std::mem::replace(&mut q_mono[k], 1);
    let mut z_only = vec![0; n];
    z_only[k] = q_z;
    let w2 = EntryWitness { level: 2, image: id.image.clone(), monomial: q_mono, unit: monomial(&frame, &z_only) };
    let top_multiplicity = id.image.multiplicity_of(&id.quotient)?;
    let kp = KeyPolyMonomialization {
        sequence: res.sequence.clone(),
        uniformizing: Some(res),
        vars: frame,
        param_slot: k,
        param: id.quotient,
        weights,
        residue: Some(b),
        witnesses: vec![w1, w2],
        top_multiplicity,
    };
    for w in &kp.witnesses {
        check_witness(&kp, w)?;
    }
    if kp.top_multiplicity != 1 {
        return Err(internal("new parameter does not divide the top key polynomial exactly once"));
    }
    Ok(kp)
}

/// One term of `f` in the final frame: `coefficient · Π slot^exponent`,
/// with the exponent at the parameter slot counting powers of the parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameTerm {
    pub exponent: Vec<u32>,
    pub coefficient: MultiPoly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialMonomialization {
    pub keypoly: KeyPolyMonomialization,
    pub delta: usize,
    pub value: Value,
    pub terms: Vec<FrameTerm>,
    pub game: GameRun,
    /// Names of the game's final slots followed, when present, by `z`.
    pub unit_vars: Vec<String>,
    pub exponent: Vec<u32>,
    pub unit: MultiPoly,
}

/// The principalization run in the final frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameRun {
    pub sequence: FramedSequence,
    pub survivor: usize,
    pub images: Vec<Vec<u32>>,
    pub weights: Vec<Value>,
    pub trace: Vec<IdealRecord>,
}

impl From<IdealOutcome> for GameRun {
    fn from(o: IdealOutcome) -> Self {
        GameRun { sequence: o.sequence, survivor: o.survivor, images: o.images, weights: o.weights, trace: o.trace }
    }
}

/// Writes `f` as a monomial in the final parameters times a unit.
pub fn monomialize_polynomial(
    f: &MultiPoly,
    chain: &KeyPolyChain,
    options: &GameOptions,
) -> Result<PolynomialMonomialization, UnifSeqError> {
    let f = f.with_vars(chain.vars())?;
    if f.is_zero() {
        return Err(GameError::ZeroPolynomial.into());
    }
    let kp = monomialize_key_polys(chain, options)?;
    let level = chain.len();
    let expansion = standard_expansion(&f, chain, level)?;
    let delta = delta_invariant(&f, chain, level)?;
    let value = truncated_valuation(&f, chain, level)?;
    let n = kp.vars.len();
    let k = kp.param_slot;

    let mut terms: Vec<FrameTerm> = Vec::new();
    if kp.residue.is_none() {
        for (e, c) in f.terms() {
            terms.push(FrameTerm { exponent: e.to_vec(), coefficient: MultiPoly::constant(&kp.vars, c.clone()) });
        }
    } else {
        let fwd = kp.sequence.forward_matrix()?;
        let top = &kp.witnesses[level - 1];
        let z_per_param = top.unit.min_exponent().map_or(0, |e| e[k]);
        for (j, digit) in expansion.coefficients.iter().enumerate() {
            if digit.is_zero() {
                continue;
            }
            let image = monomial_image(digit, &fwd, &kp.vars)?;
            let mut groups: BTreeMap<Vec<u32>, MultiPoly> = BTreeMap::new();
            for (e, c) in image.terms() {
                let mut key = e.to_vec();
                let zp = std::mem::replace(&mut key[k], 0);
                let mut ze = vec![0; n];
                ze[k] = zp;
                let entry = groups.entry(key).or_insert_with(|| MultiPoly::zero(&kp.vars));
                *entry = entry.add(&MultiPoly::monomial(&kp.vars, ze, c.clone()));
            }
            let j32 = u32::try_from(j).expect("small power");
            for (key, coefficient) in groups {
                let exponent: Vec<u32> = (0..n)
                    .map(|s| if s == k { j32 } else { key[s] + j32 * top.monomial[s] })
                    .collect();
                let mut ze = vec![0; n];
                ze[k] = j32 * z_per_param;
                terms.push(FrameTerm { exponent, coefficient: coefficient.mul_monomial(&ze) });
            }
        }
        let image = monomial_image(&f, &fwd, &kp.vars)?;
        let reassembled = terms
            .iter()
            .fold(MultiPoly::zero(&kp.vars), |acc, t| acc.add(&kp.assemble(&t.exponent, &t.coefficient)));
        if reassembled != image {
            return Err(internal("frame terms do not reassemble the image"));
        }
    }
    for t in &terms {
        if !is_unit_at_center(&t.coefficient, &kp.active(), kp.center())? {
            return Err(UnifSeqError::Unsupported(
                "a coefficient vanishes at the centre; this needs a further key polynomial".into(),
            ));
        }
    }

    let mut slot_names = kp.vars.clone();
    let z_name = slot_names[k].clone();
    if kp.residue.is_some() {
        slot_names[k] = fresh_name("t", &kp.vars);
    }
    let spec = MonomialValuationSpec::new(chain.group().clone(), slot_names.clone(), kp.weights.clone())?;
    let exponents: Vec<Vec<u32>> = terms.iter().map(|t| t.exponent.clone()).collect();
    let out = principalize_monomial_ideal(&exponents, &spec, options)?;
    let active: Vec<bool> = out.weights.iter().map(|w| !w.is_zero()).collect();
    let lead = out.images[out.survivor].clone();
    let exponent: Vec<u32> = (0..n)
        .map(|s| if active[s] { lead[s] } else { out.images.iter().map(|e| e[s]).min().unwrap_or(0) })
        .collect();
    let found = chain.group().value_of_exponent(&exponent, &out.weights)?;
    if chain.group().compare(&found, &value)? != std::cmp::Ordering::Equal {
        return Err(internal("valuation is not monomial in the final frame"));
    }

    let mut unit_vars = slot_names.clone();
    let with_z = kp.residue.is_some();
    if with_z {
        unit_vars.push(z_name);
    }
    let lift = |p: &MultiPoly, extra: &[u32]| -> MultiPoly {
        let ts = p.terms().map(|(e, c)| {
            let mut full: Vec<u32> = extra.to_vec();
            if with_z {
                full.push(e[k]);
            }
            (full, c.clone())
        });
        let mut out = MultiPoly::zero(&unit_vars);
        for (e, c) in ts {
            out = out.add(&MultiPoly::monomial(&unit_vars, e, c));
        }
        out
    };
    let mut unit = MultiPoly::zero(&unit_vars);
    let mut image = MultiPoly::zero(&unit_vars);
    for (t, img) in terms.iter().zip(&out.images) {
        let rel: Vec<u32> = img.iter().zip(&exponent).map(|(a, b)| a - b).collect();
        unit = unit.add(&lift(&t.coefficient, &rel));
        image = image.add(&lift(&t.coefficient, img));
    }
    if unit.mul_monomial(&[exponent.clone(), if with_z { vec![0] } else { vec![] }].concat()) != image {
        return Err(internal("exponent and unit do not reproduce the image"));
    }
    let mut unit_active = active.clone();
    if with_z {
        unit_active.push(false);
    }
    let center = kp.residue.as_deref().map(|m| (n, m));
    if !is_unit_at_center(&unit, &unit_active, center)? {
        return Err(internal("cofactor is not a unit"));
    }
    Ok(PolynomialMonomialization {
        keypoly: kp,
        delta,
        value,
        terms,
        game: out.into(),
        unit_vars,
        exponent,
        unit,
    })
}
