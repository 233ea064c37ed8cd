//! Exact sparse multivariate polynomials over ℚ, simple extension towers,
//! Euclidean division in a distinguished variable, adic expansions and
//! monomial substitutions.
//!
//! Tower elements are polynomials in the extension symbols with rational
//! coefficients; a polynomial with tower coefficients is a [`MultiPoly`] whose
//! variable list includes the symbols, normalized by [`FieldTower::reduce`].

mod monomial_map;
mod poly;
mod tower;

pub use monomial_map::{apply_monomial_map, IntMatrix, LaurentMonomialMap};
pub use poly::{Mono, MultiPoly};
pub use tower::{Extension, FieldTower};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("non-monic divisor")]
    NonMonicDivisor,
    #[error("Laurent escape: substitution produced a negative exponent")]
    LaurentEscape,
    #[error("variable mismatch: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("exponent length {found} does not match {expected} variables")]
    ExponentLength { expected: usize, found: usize },
    #[error("reducible definer for {sym}: factor {factor}")]
    ReducibleDefiner { sym: String, factor: String },
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid tower: {0}")]
    BadTower(String),
    #[error("matrix is not square")]
    NotSquare,
    #[error("integer overflow in exponent arithmetic")]
    Overflow,
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// `f = q·g + r` with `deg_x r < deg_x g`; `g` must have leading coefficient 1 in `x`.
pub fn euclid_divide(f: &MultiPoly, g: &MultiPoly, x: usize) -> Result<(MultiPoly, MultiPoly), PolyError> {
    if f.vars() != g.vars() {
        return Err(PolyError::VariableMismatch { left: f.vars().to_vec(), right: g.vars().to_vec() });
    }
    if !g.is_monic_in(x) {
        return Err(PolyError::NonMonicDivisor);
    }
    let dg = g.degree_in(x).unwrap_or(0);
    let mut shift = vec![0; f.nvars()];
    let mut q = MultiPoly::zero(f.vars());
    let mut r = f.clone();
    while let Some(dr) = r.degree_in(x).filter(|&d| d >= dg) {
        shift[x] = dr - dg;
        let t = r.leading_coefficient_in(x).mul_monomial(&shift);
        r = r.sub(&t.mul(g));
        q = q.add(&t);
    }
    Ok((q, r))
}

/// Digits `a_0, …, a_s` with `f = Σ a_i Q^i`, `deg_x a_i < deg_x Q`; zero has no digits.
pub fn q_adic_expansion(f: &MultiPoly, q: &MultiPoly, x: usize) -> Result<Vec<MultiPoly>, PolyError> {
    if q.degree_in(x).unwrap_or(0) == 0 {
        return Err(PolyError::NonMonicDivisor);
    }
    let mut digits = Vec::new();
    let mut cur = f.clone();
    while !cur.is_zero() {
        let (quot, rem) = euclid_divide(&cur, q, x)?;
        digits.push(rem);
        cur = quot;
    }
    Ok(digits)
}

/// `f` with variable `x` replaced by `g`.
pub fn substitute_variable(f: &MultiPoly, x: usize, g: &MultiPoly) -> Result<MultiPoly, PolyError> {
    f.substitute(x, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn poly(vars: &[String], terms: &[(&[u32], i64)]) -> MultiPoly {
        MultiPoly::from_terms(vars, terms.iter().map(|(e, c)| (e.to_vec(), q(*c)))).unwrap()
    }

    /// Dense univariate long division over ℚ, coefficients low to high.
    fn dense_divide(f: &[i64], g: &[i64]) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut r: Vec<BigRational> = f.iter().map(|&c| q(c)).collect();
        let g: Vec<BigRational> = g.iter().map(|&c| q(c)).collect();
        let mut quot = vec![BigRational::zero(); f.len().max(g.len())];
        for k in (g.len() - 1..r.len()).rev() {
            let c = &r[k] / g.last().unwrap();
            let shift = k + 1 - g.len();
            for (i, gi) in g.iter().enumerate() {
                r[shift + i] = &r[shift + i] - &c * gi;
            }
            quot[shift] = c;
        }
        r.truncate(g.len() - 1);
        (quot, r)
    }

    fn dense(p: &MultiPoly, x: usize) -> Vec<BigRational> {
        p.coefficients_in(x).iter().map(MultiPoly::constant_term).collect()
    }

    fn trimmed(mut v: Vec<BigRational>) -> Vec<BigRational> {
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        v
    }

    #[test]
    fn euclid_examples() {
        let v = names(&["x"]);
        let f = poly(&v, &[(&[2], 1), (&[1], 1), (&[0], 1)]);
        let (qq, r) = euclid_divide(&f, &MultiPoly::var(&v, 0), 0).unwrap();
        assert_eq!(qq, poly(&v, &[(&[1], 1), (&[0], 1)]));
        assert_eq!(r, MultiPoly::one(&v));

        let f = poly(&v, &[(&[3], 1)]);
        let g = poly(&v, &[(&[2], 1), (&[0], 1)]);
        let (oq, or) = dense_divide(&[0, 0, 0, 1], &[1, 0, 1]);
        let (qq, r) = euclid_divide(&f, &g, 0).unwrap();
        assert_eq!(dense(&qq, 0), trimmed(oq));
        assert_eq!(dense(&r, 0), trimmed(or));
        assert_eq!(qq, MultiPoly::var(&v, 0));
        assert_eq!(r, MultiPoly::var(&v, 0).neg());

        let (qq, r) = euclid_divide(&g, &f, 0).unwrap();
        assert!(qq.is_zero());
        assert_eq!(r, g);
    }

    #[test]
    fn euclid_rejects_non_monic() {
        let v = names(&["x"]);
        let g = poly(&v, &[(&[1], 2)]);
        assert_eq!(euclid_divide(&g, &g, 0), Err(PolyError::NonMonicDivisor));
    }

    #[test]
    fn q_adic_examples() {
        let v = names(&["u", "x"]);
        let qq = poly(&v, &[(&[0, 2], 1), (&[3, 0], -1)]);
        assert_eq!(q_adic_expansion(&qq, &qq, 1).unwrap(), vec![MultiPoly::zero(&v), MultiPoly::one(&v)]);
        let f = poly(&v, &[(&[0, 3], 1)]);
        let digits = q_adic_expansion(&f, &qq, 1).unwrap();
        assert_eq!(digits, vec![poly(&v, &[(&[3, 1], 1)]), poly(&v, &[(&[0, 1], 1)])]);
        let c = poly(&v, &[(&[2, 0], 5)]);
        assert_eq!(q_adic_expansion(&c, &qq, 1).unwrap(), vec![c.clone()]);
    }

    #[test]
    fn monomial_map_examples() {
        let v = names(&["u1", "u2"]);
        let f = poly(&v, &[(&[2, 3], 1)]);
        let id = LaurentMonomialMap::identity(2);
        assert_eq!(apply_monomial_map(&f, &id).unwrap(), f);

        // u1 -> u1, u2 -> u1*u2: columns (1,0) and (1,1).
        let map = LaurentMonomialMap::new(IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap());
        let u1u2 = poly(&v, &[(&[1, 1], 1)]);
        let oracle = f.substitute(1, &u1u2).unwrap();
        assert_eq!(oracle, poly(&v, &[(&[5, 3], 1)]));
        assert_eq!(apply_monomial_map(&f, &map).unwrap(), oracle);

        let sum = poly(&v, &[(&[1, 0], 1), (&[0, 1], 1)]);
        let oracle = sum.substitute(1, &u1u2).unwrap();
        assert_eq!(apply_monomial_map(&sum, &map).unwrap(), oracle);
        assert_eq!(oracle, poly(&v, &[(&[1, 0], 1), (&[1, 1], 1)]));

        let inverse = LaurentMonomialMap::new(IntMatrix::from_rows(&[vec![1, -1], vec![0, 1]]).unwrap());
        assert_eq!(apply_monomial_map(&poly(&v, &[(&[0, 1], 1)]), &inverse), Err(PolyError::LaurentEscape));
    }

    #[test]
    fn substitution_examples() {
        let v = names(&["u", "x"]);
        let x = MultiPoly::var(&v, 1);
        let f = poly(&v, &[(&[0, 2], 1), (&[3, 0], -1)]);
        assert_eq!(substitute_variable(&f, 1, &x).unwrap(), f);
        let g = poly(&v, &[(&[0, 1], 1), (&[0, 0], 1)]);
        assert_eq!(
            substitute_variable(&poly(&v, &[(&[0, 2], 1)]), 1, &g).unwrap(),
            poly(&v, &[(&[0, 2], 1), (&[0, 1], 2), (&[0, 0], 1)])
        );
        let g = poly(&v, &[(&[3, 1], 1), (&[3, 0], 1)]);
        let u3 = poly(&v, &[(&[3, 0], 1)]);
        let xp1 = poly(&v, &[(&[0, 1], 1), (&[0, 0], 1)]);
        let oracle = u3.pow(2).mul(&xp1.pow(2)).sub(&u3);
        assert_eq!(substitute_variable(&f, 1, &g).unwrap(), oracle);
    }

    #[test]
    fn exact_division_and_multiplicity() {
        let v = names(&["a", "t"]);
        let t = MultiPoly::var(&v, 1);
        let tp1 = poly(&v, &[(&[0, 1], 1), (&[0, 0], 1)]);
        let f = poly(&v, &[(&[3, 0], 1)]).mul(&tp1).mul(&tp1);
        assert_eq!(f.multiplicity_of(&tp1).unwrap(), 2);
        assert_eq!(f.multiplicity_of(&t).unwrap(), 0);
        assert_eq!(f.exact_div(&tp1).unwrap(), Some(poly(&v, &[(&[3, 0], 1)]).mul(&tp1)));
    }

    #[test]
    fn tower_inverse_and_reducible_definer() {
        let t = names(&["t"]);
        let good = FieldTower::new(vec![Extension { sym: "t".into(), minpoly: poly(&t, &[(&[2], 1), (&[0], -2)]) }])
            .unwrap();
        let a = poly(&t, &[(&[1], 1), (&[0], 1)]);
        let inv = good.inverse(&a).unwrap();
        assert!(good.is_one(&good.mul(&a, &inv)));
        // (1 + √2)^{-1} = √2 - 1
        assert_eq!(inv, poly(&t, &[(&[1], 1), (&[0], -1)]));

        let bad = FieldTower::new(vec![Extension { sym: "t".into(), minpoly: poly(&t, &[(&[2], 1), (&[0], -1)]) }])
            .unwrap();
        let a = poly(&t, &[(&[1], 1), (&[0], -1)]);
        match bad.inverse(&a) {
            Err(PolyError::ReducibleDefiner { sym, factor }) => {
                assert_eq!(sym, "t");
                assert_eq!(factor, "t - 1");
            }
            other => panic!("expected reducible definer, got {other:?}"),
        }
    }

    #[test]
    fn tower_rejects_non_monic_definer() {
        let t = names(&["t"]);
        let res = FieldTower::new(vec![Extension { sym: "t".into(), minpoly: poly(&t, &[(&[2], 3), (&[0], -1)]) }]);
        assert!(matches!(res, Err(PolyError::BadTower(_))));
    }

    #[test]
    fn json_round_trip() {
        let v = names(&["u1", "u2", "x"]);
        let f = MultiPoly::from_terms(&v, vec![(vec![2, 0, 1], BigRational::new(3.into(), 2.into()))]).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"vars":["u1","u2","x"],"terms":[{"e":[2,0,1],"c":"3/2"}]}"#);
        let back: MultiPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn parses_text() {
        let v = names(&["u1", "x"]);
        let f = MultiPoly::parse(&v, "x^2 - 3/2*u1^3*x + 1 - x^2").unwrap();
        assert_eq!(f.to_string(), "-3/2*u1^3*x + 1");
        assert_eq!(MultiPoly::parse(&v, "y"), Err(PolyError::UnknownVariable("y".into())));
        assert!(matches!(MultiPoly::parse(&v, "x +"), Err(PolyError::Parse(_))));
        assert!(matches!(MultiPoly::parse(&v, ""), Err(PolyError::Parse(_))));
    }

    fn arb_poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
        proptest::collection::vec((proptest::collection::vec(0..=max_deg, nvars), -9i64..=9), 0..7)
    }

    fn build(vars: &[String], raw: &[(Vec<u32>, i64)]) -> MultiPoly {
        MultiPoly::from_terms(vars, raw.iter().map(|(e, c)| (e.clone(), q(*c)))).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn display_parses_back(rf in arb_poly(3, 4), den in 1i64..5) {
            let v = names(&["u1", "u2", "x"]);
            let f = build(&v, &rf).scale(&BigRational::new(1.into(), den.into()));
            prop_assert_eq!(MultiPoly::parse(&v, &f.to_string()).unwrap(), f);
        }

        #[test]
        fn euclid_reconstructs(rf in arb_poly(2, 5), rg in arb_poly(2, 3), lead in 1u32..4) {
            let v = names(&["u", "x"]);
            let f = build(&v, &rf);
            let mut g = build(&v, &rg);
            g = euclid_divide(&g, &MultiPoly::monomial(&v, vec![0, lead], BigRational::one()), 1).unwrap().1;
            g = g.add(&MultiPoly::monomial(&v, vec![0, lead], BigRational::one()));
            let (qq, r) = euclid_divide(&f, &g, 1).unwrap();
            prop_assert_eq!(qq.mul(&g).add(&r), f);
            prop_assert!(r.degree_in(1).is_none_or(|d| d < lead));
        }

        #[test]
        fn q_adic_reconstructs(rf in arb_poly(2, 6), rq in arb_poly(2, 2), lead in 1u32..3) {
            let v = names(&["u", "x"]);
            let f = build(&v, &rf);
            let top = MultiPoly::monomial(&v, vec![0, lead], BigRational::one());
            let qq = euclid_divide(&build(&v, &rq), &top, 1).unwrap().1.add(&top);
            let digits = q_adic_expansion(&f, &qq, 1).unwrap();
            let mut acc = MultiPoly::zero(&v);
            for d in digits.iter().rev() {
                prop_assert!(d.degree_in(1).is_none_or(|k| k < lead));
                acc = acc.mul(&qq).add(d);
            }
            prop_assert_eq!(acc, f);
            prop_assert_eq!(q_adic_expansion(&qq, &qq, 1).unwrap(), vec![MultiPoly::zero(&v), MultiPoly::one(&v)]);
        }

        #[test]
        fn monomial_map_round_trip(rf in arb_poly(3, 4), j in 0usize..3) {
            let v = names(&["a", "b", "c"]);
            let f = build(&v, &rf);
            // Blow-up of all three variables with vertex j: forward N, inverse M.
            let mut n = IntMatrix::identity(3);
            let mut m = IntMatrix::identity(3);
            for col in 0..3 {
                if col != j {
                    n.set(j, col, 1);
                    m.set(j, col, -1);
                }
            }
            prop_assert!(m.mul(&n).unwrap().is_identity());
            let there = apply_monomial_map(&f, &LaurentMonomialMap::new(n)).unwrap();
            let back = apply_monomial_map(&there, &LaurentMonomialMap::new(m)).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn tower_inverse_is_inverse(c in proptest::collection::vec(-6i64..=6, 4)) {
            let s = names(&["s", "t"]);
            let tower = FieldTower::new(vec![
                Extension { sym: "s".into(), minpoly: poly(&s, &[(&[2, 0], 1), (&[0, 0], -2)]) },
                Extension { sym: "t".into(), minpoly: poly(&s, &[(&[0, 2], 1), (&[0, 0], -3)]) },
            ]).unwrap();
            let a = poly(&s, &[(&[0, 0], c[0]), (&[1, 0], c[1]), (&[0, 1], c[2]), (&[1, 1], c[3])]);
            prop_assume!(!a.is_zero());
            let inv = tower.inverse(&a).unwrap();
            prop_assert!(tower.is_one(&tower.mul(&a, &inv)));
        }
    }
}
