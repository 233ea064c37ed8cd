//! Problem files: one JSON object per problem, selected by `"algorithm"`.

use serde::Deserialize;
use valmono_core::keypoly::KeyPolyChain;
use valmono_core::polyalg::MultiPoly;
use valmono_core::rat;
use valmono_core::{Value, ValueGroup};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("schema error: {0}")]
pub struct SchemaError(pub String);

fn schema(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

/// `"3/2"` for the first coordinate, or one string per coordinate.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WeightInput {
    Scalar(String),
    Coords(Vec<String>),
}

impl WeightInput {
    fn coords_len(&self) -> usize {
        match self {
            WeightInput::Scalar(_) => 1,
            WeightInput::Coords(c) => c.len(),
        }
    }

    fn to_value(&self, group: &ValueGroup) -> Result<Value, SchemaError> {
        let parse = |t: &str| rat::parse(t).ok_or_else(|| schema(format!("invalid rational {t:?}")));
        let mut coords = vec![num_rational::BigRational::from_integer(0.into()); group.rank()];
        match self {
            WeightInput::Scalar(t) => coords[0] = parse(t)?,
            WeightInput::Coords(cs) => {
                if cs.len() != group.rank() {
                    return Err(schema(format!("value has {} coordinates, group rank is {}", cs.len(), group.rank())));
                }
                for (slot, t) in coords.iter_mut().zip(cs) {
                    *slot = parse(t)?;
                }
            }
        }
        Ok(Value::new(coords))
    }
}

/// Polynomial text such as `"x^2 - u^3"`, or the full `{vars, terms}` form.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PolyInput {
    Text(String),
    Full(MultiPoly),
}

impl PolyInput {
    fn to_poly(&self, vars: &[String]) -> Result<MultiPoly, SchemaError> {
        match self {
            PolyInput::Text(t) => MultiPoly::parse(vars, t).map_err(|e| schema(e.to_string())),
            PolyInput::Full(p) => p.with_vars(vars).map_err(|e| schema(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundInput {
    pub vars: Vec<String>,
    pub weights: Vec<WeightInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryInput {
    #[serde(rename = "Q")]
    pub q: PolyInput,
    pub beta: WeightInput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainInput {
    pub ground: GroundInput,
    pub x: String,
    pub entries: Vec<EntryInput>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemInput {
    Pair {
        group: Option<ValueGroup>,
        vars: Option<Vec<String>>,
        weights: Vec<WeightInput>,
        alpha: Vec<u32>,
        gamma: Vec<u32>,
    },
    Principalize {
        group: Option<ValueGroup>,
        vars: Option<Vec<String>>,
        weights: Vec<WeightInput>,
        generators: Vec<Vec<u32>>,
    },
    Nondegenerate {
        group: Option<ValueGroup>,
        vars: Vec<String>,
        weights: Vec<WeightInput>,
        f: PolyInput,
    },
    KeypolyExpand {
        group: Option<ValueGroup>,
        chain: ChainInput,
        f: PolyInput,
        level: Option<usize>,
    },
    KeypolyMonomialize {
        group: Option<ValueGroup>,
        chain: ChainInput,
    },
    Uniformize {
        group: Option<ValueGroup>,
        vars: Vec<String>,
        weights: Vec<WeightInput>,
        ground: Option<Vec<String>>,
        #[serde(default)]
        passive: Vec<String>,
        distinguished: String,
        /// Coefficients `b_0, …, b_d`; absent means a transcendental residue.
        b: Option<Vec<String>>,
        h: Option<PolyInput>,
    },
    Polynomial {
        group: Option<ValueGroup>,
        chain: ChainInput,
        f: PolyInput,
    },
}

/// Variables with their weights; positivity is checked by the algorithms.
#[derive(Debug, Clone)]
pub struct Weighted {
    pub group: ValueGroup,
    pub vars: Vec<String>,
    pub weights: Vec<Value>,
}

#[derive(Debug, Clone)]
pub enum Problem {
    Pair { space: Weighted, alpha: Vec<u32>, gamma: Vec<u32> },
    Principalize { space: Weighted, generators: Vec<Vec<u32>> },
    Nondegenerate { space: Weighted, f: MultiPoly },
    KeypolyExpand { chain: KeyPolyChain, f: MultiPoly, level: usize },
    KeypolyMonomialize { chain: KeyPolyChain },
    Uniformize(valmono_core::unifseq::UniformizingProblem),
    Polynomial { chain: KeyPolyChain, f: MultiPoly },
}

pub const SELECTORS: [&str; 7] =
    ["pair", "principalize", "nondegenerate", "keypoly-expand", "keypoly-monomialize", "uniformize", "polynomial"];

/// Selector named by a problem object, if any.
pub fn selector(problem: &serde_json::Value) -> Option<&str> {
    problem.get("algorithm").and_then(serde_json::Value::as_str)
}

fn pick_group(group: Option<ValueGroup>, weights: &[&WeightInput]) -> ValueGroup {
    group.unwrap_or_else(|| ValueGroup::sqrt_primes(weights.iter().map(|w| w.coords_len()).max().unwrap_or(1)))
}

fn default_vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("u{i}")).collect()
}

fn weighted(group: Option<ValueGroup>, vars: Option<Vec<String>>, weights: &[WeightInput]) -> Result<Weighted, SchemaError> {
    let group = pick_group(group, &weights.iter().collect::<Vec<_>>());
    let vars = vars.unwrap_or_else(|| default_vars(weights.len()));
    if vars.len() != weights.len() {
        return Err(schema(format!("{} variables but {} weights", vars.len(), weights.len())));
    }
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(schema(format!("duplicate variable {v:?}")));
        }
    }
    let weights = weights.iter().map(|w| w.to_value(&group)).collect::<Result<_, _>>()?;
    Ok(Weighted { group, vars, weights })
}

fn check_len(name: &str, v: &[u32], n: usize) -> Result<(), SchemaError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(schema(format!("{name} has {} entries for {n} variables", v.len())))
    }
}

fn chain(group: Option<ValueGroup>, c: ChainInput) -> Result<KeyPolyChain, SchemaError> {
    let all: Vec<&WeightInput> = c.ground.weights.iter().chain(c.entries.iter().map(|e| &e.beta)).collect();
    let group = pick_group(group, &all);
    let mut vars = c.ground.vars.clone();
    vars.push(c.x.clone());
    let ground_weights = c.ground.weights.iter().map(|w| w.to_value(&group)).collect::<Result<_, _>>()?;
    let entries = c
        .entries
        .iter()
        .map(|e| Ok((e.q.to_poly(&vars)?, e.beta.to_value(&group)?)))
        .collect::<Result<Vec<_>, SchemaError>>()?;
    KeyPolyChain::new(group, c.ground.vars, ground_weights, c.x, entries).map_err(|e| schema(e.to_string()))
}

fn index_of(vars: &[String], name: &str) -> Result<usize, SchemaError> {
    vars.iter().position(|v| v == name).ok_or_else(|| schema(format!("unknown variable {name:?}")))
}

impl Problem {
    pub fn from_json(value: &serde_json::Value) -> Result<Problem, SchemaError> {
        match selector(value) {
            None => return Err(schema("missing \"algorithm\" selector")),
            Some(s) if !SELECTORS.contains(&s) => return Err(schema(format!("unknown selector {s:?}"))),
            Some(_) => {}
        }
        let input = ProblemInput::deserialize(value).map_err(|e| schema(e.to_string()))?;
        Problem::from_input(input)
    }

    pub fn from_input(input: ProblemInput) -> Result<Problem, SchemaError> {
        Ok(match input {
            ProblemInput::Pair { group, vars, weights, alpha, gamma } => {
                let space = weighted(group, vars, &weights)?;
                check_len("alpha", &alpha, space.vars.len())?;
                check_len("gamma", &gamma, space.vars.len())?;
                Problem::Pair { space, alpha, gamma }
            }
            ProblemInput::Principalize { group, vars, weights, generators } => {
                let space = weighted(group, vars, &weights)?;
                for g in &generators {
                    check_len("generator", g, space.vars.len())?;
                }
                Problem::Principalize { space, generators }
            }
            ProblemInput::Nondegenerate { group, vars, weights, f } => {
                let space = weighted(group, Some(vars), &weights)?;
                let f = f.to_poly(&space.vars)?;
                Problem::Nondegenerate { space, f }
            }
            ProblemInput::KeypolyExpand { group, chain: c, f, level } => {
                let chain = chain(group, c)?;
                let f = f.to_poly(chain.vars())?;
                let level = level.unwrap_or(chain.len());
                Problem::KeypolyExpand { chain, f, level }
            }
            ProblemInput::KeypolyMonomialize { group, chain: c } => Problem::KeypolyMonomialize { chain: chain(group, c)? },
            ProblemInput::Polynomial { group, chain: c, f } => {
                let chain = chain(group, c)?;
                let f = f.to_poly(chain.vars())?;
                Problem::Polynomial { chain, f }
            }
            ProblemInput::Uniformize { group, vars, weights, ground, passive, distinguished, b, h } => {
                let space = weighted(group, Some(vars), &weights)?;
                let distinguished = index_of(&space.vars, &distinguished)?;
                let passive = passive.iter().map(|v| index_of(&space.vars, v)).collect::<Result<Vec<_>, _>>()?;
                let ground = match ground {
                    Some(g) => g.iter().map(|v| index_of(&space.vars, v)).collect::<Result<Vec<_>, _>>()?,
                    None => (0..space.vars.len()).filter(|i| *i != distinguished && !passive.contains(i)).collect(),
                };
                let residue = match b {
                    None => valmono_core::framing::ResidueGenerator::Transcendental,
                    Some(b) => valmono_core::framing::ResidueGenerator::Algebraic {
                        minpoly: b
                            .iter()
                            .map(|t| rat::parse(t).ok_or_else(|| schema(format!("invalid rational {t:?}"))))
                            .collect::<Result<_, _>>()?,
                    },
                };
                let perturbation = h.map(|h| h.to_poly(&space.vars)).transpose()?;
                Problem::Uniformize(valmono_core::unifseq::UniformizingProblem {
                    group: space.group,
                    vars: space.vars,
                    weights: space.weights,
                    ground,
                    passive,
                    distinguished,
                    residue,
                    perturbation,
                })
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_a_pair() {
        let p = Problem::from_json(&json!({
            "algorithm": "pair",
            "weights": [["1", "0"], ["0", "1"]],
            "alpha": [2, 0],
            "gamma": [0, 1]
        }))
        .unwrap();
        let Problem::Pair { space, .. } = p else { panic!("wrong variant") };
        assert_eq!(space.group, ValueGroup::sqrt_primes(2));
        assert_eq!(space.vars, vec!["u1", "u2"]);
    }

    #[test]
    fn rejects_unknown_selector_and_fields() {
        assert!(Problem::from_json(&json!({"algorithm": "factor"})).unwrap_err().0.contains("unknown selector"));
        assert!(Problem::from_json(&json!({"weights": []})).is_err());
        let extra = json!({"algorithm": "pair", "weights": ["1"], "alpha": [1], "gamma": [1], "colour": 1});
        assert!(Problem::from_json(&extra).is_err());
        let short = json!({"algorithm": "pair", "weights": ["1", "2"], "alpha": [1], "gamma": [1, 0]});
        assert!(Problem::from_json(&short).unwrap_err().0.contains("alpha"));
    }

    #[test]
    fn parses_a_cusp_uniformization() {
        let p = Problem::from_json(&json!({
            "algorithm": "uniformize",
            "vars": ["u", "x"],
            "weights": ["2", "3"],
            "distinguished": "x",
            "b": ["-1", "1"]
        }))
        .unwrap();
        let Problem::Uniformize(u) = p else { panic!("wrong variant") };
        assert_eq!((u.ground, u.distinguished), (vec![0], 1));
    }

    #[test]
    fn parses_a_chain_with_text_polynomials() {
        let p = Problem::from_json(&json!({
            "algorithm": "polynomial",
            "chain": {
                "ground": {"vars": ["u"], "weights": ["1"]},
                "x": "x",
                "entries": [{"Q": "x", "beta": "3/2"}, {"Q": "x^2 - u^3", "beta": "4"}]
            },
            "f": "x^3"
        }))
        .unwrap();
        let Problem::Polynomial { chain, f } = p else { panic!("wrong variant") };
        assert_eq!(chain.len(), 2);
        assert_eq!(f.to_string(), "x^3");
    }
}
