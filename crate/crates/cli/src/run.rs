//! Dispatch of problems to the library and assembly of traces.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value as Json};
use valmono_core::framing::FramedSequence;
use valmono_core::game::{
    monomialize_nondegenerate, monomialize_pair, principalize_monomial_ideal, GameOptions, Independence,
    MonomialValuationSpec,
};
use valmono_core::keypoly::{
    delta_invariant, epsilon_invariant, standard_expansion, term_values, truncated_valuation, validate_chain,
};
use valmono_core::unifseq::{elementary_uniformizing_sequence, monomialize_key_polys, monomialize_polynomial};

use crate::problem::{selector, Problem};
use crate::trace::{digest, RunOptions, StepEntry, Trace, Verdict, SCHEMA_VERSION, TOOL};
use crate::{EXIT_ALGORITHM, EXIT_OK, EXIT_SCHEMA};

/// Everything a successful run records besides the header.
struct Outcome {
    steps: Vec<StepEntry>,
    witnesses: Json,
    final_state: Json,
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("library types serialize")
}

/// Drops bulky keys that are reported as steps instead.
fn strip(mut v: Json, keys: &[&str]) -> Json {
    fn walk(v: &mut Json, keys: &[&str]) {
        match v {
            Json::Object(m) => {
                for k in keys {
                    m.remove(*k);
                }
                m.values_mut().for_each(|x| walk(x, keys));
            }
            Json::Array(a) => a.iter_mut().for_each(|x| walk(x, keys)),
            _ => {}
        }
    }
    walk(&mut v, keys);
    v
}

const STEP_KEYS: [&str; 4] = ["sequence", "trace", "pre_trace", "pair_trace"];

/// Collects the steps of several phases, each with its per-step records.
#[derive(Default)]
struct Phases {
    steps: Vec<StepEntry>,
    witnesses: Vec<Json>,
}

impl Phases {
    fn add<R: Serialize>(&mut self, phase: &str, seq: &FramedSequence, records: &[R]) -> Result<(), String> {
        for (i, step) in seq.steps.iter().enumerate() {
            self.steps.push(StepEntry {
                index: self.steps.len() + 1,
                phase: phase.to_string(),
                framed: to_json(step),
                record: records.get(i).map(to_json),
            });
        }
        let forward = seq.forward_matrix().map_err(|e| e.to_string())?;
        let inverse = seq.inverse_matrix().map_err(|e| e.to_string())?;
        self.witnesses.push(json!({
            "phase": phase,
            "slots": seq.slots,
            "length": seq.len(),
            "independence": seq.independence,
            "forward": forward,
            "inverse": inverse,
        }));
        Ok(())
    }

    fn finish(self, final_state: Json) -> Outcome {
        Outcome { steps: self.steps, witnesses: json!({ "phases": self.witnesses }), final_state }
    }
}

fn game_options(opts: &RunOptions) -> GameOptions {
    GameOptions {
        budget: opts.budget,
        independence: if opts.auto_independence { Independence::Auto } else { Independence::Off },
    }
}

fn execute(problem: &Problem, opts: &RunOptions) -> Result<Outcome, String> {
    let g = game_options(opts);
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let spec = |s: &crate::problem::Weighted| {
        MonomialValuationSpec::new(s.group.clone(), s.vars.clone(), s.weights.clone()).map_err(|e| err(&e))
    };
    match problem {
        Problem::Pair { space, alpha, gamma } => {
            let out = monomialize_pair(alpha, gamma, &spec(space)?, &g).map_err(|e| err(&e))?;
            let mut ph = Phases::default();
            ph.add("pair", &out.sequence, &out.trace)?;
            let alpha_divides_gamma = out.alpha_divides_gamma();
            Ok(ph.finish(json!({
                "alpha": out.alpha,
                "gamma": out.gamma,
                "weights": out.weights,
                "divides": true,
                "alpha_divides_gamma": alpha_divides_gamma,
            })))
        }
        Problem::Principalize { space, generators } => {
            let out = principalize_monomial_ideal(generators, &spec(space)?, &g).map_err(|e| err(&e))?;
            let mut ph = Phases::default();
            ph.add("principalize", &out.sequence, &out.trace)?;
            Ok(ph.finish(strip(to_json(&out), &STEP_KEYS)))
        }
        Problem::Nondegenerate { space, f } => {
            let out = monomialize_nondegenerate(f, &spec(space)?, &g).map_err(|e| err(&e))?;
            let mut ph = Phases::default();
            ph.add("principalize", &out.principalization.sequence, &out.principalization.trace)?;
            Ok(ph.finish(strip(to_json(&out), &STEP_KEYS)))
        }
        Problem::KeypolyExpand { chain, f, level } => {
            let expansion = standard_expansion(f, chain, *level).map_err(|e| err(&e))?;
            let values = term_values(f, chain, *level).map_err(|e| err(&e))?;
            let mut valuations = Vec::new();
            let mut deltas = Vec::new();
            let mut epsilons = Vec::new();
            for i in 1..=*level {
                valuations.push(truncated_valuation(f, chain, i).map_err(|e| err(&e))?);
                deltas.push(delta_invariant(f, chain, i).map_err(|e| err(&e))?);
                epsilons.push(epsilon_invariant(f, chain, i).map_err(|e| err(&e))?);
            }
            Ok(Phases::default().finish(json!({
                "expansion": expansion,
                "term_values": values,
                "valuations": valuations,
                "delta": deltas,
                "epsilon": epsilons,
                "diagnostics": validate_chain(chain),
            })))
        }
        Problem::KeypolyMonomialize { chain } => {
            let out = monomialize_key_polys(chain, &g).map_err(|e| err(&e))?;
            let mut ph = Phases::default();
            add_uniformizing(&mut ph, &out.sequence, out.uniformizing.as_ref())?;
            Ok(ph.finish(strip(to_json(&out), &STEP_KEYS)))
        }
        Problem::Uniformize(p) => {
            let out = elementary_uniformizing_sequence(p, &g).map_err(|e| err(&e))?;
            let mut ph = Phases::default();
            add_uniformizing(&mut ph, &out.sequence, Some(&out))?;
            Ok(ph.finish(strip(to_json(&out), &STEP_KEYS)))
        }
        Problem::Polynomial { chain, f } => {
            let out = monomialize_polynomial(f, chain, &g).map_err(|e| err(&e))?;
            let mut ph = Phases::default();
            add_uniformizing(&mut ph, &out.keypoly.sequence, out.keypoly.uniformizing.as_ref())?;
            ph.add("final-frame", &out.game.sequence, &out.game.trace)?;
            Ok(ph.finish(strip(to_json(&out), &STEP_KEYS)))
        }
    }
}

fn add_uniformizing(
    ph: &mut Phases,
    seq: &FramedSequence,
    res: Option<&valmono_core::unifseq::UniformizingResult>,
) -> Result<(), String> {
    let records: Vec<Json> = match res {
        Some(r) => r.pre_trace.iter().map(to_json).chain(r.pair_trace.iter().map(to_json)).collect(),
        None => Vec::new(),
    };
    ph.add("uniformize", seq, &records)
}

/// Runs one problem object; schema and algorithm failures become verdicts.
pub fn run_problem(problem: &Json, opts: &RunOptions) -> Trace {
    let command = selector(problem).unwrap_or("unknown").to_string();
    let mut trace = Trace {
        schema: SCHEMA_VERSION,
        tool: TOOL.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        options: *opts,
        input_digest: digest(problem),
        problem: problem.clone(),
        steps: Vec::new(),
        verdict: Verdict { ok: true, code: EXIT_OK, error: None },
        witnesses: Json::Null,
        final_state: Json::Null,
    };
    let parsed = match Problem::from_json(problem) {
        Ok(p) => p,
        Err(e) => {
            trace.verdict = Verdict { ok: false, code: EXIT_SCHEMA, error: Some(e.to_string()) };
            return trace;
        }
    };
    match execute(&parsed, opts) {
        Ok(out) => {
            trace.steps = out.steps;
            trace.witnesses = out.witnesses;
            trace.final_state = out.final_state;
        }
        Err(e) => trace.verdict = Verdict { ok: false, code: EXIT_ALGORITHM, error: Some(e) },
    }
    trace
}

/// Runs a batch on `jobs` workers; output order matches input order.
pub fn run_batch(problems: &[Json], opts: &RunOptions, jobs: Option<usize>) -> Vec<Trace> {
    let work = || problems.par_iter().map(|p| run_problem(p, opts)).collect();
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(work))
            .unwrap_or_else(|_| problems.iter().map(|p| run_problem(p, opts)).collect()),
        None => work(),
    }
}

/// Worst exit code over a batch.
pub fn batch_code(traces: &[Trace]) -> i32 {
    traces.iter().map(|t| t.verdict.code).max().unwrap_or(EXIT_OK)
}
