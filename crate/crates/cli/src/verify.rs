//! Independent re-checking of traces.
//!
//! Step `0` is the header; steps are numbered from `1`; step `n + 1` is the
//! final state of a trace with `n` steps.

use serde::Deserialize;
use serde_json::Value as Json;
use valmono_core::framing::{FramedSequence, FramedStep};
use valmono_core::polyalg::IntMatrix;

use crate::run::run_problem;
use crate::trace::{digest, Trace, SCHEMA_VERSION};
use crate::{EXIT_MISMATCH, EXIT_SCHEMA};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("trace does not parse: {0}")]
    Parse(String),
    #[error("trace mismatch at step {step}: {reason}")]
    Mismatch { step: usize, reason: String },
}

impl VerifyError {
    pub fn exit_code(&self) -> i32 {
        match self {
            VerifyError::Parse(_) => EXIT_SCHEMA,
            VerifyError::Mismatch { .. } => EXIT_MISMATCH,
        }
    }
}

fn mismatch(step: usize, reason: impl Into<String>) -> VerifyError {
    VerifyError::Mismatch { step, reason: reason.into() }
}

fn tau_of(record: &Option<Json>) -> Option<Vec<u64>> {
    record.as_ref()?.get("tau")?.as_array()?.iter().map(Json::as_u64).collect()
}

/// Determinants, inverses, slot counts and τ descent of the recorded steps.
fn check_steps(trace: &Trace) -> Result<(), VerifyError> {
    let mut prev: Option<(&str, FramedStep, Option<Vec<u64>>)> = None;
    for (i, entry) in trace.steps.iter().enumerate() {
        let k = i + 1;
        if entry.index != k {
            return Err(mismatch(k, "step index out of order"));
        }
        let step = FramedStep::deserialize(&entry.framed).map_err(|e| mismatch(k, format!("unreadable step: {e}")))?;
        let n = step.slots();
        if step.forward.size() != n || step.inverse.size() != n {
            return Err(mismatch(k, "matrix size differs from slot count"));
        }
        if step.forward.determinant() != 1.into() {
            return Err(mismatch(k, "determinant is not 1"));
        }
        let product = step.forward.mul(&step.inverse).map_err(|e| mismatch(k, e.to_string()))?;
        if !product.is_identity() {
            return Err(mismatch(k, "forward·inverse is not the identity"));
        }
        if !step.centre.contains(&step.vertex) {
            return Err(mismatch(k, "vertex outside the centre"));
        }
        let tau = tau_of(&entry.record);
        if let Some((phase, last, last_tau)) = &prev {
            if *phase == entry.phase {
                if last.n_after != step.n_before {
                    return Err(mismatch(k, "slot count does not continue the previous step"));
                }
                if let (Some(a), Some(b)) = (last_tau, &tau) {
                    if a.len() == b.len() && b >= a {
                        return Err(mismatch(k, "τ does not strictly decrease"));
                    }
                }
            }
        }
        prev = Some((entry.phase.as_str(), step, tau));
    }
    Ok(())
}

/// Recorded composite matrices agree with the recorded steps.
fn check_witnesses(trace: &Trace) -> Result<(), VerifyError> {
    let end = trace.steps.len() + 1;
    let Some(phases) = trace.witnesses.get("phases").and_then(Json::as_array) else {
        return Ok(());
    };
    for w in phases {
        let phase = w.get("phase").and_then(Json::as_str).unwrap_or_default();
        let slots = w.get("slots").and_then(Json::as_u64).unwrap_or(0) as usize;
        let mut seq = FramedSequence::new(slots, None);
        for entry in trace.steps.iter().filter(|e| e.phase == phase) {
            let step = FramedStep::deserialize(&entry.framed).map_err(|e| mismatch(entry.index, e.to_string()))?;
            seq.steps.push(step);
        }
        let read = |key: &str| {
            w.get(key)
                .and_then(|m| IntMatrix::deserialize(m).ok())
                .ok_or_else(|| mismatch(end, format!("missing {key} matrix for {phase}")))
        };
        let forward = seq.forward_matrix().map_err(|e| mismatch(end, e.to_string()))?;
        let inverse = seq.inverse_matrix().map_err(|e| mismatch(end, e.to_string()))?;
        if read("forward")? != forward || read("inverse")? != inverse {
            return Err(mismatch(end, format!("composite matrices of {phase} differ from the steps")));
        }
        if forward.determinant() != 1.into() {
            return Err(mismatch(end, "composite determinant is not 1"));
        }
    }
    Ok(())
}

/// Replays a trace and checks every recorded witness.
pub fn verify_trace(json: &Json) -> Result<(), VerifyError> {
    let trace = Trace::deserialize(json).map_err(|e| VerifyError::Parse(e.to_string()))?;
    if trace.schema != SCHEMA_VERSION {
        return Err(VerifyError::Parse(format!("unsupported schema {}", trace.schema)));
    }
    if digest(&trace.problem) != trace.input_digest {
        return Err(mismatch(0, "input digest differs from the problem"));
    }
    check_steps(&trace)?;
    check_witnesses(&trace)?;
    let fresh = run_problem(&trace.problem, &trace.options);
    if fresh.command != trace.command {
        return Err(mismatch(0, "command differs"));
    }
    for (i, (a, b)) in trace.steps.iter().zip(&fresh.steps).enumerate() {
        if a != b {
            return Err(mismatch(i + 1, "replayed step differs"));
        }
    }
    let end = trace.steps.len().min(fresh.steps.len()) + 1;
    if trace.steps.len() != fresh.steps.len() {
        return Err(mismatch(end, format!("{} steps recorded, {} replayed", trace.steps.len(), fresh.steps.len())));
    }
    if trace.verdict != fresh.verdict {
        return Err(mismatch(end, "verdict differs"));
    }
    if trace.witnesses != fresh.witnesses {
        return Err(mismatch(end, "witnesses differ"));
    }
    if trace.final_state != fresh.final_state {
        return Err(mismatch(end, "final state differs"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::RunOptions;
    use serde_json::json;

    fn pair_trace() -> Json {
        let p = json!({"algorithm": "pair", "weights": [["1", "0"], ["0", "1"]], "alpha": [3, 0], "gamma": [0, 2]});
        serde_json::to_value(run_problem(&p, &RunOptions::default())).unwrap()
    }

    #[test]
    fn fresh_trace_verifies() {
        assert_eq!(verify_trace(&pair_trace()), Ok(()));
    }

    #[test]
    fn tampered_problem_is_step_zero() {
        let mut t = pair_trace();
        t["problem"]["alpha"][0] = json!(4);
        assert!(matches!(verify_trace(&t), Err(VerifyError::Mismatch { step: 0, .. })));
    }

    #[test]
    fn tampered_record_names_its_step() {
        let mut t = pair_trace();
        let last = t["steps"].as_array().unwrap().len() - 1;
        let alpha = &mut t["steps"][last]["record"]["alpha"][0];
        *alpha = json!(alpha.as_u64().unwrap() + 1);
        assert!(matches!(verify_trace(&t), Err(VerifyError::Mismatch { step, .. }) if step == last + 1));
    }

    #[test]
    fn tampered_matrix_fails_structurally() {
        let mut t = pair_trace();
        t["steps"][0]["framed"]["N"][0][1] = json!(7);
        let err = verify_trace(&t).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_MISMATCH);
        assert!(err.to_string().starts_with("trace mismatch at step 1"));
    }

    #[test]
    fn version_is_advisory() {
        let mut t = pair_trace();
        t["version"] = json!("9.9.9");
        assert_eq!(verify_trace(&t), Ok(()));
    }

    #[test]
    fn garbage_is_a_parse_error() {
        assert_eq!(verify_trace(&json!({"schema": 1})).unwrap_err().exit_code(), EXIT_SCHEMA);
    }
}
