//! Trace files and their canonical digest.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "valmono";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub budget: usize,
    pub auto_independence: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { budget: valmono_core::game::DEFAULT_BUDGET, auto_independence: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One framed step with the game record that chose it, when there is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub index: usize,
    pub phase: String,
    pub framed: Json,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<Json>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub schema: u32,
    pub tool: String,
    /// Advisory only; verification ignores it.
    pub version: String,
    pub command: String,
    pub options: RunOptions,
    pub input_digest: String,
    pub problem: Json,
    pub steps: Vec<StepEntry>,
    pub verdict: Verdict,
    pub witnesses: Json,
    #[serde(rename = "final")]
    pub final_state: Json,
}

/// Same value with object keys in sorted order at every depth.
pub fn canonical(v: &Json) -> Json {
    match v {
        Json::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for k in keys {
                out.insert(k.clone(), canonical(&m[k]));
            }
            Json::Object(out)
        }
        Json::Array(a) => Json::Array(a.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

/// Hex SHA-256 of the compact canonical serialization.
pub fn digest(problem: &Json) -> String {
    let bytes = serde_json::to_vec(&canonical(problem)).expect("JSON values serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}
