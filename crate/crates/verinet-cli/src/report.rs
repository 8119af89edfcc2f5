//! Run reports and their rendering.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Outcome of a command. Booleans and satisfiability map onto exit codes 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub enum Answer {
    Bool(bool),
    Sat(bool),
    Value(String),
    Sequence(Vec<String>),
    /// A JSON artifact such as a model file.
    Artifact(Value),
    /// A text artifact such as an automaton dump.
    Text(String),
}

impl Answer {
    pub fn exit_code(&self) -> i32 {
        match self {
            Answer::Bool(false) | Answer::Sat(false) => 1,
            _ => 0,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Answer::Bool(b) => Value::Bool(*b),
            Answer::Sat(b) => Value::String(if *b { "sat" } else { "unsat" }.into()),
            Answer::Value(v) => Value::String(v.clone()),
            Answer::Sequence(s) => Value::Array(s.iter().cloned().map(Value::String).collect()),
            Answer::Artifact(v) => v.clone(),
            Answer::Text(t) => Value::String(t.clone()),
        }
    }

    fn human(&self) -> String {
        match self {
            Answer::Bool(b) => b.to_string(),
            Answer::Sat(b) => if *b { "SAT" } else { "UNSAT" }.into(),
            Answer::Value(v) => v.clone(),
            Answer::Sequence(s) => s.join(" "),
            Answer::Artifact(v) => v.to_string(),
            Answer::Text(t) => t.trim_end().to_string(),
        }
    }
}

/// Accumulates every input a command reads so the report can name them by digest.
#[derive(Default)]
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn add(&mut self, label: &str, bytes: &[u8]) {
        for part in [label.as_bytes(), bytes] {
            self.hasher.update((part.len() as u64).to_le_bytes());
            self.hasher.update(part);
        }
    }

    pub fn digest(self) -> String {
        format!("sha256:{:x}", self.hasher.finalize())
    }
}

#[derive(Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs_digest: String,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: String, inputs: Inputs, answer: &Answer, witness: Option<Value>, wall_time_ms: Option<f64>) -> Self {
        RunReport { command, inputs_digest: inputs.digest(), result: answer.to_json(), witness, wall_time_ms }
    }
}

/// Human-readable rendering: the answer, then the witness if one was requested.
pub fn human(answer: &Answer, witness: Option<&Value>) -> String {
    let mut out = answer.human();
    if let Some(w) = witness {
        out.push('\n');
        out.push_str(&match w {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        });
    }
    out
}
