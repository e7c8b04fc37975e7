use std::collections::BTreeMap;
use std::path::Path;

use admissible::carpenter::{CaseTag, StageCertificate};
use admissible::io::Num;
use admissible::seqkit::{Card, ExtReal};
use admissible::{Error, Scalar};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn new(path: &Path, bytes: &[u8]) -> Self {
        let file = path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
        let sha256 = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        InputDigest { file, sha256 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseSummary {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    pub m: Value,
    pub n: Value,
}

pub fn card(c: Card) -> Value {
    match c {
        Card::Finite(n) => Value::from(n),
        Card::Infinite => Value::from("inf"),
    }
}

pub fn ext<S: Scalar>(x: &ExtReal<S>) -> Value {
    match x {
        ExtReal::Finite(v) => serde_json::to_value(Num::of(v)).expect("number"),
        ExtReal::Infinite => Value::from("inf"),
    }
}

impl From<CaseTag> for CaseSummary {
    fn from(t: CaseTag) -> Self {
        CaseSummary {
            kind: t.kind.name(),
            k: t.k,
            m: card(t.m),
            n: card(t.n),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertSummary {
    pub stage: usize,
    pub consumed_through: usize,
    pub r_in: f64,
    pub r_out: f64,
    pub block_len: usize,
    pub extensions: usize,
    pub residual: f64,
    pub carry: f64,
    pub remainder_ok: bool,
}

impl From<&StageCertificate<f64>> for CertSummary {
    fn from(c: &StageCertificate<f64>) -> Self {
        CertSummary {
            stage: c.stage,
            consumed_through: c.consumed_through,
            r_in: c.r_in,
            r_out: c.r_out,
            block_len: c.block.len(),
            extensions: c.extensions,
            residual: c.residual,
            carry: c.carry,
            remainder_ok: c.remainder_ok,
        }
    }
}

/// Machine-readable outcome of one command. Field order and map order are fixed,
/// so equal runs produce equal bytes.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    pub verdicts: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        RunReport {
            command,
            inputs: Vec::new(),
            case: None,
            certificates: Vec::new(),
            max_residual: None,
            verdicts: BTreeMap::new(),
            reason: None,
            message: None,
            exit_code: 0,
        }
    }

    pub fn verdict(&mut self, name: &str, v: impl Into<Value>) {
        self.verdicts.insert(name.to_string(), v.into());
    }

    /// Records a pass/fail verdict; a failure sets exit code 1.
    pub fn check(&mut self, name: &str, ok: bool) {
        self.verdict(name, ok);
        if !ok && self.exit_code == 0 {
            self.exit_code = 1;
        }
    }

    pub fn refuse(&mut self, e: &Error) {
        self.reason = Some(e.reason().to_string());
        self.message = Some(e.to_string());
        self.exit_code = 1;
    }

    pub fn io_failure(&mut self, reason: &str, message: String) {
        self.reason = Some(reason.to_string());
        self.message = Some(message);
        self.exit_code = 2;
    }
}
