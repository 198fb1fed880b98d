//! JSON-lines audit log: a header with the resolved config, every update
//! outcome and every completion served, enough to replay a run with the
//! scripted mock.

use std::io::{self, BufRead, BufReader};
use std::path::Path;

use grounded_gateway::ScriptEntry;
use serde::{Deserialize, Serialize};

use crate::agents::UpdateOutcome;
use crate::config::ExperimentConfig;
use crate::reports::write_atomic;

pub const AUDIT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AuditRecord {
    Header {
        version: u32,
        command: String,
        backend: String,
        config: Box<ExperimentConfig>,
    },
    Update {
        cell: String,
        run: usize,
        seed: u64,
        #[serde(flatten)]
        outcome: UpdateOutcome,
    },
    CellFailed {
        cell: String,
        error: String,
    },
    Call(ScriptEntry),
}

pub fn write_audit(path: &Path, records: &[AuditRecord]) -> io::Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(io::Error::other)?);
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_audit(path: &Path) -> io::Result<Vec<AuditRecord>> {
    let f = std::fs::File::open(path)?;
    BufReader::new(f)
        .lines()
        .map(|l| l.and_then(|l| serde_json::from_str(&l).map_err(io::Error::other)))
        .collect()
}
