//! CSV and JSON report writers. Files are written to a temporary name and
//! renamed into place.

use std::fs;
use std::io;
use std::path::Path;

use grounded_core::evaluation::{Estimate, Framing, NegativityMatrix, SensitivityReport};
use serde::Serialize;

use crate::experiments::{CellOutcome, CodecRow};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn ci(e: &Estimate) -> String {
    opt(e.ci_half_width)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub const CONSISTENCY_HEADER: &[&str] = &[
    "N",
    "p",
    "epsilon",
    "variant",
    "agent",
    "runs",
    "distance",
    "distance_ci",
    "polarity_pct",
    "polarity_ci",
    "zero_pct",
    "filtered_polarity_pct",
    "invalid_pct",
    "updates",
    "valid",
    "bypassed",
    "invalid",
    "status",
];

pub fn consistency_csv(cells: &[CellOutcome]) -> io::Result<Vec<u8>> {
    let rows = cells.iter().map(|c| {
        let mut row = vec![
            c.n.to_string(),
            c.p.to_string(),
            c.epsilon.to_string(),
            c.variant.clone(),
            c.agent.as_str().to_string(),
        ];
        match &c.aggregate {
            Ok(a) => row.extend([
                a.runs.to_string(),
                num(a.distance.mean),
                ci(&a.distance),
                num(a.polarity_pct.mean),
                ci(&a.polarity_pct),
                num(a.zero_pct.mean),
                opt(a.filtered_polarity_pct.map(|e| e.mean)),
                num(a.invalid_pct.mean),
                a.updates.to_string(),
                a.valid.to_string(),
                a.bypassed.to_string(),
                a.invalid.to_string(),
                "ok".to_string(),
            ]),
            Err(e) => {
                row.push(c.runs.len().to_string());
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.push(format!("failed: {e}"));
            }
        }
        row
    });
    csv_bytes(CONSISTENCY_HEADER, rows)
}

pub fn sensitivity_csv(reports: &[(String, String, SensitivityReport)]) -> io::Result<Vec<u8>> {
    let header = [
        "N",
        "p",
        "epsilon",
        "agent",
        "base_variant",
        "variant",
        "base_distance",
        "variant_distance",
        "distance_sensitivity",
        "base_polarity_pct",
        "variant_polarity_pct",
        "polarity_sensitivity",
    ];
    let rows = reports.iter().map(|(base, variant, s)| {
        vec![
            s.key.n.to_string(),
            s.key.p.to_string(),
            s.key.epsilon.to_string(),
            s.key.agent.clone(),
            base.clone(),
            variant.clone(),
            num(s.base_distance),
            num(s.variant_distance),
            num(s.distance),
            num(s.base_polarity_pct),
            num(s.variant_polarity_pct),
            num(s.polarity_pct),
        ]
    });
    csv_bytes(&header, rows)
}

pub fn codec_csv(rows: &[CodecRow]) -> io::Result<Vec<u8>> {
    let header = ["scheme", "x", "mean_decoded", "valid", "invalid", "slope", "intercept"];
    let rows = rows.iter().map(|r| {
        vec![
            r.scheme.as_str().to_string(),
            r.x.to_string(),
            opt(r.mean_decoded),
            r.valid.to_string(),
            r.invalid.to_string(),
            opt(r.slope),
            opt(r.intercept),
        ]
    });
    csv_bytes(&header, rows)
}

/// One row per reader stance; per author stance a mean, CI half-width and
/// trial count. Unmeasured pairings are left blank.
pub fn negativity_csv(m: &NegativityMatrix) -> io::Result<Vec<u8>> {
    let mut header = vec!["reader".to_string()];
    for a in Framing::ALL {
        for suffix in ["mean", "ci", "trials"] {
            header.push(format!("{}_{suffix}", a.as_str()));
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = Framing::ALL.into_iter().enumerate().map(|(r, reader)| {
        let mut row = vec![reader.as_str().to_string()];
        for (a, author) in Framing::ALL.into_iter().enumerate() {
            if Framing::pair_measured(reader, author) {
                let cell = m.cells[r][a];
                row.push(opt(cell.map(|e| e.mean)));
                row.push(opt(cell.and_then(|e| e.ci_half_width)));
                row.push(m.trials[r][a].to_string());
            } else {
                row.extend([String::new(), String::new(), String::new()]);
            }
        }
        row
    });
    csv_bytes(&header, rows)
}
