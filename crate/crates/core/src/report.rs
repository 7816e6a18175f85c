//! Machine-readable reports: a JSON object per run, JSON-lines for row
//! streams, and CSV for counts. Rendering is deterministic; the timestamp is
//! the only varying field and can be omitted.

use std::time::{SystemTime, UNIX_EPOCH};

use num::rational::BigRational;
use serde_json::{json, Map, Value};

use crate::admissible::AdmissibleTuple;
use crate::arith::{ratio_string, ratio_to_f64};
use crate::error::{Error, Result};
use crate::scanner::{APScan, APWitness, HitScan, PatternHit, RoughScan, SubsetScan};
use crate::sums::{S1pRecord, SumReport};
use crate::variational::VariationalResult;

/// Output encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidParams(format!(
                "unknown format {other:?}; expected json, jsonl, or csv"
            ))),
        }
    }
}

/// A complete report: header metadata plus zero or more rows.
#[derive(Debug, Clone)]
pub struct Report {
    pub meta: Map<String, Value>,
    /// Row objects; all share the column set.
    pub rows: Vec<Value>,
    /// Column order for CSV output.
    pub columns: Vec<&'static str>,
}

impl Report {
    pub fn new(command: &str, config_text: &str, with_timestamp: bool) -> Report {
        let mut meta = Map::new();
        meta.insert("command".to_string(), json!(command));
        meta.insert("config".to_string(), json!(config_text));
        if with_timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            meta.insert("timestamp".to_string(), json!(secs));
        }
        Report {
            meta,
            rows: Vec::new(),
            columns: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    /// Render in the requested format, ending with a newline.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut all = self.meta.clone();
                if !self.rows.is_empty() || !self.columns.is_empty() {
                    all.insert("rows".to_string(), Value::Array(self.rows.clone()));
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(all)).unwrap();
                s.push('\n');
                s
            }
            Format::Jsonl => {
                let mut s = serde_json::to_string(&Value::Object(self.meta.clone())).unwrap();
                s.push('\n');
                for row in &self.rows {
                    s.push_str(&serde_json::to_string(row).unwrap());
                    s.push('\n');
                }
                s
            }
            Format::Csv => {
                let mut s = self.columns.join(",");
                s.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = self
                        .columns
                        .iter()
                        .map(|c| csv_cell(row.get(*c).unwrap_or(&Value::Null)))
                        .collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.replace(',', ";"),
        Value::Array(items) => items
            .iter()
            .map(csv_cell)
            .collect::<Vec<_>>()
            .join(";"),
        Value::Object(_) => "<object>".to_string(),
    }
}

fn fraction(q: &BigRational) -> Value {
    json!({
        "fraction": ratio_string(q),
        "decimal": ratio_to_f64(q),
    })
}

/// Admissibility verdict for one tuple.
pub fn tuple_value(tuple: &AdmissibleTuple) -> Value {
    let verdict = tuple.verdict();
    json!({
        "offsets": tuple.offsets(),
        "k": tuple.k(),
        "diameter": tuple.diameter(),
        "admissible": verdict.admissible,
        "witness_prime": verdict.witness_prime,
    })
}

/// Optimizer outcome with exact and float views of the bound.
pub fn variational_value(r: &VariationalResult) -> Value {
    let coeffs: Vec<String> = r.coefficients.iter().map(ratio_string).collect();
    json!({
        "k": r.k,
        "theta": ratio_string(&r.theta),
        "basis": r.basis_labels,
        "coefficients": coeffs,
        "M_lower": fraction(&r.m_lower),
        "float_estimate": r.float_estimate,
        "r_k": r.r_k,
    })
}

/// Window sums next to their predicted main terms.
pub fn sums_value(r: &SumReport) -> Value {
    json!({
        "lo": r.lo,
        "hi": r.hi,
        "r_k": r.r_k,
        "s1": r.sums.s1,
        "s1_minus": r.sums.s1_minus,
        "s1_plus": r.sums.s1_plus,
        "s2": r.sums.s2,
        "s2_plus": r.sums.s2_plus,
        "s1_star": r.sums.s1_star,
        "steps": r.sums.steps,
        "predicted_s1": r.predicted_s1,
        "predicted_s2": r.predicted_s2,
        "ratio_s2_s1": r.ratio_s2_s1,
        "predicted_ratio": r.predicted_ratio,
        "prediction_convention": r.prediction_convention,
    })
}

pub const S1P_COLUMNS: [&str; 7] = ["p", "coord", "S1p", "S1", "bound", "ratio", "in_lemma2_range"];

pub fn s1p_row(r: &S1pRecord) -> Value {
    json!({
        "p": r.p,
        "coord": r.coord,
        "S1p": r.value,
        "S1": r.s1,
        "bound": r.bound,
        "ratio": r.ratio,
        "in_lemma2_range": r.in_lemma2_range,
    })
}

/// Exact twisted-form identity check for one prime.
pub fn tp_value(p: u64, lhs: &BigRational, rhs: &BigRational) -> Value {
    json!({
        "p": p,
        "lhs": ratio_string(lhs),
        "rhs": ratio_string(rhs),
        "equal": lhs == rhs,
    })
}

pub fn rough_value(r: &RoughScan) -> Value {
    json!({
        "x": r.x,
        "k": r.k,
        "scanned": r.scanned,
        "count": r.count,
        "normalized_density": r.normalized_density,
        "samples": r.samples,
    })
}

pub const HIT_COLUMNS: [&str; 4] = ["n", "all_prime", "consecutive", "rough"];

pub fn hits_meta(scan: &HitScan) -> Value {
    json!({
        "offsets": scan.offsets,
        "lo": scan.lo,
        "hi": scan.hi,
        "require_consecutive": scan.require_consecutive,
        "exclusion": scan.exclusion,
        "hit_count": scan.hits.len(),
    })
}

pub fn hit_row(h: &PatternHit) -> Value {
    json!({
        "n": h.n,
        "all_prime": h.all_prime,
        "consecutive": h.consecutive,
        "rough": h.rough,
    })
}

pub const AP_COLUMNS: [&str; 4] = ["start", "diff", "len", "members"];

pub fn aps_meta(scan: &APScan) -> Value {
    json!({
        "offsets": scan.offsets,
        "ell": scan.ell,
        "x": scan.x,
        "require_consecutive": scan.require_consecutive,
        "hit_count": scan.hit_count,
        "total": scan.total,
        "listed": scan.witnesses.len(),
    })
}

pub fn ap_row(w: &APWitness) -> Value {
    json!({
        "start": w.start,
        "diff": w.diff,
        "len": w.len,
        "members": w.members,
    })
}

pub const SUBSET_COLUMNS: [&str; 4] = ["subset", "start", "diff", "members"];

pub fn subsets_meta(scan: &SubsetScan) -> Value {
    json!({
        "base": scan.base,
        "m": scan.m,
        "ell": scan.ell,
        "x": scan.x,
        "total_subsets": scan.total_subsets,
        "witnessed": scan.witnessed,
        "listed": scan.records.len(),
    })
}

pub fn subset_row(subset: &[u64], w: &APWitness) -> Value {
    json!({
        "subset": subset,
        "start": w.start,
        "diff": w.diff,
        "members": w.members,
    })
}
