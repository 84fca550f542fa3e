//! CSV and JSON output.
//!
//! Every file starts with a `# config: <text>` line recording the
//! configuration that produced it, followed by a column header from one of
//! the fixed [`SCHEMAS`]. JSON summaries put the header line before the
//! object.

use std::io::Write;

use serde_json::json;

use crate::error::{Error, Result};
use crate::meanvalue::{CountResult, HistogramRow};
use crate::waring::WaringSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [&'static str],
}

pub const MEMBERS: Schema = Schema {
    name: "members",
    columns: &["n"],
};
pub const HISTOGRAM: Schema = Schema {
    name: "histogram",
    columns: &["key_hex", "multiplicity"],
};
pub const COUNT_SERIES: Schema = Schema {
    name: "count",
    columns: &["X", "Y", "s", "k", "count", "method", "seconds"],
};
pub const LAMBDA: Schema = Schema {
    name: "lambda",
    columns: &["B", "H", "h", "s", "k", "U_B", "U_BH", "ratio", "normalizer"],
};
pub const K_SWEEP: Schema = Schema {
    name: "k_sweep",
    columns: &["a", "b", "r", "nu", "K", "K_tilde", "delta"],
};
pub const CARRY: Schema = Schema {
    name: "carry",
    columns: &["lambda_tuple", "contribution"],
};
pub const CHAIN: Schema = Schema {
    name: "chain",
    columns: &["j", "c_j", "verified"],
};
pub const WARING: Schema = Schema {
    name: "waring",
    columns: &["n", "R"],
};
pub const ETSTAR: Schema = Schema {
    name: "etstar",
    columns: &["j", "start", "end", "max"],
};
pub const FIT: Schema = Schema {
    name: "fit",
    columns: &["s", "points", "slope", "intercept", "residual"],
};

pub const SCHEMAS: &[Schema] = &[
    MEMBERS,
    HISTOGRAM,
    COUNT_SERIES,
    LAMBDA,
    K_SWEEP,
    CARRY,
    CHAIN,
    WARING,
    ETSTAR,
    FIT,
];

pub const HEADER_PREFIX: &str = "# config: ";

/// Writes the config line, the schema header and the rows.
pub fn write_csv<W: Write>(
    mut out: W,
    config: &str,
    schema: &Schema,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    writeln!(out, "{HEADER_PREFIX}{config}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schema.columns)?;
    for row in rows {
        if row.len() != schema.columns.len() {
            return Err(Error::Invariant(format!(
                "{} row has {} fields, expected {}",
                schema.name,
                row.len(),
                schema.columns.len()
            )));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A CSV file read back and matched against a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub config: String,
    pub schema: Schema,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.schema.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Parses a file written by [`write_csv`], checking the header line, the
/// column names and the row widths.
pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let config = first
        .strip_prefix(HEADER_PREFIX)
        .ok_or_else(|| Error::Parse("missing config header line".into()))?
        .to_string();
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let schema = *SCHEMAS
        .iter()
        .find(|s| s.columns.iter().eq(header.iter()))
        .ok_or_else(|| Error::Parse(format!("unknown columns {header:?}")))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != schema.columns.len() {
            return Err(Error::Parse(format!("row width {} in {} file", rec.len(), schema.name)));
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(ParsedCsv { config, schema, rows })
}

pub fn histogram_row(row: &HistogramRow) -> Vec<String> {
    vec![row.key_hex.clone(), row.multiplicity.to_string()]
}

/// A count-series row; `seconds` is written as 0 unless timing is wanted,
/// so that repeated runs give identical files.
pub fn count_row(x: u64, result: &CountResult, timing: bool) -> Vec<String> {
    let seconds = if timing { result.elapsed.as_secs_f64() } else { 0.0 };
    vec![
        x.to_string(),
        result.y.to_string(),
        result.s.to_string(),
        result.k.to_string(),
        result.count.to_string(),
        result.method.to_string(),
        format!("{seconds:.6}"),
    ]
}

/// The Waring summary as a JSON object.
pub fn waring_json(summary: &WaringSummary) -> String {
    let sum_r2 = match u64::try_from(&summary.sum_r2) {
        Ok(v) => json!(v),
        Err(_) => json!(summary.sum_r2.to_string()),
    };
    let sum_r = match u64::try_from(summary.sum_r) {
        Ok(v) => json!(v),
        Err(_) => json!(summary.sum_r.to_string()),
    };
    json!({
        "s": summary.s,
        "k": summary.k,
        "X": summary.x,
        "Y": summary.y,
        "N": summary.n,
        "sumR": sum_r,
        "sumR2": sum_r2,
        "cauchy_lower_bound": summary.cauchy_lower_bound,
    })
    .to_string()
}

/// Writes the config line and a JSON body.
pub fn write_json<W: Write>(mut out: W, config: &str, body: &str) -> Result<()> {
    writeln!(out, "{HEADER_PREFIX}{config}")?;
    writeln!(out, "{body}")?;
    Ok(())
}
