//! Table formats and their readers. Every file starts with a header of
//! `key=value` pairs: `# key=value` lines in CSV, a `header` object in JSON.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

/// Building statistics input, one region per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingRow {
    pub region: String,
    pub avg_perimeter_m: f64,
    pub avg_area_m2: f64,
    pub coverage_fraction: f64,
    pub lognormal_mu: f64,
    pub lognormal_sigma: f64,
    pub floor_height_m: f64,
    pub bs_height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockageRow {
    pub region: String,
    pub beta: f64,
    pub eta: f64,
    pub r_los_2d_m: f64,
    pub r_los_3d_m: f64,
}

/// SE in nats/s/Hz. Monte Carlo columns are empty for analytic-only rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeRow {
    pub lambda_hat: f64,
    pub tier: String,
    pub direction: String,
    pub se_mean: Option<f64>,
    pub se_ci: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub asymptotic: f64,
    pub interference_free_fraction: Option<f64>,
    pub usable_replications: Option<usize>,
    pub replications_run: Option<usize>,
}

/// Rates in nats/s, with bits/s copies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRow {
    pub lambda_hat_m: f64,
    pub region: String,
    pub beta_m: f64,
    pub beta_mu: f64,
    pub r_d: f64,
    pub r_u: f64,
    pub r_d_decoupled: f64,
    pub gain: f64,
    pub r_d_bps: f64,
    pub r_u_bps: f64,
    pub r_d_decoupled_bps: f64,
    pub beta_m_decoupled: f64,
    pub beta_mu_decoupled: f64,
    pub a1_holds: bool,
}

/// A header plus rows: the unit every command emits.
#[derive(Debug, Clone, PartialEq)]
pub struct Document<R> {
    pub header: Vec<(String, String)>,
    pub rows: Vec<R>,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument<R> {
    header: serde_json::Map<String, serde_json::Value>,
    rows: Vec<R>,
}

fn io_err(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{what}: {e}"))
}

/// Render a document into bytes.
pub fn render<R: Serialize>(doc: &Document<R>, format: Format) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            for (k, v) in &doc.header {
                writeln!(out, "# {k}={v}").map_err(|e| io_err("write", e))?;
            }
            let mut w = csv::Writer::from_writer(&mut out);
            for row in &doc.rows {
                w.serialize(row).map_err(|e| io_err("csv encode", e))?;
            }
            w.flush().map_err(|e| io_err("write", e))?;
            drop(w);
        }
        Format::Json => {
            let json = JsonDocument {
                header: doc
                    .header
                    .iter()
                    .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                    .collect(),
                rows: doc.rows.iter().collect(),
            };
            serde_json::to_writer_pretty(&mut out, &json).map_err(|e| io_err("json encode", e))?;
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// Parse a document written by [`render`]. The format is detected from
/// the first non-blank character.
pub fn parse<R: DeserializeOwned>(text: &str) -> Result<Document<R>, CliError> {
    if text.trim_start().starts_with('{') {
        let json: JsonDocument<R> = serde_json::from_str(text).map_err(|e| io_err("json decode", e))?;
        let header = json
            .header
            .into_iter()
            .map(|(k, v)| match v {
                serde_json::Value::String(s) => Ok((k, s)),
                other => Err(io_err("json header", format!("`{k}` is not a string: {other}"))),
            })
            .collect::<Result<_, _>>()?;
        return Ok(Document { header, rows: json.rows });
    }
    let mut header = Vec::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let (k, v) = rest
            .trim_start()
            .split_once('=')
            .ok_or_else(|| io_err("csv header", format!("malformed line `{line}`")))?;
        header.push((k.to_string(), v.to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<Result<Vec<R>, _>>()
        .map_err(|e| io_err("csv decode", e))?;
    Ok(Document { header, rows })
}

/// Read any emitted file back.
pub fn read_document<R: DeserializeOwned>(path: &Path) -> Result<Document<R>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(&format!("cannot read {}", path.display()), e))?;
    parse(&text)
}

/// Read a building statistics CSV. Lines starting with `#` are ignored.
pub fn read_buildings(path: &Path) -> Result<Vec<BuildingRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(&format!("cannot read {}", path.display()), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<Result<Vec<BuildingRow>, _>>()
        .map_err(|e| io_err(&format!("{}", path.display()), e))?;
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no building rows", path.display())));
    }
    Ok(rows)
}
