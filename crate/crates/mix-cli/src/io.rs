//! Input parsing: spec files with strict schema checks, CSV matrices, and
//! small comma-separated lists from flags.

use clap::ValueEnum;
use mixkit::criteria::NormOrder;
use mixkit::distributions::DistributionSpec;
use mixkit::error::Error;
use mixkit::numeric::{parse_decimal, Rational};
use mixkit::rearrange::{MatrixInstance, ObjectiveKind};
use mixkit::riskbounds::Side;

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliObjective {
    Minimax,
    Range,
    Variance,
}

impl From<CliObjective> for ObjectiveKind {
    fn from(o: CliObjective) -> Self {
        match o {
            CliObjective::Minimax => ObjectiveKind::Minimax,
            CliObjective::Range => ObjectiveKind::Range,
            CliObjective::Variance => ObjectiveKind::Variance,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CliSide {
    Worst,
    Best,
    Both,
}

impl From<CliSide> for Side {
    fn from(s: CliSide) -> Self {
        match s {
            CliSide::Worst => Side::Worst,
            CliSide::Best => Side::Best,
            CliSide::Both => Side::Both,
        }
    }
}

/// Scans JSON text for duplicate keys inside any single object. Runs before
/// the real parser, which would otherwise keep the last duplicate silently.
pub fn check_duplicate_keys(text: &str) -> Result<(), Error> {
    enum Ctx {
        Obj(std::collections::HashSet<String>),
        Arr,
    }
    let bytes = text.as_bytes();
    let mut stack: Vec<Ctx> = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        match bytes[i] {
            b'{' => {
                stack.push(Ctx::Obj(Default::default()));
                i += 1;
            }
            b'[' => {
                stack.push(Ctx::Arr);
                i += 1;
            }
            b'}' | b']' => {
                stack.pop();
                i += 1;
            }
            b'"' => {
                let start = i + 1;
                let mut j = start;
                while j < bytes.len() {
                    match bytes[j] {
                        b'\\' => j += 2,
                        b'"' => break,
                        _ => j += 1,
                    }
                }
                if j >= bytes.len() {
                    break; // unterminated string: leave it to the parser
                }
                let s = &text[start..j];
                let mut k = j + 1;
                while k < bytes.len() && bytes[k].is_ascii_whitespace() {
                    k += 1;
                }
                let is_key = k < bytes.len() && bytes[k] == b':';
                if is_key {
                    if let Some(Ctx::Obj(keys)) = stack.last_mut() {
                        if !keys.insert(s.to_string()) {
                            return Err(Error::Schema(format!("duplicate key \"{s}\"")));
                        }
                    }
                }
                i = j + 1;
            }
            _ => i += 1,
        }
    }
    Ok(())
}

fn allowed_fields(kind: &str) -> Option<&'static [&'static str]> {
    match kind {
        "discrete" => Some(&["type", "points", "weights"]),
        "uniform" => Some(&["type", "a", "b"]),
        "monotone" => Some(&["type", "a", "b", "mean", "direction"]),
        "concave" => Some(&["type", "a", "b", "symmetric_unimodal"]),
        "floor" => Some(&["type", "a", "b", "density_floor", "symmetric_unimodal"]),
        "normal" => Some(&["type", "mu", "sigma"]),
        "elliptical" => Some(&["type", "mu", "sigma", "generator"]),
        "quantile_table" => Some(&["type", "q", "x", "symmetric_unimodal"]),
        _ => None,
    }
}

fn check_fields(obj: &serde_json::Map<String, serde_json::Value>, idx: usize) -> Result<(), Error> {
    let kind = obj
        .get("type")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Schema(format!("marginal {idx}: missing \"type\"")))?;
    let allowed = allowed_fields(kind)
        .ok_or_else(|| Error::Schema(format!("marginal {idx}: unknown type \"{kind}\"")))?;
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Schema(format!(
                "marginal {idx}: field \"{key}\" not allowed for type \"{kind}\""
            )));
        }
    }
    Ok(())
}

/// Parses and validates a spec file: either a JSON array of marginal
/// objects or a single object.
pub fn parse_spec_text(text: &str) -> Result<Vec<DistributionSpec>, Error> {
    check_duplicate_keys(text)?;
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    let items: Vec<serde_json::Value> = match value {
        serde_json::Value::Array(items) => items,
        obj @ serde_json::Value::Object(_) => vec![obj],
        other => {
            return Err(Error::Schema(format!(
                "expected an array of marginal objects, got {other}"
            )))
        }
    };
    if items.is_empty() {
        return Err(Error::Schema("spec file lists no marginals".into()));
    }
    let mut specs = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| Error::Schema(format!("marginal {idx}: expected an object")))?;
        check_fields(obj, idx)?;
        let spec: DistributionSpec = serde_json::from_value(item.clone())
            .map_err(|e| Error::Schema(format!("marginal {idx}: {e}")))?;
        spec.validate()
            .map_err(|e| Error::Schema(format!("marginal {idx}: {e}")))?;
        specs.push(spec);
    }
    Ok(specs)
}

pub fn parse_spec_file(path: &str) -> Result<(Vec<DistributionSpec>, Vec<u8>), Error> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Schema(format!("cannot read {path}: {e}")))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Schema(format!("{path} is not valid UTF-8")))?;
    let specs = parse_spec_text(&text)?;
    Ok((specs, bytes))
}

/// Loads a CSV matrix: data rows with a fixed number of columns, optional
/// header (detected by non-numeric cells in the first row).
pub fn parse_matrix_text(text: &str) -> Result<Vec<Vec<Rational>>, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Schema(format!("csv: {e}")))?;
        let parsed: Result<Vec<Rational>, Error> =
            record.iter().map(parse_decimal).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(e) => {
                if r == 0 {
                    continue; // header row
                }
                return Err(Error::Schema(format!("csv row {}: {e}", r + 1)));
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Schema("csv matrix has no data rows".into()));
    }
    Ok(rows)
}

pub fn parse_matrix_file(path: &str) -> Result<(Vec<Vec<Rational>>, Vec<u8>), Error> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Schema(format!("cannot read {path}: {e}")))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::Schema(format!("{path} is not valid UTF-8")))?;
    let rows = parse_matrix_text(&text)?;
    Ok((rows, bytes))
}

pub fn to_f64_instance(rows: &[Vec<Rational>]) -> Result<MatrixInstance<f64>, Error> {
    let rows_f64: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(mixkit::numeric::rat_to_f64).collect())
        .collect();
    MatrixInstance::from_rows(rows_f64)
}

pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>, Error> {
    text.split(',')
        .map(|s| parse_decimal(s.trim()))
        .collect()
}

pub fn parse_norm_list(text: &str) -> Result<Vec<NormOrder>, Error> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            if s.eq_ignore_ascii_case("inf") || s == "∞" {
                Ok(NormOrder::inf())
            } else {
                let p: f64 = s
                    .parse()
                    .map_err(|_| Error::BadNumber(s.to_string()))?;
                NormOrder::p(p)
            }
        })
        .collect()
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadNumber(s.to_string()))
        })
        .collect()
}
