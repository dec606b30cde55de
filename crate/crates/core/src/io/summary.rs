use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{finalize_design, StratifiedDesign, StratumRecord};

/// Required summary columns, in order.
pub const SUMMARY_COLUMNS: [&str; 8] = [
    "stratum_id",
    "N",
    "n",
    "mean_x",
    "mean_y",
    "sd_x",
    "sd_y",
    "rho",
];
/// Optional trailing columns, accepted as any prefix of this list.
pub const OPTIONAL_SUMMARY_COLUMNS: [&str; 4] = ["cx", "cy", "beta2x", "f_override"];

fn all_columns() -> impl Iterator<Item = &'static str> {
    SUMMARY_COLUMNS.into_iter().chain(OPTIONAL_SUMMARY_COLUMNS)
}

pub(crate) fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
}

pub(crate) fn malformed(
    line: u64,
    column: Option<&'static str>,
    message: impl Into<String>,
) -> Error {
    Error::MalformedRow {
        line,
        column,
        message: message.into(),
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    malformed(line, None, e.to_string())
}

pub(crate) fn parse_f64(raw: &str, line: u64, column: &'static str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| malformed(line, Some(column), format!("`{raw}` is not a number")))
}

fn parse_count(raw: &str, line: u64, column: &'static str) -> Result<u64> {
    raw.parse::<u64>().map_err(|_| {
        malformed(
            line,
            Some(column),
            format!("`{raw}` is not a non-negative integer"),
        )
    })
}

fn parse_optional(raw: &str, line: u64, column: &'static str) -> Result<Option<f64>> {
    if raw.is_empty() {
        Ok(None)
    } else {
        parse_f64(raw, line, column).map(Some)
    }
}

/// Column most responsible for a record-level invariant failure.
fn column_of(error: &Error) -> Option<&'static str> {
    match error {
        Error::NonPositiveCount { field: "N_h", .. } | Error::StratumTooSmall { .. } => Some("N"),
        Error::NonPositiveCount { .. } | Error::SampleExceedsStratum { .. } => Some("n"),
        Error::CorrelationOutOfRange { .. } => Some("rho"),
        Error::InvalidDispersion { field, .. } | Error::NonFiniteInput { field, .. } => Some(field),
        Error::InvalidFpcOverride { .. } => Some("f_override"),
        Error::DuplicateStratum(_) => Some("stratum_id"),
        _ => None,
    }
}

/// Parses a summary-statistics CSV into a finalized design.
///
/// Rows become strata in file order. A non-empty `f_override` cell replaces
/// the computed f_h for that stratum.
pub fn parse_summary_csv(text: &str) -> Result<StratifiedDesign> {
    let mut rows = reader(text).into_records();
    let header = match rows.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::MalformedHeader("empty input".into())),
    };
    let header_line = header.position().map(|p| p.line()).unwrap_or(1);
    let width = header.len();
    let expected: Vec<&str> = all_columns().take(width).collect();
    if !(SUMMARY_COLUMNS.len()..=SUMMARY_COLUMNS.len() + OPTIONAL_SUMMARY_COLUMNS.len())
        .contains(&width)
        || header.iter().ne(expected.iter().copied())
    {
        return Err(Error::MalformedHeader(format!(
            "expected `{}` optionally followed by `{}`, got `{}`",
            SUMMARY_COLUMNS.join(","),
            OPTIONAL_SUMMARY_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = header_line;
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        last_line = line;
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != width {
            return Err(malformed(
                line,
                None,
                format!("expected {width} fields, found {}", row.len()),
            ));
        }
        let optional = |i: usize| -> Result<Option<f64>> {
            match row.get(SUMMARY_COLUMNS.len() + i) {
                Some(raw) => parse_optional(raw, line, OPTIONAL_SUMMARY_COLUMNS[i]),
                None => Ok(None),
            }
        };
        let id = row[0].to_string();
        if id.is_empty() {
            return Err(malformed(line, Some("stratum_id"), "empty stratum id"));
        }
        let record = StratumRecord {
            population: parse_count(&row[1], line, "N")?,
            sample: parse_count(&row[2], line, "n")?,
            mean_x: parse_f64(&row[3], line, "mean_x")?,
            mean_y: parse_f64(&row[4], line, "mean_y")?,
            sd_x: parse_f64(&row[5], line, "sd_x")?,
            sd_y: parse_f64(&row[6], line, "sd_y")?,
            rho: parse_f64(&row[7], line, "rho")?,
            cov_xy: None,
            cx: optional(0)?,
            cy: optional(1)?,
            beta2x: optional(2)?,
            fpc_override: optional(3)?,
            id,
        };
        let violation = |source: Error| Error::InvariantViolation {
            line,
            column: column_of(&source),
            source: Box::new(source),
        };
        record.check().map_err(violation)?;
        if !seen.insert(record.id.clone()) {
            return Err(violation(Error::DuplicateStratum(record.id)));
        }
        if let Some(f) = record.fpc_override {
            log::info!("stratum `{}`: f_h overridden to {f}", record.id);
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(malformed(last_line + 1, None, "no strata"));
    }
    finalize_design(records)
}

/// Writes a design as a 12-column summary CSV, LF line endings.
///
/// Floats use the shortest representation that parses back to the same value.
pub fn write_summary_csv(design: &StratifiedDesign) -> String {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    out.write_record(all_columns()).expect("in-memory write");
    for s in design.strata() {
        out.write_record([
            s.id.clone(),
            s.population.to_string(),
            s.sample.to_string(),
            s.mean_x.to_string(),
            s.mean_y.to_string(),
            s.sd_x.to_string(),
            s.sd_y.to_string(),
            s.rho.to_string(),
            opt(s.cx),
            opt(s.cy),
            opt(s.beta2x),
            opt(s.fpc_override),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(out.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
