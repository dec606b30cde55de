use std::collections::HashMap;

use super::summary::{csv_error, malformed, parse_f64, reader};
use crate::error::{Error, Result};
use crate::model::{StratumSample, SurveySample};
use crate::montecarlo::{FinitePopulation, PopulationStratum};

pub const MICRO_COLUMNS: [&str; 3] = ["stratum_id", "y", "x"];

struct Grouped {
    id: String,
    y: Vec<f64>,
    x: Vec<f64>,
}

fn group(text: &str) -> Result<Vec<Grouped>> {
    let mut rows = reader(text).into_records();
    let header = match rows.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::MalformedHeader("empty input".into())),
    };
    if header.iter().ne(MICRO_COLUMNS) {
        return Err(Error::MalformedHeader(format!(
            "expected `{}`, got `{}`",
            MICRO_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut groups: Vec<Grouped> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut last_line = 1;
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        last_line = line;
        if row.len() != 3 {
            return Err(malformed(
                line,
                None,
                format!("expected 3 fields, found {}", row.len()),
            ));
        }
        if row.iter().eq(MICRO_COLUMNS) {
            return Err(malformed(line, None, "duplicate header line"));
        }
        if row[0].is_empty() {
            return Err(malformed(line, Some("stratum_id"), "empty stratum id"));
        }
        let y = parse_f64(&row[1], line, "y")?;
        let x = parse_f64(&row[2], line, "x")?;
        let slot = *index.entry(row[0].to_string()).or_insert_with(|| {
            groups.push(Grouped {
                id: row[0].to_string(),
                y: Vec::new(),
                x: Vec::new(),
            });
            groups.len() - 1
        });
        groups[slot].y.push(y);
        groups[slot].x.push(x);
    }
    if groups.is_empty() {
        return Err(malformed(last_line + 1, None, "no strata"));
    }
    if let Some(g) = groups.iter().find(|g| g.y.len() < 2) {
        return Err(Error::SingletonStratum {
            stratum: g.id.clone(),
        });
    }
    Ok(groups)
}

/// Parses `stratum_id,y,x` microdata into a sample.
///
/// Strata keep the order in which their ids first appear.
pub fn parse_micro_csv(text: &str) -> Result<SurveySample> {
    let strata = group(text)?
        .into_iter()
        .map(|g| StratumSample::new(g.id, g.y, g.x))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurveySample::new(strata))
}

/// Parses `stratum_id,y,x` microdata holding every unit of the population.
pub fn parse_population_csv(text: &str) -> Result<FinitePopulation> {
    FinitePopulation::new(
        group(text)?
            .into_iter()
            .map(|g| PopulationStratum {
                id: g.id,
                y: g.y,
                x: g.x,
            })
            .collect(),
    )
}
