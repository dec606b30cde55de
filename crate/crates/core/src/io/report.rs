use std::fmt::Write;

use crate::analysis::AnalysisReport;
use crate::montecarlo::SimulationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            other => Err(format!("unknown format `{other}` (expected json or table)")),
        }
    }
}

/// Fixed-precision rendering used by every text table.
fn num(value: f64) -> String {
    let magnitude = value.abs();
    if value == 0.0 || (1e-3..1e7).contains(&magnitude) {
        format!("{value:.6}")
    } else {
        format!("{value:.6e}")
    }
}

fn ratio(value: f64) -> String {
    if value.abs() < 1e4 {
        format!("{value:.4}")
    } else {
        format!("{value:.3e}")
    }
}

fn opt_num(value: Option<f64>) -> String {
    value.map(num).unwrap_or_else(|| "n/a".to_string())
}

pub fn write_report(report: &AnalysisReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
        ReportFormat::Table => render_table(report),
    }
}

/// Inverse of the JSON form of [`write_report`].
pub fn parse_report_json(text: &str) -> serde_json::Result<AnalysisReport> {
    serde_json::from_str(text)
}

fn render_table(report: &AnalysisReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "dataset: {}  f_h: {}",
        report.dataset, report.f_convention
    )
    .unwrap();
    writeln!(out, "{:<6} {:<10} {:>10}", "#", "estimator", "PRE").unwrap();
    for (i, e) in report.estimators.iter().enumerate() {
        let pre = e
            .pre
            .map(|p| format!("{p:.2}"))
            .unwrap_or_else(|| "n/a".to_string());
        writeln!(out, "{:<6} {:<10} {:>10}", i + 1, e.id.as_str(), pre).unwrap();
    }
    if let Some(l) = report.lambda_opt {
        writeln!(
            out,
            "lambda1_opt {}  lambda2_opt {}",
            num(l.lambda1),
            num(l.lambda2)
        )
        .unwrap();
    }
    if !report.a_opt.is_empty() {
        let a: Vec<String> = report.a_opt.iter().map(|a| opt_num(*a)).collect();
        writeln!(out, "a_opt {}", a.join(" ")).unwrap();
    }
    if let Some(b) = report.bias_tp {
        writeln!(out, "bias_tp {}", num(b)).unwrap();
    }
    out
}

/// Text table of a simulation, one row per estimator.
pub fn render_simulation(report: &SimulationReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "truth {}  reps {}  seed {}  n_h {:?}",
        num(report.truth),
        report.reps,
        report.seed,
        report.sample_sizes
    )
    .unwrap();
    if let Some(l) = report.lambda_opt {
        writeln!(
            out,
            "lambda1_opt {}  lambda2_opt {}",
            num(l.lambda1),
            num(l.lambda2)
        )
        .unwrap();
    }
    writeln!(
        out,
        "{:<6} {:>16} {:>16} {:>16} {:>10} {:>16} {:>8}",
        "est", "empirical_mse", "mc_se", "theoretical_mse", "ratio", "empirical_bias", "failed"
    )
    .unwrap();
    for e in &report.estimators {
        if let Some(reason) = &e.unavailable {
            writeln!(out, "{:<6} unavailable: {reason}", e.id.as_str()).unwrap();
            continue;
        }
        writeln!(
            out,
            "{:<6} {:>16} {:>16} {:>16} {:>10} {:>16} {:>8}{}",
            e.id.as_str(),
            opt_num(e.empirical_mse),
            opt_num(e.mc_standard_error),
            opt_num(e.theoretical_mse),
            e.ratio.map(ratio).unwrap_or_else(|| "n/a".into()),
            opt_num(e.empirical_bias),
            e.failed,
            if e.flagged { "  FLAGGED" } else { "" }
        )
        .unwrap();
    }
    out
}
