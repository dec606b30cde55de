//! File formats: summary and microdata CSV, embedded datasets, reports.

mod dataset;
mod micro;
mod report;
mod summary;

pub use dataset::{
    builtin_dataset, builtin_dataset_with, AVAILABLE, KADILAR_CINGI_1999,
    KADILAR_CINGI_TABULATED_FPC,
};
pub use micro::{parse_micro_csv, parse_population_csv, MICRO_COLUMNS};
pub use report::{parse_report_json, render_simulation, write_report, ReportFormat};
pub use summary::{
    parse_summary_csv, write_summary_csv, OPTIONAL_SUMMARY_COLUMNS, SUMMARY_COLUMNS,
};
