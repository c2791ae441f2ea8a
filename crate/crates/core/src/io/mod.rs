//! File formats: PMU CSV windows, spectra CSV, JSON reports and TOML
//! scenario/config files.

mod pmu_csv;
mod report;
mod scenario;

pub use pmu_csv::{load_pmu_csv, read_pmu_csv, write_pmu_csv, write_pmu_csv_to, write_spectra, AngleUnit, SpeedUnit};
pub use report::{read_report, write_report, ReportRecord};
pub use scenario::{load_config, load_scenario, ModelSpec, Preset, Scenario};
