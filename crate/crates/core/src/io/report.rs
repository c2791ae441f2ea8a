use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::types::{Detection, LocationReport, RegressionDiagnostics, Verdict};

/// The on-disk form of a localization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub config_echo: PipelineConfig,
    pub candidates_hz: Vec<f64>,
    pub detections: Vec<Detection>,
    pub diagnostics: RegressionDiagnostics,
    pub verdict: Verdict,
    pub elapsed_s: f64,
}

impl ReportRecord {
    pub fn new(report: &LocationReport, config: &PipelineConfig) -> Self {
        Self {
            config_echo: config.clone(),
            candidates_hz: report.candidates.frequencies().to_vec(),
            detections: report.detections.clone(),
            diagnostics: report.diagnostics.clone(),
            verdict: report.verdict(),
            elapsed_s: report.elapsed_s,
        }
    }

    /// Record for a run that stopped with `NoCandidates` or `Unlocatable`;
    /// any other error is handed back.
    pub fn from_outcome(outcome: Result<LocationReport>, config: &PipelineConfig, elapsed_s: f64) -> Result<Self> {
        let verdict = match outcome {
            Ok(report) => return Ok(Self::new(&report, config)),
            Err(Error::NoCandidates) => Verdict::NoCandidates,
            Err(Error::Unlocatable) => Verdict::Unlocatable,
            Err(e) => return Err(e),
        };
        Ok(Self {
            config_echo: config.clone(),
            candidates_hz: Vec::new(),
            detections: Vec::new(),
            diagnostics: RegressionDiagnostics::default(),
            verdict,
            elapsed_s,
        })
    }
}

pub fn write_report(record: &ReportRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, record).map_err(|e| Error::Serialization(e.to_string()))?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportRecord> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Serialization(e.to_string()))
}
