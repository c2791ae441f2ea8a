use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sindy::DEFAULT_LAMBDA;
use crate::spectrum::{Aggregation, CandidateParams, PeakRuns, ZScoreParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationPolicy {
    Union,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    FiniteDifference,
    Rocof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierAxis {
    /// One scan over every (frequency, machine) entry.
    Flat,
    /// A separate scan per candidate frequency.
    PerRow,
}

/// Settings for [`crate::locator::locate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub lambda: f64,
    pub zscore: ZScoreParams,
    /// Whether a run of adjacent signaled bins yields its maximum or every bin.
    pub peak_runs: PeakRuns,
    pub aggregation: AggregationPolicy,
    /// Fraction of channels that must share a peak under `intersection`.
    pub quorum: f64,
    /// Analysis window length (s); longer inputs are cut to their trailing part.
    pub window_s: f64,
    pub derivative_source: DerivativeSource,
    pub outlier_axis: OutlierAxis,
    /// Moving-average width applied before differencing; below 2 disables it.
    pub smoothing_width: usize,
    /// Simulation seed, echoed in reports.
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            zscore: ZScoreParams::default(),
            peak_runs: PeakRuns::Maximum,
            aggregation: AggregationPolicy::Union,
            quorum: 0.25,
            window_s: 40.0,
            derivative_source: DerivativeSource::FiniteDifference,
            outlier_axis: OutlierAxis::Flat,
            smoothing_width: 0,
            seed: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        self.zscore.validate()?;
        if !(self.quorum > 0.0 && self.quorum <= 1.0) {
            return Err(Error::InvalidArgument(format!("quorum {} outside (0, 1]", self.quorum)));
        }
        if !(self.window_s > 0.0) {
            return Err(Error::InvalidArgument("window length must be positive".into()));
        }
        Ok(())
    }

    pub fn candidate_params(&self) -> CandidateParams {
        CandidateParams {
            zscore: self.zscore,
            runs: self.peak_runs,
            aggregation: match self.aggregation {
                AggregationPolicy::Union => Aggregation::Union,
                AggregationPolicy::Intersection => Aggregation::Intersection { quorum: self.quorum },
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Serialization(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}
