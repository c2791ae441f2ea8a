//! Shared domain types.
//!
//! Every type here is immutable once constructed. Constructors validate their
//! invariants, so holding a value is proof that the invariants hold.

use std::collections::HashSet;

use nalgebra::{DMatrix, DMatrixView};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples in a measurement window.
pub const MIN_SAMPLES: usize = 4;
/// Minimum number of machines in a measurement window.
pub const MIN_MACHINES: usize = 2;
/// Maximum tolerated deviation of a sampling interval from `1 / sample_rate`,
/// relative to that interval.
pub const MAX_RELATIVE_JITTER: f64 = 1e-6;

/// Per-channel means removed by detrending.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMeans {
    pub angle: Vec<f64>,
    pub speed: Vec<f64>,
}

/// Row-oriented raw measurements, as they come out of a file or a sensor feed.
#[derive(Debug, Clone, Default)]
pub struct RawSamples {
    pub timestamps: Vec<f64>,
    pub labels: Vec<String>,
    /// One row per sample, one entry per machine (radians).
    pub angles: Vec<Vec<f64>>,
    /// One row per sample, one entry per machine (rad/s).
    pub speeds: Vec<Vec<f64>>,
    /// Optional measured rate of change of frequency (rad/s²).
    pub rocof: Option<Vec<Vec<f64>>>,
}

/// Angle and speed deviations of `r` machines sampled at `m` uniformly spaced
/// instants.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementWindow {
    sample_rate: f64,
    timestamps: Vec<f64>,
    labels: Vec<String>,
    angles: DMatrix<f64>,
    speeds: DMatrix<f64>,
    rocof: Option<DMatrix<f64>>,
    mean_centered: bool,
    removed_means: Option<ChannelMeans>,
}

fn rows_to_matrix(rows: &[Vec<f64>], width: usize, what: &str) -> Result<DMatrix<f64>> {
    for (k, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::ShapeMismatch(format!(
                "{what} row {k} has {} entries, expected {width}",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

/// Builds a [`MeasurementWindow`] from row-oriented samples, checking every
/// window invariant.
pub fn validate_window(raw: RawSamples, sample_rate: f64) -> Result<MeasurementWindow> {
    let width = raw.labels.len();
    let angles = rows_to_matrix(&raw.angles, width, "angle")?;
    let speeds = rows_to_matrix(&raw.speeds, width, "speed")?;
    let rocof = raw
        .rocof
        .as_deref()
        .map(|rows| rows_to_matrix(rows, width, "rocof"))
        .transpose()?;
    MeasurementWindow::new(raw.timestamps, raw.labels, angles, speeds, rocof, sample_rate)
}

fn is_centered(m: &DMatrix<f64>) -> bool {
    let rows = m.nrows() as f64;
    m.column_iter().all(|c| {
        let scale = c.amax().max(f64::MIN_POSITIVE);
        (c.sum() / rows).abs() <= 1e-9 * scale + 1e-14
    })
}

impl MeasurementWindow {
    pub fn new(
        timestamps: Vec<f64>,
        labels: Vec<String>,
        angles: DMatrix<f64>,
        speeds: DMatrix<f64>,
        rocof: Option<DMatrix<f64>>,
        sample_rate: f64,
    ) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        let m = timestamps.len();
        if m < MIN_SAMPLES {
            return Err(Error::TooShort {
                len: m,
                min: MIN_SAMPLES,
            });
        }
        if angles.ncols() != speeds.ncols() {
            return Err(Error::ShapeMismatch(format!(
                "{} angle columns vs {} speed columns",
                angles.ncols(),
                speeds.ncols()
            )));
        }
        let r = labels.len();
        if r < MIN_MACHINES {
            return Err(Error::ShapeMismatch(format!(
                "need at least {MIN_MACHINES} machines, got {r}"
            )));
        }
        for (name, mat) in [
            ("angle", Some(&angles)),
            ("speed", Some(&speeds)),
            ("rocof", rocof.as_ref()),
        ] {
            if let Some(mat) = mat {
                if mat.shape() != (m, r) {
                    return Err(Error::ShapeMismatch(format!(
                        "{name} matrix is {}x{}, expected {m}x{r}",
                        mat.nrows(),
                        mat.ncols()
                    )));
                }
                if mat.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument(format!("non-finite {name} sample")));
                }
            }
        }
        let mut seen = HashSet::with_capacity(r);
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let period = 1.0 / sample_rate;
        for (k, pair) in timestamps.windows(2).enumerate() {
            let jitter = ((pair[1] - pair[0]) - period).abs() / period;
            if !jitter.is_finite() || jitter > MAX_RELATIVE_JITTER {
                return Err(Error::NonUniformSampling { index: k + 1, jitter });
            }
        }
        let mean_centered = is_centered(&angles) && is_centered(&speeds);
        Ok(Self {
            sample_rate,
            timestamps,
            labels,
            angles,
            speeds,
            rocof,
            mean_centered,
            removed_means: None,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of samples `m`.
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Number of machines `r`.
    pub fn machines(&self) -> usize {
        self.labels.len()
    }

    pub fn angles(&self) -> &DMatrix<f64> {
        &self.angles
    }

    pub fn speeds(&self) -> &DMatrix<f64> {
        &self.speeds
    }

    pub fn rocof(&self) -> Option<&DMatrix<f64>> {
        self.rocof.as_ref()
    }

    /// Whether every angle and speed channel had zero mean at construction.
    pub fn is_mean_centered(&self) -> bool {
        self.mean_centered
    }

    /// Means subtracted by [`crate::signal_prep::detrend`], if it was applied.
    pub fn removed_means(&self) -> Option<&ChannelMeans> {
        self.removed_means.as_ref()
    }

    /// The state matrix `[Δδ | Δω]`, `m × 2r`.
    pub fn state_matrix(&self) -> DMatrix<f64> {
        let (m, r) = self.angles.shape();
        let mut x = DMatrix::zeros(m, 2 * r);
        x.columns_mut(0, r).copy_from(&self.angles);
        x.columns_mut(r, r).copy_from(&self.speeds);
        x
    }

    /// Channel `c` of the state matrix: angles first, then speeds.
    pub fn channel(&self, c: usize) -> DMatrixView<'_, f64> {
        let r = self.machines();
        if c < r {
            self.angles.columns(c, 1)
        } else {
            self.speeds.columns(c - r, 1)
        }
    }

    /// Human-readable name of state channel `c`.
    pub fn channel_name(&self, c: usize) -> String {
        let r = self.machines();
        if c < r {
            format!("{}:angle", self.labels[c])
        } else {
            format!("{}:speed", self.labels[c - r])
        }
    }

    pub(crate) fn with_samples(
        &self,
        timestamps: Vec<f64>,
        angles: DMatrix<f64>,
        speeds: DMatrix<f64>,
        rocof: Option<DMatrix<f64>>,
        removed_means: Option<ChannelMeans>,
    ) -> Self {
        let mean_centered = is_centered(&angles) && is_centered(&speeds);
        Self {
            sample_rate: self.sample_rate,
            timestamps,
            labels: self.labels.clone(),
            angles,
            speeds,
            rocof,
            mean_centered,
            removed_means,
        }
    }

    /// Reorders machines; `order[k]` is the source index of new machine `k`.
    pub fn permute_machines(&self, order: &[usize]) -> Result<Self> {
        let r = self.machines();
        let mut check: Vec<usize> = order.to_vec();
        check.sort_unstable();
        if check != (0..r).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("not a permutation of machine indices".into()));
        }
        let pick = |m: &DMatrix<f64>| DMatrix::from_fn(m.nrows(), r, |i, j| m[(i, order[j])]);
        Ok(Self {
            sample_rate: self.sample_rate,
            timestamps: self.timestamps.clone(),
            labels: order.iter().map(|&k| self.labels[k].clone()).collect(),
            angles: pick(&self.angles),
            speeds: pick(&self.speeds),
            rocof: self.rocof.as_ref().map(pick),
            mean_centered: self.mean_centered,
            removed_means: self.removed_means.as_ref().map(|means| ChannelMeans {
                angle: order.iter().map(|&k| means.angle[k]).collect(),
                speed: order.iter().map(|&k| means.speed[k]).collect(),
            }),
        })
    }

    /// Multiplies every angle, speed and rocof sample by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.angles *= factor;
        out.speeds *= factor;
        if let Some(rocof) = out.rocof.as_mut() {
            *rocof *= factor;
        }
        out
    }
}

/// Estimated time derivatives `[Δδ̇ | Δω̇]`, one row per retained sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeMatrix {
    values: DMatrix<f64>,
}

impl DerivativeMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if !values.ncols().is_multiple_of(2) || values.ncols() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "derivative matrix needs 2r columns, got {}",
                values.ncols()
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn machines(&self) -> usize {
        self.values.ncols() / 2
    }
}

/// Sorted, deduplicated candidate oscillation frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyCandidateSet {
    frequencies: Vec<f64>,
    bin_width: f64,
}

impl FrequencyCandidateSet {
    pub fn new(frequencies: Vec<f64>, bin_width: f64, sample_rate: f64) -> Result<Self> {
        if !(bin_width > 0.0) {
            return Err(Error::InvalidArgument("bin width must be positive".into()));
        }
        let nyquist = sample_rate / 2.0;
        if let Some(&f) = frequencies.iter().find(|&&f| !(f > 0.0 && f < nyquist)) {
            return Err(Error::InvalidArgument(format!(
                "candidate frequency {f} Hz outside (0, {nyquist})"
            )));
        }
        for pair in frequencies.windows(2) {
            if pair[1] - pair[0] <= bin_width / 2.0 {
                return Err(Error::InvalidArgument(format!(
                    "candidates {} and {} Hz are not sorted or not separated by half a bin",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { frequencies, bin_width })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Tag describing one column of the feature library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureTag {
    Bias,
    AngleState(usize),
    SpeedState(usize),
    SinWave(f64),
    CosWave(f64),
}

/// The regression matrix `Θ(X)`: bias, states, then a sin/cos pair per
/// candidate frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLibrary {
    matrix: DMatrix<f64>,
    descriptors: Vec<FeatureTag>,
    machines: usize,
}

impl FeatureLibrary {
    pub(crate) fn from_parts(matrix: DMatrix<f64>, descriptors: Vec<FeatureTag>, machines: usize) -> Self {
        debug_assert_eq!(matrix.ncols(), descriptors.len());
        Self {
            matrix,
            descriptors,
            machines,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn descriptors(&self) -> &[FeatureTag] {
        &self.descriptors
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    /// Number of candidate frequencies `n`.
    pub fn frequencies(&self) -> usize {
        (self.descriptors.len() - 1 - 2 * self.machines) / 2
    }

    pub fn width(&self) -> usize {
        self.descriptors.len()
    }
}

/// Sparse model coefficients, stored feature-major (`(1+2r+2n) × 2r`) so that
/// `Ẋ ≈ Θ·Ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    matrix: DMatrix<f64>,
    machines: usize,
    frequencies: Vec<f64>,
}

impl CoefficientMatrix {
    pub fn new(matrix: DMatrix<f64>, machines: usize, frequencies: Vec<f64>) -> Result<Self> {
        let rows = 1 + 2 * machines + 2 * frequencies.len();
        if matrix.shape() != (rows, 2 * machines) {
            return Err(Error::ShapeMismatch(format!(
                "coefficient matrix is {}x{}, expected {rows}x{}",
                matrix.nrows(),
                matrix.ncols(),
                2 * machines
            )));
        }
        Ok(Self {
            matrix,
            machines,
            frequencies,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// Row of constant offsets (the noise/bias block).
    pub fn bias_block(&self) -> DMatrixView<'_, f64> {
        self.matrix.rows(0, 1)
    }

    /// State rows: the identity/Jacobian/damping blocks, `2r × 2r`.
    pub fn jacobian_block(&self) -> DMatrixView<'_, f64> {
        self.matrix.rows(1, 2 * self.machines)
    }

    /// Trigonometric rows, `2n × 2r`; row `2i` holds `a_i·` and row `2i+1`
    /// holds `b_i·`.
    pub fn forcing_block(&self) -> DMatrixView<'_, f64> {
        self.matrix.rows(1 + 2 * self.machines, 2 * self.frequencies.len())
    }

    /// Sine coefficient `a_ij` of frequency `i` in the speed equation of machine `j`.
    pub fn sin_coefficient(&self, i: usize, j: usize) -> f64 {
        self.matrix[(1 + 2 * self.machines + 2 * i, self.machines + j)]
    }

    /// Cosine coefficient `b_ij` of frequency `i` in the speed equation of machine `j`.
    pub fn cos_coefficient(&self, i: usize, j: usize) -> f64 {
        self.matrix[(2 + 2 * self.machines + 2 * i, self.machines + j)]
    }

    /// State-major view (`2r × (1+2r+2n)`), one row per state equation.
    pub fn state_major(&self) -> DMatrix<f64> {
        self.matrix.transpose()
    }

    /// Number of nonzero entries.
    pub fn cardinality(&self) -> usize {
        self.matrix.iter().filter(|v| **v != 0.0).count()
    }
}

/// Squared forcing magnitudes `ζ_ij = a_ij² + b_ij²`, one row per candidate
/// frequency and one column per machine.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaIndex {
    values: DMatrix<f64>,
    frequencies: Vec<f64>,
    labels: Vec<String>,
}

impl ZetaIndex {
    pub fn new(values: DMatrix<f64>, frequencies: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if values.shape() != (frequencies.len(), labels.len()) {
            return Err(Error::ShapeMismatch(format!(
                "zeta is {}x{} but has {} frequency and {} machine labels",
                values.nrows(),
                values.ncols(),
                frequencies.len(),
                labels.len()
            )));
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument("zeta entries must be non-negative".into()));
        }
        Ok(Self {
            values,
            frequencies,
            labels,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries in row-major order: index `i * r + j` holds `ζ_ij`.
    pub fn flattened(&self) -> Vec<f64> {
        let (n, r) = self.values.shape();
        (0..n)
            .flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| self.values[(i, j)])
            .collect()
    }
}

/// One flagged (machine, frequency) source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub machine: String,
    pub frequency_hz: f64,
    pub zeta: f64,
    pub rank: usize,
}

/// Summary of a sparse-regression run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegressionDiagnostics {
    /// Threshold-and-refit passes executed.
    pub iterations: usize,
    /// Nonzero count of the initial least-squares estimate.
    pub initial_cardinality: usize,
    /// Support size after each pass.
    pub support_history: Vec<usize>,
    /// Frobenius norm of `Θ·Ξ − Ẋ`.
    pub residual_fro: f64,
    /// `‖Θ·Ξ − Ẋ‖² + λ²‖Ξ‖₀`.
    pub objective: f64,
    /// Objective value after each pass.
    pub objective_history: Vec<f64>,
    /// True when the loop stopped on a repeated support rather than the cap.
    pub converged: bool,
    /// Nonzero entries below λ in magnitude, as `(feature row, target column)`.
    pub sub_threshold_survivors: Vec<(usize, usize)>,
}

/// Outcome of the localization pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "source located")]
    SourceLocated,
    #[serde(rename = "no source located")]
    NoSourceLocated,
    #[serde(rename = "no candidates")]
    NoCandidates,
    #[serde(rename = "unlocatable")]
    Unlocatable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::SourceLocated => "source located",
            Verdict::NoSourceLocated => "no source located",
            Verdict::NoCandidates => "no candidates",
            Verdict::Unlocatable => "unlocatable",
        }
    }
}

/// Result of [`crate::locator::locate`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocationReport {
    pub detections: Vec<Detection>,
    pub candidates: FrequencyCandidateSet,
    pub zeta: ZetaIndex,
    pub coefficients: CoefficientMatrix,
    pub diagnostics: RegressionDiagnostics,
    pub elapsed_s: f64,
}

impl LocationReport {
    pub fn verdict(&self) -> Verdict {
        if self.detections.is_empty() {
            Verdict::NoSourceLocated
        } else {
            Verdict::SourceLocated
        }
    }
}
