//! Localization verdicts from the ζ index, and the end-to-end pipeline.

use std::time::Instant;

use crate::config::{DerivativeSource, OutlierAxis, PipelineConfig};
use crate::error::{Error, Result};
use crate::signal_prep::{detrend, estimate_derivatives, ingest_rocof, smooth};
use crate::sindy::{build_library, extract_forcing_block, stlsq, StructuralMask};
use crate::spectrum::candidate_frequencies;
use crate::types::{Detection, LocationReport, MeasurementWindow, ZetaIndex};

/// Consistency constant turning a MAD into a normal-equivalent spread.
pub const MAD_SCALE: f64 = 1.4826;
/// Number of scaled MADs above the median that marks an outlier.
pub const MAD_MULTIPLIER: f64 = 3.0;
/// Relative spread under which an unflagged ζ block counts as uniform.
pub const UNIFORM_SPREAD: f64 = 0.1;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Cut-off above which a value is flagged: `med + 3·1.4826·MAD`, falling back
/// to the mean absolute deviation about the median when the MAD is zero.
/// `None` means nothing can be flagged.
pub fn mad_threshold(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut scratch = values.to_vec();
    let med = median(&mut scratch);
    let mut deviations: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&mut deviations);
    let spread = if mad > 0.0 {
        MAD_SCALE * mad
    } else {
        let mean_dev = deviations.iter().sum::<f64>() / deviations.len() as f64;
        MAD_SCALE * mean_dev
    };
    (spread > 0.0).then_some(med + MAD_MULTIPLIER * spread)
}

/// Indices of values strictly above [`mad_threshold`].
pub fn mad_flags(values: &[f64]) -> Vec<usize> {
    match mad_threshold(values) {
        Some(cut) => (0..values.len()).filter(|&k| values[k] > cut).collect(),
        None => Vec::new(),
    }
}

/// High outliers of the flattened ζ index as `(frequency index, machine index)`.
pub fn mad_outliers(zeta: &ZetaIndex) -> Vec<(usize, usize)> {
    mad_outliers_along(zeta, OutlierAxis::Flat)
}

pub fn mad_outliers_along(zeta: &ZetaIndex, axis: OutlierAxis) -> Vec<(usize, usize)> {
    let (n, r) = zeta.values().shape();
    match axis {
        OutlierAxis::Flat => mad_flags(&zeta.flattened())
            .into_iter()
            .map(|k| (k / r, k % r))
            .collect(),
        OutlierAxis::PerRow => (0..n)
            .flat_map(|i| {
                let row: Vec<f64> = (0..r).map(|j| zeta.get(i, j)).collect();
                mad_flags(&row).into_iter().map(move |j| (i, j))
            })
            .collect(),
    }
}

/// A ζ entry with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSource {
    pub frequency_index: usize,
    pub machine_index: usize,
    pub machine: String,
    pub frequency_hz: f64,
    pub zeta: f64,
}

fn ranked(zeta: &ZetaIndex, mut cells: Vec<(usize, usize)>) -> Vec<RankedSource> {
    cells.sort_by(|a, b| zeta.get(b.0, b.1).total_cmp(&zeta.get(a.0, a.1)).then(a.cmp(b)));
    cells
        .into_iter()
        .map(|(i, j)| RankedSource {
            frequency_index: i,
            machine_index: j,
            machine: zeta.labels()[j].clone(),
            frequency_hz: zeta.frequencies()[i],
            zeta: zeta.get(i, j),
        })
        .collect()
}

/// The `k` largest ζ entries; ties go to the lower (frequency, machine) index.
pub fn rank_sources(zeta: &ZetaIndex, k: usize) -> Vec<RankedSource> {
    let (n, r) = zeta.values().shape();
    let all = (0..n).flat_map(|i| (0..r).map(move |j| (i, j))).collect();
    let mut out = ranked(zeta, all);
    out.truncate(k);
    out
}

fn is_dense_uniform(zeta: &ZetaIndex) -> bool {
    let values = zeta.values();
    if values.is_empty() {
        return false;
    }
    let max = values.max();
    let min = values.min();
    max > 0.0 && (max - min) <= UNIFORM_SPREAD * max
}

/// Keeps the trailing `window_s` seconds of a longer window.
fn trailing_window(window: &MeasurementWindow, window_s: f64) -> MeasurementWindow {
    let keep = (window_s * window.sample_rate()).round() as usize;
    let m = window.len();
    if keep >= m || keep < crate::types::MIN_SAMPLES {
        return window.clone();
    }
    let start = m - keep;
    window.with_samples(
        window.timestamps()[start..].to_vec(),
        window.angles().rows(start, keep).into_owned(),
        window.speeds().rows(start, keep).into_owned(),
        window.rocof().map(|r| r.rows(start, keep).into_owned()),
        window.removed_means().cloned(),
    )
}

/// Runs detrending, derivative estimation, candidate extraction, sparse
/// regression and MAD flagging on one window.
pub fn locate(window: &MeasurementWindow, config: &PipelineConfig) -> Result<LocationReport> {
    config.validate()?;
    let started = Instant::now();
    let window = trailing_window(window, config.window_s);
    let prepared = smooth(&detrend(&window), config.smoothing_width);

    let (trimmed, derivatives) = match config.derivative_source {
        DerivativeSource::FiniteDifference => estimate_derivatives(&prepared),
        DerivativeSource::Rocof => {
            let rocof = prepared
                .rocof()
                .ok_or_else(|| Error::InvalidArgument("rocof derivative source needs rocof channels".into()))?;
            let d = ingest_rocof(&prepared, rocof)?;
            (estimate_derivatives(&prepared).0, d)
        }
    };

    let candidates = candidate_frequencies(&prepared, &config.candidate_params())?;
    let library = build_library(&trimmed, &candidates);
    let mask = StructuralMask::for_library(&library);
    let (coefficients, diagnostics) = stlsq(&library, &derivatives, config.lambda, &mask)?;
    let zeta = extract_forcing_block(&coefficients, window.labels())?;

    let flagged = mad_outliers_along(&zeta, config.outlier_axis);
    if flagged.is_empty() && is_dense_uniform(&zeta) {
        return Err(Error::Unlocatable);
    }
    let detections = ranked(&zeta, flagged)
        .into_iter()
        .enumerate()
        .map(|(k, s)| Detection {
            machine: s.machine,
            frequency_hz: s.frequency_hz,
            zeta: s.zeta,
            rank: k + 1,
        })
        .collect();

    Ok(LocationReport {
        detections,
        candidates,
        zeta,
        coefficients,
        diagnostics,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn zeta(rows: usize, cols: usize, values: &[f64]) -> ZetaIndex {
        ZetaIndex::new(
            DMatrix::from_row_slice(rows, cols, values),
            (0..rows).map(|i| 0.1 * (i + 1) as f64).collect(),
            (0..cols).map(|j| format!("G{}", j + 1)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_large_value_flagged() {
        // med = 1, MAD = 0 → mean deviation 19.8, cut = 1 + 3·1.4826·19.8 ≈ 89.07
        let z = zeta(1, 5, &[1.0, 1.0, 1.0, 1.0, 100.0]);
        assert_eq!(mad_outliers(&z), vec![(0, 4)]);
        let cut = mad_threshold(&[1.0, 1.0, 1.0, 1.0, 100.0]).unwrap();
        assert!((cut - (1.0 + 3.0 * 1.4826 * 19.8)).abs() < 1e-9);
    }

    #[test]
    fn identical_values_flag_nothing() {
        assert!(mad_outliers(&zeta(2, 3, &[4.0; 6])).is_empty());
    }

    #[test]
    fn two_dominant_entries() {
        let z = zeta(2, 4, &[1e-6, 2e-6, 9.0, 1.5e-6, 3e-6, 12.0, 1e-6, 2.5e-6]);
        let mut flagged = mad_outliers(&z);
        flagged.sort();
        assert_eq!(flagged, vec![(0, 2), (1, 1)]);
    }

    #[test]
    fn per_row_axis() {
        let z = zeta(2, 5, &[1.0, 1.1, 0.9, 1.0, 50.0, 2.0, 2.0, 2.1, 1.9, 2.0]);
        assert_eq!(mad_outliers_along(&z, OutlierAxis::PerRow), vec![(0, 4)]);
    }

    #[test]
    fn ranking_and_ties() {
        let z = zeta(2, 2, &[5.0, 1.0, 5.0, 7.0]);
        let top = rank_sources(&z, 3);
        let cells: Vec<_> = top.iter().map(|s| (s.frequency_index, s.machine_index)).collect();
        assert_eq!(cells, vec![(1, 1), (0, 0), (1, 0)]);
        assert_eq!(rank_sources(&z, 1)[0].machine, "G2");
    }

    #[test]
    fn dense_uniform_detection() {
        assert!(is_dense_uniform(&zeta(1, 4, &[1.0, 1.05, 0.98, 1.02])));
        assert!(!is_dense_uniform(&zeta(1, 4, &[0.0; 4])));
        assert!(!is_dense_uniform(&zeta(1, 4, &[1.0, 2.0, 1.0, 1.0])));
    }
}
