//! Regression inputs: detrending and derivative estimation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{ChannelMeans, DerivativeMatrix, MeasurementWindow};

fn remove_column_means(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let mut out = m.clone();
    let mut means = Vec::with_capacity(m.ncols());
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        means.push(mean);
    }
    (out, means)
}

/// Subtracts each channel's sample mean, recording the removed means.
pub fn detrend(window: &MeasurementWindow) -> MeasurementWindow {
    let (angles, angle_means) = remove_column_means(window.angles());
    let (speeds, speed_means) = remove_column_means(window.speeds());
    window.with_samples(
        window.timestamps().to_vec(),
        angles,
        speeds,
        window.rocof().cloned(),
        Some(ChannelMeans {
            angle: angle_means,
            speed: speed_means,
        }),
    )
}

fn forward_difference(m: &DMatrix<f64>, rate: f64) -> DMatrix<f64> {
    let rows = m.nrows() - 1;
    DMatrix::from_fn(rows, m.ncols(), |k, c| (m[(k + 1, c)] - m[(k, c)]) * rate)
}

/// Drops the final sample so that the window lines up with a forward difference.
fn drop_last_sample(window: &MeasurementWindow) -> MeasurementWindow {
    let rows = window.len() - 1;
    window.with_samples(
        window.timestamps()[..rows].to_vec(),
        window.angles().rows(0, rows).into_owned(),
        window.speeds().rows(0, rows).into_owned(),
        window.rocof().map(|r| r.rows(0, rows).into_owned()),
        window.removed_means().cloned(),
    )
}

/// Two-point forward differences of every angle and speed channel.
///
/// Returns the window without its final sample together with the `(m−1) × 2r`
/// derivative matrix, so both have matching rows.
pub fn estimate_derivatives(window: &MeasurementWindow) -> (MeasurementWindow, DerivativeMatrix) {
    let rate = window.sample_rate();
    let x = window.state_matrix();
    let dx = forward_difference(&x, rate);
    let derivatives = DerivativeMatrix::new(dx).expect("state matrix has 2r columns");
    (drop_last_sample(window), derivatives)
}

/// Builds the derivative matrix from measured rate of change of frequency.
///
/// The angle derivatives are the measured speeds; the speed derivatives are
/// the supplied `rocof` columns (rad/s²). Rows are truncated to `m − 1` to
/// match [`estimate_derivatives`].
pub fn ingest_rocof(window: &MeasurementWindow, rocof: &DMatrix<f64>) -> Result<DerivativeMatrix> {
    let (m, r) = (window.len(), window.machines());
    if rocof.shape() != (m, r) {
        return Err(Error::ShapeMismatch(format!(
            "rocof is {}x{}, expected {m}x{r}",
            rocof.nrows(),
            rocof.ncols()
        )));
    }
    let rows = m - 1;
    let mut dx = DMatrix::zeros(rows, 2 * r);
    dx.columns_mut(0, r).copy_from(&window.speeds().rows(0, rows));
    dx.columns_mut(r, r).copy_from(&rocof.rows(0, rows));
    DerivativeMatrix::new(dx)
}

/// Centered moving average of every channel; the averaging span shrinks at the
/// window edges. Widths below 2 return the window unchanged.
pub fn smooth(window: &MeasurementWindow, width: usize) -> MeasurementWindow {
    if width < 2 {
        return window.clone();
    }
    let average = |m: &DMatrix<f64>| {
        let rows = m.nrows();
        let before = (width - 1) / 2;
        let after = width - 1 - before;
        DMatrix::from_fn(rows, m.ncols(), |k, c| {
            let lo = k.saturating_sub(before);
            let hi = (k + after).min(rows - 1);
            m.view((lo, c), (hi - lo + 1, 1)).mean()
        })
    };
    window.with_samples(
        window.timestamps().to_vec(),
        average(window.angles()),
        average(window.speeds()),
        window.rocof().map(average),
        window.removed_means().cloned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn window_from(rate: f64, m: usize, angle: impl Fn(f64) -> f64, speed: impl Fn(f64) -> f64) -> MeasurementWindow {
        let t: Vec<f64> = (0..m).map(|k| k as f64 / rate).collect();
        let angles = DMatrix::from_fn(m, 2, |k, j| angle(t[k]) * (j + 1) as f64);
        let speeds = DMatrix::from_fn(m, 2, |k, j| speed(t[k]) * (j + 1) as f64);
        MeasurementWindow::new(t, vec!["a".into(), "b".into()], angles, speeds, None, rate).unwrap()
    }

    #[test]
    fn constant_channel_detrends_to_zero() {
        let w = detrend(&window_from(30.0, 50, |_| 0.7, |_| -2.0));
        assert!(w.angles().amax() < 1e-15 && w.speeds().amax() < 1e-15);
        let means = w.removed_means().unwrap();
        assert!((means.angle[0] - 0.7).abs() < 1e-15);
        assert!((means.speed[1] + 4.0).abs() < 1e-15);
        assert!(w.is_mean_centered());
    }

    #[test]
    fn zero_mean_channel_unchanged() {
        // full periods of a sine have zero mean
        let w0 = window_from(30.0, 60, |t| (TAU * 0.5 * t).sin(), |t| (TAU * t).cos());
        let w = detrend(&w0);
        assert!((w.angles() - w0.angles()).amax() < 1e-15);
        assert!((w.speeds() - w0.speeds()).amax() < 1e-15);
    }

    #[test]
    fn ramp_detrend_matches_direct_mean() {
        let (a, b) = (0.3, 1.5);
        let w = detrend(&window_from(10.0, 41, |t| a * t + b, |t| t));
        let t: Vec<f64> = (0..41).map(|k| k as f64 / 10.0).collect();
        let mean = t.iter().map(|t| a * t + b).sum::<f64>() / 41.0;
        for (k, tk) in t.iter().enumerate() {
            assert!((w.angles()[(k, 0)] - (a * tk + b - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_channel_has_exact_derivative() {
        let (trimmed, d) = estimate_derivatives(&window_from(30.0, 100, |t| 3.0 * t, |_| 1.0));
        assert_eq!(trimmed.len(), 99);
        assert_eq!(d.rows(), 99);
        assert_eq!(d.values().ncols(), 4);
        for k in 0..99 {
            assert!((d.values()[(k, 0)] - 3.0).abs() < 1e-9);
            assert!((d.values()[(k, 1)] - 6.0).abs() < 1e-9);
            assert_eq!(d.values()[(k, 2)], 0.0);
        }
    }

    #[test]
    fn sine_derivative_within_truncation_bound() {
        let (f, fs) = (0.5, 30.0);
        let (_, d) = estimate_derivatives(&window_from(fs, 1200, |t| (TAU * f * t).sin(), |_| 0.0));
        let bound = 2.0 * PI * PI * f * f / fs;
        for k in 0..1199 {
            let t = k as f64 / fs;
            let exact = TAU * f * (TAU * f * t + PI * f / fs).cos();
            assert!((d.values()[(k, 0)] - exact).abs() <= bound, "k={k}");
        }
    }

    #[test]
    fn rocof_path_matches_finite_differences() {
        let fs = 30.0;
        let m = 200;
        let t: Vec<f64> = (0..m).map(|k| k as f64 / fs).collect();
        let speeds = DMatrix::from_fn(m, 2, |k, j| (TAU * 0.4 * t[k] + j as f64).sin());
        // angles integrate speeds with the same forward rule
        let mut angles = DMatrix::zeros(m, 2);
        for k in 1..m {
            for j in 0..2 {
                angles[(k, j)] = angles[(k - 1, j)] + speeds[(k - 1, j)] / fs;
            }
        }
        let w = MeasurementWindow::new(t, vec!["a".into(), "b".into()], angles, speeds.clone(), None, fs).unwrap();
        let (_, fd) = estimate_derivatives(&w);
        let mut rocof = DMatrix::zeros(m, 2);
        for k in 0..m - 1 {
            for j in 0..2 {
                rocof[(k, j)] = (speeds[(k + 1, j)] - speeds[(k, j)]) * fs;
            }
        }
        let measured = ingest_rocof(&w, &rocof).unwrap();
        assert!((measured.values() - fd.values()).amax() < 1e-12);
    }

    #[test]
    fn zero_rocof_gives_zero_speed_block() {
        let w = window_from(30.0, 20, |t| t, |t| t * t);
        let d = ingest_rocof(&w, &DMatrix::zeros(20, 2)).unwrap();
        assert_eq!(d.values().columns(2, 2).amax(), 0.0);
        assert!(matches!(
            ingest_rocof(&w, &DMatrix::zeros(20, 3)),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn smoothing_preserves_linear_interior() {
        let w = window_from(30.0, 30, |t| 2.0 * t, |_| 1.0);
        let s = smooth(&w, 3);
        for k in 1..29 {
            assert!((s.angles()[(k, 0)] - w.angles()[(k, 0)]).abs() < 1e-12);
        }
        assert_eq!(smooth(&w, 1), w);
    }
}
