//! Fixtures and independent reference implementations shared by the
//! integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use forced_osc::simulator::{simulate, systems, ForcingSpec, SimulationOptions};
use forced_osc::MeasurementWindow;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const SIGMA_LOAD: f64 = 0.01;

/// 40 s at 30 Hz from the ten-machine system.
pub fn ten_machine_window(seed: u64, forcings: &[ForcingSpec]) -> MeasurementWindow {
    let model = systems::ten_machine_two_area(SIGMA_LOAD);
    let options = SimulationOptions {
        seed,
        ..Default::default()
    };
    simulate(&model, forcings, &options).expect("fixture simulates")
}

/// Five percent of a machine's mechanical power.
pub fn five_percent(machine: &str) -> f64 {
    let model = systems::ten_machine_two_area(SIGMA_LOAD);
    let i = model.index_of(machine).expect("known machine");
    0.05 * model.mechanical_power()[i]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Naive O(m²) single-sided amplitude spectrum.
pub fn naive_amplitudes(x: &[f64]) -> Vec<f64> {
    let m = x.len();
    let mf = m as f64;
    (0..=m / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &v) in x.iter().enumerate() {
                // Reduce k·n mod m first so the angle stays small.
                let phase = std::f64::consts::TAU * ((k * n) % m) as f64 / mf;
                re += v * phase.cos();
                im -= v * phase.sin();
            }
            let scale = if k == 0 || (m.is_multiple_of(2) && k == m / 2) {
                1.0
            } else {
                2.0
            };
            scale * re.hypot(im) / mf
        })
        .collect()
}

/// Smoothed z-score scan written out directly: walk from the last bin down to
/// bin 1, seeding the trailing window with the top `lag` bins; a bin signals
/// when it exceeds the trailing mean by `threshold` standard deviations.
/// Returns signaled bin indices (into `amps`) in ascending order.
pub fn reference_zscore(amps: &[f64], lag: usize, threshold: f64, influence: f64) -> Vec<usize> {
    let n = amps.len();
    let top = amps[1..].iter().copied().fold(0.0, f64::max);
    let mut filtered = amps.to_vec();
    let mut out = Vec::new();
    let mut k = n - 1 - lag;
    while k >= 1 {
        let win = &filtered[k + 1..=k + lag];
        let mean = win.iter().sum::<f64>() / lag as f64;
        let var = win.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / lag as f64;
        if amps[k] - mean > threshold * var.sqrt() && amps[k] - mean > 1e-10 * top {
            out.push(k);
            filtered[k] = influence * amps[k] + (1.0 - influence) * filtered[k + 1];
        }
        k -= 1;
    }
    out.reverse();
    out
}

/// Collapses contiguous signaled bins to the bin of largest amplitude.
pub fn run_maxima(amps: &[f64], signaled: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut prev: Option<usize> = None;
    for &k in signaled {
        match (prev, out.last_mut()) {
            (Some(p), Some(best)) if k == p + 1 => {
                if amps[k] > amps[*best] {
                    *best = k;
                }
            }
            _ => out.push(k),
        }
        prev = Some(k);
    }
    out
}

/// The `med + 3·1.4826·MAD` rule evaluated by sorting, with the
/// mean-absolute-deviation fallback.
pub fn reference_mad_flags(values: &[f64]) -> Vec<usize> {
    fn med(v: &[f64]) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = s.len();
        if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        }
    }
    let m = med(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    let mut spread = 1.4826 * med(&dev);
    if spread == 0.0 {
        spread = 1.4826 * dev.iter().sum::<f64>() / dev.len() as f64;
    }
    if spread == 0.0 {
        return Vec::new();
    }
    (0..values.len()).filter(|&k| values[k] > m + 3.0 * spread).collect()
}

/// A planted sparse regression problem `dx = Θ·Ξ*`.
pub struct Planted {
    pub theta: DMatrix<f64>,
    pub truth: DMatrix<f64>,
    pub dx: DMatrix<f64>,
}

/// Random well-conditioned Θ (rows × features, entries uniform on [−1, 1]) and
/// a Ξ* of the given sparsity whose nonzeros have magnitude in [min_abs, 1].
pub fn planted(
    rng: &mut ChaCha8Rng,
    rows: usize,
    features: usize,
    targets: usize,
    sparsity: f64,
    min_abs: f64,
) -> Planted {
    let theta = DMatrix::from_fn(rows, features, |_, _| rng.random_range(-1.0..1.0));
    let total = features * targets;
    let nonzero = ((1.0 - sparsity) * total as f64).round().max(1.0) as usize;
    let mut cells: Vec<usize> = (0..total).collect();
    for k in 0..nonzero {
        let pick = rng.random_range(k..total);
        cells.swap(k, pick);
    }
    let mut truth = DMatrix::zeros(features, targets);
    for &c in &cells[..nonzero] {
        let magnitude = min_abs * (1.0 / min_abs).powf(rng.random::<f64>());
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        truth[(c % features, c / features)] = sign * magnitude;
    }
    let dx = &theta * &truth;
    Planted { theta, truth, dx }
}

pub fn support(m: &DMatrix<f64>) -> DMatrix<bool> {
    m.map(|v| v != 0.0)
}
