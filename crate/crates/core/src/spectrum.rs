//! Candidate oscillation frequencies from single-sided amplitude spectra.

use std::collections::VecDeque;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FrequencyCandidateSet, MeasurementWindow, MIN_SAMPLES};

/// Single-sided amplitude spectrum of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSpectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub label: String,
    /// Number of time samples the spectrum was computed from.
    pub samples: usize,
}

impl AmplitudeSpectrum {
    pub fn bin_width(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1]
        } else {
            f64::NAN
        }
    }

    /// Time-domain energy `Σ x²` implied by the spectrum (Parseval).
    pub fn energy(&self) -> f64 {
        let m = self.samples as f64;
        let last = self.amplitudes.len() - 1;
        let nyquist_present = self.samples.is_multiple_of(2);
        let sum: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if k == 0 || (k == last && nyquist_present) {
                    a * a
                } else {
                    a * a / 2.0
                }
            })
            .sum();
        m * sum
    }
}

/// Computes the single-sided amplitude spectrum: `2|X_k|/m` for interior bins,
/// `|X_k|/m` for DC and (even `m`) Nyquist.
pub fn amplitude_spectrum(samples: &[f64], sample_rate: f64, label: &str) -> Result<AmplitudeSpectrum> {
    let m = samples.len();
    if m < MIN_SAMPLES {
        return Err(Error::TooShort {
            len: m,
            min: MIN_SAMPLES,
        });
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let bins = m / 2 + 1;
    let mf = m as f64;
    let amplitudes = (0..bins)
        .map(|k| {
            let scale = if k == 0 || (m.is_multiple_of(2) && k == m / 2) {
                1.0
            } else {
                2.0
            };
            scale * buf[k].norm() / mf
        })
        .collect();
    let frequencies = (0..bins).map(|k| k as f64 * sample_rate / mf).collect();
    Ok(AmplitudeSpectrum {
        frequencies,
        amplitudes,
        label: label.to_string(),
        samples: m,
    })
}

/// Smoothed z-score peak detector settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZScoreParams {
    /// Trailing window length in bins.
    pub lag: usize,
    /// Signal when amplitude exceeds the trailing mean by this many trailing
    /// standard deviations.
    pub threshold: f64,
    /// Weight of a signaled bin in the trailing statistics.
    pub influence: f64,
}

impl Default for ZScoreParams {
    fn default() -> Self {
        Self {
            lag: 16,
            threshold: 4.0,
            influence: 0.1,
        }
    }
}

impl ZScoreParams {
    pub fn validate(&self) -> Result<()> {
        if self.lag < 2 {
            return Err(Error::InvalidArgument(format!(
                "z-score lag must be ≥ 2, got {}",
                self.lag
            )));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidArgument("z-score threshold must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.influence) {
            return Err(Error::InvalidArgument("z-score influence must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Peaks smaller than this fraction of the spectrum maximum are rounding
/// noise, not signal.
pub const NUMERICAL_FLOOR: f64 = 1e-10;

/// A detected spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub bin: usize,
    pub frequency: f64,
    pub amplitude: f64,
}

/// How a run of contiguous signaled bins becomes peaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PeakRuns {
    /// One peak per run, at its largest amplitude.
    #[default]
    Maximum,
    /// Every signaled bin is a peak.
    Every,
}

/// Smoothed z-score signals for the non-DC bins (`flags[k]` is bin `k + 1`).
///
/// The scan starts at the Nyquist end and walks toward DC, so the `lag` bins
/// that only seed the trailing window are the highest frequencies.
pub fn zscore_signals(amplitudes: &[f64], params: &ZScoreParams) -> Result<Vec<bool>> {
    params.validate()?;
    let values = &amplitudes[1.min(amplitudes.len())..];
    if values.len() < params.lag {
        return Err(Error::SpectrumTooShort {
            bins: values.len(),
            lag: params.lag,
        });
    }
    let floor = NUMERICAL_FLOOR * values.iter().copied().fold(0.0, f64::max);
    let last = values.len() - 1;
    let mut trailing: VecDeque<f64> = (0..params.lag).map(|k| values[last - k]).collect();
    let mut signaled = vec![false; values.len()];
    for i in (0..values.len() - params.lag).rev() {
        let y = values[i];
        let n = trailing.len() as f64;
        let mean = trailing.iter().sum::<f64>() / n;
        let std = (trailing.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        let excess = y - mean;
        let filtered = if excess > params.threshold * std && excess > floor {
            signaled[i] = true;
            let previous = *trailing.back().expect("lag ≥ 2");
            params.influence * y + (1.0 - params.influence) * previous
        } else {
            y
        };
        trailing.pop_front();
        trailing.push_back(filtered);
    }
    Ok(signaled)
}

fn peak_at(spectrum: &AmplitudeSpectrum, bin: usize) -> Peak {
    Peak {
        bin,
        frequency: spectrum.frequencies[bin],
        amplitude: spectrum.amplitudes[bin],
    }
}

/// Peaks of [`zscore_signals`] with runs resolved per `runs`.
pub fn zscore_peaks_with(spectrum: &AmplitudeSpectrum, params: &ZScoreParams, runs: PeakRuns) -> Result<Vec<Peak>> {
    let signaled = zscore_signals(&spectrum.amplitudes, params)?;
    let values = &spectrum.amplitudes[1..];
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < signaled.len() {
        if !signaled[i] {
            i += 1;
            continue;
        }
        let mut best = i;
        while i < signaled.len() && signaled[i] {
            match runs {
                PeakRuns::Every => peaks.push(peak_at(spectrum, i + 1)),
                PeakRuns::Maximum if values[i] > values[best] => best = i,
                PeakRuns::Maximum => {}
            }
            i += 1;
        }
        if runs == PeakRuns::Maximum {
            peaks.push(peak_at(spectrum, best + 1));
        }
    }
    Ok(peaks)
}

/// One peak per run of contiguous signaled bins, at the run's largest amplitude.
pub fn zscore_peak_bins(spectrum: &AmplitudeSpectrum, params: &ZScoreParams) -> Result<Vec<Peak>> {
    zscore_peaks_with(spectrum, params, PeakRuns::Maximum)
}

/// Frequencies of the peaks found by [`zscore_peak_bins`].
pub fn zscore_peaks(spectrum: &AmplitudeSpectrum, params: &ZScoreParams) -> Result<Vec<f64>> {
    Ok(zscore_peak_bins(spectrum, params)?
        .into_iter()
        .map(|p| p.frequency)
        .collect())
}

/// How per-channel peaks are combined into one candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum Aggregation {
    /// Every peak seen in any channel.
    #[default]
    Union,
    /// Peaks seen in at least `quorum` (a fraction) of the channels.
    Intersection { quorum: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateParams {
    pub zscore: ZScoreParams,
    pub aggregation: Aggregation,
    pub runs: PeakRuns,
}

/// Spectra of every state channel: angles first, then speeds.
pub fn channel_spectra(window: &MeasurementWindow) -> Result<Vec<AmplitudeSpectrum>> {
    (0..2 * window.machines())
        .map(|c| {
            let samples: Vec<f64> = window.channel(c).iter().copied().collect();
            amplitude_spectrum(&samples, window.sample_rate(), &window.channel_name(c))
        })
        .collect()
}

struct Cluster {
    frequency: f64,
    amplitude: f64,
    channels: Vec<usize>,
}

/// Collects the candidate forcing frequencies of a window.
///
/// Peaks are detected per channel, grouped when closer than one bin width
/// (the larger-amplitude member represents the group), then filtered by the
/// aggregation policy.
pub fn candidate_frequencies(window: &MeasurementWindow, params: &CandidateParams) -> Result<FrequencyCandidateSet> {
    let spectra = channel_spectra(window)?;
    candidates_from_spectra(&spectra, window.sample_rate(), params)
}

pub fn candidates_from_spectra(
    spectra: &[AmplitudeSpectrum],
    sample_rate: f64,
    params: &CandidateParams,
) -> Result<FrequencyCandidateSet> {
    let Some(first) = spectra.first() else {
        return Err(Error::NoCandidates);
    };
    let bin_width = first.bin_width();
    let nyquist = sample_rate / 2.0;
    let mut peaks: Vec<(f64, f64, usize)> = Vec::new();
    for (c, spectrum) in spectra.iter().enumerate() {
        for p in zscore_peaks_with(spectrum, &params.zscore, params.runs)? {
            if p.frequency > 0.0 && p.frequency < nyquist {
                peaks.push((p.frequency, p.amplitude, c));
            }
        }
    }
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));

    let merge_below = bin_width * (1.0 - 1e-6);
    let mut clusters: Vec<Cluster> = Vec::new();
    for (f, a, c) in peaks {
        match clusters.last_mut() {
            Some(last) if f - last.frequency < merge_below => {
                if a > last.amplitude {
                    last.frequency = f;
                    last.amplitude = a;
                }
                if !last.channels.contains(&c) {
                    last.channels.push(c);
                }
            }
            _ => clusters.push(Cluster {
                frequency: f,
                amplitude: a,
                channels: vec![c],
            }),
        }
    }

    let required = match params.aggregation {
        Aggregation::Union => 1,
        Aggregation::Intersection { quorum } => {
            if !(quorum > 0.0 && quorum <= 1.0) {
                return Err(Error::InvalidArgument(format!("quorum {quorum} outside (0, 1]")));
            }
            ((quorum * spectra.len() as f64) - 1e-9).ceil().max(1.0) as usize
        }
    };
    let frequencies: Vec<f64> = clusters
        .into_iter()
        .filter(|c| c.channels.len() >= required)
        .map(|c| c.frequency)
        .collect();
    if frequencies.is_empty() {
        return Err(Error::NoCandidates);
    }
    FrequencyCandidateSet::new(frequencies, bin_width, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn constant_signal_is_pure_dc() {
        let s = amplitude_spectrum(&[2.5; 64], 30.0, "c").unwrap();
        assert!((s.amplitudes[0] - 2.5).abs() < 1e-12);
        assert!(s.amplitudes[1..].iter().all(|a| *a < 1e-12));
        assert_eq!(s.amplitudes.len(), 33);
    }

    #[test]
    fn on_bin_sine_has_unit_amplitude() {
        let (m, fs) = (1200, 30.0);
        let f = 20.0 * fs / m as f64;
        let x: Vec<f64> = (0..m).map(|k| (TAU * f * k as f64 / fs).sin()).collect();
        let s = amplitude_spectrum(&x, fs, "s").unwrap();
        for (k, a) in s.amplitudes.iter().enumerate() {
            if k == 20 {
                assert!((a - 1.0).abs() < 1e-9);
            } else {
                assert!(*a < 1e-9, "bin {k}: {a}");
            }
        }
        assert!((s.bin_width() - 0.025).abs() < 1e-15);
    }

    fn spectrum_of(amps: Vec<f64>) -> AmplitudeSpectrum {
        let n = amps.len();
        AmplitudeSpectrum {
            frequencies: (0..n).map(|k| k as f64 * 0.025).collect(),
            amplitudes: amps,
            label: "x".into(),
            samples: 2 * (n - 1),
        }
    }

    #[test]
    fn single_spike_over_flat_floor() {
        let mut amps = vec![1.0; 200];
        amps[77] = 100.0;
        let peaks = zscore_peak_bins(&spectrum_of(amps), &ZScoreParams::default()).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].bin, 77);
    }

    #[test]
    fn low_frequency_spike_is_reachable() {
        let mut amps = vec![1.0; 200];
        amps[5] = 40.0;
        let peaks = zscore_peak_bins(&spectrum_of(amps), &ZScoreParams::default()).unwrap();
        assert_eq!(peaks.iter().map(|p| p.bin).collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn every_bin_of_a_run() {
        let mut amps = vec![1.0; 100];
        amps[40] = 60.0;
        amps[41] = 80.0;
        let s = spectrum_of(amps);
        let p = ZScoreParams::default();
        let every: Vec<_> = zscore_peaks_with(&s, &p, PeakRuns::Every)
            .unwrap()
            .iter()
            .map(|p| p.bin)
            .collect();
        assert_eq!(every, vec![40, 41]);
        assert_eq!(zscore_peak_bins(&s, &p).unwrap()[0].bin, 41);
    }

    #[test]
    fn constant_spectrum_has_no_peaks() {
        let peaks = zscore_peaks(&spectrum_of(vec![0.3; 200]), &ZScoreParams::default()).unwrap();
        assert!(peaks.is_empty());
    }

    #[test]
    fn dc_is_never_a_peak() {
        let mut amps = vec![0.1; 100];
        amps[0] = 1e6;
        assert!(zscore_peaks(&spectrum_of(amps), &ZScoreParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn contiguous_run_reports_its_maximum() {
        let mut amps = vec![1.0; 100];
        amps[40] = 50.0;
        amps[41] = 80.0;
        amps[42] = 60.0;
        let peaks = zscore_peak_bins(&spectrum_of(amps), &ZScoreParams::default()).unwrap();
        assert_eq!(peaks.iter().map(|p| p.bin).collect::<Vec<_>>(), vec![41]);
    }

    #[test]
    fn too_few_bins() {
        let err = zscore_peaks(&spectrum_of(vec![1.0; 10]), &ZScoreParams::default()).unwrap_err();
        assert!(matches!(err, Error::SpectrumTooShort { bins: 9, lag: 16 }));
    }

    #[test]
    fn invalid_params() {
        let s = spectrum_of(vec![1.0; 100]);
        for p in [
            ZScoreParams {
                lag: 1,
                ..Default::default()
            },
            ZScoreParams {
                threshold: 0.0,
                ..Default::default()
            },
            ZScoreParams {
                influence: 1.5,
                ..Default::default()
            },
        ] {
            assert!(matches!(zscore_peaks(&s, &p), Err(Error::InvalidArgument(_))));
        }
    }

    #[test]
    fn quorum_filters_rare_peaks() {
        let mk = |spike: Option<usize>| {
            let mut a: Vec<f64> = (0..200).map(|k| 1.0 + 0.01 * ((k * 7919) % 13) as f64).collect();
            if let Some(b) = spike {
                a[b] = 100.0;
            }
            spectrum_of(a)
        };
        let spectra = vec![mk(Some(50)), mk(Some(50)), mk(Some(120)), mk(None)];
        let union = candidates_from_spectra(&spectra, 30.0, &CandidateParams::default()).unwrap();
        assert_eq!(union.len(), 2);
        let params = CandidateParams {
            aggregation: Aggregation::Intersection { quorum: 0.5 },
            ..Default::default()
        };
        let quorum = candidates_from_spectra(&spectra, 30.0, &params).unwrap();
        assert_eq!(quorum.frequencies(), &[50.0 * 0.025]);
    }
}
