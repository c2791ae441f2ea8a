use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Sine,
    /// Square wave with the sign of the corresponding sine.
    Rectangular,
}

/// Mid-run change of forcing frequency and amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySwitch {
    pub at_s: f64,
    pub frequency_hz: f64,
    pub amplitude: f64,
}

/// Periodic power injected into the speed equation of one machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub target: String,
    pub waveform: Waveform,
    /// Peak value (pu power).
    pub amplitude: f64,
    pub frequency_hz: f64,
    #[serde(default)]
    pub phase_rad: f64,
    /// Active time interval `[start, end]`; unbounded when absent.
    #[serde(default)]
    pub active_interval: Option<(f64, f64)>,
    #[serde(default)]
    pub switch: Option<FrequencySwitch>,
}

impl ForcingSpec {
    pub fn sine(target: impl Into<String>, amplitude: f64, frequency_hz: f64) -> Self {
        Self {
            target: target.into(),
            waveform: Waveform::Sine,
            amplitude,
            frequency_hz,
            phase_rad: 0.0,
            active_interval: None,
            switch: None,
        }
    }

    pub fn rectangular(target: impl Into<String>, amplitude: f64, frequency_hz: f64) -> Self {
        Self {
            waveform: Waveform::Rectangular,
            ..Self::sine(target, amplitude, frequency_hz)
        }
    }

    pub fn with_phase(mut self, phase_rad: f64) -> Self {
        self.phase_rad = phase_rad;
        self
    }

    pub fn with_switch(mut self, at_s: f64, frequency_hz: f64, amplitude: f64) -> Self {
        self.switch = Some(FrequencySwitch {
            at_s,
            frequency_hz,
            amplitude,
        });
        self
    }

    pub fn active_between(mut self, start_s: f64, end_s: f64) -> Self {
        self.active_interval = Some((start_s, end_s));
        self
    }

    /// Checks amplitude and frequency against a Nyquist limit.
    pub fn validate(&self, nyquist_hz: f64) -> Result<()> {
        let check = |f: f64, a: f64| {
            if !(f > 0.0 && f < nyquist_hz) {
                return Err(Error::InvalidForcing(format!(
                    "frequency {f} Hz on {} outside (0, {nyquist_hz})",
                    self.target
                )));
            }
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidForcing(format!(
                    "amplitude {a} on {} must be positive",
                    self.target
                )));
            }
            Ok(())
        };
        check(self.frequency_hz, self.amplitude)?;
        if let Some(sw) = &self.switch {
            check(sw.frequency_hz, sw.amplitude)?;
        }
        if let Some((a, b)) = self.active_interval {
            if !(a <= b) {
                return Err(Error::InvalidForcing(format!("empty active interval [{a}, {b}]")));
            }
        }
        Ok(())
    }
}

/// Value of the forcing injection at time `t` (pu power).
pub fn forcing_value(spec: &ForcingSpec, t: f64) -> f64 {
    if let Some((start, end)) = spec.active_interval {
        if t < start || t > end {
            return 0.0;
        }
    }
    let (frequency, amplitude) = match &spec.switch {
        Some(sw) if t >= sw.at_s => (sw.frequency_hz, sw.amplitude),
        _ => (spec.frequency_hz, spec.amplitude),
    };
    let s = (TAU * frequency * t + spec.phase_rad).sin();
    match spec.waveform {
        Waveform::Sine => amplitude * s,
        Waveform::Rectangular => {
            if s > 0.0 {
                amplitude
            } else if s < 0.0 {
                -amplitude
            } else {
                0.0
            }
        }
    }
}
