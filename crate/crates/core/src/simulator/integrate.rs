use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::forcing::{forcing_value, ForcingSpec};
use super::model::{electrical_power_scaled, solve_equilibrium_from, GridModel};
use crate::error::{Error, Result};
use crate::types::MeasurementWindow;

/// Largest accepted integration step (s).
pub const MAX_STEP: f64 = 1e-2;
/// State magnitude beyond which a run is declared diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Power-balance residual above which a supplied start is re-solved.
pub const START_BALANCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Rotor angles (rad).
    pub delta: Vec<f64>,
    /// Speed deviations (rad/s).
    pub omega: Vec<f64>,
}

impl SimState {
    pub fn at_rest(t: f64, delta: Vec<f64>) -> Self {
        let r = delta.len();
        Self {
            t,
            delta,
            omega: vec![0.0; r],
        }
    }

    fn is_bounded(&self) -> bool {
        self.delta
            .iter()
            .chain(&self.omega)
            .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_LIMIT)
    }
}

/// Slow sinusoidal modulation of every self conductance, emulating load
/// power-factor drift: `G_ii(t) = G_ii (1 + relative_amplitude · sin(2πt/period))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductanceDrift {
    pub relative_amplitude: f64,
    pub period_s: f64,
}

impl ConductanceDrift {
    fn factor(&self, t: f64) -> f64 {
        1.0 + self.relative_amplitude * (TAU * t / self.period_s).sin()
    }
}

/// A forcing bound to a machine index.
#[derive(Debug, Clone)]
pub struct BoundForcing {
    pub machine: usize,
    pub spec: ForcingSpec,
}

/// Resolves forcing targets against the model labels.
pub fn bind_forcings(model: &GridModel, forcings: &[ForcingSpec]) -> Result<Vec<BoundForcing>> {
    forcings
        .iter()
        .map(|f| {
            let machine = model
                .index_of(&f.target)
                .ok_or_else(|| Error::InvalidForcing(format!("unknown target machine `{}`", f.target)))?;
            Ok(BoundForcing {
                machine,
                spec: f.clone(),
            })
        })
        .collect()
}

/// Noise increment added to each speed for one step:
/// `−M⁻¹ E² G Σ η √dt`.
pub fn noise_increment(model: &GridModel, noise_draw: &[f64], dt: f64, g_scale: f64) -> Vec<f64> {
    let sqrt_dt = dt.sqrt();
    (0..model.machines())
        .map(|i| {
            let e = model.emf()[i];
            let g = model.self_conductance(i) * g_scale;
            -(e * e * g * model.sigma_load()[i] * noise_draw[i] * sqrt_dt) / model.inertia()[i]
        })
        .collect()
}

/// One Euler–Maruyama step of the stochastic forced swing equations.
pub fn step(
    state: &SimState,
    dt: f64,
    model: &GridModel,
    forcings: &[BoundForcing],
    noise_draw: &[f64],
) -> Result<SimState> {
    step_with_drift(state, dt, model, forcings, noise_draw, None)
}

pub(crate) fn step_with_drift(
    state: &SimState,
    dt: f64,
    model: &GridModel,
    forcings: &[BoundForcing],
    noise_draw: &[f64],
    drift: Option<&ConductanceDrift>,
) -> Result<SimState> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(Error::InvalidArgument(format!("step {dt} s outside (0, {MAX_STEP}]")));
    }
    let r = model.machines();
    if state.delta.len() != r || state.omega.len() != r || noise_draw.len() != r {
        return Err(Error::ShapeMismatch(
            "state or noise length differs from machine count".into(),
        ));
    }
    let g_scale = drift.map_or(1.0, |d| d.factor(state.t));
    let pe = electrical_power_scaled(&state.delta, model, g_scale);
    let mut injection = vec![0.0; r];
    for f in forcings {
        injection[f.machine] += forcing_value(&f.spec, state.t);
    }
    let noise = noise_increment(model, noise_draw, dt, g_scale);
    let mut next = SimState {
        t: state.t + dt,
        delta: Vec::with_capacity(r),
        omega: Vec::with_capacity(r),
    };
    for i in 0..r {
        let accel = (model.mechanical_power()[i] - pe[i] - model.damping()[i] * state.omega[i] + injection[i])
            / model.inertia()[i];
        next.delta.push(state.delta[i] + state.omega[i] * dt);
        next.omega.push(state.omega[i] + accel * dt + noise[i]);
    }
    if !next.is_bounded() {
        return Err(Error::Diverged { t: next.t });
    }
    Ok(next)
}

/// Settings for [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    /// Length of the recorded window (s).
    pub duration_s: f64,
    /// Output (PMU) sampling rate (Hz).
    pub output_rate_hz: f64,
    /// Integration step (s); `None` picks the largest step ≤ 1 ms that divides
    /// the output period evenly.
    pub internal_dt_s: Option<f64>,
    /// Discarded prefix before the recorded window (s).
    pub warmup_s: f64,
    pub seed: u64,
    /// Starting angles; solved from the model when absent or unbalanced.
    pub initial_angles: Option<Vec<f64>>,
    pub conductance_drift: Option<ConductanceDrift>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            duration_s: 40.0,
            output_rate_hz: 30.0,
            internal_dt_s: None,
            warmup_s: 5.0,
            seed: 0,
            initial_angles: None,
            conductance_drift: None,
        }
    }
}

impl SimulationOptions {
    /// Integration steps per output sample.
    pub fn steps_per_sample(&self) -> Result<usize> {
        let per_sample = 1.0 / self.output_rate_hz;
        match self.internal_dt_s {
            None => Ok((per_sample / 1e-3 - 1e-9).ceil().max(1.0) as usize),
            Some(dt) => {
                let ratio = per_sample / dt;
                let rounded = ratio.round();
                if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio {
                    return Err(Error::InvalidArgument(format!(
                        "output rate {} Hz does not divide the step {dt} s evenly",
                        self.output_rate_hz
                    )));
                }
                Ok(rounded as usize)
            }
        }
    }

    pub fn step_size(&self) -> Result<f64> {
        Ok(1.0 / (self.output_rate_hz * self.steps_per_sample()? as f64))
    }
}

/// Integrates the stochastic swing equations and returns mean-centered
/// angle/speed deviations sampled at the output rate.
///
/// The simulation clock starts at `−warmup_s`; recorded sample `k` sits at
/// `t = k / output_rate_hz`, and forcing times use the same clock.
pub fn simulate(model: &GridModel, forcings: &[ForcingSpec], options: &SimulationOptions) -> Result<MeasurementWindow> {
    if !(options.output_rate_hz > 0.0 && options.duration_s > 0.0 && options.warmup_s >= 0.0) {
        return Err(Error::InvalidArgument(
            "duration, rate and warm-up must be positive".into(),
        ));
    }
    let samples = (options.duration_s * options.output_rate_hz).round() as usize;
    if samples < crate::types::MIN_SAMPLES {
        return Err(Error::TooShort {
            len: samples,
            min: crate::types::MIN_SAMPLES,
        });
    }
    let sps = options.steps_per_sample()?;
    let dt = options.step_size()?;
    for f in forcings {
        f.validate(options.output_rate_hz / 2.0)?;
    }
    let bound = bind_forcings(model, forcings)?;
    let r = model.machines();

    let start = match &options.initial_angles {
        Some(angles) if angles.len() == r && model.power_balance_residual(angles) <= START_BALANCE_TOLERANCE => {
            angles.clone()
        }
        Some(angles) => solve_equilibrium_from(model, angles)?,
        None => solve_equilibrium_from(model, &vec![0.0; r])?,
    };

    let warmup_samples = (options.warmup_s * options.output_rate_hz).round() as usize;
    let t0 = -(warmup_samples as f64) / options.output_rate_hz;
    let total_steps = (warmup_samples + samples - 1) * sps;

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut draw = vec![0.0; r];
    let mut state = SimState::at_rest(t0, start);
    let mut angles = DMatrix::zeros(samples, r);
    let mut speeds = DMatrix::zeros(samples, r);
    let record = |state: &SimState, row: usize, angles: &mut DMatrix<f64>, speeds: &mut DMatrix<f64>| {
        for i in 0..r {
            angles[(row, i)] = state.delta[i];
            speeds[(row, i)] = state.omega[i];
        }
    };
    if warmup_samples == 0 {
        record(&state, 0, &mut angles, &mut speeds);
    }
    for k in 1..=total_steps {
        for v in draw.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        state = step_with_drift(&state, dt, model, &bound, &draw, options.conductance_drift.as_ref())?;
        // re-anchor the clock to avoid accumulated rounding
        state.t = t0 + k as f64 * dt;
        if k % sps == 0 {
            let sample = k / sps;
            if sample >= warmup_samples {
                record(&state, sample - warmup_samples, &mut angles, &mut speeds);
            }
        }
    }

    for mut col in angles.column_iter_mut().chain(speeds.column_iter_mut()) {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let timestamps = (0..samples).map(|k| k as f64 / options.output_rate_hz).collect();
    MeasurementWindow::new(
        timestamps,
        model.labels().to_vec(),
        angles,
        speeds,
        None,
        options.output_rate_hz,
    )
}
