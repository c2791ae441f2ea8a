use std::f64::consts::TAU;

use nalgebra::DMatrix;

use super::model::{power_jacobian, GridModel};
use crate::error::{Error, Result};

/// Power-balance residual tolerated by [`natural_modes`].
pub const MODE_BALANCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalMode {
    pub frequency_hz: f64,
    pub damping_ratio: f64,
}

/// State matrix of the swing equations linearized at `delta`:
/// `[[0, I], [−M⁻¹ ∂Pe/∂δ, −M⁻¹ D]]`.
pub fn state_matrix(model: &GridModel, delta: &[f64]) -> DMatrix<f64> {
    let r = model.machines();
    let jac = power_jacobian(delta, model);
    let mut a = DMatrix::zeros(2 * r, 2 * r);
    for i in 0..r {
        let inv_m = 1.0 / model.inertia()[i];
        a[(i, r + i)] = 1.0;
        for j in 0..r {
            a[(r + i, j)] = -inv_m * jac[(i, j)];
        }
        a[(r + i, r + i)] = -inv_m * model.damping()[i];
    }
    a
}

/// Oscillatory modes of the linearized model, sorted by frequency.
///
/// Each complex pair `σ ± jω` contributes `ω/2π` and `−σ/√(σ²+ω²)`.
pub fn natural_modes(model: &GridModel, equilibrium: &[f64]) -> Result<Vec<NaturalMode>> {
    if equilibrium.len() != model.machines() {
        return Err(Error::ShapeMismatch(
            "equilibrium length differs from machine count".into(),
        ));
    }
    let residual = model.power_balance_residual(equilibrium);
    if !(residual <= MODE_BALANCE_TOLERANCE) {
        return Err(Error::NotAnEquilibrium { residual });
    }
    let a = state_matrix(model, equilibrium);
    let eig = a.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut modes: Vec<NaturalMode> = eig
        .iter()
        .filter(|z| z.im > 1e-9 * scale)
        .map(|z| NaturalMode {
            frequency_hz: z.im / TAU,
            damping_ratio: -z.re / z.re.hypot(z.im),
        })
        .collect();
    modes.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    Ok(modes)
}
