use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximum Newton iterations in [`solve_equilibrium`].
pub const EQUILIBRIUM_MAX_ITER: usize = 50;
/// Power-balance residual (∞-norm) accepted as converged by [`solve_equilibrium`].
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-10;

/// Classical multi-machine model seen from the generator internal buses.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel {
    labels: Vec<String>,
    inertia: Vec<f64>,
    damping: Vec<f64>,
    emf: Vec<f64>,
    mechanical_power: Vec<f64>,
    admittance_magnitude: DMatrix<f64>,
    admittance_angle: DMatrix<f64>,
    sigma_load: Vec<f64>,
}

/// Parameters of a [`GridModel`], checked by [`GridModel::new`].
#[derive(Debug, Clone)]
pub struct GridModelParams {
    pub labels: Vec<String>,
    /// Inertia constants `M_i`.
    pub inertia: Vec<f64>,
    /// Damping coefficients `D_i`.
    pub damping: Vec<f64>,
    /// Internal emf magnitudes `E_i` (pu).
    pub emf: Vec<f64>,
    /// Mechanical power set points `P_m,i` (pu).
    pub mechanical_power: Vec<f64>,
    /// Reduced admittance magnitudes `Y_ij`.
    pub admittance_magnitude: DMatrix<f64>,
    /// Reduced admittance angles `φ_ij` (rad).
    pub admittance_angle: DMatrix<f64>,
    /// Load-noise standard deviations `σ_load,i`.
    pub sigma_load: Vec<f64>,
}

impl GridModel {
    pub fn new(p: GridModelParams) -> Result<Self> {
        let r = p.labels.len();
        if r < 1 {
            return Err(Error::InvalidModel("model needs at least one machine".into()));
        }
        for (name, v) in [
            ("inertia", &p.inertia),
            ("damping", &p.damping),
            ("emf", &p.emf),
            ("mechanical_power", &p.mechanical_power),
            ("sigma_load", &p.sigma_load),
        ] {
            if v.len() != r {
                return Err(Error::InvalidModel(format!(
                    "{name} has {} entries, expected {r}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} has a non-finite entry")));
            }
        }
        for (name, m) in [
            ("admittance magnitude", &p.admittance_magnitude),
            ("admittance angle", &p.admittance_angle),
        ] {
            if m.shape() != (r, r) {
                return Err(Error::InvalidModel(format!(
                    "{name} is {}x{}, expected {r}x{r}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("{name} has a non-finite entry")));
            }
        }
        if let Some(i) = p.inertia.iter().position(|&m| m <= 0.0) {
            return Err(Error::InvalidModel(format!(
                "inertia of machine {} must be positive",
                p.labels[i]
            )));
        }
        if let Some(i) = p.damping.iter().position(|&d| d < 0.0) {
            return Err(Error::InvalidModel(format!(
                "damping of machine {} must be non-negative",
                p.labels[i]
            )));
        }
        if let Some(i) = p.emf.iter().position(|&e| e <= 0.0) {
            return Err(Error::InvalidModel(format!(
                "emf of machine {} must be positive",
                p.labels[i]
            )));
        }
        if let Some(i) = p.sigma_load.iter().position(|&s| s < 0.0) {
            return Err(Error::InvalidModel(format!(
                "sigma_load of machine {} must be non-negative",
                p.labels[i]
            )));
        }
        let y = &p.admittance_magnitude;
        for i in 0..r {
            for j in 0..i {
                if (y[(i, j)] - y[(j, i)]).abs() > 1e-9 {
                    return Err(Error::InvalidModel(format!(
                        "admittance magnitude not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for l in &p.labels {
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            labels: p.labels,
            inertia: p.inertia,
            damping: p.damping,
            emf: p.emf,
            mechanical_power: p.mechanical_power,
            admittance_magnitude: p.admittance_magnitude,
            admittance_angle: p.admittance_angle,
            sigma_load: p.sigma_load,
        })
    }

    /// Builds the admittance from its rectangular form `G + jB`.
    pub fn admittance_from_rectangular(
        conductance: &DMatrix<f64>,
        susceptance: &DMatrix<f64>,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let mag = conductance.zip_map(susceptance, |g, b| g.hypot(b));
        let ang = conductance.zip_map(susceptance, |g, b| b.atan2(g));
        (mag, ang)
    }

    pub fn machines(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn inertia(&self) -> &[f64] {
        &self.inertia
    }

    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    pub fn emf(&self) -> &[f64] {
        &self.emf
    }

    pub fn mechanical_power(&self) -> &[f64] {
        &self.mechanical_power
    }

    pub fn sigma_load(&self) -> &[f64] {
        &self.sigma_load
    }

    pub fn admittance_magnitude(&self) -> &DMatrix<f64> {
        &self.admittance_magnitude
    }

    pub fn admittance_angle(&self) -> &DMatrix<f64> {
        &self.admittance_angle
    }

    /// Self conductance `G_ii = Y_ii cos φ_ii`.
    pub fn self_conductance(&self, i: usize) -> f64 {
        self.admittance_magnitude[(i, i)] * self.admittance_angle[(i, i)].cos()
    }

    pub fn with_mechanical_power(mut self, pm: Vec<f64>) -> Result<Self> {
        if pm.len() != self.machines() {
            return Err(Error::InvalidModel("mechanical power length mismatch".into()));
        }
        self.mechanical_power = pm;
        Ok(self)
    }

    pub fn with_sigma_load(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.machines() || sigma.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidModel("invalid sigma_load".into()));
        }
        self.sigma_load = sigma;
        Ok(self)
    }

    /// Sets `P_m = P_e(δ)` so that `delta` is an equilibrium.
    pub fn balanced_at(self, delta: &[f64]) -> Result<Self> {
        let pm = electrical_power(delta, &self);
        self.with_mechanical_power(pm)
    }

    /// ∞-norm of `P_m − P_e(δ)`.
    pub fn power_balance_residual(&self, delta: &[f64]) -> f64 {
        let pe = electrical_power(delta, self);
        self.mechanical_power
            .iter()
            .zip(&pe)
            .map(|(pm, pe)| (pm - pe).abs())
            .fold(0.0, f64::max)
    }
}

/// Electrical power injected by each machine at rotor angles `delta`.
pub fn electrical_power(delta: &[f64], model: &GridModel) -> Vec<f64> {
    electrical_power_scaled(delta, model, 1.0)
}

/// [`electrical_power`] with every self conductance multiplied by `g_scale`.
pub(crate) fn electrical_power_scaled(delta: &[f64], model: &GridModel, g_scale: f64) -> Vec<f64> {
    let r = model.machines();
    let e = &model.emf;
    let y = &model.admittance_magnitude;
    let phi = &model.admittance_angle;
    (0..r)
        .map(|i| {
            let own = e[i] * e[i] * model.self_conductance(i) * g_scale;
            let transfer: f64 = (0..r)
                .filter(|&j| j != i)
                .map(|j| e[i] * e[j] * y[(i, j)] * (phi[(i, j)] - delta[i] + delta[j]).cos())
                .sum();
            own + transfer
        })
        .collect()
}

/// Jacobian `∂P_e/∂δ` at rotor angles `delta`.
pub fn power_jacobian(delta: &[f64], model: &GridModel) -> DMatrix<f64> {
    let r = model.machines();
    let e = &model.emf;
    let y = &model.admittance_magnitude;
    let phi = &model.admittance_angle;
    let mut jac = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            if i == j {
                continue;
            }
            let s = e[i] * e[j] * y[(i, j)] * (phi[(i, j)] - delta[i] + delta[j]).sin();
            jac[(i, j)] = -s;
            jac[(i, i)] += s;
        }
    }
    jac
}

/// Solves `P_m = P_e(δ)` by Newton iteration with `δ_1 = 0` as reference.
pub fn solve_equilibrium(model: &GridModel) -> Result<Vec<f64>> {
    solve_equilibrium_from(model, &vec![0.0; model.machines()])
}

/// [`solve_equilibrium`] starting from `guess` (shifted so that `δ_1 = 0`).
pub fn solve_equilibrium_from(model: &GridModel, guess: &[f64]) -> Result<Vec<f64>> {
    let r = model.machines();
    if guess.len() != r {
        return Err(Error::InvalidArgument("initial angle guess length mismatch".into()));
    }
    let mut delta: Vec<f64> = guess.iter().map(|d| d - guess[0]).collect();
    let mut residual = model.power_balance_residual(&delta);
    if r == 1 {
        return if residual < EQUILIBRIUM_TOLERANCE {
            Ok(delta)
        } else {
            Err(Error::NoEquilibrium { residual })
        };
    }
    for _ in 0..EQUILIBRIUM_MAX_ITER {
        if residual < EQUILIBRIUM_TOLERANCE * 1e-3 {
            break;
        }
        let pe = electrical_power(&delta, model);
        let mismatch = DVector::from_iterator(r - 1, (1..r).map(|i| model.mechanical_power[i] - pe[i]));
        let jac = power_jacobian(&delta, model).view((1, 1), (r - 1, r - 1)).into_owned();
        let Some(step) = jac.lu().solve(&mismatch) else {
            break;
        };
        let largest = step.amax();
        let scale = if largest > 0.5 { 0.5 / largest } else { 1.0 };
        let mut trial = delta.clone();
        for i in 1..r {
            trial[i] += scale * step[i - 1];
        }
        let trial_residual = model.power_balance_residual(&trial);
        if !trial_residual.is_finite() {
            break;
        }
        let stalled = trial_residual >= residual && residual < EQUILIBRIUM_TOLERANCE;
        if stalled {
            break;
        }
        delta = trial;
        residual = trial_residual;
    }
    if residual < EQUILIBRIUM_TOLERANCE {
        Ok(delta)
    } else {
        Err(Error::NoEquilibrium { residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn two_machine(pm: (f64, f64), y: f64) -> GridModel {
        GridModel::new(GridModelParams {
            labels: vec!["G1".into(), "G2".into()],
            inertia: vec![0.1, 0.1],
            damping: vec![0.0, 0.0],
            emf: vec![1.0, 1.0],
            mechanical_power: vec![pm.0, pm.1],
            admittance_magnitude: DMatrix::from_row_slice(2, 2, &[0.0, y, y, 0.0]),
            admittance_angle: DMatrix::from_row_slice(2, 2, &[0.0, FRAC_PI_2, FRAC_PI_2, 0.0]),
            sigma_load: vec![0.0, 0.0],
        })
        .unwrap()
    }

    #[test]
    fn pure_susceptance_tie_at_zero_angle() {
        let m = two_machine((0.0, 0.0), 1.0);
        let pe = electrical_power(&[0.0, 0.0], &m);
        assert!(pe[0].abs() < 1e-15 && pe[1].abs() < 1e-15);
    }

    #[test]
    fn pure_susceptance_tie_hand_evaluation() {
        let m = two_machine((0.0, 0.0), 1.0);
        let pe = electrical_power(&[0.1, -0.1], &m);
        assert!((pe[0] - 0.2f64.sin()).abs() < 1e-14);
        assert!((pe[1] + 0.2f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn swapping_machines_swaps_power() {
        let m = two_machine((0.0, 0.0), 1.3);
        let a = electrical_power(&[0.3, -0.05], &m);
        let b = electrical_power(&[-0.05, 0.3], &m);
        assert!((a[0] - b[1]).abs() < 1e-15 && (a[1] - b[0]).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let m = two_machine((0.0, 0.0), 1.3);
        let delta = [0.2, -0.1];
        let jac = power_jacobian(&delta, &m);
        let h = 1e-6;
        for j in 0..2 {
            let mut up = delta;
            let mut dn = delta;
            up[j] += h;
            dn[j] -= h;
            let (pu, pd) = (electrical_power(&up, &m), electrical_power(&dn, &m));
            for i in 0..2 {
                assert!((jac[(i, j)] - (pu[i] - pd[i]) / (2.0 * h)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn equilibrium_matches_arcsin() {
        let p = 0.3;
        let m = two_machine((p, -p), 1.0);
        let delta = solve_equilibrium(&m).unwrap();
        assert_eq!(delta[0], 0.0);
        assert!((delta[1] - delta[0] + p.asin()).abs() < 1e-12);
        assert!(m.power_balance_residual(&delta) < EQUILIBRIUM_TOLERANCE);
    }

    #[test]
    fn zero_power_gives_zero_angles() {
        let m = two_machine((0.0, 0.0), 1.0);
        assert_eq!(solve_equilibrium(&m).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn beyond_transfer_limit_has_no_equilibrium() {
        let m = two_machine((1.5, -1.5), 1.0);
        assert!(matches!(solve_equilibrium(&m), Err(Error::NoEquilibrium { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        let base = two_machine((0.0, 0.0), 1.0);
        let mut p = GridModelParams {
            labels: base.labels.clone(),
            inertia: vec![0.0, 0.1],
            damping: base.damping.clone(),
            emf: base.emf.clone(),
            mechanical_power: base.mechanical_power.clone(),
            admittance_magnitude: base.admittance_magnitude.clone(),
            admittance_angle: base.admittance_angle.clone(),
            sigma_load: base.sigma_load.clone(),
        };
        assert!(matches!(GridModel::new(p.clone()), Err(Error::InvalidModel(_))));
        p.inertia = vec![0.1, 0.1];
        p.admittance_magnitude[(0, 1)] = 2.0;
        assert!(matches!(GridModel::new(p), Err(Error::InvalidModel(_))));
    }
}
