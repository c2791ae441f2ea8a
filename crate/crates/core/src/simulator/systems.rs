//! Ready-made test systems.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;

use super::model::{GridModel, GridModelParams};

fn labels(r: usize) -> Vec<String> {
    (1..=r).map(|i| format!("G{i}")).collect()
}

/// Builds a lossless-transfer model: pure-susceptance ties `ties[(i, j, B)]`
/// plus self conductances, balanced at `angles`.
pub fn susceptance_network(
    inertia: Vec<f64>,
    damping: Vec<f64>,
    emf: Vec<f64>,
    self_conductance: &[f64],
    ties: &[(usize, usize, f64)],
    angles: &[f64],
    sigma_load: f64,
) -> GridModel {
    let r = inertia.len();
    let mut mag = DMatrix::zeros(r, r);
    let mut ang = DMatrix::zeros(r, r);
    for i in 0..r {
        mag[(i, i)] = self_conductance[i];
    }
    for &(i, j, b) in ties {
        mag[(i, j)] += b;
        mag[(j, i)] += b;
        ang[(i, j)] = FRAC_PI_2;
        ang[(j, i)] = FRAC_PI_2;
    }
    GridModel::new(GridModelParams {
        labels: labels(r),
        inertia,
        damping,
        emf,
        mechanical_power: vec![0.0; r],
        admittance_magnitude: mag,
        admittance_angle: ang,
        sigma_load: vec![sigma_load; r],
    })
    .expect("test system parameters are valid")
    .balanced_at(angles)
    .expect("angle vector matches machine count")
}

/// Two machines joined by one tie, machine 1 exporting.
pub fn two_machine(sigma_load: f64) -> GridModel {
    susceptance_network(
        vec![0.12, 0.08],
        vec![0.06, 0.04],
        vec![1.05, 1.02],
        &[0.6, 0.8],
        &[(0, 1, 1.5)],
        &[0.2, 0.0],
        sigma_load,
    )
}

/// Ten machines in two areas joined by two ties. Area 1 (G1–G5) holds light,
/// lightly loaded exporting units; area 2 (G6–G10) heavy importing units.
/// The slowest mode (0.375 Hz, about 6% damped) swings area 1 as a group
/// against G9–G10; the others sit between 0.43 and 1.9 Hz.
pub fn ten_machine_two_area(sigma_load: f64) -> GridModel {
    let inertia = vec![0.18, 0.14, 0.12, 0.16, 0.10, 0.9, 1.1, 0.8, 1.0, 0.95];
    let damping = inertia.iter().map(|m| 0.3 * m).collect();
    let emf = vec![1.06, 1.04, 1.05, 1.03, 1.02, 1.05, 1.04, 1.03, 1.06, 1.02];
    let conductance = [0.14, 0.16, 0.12, 0.15, 0.13, 0.7, 0.75, 0.65, 0.72, 0.7];
    let ties = [
        // area 1
        (0, 1, 4.0),
        (1, 2, 3.5),
        (2, 3, 4.5),
        (3, 4, 3.0),
        (4, 0, 3.8),
        (0, 2, 1.5),
        // area 2
        (5, 6, 3.6),
        (6, 7, 4.2),
        (7, 8, 3.2),
        (8, 9, 4.0),
        (9, 5, 3.4),
        (6, 8, 1.2),
        // inter-area
        (4, 5, 3.65),
        (3, 7, 3.05),
    ];
    let angles = [
        0.5422, 0.5905, 0.5474, 0.3982, 0.3676, 0.0627, -0.0107, 0.0616, -0.0585, -0.0553,
    ];
    susceptance_network(inertia, damping, emf, &conductance, &ties, &angles, sigma_load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{natural_modes, solve_equilibrium};

    #[test]
    fn ten_machine_system_is_balanced_and_stable() {
        let model = ten_machine_two_area(0.01);
        let eq = solve_equilibrium(&model).unwrap();
        let modes = natural_modes(&model, &eq).unwrap();
        assert_eq!(modes.len(), 9);
        assert!(modes.iter().all(|m| m.damping_ratio > 0.0));
        assert!((modes[0].frequency_hz - 0.375).abs() < 1e-3);
        assert!(model.mechanical_power().iter().all(|p| *p > 0.0));
    }
}
