//! Sparse identification of the swing dynamics.
//!
//! The library `Θ(X)` holds a bias column, the angle and speed deviations, and
//! a sine/cosine pair for every candidate frequency. Sequential thresholded
//! least squares then finds a sparse `Ξ` with `Ẋ ≈ Θ·Ξ`, solving each target
//! column independently on the features its structural mask permits.

mod lstsq;

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

pub use lstsq::{solve_restricted, RANK_TOLERANCE};

use crate::error::{Error, Result};
use crate::types::{
    CoefficientMatrix, DerivativeMatrix, FeatureLibrary, FeatureTag, FrequencyCandidateSet, MeasurementWindow,
    RegressionDiagnostics, ZetaIndex,
};

/// Default sparsity threshold λ.
pub const DEFAULT_LAMBDA: f64 = 1e-6;

/// Assembles `[1, Δδ₁..Δδ_r, Δω₁..Δω_r, sin(2πf₁t), cos(2πf₁t), …]`.
pub fn build_library(window: &MeasurementWindow, candidates: &FrequencyCandidateSet) -> FeatureLibrary {
    let (m, r) = (window.len(), window.machines());
    let n = candidates.len();
    let width = 1 + 2 * r + 2 * n;
    let mut matrix = DMatrix::zeros(m, width);
    let mut descriptors = Vec::with_capacity(width);

    matrix.column_mut(0).fill(1.0);
    descriptors.push(FeatureTag::Bias);
    matrix.columns_mut(1, r).copy_from(window.angles());
    descriptors.extend((0..r).map(FeatureTag::AngleState));
    matrix.columns_mut(1 + r, r).copy_from(window.speeds());
    descriptors.extend((0..r).map(FeatureTag::SpeedState));

    let t = window.timestamps();
    for (i, &f) in candidates.frequencies().iter().enumerate() {
        let col = 1 + 2 * r + 2 * i;
        for (k, &tk) in t.iter().enumerate() {
            let (s, c) = (TAU * f * tk).sin_cos();
            matrix[(k, col)] = s;
            matrix[(k, col + 1)] = c;
        }
        descriptors.push(FeatureTag::SinWave(f));
        descriptors.push(FeatureTag::CosWave(f));
    }
    FeatureLibrary::from_parts(matrix, descriptors, r)
}

/// Which coefficient entries may be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralMask {
    permitted: DMatrix<bool>,
}

impl StructuralMask {
    /// Mask implied by the swing equations: `Δδ̇_j = Δω_j` exactly, while
    /// every feature may enter the speed equations.
    pub fn swing(machines: usize, frequencies: usize) -> Self {
        let rows = 1 + 2 * machines + 2 * frequencies;
        let permitted = DMatrix::from_fn(rows, 2 * machines, |row, col| {
            if col < machines {
                row == 1 + machines + col
            } else {
                true
            }
        });
        Self { permitted }
    }

    /// Every entry permitted.
    pub fn full(features: usize, targets: usize) -> Self {
        Self {
            permitted: DMatrix::from_element(features, targets, true),
        }
    }

    pub fn from_matrix(permitted: DMatrix<bool>) -> Self {
        Self { permitted }
    }

    pub fn for_library(library: &FeatureLibrary) -> Self {
        Self::swing(library.machines(), library.frequencies())
    }

    pub fn permits(&self, feature: usize, target: usize) -> bool {
        self.permitted[(feature, target)]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.permitted.shape()
    }
}

fn check_shapes(theta: &DMatrix<f64>, dx: &DMatrix<f64>, mask: &StructuralMask) -> Result<()> {
    if theta.nrows() != dx.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "library has {} rows, derivatives {}",
            theta.nrows(),
            dx.nrows()
        )));
    }
    if theta.nrows() < theta.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{} samples cannot determine {} features",
            theta.nrows(),
            theta.ncols()
        )));
    }
    if mask.shape() != (theta.ncols(), dx.ncols()) {
        return Err(Error::ShapeMismatch(format!(
            "mask is {:?}, coefficients are {}x{}",
            mask.shape(),
            theta.ncols(),
            dx.ncols()
        )));
    }
    Ok(())
}

/// Refits every target column on its support; unsupported entries are 0.
fn refit(theta: &DMatrix<f64>, dx: &DMatrix<f64>, support: &DMatrix<bool>) -> Result<DMatrix<f64>> {
    let mut xi = DMatrix::zeros(theta.ncols(), dx.ncols());
    for j in 0..dx.ncols() {
        let rows: Vec<usize> = (0..theta.ncols()).filter(|&i| support[(i, j)]).collect();
        if rows.is_empty() {
            continue;
        }
        let y: DVector<f64> = dx.column(j).into_owned();
        let coef = solve_restricted(theta, &rows, &y)?;
        for (k, &i) in rows.iter().enumerate() {
            xi[(i, j)] = coef[k];
        }
    }
    Ok(xi)
}

/// Masked least-squares estimate `Ξ⁰` on raw matrices.
pub fn initial_fit_matrix(theta: &DMatrix<f64>, dx: &DMatrix<f64>, mask: &StructuralMask) -> Result<DMatrix<f64>> {
    check_shapes(theta, dx, mask)?;
    refit(theta, dx, &mask.permitted)
}

/// Initial least-squares fit `Ξ⁰ = Θ†Ẋ`, restricted to the swing-equation mask.
pub fn initial_fit(library: &FeatureLibrary, derivatives: &DerivativeMatrix) -> Result<CoefficientMatrix> {
    let mask = StructuralMask::for_library(library);
    let xi = initial_fit_matrix(library.matrix(), derivatives.values(), &mask)?;
    coefficient_matrix(library, xi)
}

fn coefficient_matrix(library: &FeatureLibrary, xi: DMatrix<f64>) -> Result<CoefficientMatrix> {
    let frequencies = library
        .descriptors()
        .iter()
        .filter_map(|d| match d {
            FeatureTag::SinWave(f) => Some(*f),
            _ => None,
        })
        .collect();
    CoefficientMatrix::new(xi, library.machines(), frequencies)
}

fn objective(theta: &DMatrix<f64>, dx: &DMatrix<f64>, xi: &DMatrix<f64>, lambda: f64) -> (f64, f64) {
    let residual = (theta * xi - dx).norm();
    let nnz = xi.iter().filter(|v| **v != 0.0).count() as f64;
    (residual, residual * residual + lambda * lambda * nnz)
}

/// Sequential thresholded least squares on raw matrices.
///
/// Each pass keeps the permitted entries with `|ξ| ≥ λ` and refits every
/// target column on that support. The loop stops when a pass reproduces the
/// previous support or after `card(Ξ⁰)` passes.
pub fn stlsq_matrix(
    theta: &DMatrix<f64>,
    dx: &DMatrix<f64>,
    lambda: f64,
    mask: &StructuralMask,
) -> Result<(DMatrix<f64>, RegressionDiagnostics)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let mut xi = initial_fit_matrix(theta, dx, mask)?;
    let card = xi.iter().filter(|v| **v != 0.0).count();
    let mut diag = RegressionDiagnostics {
        initial_cardinality: card,
        ..Default::default()
    };
    let mut previous = DMatrix::from_element(xi.nrows(), xi.ncols(), false);
    let mut pass = 0;
    while pass < card {
        pass += 1;
        let support = DMatrix::from_fn(xi.nrows(), xi.ncols(), |i, j| {
            mask.permits(i, j) && xi[(i, j)].abs() >= lambda
        });
        xi = refit(theta, dx, &support)?;
        diag.support_history.push(support.iter().filter(|s| **s).count());
        diag.objective_history.push(objective(theta, dx, &xi, lambda).1);
        if support == previous {
            diag.converged = true;
            break;
        }
        previous = support;
    }
    if card == 0 {
        diag.converged = true;
    }
    diag.iterations = pass;
    let (residual, obj) = objective(theta, dx, &xi, lambda);
    diag.residual_fro = residual;
    diag.objective = obj;
    diag.sub_threshold_survivors = (0..xi.ncols())
        .flat_map(|j| (0..xi.nrows()).map(move |i| (i, j)))
        .filter(|&(i, j)| xi[(i, j)] != 0.0 && xi[(i, j)].abs() < lambda)
        .collect();
    Ok((xi, diag))
}

/// Sparse regression of `Ẋ` on the library under a structural mask.
pub fn stlsq(
    library: &FeatureLibrary,
    derivatives: &DerivativeMatrix,
    lambda: f64,
    mask: &StructuralMask,
) -> Result<(CoefficientMatrix, RegressionDiagnostics)> {
    let (xi, diag) = stlsq_matrix(library.matrix(), derivatives.values(), lambda, mask)?;
    Ok((coefficient_matrix(library, xi)?, diag))
}

/// One extra threshold-and-refit pass; used to confirm a returned support is
/// a fixed point.
pub fn threshold_refit(
    theta: &DMatrix<f64>,
    dx: &DMatrix<f64>,
    xi: &DMatrix<f64>,
    lambda: f64,
    mask: &StructuralMask,
) -> Result<DMatrix<f64>> {
    let support = DMatrix::from_fn(xi.nrows(), xi.ncols(), |i, j| {
        mask.permits(i, j) && xi[(i, j)].abs() >= lambda
    });
    refit(theta, dx, &support)
}

/// `ζ_ij = a_ij² + b_ij²` from the speed-equation columns of the forcing block.
pub fn extract_forcing_block(xi: &CoefficientMatrix, labels: &[String]) -> Result<ZetaIndex> {
    let r = xi.machines();
    if labels.len() != r {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {r} machines",
            labels.len()
        )));
    }
    let n = xi.frequencies().len();
    let values = DMatrix::from_fn(n, r, |i, j| {
        let (a, b) = (xi.sin_coefficient(i, j), xi.cos_coefficient(i, j));
        a * a + b * b
    });
    ZetaIndex::new(values, xi.frequencies().to_vec(), labels.to_vec())
}
