use nalgebra::{DMatrix, DVector, QR};

use crate::error::{Error, Result};

/// Relative size of an R diagonal entry (on unit-norm columns) below which the
/// column is treated as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares solution of `Θ[:, columns] · ξ ≈ y` by Householder QR on
/// unit-norm columns.
///
/// Returns coefficients in the order of `columns`. Columns whose R diagonal
/// collapses relative to the largest one are reported as `RankDeficient`
/// with their index into `theta`.
pub fn solve_restricted(theta: &DMatrix<f64>, columns: &[usize], y: &DVector<f64>) -> Result<DVector<f64>> {
    let k = columns.len();
    if k == 0 {
        return Ok(DVector::zeros(0));
    }
    let rows = theta.nrows();
    if rows < k {
        return Err(Error::ShapeMismatch(format!(
            "{rows} rows cannot determine {k} coefficients"
        )));
    }
    let mut scales = Vec::with_capacity(k);
    let mut a = DMatrix::zeros(rows, k);
    for (dst, &src) in columns.iter().enumerate() {
        let col = theta.column(src);
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::RankDeficient {
                column: src,
                condition: f64::INFINITY,
            });
        }
        a.column_mut(dst).copy_from(&(col / norm));
        scales.push(norm);
    }
    let qr = QR::new(a);
    let r = qr.r();
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().copied().fold(0.0, f64::max);
    let smallest = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if let Some(pos) = diag.iter().position(|d| *d <= RANK_TOLERANCE * largest) {
        return Err(Error::RankDeficient {
            column: columns[pos],
            condition: largest / smallest,
        });
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, k).into_owned();
    let z = r.solve_upper_triangular(&head).ok_or(Error::RankDeficient {
        column: columns[0],
        condition: largest / smallest,
    })?;
    Ok(DVector::from_iterator(k, z.iter().zip(&scales).map(|(v, s)| v / s)))
}
