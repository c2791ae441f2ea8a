//! Recovers a planted sparse coefficient matrix with thresholded least squares.

use forced_osc::sindy::{stlsq_matrix, StructuralMask};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> forced_osc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (rows, features, targets) = (60, 7, 3);
    let theta = DMatrix::from_fn(rows, features, |_, _| rng.random_range(-1.0..1.0));
    let mut truth = DMatrix::zeros(features, targets);
    for (i, j, v) in [(0, 0, 1.5), (3, 0, -0.7), (2, 1, 0.25), (6, 2, 2.0), (1, 2, -0.04)] {
        truth[(i, j)] = v;
    }
    let dx = &theta * &truth;

    let (xi, diag) = stlsq_matrix(&theta, &dx, 1e-3, &StructuralMask::full(features, targets))?;
    println!(
        "passes {} of at most {}, converged {}",
        diag.iterations, diag.initial_cardinality, diag.converged
    );
    println!("support sizes {:?}", diag.support_history);
    println!("max error {:.2e}", (&xi - &truth).amax());
    Ok(())
}
