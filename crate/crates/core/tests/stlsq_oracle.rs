mod common;

use forced_osc::sindy::{stlsq_matrix, threshold_refit, StructuralMask};
use nalgebra::DMatrix;
use rand::Rng;

const LAMBDA: f64 = 1e-4;

fn run(noise: f64, seed: u64) -> (usize, usize, f64) {
    let mut rng = common::rng(seed);
    let (mut support_ok, mut exact) = (0, 0);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let sparsity = rng.random_range(0.6..0.9);
        let p = common::planted(&mut rng, 120, 13, 4, sparsity, 1e-3);
        let dx = &p.dx + DMatrix::from_fn(120, 4, |_, _| noise * common::gaussian(&mut rng));
        let mask = StructuralMask::full(13, 4);
        let (xi, diag) = stlsq_matrix(&p.theta, &dx, LAMBDA, &mask).unwrap();
        assert!(diag.iterations <= diag.initial_cardinality);
        assert!(diag.sub_threshold_survivors.is_empty());
        if common::support(&xi) == common::support(&p.truth) {
            support_ok += 1;
            let err = (&xi - &p.truth).amax();
            worst = worst.max(err);
            if err < 1e-9 {
                exact += 1;
            }
        }
    }
    (support_ok, exact, worst)
}

#[test]
fn noiseless_recovery_is_exact() {
    let (support, exact, worst) = run(0.0, 10);
    println!("noiseless: support {support}/200, exact {exact}/200, worst error {worst:e}");
    assert_eq!(support, 200);
    assert_eq!(exact, 200);
}

#[test]
fn noisy_support_recovery() {
    let (support, _, _) = run(1e-5, 11);
    println!("σ=1e-5: support {support}/200");
    assert!(support >= 195, "{support}/200");
}

#[test]
fn returned_support_is_a_fixed_point() {
    let mut rng = common::rng(12);
    for _ in 0..50 {
        let p = common::planted(&mut rng, 120, 13, 4, 0.7, 1e-3);
        let dx = &p.dx + DMatrix::from_fn(120, 4, |_, _| 1e-3 * common::gaussian(&mut rng));
        let mask = StructuralMask::full(13, 4);
        let (xi, diag) = stlsq_matrix(&p.theta, &dx, 1e-2, &mask).unwrap();
        if diag.converged {
            let again = threshold_refit(&p.theta, &dx, &xi, 1e-2, &mask).unwrap();
            assert_eq!(common::support(&again), common::support(&xi));
            assert!((&again - &xi).amax() < 1e-12);
        }
    }
}

#[test]
fn mask_is_respected() {
    let mut rng = common::rng(13);
    for _ in 0..50 {
        let p = common::planted(&mut rng, 120, 13, 4, 0.5, 1e-2);
        let permitted = DMatrix::from_fn(13, 4, |_, _| rng.random_bool(0.6));
        let mask = StructuralMask::from_matrix(permitted.clone());
        let (xi, _) = stlsq_matrix(&p.theta, &p.dx, 1e-3, &mask).unwrap();
        assert!(xi.iter().zip(permitted.iter()).all(|(v, ok)| *ok || *v == 0.0));
    }
}

#[test]
fn large_lambda_empties_the_model() {
    let mut rng = common::rng(14);
    let p = common::planted(&mut rng, 120, 13, 4, 0.7, 1e-3);
    let (xi, diag) = stlsq_matrix(&p.theta, &p.dx, 1e6, &StructuralMask::full(13, 4)).unwrap();
    assert!(xi.iter().all(|v| *v == 0.0));
    assert!(diag.converged);
}
