use nalgebra::{DMatrix, DVector};
use paratwin::reservoir::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_radius(a: &CsrMatrix) -> f64 {
    a.to_dense().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn config(size: usize, seed: u64) -> ReservoirConfig {
    ReservoirConfig { size, input_dim: 2, output_dim: 2, seed, ..ReservoirConfig::default() }
}

/// Ridge solution through the SVD of the stacked system `[R; sqrt(b) I] w = [Y; 0]`,
/// which never forms `RᵀR`.
fn svd_ridge(states: &[DVector<f64>], targets: &[DVector<f64>], ridge: f64) -> DMatrix<f64> {
    let (t, n, l) = (states.len(), states[0].len(), targets[0].len());
    let mut a = DMatrix::zeros(t + n, n);
    let mut y = DMatrix::zeros(t + n, l);
    for (i, (s, g)) in states.iter().zip(targets).enumerate() {
        a.row_mut(i).copy_from(&s.transpose());
        y.row_mut(i).copy_from(&g.transpose());
    }
    for j in 0..n {
        a[(t + j, j)] = ridge.sqrt();
    }
    a.svd(true, true).solve(&y, 0.0).unwrap().transpose()
}

fn random_design(seed: u64, t: usize, n: usize, l: usize) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = (0..t).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
    let targets = (0..t).map(|_| DVector::from_fn(l, |_, _| rng.random_range(-2.0..2.0))).collect();
    (states, targets)
}

#[test]
fn ridge_fit_matches_least_squares_oracle() {
    for (seed, ridge) in [(1, 0.0), (2, 1e-6), (3, 1e-2), (4, 1.0)] {
        let (states, targets) = random_design(seed, 400, 40, 3);
        let fit = fit_readout(&states, &targets, ridge).unwrap();
        let oracle = svd_ridge(&states, &targets, ridge);
        let err = (&fit.readout.w_out - &oracle).abs().max();
        assert!(err < 1e-10, "ridge {ridge}: {err}");
    }
}

#[test]
fn spectral_radius_hits_target_against_dense_eigensolver() {
    for (size, density, seed) in [(30, 0.2, 0), (80, 0.05, 1), (150, 0.02, 2), (200, 0.02, 3)] {
        let m = build_reservoir(&ReservoirConfig { density, ..config(size, seed) }).unwrap();
        let rho = dense_radius(&m.w_r);
        assert!((rho - 0.9).abs() < 1e-6, "N = {size}: {rho}");
    }
}

#[test]
fn echo_state_property_forgets_the_initial_state() {
    let mut converged = 0;
    for seed in 0..10 {
        let cfg = config(200, seed);
        let m = build_reservoir(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let inputs: Vec<Vec<f64>> = (0..cfg.warmup).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let a = ReservoirState { r: DVector::from_fn(200, |_, _| rng.random_range(-1.0..1.0)), t: 0 };
        let b = ReservoirState::zeros(200);
        let ra = drive_open_loop(&m, &cfg, &a, inputs.iter().map(Vec::as_slice), 0.3).unwrap();
        let rb = drive_open_loop(&m, &cfg, &b, inputs.iter().map(Vec::as_slice), 0.3).unwrap();
        let gap = (&ra.last().unwrap().r - &rb.last().unwrap().r).amax();
        converged += usize::from(gap < 1e-6);
    }
    assert!(converged >= 9, "{converged}/10 seeds converged");
}

#[test]
fn nilpotent_draws_are_rejected_not_blown_up() {
    // 30 neurons at 2% density leave an acyclic graph for this seed.
    let err = build_reservoir(&ReservoirConfig { density: 0.02, ..config(30, 0) }).unwrap_err();
    assert!(matches!(err, paratwin::Error::DegenerateReservoir));
}

#[test]
fn zero_is_an_exact_fixed_point_without_bias_or_drive() {
    let cfg = ReservoirConfig { bias_scaling: 0.0, ..config(100, 5) };
    let m = build_reservoir(&cfg).unwrap();
    let zeros = vec![[0.0, 0.0]; 50];
    let states = drive_open_loop(&m, &cfg, &ReservoirState::zeros(100), zeros.iter().map(|u| &u[..]), 0.0).unwrap();
    assert!(states.iter().all(|s| s.r.iter().all(|v| v.to_bits() == 0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_radius_matches_dense_for_random_shapes(size in 10usize..90, density in 0.02f64..0.5, rho in 0.1f64..1.5, seed in 0u64..1000) {
        let cfg = ReservoirConfig { spectral_radius: rho, density, ..config(size, seed) };
        match build_reservoir(&cfg) {
            Ok(m) => prop_assert!((dense_radius(&m.w_r) - rho).abs() < 1e-6 * rho.max(1.0)),
            // Very sparse draws can be nilpotent; the dense oracle must agree.
            Err(paratwin::Error::DegenerateReservoir) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn activations_stay_in_unit_cube(seed in 0u64..1000, leak in 0.05f64..1.0, scale in 0.0f64..5.0) {
        let cfg = ReservoirConfig { leak_rate: leak, input_scaling: scale, density: 0.2, ..config(60, seed) };
        let m = build_reservoir(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<[f64; 2]> = (0..40).map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)]).collect();
        let r0 = ReservoirState { r: DVector::from_fn(60, |_, _| rng.random_range(-1.0..1.0)), t: 0 };
        for s in drive_open_loop(&m, &cfg, &r0, inputs.iter().map(|u| &u[..]), 1.0).unwrap() {
            prop_assert!(s.r.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn same_seed_same_fit(seed in 0u64..1000) {
        let (states, targets) = random_design(seed, 60, 8, 2);
        let a = fit_readout(&states, &targets, 1e-3).unwrap();
        let b = fit_readout(&states, &targets, 1e-3).unwrap();
        prop_assert!(a.readout.w_out.iter().zip(b.readout.w_out.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
