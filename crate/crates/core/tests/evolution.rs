use conjugate_decoherence::evolution::*;
use conjugate_decoherence::metrics::flatness_cv;
use conjugate_decoherence::{sample_gaussian, Basis, Error, GaussianSpec, Grid, WaveFunction, WavePacket};
use num_complex::Complex64;

fn reference(t: f64) -> ModelParams {
    ModelParams::gaussian(1.0, 1.0, 1.0, t).unwrap()
}

fn spectrum_gap(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let (ea, eb) = (a.eigenvalues().unwrap(), b.eigenvalues().unwrap());
    ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn momentum_kernel_at_zero_is_transformed_projector() {
    let grid = Grid::symmetric(128, 12.0).unwrap();
    let pure = DensityMatrix::pure(&sample_gaussian(&GaussianSpec::centered(1.0).unwrap(), &grid).unwrap());
    let transformed = basis_change(&pure);
    let direct = momentum_kernel(&reference(0.0), transformed.grid()).unwrap();
    assert!(transformed.max_abs_diff(&direct) < 1e-8);
}

#[test]
fn basis_change_preserves_spectrum_and_round_trips() {
    let p = reference(2.0);
    let dx = std::f64::consts::PI / 13.0;
    let grid = Grid::centered(208, dx).unwrap();
    let rho = position_kernel(&p, &grid).unwrap();
    let moved = basis_change(&rho);
    assert_eq!(moved.basis(), Basis::Momentum);
    assert!((moved.trace() - rho.trace()).norm() < 1e-10);
    assert!(moved.hermiticity_error() <= 1e-12);
    assert!(spectrum_gap(&rho, &moved) < 1e-10);
    let back = basis_change(&moved);
    assert_eq!(back.grid(), rho.grid());
    assert!(back.max_abs_diff(&rho) < 1e-10);
}

#[test]
fn free_particle_limits() {
    let p = reference(0.0).with_mass(Mass::Finite(1.0));
    let grid = Grid::covering(96, p.required_half_width(Basis::Momentum)).unwrap();
    let rho = free_particle_momentum_kernel(&p, &grid).unwrap();
    assert!((rho.purity() - 1.0).abs() < 1e-9);

    let p = reference(5.0);
    let grid = Grid::covering(200, p.required_half_width(Basis::Momentum)).unwrap();
    let heavy = free_particle_momentum_kernel(&p.clone().with_mass(Mass::Finite(1e6)), &grid).unwrap();
    assert!(heavy.max_abs_diff(&momentum_kernel(&p, &grid).unwrap()) < 1e-6);
}

#[test]
fn light_particle_has_complex_coherences_but_valid_state() {
    let p = reference(2.0).with_mass(Mass::Finite(1.0));
    let grid = Grid::covering(128, p.required_half_width(Basis::Momentum)).unwrap();
    let rho = free_particle_momentum_kernel(&p, &grid).unwrap();
    let report = rho.check().unwrap();
    assert!(report.min_eigenvalue > -1e-8);
    assert!(rho.elems().iter().any(|e| e.im.abs() > 1e-6));
}

#[test]
fn long_time_diagonal_is_the_kernel_diagonal() {
    let p = reference(3.0);
    let grid = Grid::covering(160, p.required_half_width(Basis::Position)).unwrap();
    let rho = position_kernel(&p, &grid).unwrap();
    let diag = long_time_diagonal(&p, &grid, Basis::Position).unwrap();
    let worst = rho
        .diagonal()
        .iter()
        .zip(diag.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn long_time_position_distribution_is_flat_near_origin() {
    let p = reference(50.0);
    let grid = Grid::covering(4096, p.required_half_width(Basis::Position)).unwrap();
    let diag = long_time_diagonal(&p, &grid, Basis::Position).unwrap();
    let cv = flatness_cv(&grid, diag.probs(), 5.0).unwrap();
    assert!(cv < 0.01, "{cv}");
    assert!(((diag.variance() - 2501.0) / 2501.0).abs() < 1e-6);
}

#[test]
fn off_diagonal_elements_never_grow() {
    let times = [1.0, 1.5, 2.0, 3.0, 5.0, 8.0];
    let kernels: Vec<_> = times
        .iter()
        .map(|&t| FactorizedKernel::new(&reference(t), Basis::Position).unwrap())
        .collect();
    for (i, &t1) in times.iter().enumerate() {
        let min_gap = 4.0 / t1;
        for later in &kernels[i + 1..] {
            for sum in [0.0, 2.0, -3.0] {
                for gap in [min_gap, 1.5 * min_gap, 3.0 * min_gap] {
                    let (x, xb) = ((sum + gap) / 2.0, (sum - gap) / 2.0);
                    let before = kernels[i].eval(x, xb).norm();
                    let after = later.eval(x, xb).norm();
                    assert!(after <= before + 1e-9, "t1 = {t1}, sum = {sum}, gap = {gap}");
                }
            }
        }
    }
}

#[test]
fn too_small_grid_is_refused() {
    let p = reference(10.0);
    let grid = Grid::covering(128, 40.0).unwrap();
    match position_kernel(&p, &grid) {
        Err(Error::SupportOverflow { required, .. }) => assert!((required - 88.0).abs() < 1e-9),
        other => panic!("expected overflow, got {other:?}"),
    }
}

#[test]
fn oracle_agrees_for_a_non_gaussian_system() {
    let grid = Grid::symmetric(512, 24.0).unwrap();
    let amps = grid
        .points()
        .map(|x| {
            let g = |c: f64| (-(x - c).powi(2) / 2.0).exp();
            Complex64::new(g(2.0) + 0.6 * g(-2.0), 0.0) * Complex64::cis(0.5 * x)
        })
        .collect();
    let system = WaveFunction::sampled(WavePacket::from_amplitudes(grid, amps, Basis::Position).unwrap());
    let p = ModelParams {
        system,
        ..reference(1.0)
    };
    for basis in [Basis::Position, Basis::Momentum] {
        let (lo, hi) = p.occupied_range(basis);
        let g = Grid::new(48, lo, hi + (hi - lo) / 47.0).unwrap();
        let brute = brute_force_reduced(&p, &g, basis).unwrap();
        let kernel = match basis {
            Basis::Position => position_kernel(&p, &g),
            Basis::Momentum => momentum_kernel(&p, &g),
        }
        .unwrap();
        let gap = brute.max_abs_diff(&kernel);
        assert!(gap < 1e-3, "{basis}: {gap:e}");
    }
}
