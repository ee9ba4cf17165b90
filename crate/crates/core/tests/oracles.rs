//! Independent numerical oracles for the Fock-basis machinery.

use catwell::chem::registry;
use catwell::dynamics::{build_lindbladian, propagate, DissipationParams};
use catwell::expm::expm;
use catwell::linalg::{c64, max_abs_diff, CMat};
use catwell::observables::fit_exponential;
use catwell::operators::{build_double_well_hamiltonian, DoubleWellParams, FockOperatorSet};
use catwell::spectra::{build_position_grid, eigendecompose, eigenvalues, HalfLine};
use faer::Mat;

mod common;

use common::fd_levels_richardson;

#[test]
fn fock_levels_match_finite_differences() {
    for name in ["cis-cis", "at"] {
        let dw = registry().get(name).unwrap().params();
        let oracle = fd_levels_richardson(&dw, 4.5, 20);
        let ops = FockOperatorSet::new(300, 0.3).unwrap();
        let h = build_double_well_hamiltonian(&dw, &ops).unwrap();
        let ev = eigenvalues(h.as_ref()).unwrap();
        for (k, (a, b)) in ev.iter().zip(&oracle).enumerate() {
            assert!((a - b).abs() < 1e-5, "{name} level {k}: fock {a:.9} fd {b:.9}");
        }
    }
}

#[test]
fn finite_difference_oracle_on_harmonic_oscillator() {
    // k4 is tiny so the potential is harmonic to well below the tolerance.
    let dw = DoubleWellParams { k4: 1e-14, k2: -0.5 * 1836.0 * 0.01f64.powi(2), k1: 0.0, mass: 1836.0 };
    let levels = fd_levels_richardson(&dw, 4.5, 5);
    for (n, e) in levels.iter().enumerate() {
        assert!((e - 0.01 * (n as f64 + 0.5)).abs() < 1e-7, "n={n}: {e}");
    }
}

fn random_hermitian(n: usize, seed: u64) -> CMat {
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let raw = Mat::from_fn(n, n, |_, _| c64::new(next(), next()));
    Mat::from_fn(n, n, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5)
}

#[test]
fn expm_matches_eigendecomposition() {
    let h = random_hermitian(3, 7);
    let eig = eigendecompose(h.as_ref()).unwrap();
    let t = 2.3;
    let u = &eig.vectors;
    let phase = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(0.0, -t * eig.values[i]).exp() } else { c64::new(0.0, 0.0) });
    let reference = u * &phase * u.adjoint();
    let arg = Mat::from_fn(3, 3, |i, j| h[(i, j)] * c64::new(0.0, -t));
    let got = expm(arg.as_ref()).unwrap();
    assert!(max_abs_diff(got.as_ref(), reference.as_ref()) < 1e-13);
}

#[test]
fn unitary_trajectory_matches_closed_form() {
    // κ = 0: ρ(t) = U ρ₀ U†, checked on a 3-level toy.
    let h = random_hermitian(3, 11);
    let (a, ad) = catwell::operators::ladder_ops(3).unwrap();
    let l = build_lindbladian(h.as_ref(), a.as_ref(), ad.as_ref(), DissipationParams::new(0.0, 0.0).unwrap()).unwrap();
    let mut rho0 = Mat::<c64>::zeros(3, 3);
    rho0[(0, 0)] = c64::new(1.0, 0.0);
    let traj = propagate(&l, rho0.as_ref(), 0.05, 200, 10).unwrap();
    let eig = eigendecompose(h.as_ref()).unwrap();
    let u = &eig.vectors;
    for (t, rho) in traj.times.iter().zip(&traj.states) {
        let phase = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(0.0, -t * eig.values[i]).exp() } else { c64::new(0.0, 0.0) });
        let ut = u * &phase * u.adjoint();
        let reference = &ut * &rho0 * ut.adjoint();
        assert!(max_abs_diff(rho.as_ref(), reference.as_ref()) < 1e-11, "t={t}");
    }
}

#[test]
fn decay_populations_follow_rate_equation() {
    // Two-level loss at zero temperature: excited population e^{−κt}.
    let h = Mat::<c64>::zeros(2, 2);
    let (a, ad) = catwell::operators::ladder_ops(2).unwrap();
    let kappa = 0.3;
    let l = build_lindbladian(h.as_ref(), a.as_ref(), ad.as_ref(), DissipationParams::new(kappa, 0.0).unwrap()).unwrap();
    let mut rho0 = Mat::<c64>::zeros(2, 2);
    rho0[(1, 1)] = c64::new(1.0, 0.0);
    let traj = propagate(&l, rho0.as_ref(), 0.1, 300, 5).unwrap();
    let pops: Vec<f64> = traj.states.iter().map(|r| r[(1, 1)].re).collect();
    for (t, p) in traj.times.iter().zip(&pops) {
        assert!((p - (-kappa * t).exp()).abs() < 1e-12);
    }
    let fit = fit_exponential(&traj.times, &pops).unwrap();
    assert!((fit.t_x - 1.0 / kappa).abs() < 1e-6 / kappa);
}

#[test]
fn grid_reproduces_oscillator_ground_state() {
    // ψ₀(x) = (π c²)^{−1/4} exp(−x²/(2c²)) for the Fock vacuum at scale c.
    let c = 0.4;
    let grid = build_position_grid(60, c, -4.0, 4.0, 801).unwrap();
    let mut coeffs = Mat::<c64>::zeros(60, 1);
    coeffs[(0, 0)] = c64::new(1.0, 0.0);
    let psi = grid.evaluate(coeffs.as_ref()).unwrap();
    let norm = (std::f64::consts::PI * c * c).powf(-0.25);
    for (k, &x) in grid.points.iter().enumerate() {
        let exact = norm * (-x * x / (2.0 * c * c)).exp();
        assert!((psi[(k, 0)].re - exact).abs() < 1e-12, "x={x}");
    }
    let col: Vec<c64> = (0..grid.points.len()).map(|k| psi[(k, 0)]).collect();
    assert!((grid.side_probability(&col, 0.0, HalfLine::Left) - 0.5).abs() < 1e-12);
}
