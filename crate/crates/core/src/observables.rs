//! Region projectors, populations, exponential rate fits and device sweeps.

use faer::{Mat, MatRef};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_lindbladian, spectral_timescale, DissipationParams};
use crate::error::{Error, Result};
use crate::linalg::{c64, trace_product, CMat};
use crate::operators::{build_kerr_cat_hamiltonian, FockOperatorSet, KerrCatParams};
use crate::spectra::{eigendecompose, reduce_subspace, HalfLine, PositionGrid};

/// `Θ = ∫_{side} |x⟩⟨x| dx` in a given basis.
#[derive(Debug, Clone)]
pub struct RegionProjector {
    pub matrix: CMat,
    pub x_cut: f64,
    pub side: HalfLine,
}

/// Projector onto one side of `x_cut` in the basis whose functions on the grid
/// are the columns of `phi` (`n_points x M`).
pub fn heaviside_projector(grid: &PositionGrid, phi: MatRef<'_, c64>, x_cut: f64, side: HalfLine) -> Result<RegionProjector> {
    if phi.nrows() != grid.points.len() {
        return Err(Error::DimensionMismatch(format!("{} basis rows for {} grid points", phi.nrows(), grid.points.len())));
    }
    let w = grid.side_weights(x_cut, side);
    let weighted = Mat::from_fn(phi.nrows(), phi.ncols(), |j, k| phi[(j, k)] * w[j]);
    let theta = phi.adjoint() * &weighted;
    let m = theta.nrows();
    let matrix = Mat::from_fn(m, m, |i, j| (theta[(i, j)] + theta[(j, i)].conj()) * 0.5);
    Ok(RegionProjector { matrix, x_cut, side })
}

/// `Re Tr(ρ Θ)`.
pub fn population(rho: MatRef<'_, c64>, projector: &RegionProjector) -> f64 {
    trace_product(rho, projector.matrix.as_ref()).re
}

/// `Re Tr(ρ ρ₀)`.
pub fn overlap(rho: MatRef<'_, c64>, rho0: MatRef<'_, c64>) -> f64 {
    trace_product(rho, rho0).re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub t_x: f64,
    pub sigma: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub residual_norm: f64,
}

/// Best `(C, A)` for fixed `T`, with the residual sum of squares.
fn linear_fit(times: &[f64], values: &[f64], t: f64) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let (mut se, mut see, mut sv, mut sev) = (0.0, 0.0, 0.0, 0.0);
    for (&ti, &vi) in times.iter().zip(values) {
        let e = (-ti / t).exp();
        se += e;
        see += e * e;
        sv += vi;
        sev += e * vi;
    }
    let det = n * see - se * se;
    let (c, a) = if det.abs() < 1e-300 {
        (sv / n, 0.0)
    } else {
        ((see * sv - se * sev) / det, (n * sev - se * sv) / det)
    };
    let rss = times.iter().zip(values).map(|(&ti, &vi)| (vi - c - a * (-ti / t).exp()).powi(2)).sum();
    (c, a, rss)
}

/// Fit `v(t) = C + A e^{−t/T}`.
///
/// `T` is optimized over `log T` with a coarse scan followed by golden-section
/// refinement; `A` and `C` are solved in closed form at each `T`. The reported
/// `sigma` comes from the linearized covariance `s² (JᵀJ)⁻¹`.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<RateResult> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch(format!("{} times vs {} values", times.len(), values.len())));
    }
    let n = times.len();
    if n < 4 {
        return Err(Error::FitFailure(format!("{n} samples are too few for a three-parameter fit")));
    }
    if n < 10 {
        log::warn!("exponential fit on only {n} samples");
    }
    let t0 = times[0];
    let shifted: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let span = shifted[n - 1];
    let dt_min = shifted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if !(span > 0.0 && dt_min > 0.0) {
        return Err(Error::FitFailure("times must be strictly increasing".into()));
    }
    let (lo, hi) = ((0.1 * dt_min).ln(), (100.0 * span).ln());
    let objective = |lt: f64| linear_fit(&shifted, values, lt.exp()).2;
    let n_scan = 400;
    let grid: Vec<f64> = (0..=n_scan).map(|k| lo + (hi - lo) * k as f64 / n_scan as f64).collect();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(k, &lt)| (k, objective(lt)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if best == 0 || best == n_scan {
        return Err(Error::FitFailure(format!("optimal time constant lies at the scan boundary ({:e})", grid[best].exp())));
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = objective(x2);
        }
    }
    let t = (0.5 * (a + b)).exp();
    let (c, amp, rss) = linear_fit(&shifted, values, t);
    // Decay direction: a rising or falling approach to C is fine, but the
    // exponential must actually carry signal.
    let spread = values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - values.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(amp.abs() > 1e-12 * spread.max(1e-300)) || spread == 0.0 {
        return Err(Error::FitFailure("data show no decay".into()));
    }
    // Jacobian columns for (C, A, T).
    let mut jtj = [[0.0f64; 3]; 3];
    for &ti in &shifted {
        let e = (-ti / t).exp();
        let row = [1.0, e, amp * ti / (t * t) * e];
        for i in 0..3 {
            for j in 0..3 {
                jtj[i][j] += row[i] * row[j];
            }
        }
    }
    let sigma = if n > 3 {
        let s2 = rss / (n - 3) as f64;
        let m = Mat::from_fn(3, 3, |i, j| jtj[i][j]);
        let e = Mat::<f64>::from_fn(3, 1, |i, _| if i == 2 { 1.0 } else { 0.0 });
        use faer::linalg::solvers::Solve;
        let col = m.partial_piv_lu().solve(&e);
        let var = s2 * col[(2, 0)];
        if var.is_finite() && var >= 0.0 {
            var.sqrt()
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    Ok(RateResult { t_x: t, sigma, amplitude: amp, offset: c, residual_norm: rss.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dim: usize,
    pub m: usize,
    pub delta: f64,
    pub kerr: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { dim: 40, m: 20, delta: 0.0, kerr: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub eps1: f64,
    pub eps2: f64,
    pub t_x: Option<f64>,
    pub error: Option<String>,
}

/// Spectral `T_X` of the driven oscillator for one `(ε₁, ε₂)` pair.
pub fn device_timescale(eps1: f64, eps2: f64, diss: DissipationParams, cfg: &SweepConfig) -> Result<f64> {
    let ops = FockOperatorSet::new(cfg.dim, 1.0)?;
    let kc = KerrCatParams { delta: cfg.delta, kerr: cfg.kerr, eps1, eps2 };
    let h = build_kerr_cat_hamiltonian(&kc, &ops)?;
    // Work with −H_KC so the double well is a potential minimum; real parts of
    // the Liouvillian spectrum do not depend on this sign.
    let neg = Mat::from_fn(cfg.dim, cfg.dim, |i, j| -h[(i, j)]);
    let eig = eigendecompose(neg.as_ref())?;
    let red = reduce_subspace(&eig, &ops, cfg.m)?;
    let l = build_lindbladian(red.h.as_ref(), red.a.as_ref(), red.a_dag.as_ref(), diss)?;
    Ok(spectral_timescale(&l, None)?.t_x)
}

/// Row-major over `eps2` then `eps1`. Failed cells are kept with their error.
pub fn sweep_device_grid(eps1: &[f64], eps2: &[f64], diss: DissipationParams, cfg: &SweepConfig) -> Vec<SweepCell> {
    let cells: Vec<(f64, f64)> = eps2.iter().flat_map(|&e2| eps1.iter().map(move |&e1| (e1, e2))).collect();
    sweep_cells(&cells, diss, cfg)
}

pub fn sweep_cells(cells: &[(f64, f64)], diss: DissipationParams, cfg: &SweepConfig) -> Vec<SweepCell> {
    cells
        .par_iter()
        .map(|&(e1, e2)| match device_timescale(e1, e2, diss, cfg) {
            Ok(t) => SweepCell { eps1: e1, eps2: e2, t_x: Some(t), error: None },
            Err(e) => SweepCell { eps1: e1, eps2: e2, t_x: None, error: Some(e.to_string()) },
        })
        .collect()
}
