//! Reactant-localized initial states.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMat};
use crate::spectra::{EigenSystem, HalfLine, PositionGrid};

/// Smooth step `S(x) = 1/(1 + e^{−(x−x₀)/t})`, mirrored for the left side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFilter {
    pub x0: f64,
    pub tail: f64,
    pub side: HalfLine,
}

impl SigmoidFilter {
    pub fn value(&self, x: f64) -> f64 {
        let z = match self.side {
            HalfLine::Right => (x - self.x0) / self.tail,
            HalfLine::Left => (self.x0 - x) / self.tail,
        };
        // Stable logistic for large |z|.
        if z >= 0.0 {
            1.0 / (1.0 + (-z).exp())
        } else {
            let e = z.exp();
            e / (1.0 + e)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactantSelection {
    pub index: usize,
    pub probability: f64,
    /// Set when no state strictly exceeded the threshold and a state sitting on
    /// it (a parity-symmetric state at 0.5) was taken instead.
    pub tie_broken: bool,
}

const TIE_TOL: f64 = 1e-6;
const STRICT_MARGIN: f64 = 1e-9;

/// First eigenstate, among the lowest `search`, with more than `threshold`
/// grid probability on `side` of `x_cut`.
///
/// States of an exactly symmetric well all sit at one half; if nothing clears
/// the threshold, the first state within 1e-6 of it is returned with
/// `tie_broken` set.
pub fn select_reactant_eigenstate(
    eig: &EigenSystem,
    grid: &PositionGrid,
    side: HalfLine,
    x_cut: f64,
    threshold: f64,
    search: usize,
) -> Result<ReactantSelection> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidParameter { name: "threshold", value: threshold, reason: "must be in (0, 1]" });
    }
    let k = search.min(eig.dim());
    let psi = grid.evaluate(eig.vectors.submatrix(0, 0, eig.dim(), k))?;
    let w = grid.side_weights(x_cut, side);
    let mut tie = None;
    for j in 0..k {
        let prob: f64 = (0..w.len()).map(|i| w[i] * psi[(i, j)].norm_sqr()).sum();
        if prob > threshold + STRICT_MARGIN {
            return Ok(ReactantSelection { index: j, probability: prob, tie_broken: false });
        }
        if tie.is_none() && (prob - threshold).abs() <= TIE_TOL && threshold < 1.0 {
            tie = Some(ReactantSelection { index: j, probability: prob, tie_broken: true });
        }
    }
    tie.ok_or(Error::ReactantNotFound { threshold, side: side.name(), searched: k })
}

/// Multiply by the filter and renormalize on the grid.
pub fn apply_sigmoid_filter(grid: &PositionGrid, psi: &[c64], filter: &SigmoidFilter) -> Result<Vec<c64>> {
    if psi.len() != grid.points.len() {
        return Err(Error::DimensionMismatch(format!("{} values for {} grid points", psi.len(), grid.points.len())));
    }
    if !(filter.tail > 0.0) {
        return Err(Error::InvalidParameter { name: "tail", value: filter.tail, reason: "must be positive" });
    }
    if grid.norm_sqr(psi) <= 0.0 {
        return Err(Error::DegenerateFilter(0.0));
    }
    let out: Vec<c64> = psi.iter().zip(&grid.points).map(|(p, &x)| p * filter.value(x)).collect();
    let n2 = grid.norm_sqr(&out);
    if !(n2 > 1e-300) {
        return Err(Error::DegenerateFilter(n2.sqrt()));
    }
    let inv = 1.0 / n2.sqrt();
    Ok(out.into_iter().map(|v| v * inv).collect())
}

/// `|ψ⟩⟨ψ|` for normalized coefficients.
pub fn make_density(psi: &[c64]) -> CMat {
    Mat::from_fn(psi.len(), psi.len(), |i, j| psi[i] * psi[j].conj())
}

fn normalize(v: &mut [c64]) -> Result<()> {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return Err(Error::DegenerateFilter(n));
    }
    v.iter_mut().for_each(|c| *c /= n);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct InitialState {
    pub selection: ReactantSelection,
    pub filter: SigmoidFilter,
    /// Filtered, grid-normalized wavefunction.
    pub psi_grid: Vec<c64>,
    /// Coefficients in the reduced eigenbasis (normalized).
    pub coeffs: Vec<c64>,
    /// Norm retained when projecting onto the reduced eigenbasis.
    pub retained_norm: f64,
    pub rho: CMat,
}

/// Select, filter and project a reactant state onto the first `d.ncols()`
/// eigenvectors (`d` is the `dim x M` slab used for dynamics).
pub fn prepare_initial_state(
    eig: &EigenSystem,
    grid: &PositionGrid,
    d: &CMat,
    filter: &SigmoidFilter,
    threshold: f64,
) -> Result<InitialState> {
    let sel = select_reactant_eigenstate(eig, grid, filter.side, filter.x0, threshold, d.ncols())?;
    let col = eig.vectors.submatrix(0, sel.index, eig.dim(), 1);
    let psi0 = grid.evaluate(col)?;
    let psi0: Vec<c64> = (0..psi0.nrows()).map(|i| psi0[(i, 0)]).collect();
    let psi_grid = apply_sigmoid_filter(grid, &psi0, filter)?;
    let fock = grid.project(&psi_grid)?;
    let mut coeffs: Vec<c64> = (0..d.ncols())
        .map(|k| (0..d.nrows()).map(|n| d[(n, k)].conj() * fock[n]).sum())
        .collect();
    let retained_norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    normalize(&mut coeffs)?;
    let rho = make_density(&coeffs);
    Ok(InitialState { selection: sel, filter: *filter, psi_grid, coeffs, retained_norm, rho })
}
