//! Eigendecomposition, eigenbasis reduction, and the position-grid picture of
//! Fock-basis states.

use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, dagger, from_real_diag, hermiticity_error, max_abs, CMat, ZERO};
use crate::operators::{DoubleWellParams, FockOperatorSet};

/// Ascending eigenvalues with eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn check_hermitian(h: MatRef<'_, c64>) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", h.nrows(), h.ncols())));
    }
    let err = hermiticity_error(h);
    if err > 1e-10 * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(h: MatRef<'_, c64>) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    h.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Solver(format!("{e:?}")))
}

/// Full eigendecomposition. Each eigenvector is rotated so its largest-magnitude
/// component is real and positive.
pub fn eigendecompose(h: MatRef<'_, c64>) -> Result<EigenSystem> {
    check_hermitian(h)?;
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Solver(format!("{e:?}")))?;
    let n = h.nrows();
    let values: Vec<f64> = (0..n).map(|i| evd.S()[i].re).collect();
    let u = evd.U();
    let mut vectors = u.to_owned();
    for j in 0..n {
        let mut best = ZERO;
        for i in 0..n {
            if u[(i, j)].norm() > best.norm() * (1.0 + 1e-12) {
                best = u[(i, j)];
            }
        }
        if best.norm() > 0.0 {
            let phase = best.conj() / best.norm();
            for i in 0..n {
                vectors[(i, j)] = u[(i, j)] * phase;
            }
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Within clusters of eigenvalues closer than `tol`, order states by `⟨x⟩`.
pub fn order_degenerate_by_position(eig: &mut EigenSystem, x: MatRef<'_, c64>, tol: f64) {
    let n = eig.dim();
    let mean_x = |v: &CMat, j: usize| -> f64 {
        let col = v.col(j);
        let xv = x * col;
        (0..n).map(|i| (col[i].conj() * xv[i]).re).sum()
    };
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end] - eig.values[end - 1] < tol {
            end += 1;
        }
        if end - start > 1 {
            let mut idx: Vec<(f64, usize)> = (start..end).map(|j| (mean_x(&eig.vectors, j), j)).collect();
            idx.sort_by(|a, b| a.0.total_cmp(&b.0));
            let old = eig.vectors.clone();
            let old_vals = eig.values.clone();
            for (k, (_, j)) in idx.into_iter().enumerate() {
                eig.vectors.col_mut(start + k).copy_from(old.col(j));
                eig.values[start + k] = old_vals[j];
            }
        }
        start = end;
    }
}

/// Uniform grid with trapezoid weights and oscillator eigenfunctions `ψₙ(xⱼ)`.
#[derive(Debug, Clone)]
pub struct PositionGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `n_points x dim`, entry `(j, n)` is `ψₙ(xⱼ)`.
    pub basis: Mat<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, n_points: 2001 }
    }
}

pub fn build_position_grid(dim: usize, c: f64, x_min: f64, x_max: f64, n_points: usize) -> Result<PositionGrid> {
    if n_points < 2 {
        return Err(Error::InvalidParameter { name: "n_points", value: n_points as f64, reason: "need at least 2 grid points" });
    }
    if !(x_max > x_min) {
        return Err(Error::InvalidParameter { name: "x_max", value: x_max, reason: "must exceed x_min" });
    }
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "basis needs at least one function" });
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter { name: "c", value: c, reason: "must be positive" });
    }
    let h = (x_max - x_min) / (n_points - 1) as f64;
    let points: Vec<f64> = (0..n_points).map(|j| x_min + h * j as f64).collect();
    let mut weights = vec![h; n_points];
    weights[0] *= 0.5;
    weights[n_points - 1] *= 0.5;

    let log_norm = -0.25 * std::f64::consts::PI.ln() - 0.5 * c.ln();
    let rescale = 1e150f64;
    let rescale_ln = rescale.ln();
    let mut basis = Mat::<f64>::zeros(n_points, dim);
    for (j, &x) in points.iter().enumerate() {
        let xi = x / c;
        // Mantissa recurrence with a running log scale keeps far-tail values finite.
        let mut log_scale = log_norm - 0.5 * xi * xi;
        let (mut prev, mut cur) = (0.0f64, 1.0f64);
        for n in 0..dim {
            let v = cur.abs().ln() + log_scale;
            basis[(j, n)] = if cur == 0.0 || v < -745.0 { 0.0 } else { cur.signum() * v.exp() };
            let nf = n as f64;
            let next = (2.0 / (nf + 1.0)).sqrt() * xi * cur - (nf / (nf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
            if cur.abs() > rescale {
                cur /= rescale;
                prev /= rescale;
                log_scale += rescale_ln;
            }
        }
    }
    Ok(PositionGrid { points, weights, basis, c })
}

pub fn build_grid(dim: usize, c: f64, spec: &GridSpec) -> Result<PositionGrid> {
    build_position_grid(dim, c, spec.x_min, spec.x_max, spec.n_points)
}

impl PositionGrid {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Wavefunctions on the grid for the columns of `coeffs` (Fock coefficients).
    pub fn evaluate(&self, coeffs: MatRef<'_, c64>) -> Result<CMat> {
        if coeffs.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "coefficients have {} rows, grid basis has {} functions",
                coeffs.nrows(),
                self.dim()
            )));
        }
        let b = Mat::from_fn(self.basis.nrows(), self.dim(), |i, j| c64::new(self.basis[(i, j)], 0.0));
        Ok(&b * coeffs)
    }

    /// Fock coefficients of a grid wavefunction, by quadrature.
    pub fn project(&self, psi: &[c64]) -> Result<Vec<c64>> {
        if psi.len() != self.points.len() {
            return Err(Error::DimensionMismatch(format!("{} values for {} grid points", psi.len(), self.points.len())));
        }
        Ok((0..self.dim())
            .map(|n| (0..psi.len()).map(|j| psi[j] * (self.weights[j] * self.basis[(j, n)])).sum())
            .collect())
    }

    pub fn norm_sqr(&self, psi: &[c64]) -> f64 {
        psi.iter().zip(&self.weights).map(|(p, w)| w * p.norm_sqr()).sum()
    }

    /// Quadrature weights restricted to one side of `x_cut`; a point exactly on
    /// the cut contributes half its weight to each side.
    pub fn side_weights(&self, x_cut: f64, side: HalfLine) -> Vec<f64> {
        let h = if self.points.len() > 1 { self.points[1] - self.points[0] } else { 1.0 };
        let eps = 1e-9 * h;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| {
                let d = x - x_cut;
                let inside = match side {
                    HalfLine::Left => -d,
                    HalfLine::Right => d,
                };
                if d.abs() <= eps {
                    0.5 * w
                } else if inside > 0.0 {
                    w
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Grid probability of `psi` on one side of `x_cut`.
    pub fn side_probability(&self, psi: &[c64], x_cut: f64, side: HalfLine) -> f64 {
        self.side_weights(x_cut, side).iter().zip(psi).map(|(w, p)| w * p.norm_sqr()).sum()
    }
}

/// Half-line selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfLine {
    Left,
    Right,
}

impl HalfLine {
    pub fn opposite(self) -> Self {
        match self {
            HalfLine::Left => HalfLine::Right,
            HalfLine::Right => HalfLine::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HalfLine::Left => "left",
            HalfLine::Right => "right",
        }
    }
}

/// Operators expressed in the lowest-`M` eigenbasis.
#[derive(Debug, Clone)]
pub struct ReducedOperatorSet {
    pub m: usize,
    /// `dim x M` slab of eigenvectors.
    pub d: CMat,
    pub energies: Vec<f64>,
    pub h: CMat,
    pub a: CMat,
    pub a_dag: CMat,
    pub x: CMat,
    pub p: CMat,
}

pub fn reduce_subspace(eig: &EigenSystem, ops: &FockOperatorSet, m: usize) -> Result<ReducedOperatorSet> {
    if m == 0 || m > eig.dim() {
        return Err(Error::InvalidDimension { dim: m, reason: "subspace size must be in 1..=dim" });
    }
    if eig.dim() != ops.dim {
        return Err(Error::DimensionMismatch(format!("eigensystem dim {} vs operator dim {}", eig.dim(), ops.dim)));
    }
    let d = eig.vectors.submatrix(0, 0, eig.dim(), m).to_owned();
    let dd = dagger(d.as_ref());
    let sandwich = |op: &CMat| -> CMat { &dd * (op * &d) };
    let energies = eig.values[..m].to_vec();
    Ok(ReducedOperatorSet {
        m,
        h: from_real_diag(&energies),
        a: sandwich(&ops.a),
        a_dag: sandwich(&ops.a_dag),
        x: sandwich(&ops.x),
        p: sandwich(&ops.p),
        energies,
        d,
    })
}

/// Per-level `|ΔE|` after subtracting each spectrum's ground energy.
pub fn compare_eigenvalues(ea: &[f64], eb: &[f64], n_levels: usize) -> Vec<f64> {
    let n = n_levels.min(ea.len()).min(eb.len());
    (0..n).map(|i| ((ea[i] - ea[0]) - (eb[i] - eb[0])).abs()).collect()
}

pub fn compare_spectra(h_a: MatRef<'_, c64>, h_b: MatRef<'_, c64>, n_levels: usize) -> Result<Vec<f64>> {
    if h_a.nrows() != h_b.nrows() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", h_a.nrows(), h_b.nrows())));
    }
    Ok(compare_eigenvalues(&eigenvalues(h_a)?, &eigenvalues(h_b)?, n_levels))
}

/// Stationary points of `V(x) = k₄x⁴ − k₂x² + k₁x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierGeometry {
    pub x_left: f64,
    pub x_barrier: f64,
    pub x_right: f64,
    pub v_left: f64,
    pub v_barrier: f64,
    pub v_right: f64,
}

impl BarrierGeometry {
    /// Side of the higher-energy minimum; the left well on exact symmetry.
    pub fn higher_well(&self) -> HalfLine {
        if self.v_right > self.v_left {
            HalfLine::Right
        } else {
            HalfLine::Left
        }
    }
}

pub fn barrier_geometry(dw: &DoubleWellParams) -> Result<BarrierGeometry> {
    if !(dw.k4 > 0.0 && dw.k2 > 0.0) {
        return Err(Error::NotADoubleWell(format!("k4 = {}, k2 = {}", dw.k4, dw.k2)));
    }
    // V'(x) = 0  <=>  x³ + p x + q = 0
    let p = -dw.k2 / (2.0 * dw.k4);
    let q = dw.k1 / (4.0 * dw.k4);
    if 4.0 * p * p * p + 27.0 * q * q >= 0.0 {
        return Err(Error::NotADoubleWell(format!("tilt k1 = {} leaves a single minimum", dw.k1)));
    }
    let r = 2.0 * (-p / 3.0).sqrt();
    let phi = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0).acos() / 3.0;
    let mut roots: Vec<f64> = (0..3)
        .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
        .map(|mut x| {
            for _ in 0..3 {
                let f = x * x * x + p * x + q;
                let df = 3.0 * x * x + p;
                if df != 0.0 {
                    x -= f / df;
                }
            }
            x
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    Ok(BarrierGeometry {
        x_left: roots[0],
        x_barrier: roots[1],
        x_right: roots[2],
        v_left: dw.potential(roots[0]),
        v_barrier: dw.potential(roots[1]),
        v_right: dw.potential(roots[2]),
    })
}

/// Number of eigenvalues strictly below the barrier-top energy.
pub fn count_states_below_barrier(values: &[f64], dw: &DoubleWellParams) -> Result<usize> {
    let g = barrier_geometry(dw)?;
    Ok(values.iter().filter(|&&e| e < g.v_barrier).count())
}
