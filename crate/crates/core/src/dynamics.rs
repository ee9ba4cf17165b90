//! Vectorized Lindblad generator, propagation, and the spectral relaxation time.
//!
//! Density matrices are column-stacked, so `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{c64, conj, dagger, hermiticity_error, identity, is_finite, kron, matpow, matvec, max_abs, max_abs_diff, scale, trace, transpose, unvectorize, vectorize, CMat, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    pub kappa: f64,
    pub n_th: f64,
}

impl DissipationParams {
    pub fn new(kappa: f64, n_th: f64) -> Result<Self> {
        let d = Self { kappa, n_th };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter { name: "kappa", value: self.kappa, reason: "must be non-negative" });
        }
        if !(self.n_th >= 0.0 && self.n_th.is_finite()) {
            return Err(Error::InvalidParameter { name: "n_th", value: self.n_th, reason: "must be non-negative" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LindbladSuperoperator {
    /// `M² x M²` generator.
    pub matrix: CMat,
    /// Hilbert-space dimension `M`.
    pub dim: usize,
    pub diss: DissipationParams,
}

fn check_square(name: &str, m: MatRef<'_, c64>, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// `−i(I⊗H − Hᵀ⊗I)`.
fn commutator_block(h: MatRef<'_, c64>) -> CMat {
    let id = identity(h.nrows());
    let ht = transpose(h);
    scale((kron(id.as_ref(), h) - kron(ht.as_ref(), id.as_ref())).as_ref(), -I)
}

/// `2 Bᵀ⊗A − I⊗(BA) − (BA)ᵀ⊗I`, the vectorized form of `[Aρ, B] + [A, ρB]`.
fn double_commutator(a: &CMat, b: &CMat) -> CMat {
    let id = identity(a.nrows());
    let ba = b * a;
    let two = c64::new(2.0, 0.0);
    scale(kron(transpose(b.as_ref()).as_ref(), a.as_ref()).as_ref(), two)
        - kron(id.as_ref(), ba.as_ref())
        - kron(transpose(ba.as_ref()).as_ref(), id.as_ref())
}

/// Ladder-operator Lindbladian with loss `κ(1 + n_th)` and gain `κ n_th`.
pub fn build_lindbladian(h: MatRef<'_, c64>, a: MatRef<'_, c64>, a_dag: MatRef<'_, c64>, diss: DissipationParams) -> Result<LindbladSuperoperator> {
    diss.validate()?;
    let n = h.nrows();
    check_square("H", h, n)?;
    check_square("a", a, n)?;
    check_square("a_dag", a_dag, n)?;
    let tol = 1e-10 * max_abs(a).max(1.0);
    if max_abs_diff(a_dag, dagger(a).as_ref()) > tol {
        return Err(Error::DimensionMismatch("a_dag is not the adjoint of a".into()));
    }
    let a = a.to_owned();
    let ad = a_dag.to_owned();
    let id = identity(n);
    let mut l = commutator_block(h);
    let half = c64::new(0.5, 0.0);
    let jump = |j: &CMat, jd: &CMat| -> CMat {
        let jdj = jd * j;
        kron(conj(j.as_ref()).as_ref(), j.as_ref())
            - scale((kron(id.as_ref(), jdj.as_ref()) + kron(transpose(jdj.as_ref()).as_ref(), id.as_ref())).as_ref(), half)
    };
    if diss.kappa > 0.0 {
        l += scale(jump(&a, &ad).as_ref(), c64::new(diss.kappa * (1.0 + diss.n_th), 0.0));
        if diss.n_th > 0.0 {
            l += scale(jump(&ad, &a).as_ref(), c64::new(diss.kappa * diss.n_th, 0.0));
        }
    }
    Ok(LindbladSuperoperator { matrix: l, dim: n, diss })
}

/// The same generator written with `x`, `p` and the mapping scale `c`.
///
/// The dissipator is `κ(1+2n_th)/4 [c⁻²D(x,x) + c²D(p,p)] − iκ/4 [D(x,p) − D(p,x)]`
/// where `D(A,B) = [Aρ,B] + [A,ρB]`.
pub fn build_lindbladian_xp(h: MatRef<'_, c64>, x: MatRef<'_, c64>, p: MatRef<'_, c64>, c: f64, diss: DissipationParams) -> Result<LindbladSuperoperator> {
    diss.validate()?;
    if !(c > 0.0) {
        return Err(Error::InvalidParameter { name: "c", value: c, reason: "must be positive" });
    }
    let n = h.nrows();
    check_square("H", h, n)?;
    check_square("x", x, n)?;
    check_square("p", p, n)?;
    let x = x.to_owned();
    let p = p.to_owned();
    let mut l = commutator_block(h);
    if diss.kappa > 0.0 {
        let sym = diss.kappa * (1.0 + 2.0 * diss.n_th) / 4.0;
        l += scale(double_commutator(&x, &x).as_ref(), c64::new(sym / (c * c), 0.0));
        l += scale(double_commutator(&p, &p).as_ref(), c64::new(sym * c * c, 0.0));
        let cross = double_commutator(&x, &p) - double_commutator(&p, &x);
        l += scale(cross.as_ref(), c64::new(0.0, -diss.kappa / 4.0));
    }
    Ok(LindbladSuperoperator { matrix: l, dim: n, diss })
}

impl LindbladSuperoperator {
    /// Action on a density matrix.
    pub fn apply(&self, rho: MatRef<'_, c64>) -> CMat {
        let v = vectorize(rho);
        let mut out = vec![ZERO; v.len()];
        matvec(self.matrix.as_ref(), &v, &mut out);
        unvectorize(&out, self.dim)
    }

    /// `max |vec(I)† L|`; zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let m = self.dim;
        let l = &self.matrix;
        (0..m * m)
            .map(|col| (0..m).map(|i| l[(i + i * m, col)]).sum::<c64>().norm())
            .fold(0.0, f64::max)
    }

    /// Real matrix of the generator in an orthonormal Hermitian-matrix basis.
    ///
    /// Basis order: `E_ii`, then for `i < j` the pair `(E_ij + E_ji)/√2`,
    /// `i(E_ij − E_ji)/√2`. The generator maps Hermitian matrices to Hermitian
    /// matrices, so this is a real matrix with the same spectrum.
    pub fn real_representation(&self) -> Mat<f64> {
        let m = self.dim;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // Each basis element as a list of (vec index, coefficient).
        let mut basis: Vec<Vec<(usize, c64)>> = Vec::with_capacity(m * m);
        for i in 0..m {
            basis.push(vec![(i + i * m, ONE)]);
        }
        for j in 0..m {
            for i in 0..j {
                basis.push(vec![(i + j * m, c64::new(s, 0.0)), (j + i * m, c64::new(s, 0.0))]);
                basis.push(vec![(i + j * m, c64::new(0.0, s)), (j + i * m, c64::new(0.0, -s))]);
            }
        }
        let l = &self.matrix;
        let n = m * m;
        let mut r = Mat::<f64>::zeros(n, n);
        let mut col = vec![ZERO; n];
        for (beta, bb) in basis.iter().enumerate() {
            col.iter_mut().for_each(|c| *c = ZERO);
            for &(k, coef) in bb {
                for (row, c) in col.iter_mut().enumerate() {
                    *c += l[(row, k)] * coef;
                }
            }
            // ⟨B_α, Y⟩ = Σ conj(B_α[k]) Y[k]
            for (alpha, ba) in basis.iter().enumerate() {
                let v: c64 = ba.iter().map(|&(k, coef)| coef.conj() * col[k]).sum();
                r[(alpha, beta)] = v.re;
            }
        }
        r
    }

    pub fn eigenvalues(&self) -> Result<Vec<c64>> {
        self.real_representation().eigenvalues().map_err(|e| Error::Solver(format!("{e:?}")))
    }

    /// Stationary state with unit trace.
    pub fn steady_state(&self) -> Result<CMat> {
        let m = self.dim;
        let n = m * m;
        let mut a = self.matrix.clone();
        for k in 0..n {
            a[(0, k)] = ZERO;
        }
        for i in 0..m {
            a[(0, i + i * m)] = ONE;
        }
        let mut b = Mat::<c64>::zeros(n, 1);
        b[(0, 0)] = ONE;
        let x = a.partial_piv_lu().solve(&b);
        if !is_finite(x.as_ref()) {
            return Err(Error::Numerical("singular system for the steady state".into()));
        }
        let v: Vec<c64> = (0..n).map(|k| x[(k, 0)]).collect();
        let rho = unvectorize(&v, m);
        Ok(Mat::from_fn(m, m, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * 0.5))
    }
}

pub fn build_from_reduced(red: &crate::spectra::ReducedOperatorSet, diss: DissipationParams) -> Result<LindbladSuperoperator> {
    build_lindbladian(red.h.as_ref(), red.a.as_ref(), red.a_dag.as_ref(), diss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTimescale {
    pub t_x: f64,
    pub eigenvalue: c64,
}

/// Slowest non-zero decay: among eigenvalues with `Re λ < −zero_tol`, the one
/// closest to zero, returned as `−1/Re λ`.
///
/// `zero_tol` defaults to `1e-10 · max |Re λ|`.
pub fn spectral_timescale_from(eigs: &[c64], zero_tol: Option<f64>) -> Result<SpectralTimescale> {
    let scale = eigs.iter().map(|e| e.re.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::UndefinedTimescale("generator has no decaying modes".into()));
    }
    let tol = zero_tol.unwrap_or(1e-10 * scale);
    eigs.iter()
        .filter(|e| e.re < -tol)
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .map(|&e| SpectralTimescale { t_x: -1.0 / e.re, eigenvalue: e })
        .ok_or_else(|| Error::UndefinedTimescale(format!("no eigenvalue with Re < -{tol:e}")))
}

pub fn spectral_timescale(l: &LindbladSuperoperator, zero_tol: Option<f64>) -> Result<SpectralTimescale> {
    spectral_timescale_from(&l.eigenvalues()?, zero_tol)
}

/// `exp(Lτ)` and its `stride`-th power.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub tau: f64,
    pub stride: usize,
    pub step: CMat,
    pub record_step: CMat,
    pub dim: usize,
}

impl Propagator {
    pub fn new(l: &LindbladSuperoperator, tau: f64, stride: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter { name: "tau", value: tau, reason: "must be positive" });
        }
        if stride == 0 {
            return Err(Error::InvalidParameter { name: "stride", value: 0.0, reason: "must be at least 1" });
        }
        let step = expm(scale(l.matrix.as_ref(), c64::new(tau, 0.0)).as_ref())?;
        let record_step = matpow(step.as_ref(), stride);
        if !is_finite(record_step.as_ref()) {
            return Err(Error::Numerical("propagator power is not finite".into()));
        }
        Ok(Self { tau, stride, step, record_step, dim: l.dim })
    }
}

/// Evolve `rho0` for `n_steps` steps of size `tau`, calling `record(t, ρ)` at
/// step 0 and after every `stride` steps (the last partial block is skipped).
pub fn propagate_with<F>(l: &LindbladSuperoperator, rho0: MatRef<'_, c64>, tau: f64, n_steps: usize, stride: usize, mut record: F) -> Result<()>
where
    F: FnMut(f64, &CMat),
{
    check_square("rho0", rho0, l.dim)?;
    let prop = Propagator::new(l, tau, stride)?;
    let mut v = vectorize(rho0);
    let mut next = vec![ZERO; v.len()];
    record(0.0, &rho0.to_owned());
    for k in 1..=n_steps / stride {
        matvec(prop.record_step.as_ref(), &v, &mut next);
        std::mem::swap(&mut v, &mut next);
        if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical(format!("state became non-finite at record {k}")));
        }
        record((k * stride) as f64 * tau, &unvectorize(&v, l.dim));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tau: f64,
    pub stride: usize,
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
}

impl Trajectory {
    pub fn max_trace_error(&self) -> f64 {
        self.states.iter().map(|r| (trace(r.as_ref()) - ONE).norm()).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_drift(&self) -> f64 {
        self.states.iter().map(|r| hermiticity_error(r.as_ref())).fold(0.0, f64::max)
    }

    /// Most negative eigenvalue seen along the trajectory.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut lo = f64::INFINITY;
        for r in &self.states {
            let h = Mat::from_fn(r.nrows(), r.ncols(), |i, j| (r[(i, j)] + r[(j, i)].conj()) * 0.5);
            let ev = crate::spectra::eigenvalues(h.as_ref())?;
            lo = lo.min(ev[0]);
        }
        Ok(lo)
    }
}

pub fn propagate(l: &LindbladSuperoperator, rho0: MatRef<'_, c64>, tau: f64, n_steps: usize, stride: usize) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    propagate_with(l, rho0, tau, n_steps, stride, |t, r| {
        times.push(t);
        states.push(r.clone());
    })?;
    Ok(Trajectory { tau, stride, times, states })
}
