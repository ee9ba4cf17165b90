//! Truncated Fock-space operators and the two model Hamiltonians.
//!
//! Position and momentum use the oscillator basis with length scale `c`:
//! `x = c/√2 (a + a†)`, `p = (a - a†) / (i√2 c)`, in atomic units (ħ = 1).

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, dagger, scale, truncate, CMat, ZERO};

/// Device Hamiltonian parameters: `H = Δa†a − K a†²a² + ε₂(a² + a†²) + ε₁(a + a†)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrCatParams {
    pub delta: f64,
    pub kerr: f64,
    pub eps1: f64,
    pub eps2: f64,
}

/// Quartic reaction-coordinate model `p²/2m + k₄x⁴ − k₂x² + k₁x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellParams {
    pub k4: f64,
    pub k2: f64,
    pub k1: f64,
    pub mass: f64,
}

pub const PROTON_MASS: f64 = 1836.0;

impl DoubleWellParams {
    pub fn new(k4: f64, k2: f64, k1: f64, mass: f64) -> Result<Self> {
        let p = Self { k4, k2, k1, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value, reason: "must be positive and finite" })
            }
        };
        check("k4", self.k4)?;
        check("k2", self.k2)?;
        check("mass", self.mass)?;
        if !self.k1.is_finite() {
            return Err(Error::InvalidParameter { name: "k1", value: self.k1, reason: "must be finite" });
        }
        Ok(())
    }

    pub fn potential(&self, x: f64) -> f64 {
        let x2 = x * x;
        self.k4 * x2 * x2 - self.k2 * x2 + self.k1 * x
    }

    /// Mirror image `x → −x`.
    pub fn mirrored(&self) -> Self {
        Self { k1: -self.k1, ..*self }
    }
}

/// Truncated ladder, position and momentum matrices.
#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub dim: usize,
    pub c: f64,
    pub a: CMat,
    pub a_dag: CMat,
    pub x: CMat,
    pub p: CMat,
}

/// Annihilation and creation operators truncated to `dim` levels.
pub fn ladder_ops(dim: usize) -> Result<(CMat, CMat)> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim, reason: "Fock truncation needs at least 2 levels" });
    }
    let a = Mat::from_fn(dim, dim, |i, j| if j == i + 1 { c64::new((j as f64).sqrt(), 0.0) } else { ZERO });
    let a_dag = dagger(a.as_ref());
    Ok((a, a_dag))
}

impl FockOperatorSet {
    pub fn new(dim: usize, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter { name: "c", value: c, reason: "mapping scale must be positive" });
        }
        let (a, a_dag) = ladder_ops(dim)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = scale((&a + &a_dag).as_ref(), c64::new(c * s, 0.0));
        // 1/(i√2 c) = −i/(√2 c)
        let p = scale((&a - &a_dag).as_ref(), c64::new(0.0, -s / c));
        Ok(Self { dim, c, a, a_dag, x, p })
    }
}

fn check_dim(ops: &FockOperatorSet) -> Result<()> {
    let ok = [&ops.a, &ops.a_dag, &ops.x, &ops.p]
        .iter()
        .all(|m| m.nrows() == ops.dim && m.ncols() == ops.dim);
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("operator set does not match dim = {}", ops.dim)))
    }
}

fn hermitize(h: CMat) -> CMat {
    let n = h.nrows();
    Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5)
}

fn lincomb(n: usize, terms: &[(f64, &CMat)]) -> CMat {
    Mat::from_fn(n, n, |i, j| terms.iter().map(|(c, m)| m[(i, j)] * *c).sum())
}

pub fn build_kerr_cat_hamiltonian(params: &KerrCatParams, ops: &FockOperatorSet) -> Result<CMat> {
    check_dim(ops)?;
    let (a, ad) = (&ops.a, &ops.a_dag);
    let n_op = ad * a;
    let a2 = a * a;
    let ad2 = ad * ad;
    let kerr_term = &ad2 * &a2;
    let h = lincomb(
        ops.dim,
        &[
            (params.delta, &n_op),
            (-params.kerr, &kerr_term),
            (params.eps2, &a2),
            (params.eps2, &ad2),
            (params.eps1, a),
            (params.eps1, ad),
        ],
    );
    Ok(hermitize(h))
}

pub fn build_double_well_hamiltonian(dw: &DoubleWellParams, ops: &FockOperatorSet) -> Result<CMat> {
    check_dim(ops)?;
    let (x, p) = (&ops.x, &ops.p);
    let x2 = x * x;
    let x4 = &x2 * &x2;
    let p2 = p * p;
    let h = lincomb(
        ops.dim,
        &[(0.5 / dw.mass, &p2), (dw.k4, &x4), (-dw.k2, &x2), (dw.k1, x)],
    );
    Ok(hermitize(h))
}

/// Constant dropped when `−H_KC` is rewritten in terms of `x` and `p`.
pub fn kc_xp_offset(params: &KerrCatParams) -> f64 {
    0.5 * params.delta + 0.75 * params.kerr
}

/// `−H_KC` assembled from position and momentum, without its constant term.
///
/// With `X = x/c` and `P = c p`:
/// `K/4 (X⁴ + P⁴ + X²P² + P²X²) − (K + Δ/2 + ε₂) X² − (K + Δ/2 − ε₂) P² − √2 ε₁ X`.
/// Products are formed in a basis padded by four levels and then truncated, so the
/// result is the exact restriction of the untruncated operator and matches
/// `−build_kerr_cat_hamiltonian − kc_xp_offset` to round-off.
pub fn build_kc_xp_form(params: &KerrCatParams, ops: &FockOperatorSet) -> Result<CMat> {
    check_dim(ops)?;
    let c = ops.c;
    let big = FockOperatorSet::new(ops.dim + 4, c)?;
    let xs = scale(big.x.as_ref(), c64::new(1.0 / c, 0.0));
    let ps = scale(big.p.as_ref(), c64::new(c, 0.0));
    let x2 = &xs * &xs;
    let p2 = &ps * &ps;
    let k = params.kerr;
    let quad_x = -k - 0.5 * params.delta - params.eps2;
    let quad_p = -k - 0.5 * params.delta + params.eps2;
    let lin = -std::f64::consts::SQRT_2 * params.eps1;
    let n = big.dim;
    let mut h = lincomb(n, &[(quad_x, &x2), (quad_p, &p2), (lin, &xs)]);
    if k != 0.0 {
        let x4 = &x2 * &x2;
        let p4 = &p2 * &p2;
        let x2p2 = &x2 * &p2;
        let p2x2 = &p2 * &x2;
        h = &h + lincomb(n, &[(0.25 * k, &x4), (0.25 * k, &p4), (0.25 * k, &x2p2), (0.25 * k, &p2x2)]);
    }
    Ok(hermitize(truncate(h.as_ref(), ops.dim)))
}
