//! Parameter maps between the double-well and Kerr-cat pictures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{build_double_well_hamiltonian, build_kerr_cat_hamiltonian, DoubleWellParams, FockOperatorSet, KerrCatParams};
use crate::spectra::{compare_eigenvalues, count_states_below_barrier, eigenvalues};

/// Chemical accuracy, in hartree.
pub const CHEMICAL_ACCURACY: f64 = 1.5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingScale {
    pub c: f64,
}

impl MappingScale {
    pub fn new(c: f64) -> Result<Self> {
        if c > 0.0 && c.is_finite() {
            Ok(Self { c })
        } else {
            Err(Error::InvalidParameter { name: "c", value: c, reason: "mapping scale must be positive" })
        }
    }
}

/// Device parameter ceilings relative to K.
///
/// The defaults are placeholders, not measured hardware limits; override them
/// for a specific device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceLimits {
    pub max_eps2_over_k: f64,
    pub max_eps1_over_k: f64,
    pub max_abs_delta_over_k: f64,
}

impl Default for DeviceLimits {
    fn default() -> Self {
        Self { max_eps2_over_k: 20.0, max_eps1_over_k: 10.0, max_abs_delta_over_k: 20.0 }
    }
}

impl DeviceLimits {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_eps2_over_k", self.max_eps2_over_k),
            ("max_eps1_over_k", self.max_eps1_over_k),
            ("max_abs_delta_over_k", self.max_abs_delta_over_k),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter { name, value: v, reason: "device limit must be positive" });
            }
        }
        Ok(())
    }

    pub fn admits(&self, kc: &KerrCatParams) -> bool {
        let k = kc.kerr;
        k > 0.0
            && (kc.eps2 / k).abs() <= self.max_eps2_over_k
            && (kc.eps1 / k).abs() <= self.max_eps1_over_k
            && (kc.delta / k).abs() <= self.max_abs_delta_over_k
    }
}

pub fn chem_to_device(dw: &DoubleWellParams, scale: MappingScale) -> KerrCatParams {
    let c = scale.c;
    let (c2, c4) = (c * c, c.powi(4));
    let m = dw.mass;
    KerrCatParams {
        kerr: 4.0 * c4 * dw.k4,
        eps2: 1.0 / (4.0 * c2 * m) + 0.5 * c2 * dw.k2,
        delta: -1.0 / (2.0 * c2 * m) + c2 * dw.k2 - 8.0 * c4 * dw.k4,
        eps1: -c * dw.k1 / std::f64::consts::SQRT_2,
    }
}

/// Inverse of [`chem_to_device`].
///
/// With `u = 1/(2c²m)` and `v = c²k₂` the ε₂ and Δ relations read
/// `ε₂ = u/2 + v/2` and `Δ + 2K = v − u`.
pub fn device_to_chem(kc: &KerrCatParams, scale: MappingScale) -> Result<DoubleWellParams> {
    let c = scale.c;
    if !(kc.kerr > 0.0) {
        return Err(Error::InfeasibleParameters(format!("K = {} must be positive for a double well", kc.kerr)));
    }
    let shifted = kc.delta + 2.0 * kc.kerr;
    let v = (2.0 * kc.eps2 + shifted) / 2.0;
    let u = (2.0 * kc.eps2 - shifted) / 2.0;
    if !(u > 0.0) {
        return Err(Error::InfeasibleParameters(format!("implied 1/(2c^2 m) = {u:e} is not positive")));
    }
    if !(v > 0.0) {
        return Err(Error::InfeasibleParameters(format!("implied c^2 k2 = {v:e} is not positive")));
    }
    let c2 = c * c;
    Ok(DoubleWellParams {
        k4: kc.kerr / (4.0 * c2 * c2),
        k2: v / c2,
        k1: -std::f64::consts::SQRT_2 * kc.eps1 / c,
        mass: 1.0 / (2.0 * c2 * u),
    })
}

/// `ħ²/(m k₂ c⁴)`; the mapping is accurate when this is much larger than one.
pub fn inequality_ratio(dw: &DoubleWellParams, scale: MappingScale) -> f64 {
    1.0 / (dw.mass * dw.k2 * scale.c.powi(4))
}

/// Minimum position and barrier height of the symmetric well `k₄x⁴ − k₂x²`.
pub fn symmetric_well_geometry(k2: f64, k4: f64) -> Result<(f64, f64)> {
    if !(k2 > 0.0) {
        return Err(Error::InvalidParameter { name: "k2", value: k2, reason: "must be positive" });
    }
    if !(k4 > 0.0) {
        return Err(Error::InvalidParameter { name: "k4", value: k4, reason: "must be positive" });
    }
    Ok(((k2 / (2.0 * k4)).sqrt(), k2 * k2 / (4.0 * k4)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CScanPoint {
    pub c: f64,
    pub device: KerrCatParams,
    /// Ground-aligned levels of `H_DW`.
    pub dw_levels: Vec<f64>,
    /// Ground-aligned levels of `−H_KC`.
    pub kc_levels: Vec<f64>,
    pub deviations: Vec<f64>,
    pub eps2_over_k: f64,
    pub eps1_over_k: f64,
    pub delta_over_k: f64,
    pub inequality_ratio: f64,
    /// `H_DW` levels strictly below the barrier top.
    pub states_below_barrier: usize,
    pub chemically_accurate: bool,
    pub within_device_limits: bool,
}

impl CScanPoint {
    pub fn feasible(&self) -> bool {
        self.chemically_accurate && self.within_device_limits
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CScanReport {
    pub n_levels: usize,
    pub dim: usize,
    pub points: Vec<CScanPoint>,
}

impl CScanReport {
    /// True when every level's deviation does not grow as `c` decreases,
    /// allowing `slack` (hartree) of round-off.
    pub fn deviations_monotone(&self, slack: f64) -> bool {
        self.points.windows(2).all(|w| {
            w[0].deviations.iter().zip(&w[1].deviations).all(|(small_c, large_c)| *small_c <= *large_c + slack)
        })
    }
}

/// Level-by-level comparison of `H_DW` and `−H_KC` at a single scale.
pub fn compare_at_scale(
    dw: &DoubleWellParams,
    scale: MappingScale,
    n_levels: usize,
    dim: usize,
    limits: &DeviceLimits,
) -> Result<CScanPoint> {
    if n_levels == 0 || n_levels > dim {
        return Err(Error::InvalidParameter { name: "n_levels", value: n_levels as f64, reason: "must be in 1..=dim" });
    }
    let ops = FockOperatorSet::new(dim, scale.c)?;
    let kc = chem_to_device(dw, scale);
    let e_dw = eigenvalues(build_double_well_hamiltonian(dw, &ops)?.as_ref())?;
    let h_kc = build_kerr_cat_hamiltonian(&kc, &ops)?;
    let mut e_kc: Vec<f64> = eigenvalues(h_kc.as_ref())?.into_iter().map(|e| -e).collect();
    e_kc.sort_by(f64::total_cmp);
    let deviations = compare_eigenvalues(&e_dw, &e_kc, n_levels);
    let align = |e: &[f64]| e[..n_levels].iter().map(|v| v - e[0]).collect::<Vec<_>>();
    Ok(CScanPoint {
        c: scale.c,
        device: kc,
        dw_levels: align(&e_dw),
        kc_levels: align(&e_kc),
        chemically_accurate: deviations.iter().all(|d| *d < CHEMICAL_ACCURACY),
        deviations,
        eps2_over_k: kc.eps2 / kc.kerr,
        eps1_over_k: kc.eps1 / kc.kerr,
        delta_over_k: kc.delta / kc.kerr,
        inequality_ratio: inequality_ratio(dw, scale),
        states_below_barrier: count_states_below_barrier(&e_dw, dw)?,
        within_device_limits: limits.admits(&kc),
    })
}

/// Scan `c` and report spectral agreement and device ratios at each value.
pub fn c_feasibility_scan(
    dw: &DoubleWellParams,
    c_values: &[f64],
    n_levels: usize,
    limits: &DeviceLimits,
    dim: usize,
) -> Result<CScanReport> {
    dw.validate()?;
    limits.validate()?;
    if c_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { name: "c_range", value: f64::NAN, reason: "c values must be strictly increasing" });
    }
    let points = c_values
        .par_iter()
        .map(|&c| compare_at_scale(dw, MappingScale::new(c)?, n_levels, dim, limits))
        .collect::<Result<Vec<_>>>()?;
    Ok(CScanReport { n_levels, dim, points })
}
