//! Registry of model proton-transfer systems and refits of literature potentials.

use std::sync::OnceLock;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::DoubleWellParams;
use crate::workflow::Engine;

const REGISTRY_TOML: &str = include_str!("../data/systems.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemicalSystem {
    pub name: String,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub k4: f64,
    pub k2: f64,
    pub k1: f64,
    pub mass: f64,
    /// Published count of bound states under the barrier top.
    pub levels_below_barrier: usize,
}

impl ChemicalSystem {
    pub fn params(&self) -> DoubleWellParams {
        DoubleWellParams { k4: self.k4, k2: self.k2, k1: self.k1, mass: self.mass }
    }

    fn matches(&self, key: &str) -> bool {
        let key = key.to_ascii_lowercase();
        self.name == key || self.aliases.iter().any(|a| *a == key)
    }
}

/// A published inverse rate constant for one system, engine and bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateReference {
    #[serde(skip)]
    pub system_index: usize,
    pub engine: Engine,
    pub kappa: f64,
    pub n_th: f64,
    pub t_x: f64,
    pub tolerance: f64,
}

impl RateReference {
    pub fn accepts(&self, value: f64) -> bool {
        (value - self.t_x).abs() <= self.tolerance
    }
}

#[derive(Debug, Deserialize)]
struct RawRate {
    system: String,
    engine: Engine,
    kappa: f64,
    n_th: f64,
    t_x: f64,
    tolerance: f64,
}

#[derive(Debug, Deserialize)]
struct RawRegistry {
    system: Vec<ChemicalSystem>,
    #[serde(default)]
    rate: Vec<RawRate>,
}

#[derive(Debug, Clone)]
pub struct Registry {
    pub systems: Vec<ChemicalSystem>,
    pub rates: Vec<RateReference>,
}

impl Registry {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawRegistry = toml::from_str(text).map_err(|e| Error::Registry(e.to_string()))?;
        for s in &raw.system {
            s.params().validate().map_err(|e| Error::Registry(format!("{}: {e}", s.name)))?;
        }
        let mut rates = Vec::with_capacity(raw.rate.len());
        for r in raw.rate {
            let idx = raw
                .system
                .iter()
                .position(|s| s.name == r.system)
                .ok_or_else(|| Error::Registry(format!("rate entry names unknown system `{}`", r.system)))?;
            rates.push(RateReference { system_index: idx, engine: r.engine, kappa: r.kappa, n_th: r.n_th, t_x: r.t_x, tolerance: r.tolerance });
        }
        Ok(Self { systems: raw.system, rates })
    }

    pub fn get(&self, name: &str) -> Result<&ChemicalSystem> {
        self.systems.iter().find(|s| s.matches(name)).ok_or_else(|| Error::UnknownSystem {
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn rates_for<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a RateReference> + 'a {
        let idx = self.systems.iter().position(|s| s.matches(name));
        self.rates.iter().filter(move |r| Some(r.system_index) == idx)
    }

    pub fn rate_reference(&self, name: &str, engine: Engine, kappa: f64, n_th: f64) -> Option<&RateReference> {
        self.rates_for(name)
            .find(|r| r.engine == engine && (r.kappa - kappa).abs() < 1e-12 && (r.n_th - n_th).abs() < 1e-12)
    }
}

/// Bundled registry.
pub fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Registry::from_toml(REGISTRY_TOML).expect("bundled registry is valid"))
}

pub fn registry_toml() -> &'static str {
    REGISTRY_TOML
}

/// Literature forms of the reaction potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LiteraturePotential {
    /// `k₁ζ − k₂ζ² − k₃ζ³ + k₄ζ⁴` with `ζ = x / x0`.
    QuarticCubic { k4: f64, k3: f64, k2: f64, k1: f64, x0: f64 },
    /// `V₁{e^{−2a₁(x−r₁)} − 2e^{−a₁(x−r₁)}} + V₂{e^{2a₂(x−r₂)} − 2e^{a₂(x−r₂)}}`.
    DoubleMorse { v1: f64, v2: f64, a1: f64, a2: f64, r1: f64, r2: f64 },
}

impl LiteraturePotential {
    pub fn evaluate(&self, x: f64) -> f64 {
        match *self {
            LiteraturePotential::QuarticCubic { k4, k3, k2, k1, x0 } => {
                let z = x / x0;
                let z2 = z * z;
                k1 * z - k2 * z2 - k3 * z2 * z + k4 * z2 * z2
            }
            LiteraturePotential::DoubleMorse { v1, v2, a1, a2, r1, r2 } => {
                let e1 = (-a1 * (x - r1)).exp();
                let e2 = (a2 * (x - r2)).exp();
                v1 * (e1 * e1 - 2.0 * e1) + v2 * (e2 * e2 - 2.0 * e2)
            }
        }
    }
}

pub fn evaluate_literature(pot: &LiteraturePotential, x: f64) -> f64 {
    pot.evaluate(x)
}

/// Literature potential for a registry system, with a fit window spanning
/// both wells.
pub fn literature_potential(name: &str) -> Result<(LiteraturePotential, (f64, f64))> {
    let sys = registry().get(name)?;
    Ok(match sys.name.as_str() {
        "at" => (
            LiteraturePotential::QuarticCubic { k4: 0.02068986, k3: 0.00525515, k2: 0.0413797, k1: 0.0157655, x0: 1.9592 },
            (-3.0, 3.0),
        ),
        "cis-trans" => (
            LiteraturePotential::QuarticCubic { k4: 0.00009374, k3: 0.000109, k2: 0.00299, k1: 0.005232, x0: 1.0 },
            (-6.0, 6.0),
        ),
        "cis-cis" => (
            LiteraturePotential::QuarticCubic { k4: 0.000714286, k3: 0.0, k2: 0.004, k1: 0.0, x0: 1.0 },
            (-3.0, 3.0),
        ),
        "gc" => (
            LiteraturePotential::DoubleMorse { v1: 0.1617, v2: 0.082, a1: 0.305, a2: 0.755, r1: -2.7, r2: 2.1 },
            (-2.75, 2.5),
        ),
        other => return Err(Error::UnknownSystem { name: other.to_string(), known: "at, gc, cis-trans, cis-cis".into() }),
    })
}

/// Least-squares fit of `V` on `xs` to `C + k₁x − k₂x² + k₄x⁴`; the constant is
/// discarded.
pub fn fit_quartic(pot: &LiteraturePotential, xs: &[f64], mass: f64) -> Result<DoubleWellParams> {
    if xs.len() < 4 {
        return Err(Error::InvalidParameter { name: "grid", value: xs.len() as f64, reason: "need at least 4 points" });
    }
    let a = Mat::<f64>::from_fn(xs.len(), 4, |i, j| {
        let x = xs[i];
        match j {
            0 => 1.0,
            1 => x,
            2 => -x * x,
            _ => x.powi(4),
        }
    });
    let b = Mat::<f64>::from_fn(xs.len(), 1, |i, _| pot.evaluate(xs[i]));
    let sol = a.qr().solve_lstsq(&b);
    let (k1, k2, k4) = (sol[(1, 0)], sol[(2, 0)], sol[(3, 0)]);
    if !(k4 > 0.0) || !(k2 > 0.0) {
        return Err(Error::NotADoubleWell(format!("fit gave k4 = {k4:e}, k2 = {k2:e}")));
    }
    Ok(DoubleWellParams { k4, k2, k1, mass })
}

/// Uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn registry_matches_published_parameters() {
        let r = registry();
        let cc = r.get("cis-cis").unwrap();
        assert_eq!((cc.k4, cc.k2, cc.k1, cc.mass), (7.1e-4, 4.0e-3, 0.0, 1836.0));
        let at = r.get("Adenine-Thymine").unwrap();
        assert_eq!((at.k4, at.k2, at.k1), (1.4e-3, 1.08e-2, 5.2e-3));
        let gc = r.get("gc").unwrap();
        assert_eq!((gc.k4, gc.k2, gc.k1), (7.7e-4, 6.9e-3, 4.5e-3));
        let ct = r.get("ct").unwrap();
        assert_eq!((ct.k4, ct.k2, ct.k1), (9.4e-5, 3.0e-3, 2.9e-3));
        let counts: Vec<usize> = ["cis-cis", "cis-trans", "at", "gc"].iter().map(|n| r.get(n).unwrap().levels_below_barrier).collect();
        assert_eq!(counts, vec![6, 24, 12, 14]);
        assert_eq!(r.rates.len(), 32);
    }

    #[test]
    fn unknown_name_lists_registry() {
        let e = registry().get("benzene").unwrap_err().to_string();
        assert!(e.contains("cis-cis") && e.contains("gc"));
    }

    #[test]
    fn rate_lookup() {
        let r = registry().rate_reference("cis-trans", Engine::DoubleWell, 0.025, 0.1).unwrap();
        assert_eq!((r.t_x, r.tolerance), (528.0, 7.0));
        let r = registry().rate_reference("gc", Engine::KerrCat, 0.025, 0.05).unwrap();
        assert_eq!(r.t_x, 316.0);
    }

    #[test]
    fn morse_minimum() {
        let m = LiteraturePotential::DoubleMorse { v1: 0.1617, v2: 0.0, a1: 0.305, a2: 0.755, r1: -2.7, r2: 2.1 };
        assert_relative_eq!(m.evaluate(-2.7), -0.1617, max_relative = 1e-15);
        let (at, _) = literature_potential("at").unwrap();
        assert_eq!(at.evaluate(0.0), 0.0);
    }

    #[test]
    fn quartic_refits_itself() {
        let q = LiteraturePotential::QuarticCubic { k4: 7.1e-4, k3: 0.0, k2: 4.0e-3, k1: 1.3e-3, x0: 1.0 };
        let dw = fit_quartic(&q, &linspace(-5.0, 5.0, 401), 1836.0).unwrap();
        assert_relative_eq!(dw.k4, 7.1e-4, max_relative = 1e-12);
        assert_relative_eq!(dw.k2, 4.0e-3, max_relative = 1e-12);
        assert_relative_eq!(dw.k1, 1.3e-3, max_relative = 1e-12);
        let sym = LiteraturePotential::QuarticCubic { k4: 7.1e-4, k3: 0.0, k2: 4.0e-3, k1: 0.0, x0: 1.0 };
        assert!(fit_quartic(&sym, &linspace(-5.0, 5.0, 401), 1836.0).unwrap().k1.abs() < 1e-12);
    }

    #[test]
    fn guanine_cytosine_refit_is_close_to_registry() {
        let (pot, (lo, hi)) = literature_potential("gc").unwrap();
        let fit = fit_quartic(&pot, &linspace(lo, hi, 1001), 1836.0).unwrap();
        let reg = registry().get("gc").unwrap();
        assert_relative_eq!(fit.k4, reg.k4, max_relative = 0.25);
        assert_relative_eq!(fit.k2, reg.k2, max_relative = 0.25);
        assert_relative_eq!(fit.k1, reg.k1, max_relative = 0.25);
    }
}
