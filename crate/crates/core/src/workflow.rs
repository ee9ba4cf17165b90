//! End-to-end pipelines shared by the CLI, tests and benchmarks.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_lindbladian, propagate_with, spectral_timescale, DissipationParams, LindbladSuperoperator, SpectralTimescale};
use crate::error::{Error, Result};
use crate::linalg::{c64, hermiticity_error, trace, CMat};
use crate::mapping::{chem_to_device, MappingScale};
use crate::observables::{fit_exponential, heaviside_projector, overlap, population, RateResult, RegionProjector};
use crate::operators::{build_double_well_hamiltonian, build_kerr_cat_hamiltonian, DoubleWellParams, FockOperatorSet};
use crate::spectra::{barrier_geometry, build_grid, eigendecompose, reduce_subspace, BarrierGeometry, EigenSystem, GridSpec, HalfLine, PositionGrid, ReducedOperatorSet};
use crate::states::{prepare_initial_state, InitialState, SigmoidFilter};

/// Which Hamiltonian drives the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    /// `H_DW` built from position and momentum.
    #[serde(rename = "dw")]
    DoubleWell,
    /// `−H_KC` with mapped device parameters.
    #[serde(rename = "kc")]
    KerrCat,
}

impl Engine {
    pub fn tag(self) -> &'static str {
        match self {
            Engine::DoubleWell => "dw",
            Engine::KerrCat => "kc",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dw" | "double-well" => Ok(Engine::DoubleWell),
            "kc" | "kerr-cat" => Ok(Engine::KerrCat),
            _ => Err(format!("unknown engine `{s}` (expected dw or kc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateConfig {
    /// Mapping scale (bohr).
    pub c: f64,
    /// Fock truncation.
    pub dim: usize,
    /// Eigenbasis size for dynamics.
    pub m: usize,
    pub kappa: f64,
    pub n_th: f64,
    /// Time step (ħ/E_h).
    pub tau: f64,
    /// Steps between recorded samples.
    pub stride: usize,
    /// Horizon as a multiple of the spectral T_X.
    pub horizon_factor: f64,
    pub max_steps: usize,
    /// Fixed step count; overrides the horizon rule when set.
    pub n_steps: Option<usize>,
    pub grid: GridSpec,
    /// Sigmoid tail (bohr).
    pub tail: f64,
    pub threshold: f64,
    /// Recorded samples dropped before fitting.
    pub burn_in: usize,
    /// Cut of the product projector.
    pub projector_cut: f64,
    /// Reactant well; the higher-energy well when unset.
    pub reactant_side: Option<HalfLine>,
    /// Filter cut; the barrier maximum when unset.
    pub filter_cut: Option<f64>,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            c: 0.1,
            dim: 300,
            m: 20,
            kappa: 0.1,
            n_th: 0.1,
            tau: 0.1,
            stride: 10,
            horizon_factor: 10.0,
            max_steps: 100_000,
            n_steps: None,
            grid: GridSpec::default(),
            tail: 0.5,
            threshold: 0.5,
            burn_in: 1,
            projector_cut: 0.0,
            reactant_side: None,
            filter_cut: None,
        }
    }
}

impl RateConfig {
    pub fn diss(&self) -> Result<DissipationParams> {
        DissipationParams::new(self.kappa, self.n_th)
    }

    pub fn validate(&self) -> Result<()> {
        MappingScale::new(self.c)?;
        self.diss()?;
        if self.dim < 2 {
            return Err(Error::InvalidDimension { dim: self.dim, reason: "Fock truncation needs at least 2 levels" });
        }
        if self.m == 0 || self.m > self.dim {
            return Err(Error::InvalidDimension { dim: self.m, reason: "M must be in 1..=dim" });
        }
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParameter { name: "tau", value: self.tau, reason: "must be positive" });
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter { name: "stride", value: 0.0, reason: "must be at least 1" });
        }
        if !(self.horizon_factor > 0.0) {
            return Err(Error::InvalidParameter { name: "horizon_factor", value: self.horizon_factor, reason: "must be positive" });
        }
        if !(self.tail > 0.0) {
            return Err(Error::InvalidParameter { name: "tail", value: self.tail, reason: "must be positive" });
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::InvalidParameter { name: "threshold", value: self.threshold, reason: "must be in (0, 1]" });
        }
        Ok(())
    }
}

/// Hamiltonian matrix for an engine.
pub fn engine_hamiltonian(dw: &DoubleWellParams, engine: Engine, ops: &FockOperatorSet) -> Result<CMat> {
    match engine {
        Engine::DoubleWell => build_double_well_hamiltonian(dw, ops),
        Engine::KerrCat => {
            let kc = chem_to_device(dw, MappingScale::new(ops.c)?);
            let h = build_kerr_cat_hamiltonian(&kc, ops)?;
            Ok(Mat::from_fn(ops.dim, ops.dim, |i, j| -h[(i, j)]))
        }
    }
}

/// Everything needed before propagation.
pub struct Prepared {
    pub ops: FockOperatorSet,
    pub eig: EigenSystem,
    pub reduced: ReducedOperatorSet,
    pub lindbladian: LindbladSuperoperator,
}

pub fn prepare(dw: &DoubleWellParams, engine: Engine, cfg: &RateConfig) -> Result<Prepared> {
    cfg.validate()?;
    dw.validate()?;
    let ops = FockOperatorSet::new(cfg.dim, cfg.c)?;
    let h = engine_hamiltonian(dw, engine, &ops)?;
    let eig = eigendecompose(h.as_ref())?;
    let reduced = reduce_subspace(&eig, &ops, cfg.m)?;
    let lindbladian = build_lindbladian(reduced.h.as_ref(), reduced.a.as_ref(), reduced.a_dag.as_ref(), cfg.diss()?)?;
    Ok(Prepared { ops, eig, reduced, lindbladian })
}

pub fn spectral_only(dw: &DoubleWellParams, engine: Engine, cfg: &RateConfig) -> Result<SpectralTimescale> {
    spectral_timescale(&prepare(dw, engine, cfg)?.lindbladian, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub p_left: f64,
    pub p_right: f64,
    pub overlap: f64,
    pub trace: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRun {
    pub engine: Engine,
    pub config: RateConfig,
    pub geometry: BarrierGeometry,
    pub reactant_side: HalfLine,
    pub product_side: HalfLine,
    pub initial_index: usize,
    pub initial_probability: f64,
    pub tie_broken: bool,
    pub initial_reactant_population: f64,
    pub n_steps: usize,
    pub spectral: SpectralTimescale,
    pub fit: Option<RateResult>,
    pub fit_error: Option<String>,
    pub max_trace_error: f64,
    pub max_hermiticity_drift: f64,
    pub points: Vec<TrajectoryPoint>,
}

impl RateRun {
    pub fn product_population(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| match self.product_side {
                HalfLine::Left => p.p_left,
                HalfLine::Right => p.p_right,
            })
            .collect()
    }
}

/// Grid values of the reduced eigenbasis functions (`n_points x M`).
pub fn eigenbasis_on_grid(grid: &PositionGrid, reduced: &ReducedOperatorSet) -> Result<CMat> {
    grid.evaluate(reduced.d.as_ref())
}

pub struct Observers {
    pub left: RegionProjector,
    pub right: RegionProjector,
    pub initial: InitialState,
}

pub fn build_observers(dw: &DoubleWellParams, prep: &Prepared, cfg: &RateConfig, geometry: &BarrierGeometry, reactant: HalfLine) -> Result<(PositionGrid, Observers)> {
    let grid = build_grid(cfg.dim, cfg.c, &cfg.grid)?;
    let phi = eigenbasis_on_grid(&grid, &prep.reduced)?;
    let left = heaviside_projector(&grid, phi.as_ref(), cfg.projector_cut, HalfLine::Left)?;
    let right = heaviside_projector(&grid, phi.as_ref(), cfg.projector_cut, HalfLine::Right)?;
    let _ = dw;
    let filter = SigmoidFilter { x0: cfg.filter_cut.unwrap_or(geometry.x_barrier), tail: cfg.tail, side: reactant };
    let initial = prepare_initial_state(&prep.eig, &grid, &prep.reduced.d, &filter, cfg.threshold)?;
    Ok((grid, Observers { left, right, initial }))
}

/// Spectral and fitted inverse rate for one system and engine.
pub fn run_rate(dw: &DoubleWellParams, engine: Engine, cfg: &RateConfig) -> Result<RateRun> {
    let prep = prepare(dw, engine, cfg)?;
    let spectral = spectral_timescale(&prep.lindbladian, None)?;
    let geometry = barrier_geometry(dw)?;
    let reactant = cfg.reactant_side.unwrap_or_else(|| geometry.higher_well());
    let product = reactant.opposite();
    let (_, obs) = build_observers(dw, &prep, cfg, &geometry, reactant)?;

    let n_steps = match cfg.n_steps {
        Some(n) => n,
        None => {
            let raw = (cfg.horizon_factor * spectral.t_x / cfg.tau).ceil() as usize;
            let capped = raw.min(cfg.max_steps).max(cfg.stride);
            capped.div_ceil(cfg.stride) * cfg.stride
        }
    };

    let rho0 = obs.initial.rho.clone();
    let mut points = Vec::new();
    let mut max_trace_error = 0.0f64;
    let mut max_herm = 0.0f64;
    propagate_with(&prep.lindbladian, rho0.as_ref(), cfg.tau, n_steps, cfg.stride, |t, rho| {
        let tr = trace(rho.as_ref());
        max_trace_error = max_trace_error.max((tr - c64::new(1.0, 0.0)).norm());
        max_herm = max_herm.max(hermiticity_error(rho.as_ref()));
        points.push(TrajectoryPoint {
            t,
            p_left: population(rho.as_ref(), &obs.left),
            p_right: population(rho.as_ref(), &obs.right),
            overlap: overlap(rho.as_ref(), rho0.as_ref()),
            trace: tr.re,
        });
    })?;

    let initial_reactant_population = match reactant {
        HalfLine::Left => points[0].p_left,
        HalfLine::Right => points[0].p_right,
    };
    let mut run = RateRun {
        engine,
        config: *cfg,
        geometry,
        reactant_side: reactant,
        product_side: product,
        initial_index: obs.initial.selection.index,
        initial_probability: obs.initial.selection.probability,
        tie_broken: obs.initial.selection.tie_broken,
        initial_reactant_population,
        n_steps,
        spectral,
        fit: None,
        fit_error: None,
        max_trace_error,
        max_hermiticity_drift: max_herm,
        points,
    };
    let skip = cfg.burn_in.min(run.points.len());
    let times: Vec<f64> = run.points[skip..].iter().map(|p| p.t).collect();
    let values: Vec<f64> = run.product_population()[skip..].to_vec();
    match fit_exponential(&times, &values) {
        Ok(f) => run.fit = Some(f),
        Err(e) => run.fit_error = Some(e.to_string()),
    }
    Ok(run)
}
