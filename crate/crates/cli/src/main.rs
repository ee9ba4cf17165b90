mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use catwell::spectra::HalfLine;
use catwell::workflow::Engine;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Range, RateMethod, Settings};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "catwell", version, about = "Double-well reaction dynamics on a driven Kerr-cat oscillator")]
struct Cli {
    /// Worker threads (defaults to available cores).
    #[arg(long, global = true, env = "CATWELL_WORKERS")]
    workers: Option<usize>,
    /// TOML configuration file; flags override its values.
    #[arg(long, short = 'C', global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct SystemArgs {
    /// Registry system (at, gc, cis-trans, cis-cis).
    #[arg(long, short = 's')]
    system: Option<String>,
    /// Custom quartic coefficient (hartree/bohr^4); needs --k2 as well.
    #[arg(long, requires = "k2")]
    k4: Option<f64>,
    #[arg(long, requires = "k4")]
    k2: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    /// Mass in electron masses.
    #[arg(long)]
    mass: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct BasisArgs {
    /// Mapping scale(s) in bohr, comma separated.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Fock truncation.
    #[arg(long)]
    dim: Option<usize>,
    /// Eigenbasis size for dynamics.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct DissArgs {
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    nth: Option<f64>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare H_DW and -H_KC spectra and report device ratios.
    Spectra {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        basis: BasisArgs,
        /// Scan c over lo:hi:n instead of the --c list.
        #[arg(long)]
        c_scan: Option<Range>,
        /// Number of levels to compare.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Propagate the Lindblad dynamics and fit the product population.
    Dynamics {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        basis: BasisArgs,
        #[command(flatten)]
        diss: DissArgs,
        /// Engines to run (dw, kc).
        #[arg(long, value_delimiter = ',')]
        engines: Option<Vec<Engine>>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long)]
        horizon_factor: Option<f64>,
        #[arg(long)]
        n_steps: Option<usize>,
        #[arg(long)]
        tail: Option<f64>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        projector_cut: Option<f64>,
        #[arg(long, value_enum)]
        reactant_side: Option<SideArg>,
    },
    /// Spectral T_X over an (eps1, eps2) grid in units of K; resumable.
    Sweep {
        #[command(flatten)]
        diss: DissArgs,
        #[arg(long)]
        eps1: Option<Range>,
        #[arg(long)]
        eps2: Option<Range>,
        #[arg(long)]
        sweep_dim: Option<usize>,
        #[arg(long)]
        sweep_m: Option<usize>,
        /// Output CSV (defaults to <out>/sweep_k<kappa>_n<nth>.csv).
        #[arg(long)]
        file: Option<PathBuf>,
        /// Discard an existing output file instead of resuming it.
        #[arg(long)]
        fresh: bool,
    },
    /// Inverse rates for all registry systems against published values.
    Table2 {
        #[command(flatten)]
        basis: BasisArgs,
        #[arg(long, value_delimiter = ',')]
        engines: Option<Vec<Engine>>,
        /// Restrict to dissipation pairs with this kappa.
        #[arg(long)]
        kappa: Option<f64>,
        /// Restrict to dissipation pairs with this n_th.
        #[arg(long)]
        nth: Option<f64>,
        /// T_X compared with the published values: `fit` propagates each cell, `spectral` does not.
        #[arg(long, value_enum)]
        method: Option<RateMethod>,
    },
    /// Refit a literature potential to the quartic form.
    FitPotential {
        #[arg(long, short = 's')]
        system: String,
        /// Fit window lo:hi:n (bohr).
        #[arg(long)]
        window: Option<Range>,
    },
}

fn apply_system(s: &mut Settings, a: &SystemArgs) -> Result<(), CliError> {
    if let Some(name) = &a.system {
        s.system = Some(name.clone());
        s.params = None;
    }
    if let (Some(k4), Some(k2)) = (a.k4, a.k2) {
        s.params = Some(catwell::operators::DoubleWellParams {
            k4,
            k2,
            k1: a.k1.unwrap_or(0.0),
            mass: a.mass.unwrap_or(catwell::operators::PROTON_MASS),
        });
    } else if a.k1.is_some() || a.mass.is_some() {
        let p = s.params.as_mut().ok_or_else(|| CliError::Config("--k1/--mass need --k4 and --k2 (or params in the config file)".into()))?;
        if let Some(k1) = a.k1 {
            p.k1 = k1;
        }
        if let Some(m) = a.mass {
            p.mass = m;
        }
    }
    Ok(())
}

fn apply_basis(s: &mut Settings, a: &BasisArgs) {
    if let Some(c) = &a.c {
        s.c = c.clone();
    }
    if let Some(d) = a.dim {
        s.dim = d;
    }
    if let Some(m) = a.m {
        s.m = m;
    }
}

fn apply_diss(s: &mut Settings, a: &DissArgs) {
    if let Some(k) = a.kappa {
        s.kappa = k;
    }
    if let Some(n) = a.nth {
        s.n_th = n;
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size worker pool: {e}")))?;
    }
    let mut s = Settings::load(cli.config.as_deref())?;
    if let Some(o) = cli.out {
        s.out = o;
    }
    match cli.command {
        Command::Spectra { system, basis, c_scan, levels } => {
            apply_system(&mut s, &system)?;
            apply_basis(&mut s, &basis);
            if c_scan.is_some() {
                s.c_scan = c_scan;
            }
            if levels.is_some() {
                s.levels = levels;
            }
            s.validate()?;
            commands::spectra(&s)
        }
        Command::Dynamics { system, basis, diss, engines, tau, stride, horizon_factor, n_steps, tail, burn_in, projector_cut, reactant_side } => {
            apply_system(&mut s, &system)?;
            apply_basis(&mut s, &basis);
            apply_diss(&mut s, &diss);
            if let Some(e) = engines {
                s.engines = e;
            }
            macro_rules! set {
                ($($f:ident),*) => { $( if let Some(v) = $f { s.$f = v; } )* };
            }
            set!(tau, stride, horizon_factor, tail, burn_in, projector_cut);
            if n_steps.is_some() {
                s.n_steps = n_steps;
            }
            if let Some(side) = reactant_side {
                s.reactant_side = Some(match side {
                    SideArg::Left => HalfLine::Left,
                    SideArg::Right => HalfLine::Right,
                });
            }
            s.validate()?;
            commands::dynamics(&s)
        }
        Command::Sweep { diss, eps1, eps2, sweep_dim, sweep_m, file, fresh } => {
            apply_diss(&mut s, &diss);
            if let Some(r) = eps1 {
                s.sweep.eps1 = r;
            }
            if let Some(r) = eps2 {
                s.sweep.eps2 = r;
            }
            if let Some(d) = sweep_dim {
                s.sweep.dim = d;
            }
            if let Some(m) = sweep_m {
                s.sweep.m = m;
            }
            s.validate()?;
            commands::sweep(&s, file, fresh)
        }
        Command::Table2 { basis, engines, kappa, nth, method } => {
            apply_basis(&mut s, &basis);
            if let Some(e) = engines {
                s.engines = e;
            }
            let mut pairs: Vec<[f64; 2]> = s
                .table2_pairs
                .iter()
                .copied()
                .filter(|p| kappa.is_none_or(|k| (p[0] - k).abs() < 1e-12) && nth.is_none_or(|n| (p[1] - n).abs() < 1e-12))
                .collect();
            if pairs.is_empty() {
                match (kappa, nth) {
                    (Some(k), Some(n)) => pairs.push([k, n]),
                    _ => return Err(CliError::Config("no dissipation pair matches --kappa/--nth".into())),
                }
            }
            s.table2_pairs = pairs;
            if let Some(m) = method {
                s.table2_method = m;
            }
            s.validate()?;
            commands::table2(&s)
        }
        Command::FitPotential { system, window } => commands::fit_potential(&s, &system, window),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
