//! Subcommand implementations.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use catwell::chem::{fit_quartic, linspace, literature_potential, registry};
use catwell::dynamics::DissipationParams;
use catwell::mapping::c_feasibility_scan;
use catwell::observables::{sweep_cells, SweepConfig};
use catwell::workflow::{run_rate, spectral_only, Engine, RateRun};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Range, RateMethod, Settings};
use crate::error::CliError;
use crate::output::{csv_writer, ensure_dir, num, tag_c, write_json};

pub fn spectra(s: &Settings) -> Result<(), CliError> {
    let (name, dw) = s.resolve_system()?;
    let levels = match s.levels {
        Some(n) => n,
        None => registry().get(&name).map(|sys| sys.levels_below_barrier).unwrap_or(6),
    };
    let cs = match s.c_scan {
        Some(r) => r.values(),
        None => {
            let mut c = s.c.clone();
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        }
    };
    let report = c_feasibility_scan(&dw, &cs, levels, &s.limits, s.dim)?;
    ensure_dir(&s.out)?;

    let mut w = csv_writer(&s.out.join(format!("spectra_{name}_levels.csv")))?;
    w.write_record(["c_bohr", "level", "e_dw_hartree", "e_kc_hartree", "abs_dev_hartree"])?;
    for p in &report.points {
        for i in 0..p.deviations.len() {
            w.write_record([num(p.c), i.to_string(), num(p.dw_levels[i]), num(p.kc_levels[i]), num(p.deviations[i])])?;
        }
    }
    w.flush()?;

    let mut w = csv_writer(&s.out.join(format!("spectra_{name}_scan.csv")))?;
    w.write_record([
        "c_bohr",
        "kerr_hartree",
        "delta_hartree",
        "eps1_hartree",
        "eps2_hartree",
        "eps2_over_k",
        "eps1_over_k",
        "delta_over_k",
        "inequality_ratio",
        "max_abs_dev_hartree",
        "states_below_barrier",
        "chemically_accurate",
        "within_device_limits",
        "feasible",
    ])?;
    for p in &report.points {
        w.write_record([
            num(p.c),
            num(p.device.kerr),
            num(p.device.delta),
            num(p.device.eps1),
            num(p.device.eps2),
            num(p.eps2_over_k),
            num(p.eps1_over_k),
            num(p.delta_over_k),
            num(p.inequality_ratio),
            num(p.max_deviation()),
            p.states_below_barrier.to_string(),
            p.chemically_accurate.to_string(),
            p.within_device_limits.to_string(),
            p.feasible().to_string(),
        ])?;
    }
    w.flush()?;

    let summary: Vec<_> = report
        .points
        .iter()
        .map(|p| {
            json!({
                "c_bohr": p.c,
                "max_abs_dev_hartree": p.max_deviation(),
                "states_below_barrier": p.states_below_barrier,
                "chemically_accurate": p.chemically_accurate,
                "within_device_limits": p.within_device_limits,
            })
        })
        .collect();
    write_json(
        &s.out.join(format!("spectra_{name}.json")),
        &json!({
            "system": name,
            "params": dw,
            "levels": levels,
            "deviations_monotone_in_c": report.deviations_monotone(1e-9),
            "points": summary,
            "config": s,
        }),
    )?;
    for p in &report.points {
        println!(
            "{name} c={:.4} max|dE|={:.3e} Eh below-barrier={} accurate={} device-ok={}",
            p.c,
            p.max_deviation(),
            p.states_below_barrier,
            p.chemically_accurate,
            p.within_device_limits
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct RateSummary<'a> {
    system: &'a str,
    engine: Engine,
    c_bohr: f64,
    t_x_spectral: f64,
    spectral_eigenvalue: [f64; 2],
    t_x_fit: Option<f64>,
    t_x_fit_sigma: Option<f64>,
    fit_amplitude: Option<f64>,
    fit_offset: Option<f64>,
    fit_error: Option<&'a str>,
    reactant_side: &'a str,
    product_side: &'a str,
    initial_eigenstate: usize,
    initial_eigenstate_probability: f64,
    tie_broken: bool,
    initial_reactant_population: f64,
    n_steps: usize,
    max_trace_error: f64,
    max_hermiticity_drift: f64,
    config: &'a Settings,
}

fn summarize<'a>(name: &'a str, run: &'a RateRun, s: &'a Settings) -> RateSummary<'a> {
    RateSummary {
        system: name,
        engine: run.engine,
        c_bohr: run.config.c,
        t_x_spectral: run.spectral.t_x,
        spectral_eigenvalue: [run.spectral.eigenvalue.re, run.spectral.eigenvalue.im],
        t_x_fit: run.fit.map(|f| f.t_x),
        t_x_fit_sigma: run.fit.map(|f| f.sigma),
        fit_amplitude: run.fit.map(|f| f.amplitude),
        fit_offset: run.fit.map(|f| f.offset),
        fit_error: run.fit_error.as_deref(),
        reactant_side: run.reactant_side.name(),
        product_side: run.product_side.name(),
        initial_eigenstate: run.initial_index,
        initial_eigenstate_probability: run.initial_probability,
        tie_broken: run.tie_broken,
        initial_reactant_population: run.initial_reactant_population,
        n_steps: run.n_steps,
        max_trace_error: run.max_trace_error,
        max_hermiticity_drift: run.max_hermiticity_drift,
        config: s,
    }
}

pub fn dynamics(s: &Settings) -> Result<(), CliError> {
    let (name, dw) = s.resolve_system()?;
    ensure_dir(&s.out)?;
    let jobs: Vec<(f64, Engine)> = s.c.iter().flat_map(|&c| s.engines.iter().map(move |&e| (c, e))).collect();
    let runs: Vec<Result<RateRun, CliError>> = jobs
        .par_iter()
        .map(|&(c, e)| run_rate(&dw, e, &s.rate_config(c)).map_err(CliError::from))
        .collect();
    let mut failures = Vec::new();
    for ((c, engine), run) in jobs.iter().zip(runs) {
        let run = run?;
        let stem = format!("{name}_{}_{}", engine.tag(), tag_c(*c));
        let mut w = csv_writer(&s.out.join(format!("trajectory_{stem}.csv")))?;
        w.write_record(["t_hbar_per_hartree", "p_left", "p_right", "p_product", "overlap", "trace"])?;
        let product = run.product_population();
        for (p, pp) in run.points.iter().zip(&product) {
            w.write_record([num(p.t), num(p.p_left), num(p.p_right), num(*pp), num(p.overlap), num(p.trace)])?;
        }
        w.flush()?;
        write_json(&s.out.join(format!("rate_{stem}.json")), &summarize(&name, &run, s))?;
        match run.fit {
            Some(f) => println!(
                "{name} {} c={c}: T_X spectral={:.2} fit={:.2}±{:.2}",
                engine.tag(),
                run.spectral.t_x,
                f.t_x,
                f.sigma
            ),
            None => {
                println!("{name} {} c={c}: T_X spectral={:.2} fit failed", engine.tag(), run.spectral.t_x);
                failures.push(format!("{stem}: {}", run.fit_error.as_deref().unwrap_or("unknown")));
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("exponential fit failed for {}", failures.join("; "))))
    }
}

const SWEEP_HEADER: &str = "eps1_k,eps2_k,t_x_hbar_per_k,status";

pub fn sweep(s: &Settings, file: Option<PathBuf>, fresh: bool) -> Result<(), CliError> {
    let diss = DissipationParams::new(s.kappa, s.n_th)?;
    let cfg = SweepConfig { dim: s.sweep.dim, m: s.sweep.m, delta: s.sweep.delta, kerr: s.sweep.kerr };
    let path = file.unwrap_or_else(|| s.out.join(format!("sweep_k{}_n{}.csv", s.kappa, s.n_th)));
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let cells: Vec<(f64, f64)> = s
        .sweep
        .eps2
        .values()
        .into_iter()
        .flat_map(|e2| s.sweep.eps1.values().into_iter().map(move |e1| (e1, e2)))
        .collect();

    let mut done = HashSet::new();
    if path.exists() && !fresh {
        let f = std::fs::File::open(&path)?;
        let mut lines = BufReader::new(f).lines();
        match lines.next().transpose()? {
            Some(h) if h == SWEEP_HEADER => {}
            Some(h) => return Err(CliError::Config(format!("{} has unexpected header `{h}`; use --fresh", path.display()))),
            None => {}
        }
        for line in lines {
            let line = line?;
            let mut it = line.split(',');
            if let (Some(a), Some(b)) = (it.next(), it.next()) {
                done.insert((a.to_string(), b.to_string()));
            }
        }
    }
    let new_file = fresh || !path.exists() || std::fs::metadata(&path)?.len() == 0;
    let mut out = OpenOptions::new().create(true).write(true).append(!new_file).truncate(new_file).open(&path)?;
    if new_file {
        writeln!(out, "{SWEEP_HEADER}")?;
    }
    let pending: Vec<(f64, f64)> = cells.iter().copied().filter(|(e1, e2)| !done.contains(&(num(*e1), num(*e2)))).collect();
    log::info!("sweep: {} cells, {} already present", cells.len(), cells.len() - pending.len());
    let batch = (rayon::current_num_threads() * 4).max(8);
    let mut failed = 0usize;
    for chunk in pending.chunks(batch) {
        for cell in sweep_cells(chunk, diss, &cfg) {
            let (t, status) = match (&cell.t_x, &cell.error) {
                (Some(t), _) => (num(*t), "ok".to_string()),
                (None, Some(e)) => {
                    failed += 1;
                    log::warn!("sweep cell ({}, {}) failed: {e}", cell.eps1, cell.eps2);
                    ("nan".into(), format!("error: {}", e.replace([',', '\n'], ";")))
                }
                (None, None) => ("nan".into(), "error".into()),
            };
            writeln!(out, "{},{},{},{}", num(cell.eps1), num(cell.eps2), t, status)?;
        }
        out.flush()?;
    }

    // Summarize from the complete file so resumed runs report the whole grid.
    let mut rdr = csv::Reader::from_path(&path)?;
    let mut tx = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if let Ok(v) = rec[2].parse::<f64>() {
            if v.is_finite() {
                tx.push(v);
            }
        }
    }
    let (lo, hi) = tx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let summary_path = path.with_extension("json");
    write_json(
        &summary_path,
        &json!({
            "csv": path,
            "cells": cells.len(),
            "completed": tx.len(),
            "failed_this_run": failed,
            "t_x_min": lo,
            "t_x_max": hi,
            "max_over_min": hi / lo,
            "config": s,
        }),
    )?;
    println!("sweep: {} cells written to {}, T_X range [{lo:.3}, {hi:.3}]", cells.len(), path.display());
    Ok(())
}

pub fn table2(s: &Settings) -> Result<(), CliError> {
    let reg = registry();
    let c = s.c[0];
    let jobs: Vec<(usize, [f64; 2], Engine)> = (0..reg.systems.len())
        .flat_map(|i| s.table2_pairs.iter().flat_map(move |&p| s.engines.iter().map(move |&e| (i, p, e))))
        .collect();
    let results: Vec<Result<(f64, Option<f64>), CliError>> = jobs
        .par_iter()
        .map(|&(i, [kappa, n_th], engine)| {
            let mut cfg = s.rate_config(c);
            cfg.kappa = kappa;
            cfg.n_th = n_th;
            let dw = reg.systems[i].params();
            match s.table2_method {
                RateMethod::Fit => {
                    let run = run_rate(&dw, engine, &cfg)?;
                    Ok((run.spectral.t_x, run.fit.map(|f| f.t_x)))
                }
                RateMethod::Spectral => Ok((spectral_only(&dw, engine, &cfg)?.t_x, None)),
            }
        })
        .collect();
    ensure_dir(&s.out)?;
    let mut w = csv_writer(&s.out.join("table2.csv"))?;
    w.write_record([
        "system",
        "engine",
        "kappa_hartree",
        "n_th",
        "t_x_spectral_hbar_per_hartree",
        "t_x_fit_hbar_per_hartree",
        "reference_hbar_per_hartree",
        "tolerance_hbar_per_hartree",
        "pass",
    ])?;
    let mut rows = Vec::new();
    let mut mismatches = 0usize;
    for ((i, [kappa, n_th], engine), r) in jobs.iter().zip(results) {
        let (tx, fit) = r?;
        let name = &reg.systems[*i].name;
        let reference = reg.rate_reference(name, *engine, *kappa, *n_th);
        let compared = match s.table2_method {
            RateMethod::Fit => fit,
            RateMethod::Spectral => Some(tx),
        };
        // A failed fit counts as a mismatch.
        let pass = reference.map(|r| compared.is_some_and(|v| r.accepts(v)));
        if pass == Some(false) {
            mismatches += 1;
        }
        w.write_record([
            name.clone(),
            engine.tag().to_string(),
            num(*kappa),
            num(*n_th),
            num(tx),
            fit.map(num).unwrap_or_else(|| "nan".into()),
            reference.map(|r| num(r.t_x)).unwrap_or_else(|| "nan".into()),
            reference.map(|r| num(r.tolerance)).unwrap_or_else(|| "nan".into()),
            pass.map(|p| p.to_string()).unwrap_or_else(|| "n/a".into()),
        ])?;
        println!(
            "{:<10} {} kappa={:<6} n_th={:<5} spectral={:>9.2}{} ref={} {}",
            name,
            engine.tag(),
            kappa,
            n_th,
            tx,
            fit.map(|f| format!(" fit={f:.2}")).unwrap_or_default(),
            reference.map(|r| format!("{}±{}", r.t_x, r.tolerance)).unwrap_or_else(|| "-".into()),
            match pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "",
            }
        );
        rows.push(json!({
            "system": name, "engine": engine, "kappa": kappa, "n_th": n_th,
            "t_x_spectral": tx, "t_x_fit": fit, "method": s.table2_method,
            "reference": reference.map(|r| r.t_x), "tolerance": reference.map(|r| r.tolerance), "pass": pass,
        }));
    }
    w.flush()?;
    write_json(&s.out.join("table2.json"), &json!({ "c_bohr": c, "cells": rows, "mismatches": mismatches, "config": s }))?;
    if mismatches > 0 {
        Err(CliError::Acceptance(format!("{mismatches} of {} cells differ from the published values", jobs.len())))
    } else {
        Ok(())
    }
}

pub fn fit_potential(s: &Settings, system: &str, window: Option<Range>) -> Result<(), CliError> {
    let sys = registry().get(system)?;
    let (pot, (lo, hi)) = literature_potential(&sys.name)?;
    let w = window.unwrap_or(Range { lo, hi, n: 1001 });
    let xs = linspace(w.lo, w.hi, w.n);
    let fit = fit_quartic(&pot, &xs, sys.mass)?;
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
    println!("{} fit on [{}, {}] with {} points", sys.name, w.lo, w.hi, w.n);
    println!("  k4 = {:.4e} (registry {:.4e}, rel. diff {:.3})", fit.k4, sys.k4, rel(fit.k4, sys.k4));
    println!("  k2 = {:.4e} (registry {:.4e}, rel. diff {:.3})", fit.k2, sys.k2, rel(fit.k2, sys.k2));
    println!("  k1 = {:.4e} (registry {:.4e}, rel. diff {:.3})", fit.k1, sys.k1, rel(fit.k1, sys.k1));
    write_json(
        &s.out.join(format!("fit_{}.json", sys.name)),
        &json!({ "system": sys.name, "literature": pot, "window": w, "fit": fit, "registry": sys.params() }),
    )
}
