//! Build a simulation from a config, drive it, and write the run artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use lowmach::analysis::{
    enstrophy_mean, high_mode_sum, kinetic_energy_total, max_mach, pressure_fluctuation, specific_kinetic_energy_mean,
    total_energy, total_mass,
};
use lowmach::cases::{setup, Case};
use lowmach::grid::GridField;
use lowmach::state::cons_to_prim;
use lowmach::time::{Discretization, LinearPreconditioner, NewtonConfig, Simulation, Stepper};
use serde_json::json;
use thiserror::Error;

use crate::config::{RunConfig, StepperKind};

/// Environment variable that replaces the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "SOLVER_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("solver: {0}")]
    Solver(#[from] lowmach::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| cfg.output_dir.clone())
}

/// Case and ready-to-step simulation for a config.
pub fn build(cfg: &RunConfig, parallel: bool) -> Result<(Case, Simulation), lowmach::Error> {
    let case = setup(&cfg.case, &cfg.case_params)?;
    let mut disc = Discretization::new(case.eos, cfg.flux, cfg.recon, case.bc).with_parallel(parallel);
    if let Some(g) = case.gravity {
        disc = disc.with_gravity(g);
    }
    let dim = case.field.grid.dim;
    let stepper = match cfg.stepper {
        StepperKind::Explicit(s) => Stepper::Explicit(s),
        StepperKind::Implicit(s) => {
            let pre = cfg.preconditioner.unwrap_or(if case.bc.is_periodic(dim) {
                LinearPreconditioner::Spectral
            } else {
                LinearPreconditioner::BlockJacobi
            });
            Stepper::Implicit(s, NewtonConfig { preconditioner: pre, ..cfg.newton })
        }
    };
    let sim = Simulation::new(case.field.clone(), disc, stepper, cfg.policy)?;
    Ok((case, sim))
}

/// Names of the `series.csv` columns for a field of dimension `dim`.
pub fn series_header(dim: usize) -> Vec<&'static str> {
    let mut h = vec!["t", "E_kin", "E_total", "mass", "max_mach", "pressure_fluctuation"];
    if dim == 1 {
        h.push("high_mode_sum");
    }
    if dim == 3 {
        h.extend(["K", "Omega"]);
    }
    h
}

pub fn series_row(sim: &Simulation) -> Result<Vec<f64>, lowmach::Error> {
    let f = &sim.field;
    let eos = &sim.disc.eos;
    let mut row = vec![
        sim.t,
        kinetic_energy_total(f),
        total_energy(f, eos),
        total_mass(f),
        max_mach(f, eos)?,
        pressure_fluctuation(f, eos)?,
    ];
    match f.grid.dim {
        1 => row.push(high_mode_sum(f)?),
        3 => row.extend([specific_kinetic_energy_mean(f), enstrophy_mean(f, &sim.disc.bc)]),
        _ => {}
    }
    Ok(row)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field(path: &Path, field: &GridField, eos: &lowmach::state::Eos) -> Result<(), RunError> {
    let dim = field.grid.dim;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let axes = ["x", "y", "z"];
    let vels = ["vx", "vy", "vz"];
    let mut header: Vec<&str> = axes[..dim].to_vec();
    header.push("rho");
    header.extend(&vels[..dim]);
    header.extend(["p", "mach"]);
    w.write_record(&header)?;
    let g = &field.grid;
    for n in 0..g.n_interior() {
        let x = g.cell_center(g.interior_coords(n));
        let q = cons_to_prim(field.interior(n), eos)?;
        let mut rec: Vec<String> = x[..dim].iter().map(|v| fmt17(*v)).collect();
        rec.push(fmt17(q.rho));
        rec.extend(q.vel[..dim].iter().map(|v| fmt17(*v)));
        rec.push(fmt17(q.p));
        rec.push(fmt17(q.speed() / eos.sound_speed(&q)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub final_row: Vec<f64>,
    pub initial_row: Vec<f64>,
    pub dumps: Vec<PathBuf>,
}

impl RunSummary {
    /// `E_kin(t_end) / E_kin(0)`.
    pub fn kinetic_energy_ratio(&self) -> f64 {
        self.final_row[1] / self.initial_row[1]
    }
}

/// Run to `t_end`, handing each state to `observe` (including the initial
/// one at step 0).
pub fn drive(
    cfg: &RunConfig,
    sim: &mut Simulation,
    mut observe: impl FnMut(&Simulation, bool) -> Result<(), RunError>,
) -> Result<(), RunError> {
    observe(sim, false)?;
    while sim.t < cfg.t_end {
        sim.step(cfg.t_end)?;
        let last = sim.t >= cfg.t_end || cfg.max_steps.is_some_and(|m| sim.steps >= m);
        observe(sim, last)?;
        if last {
            break;
        }
    }
    Ok(())
}

/// Full run with `series.csv`, `field_<step>.csv` and `run.json` in `dir`.
/// On solver failure the series so far is flushed, the last good state is
/// dumped and `run.json` records the error.
pub fn run(cfg: &RunConfig, dir: &Path, parallel: bool) -> Result<RunSummary, RunError> {
    let started = Instant::now();
    fs::create_dir_all(dir)?;
    let (case, mut sim) = build(cfg, parallel)?;
    let dim = sim.field.grid.dim;
    let mut series = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("series.csv"))?));
    series.write_record(series_header(dim))?;

    let mut initial_row = Vec::new();
    let mut final_row = Vec::new();
    let mut dumps = Vec::new();
    let mut last_good = sim.field.clone();
    let mut last_step = 0;
    let outcome = drive(cfg, &mut sim, |s, last| {
        let row = series_row(s)?;
        series.write_record(row.iter().map(|v| fmt17(*v)))?;
        if s.steps == 0 {
            initial_row = row.clone();
        }
        if s.steps > 0 && (last || s.steps % cfg.cadence == 0) {
            let p = dir.join(format!("field_{:06}.csv", s.steps));
            write_field(&p, &s.field, &s.disc.eos)?;
            dumps.push(p);
        }
        final_row = row;
        last_good = s.field.clone();
        last_step = s.steps;
        Ok(())
    });
    series.flush()?;

    let status = match &outcome {
        Ok(()) => json!({"ok": true}),
        Err(e) => {
            let p = dir.join(format!("field_{last_step:06}.csv"));
            if !dumps.contains(&p) {
                write_field(&p, &last_good, &case.eos)?;
                dumps.push(p);
            }
            json!({"ok": false, "error": e.to_string()})
        }
    };
    let header = series_header(dim);
    let diagnostics: serde_json::Map<String, serde_json::Value> =
        header.iter().zip(&final_row).map(|(k, v)| (k.to_string(), json!(v))).collect();
    let summary = json!({
        "case": cfg.case,
        "scheme": cfg.flux.scheme.name(),
        "m_cut": cfg.flux.m_cut,
        "stepper": sim.stepper.name(),
        "mach": cfg.case_params.mach,
        "t_end": cfg.t_end,
        "t": sim.t,
        "steps": sim.steps,
        "status": status,
        "final": diagnostics,
        "kinetic_energy_ratio": final_row.get(1).zip(initial_row.get(1)).map(|(a, b)| a / b),
        "newton": {
            "iterations": sim.stats.newton_iters,
            "linear_iterations": sim.stats.linear_iters,
            "last_residual": sim.stats.residual,
        },
        "wall_time_s": started.elapsed().as_secs_f64(),
    });
    let mut f = BufWriter::new(File::create(dir.join("run.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    f.flush()?;

    outcome?;
    Ok(RunSummary { steps: sim.steps, t: sim.t, final_row, initial_row, dumps })
}
