//! `analyze` subcommands: small CSV tables from the analysis toolkit.

use std::io::Write;

use lowmach::analysis::{
    condition_snapshot, hydrostatic_dissipation_study, jacobian_condition_study, loglog_slope, scheme_nu_max,
    ConditionMode, HydrostaticParams,
};
use lowmach::flux::FluxScheme;
use lowmach::reconstruction::ReconMode;
use lowmach::state::Eos;
use lowmach::time::TimeStepPolicy;

use crate::config::RunConfig;
use crate::runner::{build, drive, fmt17, series_row, RunError};

/// `(M, scheme, nu_max)` of the von Neumann scanner on the unit-flow state.
pub fn stability(
    out: &mut impl Write,
    schemes: &[FluxScheme],
    machs: &[f64],
    m_cut: Option<f64>,
    gamma: f64,
) -> Result<(), RunError> {
    let eos = Eos::new(gamma)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M", "scheme", "nu_max"])?;
    for &m in machs {
        for &s in schemes {
            let nu = scheme_nu_max(s, m, m_cut.unwrap_or(s.default_m_cut()), &eos)?;
            w.write_record([fmt17(m), s.name().to_string(), fmt17(nu)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionArgs {
    pub n: usize,
    pub amp: f64,
    pub seed: u64,
    pub cfl: f64,
    pub exact: bool,
}

/// `(M, scheme, kappa)` on the perturbed Gresho snapshot.
pub fn condition(
    out: &mut impl Write,
    schemes: &[FluxScheme],
    machs: &[f64],
    a: &ConditionArgs,
) -> Result<(), RunError> {
    let mode = if a.exact { ConditionMode::ExactDense } else { ConditionMode::HagerEstimate };
    let rows = jacobian_condition_study(
        |m| condition_snapshot(a.n, m, a.amp, a.seed),
        schemes,
        machs,
        &TimeStepPolicy::advective(a.cfl),
        ReconMode::LinearUnlimited,
        mode,
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M", "scheme", "kappa"])?;
    for r in rows {
        w.write_record([fmt17(r.mach), r.scheme.name().to_string(), fmt17(r.kappa)])?;
    }
    w.flush()?;
    Ok(())
}

/// `(M_cut, scheme, dissipation_norm)` on the resting isothermal column.
pub fn hydrostatic(
    out: &mut impl Write,
    schemes: &[FluxScheme],
    cuts: &[f64],
    params: &HydrostaticParams,
) -> Result<(), RunError> {
    let rows = hydrostatic_dissipation_study(cuts, schemes, params)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M_cut", "scheme", "dissipation_norm"])?;
    for r in rows {
        w.write_record([fmt17(r.m_cut), r.scheme.name().to_string(), fmt17(r.norm)])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs `cfg` once per Mach number and emits `(M, ekin_ratio,
/// pressure_fluctuation)` at the final time, plus the log-log slope of the
/// pressure fluctuation on stderr.
pub fn mscan(out: &mut impl Write, cfg: &RunConfig, machs: &[f64], parallel: bool) -> Result<Vec<(f64, f64, f64)>, RunError> {
    let mut rows = Vec::new();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["M", "ekin_ratio", "pressure_fluctuation"])?;
    for &m in machs {
        let mut c = cfg.clone();
        c.case_params.mach = m;
        let (_, mut sim) = build(&c, parallel)?;
        let mut first = Vec::new();
        let mut last = Vec::new();
        drive(&c, &mut sim, |s, _| {
            let r = series_row(s)?;
            if s.steps == 0 {
                first = r.clone();
            }
            last = r;
            Ok(())
        })?;
        let row = (m, last[1] / first[1], last[5]);
        w.write_record([fmt17(row.0), fmt17(row.1), fmt17(row.2)])?;
        w.flush()?;
        rows.push(row);
    }
    let (ms, pf): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.0, r.2)).unzip();
    if let Ok(s) = loglog_slope(&ms, &pf) {
        eprintln!("pressure fluctuation slope vs M: {s:.4}");
    }
    Ok(rows)
}
