//! Initial and boundary data for the benchmark problems.
//!
//! Each initializer takes the equation of state it should sample with. The
//! `*_eos` helpers pick a background pressure near the case's base pressure so
//! that pressure fluctuations stay representable at very low Mach numbers;
//! any background gives the same physical state.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::grid::{BoundaryCondition, BoundaryKind, Grid, GridField};
use crate::state::{Eos, PrimitiveState};

/// γ used for the Gresho vortex unless configured otherwise.
pub const GRESHO_GAMMA: f64 = 5.0 / 3.0;

/// Pressure at the vortex centre for maximum Mach number `mach`.
pub fn gresho_center_pressure(gamma: f64, mach: f64) -> f64 {
    1.0 / (gamma * mach * mach) - 0.5
}

/// Azimuthal speed and pressure offset from the centre value at radius `r`.
pub fn gresho_profile(r: f64) -> (f64, f64) {
    if r < 0.2 {
        (5.0 * r, 12.5 * r * r)
    } else if r < 0.4 {
        (2.0 - 5.0 * r, 4.0 * (5.0 * r).ln() + 4.0 - 20.0 * r + 12.5 * r * r)
    } else {
        (0.0, 4.0 * 2f64.ln() - 2.0)
    }
}

pub fn gresho_eos(gamma: f64, mach: f64) -> Result<Eos> {
    Eos::with_background(gamma, gresho_center_pressure(gamma, mach))
}

/// 40×40-style grid on `[−0.5, 0.5]²`.
pub fn gresho_grid(n: usize, n_ghost: usize) -> Result<Grid> {
    Grid::new(&[n, n], &[-0.5, -0.5], &[0.5, 0.5], n_ghost)
}

pub fn gresho_init(grid: &Grid, mach: f64, eos: &Eos) -> Result<GridField> {
    if grid.dim != 2 {
        return Err(invalid("grid", "the Gresho vortex is two-dimensional"));
    }
    if !(mach > 0.0 && mach <= 1.0) {
        return Err(invalid("mach", "must lie in (0, 1]"));
    }
    let pc = gresho_center_pressure(eos.gamma, mach);
    Ok(GridField::from_primitive(grid.clone(), eos, |x| {
        let r = x[0].hypot(x[1]);
        let (vphi, dp) = gresho_profile(r);
        let (ex, ey) = if r > 0.0 { (-x[1] / r, x[0] / r) } else { (0.0, 0.0) };
        // offsets are added before the shift so small fluctuations keep their digits
        let p = (pc - eos.p_background) + dp;
        PrimitiveState { rho: 1.0, vel: [vphi * ex, vphi * ey, 0.0], p }
    }))
}

/// Sound wave on `[0, 1)` with wavenumber 2π. The density line uses `p0` as
/// its base value, as in the usual statement of this test.
pub fn sound_wave_init(grid: &Grid, mach: f64, p0: f64, rho0: f64, eos: &Eos) -> Result<GridField> {
    if grid.dim != 1 {
        return Err(invalid("grid", "the sound wave is one-dimensional"));
    }
    if !(p0 > 0.0 && rho0 > 0.0) || !(mach >= 0.0) {
        return Err(invalid("sound_wave", "needs p0, rho0 > 0 and mach >= 0"));
    }
    let c0 = (eos.gamma * p0 / rho0).sqrt();
    let k = 2.0 * PI;
    Ok(GridField::from_primitive(grid.clone(), eos, |x| {
        let cs = (k * x[0]).cos();
        PrimitiveState {
            rho: p0 * (1.0 + mach * cs),
            vel: [mach * c0 * cs, 0.0, 0.0],
            p: (p0 - eos.p_background) + rho0 * c0 * c0 * mach * cs,
        }
    }))
}

pub fn sound_wave_grid(n: usize) -> Result<Grid> {
    Grid::new(&[n], &[0.0], &[1.0], 2)
}

pub fn shock_tube_states(gamma: f64) -> (PrimitiveState, PrimitiveState) {
    (
        PrimitiveState { rho: 3.0, vel: [0.9, 0.0, 0.0], p: 3.0 },
        PrimitiveState { rho: 1.0, vel: [0.9, 0.0, 0.0], p: 3f64.powf(1.0 - gamma) },
    )
}

pub fn shock_tube_init(grid: &Grid, eos: &Eos) -> Result<GridField> {
    if grid.dim != 1 {
        return Err(invalid("grid", "the shock tube is one-dimensional"));
    }
    let (l, r) = shock_tube_states(eos.gamma);
    let bg = eos.p_background;
    Ok(GridField::from_primitive(grid.clone(), eos, |x| {
        let q = if x[0] < 0.5 { l } else { r };
        PrimitiveState { p: q.p - bg, ..q }
    }))
}

pub const TGV_RHO0: f64 = 1.178e-3;
pub const TGV_U0: f64 = 1e4;
pub const TGV_K: f64 = 1e-2;
pub const TGV_P0: f64 = 1e6;

pub fn taylor_green_eos() -> Result<Eos> {
    Eos::with_background(1.4, TGV_P0)
}

/// Periodic cube `[0, 2π/k)³` with `n³` cells.
pub fn taylor_green_grid(n: usize, n_ghost: usize) -> Result<Grid> {
    let l = 2.0 * PI / TGV_K;
    Grid::new(&[n, n, n], &[0.0; 3], &[l; 3], n_ghost)
}

pub fn taylor_green_init(grid: &Grid, mach_scale: f64, eos: &Eos) -> Result<GridField> {
    if grid.dim != 3 {
        return Err(invalid("grid", "the Taylor–Green vortex is three-dimensional"));
    }
    if !(mach_scale > 0.0 && mach_scale <= 1.0) {
        return Err(invalid("mach_scale", "must lie in (0, 1]"));
    }
    let u0 = TGV_U0 * mach_scale;
    let k = TGV_K;
    Ok(GridField::from_primitive(grid.clone(), eos, |x| {
        let (sx, cx) = (k * x[0]).sin_cos();
        let (sy, cy) = (k * x[1]).sin_cos();
        let cz = (k * x[2]).cos();
        let dp = u0 * u0 * TGV_RHO0 / 16.0 * (2.0 + (2.0 * k * x[2]).cos()) * ((2.0 * k * x[0]).cos() + (2.0 * k * x[1]).cos());
        PrimitiveState {
            rho: TGV_RHO0,
            vel: [u0 * sx * cy * cz, -u0 * cx * sy * cz, 0.0],
            p: (TGV_P0 - eos.p_background) + dp,
        }
    }))
}

/// Isothermal hydrostatic column `ρ = ρ₀ exp(−g x / T)`, `p = ρT`, at rest,
/// under gravity `−g` along x. Ghost cells carry the analytic profile and are
/// held fixed.
pub fn hydrostatic_init(grid: &Grid, g: f64, temperature: f64, rho0: f64, eos: &Eos) -> Result<GridField> {
    if grid.dim != 1 {
        return Err(invalid("grid", "the hydrostatic column is one-dimensional"));
    }
    if !(temperature > 0.0 && rho0 > 0.0) {
        return Err(invalid("hydrostatic", "needs T, rho0 > 0"));
    }
    Ok(GridField::from_primitive(grid.clone(), eos, |x| {
        let rho = hydrostatic_density(x[0], g, temperature, rho0);
        PrimitiveState { rho, vel: [0.0; 3], p: rho * temperature - eos.p_background }
    }))
}

pub fn hydrostatic_density(x: f64, g: f64, temperature: f64, rho0: f64) -> f64 {
    rho0 * (-g * x / temperature).exp()
}

pub fn hydrostatic_bc() -> BoundaryCondition {
    BoundaryCondition::uniform(BoundaryKind::Fixed)
}

/// Parameters understood by [`setup`]; unused fields are ignored per case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseParams {
    pub mach: f64,
    pub mach_scale: f64,
    pub n_cells: Vec<usize>,
    pub gamma: Option<f64>,
    pub gravity: f64,
    pub temperature: f64,
    pub rho0: f64,
    pub p0: f64,
    pub n_ghost: usize,
}

impl Default for CaseParams {
    fn default() -> Self {
        Self {
            mach: 1e-2,
            mach_scale: 1.0,
            n_cells: Vec::new(),
            gamma: None,
            gravity: 1.0,
            temperature: 1.0,
            rho0: 1.0,
            p0: 1.0,
            n_ghost: 2,
        }
    }
}

/// A ready-to-run problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: &'static str,
    pub field: GridField,
    pub eos: Eos,
    pub bc: BoundaryCondition,
    pub gravity: Option<[f64; 3]>,
}

pub const CASE_NAMES: [&str; 5] = ["gresho", "sound_wave", "shock_tube", "taylor_green", "hydrostatic"];

fn cells(p: &CaseParams, dim: usize, default: usize) -> Result<Vec<usize>> {
    match p.n_cells.len() {
        0 => Ok(vec![default; dim]),
        n if n == dim => Ok(p.n_cells.clone()),
        _ => Err(invalid("n_cells", format!("this case needs {dim} cell counts"))),
    }
}

/// Build a registered case by name.
pub fn setup(name: &str, p: &CaseParams) -> Result<Case> {
    let g = p.n_ghost;
    match name {
        "gresho" => {
            let n = cells(p, 2, 40)?;
            let eos = gresho_eos(p.gamma.unwrap_or(GRESHO_GAMMA), p.mach)?;
            let grid = Grid::new(&n, &[-0.5, -0.5], &[0.5, 0.5], g)?;
            let field = gresho_init(&grid, p.mach, &eos)?;
            Ok(Case { name: "gresho", field, eos, bc: BoundaryCondition::periodic(), gravity: None })
        }
        "sound_wave" => {
            let n = cells(p, 1, 64)?;
            let eos = Eos::with_background(p.gamma.unwrap_or(1.4), p.p0)?;
            let grid = Grid::new(&n, &[0.0], &[1.0], g)?;
            let field = sound_wave_init(&grid, p.mach, p.p0, p.rho0, &eos)?;
            Ok(Case { name: "sound_wave", field, eos, bc: BoundaryCondition::periodic(), gravity: None })
        }
        "shock_tube" => {
            let n = cells(p, 1, 400)?;
            let eos = Eos::new(p.gamma.unwrap_or(1.4))?;
            let grid = Grid::new(&n, &[0.0], &[1.0], g)?;
            let field = shock_tube_init(&grid, &eos)?;
            let bc = BoundaryCondition::uniform(BoundaryKind::Outflow);
            Ok(Case { name: "shock_tube", field, eos, bc, gravity: None })
        }
        "taylor_green" => {
            let n = cells(p, 3, 32)?;
            let eos = Eos::with_background(p.gamma.unwrap_or(1.4), TGV_P0)?;
            let l = 2.0 * PI / TGV_K;
            let grid = Grid::new(&n, &[0.0; 3], &[l; 3], g)?;
            let field = taylor_green_init(&grid, p.mach_scale, &eos)?;
            Ok(Case { name: "taylor_green", field, eos, bc: BoundaryCondition::periodic(), gravity: None })
        }
        "hydrostatic" => {
            let n = cells(p, 1, 64)?;
            let eos = Eos::new(p.gamma.unwrap_or(1.4))?;
            let grid = Grid::new(&n, &[0.0], &[1.0], g)?;
            let field = hydrostatic_init(&grid, p.gravity, p.temperature, p.rho0, &eos)?;
            Ok(Case { name: "hydrostatic", field, eos, bc: hydrostatic_bc(), gravity: Some([-p.gravity, 0.0, 0.0]) })
        }
        other => Err(invalid("case", format!("unknown case `{other}` (known: {})", CASE_NAMES.join(", ")))),
    }
}
