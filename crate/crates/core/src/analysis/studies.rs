//! Parameter studies built on the solver: diffusion in hydrostatic
//! equilibrium and the nondimensional Taylor–Green decay series.

use crate::cases::{hydrostatic_bc, hydrostatic_init};
use crate::error::{invalid, Result};
use crate::flux::{FluxConfig, FluxScheme};
use crate::grid::Grid;
use crate::reconstruction::ReconMode;
use crate::state::Eos;
use crate::time::Discretization;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrostaticParams {
    pub g: f64,
    pub temperature: f64,
    pub rho0: f64,
    pub n_cells: usize,
    pub gamma: f64,
}

impl Default for HydrostaticParams {
    fn default() -> Self {
        Self { g: 1.0, temperature: 1.0, rho0: 1.0, n_cells: 64, gamma: 1.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationRow {
    pub m_cut: f64,
    pub scheme: FluxScheme,
    /// RMS over interior cells and unknowns of `r(scheme) − r(central)`.
    pub norm: f64,
}

/// Size of the upwind diffusion in the residual of the resting isothermal
/// column, per scheme and cut-off Mach number. First-order reconstruction,
/// so the diffusion acts on the raw cell-to-cell pressure jumps.
pub fn hydrostatic_dissipation_study(
    m_cut_list: &[f64],
    schemes: &[FluxScheme],
    params: &HydrostaticParams,
) -> Result<Vec<DissipationRow>> {
    let eos = Eos::new(params.gamma)?;
    let grid = Grid::new(&[params.n_cells], &[0.0], &[1.0], 2)?;
    let field = hydrostatic_init(&grid, params.g, params.temperature, params.rho0, &eos)?;
    let disc = |cfg: FluxConfig| {
        Discretization::new(eos, cfg, ReconMode::Constant, hydrostatic_bc()).with_gravity([-params.g, 0.0, 0.0])
    };
    let central = disc(FluxConfig::new(FluxScheme::Central)).residual_packed(&field)?;
    let mut rows = Vec::new();
    for &scheme in schemes {
        for &m_cut in m_cut_list {
            let r = disc(FluxConfig::new(scheme).with_m_cut(m_cut)).residual_packed(&field)?;
            let ss: f64 = r.iter().zip(&central).map(|(a, b)| (a - b).powi(2)).sum();
            rows.push(DissipationRow { m_cut, scheme, norm: (ss / r.len() as f64).sqrt() });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TgvRow {
    pub t_star: f64,
    pub k_star: f64,
    pub omega_star: f64,
    pub dk_dt: f64,
    /// `−Ω*/(dK*/dt*)`; `+∞` where the kinetic energy is not changing.
    pub re: f64,
}

/// Nondimensional Taylor–Green series `t* = k u₀ t`, `K* = K/u₀²`,
/// `Ω* = Ω/(k u₀)²`, with `dK*/dt*` by centred differences (one-sided at the
/// ends).
pub fn tgv_nondim_series(t: &[f64], k: &[f64], omega: &[f64], u0: f64, wavenumber: f64) -> Result<Vec<TgvRow>> {
    let n = t.len();
    if k.len() != n || omega.len() != n || n < 2 {
        return Err(invalid("series", "need at least two samples of t, K and Omega"));
    }
    if !(u0 > 0.0 && wavenumber > 0.0) {
        return Err(invalid("u0", "velocity and wavenumber scales must be positive"));
    }
    let ts: Vec<f64> = t.iter().map(|v| v * wavenumber * u0).collect();
    let ks: Vec<f64> = k.iter().map(|v| v / (u0 * u0)).collect();
    let os: Vec<f64> = omega.iter().map(|v| v / (wavenumber * u0).powi(2)).collect();
    let deriv = nonuniform_derivative(&ts, &ks)?;
    Ok((0..n)
        .map(|i| {
            let re = if deriv[i] == 0.0 { f64::INFINITY } else { -os[i] / deriv[i] };
            TgvRow { t_star: ts[i], k_star: ks[i], omega_star: os[i], dk_dt: deriv[i], re }
        })
        .collect())
}

/// Three-point derivative on a possibly non-uniform increasing grid.
pub fn nonuniform_derivative(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("t", "samples must be strictly increasing"));
    }
    if n == 2 {
        let d = (y[1] - y[0]) / (x[1] - x[0]);
        return Ok(vec![d, d]);
    }
    // derivative at x[j] of the parabola through points a, b, c
    let three = |a: usize, b: usize, c: usize, j: usize| {
        let (xa, xb, xc) = (x[a], x[b], x[c]);
        let xj = x[j];
        y[a] * (2.0 * xj - xb - xc) / ((xa - xb) * (xa - xc))
            + y[b] * (2.0 * xj - xa - xc) / ((xb - xa) * (xb - xc))
            + y[c] * (2.0 * xj - xa - xb) / ((xc - xa) * (xc - xb))
    };
    Ok((0..n)
        .map(|i| match i {
            0 => three(0, 1, 2, 0),
            _ if i == n - 1 => three(n - 3, n - 2, n - 1, n - 1),
            _ => three(i - 1, i, i + 1, i),
        })
        .collect())
}
