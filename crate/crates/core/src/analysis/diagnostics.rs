//! Scalar diagnostics of a field.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::grid::{BoundaryCondition, GridField};
use crate::state::{cons_to_prim, Eos};

/// Sum of `|û_n|` over the upper half of the resolvable wavenumbers,
/// `N/4 ≤ |n| ≤ N/2`, of the x-velocity trace of a 1D field (unnormalized DFT).
///
/// Both signs of each wavenumber are counted, so the checkerboard `(−1)^i`
/// gives exactly `N`.
pub fn high_mode_sum(field: &GridField) -> Result<f64> {
    if field.grid.dim != 1 {
        return Err(invalid("field", "high_mode_sum needs a 1D field"));
    }
    let n = field.grid.n_cells[0];
    let mut u: Vec<Complex<f64>> = field.interior_states().map(|s| Complex::new(s.mom[0] / s.rho, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut u);
    let lo = n.div_ceil(4);
    Ok(u.iter().enumerate().filter(|&(i, _)| i.min(n - i) >= lo).map(|(_, z)| z.norm()).sum())
}

/// `(max p − min p) / mean p` over the interior, with physical pressures.
pub fn pressure_fluctuation(field: &GridField, eos: &Eos) -> Result<f64> {
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for u in field.interior_states() {
        let p = cons_to_prim(u, eos)?.p;
        lo = lo.min(p);
        hi = hi.max(p);
        sum += p;
    }
    let mean = eos.absolute_pressure(sum / field.grid.n_interior() as f64);
    Ok((hi - lo) / mean)
}

/// `Σ ½ρ|v|² · volume`.
pub fn kinetic_energy_total(field: &GridField) -> f64 {
    field.interior_states().map(|u| u.kinetic_energy()).sum::<f64>() * field.grid.cell_volume()
}

/// Volume average of `½|v|²`.
pub fn specific_kinetic_energy_mean(field: &GridField) -> f64 {
    let n = field.grid.n_interior() as f64;
    field
        .interior_states()
        .map(|u| 0.5 * (u.mom[0] * u.mom[0] + u.mom[1] * u.mom[1] + u.mom[2] * u.mom[2]) / (u.rho * u.rho))
        .sum::<f64>()
        / n
}

pub fn total_energy(field: &GridField, eos: &Eos) -> f64 {
    // the background pressure contributes a constant p_bg/(γ−1) per unit volume
    let bg = eos.p_background / (eos.gamma - 1.0);
    field.interior_states().map(|u| u.energy + bg).sum::<f64>() * field.grid.cell_volume()
}

pub fn total_mass(field: &GridField) -> f64 {
    field.interior_states().map(|u| u.rho).sum::<f64>() * field.grid.cell_volume()
}

pub fn max_mach(field: &GridField, eos: &Eos) -> Result<f64> {
    let mut m = 0.0f64;
    for u in field.interior_states() {
        let q = cons_to_prim(u, eos)?;
        m = m.max(q.speed() / eos.sound_speed(&q));
    }
    Ok(m)
}

/// Cell vorticity by second-order centred differences; ghosts are filled
/// from `bc` on a copy.
pub fn vorticity(field: &GridField, bc: &BoundaryCondition) -> Vec<[f64; 3]> {
    let mut f = field.clone();
    f.fill_ghosts(bc);
    let g = &f.grid;
    let vel = |s: usize| {
        let u = &f.data[s];
        [u.mom[0] / u.rho, u.mom[1] / u.rho, u.mom[2] / u.rho]
    };
    (0..g.n_interior())
        .map(|n| {
            let s = g.interior_storage(n);
            // d[a][b] = ∂v_b/∂x_a
            let mut d = [[0.0; 3]; 3];
            for a in 0..g.dim {
                let st = g.stride(a);
                let (vp, vm) = (vel(s + st), vel(s - st));
                for b in 0..3 {
                    d[a][b] = (vp[b] - vm[b]) / (2.0 * g.spacing[a]);
                }
            }
            [d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]]
        })
        .collect()
}

/// `½⟨|∇×v|²⟩`.
pub fn enstrophy_mean(field: &GridField, bc: &BoundaryCondition) -> f64 {
    let w = vorticity(field, bc);
    w.iter().map(|v| 0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).sum::<f64>() / w.len() as f64
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("samples", "need at least two matching points"));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(invalid("samples", "log-log fit needs positive values"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
