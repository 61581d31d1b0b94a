//! 1-norm condition numbers of implicit-step Jacobians.

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::cases::{gresho_eos, gresho_init};
use crate::error::{Error, Result};
use crate::flux::{FluxConfig, FluxScheme};
use crate::grid::{BoundaryCondition, Grid, GridField};
use crate::reconstruction::ReconMode;
use crate::state::{cons_to_prim, nvar, prim_to_cons, PrimitiveState};
use crate::time::{assemble_jacobian, compute_dt, Discretization, JacobianMode, TimeStepPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMode {
    ExactDense,
    HagerEstimate,
}

pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `κ₁(A) = ‖A‖₁ ‖A⁻¹‖₁`, exactly or with Hager's lower-bound estimator.
pub fn condition_number_1norm(a: &DMatrix<f64>, mode: ConditionMode) -> Result<f64> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(crate::error::invalid("matrix", "must be square and non-empty"));
    }
    let lu = a.clone().lu();
    let inv_norm = match mode {
        ConditionMode::ExactDense => norm1(&lu.try_inverse().ok_or(Error::SingularMatrix)?),
        ConditionMode::HagerEstimate => {
            if !lu.is_invertible() {
                return Err(Error::SingularMatrix);
            }
            let at_lu = a.transpose().lu();
            hager_inverse_norm(a.nrows(), |x| lu.solve(x), |x| at_lu.solve(x))?
        }
    };
    if !inv_norm.is_finite() {
        return Err(Error::SingularMatrix);
    }
    Ok(norm1(a) * inv_norm)
}

type Vector = nalgebra::DVector<f64>;

/// Hager's estimate of `‖B‖₁` given products with `B` and `Bᵀ`.
pub fn hager_inverse_norm(
    n: usize,
    solve: impl Fn(&Vector) -> Option<Vector>,
    solve_t: impl Fn(&Vector) -> Option<Vector>,
) -> Result<f64> {
    let mut x = Vector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = solve(&x).ok_or(Error::SingularMatrix)?;
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve_t(&xi).ok_or(Error::SingularMatrix)?;
        let (j, zmax) = z.iter().enumerate().fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        if zmax <= z.dot(&x) {
            break;
        }
        x = Vector::zeros(n);
        x[j] = 1.0;
    }
    // Higham's alternating-sign vector guards against unlucky cancellation
    let alt = Vector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
    });
    let y = solve(&alt).ok_or(Error::SingularMatrix)?;
    let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
    Ok(est.max(alt_est))
}

/// Gresho vortex at Mach `mach` on `n×n` cells plus a small solenoidal
/// velocity perturbation drawn from `seed`, with relative amplitude `amp`.
pub fn condition_snapshot(n: usize, mach: f64, amp: f64, seed: u64) -> Result<(GridField, crate::state::Eos)> {
    let eos = gresho_eos(crate::cases::GRESHO_GAMMA, mach)?;
    let grid = Grid::new(&[n, n], &[-0.5, -0.5], &[0.5, 0.5], 2)?;
    let mut field = gresho_init(&grid, mach, &eos)?;
    let mut rng = StdRng::seed_from_u64(seed);
    // stream function ψ = Σ a sin(2π(k·x) + φ); velocity (∂ψ/∂y, −∂ψ/∂x)
    let modes: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let kx = rng.gen_range(1..=3) as f64;
            let ky = rng.gen_range(1..=3) as f64;
            let a = rng.gen_range(-1.0..1.0) / (2.0 * std::f64::consts::PI * (kx * kx + ky * ky).sqrt());
            (kx, ky, a, rng.gen_range(0.0..2.0 * std::f64::consts::PI))
        })
        .collect();
    let tau = 2.0 * std::f64::consts::PI;
    for i in 0..grid.n_interior() {
        let x = grid.cell_center(grid.interior_coords(i));
        let (mut du, mut dv) = (0.0, 0.0);
        for &(kx, ky, a, ph) in &modes {
            let c = (tau * (kx * x[0] + ky * x[1]) + ph).cos() * tau * a;
            du += c * ky;
            dv -= c * kx;
        }
        let u = field.interior_mut(i);
        let q = cons_to_prim(u, &eos)?;
        let q = PrimitiveState { vel: [q.vel[0] + amp * du, q.vel[1] + amp * dv, 0.0], ..q };
        *u = prim_to_cons(&q, &eos);
    }
    Ok((field, eos))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionRow {
    pub mach: f64,
    pub scheme: FluxScheme,
    pub kappa: f64,
}

/// Condition number of `I + Δt ∂r/∂U` per scheme and Mach number, on the
/// snapshot produced by `snapshot(mach)`.
///
/// The Jacobian is taken in flow units: density over its maximum `ρ_ref`,
/// momentum over `ρ_ref v_ref` and energy over `ρ_ref c_ref²`, with `v_ref`
/// the largest speed and `c_ref` the largest sound speed. Below `M ≈ 1e-5`
/// the resulting `κ` exceeds `1/ε` and is no longer resolved in double
/// precision.
pub fn jacobian_condition_study(
    snapshot: impl Fn(f64) -> Result<(GridField, crate::state::Eos)>,
    schemes: &[FluxScheme],
    mach_list: &[f64],
    dt_policy: &TimeStepPolicy,
    recon: ReconMode,
    mode: ConditionMode,
) -> Result<Vec<ConditionRow>> {
    let mut rows = Vec::new();
    for &mach in mach_list {
        let (field, eos) = snapshot(mach)?;
        let dt = compute_dt(&field, dt_policy, &eos)?;
        for &scheme in schemes {
            let disc = Discretization::new(eos, FluxConfig::new(scheme), recon, BoundaryCondition::periodic());
            let mut j = assemble_jacobian(&field, &disc, dt, JacobianMode::FiniteDifferenceColored)?.to_dense();
            flow_units(&mut j, &field, &eos);
            rows.push(ConditionRow { mach, scheme, kappa: condition_number_1norm(&j, mode)? });
        }
    }
    Ok(rows)
}

/// `D⁻¹ J D` with `D` the per-unknown flow-unit scale: density `ρ_ref`,
/// momentum `ρ_ref v_ref`, energy `ρ_ref c_ref²`. This is the usual Mach
/// nondimensionalisation, where the pressure gradient carries `1/M²`.
fn flow_units(j: &mut DMatrix<f64>, field: &GridField, eos: &crate::state::Eos) {
    let dim = field.grid.dim;
    let nv = nvar(dim);
    let rho_ref = field.interior_states().map(|u| u.rho).fold(0.0, f64::max);
    let v_ref = field
        .interior_states()
        .map(|u| (u.mom[0].powi(2) + u.mom[1].powi(2) + u.mom[2].powi(2)).sqrt() / u.rho)
        .fold(0.0, f64::max);
    if !(rho_ref > 0.0 && v_ref > 0.0) {
        return;
    }
    let c_ref = field.interior_states().filter_map(|u| cons_to_prim(u, eos).ok()).map(|q| eos.sound_speed(&q)).fold(0.0, f64::max);
    let scale = |k: usize| match k {
        0 => rho_ref,
        k if k == nv - 1 => rho_ref * c_ref * c_ref,
        _ => rho_ref * v_ref,
    };
    let n = j.nrows();
    for c in 0..n {
        for r in 0..n {
            j[(r, c)] *= scale(c % nv) / scale(r % nv);
        }
    }
}
