//! Implicit steppers with an inexact Newton–Krylov solver.

use crate::error::{invalid, Error, Result};
use crate::grid::GridField;
use crate::reconstruction::prim_from_vec;
use crate::state::{cons_to_prim, PrimitiveState, Vec5};
use crate::time::jacobian::{assemble_jacobian, unknown_scales, BlockJacobi, JacobianMode, MatrixFree};
use crate::time::krylov::{gmres_partial, Criterion, GmresConfig, IdentityPreconditioner, LinearOperator, Preconditioner};
use crate::time::residual::Discretization;
use crate::time::spectral::SpectralPreconditioner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImplicitScheme {
    BackwardEuler,
    /// Two implicit stages, stiffly accurate and L-stable (TR-BDF2 tableau).
    Esdirk23,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearPreconditioner {
    None,
    BlockJacobi,
    /// FFT-diagonalized operator about the mean rest state.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub tol_rel: f64,
    /// Absolute tolerance as a fraction of the scaled norm of `U`.
    pub tol_abs: f64,
    /// Converged once the scaled Newton update falls below this.
    pub step_tol: f64,
    /// Also converged when the update is below this and the residual has
    /// stopped decreasing (rounding floor at very low Mach number).
    pub stall_tol: f64,
    pub max_iters: usize,
    pub linear_tol: f64,
    pub jacobian_mode: JacobianMode,
    pub preconditioner: LinearPreconditioner,
    pub restart: usize,
    pub max_linear_iters: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_rel: 1e-8,
            tol_abs: 1e-12,
            step_tol: 1e-10,
            stall_tol: 1e-7,
            max_iters: 20,
            linear_tol: 1e-4,
            jacobian_mode: JacobianMode::FiniteDifferenceColored,
            preconditioner: LinearPreconditioner::BlockJacobi,
            restart: 40,
            max_linear_iters: 400,
        }
    }
}

impl NewtonConfig {
    /// Colored Jacobian with the spectral preconditioner, for periodic grids
    /// at low Mach number. Matrix-free products are cheaper but their
    /// differencing noise swamps the pressure rows below M ≈ 1e-6.
    pub fn spectral() -> Self {
        Self { preconditioner: LinearPreconditioner::Spectral, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol_rel", self.tol_rel), ("tol_abs", self.tol_abs), ("linear_tol", self.linear_tol)] {
            if !(v > 0.0) {
                return Err(invalid(name, "must be positive"));
            }
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if self.jacobian_mode == JacobianMode::MatrixFree && self.preconditioner == LinearPreconditioner::BlockJacobi {
            return Err(invalid("preconditioner", "block Jacobi needs an assembled Jacobian"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub newton_iters: usize,
    pub linear_iters: usize,
    /// Final scaled nonlinear residual of the last stage.
    pub residual: f64,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.newton_iters += o.newton_iters;
        self.linear_iters += o.linear_iters;
        self.residual = o.residual;
    }
}

fn scaled_norm(v: &[f64], scales: &[f64]) -> f64 {
    let nv = scales.len();
    (v.iter().enumerate().map(|(i, a)| (a / scales[i % nv]).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

/// Mean density and pressure over the interior, at rest.
pub fn mean_rest_state(field: &GridField, disc: &Discretization) -> Result<PrimitiveState> {
    let mut m = Vec5::zeros();
    let n = field.grid.n_interior();
    for u in field.interior_states() {
        let q = cons_to_prim(u, &disc.eos)?;
        m[0] += q.rho / n as f64;
        m[4] += q.p / n as f64;
    }
    Ok(prim_from_vec(&m))
}

struct Stage<'a> {
    disc: &'a Discretization,
    template: GridField,
    rhs: Vec<f64>,
    alpha: f64,
    scales: Vec<f64>,
    spectral: Option<SpectralPreconditioner>,
    /// Scaled per-cell energy residual below which `G` is rounding.
    floor: f64,
}

impl Stage<'_> {
    /// `G(x) = x + α r(x) − rhs`, or `None` if `x` is not a valid state.
    fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut f = self.template.clone();
        f.unpack(x);
        if f.interior_states().any(|u| !u.is_valid(&self.disc.eos)) {
            return None;
        }
        let r = self.disc.residual_packed(&f).ok()?;
        Some((0..x.len()).map(|i| x[i] + self.alpha * r[i] - self.rhs[i]).collect())
    }

    /// Scaled residual norm with the energy rows' rounding allowance removed,
    /// so the flow unknowns are always held to the full tolerance.
    fn merit(&self, g: &[f64]) -> f64 {
        let nv = self.scales.len();
        let (mut flow, mut energy) = (0.0, 0.0);
        for (i, a) in g.iter().enumerate() {
            let v = (a / self.scales[i % nv]).powi(2);
            if i % nv == nv - 1 {
                energy += v;
            } else {
                flow += v;
            }
        }
        let n = g.len().max(1) as f64;
        let cells = n / nv as f64;
        ((flow + (energy - self.floor * self.floor * cells).max(0.0)) / n).sqrt()
    }

    fn solve(&self, x0: Vec<f64>, cfg: &NewtonConfig) -> Result<(Vec<f64>, StepStats)> {
        let mut x = x0;
        let mut g = self.eval(&x).ok_or(Error::NewtonDivergence { iters: 0, residual: f64::INFINITY })?;
        let g0 = scaled_norm(&g, &self.scales);
        let xn = scaled_norm(&x, &self.scales);
        let mut stats = StepStats { residual: g0, ..Default::default() };
        for it in 0..cfg.max_iters {
            let gn = scaled_norm(&g, &self.scales);
            stats.residual = gn;
            if self.merit(&g) <= cfg.tol_abs * xn + cfg.tol_rel * g0 || gn == 0.0 {
                return Ok((x, stats));
            }
            let (dx, lin_iters) = self.linear_solve(&x, &g, cfg)?;
            stats.newton_iters = it + 1;
            stats.linear_iters += lin_iters;
            let dn = scaled_norm(&dx, &self.scales);
            // backtrack on the residual norm; noise in the residual can stall
            // the decrease near convergence, so an admissible full step is kept
            let mut lambda = 1.0;
            let mut accepted = None;
            let mut fallback = None;
            for _ in 0..6 {
                let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + lambda * b).collect();
                if let Some(gt) = self.eval(&trial) {
                    let tn = scaled_norm(&gt, &self.scales);
                    if tn <= (1.0 - 1e-4 * lambda) * gn {
                        accepted = Some((trial, gt));
                        break;
                    }
                    if fallback.is_none() {
                        fallback = Some((trial, gt));
                    }
                }
                lambda *= 0.5;
            }
            let Some((xt, gt)) = accepted.or(fallback) else {
                return Err(Error::NewtonDivergence { iters: it + 1, residual: gn });
            };
            x = xt;
            g = gt;
            let new_gn = scaled_norm(&g, &self.scales);
            let tiny_step = lambda == 1.0 && dn <= cfg.step_tol * (1.0 + xn);
            // residual stuck at its rounding floor while the iterate no longer moves
            let stalled = dn <= cfg.stall_tol * (1.0 + xn) && new_gn > 0.5 * gn;
            if tiny_step || stalled {
                stats.residual = new_gn;
                return Ok((x, stats));
            }
        }
        let gn = scaled_norm(&g, &self.scales);
        if self.merit(&g) <= cfg.tol_abs * xn + cfg.tol_rel * g0 {
            return Ok((x, stats));
        }
        Err(Error::NewtonDivergence { iters: cfg.max_iters, residual: gn })
    }

    fn linear_solve(&self, x: &[f64], g: &[f64], cfg: &NewtonConfig) -> Result<(Vec<f64>, usize)> {
        let mut field = self.template.clone();
        field.unpack(x);
        let b: Vec<f64> = g.iter().map(|v| -v).collect();
        let weights: Vec<f64> = (0..b.len()).map(|i| 1.0 / self.scales[i % self.scales.len()]).collect();
        let gcfg = GmresConfig {
            restart: cfg.restart,
            max_iters: cfg.max_linear_iters,
            tol: cfg.linear_tol,
            criterion: Criterion::Preconditioned,
        };
        let (op, jac): (Box<dyn LinearOperator + '_>, _) = match cfg.jacobian_mode {
            JacobianMode::MatrixFree => {
                (Box::new(MatrixFree::new(self.disc, &field, self.alpha, self.scales.clone())?), None)
            }
            mode => {
                let j = assemble_jacobian(&field, self.disc, self.alpha, mode)?;
                (Box::new(j.clone()), Some(j))
            }
        };
        let bj;
        let pre: &dyn Preconditioner = match cfg.preconditioner {
            LinearPreconditioner::None => &IdentityPreconditioner,
            LinearPreconditioner::BlockJacobi => {
                bj = BlockJacobi::new(jac.as_ref().expect("validated: block Jacobi needs an assembled Jacobian"))?;
                &bj
            }
            LinearPreconditioner::Spectral => self.spectral.as_ref().expect("built with the stage"),
        };
        // a run that hit its iteration limit still returns its best iterate;
        // at very low Mach number the linear residual stalls at the rounding
        // level of the energy rows, and the line search decides if it helps
        let (dx, st, _converged) = gmres_partial(op.as_ref(), pre, &b, Some(&weights), &gcfg)?;
        if !st.residual.is_finite() {
            return Err(Error::LinearSolveFailure { iters: st.iters, residual: st.residual });
        }
        Ok((dx, st.iters))
    }
}

/// Rounding level of the scaled stage residual. The background enthalpy flux
/// `h_bg·v_n` carries an absolute error of order `ε·h_bg·|v|` per face, which
/// after differencing dominates the energy residual at very low Mach number.
fn residual_floor(field: &GridField, disc: &Discretization, alpha: f64, scales: &[f64]) -> f64 {
    let g = &field.grid;
    let v_max = field
        .interior_states()
        .map(|u| (u.mom[0].powi(2) + u.mom[1].powi(2) + u.mom[2].powi(2)).sqrt() / u.rho)
        .fold(0.0, f64::max);
    let inv_h: f64 = g.spacing[..g.dim].iter().map(|h| 1.0 / h).sum();
    let eta = 4.0 * f64::EPSILON * alpha * disc.eos.background_enthalpy() * v_max * inv_h;
    let nv = scales.len();
    eta / scales[nv - 1]
}

/// One implicit step. Returns the new field and solver statistics.
pub fn implicit_step(
    field: &GridField,
    dt: f64,
    scheme: ImplicitScheme,
    disc: &Discretization,
    cfg: &NewtonConfig,
) -> Result<(GridField, StepStats)> {
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    cfg.validate()?;
    let scales = unknown_scales(field, &disc.eos);
    let u0 = field.pack();
    let reference = match cfg.preconditioner {
        LinearPreconditioner::Spectral => Some(mean_rest_state(field, disc)?),
        _ => None,
    };
    let make_stage = |rhs: Vec<f64>, alpha: f64| -> Result<Stage> {
        let spectral = match &reference {
            Some(q) => Some(SpectralPreconditioner::new(&field.grid, disc, q, alpha)?),
            None => None,
        };
        let floor = residual_floor(field, disc, alpha, &scales);
        Ok(Stage { disc, template: field.clone(), rhs, alpha, scales: scales.clone(), spectral, floor })
    };
    let mut stats = StepStats::default();
    let x = match scheme {
        ImplicitScheme::BackwardEuler => {
            let stage = make_stage(u0.clone(), dt)?;
            let (x, s) = stage.solve(u0, cfg)?;
            stats += s;
            x
        }
        ImplicitScheme::Esdirk23 => {
            let (d, w) = esdirk23_coefficients();
            let r0 = disc.residual_packed(field)?;
            let stage = make_stage(u0.iter().zip(&r0).map(|(u, r)| u - dt * d * r).collect(), dt * d)?;
            let (x2, s) = stage.solve(u0.clone(), cfg)?;
            stats += s;
            // stage derivative recovered from the solved stage equation
            let r2: Vec<f64> = (0..x2.len()).map(|i| (stage.rhs[i] - x2[i]) / (dt * d)).collect();
            let rhs3: Vec<f64> = (0..x2.len()).map(|i| u0[i] - dt * w * (r0[i] + r2[i])).collect();
            let stage = Stage { rhs: rhs3, ..stage };
            let (x3, s) = stage.solve(x2, cfg)?;
            stats += s;
            x3
        }
    };
    let mut out = field.clone();
    out.unpack(&x);
    Ok((out, stats))
}

/// Diagonal coefficient and the shared weight of the first two stages in the
/// last row: `[[0,0,0],[d,d,0],[w,w,d]]` with `d = 1 − 1/√2`, `w = √2/4`.
pub fn esdirk23_coefficients() -> (f64, f64) {
    let d = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
    (d, std::f64::consts::SQRT_2 / 4.0)
}
