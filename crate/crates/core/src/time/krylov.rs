//! Restarted GMRES with left preconditioning and diagonal scaling.

use crate::error::{Error, Result};

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
}

pub trait Preconditioner {
    /// `z ≈ A⁻¹ r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// A dense matrix as an operator (row-major nalgebra storage is irrelevant here).
impl LinearOperator for nalgebra::DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let v = self * nalgebra::DVector::from_column_slice(x);
        y.copy_from_slice(v.as_slice());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// `‖W M⁻¹(b − Ax)‖ ≤ tol·‖W M⁻¹ b‖`.
    Preconditioned,
    /// `‖W(b − Ax)‖ ≤ tol·‖W b‖`.
    True,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub criterion: Criterion,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: 40, max_iters: 400, tol: 1e-4, criterion: Criterion::Preconditioned }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KrylovStats {
    pub iters: usize,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b`. `weights` scales unknowns for the norms (all ones if `None`).
pub fn gmres(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    weights: Option<&[f64]>,
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, KrylovStats)> {
    match gmres_partial(a, m, b, weights, cfg)? {
        (x, st, true) => Ok((x, st)),
        (_, st, false) => Err(Error::LinearSolveFailure { iters: st.iters, residual: st.residual }),
    }
}

/// Like [`gmres`], but an iteration that runs out of steps returns its last
/// iterate with `false` instead of an error.
pub fn gmres_partial(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    weights: Option<&[f64]>,
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, KrylovStats, bool)> {
    let n = a.dim();
    let ones;
    let w = match weights {
        Some(w) => w,
        None => {
            ones = vec![1.0; n];
            &ones
        }
    };
    let mut x = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut z = vec![0.0; n];
    // scaled, preconditioned residual of the current iterate
    let prec_res = |x: &[f64], out: &mut Vec<f64>, raw: &mut Vec<f64>| -> Result<()> {
        a.apply(x, raw)?;
        for i in 0..n {
            raw[i] = b[i] - raw[i];
        }
        m.apply(raw, out);
        for i in 0..n {
            out[i] *= w[i];
        }
        Ok(())
    };
    let scaled_b: Vec<f64> = b.iter().zip(w).map(|(v, s)| v * s).collect();
    let true_ref = norm(&scaled_b);
    m.apply(b, &mut z);
    let prec_ref = norm(&z.iter().zip(w).map(|(v, s)| v * s).collect::<Vec<_>>());
    if true_ref == 0.0 || prec_ref == 0.0 {
        return Ok((x, KrylovStats::default(), true));
    }
    let restart = cfg.restart.max(1);
    let mut iters = 0;
    let mut r = vec![0.0; n];
    let mut raw = vec![0.0; n];
    let mut target = cfg.tol;
    loop {
        prec_res(&x, &mut r, &mut raw)?;
        let beta = norm(&r);
        let measured = match cfg.criterion {
            Criterion::Preconditioned => beta / prec_ref,
            Criterion::True => norm(&raw.iter().zip(w).map(|(v, s)| v * s).collect::<Vec<_>>()) / true_ref,
        };
        if measured <= cfg.tol {
            return Ok((x, KrylovStats { iters, residual: measured }, true));
        }
        if iters >= cfg.max_iters {
            return Ok((x, KrylovStats { iters, residual: measured }, false));
        }
        if cfg.criterion == Criterion::True && iters > 0 {
            // the preconditioned estimate was met but the true residual was not
            target = (target * 0.1).max(1e-15);
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            // v = W M⁻¹ A W⁻¹ basis[k]
            for i in 0..n {
                tmp[i] = basis[k][i] / w[i];
            }
            a.apply(&tmp, &mut raw)?;
            m.apply(&raw, &mut z);
            let mut v: Vec<f64> = z.iter().zip(w).map(|(a, s)| a * s).collect();
            for _ in 0..2 {
                for (j, bj) in basis.iter().enumerate() {
                    let hj = dot(&v, bj);
                    h[j][k] += hj;
                    for i in 0..n {
                        v[i] -= hj * bj[i];
                    }
                }
            }
            let hn = norm(&v);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if d == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iters += 1;
            k_used = k + 1;
            if g[k + 1].abs() / prec_ref <= target || iters >= cfg.max_iters || hn == 0.0 {
                break;
            }
            basis.push(v.iter().map(|x| x / hn).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * basis[j][i] / w[i];
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::LinearSolveFailure { iters, residual: f64::INFINITY });
        }
    }
}

/// GMRES solve of `A x = b` to `‖Ax − b‖ ≤ tol·‖b‖`.
pub fn krylov_solve(a: &dyn LinearOperator, m: &dyn Preconditioner, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let cfg = GmresConfig { tol, criterion: Criterion::True, max_iters: 20 * a.dim().max(50), ..Default::default() };
    gmres(a, m, b, None, &cfg).map(|(x, _)| x)
}
