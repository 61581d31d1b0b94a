//! Linear stability of forward Euler with a first-order flux,
//! `G(ν, β) = I − ν[A i sinβ + D(1 − cosβ)]`.

use nalgebra::{Complex, DMatrix};

use crate::error::{invalid, Error, Result};
use crate::flux::{diffusion_matrix, flux_jacobian, Basis, EntropyFixParams, FluxScheme, Normal};
use crate::state::{active_block, Eos, Mat5, PrimitiveState};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationSpec {
    pub a_mat: DMatrix<f64>,
    pub d_mat: DMatrix<f64>,
    /// Δt/Δx.
    pub nu: f64,
    /// Phase k·Δx.
    pub beta: f64,
}

pub fn amplification_matrix(spec: &AmplificationSpec) -> Result<DMatrix<C64>> {
    if !(spec.nu > 0.0) {
        return Err(invalid("nu", "must be positive"));
    }
    check_pair(&spec.a_mat, &spec.d_mat)?;
    Ok(amplification(&spec.a_mat, &spec.d_mat, spec.nu, spec.beta))
}

fn check_pair(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() || a.shape() != d.shape() {
        return Err(invalid("a_mat", "A and D must be square and of equal size"));
    }
    Ok(())
}

/// `K(β) = A i sinβ + D(1 − cosβ)`, so that `G = I − νK`.
fn symbol(a: &DMatrix<f64>, d: &DMatrix<f64>, beta: f64) -> DMatrix<C64> {
    let (s, c) = beta.sin_cos();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(d[(i, j)] * (1.0 - c), a[(i, j)] * s))
}

fn amplification(a: &DMatrix<f64>, d: &DMatrix<f64>, nu: f64, beta: f64) -> DMatrix<C64> {
    DMatrix::identity(a.nrows(), a.ncols()).map(|x: f64| C64::new(x, 0.0)) - symbol(a, d, beta) * C64::new(nu, 0.0)
}

const SCHUR_MAX_ITERS: usize = 10_000;

fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITERS)
        .ok_or_else(|| Error::EigendecompositionFailure("complex Schur iteration did not converge".into()))?;
    Ok(schur.eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_else(|| {
        // the complex Schur form is triangular, so this branch is not expected
        let (_, t) = schur.unpack();
        (0..t.nrows()).map(|i| t[(i, i)]).collect()
    }))
}

pub fn spectral_radius(m: &DMatrix<C64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Tolerance on the spectral radius in the stability predicate.
pub const RADIUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub nu_max: f64,
    /// Phase with the largest growth just beyond `nu_max`.
    pub beta_critical: f64,
    /// `(β, max|λ|)` sampled at `nu_max`.
    pub spectral_radius_curve: Vec<(f64, f64)>,
}

/// Uniform samples on `[0, 2π)` plus the checkerboard phase π.
pub fn beta_samples(count: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..count).map(|i| 2.0 * std::f64::consts::PI * i as f64 / count as f64).collect();
    if count % 2 == 1 {
        b.push(std::f64::consts::PI);
    }
    b
}

/// Eigenvalues of the symbol at each phase; `max|1 − νμ|` is then cheap for
/// any ν.
struct Spectrum {
    betas: Vec<f64>,
    mu: Vec<Vec<C64>>,
}

impl Spectrum {
    fn new(a: &DMatrix<f64>, d: &DMatrix<f64>, betas: Vec<f64>) -> Result<Self> {
        let mu = betas.iter().map(|&b| eigenvalues(&symbol(a, d, b))).collect::<Result<_>>()?;
        Ok(Self { betas, mu })
    }

    fn radius_at(&self, k: usize, nu: f64) -> f64 {
        self.mu[k].iter().map(|m| (C64::new(1.0, 0.0) - m * nu).norm()).fold(0.0, f64::max)
    }

    /// Largest radius over the phases and the phase where it occurs.
    fn max_radius(&self, nu: f64) -> (f64, f64) {
        (0..self.betas.len())
            .map(|k| (self.radius_at(k, nu), self.betas[k]))
            .fold((0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

/// Largest stable ν by bisection inside `nu_bracket`, to 1e-3 relative.
///
/// The bisection runs on log ν so brackets spanning many decades still
/// converge quickly. If the upper end is already stable it is returned; if
/// the lower end is unstable the lower end is returned.
pub fn max_stable_nu(
    a: &DMatrix<f64>,
    d: &DMatrix<f64>,
    beta_samples_count: usize,
    nu_bracket: (f64, f64),
) -> Result<StabilityReport> {
    check_pair(a, d)?;
    if beta_samples_count < 64 {
        return Err(invalid("beta_samples", "need at least 64 samples"));
    }
    let (mut lo, mut hi) = nu_bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid("nu_bracket", "need 0 < lo < hi"));
    }
    let spec = Spectrum::new(a, d, beta_samples(beta_samples_count))?;
    let stable = |nu: f64| spec.max_radius(nu).0 <= 1.0 + RADIUS_TOL;
    let nu_max = if stable(hi) {
        hi
    } else if !stable(lo) {
        lo
    } else {
        while hi / lo > 1.0 + 1e-3 {
            let mid = (lo * hi).sqrt();
            if stable(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let beta_critical = spec.max_radius(nu_max * (1.0 + 2e-3)).1;
    let spectral_radius_curve = (0..spec.betas.len()).map(|k| (spec.betas[k], spec.radius_at(k, nu_max))).collect();
    Ok(StabilityReport { nu_max, beta_critical, spectral_radius_curve })
}

/// Active 1D conserved-variable flux Jacobian and diffusion matrix of a
/// scheme at a uniform state.
pub fn euler_1d_matrices(scheme: FluxScheme, q: &PrimitiveState, eos: &Eos, m_cut: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = Normal::positive(0);
    let a = flux_jacobian(q, n, eos, Basis::Conserved);
    let d = match scheme.preconditioner() {
        None => Mat5::zeros(),
        Some(kind) => diffusion_matrix(kind, q, q, m_cut, n, eos, EntropyFixParams::OFF)?,
    };
    Ok((active_block(1, &a), active_block(1, &d)))
}

/// 1D state in flow units: unit density and velocity, sound speed `1/mach`.
/// In these units the acoustic limit of plain Roe reads `ν_max ≈ M`.
pub fn unit_flow_state(mach: f64, gamma: f64) -> PrimitiveState {
    PrimitiveState { rho: 1.0, vel: [1.0, 0.0, 0.0], p: 1.0 / (gamma * mach * mach) }
}

/// `ν_max` of a scheme at Mach `mach` on the unit-flow state.
pub fn scheme_nu_max(scheme: FluxScheme, mach: f64, m_cut: f64, eos: &Eos) -> Result<f64> {
    if !(mach > 0.0) {
        return Err(invalid("mach", "must be positive"));
    }
    let q = unit_flow_state(mach, eos.gamma);
    let (a, d) = euler_1d_matrices(scheme, &q, eos, m_cut)?;
    Ok(max_stable_nu(&a, &d, 1024, (1e-12, 10.0))?.nu_max)
}
