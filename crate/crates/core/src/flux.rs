//! Physical flux, Jacobians, Roe averaging and the four interface fluxes.
//!
//! The upwind part of every Roe-type flux is `P⁻¹|PA|` evaluated at the Roe
//! average. Both `PA` and `P` are built in symmetrizing variables aligned with
//! the face normal,
//!
//! `ŵ = (dp/(ρc), dv_n, dv_t1, dv_t2, dρ − dp/c²)`,
//!
//! where the acoustic pair `(p̂, v_n)` decouples from the three advective modes.
//! In this basis the Miczek matrix is a scaled rotation and the Weiss–Smith
//! matrix is diagonal, so `|PA|` and `P⁻¹` carry no cancellation even for
//! δ ~ 1e12. The result is mapped back to conserved variables.

use crate::error::{Error, Result};
use crate::state::{
    cons_to_prim_jacobian, prim_to_cons_jacobian, ConservedState, Eos, Mat5, MachContext,
    PrimitiveState, Vec5,
};

/// Axis-aligned unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    pub axis: usize,
    pub sign: f64,
}

impl Normal {
    pub fn new(axis: usize, sign: f64) -> Self {
        assert!(axis < 3, "axis out of range");
        assert!(sign == 1.0 || sign == -1.0, "sign must be +1 or -1");
        Self { axis, sign }
    }

    pub fn positive(axis: usize) -> Self {
        Self::new(axis, 1.0)
    }

    pub fn flipped(self) -> Self {
        Self { sign: -self.sign, ..self }
    }

    pub fn vector(&self) -> [f64; 3] {
        let mut n = [0.0; 3];
        n[self.axis] = self.sign;
        n
    }

    fn tangents(&self) -> (usize, usize) {
        match self.axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Conserved,
    Primitive,
    /// Symmetrizing variables `(dp/(ρc), dv_x, dv_y, dv_z, dρ − dp/c²)`.
    Entropy,
}

/// Pressure from a conserved state without validity checks.
fn raw_pressure(u: &ConservedState, eos: &Eos) -> f64 {
    (eos.gamma - 1.0) * (u.energy - u.kinetic_energy())
}

pub fn physical_flux(u: &ConservedState, n: Normal, eos: &Eos) -> Vec5 {
    let p = raw_pressure(u, eos);
    let vn = n.sign * u.mom[n.axis] / u.rho;
    let mut f = Vec5::zeros();
    f[0] = u.rho * vn;
    for i in 0..3 {
        f[1 + i] = u.mom[i] * vn;
    }
    f[1 + n.axis] += n.sign * p;
    // kept as a separate product so an energy change never rounds at the background scale
    f[4] = vn * (u.energy + p) + vn * eos.background_enthalpy();
    f
}

fn prim_jacobian(q: &PrimitiveState, n: Normal, c: f64) -> Mat5 {
    let nv = n.vector();
    let vn = n.sign * q.vel[n.axis];
    let mut a = Mat5::zeros();
    a[(0, 0)] = vn;
    a[(4, 4)] = vn;
    for i in 0..3 {
        a[(0, 1 + i)] = q.rho * nv[i];
        a[(1 + i, 1 + i)] = vn;
        a[(1 + i, 4)] = nv[i] / q.rho;
        a[(4, 1 + i)] = q.rho * c * c * nv[i];
    }
    a
}

/// ∂ŵ/∂W for the global-frame symmetrizing variables.
fn entropy_from_prim(rho: f64, c: f64) -> Mat5 {
    let mut e = Mat5::identity();
    e[(0, 0)] = 0.0;
    e[(0, 4)] = 1.0 / (rho * c);
    e[(4, 0)] = 1.0;
    e[(4, 4)] = -1.0 / (c * c);
    e
}

fn prim_from_entropy(rho: f64, c: f64) -> Mat5 {
    let mut e = Mat5::identity();
    e[(0, 0)] = rho / c;
    e[(0, 4)] = 1.0;
    e[(4, 0)] = rho * c;
    e[(4, 4)] = 0.0;
    e
}

/// Signed permutation from global-frame to normal-frame symmetrizing variables.
fn normal_frame(n: Normal) -> Mat5 {
    let (t1, t2) = n.tangents();
    let mut q = Mat5::zeros();
    q[(0, 0)] = 1.0;
    q[(1, 1 + n.axis)] = n.sign;
    q[(2, 1 + t1)] = 1.0;
    q[(3, 1 + t2)] = 1.0;
    q[(4, 4)] = 1.0;
    q
}

/// Express a global-frame symmetrizing-variable matrix in another basis.
fn from_entropy_basis(m: &Mat5, q: &PrimitiveState, c: f64, eos: &Eos, basis: Basis) -> Mat5 {
    match basis {
        Basis::Entropy => *m,
        Basis::Primitive => prim_from_entropy(q.rho, c) * m * entropy_from_prim(q.rho, c),
        Basis::Conserved => {
            let to = entropy_from_prim(q.rho, c) * cons_to_prim_jacobian(q, eos);
            let back = prim_to_cons_jacobian(q, eos) * prim_from_entropy(q.rho, c);
            back * m * to
        }
    }
}

pub fn flux_jacobian(q: &PrimitiveState, n: Normal, eos: &Eos, basis: Basis) -> Mat5 {
    let c = eos.sound_speed(q);
    match basis {
        Basis::Primitive => prim_jacobian(q, n, c),
        Basis::Conserved => {
            prim_to_cons_jacobian(q, eos) * prim_jacobian(q, n, c) * cons_to_prim_jacobian(q, eos)
        }
        Basis::Entropy => {
            let qn = normal_frame(n);
            qn.transpose() * acoustic_normal_jacobian(n.sign * q.vel[n.axis], c) * qn
        }
    }
}

fn acoustic_normal_jacobian(vn: f64, c: f64) -> Mat5 {
    let mut a = Mat5::from_diagonal_element(vn);
    a[(0, 1)] = c;
    a[(1, 0)] = c;
    a
}

/// Roe average of two states. The returned pressure is background-relative,
/// recovered from the averaged enthalpy.
pub fn roe_average(ql: &PrimitiveState, qr: &PrimitiveState, eos: &Eos) -> PrimitiveState {
    let (rho, vel, c) = roe_state(ql, qr, eos);
    PrimitiveState { rho, vel, p: rho * c * c / eos.gamma - eos.p_background }
}

fn enthalpy(q: &PrimitiveState, eos: &Eos) -> f64 {
    (q.p * eos.gamma / (eos.gamma - 1.0) + eos.background_enthalpy()) / q.rho
        + 0.5 * (q.vel[0] * q.vel[0] + q.vel[1] * q.vel[1] + q.vel[2] * q.vel[2])
}

/// `(ρ̂, v̂, ĉ)` of the Roe average.
fn roe_state(ql: &PrimitiveState, qr: &PrimitiveState, eos: &Eos) -> (f64, [f64; 3], f64) {
    let sl = ql.rho.sqrt();
    let sr = qr.rho.sqrt();
    let wl = sl / (sl + sr);
    let wr = 1.0 - wl;
    let vel = [
        wl * ql.vel[0] + wr * qr.vel[0],
        wl * ql.vel[1] + wr * qr.vel[1],
        wl * ql.vel[2] + wr * qr.vel[2],
    ];
    let h = wl * enthalpy(ql, eos) + wr * enthalpy(qr, eos);
    let vsq = vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2];
    let c2 = (eos.gamma - 1.0) * (h - 0.5 * vsq);
    (sl * sr, vel, c2.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    Identity,
    WeissSmith,
    Miczek,
}

/// The preconditioner in normal-frame symmetrizing variables.
fn normal_preconditioner(kind: PreconditionerKind, ctx: &MachContext) -> Mat5 {
    let mut p = Mat5::identity();
    match kind {
        PreconditionerKind::Identity => {}
        PreconditionerKind::WeissSmith => p[(0, 0)] = ctx.mu * ctx.mu,
        PreconditionerKind::Miczek => {
            p[(0, 1)] = ctx.delta;
            p[(1, 0)] = -ctx.delta;
        }
    }
    p
}

/// Row-equilibrated 1-norm condition estimate and inverse.
fn checked_inverse(p: &Mat5) -> Result<Mat5> {
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularPreconditioner(f64::INFINITY));
    }
    let mut scaled = *p;
    for i in 0..5 {
        let m = scaled.row(i).amax();
        if m == 0.0 {
            return Err(Error::SingularPreconditioner(f64::INFINITY));
        }
        scaled.row_mut(i).scale_mut(1.0 / m);
    }
    let inv_scaled = scaled.try_inverse().ok_or(Error::SingularPreconditioner(f64::INFINITY))?;
    let kappa = norm1(&scaled) * norm1(&inv_scaled);
    if !(kappa <= COND_LIMIT) {
        return Err(Error::SingularPreconditioner(kappa));
    }
    p.try_inverse().ok_or(Error::SingularPreconditioner(kappa))
}

const COND_LIMIT: f64 = 1e14;

pub(crate) fn norm1(m: &Mat5) -> f64 {
    (0..5).map(|j| m.column(j).lp_norm(1)).fold(0.0, f64::max)
}

pub fn preconditioner_matrix(
    kind: PreconditionerKind,
    q: &PrimitiveState,
    ctx: &MachContext,
    n: Normal,
    eos: &Eos,
    basis: Basis,
) -> Result<Mat5> {
    if !(ctx.m_cut > 0.0) {
        return Err(crate::error::invalid("m_cut", "must be positive"));
    }
    let pn = normal_preconditioner(kind, ctx);
    checked_inverse(&pn)?;
    let qn = normal_frame(n);
    let pg = qn.transpose() * pn * qn;
    Ok(from_entropy_basis(&pg, q, eos.sound_speed(q), eos, basis))
}

/// Harten's smoothing of |λ| near zero.
pub fn entropy_fix(lambda: f64, eps: f64) -> f64 {
    let a = lambda.abs();
    if eps <= 0.0 || a >= eps {
        a
    } else {
        (lambda * lambda + eps * eps) / (2.0 * eps)
    }
}

/// Entropy-fix width as a fraction of the Roe-average sound speed; 0 disables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyFixParams {
    pub eps_rel: f64,
}

impl EntropyFixParams {
    pub const OFF: Self = Self { eps_rel: 0.0 };
    pub const TRANSONIC: Self = Self { eps_rel: 0.1 };
}

#[cfg(test)]
const EIGEN_GROUP_TOL: f64 = 1e-8;
#[cfg(test)]
const PROJECTOR_LIMIT: f64 = 1e10;

/// `f(M)` for a real matrix with real, semi-simple spectrum, via spectral
/// projectors built from grouped numerical eigenvalues. Returns the largest
/// projector norm as a conditioning measure.
#[cfg(test)]
pub(crate) fn spectral_function(m: &Mat5, f: impl Fn(f64) -> f64) -> Result<(Mat5, f64)> {
    let schur = nalgebra::linalg::Schur::try_new(*m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::EigendecompositionFailure("Schur iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::EigendecompositionFailure("complex eigenvalues".into()))?;
    let mut lam: Vec<f64> = eig.iter().copied().collect();
    lam.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = lam.iter().fold(0.0f64, |s, l| s.max(l.abs()));
    if scale == 0.0 || !scale.is_finite() {
        if scale == 0.0 && m.amax() == 0.0 {
            return Ok((Mat5::identity() * f(0.0), 1.0));
        }
        return Err(Error::EigendecompositionFailure("nilpotent or non-finite matrix".into()));
    }
    let mut groups: Vec<(f64, usize)> = Vec::with_capacity(5);
    for &l in &lam {
        match groups.last_mut() {
            Some((sum, cnt)) if (l - *sum / *cnt as f64).abs() <= EIGEN_GROUP_TOL * scale => {
                *sum += l;
                *cnt += 1;
            }
            _ => groups.push((l, 1)),
        }
    }
    let mu: Vec<f64> = groups.iter().map(|(s, c)| s / *c as f64).collect();
    let mut out = Mat5::zeros();
    let mut sum_proj = Mat5::zeros();
    let mut recon = Mat5::zeros();
    let mut worst = 1.0f64;
    let id = Mat5::identity();
    for (k, &mk) in mu.iter().enumerate() {
        let mut e = id;
        for (j, &mj) in mu.iter().enumerate() {
            if j != k {
                e = e * (m - id * mj) / (mk - mj);
            }
        }
        worst = worst.max(norm1(&e));
        out += e * f(mk);
        sum_proj += e;
        recon += e * mk;
    }
    let defect = norm1(&(recon - m)) / norm1(m).max(f64::MIN_POSITIVE);
    if !(worst <= PROJECTOR_LIMIT) || !(defect <= 1e-8 * worst) || !(norm1(&(sum_proj - id)) <= 1e-8 * worst) {
        return Err(Error::EigendecompositionFailure(format!(
            "ill-conditioned spectral decomposition (projector norm {worst:e}, defect {defect:e})"
        )));
    }
    Ok((out, worst))
}

/// Upwind matrix `P⁻¹|PA|` in normal-frame symmetrizing variables.
fn normal_diffusion(
    kind: PreconditionerKind,
    vn: f64,
    c: f64,
    ctx: &MachContext,
    eps: f64,
) -> Result<Mat5> {
    let pn = normal_preconditioner(kind, ctx);
    let pinv = checked_inverse(&pn)?;
    let pa = pn * acoustic_normal_jacobian(vn, c);
    // P only couples the acoustic pair, so PA is diag(B, vn, vn, vn)
    let mut abs_pa = Mat5::from_diagonal_element(entropy_fix(vn, eps));
    let b = abs_2x2([[pa[(0, 0)], pa[(0, 1)]], [pa[(1, 0)], pa[(1, 1)]]], eps)?;
    for i in 0..2 {
        for j in 0..2 {
            abs_pa[(i, j)] = b[i][j];
        }
    }
    Ok(pinv * abs_pa)
}

/// `f(B)` for a real 2×2 matrix with distinct real eigenvalues, where `f` is
/// the entropy-fixed absolute value. Written as `αI + βB` with the eigenvalue
/// sum, product and gap formed without cancellation.
fn abs_2x2(b: [[f64; 2]; 2], eps: f64) -> Result<[[f64; 2]; 2]> {
    let tr = b[0][0] + b[1][1];
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let half_diff = 0.5 * (b[0][0] - b[1][1]);
    let disc = half_diff * half_diff + b[0][1] * b[1][0];
    if !(disc > 0.0) || !disc.is_finite() {
        return Err(Error::EigendecompositionFailure(format!("acoustic block has no distinct real eigenvalues (discriminant {disc:e})")));
    }
    let root = disc.sqrt();
    let big = 0.5 * tr + root.copysign(tr);
    let small = if big == 0.0 { -root } else { det / big };
    let (l1, l2) = if big >= small { (big, small) } else { (small, big) };
    let gap = 2.0 * root;
    if root <= 1e-8 * l1.abs().max(l2.abs()) {
        return Err(Error::EigendecompositionFailure("near-coalescent acoustic eigenvalues".into()));
    }
    let (alpha, beta) = if eps <= 0.0 && det < 0.0 {
        (-2.0 * det / gap, tr / gap)
    } else {
        let f1 = entropy_fix(l1, eps);
        let f2 = entropy_fix(l2, eps);
        ((l1 * f2 - l2 * f1) / gap, (f1 - f2) / gap)
    };
    Ok([
        [alpha + beta * b[0][0], beta * b[0][1]],
        [beta * b[1][0], alpha + beta * b[1][1]],
    ])
}

/// Upwind matrix of the interface flux, acting on conserved-variable jumps.
///
/// The Mach context is taken from the Roe average of `ql`, `qr`.
pub fn diffusion_matrix(
    kind: PreconditionerKind,
    ql: &PrimitiveState,
    qr: &PrimitiveState,
    m_cut: f64,
    n: Normal,
    eos: &Eos,
    efix: EntropyFixParams,
) -> Result<Mat5> {
    let (dn, q, c) = diffusion_normal(kind, ql, qr, m_cut, n, eos, efix)?;
    let (to, back) = normal_transforms(&q, c, n, eos);
    Ok(back * dn * to)
}

fn diffusion_normal(
    kind: PreconditionerKind,
    ql: &PrimitiveState,
    qr: &PrimitiveState,
    m_cut: f64,
    n: Normal,
    eos: &Eos,
    efix: EntropyFixParams,
) -> Result<(Mat5, PrimitiveState, f64)> {
    if !(m_cut > 0.0) {
        return Err(crate::error::invalid("m_cut", "must be positive"));
    }
    let (rho, vel, c) = roe_state(ql, qr, eos);
    let q = PrimitiveState { rho, vel, p: 0.0 };
    let vn = n.sign * vel[n.axis];
    let m_loc = q.speed() / c;
    let eps = efix.eps_rel * c;
    let dn = match normal_diffusion(kind, vn, c, &MachContext::new(m_loc, m_cut), eps) {
        Ok(d) => d,
        Err(Error::EigendecompositionFailure(_)) => {
            normal_diffusion(kind, vn, c, &MachContext::new(m_loc + 1e-13, m_cut), eps)?
        }
        Err(e) => return Err(e),
    };
    Ok((dn, q, c))
}

/// Conserved → normal-frame symmetrizing variables and back, at `(ρ, v, c)`.
fn normal_transforms(q: &PrimitiveState, c: f64, n: Normal, eos: &Eos) -> (Mat5, Mat5) {
    let qn = normal_frame(n);
    let to = qn * entropy_from_prim(q.rho, c) * cons_to_prim_jacobian(q, eos);
    let back = prim_to_cons_jacobian(q, eos) * prim_from_entropy(q.rho, c) * qn.transpose();
    (to, back)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxScheme {
    Central,
    Roe,
    RoeTurkel,
    RoeMiczek,
}

impl FluxScheme {
    pub fn preconditioner(&self) -> Option<PreconditionerKind> {
        match self {
            FluxScheme::Central => None,
            FluxScheme::Roe => Some(PreconditionerKind::Identity),
            FluxScheme::RoeTurkel => Some(PreconditionerKind::WeissSmith),
            FluxScheme::RoeMiczek => Some(PreconditionerKind::Miczek),
        }
    }

    pub fn default_m_cut(&self) -> f64 {
        match self {
            FluxScheme::RoeTurkel => 1e-8,
            _ => 1e-12,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FluxScheme::Central => "central",
            FluxScheme::Roe => "roe",
            FluxScheme::RoeTurkel => "roe_turkel",
            FluxScheme::RoeMiczek => "roe_miczek",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "central" => FluxScheme::Central,
            "roe" => FluxScheme::Roe,
            "roe_turkel" | "turkel" | "weiss_smith" => FluxScheme::RoeTurkel,
            "roe_miczek" | "miczek" => FluxScheme::RoeMiczek,
            _ => return None,
        })
    }

    pub const ALL: [FluxScheme; 4] =
        [FluxScheme::Central, FluxScheme::Roe, FluxScheme::RoeTurkel, FluxScheme::RoeMiczek];
}

/// A flux scheme with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxConfig {
    pub scheme: FluxScheme,
    pub m_cut: f64,
    pub efix: EntropyFixParams,
}

impl FluxConfig {
    pub fn new(scheme: FluxScheme) -> Self {
        Self { scheme, m_cut: scheme.default_m_cut(), efix: EntropyFixParams::OFF }
    }

    pub fn with_m_cut(self, m_cut: f64) -> Self {
        Self { m_cut, ..self }
    }

    pub fn with_entropy_fix(self, efix: EntropyFixParams) -> Self {
        Self { efix, ..self }
    }
}

fn raw_prim(u: &ConservedState, eos: &Eos) -> PrimitiveState {
    let r = u.rho;
    PrimitiveState { rho: r, vel: [u.mom[0] / r, u.mom[1] / r, u.mom[2] / r], p: raw_pressure(u, eos) }
}

pub fn interface_flux(
    cfg: &FluxConfig,
    ul: &ConservedState,
    ur: &ConservedState,
    n: Normal,
    eos: &Eos,
) -> Result<Vec5> {
    let central = (physical_flux(ul, n, eos) + physical_flux(ur, n, eos)) * 0.5;
    let Some(kind) = cfg.scheme.preconditioner() else {
        return Ok(central);
    };
    let jump = ur.to_vec() - ul.to_vec();
    if jump.iter().all(|&x| x == 0.0) {
        return Ok(central);
    }
    let (dn, q, c) =
        diffusion_normal(kind, &raw_prim(ul, eos), &raw_prim(ur, eos), cfg.m_cut, n, eos, cfg.efix)?;
    let (to, back) = normal_transforms(&q, c, n, eos);
    Ok(central - back * (dn * (to * jump)) * 0.5)
}

/// Cell-centred gravity source `(0, ρg, ρg·v)`.
pub fn gravity_source(u: &ConservedState, g: [f64; 3]) -> Vec5 {
    Vec5::new(
        0.0,
        u.rho * g[0],
        u.rho * g[1],
        u.rho * g[2],
        g[0] * u.mom[0] + g[1] * u.mom[1] + g[2] * u.mom[2],
    )
}
