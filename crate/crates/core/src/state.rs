//! State vectors, ideal-gas thermodynamics and the local Mach number context.
//!
//! Every state is stored in a fixed five-component layout `(ρ, m_x, m_y, m_z, E)`
//! regardless of the spatial dimension; components beyond the active
//! dimension are zero and stay zero. [`active_index`] maps the `d + 2` active
//! unknowns onto that layout.
//!
//! Pressures and energies are measured relative to a constant background
//! pressure held by [`Eos`]. With `p_background = 0` (the default) this is the
//! usual ideal-gas law. A nonzero background lets extremely low Mach flows keep
//! their O(1) pressure fluctuations representable: at M = 1e-10 the absolute
//! pressure is ~1e20 and its fluctuations would otherwise fall below the
//! double-precision spacing. Differences of pressure and energy, and therefore
//! all fluxes and Jacobians, are unaffected by the shift.

use crate::error::{Error, Result};
use nalgebra::{SMatrix, SVector};

pub type Vec5 = SVector<f64, 5>;
pub type Mat5 = SMatrix<f64, 5, 5>;

/// Number of active unknowns per cell in `dim` dimensions.
pub fn nvar(dim: usize) -> usize {
    dim + 2
}

/// Position of active unknown `k` (0..dim+2) inside the five-component layout.
pub fn active_index(dim: usize, k: usize) -> usize {
    if k == dim + 1 {
        4
    } else {
        k
    }
}

/// Restrict a five-component matrix to the active `(d+2)×(d+2)` block.
pub fn active_block(dim: usize, m: &Mat5) -> nalgebra::DMatrix<f64> {
    let n = nvar(dim);
    nalgebra::DMatrix::from_fn(n, n, |i, j| m[(active_index(dim, i), active_index(dim, j))])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eos {
    pub gamma: f64,
    /// Constant pressure subtracted from every stored pressure.
    pub p_background: f64,
}

impl Eos {
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_background(gamma, 0.0)
    }

    pub fn with_background(gamma: f64, p_background: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(crate::error::invalid("gamma", format!("must exceed 1, got {gamma}")));
        }
        if !(p_background >= 0.0) || !p_background.is_finite() {
            return Err(crate::error::invalid("p_background", "must be finite and non-negative"));
        }
        Ok(Self { gamma, p_background })
    }

    /// Physical pressure of a stored (background-relative) pressure.
    pub fn absolute_pressure(&self, p: f64) -> f64 {
        p + self.p_background
    }

    /// γ p_bg / (γ-1): the enthalpy density carried by the background pressure.
    pub fn background_enthalpy(&self) -> f64 {
        self.gamma * self.p_background / (self.gamma - 1.0)
    }

    pub fn sound_speed(&self, q: &PrimitiveState) -> f64 {
        (self.gamma * self.absolute_pressure(q.p) / q.rho).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub mom: [f64; 3],
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub vel: [f64; 3],
    pub p: f64,
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl ConservedState {
    pub fn to_vec(&self) -> Vec5 {
        Vec5::new(self.rho, self.mom[0], self.mom[1], self.mom[2], self.energy)
    }

    pub fn from_vec(v: &Vec5) -> Self {
        Self { rho: v[0], mom: [v[1], v[2], v[3]], energy: v[4] }
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * dot(&self.mom, &self.mom) / self.rho
    }

    /// Check the positivity invariants (density and physical pressure).
    pub fn is_valid(&self, eos: &Eos) -> bool {
        if !(self.rho > 0.0) || !self.energy.is_finite() || self.mom.iter().any(|m| !m.is_finite()) {
            return false;
        }
        let p = (eos.gamma - 1.0) * (self.energy - self.kinetic_energy());
        eos.absolute_pressure(p) > 0.0
    }
}

impl PrimitiveState {
    pub fn speed(&self) -> f64 {
        dot(&self.vel, &self.vel).sqrt()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.rho * dot(&self.vel, &self.vel)
    }

    pub fn is_valid(&self, eos: &Eos) -> bool {
        self.rho > 0.0
            && self.rho.is_finite()
            && eos.absolute_pressure(self.p) > 0.0
            && self.p.is_finite()
            && self.vel.iter().all(|v| v.is_finite())
    }
}

pub fn prim_to_cons(q: &PrimitiveState, eos: &Eos) -> ConservedState {
    let mom = [q.rho * q.vel[0], q.rho * q.vel[1], q.rho * q.vel[2]];
    ConservedState { rho: q.rho, mom, energy: q.p / (eos.gamma - 1.0) + q.kinetic_energy() }
}

pub fn cons_to_prim(u: &ConservedState, eos: &Eos) -> Result<PrimitiveState> {
    if !(u.rho > 0.0) {
        return Err(Error::NonPositiveDensity(u.rho));
    }
    let vel = [u.mom[0] / u.rho, u.mom[1] / u.rho, u.mom[2] / u.rho];
    let p = (eos.gamma - 1.0) * (u.energy - u.kinetic_energy());
    if !(eos.absolute_pressure(p) > 0.0) {
        return Err(Error::NonPositivePressure { rho: u.rho, p: eos.absolute_pressure(p) });
    }
    Ok(PrimitiveState { rho: u.rho, vel, p })
}

pub fn sound_speed(q: &PrimitiveState, eos: &Eos) -> f64 {
    eos.sound_speed(q)
}

/// Local Mach number together with the Weiss–Smith and Miczek parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachContext {
    pub m_loc: f64,
    pub m_cut: f64,
    pub mu: f64,
    pub delta: f64,
}

impl MachContext {
    pub fn new(m_loc: f64, m_cut: f64) -> Self {
        let mu = m_loc.max(m_cut).min(1.0);
        // exact zero above M = 1 rather than the rounding of 1/1 - 1
        let delta = if mu >= 1.0 { 0.0 } else { 1.0 / mu - 1.0 };
        Self { m_loc, m_cut, mu, delta }
    }
}

pub fn mach_context(q: &PrimitiveState, eos: &Eos, m_cut: f64) -> MachContext {
    MachContext::new(q.speed() / eos.sound_speed(q), m_cut)
}

/// ∂W/∂U: maps conserved-variable perturbations to primitive ones at `q`.
pub fn cons_to_prim_jacobian(q: &PrimitiveState, eos: &Eos) -> Mat5 {
    let g1 = eos.gamma - 1.0;
    let v = q.vel;
    let r = q.rho;
    let ke = 0.5 * dot(&v, &v);
    let mut t = Mat5::zeros();
    t[(0, 0)] = 1.0;
    for i in 0..3 {
        t[(1 + i, 0)] = -v[i] / r;
        t[(1 + i, 1 + i)] = 1.0 / r;
        t[(4, 1 + i)] = -g1 * v[i];
    }
    t[(4, 0)] = g1 * ke;
    t[(4, 4)] = g1;
    t
}

/// ∂U/∂W: inverse of [`cons_to_prim_jacobian`].
pub fn prim_to_cons_jacobian(q: &PrimitiveState, eos: &Eos) -> Mat5 {
    let v = q.vel;
    let r = q.rho;
    let mut t = Mat5::zeros();
    t[(0, 0)] = 1.0;
    for i in 0..3 {
        t[(1 + i, 0)] = v[i];
        t[(1 + i, 1 + i)] = r;
        t[(4, 1 + i)] = r * v[i];
    }
    t[(4, 0)] = 0.5 * dot(&v, &v);
    t[(4, 4)] = 1.0 / (eos.gamma - 1.0);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn air() -> Eos {
        Eos::new(1.4).unwrap()
    }

    #[test]
    fn rest_state_energy() {
        let q = PrimitiveState { rho: 1.0, vel: [0.0; 3], p: 1.0 };
        let u = prim_to_cons(&q, &air());
        assert_eq!(u.rho, 1.0);
        assert_eq!(u.mom, [0.0; 3]);
        assert!((u.energy - 2.5).abs() < 1e-15);
    }

    #[test]
    fn shock_tube_left_state() {
        let q = PrimitiveState { rho: 3.0, vel: [0.9, 0.0, 0.0], p: 3.0 };
        let u = prim_to_cons(&q, &air());
        assert!((u.mom[0] - 2.7).abs() < 1e-15);
        assert!((u.energy - 8.715).abs() < 1e-12);
        let back = cons_to_prim(&u, &air()).unwrap();
        assert!((back.vel[0] - 0.9).abs() < 1e-15);
        assert!((back.p - 3.0).abs() < 1e-13);
    }

    #[test]
    fn negative_energy_rejected() {
        let u = ConservedState { rho: 1.0, mom: [0.0; 3], energy: -1.0 };
        assert!(matches!(cons_to_prim(&u, &air()), Err(Error::NonPositivePressure { .. })));
    }

    #[test]
    fn sound_speed_values() {
        let q = PrimitiveState { rho: 1.0, vel: [0.0; 3], p: 1.0 };
        assert!((sound_speed(&q, &air()) - 1.4f64.sqrt()).abs() < 1e-15);
        let q = PrimitiveState { rho: 1.178e-3, vel: [0.0; 3], p: 1e6 };
        let c = sound_speed(&q, &air());
        // sqrt(1.4e6 / 1.178e-3); u0 / c = 0.29008
        assert!((c - 34473.9758).abs() < 1e-3, "{c}");
        assert!((1e4 / c - 0.29).abs() < 1e-3);
        let q4 = PrimitiveState { p: 4.0e6, ..q };
        assert!((sound_speed(&q4, &air()) - 2.0 * c).abs() < 1e-9);
    }

    #[test]
    fn mach_context_clamps() {
        let c = MachContext::new(0.5, 1e-10);
        assert_eq!(c.mu, 0.5);
        assert!((c.delta - 1.0).abs() < 1e-15);
        let c = MachContext::new(2.0, 1e-10);
        assert_eq!((c.mu, c.delta), (1.0, 0.0));
        let c = MachContext::new(0.0, 0.01);
        assert_eq!(c.mu, 0.01);
        assert!((c.delta - 99.0).abs() < 1e-12);
    }

    #[test]
    fn background_pressure_is_a_gauge() {
        let plain = air();
        let shifted = Eos::with_background(1.4, 1e6).unwrap();
        let q_abs = PrimitiveState { rho: 1.2, vel: [3.0, -1.0, 0.5], p: 1e6 + 0.25 };
        let q_rel = PrimitiveState { p: 0.25, ..q_abs };
        assert!((plain.sound_speed(&q_abs) - shifted.sound_speed(&q_rel)).abs() < 1e-12);
        let e_abs = prim_to_cons(&q_abs, &plain).energy;
        let e_rel = prim_to_cons(&q_rel, &shifted).energy;
        assert!((e_abs - e_rel - 1e6 / 0.4).abs() < 1e-6);
    }

    #[test]
    fn conversion_jacobians_are_inverse() {
        let q = PrimitiveState { rho: 1.7, vel: [0.3, -2.0, 1.1], p: 2.2 };
        let a = cons_to_prim_jacobian(&q, &air()) * prim_to_cons_jacobian(&q, &air());
        assert!((a - Mat5::identity()).amax() < 1e-14);
    }
}
