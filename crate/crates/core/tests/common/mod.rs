#![allow(dead_code)]

pub mod riemann;

use lowmach::cases::{setup, CaseParams};
use lowmach::flux::{EntropyFixParams, FluxConfig, FluxScheme};
use lowmach::reconstruction::ReconMode;
use lowmach::time::{Discretization, ExplicitScheme, Simulation, Stepper, TimeStepPolicy};

use lowmach::state::{cons_to_prim, cons_to_prim_jacobian, prim_to_cons_jacobian, Eos, Mat5, PrimitiveState};
use nalgebra::Matrix3;
use riemann::{left_fan, right_shock, sample, Side};

pub struct ShockTubeRun {
    pub x: Vec<f64>,
    pub q: Vec<PrimitiveState>,
    pub gamma: f64,
    pub t: f64,
}

pub fn shock_tube_run(scheme: FluxScheme, efix: EntropyFixParams, recon: ReconMode, cfl: f64) -> ShockTubeRun {
    let case = setup("shock_tube", &CaseParams::default()).unwrap();
    let disc = Discretization::new(case.eos, FluxConfig::new(scheme).with_entropy_fix(efix), recon, case.bc);
    let mut sim = Simulation::new(case.field, disc, Stepper::Explicit(ExplicitScheme::Ssprk2), TimeStepPolicy::acoustic(cfl)).unwrap();
    sim.run_until(0.2, |_| {}).unwrap();
    let g = &sim.field.grid;
    let x = (0..g.n_interior()).map(|n| g.cell_center(g.interior_coords(n))[0]).collect();
    let q = sim.field.interior_states().map(|u| cons_to_prim(u, &case.eos).unwrap()).collect();
    ShockTubeRun { x, q, gamma: case.eos.gamma, t: sim.t }
}

pub struct ShockTubeErrors {
    pub l1_density: f64,
    /// Largest |s − s₀| of `s = p/ρ^γ` over cells inside the rarefaction fan.
    pub fan_entropy: f64,
    /// Entropy jump across the exact shock.
    pub shock_entropy_jump: f64,
}

pub fn shock_tube_errors(run: &ShockTubeRun) -> ShockTubeErrors {
    let g = run.gamma;
    let (l, r) = lowmach::cases::shock_tube_states(g);
    let (l, r) = (Side { rho: l.rho, u: l.vel[0], p: l.p }, Side { rho: r.rho, u: r.vel[0], p: r.p });
    let h = run.x[1] - run.x[0];
    let s0 = l.p / l.rho.powf(g);
    let mut l1 = 0.0;
    let mut fan = 0.0f64;
    let (head, tail) = left_fan(&l, &r, g).expect("left wave is a rarefaction");
    for (x, q) in run.x.iter().zip(&run.q) {
        let xi = (x - 0.5) / run.t;
        l1 += (q.rho - sample(&l, &r, g, xi).rho).abs() * h;
        if xi > head && xi < tail {
            fan = fan.max((q.p / q.rho.powf(g) - s0).abs());
        }
    }
    let sh = right_shock(&l, &r, g).expect("right wave is a shock");
    let post = sample(&l, &r, g, sh - 1e-9);
    ShockTubeErrors { l1_density: l1, fan_entropy: fan, shock_entropy_jump: post.p / post.rho.powf(g) - s0 }
}

/// Closed-form 1D Miczek upwind matrix in primitive variables (ρ, v, p).
pub fn miczek_closed_form(rho: f64, v: f64, c: f64, delta: f64) -> Matrix3<f64> {
    let tau = (c * c * (1.0 + delta * delta) - delta * delta * v * v).sqrt();
    let a = -c * c * delta + c * v + delta * v * v;
    let b = c * c * delta + c * v - delta * v * v;
    Matrix3::new(
        v.abs(),
        rho * a / (c * tau),
        -v.abs() / (c * c) + 1.0 / tau,
        0.0,
        c * c / tau,
        b / (c * rho * tau),
        0.0,
        c * rho * a / tau,
        c * c / tau,
    )
}

pub fn prim3(d: &Mat5, q: &PrimitiveState, eos: &Eos) -> Matrix3<f64> {
    let full = cons_to_prim_jacobian(q, eos) * d * prim_to_cons_jacobian(q, eos);
    let idx = [0usize, 1, 4];
    Matrix3::from_fn(|i, j| full[(idx[i], idx[j])])
}
