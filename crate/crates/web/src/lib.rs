//! Browser bindings: a live Gresho vortex, the von Neumann scanner and a
//! shock tube. The plain functions are what the bindings wrap, so they can be
//! tested natively.

use lowmach::analysis::von_neumann::{euler_1d_matrices, max_stable_nu, unit_flow_state};
use lowmach::analysis::{kinetic_energy_total, pressure_fluctuation};
use lowmach::cases::{setup, CaseParams};
use lowmach::flux::{EntropyFixParams, FluxConfig, FluxScheme};
use lowmach::reconstruction::ReconMode;
use lowmach::state::{cons_to_prim, Eos};
use lowmach::time::{Discretization, ExplicitScheme, ImplicitScheme, NewtonConfig, Simulation, Stepper, TimeStepPolicy};
use wasm_bindgen::prelude::*;

fn scheme(name: &str) -> Result<FluxScheme, String> {
    FluxScheme::parse(name).ok_or_else(|| format!("unknown scheme `{name}`"))
}

fn js(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Gresho vortex on `n×n` cells, stepped implicitly with the advective step.
#[wasm_bindgen]
pub struct Gresho {
    sim: Simulation,
    ekin0: f64,
    mach: f64,
}

impl Gresho {
    pub fn create(scheme_name: &str, mach: f64, n: usize) -> Result<Self, String> {
        let p = CaseParams { mach, n_cells: vec![n, n], ..CaseParams::default() };
        let case = setup("gresho", &p).map_err(|e| e.to_string())?;
        let disc = Discretization::new(case.eos, FluxConfig::new(scheme(scheme_name)?), ReconMode::LinearUnlimited, case.bc);
        let stepper = Stepper::Implicit(ImplicitScheme::Esdirk23, NewtonConfig::spectral());
        let ekin0 = kinetic_energy_total(&case.field);
        let sim = Simulation::new(case.field, disc, stepper, TimeStepPolicy::advective(0.8)).map_err(|e| e.to_string())?;
        Ok(Self { sim, ekin0, mach })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), String> {
        for _ in 0..steps {
            self.sim.step(f64::INFINITY).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    /// Local Mach number over the configured one, x fastest.
    pub fn mach_map(&self) -> Vec<f64> {
        let eos = &self.sim.disc.eos;
        let mach = self.mach;
        self.sim
            .field
            .interior_states()
            .map(|u| cons_to_prim(u, eos).map(|q| q.speed() / eos.sound_speed(&q) / mach).unwrap_or(f64::NAN))
            .collect()
    }
}

#[wasm_bindgen]
impl Gresho {
    #[wasm_bindgen(constructor)]
    pub fn new(scheme_name: &str, mach: f64, n: usize) -> Result<Gresho, JsValue> {
        Self::create(scheme_name, mach, n).map_err(js)
    }

    pub fn step(&mut self, steps: usize) -> Result<(), JsValue> {
        self.advance(steps).map_err(js)
    }

    pub fn time(&self) -> f64 {
        self.sim.t
    }

    pub fn size(&self) -> usize {
        self.sim.field.grid.n_cells[0]
    }

    #[wasm_bindgen(js_name = kineticEnergyRatio)]
    pub fn kinetic_energy_ratio(&self) -> f64 {
        kinetic_energy_total(&self.sim.field) / self.ekin0
    }

    #[wasm_bindgen(js_name = pressureFluctuation)]
    pub fn pressure_fluctuation(&self) -> f64 {
        pressure_fluctuation(&self.sim.field, &self.sim.disc.eos).unwrap_or(f64::NAN)
    }

    #[wasm_bindgen(js_name = machMap)]
    pub fn mach_map_js(&self) -> Vec<f64> {
        self.mach_map()
    }
}

/// `[ν_max, β₀, r₀, β₁, r₁, …]`: the largest stable Δt/Δx of forward Euler on
/// the unit-flow state and the spectral radius per phase at that ν.
pub fn stability_curve(scheme_name: &str, mach: f64) -> Result<Vec<f64>, String> {
    if !(mach > 0.0) {
        return Err("Mach number must be positive".into());
    }
    let s = scheme(scheme_name)?;
    let eos = Eos::new(1.4).map_err(|e| e.to_string())?;
    let q = unit_flow_state(mach, eos.gamma);
    let (a, d) = euler_1d_matrices(s, &q, &eos, s.default_m_cut()).map_err(|e| e.to_string())?;
    let r = max_stable_nu(&a, &d, 256, (1e-12, 10.0)).map_err(|e| e.to_string())?;
    let mut out = vec![r.nu_max];
    for (b, rho) in r.spectral_radius_curve {
        out.extend([b, rho]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = stabilityCurve)]
pub fn stability_curve_js(scheme_name: &str, mach: f64) -> Result<Vec<f64>, JsValue> {
    stability_curve(scheme_name, mach).map_err(js)
}

/// `[x₀, ρ₀, u₀, p₀, x₁, …]` of the isentropic shock tube at `t = 0.2`,
/// first-order reconstruction so the sonic point is visible.
pub fn shock_tube(scheme_name: &str, entropy_fix: bool, n: usize) -> Result<Vec<f64>, String> {
    let case = setup("shock_tube", &CaseParams { n_cells: vec![n], ..CaseParams::default() }).map_err(|e| e.to_string())?;
    let efix = if entropy_fix { EntropyFixParams::TRANSONIC } else { EntropyFixParams::OFF };
    let flux = FluxConfig::new(scheme(scheme_name)?).with_entropy_fix(efix);
    let disc = Discretization::new(case.eos, flux, ReconMode::Constant, case.bc);
    let stepper = Stepper::Explicit(ExplicitScheme::Ssprk2);
    let mut sim = Simulation::new(case.field, disc, stepper, TimeStepPolicy::acoustic(0.5)).map_err(|e| e.to_string())?;
    sim.run_until(0.2, |_| {}).map_err(|e| e.to_string())?;
    let g = &sim.field.grid;
    let mut out = Vec::with_capacity(4 * n);
    for i in 0..g.n_interior() {
        let q = cons_to_prim(sim.field.interior(i), &case.eos).map_err(|e| e.to_string())?;
        out.extend([g.cell_center(g.interior_coords(i))[0], q.rho, q.vel[0], q.p]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = shockTube)]
pub fn shock_tube_js(scheme_name: &str, entropy_fix: bool, n: usize) -> Result<Vec<f64>, JsValue> {
    shock_tube(scheme_name, entropy_fix, n).map_err(js)
}
