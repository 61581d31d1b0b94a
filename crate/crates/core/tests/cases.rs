mod common;

use common::riemann::{star_state, Side};
use common::{shock_tube_errors, shock_tube_run};
use lowmach::flux::{EntropyFixParams, FluxScheme};
use lowmach::reconstruction::ReconMode;

#[test]
fn sod_star_state() {
    // published values for Sod's problem: p* = 0.30313, u* = 0.92745
    let st = star_state(&Side { rho: 1.0, u: 0.0, p: 1.0 }, &Side { rho: 0.125, u: 0.0, p: 0.1 }, 1.4);
    assert!((st.p - 0.30313).abs() < 1e-5, "{}", st.p);
    assert!((st.u - 0.92745).abs() < 1e-5, "{}", st.u);
}

#[test]
fn shock_tube_converges_to_exact_solution() {
    let first = shock_tube_errors(&shock_tube_run(FluxScheme::RoeMiczek, EntropyFixParams::TRANSONIC, ReconMode::Constant, 0.5));
    let second = shock_tube_errors(&shock_tube_run(FluxScheme::RoeMiczek, EntropyFixParams::TRANSONIC, ReconMode::LinearMinmod, 0.5));
    assert!(first.l1_density < 0.02, "{}", first.l1_density);
    assert!(second.l1_density < 0.5 * first.l1_density, "{} vs {}", second.l1_density, first.l1_density);
}

#[test]
fn sonic_glitch_without_entropy_fix() {
    let off = shock_tube_errors(&shock_tube_run(FluxScheme::Roe, EntropyFixParams::OFF, ReconMode::Constant, 0.5));
    let on = shock_tube_errors(&shock_tube_run(FluxScheme::Roe, EntropyFixParams::TRANSONIC, ReconMode::Constant, 0.5));
    assert!(off.fan_entropy > 5.0 * on.fan_entropy, "{} vs {}", off.fan_entropy, on.fan_entropy);
    assert!(on.fan_entropy < 0.1 * on.shock_entropy_jump);
}

#[test]
fn case_registry_builds_every_case() {
    for name in lowmach::cases::CASE_NAMES {
        let case = lowmach::cases::setup(name, &Default::default()).unwrap();
        assert!(case.field.interior_states().all(|u| u.is_valid(&case.eos)), "{name}");
    }
    assert!(lowmach::cases::setup("vortex_street", &Default::default()).is_err());
    let wrong_dim = lowmach::cases::CaseParams { n_cells: vec![8], ..Default::default() };
    assert!(lowmach::cases::setup("gresho", &wrong_dim).is_err());
}
