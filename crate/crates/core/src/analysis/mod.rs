//! Stability scanner, condition numbers, field diagnostics and parameter
//! studies.

pub mod condition;
pub mod diagnostics;
pub mod studies;
pub mod von_neumann;

pub use condition::{condition_number_1norm, condition_snapshot, jacobian_condition_study, ConditionMode, ConditionRow};
pub use diagnostics::{
    enstrophy_mean, high_mode_sum, kinetic_energy_total, loglog_slope, max_mach, pressure_fluctuation,
    specific_kinetic_energy_mean, total_energy, total_mass, vorticity,
};
pub use studies::{hydrostatic_dissipation_study, tgv_nondim_series, DissipationRow, HydrostaticParams, TgvRow};
pub use von_neumann::{amplification_matrix, max_stable_nu, scheme_nu_max, AmplificationSpec, StabilityReport};
