//! Method-of-lines residual, explicit and implicit steppers, Jacobians,
//! Krylov solvers and time-step selection.

pub mod driver;
pub mod dt;
pub mod explicit;
pub mod implicit;
pub mod jacobian;
pub mod krylov;
pub mod residual;
pub mod spectral;

pub use dt::{compute_dt, DtKind, TimeStepPolicy};
pub use explicit::{explicit_step, ExplicitScheme};
pub use implicit::{implicit_step, ImplicitScheme, LinearPreconditioner, NewtonConfig, StepStats};
pub use jacobian::{assemble_jacobian, BlockSparse, JacobianMode};
pub use krylov::{gmres, gmres_partial, krylov_solve, GmresConfig};
pub use residual::{spatial_residual, Discretization};
pub use driver::{Simulation, Stepper};
