//! Finite-volume solver for the compressible Euler equations at all Mach
//! numbers, with Roe, Roe–Turkel (Weiss–Smith), Roe–Miczek and central
//! interface fluxes, explicit and implicit time stepping, and analysis tools
//! for stability, conditioning and low-Mach asymptotics.

pub mod analysis;
pub mod cases;
pub mod error;
pub mod flux;
pub mod grid;
pub mod reconstruction;
pub mod state;
pub mod time;

pub use error::{Error, Result};
