//! Explicit Runge–Kutta steppers.

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::state::ConservedState;
use crate::time::residual::Discretization;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplicitScheme {
    ForwardEuler,
    Ssprk2,
}

/// `U − dt·r(U)` as a new field; ghosts are carried over from `field`.
fn euler_update(field: &GridField, dt: f64, disc: &Discretization) -> Result<GridField> {
    let r = disc.residual(field)?;
    let mut out = field.clone();
    for (n, rn) in r.iter().enumerate() {
        let u = out.interior_mut(n);
        *u = ConservedState::from_vec(&(u.to_vec() - rn * dt));
    }
    check(&out, disc)?;
    Ok(out)
}

fn check(field: &GridField, disc: &Discretization) -> Result<()> {
    for n in 0..field.grid.n_interior() {
        if !field.interior(n).is_valid(&disc.eos) {
            // the step index is filled in by whoever owns the time loop
            return Err(Error::StateBlowup { cell: n, step: 0 });
        }
    }
    Ok(())
}

pub fn explicit_step(field: &GridField, dt: f64, scheme: ExplicitScheme, disc: &Discretization) -> Result<GridField> {
    if !(dt > 0.0) {
        return Err(crate::error::invalid("dt", "must be positive"));
    }
    match scheme {
        ExplicitScheme::ForwardEuler => euler_update(field, dt, disc),
        ExplicitScheme::Ssprk2 => {
            let u1 = euler_update(field, dt, disc)?;
            let u2 = euler_update(&u1, dt, disc)?;
            let mut out = field.clone();
            for n in 0..field.grid.n_interior() {
                let v = (field.interior(n).to_vec() + u2.interior(n).to_vec()) * 0.5;
                *out.interior_mut(n) = ConservedState::from_vec(&v);
            }
            check(&out, disc)?;
            Ok(out)
        }
    }
}
