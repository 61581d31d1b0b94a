//! Time loop shared by the command-line runner, the tests and the demo.

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::time::dt::{compute_dt, TimeStepPolicy};
use crate::time::explicit::{explicit_step, ExplicitScheme};
use crate::time::implicit::{implicit_step, ImplicitScheme, NewtonConfig, StepStats};
use crate::time::residual::Discretization;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper {
    Explicit(ExplicitScheme),
    Implicit(ImplicitScheme, NewtonConfig),
}

impl Stepper {
    pub fn name(&self) -> &'static str {
        match self {
            Stepper::Explicit(ExplicitScheme::ForwardEuler) => "forward_euler",
            Stepper::Explicit(ExplicitScheme::Ssprk2) => "ssprk2",
            Stepper::Implicit(ImplicitScheme::BackwardEuler, _) => "backward_euler",
            Stepper::Implicit(ImplicitScheme::Esdirk23, _) => "esdirk23",
        }
    }
}

/// Relative slack below which a final sliver of time is absorbed into the
/// previous step instead of taking a tiny extra one.
const END_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Simulation {
    pub field: GridField,
    pub disc: Discretization,
    pub stepper: Stepper,
    pub policy: TimeStepPolicy,
    pub t: f64,
    pub steps: usize,
    pub stats: StepStats,
}

impl Simulation {
    pub fn new(field: GridField, disc: Discretization, stepper: Stepper, policy: TimeStepPolicy) -> Result<Self> {
        disc.validate(&field)?;
        if let Stepper::Implicit(_, cfg) = &stepper {
            cfg.validate()?;
        }
        Ok(Self { field, disc, stepper, policy, t: 0.0, steps: 0, stats: StepStats::default() })
    }

    /// Advance one step without passing `t_end`. Returns the step taken.
    pub fn step(&mut self, t_end: f64) -> Result<f64> {
        let remaining = t_end - self.t;
        if !(remaining > 0.0) {
            return Ok(0.0);
        }
        let mut dt = compute_dt(&self.field, &self.policy, &self.disc.eos)?;
        if dt >= remaining * (1.0 - END_SLACK) {
            dt = remaining;
        }
        let step = self.steps;
        let with_step = |e: Error| match e {
            Error::StateBlowup { cell, .. } => Error::StateBlowup { cell, step },
            e => e,
        };
        self.field = match &self.stepper {
            Stepper::Explicit(s) => explicit_step(&self.field, dt, *s, &self.disc).map_err(with_step)?,
            Stepper::Implicit(s, cfg) => {
                let (f, st) = implicit_step(&self.field, dt, *s, &self.disc, cfg).map_err(with_step)?;
                self.stats += st;
                f
            }
        };
        self.steps += 1;
        self.t = if dt == remaining { t_end } else { self.t + dt };
        Ok(dt)
    }

    /// Step until `t_end`, calling `observe` after every step.
    pub fn run_until(&mut self, t_end: f64, mut observe: impl FnMut(&Simulation)) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
            observe(self);
        }
        Ok(())
    }
}
