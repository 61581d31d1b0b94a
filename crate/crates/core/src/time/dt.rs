//! Time-step selection.

use crate::error::{invalid, Result};
use crate::grid::GridField;
use crate::state::{cons_to_prim, Eos};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtKind {
    AcousticCfl,
    AdvectiveCfl,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepPolicy {
    pub kind: DtKind,
    pub cfl: f64,
    pub dt_fixed: Option<f64>,
    /// Multiply the step by the largest cell Mach number.
    pub mach_scaled: bool,
}

impl TimeStepPolicy {
    pub fn acoustic(cfl: f64) -> Self {
        Self { kind: DtKind::AcousticCfl, cfl, dt_fixed: None, mach_scaled: false }
    }

    pub fn advective(cfl: f64) -> Self {
        Self { kind: DtKind::AdvectiveCfl, cfl, dt_fixed: None, mach_scaled: false }
    }

    pub fn fixed(dt: f64) -> Self {
        Self { kind: DtKind::Fixed, cfl: 1.0, dt_fixed: Some(dt), mach_scaled: false }
    }

    pub fn mach_scaled(self) -> Self {
        Self { mach_scaled: true, ..self }
    }
}

/// Relative velocity floor of the advective criterion, as a fraction of the
/// largest speed in the field.
pub const ADVECTIVE_FLOOR: f64 = 1e-3;

pub fn compute_dt(field: &GridField, policy: &TimeStepPolicy, eos: &Eos) -> Result<f64> {
    if !(policy.cfl > 0.0) {
        return Err(invalid("cfl", "must be positive"));
    }
    let grid = &field.grid;
    let mut cells = Vec::with_capacity(grid.n_interior());
    let mut v_max = 0.0f64;
    let mut m_max = 0.0f64;
    for u in field.interior_states() {
        let q = cons_to_prim(u, eos)?;
        let c = eos.sound_speed(&q);
        let v = q.speed();
        v_max = v_max.max(v);
        m_max = m_max.max(v / c);
        cells.push((v, c));
    }
    let h = grid.spacing[..grid.dim].iter().copied().fold(f64::INFINITY, f64::min);
    let mut dt = match policy.kind {
        DtKind::Fixed => policy.dt_fixed.filter(|d| *d > 0.0).ok_or_else(|| invalid("dt_fixed", "must be positive"))?,
        DtKind::AcousticCfl => policy.cfl * cells.iter().map(|&(v, c)| h / (v + c)).fold(f64::INFINITY, f64::min),
        DtKind::AdvectiveCfl => {
            if v_max == 0.0 {
                // nothing is moving: fall back to the sound crossing time
                policy.cfl * cells.iter().map(|&(_, c)| h / c).fold(f64::INFINITY, f64::min)
            } else {
                let floor = ADVECTIVE_FLOOR * v_max;
                policy.cfl * cells.iter().map(|&(v, _)| h / v.max(floor)).fold(f64::INFINITY, f64::min)
            }
        }
    };
    if policy.mach_scaled {
        dt *= m_max;
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("computed step {dt:e} is not positive")));
    }
    Ok(dt)
}
