//! Semi-discrete residual `r = Σ_axes (F₊ − F₋)/Δ − S`, so that `dU/dt = −r`.

use crate::error::{invalid, Result};
use crate::flux::{gravity_source, interface_flux, FluxConfig, Normal};
use crate::grid::{BoundaryCondition, GridField};
use crate::reconstruction::{basis_values, face_values, lines, to_conserved, ReconBasis, ReconMode};
use crate::state::{active_index, nvar, ConservedState, Eos, Vec5};

/// Everything that defines the spatial operator apart from the field.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub eos: Eos,
    pub flux: FluxConfig,
    pub recon: ReconMode,
    pub basis: ReconBasis,
    pub bc: BoundaryCondition,
    pub gravity: Option<[f64; 3]>,
    /// Evaluate lines of faces on the rayon pool. Results are bitwise
    /// identical to the serial path.
    pub parallel: bool,
}

impl Discretization {
    pub fn new(eos: Eos, flux: FluxConfig, recon: ReconMode, bc: BoundaryCondition) -> Self {
        Self { eos, flux, recon, basis: ReconBasis::Primitive, bc, gravity: None, parallel: false }
    }

    pub fn with_gravity(self, g: [f64; 3]) -> Self {
        Self { gravity: Some(g), ..self }
    }

    pub fn with_basis(self, basis: ReconBasis) -> Self {
        Self { basis, ..self }
    }

    pub fn with_parallel(self, parallel: bool) -> Self {
        Self { parallel, ..self }
    }

    pub fn validate(&self, field: &GridField) -> Result<()> {
        self.bc.validate(field.grid.dim)?;
        if field.grid.n_ghost < self.recon.stencil_width() {
            return Err(invalid("n_ghost", "too few ghost layers for the reconstruction"));
        }
        if !(self.flux.m_cut > 0.0) {
            return Err(invalid("m_cut", "must be positive"));
        }
        Ok(())
    }

    /// Residual per interior cell (interior order). Ghosts are filled on a copy.
    pub fn residual(&self, field: &GridField) -> Result<Vec<Vec5>> {
        let mut work = field.clone();
        work.fill_ghosts(&self.bc);
        self.residual_filled(&work)
    }

    /// Residual of a field whose ghosts are already current.
    pub fn residual_filled(&self, field: &GridField) -> Result<Vec<Vec5>> {
        let grid = &field.grid;
        let w = self.cell_values(field)?;
        let mut r = vec![Vec5::zeros(); grid.n_interior()];
        for axis in 0..grid.dim {
            let ls = lines(grid, axis);
            let fluxes = self.line_fluxes(field, &w, axis, &ls)?;
            let inv_h = 1.0 / grid.spacing[axis];
            let n = grid.n_cells[axis];
            for (line, f) in ls.iter().zip(&fluxes) {
                for k in 0..n {
                    let mut c = [line[0] as usize, line[1] as usize, line[2] as usize];
                    c[axis] = k;
                    r[grid.interior_number(c)] += (f[k + 1] - f[k]) * inv_h;
                }
            }
        }
        if let Some(g) = self.gravity {
            for (n, rn) in r.iter_mut().enumerate() {
                *rn -= gravity_source(field.interior(n), g);
            }
        }
        Ok(r)
    }

    /// Residual flattened over the active unknowns, cell-major.
    pub fn residual_packed(&self, field: &GridField) -> Result<Vec<f64>> {
        let r = self.residual(field)?;
        Ok(pack_vec5(field.grid.dim, &r))
    }

    pub(crate) fn cell_values(&self, field: &GridField) -> Result<Vec<Vec5>> {
        if self.recon == ReconMode::Constant {
            // constant reconstruction reads conserved states directly
            return Ok(Vec::new());
        }
        basis_values(field, self.basis, &self.eos)
    }

    fn line_fluxes(&self, field: &GridField, w: &[Vec5], axis: usize, ls: &[[isize; 3]]) -> Result<Vec<Vec<Vec5>>> {
        let one = |line: &[isize; 3]| -> Result<Vec<Vec5>> {
            let n = field.grid.n_cells[axis];
            let mut c = *line;
            c[axis] = -1;
            let s0 = field.grid.storage_index(c);
            let stride = field.grid.stride(axis);
            (0..=n).map(|f| self.face_flux(field, w, s0 + f * stride, axis)).collect()
        };
        #[cfg(feature = "parallel")]
        if self.parallel {
            use rayon::prelude::*;
            return ls.par_iter().map(one).collect();
        }
        ls.iter().map(one).collect()
    }

    /// Flux through the `+axis` face of storage cell `s`.
    pub(crate) fn face_flux(&self, field: &GridField, w: &[Vec5], s: usize, axis: usize) -> Result<Vec5> {
        let (ul, ur) = self.face_states(field, w, s, axis);
        interface_flux(&self.flux, &ul, &ur, Normal::positive(axis), &self.eos)
    }

    pub(crate) fn face_states(&self, field: &GridField, w: &[Vec5], s: usize, axis: usize) -> (ConservedState, ConservedState) {
        let stride = field.grid.stride(axis);
        let constant = (field.data[s], field.data[s + stride]);
        if self.recon == ReconMode::Constant {
            return constant;
        }
        let (l, r) = face_values(self.recon, [&w[s - stride], &w[s], &w[s + stride], &w[s + 2 * stride]]);
        match (to_conserved(&l, self.basis, &self.eos), to_conserved(&r, self.basis, &self.eos)) {
            (Some(ul), Some(ur)) => (ul, ur),
            // fall back to first order where the linear states are unphysical
            _ => constant,
        }
    }
}

/// Free-function form of [`Discretization::residual`].
pub fn spatial_residual(field: &GridField, disc: &Discretization) -> Result<Vec<Vec5>> {
    disc.residual(field)
}

pub fn pack_vec5(dim: usize, v: &[Vec5]) -> Vec<f64> {
    let nv = nvar(dim);
    let mut out = Vec::with_capacity(v.len() * nv);
    for x in v {
        for k in 0..nv {
            out.push(x[active_index(dim, k)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxScheme;
    use crate::grid::Grid;
    use crate::state::{prim_to_cons, PrimitiveState};

    #[test]
    fn uniform_rest_state_is_steady() {
        let eos = Eos::new(1.4).unwrap();
        let grid = Grid::new(&[6, 5], &[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        let u = prim_to_cons(&PrimitiveState { rho: 1.0, vel: [0.0; 3], p: 1.0 }, &eos);
        let f = GridField::uniform(grid, u);
        for s in FluxScheme::ALL {
            for recon in [ReconMode::Constant, ReconMode::LinearUnlimited] {
                let d = Discretization::new(eos, FluxConfig::new(s), recon, BoundaryCondition::periodic());
                let r = d.residual(&f).unwrap();
                assert!(r.iter().all(|x| x.amax() < 1e-13), "{s:?}");
            }
        }
    }
}
