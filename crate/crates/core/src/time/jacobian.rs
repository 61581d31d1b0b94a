//! Finite-difference Jacobians of the implicit-step function
//! `G(U) = U + α·r(U) − rhs` (so `∂G/∂U = I + α·∂r/∂U`), stored as block-sparse
//! matrices with one `nvar × nvar` block per coupled cell pair.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::flux::gravity_source;
use crate::grid::{ghost_links, GridField};
use crate::reconstruction::{prim_vec, ReconBasis, ReconMode};
use crate::state::{active_index, cons_to_prim, nvar, ConservedState, Eos, Vec5};
use crate::time::krylov::{LinearOperator, Preconditioner};
use crate::time::residual::{pack_vec5, Discretization};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Colored finite differences exploiting the stencil.
    FiniteDifferenceColored,
    /// One full residual per column; tiny grids only.
    DenseFD,
    /// No assembly: directional differences inside the Krylov solver.
    MatrixFree,
}

/// Relative finite-difference increment.
pub const FD_REL: f64 = 1.4901161193847656e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparse {
    pub n_cells: usize,
    pub nv: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    /// Row-major `nv × nv` blocks, one per entry of `cols`.
    pub vals: Vec<f64>,
}

impl BlockSparse {
    fn with_pattern(nv: usize, deps: &[Vec<usize>]) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        for d in deps {
            cols.extend_from_slice(d);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len() * nv * nv];
        Self { n_cells: deps.len(), nv, row_ptr, cols, vals }
    }

    pub fn block_index(&self, i: usize, j: usize) -> Option<usize> {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        r.binary_search(&j).ok().map(|p| self.row_ptr[i] + p)
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        let b = self.nv * self.nv;
        self.block_index(i, j).map(|p| &self.vals[p * b..(p + 1) * b])
    }

    /// Number of stored scalar entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let nv = self.nv;
        let mut m = DMatrix::zeros(self.n_cells * nv, self.n_cells * nv);
        for i in 0..self.n_cells {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                for a in 0..nv {
                    for b in 0..nv {
                        m[(i * nv + a, j * nv + b)] = self.vals[p * nv * nv + a * nv + b];
                    }
                }
            }
        }
        m
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let nv = self.nv;
        for i in 0..self.n_cells {
            let yi = &mut y[i * nv..(i + 1) * nv];
            yi.iter_mut().for_each(|v| *v = 0.0);
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                let blk = &self.vals[p * nv * nv..(p + 1) * nv * nv];
                for a in 0..nv {
                    let mut s = 0.0;
                    for b in 0..nv {
                        s += blk[a * nv + b] * x[j * nv + b];
                    }
                    yi[a] += s;
                }
            }
        }
    }
}

impl LinearOperator for BlockSparse {
    fn dim(&self) -> usize {
        self.n_cells * self.nv
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.matvec(x, y);
        Ok(())
    }
}

/// Inverse diagonal blocks.
pub struct BlockJacobi {
    nv: usize,
    inv: Vec<DMatrix<f64>>,
}

impl BlockJacobi {
    pub fn new(j: &BlockSparse) -> Result<Self> {
        let nv = j.nv;
        let inv = (0..j.n_cells)
            .map(|i| {
                let b = j.block(i, i).ok_or(Error::SingularMatrix)?;
                DMatrix::from_row_slice(nv, nv, b).try_inverse().ok_or(Error::SingularMatrix)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nv, inv })
    }
}

impl Preconditioner for BlockJacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let nv = self.nv;
        for (i, m) in self.inv.iter().enumerate() {
            for a in 0..nv {
                let mut s = 0.0;
                for b in 0..nv {
                    s += m[(a, b)] * r[i * nv + b];
                }
                z[i * nv + a] = s;
            }
        }
    }
}

/// Which interior cells feed each interior cell's residual, and the inverse map.
pub struct StencilMap {
    pub deps: Vec<Vec<usize>>,
    pub rows_of: Vec<Vec<usize>>,
    /// Ghosts copying each interior cell, with the flipped velocity axis.
    pub ghosts_of: Vec<Vec<(usize, Option<usize>)>>,
    pub interior_of: Vec<Option<usize>>,
}

pub fn stencil_map(field: &GridField, disc: &Discretization) -> StencilMap {
    let grid = &field.grid;
    let n = grid.n_interior();
    let mut interior_of = vec![None; grid.n_storage()];
    for i in 0..n {
        interior_of[grid.interior_storage(i)] = Some(i);
    }
    let mut ghosts_of = vec![Vec::new(); n];
    let mut source = HashMap::new();
    for l in ghost_links(grid, &disc.bc) {
        if let Some(i) = interior_of[l.source] {
            ghosts_of[i].push((l.ghost, l.flip));
            source.insert(l.ghost, i);
        }
    }
    let w = disc.recon.stencil_width() as isize;
    let mut deps = Vec::with_capacity(n);
    for i in 0..n {
        let c = grid.interior_coords(i);
        let mut d = vec![i];
        for a in 0..grid.dim {
            for o in -w..=w {
                let mut s = [c[0] as isize, c[1] as isize, c[2] as isize];
                s[a] += o;
                let st = grid.storage_index(s);
                if let Some(j) = interior_of[st].or_else(|| source.get(&st).copied()) {
                    d.push(j);
                }
            }
        }
        d.sort_unstable();
        d.dedup();
        deps.push(d);
    }
    let mut rows_of = vec![Vec::new(); n];
    for (i, d) in deps.iter().enumerate() {
        for &j in d {
            rows_of[j].push(i);
        }
    }
    StencilMap { deps, rows_of, ghosts_of, interior_of }
}

/// Greedy distance-2 coloring: columns sharing a dependent row get distinct colors.
pub fn color_columns(map: &StencilMap) -> Vec<Vec<usize>> {
    let n = map.deps.len();
    let mut color = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut forbidden = Vec::new();
    for j in 0..n {
        forbidden.clear();
        for &i in &map.rows_of[j] {
            for &k in &map.deps[i] {
                if color[k] != usize::MAX {
                    forbidden.push(color[k]);
                }
            }
        }
        let c = (0..).find(|c| !forbidden.contains(c)).unwrap();
        if c == groups.len() {
            groups.push(Vec::new());
        }
        groups[c].push(j);
        color[j] = c;
    }
    groups
}

/// Magnitude of each active unknown used to size increments and norms.
pub fn unknown_scales(field: &GridField, eos: &Eos) -> Vec<f64> {
    let dim = field.grid.dim;
    let nv = nvar(dim);
    let mut s = vec![0.0f64; nv];
    let mut rho_c = 0.0f64;
    let mut e_abs = 0.0f64;
    for u in field.interior_states() {
        let v = u.to_vec();
        for k in 0..nv {
            s[k] = s[k].max(v[active_index(dim, k)].abs());
        }
        if let Ok(q) = cons_to_prim(u, eos) {
            rho_c = rho_c.max(q.rho * eos.sound_speed(&q));
            e_abs = e_abs.max(eos.absolute_pressure(q.p) / (eos.gamma - 1.0));
        }
    }
    let m_max = (1..=dim).map(|k| s[k]).fold(0.0, f64::max);
    for k in 1..=dim {
        s[k] = if m_max > 0.0 { m_max } else { rho_c };
    }
    if s[nv - 1] == 0.0 {
        s[nv - 1] = e_abs;
    }
    s.iter().map(|v| if *v > 0.0 { *v } else { 1.0 }).collect()
}

fn set_active(u: &mut ConservedState, dim: usize, k: usize, value: f64) {
    let mut v = u.to_vec();
    v[active_index(dim, k)] = value;
    *u = ConservedState::from_vec(&v);
}

fn basis_value(u: &ConservedState, basis: ReconBasis, eos: &Eos) -> Result<Vec5> {
    Ok(match basis {
        ReconBasis::Conserved => u.to_vec(),
        ReconBasis::Primitive => prim_vec(&cons_to_prim(u, eos)?),
    })
}

/// `∂G/∂U` of `G(U) = U + α·r(U) − rhs` at `field` (the `rhs` does not matter).
pub fn assemble_jacobian(field: &GridField, disc: &Discretization, alpha: f64, mode: JacobianMode) -> Result<BlockSparse> {
    match mode {
        JacobianMode::DenseFD => dense_jacobian(field, disc, alpha),
        JacobianMode::FiniteDifferenceColored => colored_jacobian(field, disc, alpha),
        JacobianMode::MatrixFree => Err(crate::error::invalid("jacobian_mode", "matrix-free mode assembles nothing")),
    }
}

fn increment(x: f64, scale: f64) -> f64 {
    FD_REL * x.abs().max(scale)
}

fn dense_jacobian(field: &GridField, disc: &Discretization, alpha: f64) -> Result<BlockSparse> {
    let dim = field.grid.dim;
    let nv = nvar(dim);
    let n = field.grid.n_interior();
    let scales = unknown_scales(field, &disc.eos);
    let deps: Vec<Vec<usize>> = (0..n).map(|_| (0..n).collect()).collect();
    let mut jac = BlockSparse::with_pattern(nv, &deps);
    let r0 = disc.residual_packed(field)?;
    let mut work = field.clone();
    for j in 0..n {
        for k in 0..nv {
            let orig = *work.interior(j);
            let x = orig.to_vec()[active_index(dim, k)];
            let h = increment(x, scales[k]);
            set_active(work.interior_mut(j), dim, k, x + h);
            let r1 = disc.residual_packed(&work)?;
            *work.interior_mut(j) = orig;
            for i in 0..n {
                let p = jac.block_index(i, j).unwrap();
                for a in 0..nv {
                    let d = alpha * (r1[i * nv + a] - r0[i * nv + a]) / h;
                    jac.vals[p * nv * nv + a * nv + k] = d + if i == j && a == k { 1.0 } else { 0.0 };
                }
            }
        }
    }
    Ok(jac)
}

fn colored_jacobian(field: &GridField, disc: &Discretization, alpha: f64) -> Result<BlockSparse> {
    let grid = field.grid.clone();
    let dim = grid.dim;
    let nv = nvar(dim);
    let n = grid.n_interior();
    let map = stencil_map(field, disc);
    let colors = color_columns(&map);
    let scales = unknown_scales(field, &disc.eos);
    let mut jac = BlockSparse::with_pattern(nv, &map.deps);

    let mut work = field.clone();
    work.fill_ghosts(&disc.bc);
    let mut w = disc.cell_values(&work)?;
    let linear = disc.recon != ReconMode::Constant;

    // base fluxes of every face, keyed by the storage index of its left cell
    let mut base: Vec<Vec<Vec5>> = vec![vec![Vec5::zeros(); grid.n_storage()]; dim];
    for (axis, b) in base.iter_mut().enumerate() {
        for f in faces_along(&grid, axis) {
            b[f] = disc.face_flux(&work, &w, f, axis)?;
        }
    }

    let offsets: Vec<isize> = if linear { vec![-2, -1, 0, 1] } else { vec![-1, 0] };
    let mut delta = vec![Vec5::zeros(); n];
    let mut touched = vec![false; n];
    let mut touched_list = Vec::new();
    let mut faces = Vec::new();
    for group in &colors {
        for k in 0..nv {
            let mut saved = Vec::with_capacity(group.len());
            let mut hs = Vec::with_capacity(group.len());
            faces.clear();
            for &j in group {
                let s = grid.interior_storage(j);
                let orig = work.data[s];
                let x = orig.to_vec()[active_index(dim, k)];
                let h = increment(x, scales[k]);
                hs.push(h);
                saved.push(orig);
                set_active(&mut work.data[s], dim, k, x + h);
                let mut cells = vec![s];
                for &(g, flip) in &map.ghosts_of[j] {
                    let mut u = work.data[s];
                    if let Some(a) = flip {
                        u.mom[a] = -u.mom[a];
                    }
                    work.data[g] = u;
                    cells.push(g);
                }
                for &c in &cells {
                    if linear {
                        w[c] = basis_value(&work.data[c], disc.basis, &disc.eos)?;
                    }
                    for axis in 0..dim {
                        let st = grid.stride(axis) as isize;
                        for &o in &offsets {
                            let f = c as isize + o * st;
                            if f >= 0 && is_face(&grid, axis, f as usize) {
                                faces.push((axis, f as usize));
                            }
                        }
                    }
                }
            }
            faces.sort_unstable();
            faces.dedup();
            for &(axis, f) in &faces {
                let df = (disc.face_flux(&work, &w, f, axis)? - base[axis][f]) / grid.spacing[axis];
                let right = f + grid.stride(axis);
                for (cell, sign) in [(f, 1.0), (right, -1.0)] {
                    if let Some(i) = map.interior_of[cell] {
                        delta[i] += df * sign;
                        if !touched[i] {
                            touched[i] = true;
                            touched_list.push(i);
                        }
                    }
                }
            }
            if let Some(g) = disc.gravity {
                for (&j, orig) in group.iter().zip(&saved) {
                    delta[j] -= gravity_source(work.interior(j), g) - gravity_source(orig, g);
                }
            }
            for (&j, &h) in group.iter().zip(&hs) {
                for &i in &map.rows_of[j] {
                    let p = jac.block_index(i, j).unwrap();
                    for a in 0..nv {
                        let d = alpha * delta[i][active_index(dim, a)] / h;
                        jac.vals[p * nv * nv + a * nv + k] = d + if i == j && a == k { 1.0 } else { 0.0 };
                    }
                }
            }
            for &i in &touched_list {
                delta[i] = Vec5::zeros();
                touched[i] = false;
            }
            touched_list.clear();
            // restore the perturbed cells, their ghost copies and basis values
            for (&j, orig) in group.iter().zip(&saved) {
                let s = grid.interior_storage(j);
                work.data[s] = *orig;
                if linear {
                    w[s] = basis_value(orig, disc.basis, &disc.eos)?;
                }
                for &(g, flip) in &map.ghosts_of[j] {
                    let mut u = *orig;
                    if let Some(a) = flip {
                        u.mom[a] = -u.mom[a];
                    }
                    work.data[g] = u;
                    if linear {
                        w[g] = basis_value(&u, disc.basis, &disc.eos)?;
                    }
                }
            }
        }
    }
    Ok(jac)
}

/// Whether storage cell `f` is the left cell of a face in the computational domain.
fn is_face(grid: &crate::grid::Grid, axis: usize, f: usize) -> bool {
    let e = grid.extent();
    let s = [f % e[0], (f / e[0]) % e[1], f / (e[0] * e[1])];
    if s[2] >= e[2] {
        return false;
    }
    let g = grid.n_ghost;
    (0..grid.dim).all(|a| {
        let c = s[a] as isize - g as isize;
        let n = grid.n_cells[a] as isize;
        if a == axis {
            (-1..n).contains(&c)
        } else {
            (0..n).contains(&c)
        }
    })
}

fn faces_along(grid: &crate::grid::Grid, axis: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for line in crate::reconstruction::lines(grid, axis) {
        for f in 0..=grid.n_cells[axis] {
            let mut c = line;
            c[axis] = f as isize - 1;
            out.push(grid.storage_index(c));
        }
    }
    out
}

/// `w ↦ w + α·(r(U + εw) − r(U))/ε`, the Jacobian-free product.
pub struct MatrixFree<'a> {
    pub disc: &'a Discretization,
    pub field: GridField,
    pub base: Vec<f64>,
    pub x: Vec<f64>,
    pub alpha: f64,
    pub scales: Vec<f64>,
}

impl<'a> MatrixFree<'a> {
    pub fn new(disc: &'a Discretization, field: &GridField, alpha: f64, scales: Vec<f64>) -> Result<Self> {
        let base = disc.residual_packed(field)?;
        Ok(Self { disc, x: field.pack(), field: field.clone(), base, alpha, scales })
    }
}

impl LinearOperator for MatrixFree<'_> {
    fn dim(&self) -> usize {
        self.x.len()
    }

    fn apply(&self, v: &[f64], y: &mut [f64]) -> Result<()> {
        let nv = self.scales.len();
        let vn = (v.iter().enumerate().map(|(i, a)| (a / self.scales[i % nv]).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
        if vn == 0.0 {
            y.iter_mut().for_each(|a| *a = 0.0);
            return Ok(());
        }
        let eps = FD_REL * 2.0 / vn;
        let xp: Vec<f64> = self.x.iter().zip(v).map(|(a, b)| a + eps * b).collect();
        let mut f = self.field.clone();
        f.unpack(&xp);
        let r = self.disc.residual_packed(&f)?;
        for i in 0..y.len() {
            y[i] = v[i] + self.alpha * (r[i] - self.base[i]) / eps;
        }
        Ok(())
    }
}

/// Packed residual of a field, used by tests and the Newton driver.
pub fn packed_residual(field: &GridField, disc: &Discretization) -> Result<Vec<f64>> {
    disc.residual(field).map(|r| pack_vec5(field.grid.dim, &r))
}
