//! Uniform Cartesian grids with ghost layers, boundary conditions and fields.
//!
//! Storage covers the interior plus `n_ghost` layers on each side of every
//! active axis, with x varying fastest. Interior cells are addressed by
//! `[i, j, k]` in `0..n_cells`; ghost cells by indices just outside.

use crate::error::{invalid, Result};
use crate::state::{nvar, prim_to_cons, ConservedState, Eos, PrimitiveState};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dim: usize,
    /// Interior cells per axis; 1 on inactive axes.
    pub n_cells: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub n_ghost: usize,
}

impl Grid {
    /// Grid on the box `lo..hi` with `n_cells[a]` cells along each active axis.
    pub fn new(n_cells: &[usize], lo: &[f64], hi: &[f64], n_ghost: usize) -> Result<Self> {
        let dim = n_cells.len();
        if !(1..=3).contains(&dim) || lo.len() != dim || hi.len() != dim {
            return Err(invalid("dim", "grid needs 1 to 3 axes with matching bounds"));
        }
        if n_ghost < 1 {
            return Err(invalid("n_ghost", "at least one ghost layer is required"));
        }
        let mut g = Grid { dim, n_cells: [1; 3], spacing: [1.0; 3], origin: [0.0; 3], n_ghost };
        for a in 0..dim {
            if n_cells[a] < 2 {
                return Err(invalid("n_cells", "need at least 2 cells per active axis"));
            }
            let h = (hi[a] - lo[a]) / n_cells[a] as f64;
            if !(h > 0.0) || !h.is_finite() {
                return Err(invalid("spacing", "domain extent must be positive"));
            }
            g.n_cells[a] = n_cells[a];
            g.spacing[a] = h;
            g.origin[a] = lo[a];
        }
        Ok(g)
    }

    pub fn nvar(&self) -> usize {
        nvar(self.dim)
    }

    pub fn n_interior(&self) -> usize {
        self.n_cells.iter().product()
    }

    /// Storage extent per axis (ghosts included on active axes).
    pub fn extent(&self) -> [usize; 3] {
        let mut e = [1; 3];
        for a in 0..self.dim {
            e[a] = self.n_cells[a] + 2 * self.n_ghost;
        }
        e
    }

    pub fn n_storage(&self) -> usize {
        self.extent().iter().product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        let e = self.extent();
        match axis {
            0 => 1,
            1 => e[0],
            _ => e[0] * e[1],
        }
    }

    fn offset(&self, a: usize) -> isize {
        if a < self.dim {
            self.n_ghost as isize
        } else {
            0
        }
    }

    /// Storage index of a (possibly ghost) cell given interior coordinates.
    pub fn storage_index(&self, c: [isize; 3]) -> usize {
        let e = self.extent();
        let s = |a: usize| (c[a] + self.offset(a)) as usize;
        s(0) + e[0] * (s(1) + e[1] * s(2))
    }

    /// Storage index of interior cell number `n` (x fastest).
    pub fn interior_storage(&self, n: usize) -> usize {
        let c = self.interior_coords(n);
        self.storage_index([c[0] as isize, c[1] as isize, c[2] as isize])
    }

    pub fn interior_coords(&self, n: usize) -> [usize; 3] {
        let nx = self.n_cells[0];
        let ny = self.n_cells[1];
        [n % nx, (n / nx) % ny, n / (nx * ny)]
    }

    pub fn interior_number(&self, c: [usize; 3]) -> usize {
        c[0] + self.n_cells[0] * (c[1] + self.n_cells[1] * c[2])
    }

    pub fn cell_center(&self, c: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + (c[a] as f64 + 0.5) * self.spacing[a];
        }
        x
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    ReflectingWall,
    /// Zero-gradient copy of the nearest interior cell.
    Outflow,
    /// Ghost values are left as initialized (prescribed states).
    Fixed,
}

/// Boundary kind per axis and side (`[low, high]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub sides: [[BoundaryKind; 2]; 3],
}

impl BoundaryCondition {
    pub fn uniform(kind: BoundaryKind) -> Self {
        Self { sides: [[kind; 2]; 3] }
    }

    pub fn periodic() -> Self {
        Self::uniform(BoundaryKind::Periodic)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for a in 0..dim {
            let [lo, hi] = self.sides[a];
            if (lo == BoundaryKind::Periodic) != (hi == BoundaryKind::Periodic) {
                return Err(invalid("boundary", format!("periodic axis {a} must be periodic on both sides")));
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self, dim: usize) -> bool {
        (0..dim).all(|a| self.sides[a][0] == BoundaryKind::Periodic)
    }
}

/// A ghost cell and the interior cell it copies, with the axis whose velocity
/// component is negated for walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostLink {
    pub ghost: usize,
    pub source: usize,
    pub flip: Option<usize>,
}

/// Ghost links for every ghost slab (corner ghosts are never read).
pub fn ghost_links(grid: &Grid, bc: &BoundaryCondition) -> Vec<GhostLink> {
    let mut links = Vec::new();
    let g = grid.n_ghost as isize;
    for a in 0..grid.dim {
        let n = grid.n_cells[a] as isize;
        let (t1, t2) = match a {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for q in 0..grid.n_cells[t2] as isize {
            for p in 0..grid.n_cells[t1] as isize {
                for side in 0..2 {
                    for l in 0..g {
                        let ghost = if side == 0 { -1 - l } else { n + l };
                        let src = match bc.sides[a][side] {
                            BoundaryKind::Periodic => Some((ghost.rem_euclid(n), None)),
                            BoundaryKind::ReflectingWall => {
                                let s = if side == 0 { l } else { n - 1 - l };
                                Some((s.clamp(0, n - 1), Some(a)))
                            }
                            BoundaryKind::Outflow => Some((if side == 0 { 0 } else { n - 1 }, None)),
                            BoundaryKind::Fixed => None,
                        };
                        if let Some((s, flip)) = src {
                            let mut cg = [0isize; 3];
                            cg[a] = ghost;
                            cg[t1] = p;
                            cg[t2] = q;
                            let mut cs = cg;
                            cs[a] = s;
                            links.push(GhostLink {
                                ghost: grid.storage_index(cg),
                                source: grid.storage_index(cs),
                                flip,
                            });
                        }
                    }
                }
            }
        }
    }
    links
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub data: Vec<ConservedState>,
}

impl GridField {
    pub fn uniform(grid: Grid, u: ConservedState) -> Self {
        let n = grid.n_storage();
        Self { grid, data: vec![u; n] }
    }

    /// Field sampled at cell centres; ghosts receive the profile evaluated at
    /// their own centres, which `Fixed` boundaries keep.
    pub fn from_primitive(grid: Grid, eos: &Eos, f: impl Fn([f64; 3]) -> PrimitiveState) -> Self {
        let e = grid.extent();
        let mut data = Vec::with_capacity(grid.n_storage());
        for k in 0..e[2] {
            for j in 0..e[1] {
                for i in 0..e[0] {
                    let s = [i, j, k];
                    let mut x = [0.0; 3];
                    for a in 0..grid.dim {
                        x[a] = grid.origin[a] + (s[a] as f64 - grid.n_ghost as f64 + 0.5) * grid.spacing[a];
                    }
                    data.push(prim_to_cons(&f(x), eos));
                }
            }
        }
        Self { grid, data }
    }

    pub fn interior(&self, n: usize) -> &ConservedState {
        &self.data[self.grid.interior_storage(n)]
    }

    pub fn interior_mut(&mut self, n: usize) -> &mut ConservedState {
        let s = self.grid.interior_storage(n);
        &mut self.data[s]
    }

    pub fn interior_states(&self) -> impl Iterator<Item = &ConservedState> + '_ {
        (0..self.grid.n_interior()).map(move |n| self.interior(n))
    }

    pub fn fill_ghosts(&mut self, bc: &BoundaryCondition) {
        let links = ghost_links(&self.grid, bc);
        apply_links(&mut self.data, &links);
    }

    /// Σ U·vol over interior cells in storage order; active components only.
    pub fn total_conserved(&self) -> Vec<f64> {
        let dim = self.grid.dim;
        let vol = self.grid.cell_volume();
        let mut t = vec![0.0; nvar(dim)];
        for u in self.interior_states() {
            let v = u.to_vec();
            for (k, tk) in t.iter_mut().enumerate() {
                *tk += v[crate::state::active_index(dim, k)] * vol;
            }
        }
        t
    }

    /// Pack the active interior unknowns into a flat vector (cell-major).
    pub fn pack(&self) -> Vec<f64> {
        let dim = self.grid.dim;
        let nv = nvar(dim);
        let mut out = Vec::with_capacity(self.grid.n_interior() * nv);
        for u in self.interior_states() {
            let v = u.to_vec();
            for k in 0..nv {
                out.push(v[crate::state::active_index(dim, k)]);
            }
        }
        out
    }

    /// Overwrite the interior from a flat vector produced by [`pack`](Self::pack).
    pub fn unpack(&mut self, x: &[f64]) {
        let dim = self.grid.dim;
        let nv = nvar(dim);
        for n in 0..self.grid.n_interior() {
            let u = self.interior_mut(n);
            let mut v = u.to_vec();
            for k in 0..nv {
                v[crate::state::active_index(dim, k)] = x[n * nv + k];
            }
            *u = ConservedState::from_vec(&v);
        }
    }
}

pub(crate) fn apply_links(data: &mut [ConservedState], links: &[GhostLink]) {
    for l in links {
        let mut u = data[l.source];
        if let Some(a) = l.flip {
            u.mom[a] = -u.mom[a];
        }
        data[l.ghost] = u;
    }
}
