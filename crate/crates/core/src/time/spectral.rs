//! Constant-coefficient Fourier preconditioner for periodic uniform grids.
//!
//! The implicit-step operator `I + α·∂r/∂U` is linearized about a uniform
//! reference state, where it is diagonalized by the discrete Fourier
//! transform. Each wavevector contributes an `nvar × nvar` complex block,
//! inverted once. Applying the preconditioner costs a handful of FFTs, and it
//! captures the stiff acoustic part of the operator at any Mach number.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::flux::{diffusion_matrix, flux_jacobian, Basis, Normal};
use crate::grid::Grid;
use crate::reconstruction::ReconMode;
use crate::state::{active_index, nvar, Mat5, PrimitiveState};
use crate::time::krylov::Preconditioner;
use crate::time::residual::Discretization;

type C64 = Complex<f64>;

/// In-place multi-dimensional FFT over an x-fastest array.
pub struct FftNd {
    dims: [usize; 3],
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl FftNd {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims,
            forward: dims.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    /// Unnormalized transform; an inverse after a forward multiplies by N.
    pub fn process(&self, data: &mut [C64], inverse: bool) {
        let d = self.dims;
        let strides = [1, d[0], d[0] * d[1]];
        let mut buf = Vec::new();
        for axis in 0..3 {
            let n = d[axis];
            if n == 1 {
                continue;
            }
            let plan = if inverse { &self.inverse[axis] } else { &self.forward[axis] };
            buf.resize(n, C64::new(0.0, 0.0));
            for start in 0..data.len() {
                // visit each line once, from its first element
                if (start / strides[axis]) % n != 0 {
                    continue;
                }
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = data[start + t * strides[axis]];
                }
                plan.process(&mut buf);
                for (t, b) in buf.iter().enumerate() {
                    data[start + t * strides[axis]] = *b;
                }
            }
        }
    }
}

pub struct SpectralPreconditioner {
    nv: usize,
    n_cells: usize,
    inv: Vec<C64>,
    fft: FftNd,
}

fn to_complex(m: &Mat5) -> nalgebra::SMatrix<C64, 5, 5> {
    m.map(|x| C64::new(x, 0.0))
}

impl SpectralPreconditioner {
    /// Preconditioner for `I + α·∂r/∂U` linearized about the uniform state `q`.
    pub fn new(grid: &Grid, disc: &Discretization, q: &PrimitiveState, alpha: f64) -> Result<Self> {
        if !disc.bc.is_periodic(grid.dim) {
            return Err(invalid("preconditioner", "the spectral preconditioner needs periodic boundaries"));
        }
        if disc.gravity.is_some() {
            return Err(invalid("preconditioner", "the spectral preconditioner cannot represent gravity"));
        }
        let dim = grid.dim;
        let nv = nvar(dim);
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        // symbol of each axis' flux difference, per wavenumber index
        let mut symbols: Vec<Vec<nalgebra::SMatrix<C64, 5, 5>>> = Vec::new();
        for axis in 0..dim {
            let n = Normal::positive(axis);
            let a = flux_jacobian(q, n, &disc.eos, Basis::Conserved);
            let d = match disc.flux.scheme.preconditioner() {
                None => Mat5::zeros(),
                Some(kind) => diffusion_matrix(kind, q, q, disc.flux.m_cut, n, &disc.eos, disc.flux.efix)?,
            };
            let plus = to_complex(&((a + d) * 0.5));
            let minus = to_complex(&((a - d) * 0.5));
            let h = grid.spacing[axis];
            let m = grid.n_cells[axis];
            let mut per = Vec::with_capacity(m);
            for k in 0..m {
                let beta = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                let e = C64::from_polar(1.0, beta);
                let (l, r) = if disc.recon == ReconMode::Constant {
                    (one, one)
                } else {
                    (one + i * (0.5 * beta.sin()), one - i * (0.5 * beta.sin()))
                };
                let pre = (one - e.conj()) / h;
                per.push((plus * l + minus * (e * r)) * pre);
            }
            symbols.push(per);
        }
        // invert in variables where every acoustic entry is O(c); in raw
        // conserved variables the block spans ~c² orders and LU loses it all
        let c_ref = disc.eos.sound_speed(q);
        let bal: Vec<f64> = (0..nv)
            .map(|k| match k {
                0 => 1.0 / q.rho,
                _ if k == nv - 1 => 1.0 / (q.rho * c_ref * c_ref),
                _ => 1.0 / (q.rho * c_ref),
            })
            .collect();
        let nc = grid.n_interior();
        let mut inv = Vec::with_capacity(nc * nv * nv);
        for cell in 0..nc {
            let c = grid.interior_coords(cell);
            let mut s = nalgebra::SMatrix::<C64, 5, 5>::zeros();
            for axis in 0..dim {
                s += symbols[axis][c[axis]];
            }
            let g = DMatrix::from_fn(nv, nv, |r, col| {
                let v = s[(active_index(dim, r), active_index(dim, col))] * (alpha * bal[r] / bal[col]);
                if r == col {
                    v + one
                } else {
                    v
                }
            });
            let gi = g.try_inverse().ok_or(Error::SingularMatrix)?;
            for r in 0..nv {
                for col in 0..nv {
                    inv.push(gi[(r, col)] * (bal[col] / bal[r]));
                }
            }
        }
        Ok(Self { nv, n_cells: nc, inv, fft: FftNd::new(grid.n_cells) })
    }
}

impl Preconditioner for SpectralPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let nv = self.nv;
        let n = self.n_cells;
        let mut comps: Vec<Vec<C64>> = (0..nv)
            .map(|k| (0..n).map(|c| C64::new(r[c * nv + k], 0.0)).collect())
            .collect();
        for c in comps.iter_mut() {
            self.fft.process(c, false);
        }
        let mut out = vec![vec![C64::new(0.0, 0.0); n]; nv];
        for cell in 0..n {
            let blk = &self.inv[cell * nv * nv..(cell + 1) * nv * nv];
            for a in 0..nv {
                let mut s = C64::new(0.0, 0.0);
                for b in 0..nv {
                    s += blk[a * nv + b] * comps[b][cell];
                }
                out[a][cell] = s;
            }
        }
        let scale = 1.0 / n as f64;
        for (k, c) in out.iter_mut().enumerate() {
            self.fft.process(c, true);
            for cell in 0..n {
                z[cell * nv + k] = c[cell].re * scale;
            }
        }
    }
}
