use lowmach::flux::{FluxConfig, FluxScheme};
use lowmach::grid::{BoundaryCondition, BoundaryKind, Grid, GridField};
use lowmach::reconstruction::ReconMode;
use lowmach::state::{prim_to_cons, Eos, PrimitiveState};
use lowmach::time::jacobian::{color_columns, stencil_map, BlockJacobi};
use lowmach::time::krylov::{IdentityPreconditioner, LinearOperator, Preconditioner};
use lowmach::time::spectral::SpectralPreconditioner;
use lowmach::time::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};

fn air() -> Eos {
    Eos::new(1.4).unwrap()
}

fn smooth_2d(n: usize, ghosts: usize) -> GridField {
    let grid = Grid::new(&[n, n + 1], &[0.0, 0.0], &[1.0, 1.0], ghosts).unwrap();
    GridField::from_primitive(grid, &air(), |x| {
        let (s, c) = ((2.0 * std::f64::consts::PI * x[0]).sin(), (2.0 * std::f64::consts::PI * x[1]).cos());
        PrimitiveState { rho: 1.0 + 0.2 * s * c, vel: [0.3 * c, -0.2 * s, 0.0], p: 1.0 + 0.1 * s }
    })
}

fn disc(scheme: FluxScheme, recon: ReconMode, bc: BoundaryCondition) -> Discretization {
    Discretization::new(air(), FluxConfig::new(scheme), recon, bc)
}

#[test]
fn periodic_explicit_steps_conserve_totals() {
    let f = smooth_2d(12, 2);
    for s in FluxScheme::ALL {
        for stepper in [ExplicitScheme::ForwardEuler, ExplicitScheme::Ssprk2] {
            let d = disc(s, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
            let before = f.total_conserved();
            let after = explicit_step(&f, 1e-3, stepper, &d).unwrap().total_conserved();
            for k in [0, 3] {
                let rel = (after[k] - before[k]).abs() / before[k].abs();
                assert!(rel < 1e-13, "{s:?} component {k}: {rel:e}");
            }
            for k in 1..3 {
                assert!((after[k] - before[k]).abs() < 1e-13 * before[3], "{s:?}");
            }
        }
    }
}

#[test]
fn serial_and_parallel_residuals_agree_bitwise() {
    let f = smooth_2d(10, 2);
    let d = disc(FluxScheme::RoeMiczek, ReconMode::LinearMinmod, BoundaryCondition::periodic());
    let a = d.residual(&f).unwrap();
    let b = d.clone().with_parallel(true).residual(&f).unwrap();
    assert_eq!(a, b);
}

#[test]
fn roe_moves_a_contact_upwind() {
    let eos = air();
    let grid = Grid::new(&[10], &[0.0], &[1.0], 2).unwrap();
    let v = 0.4;
    let f = GridField::from_primitive(grid, &eos, |x| PrimitiveState {
        rho: if x[0] < 0.5 { 2.0 } else { 1.0 },
        vel: [v, 0.0, 0.0],
        p: 1.0,
    });
    let d = disc(FluxScheme::Roe, ReconMode::Constant, BoundaryCondition::uniform(BoundaryKind::Outflow));
    let r = d.residual(&f).unwrap();
    let h = 0.1;
    for (i, ri) in r.iter().enumerate().skip(1) {
        let drho = f.interior(i).rho - f.interior(i - 1).rho;
        assert!((ri[0] - v * drho / h).abs() < 1e-12, "cell {i}: {}", ri[0]);
        assert!((ri[1] - v * v * drho / h).abs() < 1e-12);
    }
}

#[test]
fn colored_jacobian_equals_dense_oracle() {
    let eos = air();
    let grid = Grid::new(&[8], &[0.0], &[1.0], 2).unwrap();
    let f = GridField::from_primitive(grid, &eos, |x| PrimitiveState {
        rho: 1.0 + 0.3 * (6.0 * x[0]).sin(),
        vel: [0.2 + 0.1 * (3.0 * x[0]).cos(), 0.0, 0.0],
        p: 1.0 + 0.2 * x[0],
    });
    for bc in [BoundaryCondition::periodic(), BoundaryCondition::uniform(BoundaryKind::ReflectingWall)] {
        for s in FluxScheme::ALL {
            for recon in [ReconMode::Constant, ReconMode::LinearUnlimited] {
                let d = disc(s, recon, bc);
                let a = assemble_jacobian(&f, &d, 0.01, JacobianMode::FiniteDifferenceColored).unwrap().to_dense();
                let b = assemble_jacobian(&f, &d, 0.01, JacobianMode::DenseFD).unwrap().to_dense();
                let err = (&a - &b).amax();
                assert!(err < 2e-5, "{s:?} {recon:?}: {err:e}");
            }
        }
    }
}

#[test]
fn colored_jacobian_equals_dense_in_2d_with_walls() {
    let f = smooth_2d(4, 2);
    let mut bc = BoundaryCondition::periodic();
    bc.sides[1] = [BoundaryKind::ReflectingWall; 2];
    let d = disc(FluxScheme::RoeMiczek, ReconMode::LinearUnlimited, bc).with_gravity([0.0, -1.0, 0.0]);
    let a = assemble_jacobian(&f, &d, 0.02, JacobianMode::FiniteDifferenceColored).unwrap().to_dense();
    let b = assemble_jacobian(&f, &d, 0.02, JacobianMode::DenseFD).unwrap().to_dense();
    assert!((&a - &b).amax() < 1e-6, "{:e}", (&a - &b).amax());
}

#[test]
fn two_cell_periodic_jacobian() {
    let eos = air();
    let grid = Grid::new(&[2], &[0.0], &[1.0], 2).unwrap();
    let f = GridField::from_primitive(grid, &eos, |x| PrimitiveState { rho: 1.0 + x[0], vel: [0.1, 0.0, 0.0], p: 1.0 });
    let d = disc(FluxScheme::Roe, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let alpha = 1e-3;
    let a = assemble_jacobian(&f, &d, alpha, JacobianMode::FiniteDifferenceColored).unwrap().to_dense();
    let b = assemble_jacobian(&f, &d, alpha, JacobianMode::DenseFD).unwrap().to_dense();
    assert!((&a - &b).amax() < 1e-6);
    // I + α·(bounded local terms)
    assert!((&a - DMatrix::identity(6, 6)).amax() < alpha * 20.0);
}

#[test]
fn sparsity_is_limited_to_the_stencil() {
    let f = smooth_2d(9, 2);
    let d = disc(FluxScheme::RoeMiczek, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let j = assemble_jacobian(&f, &d, 0.01, JacobianMode::FiniteDifferenceColored).unwrap();
    let g = &f.grid;
    for i in 0..g.n_interior() {
        let ci = g.interior_coords(i);
        for p in j.row_ptr[i]..j.row_ptr[i + 1] {
            let cj = g.interior_coords(j.cols[p]);
            let dist: Vec<usize> = (0..2)
                .map(|a| {
                    let d = (ci[a] as isize - cj[a] as isize).unsigned_abs();
                    d.min(g.n_cells[a] - d)
                })
                .collect();
            assert!(dist.iter().filter(|&&x| x > 0).count() <= 1 && dist.iter().all(|&x| x <= 2));
        }
    }
    let colors = color_columns(&stencil_map(&f, &d));
    assert!(colors.len() <= 25, "{} colors", colors.len());
}

#[test]
fn jacobian_matches_directional_difference() {
    // velocities stay away from zero and sonic values, where |λ| has kinks
    let grid = Grid::new(&[5, 6], &[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
    let f = GridField::from_primitive(grid, &air(), |x| {
        let (s, c) = ((2.0 * std::f64::consts::PI * x[0]).sin(), (2.0 * std::f64::consts::PI * x[1]).cos());
        PrimitiveState { rho: 1.0 + 0.2 * s * c, vel: [0.4 + 0.1 * c, 0.3 - 0.1 * s, 0.0], p: 1.0 + 0.1 * s }
    });
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for s in FluxScheme::ALL {
        let d = disc(s, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
        let alpha = 0.01;
        let j = assemble_jacobian(&f, &d, alpha, JacobianMode::FiniteDifferenceColored).unwrap();
        let x = f.pack();
        let w: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut jw = vec![0.0; x.len()];
        j.matvec(&w, &mut jw);
        let eps = 1e-6;
        let r0 = d.residual_packed(&f).unwrap();
        let mut fp = f.clone();
        fp.unpack(&x.iter().zip(&w).map(|(a, b)| a + eps * b).collect::<Vec<_>>());
        let r1 = d.residual_packed(&fp).unwrap();
        let fd: Vec<f64> = (0..x.len()).map(|i| w[i] + alpha * (r1[i] - r0[i]) / eps).collect();
        let num: f64 = jw.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = fd.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(num / den < 1e-5, "{s:?}: {:e}", num / den);
    }
}

#[test]
fn gmres_matches_dense_solve() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let n = 50;
    let a = DMatrix::from_fn(n, n, |i, j| if i == j { 4.0 } else { 0.0 } + rng.gen_range(-0.5..0.5) / (n as f64).sqrt());
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let exact = a.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
    let x = krylov_solve(&a, &IdentityPreconditioner, &b, 1e-12).unwrap();
    let err = (nalgebra::DVector::from_column_slice(&x) - &exact).norm() / exact.norm();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn gmres_with_block_jacobi_on_implicit_operator() {
    let f = smooth_2d(6, 2);
    let d = disc(FluxScheme::Roe, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let j = assemble_jacobian(&f, &d, 0.01, JacobianMode::FiniteDifferenceColored).unwrap();
    let b: Vec<f64> = (0..j.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let m = BlockJacobi::new(&j).unwrap();
    let x = krylov_solve(&j, &m, &b, 1e-10).unwrap();
    let mut ax = vec![0.0; b.len()];
    j.matvec(&x, &mut ax);
    let res: f64 = ax.iter().zip(&b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
    assert!(res < 1e-9 * b.iter().map(|v| v * v).sum::<f64>().sqrt());
}

#[test]
fn rest_state_preserved_by_all_steppers() {
    let eos = air();
    let grid = Grid::new(&[6, 6], &[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
    let f = GridField::uniform(grid, prim_to_cons(&PrimitiveState { rho: 1.0, vel: [0.0; 3], p: 1.0 }, &eos));
    for s in FluxScheme::ALL {
        let d = disc(s, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
        for st in [ExplicitScheme::ForwardEuler, ExplicitScheme::Ssprk2] {
            assert_eq!(explicit_step(&f, 0.01, st, &d).unwrap().pack(), f.pack());
        }
        for st in [ImplicitScheme::BackwardEuler, ImplicitScheme::Esdirk23] {
            let (g, stats) = implicit_step(&f, 10.0, st, &d, &NewtonConfig::default()).unwrap();
            assert!(stats.newton_iters <= 1);
            let diff = g.pack().iter().zip(f.pack()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "{s:?} {st:?} {diff:e}");
        }
    }
}

fn pulse_1d(n: usize) -> GridField {
    let eos = air();
    let grid = Grid::new(&[n], &[0.0], &[1.0], 2).unwrap();
    GridField::from_primitive(grid, &eos, |x| {
        let s = (2.0 * std::f64::consts::PI * x[0]).sin();
        PrimitiveState { rho: 1.0 + 0.1 * s, vel: [0.1 * s, 0.0, 0.0], p: 1.0 + 0.14 * s }
    })
}

fn dist(a: &GridField, b: &GridField) -> f64 {
    a.pack().iter().zip(b.pack()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn backward_euler_agrees_with_forward_euler_for_tiny_steps() {
    let f = pulse_1d(16);
    let d = disc(FluxScheme::Roe, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let cfg = NewtonConfig { tol_rel: 1e-12, linear_tol: 1e-10, ..NewtonConfig::default() };
    let mut errs = Vec::new();
    for dt in [1e-3, 5e-4] {
        let e = explicit_step(&f, dt, ExplicitScheme::ForwardEuler, &d).unwrap();
        let (i, _) = implicit_step(&f, dt, ImplicitScheme::BackwardEuler, &d, &cfg).unwrap();
        errs.push(dist(&e, &i));
    }
    let ratio = errs[0] / errs[1];
    assert!((ratio - 4.0).abs() < 0.4, "{errs:?}");
}

#[test]
fn ssprk2_is_second_order() {
    let f = pulse_1d(32);
    let d = disc(FluxScheme::Central, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let run = |steps: usize| {
        let dt = 0.1 / steps as f64;
        let mut u = f.clone();
        for _ in 0..steps {
            u = explicit_step(&u, dt, ExplicitScheme::Ssprk2, &d).unwrap();
        }
        u
    };
    let reference = run(640);
    let e: Vec<f64> = [10, 20, 40].iter().map(|&s| dist(&run(s), &reference)).collect();
    let slope = ((e[0] / e[2]).ln() / 4f64.ln()).abs();
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}, errors {e:?}");
}

#[test]
fn esdirk23_is_second_order() {
    let f = pulse_1d(16);
    let d = disc(FluxScheme::Roe, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let cfg = NewtonConfig { tol_rel: 1e-12, linear_tol: 1e-11, step_tol: 1e-14, ..NewtonConfig::default() };
    let run = |steps: usize| {
        let dt = 0.2 / steps as f64;
        let mut u = f.clone();
        for _ in 0..steps {
            u = implicit_step(&u, dt, ImplicitScheme::Esdirk23, &d, &cfg).unwrap().0;
        }
        u
    };
    let reference = run(160);
    let e: Vec<f64> = [5, 10, 20].iter().map(|&s| dist(&run(s), &reference)).collect();
    let slope = ((e[0] / e[2]).ln() / 4f64.ln()).abs();
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}, errors {e:?}");
}

#[test]
fn spectral_preconditioner_inverts_uniform_state_operator() {
    let eos = air();
    let grid = Grid::new(&[8, 6], &[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
    let q = PrimitiveState { rho: 1.3, vel: [0.0; 3], p: 0.9 };
    let f = GridField::uniform(grid.clone(), prim_to_cons(&q, &eos));
    for s in FluxScheme::ALL {
        for recon in [ReconMode::Constant, ReconMode::LinearUnlimited] {
            // a cutoff above the increments keeps the rest state differentiable
            let d = Discretization::new(eos, FluxConfig::new(s).with_m_cut(1e-2), recon, BoundaryCondition::periodic());
            let alpha = 0.7;
            let j = assemble_jacobian(&f, &d, alpha, JacobianMode::FiniteDifferenceColored).unwrap();
            let p = SpectralPreconditioner::new(&grid, &d, &q, alpha).unwrap();
            let x: Vec<f64> = (0..j.dim()).map(|i| ((i * 7 % 13) as f64 - 6.0) / 6.0).collect();
            let mut jx = vec![0.0; x.len()];
            j.matvec(&x, &mut jx);
            let mut back = vec![0.0; x.len()];
            p.apply(&jx, &mut back);
            let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 2e-5, "{s:?} {recon:?}: {err:e}");
        }
    }
}

#[test]
fn newton_krylov_spectral_matches_assembled_solve() {
    let f = smooth_2d(8, 2);
    let d = disc(FluxScheme::RoeMiczek, ReconMode::LinearUnlimited, BoundaryCondition::periodic());
    let tight = |c: NewtonConfig| NewtonConfig { tol_rel: 1e-11, linear_tol: 1e-6, ..c };
    let (a, _) = implicit_step(&f, 0.05, ImplicitScheme::BackwardEuler, &d, &tight(NewtonConfig::default())).unwrap();
    let matrix_free = NewtonConfig { jacobian_mode: JacobianMode::MatrixFree, ..NewtonConfig::spectral() };
    for cfg in [NewtonConfig::spectral(), matrix_free] {
        let (b, stats) = implicit_step(&f, 0.05, ImplicitScheme::BackwardEuler, &d, &tight(cfg)).unwrap();
        assert!(dist(&a, &b) < 1e-7, "{:?}: {:e}", cfg.jacobian_mode, dist(&a, &b));
        assert!(stats.newton_iters >= 1);
    }
}
