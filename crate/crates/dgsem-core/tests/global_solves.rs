mod common;

use std::sync::Arc;

use common::{gauss_solve, ops1d, rel_err};
use dgsem_core::bounds::d_min;
use dgsem_core::scheme::{Boundary, Mode, Scheme, SchemeConfig};
use dgsem_core::{scalar_fn, Basis, Field, Mesh, ScalarFn, Space};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn space(dim: usize, p: usize, cells: usize) -> Arc<Space> {
    Space::new(Mesh::uniform(dim, 0.0, 1.0, cells).unwrap(), Basis::new(p).unwrap())
}

fn scheme(space: &Arc<Space>, lambda: f64, beta: f64, boundary: Boundary) -> Scheme {
    let dim = space.dim();
    let h = 1.0 / space.mesh().counts()[0] as f64;
    let cfg = SchemeConfig { velocity: vec![1.0; dim], dt: lambda * h, boundary: vec![boundary; dim], beta, source: None, viscosity: None };
    Scheme::new(space.clone(), cfg).unwrap()
}

fn random_field(space: &Arc<Space>, rng: &mut StdRng) -> Field {
    let v = (0..space.dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::from_values(space.clone(), v).unwrap()
}

/// `(⊗M) Uⁿ` cell by cell.
fn mass_rhs(space: &Arc<Space>, u: &Field) -> Vec<f64> {
    let w = space.node_weights();
    let npc = space.nodes_per_cell();
    u.values().iter().enumerate().map(|(i, v)| w[i % npc] * v).collect()
}

/// Inflow contribution `λ_a (Π_{b≠a} ω_{k_b}/2) g(x)` on the lower faces.
fn add_inflow(space: &Arc<Space>, lambda: f64, g: &ScalarFn, t: f64, b: &mut [f64]) {
    let dim = space.dim();
    let npc = space.nodes_per_cell();
    let half = space.basis().half_weights();
    for c in 0..space.mesh().cells() {
        let idx = space.mesh().cell_coords(c);
        for node in 0..npc {
            let k = space.node_coords(node);
            for a in 0..dim {
                if idx[a] != 0 || k[a] != 0 {
                    continue;
                }
                let fw: f64 = (0..dim).filter(|&o| o != a).map(|o| half[k[o]]).product();
                let mut x = space.position(c, node);
                x[a] = 0.0;
                b[c * npc + node] += lambda * fw * g(&x[..dim], t);
            }
        }
    }
}

fn check_periodic(dim: usize, p: usize, cells: usize, lambda: f64, beta: f64, low: bool, seed: u64) -> f64 {
    let sp = space(dim, p, cells);
    let mut s = scheme(&sp, lambda, beta, Boundary::Periodic);
    let mut rng = StdRng::seed_from_u64(seed);
    let u = random_field(&sp, &mut rng);
    let (mode, d) = if low {
        let d = d_min(sp.basis());
        (Mode::Low(d), d)
    } else {
        (Mode::High, 0.0)
    };
    let got = s.solve(&u, mode).unwrap();
    let shift = 1.0 + beta * s.config().dt;
    let a = common::global(&ops1d(p), dim, cells, [lambda; 3], d, shift, true);
    rel_err(got.values(), &gauss_solve(&a, &mass_rhs(&sp, &u)))
}

#[test]
fn periodic_1d_examples() {
    assert!(check_periodic(1, 1, 4, 1.0, 0.0, false, 1) < 1e-12);
    assert!(check_periodic(1, 3, 16, 0.3, 0.0, false, 2) < 1e-12);
    assert!(check_periodic(1, 4, 7, 5.0, 2.0, false, 3) < 1e-12);
}

#[test]
fn periodic_2d_and_3d_examples() {
    assert!(check_periodic(2, 1, 3, 1.0, 0.0, false, 4) < 1e-10);
    assert!(check_periodic(2, 2, 3, 1.0, 0.0, true, 5) < 1e-10);
    assert!(check_periodic(3, 1, 2, 1.0, 0.0, false, 6) < 1e-10);
    assert!(check_periodic(3, 1, 2, 0.7, 0.0, true, 7) < 1e-10);
}

#[test]
fn inflow_sweeps_match_elimination() {
    let g = scalar_fn(|x, t| (3.0 * x.iter().sum::<f64>() + t).sin());
    for (dim, p, cells) in [(1, 3, 9), (2, 2, 4), (3, 1, 3)] {
        for low in [false, true] {
            let sp = space(dim, p, cells);
            let lambda = 0.8;
            let mut s = scheme(&sp, lambda, 0.5, Boundary::Inflow(g.clone()));
            let mut rng = StdRng::seed_from_u64(dim as u64);
            let u = random_field(&sp, &mut rng);
            let d = if low { d_min(sp.basis()) } else { 0.0 };
            let mode = if low { Mode::Low(d) } else { Mode::High };
            let got = s.solve(&u, mode).unwrap();
            let t1 = s.config().dt;
            let mut b = mass_rhs(&sp, &u);
            add_inflow(&sp, lambda, &g, t1, &mut b);
            let shift = 1.0 + 0.5 * s.config().dt;
            let a = common::global(&ops1d(p), dim, cells, [lambda; 3], d, shift, false);
            let err = rel_err(got.values(), &gauss_solve(&a, &b));
            assert!(err < 1e-11, "dim={} p={} low={} err {:e}", dim, p, low, err);
            assert!(s.residual(&u, &got, mode) < 1e-12);
        }
    }
}

#[test]
fn constants_are_steady() {
    for dim in 1..=3 {
        let sp = space(dim, 2, 3);
        let mut s = scheme(&sp, 1.3, 0.0, Boundary::Periodic);
        let u = Field::project(sp.clone(), |_| 0.4);
        for mode in [Mode::High, Mode::Low(d_min(sp.basis()))] {
            let v = s.solve(&u, mode).unwrap();
            assert!(v.values().iter().all(|x| (x - 0.4).abs() < 1e-12), "dim={} {:?}", dim, mode);
        }
    }
}

#[test]
fn zero_inflow_keeps_zero() {
    let sp = space(1, 3, 5);
    let mut s = scheme(&sp, 1.0, 0.0, Boundary::Inflow(scalar_fn(|_, _| 0.0)));
    let v = s.solve(&Field::zeros(sp.clone()), Mode::High).unwrap();
    assert!(v.values().iter().all(|x| *x == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rank_one_periodic_solve_matches_elimination(
        p in 1usize..=4,
        cells in 1usize..=16,
        lambda in 0.01f64..10.0,
        beta in prop_oneof![Just(0.0), 0.0f64..10.0],
        seed in any::<u64>(),
    ) {
        let err = check_periodic(1, p, cells, lambda, beta, false, seed);
        prop_assert!(err < 1e-12, "err {:e}", err);
    }

    #[test]
    fn gauss_seidel_matches_elimination(
        p in 1usize..=2,
        cells in 2usize..=4,
        lambda in 0.05f64..5.0,
        low in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let err = check_periodic(2, p, cells, lambda, 0.0, low, seed);
        prop_assert!(err < 1e-10, "err {:e}", err);
    }
}
