use std::f64::consts::PI;

use dgsem_core::mesh::SpaceTimeError;
use dgsem_core::{Axis, Basis, Bounds, Field, Mesh, Space};
use proptest::prelude::*;

#[test]
fn projection_samples_the_nodes() {
    let space = Space::new(Mesh::uniform(1, 0.0, 1.0, 20).unwrap(), Basis::new(2).unwrap());
    let f = Field::project(space.clone(), |x| (2.0 * PI * x[0]).sin());
    // Cell 1, node 1 sits at h + h/2.
    let x = 0.05 + 0.025;
    assert_eq!(f.cell(1)[1], (2.0 * PI * x).sin());
    assert_eq!(Field::project(space, |_| 0.0).minmax_dofs(), (0.0, 0.0));
}

#[test]
fn exact_fields_have_zero_error() {
    let space = Space::new(Mesh::uniform(2, 0.0, 1.0, 4).unwrap(), Basis::new(3).unwrap());
    let g = |x: &[f64]| x[0] * x[1] - 0.3;
    let f = Field::project(space, g);
    assert_eq!(f.l2_error(g), 0.0);
    assert_eq!(f.linf_error(g), 0.0);
}

#[test]
fn l2_norm_of_a_constant_is_the_root_volume() {
    let space = Space::new(Mesh::uniform(3, 0.0, 2.0, 3).unwrap(), Basis::new(2).unwrap());
    let f = Field::project(space, |_| 1.0);
    assert!((f.l2_error(|_| 0.0) - 8f64.sqrt()).abs() < 1e-13);
    assert!((f.integral() - 8.0).abs() < 1e-13);
}

#[test]
fn space_time_error_weights_by_step() {
    let mut e = SpaceTimeError::default();
    e.add(0.1, 2.0, 3.0);
    e.add(0.2, 1.0, 1.0);
    assert!((e.l2 - 0.4).abs() < 1e-15 && (e.linf - 0.5).abs() < 1e-15);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(Bounds::new(1.0, 0.0).is_err());
    assert!(Axis::from_faces(vec![0.0, 0.5, 0.4]).is_err());
    let space = Space::new(Mesh::uniform(1, 0.0, 1.0, 2).unwrap(), Basis::new(1).unwrap());
    assert!(Field::from_values(space, vec![0.0; 3]).is_err());
}

#[test]
fn nonuniform_axis_sizes_add_up() {
    let ax = Axis::from_faces(vec![0.0, 0.1, 0.35, 1.0]).unwrap();
    assert!((ax.sizes().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(!ax.is_uniform());
}

proptest! {
    #[test]
    fn dof_indices_round_trip(dim in 1usize..=3, p in 1usize..=4, cells in 1usize..=4) {
        let space = Space::new(Mesh::uniform(dim, 0.0, 1.0, cells).unwrap(), Basis::new(p).unwrap());
        let mesh = space.mesh();
        for c in 0..mesh.cells() {
            prop_assert_eq!(mesh.cell_index(mesh.cell_coords(c)), c);
        }
        for node in 0..space.nodes_per_cell() {
            prop_assert_eq!(space.node_index(space.node_coords(node)), node);
        }
        for dof in 0..space.dofs() {
            let (c, n) = space.dof_coords(dof);
            prop_assert_eq!(space.dof_index(c, n), dof);
        }
    }

    #[test]
    fn averages_of_constants(dim in 1usize..=3, p in 1usize..=5, v in -5.0f64..5.0) {
        let space = Space::new(Mesh::uniform(dim, 0.0, 1.0, 2).unwrap(), Basis::new(p).unwrap());
        let f = Field::project(space, |_| v);
        for a in f.averages() {
            prop_assert!((a - v).abs() < 1e-13);
        }
    }
}
