//! Time-implicit discontinuous Galerkin spectral element method for linear
//! scalar hyperbolic conservation laws on Cartesian meshes.
//!
//! The crate is `no_std` with `alloc`; the default `std` feature only
//! forwards to dependencies.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod gll;
pub mod limiters;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod scheme;
pub mod solver1d;
pub mod solver2d;
pub mod solver3d;
pub mod spectral;
pub mod tensor;

mod math;

pub use error::{Error, Result};
pub use gll::Basis;
pub use mesh::{Axis, Bounds, Field, Mesh, Space};
pub use num_complex::Complex64;

use alloc::sync::Arc;

/// Scalar data `f(x, t)`: boundary values, sources and exact solutions.
pub type ScalarFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Wraps a closure into a [`ScalarFn`].
pub fn scalar_fn<F>(f: F) -> ScalarFn
where
    F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
{
    Arc::new(f)
}
