//! The 2D scheme: high-order and graph-viscosity blocks with their fast
//! inverses, and uniform-mesh constructors.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Result;
use crate::gll::Basis;
use crate::mesh::{Mesh, Space};
use crate::scheme::{Boundary, Scheme, SchemeConfig};
use crate::spectral::SpectralFactor;
use crate::tensor::{BlockParams, BlockSolver, CellOps};

/// Fast inverse of a 2D diagonal block.
#[derive(Debug, Clone)]
pub struct DiagBlockFactor2D {
    pub ops: CellOps,
    pub solver: BlockSolver,
}

impl DiagBlockFactor2D {
    pub fn new(basis: &Basis, lambda_x: f64, lambda_y: f64, d: f64, shift: f64) -> Result<Self> {
        let ops = CellOps::new(basis, 2)?;
        let prm = BlockParams { lambda: [lambda_x, lambda_y, 0.0], d, shift };
        let solver = ops.factor(&prm)?;
        Ok(Self { ops, solver })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = alloc::vec![0.0; rhs.len()];
        self.solver.solve(&self.ops, rhs, &mut x)?;
        Ok(x)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; u.len()];
        self.ops.block_apply(self.solver.params(), u, &mut out);
        out
    }
}

/// Diagonal `a0 − 2(λ_x ψ_k + λ_y ψ_l)` of the block in the eigenbasis,
/// node `k + l(p+1)`.
pub fn psi_2d(factor: &SpectralFactor, lambda_x: f64, lambda_y: f64, a0: f64) -> Vec<Complex64> {
    let psi = factor.eigenvalues();
    let n = psi.len();
    (0..n * n).map(|i| Complex64::new(a0, 0.0) - psi[i % n] * (2.0 * lambda_x) - psi[i / n] * (2.0 * lambda_y)).collect()
}

/// Graph viscosity of one cell.
pub fn graph_viscosity_apply(basis: &Basis, cell: &[f64], lambda_x: f64, lambda_y: f64, d: f64) -> Result<Vec<f64>> {
    let ops = CellOps::new(basis, 2)?;
    Ok(ops.graph_viscosity(cell, [lambda_x, lambda_y, 0.0], d))
}

/// Unit velocity `(1, 1)` on `[a, b]²` with `Δt = λ·h`.
pub fn uniform_scheme(p: usize, a: f64, b: f64, cells: usize, lambda: f64, boundary: Boundary) -> Result<Scheme> {
    let mesh = Mesh::uniform(2, a, b, cells)?;
    let h = mesh.axis(0).size(0);
    let space = Space::new(mesh, Basis::new(p)?);
    Scheme::new(space, SchemeConfig::transport(2, lambda * h, boundary))
}
