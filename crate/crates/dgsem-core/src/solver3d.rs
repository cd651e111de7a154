//! The 3D scheme: triple tensor-product blocks and their fast inverses.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Result;
use crate::gll::Basis;
use crate::mesh::{Mesh, Space};
use crate::scheme::{Boundary, Scheme, SchemeConfig};
use crate::spectral::SpectralFactor;
use crate::tensor::{BlockParams, BlockSolver, CellOps};

/// Fast inverse of a 3D diagonal block.
#[derive(Debug, Clone)]
pub struct DiagBlockFactor3D {
    pub ops: CellOps,
    pub solver: BlockSolver,
}

impl DiagBlockFactor3D {
    pub fn new(basis: &Basis, lambda: [f64; 3], d: f64, shift: f64) -> Result<Self> {
        let ops = CellOps::new(basis, 3)?;
        let prm = BlockParams { lambda, d, shift };
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

/// Diagonal `a0 − 2(λ_x ψ_l + λ_y ψ_m + λ_z ψ_r)` of the block in the
/// eigenbasis, node `l + m(p+1) + r(p+1)²`.
pub fn psi_3d(factor: &SpectralFactor, lambda: [f64; 3], a0: f64) -> Vec<Complex64> {
    let psi = factor.eigenvalues();
    let n = psi.len();
    (0..n * n * n)
        .map(|i| {
            Complex64::new(a0, 0.0)
                - psi[i % n] * (2.0 * lambda[0])
                - psi[(i / n) % n] * (2.0 * lambda[1])
                - psi[i / (n * n)] * (2.0 * lambda[2])
        })
        .collect()
}

/// Unit velocity `(1, 1, 1)` on `[a, b]³` with `Δt = λ·h`.
pub fn uniform_scheme(p: usize, a: f64, b: f64, cells: usize, lambda: f64, boundary: Boundary) -> Result<Scheme> {
    let mesh = Mesh::uniform(3, a, b, cells)?;
    let h = mesh.axis(0).size(0);
    let space = Space::new(mesh, Basis::new(p)?);
    Scheme::new(space, SchemeConfig::transport(3, lambda * h, boundary))
}
