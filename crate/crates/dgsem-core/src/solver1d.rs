//! The 1D scheme: exact periodic solve by a rank-one correction of the
//! block lower-triangular system, inflow sweeps and 1D diagnostics.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::gll::Basis;
use crate::mesh::{Field, Mesh, Space};
use crate::scheme::{Boundary, Mode, Scheme, SchemeConfig};

/// Smallest accepted `|1 − λ_0 W_{N−1}^p|`.
pub const DENOMINATOR_GUARD: f64 = 1e-14;

impl Scheme {
    /// Periodic 1D solve: `A_0 V = b`, `A_0 W = e_0`, then
    /// `U = V + λ_0 V_{N−1}^p / (1 − λ_0 W_{N−1}^p) W`.
    pub(crate) fn solve_periodic_1d(&mut self, base: &[f64]) -> Result<Vec<f64>> {
        let npc = self.space.nodes_per_cell();
        let cells = self.space.mesh().cells();
        let last = (cells - 1) * npc + npc - 1;
        let mut v = vec![0.0; base.len()];
        self.sweep(base, &mut v, Mode::High, false)?;
        if self.wrap_response.is_none() {
            let mut e0 = vec![0.0; base.len()];
            e0[0] = 1.0;
            let mut w = vec![0.0; base.len()];
            self.sweep(&e0, &mut w, Mode::High, false)?;
            self.wrap_response = Some(w);
        }
        let w = self.wrap_response.as_ref().expect("wrap response cached");
        let lam0 = self.lambda[0][0];
        let den = 1.0 - lam0 * w[last];
        if den.abs() < DENOMINATOR_GUARD {
            bail!(Numeric, "periodic rank-one denominator {:.3e} below {:.0e}", den, DENOMINATOR_GUARD);
        }
        let coef = lam0 * v[last] / den;
        for (vi, wi) in v.iter_mut().zip(w) {
            *vi += coef * wi;
        }
        self.stats.sweeps = 2;
        self.stats.residual = 0.0;
        Ok(v)
    }
}

/// A 1D scheme with unit velocity and `Δt = λ·h` on a uniform mesh.
pub fn uniform_scheme(p: usize, a: f64, b: f64, cells: usize, lambda: f64, boundary: Boundary) -> Result<Scheme> {
    let mesh = Mesh::uniform(1, a, b, cells)?;
    let h = mesh.axis(0).size(0);
    let space = Space::new(mesh, Basis::new(p)?);
    Scheme::new(space, SchemeConfig::transport(1, lambda * h, boundary))
}

/// Residual of `⟨u⟩ⁿ⁺¹_i + λ_i(U_i^p − U_{i−1}^p) = ⟨u⟩ⁿ_i` per cell
/// (periodic mesh, no reaction or source).
pub fn cell_average_defect(scheme: &Scheme, before: &Field, after: &Field) -> Vec<f64> {
    let p = scheme.space().degree();
    let n = p + 1;
    let cells = scheme.space().mesh().cells();
    let a0 = before.averages();
    let a1 = after.averages();
    (0..cells)
        .map(|i| {
            let im = (i + cells - 1) % cells;
            let lam = scheme.lambda(i)[0];
            a1[i] + lam * (after.values()[i * n + p] - after.values()[im * n + p]) - a0[i]
        })
        .collect()
}

/// Node coordinates `i·h + (1 + ξ_k)h/2` of a uniform periodic mesh on
/// `[0, N·h]`.
pub fn uniform_nodes(space: &Arc<Space>) -> Vec<f64> {
    let npc = space.nodes_per_cell();
    (0..space.dofs()).map(|i| space.position(i / npc, i % npc)[0]).collect()
}
