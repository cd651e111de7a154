//! Dimension-generic cell kernels: tensor contractions along one axis, the
//! diagonal-block operator and its fast inverses.
//!
//! A diagonal block acts on the nodal values `U` of one cell as
//!
//! `s(⊗M)U − Σ_a λ_a (⊗_{b≠a}M) ⊗ (2DᵀM − E)_a U + V(U)`
//!
//! with `M = diag(ω/2)`, `s = 1 + βΔt` and `V` the graph viscosity of
//! coefficient `d`. Writing `w = (⊗M)U` the block becomes `L^v w` with
//! `L^0 = (s + 2dλ) I − 2Σ_a λ_a 𝓛_a` and `L^v = L^0 − U_v V_vᵀ`.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::gll::Basis;
use crate::linalg::{Lu, Mat, Scalar};
use crate::math;
use crate::spectral::{BlockInverse1d, SpectralFactor};

/// Largest accepted `‖Im‖ / ‖Re‖` when casting a complex solve back to reals.
pub const IMAG_TOL: f64 = 1e-9;

/// `dst[.., i_a = i, ..] = Σ_j mat[i][j] src[.., i_a = j, ..]` on a cell of
/// `n^dim` values.
pub fn apply_axis<T: Scalar>(mat: &Mat<T>, axis: usize, n: usize, dim: usize, src: &[T], dst: &mut [T]) {
    let stride = pow(n, axis);
    let outer = pow(n, dim - axis - 1);
    for hi in 0..outer {
        for lo in 0..stride {
            let base = lo + hi * stride * n;
            for i in 0..n {
                let row = mat.row(i);
                let mut acc = T::zero();
                for (j, &a) in row.iter().enumerate() {
                    acc = acc + a * src[base + j * stride];
                }
                dst[base + i * stride] = acc;
            }
        }
    }
}

pub(crate) fn pow(n: usize, e: usize) -> usize {
    let mut r = 1;
    for _ in 0..e {
        r *= n;
    }
    r
}

/// Parameters of one diagonal block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    /// `λ_a = c_a Δt / Δx_a` per axis (unused axes are zero).
    pub lambda: [f64; 3],
    /// Graph-viscosity coefficient.
    pub d: f64,
    /// `1 + βΔt`.
    pub shift: f64,
}

impl BlockParams {
    pub fn key(&self) -> [u64; 5] {
        [self.lambda[0].to_bits(), self.lambda[1].to_bits(), self.lambda[2].to_bits(), self.d.to_bits(), self.shift.to_bits()]
    }
}

/// Static per-degree data shared by every block of a given dimension.
#[derive(Debug, Clone)]
pub struct CellOps {
    dim: usize,
    n: usize,
    npc: usize,
    half: Vec<f64>,
    weights: Vec<f64>,
    coords: Vec<[usize; 3]>,
    /// `2DᵀM − E`.
    g: Mat<f64>,
    basis: Basis,
    factor: Option<Arc<SpectralFactor>>,
}

impl CellOps {
    pub fn new(basis: &Basis, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            bail!(Config, "dimension must be 1, 2 or 3, got {}", dim);
        }
        let n = basis.len();
        let p = basis.degree();
        let npc = pow(n, dim);
        let half = basis.half_weights().to_vec();
        let mut g = basis.derivative().transpose().matmul(&basis.mass()).scale(2.0);
        g[(p, p)] -= 1.0;
        let coords: Vec<[usize; 3]> = (0..npc)
            .map(|node| {
                let mut idx = [0; 3];
                let mut rest = node;
                for v in idx.iter_mut().take(dim) {
                    *v = rest % n;
                    rest /= n;
                }
                idx
            })
            .collect();
        let weights = coords.iter().map(|k| (0..dim).map(|a| half[k[a]]).product()).collect();
        let factor = if dim > 1 { Some(Arc::new(SpectralFactor::new(basis)?)) } else { SpectralFactor::new(basis).ok().map(Arc::new) };
        Ok(Self { dim, n, npc, half, weights, coords, g, basis: basis.clone(), factor })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.npc
    }

    /// `Π_a ω_{k_a}/2` per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self, node: usize) -> [usize; 3] {
        self.coords[node]
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn spectral(&self) -> Result<Arc<SpectralFactor>> {
        match &self.factor {
            Some(f) => Ok(f.clone()),
            None => bail!(Numeric, "no spectral factorization for degree {}", self.basis.degree()),
        }
    }

    /// Product of `ω/2` over the axes other than `axis`.
    pub fn face_weight(&self, node: usize, axis: usize) -> f64 {
        let k = self.coords[node];
        (0..self.dim).filter(|&b| b != axis).map(|b| self.half[k[b]]).product()
    }

    /// Nodes with `i_axis = idx`, ordered by the remaining indices.
    pub fn face_nodes(&self, axis: usize, idx: usize) -> Vec<usize> {
        (0..self.npc).filter(|&node| self.coords[node][axis] == idx).collect()
    }

    /// Graph viscosity `V(U)` added to `out`.
    pub fn add_graph_viscosity(&self, u: &[f64], lambda: [f64; 3], d: f64, out: &mut [f64]) {
        if d == 0.0 {
            return;
        }
        let mut mean = vec![0.0; self.npc];
        for a in 0..self.dim {
            if lambda[a] == 0.0 {
                continue;
            }
            let avg = Mat::from_fn(self.n, self.n, |_, j| self.half[j]);
            apply_axis(&avg, a, self.n, self.dim, u, &mut mean);
            let c = 2.0 * d * lambda[a];
            for node in 0..self.npc {
                out[node] += c * self.weights[node] * (u[node] - mean[node]);
            }
        }
    }

    /// Graph viscosity `V(U)` alone.
    pub fn graph_viscosity(&self, u: &[f64], lambda: [f64; 3], d: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.npc];
        self.add_graph_viscosity(u, lambda, d, &mut out);
        out
    }

    /// Applies the diagonal block to the cell values `u`.
    pub fn block_apply(&self, prm: &BlockParams, u: &[f64], out: &mut [f64]) {
        for node in 0..self.npc {
            out[node] = prm.shift * self.weights[node] * u[node];
        }
        let mut t = vec![0.0; self.npc];
        for a in 0..self.dim {
            let lam = prm.lambda[a];
            if lam == 0.0 {
                continue;
            }
            apply_axis(&self.g, a, self.n, self.dim, u, &mut t);
            for node in 0..self.npc {
                out[node] -= lam * self.face_weight(node, a) * t[node];
            }
        }
        self.add_graph_viscosity(u, prm.lambda, prm.d, out);
    }

    /// The diagonal block as a dense matrix, one column per unit vector.
    pub fn dense_block(&self, prm: &BlockParams) -> Mat<f64> {
        let mut m = Mat::zeros(self.npc, self.npc);
        let mut e = vec![0.0; self.npc];
        let mut col = vec![0.0; self.npc];
        for j in 0..self.npc {
            e[j] = 1.0;
            self.block_apply(prm, &e, &mut col);
            for i in 0..self.npc {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }

    /// Builds the fast inverse of the block.
    pub fn factor(&self, prm: &BlockParams) -> Result<BlockSolver> {
        BlockSolver::new(self, prm)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Closed(BlockInverse1d),
    Spectral,
    Woodbury { z: Mat<f64>, lu: Lu<f64>, columns: Vec<(usize, Vec<usize>)> },
}

/// Fast inverse of one diagonal block.
#[derive(Debug, Clone)]
pub struct BlockSolver {
    params: BlockParams,
    psi_inv: Vec<Complex64>,
    kind: Kind,
}

impl BlockSolver {
    fn new(ops: &CellOps, prm: &BlockParams) -> Result<Self> {
        if !(prm.shift > 0.0) || prm.lambda.iter().any(|l| !(*l >= 0.0)) || !(prm.d >= 0.0) {
            bail!(Argument, "invalid block parameters {:?}", prm);
        }
        if ops.dim == 1 && prm.d == 0.0 {
            let inv = BlockInverse1d::new(&ops.basis, prm.lambda[0], prm.shift)?;
            return Ok(Self { params: *prm, psi_inv: Vec::new(), kind: Kind::Closed(inv) });
        }
        let factor = ops.spectral()?;
        let psi = factor.eigenvalues();
        let a0 = prm.shift + 2.0 * prm.d * prm.lambda[..ops.dim].iter().sum::<f64>();
        let psi_inv: Vec<Complex64> = (0..ops.npc)
            .map(|node| {
                let k = ops.coords[node];
                let mut v = Complex64::new(a0, 0.0);
                for a in 0..ops.dim {
                    v -= psi[k[a]] * (2.0 * prm.lambda[a]);
                }
                v.inv()
            })
            .collect();
        let mut solver = Self { params: *prm, psi_inv, kind: Kind::Spectral };
        if prm.d > 0.0 {
            let mut columns = Vec::new();
            for a in 0..ops.dim {
                let others = ops.face_nodes(a, 0);
                for &base in &others {
                    let line: Vec<usize> = (0..ops.n).map(|i| base + i * pow(ops.n, a)).collect();
                    columns.push((a, line));
                }
            }
            let nc = columns.len();
            let mut z = Mat::zeros(ops.npc, nc);
            let mut col = vec![0.0; ops.npc];
            let mut out = vec![0.0; ops.npc];
            for (j, (a, line)) in columns.iter().enumerate() {
                col.iter_mut().for_each(|v| *v = 0.0);
                for (i, &node) in line.iter().enumerate() {
                    col[node] = 2.0 * prm.d * prm.lambda[*a] * ops.half[i];
                }
                solver.solve_l0(ops, &factor, &col, &mut out)?;
                for i in 0..ops.npc {
                    z[(i, j)] = out[i];
                }
            }
            let mut s = Mat::identity(nc);
            for (r, (_, line)) in columns.iter().enumerate() {
                for j in 0..nc {
                    let v: f64 = line.iter().map(|&node| z[(node, j)]).sum();
                    s[(r, j)] -= v;
                }
            }
            let lu = Lu::new(&s, 1e-13)?;
            solver.kind = Kind::Woodbury { z, lu, columns };
        }
        Ok(solver)
    }

    pub fn params(&self) -> &BlockParams {
        &self.params
    }

    /// `w = (L^0)^{-1} b` through the eigenbasis.
    fn solve_l0(&self, ops: &CellOps, factor: &SpectralFactor, b: &[f64], w: &mut [f64]) -> Result<()> {
        let npc = ops.npc;
        let mut c: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut t = vec![Complex64::new(0.0, 0.0); npc];
        for a in 0..ops.dim {
            apply_axis(factor.rinv(), a, ops.n, ops.dim, &c, &mut t);
            core::mem::swap(&mut c, &mut t);
        }
        for (v, s) in c.iter_mut().zip(&self.psi_inv) {
            *v *= s;
        }
        for a in 0..ops.dim {
            apply_axis(factor.r(), a, ops.n, ops.dim, &c, &mut t);
            core::mem::swap(&mut c, &mut t);
        }
        let re = c.iter().fold(0.0f64, |m, z| m.max(math::abs(z.re)));
        let im = c.iter().fold(0.0f64, |m, z| m.max(math::abs(z.im)));
        if im > IMAG_TOL * re.max(f64::MIN_POSITIVE) {
            bail!(Numeric, "complex block solve left an imaginary part {:.3e} (real {:.3e})", im, re);
        }
        for (dst, z) in w.iter_mut().zip(&c) {
            *dst = z.re;
        }
        Ok(())
    }

    /// Solves `block · x = b` for one cell. The eigenbasis paths add one
    /// step of iterative refinement: their error grows like `cond(R)^d ε`.
    pub fn solve(&self, ops: &CellOps, b: &[f64], x: &mut [f64]) -> Result<()> {
        self.solve_once(ops, b, x)?;
        if let Kind::Closed(_) = self.kind {
            return Ok(());
        }
        let mut r = vec![0.0; ops.npc];
        ops.block_apply(&self.params, x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let mut dx = vec![0.0; ops.npc];
        self.solve_once(ops, &r, &mut dx)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        Ok(())
    }

    fn solve_once(&self, ops: &CellOps, b: &[f64], x: &mut [f64]) -> Result<()> {
        match &self.kind {
            Kind::Closed(inv) => {
                inv.apply(b, x);
                Ok(())
            }
            Kind::Spectral => {
                let factor = ops.spectral()?;
                self.solve_l0(ops, &factor, b, x)?;
                for (v, w) in x.iter_mut().zip(&ops.weights) {
                    *v /= w;
                }
                Ok(())
            }
            Kind::Woodbury { z, lu, columns } => {
                let factor = ops.spectral()?;
                let mut y = vec![0.0; ops.npc];
                self.solve_l0(ops, &factor, b, &mut y)?;
                let mut rhs: Vec<f64> = columns.iter().map(|(_, line)| line.iter().map(|&node| y[node]).sum()).collect();
                lu.solve_in_place(&mut rhs);
                for i in 0..ops.npc {
                    let corr: f64 = z.row(i).iter().zip(&rhs).map(|(a, b)| a * b).sum();
                    x[i] = (y[i] + corr) / ops.weights[i];
                }
                Ok(())
            }
        }
    }

    /// Size of the Woodbury system, zero for the direct paths.
    pub fn correction_rank(&self) -> usize {
        match &self.kind {
            Kind::Woodbury { columns, .. } => columns.len(),
            _ => 0,
        }
    }
}

/// Block factorizations keyed by their parameters.
#[derive(Debug, Clone, Default)]
pub struct BlockCache {
    map: BTreeMap<[u64; 5], Arc<BlockSolver>>,
}

impl BlockCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, ops: &CellOps, prm: &BlockParams) -> Result<Arc<BlockSolver>> {
        let key = prm.key();
        if let Some(s) = self.map.get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(ops.factor(prm)?);
        self.map.insert(key, s.clone());
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
