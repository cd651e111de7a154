//! Cartesian meshes, the DOF layout and per-cell reductions.
//!
//! Cells are numbered `c = i + j·N_x + k·N_x·N_y`; inside a cell the node
//! `(k, l, r)` has index `k + l(p+1) + r(p+1)²`, `k` running along `x`.
//! The flat DOF index is `c·(p+1)^dim + node`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::gll::Basis;
use crate::math;

/// Cell faces along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    faces: Vec<f64>,
    sizes: Vec<f64>,
}

impl Axis {
    /// `n` equal cells on `[a, b]`, faces at `a + i·h`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 || !(b > a) {
            bail!(Config, "uniform axis needs n > 0 and b > a, got n={} on [{}, {}]", n, a, b);
        }
        let h = (b - a) / n as f64;
        let mut faces: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
        faces[n] = b;
        Ok(Self { faces, sizes: vec![h; n] })
    }

    /// Arbitrary strictly increasing faces.
    pub fn from_faces(faces: Vec<f64>) -> Result<Self> {
        if faces.len() < 2 {
            bail!(Config, "an axis needs at least two faces");
        }
        if faces.windows(2).any(|w| !(w[1] > w[0])) {
            bail!(Config, "axis faces must be strictly increasing");
        }
        let sizes = faces.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { faces, sizes })
    }

    pub fn cells(&self) -> usize {
        self.sizes.len()
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.faces[i]
    }

    pub fn size(&self, i: usize) -> f64 {
        self.sizes[i]
    }

    pub fn start(&self) -> f64 {
        self.faces[0]
    }

    pub fn end(&self) -> f64 {
        self.faces[self.faces.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn is_uniform(&self) -> bool {
        self.sizes.iter().all(|&h| h == self.sizes[0])
    }
}

/// Tensor-product mesh of one to three axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    axes: Vec<Axis>,
    counts: [usize; 3],
}

impl Mesh {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            bail!(Config, "mesh dimension must be 1, 2 or 3, got {}", axes.len());
        }
        let mut counts = [1; 3];
        for (a, ax) in axes.iter().enumerate() {
            counts[a] = ax.cells();
        }
        Ok(Self { axes, counts })
    }

    /// Uniform mesh of `n` cells per axis on `[a, b]^dim`.
    pub fn uniform(dim: usize, a: f64, b: f64, n: usize) -> Result<Self> {
        let axis = Axis::uniform(a, b, n)?;
        Self::new(vec![axis; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    /// Cells per axis, padded with ones.
    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn cells(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn cell_index(&self, idx: [usize; 3]) -> usize {
        idx[0] + self.counts[0] * (idx[1] + self.counts[1] * idx[2])
    }

    pub fn cell_coords(&self, c: usize) -> [usize; 3] {
        let i = c % self.counts[0];
        let rest = c / self.counts[0];
        [i, rest % self.counts[1], rest / self.counts[1]]
    }

    pub fn cell_size(&self, c: usize, axis: usize) -> f64 {
        self.axes[axis].size(self.cell_coords(c)[axis])
    }

    /// Measure `|κ|` of a cell.
    pub fn volume(&self, c: usize) -> f64 {
        let idx = self.cell_coords(c);
        self.axes.iter().enumerate().map(|(a, ax)| ax.size(idx[a])).product()
    }

    /// Neighbour across the lower (`upper = false`) or upper face of `axis`.
    pub fn neighbor(&self, c: usize, axis: usize, upper: bool, periodic: bool) -> Option<usize> {
        let mut idx = self.cell_coords(c);
        let n = self.counts[axis];
        if upper {
            if idx[axis] + 1 == n {
                if !periodic {
                    return None;
                }
                idx[axis] = 0;
            } else {
                idx[axis] += 1;
            }
        } else if idx[axis] == 0 {
            if !periodic {
                return None;
            }
            idx[axis] = n - 1;
        } else {
            idx[axis] -= 1;
        }
        Some(self.cell_index(idx))
    }

    pub fn is_uniform(&self) -> bool {
        self.axes.iter().all(Axis::is_uniform)
    }
}

/// A mesh with a degree-p nodal basis in every cell.
#[derive(Debug, Clone)]
pub struct Space {
    mesh: Mesh,
    basis: Basis,
    nodes_per_cell: usize,
}

impl Space {
    pub fn new(mesh: Mesh, basis: Basis) -> Arc<Self> {
        let nodes_per_cell = math::powi(basis.len() as f64, mesh.dim()) as usize;
        Arc::new(Self { mesh, basis, nodes_per_cell })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    /// `(p+1)^dim`.
    pub fn nodes_per_cell(&self) -> usize {
        self.nodes_per_cell
    }

    pub fn dofs(&self) -> usize {
        self.nodes_per_cell * self.mesh.cells()
    }

    pub fn node_index(&self, idx: [usize; 3]) -> usize {
        let n = self.basis.len();
        idx[0] + n * (idx[1] + n * idx[2])
    }

    pub fn node_coords(&self, node: usize) -> [usize; 3] {
        let n = self.basis.len();
        let mut idx = [0; 3];
        let mut rest = node;
        for v in idx.iter_mut().take(self.dim()) {
            *v = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn dof_index(&self, cell: usize, node: usize) -> usize {
        cell * self.nodes_per_cell + node
    }

    pub fn dof_coords(&self, dof: usize) -> (usize, usize) {
        (dof / self.nodes_per_cell, dof % self.nodes_per_cell)
    }

    /// Physical position of a node; unused trailing coordinates are zero.
    pub fn position(&self, cell: usize, node: usize) -> [f64; 3] {
        let c = self.mesh.cell_coords(cell);
        let k = self.node_coords(node);
        let xi = self.basis.nodes();
        let mut x = [0.0; 3];
        for a in 0..self.dim() {
            let ax = self.mesh.axis(a);
            x[a] = ax.lo(c[a]) + 0.5 * (1.0 + xi[k[a]]) * ax.size(c[a]);
        }
        x
    }

    /// Tensor weight `Π_a ω_{k_a}/2`.
    pub fn node_weight(&self, node: usize) -> f64 {
        let k = self.node_coords(node);
        let h = self.basis.half_weights();
        (0..self.dim()).map(|a| h[k[a]]).product()
    }

    pub fn node_weights(&self) -> Vec<f64> {
        (0..self.nodes_per_cell).map(|n| self.node_weight(n)).collect()
    }
}

/// Lower and upper bounds of the maximum principle. `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            bail!(Config, "bounds need lower <= upper, got [{}, {}]", lower, upper);
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }
}

/// Nodal values on a [`Space`] at a given time.
#[derive(Debug, Clone)]
pub struct Field {
    space: Arc<Space>,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn zeros(space: Arc<Space>) -> Self {
        let n = space.dofs();
        Self { space, values: vec![0.0; n], time: 0.0 }
    }

    pub fn from_values(space: Arc<Space>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dofs() {
            bail!(Argument, "field needs {} values, got {}", space.dofs(), values.len());
        }
        Ok(Self { space, values, time: 0.0 })
    }

    /// Collocation at the quadrature points.
    pub fn project(space: Arc<Space>, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = space.dim();
        let npc = space.nodes_per_cell();
        let mut values = Vec::with_capacity(space.dofs());
        for c in 0..space.mesh().cells() {
            for n in 0..npc {
                let x = space.position(c, n);
                values.push(f(&x[..dim]));
            }
        }
        Self { space, values, time: 0.0 }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn cell(&self, c: usize) -> &[f64] {
        let n = self.space.nodes_per_cell();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn cell_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.space.nodes_per_cell();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn average(&self, c: usize) -> f64 {
        let w = self.space.node_weights();
        cell_average(self.cell(c), &w)
    }

    /// Per-cell averages `Σ (Π ω/2) U`.
    pub fn averages(&self) -> Vec<f64> {
        let w = self.space.node_weights();
        (0..self.space.mesh().cells()).map(|c| cell_average(self.cell(c), &w)).collect()
    }

    pub fn minmax_dofs(&self) -> (f64, f64) {
        minmax(&self.values)
    }

    pub fn minmax_averages(&self) -> (f64, f64) {
        minmax(&self.averages())
    }

    /// `Σ_c |κ_c| ⟨u⟩_c` in cell order.
    pub fn integral(&self) -> f64 {
        let avg = self.averages();
        let mesh = self.space.mesh();
        avg.iter().enumerate().map(|(c, a)| mesh.volume(c) * a).sum()
    }

    /// Quadrature L2 norm of `u_h − f`.
    pub fn l2_error(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let dim = self.space.dim();
        let w = self.space.node_weights();
        let mesh = self.space.mesh();
        let mut sum = 0.0;
        for c in 0..mesh.cells() {
            let vol = mesh.volume(c);
            let cell = self.cell(c);
            let mut s = 0.0;
            for (n, &u) in cell.iter().enumerate() {
                let x = self.space.position(c, n);
                let e = u - f(&x[..dim]);
                s += w[n] * e * e;
            }
            sum += vol * s;
        }
        math::sqrt(sum)
    }

    /// Largest `|u_h − f|` over the quadrature points.
    pub fn linf_error(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let dim = self.space.dim();
        let npc = self.space.nodes_per_cell();
        let mut m = 0.0f64;
        for (i, &u) in self.values.iter().enumerate() {
            let x = self.space.position(i / npc, i % npc);
            m = m.max(math::abs(u - f(&x[..dim])));
        }
        m
    }

    /// Quadrature L2 norm of `self − other`.
    pub fn l2_distance(&self, other: &Field) -> f64 {
        let w = self.space.node_weights();
        let mesh = self.space.mesh();
        let npc = self.space.nodes_per_cell();
        let mut sum = 0.0;
        for c in 0..mesh.cells() {
            let a = self.cell(c);
            let b = &other.values[c * npc..(c + 1) * npc];
            let s: f64 = (0..npc).map(|n| w[n] * (a[n] - b[n]) * (a[n] - b[n])).sum();
            sum += mesh.volume(c) * s;
        }
        math::sqrt(sum)
    }
}

pub fn cell_average(cell: &[f64], weights: &[f64]) -> f64 {
    cell.iter().zip(weights).map(|(u, w)| u * w).sum()
}

pub fn minmax(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// `Σ Δt·‖e(tⁿ)‖` over the post-step states.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpaceTimeError {
    pub l2: f64,
    pub linf: f64,
}

impl SpaceTimeError {
    pub fn add(&mut self, dt: f64, l2: f64, linf: f64) {
        self.l2 += dt * l2;
        self.linf += dt * linf;
    }
}
