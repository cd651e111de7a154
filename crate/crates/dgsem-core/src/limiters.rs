//! The FCT limiter on cell averages and the linear scaling limiter on DOFs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::mesh::{cell_average, minmax, Bounds, Field};
use crate::tensor::pow;

/// Slack on the cell-average precondition of the strict scaling limiter.
pub const AVERAGE_SLACK: f64 = 1e-12;
/// Denominator guard in the scaling factor.
pub const THETA_GUARD: f64 = 1e-15;

/// Scaling factor `θ` of one cell.
pub fn scaling_theta(cell: &[f64], avg: f64, bounds: &Bounds) -> f64 {
    let (lo, hi) = minmax(cell);
    let mut theta = 1.0f64;
    if hi - avg > THETA_GUARD {
        theta = theta.min(((bounds.upper - avg) / (hi - avg)).abs());
    }
    if avg - lo > THETA_GUARD {
        theta = theta.min(((bounds.lower - avg) / (lo - avg)).abs());
    }
    theta
}

fn scale_cells(field: &mut Field, bounds: &Bounds, strict: bool) -> Result<()> {
    let w = field.space().node_weights();
    let cells = field.space().mesh().cells();
    for c in 0..cells {
        let cell = field.cell_mut(c);
        let avg = cell_average(cell, &w);
        if strict && !bounds.contains(avg, AVERAGE_SLACK) {
            bail!(Argument, "cell {} has average {:.6e} outside [{}, {}]", c, avg, bounds.lower, bounds.upper);
        }
        let theta = scaling_theta(cell, avg, bounds);
        if theta < 1.0 {
            for v in cell.iter_mut() {
                *v = theta * *v + (1.0 - theta) * avg;
            }
        }
    }
    Ok(())
}

/// Scales every cell towards its average so that its DOFs lie in the bounds.
/// Every cell average must already satisfy the bounds.
pub fn scaling_limit(field: &Field, bounds: &Bounds) -> Result<Field> {
    let mut out = field.clone();
    scale_cells(&mut out, bounds, true)?;
    Ok(out)
}

/// The scaling limiter applied without checking the averages; cells whose
/// average violates the bounds are left with DOFs on the violated side.
pub fn scaling_limit_lenient(field: &Field, bounds: &Bounds) -> Field {
    let mut out = field.clone();
    scale_cells(&mut out, bounds, false).expect("lenient scaling never fails");
    out
}

/// Per-cell geometry of the FCT limiter.
#[derive(Debug, Clone, Copy)]
pub struct FctContext<'a> {
    /// `λ_a` per cell and axis.
    pub lambda: &'a [[f64; 3]],
    /// `1 + βΔt`.
    pub shift: f64,
    /// Periodic axes; non-periodic axes have inflow at the lower and outflow
    /// at the upper end.
    pub periodic: [bool; 3],
}

/// Antidiffusive quantities and limiter factors of one FCT pass.
#[derive(Debug, Clone, PartialEq)]
pub struct FctWorkspace {
    /// `A` across the upper face of each cell, per axis.
    pub a_upper: Vec<[f64; 3]>,
    /// `A` across the lower face of each cell, per axis.
    pub a_lower: Vec<[f64; 3]>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub l_plus: Vec<f64>,
    pub l_minus: Vec<f64>,
    /// Interface factor at the upper face of each cell, per axis.
    pub l_upper: Vec<[f64; 3]>,
    /// Interface factor at the lower face of each cell, per axis.
    pub l_lower: Vec<[f64; 3]>,
    pub lo_averages: Vec<f64>,
}

impl FctWorkspace {
    /// `⟨LO⟩ + Σ l A` per cell.
    pub fn limited_averages(&self, dim: usize) -> Vec<f64> {
        (0..self.lo_averages.len())
            .map(|c| {
                let mut v = self.lo_averages[c];
                for a in 0..dim {
                    v += self.l_upper[c][a] * self.a_upper[c][a] + self.l_lower[c][a] * self.a_lower[c][a];
                }
                v
            })
            .collect()
    }

    /// Sets every interface factor to `l`.
    pub fn with_uniform_factor(mut self, l: f64) -> Self {
        for f in self.l_upper.iter_mut().chain(self.l_lower.iter_mut()) {
            *f = [l; 3];
        }
        self
    }
}

struct FaceIter {
    n: usize,
    dim: usize,
}

impl FaceIter {
    /// Nodes with `i_axis = idx` together with their transverse weight.
    fn nodes(&self, axis: usize, idx: usize, half: &[f64]) -> Vec<(usize, f64)> {
        let npc = pow(self.n, self.dim);
        let stride = pow(self.n, axis);
        (0..npc)
            .filter(|node| (node / stride) % self.n == idx)
            .map(|node| {
                let mut w = 1.0;
                let mut rest = node;
                for b in 0..self.dim {
                    if b != axis {
                        w *= half[rest % self.n];
                    }
                    rest /= self.n;
                }
                (node, w)
            })
            .collect()
    }
}

fn check_pair(ho: &Field, lo: &Field, ctx: &FctContext) -> Result<()> {
    if ho.values().len() != lo.values().len() || ho.space().mesh() != lo.space().mesh() {
        bail!(Argument, "FCT needs HO and LO fields on the same mesh");
    }
    if ctx.lambda.len() != ho.space().mesh().cells() {
        bail!(Argument, "FCT context has {} cells, mesh has {}", ctx.lambda.len(), ho.space().mesh().cells());
    }
    Ok(())
}

/// Computes `A`, `P±`, `Q±`, `l±` and the interface factors.
pub fn fct_coefficients(ho: &Field, lo: &Field, bounds: &Bounds, ctx: &FctContext) -> Result<FctWorkspace> {
    check_pair(ho, lo, ctx)?;
    let space = ho.space();
    let mesh = space.mesh();
    let dim = space.dim();
    let p = space.degree();
    let half = space.basis().half_weights();
    let cells = mesh.cells();
    let faces = FaceIter { n: p + 1, dim };
    let mut a_upper = vec![[0.0; 3]; cells];
    let mut a_lower = vec![[0.0; 3]; cells];
    for a in 0..dim {
        let top = faces.nodes(a, p, half);
        for c in 0..cells {
            let h = ho.cell(c);
            let l = lo.cell(c);
            let flux: f64 = top.iter().map(|&(node, w)| w * (l[node] - h[node])).sum();
            a_upper[c][a] = ctx.lambda[c][a] / ctx.shift * flux;
            if let Some(nb) = mesh.neighbor(c, a, false, ctx.periodic[a]) {
                let hn = ho.cell(nb);
                let ln = lo.cell(nb);
                let flux: f64 = top.iter().map(|&(node, w)| w * (hn[node] - ln[node])).sum();
                a_lower[c][a] = ctx.lambda[c][a] / ctx.shift * flux;
            }
        }
    }
    let lo_averages = lo.averages();
    let mut p_plus = vec![0.0; cells];
    let mut p_minus = vec![0.0; cells];
    let mut q_plus = vec![0.0; cells];
    let mut q_minus = vec![0.0; cells];
    let mut l_plus = vec![1.0; cells];
    let mut l_minus = vec![1.0; cells];
    for c in 0..cells {
        for a in 0..dim {
            for v in [a_upper[c][a], a_lower[c][a]] {
                p_plus[c] += v.max(0.0);
                p_minus[c] += v.min(0.0);
            }
        }
        q_plus[c] = bounds.upper - lo_averages[c];
        q_minus[c] = bounds.lower - lo_averages[c];
        if p_plus[c] > 0.0 {
            l_plus[c] = (q_plus[c] / p_plus[c]).clamp(0.0, 1.0);
        }
        if p_minus[c] < 0.0 {
            l_minus[c] = (q_minus[c] / p_minus[c]).clamp(0.0, 1.0);
        }
    }
    let mut l_upper = vec![[1.0; 3]; cells];
    let mut l_lower = vec![[1.0; 3]; cells];
    for c in 0..cells {
        for a in 0..dim {
            let nb = mesh.neighbor(c, a, true, ctx.periodic[a]);
            let (nb_plus, nb_minus) = match nb {
                Some(nb) => (l_plus[nb], l_minus[nb]),
                None => (1.0, 1.0),
            };
            let l = if a_upper[c][a] < 0.0 { l_minus[c].min(nb_plus) } else { l_plus[c].min(nb_minus) };
            l_upper[c][a] = l;
            if let Some(nb) = nb {
                l_lower[nb][a] = l;
            }
        }
    }
    Ok(FctWorkspace { a_upper, a_lower, p_plus, p_minus, q_plus, q_minus, l_plus, l_minus, l_upper, l_lower, lo_averages })
}

/// Limited DOFs: `HO` corrected at the interface nodes so that each cell
/// average becomes `⟨LO⟩ + Σ l A`.
pub fn fct_apply(ho: &Field, lo: &Field, ws: &FctWorkspace, ctx: &FctContext) -> Result<Field> {
    check_pair(ho, lo, ctx)?;
    let space = ho.space().clone();
    let mesh = space.mesh();
    let dim = space.dim();
    let p = space.degree();
    let w = space.basis().weights();
    let half = space.basis().half_weights();
    let faces = FaceIter { n: p + 1, dim };
    let mut out = ho.clone();
    for a in 0..dim {
        let top = faces.nodes(a, p, half);
        let bottom = faces.nodes(a, 0, half);
        let stride = pow(p + 1, a);
        for c in 0..mesh.cells() {
            let lam = ctx.lambda[c][a] / ctx.shift;
            let up = 1.0 - ws.l_upper[c][a];
            if up != 0.0 {
                let coef = 2.0 * lam / w[p] * up;
                let h: Vec<f64> = top.iter().map(|&(node, _)| ho.cell(c)[node] - lo.cell(c)[node]).collect();
                let cell = out.cell_mut(c);
                for (&(node, _), d) in top.iter().zip(&h) {
                    cell[node] += coef * d;
                }
            }
            let down = 1.0 - ws.l_lower[c][a];
            if down != 0.0 {
                if let Some(nb) = mesh.neighbor(c, a, false, ctx.periodic[a]) {
                    let coef = 2.0 * lam / w[0] * down;
                    let h: Vec<f64> = bottom
                        .iter()
                        .map(|&(node, _)| {
                            let src = node + p * stride;
                            ho.cell(nb)[src] - lo.cell(nb)[src]
                        })
                        .collect();
                    let cell = out.cell_mut(c);
                    for (&(node, _), d) in bottom.iter().zip(&h) {
                        cell[node] -= coef * d;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Coefficients followed by the DOF correction.
pub fn fct(ho: &Field, lo: &Field, bounds: &Bounds, ctx: &FctContext) -> Result<(Field, FctWorkspace)> {
    let ws = fct_coefficients(ho, lo, bounds, ctx)?;
    let out = fct_apply(ho, lo, &ws, ctx)?;
    Ok((out, ws))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_ignores_infinite_upper() {
        let b = Bounds::new(0.0, f64::INFINITY).unwrap();
        assert_eq!(scaling_theta(&[0.5, 3.0], 1.75, &b), 1.0);
    }
}
