//! Gauss-Lobatto-Legendre nodes, weights and the Lagrange derivative
//! matrix family on the reference interval [-1, 1].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::linalg::Mat;
use crate::math;

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 16;

/// Degree-p GLL quadrature together with `D` and its powers.
#[derive(Debug, Clone)]
pub struct Basis {
    p: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half: Vec<f64>,
    bary: Vec<f64>,
    d: Mat<f64>,
    dpow: Vec<Mat<f64>>,
}

/// Legendre polynomials `(P_{p-1}(x), P_p(x))` by the three-term recurrence.
pub fn legendre_pair(p: usize, x: f64) -> (f64, f64) {
    if p == 0 {
        return (0.0, 1.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for n in 2..=p {
        let next = ((2 * n - 1) as f64 * x * cur - (n - 1) as f64 * prev) / n as f64;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

impl Basis {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 || p > MAX_DEGREE {
            bail!(Config, "polynomial degree {} outside 1..={}", p, MAX_DEGREE);
        }
        let n = p + 1;
        let pf = p as f64;
        let mut nodes: Vec<f64> = (0..n).map(|k| -math::cos(core::f64::consts::PI * k as f64 / pf)).collect();
        for x in nodes.iter_mut().take(p).skip(1) {
            for _ in 0..100 {
                let (pm1, pp) = legendre_pair(p, *x);
                let dx = (*x * pp - pm1) / ((pf + 1.0) * pp);
                *x -= dx;
                if math::abs(dx) <= 1e-16 {
                    break;
                }
            }
        }
        nodes[0] = -1.0;
        nodes[p] = 1.0;
        for k in 0..n / 2 {
            let s = 0.5 * (nodes[p - k] - nodes[k]);
            nodes[k] = -s;
            nodes[p - k] = s;
        }
        if n % 2 == 1 {
            nodes[p / 2] = 0.0;
        }
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let (_, pp) = legendre_pair(p, x);
                2.0 / (pf * (pf + 1.0) * pp * pp)
            })
            .collect();
        let half = weights.iter().map(|w| 0.5 * w).collect();
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let mut prod = 1.0;
                for m in 0..n {
                    if m != j {
                        prod *= nodes[j] - nodes[m];
                    }
                }
                1.0 / prod
            })
            .collect();
        let mut d = Mat::zeros(n, n);
        for k in 0..n {
            let mut diag = 0.0;
            for l in 0..n {
                if l != k {
                    let v = (bary[l] / bary[k]) / (nodes[k] - nodes[l]);
                    d[(k, l)] = v;
                    diag -= v;
                }
            }
            d[(k, k)] = diag;
        }
        let mut dpow = Vec::with_capacity(n + 1);
        dpow.push(Mat::identity(n));
        for a in 1..=n {
            let next = dpow[a - 1].matmul(&d);
            dpow.push(next);
        }
        Ok(Self { p, nodes, weights, half, bary, d, dpow })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Number of nodes, `p + 1`.
    pub fn len(&self) -> usize {
        self.p + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the unit-measure rule, `ω_k / 2`.
    pub fn half_weights(&self) -> &[f64] {
        &self.half
    }

    /// Barycentric weights `1 / Π_{m≠j}(ξ_j − ξ_m)`.
    pub fn barycentric(&self) -> &[f64] {
        &self.bary
    }

    /// `D_kl = ℓ_l'(ξ_k)`.
    pub fn derivative(&self) -> &Mat<f64> {
        &self.d
    }

    /// `D^(α)` for `α = 0..=p+1`.
    pub fn derivative_power(&self, alpha: usize) -> &Mat<f64> {
        &self.dpow[alpha]
    }

    pub fn derivative_powers(&self) -> &[Mat<f64>] {
        &self.dpow
    }

    /// Mass matrix `diag(ω/2)` of the unit-measure cell.
    pub fn mass(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |i, j| if i == j { self.half[i] } else { 0.0 })
    }

    /// `(I − yD)^{-1}` as the finite Neumann series `Σ_k y^k D^(k)`.
    pub fn neumann_inverse(&self, y: f64) -> Mat<f64> {
        let n = self.len();
        let mut out = Mat::zeros(n, n);
        let mut yk = 1.0;
        for k in 0..=self.p {
            out = out.add(&self.dpow[k].scale(yk));
            yk *= y;
        }
        out
    }

    /// Values of the Lagrange polynomials at `x`.
    pub fn lagrange(&self, x: f64) -> Vec<f64> {
        let n = self.len();
        if let Some(k) = self.nodes.iter().position(|&xi| xi == x) {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            return v;
        }
        let terms: Vec<f64> = (0..n).map(|j| self.bary[j] / (x - self.nodes[j])).collect();
        let sum: f64 = terms.iter().sum();
        terms.into_iter().map(|t| t / sum).collect()
    }

    /// Reference coordinates mapped to `[0, 1]`: `(1 + ξ_k) / 2`.
    pub fn unit_nodes(&self) -> Vec<f64> {
        self.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degree_zero() {
        assert!(Basis::new(0).is_err());
        assert!(Basis::new(17).is_err());
    }

    #[test]
    fn lagrange_is_partition_of_unity() {
        let b = Basis::new(5).unwrap();
        let v = b.lagrange(0.123);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let w = b.lagrange(b.nodes()[2]);
        assert_eq!(w[2], 1.0);
    }
}
