//! Maximum-principle thresholds `λ_min(p)` and `d_min(p)`, and M-matrix
//! checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::gll::Basis;
use crate::linalg::Mat;
use crate::math;
use crate::poly;
use crate::spectral::Resolvent;

/// Slack for conditions of the form `f ≥ 0`.
pub const WEAK_SLACK: f64 = 1e-12;
/// Margin for conditions of the form `f > 0`.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Grid spacing and range used to verify `λ_min`.
pub const GRID_STEP: f64 = 1e-3;
pub const GRID_RANGE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    NonNegative,
    Positive,
}

/// One maximum-principle condition as a polynomial in `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: &'static str,
    pub k: usize,
    pub relation: Relation,
    /// Lowest degree first.
    pub coeffs: Vec<f64>,
}

impl Condition {
    pub fn value(&self, lambda: f64) -> f64 {
        poly::eval(&self.coeffs, lambda)
    }

    pub fn holds(&self, lambda: f64) -> bool {
        let v = self.value(lambda);
        match self.relation {
            Relation::NonNegative => v >= -WEAK_SLACK,
            Relation::Positive => v > STRICT_MARGIN,
        }
    }
}

/// `Σ_l (2λ)^l D^(l)_{kp}` (the entry `𝓓_pk`) as coefficients in `λ`.
fn resolvent_entry(basis: &Basis, k: usize) -> Vec<f64> {
    let p = basis.degree();
    (0..=p).map(|l| math::powi(2.0, l) * basis.derivative_power(l)[(k, p)]).collect()
}

/// All conditions making the RHS of the cell-average relation nonnegative
/// and its matrix an M-matrix.
pub fn conditions(basis: &Basis) -> Vec<Condition> {
    let p = basis.degree();
    let wp = basis.weights()[p];
    let dpp = resolvent_entry(basis, p);
    let dp0 = resolvent_entry(basis, 0);
    let mut out = Vec::new();
    for k in 0..=p {
        let dpk = resolvent_entry(basis, k);
        // ω_p + 2λ(𝓓_pp − 𝓓_pk)
        let mut c1 = vec![0.0; p + 2];
        c1[0] = wp;
        for l in 0..=p {
            c1[l + 1] += 2.0 * (dpp[l] - dpk[l]);
        }
        out.push(Condition { label: "omega_p + 2 lambda (Dpp - Dpk)", k, relation: Relation::NonNegative, coeffs: c1 });
        let c2: Vec<f64> = (0..=p).map(|l| dpk[l] - dp0[l]).collect();
        out.push(Condition { label: "Dpk - Dp0", k, relation: Relation::NonNegative, coeffs: c2 });
    }
    let mut sigma = vec![0.0; p + 2];
    sigma[0] = wp;
    for l in 0..=p {
        sigma[l + 1] += 2.0 * (dpp[l] - dp0[l]);
    }
    out.push(Condition { label: "sigma_p", k: 0, relation: Relation::Positive, coeffs: sigma });
    out.push(Condition { label: "Dp0", k: 0, relation: Relation::NonNegative, coeffs: dp0 });
    out
}

/// Drops leading coefficients below `1e-10` times the largest one.
fn strip(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(math::abs(*c)));
    let mut n = coeffs.len();
    while n > 0 && math::abs(coeffs[n - 1]) <= 1e-10 * scale {
        n -= 1;
    }
    coeffs[..n].to_vec()
}

/// Largest nonnegative real root of a condition, `None` if there is none.
fn largest_root(c: &Condition) -> Result<Option<f64>> {
    let coeffs = strip(&c.coeffs);
    if coeffs.len() <= 1 {
        return Ok(None);
    }
    let roots = poly::real_nonnegative_roots(&coeffs, 1e-8)?;
    Ok(roots.last().copied())
}

/// Smallest `λ* ≥ 0` such that every condition holds for all `λ > λ*`.
pub fn lambda_min(basis: &Basis) -> Result<f64> {
    let conds = conditions(basis);
    let mut lmin = 0.0f64;
    for c in &conds {
        if let Some(r) = largest_root(c)? {
            lmin = lmin.max(r);
        }
    }
    let steps = (GRID_RANGE / GRID_STEP) as usize;
    for i in 1..=steps {
        let lam = lmin + i as f64 * GRID_STEP;
        if let Some(c) = conds.iter().find(|c| !c.holds(lam)) {
            bail!(
                Numeric,
                "lambda_min {:.6} for degree {} fails grid check at {:.4}: {} (k={}) = {:.3e}",
                lmin,
                basis.degree(),
                lam,
                c.label,
                c.k,
                c.value(lam)
            );
        }
    }
    Ok(lmin)
}

/// First failing condition at `λ`, if any.
pub fn failing_condition(basis: &Basis, lambda: f64) -> Option<Condition> {
    conditions(basis).into_iter().find(|c| !c.holds(lambda))
}

/// `2 max_{k≠m} (−D_mk / ω_k)`.
pub fn d_min(basis: &Basis) -> f64 {
    let n = basis.len();
    let d = basis.derivative();
    let w = basis.weights();
    let mut best = f64::NEG_INFINITY;
    for m in 0..n {
        for k in 0..n {
            if k != m {
                best = best.max(-d[(m, k)] / w[k]);
            }
        }
    }
    2.0 * best
}

/// The first entry violating the M-matrix sufficient conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    PositiveOffDiagonal { row: usize, col: usize, value: f64 },
    NonPositiveDiagonal { row: usize, value: f64 },
    NotDominant { row: usize, margin: f64 },
}

/// Z-matrix tolerance.
pub const Z_TOL: f64 = 1e-12;

/// Checks for nonpositive off-diagonals, positive diagonal and strict row
/// diagonal dominance.
pub fn is_m_matrix(a: &Mat<f64>) -> core::result::Result<(), Violation> {
    if a.rows() != a.cols() {
        return Err(Violation::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > Z_TOL * scale {
                return Err(Violation::PositiveOffDiagonal { row: i, col: j, value: a[(i, j)] });
            }
        }
    }
    for i in 0..n {
        let diag = a[(i, i)];
        if !(diag > 0.0) {
            return Err(Violation::NonPositiveDiagonal { row: i, value: diag });
        }
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| math::abs(a[(i, j)])).sum();
        if !(diag > off) {
            return Err(Violation::NotDominant { row: i, margin: diag - off });
        }
    }
    Ok(())
}

fn sigma_and_dp0(basis: &Basis, lambda: f64) -> (f64, f64) {
    let p = basis.degree();
    let dd = Resolvent::unchecked(basis, lambda);
    let m = dd.matrix();
    let sigma = basis.weights()[p] + 2.0 * lambda * (m[(p, p)] - m[(p, 0)]);
    (sigma, m[(p, 0)])
}

/// Matrix of the 1D cell-average relation on a periodic mesh with per-cell
/// `λ_i`.
pub fn cell_average_matrix(basis: &Basis, lambdas: &[f64]) -> Mat<f64> {
    let n = lambdas.len();
    let ratio: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let (s, d) = sigma_and_dp0(basis, l);
            d / s
        })
        .collect();
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        let im = (i + n - 1) % n;
        a[(i, i)] += 1.0 + 2.0 * lambdas[i] * ratio[i];
        a[(i, im)] -= 2.0 * lambdas[i] * ratio[im];
    }
    a
}

/// Positive vector `x_i = Π_{j≠i} 𝓓^j_p0 / σ^j`.
pub fn cell_average_certificate(basis: &Basis, lambdas: &[f64]) -> Vec<f64> {
    let ratio: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let (s, d) = sigma_and_dp0(basis, l);
            d / s
        })
        .collect();
    (0..lambdas.len()).map(|i| ratio.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r).product()).collect()
}
