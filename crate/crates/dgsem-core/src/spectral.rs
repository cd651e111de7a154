//! The resolvent `(I − 2λDᵀ)^{-1}`, the eigendecomposition of the 1D
//! upwinded operator and the closed-form 1D diagonal-block inverse.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::gll::Basis;
use crate::linalg::{Lu, Mat};
use crate::poly;

/// `𝓓 = (I − 2λDᵀ)^{-1} = Σ_l (2λDᵀ)^l`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    lambda: f64,
    matrix: Mat<f64>,
}

impl Resolvent {
    pub fn new(basis: &Basis, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            bail!(Argument, "resolvent needs lambda > 0, got {}", lambda);
        }
        Ok(Self::unchecked(basis, lambda))
    }

    pub(crate) fn unchecked(basis: &Basis, lambda: f64) -> Self {
        let n = basis.len();
        let mut matrix = Mat::zeros(n, n);
        let mut c = 1.0;
        for l in 0..=basis.degree() {
            matrix = matrix.add(&basis.derivative_power(l).transpose().scale(c));
            c *= 2.0 * lambda;
        }
        Self { lambda, matrix }
    }

    /// `(I − 2λDᵀ)^{-1}` from an LU factorization instead of the series.
    /// The series sums terms of size `(2λ)^l‖D^l‖` and loses accuracy for
    /// large `λ` or `p`; the factorization does not.
    pub fn factored(basis: &Basis, lambda: f64) -> Result<Self> {
        let n = basis.len();
        let a = Mat::identity(n).sub(&basis.derivative().transpose().scale(2.0 * lambda));
        let matrix = Lu::new(&a, 1e-300)?.inverse();
        Ok(Self { lambda, matrix })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }
}

/// Right eigenvectors `R` (with `r_p = 1`) and eigenvalues `ψ` of
/// `𝓛 = Dᵀ − (1/ω_p) e_p e_pᵀ`.
#[derive(Debug, Clone)]
pub struct SpectralFactor {
    p: usize,
    psi: Vec<Complex64>,
    r: Mat<Complex64>,
    rinv: Mat<Complex64>,
}

/// Largest accepted condition number of `R`.
pub const MAX_CONDITION: f64 = 1e12;

impl SpectralFactor {
    pub fn new(basis: &Basis) -> Result<Self> {
        let p = basis.degree();
        let n = p + 1;
        let wp = basis.weights()[p];
        let coeffs = characteristic_polynomial(basis);
        let psi = poly::roots(&coeffs)?;
        if psi.len() != n {
            bail!(Numeric, "expected {} eigenvalues, found {}", n, psi.len());
        }
        for z in &psi {
            let (val, _) = poly::eval_with_derivative(&coeffs, *z);
            let scale: f64 = coeffs.iter().enumerate().map(|(j, c)| crate::math::abs(*c) * crate::math::powi(z.norm(), j)).sum();
            if z.norm() == 0.0 || val.norm() > 1e-9 * scale {
                bail!(Numeric, "eigenvalue {} of degree {} fails the characteristic residual ({:.3e})", z, p, val.norm() / scale);
            }
        }
        let mut r = Mat::zeros(n, n);
        for (j, &z) in psi.iter().enumerate() {
            let zinv = z.inv();
            for k in 0..n {
                if k == p {
                    r[(k, j)] = Complex64::new(1.0, 0.0);
                    continue;
                }
                let mut s = Complex64::new(0.0, 0.0);
                let mut zp = zinv;
                for l in 0..=p {
                    s += zp * basis.derivative_power(l)[(p, k)];
                    zp *= zinv;
                }
                r[(k, j)] = -s / wp;
            }
        }
        let l = Mat::from_real(&upwind_operator(basis));
        let mut psi = psi;
        for (j, z) in psi.iter_mut().enumerate() {
            let mut v: Vec<Complex64> = (0..n).map(|k| r[(k, j)]).collect();
            refine_eigenpair(&l, z, &mut v);
            for k in 0..n {
                r[(k, j)] = v[k];
            }
        }
        let lu = Lu::new(&r, 1e-300)?;
        let rinv = lu.inverse();
        let cond = r.norm1() * rinv.norm1();
        if !(cond <= MAX_CONDITION) {
            bail!(Numeric, "eigenvector matrix for degree {} is ill conditioned (cond {:.3e})", p, cond);
        }
        Ok(Self { p, psi, r, rinv })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.psi
    }

    pub fn r(&self) -> &Mat<Complex64> {
        &self.r
    }

    pub fn rinv(&self) -> &Mat<Complex64> {
        &self.rinv
    }
}

/// Coefficients (lowest degree first) of
/// `ω_p ψ^{p+1} + Σ_{l=0}^p D^(l)_pp ψ^{p−l}`.
pub fn characteristic_polynomial(basis: &Basis) -> Vec<f64> {
    let p = basis.degree();
    let mut c = Vec::with_capacity(p + 2);
    for j in 0..=p {
        c.push(basis.derivative_power(p - j)[(p, p)]);
    }
    c.push(basis.weights()[p]);
    c
}

/// `𝓛 = Dᵀ − (1/ω_p) e_p e_pᵀ`.
pub fn upwind_operator(basis: &Basis) -> Mat<f64> {
    let p = basis.degree();
    let mut l = basis.derivative().transpose();
    l[(p, p)] -= 1.0 / basis.weights()[p];
    l
}

/// Mass-free 1D operator `L_1d = I − 2λ𝓛`.
pub fn l1d(basis: &Basis, lambda: f64) -> Mat<f64> {
    let n = basis.len();
    Mat::identity(n).sub(&upwind_operator(basis).scale(2.0 * lambda))
}

/// Dense 1D diagonal block `sM − λ(2DᵀM − E)` with `M = diag(ω/2)`.
pub fn block_1d(basis: &Basis, lambda: f64, shift: f64) -> Mat<f64> {
    let p = basis.degree();
    let m = basis.mass();
    let mut b = m.scale(shift).sub(&basis.derivative().transpose().matmul(&m).scale(2.0 * lambda));
    b[(p, p)] += lambda;
    b
}

/// Closed-form inverse of the 1D block `sM − λ(2DᵀM − E)`:
/// `(1/s) M^{-1}(I − 2λ'/(ω_p + 2λ'𝓓_pp) 𝓓 e_p e_pᵀ) 𝓓` with `λ' = λ/s`.
#[derive(Debug, Clone)]
pub struct BlockInverse1d {
    lambda: f64,
    shift: f64,
    denominator: f64,
    matrix: Mat<f64>,
}

impl BlockInverse1d {
    pub fn new(basis: &Basis, lambda: f64, shift: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !(shift > 0.0) {
            bail!(Argument, "1D block needs lambda >= 0 and shift > 0, got {} and {}", lambda, shift);
        }
        let p = basis.degree();
        let n = p + 1;
        let le = lambda / shift;
        let dd = Resolvent::factored(basis, le)?;
        let dm = dd.matrix();
        let denominator = basis.weights()[p] + 2.0 * le * dm[(p, p)];
        if !(denominator > 0.0) {
            bail!(Numeric, "Sherman-Morrison denominator {:.3e} is not positive", denominator);
        }
        let c = 2.0 * le / denominator;
        let half = basis.half_weights();
        let mut matrix = Mat::from_fn(n, n, |k, j| (dm[(k, j)] - c * dm[(k, p)] * dm[(p, j)]) / (half[k] * shift));
        refine_inverse(&block_1d(basis, lambda, shift), &mut matrix);
        Ok(Self { lambda, shift, denominator, matrix })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// `ω_p + 2λ'𝓓_pp`, positive for every `λ' > 0`.
    pub fn denominator(&self) -> f64 {
        self.denominator
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn apply(&self, b: &[f64], out: &mut [f64]) {
        let n = self.matrix.rows();
        for k in 0..n {
            out[k] = self.matrix.row(k).iter().zip(b).map(|(a, x)| a * x).sum();
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; b.len()];
        self.apply(b, &mut out);
        out
    }
}

/// Newton steps on `(𝓛 − ψ)v = 0` with `v_p = 1` fixed. The roots of the
/// characteristic polynomial inherit the rounding of the `D^(l)`; the pair
/// refined on `𝓛` itself has a residual at machine precision.
fn refine_eigenpair(l: &Mat<Complex64>, psi: &mut Complex64, v: &mut [Complex64]) {
    let n = v.len();
    let p = n - 1;
    let resid = |psi: Complex64, v: &[Complex64]| -> Vec<Complex64> {
        let lv = l.matvec(v);
        lv.iter().zip(v).map(|(a, b)| *a - psi * b).collect()
    };
    let mut f = resid(*psi, v);
    let mut norm = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for _ in 0..3 {
        let jac = Mat::from_fn(n, n, |i, k| {
            if k == p {
                -v[i]
            } else if i == k {
                l[(i, k)] - *psi
            } else {
                l[(i, k)]
            }
        });
        let rhs: Vec<Complex64> = f.iter().map(|z| -z).collect();
        let step = match Lu::new(&jac, 1e-300) {
            Ok(lu) => lu.solve(&rhs),
            Err(_) => return,
        };
        let mut w = v.to_vec();
        for k in 0..p {
            w[k] += step[k];
        }
        let z = *psi + step[p];
        let g = resid(z, &w);
        let gn = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(gn < norm) {
            return;
        }
        v.copy_from_slice(&w);
        *psi = z;
        f = g;
        norm = gn;
    }
}

/// Newton–Schulz steps `X ← X(2I − AX)` while the residual `‖I − AX‖`
/// keeps shrinking. The closed form cancels large terms of `𝓓` when `λp`
/// is large; each step squares its residual.
fn refine_inverse(a: &Mat<f64>, x: &mut Mat<f64>) {
    let n = a.rows();
    let id = Mat::identity(n);
    let mut resid = id.sub(&a.matmul(x));
    let mut norm = resid.max_abs();
    for _ in 0..8 {
        if norm <= 4.0 * f64::EPSILON {
            break;
        }
        let next = x.add(&x.matmul(&resid));
        let next_resid = id.sub(&a.matmul(&next));
        let next_norm = next_resid.max_abs();
        if !(next_norm < norm) {
            break;
        }
        *x = next;
        resid = next_resid;
        norm = next_norm;
    }
}
