//! Polynomial roots by the eigenvalues of a balanced companion matrix
//! (complex shifted Hessenberg QR), followed by one Newton polish per root.
//!
//! Coefficients are stored lowest degree first.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::math;

/// Evaluates the polynomial and its derivative at `z`.
pub fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// All complex roots of the polynomial, repeated by multiplicity.
///
/// Exactly-zero leading coefficients are dropped. A constant polynomial has
/// no roots; the zero polynomial is an error.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == 0.0 {
        deg -= 1;
    }
    if deg == 0 {
        bail!(Argument, "roots of the zero polynomial");
    }
    let n = deg - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    // Companion matrix: first row holds -a_{n-1..0}/a_n, ones on the subdiagonal.
    let mut h = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        h[j] = Complex64::new(-coeffs[n - 1 - j] / lead, 0.0);
    }
    for i in 1..n {
        h[i * n + i - 1] = Complex64::new(1.0, 0.0);
    }
    balance(&mut h, n);
    let mut z = hessenberg_eigenvalues(&mut h, n)?;
    for r in z.iter_mut() {
        let (p, dp) = eval_with_derivative(&coeffs[..=n], *r);
        if dp.norm() > 0.0 {
            let cand = *r - p / dp;
            if eval_with_derivative(&coeffs[..=n], cand).0.norm() < p.norm() {
                *r = cand;
            }
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

/// Real roots with `|Im| <= im_tol` and real part `>= 0`, ascending.
pub fn real_nonnegative_roots(coeffs: &[f64], im_tol: f64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = roots(coeffs)?
        .into_iter()
        .filter(|z| math::abs(z.im) <= im_tol * z.norm().max(1.0) && z.re >= -im_tol)
        .map(|z| z.re.max(0.0))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Diagonal similarity by powers of two to even out row and column norms.
fn balance(h: &mut [Complex64], n: usize) {
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += h[j * n + i].l1_norm();
                    r += h[i * n + j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            while cc < r / radix {
                f *= radix;
                cc *= radix * radix;
            }
            while cc > r * radix {
                f /= radix;
                cc /= radix * radix;
            }
            if (cc + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    h[i * n + j] /= f;
                }
                for j in 0..n {
                    h[j * n + i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix, destroying it.
fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let at = |i: usize, j: usize| i * n + j;
    let mut eig = Vec::with_capacity(n);
    let mut hi = n as isize - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    while hi >= 0 {
        let hiu = hi as usize;
        if hiu == 0 {
            eig.push(h[at(0, 0)]);
            break;
        }
        // Find the start of the active unreduced block.
        let mut l = hiu;
        while l > 0 {
            let s = h[at(l - 1, l - 1)].l1_norm() + h[at(l, l)].l1_norm();
            let s = if s == 0.0 { 1.0 } else { s };
            if h[at(l, l - 1)].l1_norm() <= f64::EPSILON * s {
                h[at(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hiu {
            eig.push(h[at(hiu, hiu)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 60 * n.max(2) {
            bail!(Numeric, "companion QR did not converge (degree {}, {} eigenvalues found)", n, eig.len());
        }
        let mu = if iter.is_multiple_of(11) {
            // Exceptional shift.
            h[at(hiu, hiu)] + Complex64::new(h[at(hiu, hiu - 1)].norm() * 0.75, 0.0)
        } else {
            let a = h[at(hiu - 1, hiu - 1)];
            let b = h[at(hiu - 1, hiu)];
            let c = h[at(hiu, hiu - 1)];
            let d = h[at(hiu, hiu)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for k in l..=hiu {
            h[at(k, k)] -= mu;
        }
        rot.clear();
        for k in l..hiu {
            let a = h[at(k, k)];
            let b = h[at(k + 1, k)];
            let (c, s) = givens(a, b);
            rot.push((c, s));
            for j in k..=hiu {
                let x = h[at(k, j)];
                let y = h[at(k + 1, j)];
                h[at(k, j)] = x * c + s * y;
                h[at(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            let top = (k + 2).min(hiu);
            for i in l..=top {
                let x = h[at(i, k)];
                let y = h[at(i, k + 1)];
                h[at(i, k)] = x * c + y * s.conj();
                h[at(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hiu {
            h[at(k, k)] += mu;
        }
    }
    Ok(eig)
}

/// Rotation `[c s; -conj(s) c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let nrm = libm::hypot(na, nb);
    let c = na / nrm;
    let s = (a / na) * b.conj() / nrm;
    (c, s)
}
