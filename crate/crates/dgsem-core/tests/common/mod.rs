//! Dense reference implementations shared by the integration tests.
//! Nothing here calls into the crate's own operators.

#![allow(dead_code)]

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.a[i * d.len() + i] = *v;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut r = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self.get(i, k);
                if x != 0.0 {
                    for j in 0..n {
                        r.a[i * n + j] += x * o.get(k, j);
                    }
                }
            }
        }
        r
    }

    pub fn t(&self) -> Dense {
        let mut r = Dense::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                r.set(j, i, self.get(i, j));
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> Dense {
        Dense { n: self.n, a: self.a.iter().map(|x| x * s).collect() }
    }

    pub fn plus(&self, o: &Dense) -> Dense {
        Dense { n: self.n, a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect() }
    }

    pub fn minus(&self, o: &Dense) -> Dense {
        self.plus(&o.scale(-1.0))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `self ⊗ o` with the index of `o` running fastest.
    pub fn kron(&self, o: &Dense) -> Dense {
        let (n, m) = (self.n, o.n);
        let mut r = Dense::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let x = self.get(i, j);
                if x == 0.0 {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        r.set(i * m + k, j * m + l, x * o.get(k, l));
                    }
                }
            }
        }
        r
    }

    /// Copies `b` into the block at `(bi, bj)` of size `b.n`.
    pub fn put_block(&mut self, bi: usize, bj: usize, b: &Dense) {
        for i in 0..b.n {
            for j in 0..b.n {
                self.add_to(bi * b.n + i, bj * b.n + j, b.get(i, j));
            }
        }
    }
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(m: &Dense, b: &[f64]) -> Vec<f64> {
    let n = m.n;
    let mut a = m.a.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs())).unwrap();
        assert!(a[piv * n + k].abs() > 1e-300, "singular oracle matrix");
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = a[i * n + k] / a[k * n + k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / a[k * n + k];
    }
    x
}

pub fn inverse(m: &Dense) -> Dense {
    let n = m.n;
    let mut r = Dense::zeros(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = gauss_solve(m, &e);
        for i in 0..n {
            r.set(i, j, col[i]);
        }
    }
    r
}

pub fn rel_err(x: &[f64], reference: &[f64]) -> f64 {
    let num = x.iter().zip(reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let den = reference.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    num / den.max(1e-300)
}

/// `(P_p(x), P_p'(x))`.
fn legendre(p: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if p == 0 {
        return (1.0, 0.0);
    }
    for n in 2..=p {
        let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
        p0 = p1;
        p1 = p2;
    }
    // (1 − x²) P_p' = p (P_{p−1} − x P_p), valid away from ±1.
    let dp = if (1.0 - x * x).abs() > 0.0 { p as f64 * (p0 - x * p1) / (1.0 - x * x) } else { f64::NAN };
    (p1, dp)
}

/// GLL nodes by bisection on the sign changes of `P_p'` and the weights
/// `2 / (p(p+1) P_p(x)²)`.
pub fn gll(p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![-1.0];
    let samples = 4000;
    let grid: Vec<f64> = (1..samples).map(|i| -1.0 + 2.0 * i as f64 / samples as f64).collect();
    for w in grid.windows(2) {
        let (fa, fb) = (legendre(p, w[0]).1, legendre(p, w[1]).1);
        if fa == 0.0 {
            nodes.push(w[0]);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut a, mut b) = (w[0], w[1]);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if legendre(p, a).1 * legendre(p, m).1 <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            nodes.push(0.5 * (a + b));
        }
    }
    nodes.push(1.0);
    assert_eq!(nodes.len(), p + 1, "bisection missed a node for p = {}", p);
    let pf = p as f64;
    let weights = nodes.iter().map(|&x| 2.0 / (pf * (pf + 1.0) * legendre(p, x).0.powi(2))).collect();
    (nodes, weights)
}

/// `D_kl = ℓ_l'(x_k)` from the Lagrange product formula.
pub fn derivative(nodes: &[f64]) -> Dense {
    let n = nodes.len();
    let c: Vec<f64> = (0..n).map(|k| (0..n).filter(|&j| j != k).map(|j| nodes[k] - nodes[j]).product()).collect();
    let mut d = Dense::zeros(n);
    for k in 0..n {
        let mut diag = 0.0;
        for l in 0..n {
            if l != k {
                let v = c[k] / (c[l] * (nodes[k] - nodes[l]));
                d.set(k, l, v);
                diag -= v;
            }
        }
        d.set(k, k, diag);
    }
    d
}

/// 1D reference operators `M = diag(ω/2)`, `G = 2DᵀM − e_p e_pᵀ` and the
/// upwind coupling `C = e_0 e_pᵀ`.
pub struct Ops1d {
    pub p: usize,
    pub w: Vec<f64>,
    pub m: Dense,
    pub g: Dense,
    pub c: Dense,
    pub d: Dense,
}

pub fn ops1d(p: usize) -> Ops1d {
    let (nodes, w) = gll(p);
    let d = derivative(&nodes);
    let half: Vec<f64> = w.iter().map(|x| x / 2.0).collect();
    let m = Dense::diag(&half);
    let mut g = d.t().mul(&m).scale(2.0);
    g.add_to(p, p, -1.0);
    let mut c = Dense::zeros(p + 1);
    c.set(0, p, 1.0);
    Ops1d { p, w, m, g, c, d }
}

/// `X_a` on axis `a` of a `dim`-dimensional cell, identity `I` elsewhere.
/// Node index `k_0 + k_1 n + k_2 n²`, so axis 0 is the rightmost factor.
pub fn on_axis(x: &Dense, other: &Dense, a: usize, dim: usize) -> Dense {
    let mut r = Dense::identity(1);
    for b in (0..dim).rev() {
        r = r.kron(if b == a { x } else { other });
    }
    r
}

/// Graph viscosity of one axis: `2dλ (⊗M)(I − 1 (ω/2)ᵀ)` along `a`.
fn viscosity_axis(o: &Ops1d, a: usize, dim: usize, lambda: f64, d: f64) -> Dense {
    let n = o.p + 1;
    let mut avg = Dense::identity(n);
    for i in 0..n {
        for j in 0..n {
            avg.add_to(i, j, -o.w[j] / 2.0);
        }
    }
    let id = Dense::identity(n);
    let mass = on_axis(&o.m, &o.m, 0, dim);
    mass.mul(&on_axis(&avg, &id, a, dim)).scale(2.0 * d * lambda)
}

/// Diagonal block `s(⊗M) − Σ_a λ_a G_a + V_d`.
pub fn block(o: &Ops1d, dim: usize, lambda: [f64; 3], d: f64, shift: f64) -> Dense {
    let mut b = on_axis(&o.m, &o.m, 0, dim).scale(shift);
    for a in 0..dim {
        b = b.minus(&on_axis(&o.g, &o.m, a, dim).scale(lambda[a]));
        if d > 0.0 {
            b = b.plus(&viscosity_axis(o, a, dim, lambda[a], d));
        }
    }
    b
}

/// Block coupling a cell to its lower neighbour along `a`: `−λ_a C_a`.
pub fn coupling(o: &Ops1d, dim: usize, a: usize, lambda: f64) -> Dense {
    on_axis(&o.c, &o.m, a, dim).scale(-lambda)
}

/// Global matrix of a uniform periodic or inflow mesh with `cells` per axis.
pub fn global(o: &Ops1d, dim: usize, cells: usize, lambda: [f64; 3], d: f64, shift: f64, periodic: bool) -> Dense {
    let npc = (o.p + 1).pow(dim as u32);
    let total = cells.pow(dim as u32);
    let mut g = Dense::zeros(total * npc);
    let diag = block(o, dim, lambda, d, shift);
    let couple: Vec<Dense> = (0..dim).map(|a| coupling(o, dim, a, lambda[a])).collect();
    for c in 0..total {
        g.put_block(c, c, &diag);
        let mut idx = [0usize; 3];
        let mut rest = c;
        for k in idx.iter_mut().take(dim) {
            *k = rest % cells;
            rest /= cells;
        }
        for a in 0..dim {
            if idx[a] == 0 && !periodic {
                continue;
            }
            let mut nb = idx;
            nb[a] = (idx[a] + cells - 1) % cells;
            let j = nb[0] + cells * (nb[1] + cells * nb[2]);
            g.put_block(c, j, &couple[a]);
        }
    }
    g
}
