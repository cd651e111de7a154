//! The backward-Euler DGSEM step on a Cartesian mesh of any dimension:
//! right-hand sides, upwind coupling, global solves and the limiter
//! pipeline.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bounds;
use crate::error::{bail, Result};
use crate::limiters::{self, FctContext, FctWorkspace};
use crate::mesh::{Bounds, Field, Space};
use crate::tensor::{pow, BlockCache, BlockParams, CellOps};
use crate::ScalarFn;

/// Boundary treatment of one axis.
#[derive(Clone)]
pub enum Boundary {
    Periodic,
    /// Inflow data `g(x, t)` on the lower face, outflow on the upper face.
    Inflow(ScalarFn),
}

impl core::fmt::Debug for Boundary {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "Periodic"),
            Boundary::Inflow(_) => write!(f, "Inflow(..)"),
        }
    }
}

impl Boundary {
    pub fn is_periodic(&self) -> bool {
        matches!(self, Boundary::Periodic)
    }
}

/// Physical and discrete parameters of the scheme.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    /// Nonnegative velocity per axis.
    pub velocity: Vec<f64>,
    pub dt: f64,
    pub boundary: Vec<Boundary>,
    /// Reaction coefficient `β ≥ 0`.
    pub beta: f64,
    pub source: Option<SourceFn>,
    /// Graph viscosity of the low-order solve; `None` means `d_min(p)`.
    pub viscosity: Option<f64>,
}

/// Wrapper so that configs stay `Debug`.
#[derive(Clone)]
pub struct SourceFn(pub ScalarFn);

impl core::fmt::Debug for SourceFn {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "SourceFn(..)")
    }
}

impl SchemeConfig {
    /// Unit velocity along every axis, no reaction, no source.
    pub fn transport(dim: usize, dt: f64, boundary: Boundary) -> Self {
        Self { velocity: vec![1.0; dim], dt, boundary: vec![boundary; dim], beta: 0.0, source: None, viscosity: None }
    }
}

/// High-order step or low-order step with graph viscosity `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    High,
    Low(f64),
}

/// Limiting applied after the implicit solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limiter {
    None,
    /// Scaling limiter; every cell average must satisfy the bounds.
    Scaling(Bounds),
    /// Scaling limiter without the cell-average precondition.
    ScalingLenient(Bounds),
    /// High-order solve, low-order fallback with FCT when an average leaves
    /// the bounds, then the scaling limiter.
    Fct(Bounds),
}

/// Stopping rule of the block Gauss-Seidel iteration on periodic meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepControl {
    /// Relative residual `‖AU − b‖∞ / ‖b‖∞` to reach.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Residual accepted once the iteration stops improving.
    pub stagnation_tolerance: f64,
}

impl Default for SweepControl {
    fn default() -> Self {
        Self { tolerance: 1e-15, max_sweeps: 100_000, stagnation_tolerance: 1e-10 }
    }
}

/// Statistics of the last global solve.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub sweeps: usize,
    pub residual: f64,
}

/// Result of a limited step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub field: Field,
    /// True when the low-order solve and FCT were used.
    pub low_order: bool,
    pub workspace: Option<FctWorkspace>,
}

/// One backward-Euler DGSEM discretization.
pub struct Scheme {
    pub(crate) space: Arc<Space>,
    pub(crate) ops: CellOps,
    pub(crate) cfg: SchemeConfig,
    pub(crate) cache: BlockCache,
    pub(crate) lambda: Vec<[f64; 3]>,
    pub(crate) periodic: [bool; 3],
    pub(crate) shift: f64,
    pub(crate) control: SweepControl,
    pub(crate) stats: SolveStats,
    pub(crate) wrap_response: Option<Vec<f64>>,
    d_min: f64,
}

impl core::fmt::Debug for Scheme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Scheme").field("dim", &self.space.dim()).field("p", &self.space.degree()).field("cfg", &self.cfg).finish()
    }
}

impl Scheme {
    pub fn new(space: Arc<Space>, cfg: SchemeConfig) -> Result<Self> {
        let dim = space.dim();
        if cfg.velocity.len() != dim || cfg.boundary.len() != dim {
            bail!(Config, "velocity and boundary need {} entries", dim);
        }
        if cfg.velocity.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            bail!(Config, "velocities must be finite and nonnegative, got {:?}", cfg.velocity);
        }
        if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
            bail!(Config, "time step must be positive, got {}", cfg.dt);
        }
        if !(cfg.beta >= 0.0) {
            bail!(Config, "reaction coefficient must be nonnegative, got {}", cfg.beta);
        }
        if let Some(d) = cfg.viscosity {
            if !(d >= 0.0) {
                bail!(Config, "graph viscosity must be nonnegative, got {}", d);
            }
        }
        let ops = CellOps::new(space.basis(), dim)?;
        let mesh = space.mesh();
        let lambda = (0..mesh.cells())
            .map(|c| {
                let mut l = [0.0; 3];
                for a in 0..dim {
                    l[a] = cfg.velocity[a] * cfg.dt / mesh.cell_size(c, a);
                }
                l
            })
            .collect();
        let mut periodic = [false; 3];
        for a in 0..dim {
            periodic[a] = cfg.boundary[a].is_periodic();
        }
        let shift = 1.0 + cfg.beta * cfg.dt;
        let d_min = bounds::d_min(space.basis());
        Ok(Self {
            space,
            ops,
            cfg,
            cache: BlockCache::new(),
            lambda,
            periodic,
            shift,
            control: SweepControl::default(),
            stats: SolveStats::default(),
            wrap_response: None,
            d_min,
        })
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn ops(&self) -> &CellOps {
        &self.ops
    }

    pub fn lambda(&self, cell: usize) -> [f64; 3] {
        self.lambda[cell]
    }

    pub fn lambdas(&self) -> &[[f64; 3]] {
        &self.lambda
    }

    /// `1 + βΔt`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn periodic(&self) -> [bool; 3] {
        self.periodic
    }

    pub fn set_sweep_control(&mut self, control: SweepControl) {
        self.control = control;
    }

    pub fn last_stats(&self) -> SolveStats {
        self.stats
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }

    /// Viscosity used by [`Limiter::Fct`].
    pub fn low_order_viscosity(&self) -> f64 {
        self.cfg.viscosity.unwrap_or(self.d_min)
    }

    pub fn fct_context(&self) -> FctContext<'_> {
        FctContext { lambda: &self.lambda, shift: self.shift, periodic: self.periodic }
    }

    pub fn block_params(&self, cell: usize, mode: Mode) -> BlockParams {
        let d = match mode {
            Mode::High => 0.0,
            Mode::Low(d) => d,
        };
        BlockParams { lambda: self.lambda[cell], d, shift: self.shift }
    }

    /// `(⊗M)(Uⁿ + Δt s)` plus the inflow data of boundary faces at `t`.
    pub fn base_rhs(&self, un: &Field, t: f64) -> Vec<f64> {
        let space = &self.space;
        let dim = space.dim();
        let mesh = space.mesh();
        let npc = space.nodes_per_cell();
        let w = self.ops.weights();
        let mut b = vec![0.0; space.dofs()];
        for c in 0..mesh.cells() {
            let u = un.cell(c);
            let dst = &mut b[c * npc..(c + 1) * npc];
            for n in 0..npc {
                dst[n] = w[n] * u[n];
            }
            if let Some(src) = &self.cfg.source {
                for n in 0..npc {
                    let x = space.position(c, n);
                    dst[n] += w[n] * self.cfg.dt * (src.0)(&x[..dim], t);
                }
            }
            let idx = mesh.cell_coords(c);
            for a in 0..dim {
                let lam = self.lambda[c][a];
                if idx[a] != 0 || lam == 0.0 {
                    continue;
                }
                if let Boundary::Inflow(g) = &self.cfg.boundary[a] {
                    let start = mesh.axis(a).start();
                    for n in 0..npc {
                        if self.ops.coords(n)[a] != 0 {
                            continue;
                        }
                        let mut x = space.position(c, n);
                        x[a] = start;
                        dst[n] += lam * self.ops.face_weight(n, a) * g(&x[..dim], t);
                    }
                }
            }
        }
        b
    }

    /// Adds the upwind traces of the lower neighbours of `c` to `rhs`.
    /// With `wrap = false` periodic wrap-around neighbours are skipped.
    pub(crate) fn add_coupling(&self, c: usize, u: &[f64], wrap: bool, rhs: &mut [f64]) {
        let npc = self.space.nodes_per_cell();
        let n = self.ops.n();
        let p = n - 1;
        let mesh = self.space.mesh();
        for a in 0..self.space.dim() {
            let lam = self.lambda[c][a];
            if lam == 0.0 {
                continue;
            }
            let idx = mesh.cell_coords(c);
            if idx[a] == 0 && !(self.periodic[a] && wrap) {
                continue;
            }
            let nb = match mesh.neighbor(c, a, false, self.periodic[a]) {
                Some(nb) => nb,
                None => continue,
            };
            let stride = pow(n, a);
            let src = &u[nb * npc..(nb + 1) * npc];
            for node in 0..npc {
                if self.ops.coords(node)[a] == 0 {
                    rhs[node] += lam * self.ops.face_weight(node, a) * src[node + p * stride];
                }
            }
        }
    }

    /// One forward block substitution in cell order.
    pub(crate) fn sweep(&mut self, base: &[f64], u: &mut [f64], mode: Mode, wrap: bool) -> Result<()> {
        let npc = self.space.nodes_per_cell();
        let mut rhs = vec![0.0; npc];
        let mut x = vec![0.0; npc];
        for c in 0..self.space.mesh().cells() {
            rhs.copy_from_slice(&base[c * npc..(c + 1) * npc]);
            self.add_coupling(c, u, wrap, &mut rhs);
            let prm = self.block_params(c, mode);
            let solver = self.cache.get(&self.ops, &prm)?;
            solver.solve(&self.ops, &rhs, &mut x)?;
            u[c * npc..(c + 1) * npc].copy_from_slice(&x);
        }
        Ok(())
    }

    /// `‖AU − b‖∞ / ‖b‖∞` of the global system.
    pub fn residual_with_base(&self, base: &[f64], u: &[f64], mode: Mode) -> f64 {
        let npc = self.space.nodes_per_cell();
        let mut r = vec![0.0; npc];
        let mut rhs = vec![0.0; npc];
        let mut num = 0.0f64;
        for c in 0..self.space.mesh().cells() {
            rhs.copy_from_slice(&base[c * npc..(c + 1) * npc]);
            self.add_coupling(c, u, true, &mut rhs);
            let prm = self.block_params(c, mode);
            self.ops.block_apply(&prm, &u[c * npc..(c + 1) * npc], &mut r);
            for (a, b) in r.iter().zip(&rhs) {
                num = num.max((a - b).abs());
            }
        }
        let den = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Relative residual of `unew` as the next state of `un`.
    pub fn residual(&self, un: &Field, unew: &Field, mode: Mode) -> f64 {
        let base = self.base_rhs(un, un.time() + self.cfg.dt);
        self.residual_with_base(&base, unew.values(), mode)
    }

    /// Solves the implicit step from `un` without limiting.
    pub fn solve(&mut self, un: &Field, mode: Mode) -> Result<Field> {
        let t1 = un.time() + self.cfg.dt;
        let base = self.base_rhs(un, t1);
        let any_periodic = self.periodic[..self.space.dim()].iter().any(|&p| p);
        let values = if !any_periodic {
            let mut u = vec![0.0; base.len()];
            self.sweep(&base, &mut u, mode, false)?;
            self.stats = SolveStats { sweeps: 1, residual: 0.0 };
            u
        } else if self.space.dim() == 1 && mode == Mode::High {
            self.solve_periodic_1d(&base)?
        } else {
            self.gauss_seidel(&base, un.values(), mode)?
        };
        let mut out = Field::from_values(self.space.clone(), values)?;
        out.set_time(t1);
        Ok(out)
    }

    fn gauss_seidel(&mut self, base: &[f64], start: &[f64], mode: Mode) -> Result<Vec<f64>> {
        let mut u = start.to_vec();
        let ctl = self.control;
        let mut best = f64::INFINITY;
        let mut since_best = 0usize;
        for sweep in 1..=ctl.max_sweeps {
            self.sweep(base, &mut u, mode, true)?;
            let res = self.residual_with_base(base, &u, mode);
            self.stats = SolveStats { sweeps: sweep, residual: res };
            if res <= ctl.tolerance {
                return Ok(u);
            }
            if res < 0.5 * best {
                best = res;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= 20 {
                    if res <= ctl.stagnation_tolerance {
                        return Ok(u);
                    }
                    bail!(Numeric, "block Gauss-Seidel stagnated at relative residual {:.3e} after {} sweeps", res, sweep);
                }
            }
        }
        bail!(Numeric, "block Gauss-Seidel reached {} sweeps with relative residual {:.3e}", ctl.max_sweeps, self.stats.residual)
    }

    /// Implicit step followed by the requested limiter.
    pub fn step(&mut self, un: &Field, limiter: &Limiter) -> Result<StepOutcome> {
        let ho = self.solve(un, Mode::High)?;
        match limiter {
            Limiter::None => Ok(StepOutcome { field: ho, low_order: false, workspace: None }),
            Limiter::Scaling(b) => Ok(StepOutcome { field: limiters::scaling_limit(&ho, b)?, low_order: false, workspace: None }),
            Limiter::ScalingLenient(b) => {
                Ok(StepOutcome { field: limiters::scaling_limit_lenient(&ho, b), low_order: false, workspace: None })
            }
            Limiter::Fct(b) => {
                let within = ho.averages().iter().all(|&v| b.contains(v, limiters::AVERAGE_SLACK));
                if within {
                    return Ok(StepOutcome { field: limiters::scaling_limit(&ho, b)?, low_order: false, workspace: None });
                }
                let d = self.low_order_viscosity();
                let lo = self.solve(un, Mode::Low(d))?;
                let (limited, ws) = limiters::fct(&ho, &lo, b, &self.fct_context())?;
                let field = limiters::scaling_limit(&limited, b)?;
                Ok(StepOutcome { field, low_order: true, workspace: Some(ws) })
            }
        }
    }

    /// Per-cell discrete entropy balance
    /// `½⟨u²⟩ⁿ⁺¹ − ½⟨u²⟩ⁿ + Σ_a (λ_a/2)(⟨U²⟩_upper − ⟨U²⟩_lower)`,
    /// with the lower trace taken from the upwind neighbour or the inflow data.
    pub fn entropy_residual(&self, before: &Field, after: &Field) -> Vec<f64> {
        let space = &self.space;
        let dim = space.dim();
        let mesh = space.mesh();
        let npc = space.nodes_per_cell();
        let n = self.ops.n();
        let p = n - 1;
        let w = self.ops.weights();
        let t = after.time();
        (0..mesh.cells())
            .map(|c| {
                let u1 = after.cell(c);
                let u0 = before.cell(c);
                let mut e: f64 = (0..npc).map(|k| 0.5 * w[k] * (u1[k] * u1[k] - u0[k] * u0[k])).sum();
                let idx = mesh.cell_coords(c);
                for a in 0..dim {
                    let lam = self.lambda[c][a];
                    if lam == 0.0 {
                        continue;
                    }
                    let stride = pow(n, a);
                    let nb = mesh.neighbor(c, a, false, self.periodic[a]);
                    for node in 0..npc {
                        if self.ops.coords(node)[a] != 0 {
                            continue;
                        }
                        let fw = self.ops.face_weight(node, a);
                        let out = u1[node + p * stride];
                        let inflow = match (nb, &self.cfg.boundary[a]) {
                            (Some(nb), _) if idx[a] != 0 || self.periodic[a] => after.cell(nb)[node + p * stride],
                            (_, Boundary::Inflow(g)) => {
                                let mut x = space.position(c, node);
                                x[a] = mesh.axis(a).start();
                                g(&x[..dim], t)
                            }
                            _ => 0.0,
                        };
                        e += 0.5 * lam * fw * (out * out - inflow * inflow);
                    }
                }
                e
            })
            .collect()
    }
}

/// Why a march to steady state stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStop {
    Converged,
    /// No improvement for `patience` steps with the change below the
    /// stagnation tolerance.
    Stagnated,
    /// `max_steps` reached, e.g. when the a-posteriori FCT switch cycles.
    StepLimit,
}

/// Outcome of a march to steady state.
#[derive(Debug, Clone)]
pub struct SteadyOutcome {
    pub field: Field,
    pub steps: usize,
    pub last_change: f64,
    pub stop: SteadyStop,
}

impl SteadyOutcome {
    pub fn converged(&self) -> bool {
        self.stop == SteadyStop::Converged
    }
}

/// Stopping rule of [`run_steady`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyControl {
    pub tolerance: f64,
    pub max_steps: usize,
    pub patience: usize,
    pub stagnation_tolerance: f64,
}

impl Default for SteadyControl {
    fn default() -> Self {
        Self { tolerance: 1e-14, max_steps: 20_000, patience: 100, stagnation_tolerance: 1e-10 }
    }
}

/// Marches until `‖uⁿ⁺¹ − uⁿ‖₂ ≤ tolerance`, the stagnation guard fires or
/// `max_steps` is reached.
pub fn run_steady(scheme: &mut Scheme, u0: Field, limiter: &Limiter, ctl: &SteadyControl) -> Result<SteadyOutcome> {
    let mut u = u0;
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    let mut change = f64::INFINITY;
    for step in 1..=ctl.max_steps {
        let next = scheme.step(&u, limiter)?.field;
        change = next.l2_distance(&u);
        u = next;
        if change <= ctl.tolerance {
            return Ok(SteadyOutcome { field: u, steps: step, last_change: change, stop: SteadyStop::Converged });
        }
        if change < best {
            best = change;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= ctl.patience && change < ctl.stagnation_tolerance {
                return Ok(SteadyOutcome { field: u, steps: step, last_change: change, stop: SteadyStop::Stagnated });
            }
        }
    }
    Ok(SteadyOutcome { field: u, steps: ctl.max_steps, last_change: change, stop: SteadyStop::StepLimit })
}

/// Marches `steps` steps, calling `observe` after each one.
pub fn run_steps(scheme: &mut Scheme, u0: Field, steps: usize, limiter: &Limiter, mut observe: impl FnMut(&Field)) -> Result<Field> {
    let mut u = u0;
    for _ in 0..steps {
        u = scheme.step(&u, limiter)?.field;
        observe(&u);
    }
    Ok(u)
}
