//! Test problems: domain, data, exact solutions and admissible bounds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use dgsem_core::scheme::{Boundary, SchemeConfig, SourceFn};
use dgsem_core::{scalar_fn, Bounds, ScalarFn};

use crate::error::HarnessError;

/// Floor of the 1D advection–reaction data.
pub const REACTION_EPS: f64 = 1e-14;
/// Reaction coefficient of both advection–reaction problems.
pub const REACTION_BETA: f64 = 6000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    Transport1d,
    Steady1d,
    ZsProfile1d,
    AdvReaction1d,
    Pulse2d,
    SteadySmooth2d,
    SteadyDisc2d,
    AdvReaction2d,
    Box3d,
}

impl ProblemId {
    pub const ALL: [ProblemId; 9] = [
        ProblemId::Transport1d,
        ProblemId::Steady1d,
        ProblemId::ZsProfile1d,
        ProblemId::AdvReaction1d,
        ProblemId::Pulse2d,
        ProblemId::SteadySmooth2d,
        ProblemId::SteadyDisc2d,
        ProblemId::AdvReaction2d,
        ProblemId::Box3d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Transport1d => "transport-1d",
            ProblemId::Steady1d => "steady-1d",
            ProblemId::ZsProfile1d => "zs-profile-1d",
            ProblemId::AdvReaction1d => "adv-reaction-1d",
            ProblemId::Pulse2d => "pulse-2d",
            ProblemId::SteadySmooth2d => "steady-smooth-2d",
            ProblemId::SteadyDisc2d => "steady-disc-2d",
            ProblemId::AdvReaction2d => "adv-reaction-2d",
            ProblemId::Box3d => "box-3d",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemId::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| HarnessError::Spec(format!("unknown problem '{}'", s)))
    }
}

/// A problem on `[a, b]^dim` with unit velocity along every axis.
#[derive(Clone)]
pub struct Problem {
    pub id: ProblemId,
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub boundary: Vec<Boundary>,
    pub beta: f64,
    pub source: Option<ScalarFn>,
    pub initial: ScalarFn,
    /// Exact solution `u(x, t)`; steady problems ignore `t`.
    pub exact: Option<ScalarFn>,
    pub bounds: Bounds,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("id", &self.id).field("dim", &self.dim).field("bounds", &self.bounds).finish()
    }
}

impl Problem {
    pub fn new(id: ProblemId) -> Self {
        let zero = scalar_fn(|_, _| 0.0);
        match id {
            ProblemId::Transport1d => Problem {
                id,
                dim: 1,
                a: 0.0,
                b: 1.0,
                boundary: vec![Boundary::Periodic],
                beta: 0.0,
                source: None,
                initial: scalar_fn(|x, _| (2.0 * PI * x[0]).sin()),
                exact: Some(scalar_fn(|x, t| (2.0 * PI * (x[0] - t)).sin())),
                bounds: bounds(-1.0, 1.0),
            },
            ProblemId::Steady1d => Problem {
                id,
                dim: 1,
                a: 0.0,
                b: 1.0,
                boundary: vec![Boundary::Inflow(zero.clone())],
                beta: 0.0,
                source: Some(scalar_fn(|x, _| 2.0 * PI * (2.0 * PI * x[0]).cos())),
                initial: zero,
                exact: Some(scalar_fn(|x, _| (2.0 * PI * x[0]).sin())),
                bounds: bounds(-1.0, 1.0),
            },
            ProblemId::ZsProfile1d => Problem {
                id,
                dim: 1,
                a: 0.0,
                b: 1.0,
                boundary: vec![Boundary::Periodic],
                beta: 0.0,
                source: None,
                initial: scalar_fn(|x, _| zs_profile(x[0])),
                exact: Some(scalar_fn(|x, t| zs_profile((x[0] - t).rem_euclid(1.0)))),
                bounds: bounds(0.0, 1.0),
            },
            ProblemId::AdvReaction1d => {
                let exact = scalar_fn(|x, _| reaction_1d(x[0]));
                Problem {
                    id,
                    dim: 1,
                    a: 0.0,
                    b: 3.0,
                    boundary: vec![Boundary::Inflow(scalar_fn(|_, _| 1.0 / 9.0 + REACTION_EPS))],
                    beta: REACTION_BETA,
                    source: Some(scalar_fn(|x, _| {
                        let (s, c) = (2.0 * PI * x[0]).sin_cos();
                        REACTION_BETA * reaction_1d(x[0]) - 8.0 * PI / 9.0 * c.powi(3) * s
                    })),
                    initial: zero,
                    exact: Some(exact),
                    bounds: bounds(REACTION_EPS, 1.0 / 9.0 + REACTION_EPS),
                }
            }
            ProblemId::Pulse2d => Problem {
                id,
                dim: 2,
                a: 0.0,
                b: 1.0,
                boundary: vec![Boundary::Periodic; 2],
                beta: 0.0,
                source: None,
                initial: scalar_fn(|x, _| pulse(x[0], x[1])),
                exact: Some(scalar_fn(|x, t| pulse((x[0] - t).rem_euclid(1.0), (x[1] - t).rem_euclid(1.0)))),
                bounds: bounds(0.0, 1.0),
            },
            ProblemId::SteadySmooth2d => Problem {
                id,
                dim: 2,
                a: 0.0,
                b: 1.0,
                boundary: vec![
                    Boundary::Inflow(scalar_fn(|x, _| -(2.0 * PI * x[1]).sin())),
                    Boundary::Inflow(scalar_fn(|x, _| (2.0 * PI * x[0]).sin())),
                ],
                beta: 0.0,
                source: None,
                initial: zero,
                exact: Some(scalar_fn(|x, _| (2.0 * PI * (x[0] - x[1])).sin())),
                bounds: bounds(-1.0, 1.0),
            },
            ProblemId::SteadyDisc2d => Problem {
                id,
                dim: 2,
                a: 0.0,
                b: 1.0,
                boundary: vec![
                    Boundary::Inflow(scalar_fn(|x, _| -(PI * x[1]).cos())),
                    Boundary::Inflow(scalar_fn(|x, _| (PI * x[0]).cos())),
                ],
                beta: 0.0,
                source: None,
                initial: zero,
                exact: Some(scalar_fn(|x, _| {
                    let d = x[0] - x[1];
                    if d == 0.0 {
                        0.0
                    } else {
                        d.signum() * (PI * d).cos()
                    }
                })),
                bounds: bounds(-1.0, 1.0),
            },
            ProblemId::AdvReaction2d => Problem {
                id,
                dim: 2,
                a: 0.0,
                b: 1.0,
                boundary: vec![
                    Boundary::Inflow(scalar_fn(|x, _| reaction_2d(0.0, x[1]))),
                    Boundary::Inflow(scalar_fn(|x, _| reaction_2d(x[0], 0.0))),
                ],
                beta: REACTION_BETA,
                source: Some(scalar_fn(|x, _| {
                    let (sx, cx) = (3.0 * PI * x[0]).sin_cos();
                    let (sy, cy) = (3.0 * PI * x[1]).sin_cos();
                    let k = -12.0 * PI / 9.0;
                    k * cx.powi(3) * sx * cy.powi(4) + k * cy.powi(3) * sy * cx.powi(4) + REACTION_BETA * reaction_2d(x[0], x[1])
                })),
                initial: zero,
                exact: Some(scalar_fn(|x, _| reaction_2d(x[0], x[1]))),
                bounds: bounds(0.0, 1.0 / 9.0),
            },
            ProblemId::Box3d => Problem {
                id,
                dim: 3,
                a: 0.0,
                b: 1.0,
                boundary: vec![Boundary::Periodic; 3],
                beta: 0.0,
                source: None,
                initial: scalar_fn(|x, _| if x.iter().all(|&c| (0.25..=0.5).contains(&c)) { 1.0 } else { 0.0 }),
                exact: None,
                bounds: bounds(0.0, 1.0),
            },
        }
    }

    /// Scheme parameters for `N` cells per axis and `Δt = λh`.
    pub fn config(&self, cells: usize, lambda: f64) -> SchemeConfig {
        let h = (self.b - self.a) / cells as f64;
        SchemeConfig {
            velocity: vec![1.0; self.dim],
            dt: lambda * h,
            boundary: self.boundary.clone(),
            beta: self.beta,
            source: self.source.clone().map(SourceFn),
            viscosity: None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary.iter().all(Boundary::is_periodic)
    }
}

fn bounds(lo: f64, hi: f64) -> Bounds {
    Bounds::new(lo, hi).expect("static bounds are ordered")
}

/// Gaussian, square pulse, triangle and semi-ellipses on `[0, 1]`.
pub fn zs_profile(x: f64) -> f64 {
    let delta = 0.005;
    let a = 0.86;
    let z = 0.14;
    let alpha = 10.0;
    let beta = 2f64.ln() / (36.0 * delta * delta);
    let g = |z: f64| (-beta * (x - z) * (x - z)).exp();
    let f = |a: f64| (1.0 - alpha * alpha * (x - a) * (x - a)).max(0.0).sqrt();
    if (0.04..=0.24).contains(&x) {
        (g(z - delta) + 4.0 * g(z) + g(z + delta)) / 6.0
    } else if (0.28..=0.48).contains(&x) {
        1.0
    } else if (0.52..=0.72).contains(&x) {
        1.0 - 10.0 * (x - 0.62).abs()
    } else if (0.76..=0.96).contains(&x) {
        (f(a - delta) + 4.0 * f(a) + f(a + delta)) / 6.0
    } else {
        0.0
    }
}

fn pulse(x: f64, y: f64) -> f64 {
    if (x - 0.25).abs() + (y - 0.25).abs() <= 0.15 {
        1.0
    } else {
        0.0
    }
}

fn reaction_1d(x: f64) -> f64 {
    (2.0 * PI * x).cos().powi(4) / 9.0 + REACTION_EPS
}

fn reaction_2d(x: f64, y: f64) -> f64 {
    (3.0 * PI * x).cos().powi(4) * (3.0 * PI * y).cos().powi(4) / 9.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in ProblemId::ALL {
            assert_eq!(id.name().parse::<ProblemId>().unwrap(), id);
        }
        assert!("nope".parse::<ProblemId>().is_err());
    }

    #[test]
    fn zs_profile_pieces() {
        assert_eq!(zs_profile(0.3), 1.0);
        assert!((zs_profile(0.62) - 1.0).abs() < 1e-15);
        assert_eq!(zs_profile(0.5), 0.0);
        assert!((zs_profile(0.14) - 1.0).abs() < 0.05);
    }
}
