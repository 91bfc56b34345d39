//! Stationary flows with parallel, concentric and radial symmetry.
//!
//! With `f = 0` the stationary system reduces to ordinary differential
//! equations for one profile: `u = u₁(x₂)e₁`, `u = r g(r) e_θ` or
//! `u = h(θ)/r e_r`, where `e_θ = (x₂/r, -x₁/r)`. Each solver returns the
//! profile together with the reconstructed pressure and the residual of the
//! full two-dimensional momentum equation on a verification grid.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::viscosity::ViscosityLaw;

mod concentric;
mod parallel;
mod radial;
mod verify;

pub use concentric::{solve_concentric, ConcentricProblem};
pub use parallel::{solve_parallel, ParallelMode, ParallelProblem};
pub use radial::{
    radial_nonexistence_demo, solve_radial, NonexistenceConfig, NonexistenceReport, NonexistenceRow, RadialProblem,
};
pub use verify::verify_full_momentum;

/// A density profile as a function of the single symmetry variable.
#[derive(Clone)]
pub struct Profile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    desc: String,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.desc)
    }
}

fn number(s: &str, spec: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::param("profile", format!("bad number `{s}` in `{spec}`")))
}

impl Profile {
    pub fn constant(c: f64) -> Self {
        Self {
            f: Arc::new(move |_| c),
            desc: format!("const:{c}"),
        }
    }

    /// `lo` below `at` and `hi` above, joined by `tanh((s - at)/width)`; `width = 0` is a step.
    pub fn layers(lo: f64, hi: f64, at: f64, width: f64) -> Self {
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = if width > 0.0 {
            Arc::new(move |s| lo + 0.5 * (hi - lo) * (1.0 + ((s - at) / width).tanh()))
        } else {
            Arc::new(move |s| if s < at { lo } else { hi })
        };
        Self {
            f,
            desc: format!("layers:{lo},{hi},{at},{width}"),
        }
    }

    /// `base + amp sin s`
    pub fn sine(base: f64, amp: f64) -> Self {
        Self {
            f: Arc::new(move |s| base + amp * s.sin()),
            desc: format!("sin:{base},{amp}"),
        }
    }

    /// `a` on `[0, π)` and `b` on `[π, 2π)`, extended 2π-periodically.
    pub fn halves(a: f64, b: f64) -> Self {
        Self {
            f: Arc::new(move |s| if s.rem_euclid(2.0 * PI) < PI { a } else { b }),
            desc: format!("halves:{a},{b}"),
        }
    }

    pub fn custom(desc: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            desc: desc.into(),
        }
    }

    /// Parse `const:c`, `layers:lo,hi,at,width`, `sin:base,amp` or `halves:a,b`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
        let v: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',').map(|a| number(a, spec)).collect::<Result<_>>()?
        };
        match (kind.trim(), v.as_slice()) {
            ("const", &[c]) => Ok(Self::constant(c)),
            ("layers", &[lo, hi, at, w]) if w >= 0.0 => Ok(Self::layers(lo, hi, at, w)),
            ("sin", &[b, a]) => Ok(Self::sine(b, a)),
            ("halves", &[a, b]) => Ok(Self::halves(a, b)),
            _ => Err(Error::param("profile", format!("cannot parse `{spec}`"))),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }
}

/// Which symmetry class a solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    Parallel,
    Concentric,
    Radial,
}

/// Profile, pressure and diagnostics of a symmetric flow.
///
/// `nodes` are `x₂`, `r` or `θ`. `profile` holds `u₁`, `g` or `h` and `slope`
/// its derivative. `pressure` is `β(x₂)` with `π = C x₁ + β` (parallel),
/// `β̃(r)` with `π = -Cθ + β̃` (concentric), and `P(θ)` with `π = P/r²`
/// (radial).
#[derive(Debug, Clone)]
pub struct SymmetricSolution {
    pub kind: SymmetryKind,
    pub nodes: Vec<f64>,
    pub profile: Vec<f64>,
    pub slope: Vec<f64>,
    pub pressure: Vec<f64>,
    pub c: f64,
    /// `C₁` of the parallel and concentric first integrals.
    pub c1: f64,
    /// Strict parallel mode: `max |∂₂(μ_o ∂₂u₁)|` at the least-squares profile.
    pub incompatibility: Option<f64>,
    /// Sup norm of the reduced one-dimensional equation.
    pub reduced_residual: f64,
    /// Newton iterations (radial), otherwise 0.
    pub iterations: usize,
    /// Sup norms of the radial Newton residuals.
    pub residual_history: Vec<f64>,
    /// Sup norm of the full momentum residual on the verification grid.
    pub momentum_residual: f64,
}

/// Data shared by the three problem types for the full-equation check.
pub trait FlowProblem {
    fn law(&self) -> &ViscosityLaw;
    fn density(&self) -> &Profile;
}

/// `ρ(s)` at every node, checked against the density bounds of `law`.
fn sample_density(rho: &Profile, law: &ViscosityLaw, nodes: &[f64]) -> Result<Vec<f64>> {
    let b = law.bounds();
    nodes
        .iter()
        .map(|&s| {
            let r = rho.eval(s);
            if b.contains(r) {
                Ok(r)
            } else {
                Err(Error::DensityOutOfBounds {
                    value: r,
                    lower: b.rho_star(),
                    upper: b.rho_upper(),
                })
            }
        })
        .collect()
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}
