//! Parallel flow `u = u₁(x₂)e₁` in a strip `a < x₂ < b`.
//!
//! The first momentum component forces `∂₂(μ_e∂₂u₁) = C`. The second reads
//! `∂₂π = ∂₂(μ_o∂₂u₁)`, which a pressure `π = C x₁ + β(x₂)` absorbs; the
//! strict reading instead demands `∂₂(μ_o∂₂u₁) = 0` as well.

use nalgebra::{DMatrix, DVector};

use super::{sample_density, uniform, verify_full_momentum, FlowProblem, Profile, SymmetricSolution, SymmetryKind};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};
use crate::viscosity::ViscosityLaw;

const RULE_POINTS: usize = 6;

/// Reading of the odd momentum component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelMode {
    /// Both `∂₂(μ_e∂₂u₁) = C` and `∂₂(μ_o∂₂u₁) = 0`, solved in the least-squares sense.
    Strict,
    /// Only `∂₂(μ_e∂₂u₁) = C`; the odd term goes into `β(x₂)`.
    PressureAbsorbed,
}

#[derive(Debug, Clone)]
pub struct ParallelProblem {
    pub rho: Profile,
    pub law: ViscosityLaw,
    pub c: f64,
    pub interval: (f64, f64),
    pub u_a: f64,
    pub u_b: f64,
    pub mode: ParallelMode,
    /// Number of cells on `[a, b]`.
    pub n: usize,
}

impl FlowProblem for ParallelProblem {
    fn law(&self) -> &ViscosityLaw {
        &self.law
    }
    fn density(&self) -> &Profile {
        &self.rho
    }
}

impl ParallelProblem {
    fn validate(&self) -> Result<()> {
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::param("interval", format!("[{a}, {b}] is empty")));
        }
        if self.n < 8 {
            return Err(Error::param("n", format!("{} cells, need at least 8", self.n)));
        }
        for (name, v) in [("c", self.c), ("u_a", self.u_a), ("u_b", self.u_b)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }
    fn nu_e(&self, s: f64) -> f64 {
        self.law.nu_e().eval(self.rho.eval(s))
    }
    fn nu_o(&self, s: f64) -> f64 {
        self.law.nu_o().eval(self.rho.eval(s))
    }
}

/// `u₁(x₂) = u_a + ∫_a^x₂ (C t + C₁)/ν_e dt` with `C₁` matching `u_b`; returns `(u, C₁)`.
fn first_integral(p: &ParallelProblem, x: &[f64]) -> (Vec<f64>, f64) {
    let rule = gauss_legendre(RULE_POINTS);
    let cells: Vec<(f64, f64)> = x
        .windows(2)
        .map(|w| {
            (
                integrate(&rule, w[0], w[1], |t| 1.0 / p.nu_e(t)),
                integrate(&rule, w[0], w[1], |t| t / p.nu_e(t)),
            )
        })
        .collect();
    let i0: f64 = cells.iter().map(|c| c.0).sum();
    let i1: f64 = cells.iter().map(|c| c.1).sum();
    let c1 = (p.u_b - p.u_a - p.c * i1) / i0;
    let mut u = Vec::with_capacity(x.len());
    u.push(p.u_a);
    for c in &cells {
        let last = *u.last().expect("nonempty");
        u.push(last + p.c * c.1 + c1 * c.0);
    }
    *u.last_mut().expect("nonempty") = p.u_b;
    (u, c1)
}

/// `∂₂(μ ∂₂u)` at interior nodes with `μ` at the cell midpoints.
fn flux_divergence(x: &[f64], u: &[f64], mu: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = x[1] - x[0];
    (1..x.len() - 1)
        .map(|k| {
            let up = mu(x[k] + 0.5 * h) * (u[k + 1] - u[k]);
            let dn = mu(x[k] - 0.5 * h) * (u[k] - u[k - 1]);
            (up - dn) / (h * h)
        })
        .collect()
}

/// Least-squares profile of both equations with the boundary values imposed.
fn strict_profile(p: &ParallelProblem, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len() - 2;
    let h = x[1] - x[0];
    let mut a = DMatrix::zeros(2 * n, n);
    let mut rhs = DVector::zeros(2 * n);
    let mut rows = |off: usize, mu: &dyn Fn(f64) -> f64, target: f64| {
        for k in 1..=n {
            let (mp, mm) = (mu(x[k] + 0.5 * h) / (h * h), mu(x[k] - 0.5 * h) / (h * h));
            let r = off + k - 1;
            rhs[r] = target;
            a[(r, k - 1)] = -(mp + mm);
            if k > 1 {
                a[(r, k - 2)] = mm;
            } else {
                rhs[r] -= mm * p.u_a;
            }
            if k < n {
                a[(r, k)] = mp;
            } else {
                rhs[r] -= mp * p.u_b;
            }
        }
    };
    rows(0, &|t| p.nu_e(t), p.c);
    rows(n, &|t| p.nu_o(t), 0.0);
    let sol = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::param("parallel", e.to_string()))?;
    let mut u = Vec::with_capacity(n + 2);
    u.push(p.u_a);
    u.extend(sol.iter());
    u.push(p.u_b);
    Ok(u)
}

pub fn solve_parallel(p: &ParallelProblem) -> Result<SymmetricSolution> {
    p.validate()?;
    let (a, b) = p.interval;
    let x = uniform(a, b, p.n);
    sample_density(&p.rho, &p.law, &x)?;
    let (u, slope, c1, incompatibility) = match p.mode {
        ParallelMode::PressureAbsorbed => {
            let (u, c1) = first_integral(p, &x);
            let slope = x.iter().map(|&t| (p.c * t + c1) / p.nu_e(t)).collect();
            (u, slope, c1, None)
        }
        ParallelMode::Strict => {
            let u = strict_profile(p, &x)?;
            let odd = flux_divergence(&x, &u, |t| p.nu_o(t));
            let inc = odd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let slope = centered_slope(&x, &u);
            // C₁ of μ_e u₁' = C x₂ + C₁, averaged along the profile
            let c1 = x.iter().zip(&slope).map(|(&t, &s)| p.nu_e(t) * s - p.c * t).sum::<f64>() / x.len() as f64;
            (u, slope, c1, Some(inc))
        }
    };
    let even = flux_divergence(&x, &u, |t| p.nu_e(t));
    let reduced = even.iter().fold(0.0f64, |m, v| m.max((v - p.c).abs()));
    // β = μ_o u₁' solves β' = ∂₂(μ_o∂₂u₁)
    let pressure = x.iter().zip(&slope).map(|(&t, &s)| p.nu_o(t) * s).collect();
    let mut sol = SymmetricSolution {
        kind: SymmetryKind::Parallel,
        nodes: x,
        profile: u,
        slope,
        pressure,
        c: p.c,
        c1,
        incompatibility,
        reduced_residual: reduced,
        iterations: 0,
        residual_history: Vec::new(),
        momentum_residual: 0.0,
    };
    sol.momentum_residual = verify_full_momentum(&sol, p)?;
    Ok(sol)
}

fn centered_slope(x: &[f64], u: &[f64]) -> Vec<f64> {
    let h = x[1] - x[0];
    let n = x.len();
    (0..n)
        .map(|k| match k {
            0 => (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h),
            k if k == n - 1 => (3.0 * u[k] - 4.0 * u[k - 1] + u[k - 2]) / (2.0 * h),
            k => (u[k + 1] - u[k - 1]) / (2.0 * h),
        })
        .collect()
}
