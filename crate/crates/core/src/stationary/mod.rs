//! Stationary flows of the form `(ρ, u) = (η(φ), ∇⊥φ)` on a rectangle.
//!
//! The stream function solves the clamped fourth-order problem
//! `(L_{μe} + A_{μo}) φ = -∇⊥·f + ∇⊥·div(η(φ)∇⊥φ⊗∇⊥φ)`, `φ = φ₀`, `∂φ/∂n = φ₁`,
//! which is discretized in weak form and solved by damped Picard iteration.

mod assemble;
mod band;
mod boundary;
mod domain;
mod ellipticity;
mod eta;
pub mod manufactured;

pub use assemble::{assemble_a, assemble_l, nonlinear_rhs, odd_bilinear, SparseOp};
pub use boundary::{boundary_data_from_g, BoundaryData, FLUX_TOL};
pub use domain::{NodeField, NodeVectorField, RectDomain};
pub use ellipticity::{ellipticity_check, even_form, odd_coefficients, odd_form, EllipticityReport};
pub use eta::EtaFunction;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::viscosity::{ScalarLaw, ViscosityLaw};
use assemble::{cell_jacobian, check_range, load_ext, perp_grad_nodes, Elimination, CELL};

/// Default Picard damping `θ`.
pub const DEFAULT_DAMPING: f64 = 0.7;
/// Default tolerance on the L² norm of the Picard update.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Data of the clamped stream-function problem.
#[derive(Debug, Clone)]
pub struct StationaryProblem {
    pub domain: RectDomain,
    pub law: ViscosityLaw,
    pub eta: EtaFunction,
    pub force: NodeVectorField,
    pub boundary: BoundaryData,
}

impl StationaryProblem {
    pub fn new(law: ViscosityLaw, eta: EtaFunction, force: NodeVectorField, boundary: BoundaryData) -> Result<Self> {
        let domain = *boundary.domain();
        if *force.domain() != domain {
            return Err(Error::GridMismatch);
        }
        force.c1.validate()?;
        force.c2.validate()?;
        if boundary.flux().abs() > FLUX_TOL {
            return Err(Error::NonzeroFlux(boundary.flux()));
        }
        Ok(Self {
            domain,
            law,
            eta,
            force,
            boundary,
        })
    }

    fn coefficients(&self, phi: &NodeField) -> Result<(NodeField, NodeField, NodeField)> {
        let rho = phi.map(|s| self.eta.eval(s));
        let mu_e = rho.map(|r| self.law.nu_e().eval(r));
        let mu_o = rho.map(|r| self.law.nu_o().eval(r));
        check_range(&mu_e, self.law.mu_star(), self.law.mu_upper())?;
        check_range(&mu_o, -self.law.mu_upper(), self.law.mu_upper())?;
        Ok((rho, mu_e, mu_o))
    }
}

/// Converged stream function with the derived density and velocity.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub phi: NodeField,
    pub rho: NodeField,
    pub u: NodeVectorField,
    pub iterations: usize,
    pub final_update_norm: f64,
    /// L² norm of every Picard update, in order.
    pub update_norms: Vec<f64>,
}

fn interior_l2(d: &RectDomain, v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() * d.h() * d.h()).sqrt()
}

/// Damped Picard iteration `φ^{k+1} = (1-θ)φ^k + θφ̂` where `φ̂` solves the
/// clamped linear problem with coefficients frozen at `η(φ^k)` and the
/// convective term evaluated at `φ^k`. Starts from `φ = φ₀` on the boundary
/// and 0 inside; stops once the update is at most `tol` in L².
pub fn picard_solve(problem: &StationaryProblem, damping: f64, tol: f64, max_iter: usize) -> Result<StationarySolution> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::param("damping", format!("{damping} must lie in (0, 1]")));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::param("tol/max_iter", "must be positive"));
    }
    let d = problem.domain;
    let bd = &problem.boundary;
    let elim = Elimination::new(bd);
    let mut phi = bd.impose(&NodeField::zeros(d));
    let mut x = vec![0.0; d.interior_len()];
    let mut norms = Vec::new();
    // with a constant profile the operator never changes
    let mut frozen = None;
    for it in 1..=max_iter {
        let (rho, mu_e, mu_o) = problem.coefficients(&phi)?;
        let rebuild = frozen.is_none() || !problem.eta.is_constant();
        if rebuild {
            let k = assemble::assemble_pair(&mu_e, &mu_o);
            let (band, c) = elim.reduce(&d, &k);
            frozen = Some((assemble::factor(band)?, c));
        }
        let (lu, c) = frozen.as_ref().expect("assembled above");
        let ext = bd.extend(phi.values());
        let mut b = c.clone();
        elim.fold(&load_ext(&d, &ext, rho.values(), Some(&problem.force)), &mut b);
        lu.solve(&mut b);
        let mut diff = Vec::with_capacity(x.len());
        for (xi, bi) in x.iter_mut().zip(&b) {
            let new = (1.0 - damping) * *xi + damping * bi;
            diff.push(new - *xi);
            *xi = new;
        }
        let mut v = phi.values().to_vec();
        for i in 1..=d.nx() {
            for j in 1..=d.ny() {
                v[d.node(i, j)] = x[d.unknown(i, j)];
            }
        }
        phi = NodeField::new(d, v)?;
        let upd = interior_l2(&d, &diff);
        norms.push(upd);
        if upd <= tol {
            let (rho, u) = recover_velocity(&phi, &problem.eta, bd)?;
            return Ok(StationarySolution {
                phi,
                rho,
                u,
                iterations: it,
                final_update_norm: upd,
                update_norms: norms,
            });
        }
    }
    Err(Error::PicardNotConverged {
        iterations: max_iter,
        last_update: *norms.last().expect("max_iter >= 1"),
    })
}

/// `ρ = η(φ)` and `u = ∇⊥φ = (-∂₂φ, ∂₁φ)` by centered differences, using the
/// ghost layer of `boundary` at boundary nodes.
pub fn recover_velocity(phi: &NodeField, eta: &EtaFunction, boundary: &BoundaryData) -> Result<(NodeField, NodeVectorField)> {
    let d = *phi.domain();
    if *boundary.domain() != d {
        return Err(Error::GridMismatch);
    }
    phi.validate()?;
    let (u1, u2) = perp_grad_nodes(&d, &boundary.extend(phi.values()));
    let u = NodeVectorField::new(NodeField::from_vec_unchecked(d, u1), NodeField::from_vec_unchecked(d, u2))?;
    Ok((phi.map(|s| eta.eval(s)), u))
}

/// Centered `div(ρ u)` at interior nodes (0 on the boundary); `ρ = 1` gives `div u`.
pub fn interior_divergence(rho: Option<&NodeField>, u: &NodeVectorField) -> NodeField {
    let d = *u.domain();
    let r = |i: usize, j: usize| rho.map_or(1.0, |f| f.get(i, j));
    let m1 = |i: usize, j: usize| r(i, j) * u.c1.get(i, j);
    let m2 = |i: usize, j: usize| r(i, j) * u.c2.get(i, j);
    let mut out = vec![0.0; d.len()];
    for i in 1..=d.nx() {
        for j in 1..=d.ny() {
            out[d.node(i, j)] = (m1(i + 1, j) - m1(i - 1, j) + m2(i, j + 1) - m2(i, j - 1)) / (2.0 * d.h());
        }
    }
    NodeField::from_vec_unchecked(d, out)
}

/// A test function for the weak form, with exact derivatives.
pub trait TestFunction: Sync {
    /// `(ψ, [∂₁ψ, ∂₂ψ], [∂₁₁ψ, ∂₁₂ψ, ∂₂₂ψ])` at `(x, y)`.
    fn jet(&self, x: f64, y: f64) -> (f64, [f64; 2], [f64; 3]);
}

/// `ψ = X(x/lx) Y(y/ly)` with `X(s) = s²(1-s)² cos(mπs)`, `Y(t) = t²(1-t)² cos(nπt)`;
/// vanishes with its gradient on the boundary of `[0, lx] x [0, ly]`.
#[derive(Debug, Clone, Copy)]
pub struct ClampedBump {
    pub lx: f64,
    pub ly: f64,
    pub m: u32,
    pub n: u32,
}

fn bump_1d(s: f64, k: u32) -> [f64; 3] {
    let w = k as f64 * std::f64::consts::PI;
    let p = [s * s * (1.0 - s).powi(2), 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s), 2.0 - 12.0 * s + 12.0 * s * s];
    let c = [(w * s).cos(), -w * (w * s).sin(), -w * w * (w * s).cos()];
    [p[0] * c[0], p[1] * c[0] + p[0] * c[1], p[2] * c[0] + 2.0 * p[1] * c[1] + p[0] * c[2]]
}

impl TestFunction for ClampedBump {
    fn jet(&self, x: f64, y: f64) -> (f64, [f64; 2], [f64; 3]) {
        let a = bump_1d(x / self.lx, self.m);
        let b = bump_1d(y / self.ly, self.n);
        let (sx, sy) = (1.0 / self.lx, 1.0 / self.ly);
        (
            a[0] * b[0],
            [a[1] * b[0] * sx, a[0] * b[1] * sy],
            [a[2] * b[0] * sx * sx, a[1] * b[1] * sx * sy, a[0] * b[2] * sy * sy],
        )
    }
}

/// Largest `|ψ| + |∇ψ|` on the boundary accepted for a test function.
pub const TEST_SUPPORT_TOL: f64 = 1e-10;

/// Max over the tests of `|a(φ, ψ) - ∫ η(φ)(∇⊥φ⊗∇⊥φ):∇∇⊥ψ - ∫ f·∇⊥ψ|`, where `a` is
/// the sum of the shear and odd integrals. Derivatives of `φ` are the discrete
/// ones, those of `ψ` exact; nodes use the trapezoidal rule, the compact mixed
/// derivative uses cell midpoints.
pub fn residual_weak_stationary(sol: &StationarySolution, problem: &StationaryProblem, tests: &[&dyn TestFunction]) -> Result<f64> {
    let d = problem.domain;
    if *sol.phi.domain() != d {
        return Err(Error::GridMismatch);
    }
    let bd = &problem.boundary;
    for t in tests {
        let mut m = 0.0f64;
        for &(i, j) in &bd.walk() {
            let (x, y) = d.point(i, j);
            let (v, g, _) = t.jet(x, y);
            m = m.max(v.abs() + g[0].abs() + g[1].abs());
        }
        if m > TEST_SUPPORT_TOL {
            return Err(Error::TestFunctionSupport(m));
        }
    }
    let ext = bd.extend(sol.phi.values());
    let (rho, mu_e, mu_o) = problem.coefficients(&sol.phi)?;
    let (da, _, dc) = assemble::second_derivatives(&d, &ext);
    let (u1, u2) = perp_grad_nodes(&d, &ext);
    let (f1, f2) = (problem.force.c1.values(), problem.force.c2.values());
    let h = d.h();
    let mut worst = 0.0f64;
    for t in tests {
        let mut r = 0.0;
        for i in 0..d.nx() + 2 {
            for j in 0..d.ny() + 2 {
                let k = d.node(i, j);
                let (x, y) = d.point(i, j);
                let (_, g, hs) = t.jet(x, y);
                let pa = hs[2] - hs[0];
                let mut s = mu_e.values()[k] * da[k] * pa;
                s -= rho.values()[k] * ((u2[k] * u2[k] - u1[k] * u1[k]) * hs[1] + u1[k] * u2[k] * (hs[0] - hs[2]));
                s -= -f1[k] * g[1] + f2[k] * g[0];
                r += d.weight(i, j) * s;
            }
        }
        let mut c = 0usize;
        for i in 0..d.nx() + 1 {
            for j in 0..d.ny() + 1 {
                let (x, y) = d.point(i, j);
                let (_, _, hs) = t.jet(x + 0.5 * h, y + 0.5 * h);
                let mu = 0.25 * (mu_e.get(i, j) + mu_e.get(i + 1, j) + mu_e.get(i, j + 1) + mu_e.get(i + 1, j + 1));
                r += h * h * mu * dc[c] * 2.0 * hs[1];
                c += 1;
                let gq = CELL.map(|(a, b)| {
                    let (x, y) = d.point(i + a, j + b);
                    t.jet(x, y).1
                });
                let gp = CELL.map(|(a, b)| {
                    let k = d.node(i + a, j + b);
                    [u2[k], -u1[k]]
                });
                let mo = 0.25 * CELL.iter().map(|&(a, b)| mu_o.get(i + a, j + b)).sum::<f64>();
                let jac = |m: usize| cell_jacobian(gq.map(|g| g[m]), gp.map(|g| g[m]));
                r -= 2.0 * mo * (jac(0) + jac(1));
            }
        }
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Discrete `(∫ |∇²φ|²)^{1/2}` (trapezoidal, ghost layer from `boundary`).
pub fn h2_seminorm(phi: &NodeField, boundary: &BoundaryData) -> f64 {
    let d = *phi.domain();
    let ext = boundary.extend(phi.values());
    let (p11, p22) = assemble::pure_second_derivatives(&d, &ext);
    let (_, db, _) = assemble::second_derivatives(&d, &ext);
    let mut s = 0.0;
    for i in 0..d.nx() + 2 {
        for j in 0..d.ny() + 2 {
            let k = d.node(i, j);
            let p12 = 0.5 * db[k];
            s += d.weight(i, j) * (p11[k] * p11[k] + 2.0 * p12 * p12 + p22[k] * p22[k]);
        }
    }
    s.sqrt()
}

/// One row of a stationary odd-viscosity sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarySweepRow {
    pub eps: f64,
    pub h2: f64,
    pub iterations: usize,
}

/// Solve with `ν_o^ε(ρ) = c₀ + ε sin ρ` for each `ε` (in parallel) and record
/// `‖φ^ε‖_{H²}`. The first row is the reference `ε = 0`.
pub fn odd_limit_sweep_stationary(problem: &StationaryProblem, eps_list: &[f64], c0: f64) -> Result<Vec<StationarySweepRow>> {
    let mut all = vec![0.0];
    all.extend_from_slice(eps_list);
    all.par_iter()
        .map(|&eps| {
            let nu_o = if eps == 0.0 { ScalarLaw::Const(c0) } else { ScalarLaw::Sine { base: c0, amp: eps } };
            let law = ViscosityLaw::new(
                problem.law.nu_e().clone(),
                nu_o,
                problem.law.mu_star(),
                problem.law.mu_upper(),
                *problem.law.bounds(),
            )?;
            let p = StationaryProblem { law, ..problem.clone() };
            let s = picard_solve(&p, DEFAULT_DAMPING, DEFAULT_TOL, 500)?;
            Ok(StationarySweepRow {
                eps,
                h2: h2_seminorm(&s.phi, &p.boundary),
                iterations: s.iterations,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
