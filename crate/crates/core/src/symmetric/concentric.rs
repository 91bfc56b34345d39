//! Concentric flow `u = r g(r) e_θ` in an annulus `r_in < r < r_out`.
//!
//! The azimuthal component gives `∂_r(r³μ_e∂_r g) = C r`, so
//! `g' = (C r²/2 + C₁)/(r³ν_e)`, and `π = -Cθ + β̃(r)` with
//! `β̃' = rρg² + ∂_r(μ_o r³ g')/r²`. The odd viscosity only enters `β̃`.

use super::{sample_density, uniform, verify_full_momentum, FlowProblem, Profile, SymmetricSolution, SymmetryKind};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate};
use crate::viscosity::ViscosityLaw;

const RULE_POINTS: usize = 6;

#[derive(Debug, Clone)]
pub struct ConcentricProblem {
    pub rho: Profile,
    pub law: ViscosityLaw,
    pub c: f64,
    /// Used unless `g_out` is given, in which case `C₁` is fitted to it.
    pub c1: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub g_in: f64,
    pub g_out: Option<f64>,
    /// Number of cells on `[r_in, r_out]`.
    pub n: usize,
}

impl FlowProblem for ConcentricProblem {
    fn law(&self) -> &ViscosityLaw {
        &self.law
    }
    fn density(&self) -> &Profile {
        &self.rho
    }
}

impl ConcentricProblem {
    fn validate(&self) -> Result<()> {
        if !(self.r_in.is_finite() && self.r_in > 0.0) {
            return Err(Error::param("r_in", format!("{} must be positive", self.r_in)));
        }
        if !(self.r_out.is_finite() && self.r_out > self.r_in) {
            return Err(Error::param("r_out", format!("{} must exceed r_in", self.r_out)));
        }
        if self.n < 8 {
            return Err(Error::param("n", format!("{} cells, need at least 8", self.n)));
        }
        for (name, v) in [("c", self.c), ("c1", self.c1), ("g_in", self.g_in), ("g_out", self.g_out.unwrap_or(0.0))] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }
    fn nu_e(&self, r: f64) -> f64 {
        self.law.nu_e().eval(self.rho.eval(r))
    }
    fn nu_o(&self, r: f64) -> f64 {
        self.law.nu_o().eval(self.rho.eval(r))
    }
}

pub fn solve_concentric(p: &ConcentricProblem) -> Result<SymmetricSolution> {
    p.validate()?;
    let r = uniform(p.r_in, p.r_out, p.n);
    let rho = sample_density(&p.rho, &p.law, &r)?;
    let rule = gauss_legendre(RULE_POINTS);
    // ∫ r⁻¹/ν_e and ∫ r⁻³/ν_e per cell
    let cells: Vec<(f64, f64)> = r
        .windows(2)
        .map(|w| {
            (
                integrate(&rule, w[0], w[1], |s| 1.0 / (s * p.nu_e(s))),
                integrate(&rule, w[0], w[1], |s| 1.0 / (s.powi(3) * p.nu_e(s))),
            )
        })
        .collect();
    let c1 = match p.g_out {
        Some(g_out) => {
            let i1: f64 = cells.iter().map(|c| c.0).sum();
            let i3: f64 = cells.iter().map(|c| c.1).sum();
            (g_out - p.g_in - 0.5 * p.c * i1) / i3
        }
        None => p.c1,
    };
    let mut g = Vec::with_capacity(r.len());
    g.push(p.g_in);
    for c in &cells {
        let last = *g.last().expect("nonempty");
        g.push(last + 0.5 * p.c * c.0 + c1 * c.1);
    }
    if let Some(g_out) = p.g_out {
        *g.last_mut().expect("nonempty") = g_out;
    }
    let slope: Vec<f64> = r.iter().map(|&s| (0.5 * p.c * s * s + c1) / (s.powi(3) * p.nu_e(s))).collect();
    // β̃ = μ_o r g' + ∫ (rρg² + 2μ_o g') dr, integrated by the trapezoidal rule
    let q: Vec<f64> = (0..r.len()).map(|k| r[k] * rho[k] * g[k] * g[k] + 2.0 * p.nu_o(r[k]) * slope[k]).collect();
    let mut pressure = Vec::with_capacity(r.len());
    let mut acc = 0.0;
    for k in 0..r.len() {
        if k > 0 {
            acc += 0.5 * (r[k] - r[k - 1]) * (q[k] + q[k - 1]);
        }
        pressure.push(acc + p.nu_o(r[k]) * r[k] * slope[k]);
    }
    // ∂_r(r³μ_e g') - C r at interior nodes, μ_e at the cell midpoints
    let h = r[1] - r[0];
    let reduced = (1..r.len() - 1)
        .map(|k| {
            let (rp, rm) = (r[k] + 0.5 * h, r[k] - 0.5 * h);
            let up = rp.powi(3) * p.nu_e(rp) * (g[k + 1] - g[k]) / h;
            let dn = rm.powi(3) * p.nu_e(rm) * (g[k] - g[k - 1]) / h;
            ((up - dn) / h - p.c * r[k]).abs()
        })
        .fold(0.0f64, f64::max);
    let mut sol = SymmetricSolution {
        kind: SymmetryKind::Concentric,
        nodes: r,
        profile: g,
        slope,
        pressure,
        c: p.c,
        c1,
        incompatibility: None,
        reduced_residual: reduced,
        iterations: 0,
        residual_history: Vec::new(),
        momentum_residual: 0.0,
    };
    sol.momentum_residual = verify_full_momentum(&sol, p)?;
    Ok(sol)
}
