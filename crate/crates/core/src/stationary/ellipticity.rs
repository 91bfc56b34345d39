//! Principal-symbol quadratic forms of `L_{μe}` and `A_{μo}`.
//!
//! Multi-indices `|α| = 2` are ordered `(11, 12, 21, 22)`, with `∂₁₂` and `∂₂₁`
//! kept as separate entries.

use crate::viscosity::ViscosityLaw;

/// `Σ a^e_{αβ} ξ_α ξ_β` for
/// `L = ∂₁₁(μ∂₁₁) + ∂₂₂(μ∂₂₂) - ∂₁₁((μ-μ_*/2)∂₂₂) - ∂₂₂((μ-μ_*/2)∂₁₁)
///    + 2∂₁₂((μ-μ_*/2)∂₁₂) + 2∂₂₁(μ∂₂₁)`.
pub fn even_form(mu: f64, mu_star: f64, xi: &[f64; 4]) -> f64 {
    let m = mu - 0.5 * mu_star;
    let [x11, x12, x21, x22] = *xi;
    mu * x11 * x11 + mu * x22 * x22 - 2.0 * m * x11 * x22 + 2.0 * m * x12 * x12 + 2.0 * mu * x21 * x21
}

/// Coefficient matrix `a^o_{αβ}` of
/// `A = ∂₂₂(μ∂₁₂) + ∂₂₂(μ∂₂₁) - ∂₁₂(μ∂₂₂) - ∂₂₁(μ∂₂₂) - ∂₁₁(μ∂₁₂) - ∂₁₁(μ∂₂₁) + ∂₁₂(μ∂₁₁) + ∂₂₁(μ∂₁₁)`.
pub fn odd_coefficients(mu_o: f64) -> [[f64; 4]; 4] {
    let m = mu_o;
    [
        [0.0, -m, -m, 0.0],
        [m, 0.0, 0.0, -m],
        [m, 0.0, 0.0, -m],
        [0.0, m, m, 0.0],
    ]
}

/// `Σ a^o_{αβ} ξ_α ξ_β`.
pub fn odd_form(mu_o: f64, xi: &[f64; 4]) -> f64 {
    let a = odd_coefficients(mu_o);
    let mut s = 0.0;
    for (al, row) in a.iter().enumerate() {
        for (be, &c) in row.iter().enumerate() {
            s += c * (xi[al] * xi[be]);
        }
    }
    s
}

/// Extremes of the sampled quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityReport {
    /// `min Σ a^e ξξ / |ξ|²` over nonzero samples.
    pub min_quotient: f64,
    /// `max Σ a^e ξξ / |ξ|²` over nonzero samples.
    pub max_quotient: f64,
    /// `max |Σ a^o ξξ|`.
    pub max_odd: f64,
    /// `μ_*/2`
    pub lower: f64,
    /// `2μ^*`
    pub upper: f64,
    pub samples: usize,
}

impl EllipticityReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_quotient >= self.lower - tol && self.max_quotient <= self.upper + tol && self.max_odd <= 1e-12
    }
}

/// Evaluate both forms at `μ_e = ν_e(ρ)`, `μ_o = ν_o(ρ)` for every sampled pair.
pub fn ellipticity_check(law: &ViscosityLaw, rho_samples: &[f64], xi_samples: &[[f64; 4]]) -> EllipticityReport {
    let mut r = EllipticityReport {
        min_quotient: f64::INFINITY,
        max_quotient: f64::NEG_INFINITY,
        max_odd: 0.0,
        lower: 0.5 * law.mu_star(),
        upper: 2.0 * law.mu_upper(),
        samples: 0,
    };
    for &rho in rho_samples {
        let (me, mo) = (law.nu_e().eval(rho), law.nu_o().eval(rho));
        for xi in xi_samples {
            r.samples += 1;
            r.max_odd = r.max_odd.max(odd_form(mo, xi).abs());
            let n2: f64 = xi.iter().map(|v| v * v).sum();
            if n2 > 0.0 {
                let q = even_form(me, law.mu_star(), xi) / n2;
                r.min_quotient = r.min_quotient.min(q);
                r.max_quotient = r.max_quotient.max(q);
            }
        }
    }
    r
}
