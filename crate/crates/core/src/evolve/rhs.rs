//! Momentum right-hand side in conservative form.

use num_complex::Complex64;

use crate::field::ops::velocity_gradient_raw;
use crate::field::spectral::{self, Wavenumbers};
use crate::field::Grid2D;
use crate::viscosity::{strains_from_gradient, ViscosityLaw};

/// Pointwise viscosities and strains of one velocity/density pair.
pub(crate) struct Viscous {
    pub mu_e: Vec<f64>,
    pub mu_o: Vec<f64>,
    pub s11: Vec<f64>,
    pub s12: Vec<f64>,
    pub s22: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Viscous {
    pub fn new(grid: &Grid2D, law: &ViscosityLaw, rho: &[f64], u1: &[f64], u2: &[f64]) -> Self {
        let s = strains_from_gradient(&velocity_gradient_raw(grid, u1, u2));
        Self {
            mu_e: rho.iter().map(|&r| law.nu_e().eval(r)).collect(),
            mu_o: rho.iter().map(|&r| law.nu_o().eval(r)).collect(),
            s11: s.s11,
            s12: s.s12,
            s22: s.s22,
            a: s.a,
            b: s.b,
        }
    }

    /// `∫ μ_e |∇u + ∇ᵀu|²` by grid quadrature.
    pub fn dissipation(&self, grid: &Grid2D) -> f64 {
        let mut sum = 0.0;
        for k in 0..self.mu_e.len() {
            let f = self.s11[k] * self.s11[k] + 2.0 * self.s12[k] * self.s12[k] + self.s22[k] * self.s22[k];
            sum += self.mu_e[k] * f;
        }
        sum * grid.cell_area()
    }
}

/// `-div(ρu⊗u) + div(μ_e S) + div(μ_o S°) + ρ f`, with every mode above
/// the 2/3 cutoff removed.
pub(crate) fn momentum_rhs_raw(
    grid: &Grid2D,
    law: &ViscosityLaw,
    rho: &[f64],
    u1: &[f64],
    u2: &[f64],
    force: Option<(&[f64], &[f64])>,
) -> (Vec<f64>, Vec<f64>) {
    let v = Viscous::new(grid, law, rho, u1, u2);
    let n = rho.len();
    let mut t11 = Vec::with_capacity(n);
    let mut t12 = Vec::with_capacity(n);
    let mut t22 = Vec::with_capacity(n);
    for k in 0..n {
        let r = rho[k];
        t11.push(-r * u1[k] * u1[k] + v.mu_e[k] * v.s11[k] - v.mu_o[k] * v.a[k]);
        t12.push(-r * u1[k] * u2[k] + v.mu_e[k] * v.s12[k] + v.mu_o[k] * v.b[k]);
        t22.push(-r * u2[k] * u2[k] + v.mu_e[k] * v.s22[k] + v.mu_o[k] * v.a[k]);
    }
    let (f11, f12) = spectral::forward_pair(grid, &t11, &t12);
    let f22 = spectral::forward(grid, &t22);
    let ff = force.map(|(f1, f2)| {
        let g1: Vec<f64> = f1.iter().zip(rho).map(|(a, r)| a * r).collect();
        let g2: Vec<f64> = f2.iter().zip(rho).map(|(a, r)| a * r).collect();
        spectral::forward_pair(grid, &g1, &g2)
    });
    let wn = Wavenumbers::new(grid);
    let i = Complex64::new(0.0, 1.0);
    let n2 = grid.n2();
    let mut r1 = vec![Complex64::default(); n];
    let mut r2 = vec![Complex64::default(); n];
    for a in 0..grid.n1() {
        for b in 0..n2 {
            let k = a * n2 + b;
            let (k1, k2) = (wn.k1[a], wn.k2[b]);
            r1[k] = i * (k1 * f11[k] + k2 * f12[k]);
            r2[k] = i * (k1 * f12[k] + k2 * f22[k]);
            if let Some((g1, g2)) = &ff {
                r1[k] += g1[k];
                r2[k] += g2[k];
            }
        }
    }
    let c = grid.dealias_cutoff();
    spectral::cut_modes(grid, &mut r1, c, c);
    spectral::cut_modes(grid, &mut r2, c, c);
    spectral::inverse_pair(grid, &r1, &r2)
}
