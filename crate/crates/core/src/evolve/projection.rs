//! Variable-density pressure projection.

use crate::error::{Error, Result};
use crate::field::ops::{div_raw, grad_raw, inverse_laplacian_raw};
use crate::field::Grid2D;

/// `-div((1/ρ) ∇·)` with a `ρ̄ (-Δ)⁻¹` preconditioner.
pub(crate) struct DensityPoisson<'a> {
    grid: &'a Grid2D,
    inv_rho: Vec<f64>,
    rho_mean: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

impl<'a> DensityPoisson<'a> {
    pub fn new(grid: &'a Grid2D, rho: &[f64]) -> Self {
        Self {
            grid,
            inv_rho: rho.iter().map(|r| 1.0 / r).collect(),
            rho_mean: rho.iter().sum::<f64>() / rho.len() as f64,
        }
    }

    pub fn inv_rho(&self) -> &[f64] {
        &self.inv_rho
    }

    /// `(1/ρ) ∇q`
    pub fn flux(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut g1, mut g2) = grad_raw(self.grid, q);
        for k in 0..g1.len() {
            g1[k] *= self.inv_rho[k];
            g2[k] *= self.inv_rho[k];
        }
        (g1, g2)
    }

    fn apply(&self, q: &[f64]) -> Vec<f64> {
        let (g1, g2) = self.flux(q);
        div_raw(self.grid, &g1, &g2).into_iter().map(|v| -v).collect()
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        inverse_laplacian_raw(self.grid, r).into_iter().map(|v| -self.rho_mean * v).collect()
    }

    /// Mean-zero `q` with `div((1/ρ)∇q) = s`, starting from `guess`.
    pub fn solve(&self, s: &[f64], guess: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
        let mut b: Vec<f64> = s.iter().map(|v| -v).collect();
        remove_mean(&mut b);
        let bnorm = dot(&b, &b).sqrt();
        if bnorm == 0.0 {
            return Ok((vec![0.0; b.len()], 0));
        }
        let mut x = guess.to_vec();
        remove_mean(&mut x);
        let ax = self.apply(&x);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let mut rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            return Ok((x, 0));
        }
        let mut z = self.precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for it in 1..=max_iter {
            let ap = self.apply(&p);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for k in 0..x.len() {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            rnorm = dot(&r, &r).sqrt();
            if rnorm <= tol * bnorm {
                remove_mean(&mut x);
                return Ok((x, it));
            }
            z = self.precondition(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..p.len() {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::CgNotConverged {
            iterations: max_iter,
            residual: rnorm / bnorm,
        })
    }
}
