//! Residual of `div(ρu⊗u) - div σ + ∇π = 0` by centered differences on a
//! logically rectangular grid: a strip `(s, t) = (x₂, x₁)` or an annulus
//! `(s, t) = (r, θ)`, periodic in `θ`.

use std::f64::consts::PI;

use super::{sample_density, FlowProblem, SymmetricSolution, SymmetryKind};
use crate::error::Result;

/// Nodal data on the verification grid, indexed `[k * nt + l]`.
struct Sampled {
    s: Vec<f64>,
    t: Vec<f64>,
    annulus: bool,
    u1: Vec<f64>,
    u2: Vec<f64>,
    rho: Vec<f64>,
    me: Vec<f64>,
    mo: Vec<f64>,
    pi: Vec<f64>,
    /// `∂_t π` not captured by the samples (the `-Cθ` part of the concentric pressure).
    winding: f64,
}

impl Sampled {
    fn nt(&self) -> usize {
        self.t.len()
    }

    /// `(∂₁f, ∂₂f)` at node `(k, l)` from centered differences of `f`, plus `extra` on `∂_t`.
    fn grad(&self, f: &[f64], k: usize, l: usize, extra: f64) -> (f64, f64) {
        let nt = self.nt();
        let ds = self.s[1] - self.s[0];
        let dt = self.t[1] - self.t[0];
        let (lm, lp) = if self.annulus {
            ((l + nt - 1) % nt, (l + 1) % nt)
        } else {
            (l - 1, l + 1)
        };
        let fs = (f[(k + 1) * nt + l] - f[(k - 1) * nt + l]) / (2.0 * ds);
        let ft = (f[k * nt + lp] - f[k * nt + lm]) / (2.0 * dt) + extra;
        if self.annulus {
            let (r, th) = (self.s[k], self.t[l]);
            let (c, s) = (th.cos(), th.sin());
            (c * fs - s / r * ft, s * fs + c / r * ft)
        } else {
            (ft, fs)
        }
    }

    fn t_range(&self, margin: usize) -> std::ops::Range<usize> {
        if self.annulus {
            0..self.nt()
        } else {
            margin..self.nt() - margin
        }
    }

    fn residual(&self) -> f64 {
        let (ns, nt) = (self.s.len(), self.nt());
        // momentum flux ρu⊗u - σ, rows (11, 12, 21, 22)
        let mut flux = vec![[0.0; 4]; ns * nt];
        for k in 1..ns - 1 {
            for l in self.t_range(1) {
                let i = k * nt + l;
                let (a11, a21) = self.grad(&self.u1, k, l, 0.0);
                let (a12, a22) = self.grad(&self.u2, k, l, 0.0);
                // a_ij = ∂_i u_j
                let shear = a12 + a21;
                let b = a11 - a22;
                let (me, mo) = (self.me[i], self.mo[i]);
                let s11 = me * 2.0 * a11 - mo * shear;
                let s12 = me * shear + mo * b;
                let s22 = me * 2.0 * a22 + mo * shear;
                let (u1, u2, r) = (self.u1[i], self.u2[i], self.rho[i]);
                flux[i] = [r * u1 * u1 - s11, r * u1 * u2 - s12, r * u2 * u1 - s12, r * u2 * u2 - s22];
            }
        }
        let col = |c: usize| flux.iter().map(|f| f[c]).collect::<Vec<f64>>();
        let (f11, f12, f21, f22) = (col(0), col(1), col(2), col(3));
        let mut worst = 0.0f64;
        for k in 2..ns - 2 {
            for l in self.t_range(2) {
                let (d11, _) = self.grad(&f11, k, l, 0.0);
                let (_, d12) = self.grad(&f12, k, l, 0.0);
                let (d21, _) = self.grad(&f21, k, l, 0.0);
                let (_, d22) = self.grad(&f22, k, l, 0.0);
                let (p1, p2) = self.grad(&self.pi, k, l, self.winding);
                worst = worst.max((d11 + d12 + p1).abs()).max((d21 + d22 + p2).abs());
            }
        }
        worst
    }
}

/// Radial extent of the verification annulus for radial flows.
const RADIAL_ANNULUS: (f64, f64) = (1.0, 2.0);
/// Grid lines across the symmetry direction.
const STRIP_LINES: usize = 5;
/// Verification nodes in `θ` per collocation node of a radial profile.
const RADIAL_REFINE: usize = 4;

/// Trigonometric interpolant of periodic nodal values and its derivative at `x`.
fn trig_interp(values: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let m = n / 2;
    let w = 2.0 * PI / n as f64;
    let coef: Vec<(f64, f64)> = (0..=m)
        .map(|k| {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let (s, c) = (w * (j * k) as f64).sin_cos();
                a += v * c;
                b += v * s;
            }
            let scale = if k == 0 || k == m { 1.0 } else { 2.0 };
            (scale * a / n as f64, scale * b / n as f64)
        })
        .collect();
    x.iter()
        .map(|&t| {
            let (mut p, mut dp) = (0.0, 0.0);
            for (k, &(a, b)) in coef.iter().enumerate() {
                let kf = k as f64;
                let (s, c) = (kf * t).sin_cos();
                p += a * c + b * s;
                dp += kf * (b * c - a * s);
            }
            (p, dp)
        })
        .unzip()
}

/// Sup norm of the full stationary momentum residual with the reconstructed
/// pressure, evaluated two grid lines away from the edges of the grid.
pub fn verify_full_momentum(sol: &SymmetricSolution, problem: &dyn FlowProblem) -> Result<f64> {
    let law = problem.law();
    let mu = |rho: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (rho.iter().map(|&r| law.nu_e().eval(r)).collect(), rho.iter().map(|&r| law.nu_o().eval(r)).collect())
    };
    let s = &sol.nodes;
    let sampled = match sol.kind {
        SymmetryKind::Parallel => {
            let ds = s[1] - s[0];
            let t: Vec<f64> = (0..STRIP_LINES).map(|l| l as f64 * ds).collect();
            let rho1 = sample_density(problem.density(), law, s)?;
            let spread = |v: &[f64]| -> Vec<f64> { v.iter().flat_map(|&x| std::iter::repeat(x).take(t.len())).collect() };
            let rho = spread(&rho1);
            let (me, mo) = mu(&rho);
            let pi = s
                .iter()
                .enumerate()
                .flat_map(|(k, _)| t.iter().map(move |&x1| sol.c * x1 + sol.pressure[k]))
                .collect();
            Sampled {
                u1: spread(&sol.profile),
                u2: vec![0.0; rho.len()],
                rho,
                me,
                mo,
                pi,
                winding: 0.0,
                s: s.clone(),
                t,
                annulus: false,
            }
        }
        SymmetryKind::Concentric => {
            // arc length per θ line about the radial spacing at the outer radius
            let ds = s[1] - s[0];
            let nt = ((2.0 * PI * s[s.len() - 1] / ds / 4.0).ceil() as usize * 4).max(64);
            let t: Vec<f64> = (0..nt).map(|l| 2.0 * PI * l as f64 / nt as f64).collect();
            let rho1 = sample_density(problem.density(), law, s)?;
            let mut rho = Vec::new();
            let (mut u1, mut u2, mut pi) = (Vec::new(), Vec::new(), Vec::new());
            for (k, &r) in s.iter().enumerate() {
                for &th in &t {
                    // u = r g e_θ, e_θ = (sin θ, -cos θ)
                    u1.push(r * sol.profile[k] * th.sin());
                    u2.push(-r * sol.profile[k] * th.cos());
                    rho.push(rho1[k]);
                    pi.push(sol.pressure[k]);
                }
            }
            let (me, mo) = mu(&rho);
            Sampled {
                s: s.clone(),
                t,
                annulus: true,
                u1,
                u2,
                rho,
                me,
                mo,
                pi,
                winding: -sol.c,
            }
        }
        SymmetryKind::Radial => {
            let n = s.len();
            let nt = RADIAL_REFINE * n;
            let nr = n / 2;
            let t: Vec<f64> = (0..nt).map(|l| 2.0 * PI * l as f64 / nt as f64).collect();
            let r: Vec<f64> = (0..=nr)
                .map(|k| RADIAL_ANNULUS.0 + (RADIAL_ANNULUS.1 - RADIAL_ANNULUS.0) * k as f64 / nr as f64)
                .collect();
            let (h, dh) = trig_interp(&sol.profile, &t);
            let rho1 = sample_density(problem.density(), law, &t)?;
            let (me1, mo1) = mu(&rho1);
            let p1: Vec<f64> = (0..nt).map(|l| 2.0 * me1[l] * h[l] + mo1[l] * dh[l] - 0.5 * sol.c).collect();
            let mut rho = Vec::new();
            let (mut u1, mut u2, mut pi) = (Vec::new(), Vec::new(), Vec::new());
            for &rr in &r {
                for (l, &th) in t.iter().enumerate() {
                    u1.push(h[l] / rr * th.cos());
                    u2.push(h[l] / rr * th.sin());
                    rho.push(rho1[l]);
                    pi.push(p1[l] / (rr * rr));
                }
            }
            let (me, mo) = mu(&rho);
            Sampled {
                s: r,
                t,
                annulus: true,
                u1,
                u2,
                rho,
                me,
                mo,
                pi,
                winding: 0.0,
            }
        }
    };
    Ok(sampled.residual())
}
