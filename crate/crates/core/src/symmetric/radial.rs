//! Radial flow `u = h(θ)/r e_r`.
//!
//! The azimuthal component fixes `π = (2μ_e h + μ_o h' - C/2)/r²` and the
//! radial one reduces to
//! `F(h) = ρh² + (μ_e h')' + 4μ_e h - 2(μ_o h)' + 2μ_o h' - C = 0`,
//! discretized by Fourier collocation on `θ_k = 2πk/n`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{sample_density, verify_full_momentum, FlowProblem, Profile, SymmetricSolution, SymmetryKind};
use crate::error::{Error, Result};
use crate::viscosity::ViscosityLaw;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub rho: Profile,
    pub law: ViscosityLaw,
    pub c: f64,
    /// Number of collocation nodes, a power of two `>= 32`.
    pub collocation_n: usize,
}

impl FlowProblem for RadialProblem {
    fn law(&self) -> &ViscosityLaw {
        &self.law
    }
    fn density(&self) -> &Profile {
        &self.rho
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 32 || !n.is_power_of_two() {
        return Err(Error::param("collocation_n", format!("{n} must be a power of two >= 32")));
    }
    Ok(())
}

/// Fourier differentiation matrix on `n` equispaced nodes (`n` even).
fn diff_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            let d = j as f64 - k as f64;
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            0.5 * sign / (d * PI / n as f64).tan()
        }
    })
}

#[cfg(test)]
pub(super) fn diff_matrix_for_tests(n: usize) -> DMatrix<f64> {
    diff_matrix(n)
}

/// Collocated coefficients of the radial equation.
struct Collocation {
    d: DMatrix<f64>,
    rho: DVector<f64>,
    me: DVector<f64>,
    mo: DVector<f64>,
    c: f64,
}

impl Collocation {
    fn new(rho: Vec<f64>, me: Vec<f64>, mo: Vec<f64>, c: f64) -> Self {
        let n = rho.len();
        Self {
            d: diff_matrix(n),
            rho: DVector::from_vec(rho),
            me: DVector::from_vec(me),
            mo: DVector::from_vec(mo),
            c,
        }
    }

    fn nodes(&self) -> Vec<f64> {
        let n = self.rho.len();
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }

    fn residual(&self, h: &DVector<f64>) -> DVector<f64> {
        let dh = &self.d * h;
        let shear = &self.d * self.me.component_mul(&dh);
        let odd = &self.d * self.mo.component_mul(h);
        let mut f = self.rho.component_mul(&h.component_mul(h)) + shear + 4.0 * self.me.component_mul(h) - 2.0 * odd
            + 2.0 * self.mo.component_mul(&dh);
        f.add_scalar_mut(-self.c);
        f
    }

    fn jacobian(&self, h: &DVector<f64>) -> DMatrix<f64> {
        let d = &self.d;
        let mut j = d * DMatrix::from_diagonal(&self.me) * d;
        j -= 2.0 * d * DMatrix::from_diagonal(&self.mo);
        j += 2.0 * DMatrix::from_diagonal(&self.mo) * d;
        for k in 0..h.len() {
            j[(k, k)] += 2.0 * self.rho[k] * h[k] + 4.0 * self.me[k];
        }
        j
    }

    /// Roots of `ρ̄h² + 4μ̄_e h = C`, larger first, or the vertex when there is none.
    fn initial_guesses(&self) -> Vec<f64> {
        let (r, m) = (self.rho.mean(), self.me.mean());
        let disc = 16.0 * m * m + 4.0 * r * self.c;
        if disc > 0.0 {
            vec![(-4.0 * m + disc.sqrt()) / (2.0 * r), (-4.0 * m - disc.sqrt()) / (2.0 * r)]
        } else {
            vec![-2.0 * m / r]
        }
    }

    fn initial_guess(&self) -> f64 {
        self.initial_guesses()[0]
    }

    /// Damped Newton from each constant guess in turn; `(h, sup-norm history)`.
    fn newton(&self) -> Result<(DVector<f64>, Vec<f64>)> {
        let mut last = Error::NewtonNotConverged {
            iterations: 0,
            residual: f64::NAN,
        };
        for h0 in self.initial_guesses() {
            match self.newton_from(h0) {
                Ok(out) => return Ok(out),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn newton_from(&self, h0: f64) -> Result<(DVector<f64>, Vec<f64>)> {
        let mut h = DVector::from_element(self.rho.len(), h0);
        let mut f = self.residual(&h);
        let mut history = vec![f.amax()];
        for _ in 0..NEWTON_MAX_ITER {
            let norm = *history.last().expect("nonempty");
            if norm <= NEWTON_TOL {
                return Ok((h, history));
            }
            if !norm.is_finite() {
                break;
            }
            let step = self.jacobian(&h).lu().solve(&f).ok_or(Error::SingularMatrix(0))?;
            // halve the step until the residual decreases
            let f2 = f.norm();
            let mut t = 1.0;
            loop {
                let trial = &h - t * &step;
                let ft = self.residual(&trial);
                if ft.norm() < f2 || t < 1e-4 {
                    h = trial;
                    f = ft;
                    break;
                }
                t *= 0.5;
            }
            history.push(f.amax());
        }
        Err(Error::NewtonNotConverged {
            iterations: history.len() - 1,
            residual: *history.last().unwrap_or(&f64::NAN),
        })
    }

    /// `|h|_{H¹}` of the periodic piecewise-linear interpolant. The spectral
    /// derivative would miss the sawtooth mode `(-1)^k`, which lies in the kernel of `D`.
    fn h1_seminorm(&self, h: &DVector<f64>) -> f64 {
        let n = h.len();
        let dt = 2.0 * PI / n as f64;
        let sum: f64 = (0..n).map(|k| (h[(k + 1) % n] - h[k]).powi(2)).sum();
        (sum / dt).sqrt()
    }
}

pub fn solve_radial(p: &RadialProblem) -> Result<SymmetricSolution> {
    check_n(p.collocation_n)?;
    if !p.c.is_finite() {
        return Err(Error::param("c", "must be finite"));
    }
    let n = p.collocation_n;
    let theta: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let rho = sample_density(&p.rho, &p.law, &theta)?;
    let me = rho.iter().map(|&r| p.law.nu_e().eval(r)).collect();
    let mo = rho.iter().map(|&r| p.law.nu_o().eval(r)).collect();
    let col = Collocation::new(rho, me, mo, p.c);
    let (h, history) = col.newton()?;
    let dh = &col.d * &h;
    let pressure = (0..n).map(|k| 2.0 * col.me[k] * h[k] + col.mo[k] * dh[k] - 0.5 * p.c).collect();
    let mut sol = SymmetricSolution {
        kind: SymmetryKind::Radial,
        nodes: col.nodes(),
        profile: h.iter().copied().collect(),
        slope: dh.iter().copied().collect(),
        pressure,
        c: p.c,
        c1: 0.0,
        incompatibility: None,
        reduced_residual: *history.last().expect("at least one residual"),
        iterations: history.len() - 1,
        residual_history: history,
        momentum_residual: 0.0,
    };
    sol.momentum_residual = verify_full_momentum(&sol, p)?;
    Ok(sol)
}

/// Setup of the vanishing-shear experiment.
#[derive(Debug, Clone)]
pub struct NonexistenceConfig {
    /// `μ_o` on `[0, π)` and `[π, 2π)`.
    pub mu_o: (f64, f64),
    /// `ρ` on the two halves; `(1, 2)` is the pullback under `ν_o(ρ) = ρ`.
    pub rho: (f64, f64),
    /// Constant shear viscosity, `0` for the degenerate case.
    pub mu_e: f64,
    pub c: f64,
    pub levels: Vec<usize>,
    /// Hold `h(π) = 0` and solve for the remaining nodes.
    pub pin_pi: bool,
    pub max_iter: usize,
}

impl Default for NonexistenceConfig {
    fn default() -> Self {
        Self {
            mu_o: (1.0, 2.0),
            rho: (1.0, 2.0),
            mu_e: 0.0,
            c: 1.0,
            levels: vec![64, 128, 256, 512],
            pin_pi: false,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonexistenceRow {
    pub n: usize,
    /// Sup norm of `F` at the best iterate.
    pub residual: f64,
    pub h1_seminorm: f64,
    pub iterations: usize,
    /// Whether `‖F‖∞ <= 1e-10` was reached.
    pub converged: bool,
    pub profile: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonexistenceReport {
    pub rows: Vec<NonexistenceRow>,
    /// `|h|_{H¹}` ratios between consecutive levels.
    pub growth: Vec<f64>,
    /// Residual of each level over the coarsest one.
    pub stagnation: Vec<f64>,
    /// H¹ growth `>= 2` at every refinement, or residual `>= 0.5` of the coarsest at every level.
    pub indicator: bool,
}

/// Trigonometric interpolation from `n` equispaced nodes onto `2n`, with the
/// Nyquist mode split symmetrically.
fn refine_matrix(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, n, |j, k| {
        let x = PI * (j as f64 - 2.0 * k as f64) / n as f64;
        if j == 2 * k {
            1.0
        } else if j % 2 == 0 {
            0.0
        } else {
            (0.5 * n as f64 * x).sin() / (n as f64 * (0.5 * x).tan())
        }
    })
}

/// Residual of the `n`-node interpolant sampled on `2n` nodes.
struct Oversampled {
    fine: Collocation,
    e: DMatrix<f64>,
}

impl Oversampled {
    fn residual(&self, h: &DVector<f64>) -> DVector<f64> {
        self.fine.residual(&(&self.e * h))
    }
    fn jacobian(&self, h: &DVector<f64>) -> DMatrix<f64> {
        self.fine.jacobian(&(&self.e * h)) * &self.e
    }
}

/// Levenberg-Marquardt on `‖F‖²` over the free nodes; returns the best iterate.
fn least_squares(ls: &Oversampled, h0: DVector<f64>, free: &[usize], max_iter: usize) -> (DVector<f64>, f64, usize) {
    let mut h = h0;
    let sq = |h: &DVector<f64>| ls.residual(h).norm_squared();
    let mut cost = sq(&h);
    let mut lambda = 1e-3;
    let mut it = 0;
    while it < max_iter {
        let f = ls.residual(&h);
        if f.amax() <= NEWTON_TOL {
            break;
        }
        it += 1;
        let j = ls.jacobian(&h).select_columns(free);
        let jt = j.transpose();
        let g = &jt * &f;
        let mut a = &jt * &j;
        let diag: Vec<f64> = (0..free.len()).map(|i| a[(i, i)].max(1e-12)).collect();
        let mut improved = false;
        for _ in 0..20 {
            for (i, &dg) in diag.iter().enumerate() {
                a[(i, i)] += lambda * dg;
            }
            let step = a.clone().lu().solve(&g);
            for (i, &dg) in diag.iter().enumerate() {
                a[(i, i)] -= lambda * dg;
            }
            if let Some(step) = step {
                let mut trial = h.clone();
                for (i, &k) in free.iter().enumerate() {
                    trial[k] -= step[i];
                }
                let c = sq(&trial);
                if c < cost {
                    h = trial;
                    cost = c;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let r = ls.residual(&h).amax();
    (h, r, it)
}

/// Periodic linear interpolation of `coarse` onto `n` equispaced nodes.
fn prolong(coarse: &[f64], n: usize) -> DVector<f64> {
    let m = coarse.len();
    DVector::from_fn(n, |k, _| {
        let x = k as f64 * m as f64 / n as f64;
        let i = x.floor() as usize;
        let w = x - i as f64;
        (1.0 - w) * coarse[i % m] + w * coarse[(i + 1) % m]
    })
}

/// Collocation study of the radial equation with piecewise constant `μ_o` and `ρ`.
///
/// For `μ_e = 0` the equation has no `H¹` solution when `μ_o` jumps, and the
/// least-squares iterates show it: the residual stalls or `|h|_{H¹}` blows up
/// under refinement. For `μ_e > 0` each level is solved by Newton instead.
pub fn radial_nonexistence_demo(cfg: &NonexistenceConfig) -> Result<NonexistenceReport> {
    if !(cfg.mu_e >= 0.0 && cfg.mu_e.is_finite()) {
        return Err(Error::param("mu_e", format!("{} must be >= 0", cfg.mu_e)));
    }
    if cfg.rho.0 <= 0.0 || cfg.rho.1 <= 0.0 {
        return Err(Error::param("rho", "densities must be positive"));
    }
    if cfg.levels.is_empty() {
        return Err(Error::param("levels", "need at least one level"));
    }
    let mut rows: Vec<NonexistenceRow> = Vec::with_capacity(cfg.levels.len());
    for &n in &cfg.levels {
        check_n(n)?;
        let half = |m: usize, a: f64, b: f64| -> Vec<f64> { (0..m).map(|k| if 2 * k < m { a } else { b }).collect() };
        let col = |m: usize| Collocation::new(half(m, cfg.rho.0, cfg.rho.1), vec![cfg.mu_e; m], half(m, cfg.mu_o.0, cfg.mu_o.1), cfg.c);
        let coarse = col(n);
        let newton = if cfg.mu_e > 0.0 && !cfg.pin_pi { coarse.newton().ok() } else { None };
        let (h, residual, iterations) = match newton {
            Some((h, hist)) => (h, *hist.last().expect("nonempty"), hist.len() - 1),
            None => {
                let ls = Oversampled {
                    fine: col(2 * n),
                    e: refine_matrix(n),
                };
                // continue the coarser iterate so every level follows the same branch
                let mut h0 = match rows.last() {
                    Some(prev) => prolong(&prev.profile, n),
                    None => DVector::from_element(n, coarse.initial_guess()),
                };
                let free: Vec<usize> = (0..n).filter(|&k| !(cfg.pin_pi && k == n / 2)).collect();
                if cfg.pin_pi {
                    h0[n / 2] = 0.0;
                }
                least_squares(&ls, h0, &free, cfg.max_iter)
            }
        };
        rows.push(NonexistenceRow {
            n,
            residual,
            h1_seminorm: coarse.h1_seminorm(&h),
            iterations,
            converged: residual <= NEWTON_TOL,
            profile: h.iter().copied().collect(),
        });
    }
    let growth: Vec<f64> = rows.windows(2).map(|w| w[1].h1_seminorm / w[0].h1_seminorm).collect();
    let r0 = rows[0].residual;
    let stagnation: Vec<f64> = rows.iter().map(|r| if r0 > 0.0 { r.residual / r0 } else { 0.0 }).collect();
    let grows = !growth.is_empty() && growth.iter().all(|&g| g >= 2.0);
    let stalls = rows.iter().all(|r| !r.converged) && stagnation.iter().all(|&s| s >= 0.5);
    Ok(NonexistenceReport {
        rows,
        growth,
        stagnation,
        indicator: grows || stalls,
    })
}
