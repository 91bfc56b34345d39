//! Time integration of the variable-density system on the periodic torus.
//!
//! One step advects the density semi-Lagrangianly, advances the momentum
//! `ρu` with Heun's method (each stage followed by a variable-density
//! projection against the new density) and truncates the velocity to the
//! configured Fourier modes.

mod advect;
mod projection;
mod rhs;
mod weak;

use std::sync::Arc;

use rayon::prelude::*;

pub use advect::{advect_density, ADVECT_DIV_TOL};
pub use weak::{residual_weak_momentum, TEST_DIV_TOL};

pub(crate) use advect::advect_raw;
pub(crate) use projection::DensityPoisson;
pub(crate) use rhs::{momentum_rhs_raw, Viscous};

use crate::error::{Error, Result};
use crate::field::ops::{cut_pair_raw, div_raw, divergence_raw_max, grad_raw};
use crate::field::{norms, Grid2D, ScalarField, VectorField};
use crate::viscosity::{DensityBounds, ScalarLaw, ViscosityLaw};

/// Largest admissible `|div u|` of initial data.
pub const INITIAL_DIV_TOL: f64 = 1e-10;
/// Largest admissible `|div u|` after a step.
pub const STATE_DIV_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub grid: Grid2D,
    /// Largest step; the run shrinks it to honour the stability limits.
    pub dt: f64,
    pub t_end: f64,
    /// Highest Fourier mode kept in the velocity.
    pub mode_cutoff: usize,
    pub cfl_limit: f64,
    pub law: ViscosityLaw,
    /// Spacing of stored states; `None` keeps only the initial and final state.
    pub output_interval: Option<f64>,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl EvolveConfig {
    pub fn new(grid: Grid2D, dt: f64, t_end: f64, law: ViscosityLaw) -> Result<Self> {
        let c = Self {
            grid,
            dt,
            t_end,
            mode_cutoff: grid.dealias_cutoff(),
            cfl_limit: 0.5,
            law,
            output_interval: None,
            cg_tol: 1e-10,
            cg_max_iter: 500,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn bounds(&self) -> &DensityBounds {
        self.law.bounds()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::param("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::param("t_end", format!("{} must be positive", self.t_end)));
        }
        if self.mode_cutoff > self.grid.dealias_cutoff() {
            return Err(Error::param(
                "mode_cutoff",
                format!("{} exceeds the dealiasing limit {}", self.mode_cutoff, self.grid.dealias_cutoff()),
            ));
        }
        if !(self.cfl_limit > 0.0 && self.cfl_limit <= 1.0) {
            return Err(Error::param("cfl_limit", format!("{} must lie in (0, 1]", self.cfl_limit)));
        }
        if let Some(iv) = self.output_interval {
            if !(iv.is_finite() && iv > 0.0) {
                return Err(Error::param("output_interval", format!("{iv} must be positive")));
            }
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(Error::param("cg_tol", format!("{} must lie in (0, 1)", self.cg_tol)));
        }
        if self.cg_max_iter == 0 {
            return Err(Error::param("cg_max_iter", "must be positive"));
        }
        Ok(())
    }

    /// `min(cfl h / |u|∞, h² ρ_* / (8 μ^*))`
    pub fn stable_dt(&self, u: &VectorField) -> f64 {
        let h = self.grid.h();
        let visc = h * h * self.bounds().rho_star() / (8.0 * self.law.mu_upper());
        let umax = u.max_abs();
        if umax > 0.0 {
            visc.min(self.cfl_limit * h / umax)
        } else {
            visc
        }
    }
}

/// External force density `f(t, x)`.
#[derive(Clone, Default)]
pub enum Forcing {
    #[default]
    Zero,
    Steady(VectorField),
    Unsteady(Arc<dyn Fn(f64) -> VectorField + Send + Sync>),
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Steady(_) => write!(f, "Steady(..)"),
            Self::Unsteady(_) => write!(f, "Unsteady(..)"),
        }
    }
}

impl Forcing {
    pub fn at(&self, t: f64) -> Option<VectorField> {
        match self {
            Self::Zero => None,
            Self::Steady(v) => Some(v.clone()),
            Self::Unsteady(g) => Some(g(t)),
        }
    }
}

fn force_slices(f: &Option<VectorField>) -> Option<(&[f64], &[f64])> {
    f.as_ref().map(|v| (v.comp1(), v.comp2()))
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub rho0: ScalarField,
    pub u0: VectorField,
    pub force: Forcing,
}

impl InitialData {
    pub fn new(rho0: ScalarField, u0: VectorField, force: Forcing) -> Self {
        Self { rho0, u0, force }
    }

    pub fn validate(&self, config: &EvolveConfig) -> Result<()> {
        if *self.rho0.grid() != config.grid || *self.u0.grid() != config.grid {
            return Err(Error::GridMismatch);
        }
        config.bounds().check(&self.rho0)?;
        self.u0.validate()?;
        let d = divergence_raw_max(&config.grid, self.u0.comp1(), self.u0.comp2());
        if d > INITIAL_DIV_TOL {
            return Err(Error::NotDivergenceFree(d));
        }
        if let Some(f) = self.force.at(0.0) {
            if *f.grid() != config.grid {
                return Err(Error::GridMismatch);
            }
            f.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub rho: ScalarField,
    pub u: VectorField,
    /// Mean-zero pressure recovered from the momentum balance.
    pub pressure: ScalarField,
}

impl SimulationState {
    pub fn kinetic_energy(&self) -> f64 {
        kinetic(&self.rho, &self.u)
    }
}

fn kinetic(rho: &ScalarField, u: &VectorField) -> f64 {
    let (r, a, b) = (rho.values(), u.comp1(), u.comp2());
    let mut s = 0.0;
    for k in 0..r.len() {
        s += r[k] * (a[k] * a[k] + b[k] * b[k]);
    }
    s * rho.grid().cell_area()
}

fn work_rate(rho: &ScalarField, u: &VectorField, f: &Option<VectorField>) -> f64 {
    let Some(f) = f else { return 0.0 };
    let (r, a, b) = (rho.values(), u.comp1(), u.comp2());
    let (f1, f2) = (f.comp1(), f.comp2());
    let mut s = 0.0;
    for k in 0..r.len() {
        s += r[k] * (f1[k] * a[k] + f2[k] * b[k]);
    }
    2.0 * s * rho.grid().cell_area()
}

/// Per-step energy bookkeeping of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    /// `∫ρ|u|²`
    pub kinetic: Vec<f64>,
    /// `∫₀ᵗ∫ μ_e |∇u + ∇ᵀu|²`, trapezoidal in time.
    pub dissipation: Vec<f64>,
    /// `2∫₀ᵗ∫ ρ f·u`, trapezoidal in time.
    pub work: Vec<f64>,
    pub rho_min: Vec<f64>,
    pub rho_max: Vec<f64>,
    pub mass: Vec<f64>,
}

impl EnergyLedger {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `E(t) + D(t) - E(0) - W(t)`
    pub fn balance_defect(&self, k: usize) -> f64 {
        self.kinetic[k] + self.dissipation[k] - self.kinetic[0] - self.work[k]
    }

    pub fn max_balance_defect(&self) -> f64 {
        (0..self.len()).fold(0.0, |m, k| m.max(self.balance_defect(k).abs()))
    }

    /// Largest single-step increase of the kinetic energy (negative if it always drops).
    pub fn max_kinetic_increase(&self) -> f64 {
        self.kinetic.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_relative_mass_drift(&self) -> f64 {
        let m0 = self.mass.first().copied().unwrap_or(0.0);
        self.mass.iter().fold(0.0, |m, v| m.max(((v - m0) / m0).abs()))
    }

    fn push(&mut self, t: f64, rho: &ScalarField, e: f64, diss: f64, work: f64) {
        self.times.push(t);
        self.kinetic.push(e);
        self.dissipation.push(diss);
        self.work.push(work);
        self.rho_min.push(rho.min());
        self.rho_max.push(rho.max());
        self.mass.push(rho.integral());
    }
}

/// Full conservative right side `-div(ρu⊗u) + div(μ_e S) + div(μ_o S°) + ρf`
/// with products dealiased by the 2/3 rule.
pub fn momentum_rhs(state: &SimulationState, law: &ViscosityLaw, f: Option<&VectorField>) -> Result<VectorField> {
    let grid = *state.u.grid();
    if *state.rho.grid() != grid || f.is_some_and(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    law.bounds().check(&state.rho)?;
    state.u.validate()?;
    let (r1, r2) = momentum_rhs_raw(
        &grid,
        law,
        state.rho.values(),
        state.u.comp1(),
        state.u.comp2(),
        f.map(|v| (v.comp1(), v.comp2())),
    );
    Ok(VectorField::from_vecs_unchecked(grid, r1, r2))
}

/// Pressure from `div((1/ρ)∇π) = div((R + u (u·∇ρ))/ρ)`, `R` the right side without pressure.
fn recover_pressure(
    config: &EvolveConfig,
    rho: &ScalarField,
    u: &VectorField,
    f: &Option<VectorField>,
    guess: &[f64],
) -> Result<ScalarField> {
    let grid = &config.grid;
    let (r1, r2) = momentum_rhs_raw(grid, &config.law, rho.values(), u.comp1(), u.comp2(), force_slices(f));
    let (g1, g2) = grad_raw(grid, rho.values());
    let (u1, u2, rv) = (u.comp1(), u.comp2(), rho.values());
    let n = grid.len();
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for k in 0..n {
        let ud = u1[k] * g1[k] + u2[k] * g2[k];
        w1.push((r1[k] + u1[k] * ud) / rv[k]);
        w2.push((r2[k] + u2[k] * ud) / rv[k]);
    }
    let s = div_raw(grid, &w1, &w2);
    let op = DensityPoisson::new(grid, rv);
    let (p, _) = op.solve(&s, guess, config.cg_tol, config.cg_max_iter)?;
    Ok(ScalarField::from_vec_unchecked(*grid, p))
}

struct Stepper<'a> {
    config: &'a EvolveConfig,
    /// Last projection potential, used as the CG starting guess.
    q: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(config: &'a EvolveConfig, guess: Vec<f64>) -> Self {
        Self { config, q: guess }
    }

    fn project(&mut self, op: &DensityPoisson, mut v1: Vec<f64>, mut v2: Vec<f64>, tau: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = &self.config.grid;
        let s: Vec<f64> = div_raw(grid, &v1, &v2).into_iter().map(|d| d / tau).collect();
        let (q, _) = op.solve(&s, &self.q, self.config.cg_tol, self.config.cg_max_iter)?;
        let (g1, g2) = op.flux(&q);
        for k in 0..v1.len() {
            v1[k] -= tau * g1[k];
            v2[k] -= tau * g2[k];
        }
        self.q = q;
        Ok((v1, v2))
    }

    fn advance(&mut self, t: f64, rho: &ScalarField, u: &VectorField, dt: f64, force: &Forcing) -> Result<(ScalarField, VectorField)> {
        let cfg = self.config;
        let grid = &cfg.grid;
        let (r0, u1, u2) = (rho.values(), u.comp1(), u.comp2());
        let rho1 = advect_raw(grid, r0, u1, u2, dt);

        let f0 = force.at(t);
        let (ra1, ra2) = momentum_rhs_raw(grid, &cfg.law, r0, u1, u2, force_slices(&f0));
        let op = DensityPoisson::new(grid, &rho1);
        let inv = op.inv_rho().to_vec();
        let n = grid.len();
        let mut s1 = Vec::with_capacity(n);
        let mut s2 = Vec::with_capacity(n);
        for k in 0..n {
            s1.push((r0[k] * u1[k] + dt * ra1[k]) * inv[k]);
            s2.push((r0[k] * u2[k] + dt * ra2[k]) * inv[k]);
        }
        let (v1, v2) = self.project(&op, s1, s2, dt)?;

        let f1 = force.at(t + dt);
        let (rb1, rb2) = momentum_rhs_raw(grid, &cfg.law, &rho1, &v1, &v2, force_slices(&f1));
        let mut s1 = Vec::with_capacity(n);
        let mut s2 = Vec::with_capacity(n);
        for k in 0..n {
            s1.push((r0[k] * u1[k] + 0.5 * dt * (ra1[k] + rb1[k])) * inv[k]);
            s2.push((r0[k] * u2[k] + 0.5 * dt * (ra2[k] + rb2[k])) * inv[k]);
        }
        let (w1, w2) = self.project(&op, s1, s2, dt)?;
        let (w1, w2) = cut_pair_raw(grid, &w1, &w2, cfg.mode_cutoff, cfg.mode_cutoff);
        check_finite_state(&rho1, &w1, &w2)?;
        let d = divergence_raw_max(grid, &w1, &w2);
        if d > STATE_DIV_TOL {
            return Err(Error::NotDivergenceFree(d));
        }
        Ok((
            ScalarField::from_vec_unchecked(*grid, rho1),
            VectorField::from_vecs_unchecked(*grid, w1, w2),
        ))
    }
}

fn check_finite_state(rho: &[f64], u1: &[f64], u2: &[f64]) -> Result<()> {
    crate::field::check_finite(rho, "density")?;
    crate::field::check_finite(u1, "velocity")?;
    crate::field::check_finite(u2, "velocity")
}

fn check_state(state: &SimulationState, config: &EvolveConfig) -> Result<()> {
    if *state.rho.grid() != config.grid || *state.u.grid() != config.grid || *state.pressure.grid() != config.grid {
        return Err(Error::GridMismatch);
    }
    config.bounds().check(&state.rho)?;
    state.u.validate()?;
    state.pressure.validate()
}

/// One step of length `config.dt`.
pub fn step(state: &SimulationState, config: &EvolveConfig, f: &Forcing) -> Result<SimulationState> {
    config.validate()?;
    check_state(state, config)?;
    let limit = config.stable_dt(&state.u);
    if config.dt > limit {
        return Err(Error::Cfl { dt: config.dt, limit });
    }
    let mut stepper = Stepper::new(config, state.pressure.values().to_vec());
    let (rho, u) = stepper.advance(state.t, &state.rho, &state.u, config.dt, f)?;
    let t = state.t + config.dt;
    let pressure = recover_pressure(config, &rho, &u, &f.at(t), state.pressure.values())?;
    Ok(SimulationState { t, rho, u, pressure })
}

/// Initial state with the velocity truncated to `mode_cutoff`.
pub fn initial_state(config: &EvolveConfig, data: &InitialData) -> Result<SimulationState> {
    config.validate()?;
    data.validate(config)?;
    let grid = &config.grid;
    let (a, b) = cut_pair_raw(grid, data.u0.comp1(), data.u0.comp2(), config.mode_cutoff, config.mode_cutoff);
    let u = VectorField::from_vecs_unchecked(*grid, a, b);
    let zero = vec![0.0; grid.len()];
    let pressure = recover_pressure(config, &data.rho0, &u, &data.force.at(0.0), &zero)?;
    Ok(SimulationState {
        t: 0.0,
        rho: data.rho0.clone(),
        u,
        pressure,
    })
}

/// Integrate to `config.t_end`; returns the stored states and the per-step ledger.
pub fn run(config: &EvolveConfig, data: &InitialData) -> Result<(Vec<SimulationState>, EnergyLedger)> {
    let start = initial_state(config, data)?;
    let grid = config.grid;
    let mut ledger = EnergyLedger::default();

    let mut t = 0.0;
    let mut rho = start.rho.clone();
    let mut u = start.u.clone();
    let mut pressure = start.pressure.values().to_vec();
    let f = data.force.at(0.0);
    let mut d_rate = Viscous::new(&grid, &config.law, rho.values(), u.comp1(), u.comp2()).dissipation(&grid);
    let mut w_rate = work_rate(&rho, &u, &f);
    let (mut diss, mut work) = (0.0, 0.0);
    ledger.push(0.0, &rho, kinetic(&rho, &u), 0.0, 0.0);

    let mut states = vec![start];
    let mut stepper = Stepper::new(config, pressure.clone());
    let mut next_output = 1usize;
    while t < config.t_end {
        let stop = match config.output_interval {
            Some(iv) => (next_output as f64 * iv).min(config.t_end),
            None => config.t_end,
        };
        let remaining = stop - t;
        let mut dt = config.dt.min(config.stable_dt(&u));
        if dt >= remaining * (1.0 - 1e-9) {
            dt = remaining;
        }
        let (r1, u1) = stepper.advance(t, &rho, &u, dt, &data.force)?;
        let t1 = if dt == remaining { stop } else { t + dt };
        let f1 = data.force.at(t1);
        let d1 = Viscous::new(&grid, &config.law, r1.values(), u1.comp1(), u1.comp2()).dissipation(&grid);
        let w1 = work_rate(&r1, &u1, &f1);
        diss += 0.5 * dt * (d_rate + d1);
        work += 0.5 * dt * (w_rate + w1);
        ledger.push(t1, &r1, kinetic(&r1, &u1), diss, work);
        (t, rho, u, d_rate, w_rate) = (t1, r1, u1, d1, w1);

        if t == stop {
            next_output += 1;
            let p = recover_pressure(config, &rho, &u, &f1, &pressure)?;
            pressure = p.values().to_vec();
            states.push(SimulationState {
                t,
                rho: rho.clone(),
                u: u.clone(),
                pressure: p,
            });
        }
    }
    Ok((states, ledger))
}

/// One line of the odd-viscosity limit table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    /// `‖u^ε(T) - u⁰(T)‖_{L²}`
    pub l2_diff: f64,
    /// Density extremes over every step of the `ε` run.
    pub rho_min: f64,
    pub rho_max: f64,
    pub mass_drift: f64,
}

/// Runs `ν_o^ε = c0 + ε sin ρ` for each `ε` against the reference `ν_o ≡ c0`,
/// all other data taken from `config` and `data`.
pub fn odd_limit_sweep(config: &EvolveConfig, data: &InitialData, eps_list: &[f64], c0: f64) -> Result<Vec<SweepRow>> {
    let law = &config.law;
    let make = |nu_o: ScalarLaw| -> Result<EvolveConfig> {
        let l = ViscosityLaw::new(law.nu_e().clone(), nu_o, law.mu_star(), law.mu_upper(), *law.bounds())?;
        Ok(EvolveConfig { law: l, output_interval: None, ..config.clone() })
    };
    for &e in eps_list {
        if !(e.is_finite() && e >= 0.0) {
            return Err(Error::param("eps", format!("{e} must be non-negative")));
        }
    }
    let mut laws = vec![ScalarLaw::Const(c0)];
    laws.extend(eps_list.iter().map(|&amp| ScalarLaw::Sine { base: c0, amp }));
    let configs = laws.into_iter().map(make).collect::<Result<Vec<_>>>()?;
    let finals = configs
        .par_iter()
        .map(|c| run(c, data).map(|(s, l)| (s.last().expect("run stores the final state").u.clone(), l)))
        .collect::<Result<Vec<_>>>()?;
    let reference = &finals[0].0;
    Ok(eps_list
        .iter()
        .zip(&finals[1..])
        .map(|(&eps, (u, l))| SweepRow {
            eps,
            l2_diff: norms(&u.sub(reference)).l2,
            rho_min: l.rho_min.iter().copied().fold(f64::INFINITY, f64::min),
            rho_max: l.rho_max.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mass_drift: l.max_relative_mass_drift(),
        })
        .collect())
}
