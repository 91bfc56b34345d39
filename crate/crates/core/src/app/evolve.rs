use std::f64::consts::PI;
use std::path::Path;

use super::{arity, ensure_dir, law_from, law_with, spec_args};
use crate::config::{RunConfig, Section};
use crate::error::{Error, Result};
use crate::evolve::{odd_limit_sweep, run, EvolveConfig, Forcing, InitialData, SweepRow};
use crate::field::{random_bandlimited_scalar, random_divfree_field, Grid2D, ScalarField, VectorField};
use crate::io::{read_field, write_csv, write_field, FieldDump};
use crate::viscosity::ScalarLaw;

pub const EVOLVE_KEYS: &[&str] = &[
    "n",
    "length",
    "dt",
    "t_end",
    "nu_e",
    "nu_o",
    "rho_min",
    "rho_max",
    "mu_star",
    "mu_upper",
    "density",
    "velocity",
    "force",
    "seed",
    "cutoff",
    "cfl",
    "dump_interval",
];

pub const SWEEP_KEYS: &[&str] = &[
    "n", "length", "dt", "t_end", "nu_e", "rho_min", "rho_max", "mu_star", "mu_upper", "density", "velocity", "force", "seed", "cutoff",
    "cfl", "eps", "c0",
];

#[derive(Debug, Clone)]
pub struct EvolveSetup {
    pub config: EvolveConfig,
    pub data: InitialData,
}

fn check_grid(key: &str, found: &Grid2D, grid: Grid2D) -> Result<()> {
    if *found != grid {
        return Err(Error::param(
            key,
            format!("dump grid {}x{} does not match the configured {}x{}", found.n1(), found.n2(), grid.n1(), grid.n2()),
        ));
    }
    Ok(())
}

fn initial_density(spec: &str, grid: Grid2D, seed: u64) -> Result<ScalarField> {
    if let Some(path) = spec.strip_prefix("file:") {
        let rho = read_field(path.trim())?.to_scalar()?;
        check_grid("density", rho.grid(), grid)?;
        return Ok(rho);
    }
    let (kind, a) = spec_args("density", spec)?;
    match kind.as_str() {
        "const" => {
            arity("density", spec, &a, 1)?;
            Ok(ScalarField::constant(grid, a[0]))
        }
        // mean + amp tanh(ψ/2) with ψ random band-limited
        "random" => {
            arity("density", spec, &a, 3)?;
            let psi = random_bandlimited_scalar(grid, seed, a[2] as usize)?;
            Ok(psi.map(|v| a[0] + a[1] * (0.5 * v).tanh()))
        }
        other => Err(Error::param("density", format!("unknown initial density `{other}`"))),
    }
}

fn initial_velocity(spec: &str, grid: Grid2D, seed: u64) -> Result<VectorField> {
    if let Some(path) = spec.strip_prefix("file:") {
        let u = read_field(path.trim())?.to_vector()?;
        check_grid("velocity", u.grid(), grid)?;
        return Ok(u);
    }
    let (kind, a) = spec_args("velocity", spec)?;
    match kind.as_str() {
        "zero" => Ok(VectorField::zeros(grid)),
        "taylor-green" => {
            arity("velocity", spec, &a, 1)?;
            let (k1, k2) = (2.0 * PI / grid.len1(), 2.0 * PI / grid.len2());
            let amp = a[0];
            Ok(VectorField::from_fn(grid, |x, y| {
                (amp * (k1 * x).sin() * (k2 * y).cos(), -amp * k1 / k2 * (k1 * x).cos() * (k2 * y).sin())
            }))
        }
        // rescaled to the given sup norm
        "random" => {
            arity("velocity", spec, &a, 2)?;
            let u = random_divfree_field(grid, seed, a[1] as usize)?;
            let m = u.max_abs();
            Ok(if m > 0.0 { u.scale(a[0] / m) } else { u })
        }
        other => Err(Error::param("velocity", format!("unknown initial velocity `{other}`"))),
    }
}

fn forcing(spec: &str, grid: Grid2D) -> Result<Forcing> {
    let (kind, a) = spec_args("force", spec)?;
    match kind.as_str() {
        "zero" => Ok(Forcing::Zero),
        // (amp sin(k x₂), 0) with k in units of the fundamental mode
        "kolmogorov" => {
            arity("force", spec, &a, 2)?;
            let k = 2.0 * PI * a[1].round() / grid.len2();
            Ok(Forcing::Steady(VectorField::from_fn(grid, |_, y| (a[0] * (k * y).sin(), 0.0))))
        }
        other => Err(Error::param("force", format!("unknown forcing `{other}`"))),
    }
}

fn setup_with(sec: &Section, law: crate::viscosity::ViscosityLaw) -> Result<EvolveSetup> {
    let n: usize = sec.get("n", 64)?;
    let length: f64 = sec.get("length", 2.0 * PI)?;
    let grid = Grid2D::new(n, n, length, length)?;
    let mut config = EvolveConfig::new(grid, sec.get("dt", 1e-3)?, sec.get("t_end", 1.0)?, law)?;
    config.mode_cutoff = sec.get("cutoff", config.mode_cutoff)?;
    config.cfl_limit = sec.get("cfl", config.cfl_limit)?;
    if let Some(v) = sec.opt_str("dump_interval") {
        config.output_interval = Some(v.parse().map_err(|_| Error::param("dump_interval", format!("cannot parse `{v}`")))?);
    }
    config.validate()?;
    let seed: u64 = sec.get("seed", 0)?;
    let rho0 = initial_density(&sec.str("density", "const:1"), grid, seed)?;
    let u0 = initial_velocity(&sec.str("velocity", "zero"), grid, seed.wrapping_add(1))?;
    let data = InitialData::new(rho0, u0, forcing(&sec.str("force", "zero"), grid)?);
    data.validate(&config)?;
    Ok(EvolveSetup { config, data })
}

/// Grid, law and initial data from an `[evolve]` section.
pub fn evolve_setup(sec: &Section) -> Result<EvolveSetup> {
    let law = law_from(sec, "const:0.05", "const:0", (0.5, 2.0))?;
    setup_with(sec, law)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSummary {
    pub steps: usize,
    pub t_end: f64,
    pub kinetic: (f64, f64),
    pub max_balance_defect: f64,
    pub max_kinetic_increase: f64,
    pub rho_range: (f64, f64),
    pub mass_drift: f64,
}

pub fn cmd_evolve(cfg: &RunConfig, out: &Path) -> Result<EvolveSummary> {
    let sec = cfg.section("evolve", EVOLVE_KEYS)?;
    let s = evolve_setup(&sec)?;
    ensure_dir(out)?;
    let (states, ledger) = run(&s.config, &s.data)?;
    for (k, st) in states.iter().enumerate() {
        write_field(out.join(format!("state_{k:04}_rho.odf")), &FieldDump::from_scalar(&st.rho, st.t)?)?;
        write_field(out.join(format!("state_{k:04}_u.odf")), &FieldDump::from_vector(&st.u, st.t)?)?;
        write_field(out.join(format!("state_{k:04}_p.odf")), &FieldDump::from_scalar(&st.pressure, st.t)?)?;
    }
    let rows: Vec<Vec<f64>> = (0..ledger.len())
        .map(|k| vec![ledger.times[k], ledger.kinetic[k], ledger.dissipation[k], ledger.work[k], ledger.balance_defect(k)])
        .collect();
    write_csv(out.join("energy.csv"), &["t", "kinetic", "dissipation", "work", "balance_defect"], &rows)?;
    let rows: Vec<Vec<f64>> = (0..ledger.len())
        .map(|k| vec![ledger.times[k], ledger.rho_min[k], ledger.rho_max[k], ledger.mass[k]])
        .collect();
    write_csv(out.join("density.csv"), &["t", "rho_min", "rho_max", "mass"], &rows)?;
    let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
    Ok(EvolveSummary {
        steps: ledger.len() - 1,
        t_end: *ledger.times.last().expect("initial entry"),
        kinetic: (ledger.kinetic[0], *ledger.kinetic.last().expect("initial entry")),
        max_balance_defect: ledger.max_balance_defect(),
        max_kinetic_increase: ledger.max_kinetic_increase(),
        rho_range: (fold(&ledger.rho_min, f64::min, f64::INFINITY), fold(&ledger.rho_max, f64::max, f64::NEG_INFINITY)),
        mass_drift: ledger.max_relative_mass_drift(),
    })
}

/// Odd-viscosity limit `ν_o^ε = c0 + ε sin ρ`; writes `sweep.csv`.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Vec<SweepRow>> {
    let sec = cfg.section("sweep", SWEEP_KEYS)?;
    let eps = sec.list("eps", &[0.4, 0.2, 0.1, 0.05])?;
    let c0: f64 = sec.get("c0", 0.1)?;
    let ne = ScalarLaw::parse(&sec.str("nu_e", "const:0.05"))?;
    // bounds wide enough for the largest ε
    let widest = eps.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let law = law_with(&sec, ne, ScalarLaw::Sine { base: c0, amp: widest }, (0.5, 2.0))?;
    let s = setup_with(&sec, law)?;
    ensure_dir(out)?;
    let rows = odd_limit_sweep(&s.config, &s.data, &eps, c0)?;
    let table: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.eps, r.l2_diff, r.rho_min, r.rho_max, r.mass_drift]).collect();
    write_csv(out.join("sweep.csv"), &["eps", "l2_diff", "rho_min", "rho_max", "mass_drift"], &table)?;
    Ok(rows)
}

