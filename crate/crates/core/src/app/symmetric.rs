use std::path::Path;

use super::{ensure_dir, law_from};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::write_csv;
use crate::symmetric::{
    radial_nonexistence_demo, solve_concentric, solve_parallel, solve_radial, ConcentricProblem, NonexistenceConfig, NonexistenceReport,
    ParallelMode, ParallelProblem, Profile, RadialProblem, SymmetricSolution,
};

pub const SYMMETRIC_KEYS: &[&str] = &[
    "kind", "rho", "nu_e", "nu_o", "rho_min", "rho_max", "mu_star", "mu_upper", "c", "n", "mode", "a", "b", "u_a", "u_b", "c1", "r_in",
    "r_out", "g_in", "g_out",
];

pub const NONEXISTENCE_KEYS: &[&str] = &["mu_o", "rho", "mu_e", "c", "levels", "pin_pi", "max_iter"];

#[derive(Debug, Clone)]
pub struct SymmetricSummary {
    pub solution: SymmetricSolution,
}

/// Parallel, concentric or radial flow from a `[symmetric]` section; writes
/// `profile.csv` and `report.txt`.
pub fn cmd_symmetric(cfg: &RunConfig, out: &Path) -> Result<SymmetricSummary> {
    let sec = cfg.section("symmetric", SYMMETRIC_KEYS)?;
    let rho = Profile::parse(&sec.str("rho", "const:1"))?;
    let law = law_from(&sec, "const:1", "const:0", (0.5, 2.0))?;
    let c: f64 = sec.get("c", 0.0)?;
    let kind = sec.str("kind", "parallel");
    let solution = match kind.as_str() {
        "parallel" => {
            let mode = match sec.str("mode", "pressure-absorbed").as_str() {
                "strict" => ParallelMode::Strict,
                "pressure-absorbed" => ParallelMode::PressureAbsorbed,
                other => return Err(Error::param("mode", format!("unknown mode `{other}`"))),
            };
            solve_parallel(&ParallelProblem {
                rho,
                law,
                c,
                interval: (sec.get("a", 0.0)?, sec.get("b", 1.0)?),
                u_a: sec.get("u_a", 0.0)?,
                u_b: sec.get("u_b", 0.0)?,
                mode,
                n: sec.get("n", 64)?,
            })?
        }
        "concentric" => solve_concentric(&ConcentricProblem {
            rho,
            law,
            c,
            c1: sec.get("c1", 0.0)?,
            r_in: sec.get("r_in", 1.0)?,
            r_out: sec.get("r_out", 2.0)?,
            g_in: sec.get("g_in", 0.0)?,
            g_out: match sec.opt_str("g_out") {
                Some(v) => Some(v.parse().map_err(|_| Error::param("g_out", format!("cannot parse `{v}`")))?),
                None => None,
            },
            n: sec.get("n", 64)?,
        })?,
        "radial" => solve_radial(&RadialProblem {
            rho,
            law,
            c,
            collocation_n: sec.get("n", 64)?,
        })?,
        other => return Err(Error::param("kind", format!("unknown symmetry `{other}`"))),
    };
    ensure_dir(out)?;
    let s = &solution;
    let rows: Vec<Vec<f64>> = (0..s.nodes.len()).map(|k| vec![s.nodes[k], s.profile[k], s.slope[k], s.pressure[k]]).collect();
    write_csv(out.join("profile.csv"), &["s", "profile", "slope", "pressure"], &rows)?;
    let mut report = format!(
        "kind {:?}\nc {:.16e}\nc1 {:.16e}\nreduced_residual {:.16e}\nmomentum_residual {:.16e}\niterations {}\n",
        s.kind, s.c, s.c1, s.reduced_residual, s.momentum_residual, s.iterations
    );
    if let Some(inc) = s.incompatibility {
        report.push_str(&format!("incompatibility {inc:.16e}\n"));
    }
    std::fs::write(out.join("report.txt"), report)?;
    Ok(SymmetricSummary { solution })
}

fn pair(sec: &crate::config::Section, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
    match sec.list(key, &[default.0, default.1])?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::param(key, "expected two comma-separated numbers")),
    }
}

/// Refinement study of the radial equation with jumping odd viscosity;
/// writes `nonexistence.csv` and `nonexistence.txt`.
pub fn cmd_nonexistence(cfg: &RunConfig, out: &Path) -> Result<NonexistenceReport> {
    let sec = cfg.section("symmetric", NONEXISTENCE_KEYS)?;
    let d = NonexistenceConfig::default();
    let levels: Vec<f64> = d.levels.iter().map(|&n| n as f64).collect();
    let demo = NonexistenceConfig {
        mu_o: pair(&sec, "mu_o", d.mu_o)?,
        rho: pair(&sec, "rho", d.rho)?,
        mu_e: sec.get("mu_e", d.mu_e)?,
        c: sec.get("c", d.c)?,
        levels: sec.list("levels", &levels)?.iter().map(|&n| n as usize).collect(),
        pin_pi: sec.get("pin_pi", d.pin_pi)?,
        max_iter: sec.get("max_iter", d.max_iter)?,
    };
    let report = radial_nonexistence_demo(&demo)?;
    if demo.mu_e > 0.0 && !demo.pin_pi {
        if let Some(row) = report.rows.iter().find(|r| !r.converged) {
            return Err(Error::NewtonNotConverged {
                iterations: row.iterations,
                residual: row.residual,
            });
        }
    }
    ensure_dir(out)?;
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let growth = if k == 0 { f64::NAN } else { report.growth[k - 1] };
            vec![r.n as f64, r.residual, r.h1_seminorm, growth, report.stagnation[k], r.iterations as f64, r.converged as u8 as f64]
        })
        .collect();
    write_csv(
        out.join("nonexistence.csv"),
        &["n", "residual", "h1_seminorm", "h1_growth", "stagnation", "iterations", "converged"],
        &rows,
    )?;
    std::fs::write(out.join("nonexistence.txt"), format!("indicator {}\n", report.indicator))?;
    Ok(report)
}
