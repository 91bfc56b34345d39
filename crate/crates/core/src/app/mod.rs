//! Experiment runners behind the command-line interface.
//!
//! Each runner reads one configuration section, validates it, runs the
//! solver and writes its artifacts into an output directory.

mod evolve;
mod stationary;
mod symmetric;
pub mod verify;

use std::path::Path;

pub use evolve::{cmd_evolve, cmd_sweep, evolve_setup, EvolveSetup, EvolveSummary, EVOLVE_KEYS, SWEEP_KEYS};
pub use stationary::{cmd_stationary, StationarySummary, STATIONARY_KEYS};
pub use symmetric::{cmd_nonexistence, cmd_symmetric, SymmetricSummary, NONEXISTENCE_KEYS, SYMMETRIC_KEYS};

use crate::config::Section;
use crate::error::{Error, Result};
use crate::viscosity::{DensityBounds, ScalarLaw, ViscosityLaw};

pub const EXIT_OK: i32 = 0;
/// A verification check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Configuration or input data rejected.
pub const EXIT_INVALID: i32 = 2;
/// A solver failed to converge or blew up.
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CgNotConverged { .. }
        | Error::PicardNotConverged { .. }
        | Error::NewtonNotConverged { .. }
        | Error::SingularMatrix(_)
        | Error::NonFinite(_) => EXIT_SOLVER,
        _ => EXIT_INVALID,
    }
}

/// Viscosity law from `nu_e`, `nu_o`, `rho_min`, `rho_max` and optionally
/// `mu_star`, `mu_upper` (sampled from the laws when absent).
pub(crate) fn law_from(sec: &Section, nu_e: &str, nu_o: &str, rho: (f64, f64)) -> Result<ViscosityLaw> {
    let ne = ScalarLaw::parse(&sec.str("nu_e", nu_e))?;
    let no = ScalarLaw::parse(&sec.str("nu_o", nu_o))?;
    law_with(sec, ne, no, rho)
}

pub(crate) fn law_with(sec: &Section, ne: ScalarLaw, no: ScalarLaw, rho: (f64, f64)) -> Result<ViscosityLaw> {
    let bounds = DensityBounds::new(sec.get("rho_min", rho.0)?, sec.get("rho_max", rho.1)?)?;
    let tight = ViscosityLaw::with_tight_bounds(ne.clone(), no.clone(), bounds)?;
    match (sec.opt_str("mu_star"), sec.opt_str("mu_upper")) {
        (None, None) => Ok(tight),
        _ => ViscosityLaw::new(
            ne,
            no,
            sec.get("mu_star", tight.mu_star())?,
            sec.get("mu_upper", tight.mu_upper())?,
            bounds,
        ),
    }
}

/// Split `kind:a,b,...` into the kind and its numeric arguments.
pub(crate) fn spec_args(key: &str, spec: &str) -> Result<(String, Vec<f64>)> {
    let (kind, args) = match spec.split_once(':') {
        Some((k, a)) => (k.trim(), a),
        None => (spec.trim(), ""),
    };
    let nums = if args.trim().is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::param(key, format!("bad number `{s}` in `{spec}`"))))
            .collect::<Result<_>>()?
    };
    Ok((kind.to_string(), nums))
}

pub(crate) fn arity(key: &str, spec: &str, args: &[f64], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::param(key, format!("`{spec}` takes {n} arguments")));
    }
    Ok(())
}

pub(crate) fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}
