use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{arity, ensure_dir, law_from, spec_args};
use crate::config::{RunConfig, Section};
use crate::error::{Error, Result};
use crate::io::{write_csv, write_field, FieldDump};
use crate::stationary::{
    boundary_data_from_g, ellipticity_check, manufactured, picard_solve, BoundaryData, EllipticityReport, EtaFunction, NodeVectorField,
    RectDomain, StationaryProblem, StationarySolution, DEFAULT_DAMPING, DEFAULT_TOL,
};
use crate::viscosity::ViscosityLaw;

pub const STATIONARY_KEYS: &[&str] = &[
    "problem", "n", "levels", "lx", "ly", "nu_e", "nu_o", "rho_min", "rho_max", "mu_star", "mu_upper", "eta", "boundary", "c0", "force",
    "damping", "tol", "max_iter", "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySummary {
    pub iterations: usize,
    pub final_update_norm: f64,
    /// `(n, ‖φ - φ*‖_{L²})` per level for the manufactured problem.
    pub errors: Vec<(usize, f64)>,
    pub ellipticity: EllipticityReport,
}

/// Boundary velocity `g` from `zero`, `uniform:g1,g2`, `source:q` or `file:<path>`.
fn boundary(sec: &Section, d: RectDomain) -> Result<BoundaryData> {
    let spec = sec.str("boundary", "zero");
    let c0: f64 = sec.get("c0", 0.0)?;
    if let Some(path) = spec.strip_prefix("file:") {
        let rows = read_boundary_file(path.trim())?;
        // nearest tabulated point
        return boundary_data_from_g(
            d,
            |x, y| {
                let best = rows
                    .iter()
                    .min_by(|a, b| {
                        let da = (a[0] - x).powi(2) + (a[1] - y).powi(2);
                        let db = (b[0] - x).powi(2) + (b[1] - y).powi(2);
                        da.total_cmp(&db)
                    })
                    .expect("nonempty table");
                (best[2], best[3])
            },
            c0,
        );
    }
    let (kind, a) = spec_args("boundary", &spec)?;
    let (cx, cy) = (0.5 * d.lx(), 0.5 * d.ly());
    match kind.as_str() {
        "zero" => boundary_data_from_g(d, |_, _| (0.0, 0.0), c0),
        "uniform" => {
            arity("boundary", &spec, &a, 2)?;
            boundary_data_from_g(d, |_, _| (a[0], a[1]), c0)
        }
        "source" => {
            arity("boundary", &spec, &a, 1)?;
            boundary_data_from_g(d, |x, y| (a[0] * (x - cx), a[0] * (y - cy)), c0)
        }
        other => Err(Error::param("boundary", format!("unknown boundary data `{other}`"))),
    }
}

/// Rows `x y g1 g2`, whitespace or comma separated, `#` comments.
fn read_boundary_file(path: &str) -> Result<Vec<[f64; 4]>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::param("boundary", format!("{path}: {e}")))?;
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::param("boundary", format!("{path}:{}: bad number", no + 1)))?;
        if v.len() != 4 || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("boundary", format!("{path}:{}: expected `x y g1 g2`", no + 1)));
        }
        rows.push([v[0], v[1], v[2], v[3]]);
    }
    if rows.is_empty() {
        return Err(Error::param("boundary", format!("{path}: no data")));
    }
    Ok(rows)
}

fn force(sec: &Section, d: RectDomain) -> Result<NodeVectorField> {
    let spec = sec.str("force", "zero");
    let (kind, a) = spec_args("force", &spec)?;
    match kind.as_str() {
        "zero" => Ok(NodeVectorField::zeros(d)),
        "uniform" => {
            arity("force", &spec, &a, 2)?;
            Ok(NodeVectorField::from_fn(d, |_, _| (a[0], a[1])))
        }
        // (amp sin(π y/ly), 0)
        "shear" => {
            arity("force", &spec, &a, 1)?;
            let k = std::f64::consts::PI / d.ly();
            Ok(NodeVectorField::from_fn(d, |_, y| (a[0] * (k * y).sin(), 0.0)))
        }
        other => Err(Error::param("force", format!("unknown force `{other}`"))),
    }
}

fn custom_problem(sec: &Section, n: usize) -> Result<StationaryProblem> {
    let lx: f64 = sec.get("lx", 1.0)?;
    let ly: f64 = sec.get("ly", 1.0)?;
    let ny = (n as f64 * ly / lx).round() as usize;
    let d = RectDomain::new(n.saturating_sub(1), ny.saturating_sub(1), lx, ly)?;
    let law = law_from(sec, "const:1", "const:0", (0.5, 2.0))?;
    let eta = EtaFunction::parse(&sec.str("eta", "affine:1,0"), law.bounds().rho_upper())?;
    StationaryProblem::new(law, eta, force(sec, d)?, boundary(sec, d)?)
}

fn ellipticity(law: &ViscosityLaw, seed: u64) -> EllipticityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (law.bounds().rho_star(), law.bounds().rho_upper());
    let rho: Vec<f64> = (0..33).map(|k| lo + (hi - lo) * k as f64 / 32.0).collect();
    let xi: Vec<[f64; 4]> = (0..1000).map(|_| [0; 4].map(|_: i32| rng.gen_range(-1.0..1.0))).collect();
    ellipticity_check(law, &rho, &xi)
}

fn write_solution(out: &Path, s: &StationarySolution) -> Result<()> {
    write_field(out.join("phi.odf"), &FieldDump::from_nodes(&s.phi)?)?;
    write_field(out.join("rho.odf"), &FieldDump::from_nodes(&s.rho)?)?;
    write_field(out.join("velocity.odf"), &FieldDump::from_node_vector(&s.u)?)?;
    let rows: Vec<Vec<f64>> = s.update_norms.iter().enumerate().map(|(k, &v)| vec![(k + 1) as f64, v]).collect();
    write_csv(out.join("iterations.csv"), &["k", "update_norm"], &rows)
}

fn write_ellipticity(out: &Path, r: &EllipticityReport) -> Result<()> {
    let text = format!(
        "samples {}\nmin_quotient {:.16e}\nmax_quotient {:.16e}\nlower {:.16e}\nupper {:.16e}\nmax_odd {:.16e}\nholds {}\n",
        r.samples,
        r.min_quotient,
        r.max_quotient,
        r.lower,
        r.upper,
        r.max_odd,
        r.holds(1e-12)
    );
    std::fs::write(out.join("ellipticity.txt"), text)?;
    Ok(())
}

/// Picard solve of a `[stationary]` problem. `problem = manufactured` runs
/// every mesh in `levels` and writes `convergence.csv`.
pub fn cmd_stationary(cfg: &RunConfig, out: &Path) -> Result<StationarySummary> {
    let sec = cfg.section("stationary", STATIONARY_KEYS)?;
    let damping: f64 = sec.get("damping", DEFAULT_DAMPING)?;
    let tol: f64 = sec.get("tol", DEFAULT_TOL)?;
    let max_iter: usize = sec.get("max_iter", 200)?;
    let seed: u64 = sec.get("seed", 0)?;
    let n: usize = sec.get("n", 32)?;
    let kind = sec.str("problem", "custom");
    let levels: Vec<usize> = match kind.as_str() {
        "manufactured" => sec.list("levels", &[n as f64])?.iter().map(|&v| v as usize).collect(),
        "custom" => vec![n],
        other => return Err(Error::param("problem", format!("unknown problem `{other}`"))),
    };
    let problems = levels
        .iter()
        .map(|&n| if kind == "manufactured" { manufactured::problem(n) } else { custom_problem(&sec, n) })
        .collect::<Result<Vec<_>>>()?;
    ensure_dir(out)?;
    let report = ellipticity(&problems[0].law, seed);
    write_ellipticity(out, &report)?;
    let mut errors = Vec::new();
    let mut last = None;
    for (p, &n) in problems.iter().zip(&levels) {
        let s = picard_solve(p, damping, tol, max_iter)?;
        if kind == "manufactured" {
            errors.push((n, s.phi.sub(&manufactured::phi_nodes(p.domain)).l2_norm()));
        }
        last = Some(s);
    }
    let s = last.expect("at least one level");
    write_solution(out, &s)?;
    if !errors.is_empty() {
        let rows: Vec<Vec<f64>> = errors
            .iter()
            .enumerate()
            .map(|(k, &(n, e))| {
                let order = if k == 0 { f64::NAN } else { (errors[k - 1].1 / e).ln() / (n as f64 / errors[k - 1].0 as f64).ln() };
                vec![n as f64, 1.0 / n as f64, e, order]
            })
            .collect();
        write_csv(out.join("convergence.csv"), &["n", "h", "l2_error", "order"], &rows)?;
    }
    Ok(StationarySummary {
        iterations: s.iterations,
        final_update_norm: s.final_update_norm,
        errors,
        ellipticity: report,
    })
}
