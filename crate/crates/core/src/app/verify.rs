//! The invariant suite behind `oddflow verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::evolve::{run, EvolveConfig, Forcing, InitialData};
use crate::field::{
    curl2d, div_tensor, divergence, grad, leray_project, random_bandlimited_scalar, random_divfree_field, Grid2D, ScalarField, VectorField,
};
use crate::io::FieldDump;
use crate::stationary::{
    assemble_a, assemble_l, ellipticity_check, manufactured, picard_solve, BoundaryData, EtaFunction, NodeField, NodeVectorField, RectDomain,
    StationaryProblem, DEFAULT_DAMPING, DEFAULT_TOL,
};
use crate::symmetric::{
    solve_concentric, solve_parallel, solve_radial, ConcentricProblem, ParallelMode, ParallelProblem, Profile, RadialProblem,
};
use crate::viscosity::{check_pointwise_cancellation, check_weak_cancellation, set_fault_injection, strain_odd, DensityBounds, ScalarLaw, ViscosityLaw};

/// A measured quantity and the bound it must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure {
    pub value: f64,
    pub limit: f64,
    /// `value >= limit` instead of `value <= limit`.
    pub at_least: bool,
}

impl Measure {
    fn at_most(value: f64, limit: f64) -> Self {
        Self { value, limit, at_least: false }
    }
    fn at_least(value: f64, limit: f64) -> Self {
        Self { value, limit, at_least: true }
    }
    pub fn passed(&self) -> bool {
        if self.at_least {
            self.value >= self.limit
        } else {
            self.value <= self.limit
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: std::result::Result<Measure, String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(m) if m.passed())
    }
}

type CheckFn = fn(u64) -> Result<Measure>;

/// Every check, in the order they run.
pub fn checks() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("field.leray_divergence", leray_divergence),
        ("field.curl_of_gradient", curl_of_gradient),
        ("odd.cancellation_pointwise", cancellation_pointwise),
        ("odd.cancellation_weak", cancellation_weak),
        ("odd.constant_stress_is_gradient", constant_stress_is_gradient),
        ("odd.ellipticity_builtin_laws", ellipticity_builtin_laws),
        ("evolve.density_bounds", evolve_density_bounds),
        ("evolve.energy_nonincreasing", evolve_energy_nonincreasing),
        ("evolve.mass_conservation", evolve_mass),
        ("evolve.constant_odd_neutrality", evolve_constant_odd),
        ("stationary.l_symmetric", stationary_l_symmetric),
        ("stationary.a_antisymmetric", stationary_a_antisymmetric),
        ("stationary.a_constant_vanishes", stationary_a_constant),
        ("stationary.homogeneous_one_iteration", stationary_homogeneous),
        ("stationary.manufactured_order", stationary_order),
        ("symmetric.couette", symmetric_couette),
        ("symmetric.concentric_log", symmetric_log),
        ("symmetric.radial_root", symmetric_radial_root),
        ("symmetric.radial_odd_invariance", symmetric_radial_invariance),
        ("io.dump_round_trip", dump_round_trip),
    ]
}

/// Run the checks whose name contains `filter`, serially on the calling
/// thread. With `inject_fault` the odd strain is corrupted for the duration.
pub fn run_checks(filter: Option<&str>, seed: u64, inject_fault: bool) -> Vec<CheckResult> {
    set_fault_injection(inject_fault);
    let out = checks()
        .into_iter()
        .filter(|(name, _)| filter.map_or(true, |f| name.contains(f)))
        .map(|(name, f)| CheckResult {
            name,
            outcome: f(seed).map_err(|e| e.to_string()),
        })
        .collect();
    set_fault_injection(false);
    out
}

pub fn format_table(results: &[CheckResult]) -> String {
    let mut s = format!("{:<40} {:>6} {:>14} {:>14}\n", "check", "status", "value", "limit");
    for r in results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        match &r.outcome {
            Ok(m) => {
                let op = if m.at_least { ">=" } else { "<=" };
                s.push_str(&format!("{:<40} {:>6} {:>14.6e} {op}{:>12.3e}\n", r.name, status, m.value, m.limit));
            }
            Err(e) => s.push_str(&format!("{:<40} {:>6} error: {e}\n", r.name, status)),
        }
    }
    s
}

fn torus(n: usize) -> Grid2D {
    Grid2D::square_2pi(n).expect("valid grid")
}

fn leray_divergence(seed: u64) -> Result<Measure> {
    let g = torus(32);
    let v = VectorField::from_components(random_bandlimited_scalar(g, seed, 8)?, random_bandlimited_scalar(g, seed + 1, 8)?)?;
    let p = leray_project(&v)?;
    Ok(Measure::at_most(divergence(&p)?.max_abs(), 1e-10 * v.max_abs().max(1.0)))
}

fn curl_of_gradient(seed: u64) -> Result<Measure> {
    let s = random_bandlimited_scalar(torus(32), seed, 8)?;
    Ok(Measure::at_most(curl2d(&grad(&s)?)?.max_abs(), 1e-10 * s.max_abs().max(1.0)))
}

/// Sup of the odd:even strain product relative to `‖∇u‖²∞`, over 20 fields.
fn cancellation_pointwise(seed: u64) -> Result<Measure> {
    let g = torus(32);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let u = random_divfree_field(g, seed.wrapping_add(k), 8)?;
        let scale = grad(&u.component(0))?.max_abs().max(grad(&u.component(1))?.max_abs());
        worst = worst.max(check_pointwise_cancellation(&u)? / (scale * scale));
    }
    Ok(Measure::at_most(worst, 1e-12))
}

fn cancellation_weak(seed: u64) -> Result<Measure> {
    let g = torus(32);
    let mut worst = 0.0f64;
    for k in 0..20 {
        let u = random_divfree_field(g, seed.wrapping_add(2 * k), 8)?;
        let phi = random_divfree_field(g, seed.wrapping_add(2 * k + 1), 8)?;
        let scale = u.max_abs() * phi.max_abs() * g.area();
        worst = worst.max(check_weak_cancellation(&u, &phi)? / scale);
    }
    Ok(Measure::at_most(worst, 1e-10))
}

/// `div(∇u⊥ + ∇⊥u)` has no divergence-free part.
fn constant_stress_is_gradient(seed: u64) -> Result<Measure> {
    let u = random_divfree_field(torus(32), seed, 8)?;
    let d = div_tensor(&strain_odd(&u)?)?;
    Ok(Measure::at_most(leray_project(&d)?.max_abs(), 1e-10 * d.max_abs().max(1.0)))
}

fn ellipticity_builtin_laws(seed: u64) -> Result<Measure> {
    let b = DensityBounds::new(0.5, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho: Vec<f64> = (0..32).map(|_| rng.gen_range(0.5..=2.0)).collect();
    let xi: Vec<[f64; 4]> = (0..32).map(|_| [0; 4].map(|_: i32| rng.gen_range(-1.0..1.0))).collect();
    let mut violation = 0.0f64;
    for nu in [
        ScalarLaw::Const(1.0),
        ScalarLaw::Affine { a: 0.5, b: 0.5 },
        ScalarLaw::Prop(1.0),
        ScalarLaw::Sine { base: 1.5, amp: 0.5 },
    ] {
        let law = ViscosityLaw::with_tight_bounds(nu.clone(), nu, b)?;
        let r = ellipticity_check(&law, &rho, &xi);
        violation = violation.max(r.lower - r.min_quotient).max(r.max_quotient - r.upper).max(r.max_odd);
    }
    Ok(Measure::at_most(violation, 1e-12))
}

struct ShortRun {
    rho_violation: f64,
    kinetic_increase: f64,
    mass_drift: f64,
}

fn short_run(seed: u64, nu_o: ScalarLaw) -> Result<(ShortRun, VectorField)> {
    let g = torus(32);
    let b = DensityBounds::new(0.8, 1.6)?;
    let psi = random_bandlimited_scalar(g, seed, 3)?;
    let rho = psi.map(|v| 1.2 + 0.3 * (0.5 * v).tanh());
    let u = random_divfree_field(g, seed + 1, 4)?;
    let u = u.scale(0.5 / u.max_abs());
    let law = ViscosityLaw::with_tight_bounds(ScalarLaw::Affine { a: 0.1, b: 0.1 }, nu_o, b)?;
    let cfg = EvolveConfig::new(g, 2e-3, 0.1, law)?;
    let (states, ledger) = run(&cfg, &InitialData::new(rho, u, Forcing::Zero))?;
    let rho_violation = states
        .iter()
        .map(|s| (b.rho_star() - s.rho.min()).max(s.rho.max() - b.rho_upper()))
        .chain(ledger.rho_min.iter().map(|&m| b.rho_star() - m))
        .chain(ledger.rho_max.iter().map(|&m| m - b.rho_upper()))
        .fold(f64::NEG_INFINITY, f64::max);
    let last = states.last().expect("final state").u.clone();
    Ok((
        ShortRun {
            rho_violation,
            kinetic_increase: ledger.max_kinetic_increase() / ledger.kinetic[0],
            mass_drift: ledger.max_relative_mass_drift(),
        },
        last,
    ))
}

fn evolve_density_bounds(seed: u64) -> Result<Measure> {
    Ok(Measure::at_most(short_run(seed, ScalarLaw::Affine { a: 0.05, b: 0.1 })?.0.rho_violation, 0.0))
}

fn evolve_energy_nonincreasing(seed: u64) -> Result<Measure> {
    Ok(Measure::at_most(short_run(seed, ScalarLaw::Affine { a: 0.05, b: 0.1 })?.0.kinetic_increase, 1e-6))
}

fn evolve_mass(seed: u64) -> Result<Measure> {
    Ok(Measure::at_most(short_run(seed, ScalarLaw::Affine { a: 0.05, b: 0.1 })?.0.mass_drift, 1e-6))
}

fn evolve_constant_odd(seed: u64) -> Result<Measure> {
    let (_, a) = short_run(seed, ScalarLaw::Const(0.0))?;
    let (_, b) = short_run(seed, ScalarLaw::Const(0.5))?;
    let diff = a.sub(&b);
    let l2 = |v: &VectorField| (v.dot(v).integral()).sqrt();
    Ok(Measure::at_most(l2(&diff), 1e-8))
}

fn random_interior(d: &RectDomain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v = vec![0.0; d.ext_len()];
    for i in 2..d.nx() {
        for j in 2..d.ny() {
            v[d.ext(i as isize, j as isize)] = rng.gen_range(-1.0..1.0);
        }
    }
    v
}

fn variable_mu(d: RectDomain) -> (NodeField, NodeField) {
    (
        NodeField::from_fn(d, |x, y| 1.0 + 0.5 * (3.0 * x).sin() * y),
        NodeField::from_fn(d, |x, y| 0.3 * (x - y) + 0.2 * (2.0 * y).cos()),
    )
}

fn stationary_l_symmetric(_seed: u64) -> Result<Measure> {
    let d = RectDomain::new(10, 12, 1.1, 1.3)?;
    let l = assemble_l(&variable_mu(d).0, 0.5, 2.0)?;
    Ok(Measure::at_most(l.max_asymmetry(1.0) / l.max_abs(), 1e-12))
}

fn stationary_a_antisymmetric(seed: u64) -> Result<Measure> {
    let d = RectDomain::new(10, 12, 1.1, 1.3)?;
    let (me, mo) = variable_mu(d);
    let l = assemble_l(&me, 0.5, 2.0)?;
    let a = assemble_a(&mo, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, q) = (random_interior(&d, &mut rng), random_interior(&d, &mut rng));
    let scale = l.form(&p, &p);
    Ok(Measure::at_most((a.form(&p, &q) + a.form(&q, &p)).abs().max(a.form(&p, &p).abs()) / scale, 1e-10))
}

fn stationary_a_constant(seed: u64) -> Result<Measure> {
    let d = RectDomain::unit_square(32)?;
    let a = assemble_a(&NodeField::constant(d, 0.8), 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let p = random_interior(&d, &mut rng);
        let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(a.apply(&p).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale);
    }
    Ok(Measure::at_most(worst, 1e-12))
}

fn stationary_homogeneous(_seed: u64) -> Result<Measure> {
    let d = RectDomain::unit_square(12)?;
    let b = DensityBounds::new(0.5, 2.0)?;
    let law = ViscosityLaw::new(ScalarLaw::Const(1.0), ScalarLaw::Const(0.3), 1.0, 1.0, b)?;
    let p = StationaryProblem::new(
        law,
        EtaFunction::affine(1.0, 0.5, 2.0)?,
        NodeVectorField::zeros(d),
        BoundaryData::homogeneous(d, 0.0),
    )?;
    Ok(Measure::at_most(picard_solve(&p, DEFAULT_DAMPING, DEFAULT_TOL, 10)?.iterations as f64, 1.0))
}

fn stationary_order(_seed: u64) -> Result<Measure> {
    let err = |n: usize| -> Result<f64> {
        let p = manufactured::problem(n)?;
        let s = picard_solve(&p, DEFAULT_DAMPING, DEFAULT_TOL, 100)?;
        Ok(s.phi.sub(&manufactured::phi_nodes(p.domain)).l2_norm())
    };
    Ok(Measure::at_least((err(16)? / err(32)?).log2(), 1.8))
}

fn unit_law() -> Result<ViscosityLaw> {
    ViscosityLaw::with_tight_bounds(ScalarLaw::Const(1.0), ScalarLaw::Const(1.0), DensityBounds::new(0.5, 3.0)?)
}

fn symmetric_couette(_seed: u64) -> Result<Measure> {
    let s = solve_parallel(&ParallelProblem {
        rho: Profile::constant(1.0),
        law: unit_law()?,
        c: 0.0,
        interval: (0.0, 1.0),
        u_a: 0.0,
        u_b: 1.0,
        mode: ParallelMode::PressureAbsorbed,
        n: 32,
    })?;
    let err = s.profile.iter().zip(&s.nodes).fold(0.0f64, |m, (u, x)| m.max((u - x).abs()));
    Ok(Measure::at_most(err, 1e-8))
}

fn symmetric_log(_seed: u64) -> Result<Measure> {
    let s = solve_concentric(&ConcentricProblem {
        rho: Profile::constant(1.0),
        law: unit_law()?,
        c: 2.0,
        c1: 0.0,
        r_in: 1.0,
        r_out: 2.0,
        g_in: 0.0,
        g_out: None,
        n: 32,
    })?;
    let err = s.profile.iter().zip(&s.nodes).fold(0.0f64, |m, (g, r)| m.max((g - r.ln()).abs()));
    Ok(Measure::at_most(err, 1e-8))
}

fn radial(nu_o: f64, rho: Profile) -> Result<Vec<f64>> {
    let law = ViscosityLaw::with_tight_bounds(ScalarLaw::Const(1.0), ScalarLaw::Const(nu_o), DensityBounds::new(0.5, 3.0)?)?;
    Ok(solve_radial(&RadialProblem {
        rho,
        law,
        c: 5.0,
        collocation_n: 32,
    })?
    .profile)
}

fn symmetric_radial_root(_seed: u64) -> Result<Measure> {
    let h = radial(1.0, Profile::constant(1.0))?;
    Ok(Measure::at_most(h.iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs())), 1e-10))
}

fn symmetric_radial_invariance(_seed: u64) -> Result<Measure> {
    let base = radial(0.0, Profile::sine(2.0, 0.5))?;
    let mut worst = 0.0f64;
    for c in [-1.0, 1.0] {
        let h = radial(c, Profile::sine(2.0, 0.5))?;
        worst = h.iter().zip(&base).fold(worst, |m, (a, b)| m.max((a - b).abs()));
    }
    Ok(Measure::at_most(worst, 1e-10))
}

fn dump_round_trip(seed: u64) -> Result<Measure> {
    let g = Grid2D::new(16, 12, 1.0, 2.0)?;
    let s: ScalarField = random_bandlimited_scalar(g, seed, 3)?;
    let d = FieldDump::from_scalar(&s, 0.5)?;
    let back = FieldDump::from_bytes(&d.to_bytes())?;
    let mismatches = back.data.iter().zip(&d.data).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
    Ok(Measure::at_most(mismatches as f64, 0.0))
}
