//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p oddflow --test acceptance -- --nocapture` to see
//! the table.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oddflow::app::{cmd_sweep, evolve_setup, EVOLVE_KEYS};
use oddflow::config::RunConfig;
use oddflow::evolve::{run, EnergyLedger, EvolveConfig, SimulationState};
use oddflow::field::{curl2d, grad, norms, random_divfree_field, Grid2D, VectorField};
use oddflow::stationary::{assemble_a, assemble_l, ellipticity_check, manufactured, picard_solve, NodeField, RectDomain, DEFAULT_DAMPING, DEFAULT_TOL};
use oddflow::symmetric::{
    radial_nonexistence_demo, solve_concentric, solve_parallel, solve_radial, ConcentricProblem, NonexistenceConfig, ParallelMode,
    ParallelProblem, Profile, RadialProblem,
};
use oddflow::viscosity::{check_pointwise_cancellation, check_weak_cancellation, DensityBounds, ScalarLaw, ViscosityLaw};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Density extremes and mass drift of one evolutionary run.
struct BoundRecord {
    run: String,
    bounds: (f64, f64),
    rho_range: (f64, f64),
    mass_drift: f64,
}

impl BoundRecord {
    fn from_ledger(run: impl Into<String>, bounds: &DensityBounds, l: &EnergyLedger) -> Self {
        BoundRecord {
            run: run.into(),
            bounds: (bounds.rho_star(), bounds.rho_upper()),
            rho_range: (
                l.rho_min.iter().copied().fold(f64::INFINITY, f64::min),
                l.rho_max.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ),
            mass_drift: l.max_relative_mass_drift(),
        }
    }

    fn holds(&self) -> bool {
        self.rho_range.0 >= self.bounds.0 && self.rho_range.1 <= self.bounds.1 && self.mass_drift <= 1e-6
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn config(name: &str) -> RunConfig {
    RunConfig::from_file(configs_dir().join(name)).expect("shipped config parses")
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn l2(v: &VectorField) -> f64 {
    norms(v).l2
}

fn grad_sup(u: &VectorField) -> f64 {
    grad(&u.component(0)).unwrap().max_abs().max(grad(&u.component(1)).unwrap().max_abs())
}

fn criterion_1() -> Outcome {
    let g = Grid2D::square_2pi(64).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let u = random_divfree_field(g, 1000 + seed, 16).unwrap();
        let s = grad_sup(&u);
        worst = worst.max(check_pointwise_cancellation(&u).unwrap() / (s * s));
    }
    outcome(worst <= 1e-12, format!("max |odd:even| / |grad u|^2 = {worst:.2e} (limit 1e-12, 100 fields, 64^2)"))
}

fn criterion_2() -> Outcome {
    let g = Grid2D::square_2pi(64).unwrap();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let u = random_divfree_field(g, 2000 + 2 * seed, 16).unwrap();
        let phi = random_divfree_field(g, 2001 + 2 * seed, 16).unwrap();
        let scale = grad_sup(&u) * grad_sup(&phi) * g.area();
        worst = worst.max(check_weak_cancellation(&u, &phi).unwrap() / scale);
    }
    outcome(worst <= 1e-10, format!("max |weak pairing| / scale = {worst:.2e} (limit 1e-10, 100 pairs)"))
}

fn criterion_3() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("nu.txt");
    std::fs::write(&table, "0.5 0.4\n1.0 0.9\n1.5 0.7\n2.0 1.2\n").unwrap();
    let laws = [
        ("const", ScalarLaw::Const(0.7)),
        ("affine", ScalarLaw::Affine { a: 0.3, b: 0.4 }),
        ("prop", ScalarLaw::Prop(0.6)),
        ("sin", ScalarLaw::Sine { base: 1.0, amp: 0.5 }),
        ("table", ScalarLaw::from_table_file(&table).unwrap()),
    ];
    let b = DensityBounds::new(0.5, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut worst_odd = 0.0f64;
    for (name, nu_e) in &laws {
        for (_, nu_o) in &laws {
            let law = ViscosityLaw::with_tight_bounds(nu_e.clone(), nu_o.clone(), b).unwrap();
            for _ in 0..1000 {
                let rho = rng.gen_range(0.5..=2.0);
                let xi = [0; 4].map(|_: i32| rng.gen_range(-1.0..1.0));
                let r = ellipticity_check(&law, &[rho], &[xi]);
                worst_odd = worst_odd.max(r.max_odd);
                if !r.holds(0.0) {
                    failures.push(*name);
                    break;
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("5x5 law pairs x 1000 samples, odd form max {worst_odd:.1e}, violations {failures:?}"),
    )
}

fn energy_run(dt: f64) -> (EvolveConfig, Vec<SimulationState>, EnergyLedger) {
    let mut cfg = config("energy.cfg");
    cfg.set("evolve", "dt", dt.to_string());
    let s = evolve_setup(&cfg.section("evolve", EVOLVE_KEYS).unwrap()).unwrap();
    let (states, ledger) = run(&s.config, &s.data).unwrap();
    (s.config, states, ledger)
}

fn criterion_4(bounds: &mut Vec<BoundRecord>) -> Outcome {
    let mut defects = Vec::new();
    let mut increase = 0.0f64;
    for dt in [2e-3, 1e-3, 5e-4] {
        let (c, _, l) = energy_run(dt);
        increase = increase.max(l.max_kinetic_increase() / l.kinetic[0]);
        defects.push(l.max_balance_defect());
        bounds.push(BoundRecord::from_ledger(format!("energy dt={dt}"), c.bounds(), &l));
    }
    let ratios = [defects[1] / defects[0], defects[2] / defects[1]];
    let c = defects.iter().zip([2e-3, 1e-3, 5e-4]).map(|(d, dt)| d / dt).fold(0.0f64, f64::max);
    outcome(
        increase <= 1e-6 && ratios.iter().all(|&r| r <= 0.55),
        format!(
            "max E increase/E(0) {increase:.1e}; defects {:.2e} {:.2e} {:.2e}, halving ratios {:.2} {:.2} (<= 0.55), C = {c:.2e}",
            defects[0], defects[1], defects[2], ratios[0], ratios[1]
        ),
    )
}

fn criterion_5(bounds: &mut Vec<BoundRecord>) -> Outcome {
    let mut finals = Vec::new();
    for nu_o in ["const:0", "const:0.5"] {
        let mut cfg = config("energy.cfg");
        cfg.set("evolve", "nu_o", nu_o);
        cfg.set("evolve", "mu_star", "0.18");
        cfg.set("evolve", "mu_upper", "0.5");
        let s = evolve_setup(&cfg.section("evolve", EVOLVE_KEYS).unwrap()).unwrap();
        let (states, l) = run(&s.config, &s.data).unwrap();
        bounds.push(BoundRecord::from_ledger(format!("neutrality nu_o={nu_o}"), s.config.bounds(), &l));
        finals.push(states.last().unwrap().clone());
    }
    let (a, b) = (&finals[0], &finals[1]);
    let du = l2(&a.u.sub(&b.u));
    // odd stress c(∇u⊥ + ∇⊥u) = -c∇ω is absorbed by the pressure
    let omega = curl2d(&a.u).unwrap();
    let residual = a.pressure.zip_map(&b.pressure, |p0, p1| p0 - p1).zip_map(&omega, |d, w| d - 0.5 * w);
    let dp = norms(&residual.map(|v| v - residual.mean())).l2;
    outcome(
        du <= 1e-8 && dp <= 1e-6,
        format!("|u_0 - u_0.5|_L2 = {du:.2e} (<= 1e-8), |p_0 - p_0.5 - 0.5 w|_L2 = {dp:.2e} (<= 1e-6) at T = {}", a.t),
    )
}

fn criterion_6(bounds: &mut Vec<BoundRecord>) -> Outcome {
    let cfg = config("sweep.cfg");
    let dir = tempfile::tempdir().unwrap();
    let rows = cmd_sweep(&cfg, dir.path()).unwrap();
    let b = DensityBounds::new(0.8, 1.6).unwrap();
    for r in &rows {
        bounds.push(BoundRecord {
            run: format!("sweep eps={}", r.eps),
            bounds: (b.rho_star(), b.rho_upper()),
            rho_range: (r.rho_min, r.rho_max),
            mass_drift: r.mass_drift,
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].l2_diff < w[0].l2_diff);
    let table: Vec<String> = rows.iter().map(|r| format!("{}:{:.3e}", r.eps, r.l2_diff)).collect();
    outcome(decreasing && rows.len() == 4, format!("|u^eps(1) - u^0(1)|_L2 = {}", table.join(" ")))
}

fn criterion_7(bounds: &mut Vec<BoundRecord>) -> Outcome {
    let cfg = config("taylor_green.cfg");
    let s = evolve_setup(&cfg.section("evolve", EVOLVE_KEYS).unwrap()).unwrap();
    let (states, l) = run(&s.config, &s.data).unwrap();
    bounds.push(BoundRecord::from_ledger("taylor-green", s.config.bounds(), &l));
    let last = states.last().unwrap();
    let nu = 0.05;
    let exact = states[0].u.scale((-2.0 * nu * last.t).exp());
    let rel = l2(&last.u.sub(&exact)) / l2(&exact);
    let dt_ok = (s.config.dt - 1e-3).abs() < 1e-15 && s.config.grid.n1() == 64;
    outcome(rel <= 1e-5 && dt_ok && last.t == 1.0, format!("|u(1) - u(0)e^(-2 nu)|_L2 / |.| = {rel:.2e} (<= 1e-5), dt 1e-3, 64^2"))
}

fn criterion_8() -> Outcome {
    let err = |n: usize| {
        let p = manufactured::problem(n).unwrap();
        let s = picard_solve(&p, DEFAULT_DAMPING, DEFAULT_TOL, 200).unwrap();
        s.phi.sub(&manufactured::phi_nodes(p.domain)).l2_norm()
    };
    let (e32, e64) = (err(32), err(64));
    let order = (e32 / e64).log2();
    outcome(order >= 1.8, format!("L2 errors {e32:.3e} (h = 1/32), {e64:.3e} (h = 1/64), order {order:.3} (>= 1.8)"))
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

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d = RectDomain::unit_square(64).unwrap();
    let mut vanish = 0.0f64;
    for c in [-1.0, -0.3, 0.5, 1.0] {
        let a = assemble_a(&NodeField::constant(d, c), 1.0).unwrap();
        for _ in 0..5 {
            let p = random_interior(&d, &mut rng);
            vanish = vanish.max(sup(&a.apply(&p)) / sup(&p));
        }
    }
    let d = RectDomain::new(30, 40, 1.55, 2.05).unwrap();
    let mo = NodeField::from_fn(d, |x, y| 0.4 * (3.0 * x).sin() * y + 0.2 * (x - y));
    let a = assemble_a(&mo, 1.0).unwrap();
    let l = assemble_l(&NodeField::constant(d, 1.0), 1.0, 1.0).unwrap();
    let mut anti = 0.0f64;
    for _ in 0..10 {
        let (p, q) = (random_interior(&d, &mut rng), random_interior(&d, &mut rng));
        let scale = l.form(&p, &p).max(l.form(&q, &q));
        anti = anti.max((a.form(&p, &q) + a.form(&q, &p)).abs() / scale);
    }
    outcome(
        vanish <= 1e-12 && anti <= 1e-10,
        format!("|A(const) phi|/|phi| = {vanish:.1e} (<= 1e-12), antisymmetry {anti:.1e} (<= 1e-10)"),
    )
}

fn law(nu_e: ScalarLaw, nu_o: ScalarLaw) -> ViscosityLaw {
    ViscosityLaw::with_tight_bounds(nu_e, nu_o, DensityBounds::new(0.5, 3.0).unwrap()).unwrap()
}

fn criterion_10() -> Outcome {
    let parallel = |c: f64, u_b: f64| {
        solve_parallel(&ParallelProblem {
            rho: Profile::constant(1.0),
            law: law(ScalarLaw::Const(1.0), ScalarLaw::Const(1.0)),
            c,
            interval: (0.0, 1.0),
            u_a: 0.0,
            u_b,
            mode: ParallelMode::PressureAbsorbed,
            n: 32,
        })
        .unwrap()
    };
    let s = parallel(0.0, 1.0);
    let couette = s.profile.iter().zip(&s.nodes).fold(0.0f64, |m, (u, x)| m.max((u - x).abs()));
    // μ_e u'' = C with u(0) = u(1) = 0
    let s = parallel(-2.0, 0.0);
    let poiseuille = s.profile.iter().zip(&s.nodes).fold(0.0f64, |m, (u, x)| m.max((u - x * (1.0 - x)).abs()));
    let s = solve_concentric(&ConcentricProblem {
        rho: Profile::constant(1.0),
        law: law(ScalarLaw::Const(1.0), ScalarLaw::Const(1.0)),
        c: 2.0,
        c1: 0.0,
        r_in: 1.0,
        r_out: 2.0,
        g_in: 0.0,
        g_out: None,
        n: 32,
    })
    .unwrap();
    let log = s.profile.iter().zip(&s.nodes).fold(0.0f64, |m, (g, r)| m.max((g - r.ln()).abs()));
    let radial = |nu_o: f64, rho: Profile| {
        solve_radial(&RadialProblem {
            rho,
            law: law(ScalarLaw::Const(1.0), ScalarLaw::Const(nu_o)),
            c: 5.0,
            collocation_n: 64,
        })
        .unwrap()
        .profile
    };
    let root = sup(&radial(1.0, Profile::constant(1.0)).iter().map(|h| h - 1.0).collect::<Vec<_>>());
    let base = radial(0.0, Profile::sine(2.0, 0.5));
    let mut spread = 0.0f64;
    for c in [-1.0, 1.0] {
        spread = radial(c, Profile::sine(2.0, 0.5)).iter().zip(&base).fold(spread, |m, (a, b)| m.max((a - b).abs()));
    }
    outcome(
        couette <= 1e-8 && poiseuille <= 1e-8 && log <= 1e-8 && root <= 1e-10 && spread <= 1e-10,
        format!("couette {couette:.1e}, poiseuille {poiseuille:.1e}, ln r {log:.1e}, h = 1 {root:.1e}, nu_o spread {spread:.1e}"),
    )
}

fn criterion_11() -> Outcome {
    let jump = radial_nonexistence_demo(&NonexistenceConfig::default()).unwrap();
    let growth_ok = jump.growth.iter().all(|&g| g >= 2.0);
    let stagnation_ok = jump.stagnation.iter().all(|&s| s >= 0.5);
    let shear = radial_nonexistence_demo(&NonexistenceConfig {
        mu_e: 0.1,
        ..Default::default()
    })
    .unwrap();
    let restored = shear.rows.iter().fold(0.0f64, |m, r| m.max(r.residual));
    let levels: Vec<usize> = jump.rows.iter().map(|r| r.n).collect();
    outcome(
        jump.indicator && (growth_ok || stagnation_ok) && shear.rows.iter().all(|r| r.converged) && restored <= 1e-10,
        format!(
            "levels {levels:?}: H1 growth {:?} (>= 2: {growth_ok}), residual/coarsest {:?} (>= 0.5: {stagnation_ok}); mu_e = 0.1 residual {restored:.1e}",
            jump.growth.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>(),
            jump.stagnation.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>(),
        ),
    )
}

fn criterion_12(bounds: &[BoundRecord]) -> Outcome {
    let bad: Vec<&str> = bounds.iter().filter(|b| !b.holds()).map(|b| b.run.as_str()).collect();
    let drift = bounds.iter().fold(0.0f64, |m, b| m.max(b.mass_drift));
    let margin = bounds.iter().fold(f64::INFINITY, |m, b| m.min(b.rho_range.0 - b.bounds.0).min(b.bounds.1 - b.rho_range.1));
    outcome(
        bad.is_empty() && !bounds.is_empty(),
        format!("{} runs, smallest distance to a bound {margin:.3e}, max mass drift {drift:.1e}, violations {bad:?}", bounds.len()),
    )
}

#[test]
fn acceptance_criteria() {
    let mut bounds = Vec::new();
    type Check<'a> = Box<dyn FnMut(&mut Vec<BoundRecord>) -> Outcome + 'a>;
    let criteria: Vec<(usize, f64, Check)> = vec![
        (1, 5.0, Box::new(|_| criterion_1())),
        (2, 5.0, Box::new(|_| criterion_2())),
        (3, 1.0, Box::new(|_| criterion_3())),
        (4, 120.0, Box::new(criterion_4)),
        (5, 240.0, Box::new(criterion_5)),
        (6, 600.0, Box::new(criterion_6)),
        (7, 60.0, Box::new(criterion_7)),
        (8, 120.0, Box::new(|_| criterion_8())),
        (9, 10.0, Box::new(|_| criterion_9())),
        (10, 30.0, Box::new(|_| criterion_10())),
        (11, 60.0, Box::new(|_| criterion_11())),
        (12, f64::INFINITY, Box::new(|b| criterion_12(b))),
    ];
    let mut failed = Vec::new();
    for (id, budget, mut check) in criteria {
        let start = Instant::now();
        let o = check(&mut bounds);
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= budget;
        let passed = o.passed && in_time;
        let limit = if budget.is_finite() { format!(" of {budget:.0} s") } else { String::new() };
        println!("criterion {id:>2}: {} | {} | {secs:.2} s{limit}", if passed { "PASS" } else { "FAIL" }, o.detail);
        if !passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
