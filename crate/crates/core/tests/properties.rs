//! Property tests for the invariants of every module.

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oddflow::app::{exit_code, EXIT_INVALID, EXIT_SOLVER};
use oddflow::evolve::{run, EvolveConfig, Forcing, InitialData};
use oddflow::field::{
    curl2d, div_tensor, divergence, grad, leray_project, norms, perp_grad, random_bandlimited_scalar, random_divfree_field, Grid2D,
    ScalarField, VectorField,
};
use oddflow::io::{FieldDump, FieldKind};
use oddflow::stationary::{assemble_a, assemble_l, boundary_data_from_g, ellipticity_check, NodeField, RectDomain};
use oddflow::symmetric::{solve_concentric, solve_radial, ConcentricProblem, Profile, RadialProblem};
use oddflow::viscosity::{check_pointwise_cancellation, check_weak_cancellation, strain_odd, strain_sym, DensityBounds, ScalarLaw, ViscosityLaw};
use oddflow::Error;

fn torus() -> Grid2D {
    Grid2D::square_2pi(32).unwrap()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn scalar(seed: u64, cutoff: usize) -> ScalarField {
    random_bandlimited_scalar(torus(), seed, cutoff).unwrap()
}

fn vector(seed: u64, cutoff: usize) -> VectorField {
    VectorField::from_components(scalar(seed, cutoff), scalar(seed ^ 0x5555, cutoff)).unwrap()
}

fn divfree(seed: u64, cutoff: usize) -> VectorField {
    random_divfree_field(torus(), seed, cutoff).unwrap()
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

fn law_strategy() -> impl Strategy<Value = ScalarLaw> {
    prop_oneof![
        (0.2..3.0f64).prop_map(ScalarLaw::Const),
        (0.2..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| ScalarLaw::Affine { a, b }),
        (0.2..2.0f64).prop_map(ScalarLaw::Prop),
        (1.2..2.0f64, 0.0..1.0f64).prop_map(|(base, amp)| ScalarLaw::Sine { base, amp }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn perp_identities(seed in any::<u64>(), cutoff in 1usize..=10) {
        let s = scalar(seed, cutoff);
        let scale = grad(&s).unwrap().max_abs().max(1.0);
        prop_assert!(divergence(&perp_grad(&s).unwrap()).unwrap().max_abs() <= 1e-12 * scale);
        prop_assert!(curl2d(&grad(&s).unwrap()).unwrap().max_abs() <= 1e-12 * scale);
    }

    #[test]
    fn leray_is_idempotent_and_kills_gradients(seed in any::<u64>(), cutoff in 1usize..=10) {
        let v = vector(seed, cutoff);
        let p = leray_project(&v).unwrap();
        prop_assert!(leray_project(&p).unwrap().sub(&p).max_abs() <= 1e-12 * v.max_abs().max(1.0));
        let g = grad(&scalar(seed.wrapping_add(7), cutoff)).unwrap();
        prop_assert!(leray_project(&g).unwrap().max_abs() <= 1e-12 * g.max_abs().max(1.0));
    }

    #[test]
    fn spectral_derivative_of_trig_polynomial(k1 in -10i32..=10, k2 in -10i32..=10, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (k1, k2) = (k1 as f64, k2 as f64);
        let s = ScalarField::from_fn(torus(), |x, y| a * (k1 * x + k2 * y).cos() + b * (k1 * x + k2 * y).sin());
        let exact = VectorField::from_fn(torus(), |x, y| {
            let d = -a * (k1 * x + k2 * y).sin() + b * (k1 * x + k2 * y).cos();
            (k1 * d, k2 * d)
        });
        prop_assert!(grad(&s).unwrap().sub(&exact).max_abs() <= 1e-12 * (1.0 + exact.max_abs()));
    }

    #[test]
    fn quadrature_norms_of_monomials(k1 in -12i32..=12, k2 in -12i32..=12, len1 in 0.5..4.0f64, len2 in 0.5..4.0f64) {
        prop_assume!(k1 != 0 || k2 != 0);
        let g = Grid2D::new(32, 32, len1, len2).unwrap();
        let (w1, w2) = (2.0 * PI * k1 as f64 / len1, 2.0 * PI * k2 as f64 / len2);
        let s = ScalarField::from_fn(g, |x, y| (w1 * x + w2 * y).sin());
        let n = norms(&s);
        let area = len1 * len2;
        prop_assert!((n.l2 - (area / 2.0).sqrt()).abs() <= 1e-12 * area.sqrt());
        let h1 = ((w1 * w1 + w2 * w2) * area / 2.0).sqrt();
        prop_assert!((n.h1_semi - h1).abs() <= 1e-12 * h1);
        prop_assert!(n.linf <= 1.0 + 1e-15);
    }

    #[test]
    fn strain_tensors_are_symmetric(seed in any::<u64>(), cutoff in 1usize..=10) {
        let u = vector(seed, cutoff);
        let [a11, a12, a21, a22] = strain_sym(&u).unwrap().entries().map(<[f64]>::to_vec);
        prop_assert!(a12 == a21);
        prop_assert!(a11.len() == a22.len());
        let [o11, o12, o21, o22] = strain_odd(&u).unwrap().entries().map(<[f64]>::to_vec);
        prop_assert!(o12 == o21);
        prop_assert!(o11.iter().zip(&o22).all(|(x, y)| x + y == 0.0));
    }

    #[test]
    fn pointwise_cancellation(seed in any::<u64>(), cutoff in 1usize..=10) {
        let u = divfree(seed, cutoff);
        let scale = grad(&u.component(0)).unwrap().max_abs().max(grad(&u.component(1)).unwrap().max_abs());
        prop_assert!(check_pointwise_cancellation(&u).unwrap() <= 1e-12 * scale * scale);
    }

    #[test]
    fn weak_cancellation(seed in any::<u64>(), cutoff in 1usize..=10) {
        let (u, phi) = (divfree(seed, cutoff), divfree(seed.wrapping_add(1), cutoff));
        let scale = u.max_abs() * phi.max_abs() * torus().area();
        prop_assert!(check_weak_cancellation(&u, &phi).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn constant_odd_stress_is_a_gradient(seed in any::<u64>(), c in -2.0..2.0f64) {
        let u = divfree(seed, 8);
        let d = div_tensor(&strain_odd(&u).unwrap().scale(c)).unwrap();
        prop_assert!(curl2d(&d).unwrap().max_abs() <= 1e-10 * d.max_abs().max(1.0));
    }

    #[test]
    fn constant_odd_viscosity_generates_no_stationary_forcing(seed in any::<u64>(), c in -1.0..1.0f64) {
        let d = RectDomain::unit_square(24).unwrap();
        let a = assemble_a(&NodeField::constant(d, c), 1.0).unwrap();
        let p = random_interior(&d, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(sup(&a.apply(&p)) <= 1e-12 * sup(&p));
    }

    #[test]
    fn odd_form_is_antisymmetric(seed in any::<u64>(), amp in 0.0..1.0f64, k in 1.0..5.0f64) {
        let d = RectDomain::new(10, 12, 1.1, 1.3).unwrap();
        let mo = NodeField::from_fn(d, |x, y| amp * (k * x).sin() * (y - 0.5));
        let a = assemble_a(&mo, 1.0).unwrap();
        let l = assemble_l(&NodeField::constant(d, 1.0), 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (random_interior(&d, &mut rng), random_interior(&d, &mut rng));
        let scale = l.form(&p, &p).max(l.form(&q, &q));
        prop_assert!((a.form(&p, &q) + a.form(&q, &p)).abs() <= 1e-10 * scale);
    }

    #[test]
    fn ellipticity_holds_for_builtin_laws(ne in law_strategy(), no in law_strategy(), seed in any::<u64>()) {
        let law = ViscosityLaw::with_tight_bounds(ne, no, DensityBounds::new(0.5, 2.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho: Vec<f64> = (0..16).map(|_| rng.gen_range(0.5..=2.0)).collect();
        let xi: Vec<[f64; 4]> = (0..64).map(|_| [0; 4].map(|_: i32| rng.gen_range(-1.0..1.0))).collect();
        prop_assert!(ellipticity_check(&law, &rho, &xi).holds(1e-12));
    }

    #[test]
    fn boundary_potential_of_uniform_velocity(g1 in -2.0..2.0f64, g2 in -2.0..2.0f64, c0 in -1.0..1.0f64, nx in 8usize..24) {
        let d = RectDomain::new(nx, 11, (nx + 1) as f64 / 12.0, 1.0).unwrap();
        let b = boundary_data_from_g(d, |_, _| (g1, g2), c0).unwrap();
        prop_assert!(b.flux().abs() <= 1e-10);
        // the stream function of a uniform flow
        for (k, &(i, j)) in b.walk().iter().enumerate() {
            let (x, y) = d.point(i, j);
            prop_assert!((b.phi0()[k] - (c0 - g1 * y + g2 * x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn concentric_profile_ignores_odd_viscosity(nu_o in -1.0..1.0f64, c in -3.0..3.0f64, g_in in -1.0..1.0f64) {
        let solve = |o: f64| {
            let law = ViscosityLaw::with_tight_bounds(ScalarLaw::Affine { a: 1.0, b: 0.5 }, ScalarLaw::Const(o), DensityBounds::new(0.5, 3.0).unwrap()).unwrap();
            solve_concentric(&ConcentricProblem {
                rho: Profile::sine(1.5, 0.5), law, c, c1: 0.2, r_in: 1.0, r_out: 2.0, g_in, g_out: None, n: 32,
            }).unwrap().profile
        };
        let (a, b) = (solve(0.0), solve(nu_o));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12));
    }

    #[test]
    fn field_dump_round_trip(kind in 0usize..3, n1 in 1usize..9, n2 in 1usize..9, time in -1e3..1e3f64, seed in any::<u64>()) {
        let (kind, comps) = [(FieldKind::Scalar, 1), (FieldKind::Vector, 2), (FieldKind::Tensor, 4)][kind];
        let (n1, n2) = (2 * n1 + 2, 2 * n2 + 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..comps * n1 * n2).map(|_| f64::from_bits(rng.gen::<u64>() & !(0x7ff << 52)) * 1e300).collect();
        let d = FieldDump::new(kind, n1, n2, 1.5, 2.5, time, data).unwrap();
        let back = FieldDump::from_bytes(&d.to_bytes()).unwrap();
        prop_assert!(back.kind == d.kind && back.n1 == d.n1 && back.n2 == d.n2 && back.time.to_bits() == d.time.to_bits());
        prop_assert!(back.data.iter().zip(&d.data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn exit_codes_are_documented(which in 0usize..8, x in -1e3..1e3f64, k in 0usize..1000) {
        let (e, code) = match which {
            0 => (Error::CgNotConverged { iterations: k, residual: x }, EXIT_SOLVER),
            1 => (Error::PicardNotConverged { iterations: k, last_update: x }, EXIT_SOLVER),
            2 => (Error::NewtonNotConverged { iterations: k, residual: x }, EXIT_SOLVER),
            3 => (Error::SingularMatrix(k), EXIT_SOLVER),
            4 => (Error::NonzeroFlux(x), EXIT_INVALID),
            5 => (Error::DensityOutOfBounds { value: x, lower: 0.5, upper: 2.0 }, EXIT_INVALID),
            6 => (Error::Cfl { dt: x, limit: 1.0 }, EXIT_INVALID),
            _ => (Error::param("dt", format!("{x}")), EXIT_INVALID),
        };
        prop_assert_eq!(exit_code(&e), code);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn evolution_keeps_bounds_divergence_and_energy(seed in any::<u64>(), nu_o in -0.3..0.3f64) {
        let g = Grid2D::square_2pi(16).unwrap();
        let b = DensityBounds::new(0.8, 1.6).unwrap();
        let rho = random_bandlimited_scalar(g, seed, 3).unwrap().map(|v| 1.2 + 0.3 * (0.5 * v).tanh());
        let u = random_divfree_field(g, seed.wrapping_add(1), 4).unwrap();
        let u = u.scale(0.5 / u.max_abs());
        let law = ViscosityLaw::with_tight_bounds(ScalarLaw::Affine { a: 0.1, b: 0.1 }, ScalarLaw::Const(nu_o), b).unwrap();
        let mut cfg = EvolveConfig::new(g, 5e-3, 0.05, law).unwrap();
        cfg.output_interval = Some(0.01);
        let (states, ledger) = run(&cfg, &InitialData::new(rho, u, Forcing::Zero)).unwrap();
        for s in &states {
            prop_assert!(s.rho.min() >= b.rho_star() && s.rho.max() <= b.rho_upper());
            prop_assert!(divergence(&s.u).unwrap().max_abs() <= 1e-8);
        }
        prop_assert!(ledger.max_kinetic_increase() <= 1e-6 * ledger.kinetic[0]);
    }

    #[test]
    fn radial_solution_ignores_constant_odd_viscosity(nu_o in -1.0..1.0f64, amp in 0.0..0.5f64) {
        let solve = |o: f64| {
            let law = ViscosityLaw::with_tight_bounds(ScalarLaw::Const(1.0), ScalarLaw::Const(o), DensityBounds::new(0.5, 3.0).unwrap()).unwrap();
            solve_radial(&RadialProblem { rho: Profile::sine(2.0, amp), law, c: 5.0, collocation_n: 32 }).unwrap().profile
        };
        let (a, b) = (solve(0.0), solve(nu_o));
        prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-10));
    }
}
