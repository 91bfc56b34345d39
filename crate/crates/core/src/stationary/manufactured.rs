//! Manufactured clamped solution `φ* = x²(1-x)²y²(1-y)²` on the unit square
//! with `η(s) = 1 + s`, `ν_e(ρ) = 1 + ρ/2`, `ν_o(ρ) = ρ/4`.
//!
//! The strong residual `S = L_{μe}φ* + A_{μo}φ* - ∇⊥·div(η(φ*)∇⊥φ*⊗∇⊥φ*)` is
//! evaluated with truncated bivariate Taylor jets (exact derivatives), and the
//! force is `f = (∫₀^y S(x, t) dt, 0)` so that `-∇⊥·f = ∂₂f₁ = S`.

use std::ops::{Add, Mul, Sub};

use super::{boundary_data_from_g, EtaFunction, NodeField, NodeVectorField, RectDomain, StationaryProblem};
use crate::error::Result;
use crate::quadrature::gauss_legendre;
use crate::viscosity::{DensityBounds, ScalarLaw, ViscosityLaw};

const D: usize = 4;

/// Taylor coefficients `c[a][b]` of `dxᵃ dyᵇ`, truncated at total degree 4.
#[derive(Debug, Clone, Copy)]
struct Jet {
    c: [[f64; D + 1]; D + 1],
}

impl Jet {
    fn constant(v: f64) -> Self {
        let mut c = [[0.0; D + 1]; D + 1];
        c[0][0] = v;
        Self { c }
    }
    fn var(v: f64, axis: usize) -> Self {
        let mut j = Self::constant(v);
        if axis == 0 {
            j.c[1][0] = 1.0;
        } else {
            j.c[0][1] = 1.0;
        }
        j
    }
    fn value(&self) -> f64 {
        self.c[0][0]
    }
    fn scale(self, s: f64) -> Self {
        let mut r = self;
        r.c.iter_mut().flatten().for_each(|v| *v *= s);
        r
    }
    fn dx(self) -> Self {
        let mut r = Self::constant(0.0);
        for a in 0..D {
            for b in 0..D - a {
                r.c[a][b] = (a + 1) as f64 * self.c[a + 1][b];
            }
        }
        r
    }
    fn dy(self) -> Self {
        let mut r = Self::constant(0.0);
        for a in 0..D {
            for b in 0..D - a {
                r.c[a][b] = (b + 1) as f64 * self.c[a][b + 1];
            }
        }
        r
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        for a in 0..=D {
            for b in 0..=D {
                r.c[a][b] += o.c[a][b];
            }
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + o.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut r = Self::constant(0.0);
        for a in 0..=D {
            for b in 0..=D - a {
                let mut s = 0.0;
                for i in 0..=a {
                    for j in 0..=b {
                        s += self.c[i][j] * o.c[a - i][b - j];
                    }
                }
                r.c[a][b] = s;
            }
        }
        r
    }
}

fn bump(t: Jet) -> Jet {
    let one_minus = Jet::constant(1.0) - t;
    t * t * one_minus * one_minus
}

/// `φ*(x, y)`
pub fn phi_exact(x: f64, y: f64) -> f64 {
    (x * x * (1.0 - x).powi(2)) * (y * y * (1.0 - y).powi(2))
}

/// `∇⊥φ* = (-∂₂φ*, ∂₁φ*)`
pub fn velocity_exact(x: f64, y: f64) -> (f64, f64) {
    let p = |t: f64| t * t * (1.0 - t).powi(2);
    let dp = |t: f64| 2.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (-p(x) * dp(y), dp(x) * p(y))
}

/// Strong residual `S(x, y)` of `φ*`.
pub fn source(x: f64, y: f64) -> f64 {
    let (op, conv) = parts(x, y);
    op - conv
}

/// `L_{μe}φ* + A_{μo}φ*`, which equals `-∇⊥·f + ∇⊥·div(η(φ*)u*⊗u*)` for the manufactured force.
pub fn operator_part(x: f64, y: f64) -> f64 {
    parts(x, y).0
}

/// `(L_{μe}φ* + A_{μo}φ*, ∇⊥·div(η(φ*)u*⊗u*))`
fn parts(x: f64, y: f64) -> (f64, f64) {
    let phi = bump(Jet::var(x, 0)) * bump(Jet::var(y, 1));
    let rho = phi + Jet::constant(1.0);
    let mu_e = Jet::constant(1.0) + rho.scale(0.5);
    let mu_o = rho.scale(0.25);
    let dyy = |j: Jet| j.dy().dy();
    let dxx = |j: Jet| j.dx().dx();
    let two_dxy = |j: Jet| j.dx().dy().scale(2.0);
    let da = dyy(phi) - dxx(phi);
    let db = two_dxy(phi);
    let l = dyy(mu_e * da) - dxx(mu_e * da) + two_dxy(mu_e * db);
    let a = dyy(mu_o * db) - dxx(mu_o * db) - two_dxy(mu_o * da);
    let (u1, u2) = (phi.dy().scale(-1.0), phi.dx());
    let (t11, t12, t22) = (rho * u1 * u1, rho * u1 * u2, rho * u2 * u2);
    let v1 = t11.dx() + t12.dy();
    let v2 = t12.dx() + t22.dy();
    let curl = v2.dx() - v1.dy();
    ((l + a).value(), curl.value())
}

/// `f₁(x, y) = ∫₀^y S(x, t) dt`, exact for the polynomial `S`.
pub fn force_exact(x: f64, y: f64, rule: &[(f64, f64)]) -> f64 {
    rule.iter().map(|&(t, w)| 0.5 * y * w * source(x, 0.5 * y * (t + 1.0))).sum()
}

/// The viscosity law of the manufactured problem.
pub fn law() -> ViscosityLaw {
    let bounds = DensityBounds::new(0.5, 2.0).expect("valid bounds");
    ViscosityLaw::new(ScalarLaw::Affine { a: 1.0, b: 0.5 }, ScalarLaw::Prop(0.25), 1.0, 2.0, bounds).expect("valid law")
}

/// Manufactured problem on the unit square with mesh width `1/n`.
pub fn problem(n: usize) -> Result<StationaryProblem> {
    let d = RectDomain::unit_square(n)?;
    let rule = gauss_legendre(10);
    let f = NodeVectorField::from_fn(d, |x, y| (force_exact(x, y, &rule), 0.0));
    let eta = EtaFunction::affine(1.0, 1.0, 2.0)?;
    StationaryProblem::new(law(), eta, f, boundary_data_from_g(d, |_, _| (0.0, 0.0), 0.0)?)
}

/// `φ*` sampled on the nodes of `d`.
pub fn phi_nodes(d: RectDomain) -> NodeField {
    NodeField::from_fn(d, phi_exact)
}
