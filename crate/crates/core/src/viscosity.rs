//! Density-dependent shear and odd viscosities, strain tensors and the
//! energy-neutrality identities of the odd stress.

use std::fmt;
use std::path::Path;
use std::cell::Cell;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::ops::{divergence_raw_max, velocity_gradient_raw};
use crate::field::{ScalarField, TensorField, VectorField};

const BOUND_SAMPLES: usize = 10_000;

/// A real function of one variable used for `ν_e`, `ν_o` and `η`.
#[derive(Clone)]
pub enum ScalarLaw {
    Const(f64),
    /// `a + b r`
    Affine { a: f64, b: f64 },
    /// `c r`
    Prop(f64),
    /// `base + amp sin r`
    Sine { base: f64, amp: f64 },
    /// Piecewise linear through `(r, value)` nodes sorted by `r`, constant outside.
    Table(Vec<(f64, f64)>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalarLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(v) => write!(f, "const:{v}"),
            Self::Affine { a, b } => write!(f, "affine:{a},{b}"),
            Self::Prop(c) => write!(f, "prop:{c}"),
            Self::Sine { base, amp } => write!(f, "sin:{base},{amp}"),
            Self::Table(t) => write!(f, "table[{} nodes]", t.len()),
            Self::Custom(_) => write!(f, "custom"),
        }
    }
}

fn parse_num(s: &str, spec: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::param("law", format!("bad number `{s}` in `{spec}`")))
}

fn parse_two(args: &str, spec: &str) -> Result<(f64, f64)> {
    let mut it = args.split(',');
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((parse_num(a, spec)?, parse_num(b, spec)?)),
        _ => Err(Error::param("law", format!("`{spec}` needs two comma-separated numbers"))),
    }
}

impl ScalarLaw {
    /// Parse `const:<v>`, `affine:<a>,<b>`, `prop:<c>`, `sin:<base>,<amp>` or `table:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::param("law", format!("`{spec}` is not of the form kind:args")))?;
        match kind.trim() {
            "const" => Ok(Self::Const(parse_num(args, spec)?)),
            "prop" => Ok(Self::Prop(parse_num(args, spec)?)),
            "affine" => {
                let (a, b) = parse_two(args, spec)?;
                Ok(Self::Affine { a, b })
            }
            "sin" => {
                let (base, amp) = parse_two(args, spec)?;
                Ok(Self::Sine { base, amp })
            }
            "table" => Self::from_table_file(args.trim()),
            other => Err(Error::param("law", format!("unknown law kind `{other}`"))),
        }
    }

    /// Two columns `r value` per line, separated by whitespace or a comma; `#` starts a comment.
    pub fn from_table_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let mut nodes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::param("law", format!("table line {}: expected two columns", lineno + 1)));
            }
            nodes.push((parse_num(cols[0], line)?, parse_num(cols[1], line)?));
        }
        Self::table(nodes)
    }

    pub fn table(nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::param("law", "empty table"));
        }
        if nodes.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::param("law", "table abscissae must be strictly increasing"));
        }
        Ok(Self::Table(nodes))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Const(v) => *v,
            Self::Affine { a, b } => a + b * r,
            Self::Prop(c) => c * r,
            Self::Sine { base, amp } => base + amp * r.sin(),
            Self::Table(t) => interp_table(t, r),
            Self::Custom(f) => f(r),
        }
    }

    /// Min and max over `BOUND_SAMPLES` equispaced points of `[lo, hi]`.
    pub fn sampled_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for k in 0..BOUND_SAMPLES {
            let r = if hi > lo { lo + (hi - lo) * k as f64 / (BOUND_SAMPLES - 1) as f64 } else { lo };
            let v = self.eval(r);
            if v.is_nan() {
                return (f64::NAN, f64::NAN);
            }
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }
}

/// Piecewise linear interpolation through sorted nodes, constant outside.
pub(crate) fn interp_table(t: &[(f64, f64)], r: f64) -> f64 {
    let k = t.partition_point(|&(x, _)| x <= r);
    if k == 0 {
        t[0].1
    } else if k == t.len() {
        t[k - 1].1
    } else {
        let (x0, y0) = t[k - 1];
        let (x1, y1) = t[k];
        y0 + (y1 - y0) * (r - x0) / (x1 - x0)
    }
}

/// Admissible density range `0 < ρ_* <= ρ <= ρ^*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBounds {
    rho_star: f64,
    rho_upper: f64,
}

impl DensityBounds {
    pub fn new(rho_star: f64, rho_upper: f64) -> Result<Self> {
        if !(rho_star.is_finite() && rho_star > 0.0) {
            return Err(Error::param("rho_star", format!("{rho_star} must be positive")));
        }
        if !(rho_upper.is_finite() && rho_upper >= rho_star) {
            return Err(Error::param("rho_upper", format!("{rho_upper} must be >= rho_star = {rho_star}")));
        }
        Ok(Self { rho_star, rho_upper })
    }

    pub fn rho_star(&self) -> f64 {
        self.rho_star
    }
    pub fn rho_upper(&self) -> f64 {
        self.rho_upper
    }

    fn slack(&self) -> f64 {
        1e-12 * self.rho_upper
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.rho_star - self.slack() && r <= self.rho_upper + self.slack()
    }

    pub fn check(&self, rho: &ScalarField) -> Result<()> {
        rho.validate()?;
        for &r in rho.values() {
            if !self.contains(r) {
                return Err(Error::DensityOutOfBounds {
                    value: r,
                    lower: self.rho_star,
                    upper: self.rho_upper,
                });
            }
        }
        Ok(())
    }
}

/// Shear viscosity `ν_e` and odd viscosity `ν_o` as functions of density.
#[derive(Debug, Clone)]
pub struct ViscosityLaw {
    nu_e: ScalarLaw,
    nu_o: ScalarLaw,
    mu_star: f64,
    mu_upper: f64,
    bounds: DensityBounds,
}

impl ViscosityLaw {
    /// Checks `μ_* <= ν_e <= μ^*` and `|ν_o| <= μ^*` on sampled densities in `bounds`.
    pub fn new(nu_e: ScalarLaw, nu_o: ScalarLaw, mu_star: f64, mu_upper: f64, bounds: DensityBounds) -> Result<Self> {
        if !(mu_star.is_finite() && mu_star > 0.0) {
            return Err(Error::param("mu_star", format!("{mu_star} must be positive")));
        }
        if !(mu_upper.is_finite() && mu_upper >= mu_star) {
            return Err(Error::param("mu_upper", format!("{mu_upper} must be >= mu_star")));
        }
        let (lo, hi) = (bounds.rho_star, bounds.rho_upper);
        let (e_min, e_max) = nu_e.sampled_range(lo, hi);
        if e_min.is_nan() || e_min < mu_star {
            return Err(Error::CoefficientOutOfBounds { value: e_min, lower: mu_star, upper: mu_upper });
        }
        if e_max > mu_upper {
            return Err(Error::CoefficientOutOfBounds { value: e_max, lower: mu_star, upper: mu_upper });
        }
        let (o_min, o_max) = nu_o.sampled_range(lo, hi);
        if o_min.is_nan() || o_min < -mu_upper {
            return Err(Error::CoefficientOutOfBounds { value: o_min, lower: -mu_upper, upper: mu_upper });
        }
        if o_max > mu_upper {
            return Err(Error::CoefficientOutOfBounds { value: o_max, lower: -mu_upper, upper: mu_upper });
        }
        Ok(Self { nu_e, nu_o, mu_star, mu_upper, bounds })
    }

    /// Bounds taken as the sampled range of `ν_e` and the largest `|ν_o|`.
    pub fn with_tight_bounds(nu_e: ScalarLaw, nu_o: ScalarLaw, bounds: DensityBounds) -> Result<Self> {
        let (e_min, e_max) = nu_e.sampled_range(bounds.rho_star, bounds.rho_upper);
        let (o_min, o_max) = nu_o.sampled_range(bounds.rho_star, bounds.rho_upper);
        let upper = e_max.max(o_min.abs()).max(o_max.abs());
        Self::new(nu_e, nu_o, e_min, upper, bounds)
    }

    pub fn nu_e(&self) -> &ScalarLaw {
        &self.nu_e
    }
    pub fn nu_o(&self) -> &ScalarLaw {
        &self.nu_o
    }
    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }
    pub fn mu_upper(&self) -> f64 {
        self.mu_upper
    }
    pub fn bounds(&self) -> &DensityBounds {
        &self.bounds
    }

    pub fn mu_e(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|r| self.nu_e.eval(r))
    }

    pub fn mu_o(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|r| self.nu_o.eval(r))
    }
}

thread_local! {
    static FAULT: Cell<bool> = const { Cell::new(false) };
}

/// Test hook: flips the sign of the off-diagonal entries of [`strain_odd`]
/// on the calling thread.
#[doc(hidden)]
pub fn set_fault_injection(on: bool) {
    FAULT.with(|f| f.set(on));
}

/// Entries `(S11, S12, S22)` of `∇u + ∇ᵀu` and `(-a, b, a)` of `∇u⊥ + ∇⊥u`
/// from the velocity gradient `(∂1u1, ∂2u1, ∂1u2, ∂2u2)`.
pub(crate) struct Strains {
    pub s11: Vec<f64>,
    pub s12: Vec<f64>,
    pub s22: Vec<f64>,
    /// `∂1u2 + ∂2u1`
    pub a: Vec<f64>,
    /// `∂1u1 - ∂2u2`
    pub b: Vec<f64>,
}

pub(crate) fn strains_from_gradient(g: &[Vec<f64>; 4]) -> Strains {
    let [d1u1, d2u1, d1u2, d2u2] = g;
    let n = d1u1.len();
    let sign = if FAULT.with(|f| f.get()) { -1.0 } else { 1.0 };
    let mut s = Strains {
        s11: Vec::with_capacity(n),
        s12: Vec::with_capacity(n),
        s22: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
    };
    for k in 0..n {
        s.s11.push(2.0 * d1u1[k]);
        s.s22.push(2.0 * d2u2[k]);
        s.s12.push(d2u1[k] + d1u2[k]);
        s.a.push(d1u2[k] + d2u1[k]);
        s.b.push(sign * (d1u1[k] - d2u2[k]));
    }
    s
}

fn strains(u: &VectorField) -> Result<Strains> {
    u.validate()?;
    Ok(strains_from_gradient(&velocity_gradient_raw(u.grid(), u.comp1(), u.comp2())))
}

/// Symmetric strain `∇u + ∇ᵀu`.
pub fn strain_sym(u: &VectorField) -> Result<TensorField> {
    let s = strains(u)?;
    Ok(TensorField::new_unchecked(*u.grid(), s.s11, s.s12.clone(), s.s12, s.s22))
}

/// Odd strain `∇u⊥ + ∇⊥u = [[-a, b], [b, a]]` with `a = ∂1u2 + ∂2u1`, `b = ∂1u1 - ∂2u2`.
pub fn strain_odd(u: &VectorField) -> Result<TensorField> {
    let s = strains(u)?;
    let minus_a = s.a.iter().map(|v| -v).collect();
    Ok(TensorField::new_unchecked(*u.grid(), minus_a, s.b.clone(), s.b, s.a))
}

/// `σ = ν_e(ρ)(∇u + ∇ᵀu) + ν_o(ρ)(∇u⊥ + ∇⊥u)`.
pub fn viscous_stress(law: &ViscosityLaw, rho: &ScalarField, u: &VectorField) -> Result<TensorField> {
    if rho.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    law.bounds().check(rho)?;
    let s = strains(u)?;
    let me = law.mu_e(rho);
    let mo = law.mu_o(rho);
    let (me, mo) = (me.values(), mo.values());
    let n = me.len();
    let mut t = TensorField::zeros(*u.grid());
    for k in 0..n {
        t.t11[k] = me[k] * s.s11[k] - mo[k] * s.a[k];
        t.t12[k] = me[k] * s.s12[k] + mo[k] * s.b[k];
        t.t21[k] = t.t12[k];
        t.t22[k] = me[k] * s.s22[k] + mo[k] * s.a[k];
    }
    Ok(t)
}

/// `max_x |(∇u⊥ + ∇⊥u) : (∇u + ∇ᵀu)|`.
pub fn check_pointwise_cancellation(u: &VectorField) -> Result<f64> {
    let s = strains(u)?;
    let mut worst = 0.0f64;
    for k in 0..s.a.len() {
        let p = -s.a[k] * s.s11[k] + 2.0 * s.b[k] * s.s12[k] + s.a[k] * s.s22[k];
        worst = worst.max(p.abs());
    }
    Ok(worst)
}

/// Divergence above which [`check_weak_cancellation`] rejects its inputs.
pub const WEAK_CANCELLATION_DIV_TOL: f64 = 1e-8;

/// `|∫ (∇u⊥ + ∇⊥u) : (∇φ + ∇ᵀφ) dx|` for divergence-free `u`, `φ`.
pub fn check_weak_cancellation(u: &VectorField, phi: &VectorField) -> Result<f64> {
    if u.grid() != phi.grid() {
        return Err(Error::GridMismatch);
    }
    for f in [u, phi] {
        f.validate()?;
        let d = divergence_raw_max(f.grid(), f.comp1(), f.comp2());
        if d > WEAK_CANCELLATION_DIV_TOL {
            return Err(Error::NotDivergenceFree(d));
        }
    }
    let su = strains(u)?;
    let sp = strains(phi)?;
    let mut sum = 0.0;
    for k in 0..su.a.len() {
        sum += -su.a[k] * sp.s11[k] + 2.0 * su.b[k] * sp.s12[k] + su.a[k] * sp.s22[k];
    }
    Ok((sum * u.grid().cell_area()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{curl2d, div_tensor, random_divfree_field, Grid2D};

    fn grid() -> Grid2D {
        Grid2D::square_2pi(32).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    fn shear() -> VectorField {
        VectorField::from_fn(grid(), |_, y| (y.sin(), 0.0))
    }

    fn bounds() -> DensityBounds {
        DensityBounds::new(0.5, 2.0).unwrap()
    }

    #[test]
    fn parse_laws() {
        assert!((ScalarLaw::parse("const:0.3").unwrap().eval(7.0) - 0.3).abs() < 1e-15);
        assert!((ScalarLaw::parse("affine:1,0.5").unwrap().eval(2.0) - 2.0).abs() < 1e-15);
        assert!((ScalarLaw::parse("prop:2").unwrap().eval(1.5) - 3.0).abs() < 1e-15);
        assert!((ScalarLaw::parse("sin:1,0.5").unwrap().eval(0.0) - 1.0).abs() < 1e-15);
        assert!(ScalarLaw::parse("cubic:1").is_err());
        assert!(ScalarLaw::parse("const").is_err());
        assert!(ScalarLaw::parse("affine:1").is_err());
        assert!(ScalarLaw::parse("const:nan").is_err());
    }

    #[test]
    fn table_interpolates_linearly() {
        let t = ScalarLaw::table(vec![(0.0, 1.0), (1.0, 3.0), (2.0, 2.0)]).unwrap();
        assert!((t.eval(0.5) - 2.0).abs() < 1e-15);
        assert!((t.eval(1.5) - 2.5).abs() < 1e-15);
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(5.0), 2.0);
        assert!(ScalarLaw::table(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nu.txt");
        std::fs::write(&p, "# rho nu\n0.0, 1.0\n1.0 3.0\n").unwrap();
        let t = ScalarLaw::parse(&format!("table:{}", p.display())).unwrap();
        assert!((t.eval(0.25) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn law_bounds_are_checked() {
        let b = bounds();
        assert!(ViscosityLaw::new(ScalarLaw::Const(1.0), ScalarLaw::Prop(0.5), 0.5, 1.0, b).is_ok());
        // ν_e = 0.1 + 0.5ρ dips below μ_* = 0.5 near ρ = 0.5
        assert!(matches!(
            ViscosityLaw::new(ScalarLaw::Affine { a: 0.1, b: 0.5 }, ScalarLaw::Const(0.0), 0.5, 2.0, b),
            Err(Error::CoefficientOutOfBounds { .. })
        ));
        assert!(ViscosityLaw::new(ScalarLaw::Const(1.0), ScalarLaw::Prop(-1.0), 0.5, 1.0, b).is_err());
        assert!(DensityBounds::new(0.0, 1.0).is_err());
        assert!(DensityBounds::new(2.0, 1.0).is_err());
    }

    #[test]
    fn strain_examples() {
        let g = grid();
        let z = strain_sym(&VectorField::zeros(g)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert_eq!(strain_odd(&VectorField::zeros(g)).unwrap().max_abs(), 0.0);

        let c = ScalarField::from_fn(g, |_, y| y.cos());
        let s = strain_sym(&shear()).unwrap();
        assert!(max_diff(&s.t12, c.values()) < 1e-12);
        assert!(max_diff(&s.t21, c.values()) < 1e-12);
        assert!(s.t11.iter().chain(&s.t22).all(|v| v.abs() < 1e-12));

        let o = strain_odd(&shear()).unwrap();
        assert!(max_diff(&o.t22, c.values()) < 1e-12);
        assert!(max_diff(&o.t11, c.scale(-1.0).values()) < 1e-12);
        assert!(o.t12.iter().chain(&o.t21).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn strain_odd_is_deviatoric_strain_sym_of_perp() {
        // ∇u⊥ + ∇ᵀu⊥ = (∇u⊥ + ∇⊥u) - ω I, so only the trace-free parts agree
        let u = random_divfree_field(grid(), 4, 8).unwrap();
        let a = strain_odd(&u).unwrap();
        let b = strain_sym(&u.perp()).unwrap();
        let om = curl2d(&u).unwrap();
        assert!(om.max_abs() > 0.1);
        assert!(max_diff(&a.t12, &b.t12) < 1e-12);
        assert!(max_diff(&a.t21, &b.t21) < 1e-12);
        let b11: Vec<f64> = b.t11.iter().zip(om.values()).map(|(x, w)| x + w).collect();
        let b22: Vec<f64> = b.t22.iter().zip(om.values()).map(|(x, w)| x + w).collect();
        assert!(max_diff(&a.t11, &b11) < 1e-12);
        assert!(max_diff(&a.t22, &b22) < 1e-12);
        assert_eq!(a.t12, a.t21);
        assert!(a.trace().max_abs() < 1e-14);
        let s = strain_sym(&u).unwrap();
        assert!(s.trace().max_abs() < 1e-12);
    }

    #[test]
    fn stress_examples() {
        let g = grid();
        let rho = ScalarField::constant(g, 1.0);
        let law = ViscosityLaw::new(ScalarLaw::Const(1.0), ScalarLaw::Const(0.0), 1.0, 1.0, bounds()).unwrap();
        let u = random_divfree_field(g, 2, 6).unwrap();
        let s = viscous_stress(&law, &rho, &u).unwrap();
        let e = strain_sym(&u).unwrap();
        for (x, y) in s.entries().iter().zip(e.entries()) {
            assert!(max_diff(x, y) < 1e-14);
        }

        let m = 0.7;
        let law = ViscosityLaw::new(ScalarLaw::Const(m), ScalarLaw::Const(m), m, m, bounds()).unwrap();
        let s = viscous_stress(&law, &rho, &shear()).unwrap();
        let c = ScalarField::from_fn(g, |_, y| m * y.cos());
        assert!(max_diff(&s.t11, c.scale(-1.0).values()) < 1e-12);
        for t in [&s.t12, &s.t21, &s.t22] {
            assert!(max_diff(t, c.values()) < 1e-12);
        }

        let bad = ScalarField::constant(g, 3.0);
        assert!(matches!(viscous_stress(&law, &bad, &u), Err(Error::DensityOutOfBounds { .. })));
    }

    #[test]
    fn cancellation_identities() {
        let g = grid();
        assert_eq!(check_pointwise_cancellation(&VectorField::zeros(g)).unwrap(), 0.0);
        let u = random_divfree_field(g, 1, 8).unwrap();
        assert!(check_pointwise_cancellation(&u).unwrap() <= 1e-12);
        let v = VectorField::from_fn(g, |x, y| (x.sin(), y.cos()));
        assert!(check_pointwise_cancellation(&v).unwrap() <= 1e-12);

        let phi = random_divfree_field(g, 99, 8).unwrap();
        assert!(check_weak_cancellation(&u, &u).unwrap() <= 1e-12);
        assert!(check_weak_cancellation(&u, &phi).unwrap() <= 1e-10);

        let grad = crate::field::grad(&ScalarField::from_fn(g, |x, y| (x + y).sin())).unwrap();
        assert!(matches!(check_weak_cancellation(&u, &grad), Err(Error::NotDivergenceFree(_))));
    }

    #[test]
    fn constant_odd_stress_is_a_gradient() {
        let u = random_divfree_field(grid(), 5, 8).unwrap();
        let t = strain_odd(&u).unwrap().scale(0.8);
        let d = div_tensor(&t).unwrap();
        assert!(curl2d(&d).unwrap().max_abs() < 1e-10);
    }
}
