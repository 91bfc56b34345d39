//! Density profile `η` of the stream-function ansatz `ρ = η(φ)`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::viscosity::{interp_table, ScalarLaw};

#[derive(Debug, Clone, PartialEq)]
enum EtaKind {
    Affine { a: f64, b: f64 },
    Sine { base: f64, amp: f64, freq: f64 },
    Table(Vec<(f64, f64)>),
}

/// `η: ℝ -> [0, ρ^*]`, evaluated as the built-in profile clamped to that range.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaFunction {
    kind: EtaKind,
    rho_upper: f64,
}

impl EtaFunction {
    /// `clamp(a + b s, 0, ρ^*)`
    pub fn affine(a: f64, b: f64, rho_upper: f64) -> Result<Self> {
        Self::build(EtaKind::Affine { a, b }, rho_upper, &[a, b])
    }

    /// `clamp(base + amp sin(freq s), 0, ρ^*)`
    pub fn clamped_sine(base: f64, amp: f64, freq: f64, rho_upper: f64) -> Result<Self> {
        Self::build(EtaKind::Sine { base, amp, freq }, rho_upper, &[base, amp, freq])
    }

    /// Piecewise linear through `(s, η)` nodes, constant outside, clamped.
    pub fn table(nodes: Vec<(f64, f64)>, rho_upper: f64) -> Result<Self> {
        let ScalarLaw::Table(nodes) = ScalarLaw::table(nodes)? else {
            unreachable!()
        };
        let flat: Vec<f64> = nodes.iter().flat_map(|&(a, b)| [a, b]).collect();
        Self::build(EtaKind::Table(nodes), rho_upper, &flat)
    }

    /// Parse `affine:<a>,<b>`, `sin:<base>,<amp>,<freq>` or `table:<path>`.
    pub fn parse(spec: &str, rho_upper: f64) -> Result<Self> {
        let bad = || Error::param("eta", format!("cannot parse `{spec}`"));
        let (kind, args) = spec.split_once(':').ok_or_else(bad)?;
        let nums = || -> Result<Vec<f64>> {
            args.split(',').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        match kind.trim() {
            "affine" => match nums()?[..] {
                [a, b] => Self::affine(a, b, rho_upper),
                _ => Err(bad()),
            },
            "sin" => match nums()?[..] {
                [base, amp, freq] => Self::clamped_sine(base, amp, freq, rho_upper),
                _ => Err(bad()),
            },
            "table" => Self::from_table_file(args.trim(), rho_upper),
            _ => Err(bad()),
        }
    }

    pub fn from_table_file(path: impl AsRef<Path>, rho_upper: f64) -> Result<Self> {
        match ScalarLaw::from_table_file(path)? {
            ScalarLaw::Table(nodes) => Self::table(nodes, rho_upper),
            _ => unreachable!(),
        }
    }

    fn build(kind: EtaKind, rho_upper: f64, params: &[f64]) -> Result<Self> {
        if !(rho_upper.is_finite() && rho_upper > 0.0) {
            return Err(Error::param("rho_upper", format!("{rho_upper} must be positive")));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("eta", "non-finite parameter"));
        }
        Ok(Self { kind, rho_upper })
    }

    pub fn rho_upper(&self) -> f64 {
        self.rho_upper
    }

    pub fn eval(&self, s: f64) -> f64 {
        let v = match &self.kind {
            EtaKind::Affine { a, b } => a + b * s,
            EtaKind::Sine { base, amp, freq } => base + amp * (freq * s).sin(),
            EtaKind::Table(t) => interp_table(t, s),
        };
        v.clamp(0.0, self.rho_upper)
    }

    /// Upper bound on `|η'|`.
    pub fn lipschitz(&self) -> f64 {
        match &self.kind {
            EtaKind::Affine { b, .. } => b.abs(),
            EtaKind::Sine { amp, freq, .. } => (amp * freq).abs(),
            EtaKind::Table(t) => t
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Whether the profile is constant (then the density does not depend on `φ`).
    pub fn is_constant(&self) -> bool {
        self.lipschitz() == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamped_to_range() {
        let e = EtaFunction::affine(1.0, 1.0, 1.5).unwrap();
        assert_eq!(e.eval(-3.0), 0.0);
        assert_eq!(e.eval(0.25), 1.25);
        assert_eq!(e.eval(3.0), 1.5);
        let s = EtaFunction::clamped_sine(1.0, 2.0, 3.0, 2.5).unwrap();
        for k in 0..1000 {
            let v = s.eval(-5.0 + 0.01 * k as f64);
            assert!((0.0..=2.5).contains(&v));
        }
        assert_eq!(s.lipschitz(), 6.0);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(EtaFunction::parse("affine:1,0.5", 2.0).unwrap(), EtaFunction::affine(1.0, 0.5, 2.0).unwrap());
        assert!(EtaFunction::parse("sin:1,0.5", 2.0).is_err());
        assert!(EtaFunction::parse("cubic:1", 2.0).is_err());
        assert!(EtaFunction::affine(1.0, 0.5, 0.0).is_err());
    }
}
