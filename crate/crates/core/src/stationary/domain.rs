//! Rectangle, node fields and the ghost-extended node layout.

use crate::error::{Error, Result};
use crate::field::check_finite;

/// Uniform node grid on `[0, lx] x [0, ly]` with `nx x ny` interior nodes and square cells.
///
/// Node `(i, j)` sits at `(i h, j h)` for `i in 0..=nx+1`, `j in 0..=ny+1`; the
/// indices `0` and `nx+1` (resp. `ny+1`) are boundary nodes. Operators act on
/// the *extended* layout with one extra ghost layer, `i in -1..=nx+2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectDomain {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    h: f64,
}

impl RectDomain {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 8 || ny < 8 {
            return Err(Error::InvalidGrid(format!("{nx} x {ny} interior nodes, need at least 8 x 8")));
        }
        if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
            return Err(Error::InvalidGrid(format!("side lengths {lx} x {ly} must be positive")));
        }
        let h = lx / (nx + 1) as f64;
        let hy = ly / (ny + 1) as f64;
        if (h - hy).abs() > 1e-12 * h {
            return Err(Error::InvalidGrid(format!("cells are not square: {h} vs {hy}")));
        }
        Ok(Self { nx, ny, lx, ly, h })
    }

    /// Unit square with mesh width `1/n`.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n < 9 {
            return Err(Error::InvalidGrid(format!("n = {n} must be at least 9")));
        }
        Self::new(n - 1, n - 1, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// Number of nodes including the boundary.
    pub fn len(&self) -> usize {
        (self.nx + 2) * (self.ny + 2)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn interior_len(&self) -> usize {
        self.nx * self.ny
    }
    /// Number of nodes in the ghost-extended layout.
    pub fn ext_len(&self) -> usize {
        (self.nx + 4) * (self.ny + 4)
    }
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h, j as f64 * self.h)
    }
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 2) + j
    }
    /// Extended index of node `(i, j)`, `-1 <= i <= nx + 2`.
    #[inline]
    pub fn ext(&self, i: isize, j: isize) -> usize {
        (i + 1) as usize * (self.ny + 4) + (j + 1) as usize
    }
    /// Inverse of [`Self::ext`].
    #[inline]
    pub fn ext_coords(&self, e: usize) -> (isize, isize) {
        ((e / (self.ny + 4)) as isize - 1, (e % (self.ny + 4)) as isize - 1)
    }
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx + 1 || j == self.ny + 1
    }
    /// Trapezoidal quadrature weight of node `(i, j)`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx + 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny + 1 { 0.5 } else { 1.0 };
        wx * wy * self.h * self.h
    }
    /// Position of interior node `(i, j)` in the unknown vector.
    #[inline]
    pub(crate) fn unknown(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.ny + (j - 1)
    }
}

/// Values at the nodes of a [`RectDomain`], stored `values[i * (ny + 2) + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    domain: RectDomain,
    values: Vec<f64>,
}

impl NodeField {
    pub fn new(domain: RectDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::ShapeMismatch {
                expected: domain.len(),
                actual: values.len(),
            });
        }
        check_finite(&values, "node field")?;
        Ok(Self { domain, values })
    }
    pub(crate) fn from_vec_unchecked(domain: RectDomain, values: Vec<f64>) -> Self {
        Self { domain, values }
    }
    pub fn zeros(domain: RectDomain) -> Self {
        Self::constant(domain, 0.0)
    }
    pub fn constant(domain: RectDomain, c: f64) -> Self {
        Self {
            domain,
            values: vec![c; domain.len()],
        }
    }
    pub fn from_fn(domain: RectDomain, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(domain.len());
        for i in 0..domain.nx + 2 {
            for j in 0..domain.ny + 2 {
                let (x, y) = domain.point(i, j);
                values.push(f(x, y));
            }
        }
        Self { domain, values }
    }
    pub fn domain(&self) -> &RectDomain {
        &self.domain
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.domain.node(i, j)]
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn validate(&self) -> Result<()> {
        check_finite(&self.values, "node field")
    }
    /// Trapezoidal L² norm over the rectangle.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_sq().sqrt()
    }
    fn weighted_sq(&self) -> f64 {
        let d = &self.domain;
        let mut s = 0.0;
        for i in 0..d.nx + 2 {
            for j in 0..d.ny + 2 {
                s += d.weight(i, j) * self.values[d.node(i, j)].powi(2);
            }
        }
        s
    }
    /// Max over interior nodes whose distance to the boundary is at least `margin` cells.
    pub fn interior_max_abs(&self, margin: usize) -> f64 {
        let d = &self.domain;
        let mut m = 0.0f64;
        for i in margin..d.nx + 2 - margin {
            for j in margin..d.ny + 2 - margin {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }
}

/// Two node fields on the same rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeVectorField {
    pub c1: NodeField,
    pub c2: NodeField,
}

impl NodeVectorField {
    pub fn new(c1: NodeField, c2: NodeField) -> Result<Self> {
        if c1.domain != c2.domain {
            return Err(Error::GridMismatch);
        }
        Ok(Self { c1, c2 })
    }
    pub fn zeros(domain: RectDomain) -> Self {
        Self {
            c1: NodeField::zeros(domain),
            c2: NodeField::zeros(domain),
        }
    }
    pub fn from_fn(domain: RectDomain, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Self {
            c1: NodeField::from_fn(domain, |x, y| f(x, y).0),
            c2: NodeField::from_fn(domain, |x, y| f(x, y).1),
        }
    }
    pub fn domain(&self) -> &RectDomain {
        self.c1.domain()
    }
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            c1: self.c1.sub(&other.c1),
            c2: self.c2.sub(&other.c2),
        }
    }
    pub fn max_abs(&self) -> f64 {
        self.c1.max_abs().max(self.c2.max_abs())
    }
    pub fn l2_norm(&self) -> f64 {
        (self.c1.weighted_sq() + self.c2.weighted_sq()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_checks() {
        assert!(RectDomain::new(7, 9, 0.8, 1.0).is_err());
        assert!(RectDomain::new(9, 9, 1.0, 2.0).is_err());
        let d = RectDomain::new(9, 19, 1.0, 2.0).unwrap();
        assert_eq!(d.h(), 0.1);
        assert_eq!(d.ext_coords(d.ext(-1, 20)), (-1, 20));
        assert_eq!(d.ext_coords(d.ext(3, 4)), (3, 4));
    }

    #[test]
    fn trapezoid_norm_of_constant() {
        let d = RectDomain::new(9, 19, 1.0, 2.0).unwrap();
        let f = NodeField::constant(d, 3.0);
        assert!((f.l2_norm() - 3.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}
