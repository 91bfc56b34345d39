//! Periodic grids, sampled fields and spectral calculus on the torus.
//!
//! Values are stored row-major with the `x1` index outermost:
//! `values[i * n2 + j]` samples the point `(i * len1 / n1, j * len2 / n2)`.

mod norms;
pub(crate) mod ops;
mod random;
pub(crate) mod spectral;

pub use norms::{norms, Norms};
pub use ops::{
    curl2d, dealias, div_tensor, divergence, grad, inverse_laplacian, laplacian, leray_project,
    perp_grad, truncate_modes,
};
pub use random::{random_bandlimited_scalar, random_divfree_field};

use crate::error::{Error, Result};

/// Uniform grid on the periodic cell `[0, len1) x [0, len2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n1: usize,
    n2: usize,
    len1: f64,
    len2: f64,
}

impl Grid2D {
    pub fn new(n1: usize, n2: usize, len1: f64, len2: f64) -> Result<Self> {
        for (name, n) in [("n1", n1), ("n2", n2)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!("{name} = {n} must be even and >= 4")));
            }
        }
        for (name, l) in [("len1", len1), ("len2", len2)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { n1, n2, len1, len2 })
    }

    /// `n x n` grid on `[0, 2π)²`.
    pub fn square_2pi(n: usize) -> Result<Self> {
        Self::new(n, n, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn n2(&self) -> usize {
        self.n2
    }
    pub fn len1(&self) -> f64 {
        self.len1
    }
    pub fn len2(&self) -> f64 {
        self.len2
    }
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn h1(&self) -> f64 {
        self.len1 / self.n1 as f64
    }
    pub fn h2(&self) -> f64 {
        self.len2 / self.n2 as f64
    }
    /// Smallest mesh width.
    pub fn h(&self) -> f64 {
        self.h1().min(self.h2())
    }
    /// Quadrature weight of one grid point.
    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }
    pub fn area(&self) -> f64 {
        self.len1 * self.len2
    }
    /// Largest mode index that survives the 2/3 dealiasing rule along both axes.
    pub fn dealias_cutoff(&self) -> usize {
        self.n1.min(self.n2) / 3
    }
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h1(), j as f64 * self.h2())
    }
}

/// Sampled scalar function on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values)?;
        check_finite(&values, "scalar field")?;
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1() {
            for j in 0..grid.n2() {
                let (x1, x2) = grid.point(i, j);
                values.push(f(x1, x2));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n2() + j]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Grid quadrature of the field over the cell.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn validate(&self) -> Result<()> {
        check_finite(&self.values, "scalar field")
    }
}

/// Sampled vector field `(comp1, comp2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid2D,
    comp1: Vec<f64>,
    comp2: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: Grid2D, comp1: Vec<f64>, comp2: Vec<f64>) -> Result<Self> {
        check_len(&grid, &comp1)?;
        check_len(&grid, &comp2)?;
        check_finite(&comp1, "vector field")?;
        check_finite(&comp2, "vector field")?;
        Ok(Self { grid, comp1, comp2 })
    }

    pub(crate) fn from_vecs_unchecked(grid: Grid2D, comp1: Vec<f64>, comp2: Vec<f64>) -> Self {
        debug_assert_eq!(comp1.len(), grid.len());
        debug_assert_eq!(comp2.len(), grid.len());
        Self { grid, comp1, comp2 }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            comp1: vec![0.0; grid.len()],
            comp2: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut comp1 = Vec::with_capacity(grid.len());
        let mut comp2 = Vec::with_capacity(grid.len());
        for i in 0..grid.n1() {
            for j in 0..grid.n2() {
                let (x1, x2) = grid.point(i, j);
                let (a, b) = f(x1, x2);
                comp1.push(a);
                comp2.push(b);
            }
        }
        Self { grid, comp1, comp2 }
    }

    pub fn from_components(c1: ScalarField, c2: ScalarField) -> Result<Self> {
        if c1.grid != c2.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: c1.grid,
            comp1: c1.values,
            comp2: c2.values,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn comp1(&self) -> &[f64] {
        &self.comp1
    }
    pub fn comp2(&self) -> &[f64] {
        &self.comp2
    }
    pub fn comp1_mut(&mut self) -> &mut [f64] {
        &mut self.comp1
    }
    pub fn comp2_mut(&mut self) -> &mut [f64] {
        &mut self.comp2
    }
    pub fn component(&self, k: usize) -> ScalarField {
        let v = if k == 0 { &self.comp1 } else { &self.comp2 };
        ScalarField::from_vec_unchecked(self.grid, v.clone())
    }

    /// The rotated field `u⊥ = (-u2, u1)`.
    pub fn perp(&self) -> Self {
        Self {
            grid: self.grid,
            comp1: self.comp2.iter().map(|v| -v).collect(),
            comp2: self.comp1.clone(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            comp1: self.comp1.iter().map(|v| c * v).collect(),
            comp2: self.comp2.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + c * y).collect();
        Self {
            grid: self.grid,
            comp1: f(&self.comp1, &other.comp1),
            comp2: f(&self.comp2, &other.comp2),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        debug_assert_eq!(self.grid, s.grid);
        let f = |a: &[f64]| a.iter().zip(&s.values).map(|(x, y)| x * y).collect();
        Self {
            grid: self.grid,
            comp1: f(&self.comp1),
            comp2: f(&self.comp2),
        }
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &Self) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        let values = (0..self.grid.len())
            .map(|k| self.comp1[k] * other.comp1[k] + self.comp2[k] * other.comp2[k])
            .collect();
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    /// `u ⊗ v` with entries `(u_i v_j)`.
    pub fn outer(&self, other: &Self) -> TensorField {
        let p = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect();
        TensorField {
            grid: self.grid,
            t11: p(&self.comp1, &other.comp1),
            t12: p(&self.comp1, &other.comp2),
            t21: p(&self.comp2, &other.comp1),
            t22: p(&self.comp2, &other.comp2),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comp1
            .iter()
            .zip(&self.comp2)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn validate(&self) -> Result<()> {
        check_finite(&self.comp1, "vector field")?;
        check_finite(&self.comp2, "vector field")
    }
}

/// Sampled 2x2 tensor field with entries `t_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid2D,
    pub t11: Vec<f64>,
    pub t12: Vec<f64>,
    pub t21: Vec<f64>,
    pub t22: Vec<f64>,
}

impl TensorField {
    pub fn new(grid: Grid2D, t11: Vec<f64>, t12: Vec<f64>, t21: Vec<f64>, t22: Vec<f64>) -> Result<Self> {
        for t in [&t11, &t12, &t21, &t22] {
            check_len(&grid, t)?;
            check_finite(t, "tensor field")?;
        }
        Ok(Self {
            grid,
            t11,
            t12,
            t21,
            t22,
        })
    }

    pub(crate) fn new_unchecked(grid: Grid2D, t11: Vec<f64>, t12: Vec<f64>, t21: Vec<f64>, t22: Vec<f64>) -> Self {
        Self {
            grid,
            t11,
            t12,
            t21,
            t22,
        }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            t11: z.clone(),
            t12: z.clone(),
            t21: z.clone(),
            t22: z,
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> [[f64; 2]; 2]) -> Self {
        let mut t = Self::zeros(grid);
        for i in 0..grid.n1() {
            for j in 0..grid.n2() {
                let (x1, x2) = grid.point(i, j);
                let m = f(x1, x2);
                let k = i * grid.n2() + j;
                t.t11[k] = m[0][0];
                t.t12[k] = m[0][1];
                t.t21[k] = m[1][0];
                t.t22[k] = m[1][1];
            }
        }
        t
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn entries(&self) -> [&[f64]; 4] {
        [&self.t11, &self.t12, &self.t21, &self.t22]
    }

    pub fn map_entries(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let m = |t: &[f64]| t.iter().enumerate().map(|(k, &v)| f(k, v)).collect();
        Self {
            grid: self.grid,
            t11: m(&self.t11),
            t12: m(&self.t12),
            t21: m(&self.t21),
            t22: m(&self.t22),
        }
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        debug_assert_eq!(self.grid, *s.grid());
        self.map_entries(|k, v| v * s.values()[k])
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_entries(|_, v| c * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let a = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p + q).collect();
        Self {
            grid: self.grid,
            t11: a(&self.t11, &other.t11),
            t12: a(&self.t12, &other.t12),
            t21: a(&self.t21, &other.t21),
            t22: a(&self.t22, &other.t22),
        }
    }

    /// Pointwise Frobenius product `A : B`.
    pub fn frobenius(&self, other: &Self) -> ScalarField {
        let n = self.grid.len();
        let values = (0..n)
            .map(|k| {
                self.t11[k] * other.t11[k]
                    + self.t12[k] * other.t12[k]
                    + self.t21[k] * other.t21[k]
                    + self.t22[k] * other.t22[k]
            })
            .collect();
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    pub fn trace(&self) -> ScalarField {
        let values = self.t11.iter().zip(&self.t22).map(|(a, b)| a + b).collect();
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries()
            .iter()
            .flat_map(|t| t.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn validate(&self) -> Result<()> {
        for t in self.entries() {
            check_finite(t, "tensor field")?;
        }
        Ok(())
    }
}

fn check_len(grid: &Grid2D, v: &[f64]) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            actual: v.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
