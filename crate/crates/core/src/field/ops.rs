//! Spectral differential operators on the torus.

use num_complex::Complex64;

use super::spectral::{self, Wavenumbers};
use super::{Grid2D, ScalarField, TensorField, VectorField};
use crate::error::Result;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub(crate) fn grad_raw(grid: &Grid2D, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let wn = Wavenumbers::new(grid);
    let spec = spectral::forward(grid, s);
    let n2 = grid.n2();
    let mut d1 = vec![Complex64::default(); spec.len()];
    let mut d2 = vec![Complex64::default(); spec.len()];
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let k = i * n2 + j;
            d1[k] = I * wn.k1[i] * spec[k];
            d2[k] = I * wn.k2[j] * spec[k];
        }
    }
    spectral::inverse_pair(grid, &d1, &d2)
}

/// `∂1 a + ∂2 b`
pub(crate) fn div_raw(grid: &Grid2D, a: &[f64], b: &[f64]) -> Vec<f64> {
    let wn = Wavenumbers::new(grid);
    let (fa, fb) = spectral::forward_pair(grid, a, b);
    let n2 = grid.n2();
    let mut out = vec![Complex64::default(); fa.len()];
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let k = i * n2 + j;
            out[k] = I * (wn.k1[i] * fa[k] + wn.k2[j] * fb[k]);
        }
    }
    spectral::inverse(grid, out)
}

pub(crate) fn divergence_raw_max(grid: &Grid2D, a: &[f64], b: &[f64]) -> f64 {
    div_raw(grid, a, b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Row divergence of a tensor given by its four entries.
pub(crate) fn div_tensor_raw(grid: &Grid2D, t11: &[f64], t12: &[f64], t21: &[f64], t22: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let wn = Wavenumbers::new(grid);
    let (f11, f12) = spectral::forward_pair(grid, t11, t12);
    let (f21, f22) = spectral::forward_pair(grid, t21, t22);
    let n2 = grid.n2();
    let mut r1 = vec![Complex64::default(); f11.len()];
    let mut r2 = vec![Complex64::default(); f11.len()];
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let k = i * n2 + j;
            r1[k] = I * (wn.k1[i] * f11[k] + wn.k2[j] * f12[k]);
            r2[k] = I * (wn.k1[i] * f21[k] + wn.k2[j] * f22[k]);
        }
    }
    spectral::inverse_pair(grid, &r1, &r2)
}

/// Full velocity gradient `(∂1u1, ∂2u1, ∂1u2, ∂2u2)`.
pub(crate) fn velocity_gradient_raw(grid: &Grid2D, u1: &[f64], u2: &[f64]) -> [Vec<f64>; 4] {
    let wn = Wavenumbers::new(grid);
    let (f1, f2) = spectral::forward_pair(grid, u1, u2);
    let n2 = grid.n2();
    let len = f1.len();
    let mut a = vec![Complex64::default(); len];
    let mut b = vec![Complex64::default(); len];
    let mut c = vec![Complex64::default(); len];
    let mut d = vec![Complex64::default(); len];
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let k = i * n2 + j;
            a[k] = I * wn.k1[i] * f1[k];
            b[k] = I * wn.k2[j] * f1[k];
            c[k] = I * wn.k1[i] * f2[k];
            d[k] = I * wn.k2[j] * f2[k];
        }
    }
    let (d1u1, d2u1) = spectral::inverse_pair(grid, &a, &b);
    let (d1u2, d2u2) = spectral::inverse_pair(grid, &c, &d);
    [d1u1, d2u1, d1u2, d2u2]
}

/// Solve `Δp = s - mean(s)` with `mean(p) = 0`.
pub(crate) fn inverse_laplacian_raw(grid: &Grid2D, s: &[f64]) -> Vec<f64> {
    let wn = Wavenumbers::new(grid);
    let mut spec = spectral::forward(grid, s);
    let n2 = grid.n2();
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let k2 = wn.k1[i] * wn.k1[i] + wn.k2[j] * wn.k2[j];
            let k = i * n2 + j;
            spec[k] = if k2 > 0.0 { -spec[k] / k2 } else { Complex64::default() };
        }
    }
    spectral::inverse(grid, spec)
}

pub(crate) fn leray_raw(grid: &Grid2D, v1: &[f64], v2: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let wn = Wavenumbers::new(grid);
    let (mut f1, mut f2) = spectral::forward_pair(grid, v1, v2);
    let n2 = grid.n2();
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let (k1, k2) = (wn.k1[i], wn.k2[j]);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                continue;
            }
            let k = i * n2 + j;
            let proj = (k1 * f1[k] + k2 * f2[k]) / kk;
            f1[k] -= k1 * proj;
            f2[k] -= k2 * proj;
        }
    }
    spectral::inverse_pair(grid, &f1, &f2)
}

pub(crate) fn cut_raw(grid: &Grid2D, s: &[f64], c1: usize, c2: usize) -> Vec<f64> {
    let mut spec = spectral::forward(grid, s);
    spectral::cut_modes(grid, &mut spec, c1, c2);
    spectral::inverse(grid, spec)
}

pub(crate) fn cut_pair_raw(grid: &Grid2D, a: &[f64], b: &[f64], c1: usize, c2: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut fa, mut fb) = spectral::forward_pair(grid, a, b);
    spectral::cut_modes(grid, &mut fa, c1, c2);
    spectral::cut_modes(grid, &mut fb, c1, c2);
    spectral::inverse_pair(grid, &fa, &fb)
}

/// Spectral gradient `(∂1 s, ∂2 s)`.
pub fn grad(s: &ScalarField) -> Result<VectorField> {
    s.validate()?;
    let (d1, d2) = grad_raw(s.grid(), s.values());
    Ok(VectorField::from_vecs_unchecked(*s.grid(), d1, d2))
}

/// `∇⊥ s = (-∂2 s, ∂1 s)`.
pub fn perp_grad(s: &ScalarField) -> Result<VectorField> {
    s.validate()?;
    let (d1, d2) = grad_raw(s.grid(), s.values());
    Ok(VectorField::from_vecs_unchecked(*s.grid(), d2.into_iter().map(|v| -v).collect(), d1))
}

pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    v.validate()?;
    Ok(ScalarField::from_vec_unchecked(*v.grid(), div_raw(v.grid(), v.comp1(), v.comp2())))
}

/// Two-dimensional curl `∇⊥·v = ∂1 v2 - ∂2 v1`.
pub fn curl2d(v: &VectorField) -> Result<ScalarField> {
    v.validate()?;
    let minus_v1: Vec<f64> = v.comp1().iter().map(|x| -x).collect();
    // ∂1 v2 + ∂2 (-v1)
    Ok(ScalarField::from_vec_unchecked(*v.grid(), div_raw(v.grid(), v.comp2(), &minus_v1)))
}

/// Row-wise divergence `(∂1T11 + ∂2T12, ∂1T21 + ∂2T22)`.
pub fn div_tensor(t: &TensorField) -> Result<VectorField> {
    t.validate()?;
    let (r1, r2) = div_tensor_raw(t.grid(), &t.t11, &t.t12, &t.t21, &t.t22);
    Ok(VectorField::from_vecs_unchecked(*t.grid(), r1, r2))
}

pub fn laplacian(s: &ScalarField) -> Result<ScalarField> {
    s.validate()?;
    let (d1, d2) = grad_raw(s.grid(), s.values());
    Ok(ScalarField::from_vec_unchecked(*s.grid(), div_raw(s.grid(), &d1, &d2)))
}

/// Mean-zero solution of `Δp = s - mean(s)`.
pub fn inverse_laplacian(s: &ScalarField) -> Result<ScalarField> {
    s.validate()?;
    Ok(ScalarField::from_vec_unchecked(*s.grid(), inverse_laplacian_raw(s.grid(), s.values())))
}

/// Leray projection `v - ∇Δ⁻¹(∇·v)` onto divergence-free fields.
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    v.validate()?;
    let (a, b) = leray_raw(v.grid(), v.comp1(), v.comp2());
    Ok(VectorField::from_vecs_unchecked(*v.grid(), a, b))
}

/// 2/3-rule filter.
pub fn dealias(s: &ScalarField) -> ScalarField {
    let c = s.grid().dealias_cutoff();
    ScalarField::from_vec_unchecked(*s.grid(), cut_raw(s.grid(), s.values(), c, c))
}

/// Zero every Fourier mode with `|m1| > cutoff` or `|m2| > cutoff`.
pub fn truncate_modes(v: &VectorField, cutoff: usize) -> VectorField {
    let (a, b) = cut_pair_raw(v.grid(), v.comp1(), v.comp2(), cutoff, cutoff);
    VectorField::from_vecs_unchecked(*v.grid(), a, b)
}
