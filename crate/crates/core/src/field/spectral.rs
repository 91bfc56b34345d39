//! FFT kernels shared by the periodic operators.
//!
//! Two real fields are routinely packed into one complex transform
//! (`a + i b`), which halves the transform count of every gradient,
//! divergence and projection.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid2D;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

fn fft2(grid: &Grid2D, data: &mut [Complex64], inverse: bool) {
    let (n1, n2) = (grid.n1(), grid.n2());
    let row = plan(n2, inverse);
    let col = plan(n1, inverse);
    let mut scratch = vec![Complex64::default(); row.get_inplace_scratch_len().max(col.get_inplace_scratch_len())];
    row.process_with_scratch(data, &mut scratch);

    let mut t = vec![Complex64::default(); n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            t[j * n1 + i] = data[i * n2 + j];
        }
    }
    col.process_with_scratch(&mut t, &mut scratch);
    let scale = if inverse { 1.0 / (n1 * n2) as f64 } else { 1.0 };
    for i in 0..n1 {
        for j in 0..n2 {
            data[i * n2 + j] = t[j * n1 + i] * scale;
        }
    }
}

pub(crate) fn forward(grid: &Grid2D, values: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(grid, &mut data, false);
    data
}

/// Transforms of two real fields from a single complex FFT.
pub(crate) fn forward_pair(grid: &Grid2D, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
    fft2(grid, &mut z, false);
    let (n1, n2) = (grid.n1(), grid.n2());
    let mut fa = vec![Complex64::default(); n1 * n2];
    let mut fb = vec![Complex64::default(); n1 * n2];
    for i in 0..n1 {
        let ni = (n1 - i) % n1;
        for j in 0..n2 {
            let nj = (n2 - j) % n2;
            let zk = z[i * n2 + j];
            let zm = z[ni * n2 + nj].conj();
            fa[i * n2 + j] = (zk + zm) * 0.5;
            fb[i * n2 + j] = (zk - zm) * Complex64::new(0.0, -0.5);
        }
    }
    (fa, fb)
}

pub(crate) fn inverse(grid: &Grid2D, mut spec: Vec<Complex64>) -> Vec<f64> {
    fft2(grid, &mut spec, true);
    spec.into_iter().map(|c| c.re).collect()
}

/// Inverse transforms of two Hermitian spectra (real fields) at once.
pub(crate) fn inverse_pair(grid: &Grid2D, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
    fft2(grid, &mut z, true);
    z.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Wavenumbers along both axes.
///
/// `k1`/`k2` are derivative wavenumbers with the Nyquist entry zeroed;
/// `m1`/`m2` are signed integer mode indices (Nyquist reported as `n/2`).
pub(crate) struct Wavenumbers {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub m1: Vec<i64>,
    pub m2: Vec<i64>,
}

pub(crate) fn mode_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn axis(n: usize, len: f64) -> (Vec<f64>, Vec<i64>) {
    let m: Vec<i64> = (0..n).map(|i| mode_index(i, n)).collect();
    let k = (0..n)
        .map(|i| if i == n / 2 { 0.0 } else { 2.0 * PI * m[i] as f64 / len })
        .collect();
    (k, m)
}

impl Wavenumbers {
    pub fn new(grid: &Grid2D) -> Self {
        let (k1, m1) = axis(grid.n1(), grid.len1());
        let (k2, m2) = axis(grid.n2(), grid.len2());
        Self { k1, k2, m1, m2 }
    }
}

/// Zero every mode with `|m1| > c1` or `|m2| > c2`.
pub(crate) fn cut_modes(grid: &Grid2D, spec: &mut [Complex64], c1: usize, c2: usize) {
    let wn = Wavenumbers::new(grid);
    let n2 = grid.n2();
    for (i, &m1) in wn.m1.iter().enumerate() {
        for (j, &m2) in wn.m2.iter().enumerate() {
            if m1.unsigned_abs() as usize > c1 || m2.unsigned_abs() as usize > c2 {
                spec[i * n2 + j] = Complex64::default();
            }
        }
    }
}
