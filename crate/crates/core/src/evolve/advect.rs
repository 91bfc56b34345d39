//! Semi-Lagrangian density transport.

use crate::error::{Error, Result};
use crate::field::ops::divergence_raw_max;
use crate::field::{Grid2D, ScalarField, VectorField};

/// Divergence tolerance for the transporting velocity.
pub const ADVECT_DIV_TOL: f64 = 1e-8;

/// Interpolation stencil width.
const W: usize = 6;

/// Quintic Lagrange weights on nodes `-2..=3` at offset `s` in `[0, 1)`.
#[inline]
fn lagrange_weights(s: f64) -> [f64; W] {
    let mut w = [0.0; W];
    for (k, wk) in w.iter_mut().enumerate() {
        let xk = k as f64 - 2.0;
        let mut p = 1.0;
        for m in 0..W {
            if m != k {
                let xm = m as f64 - 2.0;
                p *= (s - xm) / (xk - xm);
            }
        }
        *wk = p;
    }
    w
}

/// Periodic tensor-product interpolation stencil at fractional grid indices `(fx, fy)`.
struct Stencil {
    i: [usize; W],
    j: [usize; W],
    wx: [f64; W],
    wy: [f64; W],
}

impl Stencil {
    #[inline]
    fn new(grid: &Grid2D, fx: f64, fy: f64) -> Self {
        let (n1, n2) = (grid.n1() as i64, grid.n2() as i64);
        let (bx, by) = (fx.floor(), fy.floor());
        let (ix, iy) = (bx as i64, by as i64);
        let mut i = [0; W];
        let mut j = [0; W];
        for k in 0..W {
            i[k] = (ix - 2 + k as i64).rem_euclid(n1) as usize;
            j[k] = (iy - 2 + k as i64).rem_euclid(n2) as usize;
        }
        Self {
            i,
            j,
            wx: lagrange_weights(fx - bx),
            wy: lagrange_weights(fy - by),
        }
    }

    #[inline]
    fn eval(&self, v: &[f64], n2: usize) -> f64 {
        let mut acc = 0.0;
        for a in 0..W {
            let row = self.i[a] * n2;
            let mut r = 0.0;
            for b in 0..W {
                r += self.wy[b] * v[row + self.j[b]];
            }
            acc += self.wx[a] * r;
        }
        acc
    }
}

pub(crate) fn advect_raw(grid: &Grid2D, rho: &[f64], u1: &[f64], u2: &[f64], dt: f64) -> Vec<f64> {
    let n2 = grid.n2();
    let (c1, c2) = (dt / grid.h1(), dt / grid.h2());
    let (lo, hi) = range(rho);
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n1() {
        for j in 0..n2 {
            let k = i * n2 + j;
            let (x, y) = (i as f64, j as f64);
            let mid = Stencil::new(grid, x - 0.5 * c1 * u1[k], y - 0.5 * c2 * u2[k]);
            let (a, b) = (mid.eval(u1, n2), mid.eval(u2, n2));
            let foot = Stencil::new(grid, x - c1 * a, y - c2 * b);
            out.push(foot.eval(rho, n2).clamp(lo, hi));
        }
    }
    fix_mass(rho, &mut out);
    out
}

fn range(v: &[f64]) -> (f64, f64) {
    (v.iter().copied().fold(f64::INFINITY, f64::min), v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Restore the total of `old` in `new` without leaving `[min old, max old]`.
///
/// A deficit is filled in proportion to the room below the maximum, a surplus
/// is removed in proportion to the room above the minimum.
fn fix_mass(old: &[f64], new: &mut [f64]) {
    let (lo, hi) = range(old);
    let deficit: f64 = old.iter().sum::<f64>() - new.iter().sum::<f64>();
    if deficit == 0.0 {
        return;
    }
    let room: f64 = if deficit > 0.0 {
        new.iter().map(|v| hi - v).sum()
    } else {
        new.iter().map(|v| v - lo).sum()
    };
    if room <= 0.0 {
        return;
    }
    let s = (deficit.abs() / room).min(1.0);
    for v in new.iter_mut() {
        *v = if deficit > 0.0 { (*v + s * (hi - *v)).min(hi) } else { (*v - s * (*v - lo)).max(lo) };
    }
}

/// One semi-Lagrangian step of `∂tρ + u·∇ρ = 0` with midpoint backtracking,
/// quintic interpolation clamped to `[min ρ, max ρ]`, and a bound-preserving
/// mass fix.
pub fn advect_density(rho: &ScalarField, u: &VectorField, dt: f64) -> Result<ScalarField> {
    if rho.grid() != u.grid() {
        return Err(Error::GridMismatch);
    }
    rho.validate()?;
    u.validate()?;
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::param("dt", format!("{dt} must be non-negative")));
    }
    let d = divergence_raw_max(u.grid(), u.comp1(), u.comp2());
    if d > ADVECT_DIV_TOL {
        return Err(Error::NotDivergenceFree(d));
    }
    let grid = *rho.grid();
    Ok(ScalarField::from_vec_unchecked(grid, advect_raw(&grid, rho.values(), u.comp1(), u.comp2(), dt)))
}
