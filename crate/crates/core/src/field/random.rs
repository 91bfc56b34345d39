use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spectral::{self, Wavenumbers};
use super::{ops, Grid2D, ScalarField, VectorField};
use crate::error::{Error, Result};

/// Real, mean-zero trigonometric polynomial with modes `1 <= max(|m1|, |m2|) <= cutoff`
/// and amplitudes decaying like `1/|m|²`. Deterministic in `seed`.
pub fn random_bandlimited_scalar(grid: Grid2D, seed: u64, cutoff: usize) -> Result<ScalarField> {
    if 3 * cutoff >= grid.n1().min(grid.n2()) {
        return Err(Error::param(
            "cutoff",
            format!("{cutoff} must be below min(n1, n2)/3 = {}", grid.dealias_cutoff()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wn = Wavenumbers::new(&grid);
    let n2 = grid.n2();
    let mut spec = vec![Complex64::default(); grid.len()];
    for (i, &m1) in wn.m1.iter().enumerate() {
        for (j, &m2) in wn.m2.iter().enumerate() {
            let m = m1.unsigned_abs().max(m2.unsigned_abs()) as usize;
            if m == 0 || m > cutoff {
                continue;
            }
            // the inverse transform divides by the point count
            let amp = grid.len() as f64 / (m1 * m1 + m2 * m2) as f64;
            spec[i * n2 + j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        }
    }
    // the real part of the inverse is the inverse of the Hermitian part
    let values = spectral::inverse(&grid, spec);
    Ok(ScalarField::from_vec_unchecked(grid, values))
}

/// `∇⊥ψ` for a random band-limited stream function `ψ`.
pub fn random_divfree_field(grid: Grid2D, seed: u64, cutoff: usize) -> Result<VectorField> {
    let psi = random_bandlimited_scalar(grid, seed, cutoff)?;
    ops::perp_grad(&psi)
}
