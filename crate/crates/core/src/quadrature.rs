//! Gauss-Legendre rules.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights on `[-1, 1]` by the Golub-Welsch eigenvalue method, sorted by node.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let e = SymmetricEigen::new(j);
    let mut out: Vec<(f64, f64)> = (0..n).map(|k| (e.eigenvalues[k], 2.0 * e.eigenvectors[(0, k)].powi(2))).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `∫_a^b f` with the rule `rule`.
pub fn integrate(rule: &[(f64, f64)], a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    rule.iter().map(|&(t, w)| w * f(m + r * t)).sum::<f64>() * r
}
