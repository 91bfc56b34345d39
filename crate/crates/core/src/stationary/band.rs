//! Banded LU factorization with partial pivoting.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` superdiagonals.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl` columns
/// hold fill-in from row interchanges.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    a: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            a: vec![0.0; n * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    /// `self[i, j] += v`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i}, {j}) outside band");
        let s = self.slot(i, j);
        self.a[s] += v;
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let scale = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * 1e-3;
        let mut piv = vec![0; n];
        let mut l = vec![0.0; n * kl];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.a[self.slot(k, k)].abs();
            for i in k + 1..=last {
                let v = self.a[self.slot(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularMatrix(k));
            }
            piv[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=right {
                    let (s, t) = (self.slot(k, j), self.slot(p, j));
                    self.a.swap(s, t);
                }
            }
            let d = self.a[self.slot(k, k)];
            for i in k + 1..=last {
                let sik = self.slot(i, k);
                let m = self.a[sik] / d;
                self.a[sik] = 0.0;
                l[k * kl + (i - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=right {
                        let (s, t) = (self.slot(i, j), self.slot(k, j));
                        self.a[s] -= m * self.a[t];
                    }
                }
            }
        }
        Ok(BandLu { u: self, l, piv })
    }
}

/// Factors of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub(crate) struct BandLu {
    u: BandMatrix,
    l: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.u.n, self.u.kl, self.u.ku);
        assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.l[k * kl + (i - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.u.a[self.u.slot(k, j)] * b[j];
            }
            b[k] = s / self.u.a[self.u.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, kl, ku) = (40, 3, 5);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal so that pivoting actually happens
                let v: f64 = rng.gen_range(-1.0..1.0) + if i == j { 0.01 } else { 0.0 };
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut x = b.clone();
        band.factor().unwrap().solve(&mut x);
        let e = dense.lu().solve(&DVector::from_vec(b)).unwrap();
        let err = x.iter().zip(e.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-9 * e.amax(), "{err}");
    }

    #[test]
    fn singular_is_reported() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.add(0, 0, 1.0);
        band.add(2, 2, 1.0);
        assert!(matches!(band.factor(), Err(Error::SingularMatrix(1))));
    }
}
