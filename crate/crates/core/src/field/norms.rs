use super::ops::grad_raw;
use super::{Grid2D, ScalarField, VectorField};

/// Grid quadrature norms of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
    /// `‖∇x‖_{L²}`
    pub h1_semi: f64,
}

/// Anything [`norms`] accepts.
pub trait Normed {
    fn grid(&self) -> &Grid2D;
    fn components(&self) -> Vec<&[f64]>;
}

impl Normed for ScalarField {
    fn grid(&self) -> &Grid2D {
        ScalarField::grid(self)
    }
    fn components(&self) -> Vec<&[f64]> {
        vec![self.values()]
    }
}

impl Normed for VectorField {
    fn grid(&self) -> &Grid2D {
        VectorField::grid(self)
    }
    fn components(&self) -> Vec<&[f64]> {
        vec![self.comp1(), self.comp2()]
    }
}

pub fn norms<F: Normed + ?Sized>(x: &F) -> Norms {
    let grid = *x.grid();
    let w = grid.cell_area();
    let comps = x.components();
    let mut sq = vec![0.0; grid.len()];
    let mut grad_sq = 0.0;
    for c in &comps {
        for (s, v) in sq.iter_mut().zip(c.iter()) {
            *s += v * v;
        }
        let (d1, d2) = grad_raw(&grid, c);
        grad_sq += d1.iter().chain(&d2).map(|v| v * v).sum::<f64>();
    }
    Norms {
        l2: (sq.iter().sum::<f64>() * w).sqrt(),
        linf: sq.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt(),
        h1_semi: (grad_sq * w).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_field() {
        let g = Grid2D::square_2pi(16).unwrap();
        let n = norms(&ScalarField::constant(g, -3.0));
        assert!((n.l2 - 2.0 * PI * 3.0).abs() < 1e-12);
        assert!((n.linf - 3.0).abs() < 1e-15);
        assert!(n.h1_semi < 1e-12);
    }

    #[test]
    fn sine_monomials() {
        let g = Grid2D::square_2pi(16).unwrap();
        let n = norms(&ScalarField::from_fn(g, |x, _| x.sin()));
        assert!((n.l2 - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((n.h1_semi - (2.0 * PI * PI).sqrt()).abs() < 1e-12);

        // |∇(sin x1 cos 2x2)|² integrates to 2π²·(1 + 4)/2
        let n = norms(&ScalarField::from_fn(g, |x, y| x.sin() * (2.0 * y).cos()));
        assert!((n.l2 - PI).abs() < 1e-12);
        assert!((n.h1_semi - (5.0 * PI * PI).sqrt()).abs() < 1e-12);

        let v = VectorField::from_fn(g, |x, y| (x.sin(), y.cos()));
        let n = norms(&v);
        assert!((n.l2 - (4.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((n.linf - 2f64.sqrt()).abs() < 1e-2);
    }
}
