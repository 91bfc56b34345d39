//! Clamped boundary data of the stream function and the ghost layer.

use super::domain::{NodeField, RectDomain};
use crate::error::{Error, Result};

/// Largest admissible `|∮ g·n|`.
pub const FLUX_TOL: f64 = 1e-10;

/// Trace `φ₀` and normal derivative `φ₁` of the stream function along the
/// counterclockwise boundary walk starting at the corner `(0, 0)`.
///
/// The boundary velocity `g` is kept at the walk nodes: with `u = ∇⊥φ` it
/// fixes the full gradient `∇φ = (g₂, -g₁)`, which the ghost layer uses.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    domain: RectDomain,
    g: Vec<(f64, f64)>,
    c0: f64,
    phi0: Vec<f64>,
    phi1: Vec<f64>,
    flux: f64,
}

/// Outward normals of the bottom, right, top and left sides.
const NORMALS: [(f64, f64); 4] = [(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)];

impl BoundaryData {
    /// Homogeneous data `g = 0`, `φ₀ = C₀`.
    pub fn homogeneous(domain: RectDomain, c0: f64) -> Self {
        boundary_data_from_g(domain, |_, _| (0.0, 0.0), c0).expect("zero data has zero flux")
    }

    pub fn domain(&self) -> &RectDomain {
        &self.domain
    }
    pub fn c0(&self) -> f64 {
        self.c0
    }
    /// Boundary velocity at the walk nodes.
    pub fn g(&self) -> &[(f64, f64)] {
        &self.g
    }
    pub fn phi0(&self) -> &[f64] {
        &self.phi0
    }
    pub fn phi1(&self) -> &[f64] {
        &self.phi1
    }
    /// `∮ g·n` by the trapezoidal rule.
    pub fn flux(&self) -> f64 {
        self.flux
    }
    /// Boundary nodes in walk order.
    pub fn walk(&self) -> Vec<(usize, usize)> {
        walk(&self.domain)
    }

    /// Walk position of boundary node `(i, j)`.
    pub fn walk_index(&self, i: usize, j: usize) -> Option<usize> {
        walk_index(&self.domain, i, j)
    }

    /// `∇φ` at boundary node `(i, j)`.
    pub(crate) fn gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let (g1, g2) = self.g[walk_index(&self.domain, i, j).expect("boundary node")];
        (g2, -g1)
    }

    /// `φ₀` at boundary node `(i, j)`.
    pub(crate) fn trace(&self, i: usize, j: usize) -> f64 {
        self.phi0[walk_index(&self.domain, i, j).expect("boundary node")]
    }

    /// Copy of `phi` with its boundary nodes overwritten by `φ₀`.
    pub fn impose(&self, phi: &NodeField) -> NodeField {
        let d = self.domain;
        let mut v = phi.values().to_vec();
        for (k, &(i, j)) in walk(&d).iter().enumerate() {
            v[d.node(i, j)] = self.phi0[k];
        }
        NodeField::from_vec_unchecked(d, v)
    }

    /// Node values extended to the ghost layer: a ghost `G` with mirror node
    /// `M` across the boundary point `B` gets `φ(M) + (G - M)·∇φ(B)`.
    pub fn extend(&self, phi: &[f64]) -> Vec<f64> {
        let d = self.domain;
        let mut ext = vec![0.0; d.ext_len()];
        for i in 0..d.nx() + 2 {
            for j in 0..d.ny() + 2 {
                ext[d.ext(i as isize, j as isize)] = phi[d.node(i, j)];
            }
        }
        for e in 0..d.ext_len() {
            if let Some(g) = ghost(&d, e) {
                ext[e] = phi[d.node(g.mirror.0, g.mirror.1)] + self.ghost_offset(&g);
            }
        }
        ext
    }

    pub(crate) fn ghost_offset(&self, g: &Ghost) -> f64 {
        let (p1, p2) = self.gradient(g.base.0, g.base.1);
        g.dx * p1 + g.dy * p2
    }
}

/// Ghost node of the extended layout.
pub(crate) struct Ghost {
    pub mirror: (usize, usize),
    pub base: (usize, usize),
    pub dx: f64,
    pub dy: f64,
}

/// Reflection data of extended index `e`, `None` for real nodes.
pub(crate) fn ghost(d: &RectDomain, e: usize) -> Option<Ghost> {
    let (i, j) = d.ext_coords(e);
    let (nx, ny) = (d.nx() as isize, d.ny() as isize);
    let reflect = |k: isize, n: isize| -> isize {
        if k == -1 {
            1
        } else if k == n + 2 {
            n
        } else {
            k
        }
    };
    let (mi, mj) = (reflect(i, nx), reflect(j, ny));
    if (mi, mj) == (i, j) {
        return None;
    }
    Some(Ghost {
        mirror: (mi as usize, mj as usize),
        base: (((i + mi) / 2) as usize, ((j + mj) / 2) as usize),
        dx: (i - mi) as f64 * d.h(),
        dy: (j - mj) as f64 * d.h(),
    })
}

pub(crate) fn walk(d: &RectDomain) -> Vec<(usize, usize)> {
    let (nx, ny) = (d.nx(), d.ny());
    let mut w = Vec::with_capacity(2 * (nx + ny + 2));
    w.extend((0..=nx + 1).map(|i| (i, 0)));
    w.extend((1..=ny + 1).map(|j| (nx + 1, j)));
    w.extend((0..=nx).rev().map(|i| (i, ny + 1)));
    w.extend((1..=ny).rev().map(|j| (0, j)));
    w
}

fn walk_index(d: &RectDomain, i: usize, j: usize) -> Option<usize> {
    let (nx, ny) = (d.nx(), d.ny());
    if i > nx + 1 || j > ny + 1 {
        None
    } else if j == 0 {
        Some(i)
    } else if i == nx + 1 {
        Some(nx + 1 + j)
    } else if j == ny + 1 {
        Some((nx + 1) + (ny + 1) + (nx + 1 - i))
    } else if i == 0 {
        Some(2 * (nx + 1) + (ny + 1) + (ny + 1 - j))
    } else {
        None
    }
}

/// Side of the walk step leaving position `k`: 0 bottom, 1 right, 2 top, 3 left.
fn side(d: &RectDomain, k: usize) -> usize {
    let (nx, ny) = (d.nx(), d.ny());
    if k <= nx {
        0
    } else if k <= nx + 1 + ny {
        1
    } else if k <= 2 * nx + 2 + ny {
        2
    } else {
        3
    }
}

/// Boundary data from a boundary velocity `g`.
///
/// `φ₀(γ(s)) = -∫₀ˢ g·n + C₀` by cumulative trapezoidal integration along the
/// counterclockwise walk, side by side with that side's outward normal, and
/// `φ₁ = g·n⊥` with `n⊥ = (-n₂, n₁)`, which equals `∂φ/∂n`. At a corner the
/// normal of the side leaving it is used for `φ₁`.
pub fn boundary_data_from_g(domain: RectDomain, g: impl Fn(f64, f64) -> (f64, f64), c0: f64) -> Result<BoundaryData> {
    if !c0.is_finite() {
        return Err(Error::param("c0", "must be finite"));
    }
    let w = walk(&domain);
    let gv: Vec<(f64, f64)> = w
        .iter()
        .map(|&(i, j)| {
            let (x, y) = domain.point(i, j);
            g(x, y)
        })
        .collect();
    if gv.iter().any(|(a, b)| !(a.is_finite() && b.is_finite())) {
        return Err(Error::NonFinite("boundary velocity"));
    }
    let m = w.len();
    let h = domain.h();
    let mut phi0 = Vec::with_capacity(m);
    let mut phi1 = Vec::with_capacity(m);
    let mut acc = 0.0;
    for k in 0..m {
        let n = NORMALS[side(&domain, k)];
        let gn = |p: (f64, f64)| p.0 * n.0 + p.1 * n.1;
        phi0.push(c0 - acc);
        phi1.push(-gv[k].0 * n.1 + gv[k].1 * n.0);
        acc += 0.5 * h * (gn(gv[k]) + gn(gv[(k + 1) % m]));
    }
    if acc.abs() > FLUX_TOL {
        return Err(Error::NonzeroFlux(acc));
    }
    Ok(BoundaryData {
        domain,
        g: gv,
        c0,
        phi0,
        phi1,
        flux: acc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom() -> RectDomain {
        RectDomain::new(9, 14, 1.0, 1.5).unwrap()
    }

    #[test]
    fn walk_is_consistent() {
        let d = dom();
        let w = walk(&d);
        assert_eq!(w.len(), 2 * (d.nx() + d.ny() + 2));
        for (k, &(i, j)) in w.iter().enumerate() {
            assert!(d.is_boundary(i, j));
            assert_eq!(walk_index(&d, i, j), Some(k));
        }
        assert_eq!(walk_index(&d, 3, 4), None);
    }

    #[test]
    fn zero_velocity() {
        let b = boundary_data_from_g(dom(), |_, _| (0.0, 0.0), 0.3).unwrap();
        assert!(b.phi0().iter().all(|&v| v == 0.3));
        assert!(b.phi1().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tangential_velocity() {
        let d = dom();
        let (lx, ly) = (d.lx(), d.ly());
        // counterclockwise unit tangent, zero at the corners where it jumps
        let tau = move |x: f64, y: f64| {
            let corner = (x == 0.0 || x == lx) && (y == 0.0 || y == ly);
            if corner {
                (0.0, 0.0)
            } else if y == 0.0 {
                (1.0, 0.0)
            } else if x == lx {
                (0.0, 1.0)
            } else if y == ly {
                (-1.0, 0.0)
            } else {
                (0.0, -1.0)
            }
        };
        let b = boundary_data_from_g(d, tau, 0.0).unwrap();
        assert!(b.phi0().iter().all(|&v| v.abs() < 1e-15));
        // τ·n⊥ = +1 with n⊥ = (-n₂, n₁)
        for (k, &(i, j)) in b.walk().iter().enumerate() {
            let corner = (i == 0 || i == d.nx() + 1) && (j == 0 || j == d.ny() + 1);
            assert_eq!(b.phi1()[k], if corner { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn normal_velocity_is_rejected() {
        let d = dom();
        let n = |x: f64, y: f64| {
            if y == 0.0 {
                (0.0, -1.0)
            } else if x == d.lx() {
                (1.0, 0.0)
            } else if y == d.ly() {
                (0.0, 1.0)
            } else {
                (-1.0, 0.0)
            }
        };
        match boundary_data_from_g(d, n, 0.0) {
            Err(Error::NonzeroFlux(f)) => assert!((f - 2.0 * (d.lx() + d.ly())).abs() < 0.25, "{f}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trace_of_linear_stream_function() {
        // φ = 2x - y + 1 gives g = ∇⊥φ = (1, 2) and φ₀ = φ on the boundary
        let d = dom();
        let b = boundary_data_from_g(d, |_, _| (1.0, 2.0), 1.0).unwrap();
        for (k, &(i, j)) in b.walk().iter().enumerate() {
            let (x, y) = d.point(i, j);
            assert!((b.phi0()[k] - (2.0 * x - y + 1.0)).abs() < 1e-13);
        }
        let ext = b.extend(NodeField::from_fn(d, |x, y| 2.0 * x - y + 1.0).values());
        for e in 0..d.ext_len() {
            let (i, j) = d.ext_coords(e);
            let (x, y) = (i as f64 * d.h(), j as f64 * d.h());
            assert!((ext[e] - (2.0 * x - y + 1.0)).abs() < 1e-13);
        }
    }
}
