//! Finite-difference forms of `L_{μe}`, `A_{μo}` and the right-hand side.
//!
//! Everything is assembled as a bilinear form on the ghost-extended node
//! layout, `ψᵀ K φ = Σ_q w_q (...)`, with node stencils
//!
//! * `D_a = ∂₂₂ - ∂₁₁` (five points) and `D_b = 2∂₁₂` (wide, four diagonals)
//!   at every node `q` of the closed rectangle, trapezoidal weights `w_q`;
//! * a compact `2∂₁₂` on every cell, weight `h²`.
//!
//! Outer and inner stencils are the same, so the `L` form is symmetric and the
//! `A` form antisymmetric as matrices. Interior rows divided by `h²` are the
//! strong operators.

use super::band::{BandLu, BandMatrix};
use super::boundary::{ghost, BoundaryData};
use super::domain::{NodeField, NodeVectorField, RectDomain};
use super::eta::EtaFunction;
use crate::error::{Error, Result};

type Stencil = [((isize, isize), f64); 4];

/// `D_a h²`
const DA: Stencil = [((0, 1), 1.0), ((0, -1), 1.0), ((1, 0), -1.0), ((-1, 0), -1.0)];
/// `D_b h²`
const DB: Stencil = [((1, 1), 0.5), ((1, -1), -0.5), ((-1, 1), -0.5), ((-1, -1), 0.5)];
/// Compact `2∂₁₂ h²` on the cell with lower-left node at the origin.
const DC: Stencil = [((1, 1), 2.0), ((1, 0), -2.0), ((0, 1), -2.0), ((0, 0), 2.0)];
/// Centered `∂₁ h` and `∂₂ h`.
const D1: [((isize, isize), f64); 2] = [((1, 0), 0.5), ((-1, 0), -0.5)];
const D2: [((isize, isize), f64); 2] = [((0, 1), 0.5), ((0, -1), -0.5)];

/// Sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOp {
    fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; n + 1];
        let mut indices = Vec::with_capacity(t.len() / 4);
        let mut values: Vec<f64> = Vec::with_capacity(t.len() / 4);
        let mut last = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }

    /// Dimension (the extended node count).
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.indptr[r]..self.indptr[r + 1];
        self.indices[s.clone()].iter().copied().zip(self.values[s].iter().copied())
    }
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }
    /// `ψᵀ K φ`
    pub fn form(&self, psi: &[f64], phi: &[f64]) -> f64 {
        psi.iter().zip(self.apply(phi)).map(|(a, b)| a * b).sum()
    }
    /// Largest `|K_rc - s K_cr|`: 0 for `s = 1` means symmetric, `s = -1` antisymmetric.
    pub fn max_asymmetry(&self, s: f64) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let t = self.row(c).find(|&(k, _)| k == r).map_or(0.0, |(_, w)| w);
                m = m.max((v - s * t).abs());
            }
        }
        m
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[inline]
fn at(d: &RectDomain, i: usize, j: usize, o: (isize, isize)) -> usize {
    d.ext(i as isize + o.0, j as isize + o.1)
}

pub(crate) fn check_range(mu: &NodeField, lower: f64, upper: f64) -> Result<()> {
    let slack = 1e-12 * upper.abs().max(lower.abs()).max(1.0);
    for &v in mu.values() {
        if !(v >= lower - slack && v <= upper + slack) {
            return Err(Error::CoefficientOutOfBounds { value: v, lower, upper });
        }
    }
    Ok(())
}

fn push_outer(t: &mut Vec<(usize, usize, f64)>, rows: &[(usize, f64)], cols: &[(usize, f64)], s: f64) {
    for &(r, a) in rows {
        for &(c, b) in cols {
            t.push((r, c, s * a * b));
        }
    }
}

fn node_stencil(d: &RectDomain, i: usize, j: usize, s: &Stencil) -> [(usize, f64); 4] {
    s.map(|(o, v)| (at(d, i, j, o), v))
}

/// Triplets of the `L` form with weights scaled by `1/h²` (so rows carry `h² L`).
fn l_triplets(d: &RectDomain, mu_e: &[f64], t: &mut Vec<(usize, usize, f64)>) {
    let inv = 1.0 / (d.h() * d.h());
    for i in 0..d.nx() + 2 {
        for j in 0..d.ny() + 2 {
            let w = d.weight(i, j) * inv * inv;
            let a = node_stencil(d, i, j, &DA);
            push_outer(t, &a, &a, w * mu_e[d.node(i, j)]);
        }
    }
    for i in 0..d.nx() + 1 {
        for j in 0..d.ny() + 1 {
            let k = |a, b| mu_e[d.node(a, b)];
            let mu = 0.25 * (k(i, j) + k(i + 1, j) + k(i, j + 1) + k(i + 1, j + 1));
            let c = node_stencil(d, i, j, &DC);
            push_outer(t, &c, &c, inv * mu);
        }
    }
}

/// Corners of the cell with lower-left node at the origin, counterclockwise.
pub(crate) const CELL: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

/// `∮ a db` around a cell for the bilinear interpolants of corner values, i.e.
/// the exact cell integral of the Jacobian `∂₁a∂₂b - ∂₂a∂₁b`.
pub(crate) fn cell_jacobian(a: [f64; 4], b: [f64; 4]) -> f64 {
    (0..4).map(|k| a[k] * b[(k + 1) % 4] - a[(k + 1) % 4] * b[k]).sum::<f64>() * 0.5
}

/// The odd integrand equals `-2[J(∂₁ψ, ∂₁φ) + J(∂₂ψ, ∂₂φ)]`; summing exact cell
/// Jacobians of the nodal gradients telescopes to the boundary, so the form is
/// antisymmetric and vanishes for constant `μ_o` against clamped test functions.
fn a_triplets(d: &RectDomain, mu_o: &[f64], t: &mut Vec<(usize, usize, f64)>) {
    let inv = 1.0 / (d.h() * d.h());
    for i in 0..d.nx() + 1 {
        for j in 0..d.ny() + 1 {
            let mu = 0.25 * CELL.iter().map(|&(a, b)| mu_o[d.node(i + a, j + b)]).sum::<f64>();
            if mu == 0.0 {
                continue;
            }
            for st in [&D1, &D2] {
                let g = CELL.map(|(a, b)| st.map(|(o, v)| (at(d, i + a, j + b, o), v)));
                for k in 0..4 {
                    push_outer(t, &g[k], &g[(k + 1) % 4], -mu * inv);
                    push_outer(t, &g[(k + 1) % 4], &g[k], mu * inv);
                }
            }
        }
    }
}

/// Form of `L_{μe} = (∂₂₂-∂₁₁)(μ_e(∂₂₂-∂₁₁)) + (2∂₁₂)(μ_e(2∂₁₂))` on the extended layout.
pub fn assemble_l(mu_e: &NodeField, mu_star: f64, mu_upper: f64) -> Result<SparseOp> {
    check_range(mu_e, mu_star, mu_upper)?;
    let d = *mu_e.domain();
    let mut t = Vec::new();
    l_triplets(&d, mu_e.values(), &mut t);
    Ok(SparseOp::from_triplets(d.ext_len(), t))
}

/// Form of `A_{μo} = (∂₂₂-∂₁₁)(μ_o(2∂₁₂)) - (2∂₁₂)(μ_o(∂₂₂-∂₁₁))` on the extended layout.
pub fn assemble_a(mu_o: &NodeField, mu_upper: f64) -> Result<SparseOp> {
    check_range(mu_o, -mu_upper, mu_upper)?;
    let d = *mu_o.domain();
    let mut t = Vec::new();
    a_triplets(&d, mu_o.values(), &mut t);
    Ok(SparseOp::from_triplets(d.ext_len(), t))
}

pub(crate) fn assemble_pair(mu_e: &NodeField, mu_o: &NodeField) -> SparseOp {
    let d = *mu_e.domain();
    let mut t = Vec::new();
    l_triplets(&d, mu_e.values(), &mut t);
    a_triplets(&d, mu_o.values(), &mut t);
    SparseOp::from_triplets(d.ext_len(), t)
}

/// Where an extended index lands after eliminating boundary and ghost nodes.
#[derive(Clone, Copy)]
enum Slot {
    Unknown(usize),
    Known(f64),
}

/// Row and column maps of the ghost elimination.
pub(crate) struct Elimination {
    /// Unknown receiving test-function row `e`, if any.
    rows: Vec<Option<usize>>,
    /// `φ_e = slot + offset`.
    cols: Vec<(Slot, f64)>,
}

impl Elimination {
    pub fn new(bd: &BoundaryData) -> Self {
        let d = *bd.domain();
        let real = |i: usize, j: usize| -> Slot {
            if d.is_boundary(i, j) {
                Slot::Known(bd.trace(i, j))
            } else {
                Slot::Unknown(d.unknown(i, j))
            }
        };
        let mut rows = Vec::with_capacity(d.ext_len());
        let mut cols = Vec::with_capacity(d.ext_len());
        for e in 0..d.ext_len() {
            let (slot, off) = match ghost(&d, e) {
                Some(g) => (real(g.mirror.0, g.mirror.1), bd.ghost_offset(&g)),
                None => {
                    let (i, j) = d.ext_coords(e);
                    (real(i as usize, j as usize), 0.0)
                }
            };
            rows.push(match slot {
                Slot::Unknown(p) => Some(p),
                Slot::Known(_) => None,
            });
            cols.push((slot, off));
        }
        Self { rows, cols }
    }

    /// Band matrix and constant part of the reduced system `Pᵀ K (P φ + c)`.
    pub fn reduce(&self, d: &RectDomain, k: &SparseOp) -> (BandMatrix, Vec<f64>) {
        // the odd cell form couples nodes three apart along a grid line
        let bw = 3 * d.ny().max(1);
        let mut band = BandMatrix::zeros(d.interior_len(), bw, bw);
        let mut rhs = vec![0.0; d.interior_len()];
        for r in 0..k.dim() {
            let Some(p) = self.rows[r] else { continue };
            for (c, v) in k.row(r) {
                let (slot, off) = self.cols[c];
                match slot {
                    Slot::Unknown(q) => band.add(p, q, v),
                    Slot::Known(x) => rhs[p] -= v * x,
                }
                rhs[p] -= v * off;
            }
        }
        (band, rhs)
    }

    /// `Pᵀ b` for a vector `b` on the extended layout.
    pub fn fold(&self, b: &[f64], out: &mut [f64]) {
        for (e, &v) in b.iter().enumerate() {
            if let Some(p) = self.rows[e] {
                out[p] += v;
            }
        }
    }
}

/// Velocity `∇⊥φ = (-∂₂φ, ∂₁φ)` by centered differences at every node.
pub(crate) fn perp_grad_nodes(d: &RectDomain, ext: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let inv = 1.0 / d.h();
    let mut u1 = Vec::with_capacity(d.len());
    let mut u2 = Vec::with_capacity(d.len());
    for i in 0..d.nx() + 2 {
        for j in 0..d.ny() + 2 {
            let s = |st: &[((isize, isize), f64); 2]| st.iter().map(|&(o, c)| c * ext[at(d, i, j, o)]).sum::<f64>() * inv;
            u1.push(-s(&D2));
            u2.push(s(&D1));
        }
    }
    (u1, u2)
}

/// Load vector `b(ψ) = ∫ η(φ)(∇⊥φ⊗∇⊥φ):∇∇⊥ψ + ∫ f·∇⊥ψ` on the extended layout,
/// scaled like the rows of the operator forms.
pub(crate) fn load_ext(d: &RectDomain, ext: &[f64], rho: &[f64], f: Option<&NodeVectorField>) -> Vec<f64> {
    let (u1, u2) = perp_grad_nodes(d, ext);
    let inv = 1.0 / (d.h() * d.h());
    let mut b = vec![0.0; d.ext_len()];
    for i in 0..d.nx() + 2 {
        for j in 0..d.ny() + 2 {
            let k = d.node(i, j);
            let w = d.weight(i, j);
            // (u₂² - u₁²) ψ₁₂ + u₁u₂ (ψ₁₁ - ψ₂₂) with ψ₁₂ = D_b/2, ψ₁₁ - ψ₂₂ = -D_a
            let p = 0.5 * w * inv * rho[k] * (u2[k] * u2[k] - u1[k] * u1[k]);
            let q = -w * inv * rho[k] * u1[k] * u2[k];
            for (o, c) in DB {
                b[at(d, i, j, o)] += p * c;
            }
            for (o, c) in DA {
                b[at(d, i, j, o)] += q * c;
            }
            if let Some(f) = f {
                // -f₁ψ₂ + f₂ψ₁
                let s = w / d.h();
                for (o, c) in D2 {
                    b[at(d, i, j, o)] -= s * c * f.c1.values()[k];
                }
                for (o, c) in D1 {
                    b[at(d, i, j, o)] += s * c * f.c2.values()[k];
                }
            }
        }
    }
    b
}

/// Discrete `-∇⊥·f + ∇⊥·div(η(φ)∇⊥φ⊗∇⊥φ)` at the interior nodes, evaluated
/// as the dual pairing against nodal test functions (no third derivatives of
/// `φ`). Ghost values of `φ` come from `boundary`; boundary nodes are set to 0.
pub fn nonlinear_rhs(phi: &NodeField, boundary: &BoundaryData, eta: &EtaFunction, f: &NodeVectorField) -> Result<NodeField> {
    let d = *phi.domain();
    if *boundary.domain() != d || *f.domain() != d {
        return Err(Error::GridMismatch);
    }
    phi.validate()?;
    let ext = boundary.extend(phi.values());
    let rho: Vec<f64> = phi.values().iter().map(|&s| eta.eval(s)).collect();
    let b = load_ext(&d, &ext, &rho, Some(f));
    let mut red = vec![0.0; d.interior_len()];
    Elimination::new(boundary).fold(&b, &mut red);
    let mut out = vec![0.0; d.len()];
    for i in 1..=d.nx() {
        for j in 1..=d.ny() {
            out[d.node(i, j)] = red[d.unknown(i, j)] / (d.h() * d.h());
        }
    }
    Ok(NodeField::from_vec_unchecked(d, out))
}

pub(crate) fn factor(band: BandMatrix) -> Result<BandLu> {
    band.factor()
}

/// Odd integral `∫ μ_o [(2∂₁₂φ)(∂₂₂ψ-∂₁₁ψ) - (∂₂₂φ-∂₁₁φ)(2∂₁₂ψ)]` over the cells
/// whose corners are interior nodes, in the cell-Jacobian form of the assembled
/// operator. Antisymmetric under `φ ↔ ψ`.
pub fn odd_bilinear(mu_o: &NodeField, phi: &NodeField, psi: &NodeField) -> Result<f64> {
    let d = *mu_o.domain();
    if *phi.domain() != d || *psi.domain() != d {
        return Err(Error::GridMismatch);
    }
    let h = d.h();
    let grad = |f: &NodeField, i: usize, j: usize| {
        [
            (f.get(i + 1, j) - f.get(i - 1, j)) / (2.0 * h),
            (f.get(i, j + 1) - f.get(i, j - 1)) / (2.0 * h),
        ]
    };
    let mut s = 0.0;
    for i in 1..d.nx() {
        for j in 1..d.ny() {
            let gp = CELL.map(|(a, b)| grad(phi, i + a, j + b));
            let gq = CELL.map(|(a, b)| grad(psi, i + a, j + b));
            let mu = 0.25 * CELL.iter().map(|&(a, b)| mu_o.get(i + a, j + b)).sum::<f64>();
            let jac = |m: usize| cell_jacobian(gq.map(|g| g[m]), gp.map(|g| g[m]));
            s -= 2.0 * mu * (jac(0) + jac(1));
        }
    }
    Ok(s)
}

/// Node values of `D_a φ`, `D_b φ` and the cell values of the compact `2∂₁₂φ`
/// from a ghost-extended vector.
pub(crate) fn second_derivatives(d: &RectDomain, ext: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let inv = 1.0 / (d.h() * d.h());
    let ap = |i: usize, j: usize, s: &Stencil| s.iter().map(|&(o, c)| c * ext[at(d, i, j, o)]).sum::<f64>() * inv;
    let mut da = Vec::with_capacity(d.len());
    let mut db = Vec::with_capacity(d.len());
    for i in 0..d.nx() + 2 {
        for j in 0..d.ny() + 2 {
            da.push(ap(i, j, &DA));
            db.push(ap(i, j, &DB));
        }
    }
    let mut dc = Vec::with_capacity((d.nx() + 1) * (d.ny() + 1));
    for i in 0..d.nx() + 1 {
        for j in 0..d.ny() + 1 {
            dc.push(ap(i, j, &DC));
        }
    }
    (da, db, dc)
}

/// `∂₁₁`, `∂₂₂` at every node from a ghost-extended vector.
pub(crate) fn pure_second_derivatives(d: &RectDomain, ext: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let inv = 1.0 / (d.h() * d.h());
    let mut p11 = Vec::with_capacity(d.len());
    let mut p22 = Vec::with_capacity(d.len());
    for i in 0..d.nx() + 2 {
        for j in 0..d.ny() + 2 {
            let v = |a: isize, b: isize| ext[at(d, i, j, (a, b))];
            p11.push((v(1, 0) - 2.0 * v(0, 0) + v(-1, 0)) * inv);
            p22.push((v(0, 1) - 2.0 * v(0, 0) + v(0, -1)) * inv);
        }
    }
    (p11, p22)
}
