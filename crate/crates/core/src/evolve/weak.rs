//! Space-time weak form of the momentum equation.

use std::f64::consts::PI;

use super::{Forcing, SimulationState, Viscous};
use crate::error::{Error, Result};
use crate::field::ops::{divergence_raw_max, velocity_gradient_raw};
use crate::field::VectorField;
use crate::viscosity::ViscosityLaw;

/// Largest admissible `|div w|` of a spatial test field.
pub const TEST_DIV_TOL: f64 = 1e-8;

/// Max over the test fields `w` of the weak residual
///
/// `∫∫ -ρu·∂tφ - ρ(u⊗u):∇φ + ½(μ_e S + μ_o S°):(∇φ + ∇ᵀφ) - ρf·φ`
///
/// with `φ(t, x) = sin²(π (t - t0)/(t1 - t0)) w(x)` vanishing at both ends of
/// the trajectory. Time integrals use the trapezoidal rule on the stored states.
pub fn residual_weak_momentum(
    trajectory: &[SimulationState],
    law: &ViscosityLaw,
    force: &Forcing,
    tests: &[VectorField],
) -> Result<f64> {
    if trajectory.len() < 2 {
        return Err(Error::param("trajectory", "needs at least two states"));
    }
    let grid = *trajectory[0].u.grid();
    for w in tests {
        if *w.grid() != grid {
            return Err(Error::GridMismatch);
        }
        w.validate()?;
        let d = divergence_raw_max(&grid, w.comp1(), w.comp2());
        if d > TEST_DIV_TOL {
            return Err(Error::NotDivergenceFree(d));
        }
    }
    let (t0, t1) = (trajectory[0].t, trajectory[trajectory.len() - 1].t);
    if !(t1 > t0) {
        return Err(Error::param("trajectory", "times must increase"));
    }
    // symmetric gradients (2∂1w1, ∂2w1 + ∂1w2, 2∂2w2) of the test fields
    let gw: Vec<[Vec<f64>; 3]> = tests
        .iter()
        .map(|w| {
            let [a, b, c, d] = velocity_gradient_raw(&grid, w.comp1(), w.comp2());
            let g12 = b.iter().zip(&c).map(|(x, y)| x + y).collect();
            [a.iter().map(|x| 2.0 * x).collect(), g12, d.iter().map(|x| 2.0 * x).collect()]
        })
        .collect();

    let span = t1 - t0;
    let mut acc = vec![0.0; tests.len()];
    for (k, st) in trajectory.iter().enumerate() {
        if *st.u.grid() != grid || *st.rho.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let weight = if k == 0 {
            0.5 * (trajectory[1].t - st.t)
        } else if k + 1 == trajectory.len() {
            0.5 * (st.t - trajectory[k - 1].t)
        } else {
            0.5 * (trajectory[k + 1].t - trajectory[k - 1].t)
        };
        let s = (st.t - t0) / span;
        let chi = (PI * s).sin().powi(2);
        let dchi = PI / span * (2.0 * PI * s).sin();

        let (rho, u1, u2) = (st.rho.values(), st.u.comp1(), st.u.comp2());
        let v = Viscous::new(&grid, law, rho, u1, u2);
        let f = force.at(st.t);
        for (j, (w, g)) in tests.iter().zip(&gw).enumerate() {
            let (w1, w2) = (w.comp1(), w.comp2());
            let mut a = 0.0;
            let mut b = 0.0;
            for p in 0..rho.len() {
                let r = rho[p];
                a += r * (u1[p] * w1[p] + u2[p] * w2[p]);
                let t11 = -r * u1[p] * u1[p] + v.mu_e[p] * v.s11[p] - v.mu_o[p] * v.a[p];
                let t12 = -r * u1[p] * u2[p] + v.mu_e[p] * v.s12[p] + v.mu_o[p] * v.b[p];
                let t22 = -r * u2[p] * u2[p] + v.mu_e[p] * v.s22[p] + v.mu_o[p] * v.a[p];
                b += 0.5 * (t11 * g[0][p] + 2.0 * t12 * g[1][p] + t22 * g[2][p]);
                if let Some(f) = &f {
                    b -= r * (f.comp1()[p] * w1[p] + f.comp2()[p] * w2[p]);
                }
            }
            acc[j] += weight * (-dchi * a + chi * b) * grid.cell_area();
        }
    }
    Ok(acc.iter().fold(0.0, |m, v| m.max(v.abs())))
}
