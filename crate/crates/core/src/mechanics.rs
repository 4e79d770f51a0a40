//! Matrix pressure integral, closed-form radial velocity and wound-edge speed.
//!
//! The momentum boundary-value problem is never solved. With the pressure
//! taken piecewise constant on each cell, the cumulative integrals
//! `A(r) = int_R^r y P dy` and `Q - A(r)` are exact, and
//!
//! ```text
//! v(r) = [ (L^2 - r^2) A(r) - (r^2 + R^2) (Q - A(r)) ] / (r (L^2 + R^2))
//! v_r  = P - 2Q/(L^2 + R^2) - v/r
//! Rdot = -2 R Q / (L^2 + R^2)
//! ```

use crate::constitutive::{pressure, Parameters};
use crate::error::{Error, Result};
use crate::fixedgrid::Grid;

/// Domains narrower than this are treated as collapsed.
const MIN_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityProfile {
    /// Velocity at the `N + 1` cell faces; `v[0] = Rdot`, `v[N] = 0`.
    pub v_face: Vec<f64>,
    pub v_center: Vec<f64>,
    pub vr_center: Vec<f64>,
    /// Pressure integral `int_R^L r P dr`.
    pub q: f64,
    pub rdot: f64,
}

impl VelocityProfile {
    /// A motionless profile (zero pressure everywhere).
    pub fn at_rest(cells: usize) -> Self {
        VelocityProfile {
            v_face: vec![0.0; cells + 1],
            v_center: vec![0.0; cells],
            vr_center: vec![0.0; cells],
            q: 0.0,
            rdot: 0.0,
        }
    }

    /// `max |v/r|` over cell centers.
    pub fn max_strain_rate(&self, grid: &Grid) -> f64 {
        self.v_center
            .iter()
            .zip(grid.r_center())
            .fold(0.0_f64, |acc, (v, r)| acc.max((v / r).abs()))
    }

    pub fn max_abs_vr(&self) -> f64 {
        self.vr_center.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

fn check_width(grid: &Grid) -> Result<()> {
    let width = grid.width();
    if width <= MIN_WIDTH * grid.outer_radius() {
        return Err(Error::DegenerateDomain { width });
    }
    Ok(())
}

/// Wound-edge speed from the pressure integral.
#[inline]
pub fn edge_speed(r: f64, l: f64, q: f64) -> f64 {
    -2.0 * r * q / (l * l + r * r)
}

/// `int_R^L r P(rho) dr` with `P` constant on each cell.
pub fn compute_q(rho: &[f64], grid: &Grid, beta: f64) -> Result<f64> {
    check_width(grid)?;
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { context: "compute_q" });
    }
    let rf = grid.r_face();
    Ok(rho
        .iter()
        .enumerate()
        .map(|(i, &rho)| pressure(rho, beta) * 0.5 * (rf[i + 1] * rf[i + 1] - rf[i] * rf[i]))
        .sum())
}

pub fn compute_velocity(rho: &[f64], grid: &Grid, params: &Parameters) -> Result<VelocityProfile> {
    check_width(grid)?;
    let n = grid.cells();
    debug_assert_eq!(rho.len(), n);
    if rho.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { context: "compute_velocity" });
    }
    let l = grid.outer_radius();
    let r_in = grid.inner_radius();
    let denom = l * l + r_in * r_in;
    let rf = grid.r_face();
    let rc = grid.r_center();

    let pressures: Vec<f64> = rho.iter().map(|&x| pressure(x, params.beta)).collect();

    // Cumulative integral up to each face; the last entry is Q.
    let mut inner = Vec::with_capacity(n + 1);
    inner.push(0.0);
    let mut acc = 0.0;
    for i in 0..n {
        acc += pressures[i] * 0.5 * (rf[i + 1] * rf[i + 1] - rf[i] * rf[i]);
        inner.push(acc);
    }
    let q = acc;
    let rdot = edge_speed(r_in, l, q);

    let velocity = |r: f64, a: f64| -> f64 {
        let b = q - a;
        ((l * l - r * r) * a - (r * r + r_in * r_in) * b) / (r * denom)
    };

    let mut v_face: Vec<f64> = (0..=n).map(|j| velocity(rf[j], inner[j])).collect();
    v_face[0] = rdot;
    v_face[n] = 0.0;

    let mut v_center = Vec::with_capacity(n);
    let mut vr_center = Vec::with_capacity(n);
    for i in 0..n {
        let a = inner[i] + pressures[i] * 0.5 * (rc[i] * rc[i] - rf[i] * rf[i]);
        let v = velocity(rc[i], a);
        v_center.push(v);
        vr_center.push(pressures[i] - 2.0 * q / denom - v / rc[i]);
    }

    Ok(VelocityProfile { v_face, v_center, vr_center, q, rdot })
}

/// Admissible band `(R0 e^{-2I/L^2}, R0 e^{-I/L^2})` with `I` the trapezoidal
/// integral of the sampled `Q` history.
pub fn sandwich_bounds(times: &[f64], q: &[f64], r0: f64, l: f64) -> (f64, f64) {
    let integral = trapezoid(times, q);
    let l2 = l * l;
    (r0 * (-2.0 * integral / l2).exp(), r0 * (-integral / l2).exp())
}

pub(crate) fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}
