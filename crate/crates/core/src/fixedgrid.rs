//! Front-fixing transform and finite-volume operators on `xi in [0, 1]`.
//!
//! The annulus `R(t) <= r <= L` is mapped to the unit interval through
//! `r = (1 - xi) R + xi L`. On the fixed interval every field obeys
//!
//! ```text
//! u_t + (1/r) d_xi(r u M) = (1/r) d_xi(r D~ d_xi u) - (1/r) d_xi(r T~) + R_u - K u
//! M = (Rdot (xi - 1) + v) / (L - R)
//! K = Rdot / (L - R) * ((1 - xi)(L - R)/r - 1)
//! ```
//!
//! with `D~ = D / (L - R)^2` and the taxis flux `T~` built from the scaled
//! sensitivities `chi / (L - R)^2`. Fluxes here are in xi-form, i.e. the
//! physical radial flux divided by `L - R`, and the semi-discrete update of
//! cell `i` is `-(r_{i+1/2} F_{i+1/2} - r_{i-1/2} F_{i-1/2}) / (r_i dxi)`.
//! Summing `r_i dxi` times that update telescopes to the end fluxes.

use std::ops::{Index, IndexMut};

use crate::constitutive::{bounded_taxis, heaviside_smooth, FieldId, FieldValues, Parameters};
use crate::error::{Error, Result};
use crate::mechanics::VelocityProfile;

/// Uniform cell partition of `xi in [0, 1]` together with its image in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    cells: usize,
    r_inner: f64,
    r_outer: f64,
    xi_center: Vec<f64>,
    xi_face: Vec<f64>,
    r_center: Vec<f64>,
    r_face: Vec<f64>,
}

impl Grid {
    pub fn new(cells: usize, r_inner: f64, r_outer: f64) -> Result<Grid> {
        if cells < 8 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: cells as f64,
                reason: "at least 8 cells required",
            });
        }
        if !(r_inner > 0.0 && r_inner < r_outer) || !r_outer.is_finite() {
            return Err(Error::InvalidGeometry { r: r_inner, l: r_outer });
        }
        let n = cells as f64;
        let xi_face: Vec<f64> = (0..=cells).map(|j| j as f64 / n).collect();
        let xi_center: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) / n).collect();
        let map = |xi: f64| (1.0 - xi) * r_inner + xi * r_outer;
        Ok(Grid {
            cells,
            r_inner,
            r_outer,
            r_center: xi_center.iter().map(|&x| map(x)).collect(),
            r_face: xi_face.iter().map(|&x| map(x)).collect(),
            xi_center,
            xi_face,
        })
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn dxi(&self) -> f64 {
        1.0 / self.cells as f64
    }

    #[inline]
    pub fn inner_radius(&self) -> f64 {
        self.r_inner
    }

    #[inline]
    pub fn outer_radius(&self) -> f64 {
        self.r_outer
    }

    /// `L - R`.
    #[inline]
    pub fn width(&self) -> f64 {
        self.r_outer - self.r_inner
    }

    pub fn r_at(&self, xi: f64) -> f64 {
        (1.0 - xi) * self.r_inner + xi * self.r_outer
    }

    pub fn xi_center(&self) -> &[f64] {
        &self.xi_center
    }

    pub fn xi_face(&self) -> &[f64] {
        &self.xi_face
    }

    pub fn r_center(&self) -> &[f64] {
        &self.r_center
    }

    pub fn r_face(&self) -> &[f64] {
        &self.r_face
    }

    /// Midpoint quadrature of `int_R^L r u dr`.
    pub fn integral(&self, u: &[f64]) -> f64 {
        let sum: f64 = u.iter().zip(&self.r_center).map(|(u, r)| u * r).sum();
        sum * self.width() * self.dxi()
    }

    /// `-(r_{i+1/2} F_{i+1/2} - r_{i-1/2} F_{i-1/2}) / (r_i dxi)` for each cell,
    /// added into `out`.
    pub fn add_divergence(&self, flux: &[f64], out: &mut [f64]) {
        debug_assert_eq!(flux.len(), self.cells + 1);
        let n = self.cells as f64;
        for i in 0..self.cells {
            out[i] -= (self.r_face[i + 1] * flux[i + 1] - self.r_face[i] * flux[i]) * n
                / self.r_center[i];
        }
    }
}

/// Eight cell-averaged arrays on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Fields {
    data: [Vec<f64>; 8],
}

impl Fields {
    pub fn zeros(cells: usize) -> Fields {
        Fields { data: std::array::from_fn(|_| vec![0.0; cells]) }
    }

    pub fn uniform(cells: usize, values: FieldValues) -> Fields {
        Fields { data: std::array::from_fn(|k| vec![values.0[k]; cells]) }
    }

    pub fn from_fn(cells: usize, mut f: impl FnMut(FieldId, usize) -> f64) -> Fields {
        let mut out = Fields::zeros(cells);
        for id in FieldId::ALL {
            for i in 0..cells {
                out[id][i] = f(id, i);
            }
        }
        out
    }

    pub fn cells(&self) -> usize {
        self.data[0].len()
    }

    /// All eight values in cell `i`.
    pub fn at(&self, i: usize) -> FieldValues {
        FieldValues(std::array::from_fn(|k| self.data[k][i]))
    }

    pub fn set(&mut self, i: usize, values: FieldValues) {
        for (k, v) in values.0.into_iter().enumerate() {
            self.data[k][i] = v;
        }
    }

    pub fn min(&self, id: FieldId) -> f64 {
        self[id].iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self, id: FieldId) -> f64 {
        self[id].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First field holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<FieldId> {
        FieldId::ALL.into_iter().find(|&id| self[id].iter().any(|v| !v.is_finite()))
    }
}

impl Index<FieldId> for Fields {
    type Output = [f64];
    fn index(&self, id: FieldId) -> &[f64] {
        &self.data[id.index()]
    }
}

impl IndexMut<FieldId> for Fields {
    fn index_mut(&mut self, id: FieldId) -> &mut [f64] {
        &mut self.data[id.index()]
    }
}

/// Coefficients of the transformed system, frozen over one step.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCoeffs {
    pub rdot: f64,
    /// `L - R`.
    pub width: f64,
    pub k_center: Vec<f64>,
    pub k_face: Vec<f64>,
    pub m_center: Vec<f64>,
    pub m_face: Vec<f64>,
    /// `D_u / (L - R)^2`, zero for the matrix.
    pub diffusivity: FieldValues,
    /// `chi_u / (L - R)^2` for the chemotactic fields `m`, `f`, `n`; zero otherwise.
    pub sensitivity: FieldValues,
    pub k_sg: f64,
}

fn transform_k(rdot: f64, width: f64, xi: f64, r: f64) -> f64 {
    rdot / width * ((1.0 - xi) * width / r - 1.0)
}

pub fn transform_coeffs(grid: &Grid, velocity: &VelocityProfile, params: &Parameters) -> TransformCoeffs {
    let width = grid.width();
    let rdot = velocity.rdot;
    let w2 = width * width;
    let k_face = grid
        .xi_face()
        .iter()
        .zip(grid.r_face())
        .map(|(&xi, &r)| transform_k(rdot, width, xi, r))
        .collect();
    let k_center = grid
        .xi_center()
        .iter()
        .zip(grid.r_center())
        .map(|(&xi, &r)| transform_k(rdot, width, xi, r))
        .collect();
    let m_face = grid
        .xi_face()
        .iter()
        .zip(&velocity.v_face)
        .map(|(&xi, &v)| (rdot * (xi - 1.0) + v) / width)
        .collect();
    let m_center = grid
        .xi_center()
        .iter()
        .zip(&velocity.v_center)
        .map(|(&xi, &v)| (rdot * (xi - 1.0) + v) / width)
        .collect();
    let mut sensitivity = FieldValues::default();
    sensitivity[FieldId::M] = params.chi_m / w2;
    sensitivity[FieldId::F] = params.chi_f / w2;
    sensitivity[FieldId::N] = params.chi_n / w2;
    TransformCoeffs {
        rdot,
        width,
        k_center,
        k_face,
        m_center,
        m_face,
        diffusivity: FieldValues::from_fn(|id| params.diffusivity(id) / w2),
        sensitivity,
        k_sg: params.k_sg / w2,
    }
}

/// Affine total outward flux through `r = L`, in physical units:
/// `J = alpha (u_last - target) + explicit`, where `u_last` is the value in
/// the outermost cell. `alpha` multiplies the implicit unknown; `explicit`
/// carries the lagged chemotactic contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterClosure {
    pub alpha: f64,
    pub target: f64,
    pub explicit: f64,
    /// Physical taxis flux through the boundary used to build `explicit`.
    pub taxis: f64,
    pub diffusivity: f64,
    /// Physical half-cell width `dxi (L - R) / 2`.
    pub half_width: f64,
    pub gamma: f64,
    pub l: f64,
}

impl OuterClosure {
    /// No flux at all (matrix, or any field at `gamma = 1` without taxis).
    pub fn closed() -> Self {
        OuterClosure {
            alpha: 0.0,
            target: 0.0,
            explicit: 0.0,
            taxis: 0.0,
            diffusivity: 0.0,
            half_width: 0.0,
            gamma: 1.0,
            l: 1.0,
        }
    }

    /// Physical outward flux for a given outermost-cell value.
    pub fn flux(&self, u_last: f64) -> f64 {
        self.alpha * (u_last - self.target) + self.explicit
    }

    /// `du/dr` at `r = L` implied by the ghost-cell elimination.
    pub fn gradient(&self, u_last: f64) -> f64 {
        if self.diffusivity == 0.0 {
            return 0.0;
        }
        (self.taxis - self.flux(u_last)) / self.diffusivity
    }

    /// Boundary value `u(L) = u_last + h du/dr`.
    pub fn boundary_value(&self, u_last: f64) -> f64 {
        u_last + self.half_width * self.gradient(u_last)
    }

    /// Residual of `(1 - gamma)(u - u*) - (gamma L / D) J = 0`.
    pub fn residual(&self, u_last: f64) -> f64 {
        if self.diffusivity == 0.0 {
            return 0.0;
        }
        (1.0 - self.gamma) * (self.boundary_value(u_last) - self.target)
            - self.gamma * self.l / self.diffusivity * self.flux(u_last)
    }
}

/// Robin closure `(1 - gamma)(u - u*) - (gamma L / D) J = 0` at `r = L`, with
/// `J = -D u_r + T` the total (diffusive plus chemotactic) outward flux and
/// the boundary value `u(L) = u_last + h u_r` from a ghost cell.
///
/// `gamma = 0` pins `u(L) = u*`; `gamma = 1` makes the total flux vanish.
pub fn boundary_closure_outer(
    field: FieldId,
    gamma: f64,
    grid: &Grid,
    params: &Parameters,
    taxis_flux: f64,
) -> OuterClosure {
    let d = params.diffusivity(field);
    if !field.diffuses() {
        return OuterClosure::closed();
    }
    let h = 0.5 * grid.dxi() * grid.width();
    let l = grid.outer_radius();
    let denom = (1.0 - gamma) * h + gamma * l;
    OuterClosure {
        alpha: (1.0 - gamma) * d / denom,
        target: field.healthy_value(),
        explicit: (1.0 - gamma) * h * taxis_flux / denom,
        taxis: taxis_flux,
        diffusivity: d,
        half_width: h,
        gamma,
        l,
    }
}

/// Physical gradient `-k_pb R / (D_p R0)` of PDGF at the wound edge.
pub fn wound_pdgf_gradient(grid: &Grid, params: &Parameters) -> f64 {
    -params.k_pb * grid.inner_radius() / (params.d_p * params.r0)
}

/// Total outward physical flux through the wound edge `r = R`.
///
/// Oxygen, VEGF, tips and sprouts have zero gradient there, which with the
/// attractant gradients also vanishing leaves no flux at all. Macrophages and
/// fibroblasts have zero total flux. PDGF is secreted into the tissue at the
/// rate set by the platelet condition.
pub fn boundary_closure_wound(field: FieldId, grid: &Grid, params: &Parameters) -> f64 {
    match field {
        FieldId::P => -params.d_p * wound_pdgf_gradient(grid, params),
        _ => 0.0,
    }
}

/// Boundary data for all fields at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Closures {
    /// Physical outward flux at `r = R` per field.
    pub inner: FieldValues,
    pub outer: [OuterClosure; 8],
}

impl Closures {
    pub fn outer(&self, id: FieldId) -> &OuterClosure {
        &self.outer[id.index()]
    }
}

#[inline]
fn saturation(u: f64, cap: f64) -> f64 {
    heaviside_smooth(1.0 - u / cap)
}

/// Assemble both closures from the current outermost-cell values.
///
/// Attractant gradients at `r = L` come from the attractant's own closure,
/// so they are resolved in dependency order: PDGF and VEGF, then tips, then
/// sprouts.
pub fn closures(fields: &Fields, grid: &Grid, params: &Parameters) -> Closures {
    let last = fields.cells() - 1;
    let u = fields.at(last);
    let gamma = params.gamma;
    let k_sg = params.k_sg;
    let mut outer = [OuterClosure::closed(); 8];
    let close = |id: FieldId, taxis: f64| boundary_closure_outer(id, gamma, grid, params, taxis);

    for id in [FieldId::W, FieldId::P, FieldId::E] {
        outer[id.index()] = close(id, 0.0);
    }
    let p_grad = outer[FieldId::P.index()].gradient(u[FieldId::P]);
    let e_grad = outer[FieldId::E.index()].gradient(u[FieldId::E]);
    let rho = u[FieldId::Rho];

    let t_m = params.chi_m * rho * u[FieldId::M] * saturation(u[FieldId::M], params.m_m)
        * bounded_taxis(p_grad, k_sg);
    outer[FieldId::M.index()] = close(FieldId::M, t_m);
    let t_f = params.chi_f * rho * u[FieldId::F] * saturation(u[FieldId::F], params.f_m)
        * bounded_taxis(p_grad, k_sg);
    outer[FieldId::F.index()] = close(FieldId::F, t_f);

    let tip_density = rho * u[FieldId::N] * saturation(u[FieldId::N], params.n_m);
    let t_n = params.chi_n * tip_density * bounded_taxis(e_grad, k_sg);
    outer[FieldId::N.index()] = close(FieldId::N, t_n);
    let n_grad = outer[FieldId::N.index()].gradient(u[FieldId::N]);

    let b = u[FieldId::B];
    let t_b = -params.drag * params.d_n * b * bounded_taxis(n_grad, k_sg)
        + params.drag * params.chi_n * b * tip_density * bounded_taxis(e_grad, k_sg);
    outer[FieldId::B.index()] = close(FieldId::B, t_b);

    Closures {
        inner: FieldValues::from_fn(|id| boundary_closure_wound(id, grid, params)),
        outer,
    }
}

/// Explicit conservative diffusion rate with boundary fluxes from the closures.
pub fn diffusion_operator(
    u: &[f64],
    field: FieldId,
    coeffs: &TransformCoeffs,
    grid: &Grid,
    closures: &Closures,
) -> Result<Vec<f64>> {
    if !field.diffuses() {
        return Err(Error::NonDiffusingField(field));
    }
    let n = grid.cells();
    let d = coeffs.diffusivity[field];
    let inv_dxi = n as f64;
    let mut flux = vec![0.0; n + 1];
    flux[0] = closures.inner[field] / coeffs.width;
    for j in 1..n {
        flux[j] = -d * (u[j] - u[j - 1]) * inv_dxi;
    }
    flux[n] = closures.outer(field).flux(u[n - 1]) / coeffs.width;
    let mut out = vec![0.0; n];
    grid.add_divergence(&flux, &mut out);
    Ok(out)
}

/// Backward-Euler diffusion solve `(I - dt L) u_new = rhs`, `L` being the
/// operator of [`diffusion_operator`] with the outer closure treated
/// implicitly in the outermost cell.
pub fn solve_implicit_diffusion(
    rhs: &[f64],
    field: FieldId,
    coeffs: &TransformCoeffs,
    grid: &Grid,
    closures: &Closures,
    dt: f64,
) -> Result<Vec<f64>> {
    if !field.diffuses() {
        return Err(Error::NonDiffusingField(field));
    }
    let n = grid.cells();
    let d = coeffs.diffusivity[field];
    let inv_dxi = n as f64;
    let rf = grid.r_face();
    let rc = grid.r_center();

    let mut lower = vec![0.0; n];
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut b = rhs.to_vec();

    for i in 0..n {
        let scale = dt * inv_dxi / rc[i];
        if i > 0 {
            let c = scale * rf[i] * d * inv_dxi;
            lower[i] = -c;
            diag[i] += c;
        }
        if i + 1 < n {
            let c = scale * rf[i + 1] * d * inv_dxi;
            upper[i] = -c;
            diag[i] += c;
        }
    }
    b[0] += dt * inv_dxi * rf[0] * closures.inner[field] / coeffs.width / rc[0];
    let outer = closures.outer(field);
    let edge = dt * inv_dxi * rf[n] / (coeffs.width * rc[n - 1]);
    diag[n - 1] += edge * outer.alpha;
    b[n - 1] += edge * (outer.alpha * outer.target - outer.explicit);

    Ok(thomas(&lower, &diag, &upper, &b))
}

/// Tridiagonal solve; `lower[0]` and `upper[n-1]` are ignored.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = upper[0] / beta;
    x[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / beta } else { 0.0 };
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

/// Upwind transport of `u` by the xi-velocity `M`, plus the `-K u` term.
fn add_advection(u: &[f64], coeffs: &TransformCoeffs, grid: &Grid, out: &mut [f64]) {
    let n = grid.cells();
    let mut flux = vec![0.0; n + 1];
    for j in 1..n {
        let m = coeffs.m_face[j];
        flux[j] = m * face_density(u, j, m);
    }
    // M vanishes at both ends.
    flux[0] = coeffs.m_face[0] * u[0];
    flux[n] = coeffs.m_face[n] * u[n - 1];
    grid.add_divergence(&flux, out);
    for i in 0..n {
        out[i] -= coeffs.k_center[i] * u[i];
    }
}

/// Bounded chemotactic xi-velocity at interior face `j` for the attractant `a`.
#[inline]
fn taxis_velocity(a: &[f64], j: usize, sensitivity: f64, k_sg: f64, inv_dxi: f64) -> f64 {
    let slope = (a[j] - a[j - 1]) * inv_dxi;
    sensitivity * bounded_taxis(slope, k_sg)
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Transported density at interior face `j`, reconstructed from the upwind
/// side with a minmod-limited slope; first order next to the ends.
#[inline]
fn face_density(x: &[f64], j: usize, vel: f64) -> f64 {
    let n = x.len();
    if vel >= 0.0 {
        let c = x[j - 1];
        if j >= 2 {
            c + 0.5 * minmod(c - x[j - 2], x[j] - c)
        } else {
            c
        }
    } else {
        let c = x[j];
        if j + 1 < n {
            c - 0.5 * minmod(c - x[j - 1], x[j + 1] - c)
        } else {
            c
        }
    }
}

/// Interior-face chemotactic/drag fluxes in xi-form for every field.
/// End faces carry zero here; their contribution lives in the closures.
fn taxis_fluxes(fields: &Fields, coeffs: &TransformCoeffs, grid: &Grid, params: &Parameters) -> Fields {
    let n = grid.cells();
    let inv_dxi = n as f64;
    let mut flux = Fields::zeros(n + 1);
    let p = &fields[FieldId::P];
    let e = &fields[FieldId::E];
    let rho = &fields[FieldId::Rho];
    let nn = &fields[FieldId::N];
    let chi = &coeffs.sensitivity;
    let d_n = coeffs.diffusivity[FieldId::N];
    let ks = coeffs.k_sg;

    let density = |id: FieldId, cap: f64| -> Vec<f64> {
        let u = &fields[id];
        (0..n).map(|i| rho[i] * u[i] * saturation(u[i], cap)).collect()
    };
    let xm = density(FieldId::M, params.m_m);
    let xf = density(FieldId::F, params.f_m);
    let tip = density(FieldId::N, params.n_m);
    let b = &fields[FieldId::B];
    let b_tip: Vec<f64> = b.iter().zip(&tip).map(|(b, t)| b * t).collect();

    for j in 1..n {
        let vp_m = taxis_velocity(p, j, chi[FieldId::M], ks, inv_dxi);
        flux[FieldId::M][j] = vp_m * face_density(&xm, j, vp_m);

        let vp_f = taxis_velocity(p, j, chi[FieldId::F], ks, inv_dxi);
        flux[FieldId::F][j] = vp_f * face_density(&xf, j, vp_f);

        let ve = taxis_velocity(e, j, chi[FieldId::N], ks, inv_dxi);
        flux[FieldId::N][j] = ve * face_density(&tip, j, ve);

        let follow = -params.drag * taxis_velocity(nn, j, d_n, ks, inv_dxi);
        let drag = params.drag * ve;
        flux[FieldId::B][j] = follow * face_density(b, j, follow) + drag * face_density(&b_tip, j, drag);
    }
    flux
}

/// Advection, `-K u` and chemotaxis rates for all eight fields (no diffusion,
/// no reactions).
pub fn advection_taxis_operator(
    fields: &Fields,
    coeffs: &TransformCoeffs,
    grid: &Grid,
    params: &Parameters,
) -> Result<Fields> {
    if fields.first_non_finite().is_some() {
        return Err(Error::NonFiniteInput { context: "advection_taxis_operator" });
    }
    let n = grid.cells();
    let mut out = Fields::zeros(n);
    let taxis = taxis_fluxes(fields, coeffs, grid, params);
    for id in FieldId::ALL {
        add_advection(&fields[id], coeffs, grid, &mut out[id]);
        if id.diffuses() {
            grid.add_divergence(&taxis[id], &mut out[id]);
        }
    }
    Ok(out)
}

/// Matrix update rate: upwind transport, `-K rho` and the kinetic source.
pub fn rho_transport_rate(
    rho: &[f64],
    coeffs: &TransformCoeffs,
    grid: &Grid,
    kinetic_rate: &[f64],
) -> Result<Vec<f64>> {
    if rho.iter().chain(kinetic_rate).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { context: "rho_transport_rate" });
    }
    let mut out = kinetic_rate.to_vec();
    add_advection(rho, coeffs, grid, &mut out);
    Ok(out)
}

/// Largest xi-speed over interior faces: `|M|` plus the chemotactic and drag
/// speeds of the fastest field.
pub fn max_face_speed(fields: &Fields, coeffs: &TransformCoeffs, grid: &Grid, params: &Parameters) -> f64 {
    let n = grid.cells();
    let inv_dxi = n as f64;
    let p = &fields[FieldId::P];
    let e = &fields[FieldId::E];
    let rho = &fields[FieldId::Rho];
    let nn = &fields[FieldId::N];
    let chi = &coeffs.sensitivity;
    let ks = coeffs.k_sg;
    let mut best = coeffs.m_face.iter().fold(0.0_f64, |acc, m| acc.max(m.abs()));
    for j in 1..n {
        let rho_max = rho[j - 1].max(rho[j]).max(0.0);
        let vp = taxis_velocity(p, j, 1.0, ks, inv_dxi).abs() * rho_max;
        let ve = taxis_velocity(e, j, chi[FieldId::N], ks, inv_dxi).abs();
        let tip = (rho[j - 1] * nn[j - 1]).max(rho[j] * nn[j]).max(0.0);
        let follow = params.drag * taxis_velocity(nn, j, coeffs.diffusivity[FieldId::N], ks, inv_dxi).abs();
        let taxis = (vp * chi[FieldId::M].max(chi[FieldId::F]))
            .max(ve * rho_max)
            .max(follow + params.drag * ve * tip);
        best = best.max(coeffs.m_face[j].abs() + taxis);
    }
    best
}
