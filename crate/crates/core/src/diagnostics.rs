//! Integral functionals, post-hoc checks over run series, and an explicit
//! fine-grid reference solver for cross-checking the main path.

use serde::Serialize;

use crate::constitutive::{DefaultKinetics, FieldId, FieldValues, Kinetics, Parameters, Verdict};
use crate::error::{Error, Result};
use crate::fixedgrid::{
    advection_taxis_operator, closures, diffusion_operator, rho_transport_rate, transform_coeffs,
    Fields, Grid,
};
use crate::integrator::{advance_to, init_state, StepReport, WoundState};
use crate::mechanics::compute_velocity;

/// Relative slack for the long-time and decay checks.
pub const CHECK_TOL: f64 = 0.05;

/// `int_R^L r u dr` by the midpoint rule in `xi`.
pub fn integral_i(u: &[f64], grid: &Grid) -> f64 {
    grid.integral(u)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralSeries {
    pub times: Vec<f64>,
    pub integrals: Vec<FieldValues>,
    pub q: Vec<f64>,
}

impl IntegralSeries {
    pub fn from_reports(reports: &[StepReport]) -> Self {
        IntegralSeries {
            times: reports.iter().map(|r| r.t).collect(),
            integrals: reports.iter().map(|r| r.integral).collect(),
            q: reports.iter().map(|r| r.q).collect(),
        }
    }

    pub fn field(&self, id: FieldId) -> Vec<f64> {
        self.integrals.iter().map(|v| v[id]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck {
    pub verdict: Verdict,
    /// `max_t I_w(t) / (I_w(0) exp(-lambda_wm t))`.
    pub worst_ratio: f64,
}

/// Oxygen content bound `I_w(t) <= I_w(0) exp(-lambda_wm t)` for a fully
/// ischemic run, checked up to `t_end`.
pub fn check_decay_gamma1(series: &IntegralSeries, lambda_wm: f64, t_end: f64) -> DecayCheck {
    let w = series.field(FieldId::W);
    let initial = w.first().copied().unwrap_or(0.0);
    if initial <= 0.0 {
        return DecayCheck { verdict: Verdict::Pass, worst_ratio: 0.0 };
    }
    let t0 = series.times[0];
    let worst_ratio = series
        .times
        .iter()
        .zip(&w)
        .filter(|(&t, _)| t <= t_end)
        .map(|(&t, &iw)| iw / (initial * (-lambda_wm * (t - t0)).exp()))
        .fold(0.0, f64::max);
    let verdict = if worst_ratio <= 1.0 + CHECK_TOL { Verdict::Pass } else { Verdict::Warn };
    DecayCheck { verdict, worst_ratio }
}

/// One bound evaluated over the final quartile of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowCheck {
    pub observed: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

impl WindowCheck {
    fn new(observed: f64, bound: f64) -> Self {
        let verdict = if observed <= bound { Verdict::Pass } else { Verdict::Warn };
        WindowCheck { observed, bound, verdict }
    }
}

/// Long-time bounds for a non-healing run, evaluated on the last quarter of
/// the simulated interval as a stand-in for the `t -> infinity` limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticsCheck {
    pub window_start: f64,
    pub f: WindowCheck,
    pub w: WindowCheck,
    pub rho: WindowCheck,
    /// Final `Q` against `q_tol`, or the window's last `Q` against its first.
    pub q: WindowCheck,
}

impl AsymptoticsCheck {
    pub fn all_pass(&self) -> bool {
        [self.f, self.w, self.rho, self.q].iter().all(|c| c.verdict == Verdict::Pass)
    }
}

pub fn check_asymptotics_nonhealing(series: &[StepReport], params: &Parameters) -> AsymptoticsCheck {
    let t0 = series.first().map_or(0.0, |r| r.t);
    let t1 = series.last().map_or(0.0, |r| r.t);
    let window_start = t0 + 0.75 * (t1 - t0);
    let window: Vec<&StepReport> = series.iter().filter(|r| r.t >= window_start).collect();
    let peak = |id: FieldId| window.iter().map(|r| r.max[id]).fold(f64::NEG_INFINITY, f64::max);
    let slack = 1.0 + CHECK_TOL;
    let w_cap = 1.0_f64.max((1.0 - params.gamma) * params.w_b);
    let q_first = window.first().map_or(0.0, |r| r.q);
    let q_last = window.last().map_or(0.0, |r| r.q);
    let q = if q_last <= params.q_tol {
        WindowCheck::new(q_last, params.q_tol)
    } else {
        WindowCheck::new(q_last, q_first)
    };
    AsymptoticsCheck {
        window_start,
        f: WindowCheck::new(peak(FieldId::F), params.f_m * slack),
        w: WindowCheck::new(peak(FieldId::W), w_cap * slack),
        rho: WindowCheck::new(peak(FieldId::Rho), slack),
        q,
    }
}

/// Radius and fields at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub r: f64,
    pub fields: Fields,
}

impl From<&WoundState> for Snapshot {
    fn from(s: &WoundState) -> Self {
        Snapshot { t: s.t, r: s.r, fields: s.fields.clone() }
    }
}

/// Main-path snapshots at the requested increasing times.
pub fn main_snapshots(params: &Parameters, times: &[f64]) -> Result<Vec<Snapshot>> {
    let params = params.effective();
    let kinetics = DefaultKinetics;
    let mut state = init_state(&params)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        state = advance_to(state, t, &params, &kinetics)?.0;
        out.push(Snapshot::from(&state));
    }
    Ok(out)
}

/// Fixed step used by [`oracle_solve`]: a quarter of the explicit stability
/// limit, with advective and chemotactic speeds taken from their a-priori
/// bounds so the step stays admissible for the whole run.
pub fn oracle_dt(params: &Parameters, cells: usize) -> Result<f64> {
    let params = params.effective();
    let width = params.l - params.r0;
    let dxi = 1.0 / cells as f64;
    let pmax = params.max_pressure();
    // |v| <= pmax r and |Rdot| <= pmax R.
    let advective = 2.0 * pmax * params.l / width;
    let taxis_cap = 1.0 / params.k_sg.sqrt();
    let chemo = params.chi_m.max(params.chi_f) * params.rho_m * params.m_m.max(params.f_m)
        + params.chi_n * params.rho_m * params.n_m
        + params.drag * (params.d_n + params.chi_n * params.rho_m * params.n_m);
    let speed = advective + chemo * taxis_cap / width;
    let d_max = FieldId::DIFFUSING.iter().map(|&id| params.diffusivity(id)).fold(0.0, f64::max);
    let diffusive = dxi * dxi * width * width / (2.0 * d_max);

    let state = init_state(&Parameters { cells, ..params.clone() })?;
    let mut rate = 0.0_f64;
    for i in 0..cells {
        let diag = DefaultKinetics.jacobian_diagonal(&state.fields.at(i), params.gamma, &params)?;
        rate = rate.max(diag.max_abs());
    }
    // Reaction rates can grow as fields develop; leave a factor of four.
    let reactive = 1.0 / (4.0 * rate.max(pmax));
    Ok(0.25 * (dxi / speed).min(diffusive).min(reactive))
}

/// Forward-Euler reference on `cells` cells with a fixed step `dt`,
/// returning snapshots at the requested increasing times.
pub fn oracle_solve(params: &Parameters, cells: usize, dt: f64, times: &[f64]) -> Result<Vec<Snapshot>> {
    let params = Parameters { cells, ..params.effective() };
    let kinetics = DefaultKinetics;
    let initial = init_state(&params)?;
    let (mut t, mut r, mut fields) = (0.0, initial.r, initial.fields);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target - 1e-12 * target.max(1.0) {
            let h = dt.min(target - t);
            let grid = Grid::new(cells, r, params.l)?;
            let velocity = compute_velocity(&fields[FieldId::Rho], &grid, &params)?;
            let coeffs = transform_coeffs(&grid, &velocity, &params);
            let bc = closures(&fields, &grid, &params);
            let mut reactions = Fields::zeros(cells);
            for i in 0..cells {
                reactions.set(i, kinetics.rates(&fields.at(i), params.gamma, &params)?);
            }
            let transport = advection_taxis_operator(&fields, &coeffs, &grid, &params)?;
            let rho_rate = rho_transport_rate(&fields[FieldId::Rho], &coeffs, &grid, &reactions[FieldId::Rho])?;
            let mut next = fields.clone();
            for i in 0..cells {
                next[FieldId::Rho][i] += h * rho_rate[i];
            }
            for id in FieldId::DIFFUSING {
                let diffusion = diffusion_operator(&fields[id], id, &coeffs, &grid, &bc)?;
                for i in 0..cells {
                    next[id][i] += h * (transport[id][i] + reactions[id][i] + diffusion[i]);
                }
            }
            if let Some(id) = next.first_non_finite() {
                return Err(Error::NonFiniteState { t, field: id.id() });
            }
            fields = next;
            r += h * velocity.rdot;
            t += h;
        }
        out.push(Snapshot { t: target, r, fields: fields.clone() });
    }
    Ok(out)
}

/// Sup-norm relative discrepancies between two snapshot series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub r: f64,
    /// Zero for fields that were not selected.
    pub fields: FieldValues,
}

/// Project `fine` onto `coarse` cells: block averages when the cell counts
/// nest, linear interpolation between cell centers otherwise.
pub fn restrict(fine: &[f64], coarse_cells: usize) -> Vec<f64> {
    let nf = fine.len();
    if nf == coarse_cells {
        return fine.to_vec();
    }
    if nf % coarse_cells == 0 {
        let k = nf / coarse_cells;
        return fine.chunks(k).map(|c| c.iter().sum::<f64>() / k as f64).collect();
    }
    (0..coarse_cells)
        .map(|i| {
            let xi = (i as f64 + 0.5) / coarse_cells as f64;
            let pos = (xi * nf as f64 - 0.5).clamp(0.0, (nf - 1) as f64);
            let j = (pos.floor() as usize).min(nf.saturating_sub(2));
            let frac = pos - j as f64;
            if nf == 1 {
                fine[0]
            } else {
                fine[j] * (1.0 - frac) + fine[j + 1] * frac
            }
        })
        .collect()
}

fn lerp(a: f64, b: f64, s: f64) -> f64 {
    a + (b - a) * s
}

/// Interpolate series `b` linearly in time onto the times of `a`, restrict
/// to `a`'s grid, and report `max |a - b| / max |a|` for each selected field
/// and `max |R_a - R_b| / R_a` for the radius. Times of `a` outside the
/// span of `b` are skipped.
pub fn compare_runs(a: &[Snapshot], b: &[Snapshot], selection: &[FieldId]) -> Discrepancy {
    let mut diff = FieldValues::default();
    let mut scale = FieldValues::default();
    let mut r_err = 0.0_f64;
    for sa in a {
        let Some(k) = b.iter().position(|sb| sb.t >= sa.t) else { continue };
        if k == 0 && b[0].t > sa.t {
            continue;
        }
        let (lo, hi) = if k == 0 { (&b[0], &b[0]) } else { (&b[k - 1], &b[k]) };
        let s = if hi.t > lo.t { (sa.t - lo.t) / (hi.t - lo.t) } else { 1.0 };
        let r_b = lerp(lo.r, hi.r, s);
        r_err = r_err.max((sa.r - r_b).abs() / sa.r.abs());
        let cells = sa.fields.cells();
        for &id in selection {
            let u_lo = restrict(&lo.fields[id], cells);
            let u_hi = restrict(&hi.fields[id], cells);
            for i in 0..cells {
                let ub = lerp(u_lo[i], u_hi[i], s);
                let ua = sa.fields[id][i];
                diff[id] = diff[id].max((ua - ub).abs());
                scale[id] = scale[id].max(ua.abs());
            }
        }
    }
    let fields = FieldValues::from_fn(|id| {
        if diff[id] == 0.0 {
            0.0
        } else if scale[id] > 0.0 {
            diff[id] / scale[id]
        } else {
            f64::INFINITY
        }
    });
    Discrepancy { r: r_err, fields }
}

/// Observed convergence order from three values on grids refined by two.
pub fn observed_order(coarse: f64, mid: f64, fine: f64) -> f64 {
    ((coarse - mid).abs() / (mid - fine).abs()).log2()
}
