//! IMEX time stepping of the transformed system and run control.
//!
//! One step: mechanics on the current matrix density, frozen transform
//! coefficients, explicit matrix update, backward-Euler diffusion with
//! explicit transport, taxis and kinetics for the other seven fields, then
//! `R += dt Rdot`. A step whose result violates the a-priori bounds is
//! retried at half the step size.

use serde::Serialize;

use crate::constitutive::{
    initial_b_profile, initial_p_profile, DefaultKinetics, FieldId, FieldValues, InitialProfile,
    Kinetics, Parameters,
};
use crate::error::{Error, Result};
use crate::fixedgrid::{
    advection_taxis_operator, closures, max_face_speed, rho_transport_rate,
    solve_implicit_diffusion, transform_coeffs, Fields, Grid, TransformCoeffs,
};
use crate::mechanics::{compute_velocity, VelocityProfile};

/// Slack on the pointwise bounds checked after each step.
pub const BOUND_TOL: f64 = 1e-12;
/// Relative slack on the strain-rate bound.
pub const STRAIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WoundState {
    pub t: f64,
    pub r: f64,
    pub grid: Grid,
    pub fields: Fields,
    /// Mechanics of `fields[Rho]` on `grid`.
    pub velocity: VelocityProfile,
    /// Running `int_0^t Q ds`, accumulated with the step's own `Q`.
    pub q_integral: f64,
}

impl WoundState {
    pub fn cells(&self) -> usize {
        self.grid.cells()
    }
}

/// Extremes checked by the per-step audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Audit {
    pub min_value: f64,
    pub max_rho: f64,
    pub max_n: f64,
    /// `max |v/r|`.
    pub strain: f64,
    /// `max |v_r|`.
    pub max_vr: f64,
    pub finite: bool,
}

impl Audit {
    pub fn of(state: &WoundState) -> Audit {
        let f = &state.fields;
        Audit {
            min_value: FieldId::ALL.iter().map(|&id| f.min(id)).fold(f64::INFINITY, f64::min),
            max_rho: f.max(FieldId::Rho),
            max_n: f.max(FieldId::N),
            strain: state.velocity.max_strain_rate(&state.grid),
            max_vr: state.velocity.max_abs_vr(),
            finite: f.first_non_finite().is_none() && state.r.is_finite(),
        }
    }

    /// First violated bound, if any.
    pub fn violation(&self, params: &Parameters) -> Option<String> {
        if !self.finite {
            return Some("non-finite value".into());
        }
        if self.min_value < -BOUND_TOL {
            return Some(format!("negative value {:e}", self.min_value));
        }
        if self.max_rho > params.rho_m + BOUND_TOL {
            return Some(format!("matrix density {} above cap", self.max_rho));
        }
        if self.max_n > params.tip_bound() + BOUND_TOL {
            return Some(format!("tip density {} above bound", self.max_n));
        }
        if self.strain > params.max_pressure() * (1.0 + STRAIN_TOL) {
            return Some(format!("strain rate {} above bound", self.strain));
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub t: f64,
    pub r: f64,
    pub q: f64,
    pub rdot: f64,
    pub dt: f64,
    pub min: FieldValues,
    pub max: FieldValues,
    /// `int_R^L r u dr` per field.
    pub integral: FieldValues,
    /// Matrix density in the outermost cell.
    pub rho_outer: f64,
    /// Largest Robin residual at `r = L` over the diffusing fields.
    pub bc_residual: f64,
    pub audit: Audit,
    pub retries: u32,
}

impl StepReport {
    pub fn of(state: &WoundState, params: &Parameters, dt: f64, retries: u32) -> StepReport {
        let f = &state.fields;
        let last = state.cells() - 1;
        let cl = closures(f, &state.grid, params);
        let bc_residual = FieldId::DIFFUSING
            .iter()
            .map(|&id| cl.outer(id).residual(f[id][last]).abs())
            .fold(0.0, f64::max);
        StepReport {
            t: state.t,
            r: state.r,
            q: state.velocity.q,
            rdot: state.velocity.rdot,
            dt,
            min: FieldValues::from_fn(|id| f.min(id)),
            max: FieldValues::from_fn(|id| f.max(id)),
            integral: FieldValues::from_fn(|id| state.grid.integral(&f[id])),
            rho_outer: f[FieldId::Rho][last],
            bc_residual,
            audit: Audit::of(state),
            retries,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    Healed { t_heal: f64 },
    Stalled { r_inf: f64, t_stall: f64 },
    Undecided { t_max: f64 },
}

impl Outcome {
    pub fn is_healed(&self) -> bool {
        matches!(self, Outcome::Healed { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Healed { .. } => "healed",
            Outcome::Stalled { .. } => "stalled",
            Outcome::Undecided { .. } => "undecided",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub outcome: Outcome,
    pub series: Vec<StepReport>,
    pub final_state: WoundState,
}

/// A failed run with everything accepted before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub series: Vec<StepReport>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} accepted steps)", self.error, self.series.len().saturating_sub(1))
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Initial state on `params.cells` cells with `R = R0` and the matrix at rest.
pub fn init_state(params: &Parameters) -> Result<WoundState> {
    params.validate()?;
    let grid = Grid::new(params.cells, params.r0, params.l)?;
    let fields = Fields::from_fn(params.cells, |id, i| {
        let r = grid.r_center()[i];
        match (id, params.initial_profile) {
            (FieldId::Rho | FieldId::F | FieldId::W, _) => 1.0,
            (FieldId::B, InitialProfile::Healthy) => 1.0,
            (FieldId::B, InitialProfile::Wound) => initial_b_profile(r, params),
            (FieldId::P, InitialProfile::Wound) => initial_p_profile(r, params),
            _ => 0.0,
        }
    });
    let velocity = compute_velocity(&fields[FieldId::Rho], &grid, params)?;
    Ok(WoundState { t: 0.0, r: params.r0, grid, fields, velocity, q_integral: 0.0 })
}

/// Largest stable step for the frozen coefficients.
pub fn choose_dt(
    state: &WoundState,
    coeffs: &TransformCoeffs,
    params: &Parameters,
    kinetics: &dyn Kinetics,
) -> Result<f64> {
    let grid = &state.grid;
    let speed = max_face_speed(&state.fields, coeffs, grid, params);
    let mut rate = 0.0_f64;
    for i in 0..grid.cells() {
        let diag = kinetics.jacobian_diagonal(&state.fields.at(i), params.gamma, params)?;
        rate = rate.max(diag.max_abs() + coeffs.k_center[i].abs());
    }
    let mut dt = params.dt_max;
    if speed > 0.0 {
        dt = dt.min(params.cfl_safety * grid.dxi() / speed);
    }
    if rate > 0.0 {
        dt = dt.min(params.cfl_safety / rate);
    }
    Ok(dt)
}

/// One IMEX update with a given step size and no audit.
pub fn imex_update(
    state: &WoundState,
    coeffs: &TransformCoeffs,
    params: &Parameters,
    kinetics: &dyn Kinetics,
    dt: f64,
) -> Result<WoundState> {
    let grid = &state.grid;
    let n = grid.cells();
    let fields = &state.fields;

    let mut reactions = Fields::zeros(n);
    for i in 0..n {
        reactions.set(i, kinetics.rates(&fields.at(i), params.gamma, params)?);
    }
    let transport = advection_taxis_operator(fields, coeffs, grid, params)?;
    let closure = closures(fields, grid, params);

    let mut next = Fields::zeros(n);
    let rho_rate = rho_transport_rate(&fields[FieldId::Rho], coeffs, grid, &reactions[FieldId::Rho])?;
    for i in 0..n {
        next[FieldId::Rho][i] = fields[FieldId::Rho][i] + dt * rho_rate[i];
    }
    for id in FieldId::DIFFUSING {
        let rhs: Vec<f64> = (0..n)
            .map(|i| fields[id][i] + dt * (transport[id][i] + reactions[id][i]))
            .collect();
        let solved = solve_implicit_diffusion(&rhs, id, coeffs, grid, &closure, dt)?;
        next[id].copy_from_slice(&solved);
    }

    let r = state.r + dt * state.velocity.rdot;
    let grid = Grid::new(n, r, params.l)?;
    let velocity = compute_velocity(&next[FieldId::Rho], &grid, params)?;
    Ok(WoundState {
        t: state.t + dt,
        r,
        grid,
        fields: next,
        velocity,
        q_integral: state.q_integral + dt * state.velocity.q,
    })
}

/// Advance by at most `dt_cap` (or the stable step, whichever is smaller),
/// halving on audit failure.
pub fn step_with(
    state: &WoundState,
    params: &Parameters,
    kinetics: &dyn Kinetics,
    dt_cap: f64,
) -> Result<(WoundState, StepReport)> {
    let coeffs = transform_coeffs(&state.grid, &state.velocity, params);
    let stable = choose_dt(state, &coeffs, params, kinetics)?;
    if !(stable >= params.dt_min) {
        return Err(Error::StepFailure {
            t: state.t,
            dt: stable,
            reason: "stable step size below dt_min".into(),
        });
    }
    let mut dt = stable.min(dt_cap);
    let mut retries = 0;
    loop {
        let mut non_finite = None;
        let reason = match imex_update(state, &coeffs, params, kinetics, dt) {
            Ok(next) => match Audit::of(&next).violation(params) {
                None if next.r > 0.0 => {
                    let report = StepReport::of(&next, params, dt, retries);
                    return Ok((next, report));
                }
                None => "wound radius left the domain".to_string(),
                Some(reason) => {
                    if !next.r.is_finite() {
                        non_finite = Some("R");
                    } else {
                        non_finite = next.fields.first_non_finite().map(FieldId::id);
                    }
                    reason
                }
            },
            Err(Error::InvalidGeometry { .. }) => "wound radius left the domain".to_string(),
            Err(Error::NonFiniteInput { context }) => {
                non_finite = Some(context);
                "non-finite value".to_string()
            }
            Err(e) => return Err(e),
        };
        dt *= 0.5;
        retries += 1;
        if retries > params.max_retries || dt < params.dt_min {
            if let Some(field) = non_finite {
                return Err(Error::NonFiniteState { t: state.t, field });
            }
            return Err(Error::StepFailure { t: state.t, dt, reason });
        }
    }
}

/// One accepted step with the default kinetics.
pub fn step(state: &WoundState, params: &Parameters) -> Result<(WoundState, StepReport)> {
    step_with(state, params, &DefaultKinetics, f64::INFINITY)
}

/// Step until `t_end` is hit exactly.
pub fn advance_to(
    state: WoundState,
    t_end: f64,
    params: &Parameters,
    kinetics: &dyn Kinetics,
) -> Result<(WoundState, Vec<StepReport>)> {
    let mut state = state;
    let mut reports = Vec::new();
    while state.t < t_end {
        let remaining = t_end - state.t;
        let (mut next, mut report) = step_with(&state, params, kinetics, remaining)?;
        if report.dt >= remaining {
            next.t = t_end;
            report.t = t_end;
        }
        state = next;
        reports.push(report);
    }
    Ok((state, reports))
}

/// Tracks the terminal conditions across accepted steps.
#[derive(Debug, Clone)]
struct Terminal {
    heal_radius: f64,
    stall_speed: f64,
    q_tol: f64,
    window: f64,
    quiet_since: Option<f64>,
}

impl Terminal {
    fn new(params: &Parameters) -> Self {
        Terminal {
            heal_radius: params.closure_fraction * params.r0,
            stall_speed: params.stall_tol * params.r0,
            q_tol: params.q_tol,
            window: params.stall_window,
            quiet_since: None,
        }
    }

    fn observe(&mut self, report: &StepReport) -> Option<Outcome> {
        if report.r <= self.heal_radius {
            return Some(Outcome::Healed { t_heal: report.t });
        }
        if report.rdot.abs() < self.stall_speed && report.q < self.q_tol {
            let since = *self.quiet_since.get_or_insert(report.t);
            if report.t - since >= self.window {
                return Some(Outcome::Stalled { r_inf: report.r, t_stall: report.t });
            }
        } else {
            self.quiet_since = None;
        }
        None
    }
}

/// Run from the initial data until healed, stalled, or `horizon`.
pub fn run(params: &Parameters, horizon: f64) -> std::result::Result<RunResult, RunFailure> {
    run_with(params, horizon, &DefaultKinetics)
}

pub fn run_with(
    params: &Parameters,
    horizon: f64,
    kinetics: &dyn Kinetics,
) -> std::result::Result<RunResult, RunFailure> {
    let params = params.effective();
    let fail = |error, series| RunFailure { error, series };
    let mut state = init_state(&params).map_err(|e| fail(e, Vec::new()))?;
    let first = StepReport::of(&state, &params, 0.0, 0);
    let mut terminal = Terminal::new(&params);
    let mut outcome = terminal.observe(&first);
    let mut series = vec![first];

    while outcome.is_none() {
        if state.t >= horizon {
            outcome = Some(Outcome::Undecided { t_max: horizon });
            break;
        }
        let remaining = horizon - state.t;
        let (mut next, mut report) = match step_with(&state, &params, kinetics, remaining) {
            Ok(x) => x,
            Err(e) => return Err(fail(e, series)),
        };
        if report.dt >= remaining {
            next.t = horizon;
            report.t = horizon;
        }
        outcome = terminal.observe(&report);
        series.push(report);
        state = next;
    }
    Ok(RunResult { outcome: outcome.expect("loop exits with an outcome"), series, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn healthy() -> Parameters {
        Parameters {
            initial_profile: InitialProfile::Healthy,
            enforce_homeostasis: true,
            k_pb: 0.0,
            cells: 40,
            ..Parameters::default()
        }
        .effective()
    }

    #[test]
    fn initial_state_values() {
        let p = Parameters::default();
        let s = init_state(&p).unwrap();
        assert!(s.fields[FieldId::Rho].iter().all(|&x| x == 1.0));
        assert_eq!(s.velocity.q, 0.0);
        assert_eq!(s.velocity.rdot, 0.0);
        for i in 0..p.cells {
            if s.grid.r_center()[i] >= p.r0 + p.eps0 {
                assert_eq!(s.fields[FieldId::B][i], 1.0);
                assert_eq!(s.fields[FieldId::P][i], 0.0);
            }
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let p = Parameters::default();
        let s = init_state(&p).unwrap();
        let c = transform_coeffs(&s.grid, &s.velocity, &p);
        let next = imex_update(&s, &c, &p, &DefaultKinetics, 0.0).unwrap();
        assert_eq!(next.fields, s.fields);
        assert_eq!(next.r, s.r);
        assert_eq!(next.t, s.t);
    }

    #[test]
    fn homeostasis_is_preserved() {
        let p = healthy();
        let mut s = init_state(&p).unwrap();
        let start = s.fields.clone();
        for _ in 0..100 {
            s = step(&s, &p).unwrap().0;
        }
        assert_eq!(s.r, p.r0);
        for id in FieldId::ALL {
            for i in 0..p.cells {
                assert!((s.fields[id][i] - start[id][i]).abs() < 1e-4, "{id}");
            }
        }
    }

    #[test]
    fn dt_falls_back_to_cap_when_idle() {
        let p = Parameters {
            k_w: 0.0,
            lambda_wm: 0.0,
            lambda_wf: 0.0,
            ..healthy()
        };
        let s = init_state(&p).unwrap();
        let c = transform_coeffs(&s.grid, &s.velocity, &p);
        let dt = choose_dt(&s, &c, &p, &NoKinetics).unwrap();
        assert_eq!(dt, p.dt_max);
    }

    struct NoKinetics;
    impl Kinetics for NoKinetics {
        fn rates(&self, _: &FieldValues, _: f64, _: &Parameters) -> Result<FieldValues> {
            Ok(FieldValues::default())
        }
        fn provenance(&self, _: FieldId) -> crate::constitutive::Provenance {
            crate::constitutive::Provenance::Attested
        }
    }

    #[test]
    fn advective_dt_scales_with_cells() {
        let base = Parameters { cfl_safety: 0.25, dt_max: 1.0, ..Parameters::default() };
        let dt_for = |cells: usize| {
            let p = Parameters { cells, ..base.clone() };
            let mut s = init_state(&p).unwrap();
            for v in s.fields[FieldId::Rho].iter_mut() {
                *v = 1.5;
            }
            s.fields[FieldId::P].iter_mut().for_each(|x| *x = 0.0);
            s.velocity = compute_velocity(&s.fields[FieldId::Rho], &s.grid, &p).unwrap();
            let c = transform_coeffs(&s.grid, &s.velocity, &p);
            let speed = max_face_speed(&s.fields, &c, &s.grid, &p);
            let dt = choose_dt(&s, &c, &p, &NoKinetics).unwrap();
            assert!(dt <= p.cfl_safety / (cells as f64 * speed) * (1.0 + 1e-12));
            dt
        };
        let (a, b) = (dt_for(50), dt_for(100));
        assert!((a / b - 2.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn closure_fraction_one_heals_immediately() {
        let p = Parameters { closure_fraction: 1.0, cells: 16, ..Parameters::default() };
        let out = run(&p, 1.0).unwrap();
        assert_eq!(out.outcome, Outcome::Healed { t_heal: 0.0 });
        assert_eq!(out.series.len(), 1);
    }

    #[test]
    fn first_step_closes_wound() {
        let p = Parameters { cells: 50, ..Parameters::default() };
        let s = init_state(&p).unwrap();
        let (s, _) = step(&s, &p).unwrap();
        let (s, r) = step(&s, &p).unwrap();
        assert!(r.q > 0.0);
        assert!(s.r < p.r0);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = Parameters { cells: 24, ..Parameters::default() };
        let a = run(&p, 0.3).unwrap();
        let b = run(&p, 0.3).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.outcome, Outcome::Undecided { t_max: 0.3 });
        assert_eq!(a.series.last().unwrap().t, 0.3);
    }

    #[test]
    fn advance_hits_target() {
        let p = Parameters { cells: 24, ..Parameters::default() };
        let s = init_state(&p).unwrap();
        let (s, reports) = advance_to(s, 0.05, &p, &DefaultKinetics).unwrap();
        assert_eq!(s.t, 0.05);
        assert!(reports.windows(2).all(|w| w[1].r <= w[0].r + 1e-12));
    }
}
