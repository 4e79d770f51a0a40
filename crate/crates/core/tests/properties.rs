use ischemic_fbp::constitutive::{FieldId, Parameters};
use ischemic_fbp::fixedgrid::{
    advection_taxis_operator, closures, diffusion_operator, transform_coeffs, Fields, Grid,
};
use ischemic_fbp::integrator::{init_state, step};
use ischemic_fbp::mechanics::compute_velocity;
use proptest::prelude::*;

fn field_strategy(cells: usize) -> impl Strategy<Value = Fields> {
    let ranges = [(0.0, 2.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0), (0.0, 1.5), (0.0, 0.05), (0.0, 1.0), (0.9, 1.3)];
    let per_field: Vec<_> = ranges
        .iter()
        .map(|&(lo, hi)| prop::collection::vec(lo..hi, cells))
        .collect();
    per_field.prop_map(move |cols| Fields::from_fn(cells, |id, i| cols[id.index()][i]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_domain_conserves_content(fields in field_strategy(24), r in 0.5f64..4.5) {
        let params = Parameters { gamma: 1.0, k_pb: 0.0, ..Parameters::default() };
        let grid = Grid::new(24, r, params.l).unwrap();
        let velocity = compute_velocity(&fields[FieldId::Rho], &grid, &params).unwrap();
        let coeffs = transform_coeffs(&grid, &velocity, &params);
        let close = closures(&fields, &grid, &params);
        let transport = advection_taxis_operator(&fields, &coeffs, &grid, &params).unwrap();
        for id in FieldId::DIFFUSING {
            let u = &fields[id];
            let diffusion = diffusion_operator(u, id, &coeffs, &grid, &close).unwrap();
            let (mut total, mut scale) = (0.0, 0.0);
            for i in 0..24 {
                let term = transport[id][i] + coeffs.k_center[i] * u[i] + diffusion[i];
                total += grid.r_center()[i] * term;
                scale += grid.r_center()[i] * (transport[id][i].abs() + diffusion[i].abs());
            }
            prop_assert!(total.abs() <= 1e-11 * (1.0 + scale), "{id}: {total:e} vs {scale:e}");
        }
    }

    #[test]
    fn ends_move_with_the_mesh(rho in prop::collection::vec(0.8f64..2.0, 32), r in 0.5f64..4.5) {
        let params = Parameters::default();
        let grid = Grid::new(32, r, params.l).unwrap();
        let velocity = compute_velocity(&rho, &grid, &params).unwrap();
        let coeffs = transform_coeffs(&grid, &velocity, &params);
        prop_assert!(coeffs.m_face[0].abs() <= 1e-12 * (1.0 + velocity.rdot.abs()));
        prop_assert!(coeffs.m_face[32].abs() <= 1e-12);
    }

    #[test]
    fn one_step_keeps_fields_nonnegative(fields in field_strategy(30), gamma in 0.0f64..=1.0) {
        let params = Parameters { gamma, cells: 30, ..Parameters::default() };
        let mut state = init_state(&params).unwrap();
        state.velocity = compute_velocity(&fields[FieldId::Rho], &state.grid, &params).unwrap();
        state.fields = fields;
        let (next, report) = step(&state, &params).unwrap();
        prop_assert!(next.r <= state.r + 1e-12);
        for id in FieldId::ALL {
            prop_assert!(next.fields.min(id) >= -1e-12, "{id} min {}", next.fields.min(id));
        }
        prop_assert!(report.audit.max_rho <= params.rho_m + 1e-12);
    }
}

/// Worst interior mismatch between the xi-form transport rate and the
/// moving-frame physical rate `-(r u v)_r / r + (1 - xi) Rdot u_r`.
fn transform_error(cells: usize, r_in: f64, amp: f64) -> f64 {
    let params = Parameters::default();
    let grid = Grid::new(cells, r_in, params.l).unwrap();
    let profile = |r: f64| 1.0 + 0.5 * (-(r - r_in)).exp();
    let slope = |r: f64| -0.5 * (-(r - r_in)).exp();
    let rho: Vec<f64> = grid.r_center().iter().map(|&r| 1.0 + amp * (1.0 - (r - r_in) / (params.l - r_in))).collect();
    let velocity = compute_velocity(&rho, &grid, &params).unwrap();
    let coeffs = transform_coeffs(&grid, &velocity, &params);
    let mut fields = Fields::zeros(cells);
    for i in 0..cells {
        fields[FieldId::W][i] = profile(grid.r_center()[i]);
    }
    let rate = advection_taxis_operator(&fields, &coeffs, &grid, &params).unwrap();
    (3..cells - 3)
        .map(|i| {
            let r = grid.r_center()[i];
            let xi = grid.xi_center()[i];
            let (u, ur) = (profile(r), slope(r));
            let (v, vr) = (velocity.v_center[i], velocity.vr_center[i]);
            let physical = -(u * v / r + ur * v + u * vr) + (1.0 - xi) * velocity.rdot * ur;
            (rate[FieldId::W][i] - physical).abs()
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn transform_is_consistent(r_in in 0.5f64..4.0, amp in 0.05f64..0.9) {
        let coarse = transform_error(100, r_in, amp);
        let fine = transform_error(200, r_in, amp);
        prop_assert!(fine < 0.02 * (1.0 + amp));
        prop_assert!((coarse / fine).log2() >= 1.0, "errors {coarse:e} {fine:e}");
    }
}
