//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use ischemic_fbp::constitutive::{
    validate_homeostasis, FieldId, InitialProfile, Parameters, Verdict,
};
use ischemic_fbp::diagnostics::{
    check_asymptotics_nonhealing, check_decay_gamma1, compare_runs, main_snapshots, observed_order,
    oracle_dt, oracle_solve, IntegralSeries,
};
use ischemic_fbp::fixedgrid::Grid;
use ischemic_fbp::integrator::{run, Outcome, RunResult, StepReport};
use ischemic_fbp::mechanics::compute_velocity;
use rayon::prelude::*;

struct Timed {
    gamma: f64,
    result: RunResult,
    elapsed: Duration,
}

struct Line {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn default_run(gamma: f64, horizon: f64) -> Timed {
    let params = Parameters { gamma, ..Parameters::default() };
    let start = Instant::now();
    let result = run(&params, horizon).unwrap_or_else(|f| panic!("gamma {gamma}: {f}"));
    Timed { gamma, result, elapsed: start.elapsed() }
}

fn find(runs: &[Timed], gamma: f64) -> &Timed {
    runs.iter().find(|r| r.gamma == gamma).expect("run present")
}

fn healthy_fixed_point() -> Line {
    let params = Parameters {
        gamma: 0.0,
        initial_profile: InitialProfile::Healthy,
        enforce_homeostasis: true,
        k_pb: 0.0,
        cells: 200,
        ..Parameters::default()
    };
    let start = Instant::now();
    let result = run(&params, 5.0).expect("healthy run");
    let elapsed = start.elapsed();
    let initial = &result.series[0];
    let mut worst = 0.0_f64;
    for r in &result.series {
        for id in FieldId::ALL {
            worst = worst.max((r.min[id] - initial.min[id]).abs()).max((r.max[id] - initial.max[id]).abs());
        }
    }
    let r_const = result.series.iter().all(|r| r.r == params.r0);
    let end = result.series.last().unwrap().t;
    Line {
        id: 1,
        title: "homeostatic state is a fixed point",
        pass: worst <= 1e-4 && r_const && end == 5.0 && elapsed <= Duration::from_secs(10),
        detail: format!("max deviation {worst:.2e}, R constant {r_const}, t_end {end}, {elapsed:.2?}"),
    }
}

fn monotone_boundary(runs: &[Timed]) -> Line {
    let mut worst_rise = f64::NEG_INFINITY;
    let mut sign_violations = 0;
    let mut steps = 0;
    for run in runs {
        for w in run.result.series.windows(2) {
            worst_rise = worst_rise.max(w[1].r - w[0].r);
        }
        for r in &run.result.series {
            steps += 1;
            let closing = r.q > 1e-14;
            if (closing && !(r.rdot < 0.0)) || (!closing && r.rdot > 0.0) {
                sign_violations += 1;
            }
        }
    }
    Line {
        id: 2,
        title: "wound radius never increases",
        pass: worst_rise <= 1e-12 && sign_violations == 0,
        detail: format!("{steps} reports, largest rise {worst_rise:.2e}, Rdot sign violations {sign_violations}"),
    }
}

/// Worst relative excursion of `R` outside the band built from `int Q`.
fn sandwich_excursion(series: &[StepReport], params: &Parameters, t_end: f64) -> f64 {
    let l2 = params.l * params.l;
    let mut integral = 0.0;
    let mut worst = 0.0_f64;
    for (k, r) in series.iter().enumerate() {
        if r.t > t_end {
            break;
        }
        if k > 0 {
            let prev = &series[k - 1];
            integral += 0.5 * (r.t - prev.t) * (r.q + prev.q);
        }
        let lo = params.r0 * (-2.0 * integral / l2).exp();
        let hi = params.r0 * (-integral / l2).exp();
        worst = worst.max((lo - r.r) / lo).max((r.r - hi) / hi);
    }
    worst
}

fn sandwich(runs: &[Timed]) -> Line {
    let params = Parameters::default();
    let mut parts = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for g in [0.0, 0.5, 1.0] {
        let e = sandwich_excursion(&find(runs, g).result.series, &params, 10.0);
        worst = worst.max(e);
        parts.push(format!("gamma {g}: {e:.2e}"));
    }
    Line {
        id: 3,
        title: "R inside the pressure-integral band",
        pass: worst <= 0.02,
        detail: format!("worst relative excursion ({})", parts.join(", ")),
    }
}

fn a_priori_bounds(runs: &[Timed]) -> Line {
    let p = Parameters::default();
    let pmax = p.max_pressure();
    let (mut min_v, mut rho, mut n, mut strain, mut vr) = (f64::INFINITY, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for run in runs {
        for r in &run.result.series {
            min_v = min_v.min(r.audit.min_value);
            rho = rho.max(r.audit.max_rho);
            n = n.max(r.audit.max_n);
            strain = strain.max(r.audit.strain);
            vr = vr.max(r.audit.max_vr);
        }
    }
    let pass = min_v >= -1e-12
        && rho <= p.rho_m + 1e-12
        && n <= p.tip_bound() + 1e-12
        && strain <= pmax * (1.0 + 1e-10)
        && vr <= 2.0 * pmax * (1.0 + 1e-10);
    Line {
        id: 4,
        title: "a-priori bounds hold on every step",
        pass,
        detail: format!(
            "min {min_v:.2e}, max rho {rho:.4}, max n {n:.3e} (bound {}), max |v/r| {strain:.3}, max |v_r| {vr:.3} (bound {pmax})",
            p.tip_bound()
        ),
    }
}

fn closed_form_velocity() -> Line {
    let params = Parameters::default();
    let (l, r) = (params.l, params.r0);
    let grid = Grid::new(400, r, l).unwrap();
    let pbar = 2.5;
    let rho = vec![1.0 + pbar / params.beta; 400];
    let v = compute_velocity(&rho, &grid, &params).unwrap();
    let exact = |x: f64| -pbar * r * r * (l * l - x * x) / (x * (l * l + r * r));
    let mut worst = 0.0_f64;
    for (x, got) in grid.r_face()[..400].iter().zip(&v.v_face).chain(grid.r_center().iter().zip(&v.v_center)) {
        worst = worst.max((got - exact(*x)).abs() / exact(*x).abs());
    }
    let at_l = v.v_face[400].abs();
    Line {
        id: 5,
        title: "closed-form velocity for constant pressure",
        pass: worst <= 1e-6 && at_l <= f64::EPSILON,
        detail: format!("max relative error {worst:.2e}, |v(L)| = {at_l:e}"),
    }
}

fn oxygen_decay(runs: &[Timed]) -> Line {
    let run = find(runs, 1.0);
    let p = Parameters::default();
    let series = IntegralSeries::from_reports(&run.result.series);
    let check = check_decay_gamma1(&series, p.lambda_wm, 5.0);
    let covered = series.times.last().copied().unwrap_or(0.0) >= 5.0;
    Line {
        id: 6,
        title: "oxygen content decays under full ischemia",
        pass: check.verdict == Verdict::Pass && covered && run.elapsed <= Duration::from_secs(30),
        detail: format!("worst ratio {:.4}, run {:.2?}", check.worst_ratio, run.elapsed),
    }
}

fn extreme_ischemia(runs: &[Timed]) -> Line {
    let p = Parameters::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for g in [0.95, 1.0] {
        let run = find(runs, g);
        let check = check_asymptotics_nonhealing(&run.result.series, &Parameters { gamma: g, ..p.clone() });
        let ok = match run.result.outcome {
            Outcome::Stalled { r_inf, t_stall } => {
                parts.push(format!("gamma {g}: stalled R_inf {r_inf:.4} at t {t_stall:.2}, late max rho {:.3}", check.rho.observed));
                r_inf >= 0.5 * p.r0 && t_stall <= p.t_max
            }
            other => {
                parts.push(format!("gamma {g}: {}", other.label()));
                false
            }
        };
        pass &= ok && check.all_pass();
    }
    Line { id: 7, title: "extreme ischemia stalls", pass, detail: parts.join("; ") }
}

fn healthy_closes(runs: &[Timed]) -> Line {
    let run = find(runs, 0.0);
    let window: Vec<&StepReport> = run.result.series.iter().filter(|r| r.t > 0.0 && r.t <= 5.0).collect();
    let rho_ok = window.iter().all(|r| r.rho_outer > 1.0);
    let rdot_ok = window.iter().all(|r| r.rdot < 0.0);
    let min_rho = window.iter().map(|r| r.rho_outer).fold(f64::INFINITY, f64::min);
    Line {
        id: 8,
        title: "no ischemia closes from the start",
        pass: !window.is_empty() && rho_ok && rdot_ok,
        detail: format!("{} steps in (0, 5], min outer rho {min_rho:.6}, Rdot < 0 throughout {rdot_ok}", window.len()),
    }
}

fn closure_ordering(runs: &[Timed]) -> Line {
    let gammas = [0.0, 0.3, 0.6, 0.9, 1.0];
    let key = |o: &Outcome| match o {
        Outcome::Healed { t_heal } => *t_heal,
        _ => f64::INFINITY,
    };
    let outcomes: Vec<Outcome> = gammas.iter().map(|&g| find(runs, g).result.outcome).collect();
    let ordered = outcomes.windows(2).all(|w| key(&w[0]) <= key(&w[1]));
    let ends = outcomes[0].is_healed() && matches!(outcomes[4], Outcome::Stalled { .. });
    let total: Duration = gammas.iter().map(|&g| find(runs, g).elapsed).sum();
    let summary: Vec<String> = gammas
        .iter()
        .zip(&outcomes)
        .map(|(g, o)| match o {
            Outcome::Healed { t_heal } => format!("{g}: healed {t_heal:.2}"),
            other => format!("{g}: {}", other.label()),
        })
        .collect();
    Line {
        id: 9,
        title: "closure time ordered in ischemia level",
        pass: ordered && ends && total <= Duration::from_secs(600),
        detail: format!("{} ({total:.2?} total)", summary.join(", ")),
    }
}

fn oracle_agreement() -> Line {
    let params = Parameters { gamma: 0.0, cells: 50, ..Parameters::default() };
    let times = [0.125, 0.25, 0.375, 0.5];
    let main = main_snapshots(&params, &times).expect("main path");
    let fine = 4 * params.cells;
    let dt = oracle_dt(&params, fine).expect("oracle step");
    let reference = oracle_solve(&params, fine, dt, &times).expect("oracle");
    let d = compare_runs(&main, &reference, &FieldId::ALL);
    let worst_field = FieldId::ALL.iter().map(|&id| (id, d.fields[id])).fold((FieldId::W, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    Line {
        id: 10,
        title: "IMEX path matches explicit fine-grid reference",
        pass: d.r <= 0.005 && worst_field.1 <= 0.02,
        detail: format!("R {:.2e}, worst field {} {:.2e} (N {} vs {fine}, dt {dt:.2e})", d.r, worst_field.0, worst_field.1, params.cells),
    }
}

fn self_convergence() -> Line {
    let radii: Vec<f64> = [100usize, 200, 400]
        .par_iter()
        .map(|&cells| {
            let p = Parameters { cells, ..Parameters::default() };
            main_snapshots(&p, &[2.0]).expect("refinement run")[0].r
        })
        .collect();
    let order = observed_order(radii[0], radii[1], radii[2]);
    Line {
        id: 11,
        title: "self-convergence of R(2)",
        pass: order >= 1.0,
        detail: format!("R = {:.9} / {:.9} / {:.9}, observed order {order:.2}", radii[0], radii[1], radii[2]),
    }
}

fn parameter_cross_checks() -> Line {
    let checks = validate_homeostasis(&Parameters::default());
    let (rho, kw, kf) = (&checks[0], &checks[1], &checks[2]);
    let pass = rho.verdict == Verdict::Warn
        && kw.verdict == Verdict::Pass
        && kf.verdict == Verdict::Pass
        && (kw.implied - 4.387).abs() / 4.387 <= 0.01
        && (kf.implied - 5.778e-3).abs() / 5.778e-3 <= 0.01;
    Line {
        id: 12,
        title: "listed parameters against homeostasis",
        pass,
        detail: format!(
            "k_w implied {:.4} ({:.2e}), k_f implied {:.4e} ({:.2e}), lambda_rho implied {} flagged",
            kw.implied, kw.residual, kf.implied, kf.residual, rho.implied
        ),
    }
}

fn main() {
    let jobs = [(0.0, 50.0), (0.3, 50.0), (0.5, 10.0), (0.6, 50.0), (0.9, 50.0), (0.95, 50.0), (1.0, 50.0)];
    let runs: Vec<Timed> = jobs.par_iter().map(|&(g, h)| default_run(g, h)).collect();

    let lines = vec![
        healthy_fixed_point(),
        monotone_boundary(&runs),
        sandwich(&runs),
        a_priori_bounds(&runs),
        closed_form_velocity(),
        oxygen_decay(&runs),
        extreme_ischemia(&runs),
        healthy_closes(&runs),
        closure_ordering(&runs),
        oracle_agreement(),
        self_convergence(),
        parameter_cross_checks(),
    ];

    let mut failed = 0;
    for line in &lines {
        let tag = if line.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {}: {}", line.id, line.title, line.detail);
        failed += usize::from(!line.pass);
    }
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
