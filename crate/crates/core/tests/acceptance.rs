//! Acceptance criteria, one PASS/FAIL line each. Run with `--nocapture` to
//! see the lines; the test fails if any criterion fails.

mod common;

use std::time::Instant;

use klprox::diagnostics::rules::{rule_suite, RuleCheckOptions, RuleStatus};
use klprox::diagnostics::{fit_linear_rate, RateReference};
use klprox::harness::checks::{error_bound_suite, inequality_suite, CheckOutcome, SLACK};
use klprox::harness::presets::preset;
use klprox::harness::{generate_problem, run_experiment, solve, ProblemConfig, SolverKind};
use klprox::linalg::distance;
use klprox::solvers::{run_ipiano, run_pg, IPianoConfig, PgConfig, StepRule};
use klprox::{GroupBall, GroupNorm, Regularizer, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Board {
    results: Vec<(String, bool)>,
}

impl Board {
    fn record(&mut self, id: &str, passed: bool, detail: String) {
        println!("{} [{id}] {detail}", if passed { "PASS" } else { "FAIL" });
        self.results.push((id.to_owned(), passed));
    }
}

fn seeded(name: &str, seed: u64) -> ProblemConfig {
    ProblemConfig {
        seed,
        ..preset(name).unwrap()
    }
}

fn lasso_rate(board: &mut Board) {
    let start = Instant::now();
    let cfg = preset("lasso").unwrap();
    let (report, trace) = run_experiment(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let l = generate_problem(&cfg).unwrap().objective.smooth().lipschitz_bound().unwrap();
    let step_ok = trace.steps.iter().all(|g| (g - 0.99 / l).abs() <= 1e-15 * (0.99 / l));
    let rate = report.rate.expect("rate fit");
    let kl = report.kl.expect("KL fit");
    let passed = report.summary.converged
        && step_ok
        && rate.r_squared >= 0.95
        && rate.rho_hat < 1.0
        && (0.4..=0.6).contains(&kl.alpha_hat)
        && secs < 5.0;
    board.record(
        "1",
        passed,
        format!(
            "lasso PG: {} iters, step 0.99/L {step_ok}, rho {:.4}, R2 {:.4}, alpha {:.4}, {secs:.2} s \
             (need R2 >= 0.95, rho < 1, alpha in [0.4, 0.6], < 5 s)",
            report.summary.iterations, rate.rho_hat, rate.r_squared, kl.alpha_hat
        ),
    );
}

fn scad_mcp_rates(board: &mut Board) {
    let start = Instant::now();
    let mut worst_r2 = f64::INFINITY;
    let mut worst_rho: f64 = 0.0;
    let mut all = true;
    for name in ["scad-ls", "mcp-ls"] {
        for seed in 0..5 {
            let (report, _) = run_experiment(&seeded(name, seed)).unwrap();
            match (&report.rate, report.summary.converged) {
                (Some(r), true) => {
                    worst_r2 = worst_r2.min(r.r_squared);
                    worst_rho = worst_rho.max(r.rho_hat);
                    all &= r.r_squared >= 0.9 && r.rho_hat < 1.0;
                }
                _ => {
                    println!("  {name} seed {seed}: no converged rate fit {:?}", report.notes);
                    all = false;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    board.record(
        "2",
        all && secs < 10.0,
        format!(
            "SCAD/MCP PG on seeds 0..5: min R2 {worst_r2:.4}, max rho {worst_rho:.4}, {secs:.2} s \
             (need R2 >= 0.9, rho < 1, < 10 s)"
        ),
    );
}

fn ipiano_rate(board: &mut Board) {
    let base = preset("lasso").unwrap();
    let obj = generate_problem(&base).unwrap().objective;
    let x0 = obj.reg().prox(&Vector::zeros(obj.dim()), 1.0).unwrap();
    let reference = run_pg(
        &obj,
        &x0,
        &PgConfig {
            max_iters: 200_000,
            tol: 1e-14,
            record_subgrad: false,
            ..PgConfig::default()
        },
    )
    .unwrap();
    let xbar = reference.last_iterate().unwrap().clone();
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.3, 0.7] {
        let cfg = ProblemConfig {
            solver: SolverKind::Ipiano,
            beta,
            ..base.clone()
        };
        let trace = solve(&cfg).unwrap();
        let fit = fit_linear_rate(&trace, RateReference::Point(&xbar));
        let pot = trace.potentials.as_ref().unwrap();
        let worst_rise = pot.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let monotone = worst_rise <= 1e-12;
        match fit {
            Ok(r) => {
                ok &= r.rho_hat < 1.0 && r.r_squared >= 0.9 && monotone;
                parts.push(format!(
                    "beta {beta}: rho {:.4}, R2 {:.4}, worst potential rise {worst_rise:.1e}",
                    r.rho_hat, r.r_squared
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("beta {beta}: {e}"));
            }
        }
    }
    let l = obj.smooth().lipschitz_bound().unwrap();
    let step = 0.99 / l;
    let ip = run_ipiano(
        &obj,
        &x0,
        &IPianoConfig {
            beta: 0.0,
            alpha: Some(step),
            ..IPianoConfig::default()
        },
    )
    .unwrap();
    let pg = run_pg(
        &obj,
        &x0,
        &PgConfig {
            step: StepRule::Constant(step),
            ..PgConfig::default()
        },
    )
    .unwrap();
    let identical = ip.iterates == pg.iterates
        && ip.objectives == pg.objectives
        && ip.residuals == pg.residuals
        && ip.subgrad_dists == pg.subgrad_dists;
    board.record(
        "3",
        ok && identical,
        format!(
            "iPiano on lasso: {}; beta 0 bit-identical to PG {identical} \
             (need rho < 1, R2 >= 0.9, rise <= 1e-12)",
            parts.join("; ")
        ),
    );
}

fn rule_checks(board: &mut Board) {
    let start = Instant::now();
    let results = rule_suite(&RuleCheckOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    for r in &results {
        println!(
            "  {:<12} {:<45} predicted {:.4} fitted {} {:?}",
            r.rule,
            r.instance,
            r.predicted,
            r.fitted.map_or_else(|| "-".to_owned(), |a| format!("{a:.4}")),
            r.status
        );
    }
    let rules = ["min", "composition", "separable", "moreau", "potential", "group_ball"];
    let every_rule_passes = rules
        .iter()
        .all(|name| results.iter().any(|r| r.rule == *name && r.status == RuleStatus::Passed));
    let none_failed = results.iter().all(|r| r.status != RuleStatus::Failed);
    board.record(
        "4",
        every_rule_passes && none_failed && secs < 30.0,
        format!(
            "calculus-rule suite: {} checks, {} passed, {secs:.2} s (need fitted within 0.1 of predicted, < 30 s)",
            results.len(),
            results.iter().filter(|r| r.status == RuleStatus::Passed).count()
        ),
    );
}

fn summarize(outcomes: &[&CheckOutcome]) -> (bool, usize, String) {
    let passed = outcomes.iter().all(|o| o.passed);
    let samples = outcomes.iter().map(|o| o.samples).sum();
    let detail = outcomes
        .iter()
        .map(|o| format!("{} worst excess {:.3e}", o.name, o.worst_excess))
        .collect::<Vec<_>>()
        .join(", ");
    (passed, samples, detail)
}

fn inequalities(board: &mut Board) {
    let suite = inequality_suite(1).unwrap();
    let pick = |prefix: &str| suite.iter().filter(|o| o.name.starts_with(prefix)).collect::<Vec<_>>();

    let (passed, samples, detail) = summarize(&pick("residual/"));
    board.record(
        "5a",
        passed && samples == 1000,
        format!("residual <= subgradient distance, {samples} samples, slack {SLACK:e}: {detail}"),
    );
    let (_, _, weak) = summarize(&pick("residual-weak/"));
    println!("  with the 1/(1 - rho) factor for rho-weakly convex members: {weak}");

    let (passed, samples, detail) = summarize(&pick("nonexpansive/"));
    board.record(
        "5b",
        passed && samples == 800,
        format!("prox nonexpansiveness, 200 pairs per convex member: {detail}"),
    );

    let (passed, samples, detail) = summarize(&[pick("lifted-residual/"), pick("lifted-primal/")].concat());
    board.record(
        "5c",
        passed && samples == 400,
        format!("epigraph projection bound with M = sqrt(n), 200 samples, n <= 3: {detail}"),
    );
}

const ORACLE_TOL: f64 = 1e-4;
const ORACLE_INPUTS: usize = 500;

fn oracle_equivalence(board: &mut Board) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut check = |name: &'static str, rng: &mut ChaCha8Rng, case: &dyn Fn(&mut ChaCha8Rng) -> (Vector, Vector)| {
        let w = (0..ORACLE_INPUTS)
            .map(|_| {
                let (ours, oracle) = case(rng);
                distance(&ours, &oracle)
            })
            .fold(0.0, f64::max);
        worst.push((name, w));
    };
    let scalar = |rng: &mut ChaCha8Rng| (rng.random_range(-3.0..3.0), rng.random_range(0.2..1.5));
    check("l1", &mut rng, &|rng| {
        let ((z, t), mu) = (scalar(rng), rng.random_range(0.1..1.5));
        let ours = Regularizer::L1 { mu }.prox(&Vector::from(vec![z]), t).unwrap();
        (ours, Vector::from(vec![grid_prox(|u| l1_value(u, mu), z, t)]))
    });
    check("scad", &mut rng, &|rng| {
        let ((z, t), lambda, theta) = (scalar(rng), rng.random_range(0.1..1.5), rng.random_range(2.1..5.0));
        let ours = Regularizer::Scad { lambda, theta }.prox(&Vector::from(vec![z]), t).unwrap();
        (ours, Vector::from(vec![grid_prox(|u| scad_value(u, lambda, theta), z, t)]))
    });
    check("mcp", &mut rng, &|rng| {
        let ((z, t), lambda, theta) = (scalar(rng), rng.random_range(0.1..1.5), rng.random_range(0.5..5.0));
        let ours = Regularizer::Mcp { lambda, theta }.prox(&Vector::from(vec![z]), t).unwrap();
        (ours, Vector::from(vec![grid_prox(|u| mcp_value(u, lambda, theta), z, t)]))
    });
    let vector = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(1..=6);
        (0..n).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>()
    };
    check("l0_ball", &mut rng, &|rng| {
        let z = vector(rng);
        let r = rng.random_range(1..=z.len());
        let ours = Regularizer::L0Ball { r }.prox(&Vector::from(z.clone()), 1.0).unwrap();
        (ours, l0_oracle(&z, r))
    });
    check("sparse_simplex", &mut rng, &|rng| {
        let z = vector(rng);
        let r = rng.random_range(1..=z.len());
        let ours = Regularizer::SparseSimplex { r }.prox(&Vector::from(z.clone()), 1.0).unwrap();
        (ours, sparse_simplex_oracle(&z, r))
    });
    check("trimmed_l1", &mut rng, &|rng| {
        let z = vector(rng);
        let k = rng.random_range(0..=z.len());
        let (mu, gamma, t) = (rng.random_range(0.1..1.5), rng.random_range(0.05..=1.0), rng.random_range(0.2..1.5));
        let ours = Regularizer::TrimmedL1 { mu, gamma, k }.prox(&Vector::from(z.clone()), t).unwrap();
        (ours, trimmed_oracle(&z, mu, gamma, k, t))
    });
    for (name, norm) in [("group_ball_l2", GroupNorm::L2), ("group_ball_l1", GroupNorm::L1)] {
        check(name, &mut rng, &|rng| {
            let z = vector(rng);
            let n = z.len();
            let mut groups = Vec::new();
            let mut next = 0;
            while next < n {
                let size = rng.random_range(1..=n - next);
                groups.push((next..next + size).collect::<Vec<usize>>());
                next += size;
            }
            let weights: Vec<f64> = groups.iter().map(|_| rng.random_range(0.5..2.0)).collect();
            let sigma = rng.random_range(0.3..3.0);
            let blocks: Vec<(Vec<usize>, f64)> = match norm {
                GroupNorm::L2 => groups.iter().cloned().zip(weights.iter().copied()).collect(),
                GroupNorm::L1 => groups
                    .iter()
                    .zip(&weights)
                    .flat_map(|(g, w)| g.iter().map(move |i| (vec![*i], *w)))
                    .collect(),
            };
            let ball = GroupBall::new(groups, weights, sigma, norm).unwrap();
            let ours = Regularizer::GroupBall(ball).prox(&Vector::from(z.clone()), 1.0).unwrap();
            (ours, block_ball_oracle(&z, &blocks, sigma))
        });
    }
    check("zero", &mut rng, &|rng| {
        let z = Vector::from(vector(rng));
        (Regularizer::Zero.prox(&z, rng.random_range(0.2..1.5)).unwrap(), z)
    });
    let passed = worst.iter().all(|(_, w)| *w <= ORACLE_TOL);
    let detail = worst
        .iter()
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    board.record(
        "6",
        passed,
        format!("prox vs brute-force oracles, {ORACLE_INPUTS} inputs each, worst gap: {detail} (need <= {ORACLE_TOL:e})"),
    );
}

fn error_bounds(board: &mut Board) {
    let start = Instant::now();
    let reports = error_bound_suite().unwrap();
    let secs = start.elapsed().as_secs_f64();
    let finite = reports.iter().all(|(_, r)| r.max_ratio.is_some_and(f64::is_finite));
    let detail = reports
        .iter()
        .map(|(n, r)| format!("{n} {:.4} over {} points", r.max_ratio.unwrap_or(f64::NAN), r.samples))
        .collect::<Vec<_>>()
        .join(", ");
    board.record(
        "7",
        finite && secs < 5.0,
        format!("error-bound max ratio: {detail}, {secs:.2} s (need finite, < 5 s)"),
    );
}

fn logistic_rates(board: &mut Board) {
    let mut all = true;
    let mut parts = Vec::new();
    for seed in 0..3 {
        let (report, _) = run_experiment(&seeded("logistic-l1", seed)).unwrap();
        match (&report.rate, report.summary.converged) {
            (Some(r), true) => {
                all &= r.r_squared >= 0.9 && r.rho_hat < 1.0;
                parts.push(format!("seed {seed}: rho {:.4}, R2 {:.4}", r.rho_hat, r.r_squared));
            }
            _ => {
                all = false;
                parts.push(format!("seed {seed}: no converged rate fit {:?}", report.notes));
            }
        }
    }
    board.record(
        "8",
        all,
        format!("logistic + l1 PG: {} (need R2 >= 0.9)", parts.join("; ")),
    );
}

#[test]
fn acceptance() {
    let mut board = Board { results: Vec::new() };
    lasso_rate(&mut board);
    scad_mcp_rates(&mut board);
    ipiano_rate(&mut board);
    rule_checks(&mut board);
    inequalities(&mut board);
    oracle_equivalence(&mut board);
    error_bounds(&mut board);
    logistic_rates(&mut board);
    let failed: Vec<&str> = board.results.iter().filter(|(_, p)| !p).map(|(id, _)| id.as_str()).collect();
    println!("{} of {} criteria pass", board.results.len() - failed.len(), board.results.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
