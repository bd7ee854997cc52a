//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so criteria execute one at a time (their
//! runtime limits are measured on an otherwise idle process) and the verdict
//! lines are always printed. Exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use impulsive_cli::campaign::{self, rng, RampProfile, SineProfile};
use impulsive_cli::perturb::{perturbed, Gaps, Kind};
use impulsive_cli::run;
use impulsive_core::bounds::{
    apriori_bound, check_dependence, dependence_initial_bound, existence_certificate, PachpatteInstance, PreparedBound,
    DEFAULT_PANELS,
};
use impulsive_core::linalg::{inf_dist, inf_norm, Matrix};
use impulsive_core::model::catalog::{build_catalog, entry, CatalogEntry};
use impulsive_core::semigroup::{evolve, operator_norm_bound, DEFAULT_NORM_SAMPLES};
use impulsive_core::solver::{
    mild_residual, solve_mild, solve_mild_with, Discretization, InitialIterate, PicardControl,
};
use impulsive_core::trajectory::{Block, PiecewiseTrajectory};
use rand::Rng;

const EPS: f64 = 1e-10;
const SEED: u64 = 20_240_531;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Outcome = Result<Verdict, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn certifying_entries() -> Vec<CatalogEntry> {
    build_catalog()
        .into_iter()
        .filter(|e| {
            let sg = operator_norm_bound(&e.problem.generator, e.problem.horizon, DEFAULT_NORM_SAMPLES).unwrap();
            existence_certificate(&e.problem, &e.lipschitz, &sg).unwrap().pass
        })
        .collect()
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("impulsive").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap())
}

fn field(out: &str, key: &str) -> Option<f64> {
    out.lines().find_map(|l| l.strip_prefix(key)?.trim().parse().ok())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fail_cfg = dir.path().join("lg05.toml");
    std::fs::write(&fail_cfg, "[problem.parameters]\nlg = 0.05\n").map_err(|e| e.to_string())?;

    let (code_pass, out_pass) = cli(&["certify"]);
    let (code_fail, out_fail) = cli(&["certify", "--config", fail_cfg.to_str().unwrap()]);
    let elapsed = start.elapsed();

    let m = field(&out_pass, "M:").ok_or("no M in output")?;
    let e2 = 2.0f64.exp();
    let m_ok = m >= e2 && (m / e2 - 1.0) <= 1e-6 + 1e-12;
    let lhs = field(&out_pass, "lhs:").ok_or("no lhs in output")?;
    let lhs_ok = (0.2955..=0.2957).contains(&lhs);
    let pass_ok = code_pass == 0 && out_pass.lines().any(|l| l == "PASS");
    let fail_ok = code_fail == 3 && out_fail.lines().any(|l| l == "FAIL");
    let time_ok = within(elapsed, 1.0);
    Ok(Verdict::new(
        m_ok && lhs_ok && pass_ok && fail_ok && time_ok,
        format!(
            "M = {m:.9} (e^2 = {e2:.9}), lhs = {lhs:.6}, PASS/exit {code_pass}, L_G = 0.05 FAIL/exit {code_fail}, {:.3}s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let e = entry("paper_example").unwrap();
    let (traj, report) = solve_mild(
        &e.problem,
        &Discretization::new(1e-3).unwrap(),
        &PicardControl::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let jump = inf_norm(&traj.jump(1).map_err(|e| e.to_string())?);
    let reported = inf_norm(&report.jumps[0]);
    Ok(Verdict::new(
        jump <= 1e-12 && reported <= 1e-12 && within(elapsed, 10.0),
        format!(
            "|dw(1)| = {jump:e}, reported {reported:e}, {:.2}s at h = 1e-3",
            elapsed.as_secs_f64()
        ),
    ))
}

fn steps_exact(t: f64) -> f64 {
    if t <= 1.0 {
        1.0 + t
    } else if t <= 2.0 {
        1.0 + t + (t - 1.0).powi(2) / 2.0
    } else {
        1.0 + t + (t - 1.0).powi(2) / 2.0 + (t - 2.0).powi(3) / 6.0
    }
}

fn steps_error(horizon: f64, h: f64) -> Result<f64, String> {
    let e = entry("method_of_steps")
        .unwrap()
        .with("b", horizon)
        .map_err(|e| e.to_string())?;
    let (traj, _) = solve_mild(&e.problem, &Discretization::new(h).unwrap(), &PicardControl::default())
        .map_err(|e| e.to_string())?;
    let block = &traj.blocks()[1];
    Ok(block
        .times
        .iter()
        .zip(&block.values)
        .map(|(&t, &v)| (v - steps_exact(t)).abs())
        .fold(0.0, f64::max))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let e_h = steps_error(2.0, 1e-3)?;
    let e_h2 = steps_error(2.0, 5e-4)?;
    let elapsed = start.elapsed();
    let ratio = e_h / e_h2;
    let accuracy_ok = e_h <= 1e-5;
    let ratio_ok = ratio >= 3.0;
    // on [0, 3] the last piece is cubic, so the trapezoid rule is no longer exact
    let s_h = steps_error(3.0, 1e-3)?;
    let s_h2 = steps_error(3.0, 5e-4)?;
    Ok(Verdict::new(
        accuracy_ok && ratio_ok && within(elapsed, 10.0),
        format!(
            "max error {e_h:.3e} at h = 1e-3 ({}), {e_h2:.3e} at h/2, ratio {ratio:.3} ({}), {:.2}s; \
             supplementary b = 3: {s_h:.3e} -> {s_h2:.3e}, ratio {:.3}",
            if accuracy_ok { "ok" } else { "too large" },
            if ratio_ok {
                "ok"
            } else {
                "< 3: both errors are at round-off level"
            },
            elapsed.as_secs_f64(),
            s_h / s_h2
        ),
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut worst_spectral: f64 = 0.0;
    for i in 0..100 {
        let mut r = rng(SEED, 4_000 + i);
        let eig: Vec<f64> = (0..4).map(|_| r.random_range(-2.0..=2.0)).collect();
        // diagonally dominant eigenvector basis keeps the oracle well conditioned
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|a| {
                (0..4)
                    .map(|b| if a == b { 2.0 } else { r.random_range(-0.5..0.5) })
                    .collect()
            })
            .collect();
        let p = Matrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let p_inv = p.solve(&Matrix::identity(4)).ok_or("singular basis")?;
        let a = p.matmul(&Matrix::from_diagonal(&eig)).matmul(&p_inv);
        let t = r.random_range(0.0..=2.0);
        let x: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
        let exp_d: Vec<f64> = eig.iter().map(|l| (l * t).exp()).collect();
        let oracle = p.matmul(&Matrix::from_diagonal(&exp_d)).matmul(&p_inv).mul_vec(&x);
        let got = evolve(&a, t, &x).map_err(|e| e.to_string())?;
        worst_spectral = worst_spectral.max(inf_dist(&got, &oracle) / inf_norm(&oracle));
    }
    let mut worst_law: f64 = 0.0;
    for i in 0..100 {
        let mut r = rng(SEED, 4_500 + i);
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..4).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect();
        let mut a = Matrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let scale = r.random_range(0.0..=2.0) / a.inf_norm();
        a = a.scaled(scale);
        let (s, t) = (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0));
        let x: Vec<f64> = (0..4).map(|_| r.random_range(-3.0..3.0)).collect();
        let lhs = evolve(&a, s, &evolve(&a, t, &x).unwrap()).unwrap();
        let rhs = evolve(&a, s + t, &x).unwrap();
        worst_law = worst_law.max(inf_dist(&lhs, &rhs) / (1.0 + inf_norm(&x)));
    }
    let elapsed = start.elapsed();
    Ok(Verdict::new(
        worst_spectral <= 1e-9 && worst_law <= 1e-10 && within(elapsed, 5.0),
        format!(
            "spectral rel error {worst_spectral:.2e}, semigroup law {worst_law:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let h = 1e-3;
    let rows = campaign::run_campaign(SEED, 100, h).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let worst = rows.iter().map(|r| r.max_violation).fold(f64::NEG_INFINITY, f64::max);
    let impulses: usize = rows.iter().map(|r| r.num_impulses).sum();
    let tol = campaign::tolerance(h);
    Ok(Verdict::new(
        worst <= tol && within(elapsed, 60.0),
        format!(
            "max(oracle - bound) = {worst:.3e} <= {tol:.1e} over {} instances ({impulses} impulses), {:.2}s",
            rows.len(),
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let mut r = rng(SEED, 6_000 + i);
        let base = campaign::random_instance(&mut r);
        let f = SineProfile::random(&mut r, 2.0);
        let n = RampProfile::random(&mut r);
        let inst = PachpatteInstance {
            n: Arc::new(move |t| n.eval(t)),
            f: f.function(),
            g: impulsive_core::model::constant(0.0),
            beta: vec![0.0; base.impulse_count()],
            ..base
        };
        let bound = PreparedBound::new(&inst, DEFAULT_PANELS).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let t = r.random_range(0.0..=1.0);
            let want = n.eval(t) * f.integral(t).exp();
            let got = bound.value(t).map_err(|e| e.to_string())?;
            worst = worst.max((got - want).abs() / want);
        }
    }
    Ok(Verdict::new(
        worst <= 1e-10,
        format!("worst relative gap {worst:.2e} over 20 f x 20 times"),
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let disc = Discretization::new(1e-3).unwrap();
    let control = PicardControl::default();
    let mut parts = Vec::new();
    let mut worst: f64 = 0.0;
    for e in certifying_entries() {
        let (a, _) =
            solve_mild_with(&e.problem, &disc, &control, InitialIterate::Constant).map_err(|e| e.to_string())?;
        let (b, _) = solve_mild_with(&e.problem, &disc, &control, InitialIterate::Ramp).map_err(|e| e.to_string())?;
        let d = a.sigma_diff(&b).map_err(|e| e.to_string())?;
        worst = worst.max(d);
        parts.push(format!("{} {d:.1e}", e.name));
    }
    let elapsed = start.elapsed();
    Ok(Verdict::new(
        worst <= 10.0 * EPS && within(elapsed, 30.0),
        format!(
            "sigma_diff: {}; {:.2}s at h = 1e-3",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let disc = Discretization::new(1e-2).unwrap();
    let control = PicardControl::default();
    let entries = certifying_entries();
    let mut failures = 0;
    let mut cases = 0;
    let mut tightest: f64 = 0.0;
    for (kind, label) in [
        (Kind::Initial, "initial"),
        (Kind::Parameter, "parameter"),
        (Kind::Function, "function"),
    ] {
        for i in 0..50u64 {
            let mut r = rng(SEED, 8_000 + 100 * kind as u64 + i);
            let base = &entries[i as usize % entries.len()];
            let sg = operator_norm_bound(&base.problem.generator, base.problem.horizon, DEFAULT_NORM_SAMPLES)
                .map_err(|e| e.to_string())?;
            let gaps = Gaps {
                history: r.random_range(0.0..0.5),
                rho: r.random_range(0.0..0.5),
                mu: r.random_range(0.0..0.5),
                drift: r.random_range(0.0..0.5),
                jump: r.random_range(0.0..0.5),
            };
            let (other, gap, lip) = perturbed(base, kind, &gaps).map_err(|e| e.to_string())?;
            let rep = check_dependence(gap, &base.problem, &other.problem, &lip, &sg, &disc, &control)
                .map_err(|e| format!("{label} {}: {e}", base.name))?;
            cases += 1;
            if !rep.dominated {
                failures += 1;
                eprintln!("  criterion 8 {label} {} case {i}: {rep:?}", base.name);
            }
            if rep.theoretical > 0.0 {
                tightest = tightest.max(rep.empirical / rep.theoretical);
            }
        }
    }
    let e = entry("paper_example").unwrap();
    let sg = operator_norm_bound(&e.problem.generator, e.problem.horizon, DEFAULT_NORM_SAMPLES).unwrap();
    let one = dependence_initial_bound(&e.problem, &e.lipschitz, &sg, 0.125, None).map_err(|e| e.to_string())?;
    let two = dependence_initial_bound(&e.problem, &e.lipschitz, &sg, 0.25, None).map_err(|e| e.to_string())?;
    let ratio = two / one;
    let elapsed = start.elapsed();
    Ok(Verdict::new(
        failures == 0 && (ratio - 2.0).abs() <= 1e-12 && within(elapsed, 300.0),
        format!(
            "{}/{cases} dominated (largest empirical/theoretical {tightest:.2e}), p1 ratio {ratio}, {:.1}s at h = 1e-2",
            cases - failures,
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let disc = Discretization::new(1e-3).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for e in certifying_entries() {
        let sg = operator_norm_bound(&e.problem.generator, e.problem.horizon, DEFAULT_NORM_SAMPLES).unwrap();
        let k = apriori_bound(&e.problem, &e.lipschitz, &sg, &disc).map_err(|e| e.to_string())?;
        let (traj, _) = solve_mild(&e.problem, &disc, &PicardControl::default()).map_err(|e| e.to_string())?;
        let norm = traj.sigma_norm();
        ok &= norm <= k.value;
        parts.push(format!("{} {norm:.3} <= {:.3e}", e.name, k.value));
    }
    let elapsed = start.elapsed();
    Ok(Verdict::new(
        ok && within(elapsed, 30.0),
        format!("{}; {:.2}s", parts.join(", "), elapsed.as_secs_f64()),
    ))
}

fn criterion_10() -> Outcome {
    let h = 1e-3;
    let control = PicardControl::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for e in build_catalog() {
        let (_, coarse) =
            solve_mild(&e.problem, &Discretization::new(2.0 * h).unwrap(), &control).map_err(|e| e.to_string())?;
        let (_, fine) =
            solve_mild(&e.problem, &Discretization::new(h).unwrap(), &control).map_err(|e| e.to_string())?;
        let c = coarse.final_residual / (2.0 * h).powi(2) * 2f64.powf(0.1);
        let allowed = c * h * h + 10.0 * EPS;
        ok &= fine.final_residual <= allowed;
        parts.push(format!(
            "{} r_2h {:.2e} r_h {:.2e} <= {allowed:.2e}",
            e.name, coarse.final_residual, fine.final_residual
        ));
    }

    let e = entry("paper_example").unwrap();
    let disc = Discretization::new(1e-2).unwrap();
    let (traj, _) = solve_mild(&e.problem, &disc, &control).map_err(|e| e.to_string())?;
    let mut blocks: Vec<Block> = traj.blocks().to_vec();
    let last = blocks.len() - 1;
    blocks[last].values.iter_mut().for_each(|v| *v += 0.1);
    let corrupt = PiecewiseTrajectory::from_blocks(
        traj.dimension(),
        traj.delay(),
        traj.horizon(),
        traj.impulse_times().to_vec(),
        blocks,
    )
    .map_err(|e| e.to_string())?;
    let bad = mild_residual(&e.problem, &corrupt, &disc).map_err(|e| e.to_string())?;
    ok &= bad >= 0.05;
    parts.push(format!("corrupted segment residual {bad:.3}"));
    Ok(Verdict::new(ok, parts.join("; ")))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 certificate", criterion_1),
        ("2 zero jump", criterion_2),
        ("3 method of steps", criterion_3),
        ("4 semigroup", criterion_4),
        ("5 Pachpatte domination", criterion_5),
        ("6 Gronwall reduction", criterion_6),
        ("7 uniqueness", criterion_7),
        ("8 dependence", criterion_8),
        ("9 a-priori bound", criterion_9),
        ("10 residual consistency", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let (pass, detail) = match std::panic::catch_unwind(check) {
            Ok(Ok(v)) => (v.pass, v.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        failed += usize::from(!pass);
        println!("{} criterion {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
