//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed here and never loosened.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use cloudreg::analysis::{is_hurwitz, lq_design, pendulum_lq, riccati_residual, stability_report, PAPER_P};
use cloudreg::cloud::{backward_mean, forward_drops, TriangleCloud};
use cloudreg::controller::{infer, ControllerConfig, Mode};
use cloudreg::decomposition::{global_term, local_gains, local_term};
use cloudreg::experiment::{
    cmd_compare, cmd_decompose, cmd_gen_cloud, cmd_plot, cmd_simulate, cmd_stability, ExperimentConfig,
};
use cloudreg::plant::{linearize_pendulum, pendulum_deriv, rk4_step, simulate_closed_loop, PendulumParams};
use cloudreg::RandomSource;
use nalgebra::DMatrix;

const IDENTITY_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;
const GAIN_TOL: f64 = 1e-9;
const ENTROPY_LIMIT_TOL: f64 = 1e-6;
const MEAN_PASS_FRACTION: f64 = 0.99;
const RICCATI_TOL: f64 = 1e-8;
const SCALAR_CARE_TOL: f64 = 1e-12;
const JACOBIAN_TOL: f64 = 1e-6;
const RK4_RATIO: (f64, f64) = (12.0, 20.0);
const SETTLE_DEG: f64 = 1.0;
const SETTLE_BY: f64 = 10.0;
const BOUND_DEG: f64 = 30.0;

type Outcome = Result<String, String>;
type Run<'a> = Box<dyn Fn(&Path) -> cloudreg::Result<()> + 'a>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Bilinear interpolation of the rule table `-(a + b)` over a uniform grid
/// on `[-L, L]`, written out from scratch as the reference controller.
fn oracle_output(e: f64, de: f64, big_j: i32, l: f64, h: f64, ku: f64) -> f64 {
    let step = l / big_j as f64;
    let cell = |x: f64| ((x / step).floor() as i32).clamp(-big_j, big_j - 1);
    let (i, j) = (cell(e), cell(de));
    let a = (e - i as f64 * step) / step;
    let b = (de - j as f64 * step) / step;
    let value = |p: i32, q: i32| -((p + q) as f64) * h / (2 * big_j) as f64;
    let u = (1.0 - a) * (1.0 - b) * value(i, j)
        + a * (1.0 - b) * value(i + 1, j)
        + (1.0 - a) * b * value(i, j + 1)
        + a * b * value(i + 1, j + 1);
    ku * u
}

fn criterion_1() -> Outcome {
    let n = 101;
    let mut worst = 0.0f64;
    let mut rng = RandomSource::new(0);
    for big_j in [1, 2, 3] {
        for ku in [0.5, 1.0, 1.2] {
            let cfg = ControllerConfig::deterministic(big_j, ku).map_err(err)?;
            let (pe, pde) = (cfg.e_partition, cfg.de_partition);
            let m = cfg.cloud_count();
            for a in 0..n {
                for b in 0..n {
                    let e = -1.0 + 2.0 * a as f64 / (n - 1) as f64;
                    let de = -1.0 + 2.0 * b as f64 / (n - 1) as f64;
                    let (i, j) = (pe.locate_cell(e), pde.locate_cell(de));
                    let u = ku * infer(e, de, &cfg, &mut rng).map_err(err)?.u_star;
                    let oracle = oracle_output(e, de, big_j, 1.0, 1.0, ku);
                    let split = global_term(i, j, ku, m)
                        + local_term(e, de, i, j, &pe, &pde, ku, m, Mode::Deterministic, &mut rng);
                    worst = worst.max((u - split).abs()).max((oracle - split).abs());
                }
            }
        }
    }
    check(
        worst <= IDENTITY_TOL,
        format!("max |Ku u* - (uG + uL)| = {worst:.3e} over 9 configs x 101^2 (tol {IDENTITY_TOL:e})"),
    )
}

fn criterion_2() -> Outcome {
    let mut pick = RandomSource::new(11);
    let mut rng = RandomSource::new(12);
    let mut worst = 0.0f64;
    for n in 0..10_000 {
        let big_j = 1 + n % 3;
        let cfg = ControllerConfig::deterministic(big_j, 1.0).map_err(err)?;
        let e = 2.0 * pick.uniform() - 1.0;
        let de = 2.0 * pick.uniform() - 1.0;
        let row = infer(e, de, &cfg, &mut rng).map_err(err)?;
        worst = worst.max((row.w.iter().sum::<f64>() - 1.0).abs());
    }
    check(worst <= WEIGHT_TOL, format!("max |sum w - 1| = {worst:.3e} over 1e4 points (tol {WEIGHT_TOL:e})"))
}

fn criterion_3() -> Outcome {
    let mut pick = RandomSource::new(21);
    let mut rng = RandomSource::new(22);
    let (mut relay_gap, mut gain_gap) = (0.0f64, 0.0f64);
    let mut cells = 0;
    for big_j in [1, 2, 3] {
        for ku in [0.5, 1.0, 1.2] {
            let cfg = ControllerConfig::deterministic(big_j, ku).map_err(err)?;
            let (pe, pde) = (cfg.e_partition, cfg.de_partition);
            let m = cfg.cloud_count();
            let d = pe.spacing();
            for i in -big_j..big_j {
                for j in -big_j..big_j {
                    cells += 1;
                    let expected = -ku * (i + j + 1) as f64 / (m - 1) as f64;
                    let (kp, kd) = local_gains(i, j, &pe, &pde, ku, m, Mode::Deterministic, &mut rng);
                    let u = |e: f64, de: f64, rng: &mut RandomSource| ku * infer(e, de, &cfg, rng).unwrap().u_star;
                    let ul = |e: f64, de: f64, rng: &mut RandomSource| {
                        local_term(e, de, i, j, &pe, &pde, ku, m, Mode::Deterministic, rng)
                    };
                    let mut levels = Vec::with_capacity(100);
                    for _ in 0..100 {
                        let e = pe.center(i) + (0.05 + 0.9 * pick.uniform()) * d;
                        let de = pde.center(j) + (0.05 + 0.9 * pick.uniform()) * d;
                        let (ci, cj) = (pe.locate_cell(e), pde.locate_cell(de));
                        if (ci, cj) != (i, j) {
                            return Err(format!("sample ({e}, {de}) located in ({ci}, {cj}), expected ({i}, {j})"));
                        }
                        levels.push(global_term(ci, cj, ku, m));
                        // the relay implied by the controller itself
                        relay_gap = relay_gap.max((u(e, de, &mut rng) - ul(e, de, &mut rng) - expected).abs());
                    }
                    if levels.iter().any(|v| *v != levels[0]) {
                        return Err(format!("u_G not constant in cell ({i}, {j}) for J = {big_j}"));
                    }
                    relay_gap = relay_gap.max((levels[0] - expected).abs());
                    let h = 0.1 * d;
                    let (e0, de0) = (pe.center(i) + 0.3 * d, pde.center(j) + 0.3 * d);
                    for f in [
                        &|e: f64, de: f64, r: &mut RandomSource| ul(e, de, r),
                        &|e: f64, de: f64, r: &mut RandomSource| u(e, de, r),
                    ] as [&dyn Fn(f64, f64, &mut RandomSource) -> f64; 2]
                    {
                        let base = f(e0, de0, &mut rng);
                        let fd_e = (f(e0 + h, de0, &mut rng) - base) / h;
                        let fd_de = (f(e0, de0 + h, &mut rng) - base) / h;
                        gain_gap = gain_gap.max((fd_e - kp).abs()).max((fd_de - kd).abs());
                    }
                }
            }
        }
    }
    check(
        relay_gap <= IDENTITY_TOL && gain_gap <= GAIN_TOL,
        format!(
            "{cells} cells x 100 samples: relay gap {relay_gap:.3e} (tol {IDENTITY_TOL:e}), \
             finite-difference gain gap {gain_gap:.3e} (tol {GAIN_TOL:e})"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut stochastic = ControllerConfig::canonical(2, 1.0, 1.0, 1e-12, 1.0, 1.0, 1.0).map_err(err)?;
    stochastic.drops = 1000;
    let mut deterministic = stochastic.clone();
    deterministic.mode = Mode::Deterministic;
    let mut pick = RandomSource::new(31);
    let mut rng = RandomSource::new(32);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let e = 2.0 * pick.uniform() - 1.0;
        let de = 2.0 * pick.uniform() - 1.0;
        let a = infer(e, de, &stochastic, &mut rng).map_err(err)?.u_star;
        let b = infer(e, de, &deterministic, &mut rng).map_err(err)?.u_star;
        worst = worst.max((a - b).abs());
    }
    check(
        worst <= ENTROPY_LIMIT_TOL,
        format!("He = 1e-12, k = 1000: max gap {worst:.3e} at 100 inputs (tol {ENTROPY_LIMIT_TOL:e})"),
    )
}

fn criterion_5() -> Outcome {
    let cloud = TriangleCloud::new(0.0, 1.0, 1.0, 0.05).map_err(err)?;
    let k = 3000;
    let sigma = 0.5 * (cloud.en1 + cloud.en2);
    let bound = 3.0 * sigma / (k as f64).sqrt();
    let trials = 1000;
    let mut inside = 0;
    for seed in 0..trials {
        let mut rng = RandomSource::new(RandomSource::derive_seed(5, seed));
        let drops = forward_drops(&cloud, k, &mut rng).map_err(err)?;
        if (backward_mean(&drops).map_err(err)? - cloud.ex).abs() <= bound {
            inside += 1;
        }
    }
    let frac = inside as f64 / trials as f64;
    check(
        frac >= MEAN_PASS_FRACTION,
        format!("{inside}/{trials} trials within 3 sigma/sqrt(k) = {bound:.4} (need >= {MEAN_PASS_FRACTION})"),
    )
}

fn criterion_6() -> Outcome {
    let report = stability_report().map_err(err)?;
    let mut detail = Vec::new();
    let mut ok = report.all_positive_definite && report.matrices.len() == 4;
    for (raw, m) in PAPER_P.iter().zip(&report.matrices) {
        let minors = [raw[0][0], raw[0][0] * raw[1][1] - raw[0][1] * raw[1][0]];
        let agree = minors.iter().zip(&m.leading_minors).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
        ok &= m.positive_definite && minors.iter().all(|v| *v > 0.0) && agree;
        detail.push(format!("{} minors {:.4}/{:.4}", m.name, minors[0], minors[1]));
    }
    check(ok, detail.join(", "))
}

fn criterion_7() -> Outcome {
    let params = PendulumParams::default();
    let d = pendulum_lq(&params).map_err(err)?;
    let (a, b) = linearize_pendulum(&params);
    let b = DMatrix::from_column_slice(2, 1, b.as_slice());
    let residual = riccati_residual(&a, &b, &d.q, &d.r, &d.p).map_err(err)?;
    let hurwitz = is_hurwitz(&(&a - &b * &d.k));
    let mut scalar_gap = 0.0f64;
    for (sa, sb, sq, sr) in [(0.0, 1.0, 1.0, 1.0), (1.0, 1.0, 1.0, 1.0), (-2.0, 0.5, 3.0, 0.2), (5.0, 2.0, 10.0, 0.1), (0.3, -1.5, 0.7, 4.0)] {
        let s = |v: f64| DMatrix::from_element(1, 1, v);
        let p = lq_design(&s(sa), &s(sb), &s(sq), &s(sr)).map_err(err)?.p[(0, 0)];
        let exact = (sa * sr + (sa * sa * sr * sr + sb * sb * sq * sr).sqrt()) / (sb * sb);
        scalar_gap = scalar_gap.max((p - exact).abs() / exact.abs().max(1.0));
    }
    check(
        residual <= RICCATI_TOL && hurwitz && scalar_gap <= SCALAR_CARE_TOL,
        format!(
            "pendulum residual {residual:.3e} (tol {RICCATI_TOL:e}), K = [{:.4}, {:.4}], Hurwitz {hurwitz}, \
             scalar CARE gap {scalar_gap:.3e} (tol {SCALAR_CARE_TOL:e})",
            d.k[(0, 0)],
            d.k[(0, 1)]
        ),
    )
}

fn integrate(p: &PendulumParams, x0: [f64; 2], dt: f64, t: f64) -> Vec<f64> {
    let f = |x: &[f64], u: f64| pendulum_deriv(x, u, p).map(|d| d.to_vec());
    let steps = (t / dt).round() as usize;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        x = rk4_step(f, &x, 0.0, dt).unwrap();
    }
    x
}

fn criterion_8() -> Outcome {
    let mut origin_exact = true;
    let mut jac = 0.0f64;
    for p in [PendulumParams::default(), PendulumParams::default().with_friction(true), PendulumParams::with_length_coupling()] {
        origin_exact &= pendulum_deriv(&[0.0, 0.0], 0.0, &p).map_err(err)? == [0.0, 0.0];
        let (a, b) = linearize_pendulum(&p);
        let h = 1e-6;
        for col in 0..3 {
            let shift = |s: f64| {
                let mut x = [0.0, 0.0];
                let mut u = 0.0;
                if col < 2 {
                    x[col] = s;
                } else {
                    u = s;
                }
                pendulum_deriv(&x, u, &p).unwrap()
            };
            let (fp, fm) = (shift(h), shift(-h));
            for row in 0..2 {
                let exact = if col < 2 { a[(row, col)] } else { b[row] };
                let num = (fp[row] - fm[row]) / (2.0 * h);
                // sign friction is not differentiable at zero velocity
                if !(col == 1 && p.friction.enabled) {
                    jac = jac.max((num - exact).abs());
                }
            }
        }
    }
    let p = PendulumParams::default();
    let x0 = [0.3490658503988659, 0.0];
    let reference = integrate(&p, x0, 1e-4, 1.0);
    let error = |dt: f64| {
        let x = integrate(&p, x0, dt, 1.0);
        ((x[0] - reference[0]).powi(2) + (x[1] - reference[1]).powi(2)).sqrt()
    };
    let ratio = error(0.02) / error(0.01);
    check(
        origin_exact && jac <= JACOBIAN_TOL && (RK4_RATIO.0..=RK4_RATIO.1).contains(&ratio),
        format!(
            "origin exact {origin_exact}, Jacobian gap {jac:.3e} (tol {JACOBIAN_TOL:e}), \
             RK4 error ratio {ratio:.3} (need [{}, {}])",
            RK4_RATIO.0, RK4_RATIO.1
        ),
    )
}

fn max_abs_deg(csv: &str) -> f64 {
    csv.lines()
        .skip(1)
        .filter_map(|l| l.split(',').nth(1)?.parse::<f64>().ok())
        .fold(0.0f64, |m, v| m.max(v.abs().to_degrees()))
}

fn criterion_9(scratch: &Path) -> Outcome {
    let cfg = ExperimentConfig::preset("paper-pendulum").map_err(err)?;
    let plant = cfg.require_plant().map_err(err)?.build().map_err(err)?;
    let mut controller = cfg.require_controller().map_err(err)?.build(&plant, cfg.seed).map_err(err)?;
    let sim = cfg.require_sim().map_err(err)?;
    let traj = simulate_closed_loop(&plant, &mut controller, sim).map_err(err)?;
    // last instant outside the band; settled if the band holds from then on
    let last_out = traj
        .t
        .iter()
        .zip(&traj.y)
        .filter(|(_, y)| y.abs().to_degrees() >= SETTLE_DEG)
        .map(|(t, _)| *t)
        .next_back()
        .unwrap_or(0.0);
    let settled = last_out < SETTLE_BY && last_out < traj.horizon();
    let a = format!("(a) triangle frictionless inside {SETTLE_DEG} deg from t = {last_out:.3} s (need < {SETTLE_BY} s)");

    let dir = scratch.join("criterion-9");
    let table = cmd_compare(&cfg, cfg.seed, &dir).map_err(err)?;
    let mut bounded = true;
    let mut b = Vec::new();
    for name in ["triangle", "normal", "lq"] {
        let row = table
            .rows
            .iter()
            .find(|r| r.controller == name && r.condition == "frictional")
            .ok_or_else(|| format!("no frictional row for {name}"))?;
        if !row.ok {
            bounded = false;
            b.push(format!("{name} failed: {}", row.error.clone().unwrap_or_default()));
            continue;
        }
        let text = fs::read_to_string(dir.join(format!("traj-{name}-frictional.csv"))).map_err(err)?;
        let peak = max_abs_deg(&text);
        bounded &= peak <= BOUND_DEG;
        b.push(format!("{name} {peak:.2}"));
    }
    println!("      compare table (reference only, not asserted):");
    println!("      {}", cloudreg::experiment::CompareRow::CSV_HEADER);
    for row in &table.rows {
        println!("      {}", row.to_csv());
    }
    println!("      reference values: chatter 4/3/1 deg, amplitude 11/18/10 deg, transient 5.1 s / 11 s, steady error 0 / 2.6 %");
    check(
        settled && bounded,
        format!("{a}; (b) frictional peak |theta| deg: {} (bound {BOUND_DEG}); (c) table printed", b.join(", ")),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map(|it| {
            it.filter_map(|e| e.ok())
                .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn criterion_10(scratch: &Path) -> Outcome {
    let runs: Vec<(&str, Run)> = vec![
        ("gen-cloud", Box::new(|out| cmd_gen_cloud(&ExperimentConfig::preset("gen-cloud")?, 7, out).map(|_| ()))),
        (
            "simulate",
            Box::new(|out| cmd_simulate(&ExperimentConfig::preset("paper-lti")?, 7, out, true).map(|_| ())),
        ),
        ("decompose", Box::new(|out| cmd_decompose(&ExperimentConfig::preset("decompose")?, out).map(|_| ()))),
        (
            "compare",
            Box::new(|out| cmd_compare(&ExperimentConfig::preset("paper-pendulum")?, 7, out).map(|_| ())),
        ),
        ("stability", Box::new(|out| cmd_stability(out).map(|_| ()))),
        (
            "plot",
            Box::new(|out| {
                cmd_gen_cloud(&ExperimentConfig::preset("gen-cloud")?, 7, out)?;
                cmd_plot(&out.join("drops.csv"), out).map(|_| ())
            }),
        ),
    ];
    let mut names = Vec::new();
    for (name, run) in &runs {
        let (a, b) = (scratch.join(format!("{name}-a")), scratch.join(format!("{name}-b")));
        run(&a).map_err(|e| format!("{name}: {e}"))?;
        run(&b).map_err(|e| format!("{name}: {e}"))?;
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        if sa.is_empty() || sa != sb {
            return Err(format!("{name} artifacts differ between identical runs"));
        }
        names.push(format!("{name} ({} files)", sa.len()));
    }
    Ok(format!("byte-identical reruns: {}", names.join(", ")))
}

fn main() -> ExitCode {
    let scratch = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create scratch dir: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: Vec<Criterion> = vec![
        ("decomposition identity", Box::new(criterion_1)),
        ("weight identity", Box::new(criterion_2)),
        ("relay structure", Box::new(criterion_3)),
        ("vanishing entropy", Box::new(criterion_4)),
        ("forward/backward statistics", Box::new(criterion_5)),
        ("P-matrix checks", Box::new(criterion_6)),
        ("LQ design", Box::new(criterion_7)),
        ("pendulum physics", Box::new(criterion_8)),
        ("pendulum closed loop", Box::new(|| criterion_9(scratch.path()))),
        ("determinism", Box::new(|| criterion_10(scratch.path()))),
    ];
    let mut failed = 0;
    for (idx, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", idx + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", idx + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
