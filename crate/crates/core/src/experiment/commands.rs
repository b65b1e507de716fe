use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{
    lq_for, BuiltController, CloudControllerSpec, ControllerSpec, ExperimentConfig, PlantSpec,
};
use super::svg::{Chart, Series};
use crate::analysis::{compute_metrics, stability_report, ResponseMetrics, StabilityReport};
use crate::cloud::{backward_estimate_normal, backward_mean, forward_drops, write_drops_csv, NormalEstimate, TriangleCloud};
use crate::controller::{infer, ControllerConfig, Mode, Shape, TraceRow};
use crate::decomposition::{global_term, local_term, relay_table, verify_theorem1, Theorem1Summary};
use crate::error::{Error, Result};
use crate::plant::{simulate_closed_loop, StateFeedback, Trajectory};
use crate::rng::RandomSource;

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes the config actually used, with the effective seed.
fn write_resolved(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<PathBuf> {
    let resolved = ExperimentConfig { seed, ..cfg.clone() };
    write(out, "resolved.toml", &resolved.to_toml()?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenCloudSummary {
    pub ex: f64,
    pub en1: f64,
    pub en2: f64,
    pub he: f64,
    pub drops: usize,
    pub seed: u64,
    pub backward_mean: f64,
    /// `(en1 + en2) / 2 / sqrt(k)`
    pub standard_error: f64,
    pub normal_estimate: Option<NormalEstimate>,
}

impl GenCloudSummary {
    pub fn line(&self) -> String {
        format!(
            "backward_mean = {:.6} (ex = {}, k = {}, standard error {:.6})",
            self.backward_mean, self.ex, self.drops, self.standard_error
        )
    }
}

/// Forward drops to `drops.csv` plus `summary.json`.
pub fn cmd_gen_cloud(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<GenCloudSummary> {
    let spec = cfg.cloud.unwrap_or_default();
    let cloud = TriangleCloud::new(spec.ex, spec.en1, spec.en2, spec.he)?;
    let mut rng = RandomSource::new(seed);
    let drops = forward_drops(&cloud, spec.drops, &mut rng)?;
    let mut csv = Vec::new();
    write_drops_csv(&drops, &mut csv)?;
    write(out, "drops.csv", &String::from_utf8_lossy(&csv))?;
    let summary = GenCloudSummary {
        ex: spec.ex,
        en1: spec.en1,
        en2: spec.en2,
        he: spec.he,
        drops: spec.drops,
        seed,
        backward_mean: backward_mean(&drops)?,
        standard_error: 0.5 * (spec.en1 + spec.en2) / (spec.drops as f64).sqrt(),
        normal_estimate: backward_estimate_normal(&drops).ok(),
    };
    write(out, "summary.json", &to_json(&summary)?)?;
    let resolved = ExperimentConfig {
        cloud: Some(spec),
        ..cfg.clone()
    };
    write_resolved(&resolved, seed, out)?;
    Ok(summary)
}

/// Files produced by one closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunArtifact {
    pub trajectory_csv: PathBuf,
    pub metrics_json: PathBuf,
    pub plot_svg: Option<PathBuf>,
    pub trace_csv: Option<PathBuf>,
    pub resolved_config: PathBuf,
    pub seed: u64,
    pub metrics: ResponseMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SimulationReport<'a> {
    plant: &'a str,
    controller: &'a str,
    seed: u64,
    /// `deg` for the pendulum angle, otherwise the plant's output units.
    units: &'a str,
    metrics: ResponseMetrics,
    final_output: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lq_gain: Option<Vec<f64>>,
}

fn output_series(traj: &Trajectory, degrees: bool) -> (Vec<f64>, Vec<f64>) {
    let scale = |v: &Vec<f64>| -> Vec<f64> {
        if degrees {
            v.iter().map(|x| x.to_degrees()).collect()
        } else {
            v.clone()
        }
    };
    (scale(&traj.y), scale(&traj.r))
}

fn metrics_for(traj: &Trajectory, band: f64, degrees: bool) -> Result<ResponseMetrics> {
    let m = compute_metrics(traj, band)?;
    Ok(if degrees { m.in_degrees() } else { m })
}

/// Closed-loop run: `trajectory.csv`, `metrics.json`, `trajectory.svg`,
/// `resolved.toml` and, with `trace`, `trace.csv` for cloud controllers.
pub fn cmd_simulate(cfg: &ExperimentConfig, seed: u64, out: &Path, trace: bool) -> Result<RunArtifact> {
    let plant = cfg.require_plant()?.build()?;
    let spec = cfg.require_controller()?;
    let sim = cfg.require_sim()?;
    let mut controller = spec.build(&plant, seed)?;
    if trace {
        if let BuiltController::Cloud(c) = controller {
            controller = BuiltController::Cloud(Box::new(c.with_trace()));
        }
    }
    let traj = simulate_closed_loop(&plant, &mut controller, sim)?;
    let degrees = plant.is_pendulum();
    let metrics = metrics_for(&traj, cfg.metrics.band, degrees)?;

    let trajectory_csv = write(out, "trajectory.csv", &traj.to_csv_string())?;
    let report = SimulationReport {
        plant: cfg.require_plant()?.label(),
        controller: spec.label(),
        seed,
        units: if degrees { "deg" } else { "output" },
        metrics,
        final_output: traj.y.last().copied().unwrap_or(0.0),
        lq_gain: match &controller {
            BuiltController::Feedback(StateFeedback { k }, _) => Some(k.clone()),
            _ => None,
        },
    };
    let metrics_json = write(out, "metrics.json", &to_json(&report)?)?;

    let (y, r) = output_series(&traj, degrees);
    let y_label = if degrees { "theta (deg)" } else { "y" };
    let chart = Chart::new(
        format!("{} / {}", report.plant, report.controller),
        "t (s)",
        y_label,
    )
    .with_series(Series::from_columns("y", &traj.t, &y))
    .with_series(Series::from_columns("r", &traj.t, &r));
    let plot_svg = Some(write(out, "trajectory.svg", &chart.render())?);

    let trace_csv = match (&controller, trace) {
        (BuiltController::Cloud(c), true) => {
            let rows = c.trace().unwrap_or(&[]);
            let mut s = String::from(TraceRow::CSV_HEADER);
            s.push('\n');
            for row in rows {
                s.push_str(&row.to_csv());
                s.push('\n');
            }
            Some(write(out, "trace.csv", &s)?)
        }
        (_, true) => {
            log::warn!("--trace only applies to the triangle and normal cloud controllers");
            None
        }
        _ => None,
    };
    let resolved_config = write_resolved(cfg, seed, out)?;
    Ok(RunArtifact {
        trajectory_csv,
        metrics_json,
        plot_svg,
        trace_csv,
        resolved_config,
        seed,
        metrics,
    })
}

fn certifiable_config(cfg: &ExperimentConfig) -> Result<ControllerConfig> {
    match cfg.require_controller()? {
        ControllerSpec::Triangle(c) if c.mode == Mode::Deterministic => c.to_config(Shape::Triangle),
        ControllerSpec::Triangle(_) => Err(Error::Config(
            "decompose certifies the deterministic controller; set controller.mode = \"deterministic\" \
             (the stochastic identity holds only in expectation and is checked by the test suite)"
                .into(),
        )),
        other => Err(Error::Config(format!(
            "decompose needs controller.kind = \"triangle\", got \"{}\"",
            other.label()
        ))),
    }
}

/// Points along the diagonal `Δe* = e*` where the relay steps are visible.
pub fn staircase(cfg: &ControllerConfig, n: usize) -> Result<Vec<[f64; 4]>> {
    let mut rng = RandomSource::new(0);
    let (pe, pde) = (&cfg.e_partition, &cfg.de_partition);
    let (ku, m) = (cfg.output_gain(), cfg.cloud_count());
    (0..n)
        .map(|s| {
            let e = pe.lo + (pe.hi - pe.lo) * s as f64 / (n - 1) as f64;
            let de = pde.lo + (pde.hi - pde.lo) * s as f64 / (n - 1) as f64;
            let row = infer(e, de, cfg, &mut rng)?;
            let u_g = global_term(row.i, row.j, ku, m);
            let u_l = local_term(e, de, row.i, row.j, pe, pde, ku, m, Mode::Deterministic, &mut rng);
            Ok([e, u_g, u_l, cfg.ku * row.u_star])
        })
        .collect()
}

/// `decomposition.json`, `relay.csv`, `staircase.csv` and `staircase.svg`.
pub fn cmd_decompose(cfg: &ExperimentConfig, out: &Path) -> Result<Theorem1Summary> {
    let ccfg = certifiable_config(cfg)?;
    let grid = cfg.decompose.unwrap_or_default();
    let summary = verify_theorem1(&ccfg, grid.grid)?;
    write(out, "decomposition.json", &to_json(&summary)?)?;
    write(out, "relay.csv", &relay_table(&ccfg)?.to_csv())?;

    let points = staircase(&ccfg, 401)?;
    let mut csv = String::from("e_star,u_g,u_l,ku_u\n");
    for p in &points {
        csv.push_str(&format!("{:?},{:?},{:?},{:?}\n", p[0], p[1], p[2], p[3]));
    }
    write(out, "staircase.csv", &csv)?;
    let col = |k: usize| -> Vec<(f64, f64)> { points.iter().map(|p| (p[0], p[k])).collect() };
    let chart = Chart::new(format!("relay and local terms, J = {}", ccfg.j()), "e* = de*", "control")
        .with_series(Series::new("u_G", col(1)))
        .with_series(Series::new("u_L", col(2)))
        .with_series(Series::new("K_u u*", col(3)));
    write(out, "staircase.svg", &chart.render())?;
    let resolved = ExperimentConfig {
        decompose: Some(grid),
        ..cfg.clone()
    };
    write_resolved(&resolved, cfg.seed, out)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub controller: String,
    pub condition: String,
    pub seed: u64,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<ResponseMetrics>,
    /// `|theta|` at the horizon, degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_abs_deg: Option<f64>,
}

impl CompareRow {
    pub const CSV_HEADER: &'static str = "controller,condition,seed,status,settling_time,settled,steady_state_error_pct,overshoot_pct,chatter_width_deg,max_amplitude_deg,final_abs_deg";

    pub fn to_csv(&self) -> String {
        let head = format!("{},{},{}", self.controller, self.condition, self.seed);
        match (&self.metrics, self.final_abs_deg) {
            (Some(m), Some(f)) => format!(
                "{head},ok,{:?},{},{:?},{:?},{:?},{:?},{:?}",
                m.settling_time, m.settled, m.steady_state_error_pct, m.overshoot_pct, m.chatter_width, m.max_amplitude, f
            ),
            _ => format!("{head},failed,,,,,,,"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
}

const CONDITIONS: [(&str, bool); 2] = [("frictionless", false), ("frictional", true)];
const COMPARED: [&str; 3] = ["triangle", "normal", "lq"];

/// Triangle cloud, normal cloud and LQ on the pendulum, each with and
/// without friction, run concurrently. Writes `compare.csv`,
/// `compare.json`, one trajectory CSV per run and an overlay SVG per
/// condition.
pub fn cmd_compare(cfg: &ExperimentConfig, seed: u64, out: &Path) -> Result<CompareTable> {
    let params = match cfg.require_plant()? {
        PlantSpec::Pendulum(p) => *p,
        other => {
            return Err(Error::Config(format!(
                "compare runs on the pendulum, got plant.kind = \"{}\"",
                other.label()
            )))
        }
    };
    let cloud: CloudControllerSpec = match cfg.require_controller()? {
        ControllerSpec::Triangle(c) | ControllerSpec::Normal(c) => *c,
        other => {
            return Err(Error::Config(format!(
                "compare takes its cloud parameters from a triangle or normal [controller], got \"{}\"",
                other.label()
            )))
        }
    };
    let compare = cfg.compare.clone().unwrap_or_default();
    let sim = cfg.require_sim()?;
    let band = cfg.metrics.band;

    let mut jobs = Vec::new();
    for (c_idx, (condition, friction)) in CONDITIONS.iter().enumerate() {
        for (k_idx, name) in COMPARED.iter().enumerate() {
            let index = (c_idx * COMPARED.len() + k_idx) as u64;
            let spec = match *name {
                "triangle" => ControllerSpec::Triangle(cloud),
                "normal" => ControllerSpec::Normal(cloud),
                _ => ControllerSpec::Lq(compare.lq.clone()),
            };
            jobs.push((*name, *condition, params.with_friction(*friction), spec, RandomSource::derive_seed(seed, index)));
        }
    }

    let run = |p: crate::plant::PendulumParams, spec: &ControllerSpec, s: u64| -> Result<Trajectory> {
        let plant = PlantSpec::Pendulum(p).build()?;
        let mut controller = match spec {
            ControllerSpec::Lq(l) => {
                // design on the frictionless linearization in both conditions
                let nominal = PlantSpec::Pendulum(p.with_friction(false)).build()?;
                let d = lq_for(&nominal, l)?;
                BuiltController::Feedback(StateFeedback { k: d.k.iter().copied().collect() }, Box::new(d))
            }
            _ => spec.build(&plant, s)?,
        };
        simulate_closed_loop(&plant, &mut controller, sim)
    };

    let results: Vec<Result<Trajectory>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(_, _, p, spec, s)| scope.spawn(move || run(*p, spec, *s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Config("simulation thread panicked".into()))))
            .collect()
    });

    let mut rows = Vec::new();
    let mut overlays: Vec<Chart> = CONDITIONS
        .iter()
        .map(|(c, _)| Chart::new(format!("pendulum, {c}"), "t (s)", "theta (deg)"))
        .collect();
    for (idx, ((name, condition, _, _, s), result)) in jobs.iter().zip(results).enumerate() {
        let outcome = result.and_then(|traj| {
            let m = metrics_for(&traj, band, true)?;
            Ok((traj, m))
        });
        match outcome {
            Ok((traj, m)) => {
                write(out, &format!("traj-{name}-{condition}.csv"), &traj.to_csv_string())?;
                let (y, _) = output_series(&traj, true);
                overlays[idx / COMPARED.len()].series.push(Series::from_columns(*name, &traj.t, &y));
                rows.push(CompareRow {
                    controller: name.to_string(),
                    condition: condition.to_string(),
                    seed: *s,
                    ok: true,
                    error: None,
                    metrics: Some(m),
                    final_abs_deg: y.last().map(|v| v.abs()),
                });
            }
            Err(e) => {
                log::warn!("{name}/{condition} failed: {e}");
                rows.push(CompareRow {
                    controller: name.to_string(),
                    condition: condition.to_string(),
                    seed: *s,
                    ok: false,
                    error: Some(format!("{}: {e}", e.kind())),
                    metrics: None,
                    final_abs_deg: None,
                });
            }
        }
    }

    let table = CompareTable { rows };
    let mut csv = String::from(CompareRow::CSV_HEADER);
    csv.push('\n');
    for row in &table.rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    write(out, "compare.csv", &csv)?;
    write(out, "compare.json", &to_json(&table)?)?;
    for ((condition, _), chart) in CONDITIONS.iter().zip(&overlays) {
        write(out, &format!("overlay-{condition}.svg"), &chart.render())?;
    }
    let resolved = ExperimentConfig {
        compare: Some(compare),
        ..cfg.clone()
    };
    write_resolved(&resolved, seed, out)?;
    Ok(table)
}

/// `stability.json` for the built-in matrices.
pub fn cmd_stability(out: &Path) -> Result<StabilityReport> {
    let report = stability_report()?;
    write(out, "stability.json", &to_json(&report)?)?;
    Ok(report)
}

/// Column names the plotter knows how to draw against `t` or `e_star`.
const KNOWN_COLUMNS: [&str; 7] = ["y", "u", "r", "u_g", "u_l", "ku_u", "u_star"];

fn known_column(name: &str) -> bool {
    KNOWN_COLUMNS.contains(&name)
        || name
            .strip_prefix('x')
            .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
}

fn csv_error(path: &Path, reason: String) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        reason,
    }
}

enum CsvLayout {
    Drops,
    Relay,
    Trace,
    /// Columns against the first one (`t` or `e_star`).
    Lines,
}

fn layout(header: &[String]) -> Option<CsvLayout> {
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    match cols.as_slice() {
        ["x", "mu"] => Some(CsvLayout::Drops),
        ["i", "j", "u_g"] => Some(CsvLayout::Relay),
        _ if cols.join(",") == TraceRow::CSV_HEADER => Some(CsvLayout::Trace),
        [first, rest @ ..] if (*first == "t" || *first == "e_star") && !rest.is_empty() && rest.iter().all(|c| known_column(c)) => {
            Some(CsvLayout::Lines)
        }
        _ => None,
    }
}

/// Line chart of a CSV written by this crate; returns the SVG path
/// (`<out>/<stem>.svg`).
pub fn cmd_plot(csv: &Path, out: &Path) -> Result<PathBuf> {
    let text = fs::read_to_string(csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| csv_error(csv, "file is empty".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let kind = layout(&header).ok_or_else(|| csv_error(csv, format!("unrecognized header `{}`", header.join(","))))?;
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| csv_error(csv, format!("row {}: {e}", n + 2)))?;
        if row.len() != header.len() {
            return Err(csv_error(
                csv,
                format!("row {} has {} fields, header has {}", n + 2, row.len(), header.len()),
            ));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(csv_error(csv, "no data rows".into()));
    }

    let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    let title = csv.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let chart = match kind {
        CsvLayout::Drops => {
            let mut c = Chart::new(title, "x", "mu").with_series(Series::from_columns("drops", &col(0), &col(1)));
            c.scatter = true;
            c
        }
        CsvLayout::Relay => {
            let mut c = Chart::new(title, "j", "u_G");
            let (i, j, u) = (col(0), col(1), col(2));
            let mut levels: Vec<i64> = i.iter().map(|v| *v as i64).collect();
            levels.dedup();
            for level in levels {
                let pts = (0..rows.len())
                    .filter(|&k| i[k] as i64 == level)
                    .map(|k| (j[k], u[k]))
                    .collect();
                c.series.push(Series::new(format!("i = {level}"), pts));
            }
            c
        }
        CsvLayout::Trace => {
            let idx: Vec<f64> = (0..rows.len()).map(|k| k as f64).collect();
            Chart::new(title, "step", "u*").with_series(Series::from_columns("u_star", &idx, &col(8)))
        }
        CsvLayout::Lines => {
            let x = col(0);
            let mut c = Chart::new(title, header[0].clone(), "value");
            for (k, name) in header.iter().enumerate().skip(1) {
                c.series.push(Series::from_columns(name.clone(), &x, &col(k)));
            }
            c
        }
    };
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into());
    write(out, &format!("{stem}.svg"), &chart.render())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_rejects_unknown_and_empty() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "alpha,beta\n1,2\n").unwrap();
        let e = cmd_plot(&bad, dir.path()).unwrap_err();
        assert_eq!(e.kind(), "csv");
        let empty = dir.path().join("empty.csv");
        fs::write(&empty, "").unwrap();
        let e = cmd_plot(&empty, dir.path()).unwrap_err();
        assert!(e.to_string().contains("empty.csv"), "{e}");
    }

    #[test]
    fn plot_draws_one_polyline_per_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("traj.csv");
        fs::write(&p, "t,x1,x2,y,u,r\n0,1,0,1,0,0\n1,0.5,0,0.5,1,0\n").unwrap();
        let svg = fs::read_to_string(cmd_plot(&p, dir.path()).unwrap()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
    }

    #[test]
    fn decompose_refuses_stochastic() {
        let mut cfg = ExperimentConfig::preset("decompose").unwrap();
        if let Some(ControllerSpec::Triangle(c)) = cfg.controller.as_mut() {
            c.mode = Mode::Stochastic;
        }
        let dir = tempfile::tempdir().unwrap();
        let e = cmd_decompose(&cfg, dir.path()).unwrap_err();
        assert!(e.to_string().contains("deterministic"));
    }

    #[test]
    fn gen_cloud_zero_he_lies_on_curve() {
        let mut cfg = ExperimentConfig::preset("gen-cloud").unwrap();
        cfg.cloud.as_mut().unwrap().he = 0.0;
        let dir = tempfile::tempdir().unwrap();
        let s = cmd_gen_cloud(&cfg, 1, dir.path()).unwrap();
        assert!(s.backward_mean.abs() < 0.06);
        let text = fs::read_to_string(dir.path().join("drops.csv")).unwrap();
        let c = TriangleCloud::new(0.0, 1.0, 1.0, 0.0).unwrap();
        for line in text.lines().skip(1) {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(v[1], c.membership(v[0]));
        }
    }
}
