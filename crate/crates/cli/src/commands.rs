use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use clap::CommandFactory;
use rayon::prelude::*;

use driftlab::bounds::{bound_trials, BOUND_CHECK_HEADER};
use driftlab::identifiability::{
    identifiability_sweep, kernel_contrast_report, PairKind, ScanGrid, SweepRow,
};
use driftlab::surrogate::{
    run_trajectory, FirstOrderState, Initial, LinearDrive, MomentumVariant, Order,
    SecondOrderOptions, SecondOrderState, SurrogateParams, TrajectoryRecord,
};
use driftlab::toy::train::{evaluation_samples, RunOutcome, TRAINING_LOG_HEADER};
use driftlab::toy::{run_seed, GaussianMixture, ResultRow, ResultTable, TrainConfig};
use driftlab::{DiscreteMeasure, Kernel, KernelFamily, Schedule, ScheduleKind};

use crate::args::*;
use crate::plot::{PlotKind, PlotSpec};

/// A checked property failed; maps to exit code 3.
#[derive(Debug)]
pub struct Violation(pub String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn usage(msg: impl std::fmt::Display) -> anyhow::Error {
    Cli::command()
        .error(clap::error::ErrorKind::ArgumentConflict, msg)
        .into()
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn lines<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

fn a_star_line(spec: PlotSpec, tau: f64) -> PlotSpec {
    spec.hline("a* = tau ln 2", tau * std::f64::consts::LN_2)
}

pub fn surrogate(a: &SurrogateArgs) -> Result<()> {
    let params = SurrogateParams::new(a.tau)?;
    let schedule = Schedule::parse(&a.schedule, a.horizon)?;
    let options = if a.order == 1 {
        if a.drive.is_some() || a.variant.is_some() {
            return Err(usage("--drive and --variant apply to --order 2 only"));
        }
        SecondOrderOptions::default()
    } else {
        let drive = match a.drive.as_deref().unwrap_or("surrogate") {
            "surrogate" => LinearDrive::Surrogate,
            d => match d.strip_prefix("frozen:").map(str::parse::<f64>) {
                Some(Ok(eta)) if eta.is_finite() => LinearDrive::Frozen(eta),
                _ => {
                    return Err(usage(format!(
                        "bad --drive `{d}`; use surrogate or frozen:ETA"
                    )))
                }
            },
        };
        let variant = match a.variant.unwrap_or(Variant::HeavyBall) {
            Variant::HeavyBall => MomentumVariant::HeavyBall,
            Variant::Hybrid => MomentumVariant::Hybrid,
        };
        SecondOrderOptions { drive, variant }
    };
    let initial = if a.order == 1 {
        Initial::FirstOrder(FirstOrderState::new(a.a0)?)
    } else {
        Initial::SecondOrder(SecondOrderState::new(a.a0)?)
    };
    let out = &a.common.out;
    prepare(out)?;
    let rec = run_trajectory(&params, initial, &schedule, options)?;
    let main_csv = out.join("trajectory.csv");
    write(&main_csv, &rec.to_csv_string())?;
    let mut baseline_csv = None;
    if a.baseline {
        let free = Schedule::constant(0.0, a.horizon)?;
        let base = run_trajectory(&params, initial, &free, options)?;
        let p = out.join("trajectory_baseline.csv");
        write(&p, &base.to_csv_string())?;
        baseline_csv = Some(p);
    }
    report_terminal(&rec);

    if a.common.svg() {
        let ylabel = if a.order == 1 { "a" } else { "x" };
        let mut spec = PlotSpec::new(
            PlotKind::Trajectory,
            &format!("Surrogate trajectory, tau = {}, a0 = {}", a.tau, a.a0),
            "step",
            ylabel,
        )
        .source(&schedule.to_string(), &main_csv);
        if let Some(p) = &baseline_csv {
            spec = spec.source("constant:0", p);
        }
        a_star_line(spec, a.tau).write(&out.join("trajectory.svg"))?;
        if a.order == 2 {
            PlotSpec::new(
                PlotKind::PhasePortrait,
                "Second-order phase portrait",
                "x",
                "v",
            )
            .source(&schedule.to_string(), &main_csv)
            .write(&out.join("phase_portrait.svg"))?;
        }
    }
    Ok(())
}

fn report_terminal(rec: &TrajectoryRecord) {
    let end = rec.terminal();
    match end.velocity {
        Some(v) => println!(
            "terminal step {}: x = {}, v = {}",
            end.step, end.position, v
        ),
        None => println!("terminal step {}: a = {}", end.step, end.position),
    }
}

pub fn cobweb(a: &CobwebArgs) -> Result<()> {
    let params = SurrogateParams::new(a.tau)?;
    let schedule = Schedule::constant(0.0, a.horizon)?;
    let rec = run_trajectory(
        &params,
        Initial::FirstOrder(FirstOrderState::new(a.a0)?),
        &schedule,
        SecondOrderOptions::default(),
    )?;
    let out = &a.common.out;
    prepare(out)?;

    let hi = (3.0 * a.tau).max(1.2 * a.a0.abs());
    let n = 400;
    let curve = (0..=n).map(|i| {
        let x = hi * i as f64 / n as f64;
        format!("{x},{}", params.surrogate_map(x))
    });
    let curve_csv = out.join("cobweb_curve.csv");
    write(&curve_csv, &lines("a,f_a", curve))?;

    let pos = rec.positions();
    let path = pos
        .windows(2)
        .enumerate()
        .map(|(i, w)| format!("{i},{},{}", w[0], w[1]));
    let path_csv = out.join("cobweb_path.csv");
    write(&path_csv, &lines("step,a,f_a", path))?;

    let (zero, star) = params.fixed_points();
    let fixed_csv = out.join("fixed_points.csv");
    write(
        &fixed_csv,
        &lines("name,a", [format!("zero,{zero}"), format!("a_star,{star}")]),
    )?;
    report_terminal(&rec);

    PlotSpec::new(
        PlotKind::Cobweb,
        &format!("Cobweb of f(a), tau = {}, a0 = {}", a.tau, a.a0),
        "a",
        "f(a)",
    )
    .source("f(a)", &curve_csv)
    .source("cobweb", &path_csv)
    .source("fixed points", &fixed_csv)
    .write(&out.join("cobweb.svg"))
}

pub fn bounds(a: &BoundsArgs) -> Result<()> {
    let params = SurrogateParams::new(a.tau)?;
    let kinds = a
        .schedules
        .split(',')
        .map(|s| s.parse::<ScheduleKind>())
        .collect::<driftlab::Result<Vec<_>>>()?;
    let mut schedule_rows = Vec::new();
    for k in &kinds {
        let s = Schedule::new(*k, a.horizon)?;
        if !s.is_admissible() {
            return Err(driftlab::Error::Precondition(format!(
                "schedule `{s}` is not admissible for the bounds (needs gamma(0) = 0, gamma(T-1) = 1, non-decreasing)"
            ))
            .into());
        }
        for (i, g) in s.values().iter().enumerate() {
            schedule_rows.push(format!("{s},{i},{g}"));
        }
    }
    let out = &a.common.out;
    prepare(out)?;
    let schedules_csv = out.join("schedules.csv");
    write(&schedules_csv, &lines("schedule,step,gamma", schedule_rows))?;

    let rows = bound_trials(
        &params,
        &kinds,
        a.horizon,
        a.eta_max,
        a.trials,
        a.common.seed,
    )?;
    write(
        &out.join("bounds.csv"),
        &lines(BOUND_CHECK_HEADER, rows.iter().map(|r| r.csv_row())),
    )?;
    let mut summary = Vec::new();
    let mut total = 0;
    for (order, name) in [(Order::First, 1), (Order::Second, 2)] {
        let of: Vec<_> = rows.iter().filter(|r| r.order == order).collect();
        let violations = of.iter().filter(|r| !r.holds).count();
        let worst = of
            .iter()
            .map(|r| {
                if r.bound_exp > 0.0 {
                    r.terminal / r.bound_exp
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        total += violations;
        summary.push(format!("{name},{},{violations},{worst}", of.len()));
        println!(
            "order {name}: {} trials, {violations} violations, max terminal/bound {worst:.3e}",
            of.len()
        );
    }
    write(
        &out.join("bounds_summary.csv"),
        &lines("order,trials,violations,max_terminal_over_bound", summary),
    )?;
    if a.common.svg() {
        PlotSpec::new(
            PlotKind::ScheduleComparison,
            "Friction schedules",
            "step",
            "gamma",
        )
        .source("schedules", &schedules_csv)
        .write(&out.join("schedules.svg"))?;
    }
    if total > 0 {
        return Err(Violation(format!("{total} bound violations")).into());
    }
    Ok(())
}

/// Unequal-weight two-atom measure used for the kernel contrast.
fn contrast_measure(dim: usize) -> Result<DiscreteMeasure> {
    let mut y0 = vec![0.0; dim];
    let mut y1 = vec![0.0; dim];
    y0[0] = -1.0;
    y1[0] = 1.1;
    if dim > 1 {
        y1[1] = 0.7;
    }
    Ok(DiscreteMeasure::new(vec![y0, y1], vec![0.3, 0.7])?)
}

pub fn identifiability(a: &IdentifiabilityArgs) -> Result<()> {
    let family: KernelFamily = a.kernel.parse()?;
    let kernel = Kernel::new(family, a.tau)?;
    let grid = ScanGrid::cube(a.dim, 5.0, a.grid)?;
    let out = &a.common.out;
    prepare(out)?;

    let rows = identifiability_sweep(&kernel, a.atoms, &grid, a.trials, a.common.seed)?;
    write(
        &out.join("identifiability.csv"),
        &lines(SweepRow::CSV_HEADER, rows.iter().map(|r| r.csv_row())),
    )?;
    let stats = |kind: PairKind| {
        let gaps: Vec<f64> = rows
            .iter()
            .filter(|r| r.pair == kind)
            .map(|r| r.report.max_drift_norm)
            .collect();
        let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let max = gaps.iter().copied().fold(0.0, f64::max);
        (gaps.len(), min, max)
    };
    let (n_d, min_d, max_d) = stats(PairKind::Distinct);
    let (n_c, min_c, max_c) = stats(PairKind::Control);

    let contrast_grid = ScanGrid::cube(a.dim, 3.0, if a.dim <= 2 { 21 } else { 7 })?;
    let contrast = kernel_contrast_report(a.tau, &contrast_measure(a.dim)?, &contrast_grid)?;
    write(
        &out.join("contrast.csv"),
        &lines(
            driftlab::identifiability::ContrastReport::CSV_HEADER,
            contrast.csv_rows(),
        ),
    )?;

    let mut summary = String::from("check,value,threshold,pass\n");
    let mut failed = Vec::new();
    let mut check = |name: &str, value: f64, threshold: f64, pass: bool| {
        let _ = writeln!(summary, "{name},{value},{threshold},{pass}");
        println!(
            "{name}: {value:.3e} (threshold {threshold:e}) {}",
            if pass { "ok" } else { "FAILED" }
        );
        if !pass {
            failed.push(name.to_string());
        }
    };
    if n_d > 0 {
        check("distinct_min_drift_gap", min_d, 0.0, min_d > 0.0);
    }
    if n_c > 0 {
        check("control_max_drift_gap", max_c, 1e-10, max_c < 1e-10);
    }
    check(
        "contrast_gaussian_max",
        contrast.gaussian_max(),
        1e-4,
        contrast.gaussian_max() < 1e-4,
    );
    check(
        "contrast_laplace_median",
        contrast.laplace_median(),
        1e-3,
        contrast.laplace_median() > 1e-3,
    );
    write(&out.join("identifiability_summary.csv"), &summary)?;
    println!("{n_d} distinct pairs (max gap {max_d:.3e}), {n_c} controls (min gap {min_c:.3e})");
    if !failed.is_empty() {
        return Err(Violation(format!("failed checks: {}", failed.join(", "))).into());
    }
    Ok(())
}

const ABLATION: [&str; 5] = ["linear", "constant:0.5", "quadratic", "sine", "delayed"];

fn parse_seeds(a: &ToyArgs) -> Result<Vec<u64>> {
    match &a.seeds {
        None => Ok(vec![a.common.seed]),
        Some(s) => {
            let seeds = s
                .split(',')
                .map(|t| t.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| usage(format!("bad --seeds `{s}`")))?;
            if seeds.is_empty() {
                return Err(usage("--seeds is empty"));
            }
            Ok(seeds)
        }
    }
}

fn base_config(a: &ToyArgs) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            TrainConfig::from_kv_str(&text)?
        }
        None => TrainConfig::default(),
    };
    for kv in &a.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

pub fn toy(a: &ToyArgs) -> Result<()> {
    let seeds = parse_seeds(a)?;
    let base = base_config(a)?;
    let dm_schedule = ScheduleKind::Constant(0.0);
    let methods: Vec<(String, TrainConfig)> = if a.ablation {
        if a.schedule.is_some() || a.method == Method::Dm {
            return Err(usage(
                "--ablation picks its own schedules; drop --schedule and --method dm",
            ));
        }
        let mut m = vec![(
            "dm".to_string(),
            TrainConfig {
                schedule: dm_schedule,
                ..base.clone()
            },
        )];
        for s in ABLATION {
            let kind: ScheduleKind = s.parse()?;
            m.push((
                format!("dmf:{s}"),
                TrainConfig {
                    schedule: kind,
                    ..base.clone()
                },
            ));
        }
        m
    } else {
        let schedule = match (&a.schedule, a.method) {
            (Some(s), Method::Dm) if s.parse::<ScheduleKind>()? != dm_schedule => {
                return Err(usage(
                    "--method dm is frictionless; use --method dmf to set a schedule",
                ))
            }
            (_, Method::Dm) => dm_schedule,
            (Some(s), Method::Dmf) => s.parse()?,
            (None, Method::Dmf) => base.schedule,
        };
        let name = match a.method {
            Method::Dm => "dm",
            Method::Dmf => "dmf",
        };
        vec![(
            name.to_string(),
            TrainConfig {
                schedule,
                ..base.clone()
            },
        )]
    };
    for (_, cfg) in &methods {
        cfg.validate()?;
    }

    let out = &a.common.out;
    prepare(out)?;
    let config_text: String = methods
        .iter()
        .map(|(name, cfg)| format!("# {name}\n{}\n", cfg.to_kv_string()))
        .collect();
    write(&out.join("config_used.txt"), &config_text)?;

    let jobs: Vec<(usize, u64)> = (0..methods.len())
        .flat_map(|m| seeds.iter().map(move |&s| (m, s)))
        .collect();
    let results: Vec<((usize, u64), driftlab::Result<RunOutcome>)> = jobs
        .par_iter()
        .map(|&(m, s)| ((m, s), run_seed(&methods[m].1, &methods[m].0, s, a.n_eval)))
        .collect();

    let target = GaussianMixture::toy_target();
    let mut rows = Vec::new();
    let mut first_err = None;
    for ((m, seed), res) in results {
        match res {
            Ok(o) => {
                write_run(out, &o, &target, a)?;
                rows.push(ResultRow {
                    method: o.method.clone(),
                    seed,
                    fd: o.fd.fd,
                    n_eval: a.n_eval,
                });
                println!("{} seed {seed}: fd = {:.5}", o.method, o.fd.fd);
            }
            Err(e) => {
                eprintln!("{} seed {seed} failed: {e}", methods[m].0);
                first_err.get_or_insert(e);
            }
        }
    }
    let table = ResultTable { rows };
    write(&out.join("results.csv"), &table.to_csv_string())?;
    for m in table.methods() {
        let (mean, std) = table.summary(&m);
        println!(
            "{m}: mean fd {mean:.5} +- {std:.5} over {} seeds",
            table.fds(&m).len()
        );
    }

    if a.ablation {
        let mut summary = String::from("method,schedule,mean_fd,std_fd,seeds\n");
        let mut sched_rows = Vec::new();
        for (name, cfg) in &methods {
            let (mean, std) = table.summary(name);
            let _ = writeln!(
                summary,
                "{name},{},{mean},{std},{}",
                cfg.schedule,
                table.fds(name).len()
            );
            let s = cfg.schedule()?;
            sched_rows.extend(
                s.values()
                    .iter()
                    .enumerate()
                    .map(|(i, g)| format!("{s},{i},{g}")),
            );
        }
        write(&out.join("ablation.csv"), &summary)?;
        let sched_csv = out.join("schedules.csv");
        write(&sched_csv, &lines("schedule,step,gamma", sched_rows))?;
        if a.common.svg() {
            PlotSpec::new(
                PlotKind::ScheduleComparison,
                "Ablation schedules",
                "step",
                "gamma",
            )
            .source("schedules", &sched_csv)
            .write(&out.join("schedules.svg"))?;
        }
    }
    match first_err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn write_run(out: &Path, o: &RunOutcome, target: &GaussianMixture, a: &ToyArgs) -> Result<()> {
    let dir = out
        .join("runs")
        .join(format!("{}_seed{}", o.method.replace(':', "_"), o.seed));
    prepare(&dir)?;
    write(
        &dir.join("training_log.csv"),
        &lines(TRAINING_LOG_HEADER, o.log.iter().map(|l| l.csv_row())),
    )?;
    let n = a.dump.min(a.n_eval);
    if n == 0 {
        return Ok(());
    }
    let (generated, reference) = evaluation_samples(&o.net, target, n, o.seed)?;
    let dump =
        |set: &driftlab::SampleSet| lines("x,y", set.iter().map(|p| format!("{},{}", p[0], p[1])));
    let gen_csv = dir.join("generated.csv");
    let tgt_csv = dir.join("target.csv");
    write(&gen_csv, &dump(&generated))?;
    write(&tgt_csv, &dump(&reference))?;
    if a.common.svg() {
        PlotSpec::new(
            PlotKind::SampleScatter,
            &format!("{} seed {}: FD {:.4}", o.method, o.seed, o.fd.fd),
            "x",
            "y",
        )
        .source("target", &tgt_csv)
        .source("generated", &gen_csv)
        .write(&dir.join("scatter.svg"))?;
    }
    Ok(())
}
