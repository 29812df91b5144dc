use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use steplike_ist::asymptotics::{
    check_expansion_residual, default_ladder, expansion_coefficients, reflection_rate, transmission_rate,
};
use steplike_ist::checker::{check_all, check_edge_behavior, check_ic, CheckerTolerances, ConditionReport};
use steplike_ist::io::{comparison_csv, read_potential, read_text, write_output};
use steplike_ist::glm::GlmKernel;
use steplike_ist::pipeline::{kernels, reconstruct_from_kernels, InverseConfig, Reconstruction};
use steplike_ist::{marchenko, DirectConfig, DirectSolver, Error, Potential, SamplingConfig, ScatteringData, Side};

#[derive(Parser)]
#[command(name = "steplike-ist", version, about = "Direct and inverse scattering for steplike potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Half-width of the truncation window.
    #[arg(long, global = true)]
    xmax: Option<f64>,
    /// Momentum cutoff of the continuous-spectrum sampling.
    #[arg(long, global = true)]
    kmax: Option<f64>,
    /// Nyström nodes per GLM solve.
    #[arg(long, global = true)]
    nq: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Tolerance override, NAME=VALUE; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Solve even when the condition checker fails.
    #[arg(long, global = true)]
    force: bool,
    /// Moment index m assumed for data files.
    #[arg(long, global = true, default_value_t = 1)]
    moments: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering data of a potential.
    Direct { potential: PathBuf },
    /// Potential from scattering data.
    Inverse { scattering: PathBuf },
    /// Direct, check and inverse in sequence, with error metrics.
    Roundtrip { potential: PathBuf },
    /// Run the necessary-condition checks on scattering data.
    Check { scattering: PathBuf },
    /// High-energy expansion coefficients and rate fits.
    Asymptotics {
        potential: PathBuf,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Abscissa of the Weyl-function residual.
        #[arg(long, default_value_t = 0.3)]
        x: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Plus)]
        side: SideArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Plus => Side::Plus,
            SideArg::Minus => Side::Minus,
        }
    }
}

struct Settings {
    direct: DirectConfig,
    sampling: SamplingConfig,
    inverse: InverseConfig,
    checker: CheckerTolerances,
    out: PathBuf,
    force: bool,
    moments: usize,
}

enum Failure {
    Lib(Error),
    Checker(ConditionReport),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<Value, Failure>;

fn positive(name: &str, v: f64) -> Result<f64, Error> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
    }
}

fn settings(cli: &Cli) -> Result<Settings, Error> {
    let mut s = Settings {
        direct: DirectConfig::default(),
        sampling: SamplingConfig::default(),
        inverse: InverseConfig::default(),
        checker: CheckerTolerances::default(),
        out: cli.out.clone(),
        force: cli.force,
        moments: cli.moments.max(1),
    };
    if let Some(x) = cli.xmax {
        s.direct.x_inf = positive("--xmax", x)?;
    }
    if let Some(k) = cli.kmax {
        s.sampling.k_max = positive("--kmax", k)?;
    }
    if let Some(n) = cli.nq {
        if n < s.inverse.marchenko.order {
            return Err(Error::InvalidInput(format!("--nq must be at least {}", s.inverse.marchenko.order)));
        }
        s.inverse.marchenko = s.inverse.marchenko.with_nodes(n);
    }
    for t in &cli.tol {
        let (name, val) =
            t.split_once('=').ok_or_else(|| Error::InvalidInput(format!("--tol expects NAME=VALUE, got {t:?}")))?;
        let v: f64 = val.trim().parse().map_err(|_| Error::InvalidInput(format!("--tol {name}: not a number: {val:?}")))?;
        let v = positive(name, v)?;
        match name.trim() {
            "ode_rtol" => s.direct.ode_rtol = v,
            "ode_atol" => s.direct.ode_atol = v,
            "eps_tail" => s.direct.eps_tail = v,
            "eps_res" => s.direct.eps_res = v,
            "residue" => s.direct.residue_tol = v,
            "identity" => s.checker.identity = v,
            "asymptotic" => s.checker.asymptotic = v,
            "window" => s.checker.window = v,
            "consistency" => s.inverse.consistency_tol = v,
            "truncation" => s.inverse.marchenko.truncation = v,
            "condition" => s.inverse.marchenko.max_condition = v,
            "tail" => s.inverse.glm.tail_tolerance = v,
            "jump_exclusion" => s.inverse.jump_exclusion = v,
            other => return Err(Error::InvalidInput(format!("unknown tolerance {other:?}"))),
        }
    }
    Ok(s)
}

fn data_summary(data: &ScatteringData, s: &Settings) -> Value {
    let unitarity = check_ic(data, s.checker.identity);
    let edge = check_edge_behavior(data, s.checker.asymptotic);
    json!({
        "c_minus": data.c_minus,
        "c_plus": data.c_plus,
        "eigenvalues": data.eigenvalues,
        "resonant": data.resonant,
        "gamma_res": data.gamma_res,
        "unitarity_residual": unitarity.residual,
        "edge": edge,
    })
}

fn run_direct(path: &Path, s: &Settings) -> Outcome {
    let potential = read_potential(path)?;
    let data = DirectSolver::new(&potential, s.direct)?.scattering_data(&s.sampling)?;
    write_output(&s.out, "scattering.json", &data.to_json()?)?;
    Ok(data_summary(&data, s))
}

fn screen(data: &ScatteringData, s: &Settings) -> Result<(ConditionReport, (GlmKernel, GlmKernel)), Error> {
    let k = kernels(data, &s.inverse)?;
    let report = check_all(data, (&k.0, &k.1), s.moments, &s.checker);
    write_output(&s.out, "checks.json", &report.to_json())?;
    Ok((report, k))
}

fn write_reconstruction(rec: &Reconstruction, s: &Settings) -> Result<(), Error> {
    write_output(&s.out, "kernel_plus.csv", &rec.kernel_plus.to_csv())?;
    write_output(&s.out, "kernel_minus.csv", &rec.kernel_minus.to_csv())?;
    write_output(&s.out, "recovery.csv", &marchenko::recovery_csv(&rec.plus, &rec.minus))?;
    write_output(&s.out, "potential.csv", &steplike_ist::io::series_csv(("x", "q"), &rec.potential))?;
    let consistency = serde_json::to_string_pretty(&rec.consistency).expect("report serializes");
    write_output(&s.out, "consistency.json", &consistency)
}

fn announce_consistency(rec: &Reconstruction) {
    if !rec.consistency.pass {
        eprintln!(
            "CONSISTENCY FAIL: sup |q- - q+| = {:.3e} exceeds {:.1e} on [{}, {}]",
            rec.consistency.sup, rec.consistency.tolerance, rec.consistency.window.0, rec.consistency.window.1
        );
    }
}

fn gate(report: ConditionReport, s: &Settings) -> Result<ConditionReport, Failure> {
    if report.all_pass() || s.force {
        if !report.all_pass() {
            eprintln!("checker FAIL overridden by --force:\n{}", report.table());
        }
        Ok(report)
    } else {
        Err(Failure::Checker(report))
    }
}

fn run_inverse(path: &Path, s: &Settings) -> Outcome {
    let data = ScatteringData::from_json(&read_text(path)?)?;
    let (report, k) = screen(&data, s)?;
    let report = gate(report, s)?;
    let rec = reconstruct_from_kernels(&data, k, &s.inverse, &[])?;
    write_reconstruction(&rec, s)?;
    announce_consistency(&rec);
    Ok(json!({
        "checks_pass": report.all_pass(),
        "consistency": rec.consistency,
    }))
}

/// sup and L¹ errors on [−5, 5], optionally skipping a band around jumps.
fn error_metrics(p: &Potential, rec: &[(f64, f64)], exclusion: f64) -> (f64, f64) {
    let jumps = p.jump_points();
    let pts: Vec<(f64, f64)> = rec
        .iter()
        .filter(|(x, _)| (-5.0..=5.0).contains(x) && jumps.iter().all(|b| (x - b).abs() > exclusion))
        .map(|&(x, q)| (x, (q - p.value(x)).abs()))
        .collect();
    let sup = pts.iter().fold(0.0f64, |m, (_, e)| m.max(*e));
    let l1 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    (sup, l1)
}

fn run_roundtrip(path: &Path, s: &Settings) -> Outcome {
    let potential = read_potential(path)?;
    let data = DirectSolver::new(&potential, s.direct)?.scattering_data(&s.sampling)?;
    write_output(&s.out, "scattering.json", &data.to_json()?)?;
    let (report, k) = screen(&data, s)?;
    let report = gate(report, s)?;
    let rec = reconstruct_from_kernels(&data, k, &s.inverse, &potential.jump_points())?;
    write_reconstruction(&rec, s)?;
    write_output(&s.out, "comparison.csv", &comparison_csv(&potential, &rec.potential))?;
    announce_consistency(&rec);
    let (sup, l1) = error_metrics(&potential, &rec.potential, 0.0);
    let (sup_away, l1_away) = error_metrics(&potential, &rec.potential, 0.2);
    Ok(json!({
        "direct": data_summary(&data, s),
        "checks_pass": report.all_pass(),
        "consistency": rec.consistency,
        "window": [-5.0, 5.0],
        "sup_error": sup,
        "l1_error": l1,
        "sup_error_away_from_jumps": sup_away,
        "l1_error_away_from_jumps": l1_away,
    }))
}

fn run_check(path: &Path, s: &Settings) -> Outcome {
    let data = ScatteringData::from_json(&read_text(path)?)?;
    let (report, _) = screen(&data, s)?;
    let edge = check_edge_behavior(&data, s.checker.asymptotic);
    Ok(json!({ "all_pass": report.all_pass(), "records": report.records, "edge": edge }))
}

fn run_asymptotics(path: &Path, order: usize, x: f64, side: Side, s: &Settings) -> Outcome {
    let potential = read_potential(path)?;
    let coeffs = expansion_coefficients(&potential, side, order, s.direct.x_inf)?;
    let mut csv = String::from("x");
    (0..=order).for_each(|l| csv.push_str(&format!(",u{l}")));
    (1..=order).for_each(|l| csv.push_str(&format!(",m{l}")));
    csv.push('\n');
    for (i, xi) in coeffs.x.iter().enumerate() {
        csv.push_str(&xi.to_string());
        coeffs.u.iter().chain(&coeffs.m).for_each(|c| csv.push_str(&format!(",{}", c[i])));
        csv.push('\n');
    }
    write_output(&s.out, "coefficients.csv", &csv)?;
    let ladder = default_ladder();
    let residual = if order >= 1 {
        let fit = check_expansion_residual(&potential, side, x, order, &ladder, &s.direct)?;
        write_output(&s.out, "residual.csv", &fit.to_csv())?;
        json!({ "x": x, "slope": fit.slope, "used": fit.used, "pass": fit.pass, "threshold": -(order as f64) / 2.0 + 0.3 })
    } else {
        Value::Null
    };
    let solver = DirectSolver::new(&potential, s.direct)?;
    let t = transmission_rate(&solver, side, &ladder)?;
    write_output(&s.out, "transmission_rate.csv", &t.to_csv())?;
    let r = reflection_rate(&solver, side, potential.smoothness.min(order), &ladder)?;
    write_output(&s.out, "reflection_rate.csv", &r.to_csv())?;
    Ok(json!({
        "side": side.name(),
        "order": order,
        "residual": residual,
        "transmission_slope": t.slope,
        "reflection_rate_slope": r.slope,
        "reflection_rate_bounded": r.slope <= 0.3,
    }))
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("STEPLIKE_IST_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidInput(format!("STEPLIKE_IST_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        log::debug!("using {n} worker threads");
    }
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    let s = settings(cli)?;
    match &cli.command {
        Command::Direct { potential } => run_direct(potential, &s),
        Command::Inverse { scattering } => run_inverse(scattering, &s),
        Command::Roundtrip { potential } => run_roundtrip(potential, &s),
        Command::Check { scattering } => run_check(scattering, &s),
        Command::Asymptotics { potential, order, x, side } => run_asymptotics(potential, *order, *x, (*side).into(), &s),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.to_string();
            eprintln!("{}", json!({ "error": { "code": "usage_error", "message": message.trim_end() } }));
            return ExitCode::from(64);
        }
    };
    match run(&cli) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            // A closed pipe on stdout is not an error of the run.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Lib(e)) => {
            eprintln!("{}", json!({ "error": { "code": e.code(), "message": e.to_string() } }));
            ExitCode::from(1)
        }
        Err(Failure::Checker(report)) => {
            eprintln!("{}", report.table());
            let failed = report.failed();
            let message = format!("condition checks failed: {}; rerun with --force to solve anyway", failed.join(", "));
            eprintln!("{}", json!({ "error": { "code": "checker_failed", "message": message, "failed": failed } }));
            ExitCode::from(2)
        }
    }
}
