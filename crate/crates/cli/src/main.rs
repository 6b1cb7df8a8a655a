//! `gaugeforge`: runs verification suites declared in a TOML file and
//! writes a JSON report.
//!
//! Exit codes: 0 all suites pass, 1 a suite failed, 2 configuration
//! error, 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaugeforge::fields::StencilOrder;
use gaugeforge::nlde::{
    residual_ladder, sample_points, transform_solution, H1Form, NonlinearTermSpec, SolutionMap,
};
use gaugeforge::suite::{execute, RunConfig, SuiteName};
use gaugeforge::transforms::group::{check_equivalence_composition, check_general_composition};
use gaugeforge::transforms::{PhaseVariant, Transform};
use gaugeforge::GaugeError;
use serde::Serialize;

const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Parser)]
#[command(name = "gaugeforge", version, about = "Verification harness for nonlinear gauge transformations of Dirac spinors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected suites and write the JSON report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Report path (overrides `output` in the config); stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suite to run; repeatable (overrides `suites` in the config).
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<SuiteName>,
        /// Phase variant for every equivalence-family transform.
        #[arg(long)]
        variant: Option<PhaseVariant>,
    },
    /// Compose two declared transforms and verify the composite pointwise.
    Compose {
        #[command(flatten)]
        common: Common,
        first: String,
        second: String,
    },
    /// Residual-versus-step table for one declared transform.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Transform to map the source through; the linear equation if absent.
        #[arg(long)]
        transform: Option<String>,
        /// Stencil order (2 or 4); defaults to `solution.order`.
        #[arg(long)]
        order: Option<u8>,
        /// Comma-separated step sizes; defaults to `solution.ladder`.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
        /// Also write the table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        variant: Option<PhaseVariant>,
    },
    /// Print the JSON schema of the run report.
    Schema,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

enum Failure {
    Config(String),
    Internal(String),
}

impl From<GaugeError> for Failure {
    fn from(e: GaugeError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    let mut cfg: RunConfig =
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(seed) = common.seed {
        cfg.check.seed = seed;
    }
    if let Some(n) = common.samples {
        cfg.check.sample_count = n;
    }
    if let Some(tol) = common.tol {
        cfg.check.tolerance = tol;
    }
    Ok(cfg)
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Failure::Internal(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(
    common: &Common,
    out: Option<PathBuf>,
    suites: Vec<SuiteName>,
    variant: Option<PhaseVariant>,
) -> Result<bool, Failure> {
    let mut cfg = load(common)?;
    if !suites.is_empty() {
        cfg.suites = suites;
    }
    if let Some(v) = variant {
        cfg.override_variant(v);
    }
    let out = out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let report = execute(&cfg)?;
    for suite in &report.suites {
        eprintln!("[{}] {}", if suite.passed { "PASS" } else { "FAIL" }, suite.suite);
        for item in &suite.items {
            eprintln!("  {}", item.summary());
        }
    }
    write_json(&report, out.as_deref())?;
    Ok(report.passed)
}

fn find<'a>(ts: &'a [(String, Transform)], name: &str) -> Result<&'a Transform, Failure> {
    ts.iter()
        .find(|(n, _)| n == name)
        .map(|(_, t)| t)
        .ok_or_else(|| Failure::Config(format!("no transform named {name:?}")))
}

fn compose(common: &Common, first: &str, second: &str) -> Result<bool, Failure> {
    let cfg = load(common)?;
    cfg.validate()?;
    let ts = cfg.build_transforms()?;
    let report = match (find(&ts, first)?, find(&ts, second)?) {
        (Transform::Equivalence(a), Transform::Equivalence(b)) => {
            let c = a.compose(b)?;
            println!("a_hat = {}", c.a_hat);
            println!("phi = {}", c.phi);
            println!("rho = {}", c.rho);
            println!("variant = {}", c.variant.name());
            check_equivalence_composition(a, b, &cfg.check)?
        }
        (Transform::General(a), Transform::General(b)) => {
            let c = a.compose(b)?;
            println!("a = {}", c.k.a);
            println!("b = {}", c.k.b);
            for (j, g) in c.g.iter().enumerate() {
                println!("g{j} = {g}");
            }
            check_general_composition(a, b, &cfg.check)?
        }
        _ => {
            return Err(Failure::Config(
                "compose needs two equivalence-family or two general transforms".into(),
            ))
        }
    };
    println!("{}", report.summary());
    Ok(report.passed)
}

#[derive(Serialize)]
struct ConvergenceRow {
    operator: String,
    h: Vec<f64>,
    max_residual: Vec<f64>,
    slope: Option<f64>,
}

fn convergence(
    common: &Common,
    transform: Option<&str>,
    order: Option<u8>,
    ladder: Option<Vec<f64>>,
    variant: Option<PhaseVariant>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut cfg = load(common)?;
    if let Some(v) = variant {
        cfg.override_variant(v);
    }
    if let Some(l) = ladder {
        cfg.solution.ladder = l;
    }
    if let Some(o) = order {
        cfg.solution.order = StencilOrder::try_from(o)?;
    }
    cfg.suites = vec![SuiteName::SolutionMap];
    cfg.validate()?;
    let source = cfg.solution.source()?;
    let settings = cfg.solution_settings();
    let ladder = &cfg.solution.ladder;

    let mut rows = Vec::new();
    match transform {
        None => {
            let points = sample_points(&source, &settings.region, &settings.sampling, Default::default());
            let spec = NonlinearTermSpec::linear().with_mass(source.mass());
            rows.push(("linear".into(), residual_ladder(&source, &spec, &points, ladder, settings.order)));
        }
        Some(name) => {
            let ts = cfg.build_transforms()?;
            let map = match find(&ts, name)? {
                Transform::Equivalence(n) => SolutionMap::Equivalence(n.clone()),
                Transform::Invariant(n) => SolutionMap::Invariant(n.clone()),
                Transform::General(_) => {
                    return Err(Failure::Config(format!("{name:?} has no matching nonlinear operator")))
                }
            };
            let sol = transform_solution(&source, &map, &settings)?;
            eprintln!(
                "certificate: round trip {:.3e}, linear residual {:.3e}, {} points",
                sol.certificate.round_trip, sol.certificate.linear_residual, sol.certificate.points
            );
            let specs = match &map {
                SolutionMap::Equivalence(_) => [PhaseVariant::WithI, PhaseVariant::WithoutI]
                    .map(|v| (format!("H2 {}", v.name()), sol.spec.clone().with_variant(v)))
                    .to_vec(),
                SolutionMap::Invariant(_) => [(H1Form::Derived, "derived"), (H1Form::GammaProduct, "gamma_product")]
                    .map(|(f, l)| (format!("H1 {l}"), sol.spec.clone().with_form(f)))
                    .to_vec(),
            };
            for (label, spec) in specs {
                rows.push((label, residual_ladder(sol.field.as_ref(), &spec, &sol.points, ladder, settings.order)));
            }
            rows.push((
                "untransformed source".into(),
                residual_ladder(sol.source.as_ref(), &sol.spec, &sol.points, ladder, settings.order),
            ));
        }
    }

    println!("{:<24} {:>10} {:>14}", "operator", "h", "max residual");
    let mut table = Vec::new();
    for (label, r) in rows {
        for s in &r.steps {
            println!("{:<24} {:>10.3e} {:>14.6e}", label, s.h, s.max);
        }
        println!(
            "{:<24} slope {} (order {})",
            label,
            r.slope.map_or("n/a".to_string(), |s| format!("{s:.3}")),
            r.order
        );
        table.push(ConvergenceRow {
            operator: label,
            h: r.steps.iter().map(|s| s.h).collect(),
            max_residual: r.steps.iter().map(|s| s.max).collect(),
            slope: r.slope,
        });
    }
    if let Some(path) = out {
        write_json(&table, Some(path))?;
    }
    Ok(())
}

fn threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("GAUGEFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("GAUGEFORGE_THREADS={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<bool, Failure> {
    threads()?;
    match cli.command {
        Command::Run {
            common,
            out,
            suites,
            variant,
        } => run(&common, out, suites, variant),
        Command::Compose { common, first, second } => compose(&common, &first, &second),
        Command::Convergence {
            common,
            transform,
            order,
            ladder,
            out,
            variant,
        } => convergence(&common, transform.as_deref(), order, ladder, variant, out.as_deref()).map(|_| true),
        Command::Schema => {
            print!("{SCHEMA}");
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(Failure::Config(msg))) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
        Err(_) => ExitCode::from(3),
    }
}
