use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lagrome::functionals::{self, ENERGY_NAMES};
use lagrome::maslov::lili_check;
use lagrome::verify::{chart_point, lili_trials, point_report, verify, VerifyOptions};
use lagrome::{flow, Expr, FlowConfig, GridSpec, ImmersionSpec, Suite};
use serde_json::{json, Value};

/// Numerical workbench for Lagrangian submanifolds.
#[derive(Debug, Parser)]
#[command(name = "lagrome", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LAGROME_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run identity checks over the catalog and seeded random graphs.
    Verify(VerifyArgs),
    /// Print the pointwise geometry of one immersion at one point.
    Eval(EvalArgs),
    /// Integrate a functional with two-grid extrapolation.
    Integrate(IntegrateArgs),
    /// Run the sixth-order graph flow from a JSON config.
    Flow(FlowArgs),
    /// Randomized test of the commutator inequality for symmetric matrices.
    Lili(LiliArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Gauss,
    Codazzi,
    Whitney,
    Angle,
    Maslov,
    Surface,
    All,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suites to run (repeatable).
    #[arg(long = "suite", value_enum, default_value = "all")]
    suites: Vec<SuiteArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra graph potential to check (repeatable).
    #[arg(long = "potential")]
    potentials: Vec<String>,
    /// Dimension of the extra potentials (defaults to max(2, variables used)).
    #[arg(long)]
    dim: Option<usize>,
    /// Number of random graph points.
    #[arg(long, default_value_t = 100)]
    points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Graph,
    Plane,
    WhitneySphere,
    WhitneyCp,
    ProductTorus,
}

/// Immersion selection shared by `eval` and `integrate`.
#[derive(Debug, Args)]
struct ImmersionArgs {
    #[arg(long, value_enum)]
    immersion: Option<Kind>,
    /// Full immersion as JSON, e.g. '{"kind":"whitney_sphere","n":2,"radius":1,"translation":[0,0,0,0]}'.
    #[arg(long, conflicts_with = "immersion")]
    spec: Option<String>,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Graph potential φ.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Translation in interleaved real coordinates (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    translation: Option<Vec<f64>>,
    /// Torus radii (comma separated).
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
}

impl ImmersionArgs {
    fn build(&self) -> Result<ImmersionSpec> {
        if let Some(s) = &self.spec {
            let spec: ImmersionSpec = serde_json::from_str(s).context("parsing --spec")?;
            spec.validate()?;
            return Ok(spec);
        }
        let n = self.n;
        let spec = match self.immersion {
            None => bail!("pass --immersion or --spec"),
            Some(Kind::Graph) => {
                let p = self
                    .potential
                    .as_deref()
                    .context("--immersion graph needs --potential")?;
                ImmersionSpec::graph(n, p)?
            }
            Some(Kind::Plane) => ImmersionSpec::graph(n, "0")?,
            Some(Kind::WhitneySphere) => ImmersionSpec::whitney_sphere(
                n,
                self.radius,
                self.translation.clone().unwrap_or_else(|| vec![0.0; 2 * n]),
            )?,
            Some(Kind::WhitneyCp) => ImmersionSpec::whitney_cp(n, self.theta)?,
            Some(Kind::ProductTorus) => {
                ImmersionSpec::product_torus(self.radii.clone().unwrap_or_else(|| vec![1.0; n]))?
            }
        };
        Ok(spec)
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    immersion: ImmersionArgs,
    /// Chart coordinates (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    point: Vec<f64>,
    /// Sphere chart (0 or 1).
    #[arg(long, default_value_t = 0)]
    chart: usize,
    /// Only print these top-level fields (comma separated).
    #[arg(long, value_delimiter = ',')]
    quantities: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FunctionalArg {
    Area,
    Willmore,
    Simons,
    Energy,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    immersion: ImmersionArgs,
    #[arg(long, value_enum)]
    functional: FunctionalArg,
    /// Coarse torus grid nodes per axis.
    #[arg(long, conflicts_with_all = ["polar", "azimuth"])]
    grid: Option<usize>,
    /// Coarse sphere grid: Gauss–Legendre nodes per polar angle.
    #[arg(long, requires = "azimuth")]
    polar: Option<usize>,
    /// Coarse sphere grid: uniform azimuth nodes.
    #[arg(long, requires = "polar")]
    azimuth: Option<usize>,
}

#[derive(Debug, Args)]
struct FlowArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tuple {
    Identity,
    Equality,
}

#[derive(Debug, Args)]
struct LiliArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Evaluate a fixed tuple instead of random trials.
    #[arg(long, value_enum)]
    tuple: Option<Tuple>,
}

fn print(v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        // a closed pipe (`| head`) is not an error worth reporting
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        r => Ok(r?),
    }
}

fn suites(args: &[SuiteArg]) -> Vec<Suite> {
    if args.is_empty() || args.contains(&SuiteArg::All) {
        return Suite::ALL.to_vec();
    }
    let mut out = Vec::new();
    for a in args {
        let s = match a {
            SuiteArg::Gauss => Suite::Gauss,
            SuiteArg::Codazzi => Suite::Codazzi,
            SuiteArg::Whitney => Suite::Whitney,
            SuiteArg::Angle => Suite::Angle,
            SuiteArg::Maslov => Suite::Maslov,
            SuiteArg::Surface => Suite::Surface,
            SuiteArg::All => unreachable!(),
        };
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let mut potentials = Vec::new();
    for src in &args.potentials {
        let e = Expr::parse(src)?;
        let n = args.dim.unwrap_or(e.arity().max(2));
        potentials.push(ImmersionSpec::graph(n, src)?);
    }
    let opts = VerifyOptions {
        seed: args.seed,
        random_points: args.points,
        potentials,
    };
    let report = verify(&suites(&args.suites), &opts)?;
    print(&report)?;
    Ok(if report.passed { 0 } else { 1 })
}

fn cmd_eval(args: &EvalArgs) -> Result<u8> {
    let imm = args.immersion.build()?;
    let p = chart_point(&imm, args.chart, args.point.clone())?;
    let report = point_report(&imm, &p)?;
    let Some(keys) = &args.quantities else {
        print(&report)?;
        return Ok(0);
    };
    let full = serde_json::to_value(&report)?;
    let mut out = serde_json::Map::new();
    for k in keys {
        let v = full.get(k).with_context(|| format!("unknown quantity `{k}`"))?;
        out.insert(k.clone(), v.clone());
    }
    let out = Value::Object(out);
    print(&out)?;
    Ok(0)
}

fn cmd_integrate(args: &IntegrateArgs) -> Result<u8> {
    let imm = args.immersion.build()?;
    let grid = match (args.grid, args.polar, args.azimuth) {
        (Some(m), _, _) => Some(GridSpec::Torus { m }),
        (None, Some(polar), Some(azimuth)) => Some(GridSpec::Sphere { polar, azimuth }),
        _ => None,
    };
    match args.functional {
        FunctionalArg::Area => print(&functionals::area(&imm, grid)?)?,
        FunctionalArg::Willmore => print(&functionals::willmore(&imm, grid)?)?,
        FunctionalArg::Simons => print(&functionals::simons(&imm, grid)?)?,
        FunctionalArg::Energy => {
            let reports = functionals::energy_report(&imm, grid)?;
            debug_assert_eq!(reports.len(), ENERGY_NAMES.len());
            print(&reports)?
        }
    }
    Ok(0)
}

fn cmd_flow(args: &FlowArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let config: FlowConfig = serde_json::from_str(&text).context("parsing flow config")?;
    let result = flow::run_to_dir(&config, &args.out)?;
    print(&result.summary)?;
    Ok(result.summary.exit_code as u8)
}

fn cmd_lili(args: &LiliArgs) -> Result<u8> {
    match args.tuple {
        Some(t) => {
            let (a, b) = match t {
                Tuple::Identity => (
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                ),
                Tuple::Equality => (
                    vec![vec![1.0, 0.0], vec![0.0, -1.0]],
                    vec![vec![0.0, 1.0], vec![1.0, 0.0]],
                ),
            };
            let r = lili_check(&[a, b])?;
            print(&json!({"lhs": r.lhs, "rhs": r.rhs, "holds": r.holds()}))?;
            Ok(0)
        }
        None => {
            let r = lili_trials(args.trials, args.seed)?;
            print(&r)?;
            Ok(if r.failures == 0 { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: configuring {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Integrate(a) => cmd_integrate(a),
        Command::Flow(a) => cmd_flow(a),
        Command::Lili(a) => cmd_lili(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
