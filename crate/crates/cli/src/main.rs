//! Command-line front-end: parses curve configs, runs sweeps, resonance
//! searches, transform constructions and verification suites, and emits
//! CSV/JSON artifacts for plotting and regression.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use darboux_core::*;

mod config;
mod verify;

use config::CurveCfg;

/// 17 significant digits: round-trip exact for double precision.
pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug)]
pub(crate) enum CliError {
    /// Bad usage, unreadable or invalid config: exit code 1.
    Config(String),
    /// Numeric failure reported by the library: exit code 2.
    Numeric(Error),
    /// One or more verification checks failed: exit code 2.
    ChecksFailed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "darboux", version, about = "Lightcone-model Darboux transform numerics")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monodromy sweep over a spectral window; CSV output
    Sweep(SweepArgs),
    /// Locate resonance points, optionally on multiple covers; JSON output
    Resonance(ResonanceArgs),
    /// Construct Darboux transforms from lightlike seeds; CSV output
    Transform(TransformArgs),
    /// Run the invariant suite for a curve; JSON report
    Verify(verify::VerifyArgs),
    /// Dump lift and projection tables for debugging; CSV output
    Lift(LiftArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Curve definition JSON file
    #[arg(long)]
    curve: PathBuf,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    mu_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    mu_max: f64,
    /// Number of spectral grid points
    #[arg(long, default_value_t = 500)]
    grid: usize,
    /// Integration steps per period
    #[arg(long, default_value_t = 2048)]
    steps: usize,
}

#[derive(Args)]
struct ResonanceArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    mu_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    mu_max: f64,
    #[arg(long, default_value_t = 1500)]
    grid: usize,
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    /// Largest cover to search (1 searches the base curve only)
    #[arg(long, default_value_t = 1)]
    lmax: u32,
    /// Residual tolerance for accepting a resonance
    #[arg(long, default_value_t = 1e-5)]
    tol_res: f64,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Spectral parameter of the transform
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 2048)]
    steps: usize,
    /// RNG seed for the pseudo-random lightlike seeds
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of pseudo-random seeds
    #[arg(long, default_value_t = 3)]
    num_seeds: usize,
    /// Use the two monodromy eigenvector seeds instead of random ones
    #[arg(long)]
    eigen: bool,
}

#[derive(Args)]
struct LiftArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of parameter samples
    #[arg(long, default_value_t = 512)]
    grid: usize,
}

pub(crate) fn load_curve_from(path: &PathBuf) -> CliResult<(CurveCfg, PolarisedCurve)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: CurveCfg = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid curve config: {e}")))?;
    let curve = config::build_curve(&cfg)?;
    Ok((cfg, curve))
}

fn load_curve(args: &CommonArgs) -> CliResult<(CurveCfg, PolarisedCurve)> {
    load_curve_from(&args.curve)
}

pub(crate) fn write_output(out: &Option<PathBuf>, data: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, data)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(data.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write stdout: {e}")))
        }
    }
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let (_, curve) = load_curve(&args.common)?;
    if args.grid < 2 || args.steps < 16 {
        return Err(CliError::Config("sweep needs --grid >= 2 and --steps >= 16".into()));
    }
    let sw = sweep(&curve, args.mu_min, args.mu_max, args.grid, args.steps)?;
    let mut out = String::from("mu,trace,defect,branch,theta_unwrapped,re_lambda,im_lambda\n");
    for (r, theta) in sw.results.iter().zip(&sw.theta_unwrapped) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt(r.mu),
            fmt(r.matrix.matrix().trace()),
            fmt(r.defect),
            r.branch,
            fmt(*theta),
            fmt(r.lambda.re),
            fmt(r.lambda.im),
        ));
    }
    write_output(&args.common.out, &out)
}

fn cmd_resonance(args: &ResonanceArgs) -> CliResult<()> {
    let (_, curve) = load_curve(&args.common)?;
    if args.grid < 2 || args.steps < 16 || args.lmax < 1 || args.tol_res <= 0.0 {
        return Err(CliError::Config(
            "resonance needs --grid >= 2, --steps >= 16, --lmax >= 1, --tol-res > 0".into(),
        ));
    }
    let sw = sweep(&curve, args.mu_min, args.mu_max, args.grid, args.steps)?;
    let mut points = find_resonance(&sw, &curve, args.steps, args.tol_res)?;
    if args.lmax >= 2 {
        points.extend(find_cover_resonance(&sw, &curve, args.lmax, args.steps, args.tol_res)?);
    }
    points.sort_by(|x, y| x.mu.partial_cmp(&y.mu).unwrap());
    let entries: Vec<serde_json::Value> = points
        .iter()
        .map(|p| {
            serde_json::json!({
                "mu_star": p.mu,
                "cover": p.cover,
                "winding": p.winding,
                "residual": p.residual,
                "recheck_residual_at_2x_steps": p.residual_recheck,
            })
        })
        .collect();
    let text = serde_json::to_string_pretty(&entries)
        .map_err(|e| CliError::Config(format!("serialisation failed: {e}")))?;
    write_output(&args.common.out, &format!("{text}\n"))
}

fn transform_rows(out: &mut String, seed_index: usize, t: &TransformCurve) {
    for (k, s) in t.s_grid.iter().enumerate() {
        let (x1, x2, at_inf) = match t.projected[k] {
            Some([a, b]) => (fmt(a), fmt(b), 0),
            None => ("nan".into(), "nan".into(), 1),
        };
        let v = &t.sections[k];
        out.push_str(&format!(
            "{seed_index},{},{x1},{x2},{at_inf},{},{},{},{},{}\n",
            fmt(*s),
            fmt(v.0[0]),
            fmt(v.0[1]),
            fmt(v.0[2]),
            fmt(v.0[3]),
            fmt(t.closure_residual),
        ));
    }
}

fn cmd_transform(args: &TransformArgs) -> CliResult<()> {
    let (_, curve) = load_curve(&args.common)?;
    if args.steps < 16 {
        return Err(CliError::Config("transform needs --steps >= 16".into()));
    }
    let mut out = String::from(
        "seed_index,s,x1,x2,at_infinity,X0,X1,X2,X3,closure_residual\n",
    );
    if args.eigen {
        let mono = monodromy_extrapolated(&curve, args.mu, args.steps)?;
        let (t1, t2) = closed_transforms_extrapolated(&curve, &mono, args.steps)?;
        transform_rows(&mut out, 0, &t1);
        transform_rows(&mut out, 1, &t2);
    } else {
        for (i, x0) in random_lightlike_seeds(args.num_seeds, args.seed)
            .iter()
            .enumerate()
        {
            let t = parallel_section_extrapolated(&curve, args.mu, x0, args.steps)?;
            transform_rows(&mut out, i, &t);
        }
    }
    write_output(&args.common.out, &out)
}

fn cmd_lift(args: &LiftArgs) -> CliResult<()> {
    let (_, curve) = load_curve(&args.common)?;
    if args.grid < 2 {
        return Err(CliError::Config("lift needs --grid >= 2".into()));
    }
    let mut out = String::from("s,x1,x2,X0,X1,X2,X3,px1,px2\n");
    for k in 0..args.grid {
        let s = curve.period * k as f64 / args.grid as f64;
        let sec = curve.evaluate(s)?;
        let (px1, px2) = match space_forms::project(&sec.lift, &curve.space_form) {
            Ok([a, b]) => (fmt(a), fmt(b)),
            Err(_) => ("nan".into(), "nan".into()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{px1},{px2}\n",
            fmt(s),
            fmt(sec.x[0]),
            fmt(sec.x[1]),
            fmt(sec.lift.0[0]),
            fmt(sec.lift.0[1]),
            fmt(sec.lift.0[2]),
            fmt(sec.lift.0[3]),
        ));
    }
    write_output(&args.common.out, &out)
}

fn run() -> CliResult<()> {
    let cli = Cli::try_parse().map_err(|e| CliError::Config(e.to_string()))?;
    match &cli.cmd {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Resonance(a) => cmd_resonance(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Verify(a) => verify::cmd_verify(a),
        Command::Lift(a) => cmd_lift(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("numeric failure: {e}");
            ExitCode::from(2)
        }
        Err(CliError::ChecksFailed(names)) => {
            eprintln!("failing checks: {names}");
            ExitCode::from(2)
        }
    }
}
