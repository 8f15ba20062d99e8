use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ncscatter::charfn::charfn_matrix;
use ncscatter::dilation::GradedVectorJson;
use ncscatter::lifting::{data_checks, generate, InstanceData, LiftingInstance, DEFAULT_A_SCALE};
use ncscatter::ncsystem::simulate;
use ncscatter::numkernel::TOL_EQ;
use ncscatter::report::Report;
use ncscatter::suite::verify_all;
use ncscatter::transfer::transfer_series;

#[derive(Parser)]
#[command(name = "ncscatter", version, about = "Coisometric liftings of row contractions at finite Fock depth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random coisometric lifting and write it as JSON.
    Generate(GenerateArgs),
    /// Run every check on an instance; exit 1 if any fails.
    Verify(VerifyArgs),
    /// Transfer function coefficients for all words up to --depth.
    Transfer(SeriesArgs),
    /// Characteristic function blocks for all words up to --depth.
    Charfn(SeriesArgs),
    /// Run the word-indexed system on an input signal.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "dim-c")]
    dim_c: usize,
    #[arg(long = "dim-a")]
    dim_a: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "a-scale", default_value_t = DEFAULT_A_SCALE)]
    a_scale: f64,
    /// Validation tolerance.
    #[arg(long, default_value_t = TOL_EQ, value_parser = positive)]
    tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Tolerance for the lifting invariants.
    #[arg(long, default_value_t = TOL_EQ, value_parser = positive)]
    tol: f64,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = TOL_EQ, value_parser = positive)]
    tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    /// Input signal as a Fock-only graded vector with 𝒟_E coefficients.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = TOL_EQ, value_parser = positive)]
    tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_data(path: &Path) -> Result<InstanceData> {
    InstanceData::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load(path: &Path, tol: f64) -> Result<LiftingInstance> {
    let data = read_data(path)?;
    LiftingInstance::from_data(&data, tol).with_context(|| format!("{} is not a valid lifting", path.display()))
}

fn emit(output: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    match output {
        Some(p) => fs::write(p, s).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(s.as_bytes())?),
    }
}

fn finish(report: &Report, path: Option<&Path>) -> Result<bool> {
    print!("{report}");
    if let Some(p) = path {
        emit(Some(p), report)?;
    }
    Ok(report.all_pass())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate(a) => {
            let inst = generate(a.d, a.dim_c, a.dim_a, a.seed, a.a_scale)?;
            let checks = inst.invariant_checks(a.tol);
            if let Some(bad) = checks.iter().find(|c| !c.pass) {
                bail!("generated instance fails validation: {bad}");
            }
            emit(a.output.as_deref(), &inst)?;
            eprintln!(
                "valid coisometric lifting: d={} dimC={} dimA={} rank D_C={} rank D_E={} seed={}",
                inst.d,
                inst.dim_c,
                inst.dim_a,
                inst.defect_c.rank(),
                inst.defect_e.rank(),
                a.seed
            );
            Ok(true)
        }
        Command::Verify(a) => {
            let data = read_data(&a.instance)?;
            let invariants = Report::new(data_checks(&data, a.tol));
            if !invariants.all_pass() {
                return finish(&invariants, a.report.as_deref());
            }
            let inst = LiftingInstance::from_data(&data, a.tol)?;
            finish(&verify_all(&inst, a.depth)?, a.report.as_deref())
        }
        Command::Transfer(a) => {
            let inst = load(&a.instance, a.tol)?;
            emit(a.output.as_deref(), &transfer_series(&inst, a.depth))?;
            Ok(true)
        }
        Command::Charfn(a) => {
            let inst = load(&a.instance, a.tol)?;
            emit(a.output.as_deref(), &charfn_matrix(&inst, a.depth, a.tol)?)?;
            Ok(true)
        }
        Command::Simulate(a) => {
            let inst = load(&a.instance, a.tol)?;
            let u: GradedVectorJson = serde_json::from_str(&read(&a.input)?)
                .with_context(|| format!("parsing {}", a.input.display()))?;
            let u = u.into_vector(inst.d, inst.defect_e.rank())?;
            emit(a.output.as_deref(), &simulate(&inst, &u, a.depth)?)?;
            Ok(true)
        }
    }
}

fn init_threads() -> Result<()> {
    if let Ok(s) = std::env::var("NCSCATTER_THREADS") {
        let n: usize = s.parse().with_context(|| format!("NCSCATTER_THREADS={s:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
