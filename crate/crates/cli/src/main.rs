//! `hdx`: generate weighted simplicial complexes, decompose functions on
//! them, measure walk spectra, and run theorem-check suites driven by a
//! single JSON experiment config.

mod cache;
mod config;
mod runner;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hdx_core::decompose::{bottom_up_recursive, hd_level_set, HdBasis};
use hdx_core::spectral::strip_profile_of_map;
use hdx_core::{
    measure_gamma, st_rank, write_complex, write_complex_path, write_decomposition, HdxError,
    Result, WalkSpec,
};

use config::{ComplexFlags, ExperimentConfig, FunctionFlags, COMPLEX_STREAM, FUNCTION_STREAM};

const EXIT_HELP: &str = "exit codes: 0 success, 1 some check failed, 2 invalid config, \
3 infeasible parameters, 4 numerical failure (singular decomposition system)\n\
env: HDX_CACHE_DIR caches assembled walk operators across runs";

#[derive(Parser)]
#[command(name = "hdx", version, about = "Walk and decomposition experiments on weighted simplicial complexes", after_help = EXIT_HELP)]
struct Cli {
    /// experiment config JSON; flags override file fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// master seed for every stochastic source
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// worker pool size for sweeps (default: available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// output file (generate, decompose, spectrum) or report directory (verify, sweep)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a complex file (stdout unless --out)
    Generate(GenerateArgs),
    /// Decompose a function into level parts and emit the result as JSON
    Decompose(DecomposeArgs),
    /// Measure local expansion and, optionally, walk eigenvalue strips
    Spectrum(SpectrumArgs),
    /// Run the configured checks once and write verdict reports
    Verify(RunArgs),
    /// Run the configured checks over the sweep grid
    Sweep(RunArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// complex family: complete | hypercube | random (defaults to the config's generator)
    family: Option<String>,
    #[command(flatten)]
    complex: ComplexFlags,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    complex: ComplexFlags,
    #[command(flatten)]
    function: FunctionFlags,
    /// bottom-up | hd-level-set
    #[arg(long, default_value = "bottom-up")]
    basis: String,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    complex: ComplexFlags,
    /// also bucket walk eigenvalues into strips: canonical | lower | noise
    #[arg(long)]
    walk: Option<String>,
    /// canonical walk height
    #[arg(long)]
    height: Option<usize>,
    /// noise walk parameter
    #[arg(long)]
    rho: Option<f64>,
    /// walk level (default: top level)
    #[arg(long)]
    level: Option<usize>,
    /// also report the strip rank at this threshold
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    complex: ComplexFlags,
    #[command(flatten)]
    function: FunctionFlags,
    /// replace the config's check list (repeatable; ids run with default parameters)
    #[arg(long = "check")]
    checks: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &HdxError) -> u8 {
    match e {
        HdxError::SingularSystem { .. } => 4,
        HdxError::Infeasible(_) | HdxError::TooManyFaces { .. } => 3,
        HdxError::Io(_) => 1,
        _ => 2,
    }
}

fn real_main(cli: Cli) -> Result<u8> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref())?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    match cli.cmd {
        Cmd::Generate(a) => cmd_generate(cfg, a, cli.out),
        Cmd::Decompose(a) => cmd_decompose(cfg, a, cli.out),
        Cmd::Spectrum(a) => cmd_spectrum(cfg, a, cli.out),
        Cmd::Verify(a) => cmd_run(cfg, a, cli.out, false),
        Cmd::Sweep(a) => cmd_run(cfg, a, cli.out, true),
    }
}

fn require_seed(cfg: &ExperimentConfig, stochastic: bool, what: &str) -> Result<()> {
    if stochastic && cfg.seed.is_none() {
        return Err(HdxError::InvalidParameter(format!(
            "seed required: {what} is enabled"
        )));
    }
    Ok(())
}

fn cmd_generate(mut cfg: ExperimentConfig, a: GenerateArgs, out: Option<PathBuf>) -> Result<u8> {
    if let Some(fam) = a.family {
        cfg.complex.generator = Some(fam);
        cfg.complex.path = None;
    }
    a.complex.apply(&mut cfg.complex);
    require_seed(&cfg, cfg.complex.stochastic(), "the random complex generator")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0) ^ COMPLEX_STREAM);
    let x = cfg.complex.build(None, &mut rng)?;
    match &out {
        Some(path) => write_complex_path(path, &x)?,
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_complex(&mut w, &x)?;
            w.flush()?;
        }
    }
    eprintln!(
        "complex: {} vertices, {}-vertex top faces, {} of them",
        x.num_faces(1),
        x.dim(),
        x.num_faces(x.dim())
    );
    Ok(0)
}

fn cmd_decompose(mut cfg: ExperimentConfig, a: DecomposeArgs, out: Option<PathBuf>) -> Result<u8> {
    a.complex.apply(&mut cfg.complex);
    a.function.apply(&mut cfg.function)?;
    require_seed(&cfg, cfg.complex.stochastic(), "the random complex generator")?;
    require_seed(&cfg, cfg.function.stochastic(), "a stochastic function source")?;
    let seed = cfg.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ COMPLEX_STREAM);
    let x = cfg.complex.build(None, &mut rng)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ FUNCTION_STREAM);
    let f = cfg.function.build(&x, None, &mut rng)?;
    let dec = match a.basis.as_str() {
        "bottom-up" => bottom_up_recursive(&f)?,
        "hd-level-set" | "hd" => hd_level_set(&f)?,
        other => {
            return Err(HdxError::InvalidParameter(format!(
                "unknown basis {other:?} (bottom-up | hd-level-set)"
            )))
        }
    };
    match &out {
        Some(path) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_decomposition(&mut w, &dec)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_decomposition(&mut w, &dec)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
    }
    eprintln!(
        "decomposed level {} into {} parts, residual {:.3e}",
        dec.level,
        dec.g.len(),
        dec.residual
    );
    Ok(0)
}

fn parse_walk(
    name: &str,
    level: usize,
    height: Option<usize>,
    rho: Option<f64>,
) -> Result<WalkSpec> {
    match name {
        "canonical" => Ok(WalkSpec::canonical(level, height.unwrap_or(1))),
        "lower" => Ok(WalkSpec::lower(level)),
        "noise" => WalkSpec::noise(
            level,
            rho.ok_or_else(|| HdxError::InvalidParameter("noise walk needs --rho".into()))?,
        ),
        other => Err(HdxError::InvalidParameter(format!(
            "unknown walk {other:?} (canonical | lower | noise)"
        ))),
    }
}

fn cmd_spectrum(mut cfg: ExperimentConfig, a: SpectrumArgs, out: Option<PathBuf>) -> Result<u8> {
    a.complex.apply(&mut cfg.complex);
    require_seed(&cfg, cfg.complex.stochastic(), "the random complex generator")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0) ^ COMPLEX_STREAM);
    let x = cfg.complex.build(None, &mut rng)?;
    let mut profile = measure_gamma(&x)?;
    match profile.gamma {
        Some(g) => println!("gamma = {g}"),
        None => println!("gamma = n/a"),
    }
    if !profile.disconnected.is_empty() {
        println!("disconnected links: {}", profile.disconnected.len());
    }
    if let Some(walk) = &a.walk {
        let level = a.level.unwrap_or(x.dim());
        let spec = parse_walk(walk, level, a.height, a.rho)?;
        let basis = HdBasis::new(&x, level)?;
        let m = cache::cached_assemble(&x, &spec)?;
        let strip_profile = strip_profile_of_map(&x, &m, &basis)?;
        if let Some(rep) = &strip_profile.strips {
            for s in &rep.strips {
                println!(
                    "strip {}: center {:.6} width {:.3e} count {}",
                    s.index, s.center, s.width, s.count
                );
            }
        }
        if let Some(delta) = a.delta {
            println!(
                "st-rank(delta={delta}) = {}",
                st_rank(&strip_profile, delta)?
            );
        }
        profile.strips = strip_profile.strips;
    }
    if let Some(path) = &out {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &profile).map_err(|e| HdxError::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        w.write_all(b"\n")?;
        w.flush()?;
    }
    Ok(0)
}

fn cmd_run(mut cfg: ExperimentConfig, a: RunArgs, out: Option<PathBuf>, sweep: bool) -> Result<u8> {
    a.complex.apply(&mut cfg.complex);
    a.function.apply(&mut cfg.function)?;
    if !a.checks.is_empty() {
        cfg.checks = a
            .checks
            .iter()
            .map(|id| config::CheckSpec {
                id: id.clone(),
                ..Default::default()
            })
            .collect();
    }
    let out_dir = out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("reports"));
    let summary = runner::run(&cfg, &out_dir, sweep)?;
    Ok(if summary.failed > 0 { 1 } else { 0 })
}
