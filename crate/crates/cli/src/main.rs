use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tvpolar::experiment::{draw_disk_field, run_experiment_with, write_csv_row, CSV_HEADER};
use tvpolar::grid::{div_preimage, divergence, mean_zero_split, GridImage};
use tvpolar::io::{format_image, parse_image, read_polytope};
use tvpolar::oracle::{oracle_clamp, oracle_project, oracle_tv_min};
use tvpolar::{
    clamp_project, project_onto_polar, tv_projected_subgradient, witness_from_triple, ExperimentConfig,
    GridSearchSpec, PolytopeNorm, SubgradientConfig,
};

/// Total variation decomposition and projections onto dual unit balls.
#[derive(Parser)]
#[command(name = "tvpolar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split an image into a bounded-variation part u and an oscillating part v.
    Decompose(DecomposeArgs),
    /// Project a point onto the dual unit ball of a polygonal norm.
    Project {
        polygon: PathBuf,
        /// Coordinates, as separate arguments or comma separated.
        #[arg(required = true, allow_negative_numbers = true, value_delimiter = ',')]
        x0: Vec<f64>,
    },
    /// List the vertex/edge orthogonality triples; exit 2 if there are any.
    CheckUniqueness {
        polygon: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Build a point with a non-unique projection from the first triple.
    Witness {
        polygon: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Multi-start study; writes one CSV row per experiment.
    Experiment(ExperimentArgs),
    /// Brute-force grid references for the exact solvers.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct DecomposeArgs {
    matrix: PathBuf,
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    /// Seed of the random feasible starting field.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop once the best value improves by less than this over 1000 steps.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[arg(long, default_value_t = 4.0)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    /// Write u here instead of standard output.
    #[arg(long)]
    out_u: Option<PathBuf>,
    /// Write v here instead of standard output.
    #[arg(long)]
    out_v: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    starts: usize,
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    #[arg(long, default_value_t = 0.1)]
    margin: f64,
    /// Master seed for all random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit per-start seeds; overrides --starts.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, default_value_t = 5)]
    experiments: usize,
    #[arg(long, default_value_t = 4.0)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write 0 in the wall_ms column so the output is reproducible byte for byte.
    #[arg(long)]
    omit_timing: bool,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[arg(long, default_value_t = 3)]
    rounds: usize,
    #[arg(long)]
    halfwidth: Option<f64>,
}

impl GridArgs {
    fn spec(&self, default_halfwidth: f64) -> Result<GridSearchSpec> {
        Ok(GridSearchSpec::new(
            self.halfwidth.unwrap_or(default_halfwidth),
            self.points,
            self.rounds,
        )?)
    }
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Grid reference for the projection onto the dual unit ball.
    Project {
        polygon: PathBuf,
        #[arg(required = true, allow_negative_numbers = true, value_delimiter = ',')]
        x0: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Grid reference for the clamp onto the l-infinity unit ball.
    Clamp {
        #[arg(required = true, allow_negative_numbers = true, value_delimiter = ',')]
        f: Vec<f64>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Grid reference for the reduced decomposition value (side at most 3).
    TvMin {
        matrix: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

/// Outcome that maps to a nonzero exit code without being an error.
enum Outcome {
    Ok,
    NonUnique,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::NonUnique) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Decompose(args) => decompose(&args),
        Command::Project { polygon, x0 } => {
            let ball = load_polygon(&polygon)?;
            let face = project_onto_polar(&ball, &x0)?;
            let verts: Vec<String> = face.face_vertices.iter().map(|v| point(v)).collect();
            println!(
                "value {}; face: {}; unique: {}",
                num(face.optimal_value),
                verts.join(" "),
                face.is_unique
            );
            Ok(Outcome::Ok)
        }
        Command::CheckUniqueness { polygon, tol } => {
            let ball = load_polygon(&polygon)?;
            let w = ball.w_set(tol);
            if !w.certified {
                eprintln!("note: emptiness is only certified for planar norms");
            }
            if w.is_empty() {
                println!("W is empty: every projection onto the dual ball is unique");
                return Ok(Outcome::Ok);
            }
            for t in &w.triples {
                println!("({}, [{}, {}])", point(&t.x1), point(&t.x2), point(&t.x3));
            }
            Ok(Outcome::NonUnique)
        }
        Command::Witness { polygon, tol } => {
            let ball = load_polygon(&polygon)?;
            let w = ball.w_set(tol);
            let Some(first) = w.triples.first() else {
                bail!("{}: W is empty, every projection is unique", polygon.display());
            };
            let inst = witness_from_triple(&ball, first)?;
            println!("x0 {}", point(&inst.x0));
            println!("w1 {}", point(&inst.w1));
            println!("w2 {}", point(&inst.w2));
            println!("u1 {}", point(&inst.u1));
            println!("u2 {}", point(&inst.u2));
            println!("r {}", num(inst.r));
            println!("a {}", point(&inst.a));
            Ok(Outcome::Ok)
        }
        Command::Experiment(args) => experiment(&args),
        Command::Oracle(cmd) => oracle(cmd),
    }
}

fn load_polygon(path: &Path) -> Result<PolytopeNorm> {
    read_polytope(path).with_context(|| path.display().to_string())
}

fn load_image(path: &Path) -> Result<GridImage> {
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    parse_image(&text).with_context(|| path.display().to_string())
}

/// Rounds to 9 decimals so that exact results print without float noise.
fn num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

fn point(p: &[f64]) -> String {
    let coords: Vec<String> = p.iter().map(|&x| num(x)).collect();
    format!("({})", coords.join(","))
}

fn write_to(path: Option<&Path>, text: &str, label: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| p.display().to_string()),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "# {label}")?;
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn decompose(args: &DecomposeArgs) -> Result<Outcome> {
    let f = load_image(&args.matrix)?;
    let n = f.n();
    let (fhat, f0) = mean_zero_split(&f);
    // any g0 with div g0 = -f0 gives div(h - g0) = f0 - v with v = -div h
    let g0 = div_preimage(&f0.scale(-1.0))?;
    let h0 = draw_disk_field(n, &mut ChaCha8Rng::seed_from_u64(args.seed));
    let cfg = SubgradientConfig {
        max_iters: args.iters,
        step: args.step,
        exponent: args.exponent,
        seed: args.seed,
        tolerance: args.tol,
        ..Default::default()
    };
    let run = tv_projected_subgradient(&g0, &cfg, &h0)?;
    let v = divergence(&run.h).scale(-1.0);
    let u = f.sub(&v);
    eprintln!(
        "mean {}; tv(u) {:e}; iterations {}",
        fhat.get(0, 0),
        run.value,
        run.iterations
    );
    write_to(args.out_u.as_deref(), &format_image(&u), "u")?;
    write_to(args.out_v.as_deref(), &format_image(&v), "v")?;
    Ok(Outcome::Ok)
}

fn experiment(args: &ExperimentArgs) -> Result<Outcome> {
    let cfg = ExperimentConfig {
        n: args.n,
        num_starts: args.starts,
        iters: args.iters,
        margin: args.margin,
        master_seed: args.seed,
        experiment_count: args.experiments,
        step: args.step,
        exponent: args.exponent,
        start_seeds: args.seeds.clone(),
    };
    cfg.validate()?;
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| p.display().to_string())?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "{CSV_HEADER}")?;
    out.flush()?;
    let report = run_experiment_with(&cfg, |rec| write_csv_row(&mut out, rec, args.omit_timing))?;
    let monotone = report.experiments.iter().all(|e| e.traces_nonincreasing);
    eprintln!(
        "max diameter {:e}; traces nonincreasing: {monotone}; {} ms",
        report.max_diameter(),
        report.wall_ms
    );
    Ok(Outcome::Ok)
}

fn oracle(cmd: OracleCommand) -> Result<Outcome> {
    match cmd {
        OracleCommand::Project { polygon, x0, grid } => {
            let ball = load_polygon(&polygon)?;
            let halfwidth = x0.iter().fold(1.0_f64, |m, x| m.max(x.abs())) * 2.0;
            let min = oracle_project(&ball, &x0, &grid.spec(halfwidth)?)?;
            let exact = project_onto_polar(&ball, &x0)?;
            println!("oracle value {:e} (tolerance {:e})", min.value, min.tolerance);
            println!("exact value {:e}", exact.optimal_value);
            let worst = min
                .samples
                .iter()
                .map(|s| exact.distance_to(s))
                .fold(0.0, f64::max);
            println!(
                "near-optimal samples {}; farthest from exact face {:e}",
                min.samples.len(),
                worst
            );
        }
        OracleCommand::Clamp { f, grid } => {
            let min = oracle_clamp(&f, &grid.spec(1.0)?)?;
            println!("oracle value {:e} (tolerance {:e})", min.value, min.tolerance);
            if let Some(best) = min.samples.first() {
                println!("oracle point {}", point(best));
            }
            println!("exact point {}", point(&clamp_project(&f)));
        }
        OracleCommand::TvMin { matrix, grid } => {
            let f = load_image(&matrix)?;
            let (_, f0) = mean_zero_split(&f);
            let spec = match grid.halfwidth {
                None if grid.points == 41 && grid.rounds == 3 => GridSearchSpec::for_tv_min(f.n()),
                _ => grid.spec(1.0)?,
            };
            let min = oracle_tv_min(&f0, &spec)?;
            println!("oracle value {:e} (tolerance {:e})", min.value, min.tolerance);
            println!("near-optimal images {}", min.samples.len());
        }
    }
    Ok(Outcome::Ok)
}
