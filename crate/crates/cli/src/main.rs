use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nonmarkov::config::{MeasuresSection, ValidatedRun};
use nonmarkov::dynamics::{Backend, Trajectory};
use nonmarkov::io::read_trajectory;
use nonmarkov::pipeline::{
    analyze, load, simulate, write_outputs, Analysis, Failure, OutputContext, Overrides, Report, StageResult, Stages,
    EXIT_OK,
};

#[derive(Parser)]
#[command(name = "nonmarkov", version, about = "Simulate open-system dynamics and test them for non-Markovianity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the dynamical map on the grid and write the trajectory file.
    Simulate(Common),
    /// Evaluate the configured witness series.
    Witness(Common),
    /// Compute the witness, RHP and BLP measures.
    Measure(Common),
    /// Check complete positivity of every intermediate propagator.
    Verdict(Common),
    /// Run everything and write all outputs.
    Report(Common),
    /// Validate a trajectory file and analyse it.
    Import(ImportArgs),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct ImportArgs {
    /// Trajectory file.
    path: PathBuf,
    /// Optional configuration supplying witnesses and measure settings; its
    /// model and grid are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search seed (overrides `measures.search.rng_seed`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Analytic,
    Numeric,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            backend: self.backend.map(|b| match b {
                BackendArg::Analytic => Backend::Analytic,
                BackendArg::Numeric => Backend::Numeric,
            }),
            seed: self.seed,
            out: self.out.clone(),
        }
    }
}

fn stages(command: &str) -> Stages {
    match command {
        "simulate" => Stages { witnesses: false, verdict: false, measures: false },
        "witness" => Stages { witnesses: true, verdict: false, measures: false },
        "measure" => Stages { witnesses: false, verdict: false, measures: true },
        "verdict" => Stages { witnesses: false, verdict: true, measures: false },
        _ => Stages::ALL,
    }
}

fn from_config(command: &'static str, args: &Common) -> StageResult<(Report, PathBuf)> {
    let run = load(&args.config, &args.flags.overrides())?;
    let traj = simulate(&run)?;
    let analysis = analyze(&traj, &run.witnesses, &run.config.measures, stages(command))?;
    let ctx = OutputContext {
        command,
        dir: &run.config.output.dir,
        search: &run.config.measures.search,
        backend: Some(run.config.model.backend),
        model: Some(&run.model_desc),
        trajectory: command == "simulate" || (command == "report" && run.config.output.trajectory),
    };
    Ok((write_outputs(&traj, &analysis, &ctx)?, run.config.output.dir.clone()))
}

fn import(args: &ImportArgs) -> StageResult<(Report, PathBuf)> {
    let overrides = args.flags.overrides();
    let (traj, model): (Trajectory, _) =
        read_trajectory(&args.path).map_err(|error| Failure { operation: "import", error })?;
    let run: Option<ValidatedRun> = args.config.as_ref().map(|c| load(c, &overrides)).transpose()?;
    let mut measures = run.as_ref().map_or_else(MeasuresSection::default, |r| r.config.measures);
    if let Some(seed) = overrides.seed {
        measures.search.rng_seed = seed;
    }
    let witnesses = run.as_ref().map_or_else(Vec::new, |r| r.witnesses.clone());
    let analysis: Analysis = analyze(&traj, &witnesses, &measures, Stages::ALL)?;
    let dir = overrides
        .out
        .clone()
        .or_else(|| run.as_ref().map(|r| r.config.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = OutputContext {
        command: "import",
        dir: &dir,
        search: &measures.search,
        backend: None,
        model: model.as_ref(),
        trajectory: false,
    };
    Ok((write_outputs(&traj, &analysis, &ctx)?, dir))
}

fn summary(report: &Report, dir: &std::path::Path) {
    println!("{}: {} nodes on [{}, {}]", report.command, report.grid.nodes, report.grid.t_start, report.grid.t_max);
    if let Some(v) = &report.verdict {
        println!("markovian: {}", v.markovian);
        for iv in &v.violation_intervals {
            println!(
                "  CP violation on [{:.6}, {:.6}], min Choi eigenvalue {:.3e}",
                iv.t_start, iv.t_end, iv.min_eigenvalue
            );
        }
        for iv in &v.excluded_intervals {
            println!("  excluded (singular propagator) [{:.6}, {:.6}]", iv.t_start, iv.t_end);
        }
    }
    if let Some(m) = &report.measures {
        println!("n_witness >= {:.6}", m.n_witness.value);
        match m.n_rhp {
            Some(v) => println!("n_rhp = {v:.6}"),
            None => println!("n_rhp: unavailable (no generator)"),
        }
        println!("n_blp >= {:.6}", m.n_blp.value);
    }
    for w in &report.witnesses {
        println!("witness {} ({}): {} violation interval(s)", w.label, w.kind, w.violation_intervals.len());
    }
    println!("wrote {} file(s) to {}", report.files.len(), dir.display());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (quiet, result) = match &cli.command {
        Command::Simulate(a) => (a.flags.quiet, from_config("simulate", a)),
        Command::Witness(a) => (a.flags.quiet, from_config("witness", a)),
        Command::Measure(a) => (a.flags.quiet, from_config("measure", a)),
        Command::Verdict(a) => (a.flags.quiet, from_config("verdict", a)),
        Command::Report(a) => (a.flags.quiet, from_config("report", a)),
        Command::Import(a) => (a.flags.quiet, import(a)),
    };
    match result {
        Ok((report, dir)) => {
            if !quiet {
                summary(&report, &dir);
            }
            ExitCode::from(EXIT_OK as u8)
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
