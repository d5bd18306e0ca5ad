use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use replan::bench::{self, TrialConfig};
use replan::{Algorithm, BenchError, NnBackend, Scenario, ScenarioError};

#[derive(Parser)]
#[command(name = "replan-bench", version, about = "Run and plot replanning benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PlanningArgs {
    /// Planner iterations per tick
    #[arg(long, default_value_t = TrialConfig::default().iterations_per_tick)]
    iterations: u32,
    /// Budget each tick by the scenario's wall-clock allowance instead of iterations
    #[arg(long)]
    wall_clock: bool,
    /// Use a uniform grid of this cell size for nearest-neighbour queries
    #[arg(long)]
    grid_cell: Option<f64>,
}

impl PlanningArgs {
    fn config(&self) -> TrialConfig {
        TrialConfig {
            iterations_per_tick: self.iterations,
            wall_clock: self.wall_clock,
            nn_backend: self
                .grid_cell
                .map_or(NnBackend::Linear, |cell| NnBackend::Grid { cell }),
            ..TrialConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded batch and write raw and summary CSVs
    Run {
        /// Scenario file, or the name of a bundled scenario
        #[arg(long)]
        scenario: String,
        #[arg(long = "algo", required = true, num_args = 1..)]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write an SVG trace of each algorithm's first trial
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        planning: PlanningArgs,
    },
    /// Re-run one trial from a raw CSV and plot it
    Replay {
        #[arg(long)]
        raw: PathBuf,
        /// Zero-based row index in the raw CSV
        #[arg(long)]
        trial: usize,
        #[arg(long)]
        svg: PathBuf,
        /// Scenario file when the row does not name a bundled scenario
        #[arg(long)]
        scenario: Option<String>,
        #[command(flatten)]
        planning: PlanningArgs,
    },
    /// Check a scenario file
    Validate {
        #[arg(long)]
        scenario: String,
    },
}

fn load_scenario(arg: &str) -> Result<Scenario, ScenarioError> {
    let path = std::path::Path::new(arg);
    if !path.exists() {
        if let Ok(s) = Scenario::bundled(arg) {
            return Ok(s);
        }
    }
    Scenario::load(path)
}

fn create(path: &std::path::Path) -> Result<File, BenchError> {
    File::create(path).map_err(|e| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn run(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::Run {
            scenario,
            algorithms,
            runs,
            seed,
            workers,
            out,
            trace,
            planning,
        } => {
            if runs == 0 {
                return Err(BenchError::Usage("--runs must be at least 1".into()));
            }
            let sc = load_scenario(&scenario)?;
            let cfg = planning.config();
            fs::create_dir_all(&out).map_err(io_err(&out))?;
            let result = bench::run_batch(&sc, &algorithms, runs, seed, workers, &cfg);
            let raw = out.join(format!("{}_raw.csv", sc.name));
            bench::write_raw(&result.trials, create(&raw)?)?;
            let summary = out.join(format!("{}_summary.csv", sc.name));
            bench::write_summaries(&result.summaries, create(&summary)?)?;
            if trace {
                for &a in &algorithms {
                    let (_, t) = bench::run_trial_traced(&sc, a, seed, &cfg);
                    bench::write_svg(&t, &out.join(format!("{}_{}_seed{}.svg", sc.name, a, seed)))?;
                }
            }
            print!("{}", bench::format_table(&result.summaries));
            println!("wrote {} and {}", raw.display(), summary.display());
            Ok(())
        }
        Command::Replay {
            raw,
            trial,
            svg,
            scenario,
            planning,
        } => {
            let rows = bench::read_raw_file(&raw)?;
            let row = rows
                .get(trial)
                .ok_or_else(|| BenchError::Usage(format!("trial {trial} out of range ({} rows)", rows.len())))?;
            let sc = match scenario {
                Some(s) => load_scenario(&s)?,
                None => Scenario::bundled(&row.scenario)?,
            };
            let (m, t) = bench::run_trial_traced(&sc, row.algorithm, row.seed, &planning.config());
            bench::write_svg(&t, &svg)?;
            if (m.success, m.collision_checks, m.nn_lookups) != (row.success, row.collision_checks, row.nn_lookups) {
                eprintln!("warning: replay differs from the recorded row (different planning settings?)");
            }
            println!("wrote {}", svg.display());
            Ok(())
        }
        Command::Validate { scenario } => {
            let sc = load_scenario(&scenario)?;
            println!(
                "{}: ok ({} walls, {} obstacles, {} ticks)",
                sc.name,
                sc.walls.len(),
                sc.obstacles.len(),
                sc.max_ticks()
            );
            Ok(())
        }
    }
}

fn exit_code(e: &BenchError) -> u8 {
    match e {
        BenchError::UnknownAlgorithm(_) | BenchError::Usage(_) => 1,
        BenchError::Scenario(ScenarioError::Io { .. }) => 3,
        BenchError::Scenario(ScenarioError::UnknownBundled(_)) => 1,
        BenchError::Scenario(_) => 2,
        BenchError::Io { .. } | BenchError::Csv(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
