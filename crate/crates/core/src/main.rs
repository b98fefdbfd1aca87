use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use needsim::calibration::{self, ParamSpace, SearchResult};
use needsim::error::{CalibrationError, ConfigError};
use needsim::scenario::{apply_params_fragment, parse_scenario, print_params};
use needsim::trace::{self, TraceReadError};
use needsim::world::{self, ScenarioConfig};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "needsim", version, about = "Simulate need-driven agents and calibrate their weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace CSV.
    Run(Common),
    /// Fit weight coefficients to generated labeled samples.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Number of labeled samples to generate.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Candidate evaluations.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Search for coefficients that maximise mean survival in a scenario.
    Survival {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        /// Seeded runs per candidate.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Print the salient events of a trace, or of a fresh scenario run.
    Summarize {
        #[command(flatten)]
        common: Common,
        /// Trace CSV to read instead of running a scenario.
        trace: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario horizon.
    #[arg(long)]
    horizon: Option<u64>,
    /// Params fragment applied on top of the scenario.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Trace(#[from] TraceReadError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Calibration(_) | CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Trace(_) | CliError::Csv(_) => 2,
        }
    }

    /// The reader went away, e.g. `needsim run ... | head`.
    fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io { source, .. } => Some(source),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
    }
}

fn config_err(path: &Path) -> impl Fn(ConfigError) -> CliError {
    let path = path.display().to_string();
    move |source| CliError::Config { path: path.clone(), source }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

impl Common {
    fn load(&self) -> Result<Option<ScenarioConfig>, CliError> {
        let Some(path) = &self.scenario else { return Ok(None) };
        let mut cfg = parse_scenario(&read(path)?).map_err(config_err(path))?;
        if let Some(frag) = &self.params {
            apply_params_fragment(&mut cfg, &read(frag)?).map_err(config_err(frag))?;
            cfg.resolve_deltas();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(h) = self.horizon {
            cfg.horizon = h;
        }
        Ok(Some(cfg))
    }

    fn require(&self) -> Result<ScenarioConfig, CliError> {
        self.load()?.ok_or_else(|| CliError::Usage("--scenario is required".into()))
    }

    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn io_err(what: &str) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: what.to_string(), source }
}

/// Writes the candidate log to the sink and the best params to stdout
/// (or to stderr when the log itself went to stdout).
fn report(common: &Common, result: &SearchResult, objective: &str, delta_auto: &[bool; 4]) -> Result<(), CliError> {
    let mut sink = common.sink()?;
    result.write_csv(objective, &mut sink).and_then(|_| sink.flush()).map_err(io_err("candidate csv"))?;
    let fragment = print_params(&result.params, delta_auto);
    let summary = format!("# best {objective} = {}\n{fragment}", result.objective);
    if common.out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.require()?;
            let events = world::run(&cfg);
            let mut sink = common.sink()?;
            trace::write_csv(&events, &mut sink)?;
            sink.flush().map_err(io_err("trace"))?;
        }
        Command::Calibrate { common, samples, budget } => {
            let cfg = common.load()?.unwrap_or_default();
            let set = calibration::generate_samples(common.seed.unwrap_or(cfg.seed), samples);
            let result = calibration::calibrate(
                &set,
                &cfg.hierarchy,
                &ParamSpace::default(),
                budget,
                common.seed.unwrap_or(cfg.seed),
            )?;
            report(&common, &result, "score", &[false; 4])?;
        }
        Command::Survival { common, budget, repeats } => {
            let cfg = common.require()?;
            let result = calibration::survival_optimize(&cfg, &ParamSpace::default(), budget, repeats, cfg.seed)?;
            report(&common, &result, "mean_survival", &cfg.delta_auto)?;
        }
        Command::Summarize { common, trace: path } => {
            let events = match (&path, common.scenario.is_some()) {
                (Some(p), false) => trace::read_csv(File::open(p).map_err(io_err(&p.display().to_string()))?)?,
                (None, true) => world::run(&common.require()?),
                _ => return Err(CliError::Usage("give either a trace file or --scenario".into())),
            };
            let mut sink = common.sink()?;
            for line in trace::summarize(&events) {
                writeln!(sink, "{line}").map_err(io_err("summary"))?;
            }
            sink.flush().map_err(io_err("summary"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
