mod error;
mod sweep;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poolcore::model::Request;
use poolcore::sim::{
    generate_demand, load_scenario, read_requests, run_with_demand, write_metrics, write_series, MetricsReport,
    Scenario, SimError, Strategy,
};
use rayon::prelude::*;

use error::CliError;
use sweep::{AxisValues, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "poolcore", version, about = "Simulate batched ridesharing assignment and write metrics as CSV")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario per strategy on a shared request stream.
    Run(ScenarioArgs),
    /// Vary one parameter and run every value with every strategy.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Axis and values, e.g. `lambda=0.25,0.5,0.75`. Axes: fleet_size,
        /// candidates, lambda, batch.
        #[arg(long, value_name = "AXIS=V1,V2,...")]
        sweep: AxisValues,
    },
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario TOML file; the built-in standard day is used without one.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Assignment strategy; repeat to compare strategies on the same demand.
    #[arg(long = "strategy", value_name = "ia|greedy")]
    strategies: Vec<Strategy>,
    #[arg(long, value_name = "N")]
    fleet: Option<usize>,
    /// Weight of operator cost against rider delay, in [0, 1].
    #[arg(long, value_name = "X")]
    lambda: Option<f64>,
    /// Batch period in seconds.
    #[arg(long, value_name = "SECONDS")]
    batch: Option<i64>,
    /// Candidate vehicles per request.
    #[arg(long, value_name = "N")]
    candidates: Option<usize>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Replay requests from CSV instead of generating demand.
    #[arg(long, value_name = "PATH")]
    requests: Option<PathBuf>,
    /// Metrics CSV destination; stdout by default.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write hourly occupancy and vehicle-hours per run.
    #[arg(long, value_name = "PATH")]
    series: Option<PathBuf>,
    /// Report zero batch CPU time so output is byte-for-byte reproducible.
    #[arg(long)]
    no_cpu: bool,
}

impl ScenarioArgs {
    fn scenario(&self) -> Result<Scenario, CliError> {
        let mut s = match &self.config {
            Some(path) => load_scenario(path).map_err(|e| CliError::loading(path, e))?,
            None => Scenario::standard(),
        };
        if let Some(n) = self.fleet {
            s.fleet_size = n;
        }
        if let Some(x) = self.lambda {
            s.batch.lambda = x;
        }
        if let Some(b) = self.batch {
            s.batch.batch_period = b;
        }
        if let Some(n) = self.candidates {
            s.batch.candidates_per_request = Some(n);
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if self.no_cpu {
            s.report_cpu = false;
        }
        s.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(s)
    }

    fn strategies(&self, scenario: &Scenario) -> Vec<Strategy> {
        let mut out: Vec<Strategy> = Vec::new();
        for &s in &self.strategies {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        if out.is_empty() {
            out.push(scenario.strategy);
        }
        out
    }

    /// Generated or replayed requests, shared by every run.
    fn demand(&self, scenario: &Scenario) -> Result<Vec<Request>, CliError> {
        match &self.requests {
            None => Ok(generate_demand(scenario)),
            Some(path) => {
                let file = File::open(path).map_err(|source| CliError::MissingFile { path: path.clone(), source })?;
                read_requests(std::io::BufReader::new(file), &scenario.batch)
                    .map_err(|e| CliError::Malformed { path: path.clone(), message: e.to_string() })
            }
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("POOLCORE_THREADS") {
        let n =
            value.trim().parse::<usize>().ok().filter(|n| *n > 0).ok_or_else(|| {
                CliError::Usage(format!("POOLCORE_THREADS must be a positive integer, got `{value}`"))
            })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

/// Runs every scenario on the same demand, in parallel, keeping input order.
fn run_all(scenarios: Vec<Scenario>, demand: &[Request]) -> Result<Vec<Result<MetricsReport, SimError>>, CliError> {
    let pool = thread_pool()?;
    Ok(pool.install(|| scenarios.par_iter().map(|s| run_with_demand(s, demand.to_vec())).collect()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => File::create(p)
            .map(|f| Box::new(std::io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::Output { path: p.display().to_string(), message: e.to_string() }),
    }
}

fn output_error(path: Option<&Path>, err: impl std::fmt::Display) -> CliError {
    let path = path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    CliError::Output { path, message: err.to_string() }
}

fn write_series_file(path: &Path, reports: &[&MetricsReport]) -> Result<(), CliError> {
    let rows: Vec<_> = reports.iter().flat_map(|r| r.series_rows()).collect();
    let file = open_output(Some(path))?;
    write_series(file, &rows).map_err(|e| output_error(Some(path), e))
}

fn cmd_run(args: &ScenarioArgs) -> Result<(), CliError> {
    let base = args.scenario()?;
    let demand = args.demand(&base)?;
    let scenarios: Vec<Scenario> =
        args.strategies(&base).into_iter().map(|strategy| Scenario { strategy, ..base.clone() }).collect();
    let mut reports = Vec::new();
    for result in run_all(scenarios, &demand)? {
        reports.push(result.map_err(CliError::Run)?);
    }
    let rows: Vec<_> = reports.iter().map(|r| r.row.clone()).collect();
    let out = args.out.as_deref();
    write_metrics(open_output(out)?, &rows).map_err(|e| output_error(out, e))?;
    if let Some(path) = &args.series {
        write_series_file(path, &reports.iter().collect::<Vec<_>>())?;
    }
    Ok(())
}

/// Writes the whole table even when some runs fail, then reports the
/// failure through the exit code.
fn cmd_sweep(args: &ScenarioArgs, axis: AxisValues) -> Result<(), CliError> {
    let base = args.scenario()?;
    let strategies = args.strategies(&base);
    let demand = args.demand(&base)?;
    let spec = SweepSpec::new(base, axis, strategies)?;
    let results = run_all(spec.runs().into_iter().map(|(_, _, s)| s).collect(), &demand)?;
    let metrics: Vec<_> =
        results.iter().map(|r| r.as_ref().map(|rep| rep.row.clone()).map_err(|e| e.to_string())).collect();
    let rows = sweep::table(&spec, &metrics);

    let out = args.out.as_deref();
    let mut csv = csv::Writer::from_writer(open_output(out)?);
    for row in &rows {
        csv.serialize(row).map_err(|e| output_error(out, e))?;
    }
    csv.flush().map_err(|e| output_error(out, e))?;
    if let Some(path) = &args.series {
        write_series_file(path, &results.iter().filter_map(|r| r.as_ref().ok()).collect::<Vec<_>>())?;
    }
    let failures = rows.iter().filter(|r| !r.error.is_empty()).count();
    match failures {
        0 => Ok(()),
        n => Err(CliError::Run(SimError::Invariant(format!("{n} of {} sweep runs failed", results.len())))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep { scenario, sweep } => cmd_sweep(scenario, sweep.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("poolcore: {e}");
            e.exit_code()
        }
    }
}
