use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use drk_core::chain::{build, export, steady_state, Backend, SolveOptions};
use drk_core::metrics::{evaluate, MetricsReport};
use drk_core::scenario::{load_scenario_file, ScenarioConfig};
use drk_core::simulator::simulate;
use drk_core::studio::{
    optimize_k, presets, sweep, validate, AnalyticalSettings, Engine, OptimizerConstraints, SimSettings, SweepSpecDoc,
    SweepTable,
};
use drk_core::{Error, Result};

#[derive(Parser)]
#[command(name = "drk", version, about = "Two-cell channel sharing model: solve, simulate, sweep, optimize")]
struct Cli {
    /// Exit with status 2 when validation fails or no K is feasible.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    ClosedForm,
    Enumeration,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::ClosedForm => Backend::ClosedForm,
            BackendArg::Enumeration => Backend::Enumeration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Analytical,
    MonteCarlo,
    Both,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Analytical => Engine::Analytical,
            EngineArg::MonteCarlo => Engine::MonteCarlo,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct SimArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Measured frames per replication.
    #[arg(long, default_value_t = 1_000_000)]
    frames: u64,
    #[arg(long, default_value_t = 10_000)]
    warmup: u64,
    #[arg(long, default_value_t = 10)]
    reps: u32,
}

impl From<SimArgs> for SimSettings {
    fn from(a: SimArgs) -> Self {
        SimSettings {
            seed: a.seed,
            warmup_frames: a.warmup,
            measure_frames: a.frames,
            replications: a.reps,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the chain, solve for the stationary distribution, report metrics.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "closed-form")]
        backend: BackendArg,
        /// Print the metrics as one CSV row instead of JSON.
        #[arg(long)]
        csv: bool,
        /// Write the transition matrix as CSV.
        #[arg(long)]
        matrix_csv: Option<PathBuf>,
        /// Write the stationary distribution as CSV.
        #[arg(long)]
        pi_csv: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the metrics.
    Simulate {
        scenario: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        csv: bool,
        /// Write the occupancy histogram as CSV.
        #[arg(long)]
        occupancy_csv: Option<PathBuf>,
    },
    /// Run a sweep described by a JSON file.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Search K maximizing U/K under blocking and collision targets.
    Optimize {
        scenario: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long, value_enum, default_value = "analytical")]
        engine: EngineArg,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Cross-check both matrix builders and the simulator.
    Validate {
        scenario: PathBuf,
        /// Skip the Monte Carlo comparison.
        #[arg(long)]
        no_sim: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run the sweeps behind one of the published figures.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
        name: String,
        #[arg(long, value_enum, default_value = "analytical")]
        engine: EngineArg,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        csv: bool,
    },
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn print_metrics_csv(r: &MetricsReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(MetricsReport::CSV_HEADER)?;
    w.write_record(r.csv_fields())?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    backend: Backend,
    states: usize,
    residual: f64,
    metrics: &'a MetricsReport,
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    load_scenario_file(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

/// Returns whether a `--strict` condition was hit.
fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Command::Solve {
            scenario,
            backend,
            csv,
            matrix_csv,
            pi_csv,
        } => {
            let cfg = load(&scenario)?;
            let m = build(&cfg, backend.into())?;
            let pi = steady_state(&m, SolveOptions::default())?;
            let metrics = evaluate(&pi, &cfg)?;
            if let Some(p) = matrix_csv {
                export::write_matrix_csv(&m, create(&p)?)?;
            }
            if let Some(p) = pi_csv {
                export::write_pi_csv(&pi, create(&p)?)?;
            }
            if csv {
                print_metrics_csv(&metrics)?;
            } else {
                print_json(&SolveOutput {
                    backend: m.backend,
                    states: m.len(),
                    residual: pi.residual,
                    metrics: &metrics,
                })?;
            }
            Ok(false)
        }
        Command::Simulate {
            scenario,
            sim,
            csv,
            occupancy_csv,
        } => {
            let cfg = load(&scenario)?;
            let est = simulate(&SimSettings::from(sim).run(&cfg))?;
            if let Some(p) = occupancy_csv {
                let mut w = csv::Writer::from_writer(create(&p)?);
                w.write_record(["a", "b", "c", "d", "frames"])?;
                for (s, n) in &est.histogram {
                    w.write_record([s.a, s.b, s.c, s.d].map(|x| x.to_string()).iter().chain([&n.to_string()]))?;
                }
                w.flush()?;
            }
            if csv {
                print_metrics_csv(&est.report)?;
            } else {
                print_json(&est)?;
            }
            Ok(false)
        }
        Command::Sweep { spec, csv } => {
            let doc = SweepSpecDoc::parse(&std::fs::read_to_string(&spec)?)?;
            let table = sweep(&doc.into_spec()?);
            if csv {
                table.write_csv(io::stdout().lock())?;
            } else {
                print_json(&table)?;
            }
            Ok(false)
        }
        Command::Optimize {
            scenario,
            constraints,
            engine,
            sim,
        } => {
            let cfg = load(&scenario)?;
            let text = std::fs::read_to_string(&constraints)?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let c: OptimizerConstraints = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
            let report = optimize_k(&cfg, &c, engine.into(), &AnalyticalSettings::default(), &sim.into())?;
            print_json(&report)?;
            Ok(report.infeasible)
        }
        Command::Validate { scenario, no_sim, sim } => {
            let cfg = load(&scenario)?;
            let settings = SimSettings::from(sim);
            let report = validate(&cfg, (!no_sim).then_some(&settings))?;
            print_json(&report)?;
            Ok(!report.passed)
        }
        Command::Preset { name, engine, sim, csv } => {
            let specs = presets::preset(&name)?;
            let tables: Vec<SweepTable> = specs
                .into_iter()
                .map(|mut s| {
                    s.engine = engine.into();
                    s.sim = sim.into();
                    sweep(&s)
                })
                .collect();
            if csv {
                drk_core::studio::write_tables_csv(&tables, io::stdout().lock())?;
            } else {
                print_json(&tables)?;
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let strict = cli.strict;
    match run(cli) {
        Ok(true) if strict => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("drk: {e}");
            ExitCode::FAILURE
        }
    }
}
