//! `meshroute` command line: scenario generation, single solves, the exact
//! oracle, and benchmark plans.
//!
//! Exit codes: 0 success, 2 usage or invalid parameters, 3 no path /
//! unreachable, 4 I/O.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use meshroute::bench::{emit_trace, write_outputs};
use meshroute::{
    build_cost_matrix, run_plan, shortest_path, Algorithm, BenchPlan, CenterMode, Error,
    NetworkScenario, OptimizerParams, Placement, RunResult,
};

#[derive(Parser)]
#[command(
    name = "meshroute",
    version,
    about = "Fuzzy-cost route search for wireless mesh networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file.
    Gen {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value = "grid")]
        placement: Placement,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Radio range in meters.
        #[arg(long, default_value_t = meshroute::topology::DEFAULT_RADIO_RANGE)]
        range: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one optimizer and compare with the oracle; prints JSON.
    Solve {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        source: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        #[arg(long, default_value_t = 50)]
        pop: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the convergence trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value = "weighted-center")]
        center_mode: CenterMode,
        #[arg(long, default_value_t = 1.0)]
        upper_limit: f64,
        #[arg(long, default_value_t = 1.0)]
        max_immigration: f64,
        #[arg(long, default_value_t = 1.0)]
        max_emigration: f64,
        #[arg(long, default_value_t = 0.01)]
        max_mutation: f64,
        #[arg(long, default_value_t = 2)]
        elite_count: usize,
    },
    /// Exact minimum-cost path; prints JSON.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        source: Option<usize>,
        #[arg(long)]
        target: Option<usize>,
    },
    /// Run a benchmark plan and write results, summary and traces.
    Bench {
        /// Plan JSON; omitted fields take defaults.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        include_large: bool,
        #[arg(long)]
        serial_timing: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() || matches!(e, Error::Json(_)) {
        4
    } else if e.is_reachability() {
        3
    } else {
        2
    }
}

fn endpoints(s: &NetworkScenario, source: Option<usize>, target: Option<usize>) -> (usize, usize) {
    (source.unwrap_or(s.source()), target.unwrap_or(s.terminal()))
}

fn print_json(json: serde_json::Result<String>) -> meshroute::Result<()> {
    writeln!(std::io::stdout().lock(), "{}", json?)?;
    Ok(())
}

/// Prefixes I/O failures with the file they concern.
fn in_file(path: &Path) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    }
}

fn run(command: Command) -> meshroute::Result<()> {
    match command {
        Command::Gen {
            nodes,
            placement,
            seed,
            range,
            out,
        } => {
            let scenario = meshroute::generate_scenario(nodes, placement, seed, range)?;
            scenario.write(&out).map_err(in_file(&out))?;
            eprintln!(
                "wrote {} nodes, {} links to {}",
                nodes,
                scenario.links.len(),
                out.display()
            );
        }
        Command::Solve {
            algo,
            scenario,
            source,
            target,
            generations,
            pop,
            seed,
            trace,
            center_mode,
            upper_limit,
            max_immigration,
            max_emigration,
            max_mutation,
            elite_count,
        } => {
            let scenario = NetworkScenario::read(&scenario).map_err(in_file(&scenario))?;
            let (source, target) = endpoints(&scenario, source, target);
            let cm = build_cost_matrix(&scenario)?;
            let oracle = shortest_path(&cm, source, target)?;
            let params = OptimizerParams {
                population_size: pop,
                center_mode,
                upper_limit,
                max_immigration,
                max_emigration,
                max_mutation,
                elite_count,
            };
            let search = params.solve(algo, &cm, source, target, generations, seed)?;
            let result = RunResult::from_search(
                algo,
                scenario.seed,
                seed,
                search,
                oracle.path,
                params,
                scenario.node_count(),
            )?;
            if let Some(path) = trace {
                emit_trace(&result, &path).map_err(in_file(&path))?;
            }
            print_json(serde_json::to_string_pretty(&result))?;
        }
        Command::Oracle {
            scenario,
            source,
            target,
        } => {
            let scenario = NetworkScenario::read(&scenario).map_err(in_file(&scenario))?;
            let (source, target) = endpoints(&scenario, source, target);
            let cm = build_cost_matrix(&scenario)?;
            print_json(serde_json::to_string_pretty(
                &shortest_path(&cm, source, target)?.path,
            ))?;
        }
        Command::Bench {
            plan,
            out,
            include_large,
            serial_timing,
        } => {
            let mut plan = match plan {
                Some(path) => BenchPlan::read(&path).map_err(in_file(&path))?,
                None => BenchPlan::default(),
            };
            plan.include_large |= include_large;
            plan.serial_timing |= serial_timing;
            let results = run_plan(&plan)?;
            write_outputs(&plan, &results, &out).map_err(in_file(&out))?;
            eprintln!("{} runs written to {}", results.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
