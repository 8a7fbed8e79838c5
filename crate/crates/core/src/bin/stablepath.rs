// Copyright 2026 The stablepath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stablepath::attack::{parse_attacks, AttackSet};
use stablepath::engine::{
    parse_schedule, run, FairRandomSchedule, InitialConfig, Outcome, ParsedSchedule,
    ScheduleSource, Simulation, StopCondition, TraceFormat,
};
use stablepath::graph::{parse_topology, validate, AsGraph, Mode};
use stablepath::harness::{
    bad_gadget_pre_attack, bad_gadget_scenario, predict, random_initial_config, run_experiment,
    run_sweep, CellLimits, ExperimentReport, Family,
};
use stablepath::policy::{
    apply_overrides, make_commercial_profile, make_shortest_path_profile, ExportChoice,
    IntraClassOrder,
};
use stablepath::Instance;

#[derive(Parser)]
#[command(
    name = "stablepath",
    version,
    about = "Path-vector routing under fixed-route attackers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Ndjson,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileKind {
    ShortestPath,
    Commercial,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    None,
    Converge,
    Oscillate,
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    attack: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "shortest-path")]
    profile: ProfileKind,
    /// Ranking overrides (`rank` / `export` lines).
    #[arg(long)]
    rankings: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    tie_seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check a topology file.
    Validate {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long, value_enum, default_value = "shortest-path")]
        profile: ProfileKind,
    },
    /// Run the dynamics on one instance and print the trace.
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Schedule file; a seeded fair schedule is used without one.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Start from a random consistent configuration drawn with this seed.
        #[arg(long)]
        random_start: Option<u64>,
        #[arg(long)]
        rounds_max: Option<u32>,
        #[arg(long, default_value_t = 1_000_000)]
        events_max: u64,
        #[arg(long, value_enum, default_value = "none")]
        expect: Expect,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the stable assignment and per-node round bounds.
    Oracle {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Random-instance sweep checked against the oracle.
    Sweep {
        #[arg(long, value_enum)]
        family: ProfileKind,
        /// Node count (shortest-path) or hierarchy depth (commercial).
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        attackers: usize,
        #[arg(long, default_value_t = 0.25)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 3)]
        configs: usize,
        #[arg(long)]
        rounds_max: Option<u32>,
        #[arg(long, default_value_t = 200_000)]
        events_max: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// The bundled oscillation scenario, with and without the attack.
    Gadget {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Input problems map to exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn mode_of(kind: ProfileKind) -> Mode {
    match kind {
        ProfileKind::ShortestPath => Mode::ShortestPath,
        ProfileKind::Commercial => Mode::Commercial,
    }
}

fn load_instance(args: &InstanceArgs) -> Result<Instance, InputError> {
    let graph: AsGraph = parse_topology(&read(&args.topology)?)?;
    let mut profile = match args.profile {
        ProfileKind::ShortestPath => {
            make_shortest_path_profile(&graph, args.tie_seed, ExportChoice::All)
        }
        ProfileKind::Commercial => {
            make_commercial_profile(&graph, args.tie_seed, IntraClassOrder::PreferShorter)?
        }
    };
    if let Some(path) = &args.rankings {
        apply_overrides(&mut profile, &graph, &read(path)?)?;
    }
    let attacks = match &args.attack {
        Some(path) => parse_attacks(&graph, &read(path)?)?,
        None => AttackSet::silent(&graph),
    };
    Ok(Instance::new(graph, profile, attacks)?)
}

/// Prints `text`; the report file, when asked for, always gets `ndjson`.
fn emit(
    text: &str,
    ndjson: impl FnOnce() -> String,
    report: Option<&Path>,
) -> Result<(), InputError> {
    print!("{text}");
    match report {
        Some(path) => {
            fs::write(path, ndjson()).map_err(|e| InputError(format!("{}: {e}", path.display())))
        }
        None => Ok(()),
    }
}

fn render_report(report: &ExperimentReport, format: Format) -> String {
    match format {
        Format::Ndjson => report.to_ndjson(),
        Format::Text => {
            let mut out = String::new();
            for c in &report.cells {
                out += &format!(
                    "scenario={} instance={} schedule={} config={} outcome={} round={} bound={} oracle={} {}\n",
                    c.scenario,
                    c.instance_seed,
                    c.schedule_seed,
                    c.config,
                    c.outcome,
                    c.convergence_round,
                    c.bound.map_or("-".into(), |b| b.to_string()),
                    c.oracle_match.map_or("-".into(), |m| m.to_string()),
                    if c.passed() { "PASS".to_string() } else { format!("FAIL {}", c.failures.join("; ")) }
                );
            }
            out
        }
    }
}

fn execute(cli: Cli) -> Result<bool, InputError> {
    match cli.command {
        Command::Validate { topology, profile } => {
            let graph = parse_topology(&read(&topology)?)?;
            let report = validate(&graph, mode_of(profile));
            for v in &report.violations {
                println!("violation: {v}");
            }
            if report.is_empty() {
                println!("ok: {} nodes, {} edges", graph.len(), graph.edges().len());
            }
            Ok(report.is_empty())
        }
        Command::Simulate {
            instance,
            schedule,
            seed,
            random_start,
            rounds_max,
            events_max,
            expect,
            format,
            report,
        } => {
            let inst = load_instance(&instance)?;
            let config = match random_start {
                Some(s) => random_initial_config(&inst, s),
                None => InitialConfig::empty(),
            };
            let mut sim = Simulation::initialize(&inst, &config)?;
            let mut source: Box<dyn ScheduleSource> = match &schedule {
                Some(path) => match parse_schedule(&read(path)?)? {
                    ParsedSchedule::Explicit(s) => Box::new(s),
                    ParsedSchedule::Cyclic(s) => Box::new(s),
                },
                None => Box::new(FairRandomSchedule::new(seed, &sim)),
            };
            let mut stop = StopCondition::events(events_max).recording();
            stop.max_rounds = rounds_max;
            let trace = run(&mut sim, source.as_mut(), stop)?;
            let fmt = match format {
                Format::Text => TraceFormat::Text,
                Format::Ndjson => TraceFormat::Ndjson,
            };
            emit(
                &trace.render(fmt),
                || trace.render(TraceFormat::Ndjson),
                report.as_deref(),
            )?;
            Ok(match expect {
                Expect::None => true,
                Expect::Converge => trace.outcome.is_converged(),
                Expect::Oscillate => matches!(trace.outcome, Outcome::Oscillating { .. }),
            })
        }
        Command::Oracle {
            instance,
            seed,
            format,
        } => {
            let inst = load_instance(&instance)?;
            let prediction = predict(&inst, seed)?;
            let text = match format {
                Format::Text => prediction.assignment.render_text(),
                Format::Ndjson => prediction.assignment.render_ndjson(),
            };
            print!("{text}");
            Ok(true)
        }
        Command::Sweep {
            family,
            size,
            attackers,
            density,
            seed,
            seeds,
            configs,
            rounds_max,
            events_max,
            format,
            report,
        } => {
            let family = match family {
                ProfileKind::ShortestPath => Family::ShortestPath {
                    nodes: size,
                    attackers,
                    density,
                },
                ProfileKind::Commercial => Family::Commercial {
                    depth: size,
                    attackers,
                },
            };
            let seeds: Vec<u64> = (seed..seed + seeds).collect();
            let mut limits = CellLimits {
                max_events: events_max,
                ..CellLimits::default()
            };
            if let Some(r) = rounds_max {
                limits.slack_rounds = r;
            }
            let result = run_sweep(family, &seeds, configs, limits)?;
            emit(
                &render_report(&result, format),
                || result.to_ndjson(),
                report.as_deref(),
            )?;
            eprintln!("{}", result.summary());
            Ok(result.all_passed())
        }
        Command::Gadget {
            seed,
            seeds,
            format,
            report,
        } => {
            let limits = CellLimits::default();
            let seeds: Vec<u64> = (seed..seed + seeds).collect();
            let mut result = run_experiment(&bad_gadget_pre_attack(), &seeds, limits)?;
            result.merge(run_experiment(&bad_gadget_scenario(), &[seed], limits)?);
            emit(
                &render_report(&result, format),
                || result.to_ndjson(),
                report.as_deref(),
            )?;
            eprintln!("{}", result.summary());
            Ok(result.all_passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
