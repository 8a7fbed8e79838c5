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

//! Scenarios, random instance families and the experiment runner.
//!
//! A cell is one (instance, initial configuration, schedule seed) run. Every
//! cell is checked against its expectations and a fixed set of model
//! invariants; failing cells carry enough to be replayed.

mod gadget;
mod generate;

pub use gadget::{
    bad_gadget_instance, bad_gadget_pre_attack, bad_gadget_scenario, bad_gadget_schedule,
    GADGET_ATTACK, GADGET_RANKINGS, GADGET_SCHEDULE, GADGET_TOPOLOGY,
};
pub use generate::{
    commercial_with_depth, initial_configs, random_attacks, random_commercial_instance,
    random_commercial_with, random_initial_config, random_shortest_path_instance, MAX_ORACLE_NODES,
};

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::attack::{write_attacks, Announcement};
use crate::engine::{
    run, CyclicSchedule, EngineError, ExplicitSchedule, FairRandomSchedule, InitialConfig,
    MacroStep, OscillationWitness, Outcome, ScheduleEvent, ScheduleSource, Simulation,
    StopCondition, Trace,
};
use crate::graph::{write_topology, GraphError, NodeId, Role};
use crate::oracle::{fr_observed, fsr, FixedAssignment, OracleError, OracleState, Phase};
use crate::policy::{PolicyError, ProfileMode, Route};
use crate::seed::hash_words;
use crate::{Instance, InstanceError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unsupported instance size {0}")]
    Size(usize),
    #[error("{attackers} attackers do not fit in {nodes} nodes")]
    TooManyAttackers { nodes: usize, attackers: usize },
    #[error("could not build a hierarchy of depth {0}")]
    Depth(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Expectation {
    Converges,
    /// Converges and no selection changes after this round.
    ConvergesWithin(u32),
    Oscillates,
    /// Final assignment equals the oracle's and every node settles within
    /// its predicted round.
    OracleMatch,
    /// Final selections of the listed nodes.
    Routes(BTreeMap<NodeId, Route>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleSpec {
    /// Seeded fair random schedule, one per cell seed.
    FairRandom,
    Cyclic(Vec<MacroStep>),
    Explicit(Vec<ScheduleEvent>),
}

impl ScheduleSpec {
    fn source(&self, seed: u64, sim: &Simulation<'_>) -> Box<dyn ScheduleSource> {
        match self {
            ScheduleSpec::FairRandom => Box::new(FairRandomSchedule::new(seed, sim)),
            ScheduleSpec::Cyclic(steps) => Box::new(CyclicSchedule::new(steps.clone())),
            ScheduleSpec::Explicit(events) => Box::new(ExplicitSchedule::new(events.clone())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub instance: Instance,
    pub configs: Vec<InitialConfig>,
    pub schedule: ScheduleSpec,
    pub expectations: Vec<Expectation>,
}

/// Budgets and optional checks applied to every cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellLimits {
    pub max_events: u64,
    /// Extra rounds allowed beyond the expected bound before giving up.
    pub slack_rounds: u32,
    /// Events to keep running after convergence, expecting no change.
    pub probe_events: u64,
    /// Run every cell twice and compare trace hashes.
    pub determinism: bool,
}

impl Default for CellLimits {
    fn default() -> Self {
        CellLimits {
            max_events: 200_000,
            slack_rounds: 50,
            probe_events: 1000,
            determinism: true,
        }
    }
}

/// Everything needed to replay a failing cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Repro {
    pub topology: String,
    pub attacks: String,
    pub profile: serde_json::Value,
    pub config: InitialConfig,
    pub schedule_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub scenario: String,
    pub instance_seed: u64,
    pub config: usize,
    pub schedule_seed: u64,
    pub outcome: String,
    pub quiescent: bool,
    pub rounds: u32,
    pub convergence_round: u32,
    pub events: u64,
    pub bound: Option<u32>,
    pub oracle_match: Option<bool>,
    pub per_node_within: Option<bool>,
    pub attacker_constancy: bool,
    pub simple_routes: bool,
    pub quiescence_safe: Option<bool>,
    pub deterministic: Option<bool>,
    pub lemma_checks: u32,
    pub lemma_failures: u32,
    pub oracle_seed_stable: Option<bool>,
    pub witness: Option<OscillationWitness>,
    pub trace_hash: String,
    pub failures: Vec<String>,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repro: Option<Repro>,
}

impl CellReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellReport>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub cells: usize,
    pub failed: usize,
    pub converged: usize,
    pub oscillating: usize,
    pub over_bound: usize,
    pub oracle_mismatches: usize,
    pub lemma_checks: u64,
    pub lemma_failures: u64,
    pub max_convergence_round: u32,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cells={} failed={} converged={} oscillating={} over_bound={} oracle_mismatches={} lemma_checks={} lemma_failures={} max_round={}",
            self.cells,
            self.failed,
            self.converged,
            self.oscillating,
            self.over_bound,
            self.oracle_mismatches,
            self.lemma_checks,
            self.lemma_failures,
            self.max_convergence_round
        )
    }
}

impl ExperimentReport {
    pub fn merge(&mut self, other: ExperimentReport) {
        self.cells.extend(other.cells);
    }

    pub fn all_passed(&self) -> bool {
        self.cells.iter().all(CellReport::passed)
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            cells: self.cells.len(),
            ..Summary::default()
        };
        for c in &self.cells {
            s.failed += usize::from(!c.passed());
            s.converged += usize::from(c.quiescent);
            s.oscillating += usize::from(!c.quiescent);
            s.over_bound += usize::from(c.bound.is_some_and(|b| c.convergence_round > b));
            s.oracle_mismatches += usize::from(c.oracle_match == Some(false));
            s.lemma_checks += c.lemma_checks as u64;
            s.lemma_failures += c.lemma_failures as u64;
            s.max_convergence_round = s.max_convergence_round.max(c.convergence_round);
        }
        s
    }

    /// One JSON object per cell.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            out += &serde_json::to_string(c).expect("serializable cell");
            out.push('\n');
        }
        out
    }
}

/// What the oracle predicts for an instance.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub assignment: FixedAssignment,
    /// Global round bound: `|V|` or `2x + 1`.
    pub bound: u32,
    pub lemma_checks: u32,
    pub lemma_failures: u32,
    pub seed_stable: bool,
}

/// Checks a fixing-step witness directly against the graph: unfixed, best
/// route leaving to a customer (customer phase) or provider (provider
/// phase), and that next hop already fixed.
fn witness_ok(state: &OracleState<'_>, phase: Phase, node: NodeId) -> bool {
    let want = match phase {
        Phase::Fcr => Role::Customer,
        Phase::Fprv => Role::Provider,
        _ => return true,
    };
    if state.is_fixed(node) {
        return false;
    }
    let Ok(best) = state.best(node) else {
        return false;
    };
    let Some(nh) = best.next_hop else {
        return false;
    };
    state.instance().graph.role(node, nh) == Some(want) && state.is_fixed(nh)
}

/// Runs the oracle matching the instance's profile.
pub fn predict(inst: &Instance, seed: u64) -> Result<Prediction, HarnessError> {
    match inst.profile.mode {
        ProfileMode::ShortestPath => {
            let assignment = fsr(inst, seed)?;
            let other = fsr(inst, seed ^ 0x9e37_79b9)?;
            Ok(Prediction {
                seed_stable: other.routes() == assignment.routes(),
                bound: inst.graph.len() as u32,
                assignment,
                lemma_checks: 0,
                lemma_failures: 0,
            })
        }
        ProfileMode::Commercial => {
            let (mut checks, mut failures) = (0u32, 0u32);
            let assignment = fr_observed(inst, seed, &mut |state, phase, node| {
                if matches!(phase, Phase::Fcr | Phase::Fprv) {
                    checks += 1;
                    failures += u32::from(!witness_ok(state, phase, node));
                }
            })?;
            let other = fr_observed(inst, seed ^ 0x9e37_79b9, &mut |_, _, _| {})?;
            let x = assignment.depth.unwrap_or(0) as u32;
            Ok(Prediction {
                seed_stable: other.routes() == assignment.routes(),
                bound: 2 * x + 1,
                assignment,
                lemma_checks: checks,
                lemma_failures: failures,
            })
        }
        ProfileMode::Custom => Err(HarnessError::Oracle(OracleError::WrongProfile(
            "shortest-path or commercial",
        ))),
    }
}

fn check_attacker_constancy(inst: &Instance, trace: &Trace) -> bool {
    let mut seen: HashMap<(NodeId, NodeId), &Route> = HashMap::new();
    for e in &trace.events {
        for m in &e.sends {
            if !inst.graph.is_attacker(m.sender) {
                continue;
            }
            if let Announcement::Path(r) = inst.attacks.announcement(m.sender, m.receiver) {
                if &m.content != r {
                    return false;
                }
            } else {
                return false;
            }
            if let Some(prev) = seen.insert((m.sender, m.receiver), &m.content) {
                if prev != &m.content {
                    return false;
                }
            }
        }
    }
    true
}

fn check_simple(inst: &Instance, trace: &Trace) -> bool {
    let d = inst.graph.destination();
    trace
        .changes
        .iter()
        .all(|c| c.route.is_empty() || c.route.is_valid_for(c.node, d))
        && trace
            .final_assignment
            .iter()
            .all(|(n, r)| r.is_empty() || r.is_valid_for(*n, d))
}

/// One run of `inst` from `config` under `schedule`, with all checks.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    scenario: &str,
    inst: &Instance,
    prediction: Option<&Prediction>,
    expectations: &[Expectation],
    config: &InitialConfig,
    config_idx: usize,
    instance_seed: u64,
    schedule: &ScheduleSpec,
    schedule_seed: u64,
    limits: CellLimits,
) -> Result<CellReport, HarnessError> {
    let start = Instant::now();
    let bound = prediction.map(|p| p.bound).or_else(|| {
        expectations.iter().find_map(|e| match e {
            Expectation::ConvergesWithin(b) => Some(*b),
            _ => None,
        })
    });
    let stop = StopCondition::events(limits.max_events).recording();
    let stop = match bound {
        Some(b) => stop.with_rounds(b + limits.slack_rounds),
        None => stop,
    };

    let execute = || -> Result<(Trace, Option<bool>), HarnessError> {
        let mut sim = Simulation::initialize(inst, config)?;
        let mut source = schedule.source(schedule_seed, &sim);
        let trace = run(&mut sim, source.as_mut(), stop)?;
        let mut safe = None;
        if trace.outcome.is_converged() && limits.probe_events > 0 {
            let probe = StopCondition {
                max_events: limits.probe_events,
                max_rounds: None,
                stop_on_quiescence: false,
                detect_cycles: false,
                record: false,
            };
            let after = run(&mut sim, source.as_mut(), probe)?;
            safe = Some(after.changes.is_empty());
        }
        Ok((trace, safe))
    };

    let (trace, quiescence_safe) = execute()?;
    let trace_hash = trace.hash_hex();
    let deterministic = if limits.determinism {
        Some(execute()?.0.hash_hex() == trace_hash)
    } else {
        None
    };

    let quiescent = trace.outcome.is_converged();
    let convergence_round = trace.convergence_round();
    let mut failures = Vec::new();
    let (oracle_match, per_node_within) = match prediction {
        Some(p) => {
            let routes = p.assignment.routes();
            let matched = quiescent && routes == trace.final_assignment;
            let within = trace
                .stabilization
                .iter()
                .all(|(n, r)| p.assignment.bound(*n).is_some_and(|b| *r <= b));
            (Some(matched), Some(within))
        }
        None => (None, None),
    };

    for e in expectations {
        match e {
            Expectation::Converges if !quiescent => failures.push("did not converge".to_string()),
            Expectation::ConvergesWithin(b) if !quiescent || convergence_round > *b => {
                failures.push(format!("convergence round {convergence_round} exceeds {b}"))
            }
            Expectation::Oscillates if !matches!(trace.outcome, Outcome::Oscillating { .. }) => {
                failures.push(format!(
                    "expected oscillation, got {}",
                    trace.outcome.label()
                ))
            }
            Expectation::OracleMatch => {
                if !quiescent {
                    failures.push(format!("did not converge: {}", trace.outcome.label()));
                } else if oracle_match != Some(true) {
                    failures.push("final assignment differs from the oracle".to_string());
                }
                if per_node_within != Some(true) {
                    failures.push("a node settled after its predicted round".to_string());
                }
                if let Some(b) = bound {
                    if convergence_round > b {
                        failures.push(format!("convergence round {convergence_round} exceeds {b}"));
                    }
                }
            }
            Expectation::Routes(want) => {
                for (n, r) in want {
                    if trace.final_assignment.get(n) != Some(r) {
                        failures.push(format!("node {n} did not end on {r}"));
                    }
                }
            }
            _ => {}
        }
    }
    let attacker_constancy = check_attacker_constancy(inst, &trace);
    let simple_routes = check_simple(inst, &trace);
    if !attacker_constancy {
        failures.push("attacker announcement changed".into());
    }
    if !simple_routes {
        failures.push("non-simple or foreign route selected".into());
    }
    if quiescence_safe == Some(false) {
        failures.push("selection changed after quiescence".into());
    }
    if deterministic == Some(false) {
        failures.push("rerun produced a different trace".into());
    }
    if let Some(p) = prediction {
        if p.lemma_failures > 0 {
            failures.push(format!(
                "{} fixing witnesses failed the direct check",
                p.lemma_failures
            ));
        }
    }

    let repro = (!failures.is_empty()).then(|| Repro {
        topology: write_topology(&inst.graph),
        attacks: write_attacks(&inst.attacks),
        profile: serde_json::to_value(&inst.profile).expect("serializable profile"),
        config: config.clone(),
        schedule_seed,
    });
    let witness = match &trace.outcome {
        Outcome::Oscillating { witness } => Some(witness.clone()),
        _ => None,
    };
    Ok(CellReport {
        scenario: scenario.to_string(),
        instance_seed,
        config: config_idx,
        schedule_seed,
        outcome: trace.outcome.label().to_string(),
        quiescent,
        rounds: trace.round_count(),
        convergence_round,
        events: trace.event_count,
        bound,
        oracle_match,
        per_node_within,
        attacker_constancy,
        simple_routes,
        quiescence_safe,
        deterministic,
        lemma_checks: prediction.map_or(0, |p| p.lemma_checks),
        lemma_failures: prediction.map_or(0, |p| p.lemma_failures),
        oracle_seed_stable: prediction.map(|p| p.seed_stable),
        witness,
        trace_hash,
        failures,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        repro,
    })
}

/// Runs every configuration of a fixed-instance scenario once per seed.
pub fn run_experiment(
    scenario: &Scenario,
    seeds: &[u64],
    limits: CellLimits,
) -> Result<ExperimentReport, HarnessError> {
    let wants_oracle = scenario.expectations.contains(&Expectation::OracleMatch);
    let prediction = if wants_oracle {
        Some(predict(&scenario.instance, 0)?)
    } else {
        None
    };
    let jobs: Vec<(u64, usize)> = seeds
        .iter()
        .flat_map(|s| (0..scenario.configs.len()).map(move |c| (*s, c)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(seed, c)| {
            run_cell(
                &scenario.name,
                &scenario.instance,
                prediction.as_ref(),
                &scenario.expectations,
                &scenario.configs[c],
                c,
                0,
                &scenario.schedule,
                seed,
                limits,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport { cells })
}

/// A family of random instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    ShortestPath {
        nodes: usize,
        attackers: usize,
        density: f64,
    },
    Commercial {
        depth: usize,
        attackers: usize,
    },
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::ShortestPath {
                nodes, attackers, ..
            } => format!("sp_n{nodes}_a{attackers}"),
            Family::Commercial { depth, attackers } => format!("gr_x{depth}_a{attackers}"),
        }
    }

    pub fn instance(&self, seed: u64) -> Result<Instance, HarnessError> {
        match *self {
            Family::ShortestPath {
                nodes,
                attackers,
                density,
            } => random_shortest_path_instance(nodes, attackers, density, seed),
            Family::Commercial { depth, attackers } => {
                commercial_with_depth(depth, attackers, seed)
            }
        }
    }
}

/// One fresh instance per seed, `configs` initial configurations each, a
/// fair random schedule per cell, everything checked against the oracle.
pub fn run_sweep(
    family: Family,
    seeds: &[u64],
    configs: usize,
    limits: CellLimits,
) -> Result<ExperimentReport, HarnessError> {
    let name = family.name();
    let per_seed = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<CellReport>, HarnessError> {
            let inst = family.instance(seed)?;
            let prediction = predict(&inst, seed)?;
            let expectations = [Expectation::OracleMatch];
            initial_configs(&inst, configs, seed)
                .iter()
                .enumerate()
                .map(|(c, config)| {
                    let schedule_seed = hash_words(seed, [c as u64]);
                    run_cell(
                        &name,
                        &inst,
                        Some(&prediction),
                        &expectations,
                        config,
                        c,
                        seed,
                        &ScheduleSpec::FairRandom,
                        schedule_seed,
                        limits,
                    )
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport {
        cells: per_seed.into_iter().flatten().collect(),
    })
}
