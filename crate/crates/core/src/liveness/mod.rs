//! Lasso-based checks of the five progress properties.
//!
//! A lasso `stem · loop^ω` violates a property when its loop satisfies the
//! property's clause (see [`clause_violated`]). On a finite state graph such
//! a loop exists iff some reachable strongly connected component of a
//! suitably restricted subgraph has internal edges covering the clause's
//! requirements; [`find_violation`] searches exactly that way.

mod blocking;
pub mod oracle;
mod scc;

use std::time::Instant;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use blocking::{blocking_pairs, BlockingError, BlockingPairs, DEFAULT_BLOCKING_LIMIT};

use crate::explore::{explore_with, ExploreError, ExploreOptions, StateGraph};
use crate::model::{Action, Configuration, LassoWitness, Pid};
use crate::semantics::{replay_set, ReplayError};
use crate::system::{MemoryModel, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PropertyId {
    LockFreedom,
    WaitFreedom,
    DeadlockFreedom,
    StarvationFreedom,
    ObstructionFreedom,
}

impl PropertyId {
    pub const ALL: [PropertyId; 5] = [
        PropertyId::LockFreedom,
        PropertyId::WaitFreedom,
        PropertyId::DeadlockFreedom,
        PropertyId::StarvationFreedom,
        PropertyId::ObstructionFreedom,
    ];

    /// The four properties that only get bounded verdicts.
    pub const BOUNDED: [PropertyId; 4] = [
        PropertyId::LockFreedom,
        PropertyId::WaitFreedom,
        PropertyId::DeadlockFreedom,
        PropertyId::StarvationFreedom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyId::LockFreedom => "lock-freedom",
            PropertyId::WaitFreedom => "wait-freedom",
            PropertyId::DeadlockFreedom => "deadlock-freedom",
            PropertyId::StarvationFreedom => "starvation-freedom",
            PropertyId::ObstructionFreedom => "obstruction-freedom",
        }
    }

    pub fn parse(s: &str) -> Option<PropertyId> {
        PropertyId::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// What a loop does, relative to the configuration it starts from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopSummary {
    /// Process pending (not in the client) at loop entry.
    pub pending: Vec<bool>,
    /// Process has at least one action in the loop; flushes count.
    pub acts: Vec<bool>,
    /// Process returns in the loop.
    pub rets: Vec<bool>,
}

impl LoopSummary {
    pub fn new(entry: &Configuration, cycle: &[Action]) -> Self {
        let n = entry.procs();
        let mut s = LoopSummary {
            pending: (0..n).map(|i| entry.is_pending(Pid::from_index(i))).collect(),
            acts: vec![false; n],
            rets: vec![false; n],
        };
        for a in cycle {
            let i = a.pid().index();
            s.acts[i] = true;
            if a.is_return() {
                s.rets[i] = true;
            }
        }
        s
    }

    pub fn any_return(&self) -> bool {
        self.rets.iter().any(|r| *r)
    }
}

/// Whether a loop with this summary violates `prop`.
pub fn clause_violated(prop: PropertyId, s: &LoopSummary) -> bool {
    let n = s.pending.len();
    let all_act = s.acts.iter().all(|a| *a);
    match prop {
        PropertyId::LockFreedom => !s.any_return() && (0..n).any(|q| s.pending[q] && s.acts[q]),
        PropertyId::WaitFreedom => (0..n).any(|q| s.pending[q] && s.acts[q] && !s.rets[q]),
        PropertyId::DeadlockFreedom => !s.any_return() && all_act,
        PropertyId::StarvationFreedom => all_act && (0..n).any(|q| s.pending[q] && !s.rets[q]),
        PropertyId::ObstructionFreedom => {
            let actors: Vec<usize> = (0..n).filter(|&q| s.acts[q]).collect();
            actors.len() == 1 && s.pending[actors[0]] && !s.any_return()
        }
    }
}

#[derive(Debug, Error)]
pub enum LassoError {
    #[error("loop is empty")]
    EmptyLoop,
    #[error("stem does not replay: {0}")]
    Stem(ReplayError),
    #[error("loop does not replay: {0}")]
    Loop(ReplayError),
    #[error("stem does not reach the recorded loop-entry configuration")]
    WrongEntry,
    #[error("loop does not return to its entry configuration")]
    NotClosed,
}

/// Checks that `w` replays on `spec` and returns whether its loop violates
/// `prop`.
pub fn check_lasso_conditions(spec: &SystemSpec, w: &LassoWitness, prop: PropertyId) -> Result<bool, LassoError> {
    validate_lasso(spec, w)?;
    Ok(clause_violated(prop, &LoopSummary::new(&w.entry, &w.cycle)))
}

/// Replays stem and loop, checking that both land on `w.entry`.
pub fn validate_lasso(spec: &SystemSpec, w: &LassoWitness) -> Result<(), LassoError> {
    if w.cycle.is_empty() {
        return Err(LassoError::EmptyLoop);
    }
    let reached = replay_set(spec, &w.stem, vec![spec.initial()]).map_err(LassoError::Stem)?;
    if !reached.contains(&w.entry) {
        return Err(LassoError::WrongEntry);
    }
    let back = replay_set(spec, &w.cycle, vec![w.entry.clone()]).map_err(LassoError::Loop)?;
    if !back.contains(&w.entry) {
        return Err(LassoError::NotClosed);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Violated(LassoWitness),
    NoViolationAtBound(usize),
    Satisfied,
}

impl Verdict {
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Violated(_) => "VIOLATED",
            Verdict::NoViolationAtBound(_) => "NO_VIOLATION_AT_BOUND",
            Verdict::Satisfied => "SATISFIED",
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated(_))
    }

    pub fn witness(&self) -> Option<&LassoWitness> {
        match self {
            Verdict::Violated(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub nodes: usize,
    pub edges: usize,
    pub millis: u128,
}

#[derive(Clone, Debug)]
pub struct ViolationReport {
    pub property: PropertyId,
    pub verdict: Verdict,
    pub model: MemoryModel,
    pub procs: usize,
    pub bound: Option<usize>,
    pub stats: Stats,
}

impl ViolationReport {
    /// JSON document with fields `property`, `verdict`, `bound`, `model`,
    /// `procs`, `stem`, `loop` (action lines, empty unless violated) and
    /// `stats`.
    pub fn to_json(&self, lib: &crate::library::LibraryIR) -> serde_json::Value {
        let lines = |t: &[Action]| -> Vec<String> { t.iter().map(|a| a.display(lib).to_string()).collect() };
        let (stem, cycle) = match &self.verdict {
            Verdict::Violated(w) => (lines(&w.stem), lines(&w.cycle)),
            _ => (Vec::new(), Vec::new()),
        };
        json!({
            "property": self.property.name(),
            "verdict": self.verdict.tag(),
            "bound": self.bound,
            "model": self.model,
            "procs": self.procs,
            "stem": stem,
            "loop": cycle,
            "stats": self.stats,
        })
    }
}

fn graph_stats(g: &StateGraph, t0: Instant) -> Stats {
    Stats {
        nodes: g.node_count(),
        edges: g.edge_count(),
        millis: t0.elapsed().as_millis(),
    }
}

/// Searches the bounded state graph for a lasso violating `prop`.
///
/// Obstruction-freedom is answered by the direct single-process loop
/// search; [`check_obstruction_freedom`] is the blocking-pair procedure.
pub fn find_violation(spec: &SystemSpec, prop: PropertyId, opts: ExploreOptions) -> Result<ViolationReport, ExploreError> {
    let t0 = Instant::now();
    let g = explore_with(spec, opts)?;
    let verdict = match find_lasso(&g, spec.n, prop) {
        Some(w) => Verdict::Violated(w),
        None => Verdict::NoViolationAtBound(spec.bound_value().unwrap_or(0)),
    };
    Ok(ViolationReport {
        property: prop,
        verdict,
        model: spec.model,
        procs: spec.n,
        bound: spec.bound_value(),
        stats: graph_stats(&g, t0),
    })
}

/// A violating lasso in an already built graph, with BFS-minimal stem.
pub fn find_lasso(g: &StateGraph, n: usize, prop: PropertyId) -> Option<LassoWitness> {
    let pending = |node: u32, q: usize| g.nodes[node as usize].is_pending(Pid::from_index(q));
    let mut best: Option<(u32, Vec<scc::Required>, scc::EdgeFilter)> = None;
    let mut consider = |cand: Option<(u32, Vec<scc::Required>)>, filter: scc::EdgeFilter| {
        if let Some((entry, req)) = cand {
            if best.as_ref().is_none_or(|b| entry < b.0) {
                best = Some((entry, req, filter));
            }
        }
    };
    match prop {
        PropertyId::LockFreedom | PropertyId::DeadlockFreedom => {
            let filter = scc::EdgeFilter { pending_pid: None, only_pid: None, no_return_of: None };
            let need_all = prop == PropertyId::DeadlockFreedom;
            consider(
                scc::search(g, &filter, |edges| {
                    if need_all {
                        scc::cover_all_pids(edges, n)
                    } else {
                        edges
                            .iter()
                            .find(|e| pending(e.src, e.action.pid().index()))
                            .map(|e| vec![scc::Required::Edge(*e)])
                    }
                }),
                filter,
            );
        }
        PropertyId::WaitFreedom | PropertyId::StarvationFreedom | PropertyId::ObstructionFreedom => {
            for q in 0..n {
                let filter = scc::EdgeFilter {
                    pending_pid: Some(q),
                    only_pid: (prop == PropertyId::ObstructionFreedom).then_some(q),
                    no_return_of: Some(q),
                };
                consider(
                    scc::search(g, &filter, |edges| match prop {
                        PropertyId::StarvationFreedom => scc::cover_all_pids(edges, n),
                        PropertyId::WaitFreedom => edges
                            .iter()
                            .find(|e| e.action.pid().index() == q)
                            .map(|e| vec![scc::Required::Edge(*e)]),
                        _ => edges.first().map(|e| vec![scc::Required::Edge(*e)]),
                    }),
                    filter,
                );
            }
        }
    }
    let (entry, req, filter) = best?;
    let cycle = scc::closed_walk(g, &filter, entry, &req);
    Some(LassoWitness {
        stem: g.path_to(entry),
        cycle,
        entry: g.nodes[entry as usize].clone(),
    })
}

#[derive(Debug, Error)]
pub enum LivenessError {
    #[error(transparent)]
    Explore(#[from] ExploreError),
    #[error(transparent)]
    Blocking(#[from] BlockingError),
}

/// Obstruction-freedom via blocking pairs: violated iff some reachable
/// configuration with all buffers empty puts a process in a blocking pair.
/// With no blocking pairs at all the verdict is SATISFIED at every bound.
pub fn check_obstruction_freedom(spec: &SystemSpec, opts: ExploreOptions) -> Result<ViolationReport, LivenessError> {
    let t0 = Instant::now();
    let bp = blocking_pairs(&spec.lib, DEFAULT_BLOCKING_LIMIT)?;
    let report = |verdict, stats| ViolationReport {
        property: PropertyId::ObstructionFreedom,
        verdict,
        model: spec.model,
        procs: spec.n,
        bound: spec.bound_value(),
        stats,
    };
    if bp.is_empty() {
        return Ok(report(
            Verdict::Satisfied,
            Stats { nodes: 0, edges: 0, millis: t0.elapsed().as_millis() },
        ));
    }
    let g = explore_with(spec, opts)?;
    for (id, c) in g.nodes.iter().enumerate() {
        if !c.buffers_empty() {
            continue;
        }
        for q in 0..spec.n {
            if bp.contains(c.control[q], &c.memory) {
                let pid = Pid::from_index(q);
                let (prefix, cycle) = bp.lasso_from(&spec.lib, c.control[q], &c.memory, pid, spec.model);
                let mut stem = g.path_to(id as u32);
                stem.extend(prefix);
                let entry = replay_set(spec, &stem, vec![spec.initial()])
                    .expect("blocking-pair continuation replays")
                    .swap_remove(0);
                let w = LassoWitness { stem, cycle, entry };
                return Ok(report(Verdict::Violated(w), graph_stats(&g, t0)));
            }
        }
    }
    Ok(report(
        Verdict::NoViolationAtBound(spec.bound_value().unwrap_or(0)),
        graph_stats(&g, t0),
    ))
}
