//! A concrete schedule of the generated library that simulates a solution
//! forever, turned into a lasso.
//!
//! `M1` runs on process 1 and `M2` on process 2. A process may read a
//! location written by its peer only once a new update has reached memory
//! since its last read of it, so no update is ever skipped. When neither
//! process can move, the oldest buffered write that would not overwrite an
//! unread update is flushed.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::instance::{cyclic_equal, CpcpInstance};
use super::library::generate_library;
use super::machine::{
    build_cm_with_layout, cm_plan, single_plan, to_single_channel, CmLayout, MachineError, SingleChannel, SinglePlan,
};
use crate::dsl::DslError;
use crate::lcm::ChannelMachine;
use crate::library::LibraryIR;
use crate::model::{Action, Configuration, Control, LassoWitness, Loc, MethodId, Pid, Trace, Val};
use crate::semantics::{steps_of, StepResult};
use crate::system::{mgc_compose, BufferBound, MemoryModel, SystemSpec};

/// Every artifact of the reduction for one instance.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub inst: CpcpInstance,
    pub cm: ChannelMachine,
    pub layout: CmLayout,
    pub single: SingleChannel,
    pub lib: Arc<LibraryIR>,
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("index sequence is not a solution")]
    NotASolution,
    #[error("no lossless run of the channel machine for this solution")]
    NoPlan,
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("generated library does not compile: {0}")]
    Library(#[from] DslError),
    #[error("schedule stuck after {steps} steps")]
    Stuck { steps: usize, config: Box<Configuration> },
    #[error("planned action {action:?} not enabled after {steps} steps")]
    NotEnabled { steps: usize, action: Action },
    #[error("no repeated configuration within {0} steps")]
    NoRepeat(usize),
}

impl Pipeline {
    pub fn new(inst: &CpcpInstance) -> Result<Pipeline, WitnessError> {
        let (cm, layout) = build_cm_with_layout(inst);
        let single = to_single_channel(&cm)?;
        let lib = Arc::new(generate_library(&single)?);
        Ok(Pipeline { inst: inst.clone(), cm, layout, single, lib })
    }

    pub fn spec(&self, bound: BufferBound) -> SystemSpec {
        mgc_compose(self.lib.clone(), 2, MemoryModel::Tso, bound).expect("two processes, valid library")
    }
}

#[derive(Clone, Debug)]
pub struct WitnessSchedule {
    /// Stem followed by `rounds` copies of the loop.
    pub trace: Trace,
    pub lasso: LassoWitness,
    /// Largest store-buffer occupancy along the trace.
    pub bound: usize,
    /// Trace lengths at which a new rule is guessed, one per simulated
    /// transition.
    pub rule_marks: Vec<usize>,
    /// Number of marks in the guess phase.
    pub guess_rules: usize,
    pub plan: SinglePlan,
}

const STEP_LIMIT: usize = 20_000_000;

struct Driver<'a> {
    spec: SystemSpec,
    plan: &'a SinglePlan,
    rule_vals: Vec<Val>,
    x: [Loc; 2],
    y: [Loc; 2],
    /// Flushes per location so far, and per reader the count at its last read.
    flushes: HashMap<Loc, usize>,
    seen: [HashMap<Loc, usize>; 2],
    next_rule: usize,
}

impl Driver<'_> {
    fn planned_rule(&self) -> Val {
        let k = self.next_rule;
        let r = if k < self.plan.prefix.len() {
            self.plan.prefix[k]
        } else {
            self.plan.cycle[(k - self.plan.prefix.len()) % self.plan.cycle.len()]
        };
        self.rule_vals[r]
    }

    /// Peer data locations read by process `i` (0-based).
    fn peer_locs(&self, i: usize) -> [Loc; 2] {
        if i == 0 {
            self.y
        } else {
            self.x
        }
    }

    fn reader_of(&self, loc: Loc) -> Option<usize> {
        if self.x.contains(&loc) {
            Some(1)
        } else if self.y.contains(&loc) {
            Some(0)
        } else {
            None
        }
    }

    fn fresh(&self, i: usize, loc: Loc) -> bool {
        self.flushes.get(&loc).copied().unwrap_or(0) > self.seen[i].get(&loc).copied().unwrap_or(0)
    }

    /// The step process `i` takes next, if it can move without a flush.
    fn choose(&self, c: &Configuration, i: usize) -> Result<Option<StepResult>, Action> {
        let pid = Pid::from_index(i);
        let mut steps = Vec::new();
        steps_of(&self.spec, c, pid, &mut steps);
        steps.retain(|s| !s.action.is_flush());
        if let Control::Client = c.control[i] {
            let want = MethodId(i as u16);
            return Ok(steps
                .into_iter()
                .find(|s| matches!(s.action, Action::Call { method, arg: Val(0), .. } if method == want)));
        }
        if steps.len() > 1 {
            let want = self.planned_rule();
            let found = steps
                .iter()
                .position(|s| matches!(s.action, Action::Write { loc, val, .. } if loc == self.x[0] && val == want));
            return match found {
                Some(k) => Ok(Some(steps.swap_remove(k))),
                None => Err(Action::Write { pid, loc: self.x[0], val: want }),
            };
        }
        let Some(s) = steps.pop() else { return Ok(None) };
        if let Action::Read { loc, .. } = s.action {
            if self.peer_locs(i).contains(&loc) && !self.fresh(i, loc) {
                return Ok(None);
            }
        }
        Ok(Some(s))
    }

    fn safe_flush(&self, c: &Configuration, i: usize) -> Option<StepResult> {
        let (loc, _) = *c.buffers[i].last()?;
        if let Some(r) = self.reader_of(loc) {
            if self.fresh(r, loc) {
                return None;
            }
        }
        let mut steps = Vec::new();
        steps_of(&self.spec, c, Pid::from_index(i), &mut steps);
        steps.into_iter().find(|s| s.action.is_flush())
    }

    fn record(&mut self, a: &Action) {
        match *a {
            Action::Read { pid, loc, .. } => {
                let i = pid.index();
                if self.peer_locs(i).contains(&loc) {
                    let f = self.flushes.get(&loc).copied().unwrap_or(0);
                    self.seen[i].insert(loc, f);
                }
            }
            Action::Flush { loc, .. } => *self.flushes.entry(loc).or_insert(0) += 1,
            _ => {}
        }
    }
}

/// Builds the schedule for `solution` (1-based indices). The loop is found
/// by running the check phase until a configuration recurs at the same
/// point of the planned cycle.
pub fn build_witness_schedule(
    pipe: &Pipeline,
    solution: &[usize],
    rounds: usize,
) -> Result<WitnessSchedule, WitnessError> {
    if solution.is_empty() || solution.iter().any(|&i| i == 0 || i > pipe.inst.len()) {
        return Err(WitnessError::NotASolution);
    }
    let (a, b) = pipe.inst.concat(solution);
    if !cyclic_equal(&a, &b) {
        return Err(WitnessError::NotASolution);
    }
    let plan = cm_plan(&pipe.inst, &pipe.cm, &pipe.layout, solution).ok_or(WitnessError::NoPlan)?;
    let plan = single_plan(&pipe.single, &plan)?;
    let lib = &*pipe.lib;
    let rule_vals: Vec<Val> = (0..pipe.single.cm.transitions.len()).map(|i| lib.value(&format!("r{i}"))).collect();
    let mut d = Driver {
        spec: pipe.spec(BufferBound::Unbounded),
        plan: &plan,
        rule_vals,
        x: [lib.loc("x1"), lib.loc("x2")],
        y: [lib.loc("y1"), lib.loc("y2")],
        flushes: HashMap::new(),
        seen: [HashMap::new(), HashMap::new()],
        next_rule: 0,
    };
    let mut c = d.spec.initial();
    let mut trace: Trace = Vec::new();
    let mut marks = Vec::new();
    let mut at_cycle_start: HashMap<Configuration, usize> = HashMap::new();
    let mut bound = 0;
    let (start, end) = loop {
        if trace.len() > STEP_LIMIT {
            return Err(WitnessError::NoRepeat(STEP_LIMIT));
        }
        let mut step = None;
        for i in 0..2 {
            match d.choose(&c, i) {
                Ok(Some(s)) => {
                    step = Some(s);
                    break;
                }
                Ok(None) => {}
                Err(action) => return Err(WitnessError::NotEnabled { steps: trace.len(), action }),
            }
        }
        if step.is_none() {
            step = (0..2).find_map(|i| d.safe_flush(&c, i));
        }
        let Some(s) = step else {
            return Err(WitnessError::Stuck { steps: trace.len(), config: Box::new(c) });
        };
        if let Action::Write { loc, val, .. } = s.action {
            if loc == d.x[0] && d.rule_vals.contains(&val) {
                let k = d.next_rule;
                let pl = plan.prefix.len();
                if k >= pl && (k - pl).is_multiple_of(plan.cycle.len()) {
                    if let Some(&first) = at_cycle_start.get(&c) {
                        break (first, trace.len());
                    }
                    at_cycle_start.insert(c.clone(), trace.len());
                }
                marks.push(trace.len());
                d.next_rule += 1;
            }
        }
        d.record(&s.action);
        trace.push(s.action);
        c = s.next;
        bound = bound.max(c.max_buffer_len());
    };
    let stem = trace[..start].to_vec();
    let cycle = trace[start..end].to_vec();
    let entry = c;
    let mut full = stem.clone();
    for _ in 0..rounds.max(1) {
        full.extend_from_slice(&cycle);
    }
    let guess_rules = plan.prefix.len();
    marks.retain(|&m| m < end);
    Ok(WitnessSchedule {
        trace: full,
        lasso: LassoWitness { stem, cycle, entry },
        bound,
        rule_marks: marks,
        guess_rules,
        plan,
    })
}
