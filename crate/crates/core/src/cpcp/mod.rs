//! The undecidability pipeline: CPCP instances, the two-channel machine and
//! its one-channel encoding, the generated two-method library, and a
//! schedule of that library which loops without returns.

pub mod instance;
pub mod library;
pub mod machine;
pub mod witness;

use std::collections::HashMap;

use crate::model::{Configuration, Pid};
use crate::semantics::steps_of;
use crate::system::SystemSpec;

pub use instance::{cyclic_equal, solve_brute, CpcpInstance, InstanceError};
pub use library::{generate_library, generate_library_text, rule_io, RuleNames};
pub use machine::{
    build_cm, build_cm_with_layout, cm_plan, cm_state_count, single_plan, to_single_channel, CmLayout, CmPlan,
    MachineError, SingleChannel, SinglePlan,
};
pub use witness::{build_witness_schedule, Pipeline, WitnessError, WitnessSchedule};

/// Longest run of `pid` alone from `c` before it returns, or `None` if some
/// solo run gets stuck, loops, or is longer than `limit`.
pub fn solo_return_depth(spec: &SystemSpec, c: &Configuration, pid: Pid, limit: usize) -> Option<usize> {
    fn go(
        spec: &SystemSpec,
        c: &Configuration,
        pid: Pid,
        budget: usize,
        memo: &mut HashMap<Configuration, Option<usize>>,
    ) -> Option<usize> {
        if let Some(r) = memo.get(c) {
            return *r;
        }
        // marks the node as in progress, so a cycle reads as failure
        memo.insert(c.clone(), None);
        let mut steps = Vec::new();
        steps_of(spec, c, pid, &mut steps);
        let mut depth = Some(0usize);
        if steps.is_empty() || budget == 0 {
            depth = None;
        }
        for s in &steps {
            if depth.is_none() {
                break;
            }
            let d = if s.action.is_return() { Some(1) } else { go(spec, &s.next, pid, budget - 1, memo).map(|d| d + 1) };
            depth = match (depth, d) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
        }
        memo.insert(c.clone(), depth);
        depth
    }
    if !c.is_pending(pid) {
        return Some(0);
    }
    let mut memo = HashMap::new();
    go(spec, c, pid, limit, &mut memo).filter(|d| *d <= limit)
}
