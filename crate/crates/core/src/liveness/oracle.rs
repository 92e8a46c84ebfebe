//! Naive reference verdicts, used to cross-check the SCC-based search.
//!
//! For every node `v`, a breadth-first search over pairs (node, loop
//! features so far) enumerates the feature sets of all closed walks through
//! `v`, and each one is evaluated directly against the property clause.

use thiserror::Error;

use super::{clause_violated, LoopSummary, PropertyId};
use crate::explore::{explore_with, ExploreError, ExploreMode, ExploreOptions, StateGraph};
use crate::model::Pid;
use crate::system::SystemSpec;

pub const DEFAULT_ORACLE_LIMIT: usize = 20_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state graph has more than {limit} configurations")]
    TooLarge { limit: usize },
    #[error("process count {0} is too large for the oracle")]
    TooManyProcesses(usize),
    #[error(transparent)]
    Explore(ExploreError),
}

/// True iff some reachable closed walk violates `prop`.
pub fn brute_force_oracle(spec: &SystemSpec, prop: PropertyId, limit: usize) -> Result<bool, OracleError> {
    let g = oracle_graph(spec, limit)?;
    oracle_on_graph(&g, spec.n, prop)
}

/// Verdicts for every property in [`PropertyId::ALL`] order, from one sweep.
pub fn brute_force_verdicts(spec: &SystemSpec, limit: usize) -> Result<[bool; 5], OracleError> {
    let g = oracle_graph(spec, limit)?;
    verdicts_on_graph(&g, spec.n)
}

fn oracle_graph(spec: &SystemSpec, limit: usize) -> Result<StateGraph, OracleError> {
    let opts = ExploreOptions { budget: limit, mode: ExploreMode::Sequential };
    match explore_with(spec, opts) {
        Ok(g) => Ok(g),
        Err(ExploreError::Budget { .. }) => Err(OracleError::TooLarge { limit }),
        Err(e) => Err(OracleError::Explore(e)),
    }
}

pub fn oracle_on_graph(g: &StateGraph, n: usize, prop: PropertyId) -> Result<bool, OracleError> {
    let k = PropertyId::ALL.iter().position(|&p| p == prop).expect("listed");
    Ok(verdicts_on_graph(g, n)?[k])
}

pub fn verdicts_on_graph(g: &StateGraph, n: usize) -> Result<[bool; 5], OracleError> {
    if n > 8 {
        return Err(OracleError::TooManyProcesses(n));
    }
    let nf = 1usize << (2 * n);
    let fresh = || vec![u32::MAX; g.node_count() * nf];
    let merge = |a: [bool; 5], b: [bool; 5]| std::array::from_fn(|i| a[i] || b[i]);
    #[cfg(feature = "parallel")]
    let out = {
        use rayon::prelude::*;
        (0..g.node_count())
            .into_par_iter()
            .map_init(fresh, |seen, v| node_verdicts(g, n, v, seen))
            .reduce(|| [false; 5], merge)
    };
    #[cfg(not(feature = "parallel"))]
    let out = {
        let mut seen = fresh();
        (0..g.node_count()).map(|v| node_verdicts(g, n, v, &mut seen)).fold([false; 5], merge)
    };
    Ok(out)
}

/// Feature sets of the closed walks through `v`, checked against each
/// clause. `seen` entries equal to `v` mark pairs already queued.
fn node_verdicts(g: &StateGraph, n: usize, v: usize, seen: &mut [u32]) -> [bool; 5] {
    let nf = 1usize << (2 * n);
    let feat = |a: &crate::model::Action| -> usize {
        let q = a.pid().index();
        let mut f = 1 << q;
        if a.is_return() {
            f |= 1 << (n + q);
        }
        f
    };
    let generation = v as u32;
    let entry = &g.nodes[v];
    let pending: Vec<bool> = (0..n).map(|q| entry.is_pending(Pid::from_index(q))).collect();
    let mut found = vec![false; nf];
    let mut queue: Vec<(u32, usize)> = Vec::new();
    for (a, w) in &g.succ[v] {
        let s = (*w, feat(a));
        let k = s.0 as usize * nf + s.1;
        if seen[k] != generation {
            seen[k] = generation;
            queue.push(s);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let (u, f) = queue[head];
        head += 1;
        if u as usize == v {
            found[f] = true;
        }
        for (a, w) in &g.succ[u as usize] {
            let s = (*w, f | feat(a));
            let k = s.0 as usize * nf + s.1;
            if seen[k] != generation {
                seen[k] = generation;
                queue.push(s);
            }
        }
    }
    let mut out = [false; 5];
    for (f, hit) in found.iter().enumerate() {
        if !hit {
            continue;
        }
        let s = LoopSummary {
            pending: pending.clone(),
            acts: (0..n).map(|q| f & (1 << q) != 0).collect(),
            rets: (0..n).map(|q| f & (1 << (n + q)) != 0).collect(),
        };
        for (i, p) in PropertyId::ALL.into_iter().enumerate() {
            out[i] |= clause_violated(p, &s);
        }
    }
    out
}
