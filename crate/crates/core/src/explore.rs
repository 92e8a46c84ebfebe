//! Breadth-first construction of the reachable state graph.
//!
//! Exploration is level-synchronous: the successors of one BFS level are
//! computed (in parallel when the `parallel` feature is on and
//! [`ExploreMode::Parallel`] is selected) and then merged in frontier order,
//! so node numbering and edge order never depend on thread scheduling.

use std::collections::HashMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::library::LibraryIR;
use crate::model::{Action, Configuration, Control, Symbols, Trace};
use crate::semantics::{enabled, StepResult};
use crate::system::{BufferBound, MemoryModel, SystemSpec};

pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExploreMode {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Clone, Copy, Debug)]
pub struct ExploreOptions {
    pub budget: usize,
    pub mode: ExploreMode,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            budget: DEFAULT_NODE_BUDGET,
            mode: ExploreMode::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct StateGraph {
    pub nodes: Vec<Configuration>,
    /// Outgoing edges per node, in the semantics' deterministic order.
    pub succ: Vec<Vec<(Action, u32)>>,
    /// BFS tree: the edge through which each node was first reached.
    pub parent: Vec<Option<(u32, Action)>>,
    index: HashMap<Configuration, u32>,
}

impl StateGraph {
    pub const INITIAL: u32 = 0;

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn index_of(&self, c: &Configuration) -> Option<u32> {
        self.index.get(c).copied()
    }

    /// The BFS-minimal trace from the initial node to `id`.
    pub fn path_to(&self, mut id: u32) -> Trace {
        let mut t = Vec::new();
        while let Some((p, a)) = self.parent[id as usize] {
            t.push(a);
            id = p;
        }
        t.reverse();
        t
    }

    /// BFS distance of every node from the initial node.
    pub fn depths(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.nodes.len()];
        for i in 1..self.nodes.len() {
            // parents always have smaller ids
            if let Some((p, _)) = self.parent[i] {
                d[i] = d[p as usize] + 1;
            }
        }
        d
    }

    fn insert(&mut self, c: Configuration, parent: Option<(u32, Action)>) -> (u32, bool) {
        if let Some(&id) = self.index.get(&c) {
            return (id, false);
        }
        let id = self.nodes.len() as u32;
        self.index.insert(c.clone(), id);
        self.nodes.push(c);
        self.succ.push(Vec::new());
        self.parent.push(parent);
        (id, true)
    }
}

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("exhaustive TSO exploration needs a finite buffer bound")]
    Unbounded,
    #[error("node budget of {budget} configurations exceeded")]
    Budget {
        budget: usize,
        partial: Box<StateGraph>,
        /// Nodes whose successors were not computed.
        frontier: Vec<u32>,
    },
}

pub fn explore(spec: &SystemSpec) -> Result<StateGraph, ExploreError> {
    explore_with(spec, ExploreOptions::default())
}

fn successors(spec: &SystemSpec, g: &StateGraph, level: &[u32], mode: ExploreMode) -> Vec<Vec<StepResult>> {
    #[cfg(feature = "parallel")]
    if mode == ExploreMode::Parallel && level.len() > 64 {
        use rayon::prelude::*;
        return level
            .par_iter()
            .map(|&id| enabled(spec, &g.nodes[id as usize]))
            .collect();
    }
    let _ = mode;
    level.iter().map(|&id| enabled(spec, &g.nodes[id as usize])).collect()
}

pub fn explore_with(spec: &SystemSpec, opts: ExploreOptions) -> Result<StateGraph, ExploreError> {
    if spec.model == MemoryModel::Tso && spec.bound == BufferBound::Unbounded {
        return Err(ExploreError::Unbounded);
    }
    let mut g = StateGraph::default();
    g.insert(spec.initial(), None);
    let mut level = vec![StateGraph::INITIAL];
    while !level.is_empty() {
        let steps = successors(spec, &g, &level, opts.mode);
        let mut next = Vec::new();
        for (k, (&id, out)) in level.iter().zip(steps).enumerate() {
            let mut edges = Vec::with_capacity(out.len());
            for s in out {
                if g.index_of(&s.next).is_none() && g.nodes.len() >= opts.budget {
                    let mut frontier: Vec<u32> = level[k..].to_vec();
                    frontier.extend(next);
                    return Err(ExploreError::Budget {
                        budget: opts.budget,
                        partial: Box::new(g),
                        frontier,
                    });
                }
                let (to, fresh) = g.insert(s.next, Some((id, s.action)));
                if fresh {
                    next.push(to);
                }
                edges.push((s.action, to));
            }
            g.succ[id as usize] = edges;
        }
        level = next;
    }
    Ok(g)
}

/// Canonical text of a configuration:
/// `p=<c1>,<c2>,..;d=<loc>:<val>,..;u=<pid>:[<loc>:<val>,..]|..`
/// where a control state is `clt` or `p<position id>` and buffers are
/// listed newest first.
pub fn canonical_text(lib: &LibraryIR, c: &Configuration) -> String {
    let mut s = String::from("p=");
    for (i, p) in c.control.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        match p {
            Control::Client => s.push_str("clt"),
            Control::Lib(q) => {
                let _ = write!(s, "p{}", q.0);
            }
        }
    }
    s.push_str(";d=");
    for (i, v) in c.memory.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{}:{}", lib.locations[i], lib.value_name(*v));
    }
    s.push_str(";u=");
    for (i, b) in c.buffers.iter().enumerate() {
        if i > 0 {
            s.push('|');
        }
        let _ = write!(s, "{}:[", i + 1);
        for (j, (l, v)) in b.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}:{}", lib.loc_name(*l), lib.value_name(*v));
        }
        s.push(']');
    }
    s
}

/// First 16 hex digits of the SHA-256 of the canonical text.
pub fn config_hash(lib: &LibraryIR, c: &Configuration) -> String {
    let d = Sha256::digest(canonical_text(lib, c).as_bytes());
    d.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Edge list (`SRC_HASH action DST_HASH` per line) and sidecar
/// (`HASH canonical-text` per line, in node order).
pub fn export(lib: &LibraryIR, g: &StateGraph) -> (String, String) {
    let hashes: Vec<String> = g.nodes.iter().map(|c| config_hash(lib, c)).collect();
    let mut edges = String::new();
    for (i, out) in g.succ.iter().enumerate() {
        for (a, j) in out {
            let _ = writeln!(edges, "{} {} {}", hashes[i], a.display(lib), hashes[*j as usize]);
        }
    }
    let mut side = String::new();
    for (h, c) in hashes.iter().zip(&g.nodes) {
        let _ = writeln!(side, "{h} {}", canonical_text(lib, c));
    }
    (edges, side)
}
