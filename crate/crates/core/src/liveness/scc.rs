//! Strongly connected components of restricted state graphs and closed
//! walks through them.

use std::collections::VecDeque;

use crate::explore::StateGraph;
use crate::model::{Action, Pid};

/// Which edges of the state graph take part in a search.
#[derive(Clone, Copy, Debug)]
pub(super) struct EdgeFilter {
    /// Both endpoints must have this process pending.
    pub pending_pid: Option<usize>,
    /// Only actions of this process.
    pub only_pid: Option<usize>,
    /// Forbidden returns: of this process, or of anyone when `None`.
    pub no_return_of: Option<usize>,
}

impl EdgeFilter {
    fn allows(&self, g: &StateGraph, src: u32, a: &Action, dst: u32) -> bool {
        if let Some(q) = self.pending_pid {
            let p = Pid::from_index(q);
            if !g.nodes[src as usize].is_pending(p) || !g.nodes[dst as usize].is_pending(p) {
                return false;
            }
        }
        if let Some(q) = self.only_pid {
            if a.pid().index() != q {
                return false;
            }
        }
        if a.is_return() {
            match self.no_return_of {
                None => return false,
                Some(q) if a.pid().index() == q => return false,
                _ => {}
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) struct GEdge {
    pub src: u32,
    pub dst: u32,
    pub action: Action,
}

#[derive(Clone, Debug)]
pub(super) enum Required {
    Edge(GEdge),
}

/// Tarjan's algorithm, iterative. Returns the component index per node.
fn tarjan(adj: &[Vec<u32>]) -> Vec<u32> {
    let n = adj.len();
    const UNSET: u32 = u32::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;
    let mut call: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != UNSET {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&mut (v, ref mut k)) = call.last_mut() {
            let vu = v as usize;
            if *k < adj[vu].len() {
                let w = adj[vu][*k];
                *k += 1;
                let wu = w as usize;
                if index[wu] == UNSET {
                    index[wu] = next_index;
                    low[wu] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[wu] = true;
                    call.push((w, 0));
                } else if on_stack[wu] {
                    low[vu] = low[vu].min(index[wu]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    let pu = parent as usize;
                    low[pu] = low[pu].min(low[vu]);
                }
                if low[vu] == index[vu] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w as usize] = false;
                        comp[w as usize] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    comp
}

/// Finds, over all components of the filtered graph, the one containing the
/// smallest node id for which `pick` accepts the component's internal edges.
/// Node ids follow BFS order, so that node has a minimal stem.
pub(super) fn search(
    g: &StateGraph,
    filter: &EdgeFilter,
    pick: impl Fn(&[GEdge]) -> Option<Vec<Required>>,
) -> Option<(u32, Vec<Required>)> {
    let n = g.node_count();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut kept: Vec<GEdge> = Vec::new();
    for (src, out) in g.succ.iter().enumerate() {
        for (a, dst) in out {
            if filter.allows(g, src as u32, a, *dst) {
                adj[src].push(*dst);
                kept.push(GEdge { src: src as u32, dst: *dst, action: *a });
            }
        }
    }
    let comp = tarjan(&adj);
    let ncomp = comp.iter().map(|c| c + 1).max().unwrap_or(0) as usize;
    let mut internal: Vec<Vec<GEdge>> = vec![Vec::new(); ncomp];
    for e in kept {
        let c = comp[e.src as usize];
        if c == comp[e.dst as usize] {
            internal[c as usize].push(e);
        }
    }
    let mut min_node = vec![u32::MAX; ncomp];
    for (v, c) in comp.iter().enumerate() {
        let m = &mut min_node[*c as usize];
        *m = (*m).min(v as u32);
    }
    let mut best: Option<(u32, Vec<Required>)> = None;
    for c in 0..ncomp {
        if internal[c].is_empty() {
            continue;
        }
        if best.as_ref().is_some_and(|b| b.0 <= min_node[c]) {
            continue;
        }
        if let Some(req) = pick(&internal[c]) {
            best = Some((min_node[c], req));
        }
    }
    best
}

/// One internal edge per process, if every process has one.
pub(super) fn cover_all_pids(edges: &[GEdge], n: usize) -> Option<Vec<Required>> {
    let mut out = Vec::new();
    for q in 0..n {
        let e = edges.iter().find(|e| e.action.pid().index() == q)?;
        out.push(Required::Edge(*e));
    }
    Some(out)
}

fn bfs_path(g: &StateGraph, filter: &EdgeFilter, from: u32, to: u32) -> Vec<Action> {
    if from == to {
        return Vec::new();
    }
    let mut prev: std::collections::HashMap<u32, (u32, Action)> = std::collections::HashMap::new();
    let mut q = VecDeque::from([from]);
    prev.insert(from, (from, Action::Tau { pid: Pid(1) }));
    while let Some(v) = q.pop_front() {
        for (a, w) in &g.succ[v as usize] {
            if prev.contains_key(w) || !filter.allows(g, v, a, *w) {
                continue;
            }
            prev.insert(*w, (v, *a));
            if *w == to {
                let mut path = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, a) = prev[&cur];
                    path.push(a);
                    cur = p;
                }
                path.reverse();
                return path;
            }
            q.push_back(*w);
        }
    }
    panic!("no path inside a strongly connected component");
}

/// A closed walk from `entry` that takes every required edge, built from
/// shortest connecting paths inside the filtered graph.
pub(super) fn closed_walk(g: &StateGraph, filter: &EdgeFilter, entry: u32, req: &[Required]) -> Vec<Action> {
    let mut walk = Vec::new();
    let mut cur = entry;
    for Required::Edge(e) in req {
        walk.extend(bfs_path(g, filter, cur, e.src));
        walk.push(e.action);
        cur = e.dst;
    }
    walk.extend(bfs_path(g, filter, cur, entry));
    walk
}
