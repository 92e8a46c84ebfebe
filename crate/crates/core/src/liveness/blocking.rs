//! Blocking pairs: `(control state, memory)` from which a single process
//! under SC has an infinite execution without returns.

use thiserror::Error;

use crate::library::{Command, LibraryIR};
use crate::model::{Action, Control, MethodId, Pid, PosId, Val};
use crate::system::MemoryModel;

/// Largest single-process SC graph built before giving up.
pub const DEFAULT_BLOCKING_LIMIT: usize = 8_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockingError {
    #[error("single-process SC graph has {nodes} nodes, above the limit of {limit}")]
    TooLarge { nodes: u128, limit: usize },
}

#[derive(Clone, Debug)]
pub struct BlockingPairs {
    nvals: usize,
    nlocs: usize,
    msize: usize,
    marked: Vec<bool>,
}

fn control_index(c: Control) -> usize {
    match c {
        Control::Client => 0,
        Control::Lib(p) => p.0 as usize + 1,
    }
}

fn control_of(i: usize) -> Control {
    if i == 0 {
        Control::Client
    } else {
        Control::Lib(PosId(i as u32 - 1))
    }
}

impl BlockingPairs {
    fn mem_index(&self, m: &[Val]) -> usize {
        m.iter().rev().fold(0, |acc, v| acc * self.nvals + v.0 as usize)
    }

    fn mem_of(&self, mut i: usize) -> Vec<Val> {
        (0..self.nlocs)
            .map(|_| {
                let v = Val((i % self.nvals) as u16);
                i /= self.nvals;
                v
            })
            .collect()
    }

    fn node(&self, c: Control, m: &[Val]) -> usize {
        control_index(c) * self.msize + self.mem_index(m)
    }

    pub fn contains(&self, c: Control, m: &[Val]) -> bool {
        self.marked[self.node(c, m)]
    }

    pub fn is_empty(&self) -> bool {
        !self.marked.iter().any(|b| *b)
    }

    pub fn count(&self) -> usize {
        self.marked.iter().filter(|b| **b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Control, Vec<Val>)> + '_ {
        self.marked
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| (control_of(i / self.msize), self.mem_of(i % self.msize)))
    }

    /// Return-free single-process SC successors of a node.
    fn succs(&self, lib: &LibraryIR, node: usize) -> Vec<(Action, usize)> {
        let pid = Pid(1);
        let c = control_of(node / self.msize);
        let d = self.mem_of(node % self.msize);
        let mut out = Vec::new();
        match c {
            Control::Client => {
                for (mi, m) in lib.methods.iter().enumerate() {
                    for (a, p) in m.initial.iter().enumerate() {
                        out.push((
                            Action::Call { pid, method: MethodId(mi as u16), arg: Val(a as u16) },
                            self.node(Control::Lib(*p), &d),
                        ));
                    }
                }
            }
            Control::Lib(p) => {
                for e in lib.out_edges(p) {
                    let to = Control::Lib(e.to);
                    let mut d2 = d.clone();
                    let action = match e.cmd {
                        Command::Tau => Action::Tau { pid },
                        Command::Read { loc, val } => {
                            if d[loc.0 as usize] != val {
                                continue;
                            }
                            Action::Read { pid, loc, val }
                        }
                        Command::Write { loc, val } => {
                            d2[loc.0 as usize] = val;
                            Action::Write { pid, loc, val }
                        }
                        Command::CasSuc { loc, expected, new } => {
                            if d[loc.0 as usize] != expected {
                                continue;
                            }
                            d2[loc.0 as usize] = new;
                            Action::Cas { pid, loc, expected, new }
                        }
                        Command::CasFail { loc, expected, new } => {
                            if d[loc.0 as usize] == expected {
                                continue;
                            }
                            Action::Cas { pid, loc, expected, new }
                        }
                    };
                    out.push((action, self.node(to, &d2)));
                }
            }
        }
        out
    }

    /// A return-free single-process execution from a blocking pair, as
    /// `(prefix, cycle)` actions of `pid`. Under TSO every write is followed
    /// by its own flush, so the execution needs a buffer of size one.
    pub fn lasso_from(
        &self,
        lib: &LibraryIR,
        c: Control,
        m: &[Val],
        pid: Pid,
        model: MemoryModel,
    ) -> (Vec<Action>, Vec<Action>) {
        let mut cur = self.node(c, m);
        assert!(self.marked[cur], "not a blocking pair");
        let mut seen: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        let mut steps: Vec<Action> = Vec::new();
        let mut starts: Vec<usize> = Vec::new();
        loop {
            if let Some(&k) = seen.get(&cur) {
                let split = starts[k];
                let cycle = steps.split_off(split);
                return (steps, cycle);
            }
            seen.insert(cur, starts.len());
            starts.push(steps.len());
            let (a, next) = self
                .succs(lib, cur)
                .into_iter()
                .find(|(_, t)| self.marked[*t])
                .expect("a blocking node has a blocking successor");
            let a = relabel(a, pid);
            steps.push(a);
            if let (MemoryModel::Tso, Action::Write { pid, loc, val }) = (model, a) {
                steps.push(Action::Flush { pid, loc, val });
            }
            cur = next;
        }
    }
}

fn relabel(a: Action, pid: Pid) -> Action {
    match a {
        Action::Tau { .. } => Action::Tau { pid },
        Action::Read { loc, val, .. } => Action::Read { pid, loc, val },
        Action::Write { loc, val, .. } => Action::Write { pid, loc, val },
        Action::Cas { loc, expected, new, .. } => Action::Cas { pid, loc, expected, new },
        Action::Flush { loc, val, .. } => Action::Flush { pid, loc, val },
        Action::Call { method, arg, .. } => Action::Call { pid, method, arg },
        Action::Return { method, val, .. } => Action::Return { pid, method, val },
    }
}

/// Builds the single-process SC graph over every (control, memory) pair,
/// drops return edges, and keeps the nodes that can reach a cycle: nodes
/// whose every path ends are peeled off from the dead ends backwards.
pub fn blocking_pairs(lib: &LibraryIR, limit: usize) -> Result<BlockingPairs, BlockingError> {
    let nvals = lib.values.len();
    let nlocs = lib.locations.len();
    let ncontrol = lib.positions.len() + 1;
    let msize_big = (nvals as u128).pow(nlocs as u32);
    let total = msize_big * ncontrol as u128;
    if total > limit as u128 {
        return Err(BlockingError::TooLarge { nodes: total, limit });
    }
    let msize = msize_big as usize;
    let n = total as usize;
    let mut bp = BlockingPairs {
        nvals,
        nlocs,
        msize,
        marked: vec![true; n],
    };
    let mut outdeg = vec![0u32; n];
    let mut rev_off = vec![0u32; n + 1];
    let mut fwd: Vec<(u32, u32)> = Vec::new();
    for v in 0..n {
        for (_, w) in bp.succs(lib, v) {
            fwd.push((v as u32, w as u32));
            outdeg[v] += 1;
            rev_off[w + 1] += 1;
        }
    }
    for i in 0..n {
        rev_off[i + 1] += rev_off[i];
    }
    let mut fill = rev_off.clone();
    let mut rev = vec![0u32; fwd.len()];
    for (v, w) in &fwd {
        let slot = &mut fill[*w as usize];
        rev[*slot as usize] = *v;
        *slot += 1;
    }
    drop(fwd);
    let mut queue: Vec<usize> = (0..n).filter(|&v| outdeg[v] == 0).collect();
    while let Some(w) = queue.pop() {
        bp.marked[w] = false;
        for k in rev_off[w]..rev_off[w + 1] {
            let v = rev[k as usize] as usize;
            outdeg[v] -= 1;
            if outdeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    Ok(bp)
}
