//! Control-state reachability for lossy channel machines, by a backward
//! fixpoint over upward-closed sets kept as antichains of minimal elements.

use super::machine::{ChannelMachine, Op, StateId, Sym};
use super::step::vec_subword;

type Word = Vec<Vec<Sym>>;

/// Minimal channel contents, per state, from which `target` is reachable.
pub fn backward_basis(cm: &ChannelMachine, target: StateId) -> Vec<Vec<Word>> {
    let nchan = cm.channels.len();
    let mut basis: Vec<Vec<Word>> = vec![Vec::new(); cm.states.len()];
    let mut work: Vec<(StateId, Word)> = Vec::new();
    let empty: Word = vec![Vec::new(); nchan];
    basis[target as usize].push(empty.clone());
    work.push((target, empty));
    while let Some((q, w)) = work.pop() {
        // w may have been superseded since it was queued
        if !basis[q as usize].contains(&w) {
            continue;
        }
        for t in cm.transitions.iter().filter(|t| t.to == q) {
            let mut pre = w.clone();
            for (ch, op) in &t.ops {
                let v = &mut pre[*ch as usize];
                match op {
                    Op::Send(a) => {
                        if v.first() == Some(a) {
                            v.remove(0);
                        }
                    }
                    Op::Recv(a) => v.push(*a),
                }
            }
            let set = &mut basis[t.from as usize];
            if set.iter().any(|m| vec_subword(m, &pre)) {
                continue;
            }
            set.retain(|m| !vec_subword(&pre, m));
            set.push(pre.clone());
            work.push((t.from, pre));
        }
    }
    basis
}

/// Whether `to` is reachable from `from` with all channels initially empty.
pub fn backward_reach(cm: &ChannelMachine, from: StateId, to: StateId) -> bool {
    let basis = backward_basis(cm, to);
    basis[from as usize].iter().any(|w| w.iter().all(|c| c.is_empty()))
}
