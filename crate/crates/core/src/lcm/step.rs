//! One-step successors under perfect and lossy channel semantics.

use super::machine::{ChannelMachine, CmConfig, Op, Sym};

/// Subword (scattered subsequence) order.
pub fn is_subword(small: &[Sym], big: &[Sym]) -> bool {
    let mut it = big.iter();
    small.iter().all(|a| it.any(|b| b == a))
}

pub fn vec_subword(small: &[Vec<Sym>], big: &[Vec<Sym>]) -> bool {
    small.len() == big.len() && small.iter().zip(big).all(|(s, b)| is_subword(s, b))
}

/// Successors with reliable channels, as (transition index, configuration).
pub fn step_perfect(cm: &ChannelMachine, c: &CmConfig) -> Vec<(usize, CmConfig)> {
    let mut out = Vec::new();
    'next: for (i, t) in cm.transitions.iter().enumerate() {
        if t.from != c.q {
            continue;
        }
        let mut chans = c.chans.clone();
        for (ch, op) in &t.ops {
            let w = &mut chans[*ch as usize];
            match op {
                Op::Send(a) => w.insert(0, *a),
                Op::Recv(a) => {
                    if w.last() != Some(a) {
                        continue 'next;
                    }
                    w.pop();
                }
            }
        }
        out.push((i, CmConfig { q: t.to, chans }));
    }
    out
}

/// Canonical lossy successors: a receive of `a` may consume any occurrence
/// of `a`, losing everything to its right. Nothing else is lost. Every
/// lossy successor is a subword of one of these through the same transition.
pub fn step_lossy(cm: &ChannelMachine, c: &CmConfig) -> Vec<(usize, CmConfig)> {
    let mut out = Vec::new();
    for (i, t) in cm.transitions.iter().enumerate() {
        if t.from != c.q {
            continue;
        }
        let mut partial: Vec<Vec<Vec<Sym>>> = vec![c.chans.clone()];
        for (ch, op) in &t.ops {
            let ch = *ch as usize;
            let mut next = Vec::new();
            for chans in partial {
                match op {
                    Op::Send(a) => {
                        let mut chans = chans;
                        chans[ch].insert(0, *a);
                        next.push(chans);
                    }
                    Op::Recv(a) => {
                        for j in (0..chans[ch].len()).filter(|&j| chans[ch][j] == *a) {
                            let mut c2 = chans.clone();
                            c2[ch].truncate(j);
                            next.push(c2);
                        }
                    }
                }
            }
            partial = next;
        }
        for chans in partial {
            out.push((i, CmConfig { q: t.to, chans }));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// All subwords of a word, without duplicates.
pub fn subwords(w: &[Sym]) -> Vec<Vec<Sym>> {
    let mut out: Vec<Vec<Sym>> = (0u64..1 << w.len())
        .map(|mask| w.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| *a).collect())
        .collect();
    out.sort();
    out.dedup();
    out
}

fn lose_all(c: &CmConfig) -> Vec<CmConfig> {
    let mut acc: Vec<Vec<Vec<Sym>>> = vec![Vec::new()];
    for w in &c.chans {
        let subs = subwords(w);
        acc = acc
            .into_iter()
            .flat_map(|pre| {
                subs.iter().map(move |s| {
                    let mut p = pre.clone();
                    p.push(s.clone());
                    p
                })
            })
            .collect();
    }
    acc.into_iter().map(|chans| CmConfig { q: c.q, chans }).collect()
}

/// Every lossy successor: lose, step reliably, lose again. Exponential in
/// the channel contents; meant for short words.
pub fn step_lossy_full(cm: &ChannelMachine, c: &CmConfig) -> Vec<(usize, CmConfig)> {
    let mut out = Vec::new();
    for before in lose_all(c) {
        for (i, mid) in step_perfect(cm, &before) {
            for after in lose_all(&mid) {
                out.push((i, after));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
