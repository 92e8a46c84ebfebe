//! Bounded search for lossy runs that visit a state infinitely often.

use std::collections::{HashMap, VecDeque};

use super::machine::{ChannelMachine, CmConfig, StateId};
use super::step::step_lossy;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmLasso {
    pub start: CmConfig,
    /// (transition index, configuration reached), from `start`.
    pub stem: Vec<(usize, CmConfig)>,
    /// Ends at the configuration the stem ends at.
    pub cycle: Vec<(usize, CmConfig)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LassoResult {
    Witness(CmLasso),
    NoWitnessAtBound { channel_bound: usize, config_bound: usize, explored: usize },
}

/// Explores canonical lossy successors breadth-first, keeping channel
/// contents within `channel_bound` symbols each and at most `config_bound`
/// configurations, then looks for a reachable cycle through `target`.
pub fn bounded_lasso_search(
    cm: &ChannelMachine,
    target: StateId,
    channel_bound: usize,
    config_bound: usize,
) -> LassoResult {
    let start = cm.initial_config();
    let mut nodes: Vec<CmConfig> = vec![start.clone()];
    let mut index: HashMap<CmConfig, u32> = HashMap::from([(start.clone(), 0)]);
    let mut parent: Vec<(u32, usize)> = vec![(0, usize::MAX)];
    let mut succ: Vec<Vec<(usize, u32)>> = Vec::new();
    let mut head = 0;
    while head < nodes.len() {
        let c = nodes[head].clone();
        let mut out = Vec::new();
        for (t, next) in step_lossy(cm, &c) {
            if next.chans.iter().any(|w| w.len() > channel_bound) {
                continue;
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if nodes.len() >= config_bound {
                        continue;
                    }
                    let id = nodes.len() as u32;
                    index.insert(next.clone(), id);
                    nodes.push(next);
                    parent.push((head as u32, t));
                    id
                }
            };
            out.push((t, id));
        }
        succ.push(out);
        head += 1;
    }
    for v in 0..nodes.len() {
        if nodes[v].q != target {
            continue;
        }
        if let Some(cycle) = shortest_cycle(&succ, v as u32) {
            let mut stem = Vec::new();
            let mut cur = v as u32;
            while cur != 0 {
                let (p, t) = parent[cur as usize];
                stem.push((t, nodes[cur as usize].clone()));
                cur = p;
            }
            stem.reverse();
            let cycle = cycle.into_iter().map(|(t, w)| (t, nodes[w as usize].clone())).collect();
            return LassoResult::Witness(CmLasso { start, stem, cycle });
        }
    }
    LassoResult::NoWitnessAtBound { channel_bound, config_bound, explored: nodes.len() }
}

fn shortest_cycle(succ: &[Vec<(usize, u32)>], v: u32) -> Option<Vec<(usize, u32)>> {
    let mut prev: HashMap<u32, (u32, usize)> = HashMap::new();
    let mut q = VecDeque::new();
    for &(t, w) in &succ[v as usize] {
        if w == v {
            return Some(vec![(t, v)]);
        }
        if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
            e.insert((v, t));
            q.push_back(w);
        }
    }
    while let Some(u) = q.pop_front() {
        for &(t, w) in &succ[u as usize] {
            if w == v {
                let mut path = vec![(t, v)];
                let mut cur = u;
                while cur != v {
                    let (p, t2) = prev[&cur];
                    path.push((t2, cur));
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(w) {
                e.insert((u, t));
                q.push_back(w);
            }
        }
    }
    None
}

/// Checks that each step is a canonical lossy step of `cm`.
pub fn replay_lossy(cm: &ChannelMachine, start: &CmConfig, steps: &[(usize, CmConfig)]) -> bool {
    let mut cur = start.clone();
    for (t, next) in steps {
        if !step_lossy(cm, &cur).iter().any(|(t2, c)| t2 == t && c == next) {
            return false;
        }
        cur = next.clone();
    }
    true
}

/// Checks a lasso: stem and cycle replay, and the cycle returns to the
/// configuration it starts from.
pub fn validate_cm_lasso(cm: &ChannelMachine, l: &CmLasso) -> bool {
    let entry = l.stem.last().map(|(_, c)| c.clone()).unwrap_or_else(|| l.start.clone());
    !l.cycle.is_empty()
        && replay_lossy(cm, &l.start, &l.stem)
        && replay_lossy(cm, &entry, &l.cycle)
        && l.cycle.last().map(|(_, c)| c) == Some(&entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_pumping_loop() {
        let cm = ChannelMachine::parse_text(
            "states s t\nchannels c\nalphabet a\ninit s\ns --[c!a]--> t\nt --[c?a]--> s\n",
        )
        .unwrap();
        match bounded_lasso_search(&cm, 1, 2, 100) {
            LassoResult::Witness(l) => {
                assert!(validate_cm_lasso(&cm, &l));
                assert_eq!(l.cycle.len(), 2);
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn no_loop_through_dead_end() {
        let cm = ChannelMachine::parse_text(
            "states s t\nchannels c\nalphabet a\ninit s\ns --[c!a]--> s\ns --[c?a]--> t\n",
        )
        .unwrap();
        assert!(matches!(bounded_lasso_search(&cm, 1, 3, 100), LassoResult::NoWitnessAtBound { .. }));
    }
}
