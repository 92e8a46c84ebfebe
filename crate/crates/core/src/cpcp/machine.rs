//! The two-channel machine of an instance and its one-channel encoding.
//!
//! Two-channel machine states: `s0` (guess), `s1` (check), `s_trap`, plus
//! one fresh state per inner step of a gadget:
//!
//! * guess gadget `g{i}`: `c1!` each letter of `A[i]`, then `c2!` each letter
//!   of `B[i]`, from `s0` back to `s0`;
//! * padding `pad1_x` / `pad2_x`: a single `c1!x` / `c2!x` loop on `s0`;
//! * `s0 --eps--> s1` and `s1 --eps--> s_trap`;
//! * check gadget `k{i}`: `c1?` the letters of `A[i]`, `c1!` the letters of
//!   `B[i]`, `c2?` the letters of `B[i]`, `c2!` the letters of `A[i]`, from
//!   `s1` back to `s1`.
//!
//! The state count is `3 + sum_i (3 * (|A[i]| + |B[i]|) - 2)`.
//!
//! A run that stays in the check loop forever cannot lose symbols forever,
//! so it eventually cycles with `c1` content `w` such that appending the
//! B-word of the cycle to `w` equals the A-word followed by `w`. That forces
//! the two words to be rotations of each other.
//!
//! The one-channel machine keeps `⊥2 X2 ⊥2 ⊥1 X1 ⊥1` (left to right), so
//! reading from the right it sees the `c1` segment first. Every two-channel
//! transition with channel operations becomes a gadget that rotates the
//! whole channel once, applying the operations on the way.

use thiserror::Error;

use super::instance::CpcpInstance;
use crate::lcm::{step_perfect, ChanId, ChannelMachine, CmConfig, Op, StateId, Sym, Transition};

pub const BOT1: &str = "⊥1";
pub const BOT2: &str = "⊥2";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("expected exactly the channels c1 and c2")]
    WrongChannels,
    #[error("alphabet already uses a delimiter name")]
    DelimiterClash,
    #[error("transition {0} is not enabled on the perfect run")]
    NotEnabled(usize),
}

/// Where the pieces of a built two-channel machine are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmLayout {
    pub s0: StateId,
    pub s1: StateId,
    pub trap: StateId,
    /// Transition sequence of each guess gadget.
    pub guess: Vec<Vec<usize>>,
    /// Transition sequence of each check gadget.
    pub check: Vec<Vec<usize>>,
    /// Padding transitions per letter, for `c1` and `c2`.
    pub pad1: Vec<usize>,
    pub pad2: Vec<usize>,
    pub to_check: usize,
    pub to_trap: usize,
}

fn chain(
    cm: &mut ChannelMachine,
    from: StateId,
    to: StateId,
    ops: &[(ChanId, Op)],
    label: &str,
) -> Vec<usize> {
    let mut out = Vec::new();
    let mut cur = from;
    for (k, op) in ops.iter().enumerate() {
        let next = if k + 1 == ops.len() {
            to
        } else {
            cm.add_state(format!("{label}_{}", k + 1))
        };
        out.push(cm.transitions.len());
        cm.transitions.push(Transition {
            from: cur,
            label: Some(label.to_string()),
            ops: vec![*op],
            to: next,
        });
        cur = next;
    }
    out
}

pub fn build_cm(inst: &CpcpInstance) -> ChannelMachine {
    build_cm_with_layout(inst).0
}

pub fn build_cm_with_layout(inst: &CpcpInstance) -> (ChannelMachine, CmLayout) {
    let mut cm = ChannelMachine {
        channels: vec!["c1".into(), "c2".into()],
        alphabet: inst.alphabet.iter().map(|c| c.to_string()).collect(),
        ..Default::default()
    };
    let s0 = cm.add_state("s0");
    let s1 = cm.add_state("s1");
    let trap = cm.add_state("s_trap");
    cm.init = s0;
    let sym = |c: char| inst.alphabet.iter().position(|x| *x == c).expect("letter in alphabet") as Sym;
    let sends = |ch: ChanId, w: &str| w.chars().map(|c| (ch, Op::Send(sym(c)))).collect::<Vec<_>>();
    let recvs = |ch: ChanId, w: &str| w.chars().map(|c| (ch, Op::Recv(sym(c)))).collect::<Vec<_>>();
    let mut guess = Vec::new();
    for (i, (a, b)) in inst.a.iter().zip(&inst.b).enumerate() {
        let ops: Vec<_> = sends(0, a).into_iter().chain(sends(1, b)).collect();
        guess.push(chain(&mut cm, s0, s0, &ops, &format!("g{}", i + 1)));
    }
    let mut pad1 = Vec::new();
    let mut pad2 = Vec::new();
    for (k, c) in inst.alphabet.iter().enumerate() {
        pad1.extend(chain(&mut cm, s0, s0, &[(0, Op::Send(k as Sym))], &format!("pad1_{c}")));
        pad2.extend(chain(&mut cm, s0, s0, &[(1, Op::Send(k as Sym))], &format!("pad2_{c}")));
    }
    let to_check = cm.transitions.len();
    cm.transitions.push(Transition { from: s0, label: None, ops: vec![], to: s1 });
    let mut check = Vec::new();
    for (i, (a, b)) in inst.a.iter().zip(&inst.b).enumerate() {
        let ops: Vec<_> = recvs(0, a)
            .into_iter()
            .chain(sends(0, b))
            .chain(recvs(1, b))
            .chain(sends(1, a))
            .collect();
        check.push(chain(&mut cm, s1, s1, &ops, &format!("k{}", i + 1)));
    }
    let to_trap = cm.transitions.len();
    cm.transitions.push(Transition { from: s1, label: None, ops: vec![], to: trap });
    let layout = CmLayout { s0, s1, trap, guess, check, pad1, pad2, to_check, to_trap };
    (cm, layout)
}

/// Expected state count of [`build_cm`].
pub fn cm_state_count(inst: &CpcpInstance) -> usize {
    3 + inst
        .a
        .iter()
        .zip(&inst.b)
        .map(|(a, b)| 3 * (a.chars().count() + b.chars().count()) - 2)
        .sum::<usize>()
}

/// The one-channel machine plus the correspondence with its source.
#[derive(Clone, Debug)]
pub struct SingleChannel {
    pub cm: ChannelMachine,
    /// Copy of each source state.
    pub state_map: Vec<StateId>,
    /// First transition of the gadget of each source transition.
    pub entry: Vec<usize>,
    /// Transitions from the new initial state to the copy of the source
    /// initial state.
    pub init_path: Vec<usize>,
    pub bot1: Sym,
    pub bot2: Sym,
}

pub fn to_single_channel(cm2: &ChannelMachine) -> Result<SingleChannel, MachineError> {
    if cm2.channels != ["c1", "c2"] {
        return Err(MachineError::WrongChannels);
    }
    if cm2.alphabet.iter().any(|a| a == BOT1 || a == BOT2) {
        return Err(MachineError::DelimiterClash);
    }
    let nsym = cm2.alphabet.len() as Sym;
    let (bot1, bot2) = (nsym, nsym + 1);
    let mut cm = ChannelMachine {
        states: cm2.states.clone(),
        channels: vec!["c".into()],
        alphabet: cm2.alphabet.iter().cloned().chain([BOT1.into(), BOT2.into()]).collect(),
        init: 0,
        transitions: Vec::new(),
    };
    let state_map: Vec<StateId> = (0..cm2.states.len() as StateId).collect();
    let start = cm.add_state("start");
    cm.init = start;
    let init_ops = [bot1, bot1, bot2, bot2].map(|d| (0, Op::Send(d)));
    let init_path = chain(&mut cm, start, cm2.init, &init_ops, "start");
    let mut entry = Vec::new();
    for (ti, t) in cm2.transitions.iter().enumerate() {
        entry.push(cm.transitions.len());
        if t.ops.is_empty() {
            cm.transitions.push(Transition { from: t.from, label: t.label.clone(), ops: vec![], to: t.to });
            continue;
        }
        let name = format!("t{ti}");
        let label = t.label.clone();
        let mut fresh = 0;
        let mut new_state = |cm: &mut ChannelMachine| {
            fresh += 1;
            cm.add_state(format!("{name}_{fresh}"))
        };
        let push = |cm: &mut ChannelMachine, from: StateId, op: Op, to: StateId| {
            cm.transitions.push(Transition { from, label: label.clone(), ops: vec![(0, op)], to });
        };
        let mut cur = t.from;
        for (ch, delim) in [(0 as ChanId, bot1), (1, bot2)] {
            let op = t.ops.iter().find(|(c, _)| *c == ch).map(|(_, o)| *o);
            let n1 = new_state(&mut cm);
            push(&mut cm, cur, Op::Recv(delim), n1);
            let mut l = new_state(&mut cm);
            push(&mut cm, n1, Op::Send(delim), l);
            if let Some(Op::Recv(a)) = op {
                let l2 = new_state(&mut cm);
                push(&mut cm, l, Op::Recv(a), l2);
                l = l2;
            }
            for b in 0..nsym {
                let m = new_state(&mut cm);
                push(&mut cm, l, Op::Recv(b), m);
                push(&mut cm, m, Op::Send(b), l);
            }
            let mut e = new_state(&mut cm);
            push(&mut cm, l, Op::Recv(delim), e);
            if let Some(Op::Send(a)) = op {
                let e2 = new_state(&mut cm);
                push(&mut cm, e, Op::Send(a), e2);
                e = e2;
            }
            let next = if ch == 0 { new_state(&mut cm) } else { t.to };
            push(&mut cm, e, Op::Send(delim), next);
            cur = next;
        }
    }
    Ok(SingleChannel { cm, state_map, entry, init_path, bot1, bot2 })
}

impl SingleChannel {
    /// The one-channel configuration encoding a two-channel one.
    pub fn encode(&self, c: &CmConfig) -> CmConfig {
        let mut w = vec![self.bot2];
        w.extend(&c.chans[1]);
        w.extend([self.bot2, self.bot1]);
        w.extend(&c.chans[0]);
        w.push(self.bot1);
        CmConfig { q: self.state_map[c.q as usize], chans: vec![w] }
    }

    /// One-channel transitions that perfectly simulate `run` (source
    /// transition indices) from `from`, and the configuration reached.
    pub fn lift(&self, from: &CmConfig, run: &[usize]) -> Result<(Vec<usize>, CmConfig), MachineError> {
        let is_copy = |q: StateId| (q as usize) < self.state_map.len();
        let mut cur = from.clone();
        let mut out = Vec::new();
        for &ti in run {
            let first = self.entry[ti];
            let (_, next) = step_perfect(&self.cm, &cur)
                .into_iter()
                .find(|(i, _)| *i == first)
                .ok_or(MachineError::NotEnabled(first))?;
            out.push(first);
            cur = next;
            while !is_copy(cur.q) {
                let steps = step_perfect(&self.cm, &cur);
                let [(i, next)] = steps.as_slice() else {
                    return Err(MachineError::NotEnabled(first));
                };
                out.push(*i);
                cur = next.clone();
            }
        }
        Ok((out, cur))
    }
}

/// A perfect run of the two-channel machine: a prefix, then a cycle that
/// starts and ends at the same configuration in `s1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmPlan {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    /// Channel contents at the start of the cycle.
    pub at_cycle: CmConfig,
}

fn run_perfect(cm: &ChannelMachine, from: &CmConfig, run: &[usize]) -> Option<CmConfig> {
    let mut cur = from.clone();
    for &t in run {
        cur = step_perfect(cm, &cur).into_iter().find(|(i, _)| *i == t)?.1;
    }
    Some(cur)
}

/// A lossless run visiting `s1` forever, for a solution `sol` (1-based
/// indices). With `A_sol = uv` and `B_sol = vu`, padding fills `c1` with
/// `A_sol^m u` and `c2` with `B_sol^m v` (oldest first), after which each
/// pass of the check gadgets along `sol` restores both channels.
pub fn cm_plan(inst: &CpcpInstance, cm: &ChannelMachine, layout: &CmLayout, sol: &[usize]) -> Option<CmPlan> {
    let (a, b) = inst.concat(sol);
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let letter = |c: char| inst.alphabet.iter().position(|x| *x == c).expect("letter in alphabet");
    let cycle: Vec<usize> = sol.iter().flat_map(|&i| layout.check[i - 1].iter().copied()).collect();
    for m in 0..=2 {
        for k in 0..a.len() {
            let (u, v) = a.split_at(k);
            if [v, u].concat() != b {
                continue;
            }
            let s1: Vec<char> = a.iter().cycle().take(m * a.len()).chain(u).copied().collect();
            let s2: Vec<char> = b.iter().cycle().take(m * b.len()).chain(v).copied().collect();
            let mut prefix: Vec<usize> = s1.iter().map(|c| layout.pad1[letter(*c)]).collect();
            prefix.extend(s2.iter().map(|c| layout.pad2[letter(*c)]));
            prefix.push(layout.to_check);
            let Some(at) = run_perfect(cm, &cm.initial_config(), &prefix) else { continue };
            if run_perfect(cm, &at, &cycle).as_ref() == Some(&at) {
                return Some(CmPlan { prefix, cycle, at_cycle: at });
            }
        }
    }
    None
}

/// The same plan on the one-channel machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SinglePlan {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
    pub at_cycle: CmConfig,
}

pub fn single_plan(sc: &SingleChannel, plan: &CmPlan) -> Result<SinglePlan, MachineError> {
    let start = sc.cm.initial_config();
    let mut cur = start;
    for &t in &sc.init_path {
        cur = step_perfect(&sc.cm, &cur)
            .into_iter()
            .find(|(i, _)| *i == t)
            .ok_or(MachineError::NotEnabled(t))?
            .1;
    }
    let (mut prefix, at) = sc.lift(&cur, &plan.prefix)?;
    prefix.splice(0..0, sc.init_path.iter().copied());
    let (cycle, back) = sc.lift(&at, &plan.cycle)?;
    if back != at {
        return Err(MachineError::NotEnabled(*cycle.last().unwrap_or(&0)));
    }
    Ok(SinglePlan { prefix, cycle, at_cycle: at })
}
