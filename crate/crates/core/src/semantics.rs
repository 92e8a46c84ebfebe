//! TSO and SC operational semantics of a library under the most general
//! client.

use thiserror::Error;

use crate::library::Command;
use crate::model::{Action, Buffer, Configuration, Control, Loc, MethodId, Pid, Val};
use crate::system::{MemoryModel, SystemSpec};

/// The value process `i` reads for `x`: its newest buffered write to `x`,
/// else memory.
pub fn lookup(u: &[Buffer], d: &[Val], i: Pid, x: Loc) -> Val {
    u[i.index()]
        .iter()
        .find(|(l, _)| *l == x)
        .map(|(_, v)| *v)
        .unwrap_or(d[x.0 as usize])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepResult {
    pub action: Action,
    pub next: Configuration,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("SC configuration has a non-empty store buffer (process {0})")]
    NonEmptyBufferUnderSc(Pid),
}

/// Appends the steps of process `pid` to `out`, in rule order.
pub fn steps_of(spec: &SystemSpec, c: &Configuration, pid: Pid, out: &mut Vec<StepResult>) {
    let lib = &*spec.lib;
    let i = pid.index();
    let start = out.len();
    let sc = spec.model == MemoryModel::Sc;
    match c.control[i] {
        Control::Client => {
            for (mi, m) in lib.methods.iter().enumerate() {
                for (a, pos) in m.initial.iter().enumerate() {
                    let mut next = c.clone();
                    next.control[i] = Control::Lib(*pos);
                    out.push(StepResult {
                        action: Action::Call {
                            pid,
                            method: MethodId(mi as u16),
                            arg: Val(a as u16),
                        },
                        next,
                    });
                }
            }
        }
        Control::Lib(pos) => {
            if let Some(v) = lib.final_value(pos) {
                let mut next = c.clone();
                next.control[i] = Control::Client;
                out.push(StepResult {
                    action: Action::Return {
                        pid,
                        method: lib.position(pos).method,
                        val: v,
                    },
                    next,
                });
            }
            let empty = c.buffers[i].is_empty();
            for e in lib.out_edges(pos) {
                let moved = || {
                    let mut n = c.clone();
                    n.control[i] = Control::Lib(e.to);
                    n
                };
                match e.cmd {
                    Command::Tau => out.push(StepResult {
                        action: Action::Tau { pid },
                        next: moved(),
                    }),
                    Command::Read { loc, val } => {
                        if lookup(&c.buffers, &c.memory, pid, loc) == val {
                            out.push(StepResult {
                                action: Action::Read { pid, loc, val },
                                next: moved(),
                            });
                        }
                    }
                    Command::Write { loc, val } => {
                        if sc {
                            let mut n = moved();
                            n.memory[loc.0 as usize] = val;
                            out.push(StepResult {
                                action: Action::Write { pid, loc, val },
                                next: n,
                            });
                        } else if spec.bound.allows(c.buffers[i].len()) {
                            let mut n = moved();
                            n.buffers[i].insert(0, (loc, val));
                            out.push(StepResult {
                                action: Action::Write { pid, loc, val },
                                next: n,
                            });
                        }
                    }
                    Command::CasSuc { loc, expected, new } => {
                        if empty && c.memory[loc.0 as usize] == expected {
                            let mut n = moved();
                            n.memory[loc.0 as usize] = new;
                            out.push(StepResult {
                                action: Action::Cas { pid, loc, expected, new },
                                next: n,
                            });
                        }
                    }
                    Command::CasFail { loc, expected, new } => {
                        if empty && c.memory[loc.0 as usize] != expected {
                            out.push(StepResult {
                                action: Action::Cas { pid, loc, expected, new },
                                next: moved(),
                            });
                        }
                    }
                }
            }
        }
    }
    if !sc {
        if let Some(&(loc, val)) = c.buffers[i].last() {
            let mut n = c.clone();
            n.buffers[i].pop();
            n.memory[loc.0 as usize] = val;
            out.push(StepResult {
                action: Action::Flush { pid, loc, val },
                next: n,
            });
        }
    }
    out[start..].sort_by_key(|s| s.action);
}

/// All transitions of the TSO system from `c`, ordered by process id, then
/// rule order, then values.
pub fn enabled_tso(spec: &SystemSpec, c: &Configuration) -> Vec<StepResult> {
    let tso = spec.with_model(MemoryModel::Tso);
    let mut out = Vec::new();
    for i in 0..spec.n {
        steps_of(&tso, c, Pid::from_index(i), &mut out);
    }
    out
}

/// All transitions of the SC system from `c`. Writes update memory directly
/// and there are no flushes.
pub fn enabled_sc(spec: &SystemSpec, c: &Configuration) -> Result<Vec<StepResult>, SemanticsError> {
    if let Some(i) = c.buffers.iter().position(|b| !b.is_empty()) {
        return Err(SemanticsError::NonEmptyBufferUnderSc(Pid::from_index(i)));
    }
    let sc = spec.with_model(MemoryModel::Sc);
    let mut out = Vec::new();
    for i in 0..spec.n {
        steps_of(&sc, c, Pid::from_index(i), &mut out);
    }
    Ok(out)
}

/// Transitions under the spec's own memory model. SC configurations built
/// by this crate never carry buffered writes, so no error is possible.
pub fn enabled(spec: &SystemSpec, c: &Configuration) -> Vec<StepResult> {
    let mut out = Vec::new();
    for i in 0..spec.n {
        steps_of(spec, c, Pid::from_index(i), &mut out);
    }
    out
}

/// Successors of `c` under action `a`.
pub fn apply(spec: &SystemSpec, c: &Configuration, a: &Action) -> Vec<Configuration> {
    if a.pid().index() >= spec.n {
        return Vec::new();
    }
    let mut out = Vec::new();
    steps_of(spec, c, a.pid(), &mut out);
    let mut v: Vec<Configuration> = out
        .into_iter()
        .filter(|s| s.action == *a)
        .map(|s| s.next)
        .collect();
    v.sort();
    v.dedup();
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("action {index} ({action:?}) is not enabled")]
pub struct ReplayError {
    /// 1-based position in the trace.
    pub index: usize,
    pub action: Action,
    pub config: Configuration,
    pub enabled: Vec<Action>,
}

/// Replays `t` from every configuration in `from`, keeping all
/// configurations the trace can lead to (more than one only when a position
/// has several edges with the same label).
pub fn replay_set(
    spec: &SystemSpec,
    t: &[Action],
    from: Vec<Configuration>,
) -> Result<Vec<Configuration>, ReplayError> {
    let mut cur = from;
    for (k, a) in t.iter().enumerate() {
        let mut next: Vec<Configuration> = cur.iter().flat_map(|c| apply(spec, c, a)).collect();
        next.sort();
        next.dedup();
        if next.is_empty() {
            let config = cur[0].clone();
            let enabled = enabled(spec, &config).into_iter().map(|s| s.action).collect();
            return Err(ReplayError {
                index: k + 1,
                action: *a,
                config,
                enabled,
            });
        }
        cur = next;
    }
    Ok(cur)
}

/// Replays `t` from `from`. For label-deterministic libraries the result is
/// unique; otherwise the least configuration in the canonical order is
/// returned.
pub fn replay(spec: &SystemSpec, t: &[Action], from: &Configuration) -> Result<Configuration, ReplayError> {
    replay_set(spec, t, vec![from.clone()]).map(|mut v| v.swap_remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_library;
    use crate::model::Symbols;
    use crate::system::{mgc_compose, BufferBound};
    use std::sync::Arc;

    fn spec(src: &str, n: usize, model: MemoryModel, k: usize) -> SystemSpec {
        mgc_compose(Arc::new(parse_library(src).unwrap()), n, model, BufferBound::Bounded(k)).unwrap()
    }

    #[test]
    fn lookup_cases() {
        let x = Loc(0);
        let y = Loc(1);
        let d = vec![Val(0), Val(0)];
        assert_eq!(lookup(&[vec![]], &d, Pid(1), x), Val(0));
        // write 1 then write 2: newest at head
        assert_eq!(lookup(&[vec![(x, Val(2)), (x, Val(1))]], &d, Pid(1), x), Val(2));
        assert_eq!(lookup(&[vec![(y, Val(5))]], &d, Pid(1), x), Val(0));
    }

    #[test]
    fn initial_enables_only_calls() {
        let s = spec("values: a\nmethod m { return a }", 1, MemoryModel::Tso, 1);
        let steps = enabled_tso(&s, &s.initial());
        assert_eq!(steps.len(), 1);
        assert!(steps[0].action.is_call());
        let s = spec("values: a b\nmethod m1 { return a }\nmethod m2 { return b }", 2, MemoryModel::Tso, 1);
        let steps = enabled_tso(&s, &s.initial());
        assert_eq!(steps.len(), 2 * 2 * 2);
        assert!(steps.iter().all(|s| s.action.is_call()));
    }

    #[test]
    fn flush_takes_oldest() {
        let s = spec(
            "values: 0 a b\nlocations: x = 0\nmethod m { write x := a; write x := b; return a }",
            1,
            MemoryModel::Tso,
            2,
        );
        let lib = &s.lib;
        let mut c = s.initial();
        for a in ["call(1,m,0)", "write(1,x,a)", "write(1,x,b)"] {
            let act = crate::model::parse_action(a, 1, &**lib).unwrap();
            c = replay(&s, &[act], &c).unwrap();
        }
        let x = lib.loc("x");
        assert_eq!(c.buffers[0], vec![(x, lib.value("b")), (x, lib.value("a"))]);
        let flushes: Vec<_> = enabled_tso(&s, &c).into_iter().filter(|s| s.action.is_flush()).collect();
        assert_eq!(flushes.len(), 1);
        assert_eq!(flushes[0].action, Action::Flush { pid: Pid(1), loc: x, val: lib.value("a") });
        assert_eq!(flushes[0].next.memory[0], lib.value("a"));
        assert_eq!(flushes[0].next.buffers[0], vec![(x, lib.value("b"))]);
    }

    #[test]
    fn cas_needs_empty_buffer() {
        let s = spec(
            "values: 0 1\nlocations: x = 0, y = 0\nmethod m { write y := 1; cas x 0 1 { return 1 } else { return 0 } }",
            1,
            MemoryModel::Tso,
            1,
        );
        let lib = s.lib.clone();
        let t: Vec<Action> = ["call(1,m,0)", "write(1,y,1)"]
            .iter()
            .map(|a| crate::model::parse_action(a, 1, &*lib).unwrap())
            .collect();
        let c = replay(&s, &t, &s.initial()).unwrap();
        assert!(enabled_tso(&s, &c).iter().all(|s| !matches!(s.action, Action::Cas { .. })));
        let bad = crate::model::parse_action("cas(1,x,0,1)", 1, &*lib).unwrap();
        let err = replay(&s, &[bad], &c).unwrap_err();
        assert_eq!(err.index, 1);
    }

    #[test]
    fn sc_writes_memory_directly() {
        let s = spec("values: 0 a\nlocations: x = 0\nmethod m { write x := a; return a }", 1, MemoryModel::Sc, 1);
        let c = replay(
            &s,
            &[crate::model::parse_action("call(1,m,0)", 1, &*s.lib).unwrap()],
            &s.initial(),
        )
        .unwrap();
        let steps = enabled_sc(&s, &c).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].next.memory[0], s.lib.value_id("a").unwrap());
        assert!(steps[0].next.buffers_empty());
        let mut dirty = c.clone();
        dirty.buffers[0].push((Loc(0), Val(1)));
        assert!(enabled_sc(&s, &dirty).is_err());
    }

    #[test]
    fn empty_replay_is_identity() {
        let s = spec("values: a\nmethod m { return a }", 1, MemoryModel::Tso, 1);
        assert_eq!(replay(&s, &[], &s.initial()).unwrap(), s.initial());
    }
}
