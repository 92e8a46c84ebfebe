//! Channel machines and their text format.
//!
//! ```text
//! states s0 s1
//! channels c
//! alphabet a b
//! init s0
//! s0 --go [c!a]--> s1
//! s1 --eps [nop]--> s0
//! s1 --[c?a; d!b]--> s1
//! ```
//!
//! A label of `eps` (or none) is the silent label. Each transition carries
//! at most one operation per channel.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

pub type StateId = u32;
pub type ChanId = u16;
pub type Sym = u16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Send(Sym),
    Recv(Sym),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: StateId,
    /// `None` is the silent label.
    pub label: Option<String>,
    pub ops: Vec<(ChanId, Op)>,
    pub to: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChannelMachine {
    pub states: Vec<String>,
    pub channels: Vec<String>,
    pub alphabet: Vec<String>,
    pub init: StateId,
    pub transitions: Vec<Transition>,
}

/// A configuration: control state plus one word per channel. Words are
/// stored left to right; a send prepends on the left and a receive takes
/// the rightmost symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CmConfig {
    pub q: StateId,
    pub chans: Vec<Vec<Sym>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct CmParseError {
    pub line: usize,
    pub msg: String,
}

impl ChannelMachine {
    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| i as StateId)
    }

    pub fn sym_id(&self, name: &str) -> Option<Sym> {
        self.alphabet.iter().position(|s| s == name).map(|i| i as Sym)
    }

    pub fn chan_id(&self, name: &str) -> Option<ChanId> {
        self.channels.iter().position(|s| s == name).map(|i| i as ChanId)
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.states.push(name.into());
        self.states.len() as StateId - 1
    }

    pub fn initial_config(&self) -> CmConfig {
        CmConfig {
            q: self.init,
            chans: vec![Vec::new(); self.channels.len()],
        }
    }

    /// Problems with the machine's structure, one message each.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ns = self.states.len() as StateId;
        if self.init >= ns {
            out.push("initial state does not exist".into());
        }
        for (i, t) in self.transitions.iter().enumerate() {
            if t.from >= ns || t.to >= ns {
                out.push(format!("transition {i}: unknown state"));
            }
            let mut used = Vec::new();
            for (c, op) in &t.ops {
                if *c as usize >= self.channels.len() {
                    out.push(format!("transition {i}: unknown channel"));
                }
                let (Op::Send(a) | Op::Recv(a)) = op;
                if *a as usize >= self.alphabet.len() {
                    out.push(format!("transition {i}: unknown symbol"));
                }
                if used.contains(c) {
                    out.push(format!("transition {i}: two operations on one channel"));
                }
                used.push(*c);
            }
        }
        out
    }

    pub fn format_ops(&self, ops: &[(ChanId, Op)]) -> String {
        if ops.is_empty() {
            return "nop".into();
        }
        ops.iter()
            .map(|(c, op)| match op {
                Op::Send(a) => format!("{}!{}", self.channels[*c as usize], self.alphabet[*a as usize]),
                Op::Recv(a) => format!("{}?{}", self.channels[*c as usize], self.alphabet[*a as usize]),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn format_transition(&self, t: &Transition) -> String {
        format!(
            "{} --{} [{}]--> {}",
            self.states[t.from as usize],
            t.label.as_deref().unwrap_or("eps"),
            self.format_ops(&t.ops),
            self.states[t.to as usize]
        )
    }

    pub fn format_config(&self, c: &CmConfig) -> String {
        let mut s = format!("{} |", self.states[c.q as usize]);
        for (ch, w) in self.channels.iter().zip(&c.chans) {
            let word: Vec<&str> = w.iter().map(|a| self.alphabet[*a as usize].as_str()).collect();
            let _ = write!(s, " {ch}=\"{}\"", word.join(" "));
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "states {}", self.states.join(" "));
        let _ = writeln!(s, "channels {}", self.channels.join(" "));
        let _ = writeln!(s, "alphabet {}", self.alphabet.join(" "));
        let _ = writeln!(s, "init {}", self.states[self.init as usize]);
        for t in &self.transitions {
            let _ = writeln!(s, "{}", self.format_transition(t));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<ChannelMachine, CmParseError> {
        let mut cm = ChannelMachine::default();
        let mut init: Option<String> = None;
        let mut pending: Vec<(usize, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("states") => cm.states.extend(words.map(str::to_string)),
                Some("channels") => cm.channels.extend(words.map(str::to_string)),
                Some("alphabet") => cm.alphabet.extend(words.map(str::to_string)),
                Some("init") => init = words.next().map(str::to_string),
                _ => pending.push((i + 1, line.to_string())),
            }
        }
        let err = |line: usize, msg: String| CmParseError { line, msg };
        let init = init.ok_or_else(|| err(1, "missing `init`".into()))?;
        cm.init = cm
            .state_id(&init)
            .ok_or_else(|| err(1, format!("unknown initial state `{init}`")))?;
        let states: HashMap<String, StateId> = cm
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as StateId))
            .collect();
        for (ln, line) in pending {
            let bad = |m: &str| err(ln, format!("{m} in `{line}`"));
            let (from, rest) = line.split_once("--").ok_or_else(|| bad("expected `--`"))?;
            let (mid, to) = rest.split_once("]-->").ok_or_else(|| bad("expected `]-->`"))?;
            let (label, ops) = mid.split_once('[').ok_or_else(|| bad("expected `[`"))?;
            let from = *states.get(from.trim()).ok_or_else(|| bad("unknown source state"))?;
            let to = *states.get(to.trim()).ok_or_else(|| bad("unknown target state"))?;
            let label = match label.trim() {
                "" | "eps" | "ε" => None,
                l => Some(l.to_string()),
            };
            let mut parsed = Vec::new();
            for op in ops.split(';').map(str::trim).filter(|o| !o.is_empty()) {
                if op == "nop" {
                    continue;
                }
                let (c, a, send) = if let Some((c, a)) = op.split_once('!') {
                    (c, a, true)
                } else if let Some((c, a)) = op.split_once('?') {
                    (c, a, false)
                } else {
                    return Err(bad("malformed operation"));
                };
                let c = cm.chan_id(c.trim()).ok_or_else(|| bad("unknown channel"))?;
                let a = cm.sym_id(a.trim()).ok_or_else(|| bad("unknown symbol"))?;
                parsed.push((c, if send { Op::Send(a) } else { Op::Recv(a) }));
            }
            cm.transitions.push(Transition { from, label, ops: parsed, to });
        }
        let v = cm.validate();
        if let Some(m) = v.first() {
            return Err(err(0, m.clone()));
        }
        Ok(cm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let src = "states s0 s1\nchannels c d\nalphabet a b\ninit s0\ns0 --go [c!a; d?b]--> s1\ns1 --eps [nop]--> s0\n";
        let cm = ChannelMachine::parse_text(src).unwrap();
        assert_eq!(cm.transitions.len(), 2);
        assert_eq!(cm.transitions[1].label, None);
        assert!(cm.transitions[1].ops.is_empty());
        assert_eq!(ChannelMachine::parse_text(&cm.to_text()).unwrap(), cm);
    }

    #[test]
    fn rejects_two_ops_on_one_channel() {
        let src = "states s\nchannels c\nalphabet a\ninit s\ns --[c!a; c?a]--> s\n";
        assert!(ChannelMachine::parse_text(src).is_err());
    }
}
