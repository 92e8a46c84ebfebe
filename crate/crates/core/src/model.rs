//! Shared domain types: identifiers, TSO actions, configurations, traces and
//! lasso witnesses, plus the text formats used for trace and lasso files.

use std::fmt;

use thiserror::Error;

/// A value of the library's finite data domain, as an index into the
/// domain's symbol table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Val(pub u16);

/// A shared memory location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Loc(pub u16);

/// A method of the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodId(pub u16);

/// A program position (global across all methods).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PosId(pub u32);

/// A process identifier. Process ids are 1-based, as in action text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pid(pub u16);

impl Pid {
    /// Builds a pid from a 0-based slot index.
    pub fn from_index(i: usize) -> Self {
        Pid(i as u16 + 1)
    }

    /// 0-based slot index into per-process vectors.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Name lookup for everything an action can mention.
pub trait Symbols {
    fn value_name(&self, v: Val) -> &str;
    fn value_id(&self, name: &str) -> Option<Val>;
    fn loc_name(&self, l: Loc) -> &str;
    fn loc_id(&self, name: &str) -> Option<Loc>;
    fn method_name(&self, m: MethodId) -> &str;
    fn method_id(&self, name: &str) -> Option<MethodId>;
}

/// The TSO action alphabet.
///
/// Variant order follows the rule order Tau, Read, Write, Cas, Flush, Call,
/// Return; the derived `Ord` is used for deterministic tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Tau { pid: Pid },
    Read { pid: Pid, loc: Loc, val: Val },
    Write { pid: Pid, loc: Loc, val: Val },
    Cas { pid: Pid, loc: Loc, expected: Val, new: Val },
    Flush { pid: Pid, loc: Loc, val: Val },
    Call { pid: Pid, method: MethodId, arg: Val },
    Return { pid: Pid, method: MethodId, val: Val },
}

impl Action {
    pub fn pid(&self) -> Pid {
        match *self {
            Action::Tau { pid }
            | Action::Read { pid, .. }
            | Action::Write { pid, .. }
            | Action::Cas { pid, .. }
            | Action::Flush { pid, .. }
            | Action::Call { pid, .. }
            | Action::Return { pid, .. } => pid,
        }
    }

    pub fn is_return(&self) -> bool {
        matches!(self, Action::Return { .. })
    }

    pub fn is_call(&self) -> bool {
        matches!(self, Action::Call { .. })
    }

    pub fn is_flush(&self) -> bool {
        matches!(self, Action::Flush { .. })
    }

    /// Key giving the deterministic exploration order: process id first,
    /// then rule order, then values.
    pub fn sort_key(&self) -> (Pid, Action) {
        (self.pid(), *self)
    }

    /// Renders the action in its text form, e.g. `write(1,x,a)`.
    pub fn display<'a, S: Symbols + ?Sized>(&'a self, syms: &'a S) -> ActionDisplay<'a, S> {
        ActionDisplay { action: self, syms }
    }
}

pub struct ActionDisplay<'a, S: ?Sized> {
    action: &'a Action,
    syms: &'a S,
}

impl<S: Symbols + ?Sized> fmt::Display for ActionDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.syms;
        match *self.action {
            Action::Tau { pid } => write!(f, "tau({pid})"),
            Action::Read { pid, loc, val } => {
                write!(f, "read({pid},{},{})", s.loc_name(loc), s.value_name(val))
            }
            Action::Write { pid, loc, val } => {
                write!(f, "write({pid},{},{})", s.loc_name(loc), s.value_name(val))
            }
            Action::Cas {
                pid,
                loc,
                expected,
                new,
            } => write!(
                f,
                "cas({pid},{},{},{})",
                s.loc_name(loc),
                s.value_name(expected),
                s.value_name(new)
            ),
            Action::Flush { pid, loc, val } => {
                write!(f, "flush({pid},{},{})", s.loc_name(loc), s.value_name(val))
            }
            Action::Call { pid, method, arg } => {
                write!(f, "call({pid},{},{})", s.method_name(method), s.value_name(arg))
            }
            Action::Return { pid, method, val } => write!(
                f,
                "return({pid},{},{})",
                s.method_name(method),
                s.value_name(val)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseActionError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

/// Parses one action line. `line` is only used for error reporting.
pub fn parse_action<S: Symbols + ?Sized>(
    text: &str,
    line: usize,
    syms: &S,
) -> Result<Action, ParseActionError> {
    let err = |col: usize, msg: String| ParseActionError { line, col, msg };
    let lead = text.len() - text.trim_start().len();
    let body = text.trim();
    let open = body
        .find('(')
        .ok_or_else(|| err(lead + 1, "expected `(`".into()))?;
    if !body.ends_with(')') {
        return Err(err(lead + body.len(), "expected `)` at end of action".into()));
    }
    let kind = &body[..open];
    let inner = &body[open + 1..body.len() - 1];
    // (text, 1-based column) for each argument
    let mut args = Vec::new();
    let mut offset = lead + open + 1;
    for piece in inner.split(',') {
        let skip = piece.len() - piece.trim_start().len();
        args.push((piece.trim(), offset + skip + 1));
        offset += piece.len() + 1;
    }
    let arity = match kind {
        "tau" => 1,
        "read" | "write" | "flush" | "call" | "return" => 3,
        "cas" => 4,
        _ => return Err(err(lead + 1, format!("unknown action kind `{kind}`"))),
    };
    if args.len() != arity {
        return Err(err(
            lead + open + 1,
            format!("`{kind}` takes {arity} argument(s), found {}", args.len()),
        ));
    }
    let (ptext, pcol) = args[0];
    let pid: u16 = ptext
        .parse()
        .ok()
        .filter(|&p| p >= 1)
        .ok_or_else(|| err(pcol, format!("invalid process id `{ptext}`")))?;
    let pid = Pid(pid);
    let loc = |i: usize| {
        let (t, c) = args[i];
        syms.loc_id(t)
            .ok_or_else(|| err(c, format!("unknown location `{t}`")))
    };
    let val = |i: usize| {
        let (t, c) = args[i];
        syms.value_id(t)
            .ok_or_else(|| err(c, format!("unknown value `{t}`")))
    };
    let method = |i: usize| {
        let (t, c) = args[i];
        syms.method_id(t)
            .ok_or_else(|| err(c, format!("unknown method `{t}`")))
    };
    Ok(match kind {
        "tau" => Action::Tau { pid },
        "read" => Action::Read { pid, loc: loc(1)?, val: val(2)? },
        "write" => Action::Write { pid, loc: loc(1)?, val: val(2)? },
        "flush" => Action::Flush { pid, loc: loc(1)?, val: val(2)? },
        "cas" => Action::Cas {
            pid,
            loc: loc(1)?,
            expected: val(2)?,
            new: val(3)?,
        },
        "call" => Action::Call { pid, method: method(1)?, arg: val(2)? },
        "return" => Action::Return { pid, method: method(1)?, val: val(2)? },
        _ => unreachable!(),
    })
}

/// Control state of one process: in the client, or at a library position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Control {
    Client,
    Lib(PosId),
}

/// A store buffer. Entries are kept newest-first: a write prepends at index
/// 0, a flush removes the last (oldest) entry.
pub type Buffer = Vec<(Loc, Val)>;

/// A TSO configuration `(p, d, u)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub control: Vec<Control>,
    pub memory: Vec<Val>,
    pub buffers: Vec<Buffer>,
}

impl Configuration {
    pub fn procs(&self) -> usize {
        self.control.len()
    }

    pub fn buffers_empty(&self) -> bool {
        self.buffers.iter().all(|b| b.is_empty())
    }

    pub fn is_pending(&self, pid: Pid) -> bool {
        self.control[pid.index()] != Control::Client
    }

    pub fn max_buffer_len(&self) -> usize {
        self.buffers.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub type Trace = Vec<Action>;

/// An ultimately periodic execution: `stem · cycle^ω`, where `entry` is the
/// configuration reached after the stem and again after every cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWitness {
    pub stem: Trace,
    pub cycle: Trace,
    pub entry: Configuration,
}

/// The subsequence of `t` performed by `pid`, flushes included.
pub fn project_by_process(t: &[Action], pid: Pid) -> Trace {
    t.iter().copied().filter(|a| a.pid() == pid).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("action {index}: call while process {pid} already has a pending call")]
    NestedCall { index: usize, pid: Pid },
    #[error("action {index}: return by process {pid} without a pending call")]
    UnmatchedReturn { index: usize, pid: Pid },
    #[error("action {index}: return of a different method than the pending call")]
    MethodMismatch { index: usize, pid: Pid },
}

/// Call actions with no matching return, as `(1-based index, call)` pairs in
/// trace order.
pub fn pending_invocations(t: &[Action]) -> Result<Vec<(usize, Action)>, TraceError> {
    use std::collections::BTreeMap;
    let mut open: BTreeMap<Pid, (usize, Action)> = BTreeMap::new();
    for (i, a) in t.iter().enumerate() {
        let index = i + 1;
        match *a {
            Action::Call { pid, .. } => {
                if open.insert(pid, (index, *a)).is_some() {
                    return Err(TraceError::NestedCall { index, pid });
                }
            }
            Action::Return { pid, method, .. } => match open.remove(&pid) {
                None => return Err(TraceError::UnmatchedReturn { index, pid }),
                Some((_, Action::Call { method: m, .. })) if m != method => {
                    return Err(TraceError::MethodMismatch { index, pid })
                }
                Some(_) => {}
            },
            _ => {}
        }
    }
    let mut out: Vec<_> = open.into_values().collect();
    out.sort_by_key(|(i, _)| *i);
    Ok(out)
}

/// Renders a trace file: one action per line.
pub fn format_trace<S: Symbols + ?Sized>(t: &[Action], syms: &S) -> String {
    let mut s = String::new();
    for a in t {
        s.push_str(&a.display(syms).to_string());
        s.push('\n');
    }
    s
}

/// Parses a trace file. Blank lines and `#` comments are skipped.
pub fn parse_trace<S: Symbols + ?Sized>(text: &str, syms: &S) -> Result<Trace, ParseActionError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        })
        .map(|(i, l)| parse_action(l, i + 1, syms))
        .collect()
}

pub const STEM_HEADER: &str = "--- stem ---";
pub const LOOP_HEADER: &str = "--- loop ---";

/// Renders a lasso file: a stem section followed by a loop section.
pub fn format_lasso<S: Symbols + ?Sized>(stem: &[Action], cycle: &[Action], syms: &S) -> String {
    format!(
        "{STEM_HEADER}\n{}{LOOP_HEADER}\n{}",
        format_trace(stem, syms),
        format_trace(cycle, syms)
    )
}

/// Parses a lasso file into `(stem, loop)`.
pub fn parse_lasso<S: Symbols + ?Sized>(
    text: &str,
    syms: &S,
) -> Result<(Trace, Trace), ParseActionError> {
    let mut stem = Vec::new();
    let mut cycle = Vec::new();
    let mut section = 0;
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        match l {
            STEM_HEADER => section = 1,
            LOOP_HEADER => section = 2,
            _ => {
                let a = parse_action(raw, i + 1, syms)?;
                match section {
                    1 => stem.push(a),
                    2 => cycle.push(a),
                    _ => {
                        return Err(ParseActionError {
                            line: i + 1,
                            col: 1,
                            msg: format!("action before `{STEM_HEADER}`"),
                        })
                    }
                }
            }
        }
    }
    if section != 2 {
        return Err(ParseActionError {
            line: text.lines().count().max(1),
            col: 1,
            msg: format!("missing `{LOOP_HEADER}` section"),
        });
    }
    Ok((stem, cycle))
}
