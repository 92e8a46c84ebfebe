//! Library intermediate representation: per-method transition graphs over
//! primitive commands, with initial and final program positions.

use std::fmt::Write as _;

use crate::model::{Loc, MethodId, PosId, Symbols, Val};

/// A primitive command labelling a library edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Tau,
    Read { loc: Loc, val: Val },
    Write { loc: Loc, val: Val },
    CasSuc { loc: Loc, expected: Val, new: Val },
    CasFail { loc: Loc, expected: Val, new: Val },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub cmd: Command,
    pub to: PosId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PosKind {
    /// `is_(m,a)` for one or more arguments `a`.
    Initial,
    /// `fs_(m,v)`.
    Final(Val),
    Inner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Position {
    pub method: MethodId,
    pub kind: PosKind,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodInfo {
    pub name: String,
    /// `initial[a]` is `is_(m,a)`; one entry per domain value.
    pub initial: Vec<PosId>,
    /// `(v, fs_(m,v))` for every return value the method can produce.
    pub finals: Vec<(Val, PosId)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryIR {
    pub values: Vec<String>,
    pub locations: Vec<String>,
    pub initial_memory: Vec<Val>,
    pub methods: Vec<MethodInfo>,
    pub positions: Vec<Position>,
    /// Outgoing edges, indexed by position.
    pub edges: Vec<Vec<Edge>>,
}

impl LibraryIR {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn position(&self, p: PosId) -> &Position {
        &self.positions[p.0 as usize]
    }

    pub fn out_edges(&self, p: PosId) -> &[Edge] {
        &self.edges[p.0 as usize]
    }

    /// The return value if `p` is some `fs_(m,v)`.
    pub fn final_value(&self, p: PosId) -> Option<Val> {
        match self.position(p).kind {
            PosKind::Final(v) => Some(v),
            _ => None,
        }
    }

    pub fn method_by_name(&self, name: &str) -> Option<MethodId> {
        self.methods
            .iter()
            .position(|m| m.name == name)
            .map(|i| MethodId(i as u16))
    }

    pub fn value(&self, name: &str) -> Val {
        self.value_id(name)
            .unwrap_or_else(|| panic!("no value named `{name}`"))
    }

    pub fn loc(&self, name: &str) -> Loc {
        self.loc_id(name)
            .unwrap_or_else(|| panic!("no location named `{name}`"))
    }

    /// True when no position has two outgoing edges with equal commands,
    /// i.e. an action and a source configuration fix the successor.
    pub fn is_label_deterministic(&self) -> bool {
        self.edges.iter().all(|out| {
            let mut cmds: Vec<Command> = out.iter().map(|e| e.cmd).collect();
            cmds.sort();
            cmds.windows(2).all(|w| w[0] != w[1])
        })
    }

    pub fn format_command(&self, c: &Command) -> String {
        let v = |x: Val| self.values[x.0 as usize].as_str();
        let l = |x: Loc| self.locations[x.0 as usize].as_str();
        match *c {
            Command::Tau => "tau".into(),
            Command::Read { loc, val } => format!("read {} {}", l(loc), v(val)),
            Command::Write { loc, val } => format!("write {} {}", l(loc), v(val)),
            Command::CasSuc { loc, expected, new } => {
                format!("cas_suc {} {} {}", l(loc), v(expected), v(new))
            }
            Command::CasFail { loc, expected, new } => {
                format!("cas_fail {} {} {}", l(loc), v(expected), v(new))
            }
        }
    }

    /// Canonical text dump in the raw-method syntax. Parsing it back yields
    /// an equivalent library; equal libraries produce identical text.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "values: {}", self.values.join(" "));
        let locs: Vec<String> = self
            .locations
            .iter()
            .zip(&self.initial_memory)
            .map(|(l, v)| format!("{l} = {}", self.values[v.0 as usize]))
            .collect();
        let _ = writeln!(s, "locations: {}", locs.join(", "));
        for (mi, m) in self.methods.iter().enumerate() {
            let _ = writeln!(s, "\nraw method {} {{", m.name);
            for (a, p) in m.initial.iter().enumerate() {
                let _ = writeln!(s, "  init {} p{}", self.values[a], p.0);
            }
            for (v, p) in &m.finals {
                let _ = writeln!(s, "  final {} p{}", self.values[v.0 as usize], p.0);
            }
            for (pi, pos) in self.positions.iter().enumerate() {
                if pos.method.0 as usize != mi {
                    continue;
                }
                for e in &self.edges[pi] {
                    let _ = writeln!(s, "  p{pi} -> p{} : {}", e.to.0, self.format_command(&e.cmd));
                }
            }
            s.push_str("}\n");
        }
        s
    }
}

impl Symbols for LibraryIR {
    fn value_name(&self, v: Val) -> &str {
        &self.values[v.0 as usize]
    }
    fn value_id(&self, name: &str) -> Option<Val> {
        self.values
            .iter()
            .position(|n| n == name)
            .map(|i| Val(i as u16))
    }
    fn loc_name(&self, l: Loc) -> &str {
        &self.locations[l.0 as usize]
    }
    fn loc_id(&self, name: &str) -> Option<Loc> {
        self.locations
            .iter()
            .position(|n| n == name)
            .map(|i| Loc(i as u16))
    }
    fn method_name(&self, m: MethodId) -> &str {
        &self.methods[m.0 as usize].name
    }
    fn method_id(&self, name: &str) -> Option<MethodId> {
        self.method_by_name(name)
    }
}

/// Checks the structural invariants of a library. Returns one message per
/// violation, naming the offending position or edge.
pub fn validate(lib: &LibraryIR) -> Vec<String> {
    let mut out = Vec::new();
    let np = lib.positions.len();
    let nv = lib.values.len();
    let nl = lib.locations.len();
    let pname = |p: usize| -> String {
        lib.positions
            .get(p)
            .map(|x| x.name.clone())
            .unwrap_or_else(|| format!("#{p}"))
    };
    if lib.initial_memory.len() != nl {
        out.push(format!(
            "{} locations but {} initial values",
            nl,
            lib.initial_memory.len()
        ));
    }
    for (i, v) in lib.initial_memory.iter().enumerate() {
        if v.0 as usize >= nv {
            out.push(format!("location #{i} has an undeclared initial value"));
        }
    }
    if lib.edges.len() != np {
        out.push(format!("{np} positions but {} edge lists", lib.edges.len()));
    }
    let mut is_initial = vec![false; np];
    for (mi, m) in lib.methods.iter().enumerate() {
        if m.initial.len() != nv {
            out.push(format!(
                "method {} has {} initial positions for {} values",
                m.name,
                m.initial.len(),
                nv
            ));
        }
        for p in &m.initial {
            let pi = p.0 as usize;
            if pi >= np {
                out.push(format!("method {}: initial position #{pi} does not exist", m.name));
                continue;
            }
            is_initial[pi] = true;
            if lib.positions[pi].method.0 as usize != mi {
                out.push(format!(
                    "method {}: initial position {} belongs to another method",
                    m.name,
                    pname(pi)
                ));
            }
        }
        for (v, p) in &m.finals {
            let pi = p.0 as usize;
            if pi >= np || lib.positions[pi].kind != PosKind::Final(*v) {
                out.push(format!(
                    "method {}: final position {} is not marked final for its value",
                    m.name,
                    pname(pi)
                ));
            }
        }
    }
    for (pi, pos) in lib.positions.iter().enumerate() {
        if pos.method.0 as usize >= lib.methods.len() {
            out.push(format!("position {} names an unknown method", pos.name));
        }
        if let PosKind::Final(v) = pos.kind {
            let listed = lib
                .methods
                .get(pos.method.0 as usize)
                .is_some_and(|m| m.finals.contains(&(v, PosId(pi as u32))));
            if !listed {
                out.push(format!("final position {} is not listed by its method", pos.name));
            }
        }
    }
    for (pi, out_edges) in lib.edges.iter().enumerate() {
        for e in out_edges {
            let ti = e.to.0 as usize;
            let edge = || {
                format!(
                    "edge {} -> {} ({})",
                    pname(pi),
                    pname(ti),
                    describe(&e.cmd, nl, nv)
                )
            };
            if ti >= np {
                out.push(format!("{}: target does not exist", edge()));
                continue;
            }
            if is_initial[ti] {
                out.push(format!("{}: enters an initial position", edge()));
            }
            if pi < np && matches!(lib.positions[pi].kind, PosKind::Final(_)) {
                out.push(format!("{}: leaves a final position", edge()));
            }
            if pi < np && lib.positions[pi].method != lib.positions[ti].method {
                out.push(format!("{}: crosses methods", edge()));
            }
            if !command_in_range(&e.cmd, nl, nv) {
                out.push(format!("{}: undeclared location or value", edge()));
            }
        }
    }
    out
}

fn command_in_range(c: &Command, nl: usize, nv: usize) -> bool {
    let l = |x: Loc| (x.0 as usize) < nl;
    let v = |x: Val| (x.0 as usize) < nv;
    match *c {
        Command::Tau => true,
        Command::Read { loc, val } | Command::Write { loc, val } => l(loc) && v(val),
        Command::CasSuc { loc, expected, new } | Command::CasFail { loc, expected, new } => {
            l(loc) && v(expected) && v(new)
        }
    }
}

fn describe(c: &Command, nl: usize, nv: usize) -> String {
    if command_in_range(c, nl, nv) {
        format!("{c:?}")
    } else {
        "out-of-range command".into()
    }
}
