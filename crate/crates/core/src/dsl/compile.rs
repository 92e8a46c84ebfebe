//! Lowering of parsed sources to [`LibraryIR`].
//!
//! Structured methods go through a small control-flow graph whose nodes
//! operate on registers. The graph is then expanded over the reachable
//! register valuations, masking registers that are dead at each node, so a
//! program position is a (node, live register values) pair.

use std::collections::{BTreeMap, HashMap};

use super::parse::{Cond, Expr, MethodAst, RawItem, SourceFile, Span, Stmt, StmtKind};
use super::DslError;
use crate::library::{Command, Edge, LibraryIR, MethodInfo, PosKind, Position};
use crate::model::{Loc, MethodId, PosId, Val};

const NONE: u16 = u16::MAX;
const ARG: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ex {
    Lit(Val),
    Reg(usize),
}

#[derive(Clone, Debug)]
enum Instr {
    Skip(usize),
    Read { reg: usize, loc: Loc, next: usize },
    Assign { reg: usize, e: Ex, next: usize },
    Write { loc: Loc, e: Ex, next: usize },
    Cas { loc: Loc, expected: Ex, new: Ex, suc: usize, fail: usize },
    Branch { a: Ex, b: Ex, eq: bool, then: usize, els: usize },
    Choose(Vec<usize>),
    Match { e: Ex, arms: Vec<(Val, usize)>, default: usize },
    Return(Ex),
    GotoLabel(String),
    Jump(usize),
    Halt,
}

impl Instr {
    fn succs(&self) -> Vec<usize> {
        match self {
            Instr::Skip(n) | Instr::Jump(n) => vec![*n],
            Instr::Read { next, .. } | Instr::Assign { next, .. } | Instr::Write { next, .. } => {
                vec![*next]
            }
            Instr::Cas { suc, fail, .. } => vec![*suc, *fail],
            Instr::Branch { then, els, .. } => vec![*then, *els],
            Instr::Choose(t) => t.clone(),
            Instr::Match { arms, default, .. } => {
                let mut v: Vec<usize> = arms.iter().map(|a| a.1).collect();
                v.push(*default);
                v
            }
            Instr::Return(_) | Instr::GotoLabel(_) | Instr::Halt => vec![],
        }
    }

    fn succs_mut(&mut self) -> Vec<&mut usize> {
        match self {
            Instr::Skip(n) | Instr::Jump(n) => vec![n],
            Instr::Read { next, .. } | Instr::Assign { next, .. } | Instr::Write { next, .. } => {
                vec![next]
            }
            Instr::Cas { suc, fail, .. } => vec![suc, fail],
            Instr::Branch { then, els, .. } => vec![then, els],
            Instr::Choose(t) => t.iter_mut().collect(),
            Instr::Match { arms, default, .. } => {
                let mut v: Vec<&mut usize> = arms.iter_mut().map(|a| &mut a.1).collect();
                v.push(default);
                v
            }
            Instr::Return(_) | Instr::GotoLabel(_) | Instr::Halt => vec![],
        }
    }

    fn uses(&self) -> u64 {
        let bit = |e: &Ex| match e {
            Ex::Reg(r) => 1u64 << r,
            Ex::Lit(_) => 0,
        };
        match self {
            Instr::Assign { e, .. } | Instr::Write { e, .. } | Instr::Return(e) => bit(e),
            Instr::Match { e, .. } => bit(e),
            Instr::Cas { expected, new, .. } => bit(expected) | bit(new),
            Instr::Branch { a, b, .. } => bit(a) | bit(b),
            _ => 0,
        }
    }

    fn defs(&self) -> u64 {
        match self {
            Instr::Read { reg, .. } | Instr::Assign { reg, .. } => 1u64 << reg,
            _ => 0,
        }
    }
}

struct Names {
    values: HashMap<String, Val>,
    locs: HashMap<String, Loc>,
}

fn sem<T>(span: Span, msg: impl Into<String>) -> Result<T, DslError> {
    Err(DslError::Semantic {
        line: span.line,
        col: span.col,
        msg: msg.into(),
    })
}

struct Lowering<'a> {
    names: &'a Names,
    regs: Vec<String>,
    reg_ix: HashMap<String, usize>,
    instrs: Vec<Instr>,
    spans: Vec<Span>,
    labels: HashMap<String, usize>,
}

impl<'a> Lowering<'a> {
    fn push(&mut self, i: Instr, span: Span) -> usize {
        self.instrs.push(i);
        self.spans.push(span);
        self.instrs.len() - 1
    }

    fn loc(&self, name: &str, span: Span) -> Result<Loc, DslError> {
        match self.names.locs.get(name) {
            Some(l) => Ok(*l),
            None => sem(span, format!("undeclared location `{name}`")),
        }
    }

    fn reg(&self, name: &str) -> usize {
        self.reg_ix[name]
    }

    fn expr(&self, e: &Expr) -> Result<Ex, DslError> {
        match e {
            Expr::Arg(_) => Ok(Ex::Reg(ARG)),
            Expr::Name(n, sp) => {
                if let Some(v) = self.names.values.get(n) {
                    Ok(Ex::Lit(*v))
                } else if let Some(r) = self.reg_ix.get(n) {
                    Ok(Ex::Reg(*r))
                } else {
                    sem(*sp, format!("undeclared identifier `{n}`"))
                }
            }
        }
    }

    fn collect_regs(&mut self, stmts: &[Stmt]) -> Result<(), DslError> {
        for s in stmts {
            match &s.kind {
                StmtKind::Read { reg, .. } | StmtKind::Assign { reg, .. } => {
                    if self.names.values.contains_key(reg) {
                        return sem(s.span, format!("register `{reg}` shadows a value"));
                    }
                    if !self.reg_ix.contains_key(reg) {
                        self.reg_ix.insert(reg.clone(), self.regs.len());
                        self.regs.push(reg.clone());
                    }
                }
                StmtKind::Cas { suc, fail, .. } => {
                    self.collect_regs(suc)?;
                    self.collect_regs(fail)?;
                }
                StmtKind::If { then, els, .. } => {
                    self.collect_regs(then)?;
                    self.collect_regs(els)?;
                }
                StmtKind::While { body, .. } => self.collect_regs(body)?,
                StmtKind::Choose(bs) => {
                    for b in bs {
                        self.collect_regs(b)?;
                    }
                }
                StmtKind::Match { arms, .. } => {
                    for a in arms {
                        self.collect_regs(&a.body)?;
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt], cont: usize) -> Result<usize, DslError> {
        let mut next = cont;
        for s in stmts.iter().rev() {
            next = self.stmt(s, next)?;
        }
        Ok(next)
    }

    fn cond(&self, c: &Cond) -> Result<(Ex, Ex, bool), DslError> {
        Ok((self.expr(&c.lhs)?, self.expr(&c.rhs)?, c.eq))
    }

    fn stmt(&mut self, s: &Stmt, next: usize) -> Result<usize, DslError> {
        let sp = s.span;
        Ok(match &s.kind {
            StmtKind::Skip => self.push(Instr::Skip(next), sp),
            StmtKind::Read { reg, loc } => {
                let loc = self.loc(loc, sp)?;
                let reg = self.reg(reg);
                self.push(Instr::Read { reg, loc, next }, sp)
            }
            StmtKind::Assign { reg, expr } => {
                let e = self.expr(expr)?;
                let reg = self.reg(reg);
                self.push(Instr::Assign { reg, e, next }, sp)
            }
            StmtKind::Write { loc, expr } => {
                let loc = self.loc(loc, sp)?;
                let e = self.expr(expr)?;
                self.push(Instr::Write { loc, e, next }, sp)
            }
            StmtKind::Cas { loc, expected, new, suc, fail } => {
                let loc = self.loc(loc, sp)?;
                let expected = self.expr(expected)?;
                let new = self.expr(new)?;
                let suc = self.block(suc, next)?;
                let fail = self.block(fail, next)?;
                self.push(Instr::Cas { loc, expected, new, suc, fail }, sp)
            }
            StmtKind::If { cond, then, els } => {
                let (a, b, eq) = self.cond(cond)?;
                let then = self.block(then, next)?;
                let els = self.block(els, next)?;
                self.push(Instr::Branch { a, b, eq, then, els }, sp)
            }
            StmtKind::While { cond, body } => {
                let (a, b, eq) = self.cond(cond)?;
                let head = self.push(Instr::Halt, sp);
                let body = self.block(body, head)?;
                self.instrs[head] = Instr::Branch { a, b, eq, then: body, els: next };
                head
            }
            StmtKind::Choose(branches) => {
                let mut entries = Vec::new();
                for b in branches {
                    entries.push(self.block(b, next)?);
                }
                self.push(Instr::Choose(entries), sp)
            }
            StmtKind::Label(l) => {
                if self.labels.insert(l.clone(), next).is_some() {
                    return sem(sp, format!("duplicate label `{l}`"));
                }
                next
            }
            StmtKind::Goto(l) => self.push(Instr::GotoLabel(l.clone()), sp),
            StmtKind::Return(e) => {
                let e = self.expr(e)?;
                self.push(Instr::Return(e), sp)
            }
            StmtKind::Match { expr, arms } => {
                let e = self.expr(expr)?;
                let mut out = Vec::new();
                let mut default = next;
                let mut seen_default = false;
                for arm in arms {
                    let entry = self.block(&arm.body, next)?;
                    match &arm.value {
                        None => {
                            if seen_default {
                                return sem(arm.span, "duplicate `_` arm");
                            }
                            seen_default = true;
                            default = entry;
                        }
                        Some(v) => {
                            let Some(val) = self.names.values.get(v) else {
                                return sem(arm.span, format!("undeclared value `{v}`"));
                            };
                            if out.iter().any(|(x, _)| x == val) {
                                return sem(arm.span, format!("duplicate match arm `{v}`"));
                            }
                            out.push((*val, entry));
                        }
                    }
                }
                self.push(Instr::Match { e, arms: out, default }, sp)
            }
        })
    }

    /// Replaces labelled gotos by jumps, then short-circuits all jumps.
    /// A cycle made only of jumps becomes a tau self-loop.
    fn resolve_jumps(&mut self, entry: usize) -> Result<usize, DslError> {
        for i in 0..self.instrs.len() {
            if let Instr::GotoLabel(l) = &self.instrs[i] {
                match self.labels.get(l) {
                    Some(t) => self.instrs[i] = Instr::Jump(*t),
                    None => return sem(self.spans[i], format!("unknown label `{l}`")),
                }
            }
        }
        let n = self.instrs.len();
        let mut target = vec![usize::MAX; n];
        for i in 0..n {
            if !matches!(self.instrs[i], Instr::Jump(_)) {
                target[i] = i;
                continue;
            }
            let mut path = vec![i];
            let mut cur = i;
            let end = loop {
                if target[cur] != usize::MAX {
                    break target[cur];
                }
                match self.instrs[cur] {
                    Instr::Jump(t) => {
                        if path.contains(&t) {
                            self.instrs[t] = Instr::Skip(t);
                            break t;
                        }
                        path.push(t);
                        cur = t;
                    }
                    _ => break cur,
                }
            };
            for p in path {
                target[p] = end;
            }
            target[end] = end;
        }
        for i in 0..n {
            for s in self.instrs[i].succs_mut() {
                *s = target[*s];
            }
        }
        Ok(target[entry])
    }
}

fn reachable(instrs: &[Instr], entry: usize) -> Vec<bool> {
    let mut seen = vec![false; instrs.len()];
    let mut stack = vec![entry];
    seen[entry] = true;
    while let Some(i) = stack.pop() {
        for s in instrs[i].succs() {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

struct MethodGraph {
    instrs: Vec<Instr>,
    live_in: Vec<u64>,
    entry: usize,
    regs: Vec<String>,
}

fn lower_method(names: &Names, body: &[Stmt], span: Span) -> Result<MethodGraph, DslError> {
    let mut lw = Lowering {
        names,
        regs: vec!["arg".into()],
        reg_ix: HashMap::new(),
        instrs: Vec::new(),
        spans: Vec::new(),
        labels: HashMap::new(),
    };
    lw.collect_regs(body)?;
    if lw.regs.len() > 64 {
        return sem(span, "too many registers (at most 63 per method)");
    }
    let halt = lw.push(Instr::Halt, span);
    let entry = lw.block(body, halt)?;
    let mut entry = lw.resolve_jumps(entry)?;
    let seen = reachable(&lw.instrs, entry);
    let has_pred = (0..lw.instrs.len())
        .filter(|&i| seen[i])
        .any(|i| lw.instrs[i].succs().contains(&entry));
    if has_pred {
        entry = lw.push(Instr::Skip(entry), span);
    }
    let seen = reachable(&lw.instrs, entry);
    let n = lw.instrs.len();

    // Definite assignment: every register read must be assigned on all paths.
    let all = if lw.regs.len() == 64 { u64::MAX } else { (1u64 << lw.regs.len()) - 1 };
    let mut assigned = vec![all; n];
    assigned[entry] = 1 << ARG;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            if !seen[i] {
                continue;
            }
            let out = assigned[i] | lw.instrs[i].defs();
            for s in lw.instrs[i].succs() {
                let v = if s == entry { 1 << ARG } else { assigned[s] & out };
                if v != assigned[s] {
                    assigned[s] = v;
                    changed = true;
                }
            }
        }
    }
    for i in 0..n {
        if seen[i] {
            let missing = lw.instrs[i].uses() & !assigned[i];
            if missing != 0 {
                let r = missing.trailing_zeros() as usize;
                return sem(
                    lw.spans[i],
                    format!("register `{}` may be read before it is assigned", lw.regs[r]),
                );
            }
        }
    }

    let mut live_in = vec![0u64; n];
    let mut changed = true;
    while changed {
        changed = false;
        for i in (0..n).rev() {
            let ins = &lw.instrs[i];
            let mut out = 0u64;
            for s in ins.succs() {
                out |= live_in[s];
            }
            let v = ins.uses() | (out & !ins.defs());
            if v != live_in[i] {
                live_in[i] = v;
                changed = true;
            }
        }
    }
    Ok(MethodGraph {
        instrs: lw.instrs,
        live_in,
        entry,
        regs: lw.regs,
    })
}

struct Builder {
    positions: Vec<Position>,
    edges: Vec<Vec<Edge>>,
    limit: usize,
}

impl Builder {
    fn add(&mut self, p: Position, method_name: &str) -> Result<PosId, DslError> {
        if self.positions.len() >= self.limit {
            return Err(DslError::DomainOverflow {
                method: method_name.to_string(),
                limit: self.limit,
            });
        }
        self.positions.push(p);
        self.edges.push(Vec::new());
        Ok(PosId(self.positions.len() as u32 - 1))
    }
}

struct Expander<'a> {
    g: &'a MethodGraph,
    method: MethodId,
    name: &'a str,
    values: &'a [String],
    index: HashMap<(usize, Vec<u16>), PosId>,
    finals: BTreeMap<Val, PosId>,
    work: Vec<(usize, Vec<u16>, PosId)>,
}

impl Expander<'_> {
    fn mask(&self, pc: usize, mut regs: Vec<u16>) -> Vec<u16> {
        let live = self.g.live_in[pc];
        for (r, v) in regs.iter_mut().enumerate() {
            if live & (1 << r) == 0 {
                *v = NONE;
            }
        }
        regs
    }

    fn eval(regs: &[u16], e: Ex) -> Val {
        match e {
            Ex::Lit(v) => v,
            Ex::Reg(r) => {
                debug_assert_ne!(regs[r], NONE);
                Val(regs[r])
            }
        }
    }

    fn state(&mut self, b: &mut Builder, pc: usize, regs: Vec<u16>, kind: PosKind) -> Result<PosId, DslError> {
        let regs = self.mask(pc, regs);
        if let Some(p) = self.index.get(&(pc, regs.clone())) {
            return Ok(*p);
        }
        let mut label = format!("{}@{}", self.name, pc);
        let set: Vec<String> = regs
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != NONE)
            .map(|(r, v)| format!("{}={}", self.g.regs[r], self.values[*v as usize]))
            .collect();
        if !set.is_empty() {
            label.push_str(&format!("[{}]", set.join(",")));
        }
        let id = b.add(Position { method: self.method, kind, name: label }, self.name)?;
        self.index.insert((pc, regs.clone()), id);
        self.work.push((pc, regs, id));
        Ok(id)
    }

    fn fin(&mut self, b: &mut Builder, v: Val) -> Result<PosId, DslError> {
        if let Some(p) = self.finals.get(&v) {
            return Ok(*p);
        }
        let id = b.add(
            Position {
                method: self.method,
                kind: PosKind::Final(v),
                name: format!("{}.fs({})", self.name, self.values[v.0 as usize]),
            },
            self.name,
        )?;
        self.finals.insert(v, id);
        Ok(id)
    }

    /// After a read into `reg`, a directly following test on registers is
    /// folded into the read edge when `reg` is dead past the test.
    fn settle(&self, pc: usize, regs: &[u16], reg: usize) -> usize {
        let dead = |t: usize| self.g.live_in[t] & (1 << reg) == 0;
        match &self.g.instrs[pc] {
            Instr::Branch { a, b, eq, then, els } if dead(*then) && dead(*els) => {
                if (Self::eval(regs, *a) == Self::eval(regs, *b)) == *eq {
                    *then
                } else {
                    *els
                }
            }
            Instr::Match { e, arms, default }
                if arms.iter().all(|(_, t)| dead(*t)) && dead(*default) =>
            {
                let v = Self::eval(regs, *e);
                arms.iter().find(|(x, _)| *x == v).map(|a| a.1).unwrap_or(*default)
            }
            _ => pc,
        }
    }

    /// Edges of a visible command at `pc`, as (command, target pc, target regs).
    fn visible(&self, pc: usize, regs: &[u16]) -> Option<Vec<(Command, usize, Vec<u16>)>> {
        let ins = &self.g.instrs[pc];
        Some(match ins {
            Instr::Read { reg, loc, next } => (0..self.values.len())
                .map(|v| {
                    let mut r = regs.to_vec();
                    r[*reg] = v as u16;
                    let t = self.settle(*next, &r, *reg);
                    (Command::Read { loc: *loc, val: Val(v as u16) }, t, r)
                })
                .collect(),
            Instr::Write { loc, e, next } => vec![(
                Command::Write { loc: *loc, val: Self::eval(regs, *e) },
                *next,
                regs.to_vec(),
            )],
            Instr::Cas { loc, expected, new, suc, fail } => {
                let (x, y) = (Self::eval(regs, *expected), Self::eval(regs, *new));
                vec![
                    (Command::CasSuc { loc: *loc, expected: x, new: y }, *suc, regs.to_vec()),
                    (Command::CasFail { loc: *loc, expected: x, new: y }, *fail, regs.to_vec()),
                ]
            }
            _ => return None,
        })
    }

    fn expand(&mut self, b: &mut Builder, pc: usize, regs: Vec<u16>, id: PosId) -> Result<(), DslError> {
        let mut out: Vec<Edge> = Vec::new();
        let ins = self.g.instrs[pc].clone();
        let tau_to = |this: &mut Self, b: &mut Builder, pc2: usize, r: Vec<u16>, out: &mut Vec<Edge>| {
            let to = this.state(b, pc2, r, PosKind::Inner)?;
            out.push(Edge { cmd: Command::Tau, to });
            Ok::<(), DslError>(())
        };
        match ins {
            Instr::Skip(n) => tau_to(self, b, n, regs, &mut out)?,
            Instr::Assign { reg, e, next } => {
                let mut r = regs.clone();
                r[reg] = Self::eval(&regs, e).0;
                tau_to(self, b, next, r, &mut out)?;
            }
            Instr::Branch { a, b: bb, eq, then, els } => {
                let t = if (Self::eval(&regs, a) == Self::eval(&regs, bb)) == eq { then } else { els };
                tau_to(self, b, t, regs, &mut out)?;
            }
            Instr::Match { e, arms, default } => {
                let v = Self::eval(&regs, e);
                let t = arms.iter().find(|(x, _)| *x == v).map(|a| a.1).unwrap_or(default);
                tau_to(self, b, t, regs, &mut out)?;
            }
            Instr::Return(e) => {
                let to = self.fin(b, Self::eval(&regs, e))?;
                out.push(Edge { cmd: Command::Tau, to });
            }
            Instr::Choose(targets) => {
                let mut fused = Vec::new();
                let mut ok = true;
                for &t in &targets {
                    let masked = self.mask(t, regs.clone());
                    match self.visible(t, &masked) {
                        Some(es) => fused.extend(es),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    let mut cmds: Vec<Command> = fused.iter().map(|e| e.0).collect();
                    cmds.sort();
                    ok = cmds.windows(2).all(|w| w[0] != w[1]);
                }
                if ok {
                    for (cmd, t, r) in fused {
                        let to = self.state(b, t, r, PosKind::Inner)?;
                        out.push(Edge { cmd, to });
                    }
                } else {
                    for t in targets {
                        tau_to(self, b, t, regs.clone(), &mut out)?;
                    }
                }
            }
            Instr::Read { .. } | Instr::Write { .. } | Instr::Cas { .. } => {
                for (cmd, t, r) in self.visible(pc, &regs).unwrap_or_default() {
                    let to = self.state(b, t, r, PosKind::Inner)?;
                    out.push(Edge { cmd, to });
                }
            }
            Instr::Halt => {}
            Instr::Jump(_) | Instr::GotoLabel(_) => unreachable!("jumps are resolved before expansion"),
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|e| seen.insert((e.cmd, e.to)));
        b.edges[id.0 as usize] = out;
        Ok(())
    }
}

fn compile_structured(
    names: &Names,
    values: &[String],
    b: &mut Builder,
    method: MethodId,
    name: &str,
    body: &[Stmt],
    span: Span,
) -> Result<MethodInfo, DslError> {
    let g = lower_method(names, body, span)?;
    let mut ex = Expander {
        g: &g,
        method,
        name,
        values,
        index: HashMap::new(),
        finals: BTreeMap::new(),
        work: Vec::new(),
    };
    let mut initial = Vec::new();
    for a in 0..values.len() {
        let mut regs = vec![NONE; g.regs.len()];
        regs[ARG] = a as u16;
        initial.push(ex.state(b, g.entry, regs, PosKind::Initial)?);
    }
    while let Some((pc, regs, id)) = ex.work.pop() {
        ex.expand(b, pc, regs, id)?;
    }
    Ok(MethodInfo {
        name: name.to_string(),
        initial,
        finals: ex.finals.into_iter().collect(),
    })
}

fn compile_raw(
    names: &Names,
    values: &[String],
    b: &mut Builder,
    method: MethodId,
    name: &str,
    items: &[RawItem],
    span: Span,
) -> Result<MethodInfo, DslError> {
    let mut ids: HashMap<String, PosId> = HashMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut note = |p: &str, ids: &mut HashMap<String, PosId>| {
        if !ids.contains_key(p) {
            ids.insert(p.to_string(), PosId(u32::MAX));
            order.push(p.to_string());
        }
    };
    for it in items {
        match it {
            RawItem::Init { pos, .. } | RawItem::Final { pos, .. } => note(pos, &mut ids),
            RawItem::Edge { from, to, .. } => {
                note(from, &mut ids);
                note(to, &mut ids);
            }
        }
    }
    let val = |v: &str, sp: Span| match names.values.get(v) {
        Some(x) => Ok(*x),
        None => sem(sp, format!("undeclared value `{v}`")),
    };
    let mut kinds: HashMap<String, PosKind> = HashMap::new();
    let mut initial: Vec<Option<String>> = vec![None; values.len()];
    let mut finals: BTreeMap<Val, String> = BTreeMap::new();
    for it in items {
        match it {
            RawItem::Init { value, pos, span } => {
                if let Some(PosKind::Final(_)) = kinds.get(pos) {
                    return sem(*span, format!("position `{pos}` is both initial and final"));
                }
                kinds.insert(pos.clone(), PosKind::Initial);
                let targets: Vec<usize> = match value {
                    None => (0..values.len()).collect(),
                    Some(v) => vec![val(v, *span)?.0 as usize],
                };
                for a in targets {
                    if initial[a].is_some() {
                        return sem(*span, format!("argument `{}` already has an initial position", values[a]));
                    }
                    initial[a] = Some(pos.clone());
                }
            }
            RawItem::Final { value, pos, span } => {
                let v = val(value, *span)?;
                if kinds.contains_key(pos) {
                    return sem(*span, format!("position `{pos}` is already initial or final"));
                }
                if finals.insert(v, pos.clone()).is_some() {
                    return sem(*span, format!("return value `{value}` already has a final position"));
                }
                kinds.insert(pos.clone(), PosKind::Final(v));
            }
            RawItem::Edge { .. } => {}
        }
    }
    for p in &order {
        let kind = kinds.get(p).copied().unwrap_or(PosKind::Inner);
        let id = b.add(
            Position { method, kind, name: format!("{name}.{p}") },
            name,
        )?;
        ids.insert(p.clone(), id);
    }
    for it in items {
        if let RawItem::Edge { from, to, cmd, args, span } = it {
            let loc = |i: usize| match names.locs.get(&args[i]) {
                Some(l) => Ok(*l),
                None => sem(*span, format!("undeclared location `{}`", args[i])),
            };
            let c = match cmd.as_str() {
                "tau" => Command::Tau,
                "read" => Command::Read { loc: loc(0)?, val: val(&args[1], *span)? },
                "write" => Command::Write { loc: loc(0)?, val: val(&args[1], *span)? },
                "cas_suc" => Command::CasSuc {
                    loc: loc(0)?,
                    expected: val(&args[1], *span)?,
                    new: val(&args[2], *span)?,
                },
                _ => Command::CasFail {
                    loc: loc(0)?,
                    expected: val(&args[1], *span)?,
                    new: val(&args[2], *span)?,
                },
            };
            b.edges[ids[from].0 as usize].push(Edge { cmd: c, to: ids[to] });
        }
    }
    let mut init_ids = Vec::new();
    for (a, p) in initial.iter().enumerate() {
        match p {
            Some(p) => init_ids.push(ids[p]),
            None => {
                return sem(span, format!("method `{name}` has no initial position for argument `{}`", values[a]))
            }
        }
    }
    Ok(MethodInfo {
        name: name.to_string(),
        initial: init_ids,
        finals: finals.into_iter().map(|(v, p)| (v, ids[&p])).collect(),
    })
}

pub(super) fn compile(file: &SourceFile, limit: usize) -> Result<LibraryIR, DslError> {
    let mut names = Names {
        values: HashMap::new(),
        locs: HashMap::new(),
    };
    let mut values = Vec::new();
    for (v, sp) in &file.values {
        if names.values.insert(v.clone(), Val(values.len() as u16)).is_some() {
            return sem(*sp, format!("duplicate value `{v}`"));
        }
        values.push(v.clone());
    }
    if values.is_empty() {
        return sem(Span { line: 1, col: 1 }, "no `values:` declared");
    }
    if values.len() >= NONE as usize {
        return sem(file.values[0].1, "too many values");
    }
    let mut locations = Vec::new();
    let mut initial_memory = Vec::new();
    for (l, v, sp) in &file.locations {
        if names.locs.insert(l.clone(), Loc(locations.len() as u16)).is_some() {
            return sem(*sp, format!("duplicate location `{l}`"));
        }
        let Some(iv) = names.values.get(v) else {
            return sem(*sp, format!("undeclared value `{v}` as initial value of `{l}`"));
        };
        locations.push(l.clone());
        initial_memory.push(*iv);
    }
    let mut b = Builder {
        positions: Vec::new(),
        edges: Vec::new(),
        limit,
    };
    let mut methods: Vec<MethodInfo> = Vec::new();
    for (mi, m) in file.methods.iter().enumerate() {
        let (name, span) = match m {
            MethodAst::Structured { name, span, .. } | MethodAst::Raw { name, span, .. } => (name, *span),
        };
        if methods.iter().any(|x| &x.name == name) {
            return sem(span, format!("duplicate method `{name}`"));
        }
        let id = MethodId(mi as u16);
        let info = match m {
            MethodAst::Structured { body, .. } => {
                compile_structured(&names, &values, &mut b, id, name, body, span)?
            }
            MethodAst::Raw { items, .. } => compile_raw(&names, &values, &mut b, id, name, items, span)?,
        };
        methods.push(info);
    }
    if methods.is_empty() {
        return sem(Span { line: 1, col: 1 }, "no methods declared");
    }
    Ok(LibraryIR {
        values,
        locations,
        initial_memory,
        methods,
        positions: b.positions,
        edges: b.edges,
    })
}
