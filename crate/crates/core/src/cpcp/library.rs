//! The two-method library simulating a one-channel machine.
//!
//! Every transition of the one-channel machine is a rule value `r{i}`;
//! channel symbols are values too. Contents travel as `e sharp` pairs
//! through `x1 -> y1 -> x2 -> y2`, each a location written by one process
//! and read by the other, as `rule bs content.. be`. `M1` applies the rule
//! it reads from `y2` to the content and guesses the next rule; `M2` only
//! forwards. Any read that does not match the protocol sets `failSimu` and
//! returns.

use std::fmt::Write as _;

use super::machine::{SingleChannel, BOT1, BOT2};
use crate::dsl::{parse_library, DslError};
use crate::lcm::{Op, StateId, Sym};
use crate::library::LibraryIR;

/// Value names used by the generated library.
#[derive(Clone, Debug)]
pub struct RuleNames {
    pub symbols: Vec<String>,
    pub rules: Vec<String>,
}

impl RuleNames {
    pub fn new(sc: &SingleChannel) -> Self {
        let symbols = sc
            .cm
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, a)| match a.as_str() {
                BOT1 => "c_bot1".to_string(),
                BOT2 => "c_bot2".to_string(),
                s if s.chars().all(|c| c.is_ascii_alphanumeric()) => format!("c_{s}"),
                _ => format!("c{i}"),
            })
            .collect();
        let rules = (0..sc.cm.transitions.len()).map(|i| format!("r{i}")).collect();
        RuleNames { symbols, rules }
    }

    fn sym(&self, s: Sym) -> &str {
        &self.symbols[s as usize]
    }
}

/// Value read and value written by a rule, if any.
pub fn rule_io(sc: &SingleChannel, rule: usize) -> (Option<Sym>, Option<Sym>) {
    let t = &sc.cm.transitions[rule];
    let mut read = None;
    let mut written = None;
    for (_, op) in &t.ops {
        match op {
            Op::Recv(a) => read = Some(*a),
            Op::Send(a) => written = Some(*a),
        }
    }
    (read, written)
}

fn rules_from(sc: &SingleChannel, q: StateId) -> Vec<usize> {
    (0..sc.cm.transitions.len()).filter(|&i| sc.cm.transitions[i].from == q).collect()
}

/// `s1` of the source machine, as a state of the one-channel machine.
fn s1_copy(sc: &SingleChannel) -> Option<StateId> {
    sc.cm.state_id("s1")
}

fn transport(out: &mut String, from: &str, to: &str, label: &str) {
    let _ = writeln!(out, "  label {label}:");
    let _ = writeln!(out, "  t := read {from}");
    let _ = writeln!(out, "  if t == sharp {{ goto fail }}");
    let _ = writeln!(out, "  h := read {from}");
    let _ = writeln!(out, "  if h != sharp {{ goto fail }}");
    let _ = writeln!(out, "  write {to} := t");
    let _ = writeln!(out, "  write {to} := sharp");
    let _ = writeln!(out, "  if t != be {{ goto {label} }}");
}

fn guess_branches(out: &mut String, sc: &SingleChannel, names: &RuleNames, from: StateId, indent: &str) {
    let s1 = s1_copy(sc);
    let next = rules_from(sc, from);
    if next.is_empty() {
        let _ = writeln!(out, "{indent}goto fail");
        return;
    }
    for (k, r) in next.iter().enumerate() {
        let opener = if k == 0 { "choose {" } else { "} or {" };
        let to_s1 = if Some(sc.cm.transitions[*r].to) == s1 { "yes" } else { "no" };
        let _ = writeln!(out, "{indent}{opener}");
        let _ = writeln!(out, "{indent}  write x1 := {}", names.rules[*r]);
        let _ = writeln!(out, "{indent}  tos1 := {to_s1}");
    }
    let _ = writeln!(out, "{indent}}}");
}

/// The library as `.lib` source text.
pub fn generate_library_text(sc: &SingleChannel) -> String {
    let names = RuleNames::new(sc);
    let mut s = String::new();
    let _ = writeln!(s, "# generated from a {}-state one-channel machine", sc.cm.states.len());
    let _ = write!(s, "values: sharp bs be guess check no yes ok eps");
    for v in names.symbols.iter().chain(&names.rules) {
        let _ = write!(s, " {v}");
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "locations: x1 = sharp, y1 = sharp, x2 = sharp, y2 = sharp, phase = guess, failSimu = no, firstM1 = yes"
    );
    let _ = writeln!(s);

    let _ = writeln!(s, "method M1 {{");
    let _ = writeln!(s, "  label top:");
    let _ = writeln!(s, "  f := read failSimu");
    let _ = writeln!(s, "  if f == yes {{ return ok }}");
    let _ = writeln!(s, "  fm := read firstM1");
    let _ = writeln!(s, "  if fm == yes {{");
    guess_branches(&mut s, sc, &names, sc.cm.init, "    ");
    let _ = writeln!(s, "    write x1 := sharp");
    let _ = writeln!(s, "    write x1 := bs");
    let _ = writeln!(s, "    write x1 := sharp");
    let _ = writeln!(s, "    write x1 := be");
    let _ = writeln!(s, "    write x1 := sharp");
    let _ = writeln!(s, "    write firstM1 := no");
    let _ = writeln!(s, "  }} else {{");
    let _ = writeln!(s, "    r := read y2");
    let _ = writeln!(s, "    match r {{");
    for (i, t) in sc.cm.transitions.iter().enumerate() {
        let (read, written) = rule_io(sc, i);
        let _ = writeln!(s, "      {} => {{", names.rules[i]);
        let _ = writeln!(s, "        h := read y2");
        let _ = writeln!(s, "        if h != sharp {{ goto fail }}");
        let _ = writeln!(s, "        e := read y2");
        let _ = writeln!(s, "        if e != bs {{ goto fail }}");
        let _ = writeln!(s, "        h := read y2");
        let _ = writeln!(s, "        if h != sharp {{ goto fail }}");
        if let Some(a) = read {
            let _ = writeln!(s, "        e := read y2");
            let _ = writeln!(s, "        if e != {} {{ goto fail }}", names.sym(a));
            let _ = writeln!(s, "        h := read y2");
            let _ = writeln!(s, "        if h != sharp {{ goto fail }}");
        }
        let _ = writeln!(s, "        zw := {}", written.map_or("eps", |a| names.sym(a)));
        guess_branches(&mut s, sc, &names, t.to, "        ");
        let _ = writeln!(s, "      }}");
    }
    let _ = writeln!(s, "      _ => {{ goto fail }}");
    let _ = writeln!(s, "    }}");
    let _ = writeln!(s, "    write x1 := sharp");
    let _ = writeln!(s, "    write x1 := bs");
    let _ = writeln!(s, "    write x1 := sharp");
    let _ = writeln!(s, "    label copy:");
    let _ = writeln!(s, "    t := read y2");
    let _ = writeln!(s, "    if t == sharp {{ goto fail }}");
    let _ = writeln!(s, "    h := read y2");
    let _ = writeln!(s, "    if h != sharp {{ goto fail }}");
    let _ = writeln!(s, "    if t != be {{");
    let _ = writeln!(s, "      write x1 := t");
    let _ = writeln!(s, "      write x1 := sharp");
    let _ = writeln!(s, "      goto copy");
    let _ = writeln!(s, "    }}");
    let _ = writeln!(s, "    if zw != eps {{");
    let _ = writeln!(s, "      write x1 := zw");
    let _ = writeln!(s, "      write x1 := sharp");
    let _ = writeln!(s, "    }}");
    let _ = writeln!(s, "    write x1 := be");
    let _ = writeln!(s, "    write x1 := sharp");
    let _ = writeln!(s, "  }}");
    let _ = writeln!(s, "  ph := read phase");
    let _ = writeln!(s, "  if ph == guess {{");
    let _ = writeln!(s, "    if tos1 == yes {{ write phase := check }}");
    let _ = writeln!(s, "  }}");
    transport(&mut s, "y1", "x2", "move1");
    let _ = writeln!(s, "  ph := read phase");
    let _ = writeln!(s, "  if ph == guess {{ return ok }}");
    let _ = writeln!(s, "  goto top");
    let _ = writeln!(s, "  label fail:");
    let _ = writeln!(s, "  write failSimu := yes");
    let _ = writeln!(s, "  return ok");
    let _ = writeln!(s, "}}");
    let _ = writeln!(s);

    let _ = writeln!(s, "method M2 {{");
    let _ = writeln!(s, "  label top:");
    let _ = writeln!(s, "  f := read failSimu");
    let _ = writeln!(s, "  if f == yes {{ return ok }}");
    transport(&mut s, "x1", "y1", "move1");
    transport(&mut s, "x2", "y2", "move2");
    let _ = writeln!(s, "  ph := read phase");
    let _ = writeln!(s, "  if ph == guess {{ return ok }}");
    let _ = writeln!(s, "  goto top");
    let _ = writeln!(s, "  label fail:");
    let _ = writeln!(s, "  write failSimu := yes");
    let _ = writeln!(s, "  return ok");
    let _ = writeln!(s, "}}");
    s
}

pub fn generate_library(sc: &SingleChannel) -> Result<LibraryIR, DslError> {
    parse_library(&generate_library_text(sc))
}
