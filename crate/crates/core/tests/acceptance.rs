//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Time limits are pinned below.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsolive_core::cpcp::{build_cm, build_witness_schedule, solo_return_depth, solve_brute, to_single_channel};
use tsolive_core::cpcp::{CpcpInstance, Pipeline, WitnessSchedule};
use tsolive_core::dsl::parse_library;
use tsolive_core::explore::{explore, StateGraph};
use tsolive_core::lcm::{
    backward_reach, bounded_lasso_search, is_subword, step_lossy, step_lossy_full, validate_cm_lasso, ChannelMachine,
    CmConfig, LassoResult, Op, Transition,
};
use tsolive_core::library::{Command, PosKind};
use tsolive_core::liveness::oracle::brute_force_verdicts;
use tsolive_core::liveness::{
    blocking_pairs, check_lasso_conditions, check_obstruction_freedom, find_violation, PropertyId, Verdict,
    DEFAULT_BLOCKING_LIMIT,
};
use tsolive_core::semantics::{enabled, replay_set};
use tsolive_core::system::mgc_compose;
use tsolive_core::{Action, BufferBound, Configuration, Control, LibraryIR, MemoryModel, Pid, PosId, SystemSpec, Val};

const LIMIT_1: Duration = Duration::from_secs(1);
const LIMIT_2: Duration = Duration::from_secs(30);
const LIMIT_3: Duration = Duration::from_secs(120);
const LIMIT_4: Duration = Duration::from_secs(10);
const LIMIT_5: Duration = Duration::from_secs(120);
const LIMIT_6: Duration = Duration::from_secs(1);
const LIMIT_7: Duration = Duration::from_secs(120);
/// Per instance.
const LIMIT_8: Duration = Duration::from_secs(60);
const LIMIT_9: Duration = Duration::from_secs(120);
const LIMIT_10: Duration = Duration::from_secs(30);

const WALKS: usize = 1000;
const WALK_LEN: usize = 60;
const ORACLE_LIMIT: usize = 20_000;
const FAIL_SAMPLES: usize = 100;
const SOLO_BUDGET: usize = 10_000;

type Check = fn() -> Result<String, String>;

fn main() {
    let checks: [(u32, &str, Duration, Check); 10] = [
        (1, "store-buffer litmus", LIMIT_1, c1_store_buffer),
        (2, "semantics invariants", LIMIT_2, c2_invariants),
        (3, "liveness oracle agreement", LIMIT_3, c3_oracle),
        (4, "canonical verdicts", LIMIT_4, c4_canonical),
        (5, "obstruction characterization", LIMIT_5, c5_obstruction),
        (6, "cpcp solver", LIMIT_6, c6_solver),
        (7, "channel machine lassos", LIMIT_7, c7_channel),
        (8, "end-to-end witness", LIMIT_8 * 2, c8_witness),
        (9, "failure and guess rounds return", LIMIT_9, c9_trichotomy),
        (10, "backward reachability", LIMIT_10, c10_backward),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in checks {
        let t = Instant::now();
        let res = check();
        let took = t.elapsed();
        let (ok, detail) = match res {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name}: {detail} ({:.2}s, limit {}s)",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn holds<E>(r: Result<bool, E>) -> bool {
    matches!(r, Ok(true))
}

fn zoo() -> &'static [(String, Arc<LibraryIR>)] {
    static ZOO: OnceLock<Vec<(String, Arc<LibraryIR>)>> = OnceLock::new();
    ZOO.get_or_init(|| {
        let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../zoo");
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
            .expect("zoo directory")
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "lib"))
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let src = std::fs::read_to_string(&p).unwrap();
                let lib = parse_library(&src).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
                (p.file_stem().unwrap().to_string_lossy().into_owned(), Arc::new(lib))
            })
            .collect()
    })
}

fn zoo_lib(name: &str) -> Arc<LibraryIR> {
    zoo().iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no zoo library {name}")).1.clone()
}

fn spec(lib: &Arc<LibraryIR>, n: usize, model: MemoryModel, k: usize) -> SystemSpec {
    mgc_compose(lib.clone(), n, model, BufferBound::Bounded(k)).unwrap()
}

// ---------------------------------------------------------------- 1

/// Direct enumeration of one call of each store-buffer method: process `i`
/// writes location `i` and then reads the other one. Returns the reachable
/// pairs of read results.
fn sb_outcomes(tso: bool) -> BTreeSet<(u8, u8)> {
    #[derive(Clone, PartialEq, Eq, Hash)]
    struct S {
        pc: [u8; 2],
        r: [u8; 2],
        mem: [u8; 2],
        buf: [VecDeque<u8>; 2],
    }
    let start = S { pc: [0, 0], r: [9, 9], mem: [0, 0], buf: [VecDeque::new(), VecDeque::new()] };
    let mut seen = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    let mut out = BTreeSet::new();
    while let Some(s) = stack.pop() {
        if s.pc == [2, 2] && s.buf.iter().all(VecDeque::is_empty) {
            out.insert((s.r[0], s.r[1]));
        }
        let mut next = Vec::new();
        for i in 0..2 {
            match s.pc[i] {
                0 => {
                    let mut t = s.clone();
                    if tso {
                        t.buf[i].push_back(1);
                    } else {
                        t.mem[i] = 1;
                    }
                    t.pc[i] = 1;
                    next.push(t);
                }
                1 => {
                    let mut t = s.clone();
                    // a process never buffers writes to the location it reads
                    t.r[i] = s.mem[1 - i];
                    t.pc[i] = 2;
                    next.push(t);
                }
                _ => {}
            }
            if let Some(&v) = s.buf[i].front() {
                let mut t = s.clone();
                t.buf[i].pop_front();
                t.mem[i] = v;
                next.push(t);
            }
        }
        for t in next {
            if seen.insert(t.clone()) {
                stack.push(t);
            }
        }
    }
    out
}

/// True if the process at `p` is committed to returning `v`: only tau
/// edges lead from `p` to the final position of `v`.
fn commits_to(lib: &LibraryIR, p: PosId, v: Val) -> bool {
    let mut stack = vec![p];
    let mut seen = HashSet::new();
    while let Some(q) = stack.pop() {
        if !seen.insert(q) {
            continue;
        }
        if lib.position(q).kind == PosKind::Final(v) {
            return true;
        }
        for e in lib.out_edges(q) {
            if e.cmd == Command::Tau {
                stack.push(e.to);
            }
        }
    }
    false
}

fn both_read_zero(lib: &LibraryIR, g: &StateGraph) -> bool {
    let zero = lib.value("0");
    g.nodes.iter().any(|c| match (c.control[0], c.control[1]) {
        (Control::Lib(p), Control::Lib(q)) => {
            lib.position(p).method != lib.position(q).method && commits_to(lib, p, zero) && commits_to(lib, q, zero)
        }
        _ => false,
    })
}

fn c1_store_buffer() -> Result<String, String> {
    let tso_ref = sb_outcomes(true);
    let sc_ref = sb_outcomes(false);
    ensure(tso_ref.contains(&(0, 0)) && !sc_ref.contains(&(0, 0)), || "reference enumerator disagrees".into())?;
    let lib = zoo_lib("sb");
    let mut counts = Vec::new();
    for k in [1, 2] {
        let g = explore(&spec(&lib, 2, MemoryModel::Tso, k)).map_err(|e| e.to_string())?;
        ensure(both_read_zero(&lib, &g), || format!("TSO bound {k}: both-read-0 unreachable"))?;
        counts.push(format!("tso k={k}: {}", g.node_count()));
    }
    let g = explore(&spec(&lib, 2, MemoryModel::Sc, 1)).map_err(|e| e.to_string())?;
    ensure(!both_read_zero(&lib, &g), || "SC reaches both-read-0".into())?;
    counts.push(format!("sc: {}", g.node_count()));
    Ok(format!("both-read-0 under TSO only, matching the reference; states {}", counts.join(", ")))
}

// ---------------------------------------------------------------- 2

type Step = (Configuration, Action, Configuration);

fn random_walk(spec: &SystemSpec, rng: &mut ChaCha8Rng, len: usize) -> Vec<Step> {
    let mut c = spec.initial();
    let mut out = Vec::new();
    for _ in 0..len {
        let mut steps = enabled(spec, &c);
        if steps.is_empty() {
            break;
        }
        let s = steps.swap_remove(rng.gen_range(0..steps.len()));
        out.push((c, s.action, s.next.clone()));
        c = s.next;
    }
    out
}

/// Newest buffered value for `loc`, else memory.
fn reference_lookup(c: &Configuration, i: usize, loc: usize) -> u16 {
    for &(l, v) in &c.buffers[i] {
        if l.0 as usize == loc {
            return v.0;
        }
    }
    c.memory[loc].0
}

fn check_tso_walk(walk: &[Step]) -> Result<(), String> {
    let n = walk.first().map_or(0, |s| s.0.procs());
    let mut issued: Vec<VecDeque<(u16, u16)>> = vec![VecDeque::new(); n];
    for (k, (c, a, d)) in walk.iter().enumerate() {
        let i = a.pid().index();
        let err = |what: &str| format!("step {k}: {what} at {a:?}");
        match *a {
            Action::Read { loc, val, .. } => {
                ensure(val.0 == reference_lookup(c, i, loc.0 as usize), || err("read incoherent with lookup"))?
            }
            Action::Cas { .. } => ensure(c.buffers[i].is_empty(), || err("cas with nonempty buffer"))?,
            Action::Write { loc, val, .. } => {
                issued[i].push_back((loc.0, val.0));
                ensure(d.memory == c.memory, || err("write changed memory"))?;
            }
            Action::Flush { loc, val, .. } => {
                ensure(issued[i].pop_front() == Some((loc.0, val.0)), || err("flush out of FIFO order"))?;
                ensure(d.memory[loc.0 as usize] == val, || err("flush did not update memory"))?;
            }
            _ => {}
        }
        for (q, buf) in d.buffers.iter().enumerate() {
            let oldest_first: Vec<(u16, u16)> = buf.iter().rev().map(|(l, v)| (l.0, v.0)).collect();
            ensure(oldest_first.iter().eq(issued[q].iter()), || err("buffer differs from issued writes"))?;
        }
    }
    Ok(())
}

fn c2_invariants() -> Result<String, String> {
    let mut steps = 0usize;
    let mut embedded = 0usize;
    for (li, (name, lib)) in zoo().iter().enumerate() {
        let tso = spec(lib, 2, MemoryModel::Tso, 3);
        let sc = spec(lib, 2, MemoryModel::Sc, 3);
        let tso1 = spec(lib, 2, MemoryModel::Tso, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + li as u64);
        for w in 0..WALKS {
            let walk = random_walk(&tso, &mut rng, WALK_LEN);
            steps += walk.len();
            check_tso_walk(&walk).map_err(|e| format!("{name} walk {w}: {e}"))?;

            let walk = random_walk(&sc, &mut rng, WALK_LEN);
            let mut t = Vec::new();
            for (_, a, _) in &walk {
                t.push(*a);
                if let Action::Write { pid, loc, val } = *a {
                    t.push(Action::Flush { pid, loc, val });
                }
            }
            let end = walk.last().map_or_else(|| sc.initial(), |s| s.2.clone());
            let reached = replay_set(&tso1, &t, vec![tso1.initial()])
                .map_err(|e| format!("{name} walk {w}: SC run does not replay under TSO: {e}"))?;
            ensure(reached.contains(&end), || format!("{name} walk {w}: SC run ends elsewhere under TSO"))?;
            embedded += 1;
        }
    }
    Ok(format!("{} libraries, {steps} TSO steps checked, {embedded} SC runs embedded", zoo().len()))
}

// ---------------------------------------------------------------- 3

fn c3_oracle() -> Result<String, String> {
    let mut cells = 0;
    let mut violated = 0;
    for (name, lib) in zoo() {
        for n in [1, 2] {
            for k in [1, 2] {
                let s = spec(lib, n, MemoryModel::Tso, k);
                let oracle = brute_force_verdicts(&s, ORACLE_LIMIT).map_err(|e| format!("{name}: {e}"))?;
                for (pi, p) in PropertyId::ALL.into_iter().enumerate() {
                    let r = find_violation(&s, p, Default::default()).map_err(|e| e.to_string())?;
                    let found = r.verdict.is_violated();
                    ensure(found == oracle[pi], || {
                        format!("{name} n={n} k={k} {}: search {found}, oracle {}", p.name(), oracle[pi])
                    })?;
                    if let Some(w) = r.verdict.witness() {
                        ensure(holds(check_lasso_conditions(&s, w, p)), || {
                            format!("{name} n={n} k={k} {}: witness does not check", p.name())
                        })?;
                        violated += 1;
                    }
                    cells += 1;
                }
            }
        }
    }
    Ok(format!("{cells} cells, 0 disagreements, {violated} witnesses replayed"))
}

// ---------------------------------------------------------------- 4

fn c4_canonical() -> Result<String, String> {
    let spin = spec(&zoo_lib("spin"), 2, MemoryModel::Tso, 2);
    for p in PropertyId::BOUNDED {
        let r = find_violation(&spin, p, Default::default()).map_err(|e| e.to_string())?;
        let w = r.verdict.witness().ok_or_else(|| format!("spin: {} not violated", p.name()))?;
        ensure(holds(check_lasso_conditions(&spin, w, p)), || format!("spin {}: witness", p.name()))?;
    }
    let r = check_obstruction_freedom(&spin, Default::default()).map_err(|e| e.to_string())?;
    let w = r.verdict.witness().ok_or("spin: obstruction-freedom not violated")?;
    ensure(holds(check_lasso_conditions(&spin, w, PropertyId::ObstructionFreedom)), || "spin obstruction witness".into())?;

    let trivial = spec(&zoo_lib("trivial"), 2, MemoryModel::Tso, 2);
    for p in PropertyId::BOUNDED {
        let r = find_violation(&trivial, p, Default::default()).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::NoViolationAtBound(2), || format!("trivial {}: {}", p.name(), r.verdict.tag()))?;
    }
    let r = check_obstruction_freedom(&trivial, Default::default()).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Satisfied, || format!("trivial obstruction: {}", r.verdict.tag()))?;

    let lib = zoo_lib("wait_flag");
    let bp = blocking_pairs(&lib, DEFAULT_BLOCKING_LIMIT).map_err(|e| e.to_string())?;
    let wait = &lib.methods[lib.method_by_name("wait").ok_or("no wait method")?.0 as usize];
    let flag0 = vec![lib.value("0")];
    ensure(wait.initial.iter().all(|&p| bp.contains(Control::Lib(p), &flag0)), || "(is_wait, flag=0) is not blocking".into())?;
    let s = spec(&lib, 2, MemoryModel::Tso, 2);
    let r = check_obstruction_freedom(&s, Default::default()).map_err(|e| e.to_string())?;
    let w = r.verdict.witness().ok_or("wait_flag: obstruction-freedom not violated")?;
    ensure(holds(check_lasso_conditions(&s, w, PropertyId::ObstructionFreedom)), || "wait_flag witness".into())?;
    Ok("spin violates all five, trivial gets NO_VIOLATION_AT_BOUND x4 and SATISFIED, wait_flag blocks at flag=0".into())
}

// ---------------------------------------------------------------- 5

fn c5_obstruction() -> Result<String, String> {
    let mut systems = 0;
    let mut violated = 0;
    for (name, lib) in zoo() {
        for n in [1, 2] {
            for k in [1, 2] {
                let s = spec(lib, n, MemoryModel::Tso, k);
                let bp = check_obstruction_freedom(&s, Default::default()).map_err(|e| e.to_string())?;
                let direct = find_violation(&s, PropertyId::ObstructionFreedom, Default::default()).map_err(|e| e.to_string())?;
                ensure(bp.verdict.is_violated() == direct.verdict.is_violated(), || {
                    format!("{name} n={n} k={k}: blocking pairs {}, direct {}", bp.verdict.tag(), direct.verdict.tag())
                })?;
                systems += 1;
                violated += bp.verdict.is_violated() as usize;
            }
        }
    }
    Ok(format!("{systems} systems agree ({violated} violated)"))
}

// ---------------------------------------------------------------- 6

fn inst(a: &[&str], b: &[&str]) -> CpcpInstance {
    let mut alphabet = vec!['a', 'b'];
    for c in a.iter().chain(b).flat_map(|w| w.chars()) {
        if !alphabet.contains(&c) {
            alphabet.push(c);
        }
    }
    CpcpInstance::new(alphabet, a.iter().map(|s| s.to_string()).collect(), b.iter().map(|s| s.to_string()).collect())
        .unwrap()
}

fn c6_solver() -> Result<String, String> {
    let cases: [(&[&str], &[&str], Option<Vec<usize>>); 4] = [
        (&["a"], &["a"], Some(vec![1])),
        (&["ab", "b"], &["a", "bb"], Some(vec![1, 2])),
        (&["ba"], &["ab"], Some(vec![1])),
        (&["a"], &["b"], None),
    ];
    for (a, b, want) in cases {
        let got = solve_brute(&inst(a, b), 6);
        ensure(got == want, || format!("{a:?}/{b:?}: got {got:?}, want {want:?}"))?;
    }
    Ok("[1], [1,2], [1], NONE_UP_TO(6)".into())
}

// ---------------------------------------------------------------- 7

/// Channel bound and configuration cap at which solvable instances are
/// searched. Smaller bounds miss the ("ba")/("ab") lasso.
const POS_CHANNEL_BOUND: usize = 12;
const POS_DEPTH: usize = 3_000_000;
const NEG_CHANNEL_BOUND: usize = 8;
const NEG_DEPTH: usize = 10_000;

fn c7_channel() -> Result<String, String> {
    let solvable: [(&[&str], &[&str]); 3] = [(&["a"], &["a"]), (&["ab", "b"], &["a", "bb"]), (&["ba"], &["ab"])];
    let unsolvable: [(&[&str], &[&str]); 3] = [(&["a"], &["b"]), (&["aa"], &["a"]), (&["ab", "b"], &["a", "a"])];
    let mut lens = Vec::new();
    for (a, b) in solvable {
        let i = inst(a, b);
        ensure(solve_brute(&i, 6).is_some(), || format!("{a:?}/{b:?} has no solution"))?;
        let sc = to_single_channel(&build_cm(&i)).map_err(|e| e.to_string())?;
        let s1 = sc.cm.state_id("s1").ok_or("no s1")?;
        match bounded_lasso_search(&sc.cm, s1, POS_CHANNEL_BOUND, POS_DEPTH) {
            LassoResult::Witness(l) => {
                ensure(validate_cm_lasso(&sc.cm, &l), || format!("{a:?}/{b:?}: lasso does not replay"))?;
                ensure(l.cycle.iter().any(|(_, c)| c.q == s1), || format!("{a:?}/{b:?}: loop misses s1"))?;
                lens.push(format!("{}+{}", l.stem.len(), l.cycle.len()));
            }
            LassoResult::NoWitnessAtBound { explored, .. } => {
                return Err(format!("{a:?}/{b:?}: no lasso, explored {explored}"));
            }
        }
    }
    for (a, b) in unsolvable {
        let i = inst(a, b);
        ensure(solve_brute(&i, 6).is_none(), || format!("{a:?}/{b:?} has a solution"))?;
        let sc = to_single_channel(&build_cm(&i)).map_err(|e| e.to_string())?;
        let s1 = sc.cm.state_id("s1").ok_or("no s1")?;
        ensure(
            matches!(bounded_lasso_search(&sc.cm, s1, NEG_CHANNEL_BOUND, NEG_DEPTH), LassoResult::NoWitnessAtBound { .. }),
            || format!("{a:?}/{b:?}: unexpected lasso"),
        )?;
    }
    Ok(format!("3 solvable instances have lassos (stem+loop {}), 3 unsolvable have none", lens.join(", ")))
}

// ---------------------------------------------------------------- 8

struct Reduced {
    pipe: Pipeline,
    sched: WitnessSchedule,
    built: Duration,
}

fn reduced() -> &'static [Reduced] {
    static R: OnceLock<Vec<Reduced>> = OnceLock::new();
    R.get_or_init(|| {
        [(vec!["a"], vec!["a"]), (vec!["ab", "b"], vec!["a", "bb"])]
            .into_iter()
            .map(|(a, b)| {
                let t = Instant::now();
                let i = inst(&a, &b);
                let sol = solve_brute(&i, 6).expect("solvable");
                let pipe = Pipeline::new(&i).expect("pipeline");
                let sched = build_witness_schedule(&pipe, &sol, 2).expect("schedule");
                Reduced { pipe, sched, built: t.elapsed() }
            })
            .collect()
    })
}

fn c8_witness() -> Result<String, String> {
    let mut out = Vec::new();
    for r in reduced() {
        let t = Instant::now();
        let w = &r.sched;
        let spec = r.pipe.spec(BufferBound::Bounded(w.bound));
        replay_set(&spec, &w.trace, vec![spec.initial()]).map_err(|e| format!("trace does not replay: {e}"))?;
        for p in PropertyId::BOUNDED {
            ensure(holds(check_lasso_conditions(&spec, &w.lasso, p)), || format!("{} not violated", p.name()))?;
        }
        let cycle = &w.lasso.cycle;
        ensure((1..=2).all(|q| cycle.iter().any(|a| a.pid() == Pid(q))), || "loop is not fair".into())?;
        ensure(!cycle.iter().any(Action::is_return), || "loop returns".into())?;
        let took = r.built + t.elapsed();
        ensure(took <= LIMIT_8, || format!("{:?}/{:?} took {took:?}", r.pipe.inst.a, r.pipe.inst.b))?;
        out.push(format!(
            "{:?}/{:?}: bound {}, stem {}, loop {}",
            r.pipe.inst.a,
            r.pipe.inst.b,
            w.bound,
            w.lasso.stem.len(),
            cycle.len()
        ));
    }
    Ok(out.join("; "))
}

// ---------------------------------------------------------------- 9

fn c9_trichotomy() -> Result<String, String> {
    let r = &reduced()[0];
    let spec = r.pipe.spec(BufferBound::Bounded(2));
    let lib = &r.pipe.lib;
    let fail = lib.loc("failSimu").0 as usize;
    let yes = lib.value("yes");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut samples: HashSet<Configuration> = HashSet::new();
    let mut walks = 0;
    while samples.len() < FAIL_SAMPLES && walks < 100_000 {
        walks += 1;
        for (_, _, c) in random_walk(&spec, &mut rng, 200) {
            if c.memory[fail] == yes {
                samples.insert(c);
                break;
            }
        }
    }
    ensure(samples.len() >= FAIL_SAMPLES, || format!("only {} failure configurations sampled", samples.len()))?;
    let mut deepest = 0;
    let mut pending = 0;
    for c in &samples {
        for q in 0..2 {
            let pid = Pid::from_index(q);
            if c.is_pending(pid) {
                pending += 1;
                let d = solo_return_depth(&spec, c, pid, SOLO_BUDGET)
                    .ok_or_else(|| format!("process {pid} does not return within {SOLO_BUDGET} steps"))?;
                deepest = deepest.max(d);
            }
        }
    }
    let mut rounds = 0;
    for r in reduced() {
        let w = &r.sched;
        for k in 0..w.guess_rules.saturating_sub(1) {
            let seg = &w.trace[w.rule_marks[k]..w.rule_marks[k + 1]];
            for q in 1..=2 {
                ensure(seg.iter().any(|a| a.is_return() && a.pid() == Pid(q)), || {
                    format!("guess round {k} has no return of process {q}")
                })?;
            }
            rounds += 1;
        }
    }
    Ok(format!(
        "{} failure configurations, {pending} pending calls all return (max {deepest} steps); {rounds} guess rounds return both",
        samples.len()
    ))
}

// ---------------------------------------------------------------- 10

fn random_machine(rng: &mut ChaCha8Rng) -> ChannelMachine {
    let ns = rng.gen_range(2..=5);
    let nc = rng.gen_range(1..=2);
    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(ns..=2 * ns) {
        let mut ops = Vec::new();
        for c in 0..nc {
            match rng.gen_range(0..3) {
                0 => ops.push((c as u16, Op::Send(rng.gen_range(0..2)))),
                1 => ops.push((c as u16, Op::Recv(rng.gen_range(0..2)))),
                _ => {}
            }
        }
        transitions.push(Transition { from: rng.gen_range(0..ns), label: None, ops, to: rng.gen_range(0..ns) });
    }
    ChannelMachine {
        states: (0..ns).map(|i| format!("q{i}")).collect(),
        channels: (0..nc).map(|i| format!("c{i}")).collect(),
        alphabet: vec!["a".into(), "b".into()],
        init: 0,
        transitions,
    }
}

/// Forward lossy search from `from` with empty channels. `None` when the
/// target was not found but some successor was cut off by the bound.
fn forward_reach(cm: &ChannelMachine, from: u32, to: u32, bound: usize) -> Option<bool> {
    let start = CmConfig { q: from, chans: vec![Vec::new(); cm.channels.len()] };
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut cut = false;
    while let Some(c) = queue.pop_front() {
        if c.q == to {
            return Some(true);
        }
        for (_, d) in step_lossy(cm, &c) {
            if d.chans.iter().any(|w| w.len() > bound) {
                cut = true;
            } else if seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    if cut {
        None
    } else {
        Some(false)
    }
}

fn steps_dominated(cm: &ChannelMachine, c: &CmConfig) -> bool {
    let canon = step_lossy(cm, c);
    let full = step_lossy_full(cm, c);
    canon.iter().all(|x| full.contains(x))
        && full.iter().all(|(t, d)| {
            canon.iter().any(|(u, e)| u == t && e.q == d.q && d.chans.iter().zip(&e.chans).all(|(a, b)| is_subword(a, b)))
        })
}

fn c10_backward() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut conclusive = 0;
    let mut pairs = 0;
    let mut reachable = 0;
    for m in 0..10 {
        let cm = random_machine(&mut rng);
        ensure(cm.validate().is_empty(), || format!("machine {m} invalid"))?;
        let ns = cm.states.len() as u32;
        for from in 0..ns {
            let empty = CmConfig { q: from, chans: vec![Vec::new(); cm.channels.len()] };
            ensure(steps_dominated(&cm, &empty), || format!("machine {m}: lossy steps disagree"))?;
            for to in 0..ns {
                let back = backward_reach(&cm, from, to);
                pairs += 1;
                reachable += back as usize;
                if let Some(fwd) = forward_reach(&cm, from, to, 4) {
                    conclusive += 1;
                    ensure(fwd == back, || format!("machine {m} {from}->{to}: backward {back}, forward {fwd}"))?;
                }
            }
        }
    }
    Ok(format!("10 machines, {pairs} state pairs ({reachable} reachable), {conclusive} forward-conclusive, 0 disagreements"))
}
