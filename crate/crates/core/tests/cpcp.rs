use std::collections::{HashSet, VecDeque};

use tsolive_core::cpcp::{build_witness_schedule, CpcpInstance, Pipeline, WitnessError};
use tsolive_core::lcm::{step_lossy, step_perfect, CmConfig};
use tsolive_core::liveness::{check_lasso_conditions, PropertyId};
use tsolive_core::semantics::replay;
use tsolive_core::{Action, BufferBound, Pid};

fn pipe(a: &[&str], b: &[&str]) -> Pipeline {
    Pipeline::new(&CpcpInstance::from_words(a, b).unwrap()).unwrap()
}

#[test]
fn library_shape() {
    let p = pipe(&["ab", "b"], &["a", "bb"]);
    let names: Vec<&str> = p.lib.methods.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(names, ["M1", "M2"]);
    let mut locs = p.lib.locations.clone();
    locs.sort();
    assert_eq!(locs, ["failSimu", "firstM1", "phase", "x1", "x2", "y1", "y2"]);
    assert!(p.lib.is_label_deterministic());
    for n in ["sharp", "bs", "be"] {
        assert!(p.lib.values.iter().any(|v| v == n), "{n}");
    }
}

#[test]
fn first_call_of_m1_writes_rule_and_empty_channel() {
    let p = pipe(&["a"], &["a"]);
    let w = build_witness_schedule(&p, &[1], 1).unwrap();
    let x1 = p.lib.loc("x1");
    let first_ret = w.trace.iter().position(|a| matches!(a, Action::Return { pid: Pid(1), .. })).unwrap();
    let writes: Vec<&str> = w.trace[..first_ret]
        .iter()
        .filter_map(|a| match *a {
            Action::Write { pid: Pid(1), loc, val } if loc == x1 => Some(p.lib.values[val.0 as usize].as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(writes.len(), 6, "{writes:?}");
    assert!(writes[0].starts_with('r'), "{writes:?}");
    assert_eq!(&writes[1..], ["sharp", "bs", "sharp", "be", "sharp"]);
}

#[test]
fn pipeline_is_deterministic() {
    let a = pipe(&["ab", "b"], &["a", "bb"]);
    let b = pipe(&["ab", "b"], &["a", "bb"]);
    assert_eq!(a.lib.to_text(), b.lib.to_text());
    assert_eq!(a.single.cm.to_text(), b.single.cm.to_text());
    let wa = build_witness_schedule(&a, &[1, 2], 1).unwrap();
    let wb = build_witness_schedule(&b, &[1, 2], 1).unwrap();
    assert_eq!(wa.trace, wb.trace);
    assert_eq!(wa.bound, wb.bound);
}

#[test]
fn non_solution_is_rejected() {
    let p = pipe(&["ab", "b"], &["a", "bb"]);
    assert!(matches!(build_witness_schedule(&p, &[2], 1), Err(WitnessError::NotASolution)));
}

#[test]
fn single_letter_witness_violates_four_properties() {
    let p = pipe(&["a"], &["a"]);
    let w = build_witness_schedule(&p, &[1], 2).unwrap();
    let spec = p.spec(BufferBound::Bounded(w.bound));
    replay(&spec, &w.trace, &spec.initial()).unwrap();
    assert!(!w.lasso.cycle.iter().any(|a| a.is_return()));
    for prop in PropertyId::ALL {
        let v = check_lasso_conditions(&spec, &w.lasso, prop).unwrap();
        assert_eq!(v, prop != PropertyId::ObstructionFreedom, "{}", prop.name());
    }
}

/// Losing the closing delimiter of the first segment halfway through a
/// rotation leaves the gadget with no way back to a source state.
#[test]
fn losing_a_delimiter_strands_the_gadget() {
    let p = pipe(&["a"], &["a"]);
    let sc = &p.single;
    let cm = &sc.cm;
    let is_copy = |c: &CmConfig| (c.q as usize) < sc.state_map.len();
    let s1 = sc.state_map[p.layout.s1 as usize];
    let at = sc.encode(&CmConfig { q: p.layout.s1, chans: vec![vec![0], vec![0]] });
    assert_eq!(at.q, s1);
    let gadget = p.layout.check[0][0];
    let (_, mid) = step_perfect(cm, &at).into_iter().find(|(t, _)| *t == sc.entry[gadget]).unwrap();
    assert!(!is_copy(&mid));

    let reaches_copy = |start: CmConfig, perfect: bool| {
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            if is_copy(&c) {
                return true;
            }
            let next = if perfect { step_perfect(cm, &c) } else { step_lossy(cm, &c) };
            for (_, n) in next {
                if seen.len() < 100_000 && seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
        false
    };
    assert!(reaches_copy(mid.clone(), true));

    let mut cut = mid.clone();
    let k = cut.chans[0].iter().rposition(|s| *s == sc.bot1).unwrap();
    cut.chans[0].remove(k);
    assert!(!reaches_copy(cut, false));
}
