//! CPCP instances, cyclic equality, and a brute-force solver.
//!
//! Instance files:
//!
//! ```text
//! a b
//! A: ab b
//! B: a bb
//! ```

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CpcpInstance {
    pub alphabet: Vec<char>,
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("A has {a} words but B has {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty word in {0}")]
    EmptyWord(char),
    #[error("no words")]
    Empty,
    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(char),
}

impl CpcpInstance {
    pub fn new(alphabet: Vec<char>, a: Vec<String>, b: Vec<String>) -> Result<Self, InstanceError> {
        let inst = CpcpInstance { alphabet, a, b };
        inst.check()?;
        Ok(inst)
    }

    /// Builds an instance whose alphabet is the letters used, in order of
    /// first appearance.
    pub fn from_words(a: &[&str], b: &[&str]) -> Result<Self, InstanceError> {
        let mut alphabet = Vec::new();
        for ch in a.iter().chain(b).flat_map(|w| w.chars()) {
            if !alphabet.contains(&ch) {
                alphabet.push(ch);
            }
        }
        Self::new(
            alphabet,
            a.iter().map(|s| s.to_string()).collect(),
            b.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn check(&self) -> Result<(), InstanceError> {
        if self.a.is_empty() {
            return Err(InstanceError::Empty);
        }
        if self.a.len() != self.b.len() {
            return Err(InstanceError::LengthMismatch { a: self.a.len(), b: self.b.len() });
        }
        for (tag, words) in [('A', &self.a), ('B', &self.b)] {
            for w in words {
                if w.is_empty() {
                    return Err(InstanceError::EmptyWord(tag));
                }
                if let Some(c) = w.chars().find(|c| !self.alphabet.contains(c)) {
                    return Err(InstanceError::UnknownLetter(c));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Concatenations of the A words and the B words along 1-based indices.
    pub fn concat(&self, seq: &[usize]) -> (String, String) {
        let a = seq.iter().map(|&i| self.a[i - 1].as_str()).collect();
        let b = seq.iter().map(|&i| self.b[i - 1].as_str()).collect();
        (a, b)
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, first) = lines.next().ok_or(InstanceError::Empty)?;
        let alphabet: Vec<char> = first.chars().filter(|c| !c.is_whitespace() && *c != ',').collect();
        let mut a = None;
        let mut b = None;
        for (ln, line) in lines {
            let (tag, rest) = line.split_once(':').ok_or_else(|| InstanceError::Parse {
                line: ln,
                msg: "expected `A:` or `B:`".into(),
            })?;
            let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            match tag.trim() {
                "A" => a = Some(words),
                "B" => b = Some(words),
                t => {
                    return Err(InstanceError::Parse { line: ln, msg: format!("unknown section `{t}`") });
                }
            }
        }
        let missing = |s: &str| InstanceError::Parse { line: 0, msg: format!("missing `{s}:` line") };
        Self::new(alphabet, a.ok_or_else(|| missing("A"))?, b.ok_or_else(|| missing("B"))?)
    }

    pub fn to_text(&self) -> String {
        let alpha: Vec<String> = self.alphabet.iter().map(|c| c.to_string()).collect();
        format!("{}\nA: {}\nB: {}\n", alpha.join(" "), self.a.join(" "), self.b.join(" "))
    }
}

/// True iff `r` is a rotation of `l`.
pub fn cyclic_equal(l: &str, r: &str) -> bool {
    l.len() == r.len() && format!("{l}{l}").contains(r)
}

fn next_sequence(seq: &mut [usize], m: usize) -> bool {
    for i in (0..seq.len()).rev() {
        if seq[i] < m {
            seq[i] += 1;
            for s in &mut seq[i + 1..] {
                *s = 1;
            }
            return true;
        }
    }
    false
}

/// The shortest, then lexicographically least, nonempty index sequence
/// (1-based) of length at most `max_len` whose concatenations are cyclically
/// equal.
pub fn solve_brute(inst: &CpcpInstance, max_len: usize) -> Option<Vec<usize>> {
    let m = inst.len();
    for k in 1..=max_len {
        let mut seq = vec![1usize; k];
        loop {
            let (a, b) = inst.concat(&seq);
            if cyclic_equal(&a, &b) {
                return Some(seq);
            }
            if !next_sequence(&mut seq, m) {
                break;
            }
        }
    }
    None
}
