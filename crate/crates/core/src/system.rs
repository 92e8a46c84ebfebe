//! Composition of a library with the most general client.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::library::{validate, LibraryIR};
use crate::model::{Configuration, Control};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryModel {
    Tso,
    Sc,
}

impl fmt::Display for MemoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemoryModel::Tso => "tso",
            MemoryModel::Sc => "sc",
        })
    }
}

/// Store-buffer capacity. `Unbounded` is only usable for stepping and
/// replay; exhaustive exploration needs a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BufferBound {
    Bounded(usize),
    Unbounded,
}

impl BufferBound {
    pub fn allows(self, len: usize) -> bool {
        match self {
            BufferBound::Bounded(k) => len < k,
            BufferBound::Unbounded => true,
        }
    }
}

impl Serialize for BufferBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BufferBound::Bounded(k) => s.serialize_u64(*k as u64),
            BufferBound::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

/// `[[L, n]]` (TSO) or `[[L, n]]_sc`.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    pub lib: Arc<LibraryIR>,
    pub n: usize,
    pub model: MemoryModel,
    pub bound: BufferBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("process count must be at least 1")]
    NoProcesses,
    #[error("buffer bound 0 disables every write under TSO")]
    ZeroBound,
    #[error("library is malformed: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Composes `lib` with the most general client on `n` processes.
pub fn mgc_compose(
    lib: Arc<LibraryIR>,
    n: usize,
    model: MemoryModel,
    bound: BufferBound,
) -> Result<SystemSpec, ComposeError> {
    if n == 0 {
        return Err(ComposeError::NoProcesses);
    }
    if model == MemoryModel::Tso && bound == BufferBound::Bounded(0) {
        return Err(ComposeError::ZeroBound);
    }
    let v = validate(&lib);
    if !v.is_empty() {
        return Err(ComposeError::Invalid(v));
    }
    Ok(SystemSpec { lib, n, model, bound })
}

impl SystemSpec {
    /// `InitConf`: every process in the client, initial memory, empty buffers.
    pub fn initial(&self) -> Configuration {
        Configuration {
            control: vec![Control::Client; self.n],
            memory: self.lib.initial_memory.clone(),
            buffers: vec![Vec::new(); self.n],
        }
    }

    pub fn with_model(&self, model: MemoryModel) -> SystemSpec {
        SystemSpec { model, ..self.clone() }
    }

    pub fn with_bound(&self, bound: BufferBound) -> SystemSpec {
        SystemSpec { bound, ..self.clone() }
    }

    pub fn bound_value(&self) -> Option<usize> {
        match self.bound {
            BufferBound::Bounded(k) => Some(k),
            BufferBound::Unbounded => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_library;

    #[test]
    fn compose_checks_arguments() {
        let lib = Arc::new(parse_library("values: a\nmethod m { return a }").unwrap());
        assert_eq!(
            mgc_compose(lib.clone(), 0, MemoryModel::Tso, BufferBound::Bounded(1)).unwrap_err(),
            ComposeError::NoProcesses
        );
        assert_eq!(
            mgc_compose(lib.clone(), 1, MemoryModel::Tso, BufferBound::Bounded(0)).unwrap_err(),
            ComposeError::ZeroBound
        );
        let s = mgc_compose(lib, 1, MemoryModel::Tso, BufferBound::Bounded(1)).unwrap();
        let c = s.initial();
        assert_eq!(c.control, vec![Control::Client]);
        assert!(c.buffers_empty());
    }
}
