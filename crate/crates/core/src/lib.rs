//! Liveness checking for concurrent libraries under TSO.
//!
//! The crate covers the whole pipeline: a small library language, TSO and SC
//! operational semantics with bounded store buffers, exhaustive state-space
//! exploration, lasso-based checks for lock-, wait-, deadlock-, starvation-
//! and obstruction-freedom, lossy channel machines, and the CPCP reduction
//! that compiles an instance into a channel machine and a two-method library.

pub mod cpcp;
pub mod dsl;
pub mod explore;
pub mod lcm;
pub mod library;
pub mod liveness;
pub mod model;
pub mod semantics;
pub mod system;

pub use library::LibraryIR;
pub use model::{Action, Configuration, Control, LassoWitness, Loc, MethodId, Pid, PosId, Trace, Val};
pub use system::{BufferBound, MemoryModel, SystemSpec};
