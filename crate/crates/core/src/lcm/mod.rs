//! Lossy channel machines: perfect and lossy steps, backward reachability,
//! bounded lasso search.

pub mod backward;
pub mod lasso;
pub mod machine;
pub mod step;

pub use backward::{backward_basis, backward_reach};
pub use lasso::{bounded_lasso_search, replay_lossy, validate_cm_lasso, CmLasso, LassoResult};
pub use machine::{ChanId, ChannelMachine, CmConfig, CmParseError, Op, StateId, Sym, Transition};
pub use step::{is_subword, step_lossy, step_lossy_full, step_perfect, subwords};
