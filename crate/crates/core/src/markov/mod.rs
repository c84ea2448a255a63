//! Conditional blocks, the kernel-inclusion test, Choi application and
//! block-operator consistency.

mod blocks;
mod channel;
mod conditional;
mod inclusion;

pub use blocks::{
    marginal_block_consistency, theta_blocks, BlockConsistencyReport, BlockJson, BlockOperator,
    ConsistencyWitness, BLOCK_TOL,
};
pub(crate) use channel::apply_choi_raw;
pub use channel::{apply_choi, verify_recovery};
pub use conditional::{conditional_block, conditional_decomposition, ConditionalBlock};
pub use inclusion::{
    kernel_inclusion_check, kernel_inclusion_check_with, InclusionReport, OutcomeInclusion,
    DEFAULT_INCLUSION_TOL,
};
