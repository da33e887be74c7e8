//! Prover-side column data: CPU columns, memory and range-check segments.

pub mod columns;
pub mod memory;
pub mod range_check;
pub mod statement;

use crate::field::Felt;

pub use columns::{build_execution_columns, CpuCol, ExecutionColumns};
pub use memory::{collect_memory_accesses, public_memory_product, sort_with_products, MemorySegment};
pub use range_check::{build_rc_segment, RcSegment, RC_BOUND};
pub use statement::PublicStatement;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("malformed columns: {0}")]
    Shape(String),
    #[error("row {row}: {cause}")]
    Step { row: usize, cause: String },
    #[error("public memory at {addr} is {expected} but memory holds {actual:?}")]
    PublicMemoryMismatch { addr: Felt, expected: Felt, actual: Option<Felt> },
    #[error("address {addr} holds both {first} and {second}")]
    InconsistentMemory { addr: Felt, first: Felt, second: Felt },
    #[error("address {0} is outside the 64-bit range the prover can fill")]
    AddressRange(String),
    #[error("accessed addresses span [{lo}, {hi}], too wide to fill")]
    SpanTooLarge { lo: u64, hi: u64 },
    #[error("row {row}: offset {value} is not a 16-bit value")]
    OffsetRange { row: usize, value: Felt },
    #[error("challenge {0} collides with a committed value")]
    DegenerateChallenge(&'static str),
}

/// All committed and interaction columns of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSet {
    pub cpu: ExecutionColumns,
    pub memory: MemorySegment,
    pub range_check: RcSegment,
}
