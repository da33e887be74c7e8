//! Instruction encoding, machine semantics and a small executor.

pub mod asm;
pub mod exec;
pub mod instruction;
pub mod semantics;

use crate::field::Felt;

pub use exec::{pad_with_infinite_loop, run_program, run_until_halt, run_with_deduction, ExecError, ExecErrorKind};
pub use instruction::{flags_from_tilde, tilde_from_flags, Flag, Instruction, NUM_FLAGS, OFFSET_BIAS};
pub use semantics::{
    check_step, next_state_relation, Memory, NextState, OperandBundle, RegisterState, SparseMemory, StepFailure,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsaError {
    #[error("flag word {0:#x} uses bits above 14")]
    FlagsOutOfRange(u16),
    #[error("{0} does not encode an instruction")]
    NotAnInstruction(String),
    #[error("memory is undefined at address {0}")]
    MissingMemory(Felt),
    #[error("memory conflict at {addr}: {old} vs {new}")]
    MemoryConflict { addr: Felt, old: Felt, new: Felt },
}
