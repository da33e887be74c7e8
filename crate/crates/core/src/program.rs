use std::collections::BTreeMap;

use crate::field::{Felt, Field};
use crate::isa::exec::{pad_with_infinite_loop, run_program, run_until_halt, ExecError};
use crate::isa::semantics::{RegisterState, SparseMemory};

/// A loaded program: its memory image, entry registers and the public part
/// of memory shared with the verifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub memory: SparseMemory,
    pub initial_pc: Felt,
    pub initial_ap: Felt,
    pub m_star: BTreeMap<Felt, Felt>,
}

/// Step budget when running until the program halts.
pub const DEFAULT_MAX_STEPS: usize = 1 << 20;

impl Program {
    pub fn field(&self) -> Field {
        self.memory.field()
    }

    pub fn init(&self) -> RegisterState {
        RegisterState::new(self.initial_pc, self.initial_ap, self.initial_ap)
    }

    /// Runs `steps` instructions, or until the program reaches its final
    /// self-jump when `steps` is `None`. Memory is read-only.
    pub fn run(&self, steps: Option<usize>) -> Result<Vec<RegisterState>, ExecError> {
        match steps {
            Some(t) => run_program(&self.memory, self.init(), t),
            None => {
                let mut mem = self.memory.clone();
                let trace = run_until_halt(&mut mem, self.init(), DEFAULT_MAX_STEPS)?;
                if mem != self.memory {
                    // incomplete memory: surface the first missing cell the strict way
                    return run_program(&self.memory, self.init(), trace.len() - 1);
                }
                Ok(trace)
            }
        }
    }

    /// [`Program::run`] followed by padding to a power-of-two number of states.
    pub fn run_padded(&self, steps: Option<usize>) -> Result<Vec<RegisterState>, ExecError> {
        let trace = self.run(steps)?;
        pad_with_infinite_loop(&self.memory, &trace)
    }

    /// Completes memory with the cells an honest run writes, stopping at the
    /// final self-jump.
    pub fn complete_memory(&mut self, max_steps: usize) -> Result<Vec<RegisterState>, ExecError> {
        let init = self.init();
        run_until_halt(&mut self.memory, init, max_steps)
    }
}
