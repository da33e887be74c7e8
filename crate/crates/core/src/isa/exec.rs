use crate::field::Felt;

use super::instruction::{Flag, Instruction};
use super::semantics::{self, next_state_options, Memory, RegisterState, SparseMemory};
use super::IsaError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecErrorKind {
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error("undefined behavior: next {0} is not determined by the instruction")]
    Undefined(&'static str),
    #[error("assertion failed")]
    AssertFailed,
    #[error("field characteristic must exceed 2^63 to execute instructions")]
    FieldTooSmall,
    #[error("final pc does not hold a self-jump; cannot pad with an infinite loop")]
    NoSelfLoop,
    #[error("no fixed point reached within the step budget")]
    NoHalt,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step {step} (pc = {pc}): {kind}")]
pub struct ExecError {
    pub step: usize,
    pub pc: Felt,
    pub kind: ExecErrorKind,
}

fn step<M: Memory + ?Sized>(mem: &M, s: &RegisterState) -> Result<RegisterState, ExecErrorKind> {
    let i = Instruction::from_felt(mem.read(s.pc)?)?;
    let next = next_state_options(&i, mem, s)?;
    if !next.assert_ok {
        return Err(ExecErrorKind::AssertFailed);
    }
    Ok(RegisterState {
        pc: next.pc.ok_or(ExecErrorKind::Undefined("pc"))?,
        ap: next.ap.ok_or(ExecErrorKind::Undefined("ap"))?,
        fp: next.fp.ok_or(ExecErrorKind::Undefined("fp"))?,
    })
}

/// Executes `steps` instructions over read-only memory, returning the
/// `steps + 1` visited states. Any undefined component, failed assertion or
/// unmapped read aborts the run.
pub fn run_program(mem: &SparseMemory, init: RegisterState, steps: usize) -> Result<Vec<RegisterState>, ExecError> {
    if !mem.field().hosts_instructions() {
        return Err(ExecError { step: 0, pc: init.pc, kind: ExecErrorKind::FieldTooSmall });
    }
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(init);
    let mut s = init;
    for k in 0..steps {
        s = step(mem, &s).map_err(|kind| ExecError { step: k, pc: s.pc, kind })?;
        trace.push(s);
    }
    Ok(trace)
}

/// Fills cells an honest run would write: the call frame (`[ap] = fp`,
/// `[ap + 1] = return pc`) and the unknown side of an `assert_eq`.
fn deduce(mem: &mut SparseMemory, s: &RegisterState) -> Result<(), IsaError> {
    let field = mem.field();
    let i = Instruction::from_felt(mem.read(s.pc)?)?;
    let dst_addr = semantics::dst_addr(&i, s);
    let op0_addr = semantics::op0_addr(&i, s);
    if i.flag(Flag::OpcodeCall) {
        mem.insert(dst_addr, s.fp)?;
        mem.insert(op0_addr, s.pc + field.elem(i.size()))?;
    }
    if !i.flag(Flag::OpcodeAssertEq) {
        return Ok(());
    }
    let add = i.flag(Flag::ResAdd);
    let mul = i.flag(Flag::ResMul);
    let op0 = mem.get(op0_addr);
    let dst = mem.get(dst_addr);
    let op1_addr = op0.and_then(|o| semantics::op1_addr(&i, s, o));
    let op1 = op1_addr.and_then(|a| mem.get(a));

    match (dst, op0, op1) {
        (None, Some(o0), Some(o1)) => {
            if let Some(r) = semantics::res(&i, o0, Some(o1)) {
                mem.insert(dst_addr, r)?;
            }
        }
        (Some(d), Some(o0), None) => {
            let v = match (add, mul) {
                (false, false) => Some(d),
                (true, false) => Some(d - o0),
                (false, true) => d.try_div(o0).ok(),
                _ => None,
            };
            if let (Some(v), Some(a)) = (v, op1_addr) {
                mem.insert(a, v)?;
            }
        }
        // op0 unknown: solvable only when op1 does not go through op0
        (Some(d), None, _) if i.flag(Flag::Op1Imm) || i.flag(Flag::Op1Fp) || i.flag(Flag::Op1Ap) => {
            let o1 = semantics::op1_addr(&i, s, field.zero()).and_then(|a| mem.get(a));
            if let Some(o1) = o1 {
                let v = match (add, mul) {
                    (true, false) => Some(d - o1),
                    (false, true) => d.try_div(o1).ok(),
                    _ => None,
                };
                if let Some(v) = v {
                    mem.insert(op0_addr, v)?;
                }
            }
        }
        _ => {}
    }
    Ok(())
}

/// Runs like [`run_program`] but first completes memory the way a
/// write-once runner would, so hand-assembled programs need not spell out
/// every intermediate value. The completed memory is left in `mem`.
pub fn run_with_deduction(
    mem: &mut SparseMemory,
    init: RegisterState,
    steps: usize,
) -> Result<Vec<RegisterState>, ExecError> {
    if !mem.field().hosts_instructions() {
        return Err(ExecError { step: 0, pc: init.pc, kind: ExecErrorKind::FieldTooSmall });
    }
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(init);
    let mut s = init;
    for k in 0..steps {
        let wrap = |kind: ExecErrorKind| ExecError { step: k, pc: s.pc, kind };
        deduce(mem, &s).map_err(|e| wrap(e.into()))?;
        s = step(mem, &s).map_err(wrap)?;
        trace.push(s);
    }
    Ok(trace)
}

/// Runs (with deduction) until the machine reaches a state that steps to
/// itself, the conventional way for a program to stop. The returned trace
/// ends at the first such state.
pub fn run_until_halt(
    mem: &mut SparseMemory,
    init: RegisterState,
    max_steps: usize,
) -> Result<Vec<RegisterState>, ExecError> {
    if !mem.field().hosts_instructions() {
        return Err(ExecError { step: 0, pc: init.pc, kind: ExecErrorKind::FieldTooSmall });
    }
    let mut trace = vec![init];
    let mut s = init;
    for k in 0..=max_steps {
        let wrap = |kind: ExecErrorKind| ExecError { step: k, pc: s.pc, kind };
        deduce(mem, &s).map_err(|e| wrap(e.into()))?;
        let t = step(mem, &s).map_err(wrap)?;
        if t == s {
            return Ok(trace);
        }
        if k == max_steps {
            break;
        }
        trace.push(t);
        s = t;
    }
    Err(ExecError { step: max_steps, pc: s.pc, kind: ExecErrorKind::NoHalt })
}

/// Extends a trace with repetitions of its final state until its length
/// (`T + 1`) is a power of two. The final state must step to itself.
pub fn pad_with_infinite_loop(mem: &SparseMemory, trace: &[RegisterState]) -> Result<Vec<RegisterState>, ExecError> {
    let last = *trace.last().expect("trace has at least one state");
    let fail = |kind| ExecError { step: trace.len() - 1, pc: last.pc, kind };
    let next = step(mem, &last).map_err(fail)?;
    if next != last {
        return Err(fail(ExecErrorKind::NoSelfLoop));
    }
    let target = trace.len().next_power_of_two();
    let mut out = trace.to_vec();
    out.resize(target, last);
    Ok(out)
}
