//! Hand-assembled sample programs.
//!
//! Every program is loaded at address 1, ends in `jmp rel 0`, and starts with
//! `ap = fp` two cells past its code. The two cells below `ap` hold zeros so
//! that default operands (`[fp - 1]`) are readable. Memory is completed by an
//! honest run, and the public memory is the code plus those two cells.

use std::collections::BTreeMap;

use crate::field::Field;
use crate::isa::asm::{ApUpdate, Assembler, InstructionBuilder, Op1, Reg, ResLogic};
use crate::isa::exec::ExecError;
use crate::isa::semantics::SparseMemory;
use crate::program::{Program, DEFAULT_MAX_STEPS};

pub const CODE_BASE: u64 = 1;

/// Names accepted by [`build`].
pub const NAMES: [&str; 6] = ["straight_line", "countdown", "fibonacci", "ap_advance", "halt", "mul"];

fn load(field: Field, asm: &Assembler) -> Result<Program, ExecError> {
    let mut memory = SparseMemory::new(field);
    asm.write_into(&mut memory).expect("fresh memory");
    let end = asm.here();
    memory.set(field.elem(end), field.zero());
    memory.set(field.elem(end + 1), field.zero());
    let m_star: BTreeMap<_, _> = memory.iter().collect();
    let mut p = Program { memory, initial_pc: field.elem(CODE_BASE), initial_ap: field.elem(end + 2), m_star };
    p.complete_memory(DEFAULT_MAX_STEPS)?;
    Ok(p)
}

/// `[ap] = 7; [ap] = 5; [ap] = [ap-1] * [ap-2]; [ap] = [ap-1] + 3`.
pub fn straight_line(field: Field) -> Result<Program, ExecError> {
    let mut a = Assembler::new(field, CODE_BASE);
    a.assert_imm((Reg::Ap, 0), 7, true);
    a.assert_imm((Reg::Ap, 0), 5, true);
    a.assert_eq((Reg::Ap, 0), (Reg::Ap, -1), Op1::Ap(-2), ResLogic::Mul, None, true);
    a.assert_eq((Reg::Ap, 0), (Reg::Ap, -1), Op1::Imm, ResLogic::Add, Some(3), true);
    a.jmp_rel(0);
    load(field, &a)
}

/// Counts `n` down to zero with a conditional jump.
pub fn countdown(field: Field, n: u64) -> Result<Program, ExecError> {
    let mut a = Assembler::new(field, CODE_BASE);
    a.assert_imm((Reg::Ap, 0), n as i64, true);
    let top = a.assert_eq((Reg::Ap, 0), (Reg::Ap, -1), Op1::Imm, ResLogic::Add, Some(-1), true);
    let j = a.here();
    a.jnz_rel((Reg::Ap, -1), top as i64 - j as i64);
    a.jmp_rel(0);
    load(field, &a)
}

/// Recursive fibonacci with two locals per frame. The argument is `[fp - 3]`
/// and the result is left in `[ap - 1]`.
pub fn fibonacci(field: Field, n: u64) -> Result<Program, ExecError> {
    let mut a = Assembler::new(field, CODE_BASE);
    a.assert_imm((Reg::Ap, 0), n as i64, true);
    let call_main = a.call_rel(0);
    a.jmp_rel(0);

    let fib = a.ap_add_imm(2);
    let j0 = a.jnz_rel((Reg::Fp, -3), 0);
    a.assert_imm((Reg::Ap, 0), 0, true);
    a.ret();
    let nonzero = a.assert_eq((Reg::Fp, 0), (Reg::Fp, -3), Op1::Imm, ResLogic::Add, Some(-1), false);
    let j1 = a.jnz_rel((Reg::Fp, 0), 0);
    a.assert_imm((Reg::Ap, 0), 1, true);
    a.ret();
    let rec = a.assert_eq((Reg::Ap, 0), (Reg::Fp, -1), Op1::Fp(0), ResLogic::Op1, None, true);
    let c1 = a.call_rel(0);
    a.assert_eq((Reg::Fp, 1), (Reg::Fp, -1), Op1::Ap(-1), ResLogic::Op1, None, false);
    a.assert_eq((Reg::Ap, 0), (Reg::Fp, 0), Op1::Imm, ResLogic::Add, Some(-1), true);
    let c2 = a.call_rel(0);
    a.assert_eq((Reg::Ap, 0), (Reg::Ap, -1), Op1::Fp(1), ResLogic::Add, None, true);
    a.ret();

    let rel = |from: u64, to: u64| to as i64 - from as i64;
    a.patch_imm(call_main, rel(call_main, fib));
    a.patch_imm(j0, rel(j0, nonzero));
    a.patch_imm(j1, rel(j1, rec));
    a.patch_imm(c1, rel(c1, fib));
    a.patch_imm(c2, rel(c2, fib));
    load(field, &a)
}

/// `ap += [ap - 1]`, `ap += imm` and an absolute jump over dead code.
pub fn ap_advance(field: Field) -> Result<Program, ExecError> {
    let mut a = Assembler::new(field, CODE_BASE);
    a.assert_imm((Reg::Ap, 0), 3, true);
    let add_cell = InstructionBuilder::new().op1(Op1::Ap(-1)).ap_update(ApUpdate::Add).build();
    a.emit(add_cell, None);
    a.assert_imm((Reg::Ap, 0), 11, true);
    a.ap_add_imm(4);
    let jump = a.jmp_abs(0);
    a.assert_imm((Reg::Ap, 0), 99, true);
    let halt = a.jmp_rel(0);
    a.patch_imm(jump, halt as i64);
    load(field, &a)
}

/// A lone `jmp rel 0`.
pub fn halt(field: Field) -> Result<Program, ExecError> {
    let mut a = Assembler::new(field, CODE_BASE);
    a.jmp_rel(0);
    load(field, &a)
}

/// `[ap + 10] = [fp] * [fp + 1]` after writing both inputs.
pub fn mul(field: Field) -> Result<Program, ExecError> {
    let mut a = Assembler::new(field, CODE_BASE);
    a.assert_imm((Reg::Ap, 0), 6, true);
    a.assert_imm((Reg::Fp, 1), 7, false);
    let i = InstructionBuilder::new()
        .dst(Reg::Ap, 10)
        .op0(Reg::Fp, 0)
        .op1(Op1::Fp(1))
        .res(ResLogic::Mul)
        .opcode(crate::isa::asm::Opcode::AssertEq)
        .build();
    a.emit(i, None);
    a.jmp_rel(0);
    load(field, &a)
}

pub fn build(name: &str, field: Field) -> Option<Result<Program, ExecError>> {
    Some(match name {
        "straight_line" => straight_line(field),
        "countdown" => countdown(field, 10),
        "fibonacci" => fibonacci(field, 6),
        "ap_advance" => ap_advance(field),
        "halt" => halt(field),
        "mul" => mul(field),
        _ => return None,
    })
}

/// Every named program.
pub fn all(field: Field) -> Result<Vec<(&'static str, Program)>, ExecError> {
    NAMES.iter().map(|&n| build(n, field).expect("known name").map(|p| (n, p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;

    fn fib_ref(n: u64) -> u64 {
        if n < 2 { n } else { fib_ref(n - 1) + fib_ref(n - 2) }
    }

    #[test]
    fn fibonacci_leaves_result_below_ap() {
        let f = FieldConfig::goldilocks();
        for n in 0..8 {
            let p = fibonacci(f, n).unwrap();
            let trace = p.run(None).unwrap();
            let last = trace.last().unwrap();
            assert_eq!(p.memory.as_map()[&(last.ap - f.one())], f.elem(fib_ref(n)), "n = {n}");
        }
    }

    #[test]
    fn straight_line_values() {
        let f = FieldConfig::goldilocks();
        let p = straight_line(f).unwrap();
        let trace = p.run(None).unwrap();
        assert_eq!(trace.len(), 5);
        let ap0 = p.initial_ap;
        let got: Vec<_> = (0..4).map(|k| p.memory.as_map()[&(ap0 + f.elem(k))]).collect();
        assert_eq!(got, [f.elem(7), f.elem(5), f.elem(35), f.elem(38)]);
    }

    #[test]
    fn countdown_takes_expected_steps() {
        let f = FieldConfig::goldilocks();
        let trace = countdown(f, 10).unwrap().run(None).unwrap();
        // one setup step, ten decrement/jnz pairs
        assert_eq!(trace.len(), 1 + 20 + 1);
    }

    #[test]
    fn ap_advance_skips_cells() {
        let f = FieldConfig::goldilocks();
        let p = ap_advance(f).unwrap();
        let trace = p.run(None).unwrap();
        let last = trace.last().unwrap();
        assert_eq!(last.ap, p.initial_ap + f.elem(1 + 3 + 1 + 4));
        // ap += [ap - 1] jumped over three cells nobody writes
        assert!(!p.memory.contains(p.initial_ap + f.elem(1)));
        assert_eq!(trace.len(), 6);
    }

    #[test]
    fn every_program_fits_the_size_budget() {
        let f = FieldConfig::goldilocks();
        for (name, p) in all(f).unwrap() {
            let t = p.run_padded(None).unwrap();
            assert!(t.len() <= 1 << 10, "{name} has {} states", t.len());
        }
    }
}
