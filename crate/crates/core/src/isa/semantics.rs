use std::collections::BTreeMap;

use serde::Serialize;

use crate::field::{Felt, Field};

use super::instruction::{Flag, Instruction};
use super::IsaError;

/// A value that is either determined or left open by undefined behavior.
/// `None` agrees with every value.
pub type MaybeFelt = Option<Felt>;

pub fn agrees(x: MaybeFelt, a: Felt) -> bool {
    x.map_or(true, |b| b == a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RegisterState {
    pub pc: Felt,
    pub ap: Felt,
    pub fp: Felt,
}

impl RegisterState {
    pub fn new(pc: Felt, ap: Felt, fp: Felt) -> Self {
        RegisterState { pc, ap, fp }
    }

    /// The machine's entry state, where `fp` starts equal to `ap`.
    pub fn initial(field: Field, pc: u64, ap: u64) -> Self {
        RegisterState { pc: field.elem(pc), ap: field.elem(ap), fp: field.elem(ap) }
    }
}

/// Read access to machine memory.
pub trait Memory {
    fn get(&self, addr: Felt) -> Option<Felt>;

    fn read(&self, addr: Felt) -> Result<Felt, IsaError> {
        self.get(addr).ok_or(IsaError::MissingMemory(addr))
    }
}

/// A finite partial memory map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMemory {
    field: Field,
    cells: BTreeMap<Felt, Felt>,
}

impl SparseMemory {
    pub fn new(field: Field) -> Self {
        SparseMemory { field, cells: BTreeMap::new() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Write-once insertion: rewriting an address with a different value fails.
    pub fn insert(&mut self, addr: Felt, value: Felt) -> Result<(), IsaError> {
        match self.cells.get(&addr) {
            Some(&old) if old != value => Err(IsaError::MemoryConflict { addr, old, new: value }),
            _ => {
                self.cells.insert(addr, value);
                Ok(())
            }
        }
    }

    /// Unconditional overwrite, for building adversarial fixtures.
    pub fn set(&mut self, addr: Felt, value: Felt) {
        self.cells.insert(addr, value);
    }

    pub fn contains(&self, addr: Felt) -> bool {
        self.cells.contains_key(&addr)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells in increasing address order.
    pub fn iter(&self) -> impl Iterator<Item = (Felt, Felt)> + '_ {
        self.cells.iter().map(|(&a, &v)| (a, v))
    }

    pub fn as_map(&self) -> &BTreeMap<Felt, Felt> {
        &self.cells
    }
}

impl Memory for SparseMemory {
    fn get(&self, addr: Felt) -> Option<Felt> {
        self.cells.get(&addr).copied()
    }
}

impl Memory for BTreeMap<Felt, Felt> {
    fn get(&self, addr: Felt) -> Option<Felt> {
        BTreeMap::get(self, &addr).copied()
    }
}

/// Operand addresses and values of one instruction in one state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperandBundle {
    pub dst_addr: Felt,
    pub dst: Felt,
    pub op0_addr: Felt,
    pub op0: Felt,
    /// Undefined when more than one op1 source flag is set.
    pub op1_addr: MaybeFelt,
    pub op1: MaybeFelt,
    pub res: MaybeFelt,
}

fn offset(field: Field, biased: u16) -> Felt {
    field.from_i64(biased as i64 - (1 << 15))
}

pub fn dst_addr(i: &Instruction, s: &RegisterState) -> Felt {
    let base = if i.flag(Flag::DstReg) { s.fp } else { s.ap };
    base + offset(s.pc.field(), i.off_dst)
}

pub fn op0_addr(i: &Instruction, s: &RegisterState) -> Felt {
    let base = if i.flag(Flag::Op0Reg) { s.fp } else { s.ap };
    base + offset(s.pc.field(), i.off_op0)
}

pub fn op1_addr(i: &Instruction, s: &RegisterState, op0: Felt) -> MaybeFelt {
    let base = match (i.flag(Flag::Op1Imm), i.flag(Flag::Op1Fp), i.flag(Flag::Op1Ap)) {
        (false, false, false) => op0,
        (true, false, false) => s.pc,
        (false, true, false) => s.fp,
        (false, false, true) => s.ap,
        _ => return None,
    };
    Some(base + offset(s.pc.field(), i.off_op1))
}

/// `res` is unused (hence undefined) under a conditional jump.
pub fn res(i: &Instruction, op0: Felt, op1: MaybeFelt) -> MaybeFelt {
    if i.flag(Flag::PcJnz) {
        return None;
    }
    let op1 = op1?;
    match (i.flag(Flag::ResAdd), i.flag(Flag::ResMul)) {
        (false, false) => Some(op1),
        (true, false) => Some(op0 + op1),
        (false, true) => Some(op0 * op1),
        (true, true) => None,
    }
}

pub fn compute_operands<M: Memory + ?Sized>(
    i: &Instruction,
    mem: &M,
    s: &RegisterState,
) -> Result<OperandBundle, IsaError> {
    let dst_addr = dst_addr(i, s);
    let dst = mem.read(dst_addr)?;
    let op0_addr = op0_addr(i, s);
    let op0 = mem.read(op0_addr)?;
    let op1_addr = op1_addr(i, s, op0);
    let op1 = match op1_addr {
        Some(a) => Some(mem.read(a)?),
        None => None,
    };
    Ok(OperandBundle { dst_addr, dst, op0_addr, op0, op1_addr, op1, res: res(i, op0, op1) })
}

/// Candidate successor registers; `None` components are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NextState {
    pub pc: MaybeFelt,
    pub ap: MaybeFelt,
    pub fp: MaybeFelt,
    pub assert_ok: bool,
}

impl NextState {
    pub fn is_deterministic(&self) -> bool {
        self.pc.is_some() && self.ap.is_some() && self.fp.is_some()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Opcode {
    None,
    Call,
    Ret,
    AssertEq,
    Conflict,
}

fn opcode(i: &Instruction) -> Opcode {
    match (i.flag(Flag::OpcodeCall), i.flag(Flag::OpcodeRet), i.flag(Flag::OpcodeAssertEq)) {
        (false, false, false) => Opcode::None,
        (true, false, false) => Opcode::Call,
        (false, true, false) => Opcode::Ret,
        (false, false, true) => Opcode::AssertEq,
        _ => Opcode::Conflict,
    }
}

pub fn next_pc(i: &Instruction, s: &RegisterState, ops: &OperandBundle) -> MaybeFelt {
    let size = s.pc.field().elem(i.size());
    match (i.flag(Flag::PcJumpAbs), i.flag(Flag::PcJumpRel), i.flag(Flag::PcJnz)) {
        (false, false, false) => Some(s.pc + size),
        (true, false, false) => ops.res,
        (false, true, false) => ops.res.map(|r| s.pc + r),
        (false, false, true) => {
            if ops.dst.is_zero() {
                Some(s.pc + size)
            } else {
                ops.op1.map(|o| s.pc + o)
            }
        }
        _ => None,
    }
}

pub fn next_ap(i: &Instruction, s: &RegisterState, ops: &OperandBundle) -> MaybeFelt {
    let field = s.ap.field();
    let regular = || match (i.flag(Flag::ApAdd), i.flag(Flag::ApAdd1)) {
        (false, false) => Some(s.ap),
        (true, false) => ops.res.map(|r| s.ap + r),
        (false, true) => Some(s.ap + field.one()),
        (true, true) => None,
    };
    match opcode(i) {
        Opcode::Call if i.flag(Flag::ApAdd) || i.flag(Flag::ApAdd1) => None,
        Opcode::Call => Some(s.ap + field.elem(2)),
        Opcode::None | Opcode::Ret | Opcode::AssertEq => regular(),
        Opcode::Conflict => None,
    }
}

pub fn next_fp(i: &Instruction, s: &RegisterState, ops: &OperandBundle) -> MaybeFelt {
    match opcode(i) {
        Opcode::None | Opcode::AssertEq => Some(s.fp),
        Opcode::Call => Some(s.ap + s.ap.field().elem(2)),
        Opcode::Ret => Some(ops.dst),
        Opcode::Conflict => None,
    }
}

/// Side conditions of the instruction: a call must have saved `fp` and the
/// return address, an assert must have `dst` agree with `res`.
pub fn asserts(i: &Instruction, s: &RegisterState, ops: &OperandBundle) -> bool {
    match opcode(i) {
        Opcode::Call => ops.op0 == s.pc + s.pc.field().elem(i.size()) && ops.dst == s.fp,
        Opcode::AssertEq => agrees(ops.res, ops.dst),
        _ => true,
    }
}

pub fn next_state_options<M: Memory + ?Sized>(
    i: &Instruction,
    mem: &M,
    s: &RegisterState,
) -> Result<NextState, IsaError> {
    let ops = compute_operands(i, mem, s)?;
    Ok(NextState {
        pc: next_pc(i, s, &ops),
        ap: next_ap(i, s, &ops),
        fp: next_fp(i, s, &ops),
        assert_ok: asserts(i, s, &ops),
    })
}

/// Why a pair of states is not related by one machine step.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepFailure {
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error("next {register} is {actual}, instruction requires {expected}")]
    RegisterMismatch { register: &'static str, expected: Felt, actual: Felt },
    #[error("instruction assertion does not hold")]
    AssertFailed,
}

/// Checks `t` is a successor of `s` under `mem`, explaining any failure.
pub fn check_step<M: Memory + ?Sized>(mem: &M, s: &RegisterState, t: &RegisterState) -> Result<Instruction, StepFailure> {
    let i = Instruction::from_felt(mem.read(s.pc)?)?;
    let next = next_state_options(&i, mem, s)?;
    for (register, expected, actual) in [("pc", next.pc, t.pc), ("ap", next.ap, t.ap), ("fp", next.fp, t.fp)] {
        if let Some(expected) = expected {
            if expected != actual {
                return Err(StepFailure::RegisterMismatch { register, expected, actual });
            }
        }
    }
    if !next.assert_ok {
        return Err(StepFailure::AssertFailed);
    }
    Ok(i)
}

/// The one-step relation: `mem[s.pc]` encodes an instruction whose
/// successor options agree with `t` and whose assertions hold.
pub fn next_state_relation<M: Memory + ?Sized>(mem: &M, s: &RegisterState, t: &RegisterState) -> bool {
    check_step(mem, s, t).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;

    fn f() -> Field {
        FieldConfig::goldilocks()
    }

    fn st(pc: u64, ap: u64, fp: u64) -> RegisterState {
        RegisterState::new(f().elem(pc), f().elem(ap), f().elem(fp))
    }

    fn mem(cells: &[(u64, i64)]) -> SparseMemory {
        let mut m = SparseMemory::new(f());
        for &(a, v) in cells {
            m.insert(f().elem(a), f().from_i64(v)).unwrap();
        }
        m
    }

    fn mul_example() -> Instruction {
        let flags = Flag::Op0Reg.mask() | Flag::Op1Fp.mask() | Flag::ResMul.mask() | Flag::OpcodeAssertEq.mask();
        Instruction::new(32778, 32768, 32767, flags).unwrap()
    }

    #[test]
    fn mul_example_operands() {
        let i = mul_example();
        let s = st(1, 100, 50);
        let m = mem(&[(110, 42), (50, 6), (49, 7)]);
        let ops = compute_operands(&i, &m, &s).unwrap();
        assert_eq!(ops.dst_addr, f().elem(110));
        assert_eq!(ops.op0_addr, f().elem(50));
        assert_eq!(ops.op1_addr, Some(f().elem(49)));
        assert_eq!(ops.res, Some(f().elem(42)));
        let next = next_state_options(&i, &m, &s).unwrap();
        assert!(next.assert_ok && next.is_deterministic());
        assert_eq!(next.pc, Some(f().elem(2)));
        assert_eq!(next.fp, Some(f().elem(50)));
    }

    #[test]
    fn zero_instruction_operands() {
        let bias = 1 << 15;
        let i = Instruction::new(bias, bias, bias, 0).unwrap();
        let s = st(1, 10, 10);
        let m = mem(&[(10, 3), (3, 9)]);
        let ops = compute_operands(&i, &m, &s).unwrap();
        assert_eq!(ops.dst_addr, f().elem(10));
        assert_eq!(ops.op0_addr, f().elem(10));
        // op1 is addressed through op0's value
        assert_eq!(ops.op1_addr, Some(f().elem(3)));
        assert_eq!(ops.res, ops.op1);
    }

    #[test]
    fn conflicting_res_flags_undefined() {
        let bias = 1 << 15;
        let i = Instruction::new(bias, bias, bias, Flag::ResAdd.mask() | Flag::ResMul.mask() | Flag::Op1Ap.mask()).unwrap();
        let m = mem(&[(10, 3)]);
        let ops = compute_operands(&i, &m, &st(1, 10, 10)).unwrap();
        assert_eq!(ops.res, None);
    }

    #[test]
    fn conflicting_op1_sources_undefined() {
        let bias = 1 << 15;
        let i = Instruction::new(bias, bias, bias, Flag::Op1Ap.mask() | Flag::Op1Fp.mask()).unwrap();
        let m = mem(&[(10, 3)]);
        let ops = compute_operands(&i, &m, &st(1, 10, 10)).unwrap();
        assert_eq!((ops.op1_addr, ops.op1, ops.res), (None, None, None));
    }

    #[test]
    fn next_fp_by_opcode() {
        let bias = 1 << 15;
        let m = mem(&[(20, 77), (21, 5)]);
        let s = st(5, 20, 30);
        let base = Instruction::new(bias, bias + 1, bias + 1, Flag::Op1Ap.mask()).unwrap();
        let fp_of = |i: Instruction| next_state_options(&i, &m, &s).unwrap().fp;
        assert_eq!(fp_of(base.with_flag(Flag::OpcodeCall)), Some(f().elem(22)));
        assert_eq!(fp_of(base.with_flag(Flag::OpcodeRet)), Some(f().elem(77)));
        assert_eq!(fp_of(base.with_flag(Flag::OpcodeAssertEq)), Some(f().elem(30)));
        assert_eq!(fp_of(base), Some(f().elem(30)));
        assert_eq!(fp_of(base.with_flag(Flag::OpcodeCall).with_flag(Flag::OpcodeRet)), None);
    }

    #[test]
    fn ap_updates() {
        let bias = 1 << 15;
        let m = mem(&[(20, 4)]);
        let s = st(5, 20, 30);
        let base = Instruction::new(bias, bias, bias, Flag::Op1Ap.mask()).unwrap();
        let ap_of = |i: Instruction| next_state_options(&i, &m, &s).unwrap().ap;
        assert_eq!(ap_of(base), Some(f().elem(20)));
        assert_eq!(ap_of(base.with_flag(Flag::ApAdd1)), Some(f().elem(21)));
        assert_eq!(ap_of(base.with_flag(Flag::ApAdd)), Some(f().elem(24)));
        assert_eq!(ap_of(base.with_flag(Flag::ApAdd).with_flag(Flag::ApAdd1)), None);
        assert_eq!(ap_of(base.with_flag(Flag::OpcodeCall).with_flag(Flag::ApAdd1)), None);
    }

    #[test]
    fn jnz_branches() {
        let bias = 1 << 15;
        // jmp rel [pc+1] if [ap] != 0
        let i = Instruction::new(bias, bias, bias + 1, Flag::Op1Imm.mask() | Flag::PcJnz.mask()).unwrap();
        let taken = mem(&[(20, 1), (6, 9)]);
        let not_taken = mem(&[(20, 0), (6, 9)]);
        let s = st(5, 20, 20);
        assert_eq!(next_state_options(&i, &taken, &s).unwrap().pc, Some(f().elem(14)));
        assert_eq!(next_state_options(&i, &not_taken, &s).unwrap().pc, Some(f().elem(7)));
    }

    #[test]
    fn relation_checks() {
        let bias = 1 << 15;
        // [ap] = [ap]; ap++
        let i = Instruction::new(bias, bias, bias, Flag::Op1Ap.mask() | Flag::ApAdd1.mask() | Flag::OpcodeAssertEq.mask())
            .unwrap();
        let mut m = mem(&[(20, 4)]);
        m.insert(f().elem(5), i.to_felt(f())).unwrap();
        let s = st(5, 20, 20);
        assert!(next_state_relation(&m, &s, &st(6, 21, 20)));
        assert!(!next_state_relation(&m, &s, &st(6, 22, 20)));
        assert!(matches!(
            check_step(&m, &s, &st(6, 22, 20)),
            Err(StepFailure::RegisterMismatch { register: "ap", .. })
        ));
        // not an instruction at pc
        let mut bad = m.clone();
        bad.set(f().elem(5), f().elem(1 << 63));
        assert!(!next_state_relation(&bad, &s, &st(6, 21, 20)));
        // missing memory
        assert!(!next_state_relation(&m, &st(9, 20, 20), &st(10, 20, 20)));
    }

    #[test]
    fn undefined_components_agree_with_anything() {
        let bias = 1 << 15;
        let i = Instruction::new(bias, bias, bias, Flag::Op1Ap.mask() | Flag::OpcodeCall.mask() | Flag::OpcodeRet.mask())
            .unwrap();
        let mut m = mem(&[(20, 4)]);
        m.insert(f().elem(5), i.to_felt(f())).unwrap();
        let s = st(5, 20, 20);
        assert!(next_state_relation(&m, &s, &st(6, 1234, 999)));
    }
}
