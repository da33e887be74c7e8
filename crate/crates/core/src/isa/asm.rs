//! Assemble-by-fields helpers. There is no textual syntax; programs are built
//! by calling one method per instruction.

use crate::field::{Felt, Field};

use super::instruction::{Flag, Instruction, OFFSET_BIAS};
use super::semantics::SparseMemory;
use super::IsaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reg {
    Ap,
    Fp,
}

/// Source of the second operand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op1 {
    /// `[[op0] + off]`
    Op0(i16),
    /// The cell after the instruction.
    Imm,
    Fp(i16),
    Ap(i16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResLogic {
    Op1,
    Add,
    Mul,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcUpdate {
    Regular,
    JumpAbs,
    JumpRel,
    Jnz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApUpdate {
    Regular,
    Add,
    Add1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Opcode {
    Nop,
    Call,
    Ret,
    AssertEq,
}

/// Field-by-field instruction construction. Unused operands default to
/// `[fp - 1]`, which keeps their addresses readable.
#[derive(Debug, Clone, Copy)]
pub struct InstructionBuilder {
    dst: (Reg, i16),
    op0: (Reg, i16),
    op1: Op1,
    res: ResLogic,
    pc: PcUpdate,
    ap: ApUpdate,
    opcode: Opcode,
}

impl Default for InstructionBuilder {
    fn default() -> Self {
        InstructionBuilder {
            dst: (Reg::Fp, -1),
            op0: (Reg::Fp, -1),
            op1: Op1::Fp(-1),
            res: ResLogic::Op1,
            pc: PcUpdate::Regular,
            ap: ApUpdate::Regular,
            opcode: Opcode::Nop,
        }
    }
}

fn bias(off: i16) -> u16 {
    (off as i32 + OFFSET_BIAS as i32) as u16
}

impl InstructionBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dst(mut self, reg: Reg, off: i16) -> Self {
        self.dst = (reg, off);
        self
    }

    pub fn op0(mut self, reg: Reg, off: i16) -> Self {
        self.op0 = (reg, off);
        self
    }

    pub fn op1(mut self, op1: Op1) -> Self {
        self.op1 = op1;
        self
    }

    pub fn res(mut self, res: ResLogic) -> Self {
        self.res = res;
        self
    }

    pub fn pc_update(mut self, pc: PcUpdate) -> Self {
        self.pc = pc;
        self
    }

    pub fn ap_update(mut self, ap: ApUpdate) -> Self {
        self.ap = ap;
        self
    }

    pub fn opcode(mut self, opcode: Opcode) -> Self {
        self.opcode = opcode;
        self
    }

    pub fn build(self) -> Instruction {
        let mut flags = 0u16;
        let mut set = |f: Flag| flags |= f.mask();
        if self.dst.0 == Reg::Fp {
            set(Flag::DstReg);
        }
        if self.op0.0 == Reg::Fp {
            set(Flag::Op0Reg);
        }
        let off_op1 = match self.op1 {
            Op1::Op0(o) => o,
            Op1::Imm => {
                set(Flag::Op1Imm);
                1
            }
            Op1::Fp(o) => {
                set(Flag::Op1Fp);
                o
            }
            Op1::Ap(o) => {
                set(Flag::Op1Ap);
                o
            }
        };
        match self.res {
            ResLogic::Op1 => {}
            ResLogic::Add => set(Flag::ResAdd),
            ResLogic::Mul => set(Flag::ResMul),
        }
        match self.pc {
            PcUpdate::Regular => {}
            PcUpdate::JumpAbs => set(Flag::PcJumpAbs),
            PcUpdate::JumpRel => set(Flag::PcJumpRel),
            PcUpdate::Jnz => set(Flag::PcJnz),
        }
        match self.ap {
            ApUpdate::Regular => {}
            ApUpdate::Add => set(Flag::ApAdd),
            ApUpdate::Add1 => set(Flag::ApAdd1),
        }
        match self.opcode {
            Opcode::Nop => {}
            Opcode::Call => set(Flag::OpcodeCall),
            Opcode::Ret => set(Flag::OpcodeRet),
            Opcode::AssertEq => set(Flag::OpcodeAssertEq),
        }
        Instruction::new(bias(self.dst.1), bias(self.op0.1), bias(off_op1), flags).expect("15 flag bits")
    }
}

/// Writes instructions (and immediates) into consecutive memory cells.
#[derive(Debug, Clone)]
pub struct Assembler {
    field: Field,
    base: u64,
    cells: Vec<Felt>,
}

impl Assembler {
    pub fn new(field: Field, base: u64) -> Self {
        Assembler { field, base, cells: Vec::new() }
    }

    /// Address of the next emitted cell.
    pub fn here(&self) -> u64 {
        self.base + self.cells.len() as u64
    }

    pub fn emit(&mut self, i: Instruction, imm: Option<Felt>) -> u64 {
        assert_eq!(i.flag(Flag::Op1Imm), imm.is_some(), "immediate presence must match op1_imm");
        let at = self.here();
        self.cells.push(i.to_felt(self.field));
        if let Some(v) = imm {
            self.cells.push(v);
        }
        at
    }

    fn imm(&self, v: i64) -> Option<Felt> {
        Some(self.field.from_i64(v))
    }

    /// `[dst] = imm`, optionally followed by `ap++`.
    pub fn assert_imm(&mut self, dst: (Reg, i16), value: i64, ap_inc: bool) -> u64 {
        let b = InstructionBuilder::new()
            .dst(dst.0, dst.1)
            .op1(Op1::Imm)
            .opcode(Opcode::AssertEq)
            .ap_update(if ap_inc { ApUpdate::Add1 } else { ApUpdate::Regular });
        let imm = self.imm(value);
        self.emit(b.build(), imm)
    }

    /// `[dst] = [op0] (+|*) op1` or `[dst] = op1`, with an optional immediate.
    pub fn assert_eq(
        &mut self,
        dst: (Reg, i16),
        op0: (Reg, i16),
        op1: Op1,
        res: ResLogic,
        imm: Option<i64>,
        ap_inc: bool,
    ) -> u64 {
        let b = InstructionBuilder::new()
            .dst(dst.0, dst.1)
            .op0(op0.0, op0.1)
            .op1(op1)
            .res(res)
            .opcode(Opcode::AssertEq)
            .ap_update(if ap_inc { ApUpdate::Add1 } else { ApUpdate::Regular });
        let imm = imm.and_then(|v| self.imm(v));
        self.emit(b.build(), imm)
    }

    /// `jmp rel imm`.
    pub fn jmp_rel(&mut self, offset: i64) -> u64 {
        let b = InstructionBuilder::new().op1(Op1::Imm).pc_update(PcUpdate::JumpRel);
        let imm = self.imm(offset);
        self.emit(b.build(), imm)
    }

    /// `jmp abs imm`.
    pub fn jmp_abs(&mut self, target: u64) -> u64 {
        let b = InstructionBuilder::new().op1(Op1::Imm).pc_update(PcUpdate::JumpAbs);
        let imm = Some(self.field.elem(target));
        self.emit(b.build(), imm)
    }

    /// `jmp rel imm if [cond] != 0`.
    pub fn jnz_rel(&mut self, cond: (Reg, i16), offset: i64) -> u64 {
        let b = InstructionBuilder::new().dst(cond.0, cond.1).op1(Op1::Imm).pc_update(PcUpdate::Jnz);
        let imm = self.imm(offset);
        self.emit(b.build(), imm)
    }

    /// `call rel imm`: saves `fp` to `[ap]` and the return pc to `[ap + 1]`.
    pub fn call_rel(&mut self, offset: i64) -> u64 {
        let b = InstructionBuilder::new()
            .dst(Reg::Ap, 0)
            .op0(Reg::Ap, 1)
            .op1(Op1::Imm)
            .pc_update(PcUpdate::JumpRel)
            .opcode(Opcode::Call);
        let imm = self.imm(offset);
        self.emit(b.build(), imm)
    }

    pub fn ret(&mut self) -> u64 {
        let b = InstructionBuilder::new()
            .dst(Reg::Fp, -2)
            .op0(Reg::Fp, -1)
            .op1(Op1::Fp(-1))
            .pc_update(PcUpdate::JumpAbs)
            .opcode(Opcode::Ret);
        self.emit(b.build(), None)
    }

    /// `ap += imm`.
    pub fn ap_add_imm(&mut self, n: i64) -> u64 {
        let b = InstructionBuilder::new().op1(Op1::Imm).ap_update(ApUpdate::Add);
        let imm = self.imm(n);
        self.emit(b.build(), imm)
    }

    /// Rewrites the immediate of the instruction at `at` (forward references).
    pub fn patch_imm(&mut self, at: u64, value: i64) {
        let idx = (at - self.base) as usize + 1;
        self.cells[idx] = self.field.from_i64(value);
    }

    /// Copies the assembled cells into `mem`.
    pub fn write_into(&self, mem: &mut SparseMemory) -> Result<(), IsaError> {
        for (k, &v) in self.cells.iter().enumerate() {
            mem.insert(self.field.elem(self.base + k as u64), v)?;
        }
        Ok(())
    }

    pub fn cells(&self) -> &[Felt] {
        &self.cells
    }
}
