use std::fmt;

use crate::field::{Felt, Field};

use super::IsaError;

pub const NUM_FLAGS: usize = 15;
pub const OFFSET_BIAS: u16 = 1 << 15;
/// Instruction words are integers below `2^63`.
pub const WORD_BOUND: u64 = 1 << 63;

/// Positions of the 15 instruction flags inside the flag word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Flag {
    DstReg = 0,
    Op0Reg = 1,
    Op1Imm = 2,
    Op1Fp = 3,
    Op1Ap = 4,
    ResAdd = 5,
    ResMul = 6,
    PcJumpAbs = 7,
    PcJumpRel = 8,
    PcJnz = 9,
    ApAdd = 10,
    ApAdd1 = 11,
    OpcodeCall = 12,
    OpcodeRet = 13,
    OpcodeAssertEq = 14,
}

impl Flag {
    pub const ALL: [Flag; NUM_FLAGS] = [
        Flag::DstReg,
        Flag::Op0Reg,
        Flag::Op1Imm,
        Flag::Op1Fp,
        Flag::Op1Ap,
        Flag::ResAdd,
        Flag::ResMul,
        Flag::PcJumpAbs,
        Flag::PcJumpRel,
        Flag::PcJnz,
        Flag::ApAdd,
        Flag::ApAdd1,
        Flag::OpcodeCall,
        Flag::OpcodeRet,
        Flag::OpcodeAssertEq,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn mask(self) -> u16 {
        1 << (self as u16)
    }

    pub fn name(self) -> &'static str {
        match self {
            Flag::DstReg => "dst_reg",
            Flag::Op0Reg => "op0_reg",
            Flag::Op1Imm => "op1_imm",
            Flag::Op1Fp => "op1_fp",
            Flag::Op1Ap => "op1_ap",
            Flag::ResAdd => "res_add",
            Flag::ResMul => "res_mul",
            Flag::PcJumpAbs => "pc_jump_abs",
            Flag::PcJumpRel => "pc_jump_rel",
            Flag::PcJnz => "pc_jnz",
            Flag::ApAdd => "ap_add",
            Flag::ApAdd1 => "ap_add1",
            Flag::OpcodeCall => "opcode_call",
            Flag::OpcodeRet => "opcode_ret",
            Flag::OpcodeAssertEq => "opcode_assert_eq",
        }
    }
}

/// A machine instruction: three biased 16-bit offsets and a 15-bit flag word.
///
/// Offsets are stored biased, i.e. `off + 2^15`, so the signed range
/// `[-2^15, 2^15)` maps onto `[0, 2^16)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub off_dst: u16,
    pub off_op0: u16,
    pub off_op1: u16,
    flags: u16,
}

impl Instruction {
    pub fn new(off_dst: u16, off_op0: u16, off_op1: u16, flags: u16) -> Result<Self, IsaError> {
        if flags >> NUM_FLAGS != 0 {
            return Err(IsaError::FlagsOutOfRange(flags));
        }
        Ok(Instruction { off_dst, off_op0, off_op1, flags })
    }

    pub fn flags(&self) -> u16 {
        self.flags
    }

    pub fn flag(&self, f: Flag) -> bool {
        self.flags & f.mask() != 0
    }

    pub fn with_flag(mut self, f: Flag) -> Self {
        self.flags |= f.mask();
        self
    }

    pub fn without_flag(mut self, f: Flag) -> Self {
        self.flags &= !f.mask();
        self
    }

    pub fn dst_offset(&self) -> i64 {
        self.off_dst as i64 - OFFSET_BIAS as i64
    }

    pub fn op0_offset(&self) -> i64 {
        self.off_op0 as i64 - OFFSET_BIAS as i64
    }

    pub fn op1_offset(&self) -> i64 {
        self.off_op1 as i64 - OFFSET_BIAS as i64
    }

    /// `off_dst + 2^16 off_op0 + 2^32 off_op1 + 2^48 flags`.
    pub fn encode(&self) -> u64 {
        self.off_dst as u64
            | (self.off_op0 as u64) << 16
            | (self.off_op1 as u64) << 32
            | (self.flags as u64) << 48
    }

    pub fn decode(word: u64) -> Result<Self, IsaError> {
        if word >= WORD_BOUND {
            return Err(IsaError::NotAnInstruction(word.to_string()));
        }
        Ok(Instruction {
            off_dst: word as u16,
            off_op0: (word >> 16) as u16,
            off_op1: (word >> 32) as u16,
            flags: (word >> 48) as u16,
        })
    }

    /// Decodes a memory cell; the canonical value must be below `2^63`.
    pub fn from_felt(x: Felt) -> Result<Self, IsaError> {
        match x.to_u64() {
            Some(w) => Self::decode(w),
            None => Err(IsaError::NotAnInstruction(x.to_string())),
        }
    }

    pub fn to_felt(&self, field: Field) -> Felt {
        field.elem(self.encode())
    }

    /// Number of memory cells occupied: 2 with an immediate, else 1.
    pub fn size(&self) -> u64 {
        if self.flag(Flag::Op1Imm) {
            2
        } else {
            1
        }
    }
}

impl fmt::Debug for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = Flag::ALL.iter().filter(|&&fl| self.flag(fl)).map(|fl| fl.name()).collect();
        write!(
            f,
            "Instruction(dst {:+}, op0 {:+}, op1 {:+}, [{}])",
            self.dst_offset(),
            self.op0_offset(),
            self.op1_offset(),
            names.join(", ")
        )
    }
}

/// Telescoped flag sums: `f~_i = sum_{j >= i} 2^(j - i) f_j`, with `f~_15 = 0`.
pub fn tilde_from_flags(field: Field, flags: u16) -> [Felt; NUM_FLAGS + 1] {
    debug_assert!(flags >> NUM_FLAGS == 0);
    std::array::from_fn(|i| field.elem((flags as u64) >> i))
}

/// Recovers the flag values `f_i = f~_i - 2 f~_(i+1)`.
pub fn flags_from_tilde(f_tilde: &[Felt; NUM_FLAGS + 1]) -> [Felt; NUM_FLAGS] {
    let two = f_tilde[0].field().elem(2);
    std::array::from_fn(|i| f_tilde[i] - two * f_tilde[i + 1])
}
