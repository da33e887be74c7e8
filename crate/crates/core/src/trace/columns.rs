use std::fmt;

use crate::field::{Felt, Field};
use crate::isa::instruction::{tilde_from_flags, Flag, Instruction, NUM_FLAGS};
use crate::isa::semantics::{self, Memory, RegisterState};

use super::TraceError;

/// A per-step CPU column.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CpuCol(u8);

impl CpuCol {
    pub const PC: CpuCol = CpuCol(0);
    pub const AP: CpuCol = CpuCol(1);
    pub const FP: CpuCol = CpuCol(2);
    pub const INST: CpuCol = CpuCol(3);
    pub const OFF_DST: CpuCol = CpuCol(4);
    pub const OFF_OP0: CpuCol = CpuCol(5);
    pub const OFF_OP1: CpuCol = CpuCol(6);
    // 7..=22 are f~_0..f~_15
    pub const DST_ADDR: CpuCol = CpuCol(23);
    pub const DST: CpuCol = CpuCol(24);
    pub const OP0_ADDR: CpuCol = CpuCol(25);
    pub const OP0: CpuCol = CpuCol(26);
    pub const OP1_ADDR: CpuCol = CpuCol(27);
    pub const OP1: CpuCol = CpuCol(28);
    pub const RES: CpuCol = CpuCol(29);
    /// `op0 * op1`
    pub const MUL: CpuCol = CpuCol(30);
    /// `f_jnz * dst`
    pub const T0: CpuCol = CpuCol(31);
    /// `t0 * res`
    pub const T1: CpuCol = CpuCol(32);

    pub const COUNT: usize = 33;

    pub fn f_tilde(i: usize) -> CpuCol {
        assert!(i <= NUM_FLAGS);
        CpuCol(7 + i as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl Iterator<Item = CpuCol> {
        (0..Self::COUNT as u8).map(CpuCol)
    }

    pub fn from_name(name: &str) -> Option<CpuCol> {
        Self::all().find(|c| c.name() == name)
    }

    pub fn name(self) -> String {
        const FIXED: [&str; 7] = ["pc", "ap", "fp", "inst", "off_dst", "off_op0", "off_op1"];
        const TAIL: [&str; 10] = ["dst_addr", "dst", "op0_addr", "op0", "op1_addr", "op1", "res", "mul", "t0", "t1"];
        match self.0 {
            i @ 0..=6 => FIXED[i as usize].to_string(),
            i @ 7..=22 => format!("f_tilde_{}", i - 7),
            i => TAIL[(i - 23) as usize].to_string(),
        }
    }

    /// The three biased offsets, in pool order.
    pub const OFFSETS: [CpuCol; 3] = [CpuCol::OFF_DST, CpuCol::OFF_OP0, CpuCol::OFF_OP1];

    /// The four (address, value) pairs each step contributes to memory.
    pub const ACCESSES: [(CpuCol, CpuCol); 4] = [
        (CpuCol::PC, CpuCol::INST),
        (CpuCol::DST_ADDR, CpuCol::DST),
        (CpuCol::OP0_ADDR, CpuCol::OP0),
        (CpuCol::OP1_ADDR, CpuCol::OP1),
    ];
}

impl fmt::Debug for CpuCol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// CPU columns, one row per step `0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionColumns {
    field: Field,
    cols: Vec<Vec<Felt>>,
}

impl ExecutionColumns {
    /// All-zero columns with `rows` rows.
    pub fn zeroed(field: Field, rows: usize) -> Self {
        ExecutionColumns { field, cols: vec![vec![field.zero(); rows]; CpuCol::COUNT] }
    }

    pub fn from_columns(field: Field, cols: Vec<Vec<Felt>>) -> Result<Self, TraceError> {
        if cols.len() != CpuCol::COUNT {
            return Err(TraceError::Shape(format!("expected {} cpu columns, got {}", CpuCol::COUNT, cols.len())));
        }
        let rows = cols[0].len();
        if rows == 0 || cols.iter().any(|c| c.len() != rows) {
            return Err(TraceError::Shape("cpu columns must be nonempty and of equal length".into()));
        }
        Ok(ExecutionColumns { field, cols })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// `T + 1`.
    pub fn rows(&self) -> usize {
        self.cols[0].len()
    }

    pub fn get(&self, col: CpuCol, row: usize) -> Felt {
        self.cols[col.index()][row]
    }

    pub fn set(&mut self, col: CpuCol, row: usize, v: Felt) {
        self.cols[col.index()][row] = v;
    }

    pub fn column(&self, col: CpuCol) -> &[Felt] {
        &self.cols[col.index()]
    }

    pub fn column_mut(&mut self, col: CpuCol) -> &mut [Felt] {
        &mut self.cols[col.index()]
    }

    pub fn state(&self, row: usize) -> RegisterState {
        RegisterState::new(self.get(CpuCol::PC, row), self.get(CpuCol::AP, row), self.get(CpuCol::FP, row))
    }

    /// Flag `f` at `row`, recovered from the f~ columns.
    pub fn flag(&self, f: Flag, row: usize) -> Felt {
        let i = f.index();
        let two = self.field.elem(2);
        self.get(CpuCol::f_tilde(i), row) - two * self.get(CpuCol::f_tilde(i + 1), row)
    }
}

/// Fills every CPU column for an executed trace. Columns follow the blended
/// formulas the constraints use, which coincide with the machine semantics
/// whenever the latter is defined.
pub fn build_execution_columns<M: Memory + ?Sized>(
    trace: &[RegisterState],
    mem: &M,
) -> Result<ExecutionColumns, TraceError> {
    let first = trace.first().ok_or_else(|| TraceError::Shape("empty trace".into()))?;
    let field = first.pc.field();
    let mut cols = ExecutionColumns::zeroed(field, trace.len());
    let bias = field.elem(1 << 15);
    for (row, s) in trace.iter().enumerate() {
        let word = mem.read(s.pc).map_err(|e| TraceError::Step { row, cause: e.to_string() })?;
        let i = Instruction::from_felt(word).map_err(|e| TraceError::Step { row, cause: e.to_string() })?;
        let b = |f: Flag| if i.flag(f) { field.one() } else { field.zero() };
        let read = |addr: Felt| mem.read(addr).map_err(|e| TraceError::Step { row, cause: e.to_string() });

        let dst_addr = semantics::dst_addr(&i, s);
        let op0_addr = semantics::op0_addr(&i, s);
        let dst = read(dst_addr)?;
        let op0 = read(op0_addr)?;
        let (f_imm, f_fp, f_ap) = (b(Flag::Op1Imm), b(Flag::Op1Fp), b(Flag::Op1Ap));
        let op1_addr = f_imm * s.pc + f_ap * s.ap + f_fp * s.fp + (field.one() - f_imm - f_ap - f_fp) * op0
            + field.elem(i.off_op1 as u64)
            - bias;
        let op1 = read(op1_addr)?;
        let mul = op0 * op1;
        let (f_add, f_mul, f_jnz) = (b(Flag::ResAdd), b(Flag::ResMul), b(Flag::PcJnz));
        let res = if i.flag(Flag::PcJnz) {
            if dst.is_zero() {
                field.zero()
            } else {
                dst.inverse().expect("nonzero")
            }
        } else {
            f_add * (op0 + op1) + f_mul * mul + (field.one() - f_add - f_mul) * op1
        };
        let t0 = f_jnz * dst;
        let t1 = t0 * res;

        cols.set(CpuCol::PC, row, s.pc);
        cols.set(CpuCol::AP, row, s.ap);
        cols.set(CpuCol::FP, row, s.fp);
        cols.set(CpuCol::INST, row, word);
        cols.set(CpuCol::OFF_DST, row, field.elem(i.off_dst as u64));
        cols.set(CpuCol::OFF_OP0, row, field.elem(i.off_op0 as u64));
        cols.set(CpuCol::OFF_OP1, row, field.elem(i.off_op1 as u64));
        for (k, v) in tilde_from_flags(field, i.flags()).into_iter().enumerate() {
            cols.set(CpuCol::f_tilde(k), row, v);
        }
        cols.set(CpuCol::DST_ADDR, row, dst_addr);
        cols.set(CpuCol::DST, row, dst);
        cols.set(CpuCol::OP0_ADDR, row, op0_addr);
        cols.set(CpuCol::OP0, row, op0);
        cols.set(CpuCol::OP1_ADDR, row, op1_addr);
        cols.set(CpuCol::OP1, row, op1);
        cols.set(CpuCol::RES, row, res);
        cols.set(CpuCol::MUL, row, mul);
        cols.set(CpuCol::T0, row, t0);
        cols.set(CpuCol::T1, row, t1);
    }
    Ok(cols)
}
