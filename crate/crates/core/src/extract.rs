//! Reconstructing memory and the register trace from satisfying columns, and
//! re-checking them against the machine semantics.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::constraints::{verify_with, VerifyError, VerifyOptions, ViolationReport};
use crate::field::{Felt, Field};
use crate::isa::semantics::{check_step, Memory, RegisterState, StepFailure};
use crate::trace::{ColumnSet, CpuCol, ExecutionColumns, PublicStatement, RC_BOUND};

/// A total memory function: the listed cells, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedMemory {
    field: Field,
    cells: BTreeMap<Felt, Felt>,
}

impl ExtractedMemory {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn at(&self, addr: Felt) -> Felt {
        self.cells.get(&addr).copied().unwrap_or(self.field.zero())
    }

    /// The cells with an explicit entry.
    pub fn support(&self) -> &BTreeMap<Felt, Felt> {
        &self.cells
    }
}

impl Memory for ExtractedMemory {
    fn get(&self, addr: Felt) -> Option<Felt> {
        Some(self.at(addr))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("address {addr} is paired with both {first} and {second}")]
    Conflict { addr: Felt, first: Felt, second: Felt },
    #[error("{0}")]
    Shape(String),
}

/// First-occurrence lookup over the sorted pairs, refusing conflicting values.
pub fn extract_memory(field: Field, a_sorted: &[Felt], v_sorted: &[Felt]) -> Result<ExtractedMemory, ExtractError> {
    if a_sorted.len() != v_sorted.len() {
        return Err(ExtractError::Shape("sorted address and value columns differ in length".into()));
    }
    let mut cells = BTreeMap::new();
    for (&a, &v) in a_sorted.iter().zip(v_sorted) {
        match cells.get(&a) {
            Some(&first) if first != v => return Err(ExtractError::Conflict { addr: a, first, second: v }),
            Some(_) => {}
            None => {
                cells.insert(a, v);
            }
        }
    }
    Ok(ExtractedMemory { field, cells })
}

pub fn check_fn_extends(memory: &ExtractedMemory, m_star: &BTreeMap<Felt, Felt>) -> bool {
    m_star.iter().all(|(&a, &v)| memory.at(a) == v)
}

/// `(pc, ap, fp)` of every row.
pub fn extract_register_trace(cols: &ExecutionColumns, trace_length: u64) -> Result<Vec<RegisterState>, ExtractError> {
    let rows = cols.rows() as u64;
    if trace_length != 16 * rows {
        return Err(ExtractError::Shape(format!("trace_length {trace_length} does not match {rows} cpu rows")));
    }
    Ok((0..cols.rows()).map(|i| cols.state(i)).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedWitness {
    pub memory: ExtractedMemory,
    pub exec: Vec<RegisterState>,
}

/// Why satisfying columns failed to yield a valid execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemanticFailure {
    Extraction(ExtractError),
    NotExtended { addr: Felt, expected: Felt, actual: Felt },
    Boundary { equation: &'static str },
    /// An unsorted memory pair disagrees with the extracted memory.
    AccessMismatch { row: usize, addr: Felt, column: Felt, memory: Felt },
    OffsetRange { step: usize, col: CpuCol, value: Felt },
    Step { step: usize, cause: StepFailure },
}

impl fmt::Display for SemanticFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticFailure::Extraction(e) => write!(f, "memory extraction failed: {e}"),
            SemanticFailure::NotExtended { addr, expected, actual } => {
                write!(f, "memory at {addr} is {actual}, public memory says {expected}")
            }
            SemanticFailure::Boundary { equation } => write!(f, "boundary equation {equation} fails"),
            SemanticFailure::AccessMismatch { row, addr, column, memory } => {
                write!(f, "memory row {row}: pair ({addr}, {column}) but memory holds {memory}")
            }
            SemanticFailure::OffsetRange { step, col, value } => {
                write!(f, "step {step}: {col:?} = {value} is not a 16-bit value")
            }
            SemanticFailure::Step { step, cause } => write!(f, "step {step}: {cause}"),
        }
    }
}

impl SemanticFailure {
    pub fn kind(&self) -> &'static str {
        match self {
            SemanticFailure::Extraction(_) => "extraction",
            SemanticFailure::NotExtended { .. } => "fn_extends",
            SemanticFailure::Boundary { .. } => "boundary",
            SemanticFailure::AccessMismatch { .. } => "access_consistency",
            SemanticFailure::OffsetRange { .. } => "offset_range",
            SemanticFailure::Step { .. } => "next_state",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SoundnessOutcome {
    Violations(ViolationReport),
    Witness(ExtractedWitness),
    SemanticFailure(SemanticFailure),
}

/// Re-validates satisfying columns against the machine semantics.
pub fn validate_witness(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ExtractedWitness, SemanticFailure> {
    let field = stmt.field;
    let m = &cols.memory;
    let memory = extract_memory(field, &m.a_sorted, &m.v_sorted).map_err(SemanticFailure::Extraction)?;
    for (&addr, &expected) in &stmt.m_star {
        let actual = memory.at(addr);
        if actual != expected {
            return Err(SemanticFailure::NotExtended { addr, expected, actual });
        }
    }
    let exec = extract_register_trace(&cols.cpu, stmt.trace_length)
        .map_err(SemanticFailure::Extraction)?;
    let (first, last) = (exec[0], exec[exec.len() - 1]);
    for (equation, ok) in [
        ("initial_pc", first.pc == stmt.initial_pc),
        ("initial_ap", first.ap == stmt.initial_ap),
        ("initial_fp", first.fp == stmt.initial_ap),
        ("final_pc", last.pc == stmt.final_pc),
        ("final_ap", last.ap == stmt.final_ap),
    ] {
        if !ok {
            return Err(SemanticFailure::Boundary { equation });
        }
    }
    let placeholders = 4 * exec.len()..4 * exec.len() + stmt.m_star.len();
    for (row, (&addr, &column)) in m.a.iter().zip(&m.v).enumerate() {
        if placeholders.contains(&row) {
            continue;
        }
        let held = memory.at(addr);
        if held != column {
            return Err(SemanticFailure::AccessMismatch { row, addr, column, memory: held });
        }
    }
    for step in 0..exec.len() {
        for col in CpuCol::OFFSETS {
            let value = cols.cpu.get(col, step);
            if !value.to_u64().is_some_and(|x| x < RC_BOUND) {
                return Err(SemanticFailure::OffsetRange { step, col, value });
            }
        }
    }
    let failure = (0..exec.len().saturating_sub(1))
        .into_par_iter()
        .find_map_first(|i| check_step(&memory, &exec[i], &exec[i + 1]).err().map(|cause| (i, cause)));
    if let Some((step, cause)) = failure {
        return Err(SemanticFailure::Step { step, cause });
    }
    Ok(ExtractedWitness { memory, exec })
}

/// Constraints first; if they all hold, extract and re-validate.
pub fn soundness_check_with(
    stmt: &PublicStatement,
    cols: &ColumnSet,
    opts: &VerifyOptions,
) -> Result<SoundnessOutcome, VerifyError> {
    let report = verify_with(stmt, cols, opts)?;
    if !report.is_empty() {
        return Ok(SoundnessOutcome::Violations(report));
    }
    Ok(match validate_witness(stmt, cols) {
        Ok(w) => SoundnessOutcome::Witness(w),
        Err(e) => SoundnessOutcome::SemanticFailure(e),
    })
}

pub fn soundness_check(stmt: &PublicStatement, cols: &ColumnSet) -> Result<SoundnessOutcome, VerifyError> {
    soundness_check_with(stmt, cols, &VerifyOptions { fail_fast: true, ..VerifyOptions::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;

    #[test]
    fn empty_segment_is_zero_function() {
        let f = FieldConfig::goldilocks();
        let m = extract_memory(f, &[], &[]).unwrap();
        assert!(m.at(f.elem(5)).is_zero());
        assert!(check_fn_extends(&m, &BTreeMap::new()));
    }

    #[test]
    fn first_occurrence_lookup() {
        let f = FieldConfig::goldilocks();
        let e = |xs: &[u64]| xs.iter().map(|&x| f.elem(x)).collect::<Vec<_>>();
        let m = extract_memory(f, &e(&[5, 5, 6]), &e(&[9, 9, 4])).unwrap();
        assert_eq!((m.at(f.elem(5)), m.at(f.elem(6)), m.at(f.elem(7))), (f.elem(9), f.elem(4), f.zero()));
        let star: BTreeMap<Felt, Felt> = [(f.elem(5), f.elem(9))].into_iter().collect();
        assert!(check_fn_extends(&m, &star));
        let bad: BTreeMap<Felt, Felt> = [(f.elem(5), f.elem(8))].into_iter().collect();
        assert!(!check_fn_extends(&m, &bad));
        assert!(matches!(extract_memory(f, &e(&[5, 5]), &e(&[9, 8])), Err(ExtractError::Conflict { .. })));
    }
}
