//! Verifier side: the constraint registry and its evaluation over a column set.

pub mod eval;
pub mod expr;
pub mod registry;

use num_bigint::BigUint;
use serde::Serialize;

use crate::field::Felt;
use crate::trace::{public_memory_product, ColumnSet, PublicStatement, RC_BOUND};

pub use expr::{Col, Expr, MemCol, PublicValue, RcCol, Table, Var};
pub use registry::{registry, Constraint, Domain, Group};

/// One failing constraint instance. `lhs` is the nonzero value of the
/// constraint expression, or the offending quantity for statement checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub group: Group,
    pub name: String,
    pub row: usize,
    pub lhs: Felt,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn merge(&mut self, other: ViolationReport) {
        self.violations.extend(other.violations);
    }

    /// Orders by `(group, name, row)`.
    pub fn sort(&mut self) {
        self.violations.sort_by(|x, y| (x.group, &x.name, x.row).cmp(&(y.group, &y.name, y.row)));
    }

    pub fn contains(&self, group: Group, name: &str) -> bool {
        self.violations.iter().any(|v| v.group == group && v.name == name)
    }

    pub fn in_group(&self, group: Group) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(move |v| v.group == group)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("malformed column set: {0}")]
    Format(String),
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub groups: Vec<Group>,
    pub statement_checks: bool,
    pub fail_fast: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { groups: Group::CONSTRAINT_GROUPS.to_vec(), statement_checks: true, fail_fast: false }
    }
}

impl VerifyOptions {
    pub fn only(groups: &[Group]) -> Self {
        VerifyOptions { groups: groups.to_vec(), ..Self::default() }
    }
}

fn publics(stmt: &PublicStatement) -> [Felt; PublicValue::COUNT] {
    let f = stmt.field;
    let mut p = [f.zero(); PublicValue::COUNT];
    p[PublicValue::Alpha.index()] = stmt.alpha;
    p[PublicValue::ZMem.index()] = stmt.z_mem;
    p[PublicValue::ZRc.index()] = stmt.z_rc;
    p[PublicValue::RcMin.index()] = f.elem(stmt.rc_min);
    p[PublicValue::RcMax.index()] = f.elem(stmt.rc_max);
    p[PublicValue::InitialPc.index()] = stmt.initial_pc;
    p[PublicValue::InitialAp.index()] = stmt.initial_ap;
    p[PublicValue::FinalPc.index()] = stmt.final_pc;
    p[PublicValue::FinalAp.index()] = stmt.final_ap;
    p[PublicValue::PublicMemoryProd.index()] = stmt.public_memory_prod;
    p[PublicValue::ZMemPowK.index()] = stmt.z_mem.pow_u64(stmt.m_star.len() as u64);
    p
}

/// Checks on the statement alone: the bounds the correctness argument
/// assumes, and the public-memory product the verifier can recompute.
pub fn check_statement(stmt: &PublicStatement) -> ViolationReport {
    let f = stmt.field;
    let mut out = Vec::new();
    let mut fail = |name: &str, lhs: Felt| {
        out.push(Violation { group: Group::PublicConstraints, name: name.into(), row: 0, lhs })
    };
    if stmt.rc_max >= RC_BOUND {
        fail("rc_max_lt", f.elem(stmt.rc_max));
    }
    if stmt.rc_min > stmt.rc_max {
        fail("rc_min_le_max", f.elem(stmt.rc_min));
    }
    if BigUint::from(stmt.trace_length) > *f.modulus() {
        fail("trace_length_le_char", f.elem(stmt.trace_length));
    }
    if stmt.steps_plus_one().is_none() {
        fail("trace_length_shape", f.elem(stmt.trace_length));
    }
    if stmt.z_mem.is_zero() {
        fail("z_mem_nonzero", stmt.z_mem);
    }
    let expect = public_memory_product(&stmt.m_star, stmt.alpha, stmt.z_mem);
    if expect != stmt.public_memory_prod {
        fail("public_memory_prod", stmt.public_memory_prod - expect);
    }
    ViolationReport { violations: out }
}

/// Structural checks that must pass before any constraint is evaluated.
pub fn check_format(stmt: &PublicStatement, cols: &ColumnSet) -> Result<(), VerifyError> {
    let fmt = |s: String| VerifyError::Format(s);
    cols.memory.check_shape().map_err(|e| fmt(e.to_string()))?;
    cols.range_check.check_shape().map_err(|e| fmt(e.to_string()))?;
    let f = stmt.field;
    if cols.cpu.field() != f {
        return Err(fmt("columns and statement use different fields".into()));
    }
    let t1 = cols.cpu.rows();
    if let Some(n) = stmt.steps_plus_one() {
        if n != t1 {
            return Err(fmt(format!("trace_length {} implies {n} cpu rows, found {t1}", stmt.trace_length)));
        }
    }
    let need = 4 * t1 + stmt.m_star.len();
    if cols.memory.len() < need {
        return Err(fmt(format!("memory segment has {} rows, needs at least {need}", cols.memory.len())));
    }
    if cols.range_check.len() < 3 * t1 {
        return Err(fmt(format!("range-check pool has {} rows, needs at least {}", cols.range_check.len(), 3 * t1)));
    }
    let m = &cols.memory;
    let r = &cols.range_check;
    let stmt_felts = [stmt.initial_pc, stmt.initial_ap, stmt.final_pc, stmt.final_ap, stmt.alpha, stmt.z_mem, stmt.z_rc]
        .into_iter()
        .chain([stmt.public_memory_prod])
        .chain(stmt.m_star.iter().flat_map(|(&a, &v)| [a, v]));
    let all_same = crate::trace::CpuCol::all()
        .flat_map(|c| cols.cpu.column(c).iter().copied())
        .chain([&m.a, &m.v, &m.a_sorted, &m.v_sorted, &m.prod, &r.pool, &r.sorted, &r.prod].into_iter().flatten().copied())
        .chain(stmt_felts)
        .all(|x| x.field() == f);
    if !all_same {
        return Err(fmt("a value belongs to a different field than the statement".into()));
    }
    Ok(())
}

/// Evaluates the selected groups and statement checks.
pub fn verify_with(stmt: &PublicStatement, cols: &ColumnSet, opts: &VerifyOptions) -> Result<ViolationReport, VerifyError> {
    check_format(stmt, cols)?;
    let mut report = if opts.statement_checks { check_statement(stmt) } else { ViolationReport::default() };
    if opts.fail_fast && !report.is_empty() {
        report.violations.truncate(1);
        return Ok(report);
    }
    let pubs = publics(stmt);
    let k = stmt.m_star.len();
    for c in registry().iter().filter(|c| opts.groups.contains(&c.group)) {
        let mut stop = false;
        eval::eval_constraint(c, cols, &pubs, k, |row, lhs| {
            report.violations.push(Violation { group: c.group, name: c.name.clone(), row, lhs });
            stop = opts.fail_fast;
            stop
        });
        if stop {
            return Ok(report);
        }
    }
    report.sort();
    Ok(report)
}

/// All eight groups plus the statement checks.
pub fn verify_all(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    verify_with(stmt, cols, &VerifyOptions::default())
}

fn group_only(stmt: &PublicStatement, cols: &ColumnSet, g: Group) -> Result<ViolationReport, VerifyError> {
    verify_with(stmt, cols, &VerifyOptions { groups: vec![g], statement_checks: false, fail_fast: false })
}

pub fn eval_cpu_decode(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::CpuDecode)
}

pub fn eval_cpu_operands(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::CpuOperands)
}

pub fn eval_cpu_update_registers(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::CpuUpdateRegisters)
}

pub fn eval_cpu_opcodes(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::CpuOpcodes)
}

pub fn eval_memory(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::Memory)
}

pub fn eval_rc16(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::Rc16)
}

pub fn eval_public_memory(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::PublicMemory)
}

pub fn eval_initial_and_final(stmt: &PublicStatement, cols: &ColumnSet) -> Result<ViolationReport, VerifyError> {
    group_only(stmt, cols, Group::InitialAndFinal)
}
