//! The prover pipeline: columns, commitment, challenges, products.

use std::collections::BTreeMap;

use crate::constraints::{verify_with, ViolationReport, VerifyError, VerifyOptions};
use crate::field::Felt;
use crate::interaction::{committed_bytes, ChallengeOracle, Challenges, TRANSCRIPT_VERSION};
use crate::isa::exec::ExecError;
use crate::isa::semantics::{Memory, RegisterState};
use crate::program::Program;
use crate::trace::memory::{memory_products, sort_memory};
use crate::trace::range_check::{build_rc_pool, rc_products};
use crate::trace::{
    build_execution_columns, collect_memory_accesses, public_memory_product, ColumnSet, MemorySegment,
    PublicStatement, RcSegment, TraceError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub version: String,
    pub commitment: [u8; 32],
    pub challenges: Challenges,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub statement: PublicStatement,
    pub columns: ColumnSet,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProveError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("trace has {0} states; the prover needs a power of two")]
    TraceLength(usize),
    #[error("the field must have characteristic above 2^63 to host instructions")]
    FieldTooSmall,
}

/// Builds every column for a padded trace and derives the challenges from
/// the committed part.
pub fn prove_trace<M: Memory + ?Sized>(
    mem: &M,
    trace: &[RegisterState],
    m_star: &BTreeMap<Felt, Felt>,
    oracle: &dyn ChallengeOracle,
) -> Result<Proof, ProveError> {
    if !trace.len().is_power_of_two() {
        return Err(ProveError::TraceLength(trace.len()));
    }
    let cpu = build_execution_columns(trace, mem)?;
    let field = cpu.field();
    if !field.hosts_instructions() {
        return Err(ProveError::FieldTooSmall);
    }
    let (a, v) = collect_memory_accesses(&cpu, mem, m_star)?;
    let public_pairs: Vec<(Felt, Felt)> = m_star.iter().map(|(&k, &x)| (k, x)).collect();
    let (a_sorted, v_sorted) = sort_memory(&a, &v, &public_pairs)?;
    let (pool, sorted, rc_min, rc_max) = build_rc_pool(&cpu)?;
    let first = trace[0];
    let last = trace[trace.len() - 1];
    let zero = field.zero();
    let mut statement = PublicStatement {
        field,
        trace_length: 16 * trace.len() as u64,
        initial_pc: first.pc,
        initial_ap: first.ap,
        final_pc: last.pc,
        final_ap: last.ap,
        m_star: m_star.clone(),
        rc_min,
        rc_max,
        alpha: zero,
        z_mem: zero,
        z_rc: zero,
        public_memory_prod: zero,
    };
    let mut columns = ColumnSet {
        cpu,
        memory: MemorySegment { prod: vec![zero; a.len()], a, v, a_sorted, v_sorted },
        range_check: RcSegment { prod: vec![zero; pool.len()], pool, sorted, rc_min, rc_max },
    };
    let transcript = interact(&mut statement, &mut columns, oracle)?;
    Ok(Proof { statement, columns, transcript })
}

/// Re-derives the challenges from the committed data and recomputes every
/// product column and the public-memory product to match them.
pub fn interact(
    stmt: &mut PublicStatement,
    cols: &mut ColumnSet,
    oracle: &dyn ChallengeOracle,
) -> Result<Transcript, TraceError> {
    let bytes = committed_bytes(stmt, cols);
    let challenges = oracle.derive(stmt.field, &bytes);
    if challenges.z_mem.is_zero() {
        return Err(TraceError::DegenerateChallenge("z_mem"));
    }
    let m = &mut cols.memory;
    m.prod = memory_products(&m.a, &m.v, &m.a_sorted, &m.v_sorted, challenges.alpha, challenges.z_mem)?;
    let r = &mut cols.range_check;
    r.prod = rc_products(&r.pool, &r.sorted, challenges.z_rc)?;
    stmt.alpha = challenges.alpha;
    stmt.z_mem = challenges.z_mem;
    stmt.z_rc = challenges.z_rc;
    stmt.public_memory_prod = public_memory_product(&stmt.m_star, challenges.alpha, challenges.z_mem);
    Ok(Transcript { version: TRANSCRIPT_VERSION.into(), commitment: oracle.commitment(&bytes), challenges })
}

/// Runs the program (until its final self-jump unless `steps` is given),
/// pads the trace and proves it.
pub fn prove_program(
    program: &Program,
    steps: Option<usize>,
    oracle: &dyn ChallengeOracle,
) -> Result<(Vec<RegisterState>, Proof), ProveError> {
    if !program.field().hosts_instructions() {
        return Err(ProveError::FieldTooSmall);
    }
    let trace = program.run_padded(steps)?;
    let proof = prove_trace(&program.memory, &trace, &program.m_star, oracle)?;
    Ok((trace, proof))
}

/// Challenges re-derived from the committed data.
pub fn rederive(stmt: &PublicStatement, cols: &ColumnSet, oracle: &dyn ChallengeOracle) -> Challenges {
    oracle.derive(stmt.field, &committed_bytes(stmt, cols))
}

pub fn claimed(stmt: &PublicStatement) -> Challenges {
    Challenges { alpha: stmt.alpha, z_mem: stmt.z_mem, z_rc: stmt.z_rc }
}

/// Verifier outcome: the constraint report, evaluated with re-derived
/// challenges, and any disagreement with the challenges the statement claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub challenge_mismatch: Option<(Challenges, Challenges)>,
    pub report: ViolationReport,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.challenge_mismatch.is_none() && self.report.is_empty()
    }
}

pub fn verify_proof(
    stmt: &PublicStatement,
    cols: &ColumnSet,
    oracle: &dyn ChallengeOracle,
) -> Result<Verdict, VerifyError> {
    verify_proof_with(stmt, cols, oracle, &VerifyOptions::default())
}

pub fn verify_proof_with(
    stmt: &PublicStatement,
    cols: &ColumnSet,
    oracle: &dyn ChallengeOracle,
    opts: &VerifyOptions,
) -> Result<Verdict, VerifyError> {
    crate::constraints::check_format(stmt, cols)?;
    let derived = rederive(stmt, cols, oracle);
    let claimed = claimed(stmt);
    let mut rederived = stmt.clone();
    rederived.alpha = derived.alpha;
    rederived.z_mem = derived.z_mem;
    rederived.z_rc = derived.z_rc;
    let report = verify_with(&rederived, cols, opts)?;
    Ok(Verdict { challenge_mismatch: (derived != claimed).then_some((claimed, derived)), report })
}
