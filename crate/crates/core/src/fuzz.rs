//! Single-cell mutation campaigns against a proof, classified by
//! [`soundness_check`].

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::VerifyError;
use crate::extract::{soundness_check, SoundnessOutcome};
use crate::field::Felt;
use crate::interaction::{committed_bytes, ChallengeOracle, Challenges};
use crate::prove::interact;
use crate::trace::{ColumnSet, CpuCol, PublicStatement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    /// A committed column cell; challenges and products are recomputed.
    Committed,
    /// A product cell or a challenge; nothing is recomputed.
    Interaction,
}

/// A mutable location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Cpu(CpuCol, usize),
    MemA(usize),
    MemV(usize),
    MemASorted(usize),
    MemVSorted(usize),
    RcPool(usize),
    RcSorted(usize),
    MemProd(usize),
    RcProd(usize),
    Alpha,
    ZMem,
    ZRc,
    PublicMemoryProd,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Cpu(c, r) => write!(f, "cpu.{}[{r}]", c.name()),
            Target::MemA(r) => write!(f, "memory.a[{r}]"),
            Target::MemV(r) => write!(f, "memory.v[{r}]"),
            Target::MemASorted(r) => write!(f, "memory.a_sorted[{r}]"),
            Target::MemVSorted(r) => write!(f, "memory.v_sorted[{r}]"),
            Target::RcPool(r) => write!(f, "range_check.pool[{r}]"),
            Target::RcSorted(r) => write!(f, "range_check.sorted[{r}]"),
            Target::MemProd(r) => write!(f, "memory.prod[{r}]"),
            Target::RcProd(r) => write!(f, "range_check.prod[{r}]"),
            Target::Alpha => write!(f, "statement.alpha"),
            Target::ZMem => write!(f, "statement.z_mem"),
            Target::ZRc => write!(f, "statement.z_rc"),
            Target::PublicMemoryProd => write!(f, "statement.public_memory_prod"),
        }
    }
}

fn cell<'a>(stmt: &'a mut PublicStatement, cols: &'a mut ColumnSet, t: Target) -> &'a mut Felt {
    match t {
        Target::Cpu(c, r) => &mut cols.cpu.column_mut(c)[r],
        Target::MemA(r) => &mut cols.memory.a[r],
        Target::MemV(r) => &mut cols.memory.v[r],
        Target::MemASorted(r) => &mut cols.memory.a_sorted[r],
        Target::MemVSorted(r) => &mut cols.memory.v_sorted[r],
        Target::RcPool(r) => &mut cols.range_check.pool[r],
        Target::RcSorted(r) => &mut cols.range_check.sorted[r],
        Target::MemProd(r) => &mut cols.memory.prod[r],
        Target::RcProd(r) => &mut cols.range_check.prod[r],
        Target::Alpha => &mut stmt.alpha,
        Target::ZMem => &mut stmt.z_mem,
        Target::ZRc => &mut stmt.z_rc,
        Target::PublicMemoryProd => &mut stmt.public_memory_prod,
    }
}

fn pick_target(rng: &mut ChaCha8Rng, cols: &ColumnSet, kind: MutationKind) -> Target {
    let rows = cols.cpu.rows();
    let m = cols.memory.len();
    let r = cols.range_check.len();
    match kind {
        MutationKind::Committed => {
            let cpu = CpuCol::COUNT * rows;
            let total = cpu + 4 * m + 2 * r;
            let mut k = rng.gen_range(0..total);
            if k < cpu {
                return Target::Cpu(CpuCol::all().nth(k / rows).expect("in range"), k % rows);
            }
            k -= cpu;
            if k < 4 * m {
                let row = k % m;
                return [Target::MemA(row), Target::MemV(row), Target::MemASorted(row), Target::MemVSorted(row)][k / m];
            }
            k -= 4 * m;
            if k < r {
                Target::RcPool(k)
            } else {
                Target::RcSorted(k - r)
            }
        }
        MutationKind::Interaction => {
            let k = rng.gen_range(0..m + r + 4);
            if k < m {
                Target::MemProd(k)
            } else if k < m + r {
                Target::RcProd(k - m)
            } else {
                [Target::Alpha, Target::ZMem, Target::ZRc, Target::PublicMemoryProd][k - m - r]
            }
        }
    }
}

/// A replacement value different from `old`: a neighbour, a small value, a
/// value copied from elsewhere in the same column, or a random element.
fn pick_value(rng: &mut ChaCha8Rng, old: Felt, peers: &[Felt]) -> Felt {
    let f = old.field();
    loop {
        let v = match rng.gen_range(0..5) {
            0 => old + f.one(),
            1 => old - f.one(),
            2 => f.elem(rng.gen_range(0..1u64 << 17)),
            3 if !peers.is_empty() => peers[rng.gen_range(0..peers.len())],
            _ => {
                let mut bytes = [0u8; 40];
                rng.fill(&mut bytes[..]);
                f.from_biguint(&num_bigint::BigUint::from_bytes_le(&bytes))
            }
        };
        if v != old {
            return v;
        }
    }
}

fn peers<'a>(cols: &'a ColumnSet, t: Target) -> &'a [Felt] {
    match t {
        Target::Cpu(c, _) => cols.cpu.column(c),
        Target::MemA(_) => &cols.memory.a,
        Target::MemV(_) => &cols.memory.v,
        Target::MemASorted(_) => &cols.memory.a_sorted,
        Target::MemVSorted(_) => &cols.memory.v_sorted,
        Target::RcPool(_) => &cols.range_check.pool,
        Target::RcSorted(_) => &cols.range_check.sorted,
        Target::MemProd(_) => &cols.memory.prod,
        Target::RcProd(_) => &cols.range_check.prod,
        _ => &[],
    }
}

/// One mutation that produced a semantic failure (or could not be evaluated).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FuzzCase {
    pub iteration: u64,
    pub target: String,
    pub old: Felt,
    pub new: Felt,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FuzzStats {
    pub iterations: u64,
    pub caught: u64,
    pub witness_valid: u64,
    pub semantic_failure: u64,
    /// Mutations after which a challenge hit a committed value, so products
    /// could not be formed. Counted separately from the three outcomes.
    pub degenerate: u64,
    pub caught_by: BTreeMap<String, u64>,
    pub failures: Vec<FuzzCase>,
}

impl FuzzStats {
    pub fn merge(mut self, other: FuzzStats) -> FuzzStats {
        self.iterations += other.iterations;
        self.caught += other.caught;
        self.witness_valid += other.witness_valid;
        self.semantic_failure += other.semantic_failure;
        self.degenerate += other.degenerate;
        for (k, n) in other.caught_by {
            *self.caught_by.entry(k).or_default() += n;
        }
        self.failures.extend(other.failures);
        self.failures.sort_by_key(|c| c.iteration);
        self
    }
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub seed: u64,
    pub iterations: u64,
    pub kind: MutationKind,
}

fn one(
    stmt: &PublicStatement,
    cols: &ColumnSet,
    oracle: &dyn ChallengeOracle,
    cfg: &FuzzConfig,
    iteration: u64,
) -> Result<FuzzStats, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(iteration);
    let target = pick_target(&mut rng, cols, cfg.kind);
    let mut stmt = stmt.clone();
    let mut cols = cols.clone();
    let old = *cell(&mut stmt, &mut cols, target);
    let new = pick_value(&mut rng, old, peers(&cols, target));
    *cell(&mut stmt, &mut cols, target) = new;

    let mut stats = FuzzStats { iterations: 1, ..FuzzStats::default() };
    let case = |detail: String| FuzzCase { iteration, target: target.to_string(), old, new, detail };
    match cfg.kind {
        MutationKind::Committed => {
            if let Err(e) = interact(&mut stmt, &mut cols, oracle) {
                stats.degenerate = 1;
                stats.failures.push(case(e.to_string()));
                return Ok(stats);
            }
        }
        MutationKind::Interaction => {
            let derived = oracle.derive(stmt.field, &committed_bytes(&stmt, &cols));
            if derived != (Challenges { alpha: stmt.alpha, z_mem: stmt.z_mem, z_rc: stmt.z_rc }) {
                stats.caught = 1;
                stats.caught_by.insert("challenge_mismatch".into(), 1);
                return Ok(stats);
            }
        }
    }
    match soundness_check(&stmt, &cols)? {
        SoundnessOutcome::Violations(r) => {
            let v = &r.violations[0];
            stats.caught = 1;
            stats.caught_by.insert(format!("{}.{}", v.group.name(), v.name), 1);
        }
        SoundnessOutcome::Witness(_) => stats.witness_valid = 1,
        SoundnessOutcome::SemanticFailure(e) => {
            stats.semantic_failure = 1;
            stats.failures.push(case(e.to_string()));
        }
    }
    Ok(stats)
}

/// Runs the campaign in parallel. Each iteration draws from its own stream of
/// the seeded generator, so results do not depend on scheduling.
pub fn fuzz(
    stmt: &PublicStatement,
    cols: &ColumnSet,
    oracle: &dyn ChallengeOracle,
    cfg: &FuzzConfig,
) -> Result<FuzzStats, VerifyError> {
    crate::constraints::check_format(stmt, cols)?;
    (0..cfg.iterations)
        .into_par_iter()
        .map(|i| one(stmt, cols, oracle, cfg, i))
        .try_reduce(FuzzStats::default, |a, b| Ok(a.merge(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::field::FieldConfig;
    use crate::interaction::Sha256Oracle;
    use crate::prove::prove_program;

    fn proof() -> crate::prove::Proof {
        let p = corpus::countdown(FieldConfig::goldilocks(), 3).unwrap();
        prove_program(&p, None, &Sha256Oracle).unwrap().1
    }

    #[test]
    fn zero_iterations_is_empty() {
        let pr = proof();
        let cfg = FuzzConfig { seed: 1, iterations: 0, kind: MutationKind::Committed };
        assert_eq!(fuzz(&pr.statement, &pr.columns, &Sha256Oracle, &cfg).unwrap(), FuzzStats::default());
    }

    #[test]
    fn same_seed_same_stats() {
        let pr = proof();
        let cfg = FuzzConfig { seed: 7, iterations: 40, kind: MutationKind::Committed };
        let a = fuzz(&pr.statement, &pr.columns, &Sha256Oracle, &cfg).unwrap();
        let b = fuzz(&pr.statement, &pr.columns, &Sha256Oracle, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iterations, 40);
        assert_eq!(a.caught + a.witness_valid + a.semantic_failure + a.degenerate, 40);
    }

    #[test]
    fn product_cell_mutation_is_caught_by_recurrence() {
        let pr = proof();
        let mut stmt = pr.statement.clone();
        let mut cols = pr.columns.clone();
        let one = stmt.field.one();
        *cell(&mut stmt, &mut cols, Target::MemProd(3)) += one;
        match soundness_check(&stmt, &cols).unwrap() {
            SoundnessOutcome::Violations(r) => assert!(r.contains(crate::constraints::Group::Memory, "perm_step")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interaction_campaign_catches_everything() {
        let pr = proof();
        let cfg = FuzzConfig { seed: 3, iterations: 60, kind: MutationKind::Interaction };
        let s = fuzz(&pr.statement, &pr.columns, &Sha256Oracle, &cfg).unwrap();
        assert_eq!(s.caught, 60);
    }
}
