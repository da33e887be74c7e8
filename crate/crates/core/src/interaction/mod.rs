//! Challenge derivation from committed columns, and the exceptional sets of
//! challenges for which a product comparison can be fooled.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::field::{Felt, Field};
use crate::trace::{ColumnSet, CpuCol, PublicStatement};

pub const TRANSCRIPT_VERSION: &str = "cairo-air/transcript/v1";

/// Domain tags, one per challenge.
pub const TAGS: [&str; 3] = ["alpha", "z_mem", "z_rc"];

/// Largest modulus [`enumerate_exceptional_set`] will scan.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InteractionError {
    #[error("sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("modulus exceeds 2^20; exhaustive enumeration refused")]
    ModulusTooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Challenges {
    pub alpha: Felt,
    pub z_mem: Felt,
    pub z_rc: Felt,
}

fn put_tag(out: &mut Vec<u8>, tag: &str) {
    out.extend_from_slice(&(tag.len() as u64).to_le_bytes());
    out.extend_from_slice(tag.as_bytes());
}

fn put_column(out: &mut Vec<u8>, tag: &str, xs: &[Felt]) {
    put_tag(out, tag);
    out.extend_from_slice(&(xs.len() as u64).to_le_bytes());
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// Canonical bytes of everything fixed before the challenges: statement
/// inputs and the first-stage columns. Product columns are excluded.
pub fn committed_bytes(stmt: &PublicStatement, cols: &ColumnSet) -> Vec<u8> {
    let mut out = Vec::new();
    put_tag(&mut out, TRANSCRIPT_VERSION);
    put_tag(&mut out, "modulus");
    let m = stmt.field.modulus().to_bytes_le();
    out.extend_from_slice(&(m.len() as u64).to_le_bytes());
    out.extend_from_slice(&m);
    put_tag(&mut out, "trace_length");
    out.extend_from_slice(&stmt.trace_length.to_le_bytes());
    put_column(&mut out, "boundary", &[stmt.initial_pc, stmt.initial_ap, stmt.final_pc, stmt.final_ap]);
    put_tag(&mut out, "rc_bounds");
    out.extend_from_slice(&stmt.rc_min.to_le_bytes());
    out.extend_from_slice(&stmt.rc_max.to_le_bytes());
    let (ks, vs): (Vec<Felt>, Vec<Felt>) = stmt.m_star.iter().map(|(&a, &v)| (a, v)).unzip();
    put_column(&mut out, "m_star.addr", &ks);
    put_column(&mut out, "m_star.value", &vs);
    for c in CpuCol::all() {
        put_column(&mut out, &format!("cpu.{}", c.name()), cols.cpu.column(c));
    }
    let m = &cols.memory;
    put_column(&mut out, "memory.a", &m.a);
    put_column(&mut out, "memory.v", &m.v);
    put_column(&mut out, "memory.a_sorted", &m.a_sorted);
    put_column(&mut out, "memory.v_sorted", &m.v_sorted);
    put_column(&mut out, "range_check.pool", &cols.range_check.pool);
    put_column(&mut out, "range_check.sorted", &cols.range_check.sorted);
    out
}

/// Source of interaction elements.
pub trait ChallengeOracle: Send + Sync {
    fn derive(&self, field: Field, committed: &[u8]) -> Challenges;

    /// 32-byte fingerprint of the committed bytes, recorded in transcripts.
    fn commitment(&self, committed: &[u8]) -> [u8; 32] {
        Sha256::digest(committed).into()
    }
}

/// The default oracle: each challenge is SHA-256 of its tag and the
/// commitment, widened to 512 bits and reduced mod p.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sha256Oracle;

fn hash_to_field(field: Field, tag: &str, commitment: &[u8; 32]) -> Felt {
    let mut wide = Vec::with_capacity(64);
    for counter in 0u8..2 {
        let mut h = Sha256::new();
        h.update((tag.len() as u64).to_le_bytes());
        h.update(tag.as_bytes());
        h.update([counter]);
        h.update(commitment);
        wide.extend_from_slice(&h.finalize());
    }
    field.from_biguint(&BigUint::from_bytes_le(&wide))
}

impl ChallengeOracle for Sha256Oracle {
    fn derive(&self, field: Field, committed: &[u8]) -> Challenges {
        let c = self.commitment(committed);
        Challenges {
            alpha: hash_to_field(field, TAGS[0], &c),
            z_mem: hash_to_field(field, TAGS[1], &c),
            z_rc: hash_to_field(field, TAGS[2], &c),
        }
    }
}

/// Reproducible test oracle: a ChaCha stream keyed by a seed and a cheap
/// fingerprint of the committed bytes.
#[derive(Debug, Clone, Copy)]
pub struct SeededOracle {
    pub seed: u64,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

impl ChallengeOracle for SeededOracle {
    fn derive(&self, field: Field, committed: &[u8]) -> Challenges {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(committed));
        let mut draw = || {
            let mut b = [0u8; 64];
            rng.fill(&mut b[..]);
            field.from_biguint(&BigUint::from_bytes_le(&b))
        };
        Challenges { alpha: draw(), z_mem: draw(), z_rc: draw() }
    }

    fn commitment(&self, committed: &[u8]) -> [u8; 32] {
        let mut out = [0u8; 32];
        out[..8].copy_from_slice(&fnv1a(committed).to_le_bytes());
        out[8..16].copy_from_slice(&self.seed.to_le_bytes());
        out
    }
}

/// Challenges from the default oracle.
pub fn derive_challenges(field: Field, committed: &[u8]) -> Challenges {
    Sha256Oracle.derive(field, committed)
}

fn same_multiset(a: &[Felt], b: &[Felt]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort();
    y.sort();
    x == y
}

fn prod_at(xs: &[Felt], z: Felt) -> Felt {
    xs.iter().fold(z.field().one(), |acc, &x| acc * (z - x))
}

/// `z` is exceptional for `(a, b)` when the multisets differ yet
/// `prod (z - a_i) = prod (z - b_i)`.
pub fn in_exceptional_set(a: &[Felt], b: &[Felt], z: Felt) -> Result<bool, InteractionError> {
    if a.len() != b.len() {
        return Err(InteractionError::LengthMismatch(a.len(), b.len()));
    }
    Ok(!same_multiset(a, b) && prod_at(a, z) == prod_at(b, z))
}

/// The whole exceptional set, by scanning every field element.
pub fn enumerate_exceptional_set(field: Field, a: &[Felt], b: &[Felt]) -> Result<BTreeSet<Felt>, InteractionError> {
    if a.len() != b.len() {
        return Err(InteractionError::LengthMismatch(a.len(), b.len()));
    }
    let p = match field.modulus_u64() {
        Some(p) if p <= ENUMERATION_LIMIT => p,
        _ => return Err(InteractionError::ModulusTooLarge),
    };
    if same_multiset(a, b) {
        return Ok(BTreeSet::new());
    }
    Ok((0..p).map(|z| field.elem(z)).filter(|&z| prod_at(a, z) == prod_at(b, z)).collect())
}

/// `alpha` is bad when it compresses two distinct pairs `(a_i, v_i)` and
/// `(a'_j, v'_j)` with `v_i != v'_j` to the same value.
pub fn in_bad_alpha(pairs: &[(Felt, Felt)], pairs2: &[(Felt, Felt)], alpha: Felt) -> bool {
    pairs.iter().any(|&(a, v)| {
        pairs2.iter().any(|&(a2, v2)| v != v2 && (a2 - a) == alpha * (v - v2))
    })
}

/// Every bad `alpha`; at most `|pairs| * |pairs2|` values.
pub fn bad_alpha_candidates(pairs: &[(Felt, Felt)], pairs2: &[(Felt, Felt)]) -> BTreeSet<Felt> {
    let mut out = BTreeSet::new();
    for &(a, v) in pairs {
        for &(a2, v2) in pairs2 {
            if v != v2 {
                out.insert((a2 - a).try_div(v - v2).expect("v != v2"));
            }
        }
    }
    out
}
