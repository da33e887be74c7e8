use std::collections::{BTreeMap, BTreeSet};

use crate::field::Felt;
use crate::isa::semantics::Memory;

use super::columns::{CpuCol, ExecutionColumns};
use super::TraceError;

/// Largest address interval the prover will fill with gap pairs.
pub const MAX_MEMORY_SPAN: u64 = 1 << 22;

/// Memory access pairs, their address-sorted permutation and the
/// cumulative-product column tying the two together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemorySegment {
    pub a: Vec<Felt>,
    pub v: Vec<Felt>,
    pub a_sorted: Vec<Felt>,
    pub v_sorted: Vec<Felt>,
    pub prod: Vec<Felt>,
}

impl MemorySegment {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn check_shape(&self) -> Result<(), TraceError> {
        let n = self.a.len();
        if n == 0 {
            return Err(TraceError::Shape("memory segment is empty".into()));
        }
        for (name, c) in [("v", &self.v), ("a_sorted", &self.a_sorted), ("v_sorted", &self.v_sorted), ("prod", &self.prod)]
        {
            if c.len() != n {
                return Err(TraceError::Shape(format!("memory column {name} has {} rows, expected {n}", c.len())));
            }
        }
        Ok(())
    }
}

fn address_u64(a: Felt) -> Result<u64, TraceError> {
    a.to_u64().ok_or_else(|| TraceError::AddressRange(a.to_string()))
}

/// Unsorted memory pairs: four per step, then one `(0, 0)` placeholder per
/// public cell, then filler pairs so the address set becomes an interval.
pub fn collect_memory_accesses<M: Memory + ?Sized>(
    cols: &ExecutionColumns,
    mem: &M,
    m_star: &BTreeMap<Felt, Felt>,
) -> Result<(Vec<Felt>, Vec<Felt>), TraceError> {
    let field = cols.field();
    for (&addr, &val) in m_star {
        match mem.get(addr) {
            Some(x) if x == val => {}
            actual => return Err(TraceError::PublicMemoryMismatch { addr, expected: val, actual }),
        }
    }
    let rows = cols.rows();
    let mut a = Vec::with_capacity(4 * rows + m_star.len());
    let mut v = Vec::with_capacity(4 * rows + m_star.len());
    for row in 0..rows {
        for (ac, vc) in CpuCol::ACCESSES {
            a.push(cols.get(ac, row));
            v.push(cols.get(vc, row));
        }
    }
    let mut seen = BTreeSet::new();
    for &x in a.iter().chain(m_star.keys()) {
        seen.insert(address_u64(x)?);
    }
    a.extend(std::iter::repeat(field.zero()).take(m_star.len()));
    v.extend(std::iter::repeat(field.zero()).take(m_star.len()));

    let (lo, hi) = (*seen.first().expect("nonempty"), *seen.last().expect("nonempty"));
    if hi - lo >= MAX_MEMORY_SPAN {
        return Err(TraceError::SpanTooLarge { lo, hi });
    }
    for addr in lo..=hi {
        if !seen.contains(&addr) {
            let fa = field.elem(addr);
            a.push(fa);
            v.push(mem.get(fa).unwrap_or(field.zero()));
        }
    }
    Ok((a, v))
}

/// Sorts the pairs by address after swapping `public_pairs.len()` of the
/// `(0, 0)` placeholders for the public pairs. Equal addresses must carry
/// equal values.
pub fn sort_memory(
    a: &[Felt],
    v: &[Felt],
    public_pairs: &[(Felt, Felt)],
) -> Result<(Vec<Felt>, Vec<Felt>), TraceError> {
    let mut pairs: Vec<(Felt, Felt)> = a.iter().copied().zip(v.iter().copied()).collect();
    let mut to_drop = public_pairs.len();
    pairs.retain(|(x, y)| {
        if to_drop > 0 && x.is_zero() && y.is_zero() {
            to_drop -= 1;
            false
        } else {
            true
        }
    });
    if to_drop > 0 {
        return Err(TraceError::Shape(format!("{to_drop} public pairs lack a (0, 0) placeholder")));
    }
    pairs.extend_from_slice(public_pairs);
    pairs.sort_by(|x, y| x.0.cmp(&y.0));
    for w in pairs.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
            return Err(TraceError::InconsistentMemory { addr: w[0].0, first: w[0].1, second: w[1].1 });
        }
    }
    Ok(pairs.into_iter().unzip())
}

/// `prod_k = prod_{i <= k} (z - num_i) / (z - den_i)`.
pub fn cumulative_ratio(num: &[Felt], den: &[Felt], z: Felt, what: &'static str) -> Result<Vec<Felt>, TraceError> {
    assert_eq!(num.len(), den.len());
    let field = z.field();
    let mut inv: Vec<Felt> = den.iter().map(|&d| z - d).collect();
    field.batch_inverse(&mut inv).map_err(|_| TraceError::DegenerateChallenge(what))?;
    let mut acc = field.one();
    Ok(num
        .iter()
        .zip(inv)
        .map(|(&n, di)| {
            acc = acc * (z - n) * di;
            acc
        })
        .collect())
}

/// Compresses pairs as `a + alpha * v`.
pub fn compress(a: &[Felt], v: &[Felt], alpha: Felt) -> Vec<Felt> {
    a.iter().zip(v).map(|(&x, &y)| x + alpha * y).collect()
}

pub fn memory_products(seg_a: &[Felt], seg_v: &[Felt], a_sorted: &[Felt], v_sorted: &[Felt], alpha: Felt, z: Felt)
    -> Result<Vec<Felt>, TraceError> {
    cumulative_ratio(&compress(seg_a, seg_v, alpha), &compress(a_sorted, v_sorted, alpha), z, "z_mem")
}

/// Sorting and the product column in one call.
pub fn sort_with_products(
    a: &[Felt],
    v: &[Felt],
    public_pairs: &[(Felt, Felt)],
    alpha: Felt,
    z: Felt,
) -> Result<(Vec<Felt>, Vec<Felt>, Vec<Felt>), TraceError> {
    let (a_sorted, v_sorted) = sort_memory(a, v, public_pairs)?;
    let prod = memory_products(a, v, &a_sorted, &v_sorted, alpha, z)?;
    Ok((a_sorted, v_sorted, prod))
}

/// `prod_{a in dom m*} (z - (a + alpha m*(a)))`.
pub fn public_memory_product(m_star: &BTreeMap<Felt, Felt>, alpha: Felt, z: Felt) -> Felt {
    m_star.iter().fold(z.field().one(), |acc, (&a, &v)| acc * (z - (a + alpha * v)))
}
