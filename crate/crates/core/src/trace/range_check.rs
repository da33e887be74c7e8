use std::collections::BTreeSet;

use crate::field::Felt;

use super::columns::{CpuCol, ExecutionColumns};
use super::memory::cumulative_ratio;
use super::TraceError;

/// Offsets are range-checked to `[0, 2^16)`.
pub const RC_BOUND: u64 = 1 << 16;

/// The 16-bit range-check pool with its sorted copy and product column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RcSegment {
    pub pool: Vec<Felt>,
    pub sorted: Vec<Felt>,
    pub prod: Vec<Felt>,
    pub rc_min: u64,
    pub rc_max: u64,
}

impl RcSegment {
    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn check_shape(&self) -> Result<(), TraceError> {
        let n = self.pool.len();
        if n == 0 {
            return Err(TraceError::Shape("range-check pool is empty".into()));
        }
        if self.sorted.len() != n || self.prod.len() != n {
            return Err(TraceError::Shape("range-check columns differ in length".into()));
        }
        Ok(())
    }
}

/// The pool holds the three biased offsets of every step (dst, op0, op1),
/// then one copy of each value missing from `[min, max]`. Returns
/// `(pool, sorted, rc_min, rc_max)`.
pub fn build_rc_pool(cols: &ExecutionColumns) -> Result<(Vec<Felt>, Vec<Felt>, u64, u64), TraceError> {
    let field = cols.field();
    let mut pool = Vec::with_capacity(3 * cols.rows());
    let mut seen = BTreeSet::new();
    for row in 0..cols.rows() {
        for c in CpuCol::OFFSETS {
            let x = cols.get(c, row);
            match x.to_u64() {
                Some(n) if n < RC_BOUND => {
                    seen.insert(n);
                }
                _ => return Err(TraceError::OffsetRange { row, value: x }),
            }
            pool.push(x);
        }
    }
    let (lo, hi) = (*seen.first().expect("nonempty"), *seen.last().expect("nonempty"));
    for n in lo..=hi {
        if !seen.contains(&n) {
            pool.push(field.elem(n));
        }
    }
    let mut sorted = pool.clone();
    sorted.sort();
    Ok((pool, sorted, lo, hi))
}

pub fn rc_products(pool: &[Felt], sorted: &[Felt], z: Felt) -> Result<Vec<Felt>, TraceError> {
    cumulative_ratio(pool, sorted, z, "z_rc")
}

pub fn build_rc_segment(cols: &ExecutionColumns, z_rc: Felt) -> Result<RcSegment, TraceError> {
    let (pool, sorted, rc_min, rc_max) = build_rc_pool(cols)?;
    let prod = rc_products(&pool, &sorted, z_rc)?;
    Ok(RcSegment { pool, sorted, prod, rc_min, rc_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;

    fn cols_with_offsets(offs: &[[u64; 3]]) -> ExecutionColumns {
        let f = FieldConfig::goldilocks();
        let mut cols = ExecutionColumns::zeroed(f, offs.len());
        for (row, o) in offs.iter().enumerate() {
            for (c, &x) in CpuCol::OFFSETS.iter().zip(o) {
                cols.set(*c, row, f.elem(x));
            }
        }
        cols
    }

    #[test]
    fn constant_offsets() {
        let cols = cols_with_offsets(&[[1 << 15; 3]; 4]);
        let f = cols.field();
        let seg = build_rc_segment(&cols, f.elem(12345)).unwrap();
        assert_eq!((seg.rc_min, seg.rc_max), (1 << 15, 1 << 15));
        assert_eq!(seg.pool.len(), 12);
        assert!(seg.sorted.iter().all(|&x| x == f.elem(1 << 15)));
        assert!(seg.prod.iter().all(|x| x.is_one()));
    }

    #[test]
    fn padding_fills_interval() {
        let cols = cols_with_offsets(&[[32767, 32769, 32767]]);
        let f = cols.field();
        let seg = build_rc_segment(&cols, f.elem(99)).unwrap();
        assert_eq!(seg.pool, vec![f.elem(32767), f.elem(32769), f.elem(32767), f.elem(32768)]);
        assert_eq!(seg.sorted, vec![f.elem(32767), f.elem(32767), f.elem(32768), f.elem(32769)]);
        assert!(seg.prod.last().unwrap().is_one());
        assert!(seg.prod[0].is_one() && !seg.prod[1].is_one());
    }

    #[test]
    fn out_of_range_offset_rejected() {
        let cols = cols_with_offsets(&[[0, 1 << 16, 5]]);
        assert!(matches!(build_rc_pool(&cols), Err(TraceError::OffsetRange { row: 0, .. })));
    }
}
