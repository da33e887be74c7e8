use std::collections::BTreeMap;

use crate::field::{Felt, Field};

/// Everything the verifier knows besides the committed columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicStatement {
    pub field: Field,
    /// `16 (T + 1)`.
    pub trace_length: u64,
    pub initial_pc: Felt,
    pub initial_ap: Felt,
    pub final_pc: Felt,
    pub final_ap: Felt,
    pub m_star: BTreeMap<Felt, Felt>,
    pub rc_min: u64,
    pub rc_max: u64,
    pub alpha: Felt,
    pub z_mem: Felt,
    pub z_rc: Felt,
    /// `prod_{a in dom m*} (z_mem - (a + alpha m*(a)))`.
    pub public_memory_prod: Felt,
}

impl PublicStatement {
    /// Number of machine states, `T + 1`, when `trace_length` is well formed.
    pub fn steps_plus_one(&self) -> Option<usize> {
        if self.trace_length % 16 != 0 {
            return None;
        }
        let n = self.trace_length / 16;
        (n.is_power_of_two()).then_some(n as usize)
    }

    pub fn public_pairs(&self) -> Vec<(Felt, Felt)> {
        self.m_star.iter().map(|(&a, &v)| (a, v)).collect()
    }
}
