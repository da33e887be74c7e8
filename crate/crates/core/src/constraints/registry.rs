use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::isa::instruction::Flag;
use crate::trace::CpuCol;

use super::expr::*;

/// The eight constraint groups, plus the statement-level checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    CpuDecode,
    CpuOperands,
    CpuUpdateRegisters,
    CpuOpcodes,
    Memory,
    Rc16,
    PublicMemory,
    InitialAndFinal,
    /// Checks on the statement itself rather than on columns.
    PublicConstraints,
}

impl Group {
    pub const CONSTRAINT_GROUPS: [Group; 8] = [
        Group::CpuDecode,
        Group::CpuOperands,
        Group::CpuUpdateRegisters,
        Group::CpuOpcodes,
        Group::Memory,
        Group::Rc16,
        Group::PublicMemory,
        Group::InitialAndFinal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::CpuDecode => "cpu_decode",
            Group::CpuOperands => "cpu_operands",
            Group::CpuUpdateRegisters => "cpu_update_registers",
            Group::CpuOpcodes => "cpu_opcodes",
            Group::Memory => "memory",
            Group::Rc16 => "rc16",
            Group::PublicMemory => "public_memory",
            Group::InitialAndFinal => "initial_and_final",
            Group::PublicConstraints => "public_constraints",
        }
    }

    pub fn from_name(s: &str) -> Option<Group> {
        Group::CONSTRAINT_GROUPS.into_iter().chain([Group::PublicConstraints]).find(|g| g.name() == s)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rows a constraint is evaluated on. The anchor row of each referenced
/// table is fixed by the domain; `next` variables read the row after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Every CPU row `0..=T`.
    CpuRows,
    /// CPU rows `0..T`, with access to the next row.
    CpuTransition,
    CpuFirst,
    CpuLast,
    MemFirst,
    MemTransition,
    MemLast,
    RcFirst,
    RcTransition,
    RcLast,
    /// CPU row `i` together with memory row `4 i + slot`.
    MemoryAccess(u8),
    /// CPU row `i` together with pool row `3 i + slot`.
    RangeCheckEmbed(u8),
    /// Memory rows `4 (T + 1) .. 4 (T + 1) + |dom m*|`.
    PublicMemorySlots,
}

impl Domain {
    /// Tables whose rows this domain anchors.
    pub fn anchors(self) -> &'static [Table] {
        match self {
            Domain::CpuRows | Domain::CpuTransition | Domain::CpuFirst | Domain::CpuLast => &[Table::Cpu],
            Domain::MemFirst | Domain::MemTransition | Domain::MemLast | Domain::PublicMemorySlots => &[Table::Mem],
            Domain::RcFirst | Domain::RcTransition | Domain::RcLast => &[Table::Rc],
            Domain::MemoryAccess(_) => &[Table::Cpu, Table::Mem],
            Domain::RangeCheckEmbed(_) => &[Table::Cpu, Table::Rc],
        }
    }

    pub fn is_transition(self) -> bool {
        matches!(self, Domain::CpuTransition | Domain::MemTransition | Domain::RcTransition)
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub group: Group,
    pub name: String,
    pub domain: Domain,
    /// The constraint holds when this evaluates to zero.
    pub expr: Expr,
}

fn c(group: Group, name: impl Into<String>, domain: Domain, expr: Expr) -> Constraint {
    Constraint { group, name: name.into(), domain, expr }
}

const BIAS: i128 = 1 << 15;

fn cpu_decode() -> Vec<Constraint> {
    let g = Group::CpuDecode;
    let mut out: Vec<Constraint> = Flag::ALL
        .iter()
        .map(|&f| c(g, format!("bit_{}", f.name()), Domain::CpuRows, flag(f) * (flag(f) - 1)))
        .collect();
    out.push(c(g, "last_f_tilde_zero", Domain::CpuRows, cpu(CpuCol::f_tilde(15))));
    out.push(c(
        g,
        "instruction_word",
        Domain::CpuRows,
        cpu(CpuCol::INST)
            - (cpu(CpuCol::OFF_DST)
                + (1i128 << 16) * cpu(CpuCol::OFF_OP0)
                + (1i128 << 32) * cpu(CpuCol::OFF_OP1)
                + (1i128 << 48) * cpu(CpuCol::f_tilde(0))),
    ));
    out
}

fn size() -> Expr {
    flag(Flag::Op1Imm) + 1
}

fn cpu_operands() -> Vec<Constraint> {
    let g = Group::CpuOperands;
    let reg = |f: Flag| flag(f) * cpu(CpuCol::FP) + (1 - flag(f)) * cpu(CpuCol::AP);
    let (imm, fp, ap) = (flag(Flag::Op1Imm), flag(Flag::Op1Fp), flag(Flag::Op1Ap));
    let op1_base = imm.clone() * cpu(CpuCol::PC)
        + ap.clone() * cpu(CpuCol::AP)
        + fp.clone() * cpu(CpuCol::FP)
        + (1 - imm - ap - fp) * cpu(CpuCol::OP0);
    let (add, mul, jnz) = (flag(Flag::ResAdd), flag(Flag::ResMul), flag(Flag::PcJnz));
    let mut out = vec![
        c(
            g,
            "dst_addr",
            Domain::CpuRows,
            cpu(CpuCol::DST_ADDR) - (reg(Flag::DstReg) + cpu(CpuCol::OFF_DST) - BIAS),
        ),
        c(
            g,
            "op0_addr",
            Domain::CpuRows,
            cpu(CpuCol::OP0_ADDR) - (reg(Flag::Op0Reg) + cpu(CpuCol::OFF_OP0) - BIAS),
        ),
        c(g, "op1_addr", Domain::CpuRows, cpu(CpuCol::OP1_ADDR) - (op1_base + cpu(CpuCol::OFF_OP1) - BIAS)),
        c(g, "mul", Domain::CpuRows, cpu(CpuCol::MUL) - cpu(CpuCol::OP0) * cpu(CpuCol::OP1)),
        c(
            g,
            "res",
            Domain::CpuRows,
            (1 - jnz.clone()) * cpu(CpuCol::RES)
                - (add.clone() * (cpu(CpuCol::OP0) + cpu(CpuCol::OP1))
                    + mul.clone() * cpu(CpuCol::MUL)
                    + (1 - add - mul - jnz) * cpu(CpuCol::OP1)),
        ),
    ];
    for (slot, (ac, vc)) in CpuCol::ACCESSES.into_iter().enumerate() {
        let label = ["pc", "dst", "op0", "op1"][slot];
        let d = Domain::MemoryAccess(slot as u8);
        out.push(c(g, format!("memory_{label}_addr"), d, mem(MemCol::A) - cpu(ac)));
        out.push(c(g, format!("memory_{label}_value"), d, mem(MemCol::V) - cpu(vc)));
    }
    out
}

fn cpu_update_registers() -> Vec<Constraint> {
    let g = Group::CpuUpdateRegisters;
    let (call, ret) = (flag(Flag::OpcodeCall), flag(Flag::OpcodeRet));
    let (abs, rel, jnz) = (flag(Flag::PcJumpAbs), flag(Flag::PcJumpRel), flag(Flag::PcJnz));
    let (pc, pc_next) = (cpu(CpuCol::PC), cpu_next(CpuCol::PC));
    vec![
        c(g, "t0", Domain::CpuRows, cpu(CpuCol::T0) - jnz.clone() * cpu(CpuCol::DST)),
        c(g, "t1", Domain::CpuRows, cpu(CpuCol::T1) - cpu(CpuCol::T0) * cpu(CpuCol::RES)),
        c(
            g,
            "next_ap",
            Domain::CpuTransition,
            cpu_next(CpuCol::AP)
                - (cpu(CpuCol::AP)
                    + flag(Flag::ApAdd) * cpu(CpuCol::RES)
                    + flag(Flag::ApAdd1)
                    + 2 * call.clone()),
        ),
        c(
            g,
            "next_fp",
            Domain::CpuTransition,
            cpu_next(CpuCol::FP)
                - (ret.clone() * cpu(CpuCol::DST)
                    + call.clone() * (cpu(CpuCol::AP) + 2)
                    + (1 - ret - call) * cpu(CpuCol::FP)),
        ),
        c(
            g,
            "next_pc_jnz",
            Domain::CpuTransition,
            (cpu(CpuCol::T1) - jnz.clone()) * (pc_next.clone() - (pc.clone() + size())),
        ),
        c(
            g,
            "next_pc",
            Domain::CpuTransition,
            cpu(CpuCol::T0) * (pc_next.clone() - (pc.clone() + cpu(CpuCol::OP1))) + (1 - jnz.clone()) * pc_next
                - ((1 - abs.clone() - rel.clone() - jnz) * (pc.clone() + size())
                    + abs * cpu(CpuCol::RES)
                    + rel * (pc + cpu(CpuCol::RES))),
        ),
    ]
}

fn cpu_opcodes() -> Vec<Constraint> {
    let g = Group::CpuOpcodes;
    let call = flag(Flag::OpcodeCall);
    vec![
        c(g, "call_saves_fp", Domain::CpuRows, call.clone() * (cpu(CpuCol::DST) - cpu(CpuCol::FP))),
        c(g, "call_saves_return_pc", Domain::CpuRows, call * (cpu(CpuCol::OP0) - (cpu(CpuCol::PC) + size()))),
        c(
            g,
            "assert_eq",
            Domain::CpuRows,
            flag(Flag::OpcodeAssertEq) * (cpu(CpuCol::RES) - cpu(CpuCol::DST)),
        ),
    ]
}

fn memory() -> Vec<Constraint> {
    let g = Group::Memory;
    let z = || public(PublicValue::ZMem);
    let alpha = || public(PublicValue::Alpha);
    let da = || mem_next(MemCol::ASorted) - mem(MemCol::ASorted);
    vec![
        c(g, "continuity", Domain::MemTransition, da() * (da() - 1)),
        c(
            g,
            "single_valued",
            Domain::MemTransition,
            (mem_next(MemCol::VSorted) - mem(MemCol::VSorted)) * (da() - 1),
        ),
        c(
            g,
            "perm_init",
            Domain::MemFirst,
            (z() - (mem(MemCol::ASorted) + alpha() * mem(MemCol::VSorted))) * mem(MemCol::Prod)
                - (z() - (mem(MemCol::A) + alpha() * mem(MemCol::V))),
        ),
        c(
            g,
            "perm_step",
            Domain::MemTransition,
            (z() - (mem_next(MemCol::ASorted) + alpha() * mem_next(MemCol::VSorted))) * mem_next(MemCol::Prod)
                - (z() - (mem_next(MemCol::A) + alpha() * mem_next(MemCol::V))) * mem(MemCol::Prod),
        ),
    ]
}

fn public_memory() -> Vec<Constraint> {
    let g = Group::PublicMemory;
    vec![
        c(
            g,
            "final_product",
            Domain::MemLast,
            mem(MemCol::Prod) * public(PublicValue::PublicMemoryProd) - public(PublicValue::ZMemPowK),
        ),
        c(g, "placeholder_addr", Domain::PublicMemorySlots, mem(MemCol::A)),
        c(g, "placeholder_value", Domain::PublicMemorySlots, mem(MemCol::V)),
    ]
}

fn rc16() -> Vec<Constraint> {
    let g = Group::Rc16;
    let z = || public(PublicValue::ZRc);
    let da = || rc_next(RcCol::Sorted) - rc(RcCol::Sorted);
    let mut out = vec![
        c(
            g,
            "perm_init",
            Domain::RcFirst,
            (z() - rc(RcCol::Sorted)) * rc(RcCol::Prod) - (z() - rc(RcCol::Pool)),
        ),
        c(
            g,
            "perm_step",
            Domain::RcTransition,
            (z() - rc_next(RcCol::Sorted)) * rc_next(RcCol::Prod) - (z() - rc_next(RcCol::Pool)) * rc(RcCol::Prod),
        ),
        c(g, "perm_final", Domain::RcLast, rc(RcCol::Prod) - 1),
        c(g, "continuity", Domain::RcTransition, da() * (da() - 1)),
        c(g, "min", Domain::RcFirst, rc(RcCol::Sorted) - public(PublicValue::RcMin)),
        c(g, "max", Domain::RcLast, rc(RcCol::Sorted) - public(PublicValue::RcMax)),
    ];
    for (slot, col) in CpuCol::OFFSETS.into_iter().enumerate() {
        out.push(c(
            g,
            format!("embed_{}", col.name()),
            Domain::RangeCheckEmbed(slot as u8),
            rc(RcCol::Pool) - cpu(col),
        ));
    }
    out
}

fn initial_and_final() -> Vec<Constraint> {
    let g = Group::InitialAndFinal;
    vec![
        c(g, "initial_pc", Domain::CpuFirst, cpu(CpuCol::PC) - public(PublicValue::InitialPc)),
        c(g, "initial_ap", Domain::CpuFirst, cpu(CpuCol::AP) - public(PublicValue::InitialAp)),
        c(g, "initial_fp", Domain::CpuFirst, cpu(CpuCol::FP) - public(PublicValue::InitialAp)),
        c(g, "final_pc", Domain::CpuLast, cpu(CpuCol::PC) - public(PublicValue::FinalPc)),
        c(g, "final_ap", Domain::CpuLast, cpu(CpuCol::AP) - public(PublicValue::FinalAp)),
    ]
}

/// Every column constraint, grouped and in a fixed order.
pub fn registry() -> &'static [Constraint] {
    static REGISTRY: OnceLock<Vec<Constraint>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut all = Vec::new();
        all.extend(cpu_decode());
        all.extend(cpu_operands());
        all.extend(cpu_update_registers());
        all.extend(cpu_opcodes());
        all.extend(memory());
        all.extend(rc16());
        all.extend(public_memory());
        all.extend(initial_and_final());
        all
    })
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, HashSet};

    use super::*;

    #[test]
    fn every_constraint_is_quadratic() {
        for k in registry() {
            assert!(k.expr.degree() <= 2, "{}/{} has degree {}: {}", k.group, k.name, k.expr.degree(), k.expr);
        }
    }

    #[test]
    fn constraints_read_only_anchored_windows() {
        for k in registry() {
            let anchors = k.domain.anchors();
            let mut rows: BTreeMap<Table, HashSet<bool>> = BTreeMap::new();
            for v in k.expr.vars() {
                assert!(anchors.contains(&v.col.table()), "{}/{} reads an unanchored table", k.group, k.name);
                assert!(!v.next || k.domain.is_transition(), "{}/{} reads a next row", k.group, k.name);
                rows.entry(v.col.table()).or_default().insert(v.next);
            }
            // at most the anchor row and its successor
            assert!(rows.values().all(|s| s.len() <= 2));
        }
    }

    #[test]
    fn names_unique_within_group() {
        let mut seen = HashSet::new();
        for k in registry() {
            assert!(seen.insert((k.group, k.name.clone())), "duplicate {}/{}", k.group, k.name);
        }
    }

    #[test]
    fn eight_groups_all_populated() {
        let groups: HashSet<Group> = registry().iter().map(|k| k.group).collect();
        assert_eq!(groups.len(), 8);
        assert!(!groups.contains(&Group::PublicConstraints));
        for g in Group::CONSTRAINT_GROUPS {
            assert_eq!(Group::from_name(g.name()), Some(g));
        }
    }
}
