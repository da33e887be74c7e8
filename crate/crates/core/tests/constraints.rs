use std::collections::BTreeMap;

use cairo_air::constraints::{
    eval_cpu_decode, eval_cpu_opcodes, eval_cpu_operands, eval_cpu_update_registers, eval_initial_and_final,
    eval_memory, eval_public_memory, eval_rc16, verify_all, verify_with, Group, VerifyOptions, ViolationReport,
};
use cairo_air::corpus;
use cairo_air::extract::{check_fn_extends, extract_memory, extract_register_trace};
use cairo_air::field::{Felt, Field, FieldConfig};
use cairo_air::interaction::Sha256Oracle;
use cairo_air::isa::Flag;
use cairo_air::prove::{interact, prove_program, Proof};
use cairo_air::trace::{public_memory_product, CpuCol, RC_BOUND};

fn gl() -> Field {
    FieldConfig::goldilocks()
}

fn proof(name: &str) -> Proof {
    let p = corpus::build(name, gl()).unwrap().unwrap();
    prove_program(&p, None, &Sha256Oracle).unwrap().1
}

fn row_with(pr: &Proof, f: Flag) -> usize {
    (0..pr.columns.cpu.rows()).find(|&r| pr.columns.cpu.flag(f, r).is_one()).expect("some row has the flag")
}

fn lhs_of(r: &ViolationReport, group: Group, name: &str) -> Vec<(usize, Felt)> {
    r.violations.iter().filter(|v| v.group == group && v.name == name).map(|v| (v.row, v.lhs)).collect()
}

#[test]
fn honest_columns_satisfy_every_group() {
    for name in corpus::NAMES {
        let pr = proof(name);
        let (s, c) = (&pr.statement, &pr.columns);
        for r in [
            eval_cpu_decode(s, c),
            eval_cpu_operands(s, c),
            eval_cpu_update_registers(s, c),
            eval_cpu_opcodes(s, c),
            eval_memory(s, c),
            eval_rc16(s, c),
            eval_public_memory(s, c),
            eval_initial_and_final(s, c),
        ] {
            assert!(r.unwrap().is_empty(), "{name}");
        }
    }
}

#[test]
fn derived_flag_of_two_violates_bit_constraint() {
    let mut pr = proof("straight_line");
    let row = 0;
    let i = Flag::ResMul.index();
    assert!(pr.columns.cpu.flag(Flag::ResMul, row).is_zero());
    let col = CpuCol::f_tilde(i);
    let two = gl().elem(2);
    pr.columns.cpu.set(col, row, pr.columns.cpu.get(col, row) + two);
    let r = eval_cpu_decode(&pr.statement, &pr.columns).unwrap();
    assert_eq!(lhs_of(&r, Group::CpuDecode, "bit_res_mul"), vec![(row, two)]);
}

#[test]
fn corrupted_word_violates_instruction_identity() {
    let mut pr = proof("countdown");
    let v = pr.columns.cpu.get(CpuCol::INST, 3);
    pr.columns.cpu.set(CpuCol::INST, 3, v + gl().one());
    let r = eval_cpu_decode(&pr.statement, &pr.columns).unwrap();
    assert_eq!(lhs_of(&r, Group::CpuDecode, "instruction_word"), vec![(3, gl().one())]);
}

#[test]
fn flipped_dst_reg_breaks_address_formula() {
    let mut pr = proof("straight_line");
    // row 1 has an ap-based dst and ap != fp; flip the flag through f~_0 only
    let c = &pr.columns.cpu;
    assert!(c.flag(Flag::DstReg, 1).is_zero() && c.get(CpuCol::AP, 1) != c.get(CpuCol::FP, 1));
    let col = CpuCol::f_tilde(0);
    pr.columns.cpu.set(col, 1, pr.columns.cpu.get(col, 1) + gl().one());
    let r = eval_cpu_operands(&pr.statement, &pr.columns).unwrap();
    assert!(lhs_of(&r, Group::CpuOperands, "dst_addr").iter().any(|&(k, _)| k == 1));
}

#[test]
fn corrupted_res_on_mul_step() {
    let mut pr = proof("straight_line");
    let row = row_with(&pr, Flag::ResMul);
    let v = pr.columns.cpu.get(CpuCol::RES, row);
    pr.columns.cpu.set(CpuCol::RES, row, v + gl().one());
    let r = eval_cpu_operands(&pr.statement, &pr.columns).unwrap();
    assert!(r.contains(Group::CpuOperands, "res"));
}

#[test]
fn fp_drift_on_plain_assert() {
    let mut pr = proof("straight_line");
    let row = row_with(&pr, Flag::OpcodeAssertEq);
    let fp = pr.columns.cpu.get(CpuCol::FP, row);
    pr.columns.cpu.set(CpuCol::FP, row + 1, fp + gl().one());
    let r = eval_cpu_update_registers(&pr.statement, &pr.columns).unwrap();
    assert!(lhs_of(&r, Group::CpuUpdateRegisters, "next_fp").contains(&(row, gl().one())));
}

#[test]
fn ret_and_call_fix_next_fp() {
    let pr = proof("fibonacci");
    let c = &pr.columns.cpu;
    let ret = row_with(&pr, Flag::OpcodeRet);
    assert_eq!(c.get(CpuCol::FP, ret + 1), c.get(CpuCol::DST, ret));
    let call = row_with(&pr, Flag::OpcodeCall);
    assert_eq!(c.get(CpuCol::FP, call + 1), c.get(CpuCol::AP, call) + gl().elem(2));
    for row in [ret, call] {
        let mut bad = pr.clone();
        let fp = bad.columns.cpu.get(CpuCol::FP, row + 1);
        bad.columns.cpu.set(CpuCol::FP, row + 1, fp + gl().one());
        let r = eval_cpu_update_registers(&bad.statement, &bad.columns).unwrap();
        assert!(lhs_of(&r, Group::CpuUpdateRegisters, "next_fp").iter().any(|&(k, _)| k == row));
    }
}

#[test]
fn assert_with_dst_different_from_res() {
    let mut pr = proof("countdown");
    let row = row_with(&pr, Flag::OpcodeAssertEq);
    let v = pr.columns.cpu.get(CpuCol::DST, row);
    pr.columns.cpu.set(CpuCol::DST, row, v + gl().one());
    let r = eval_cpu_opcodes(&pr.statement, &pr.columns).unwrap();
    // the constraint reads res - dst
    assert_eq!(lhs_of(&r, Group::CpuOpcodes, "assert_eq"), vec![(row, -gl().one())]);
}

#[test]
fn call_with_wrong_saved_fp() {
    let mut pr = proof("fibonacci");
    let row = row_with(&pr, Flag::OpcodeCall);
    let v = pr.columns.cpu.get(CpuCol::DST, row);
    pr.columns.cpu.set(CpuCol::DST, row, v + gl().one());
    let r = eval_cpu_opcodes(&pr.statement, &pr.columns).unwrap();
    assert!(r.contains(Group::CpuOpcodes, "call_saves_fp"));
}

#[test]
fn sorted_address_jump_of_two() {
    let mut pr = proof("countdown");
    let a = &pr.columns.memory.a_sorted;
    let k = (0..a.len() - 1).find(|&k| a[k + 1] - a[k] == gl().one()).unwrap();
    pr.columns.memory.a_sorted[k + 1] += gl().one();
    let r = eval_memory(&pr.statement, &pr.columns).unwrap();
    assert!(lhs_of(&r, Group::Memory, "continuity").contains(&(k, gl().elem(2))));
}

#[test]
fn equal_addresses_different_values() {
    let mut pr = proof("countdown");
    let a = &pr.columns.memory.a_sorted;
    let k = (0..a.len() - 1).find(|&k| a[k + 1] == a[k]).unwrap();
    pr.columns.memory.v_sorted[k + 1] += gl().one();
    let r = eval_memory(&pr.statement, &pr.columns).unwrap();
    assert!(lhs_of(&r, Group::Memory, "single_valued").iter().any(|&(row, _)| row == k));
}

#[test]
fn rc_final_product_and_min_boundary() {
    let pr = proof("fibonacci");
    let mut bad = pr.clone();
    let last = bad.columns.range_check.prod.len() - 1;
    bad.columns.range_check.prod[last] *= gl().elem(3);
    assert!(eval_rc16(&bad.statement, &bad.columns).unwrap().contains(Group::Rc16, "perm_final"));

    let mut bad = pr.clone();
    bad.statement.rc_min -= 1;
    assert!(eval_rc16(&bad.statement, &bad.columns).unwrap().contains(Group::Rc16, "min"));
}

#[test]
fn empty_public_memory_means_unit_final_product() {
    let mut p = corpus::halt(gl()).unwrap();
    p.m_star = BTreeMap::new();
    let (_, pr) = prove_program(&p, None, &Sha256Oracle).unwrap();
    assert!(pr.columns.memory.prod.last().unwrap().is_one());
    assert!(pr.statement.public_memory_prod.is_one());
    assert!(verify_all(&pr.statement, &pr.columns).unwrap().is_empty());
}

#[test]
fn perturbed_public_value_breaks_identity() {
    let mut pr = proof("straight_line");
    let (&a, &v) = pr.statement.m_star.iter().next().unwrap();
    pr.statement.m_star.insert(a, v + gl().one());
    let s = &mut pr.statement;
    s.public_memory_prod = public_memory_product(&s.m_star, s.alpha, s.z_mem);
    let r = eval_public_memory(&pr.statement, &pr.columns).unwrap();
    assert!(r.contains(Group::PublicMemory, "final_product"));
}

#[test]
fn boundary_mutations() {
    let pr = proof("countdown");
    let mut bad = pr.clone();
    let fp0 = bad.statement.initial_ap + gl().one();
    bad.columns.cpu.set(CpuCol::FP, 0, fp0);
    assert!(eval_initial_and_final(&bad.statement, &bad.columns).unwrap().contains(Group::InitialAndFinal, "initial_fp"));

    let mut bad = pr.clone();
    bad.statement.final_pc += gl().one();
    assert!(eval_initial_and_final(&bad.statement, &bad.columns).unwrap().contains(Group::InitialAndFinal, "final_pc"));
}

#[test]
fn rc_max_at_bound_fails_statement_check() {
    let mut pr = proof("halt");
    pr.statement.rc_max = RC_BOUND;
    assert!(verify_all(&pr.statement, &pr.columns).unwrap().contains(Group::PublicConstraints, "rc_max_lt"));
}

#[test]
fn verification_is_deterministic() {
    let mut pr = proof("fibonacci");
    pr.columns.cpu.set(CpuCol::AP, 9, gl().elem(5));
    let a = verify_all(&pr.statement, &pr.columns).unwrap();
    let b = verify_all(&pr.statement, &pr.columns).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn fail_fast_stops_at_one() {
    let mut pr = proof("fibonacci");
    for row in 0..8 {
        pr.columns.cpu.set(CpuCol::AP, row, gl().elem(5));
    }
    let opts = VerifyOptions { fail_fast: true, ..VerifyOptions::default() };
    assert_eq!(verify_with(&pr.statement, &pr.columns, &opts).unwrap().len(), 1);
    assert!(verify_all(&pr.statement, &pr.columns).unwrap().len() > 1);
}

#[test]
fn malformed_segments_are_format_errors() {
    let mut pr = proof("halt");
    pr.columns.memory.v.pop();
    assert!(verify_all(&pr.statement, &pr.columns).is_err());
}

#[test]
fn recomputed_products_after_mutation_still_fail() {
    // an adversary who re-derives challenges after a mutation is still caught
    let mut pr = proof("countdown");
    pr.columns.cpu.set(CpuCol::OP1, 2, gl().elem(12345));
    interact(&mut pr.statement, &mut pr.columns, &Sha256Oracle).unwrap();
    assert!(!verify_all(&pr.statement, &pr.columns).unwrap().is_empty());
}

#[test]
fn extraction_examples() {
    let pr = proof("fibonacci");
    let m = &pr.columns.memory;
    let mem = extract_memory(gl(), &m.a_sorted, &m.v_sorted).unwrap();
    assert!(check_fn_extends(&mem, &pr.statement.m_star));
    let mut perturbed = pr.statement.m_star.clone();
    let (&a, &v) = perturbed.iter().next().unwrap();
    perturbed.insert(a, v + gl().one());
    assert!(!check_fn_extends(&mem, &perturbed));

    let single = proof("halt");
    assert_eq!(single.columns.cpu.rows(), 1);
    assert_eq!(extract_register_trace(&single.columns.cpu, 16).unwrap().len(), 1);
    assert!(extract_register_trace(&single.columns.cpu, 32).is_err());

    // the padding suffix repeats the final state
    let exec = extract_register_trace(&pr.columns.cpu, pr.statement.trace_length).unwrap();
    let last = *exec.last().unwrap();
    let first_halt = exec.iter().position(|s| *s == last).unwrap();
    assert!(exec[first_halt..].iter().all(|s| *s == last));
    assert!(first_halt < exec.len() - 1);
}
