//! Acceptance suite. Each criterion prints one PASS/FAIL line to stderr
//! (bypassing the test harness capture) and fails its test when red.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cairo_air::constraints::{registry, verify_all, Expr, Group, VerifyOptions};
use cairo_air::corpus;
use cairo_air::extract::{
    check_fn_extends, soundness_check, soundness_check_with, SemanticFailure, SoundnessOutcome,
};
use cairo_air::field::{Felt, Field, FieldConfig};
use cairo_air::fuzz::{fuzz, FuzzConfig, MutationKind};
use cairo_air::interaction::{enumerate_exceptional_set, in_exceptional_set, Sha256Oracle};
use cairo_air::isa::{next_state_relation, tilde_from_flags, Instruction, NUM_FLAGS};
use cairo_air::prove::{prove_program, verify_proof, Proof};
use cairo_air::trace::memory::{compress, cumulative_ratio};
use cairo_air::trace::range_check::rc_products;
use cairo_air::trace::{
    ColumnSet, CpuCol, ExecutionColumns, MemorySegment, PublicStatement, RcSegment, RC_BOUND,
};

fn report(n: u32, title: &str, elapsed: Duration, outcome: Result<String, String>) {
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FAIL", d.as_str()),
    };
    let line = format!("[{tag}] criterion {n} {title}: {detail} ({:.2} s)\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(d) = outcome {
        panic!("criterion {n} failed: {d}");
    }
}

fn timed(f: impl FnOnce() -> Result<String, String>) -> (Duration, Result<String, String>) {
    let t = Instant::now();
    let r = f();
    (t.elapsed(), r)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gl() -> Field {
    FieldConfig::goldilocks()
}

#[test]
fn criterion_1_roundtrip_completeness() {
    let (dt, r) = timed(|| {
        let programs = corpus::all(gl()).map_err(|e| e.to_string())?;
        ensure(programs.len() >= 5, || "corpus too small".into())?;
        let mut max_t = 0;
        for (name, p) in &programs {
            let (trace, proof) = prove_program(p, None, &Sha256Oracle).map_err(|e| format!("{name}: {e}"))?;
            max_t = max_t.max(trace.len() - 1);
            ensure(trace.len() <= 1 << 10, || format!("{name}: T = {} too large", trace.len() - 1))?;
            let verdict = verify_proof(&proof.statement, &proof.columns, &Sha256Oracle).map_err(|e| e.to_string())?;
            ensure(verdict.accepted(), || format!("{name}: {} violations", verdict.report.len()))?;
            match soundness_check(&proof.statement, &proof.columns).map_err(|e| e.to_string())? {
                SoundnessOutcome::Witness(w) => ensure(w.exec == trace, || format!("{name}: trace differs"))?,
                other => return Err(format!("{name}: {other:?}")),
            }
        }
        Ok(format!("{} programs, max T = {max_t}", programs.len()))
    });
    let r = r.and_then(|d| {
        ensure(dt < Duration::from_secs(5), || format!("took {dt:?}, budget 5 s"))?;
        Ok(d)
    });
    report(1, "roundtrip completeness", dt, r);
}

#[test]
fn criterion_2_executable_final_correctness() {
    let (dt, r) = timed(|| {
        let mut steps = 0;
        for (name, p) in corpus::all(gl()).map_err(|e| e.to_string())? {
            let (_, proof) = prove_program(&p, None, &Sha256Oracle).map_err(|e| e.to_string())?;
            let s = &proof.statement;
            let w = match soundness_check(s, &proof.columns).map_err(|e| e.to_string())? {
                SoundnessOutcome::Witness(w) => w,
                other => return Err(format!("{name}: {other:?}")),
            };
            for k in 0..w.exec.len() - 1 {
                ensure(next_state_relation(&w.memory, &w.exec[k], &w.exec[k + 1]), || {
                    format!("{name}: step {k} not a valid transition")
                })?;
                steps += 1;
            }
            ensure(check_fn_extends(&w.memory, &s.m_star), || format!("{name}: memory does not extend m*"))?;
            let (first, last) = (w.exec[0], *w.exec.last().unwrap());
            let boundary = [
                first.pc == s.initial_pc,
                first.ap == s.initial_ap,
                first.fp == s.initial_ap,
                last.pc == s.final_pc,
                last.ap == s.final_ap,
            ];
            ensure(boundary.iter().all(|&b| b), || format!("{name}: boundary {boundary:?}"))?;
        }
        Ok(format!("{steps} transitions re-validated"))
    });
    report(2, "executable final correctness", dt, r);
}

#[test]
fn criterion_3_instruction_coding_uniqueness() {
    let (dt, r) = timed(|| {
        let f = gl();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = HashSet::new();
        let mut words = HashSet::new();
        for _ in 0..100_000 {
            let i = Instruction::new(rng.gen(), rng.gen(), rng.gen(), rng.gen_range(0..1 << 15)).unwrap();
            let w = i.encode();
            ensure(Instruction::decode(w) == Ok(i), || format!("decode(encode({i:?})) differs"))?;
            let t = tilde_from_flags(f, i.flags());
            ensure(t[NUM_FLAGS].is_zero(), || "f~_15 != 0".into())?;
            for k in 0..NUM_FLAGS {
                let b = t[k] - f.elem(2) * t[k + 1];
                ensure(b.is_zero() || b.is_one(), || format!("flag {k} = {b}"))?;
            }
            seen.insert(i);
            words.insert(w);
        }
        ensure(seen.len() == words.len(), || format!("{} instructions, {} words", seen.len(), words.len()))?;
        Ok(format!("{} distinct instructions, no collisions", seen.len()))
    });
    report(3, "instruction-coding uniqueness", dt, r);
}

#[test]
fn criterion_4_soundness_fuzz() {
    let (dt, r) = timed(|| {
        let p = corpus::build("fibonacci", gl()).unwrap().map_err(|e| e.to_string())?;
        let (_, proof) = prove_program(&p, None, &Sha256Oracle).map_err(|e| e.to_string())?;
        let cfg = FuzzConfig { seed: 2024, iterations: 1000, kind: MutationKind::Committed };
        let s = fuzz(&proof.statement, &proof.columns, &Sha256Oracle, &cfg).map_err(|e| e.to_string())?;
        ensure(s.iterations == 1000, || "wrong iteration count".into())?;
        ensure(s.semantic_failure == 0, || format!("{} semantic failures: {:?}", s.semantic_failure, s.failures))?;
        Ok(format!(
            "fibonacci, 1000 mutations: caught {}, witness still valid {}, degenerate {}, semantic failure 0",
            s.caught, s.witness_valid, s.degenerate
        ))
    });
    let r = r.and_then(|d| {
        ensure(dt < Duration::from_secs(60), || format!("took {dt:?}, budget 60 s"))?;
        Ok(d)
    });
    report(4, "soundness fuzz", dt, r);
}

/// Exceptional-set oracle in plain integer arithmetic.
fn products_mod(a: &[u64], b: &[u64], z: u64, p: u64) -> (u64, u64) {
    let pr = |xs: &[u64]| xs.iter().fold(1u64, |acc, &x| acc * ((z + p - x) % p) % p);
    (pr(a), pr(b))
}

#[test]
fn criterion_5_exceptional_set_bounds() {
    let (dt, r) = timed(|| {
        let p = 8191u64;
        let f = FieldConfig::from_u64(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut max_ratio = (0, 1);
        for sample in 0..200 {
            let n = rng.gen_range(1..=16);
            let a: Vec<u64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            let b: Vec<u64> = match sample % 3 {
                // a permutation of a
                0 => {
                    let mut b = a.clone();
                    for k in (1..n).rev() {
                        b.swap(k, rng.gen_range(0..=k));
                    }
                    b
                }
                // one entry changed
                1 => {
                    let mut b = a.clone();
                    let k = rng.gen_range(0..n);
                    b[k] = (b[k] + rng.gen_range(1..p)) % p;
                    b
                }
                _ => (0..n).map(|_| rng.gen_range(0..p)).collect(),
            };
            let fa: Vec<Felt> = a.iter().map(|&x| f.elem(x)).collect();
            let fb: Vec<Felt> = b.iter().map(|&x| f.elem(x)).collect();
            let set = enumerate_exceptional_set(f, &fa, &fb).map_err(|e| e.to_string())?;
            let (mut sa, mut sb) = (a.clone(), b.clone());
            sa.sort_unstable();
            sb.sort_unstable();
            let equal = sa == sb;
            ensure(set.len() <= n, || format!("sample {sample}: {} > n = {n}", set.len()))?;
            ensure(!equal || set.is_empty(), || format!("sample {sample}: equal multisets, nonempty set"))?;
            if set.len() * max_ratio.1 > max_ratio.0 * n {
                max_ratio = (set.len(), n);
            }
            for z in 0..p {
                let (pa, pb) = products_mod(&a, &b, z, p);
                let member = set.contains(&f.elem(z));
                if pa == pb && !member {
                    ensure(equal, || format!("sample {sample}: transfer fails at z = {z}"))?;
                }
                ensure(member == (pa == pb && !equal), || format!("sample {sample}: membership wrong at z = {z}"))?;
            }
        }
        Ok(format!("200 samples, largest |set| / n = {}/{}", max_ratio.0, max_ratio.1))
    });
    report(5, "exceptional-set bounds", dt, r);
}

#[test]
fn criterion_6_range_check_soundness() {
    let (dt, r) = timed(|| {
        let f = gl();
        let p = corpus::build("fibonacci", f).unwrap().map_err(|e| e.to_string())?;
        let (_, honest) = prove_program(&p, None, &Sha256Oracle).map_err(|e| e.to_string())?;
        let out = f.elem(RC_BOUND);
        let rc_or_continuity = |pr: &Proof| -> Result<usize, String> {
            let r = verify_all(&pr.statement, &pr.columns).map_err(|e| e.to_string())?;
            Ok(r.violations.iter().filter(|v| v.group == Group::Rc16 || v.name == "continuity").count())
        };

        // the cell alone
        let mut a = honest.clone();
        a.columns.cpu.set(CpuCol::OFF_OP1, 5, out);
        let n_a = rc_or_continuity(&a)?;
        ensure(n_a > 0, || "plain injection not caught".into())?;

        // the value also placed in the pool, sorted segment and products rebuilt
        let mut b = a.clone();
        let r = &mut b.columns.range_check;
        r.pool[3 * 5 + 2] = out;
        let mut sorted = r.pool.clone();
        sorted.sort();
        r.sorted = sorted;
        r.prod = rc_products(&r.pool, &r.sorted, b.statement.z_rc).map_err(|e| e.to_string())?;
        let n_b = rc_or_continuity(&b)?;
        ensure(n_b > 0, || "consistent pool injection not caught".into())?;

        let mut c = honest.clone();
        c.statement.rc_min = c.statement.rc_min.wrapping_sub(1);
        let rc = verify_all(&c.statement, &c.columns).map_err(|e| e.to_string())?;
        ensure(rc.contains(Group::Rc16, "min"), || "a'_0 != rc_min not caught".into())?;
        let mut d = honest.clone();
        d.statement.rc_max -= 1;
        let rd = verify_all(&d.statement, &d.columns).map_err(|e| e.to_string())?;
        ensure(rd.contains(Group::Rc16, "max"), || "a'_last != rc_max not caught".into())?;
        Ok(format!("injection caught by {n_a} / {n_b} rc16 or continuity violations; min and max boundaries fire"))
    });
    report(6, "range-check soundness", dt, r);
}

#[test]
fn criterion_7_public_memory_identity() {
    let (dt, r) = timed(|| {
        let f = gl();
        let base = corpus::build("fibonacci", f).unwrap().map_err(|e| e.to_string())?;
        let (_, full) = prove_program(&base, None, &Sha256Oracle).map_err(|e| e.to_string())?;
        let mut accessed: Vec<Felt> = full.columns.memory.a[..4 * full.columns.cpu.rows()].to_vec();
        accessed.sort();
        accessed.dedup();
        for k in [0usize, 1, 3, 8] {
            let mut p = base.clone();
            p.m_star = accessed[..k].iter().map(|&a| (a, p.memory.as_map()[&a])).collect();
            let (_, pr) = prove_program(&p, None, &Sha256Oracle).map_err(|e| e.to_string())?;
            let s = &pr.statement;
            ensure(s.m_star.len() == k, || "wrong m* size".into())?;
            let last = *pr.columns.memory.prod.last().unwrap();
            let mut lhs = last;
            for (&a, &v) in &s.m_star {
                lhs *= s.z_mem - (a + s.alpha * v);
            }
            let rhs = (0..k).fold(f.one(), |acc, _| acc * s.z_mem);
            ensure(lhs == rhs, || format!("|m*| = {k}: {lhs} != {rhs}"))?;
            ensure(verify_all(s, &pr.columns).map_err(|e| e.to_string())?.is_empty(), || format!("|m*| = {k}: report"))?;
        }
        Ok("identity exact for |dom m*| in {0, 1, 3, 8}".into())
    });
    report(7, "public-memory identity", dt, r);
}

#[test]
fn criterion_8_degree_meta_check() {
    let (dt, r) = timed(|| {
        let mut by_group: BTreeMap<&str, usize> = BTreeMap::new();
        for c in registry() {
            ensure(c.expr.degree() <= 2, || format!("{}.{} has degree {}", c.group.name(), c.name, c.expr.degree()))?;
            *by_group.entry(c.group.name()).or_default() += 1;
        }
        ensure(by_group.len() == 8, || format!("{} groups registered", by_group.len()))?;
        // the checker itself sees a cubic
        let x = cairo_air::constraints::expr::cpu(CpuCol::PC);
        let cubic: Expr = x.clone() * x.clone() * x;
        ensure(cubic.degree() == 3, || "degree checker misses cubics".into())?;
        Ok(format!("{} constraints over 8 groups, all degree <= 2", registry().len()))
    });
    report(8, "degree meta-check", dt, r);
}

/// Columns over a small field with one CPU row and four memory rows: the
/// unsorted pairs `(i, x_i)` and sorted pairs `(i, y_i)` differ, yet the
/// grand product closes because `z_mem` sits in the exceptional set of the
/// compressed sequences.
fn bad_set_instance(seed: u64) -> Option<(PublicStatement, ColumnSet, Felt)> {
    let f = FieldConfig::from_u64(8191).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let addr: Vec<Felt> = (0..4).map(|i| f.elem(100 + i)).collect();
    let x: Vec<Felt> = (0..4).map(|_| f.elem(rng.gen_range(0..8191))).collect();
    let y: Vec<Felt> = (0..4).map(|_| f.elem(rng.gen_range(0..8191))).collect();
    if x == y {
        return None;
    }
    let alpha = f.elem(rng.gen_range(1..8191));
    let c = compress(&addr, &x, alpha);
    let c2 = compress(&addr, &y, alpha);
    let set = enumerate_exceptional_set(f, &c, &c2).ok()?;
    let z = set.into_iter().find(|z| !z.is_zero() && !c2.contains(z))?;
    let prod = cumulative_ratio(&c, &c2, z, "memory").ok()?;

    let mut cpu = ExecutionColumns::zeroed(f, 1);
    let off = f.elem(1 << 15);
    for col in CpuCol::OFFSETS {
        cpu.set(col, 0, off);
    }
    cpu.set(CpuCol::PC, 0, f.elem(100));
    cpu.set(CpuCol::AP, 0, f.elem(200));
    cpu.set(CpuCol::FP, 0, f.elem(200));
    let pool = vec![off; 3];
    let z_rc = f.elem(7);
    let rc_prod = rc_products(&pool, &pool, z_rc).ok()?;
    let cols = ColumnSet {
        cpu,
        memory: MemorySegment { a: addr.clone(), v: x, a_sorted: addr, v_sorted: y, prod },
        range_check: RcSegment { pool: pool.clone(), sorted: pool, prod: rc_prod, rc_min: 1 << 15, rc_max: 1 << 15 },
    };
    let stmt = PublicStatement {
        field: f,
        trace_length: 16,
        initial_pc: f.elem(100),
        initial_ap: f.elem(200),
        final_pc: f.elem(100),
        final_ap: f.elem(200),
        m_star: BTreeMap::new(),
        rc_min: 1 << 15,
        rc_max: 1 << 15,
        alpha,
        z_mem: z,
        z_rc,
        public_memory_prod: f.one(),
    };
    Some((stmt, cols, z))
}

#[test]
fn criterion_9_bad_set_counterexample() {
    let (dt, r) = timed(|| {
        let (stmt, cols, z) = (0..10_000u64)
            .find_map(bad_set_instance)
            .ok_or_else(|| "no exceptional challenge found".to_string())?;
        let m = &cols.memory;
        let c = compress(&m.a, &m.v, stmt.alpha);
        let c2 = compress(&m.a_sorted, &m.v_sorted, stmt.alpha);
        ensure(in_exceptional_set(&c, &c2, z).map_err(|e| e.to_string())?, || "z not exceptional".into())?;
        // instruction decoding cannot be hosted by a 13-bit field
        let opts = VerifyOptions::only(&[Group::Memory, Group::Rc16, Group::PublicMemory]);
        match soundness_check_with(&stmt, &cols, &opts).map_err(|e| e.to_string())? {
            SoundnessOutcome::SemanticFailure(e @ SemanticFailure::AccessMismatch { .. }) => {
                Ok(format!("z_mem = {z} in the exceptional set: empty memory/rc report, extraction fails ({e})"))
            }
            other => Err(format!("expected an access-consistency failure, got {other:?}")),
        }
    });
    report(9, "bad-set counterexample", dt, r);
}
