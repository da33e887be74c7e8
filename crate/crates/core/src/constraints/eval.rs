use crate::field::{Felt, Field};
use crate::trace::ColumnSet;

use super::expr::{Col, Expr, MemCol, PublicValue, RcCol};
use super::registry::{Constraint, Domain};

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(Felt),
    Var(Col, bool),
    Pub(usize),
    Add,
    Sub,
    Mul,
    Neg,
}

/// A constraint expression flattened into postfix form for one field.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
}

impl Compiled {
    pub fn new(expr: &Expr, field: Field) -> Self {
        fn go(e: &Expr, field: Field, ops: &mut Vec<Op>) {
            match e {
                Expr::Const(c) => ops.push(Op::Const(field.from_i128(*c))),
                Expr::Var(v) => ops.push(Op::Var(v.col, v.next)),
                Expr::Pub(p) => ops.push(Op::Pub(p.index())),
                Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) => {
                    go(x, field, ops);
                    go(y, field, ops);
                    ops.push(match e {
                        Expr::Add(..) => Op::Add,
                        Expr::Sub(..) => Op::Sub,
                        _ => Op::Mul,
                    });
                }
                Expr::Neg(x) => {
                    go(x, field, ops);
                    ops.push(Op::Neg);
                }
            }
        }
        let mut ops = Vec::new();
        go(expr, field, &mut ops);
        Compiled { ops }
    }

    pub fn eval(&self, w: &Window<'_>, stack: &mut Vec<Felt>) -> Felt {
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(col, next) => stack.push(w.read(col, next)),
                Op::Pub(i) => stack.push(w.publics[i]),
                Op::Neg => {
                    let x = stack.pop().expect("operand");
                    stack.push(-x);
                }
                Op::Add | Op::Sub | Op::Mul => {
                    let y = stack.pop().expect("operand");
                    let x = stack.pop().expect("operand");
                    stack.push(match op {
                        Op::Add => x + y,
                        Op::Sub => x - y,
                        _ => x * y,
                    });
                }
            }
        }
        stack.pop().expect("result")
    }
}

/// The rows one evaluation may see: one anchor row per table, plus the row
/// after it for transition constraints.
pub struct Window<'a> {
    cols: &'a ColumnSet,
    publics: &'a [Felt; PublicValue::COUNT],
    cpu: usize,
    mem: usize,
    rc: usize,
}

impl Window<'_> {
    fn read(&self, col: Col, next: bool) -> Felt {
        let d = next as usize;
        match col {
            Col::Cpu(c) => self.cols.cpu.get(c, self.cpu + d),
            Col::Mem(c) => {
                let m = &self.cols.memory;
                let r = self.mem + d;
                match c {
                    MemCol::A => m.a[r],
                    MemCol::V => m.v[r],
                    MemCol::ASorted => m.a_sorted[r],
                    MemCol::VSorted => m.v_sorted[r],
                    MemCol::Prod => m.prod[r],
                }
            }
            Col::Rc(c) => {
                let s = &self.cols.range_check;
                let r = self.rc + d;
                match c {
                    RcCol::Pool => s.pool[r],
                    RcCol::Sorted => s.sorted[r],
                    RcCol::Prod => s.prod[r],
                }
            }
        }
    }
}

/// Anchor rows `(reported, cpu, mem, rc)` of every evaluation of `domain`.
fn anchors(domain: Domain, cols: &ColumnSet, public_cells: usize) -> Vec<(usize, usize, usize, usize)> {
    let t1 = cols.cpu.rows();
    let m = cols.memory.len();
    let r = cols.range_check.len();
    match domain {
        Domain::CpuRows => (0..t1).map(|i| (i, i, 0, 0)).collect(),
        Domain::CpuTransition => (0..t1 - 1).map(|i| (i, i, 0, 0)).collect(),
        Domain::CpuFirst => vec![(0, 0, 0, 0)],
        Domain::CpuLast => vec![(t1 - 1, t1 - 1, 0, 0)],
        Domain::MemFirst => vec![(0, 0, 0, 0)],
        Domain::MemTransition => (0..m - 1).map(|i| (i, 0, i, 0)).collect(),
        Domain::MemLast => vec![(m - 1, 0, m - 1, 0)],
        Domain::RcFirst => vec![(0, 0, 0, 0)],
        Domain::RcTransition => (0..r - 1).map(|i| (i, 0, 0, i)).collect(),
        Domain::RcLast => vec![(r - 1, 0, 0, r - 1)],
        Domain::MemoryAccess(s) => (0..t1).map(|i| (i, i, 4 * i + s as usize, 0)).collect(),
        Domain::RangeCheckEmbed(s) => (0..t1).map(|i| (i, i, 0, 3 * i + s as usize)).collect(),
        Domain::PublicMemorySlots => (0..public_cells).map(|j| (4 * t1 + j, 0, 4 * t1 + j, 0)).collect(),
    }
}

/// Evaluates one constraint on all of its rows, calling `on_nonzero` with
/// `(row, lhs)` for each failure. Returns early when the callback says so.
pub fn eval_constraint(
    k: &Constraint,
    cols: &ColumnSet,
    publics: &[Felt; PublicValue::COUNT],
    public_cells: usize,
    mut on_nonzero: impl FnMut(usize, Felt) -> bool,
) {
    let compiled = Compiled::new(&k.expr, cols.cpu.field());
    let mut stack = Vec::with_capacity(16);
    for (row, cpu, mem, rc) in anchors(k.domain, cols, public_cells) {
        let w = Window { cols, publics, cpu, mem, rc };
        let v = compiled.eval(&w, &mut stack);
        if !v.is_zero() && on_nonzero(row, v) {
            return;
        }
    }
}
