//! Symbolic constraint expressions over column variables.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::isa::instruction::Flag;
use crate::trace::CpuCol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table {
    Cpu,
    Mem,
    Rc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemCol {
    A,
    V,
    ASorted,
    VSorted,
    Prod,
}

impl MemCol {
    pub fn name(self) -> &'static str {
        match self {
            MemCol::A => "a",
            MemCol::V => "v",
            MemCol::ASorted => "a_sorted",
            MemCol::VSorted => "v_sorted",
            MemCol::Prod => "prod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RcCol {
    Pool,
    Sorted,
    Prod,
}

impl RcCol {
    pub fn name(self) -> &'static str {
        match self {
            RcCol::Pool => "pool",
            RcCol::Sorted => "sorted",
            RcCol::Prod => "prod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Col {
    Cpu(CpuCol),
    Mem(MemCol),
    Rc(RcCol),
}

impl Col {
    pub fn table(self) -> Table {
        match self {
            Col::Cpu(_) => Table::Cpu,
            Col::Mem(_) => Table::Mem,
            Col::Rc(_) => Table::Rc,
        }
    }
}

/// A column read at the current row or the next one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub col: Col,
    pub next: bool,
}

/// Values fixed by the public statement; degree 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PublicValue {
    Alpha,
    ZMem,
    ZRc,
    RcMin,
    RcMax,
    InitialPc,
    InitialAp,
    FinalPc,
    FinalAp,
    PublicMemoryProd,
    /// `z_mem^{|dom m*|}`
    ZMemPowK,
}

impl PublicValue {
    pub const COUNT: usize = 11;

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(i128),
    Var(Var),
    Pub(PublicValue),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    /// Total degree in column variables.
    pub fn degree(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Pub(_) => 0,
            Expr::Var(_) => 1,
            Expr::Add(x, y) | Expr::Sub(x, y) => x.degree().max(y.degree()),
            Expr::Mul(x, y) => x.degree() + y.degree(),
            Expr::Neg(x) => x.degree(),
        }
    }

    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) | Expr::Pub(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) => {
                x.visit_vars(f);
                y.visit_vars(f);
            }
            Expr::Neg(x) => x.visit_vars(f),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v| out.push(v));
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => {
                let name = match v.col {
                    Col::Cpu(c) => c.name(),
                    Col::Mem(c) => format!("mem.{}", c.name()),
                    Col::Rc(c) => format!("rc.{}", c.name()),
                };
                write!(f, "{name}{}", if v.next { "'" } else { "" })
            }
            Expr::Pub(p) => write!(f, "{p:?}"),
            Expr::Add(x, y) => write!(f, "({x} + {y})"),
            Expr::Sub(x, y) => write!(f, "({x} - {y})"),
            Expr::Mul(x, y) => write!(f, "{x} * {y}"),
            Expr::Neg(x) => write!(f, "-{x}"),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $v:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(self), Box::new(rhs))
            }
        }
        impl $tr<i128> for Expr {
            type Output = Expr;
            fn $m(self, rhs: i128) -> Expr {
                Expr::$v(Box::new(self), Box::new(Expr::Const(rhs)))
            }
        }
        impl $tr<Expr> for i128 {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$v(Box::new(Expr::Const(self)), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

pub fn cpu(c: CpuCol) -> Expr {
    Expr::Var(Var { col: Col::Cpu(c), next: false })
}

pub fn cpu_next(c: CpuCol) -> Expr {
    Expr::Var(Var { col: Col::Cpu(c), next: true })
}

pub fn mem(c: MemCol) -> Expr {
    Expr::Var(Var { col: Col::Mem(c), next: false })
}

pub fn mem_next(c: MemCol) -> Expr {
    Expr::Var(Var { col: Col::Mem(c), next: true })
}

pub fn rc(c: RcCol) -> Expr {
    Expr::Var(Var { col: Col::Rc(c), next: false })
}

pub fn rc_next(c: RcCol) -> Expr {
    Expr::Var(Var { col: Col::Rc(c), next: true })
}

pub fn public(p: PublicValue) -> Expr {
    Expr::Pub(p)
}

/// `f~_i - 2 f~_{i+1}`
pub fn flag(f: Flag) -> Expr {
    let i = f.index();
    cpu(CpuCol::f_tilde(i)) - 2 * cpu(CpuCol::f_tilde(i + 1))
}
