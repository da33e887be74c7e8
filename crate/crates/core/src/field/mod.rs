//! Prime-field arithmetic with a modulus chosen at runtime.
//!
//! A [`FieldConfig`] is created once per modulus and interned for the life of
//! the process, so a [`Felt`] can carry a `&'static` reference to its field
//! and stay `Copy`. Moduli up to 256 bits are supported; values are always
//! kept in canonical form `0 <= value < modulus`.

mod limbs;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use limbs::Limbs;

/// `2^64 - 2^32 + 1`.
pub const GOLDILOCKS_MODULUS: u64 = 0xffff_ffff_0000_0001;

/// Decimal form of `2^251 + 17 * 2^192 + 1`, the Cairo production prime.
pub const CAIRO_PRIME_DECIMAL: &str =
    "3618502788666131213697322783095070105623107215331596699973092056135872020481";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not an odd prime")]
    NotPrime(String),
    #[error("modulus {0} does not fit in 256 bits")]
    ModulusTooLarge(String),
    #[error("operands belong to different fields ({0} vs {1})")]
    Mismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid field element literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
}

/// Parameters of one prime field. Obtain instances through
/// [`FieldConfig::new`], [`FieldConfig::goldilocks`] or [`FieldConfig::cairo`].
pub struct FieldConfig {
    modulus: Limbs,
    modulus_big: BigUint,
    /// `2^512 mod p`, for converting into Montgomery form.
    r2: Limbs,
    /// `2^256 mod p`, one in Montgomery form.
    r1: Limbs,
    inv: u64,
}

/// Handle to an interned field.
pub type Field = &'static FieldConfig;

static REGISTRY: OnceLock<Mutex<Vec<Field>>> = OnceLock::new();

impl FieldConfig {
    /// Interns the field of the given prime modulus. The modulus is checked
    /// with a Miller-Rabin test over a fixed base set, which is exact for
    /// moduli below 3.3e24 and a strong probable-prime test beyond.
    pub fn new(modulus: &BigUint) -> Result<Field, FieldError> {
        if modulus.bits() > 256 {
            return Err(FieldError::ModulusTooLarge(modulus.to_string()));
        }
        let registry = REGISTRY.get_or_init(|| Mutex::new(Vec::new()));
        let mut guard = registry.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = guard.iter().find(|f| &f.modulus_big == modulus) {
            return Ok(f);
        }
        if !is_probable_prime(modulus) || modulus == &BigUint::from(2u32) {
            return Err(FieldError::NotPrime(modulus.to_string()));
        }
        let p = biguint_to_limbs(modulus);
        let r1 = biguint_to_limbs(&((BigUint::one() << 256u32) % modulus));
        let r2 = biguint_to_limbs(&((BigUint::one() << 512u32) % modulus));
        let cfg: Field = Box::leak(Box::new(FieldConfig {
            modulus: p,
            modulus_big: modulus.clone(),
            r2,
            r1,
            inv: limbs::mont_inv(p[0]),
        }));
        guard.push(cfg);
        Ok(cfg)
    }

    pub fn from_u64(modulus: u64) -> Result<Field, FieldError> {
        Self::new(&BigUint::from(modulus))
    }

    pub fn goldilocks() -> Field {
        static F: OnceLock<Field> = OnceLock::new();
        F.get_or_init(|| Self::from_u64(GOLDILOCKS_MODULUS).expect("goldilocks is prime"))
    }

    pub fn cairo() -> Field {
        static F: OnceLock<Field> = OnceLock::new();
        F.get_or_init(|| {
            let p: BigUint = CAIRO_PRIME_DECIMAL.parse().expect("valid literal");
            Self::new(&p).expect("cairo prime is prime")
        })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus_big
    }

    /// Whether the characteristic exceeds `2^63`, i.e. every instruction word
    /// has a unique representative in the field.
    pub fn hosts_instructions(&self) -> bool {
        self.modulus_big > (BigUint::one() << 63u32)
    }

    /// Compares `p` against a machine integer; `None` if `p` does not fit.
    pub fn modulus_u64(&self) -> Option<u64> {
        self.modulus_big.to_u64()
    }

    pub fn zero(&'static self) -> Felt {
        Felt { value: limbs::ZERO, field: self }
    }

    pub fn one(&'static self) -> Felt {
        self.elem(1)
    }

    pub fn elem(&'static self, n: u64) -> Felt {
        self.reduce([n, 0, 0, 0])
    }

    /// Casts a signed integer; negative inputs map to `p - (|n| mod p)`.
    pub fn from_i128(&'static self, n: i128) -> Felt {
        let mag = n.unsigned_abs();
        let x = self.reduce([mag as u64, (mag >> 64) as u64, 0, 0]);
        if n < 0 {
            -x
        } else {
            x
        }
    }

    pub fn from_i64(&'static self, n: i64) -> Felt {
        self.from_i128(n as i128)
    }

    pub fn from_biguint(&'static self, n: &BigUint) -> Felt {
        let r = n % &self.modulus_big;
        Felt { value: biguint_to_limbs(&r), field: self }
    }

    pub fn from_bigint(&'static self, n: &BigInt) -> Felt {
        let x = self.from_biguint(n.magnitude());
        if n.sign() == Sign::Minus {
            -x
        } else {
            x
        }
    }

    /// Reduces a 256-bit little-endian byte string modulo `p`.
    pub fn from_le_bytes_reduced(&'static self, bytes: &[u8; 32]) -> Felt {
        self.from_biguint(&BigUint::from_bytes_le(bytes))
    }

    /// Parses the canonical decimal form. Values `>= p` are rejected.
    pub fn parse(&'static self, s: &str) -> Result<Felt, FieldError> {
        let err = |reason: &str| FieldError::Parse { literal: s.to_string(), reason: reason.to_string() };
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("expected a non-negative decimal integer"));
        }
        let n: BigUint = s.parse().map_err(|_| err("expected a non-negative decimal integer"))?;
        if n >= self.modulus_big {
            return Err(err("not below the modulus"));
        }
        Ok(self.from_biguint(&n))
    }

    fn reduce(&'static self, mut v: Limbs) -> Felt {
        if limbs::cmp(&v, &self.modulus) != Ordering::Less {
            // multiplying by R2 in Montgomery form reduces any 256-bit input
            v = limbs::mont_mul(&v, &self.r2, &self.modulus, self.inv);
            v = limbs::mont_mul(&v, &[1, 0, 0, 0], &self.modulus, self.inv);
        }
        Felt { value: v, field: self }
    }

    /// Inverts every element in place with a single field inversion.
    pub fn batch_inverse(&'static self, xs: &mut [Felt]) -> Result<(), FieldError> {
        let mut prefix = Vec::with_capacity(xs.len());
        let mut acc = self.one();
        for x in xs.iter() {
            if x.is_zero() {
                return Err(FieldError::DivisionByZero);
            }
            prefix.push(acc);
            acc = acc * *x;
        }
        let mut inv = acc.inverse()?;
        for (x, before) in xs.iter_mut().zip(prefix).rev() {
            let next = inv * *x;
            *x = inv * before;
            inv = next;
        }
        Ok(())
    }
}

/// Fields are interned, so equal moduli share one instance.
impl PartialEq for FieldConfig {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }
}

impl Eq for FieldConfig {}

impl fmt::Debug for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldConfig(p = {})", self.modulus_big)
    }
}

/// An element of a prime field, stored canonically.
#[derive(Clone, Copy)]
pub struct Felt {
    value: Limbs,
    field: Field,
}

impl Felt {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        limbs::is_zero(&self.value)
    }

    pub fn is_one(&self) -> bool {
        self.value == [1, 0, 0, 0]
    }

    /// The canonical representative, if it fits in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        (self.value[1..].iter().all(|&l| l == 0)).then_some(self.value[0])
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_le(&limbs::to_le_bytes(&self.value))
    }

    pub fn to_le_bytes(&self) -> [u8; 32] {
        limbs::to_le_bytes(&self.value)
    }

    pub fn from_le_bytes(field: Field, bytes: &[u8; 32]) -> Result<Felt, FieldError> {
        let value = limbs::from_le_bytes(bytes);
        if limbs::cmp(&value, &field.modulus) != Ordering::Less {
            return Err(FieldError::Parse {
                literal: format!("{:02x?}", bytes),
                reason: "not below the modulus".into(),
            });
        }
        Ok(Felt { value, field })
    }

    fn check_same(&self, other: &Felt) -> Result<(), FieldError> {
        if std::ptr::eq(self.field, other.field) {
            Ok(())
        } else {
            Err(FieldError::Mismatch(
                self.field.modulus_big.to_string(),
                other.field.modulus_big.to_string(),
            ))
        }
    }

    pub fn try_add(self, rhs: Felt) -> Result<Felt, FieldError> {
        self.check_same(&rhs)?;
        Ok(Felt { value: limbs::add_mod(&self.value, &rhs.value, &self.field.modulus), field: self.field })
    }

    pub fn try_sub(self, rhs: Felt) -> Result<Felt, FieldError> {
        self.check_same(&rhs)?;
        Ok(Felt { value: limbs::sub_mod(&self.value, &rhs.value, &self.field.modulus), field: self.field })
    }

    pub fn try_mul(self, rhs: Felt) -> Result<Felt, FieldError> {
        self.check_same(&rhs)?;
        let f = self.field;
        let t = limbs::mont_mul(&self.value, &rhs.value, &f.modulus, f.inv);
        Ok(Felt { value: limbs::mont_mul(&t, &f.r2, &f.modulus, f.inv), field: f })
    }

    pub fn square(self) -> Felt {
        self * self
    }

    pub fn pow(self, exp: &BigUint) -> Felt {
        let f = self.field;
        let exp = biguint_to_limbs(exp);
        let base = limbs::mont_mul(&self.value, &f.r2, &f.modulus, f.inv);
        let mut acc = f.r1;
        for i in (0..limbs::bits(&exp)).rev() {
            acc = limbs::mont_mul(&acc, &acc, &f.modulus, f.inv);
            if limbs::bit(&exp, i) {
                acc = limbs::mont_mul(&acc, &base, &f.modulus, f.inv);
            }
        }
        let value = limbs::mont_mul(&acc, &[1, 0, 0, 0], &f.modulus, f.inv);
        Felt { value, field: f }
    }

    pub fn pow_u64(self, exp: u64) -> Felt {
        self.pow(&BigUint::from(exp))
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inverse(self) -> Result<Felt, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let e = &self.field.modulus_big - 2u32;
        Ok(self.pow(&e))
    }

    pub fn try_div(self, rhs: Felt) -> Result<Felt, FieldError> {
        self.check_same(&rhs)?;
        Ok(self * rhs.inverse()?)
    }
}

impl PartialEq for Felt {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && std::ptr::eq(self.field, other.field)
    }
}

impl Eq for Felt {}

impl Hash for Felt {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

/// Orders by canonical representative. Fields are unordered; this exists so
/// addresses can be sorted and used as map keys.
impl PartialOrd for Felt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Felt {
    fn cmp(&self, other: &Self) -> Ordering {
        limbs::cmp(&self.value, &other.value)
    }
}

impl fmt::Display for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "{}", self.to_biguint()),
        }
    }
}

impl fmt::Debug for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Felt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident, $assign_trait:ident, $assign:ident) => {
        impl $trait for Felt {
            type Output = Felt;
            #[inline]
            fn $method(self, rhs: Felt) -> Felt {
                match self.$try(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $assign_trait for Felt {
            #[inline]
            fn $assign(&mut self, rhs: Felt) {
                *self = $trait::$method(*self, rhs);
            }
        }
    };
}

binop!(Add, add, try_add, AddAssign, add_assign);
binop!(Sub, sub, try_sub, SubAssign, sub_assign);
binop!(Mul, mul, try_mul, MulAssign, mul_assign);

impl Neg for Felt {
    type Output = Felt;
    fn neg(self) -> Felt {
        self.field.zero() - self
    }
}

impl Sum for Felt {
    /// Panics on an empty iterator, which has no field to sum in.
    fn sum<I: Iterator<Item = Felt>>(mut iter: I) -> Felt {
        let first = iter.next().expect("sum of an empty Felt iterator");
        iter.fold(first, |a, b| a + b)
    }
}

impl Product for Felt {
    fn product<I: Iterator<Item = Felt>>(mut iter: I) -> Felt {
        let first = iter.next().expect("product of an empty Felt iterator");
        iter.fold(first, |a, b| a * b)
    }
}

fn biguint_to_limbs(n: &BigUint) -> Limbs {
    let mut out = limbs::ZERO;
    for (i, d) in n.iter_u64_digits().take(4).enumerate() {
        out[i] = d;
    }
    out
}

const MR_BASES: [u32; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for &b in MR_BASES.iter() {
        let b = BigUint::from(b);
        if n == &b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'bases: for &b in MR_BASES.iter() {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}
