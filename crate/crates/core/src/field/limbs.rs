//! Fixed-width 256-bit little-endian limb arithmetic used by the field.

use std::cmp::Ordering;

pub(crate) type Limbs = [u64; 4];

pub(crate) const ZERO: Limbs = [0; 4];

#[inline]
pub(crate) fn cmp(a: &Limbs, b: &Limbs) -> Ordering {
    for i in (0..4).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

#[inline]
pub(crate) fn is_zero(a: &Limbs) -> bool {
    a.iter().all(|&x| x == 0)
}

/// `a + b`, returning the carry out of the top limb.
#[inline]
pub(crate) fn add(a: &Limbs, b: &Limbs) -> (Limbs, bool) {
    let mut out = ZERO;
    let mut carry = 0u64;
    for i in 0..4 {
        let s = a[i] as u128 + b[i] as u128 + carry as u128;
        out[i] = s as u64;
        carry = (s >> 64) as u64;
    }
    (out, carry != 0)
}

/// `a - b`, returning the borrow out of the top limb.
#[inline]
pub(crate) fn sub(a: &Limbs, b: &Limbs) -> (Limbs, bool) {
    let mut out = ZERO;
    let mut borrow = false;
    for i in 0..4 {
        let (d, b1) = a[i].overflowing_sub(b[i]);
        let (d, b2) = d.overflowing_sub(borrow as u64);
        out[i] = d;
        borrow = b1 || b2;
    }
    (out, borrow)
}

/// Modular addition of canonical inputs.
#[inline]
pub(crate) fn add_mod(a: &Limbs, b: &Limbs, p: &Limbs) -> Limbs {
    let (s, carry) = add(a, b);
    if carry || cmp(&s, p) != Ordering::Less {
        sub(&s, p).0
    } else {
        s
    }
}

/// Modular subtraction of canonical inputs.
#[inline]
pub(crate) fn sub_mod(a: &Limbs, b: &Limbs, p: &Limbs) -> Limbs {
    let (d, borrow) = sub(a, b);
    if borrow {
        add(&d, p).0
    } else {
        d
    }
}

/// Montgomery product `a * b * 2^-256 mod p` (CIOS). Requires odd `p` and
/// canonical inputs; `inv` is `-p^-1 mod 2^64`.
#[inline]
pub(crate) fn mont_mul(a: &Limbs, b: &Limbs, p: &Limbs, inv: u64) -> Limbs {
    let mut t = [0u64; 6];
    for &bi in b.iter() {
        let mut c = 0u128;
        for j in 0..4 {
            let s = t[j] as u128 + (a[j] as u128) * (bi as u128) + c;
            t[j] = s as u64;
            c = s >> 64;
        }
        let s = t[4] as u128 + c;
        t[4] = s as u64;
        t[5] = (s >> 64) as u64;

        let m = t[0].wrapping_mul(inv);
        let s = t[0] as u128 + (m as u128) * (p[0] as u128);
        let mut c = s >> 64;
        for j in 1..4 {
            let s = t[j] as u128 + (m as u128) * (p[j] as u128) + c;
            t[j - 1] = s as u64;
            c = s >> 64;
        }
        let s = t[4] as u128 + c;
        t[3] = s as u64;
        t[4] = t[5] + (s >> 64) as u64;
        t[5] = 0;
    }
    let r = [t[0], t[1], t[2], t[3]];
    if t[4] != 0 || cmp(&r, p) != Ordering::Less {
        sub(&r, p).0
    } else {
        r
    }
}

/// `-p^-1 mod 2^64` for odd `p0`.
pub(crate) fn mont_inv(p0: u64) -> u64 {
    let mut x: u64 = 1;
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(p0.wrapping_mul(x)));
    }
    x.wrapping_neg()
}

pub(crate) fn bits(a: &Limbs) -> u32 {
    for i in (0..4).rev() {
        if a[i] != 0 {
            return 64 * i as u32 + (64 - a[i].leading_zeros());
        }
    }
    0
}

#[inline]
pub(crate) fn bit(a: &Limbs, i: u32) -> bool {
    (a[(i / 64) as usize] >> (i % 64)) & 1 == 1
}

pub(crate) fn to_le_bytes(a: &Limbs) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (i, limb) in a.iter().enumerate() {
        out[8 * i..8 * i + 8].copy_from_slice(&limb.to_le_bytes());
    }
    out
}

pub(crate) fn from_le_bytes(bytes: &[u8; 32]) -> Limbs {
    let mut out = ZERO;
    for (i, limb) in out.iter_mut().enumerate() {
        let mut b = [0u8; 8];
        b.copy_from_slice(&bytes[8 * i..8 * i + 8]);
        *limb = u64::from_le_bytes(b);
    }
    out
}
