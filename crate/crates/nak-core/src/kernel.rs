//! Digit-array arithmetic shared by both characteristics.
//!
//! Arrays are little-endian residue digits. `carry` selects base-p integer
//! arithmetic (ℚ_p); without it digits are coefficients of a polynomial over 𝔽_p.

use crate::{fft, gf2};

const FFT_THRESHOLD: usize = 200;

fn get(a: &[u32], i: usize) -> u32 {
    a.get(i).copied().unwrap_or(0)
}

pub(crate) fn add(a: &[u32], b: &[u32], p: u32, carry: bool, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    let mut c = 0u32;
    for i in 0..len {
        let s = get(a, i) as u64 + get(b, i) as u64 + c as u64;
        if carry {
            c = (s / p as u64) as u32;
            out.push((s % p as u64) as u32);
        } else {
            out.push((s % p as u64) as u32);
        }
    }
    out
}

pub(crate) fn neg(a: &[u32], p: u32, carry: bool, len: usize) -> Vec<u32> {
    if !carry {
        return (0..len).map(|i| (p - get(a, i)) % p).collect();
    }
    let mut out = Vec::with_capacity(len);
    let mut seen = false;
    for i in 0..len {
        let d = get(a, i);
        if seen {
            out.push(p - 1 - d);
        } else if d != 0 {
            seen = true;
            out.push(p - d);
        } else {
            out.push(0);
        }
    }
    out
}

pub(crate) fn sub(a: &[u32], b: &[u32], p: u32, carry: bool, len: usize) -> Vec<u32> {
    add(a, &neg(b, p, carry, len), p, carry, len)
}

/// Product truncated to `len` digits.
pub(crate) fn mul(a: &[u32], b: &[u32], p: u32, carry: bool, len: usize) -> Vec<u32> {
    let a = &a[..a.len().min(len)];
    let b = &b[..b.len().min(len)];
    if a.len().min(b.len()) < FFT_THRESHOLD {
        return school(a, b, p, carry, len);
    }
    if !carry && p == 2 {
        let prod = gf2::mul(&gf2::pack(a), &gf2::pack(b));
        return gf2::unpack(&prod, len);
    }
    if carry {
        mul_fft_carry(a, b, p, len).unwrap_or_else(|| school(a, b, p, carry, len))
    } else {
        mul_fft_poly(a, b, p, len).unwrap_or_else(|| school(a, b, p, carry, len))
    }
}

fn school(a: &[u32], b: &[u32], p: u32, carry: bool, len: usize) -> Vec<u32> {
    let mut acc = vec![0u64; len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len.saturating_sub(i)) {
            acc[i + j] += x as u64 * y as u64;
        }
    }
    finish(acc, p as u64, carry)
}

fn finish(acc: Vec<u64>, p: u64, carry: bool) -> Vec<u32> {
    if !carry {
        return acc.into_iter().map(|v| (v % p) as u32).collect();
    }
    let mut c: u128 = 0;
    acc.into_iter()
        .map(|v| {
            let s = v as u128 + c;
            c = s / p as u128;
            (s % p as u128) as u32
        })
        .collect()
}

fn mul_fft_poly(a: &[u32], b: &[u32], p: u32, len: usize) -> Option<Vec<u32>> {
    let bound = (p as f64 - 1.0).powi(2) * a.len().min(b.len()) as f64;
    if bound > 2f64.powi(46) {
        return None;
    }
    let a: Vec<u64> = a.iter().map(|&v| v as u64).collect();
    let b: Vec<u64> = b.iter().map(|&v| v as u64).collect();
    let c = fft::convolve(&a, &b, len)?;
    Some(finish(c, p as u64, false))
}

/// Digits per limb for a base-p FFT product of operands with `n` digits.
pub(crate) fn limb_digits(p: u32, n: usize) -> usize {
    let mut k = 1usize;
    loop {
        let next = k + 1;
        let base = (p as f64).powi(next as i32);
        let limbs = n.div_ceil(next) as f64;
        if base * base * limbs >= 2f64.powi(46) || base >= 2f64.powi(24) {
            return k;
        }
        k = next;
    }
}

pub(crate) fn to_limbs(d: &[u32], p: u32, k: usize) -> Vec<u64> {
    d.chunks(k)
        .map(|c| c.iter().rev().fold(0u64, |acc, &x| acc * p as u64 + x as u64))
        .collect()
}

/// Division by a fixed small modulus for operands below 2^52, through an `f64` estimate.
#[derive(Clone, Copy)]
pub(crate) struct DivP {
    p: u64,
    inv: f64,
}

impl DivP {
    pub(crate) fn new(p: u64) -> Self {
        DivP { p, inv: 1.0 / p as f64 }
    }

    #[inline]
    pub(crate) fn divrem(&self, v: u64) -> (u64, u64) {
        debug_assert!(v < 1 << 52);
        let q = (v as f64 * self.inv) as u64;
        let r = v as i64 - (q * self.p) as i64;
        if r < 0 {
            (q - 1, (r + self.p as i64) as u64)
        } else if r >= self.p as i64 {
            (q + 1, r as u64 - self.p)
        } else {
            (q, r as u64)
        }
    }
}

pub(crate) fn from_limbs(l: &[u64], p: u32, k: usize, len: usize) -> Vec<u32> {
    let div = DivP::new(p as u64);
    let mut out = Vec::with_capacity(len);
    'outer: for &limb in l {
        let mut v = limb;
        for _ in 0..k {
            if out.len() == len {
                break 'outer;
            }
            let (q, r) = div.divrem(v);
            out.push(r as u32);
            v = q;
        }
    }
    out.resize(len, 0);
    out
}

fn mul_fft_carry(a: &[u32], b: &[u32], p: u32, len: usize) -> Option<Vec<u32>> {
    let k = limb_digits(p, a.len().max(b.len()));
    let base = (p as u64).pow(k as u32);
    let la = to_limbs(a, p, k);
    let lb = to_limbs(b, p, k);
    let nl = len.div_ceil(k);
    let c = fft::convolve(&la, &lb, nl)?;
    let mut carry: u128 = 0;
    let limbs: Vec<u64> = c
        .into_iter()
        .map(|v| {
            let s = v as u128 + carry;
            carry = s / base as u128;
            (s % base as u128) as u64
        })
        .collect();
    Some(from_limbs(&limbs, p, k, len))
}

/// Inverse of a unit (`a[0] != 0`) modulo π^len.
pub(crate) fn inv(a: &[u32], p: u32, carry: bool, len: usize) -> Vec<u32> {
    let a0 = get(a, 0);
    debug_assert!(a0 != 0);
    let mut y = vec![inv_mod(a0, p)];
    let mut prec = 1;
    while prec < len {
        prec = (2 * prec).min(len);
        // y <- y + y (1 - a y)
        let ay = mul(a, &y, p, carry, prec);
        let one = one_digits(prec);
        let e = sub(&one, &ay, p, carry, prec);
        let ye = mul(&y, &e, p, carry, prec);
        y = add(&y, &ye, p, carry, prec);
    }
    y.truncate(len);
    y.resize(len, 0);
    y
}

fn one_digits(len: usize) -> Vec<u32> {
    let mut v = vec![0; len];
    if len > 0 {
        v[0] = 1;
    }
    v
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    let a = a % p;
    // p is prime, so a^(p-2) is the inverse
    pow_mod(a as u64, p as u64 - 2, p as u64) as u32
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}
