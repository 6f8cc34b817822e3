//! Truncated π-adic expansions over ℚ_p and 𝔽_p((t)).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel;
use crate::measures::Disk;
use crate::Rational;

/// Extra digits carried by internal computations.
pub const GUARD_DIGITS: i64 = 8;

/// Largest supported prime.
pub const MAX_PRIME: u32 = 65521;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Characteristic {
    Zero,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimeElement {
    Numeral(u32),
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FieldSpecJson", into = "FieldSpecJson")]
pub struct FieldSpec {
    characteristic: Characteristic,
    p: u32,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// `characteristic` is 0 or p; `q` and `e` must be p and 1.
    pub fn new(characteristic: u32, p: u32, q: u32, e: u32) -> Result<Self> {
        if !is_prime(p as u64) || p > MAX_PRIME {
            return invalid(format!("p = {p} is not a supported prime"));
        }
        if q != p {
            return invalid(format!("residue cardinality {q} != p is not supported"));
        }
        if e != 1 {
            return invalid(format!("ramification index {e} != 1 is not supported"));
        }
        let characteristic = match characteristic {
            0 => Characteristic::Zero,
            c if c == p => Characteristic::Positive,
            c => return invalid(format!("characteristic {c} must be 0 or {p}")),
        };
        Ok(FieldSpec { characteristic, p })
    }

    pub fn qp(p: u32) -> Result<Self> {
        Self::new(0, p, p, 1)
    }

    pub fn fpt(p: u32) -> Result<Self> {
        Self::new(p, p, p, 1)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        1
    }

    pub fn characteristic(&self) -> Characteristic {
        self.characteristic
    }

    /// 0 for ℚ_p, p for 𝔽_p((t)).
    pub fn char_value(&self) -> u32 {
        match self.characteristic {
            Characteristic::Zero => 0,
            Characteristic::Positive => self.p,
        }
    }

    pub fn is_char_zero(&self) -> bool {
        self.characteristic == Characteristic::Zero
    }

    pub fn prime_element(&self) -> PrimeElement {
        match self.characteristic {
            Characteristic::Zero => PrimeElement::Numeral(self.p),
            Characteristic::Positive => PrimeElement::Indeterminate,
        }
    }

    pub(crate) fn carries(&self) -> bool {
        self.is_char_zero()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.characteristic {
            Characteristic::Zero => write!(f, "Q_{}", self.p),
            Characteristic::Positive => write!(f, "F_{}((t))", self.p),
        }
    }
}

/// Valuation with an infinite sentinel for zero; `Infinite` is the largest value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

/// Norm exponent `−v`, so that `|x| = q^e`; zero has `NegInfinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormExponent {
    NegInfinite,
    Finite(i64),
}

impl NormExponent {
    pub fn finite(self) -> Option<i64> {
        match self {
            NormExponent::Finite(e) => Some(e),
            NormExponent::NegInfinite => None,
        }
    }

    pub fn shift(self, by: i64) -> Self {
        match self {
            NormExponent::Finite(e) => NormExponent::Finite(e + by),
            n => n,
        }
    }
}

/// Membership answer at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// A π-adic expansion known modulo π^N.
///
/// Nonzero elements store digits from the valuation upward with a nonzero
/// leading digit. The zero-to-precision element stores no digits.
#[derive(Debug, Clone)]
pub struct LocalFieldElement {
    spec: FieldSpec,
    v: i64,
    digits: Vec<u32>,
    prec: i64,
}

impl PartialEq for LocalFieldElement {
    /// Equal when specs match and digits agree up to the smaller precision.
    fn eq(&self, other: &Self) -> bool {
        if self.spec != other.spec {
            return false;
        }
        let n = self.prec.min(other.prec);
        let lo = self.low_index().min(other.low_index()).min(n);
        (lo..n).all(|i| self.digit_raw(i) == other.digit_raw(i))
    }
}

pub(crate) fn vp_u64(mut n: u64, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

fn vp_big(n: &BigUint, p: u32) -> (i64, BigUint) {
    let mut k = 0;
    let mut n = n.clone();
    let pb = BigUint::from(p);
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (k, n);
        }
        n = q;
        k += 1;
    }
}

fn big_to_digits(n: &BigUint, p: u32, len: usize) -> Vec<u32> {
    let k = kernel::limb_digits(p, 1).max(1);
    let chunk = BigUint::from((p as u64).pow(k as u32));
    let mut limbs = Vec::new();
    let mut n = n.clone();
    while !n.is_zero() && limbs.len() * k < len {
        let (q, r) = n.div_rem(&chunk);
        limbs.push(r.to_u64().unwrap_or(0));
        n = q;
    }
    kernel::from_limbs(&limbs, p, k, len)
}

impl LocalFieldElement {
    /// Builds an element from digits starting at index `v`, known modulo π^`abs_prec`.
    /// Leading zero digits are absorbed into the valuation.
    pub fn from_digits(spec: FieldSpec, v: i64, digits: &[u32], abs_prec: i64) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d >= spec.p) {
            return invalid(format!("digit {d} out of range for p = {}", spec.p));
        }
        let mut digits = digits.to_vec();
        digits.truncate((abs_prec - v).max(0) as usize);
        Ok(Self::normalized(spec, v, digits, abs_prec))
    }

    fn normalized(spec: FieldSpec, v: i64, digits: Vec<u32>, prec: i64) -> Self {
        match digits.iter().position(|&d| d != 0) {
            None => Self::zero(spec, prec),
            Some(s) if v + (s as i64) < prec => {
                let nv = v + s as i64;
                let mut d = digits;
                d.drain(..s);
                d.truncate((prec - nv).max(0) as usize);
                let len = (prec - nv) as usize;
                d.resize(len, 0);
                LocalFieldElement { spec, v: nv, digits: d, prec }
            }
            Some(_) => Self::zero(spec, prec),
        }
    }

    pub fn zero(spec: FieldSpec, abs_prec: i64) -> Self {
        LocalFieldElement { spec, v: abs_prec, digits: Vec::new(), prec: abs_prec }
    }

    pub fn one(spec: FieldSpec, abs_prec: i64) -> Self {
        Self::from_digits(spec, 0, &[1], abs_prec).expect("1 is a valid digit")
    }

    /// π^k known modulo π^`abs_prec`.
    pub fn pi_power(spec: FieldSpec, k: i64, abs_prec: i64) -> Self {
        Self::from_digits(spec, k, &[1], abs_prec).expect("1 is a valid digit")
    }

    pub fn from_i64(n: i64, spec: FieldSpec, abs_prec: i64) -> Self {
        Self::from_rational_abs(&BigInt::from(n), &BigInt::one(), spec, abs_prec)
            .expect("nonzero denominator")
    }

    /// `num/den` with `prec` significant digits (zero is known modulo π^`prec`).
    /// In characteristic p the integers are read as constants of 𝔽_p; use
    /// [`Self::from_polys`] for rational functions.
    pub fn from_rational(num: &BigInt, den: &BigInt, spec: FieldSpec, prec: i64) -> Result<Self> {
        if den.is_zero() {
            return invalid("zero denominator");
        }
        let v = if spec.is_char_zero() {
            if num.is_zero() {
                0
            } else {
                vp_big(num.magnitude(), spec.p).0 - vp_big(den.magnitude(), spec.p).0
            }
        } else {
            0
        };
        Self::from_rational_abs(num, den, spec, v + prec)
    }

    /// `num/den` modulo π^`abs_prec`.
    pub fn from_rational_abs(num: &BigInt, den: &BigInt, spec: FieldSpec, abs_prec: i64) -> Result<Self> {
        if den.is_zero() {
            return invalid("zero denominator");
        }
        if !spec.is_char_zero() {
            let p = BigInt::from(spec.p);
            let n = num.mod_floor(&p).to_u32().unwrap_or(0);
            let d = den.mod_floor(&p).to_u32().unwrap_or(0);
            if d == 0 {
                return Err(Error::DivisionByZero);
            }
            return Self::from_polys(&[n], &[d], spec, abs_prec);
        }
        if num.is_zero() {
            return Ok(Self::zero(spec, abs_prec));
        }
        let (vn, un) = vp_big(num.magnitude(), spec.p);
        let (vd, ud) = vp_big(den.magnitude(), spec.p);
        let v = vn - vd;
        if v >= abs_prec {
            return Ok(Self::zero(spec, abs_prec));
        }
        let r = (abs_prec - v) as usize;
        let modulus = BigInt::from(spec.p).pow(r as u32);
        let sign_neg = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
        let un = BigInt::from(un);
        let ud = BigInt::from(ud);
        let inv = ud.modinv(&modulus).expect("unit denominator is invertible");
        let mut u = (un * inv).mod_floor(&modulus);
        if sign_neg {
            u = (&modulus - u).mod_floor(&modulus);
        }
        let digits = big_to_digits(u.magnitude(), spec.p, r);
        Ok(Self::normalized(spec, v, digits, abs_prec))
    }

    /// [`Self::from_rational`] for machine integers.
    pub fn from_ratio(num: i64, den: i64, spec: FieldSpec, prec: i64) -> Result<Self> {
        Self::from_rational(&BigInt::from(num), &BigInt::from(den), spec, prec)
    }

    pub fn from_ratio_abs(num: i64, den: i64, spec: FieldSpec, abs_prec: i64) -> Result<Self> {
        Self::from_rational_abs(&BigInt::from(num), &BigInt::from(den), spec, abs_prec)
    }

    pub fn from_rational_scalar(r: &Rational, spec: FieldSpec, prec: i64) -> Result<Self> {
        Self::from_rational(r.numer(), r.denom(), spec, prec)
    }

    pub fn from_rational_scalar_abs(r: &Rational, spec: FieldSpec, abs_prec: i64) -> Result<Self> {
        Self::from_rational_abs(r.numer(), r.denom(), spec, abs_prec)
    }

    /// Ratio of two polynomials in t (coefficient lists, constant term first) in 𝔽_p((t)).
    pub fn from_polys(num: &[u32], den: &[u32], spec: FieldSpec, abs_prec: i64) -> Result<Self> {
        if spec.is_char_zero() {
            return invalid("polynomial input needs characteristic p");
        }
        let p = spec.p;
        let num: Vec<u32> = num.iter().map(|&c| c % p).collect();
        let den: Vec<u32> = den.iter().map(|&c| c % p).collect();
        let Some(vd) = den.iter().position(|&c| c != 0) else {
            return invalid("zero denominator");
        };
        let Some(vn) = num.iter().position(|&c| c != 0) else {
            return Ok(Self::zero(spec, abs_prec));
        };
        let v = vn as i64 - vd as i64;
        if v >= abs_prec {
            return Ok(Self::zero(spec, abs_prec));
        }
        let r = (abs_prec - v) as usize;
        let dinv = kernel::inv(&den[vd..], p, false, r);
        let digits = kernel::mul(&num[vn..], &dinv, p, false, r);
        Ok(Self::normalized(spec, v, digits, abs_prec))
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinite
        } else {
            Valuation::Finite(self.v)
        }
    }

    /// Valuation of a nonzero element.
    pub fn val(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.v)
    }

    pub fn norm_exponent(&self) -> NormExponent {
        if self.is_zero() {
            NormExponent::NegInfinite
        } else {
            NormExponent::Finite(-self.v)
        }
    }

    pub fn abs_precision(&self) -> i64 {
        self.prec
    }

    /// Number of stored digits.
    pub fn rel_precision(&self) -> i64 {
        self.digits.len() as i64
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Lowest index at which a stored digit may be nonzero.
    fn low_index(&self) -> i64 {
        if self.is_zero() {
            self.prec
        } else {
            self.v
        }
    }

    fn digit_raw(&self, i: i64) -> u32 {
        if self.is_zero() || i < self.v || i >= self.prec {
            0
        } else {
            self.digits[(i - self.v) as usize]
        }
    }

    pub fn digit_at(&self, i: i64) -> Result<u32> {
        if i >= self.prec {
            return Err(Error::InsufficientPrecision(format!(
                "digit {i} requested, element known modulo π^{}",
                self.prec
            )));
        }
        Ok(self.digit_raw(i))
    }

    /// Digits at indices `from..to`, zeros below the valuation.
    pub fn digit_window(&self, from: i64, to: i64) -> Result<Vec<u32>> {
        if to > self.prec {
            return Err(Error::InsufficientPrecision(format!(
                "digits up to {to} requested, element known modulo π^{}",
                self.prec
            )));
        }
        Ok((from..to).map(|i| self.digit_raw(i)).collect())
    }

    fn check_spec(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return invalid(format!("mismatched fields {} and {}", self.spec, other.spec));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        let n = self.prec.min(other.prec);
        let lo = self.low_index().min(other.low_index());
        if lo >= n {
            return Ok(Self::zero(self.spec, n));
        }
        let len = (n - lo) as usize;
        let a = self.window_vec(lo, n);
        let b = other.window_vec(lo, n);
        let s = kernel::add(&a, &b, self.spec.p, self.spec.carries(), len);
        Ok(Self::normalized(self.spec, lo, s, n))
    }

    fn window_vec(&self, from: i64, to: i64) -> Vec<u32> {
        (from..to).map(|i| self.digit_raw(i)).collect()
    }

    pub fn neg(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let d = kernel::neg(&self.digits, self.spec.p, self.spec.carries(), self.digits.len());
        Self::normalized(self.spec, self.v, d, self.prec)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_spec(other)?;
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ok(Self::zero(self.spec, self.prec + other.prec)),
            (true, false) => return Ok(Self::zero(self.spec, self.prec + other.v)),
            (false, true) => return Ok(Self::zero(self.spec, other.prec + self.v)),
            _ => {}
        }
        let r = self.digits.len().min(other.digits.len());
        let d = kernel::mul(&self.digits, &other.digits, self.spec.p, self.spec.carries(), r);
        let v = self.v + other.v;
        Ok(Self::normalized(self.spec, v, d, v + r as i64))
    }

    pub fn invert(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let r = self.digits.len();
        let d = kernel::inv(&self.digits, self.spec.p, self.spec.carries(), r);
        Ok(Self::normalized(self.spec, -self.v, d, -self.v + r as i64))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.invert()?)
    }

    /// `self^n` by binary exponentiation.
    pub fn pow(&self, n: u64) -> Self {
        if n == 0 {
            return Self::one(self.spec, self.rel_precision().max(1));
        }
        let mut result = self.clone();
        let mut base = self.clone();
        let mut e = n;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.mul(&base).expect("same spec") };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same spec");
            }
        }
        result
    }

    pub fn pow_i64(&self, n: i64) -> Result<Self> {
        if n >= 0 {
            Ok(self.pow(n as u64))
        } else {
            Ok(self.invert()?.pow(n.unsigned_abs()))
        }
    }

    /// `[x]`, the digits at nonnegative indices.
    pub fn integral_part(&self) -> Result<Self> {
        if self.prec < 0 {
            return Err(Error::InsufficientPrecision(format!(
                "integral part needs abs precision >= 0, have {}",
                self.prec
            )));
        }
        if self.low_index() >= 0 {
            return Ok(self.clone());
        }
        let d = self.window_vec(0, self.prec);
        Ok(Self::normalized(self.spec, 0, d, self.prec))
    }

    /// `{x}`, the digits at negative indices.
    pub fn fractional_part(&self) -> Result<Self> {
        if self.prec < 0 {
            return Err(Error::InsufficientPrecision(format!(
                "fractional part needs abs precision >= 0, have {}",
                self.prec
            )));
        }
        if self.low_index() >= 0 {
            return Ok(Self::zero(self.spec, self.prec));
        }
        let mut d = self.window_vec(self.v, 0);
        d.resize((self.prec - self.v) as usize, 0);
        Ok(Self::normalized(self.spec, self.v, d, self.prec))
    }

    /// Same element known to a lower absolute precision.
    pub fn truncate(&self, abs_prec: i64) -> Self {
        if abs_prec >= self.prec {
            return self.clone();
        }
        let lo = self.low_index().min(abs_prec);
        Self::normalized(self.spec, lo, self.window_vec(lo, abs_prec), abs_prec)
    }

    /// The representative whose unknown digits are zero, declared known to `abs_prec`.
    pub fn pad_to(&self, abs_prec: i64) -> Self {
        if abs_prec <= self.prec {
            return self.truncate(abs_prec);
        }
        let lo = self.low_index().min(self.prec);
        Self::normalized(self.spec, lo, self.window_vec(lo, self.prec), abs_prec)
    }

    /// Exact rational value of the stored expansion (char 0 only).
    pub fn to_rational(&self) -> Result<Rational> {
        if !self.spec.is_char_zero() {
            return invalid("rational value needs characteristic 0");
        }
        if self.is_zero() {
            return Ok(Rational::zero());
        }
        let p = BigInt::from(self.spec.p);
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &p + BigInt::from(d);
        }
        let scale = p.pow(self.v.unsigned_abs() as u32);
        Ok(if self.v >= 0 {
            Rational::from_integer(acc * scale)
        } else {
            Rational::new(acc, scale)
        })
    }

    /// Integer `Σ d_i q^i` over the digits at indices `0..m` (the level-m cell index).
    pub fn cell_index(&self, m: u32) -> Result<u64> {
        let w = self.digit_window(0, m as i64)?;
        Ok(w.iter().rev().fold(0u64, |acc, &d| acc * self.spec.p as u64 + d as u64))
    }

    /// The element with digits `c_0..c_{m−1}` of `index`, known modulo π^m.
    pub fn from_cell_index(spec: FieldSpec, m: u32, index: u64) -> Self {
        let mut d = Vec::with_capacity(m as usize);
        let mut v = index;
        for _ in 0..m {
            d.push((v % spec.p as u64) as u32);
            v /= spec.p as u64;
        }
        Self::normalized(spec, 0, d, m as i64)
    }

    /// Square root by Newton iteration.
    ///
    /// For odd p the hint is the leading digit of the root; for p = 2 it is the
    /// residue of the unit part modulo 4 (1 or 3). Without a hint the smallest
    /// admissible choice is taken.
    pub fn hensel_sqrt(&self, branch_hint: Option<u32>) -> Result<Self> {
        if !self.spec.is_char_zero() {
            return invalid("square roots are implemented for characteristic 0");
        }
        if self.is_zero() {
            return Err(Error::NoSquareRoot("zero to precision".into()));
        }
        if self.v % 2 != 0 {
            return Err(Error::NoSquareRoot(format!("odd valuation {}", self.v)));
        }
        let p = self.spec.p;
        let r = self.digits.len() as i64;
        let unit = Self::normalized(self.spec, 0, self.digits.clone(), r);
        let start = if p == 2 {
            if r < 3 {
                return Err(Error::InsufficientPrecision("need 3 digits to decide squares in Q_2".into()));
            }
            if self.digits[1] != 0 || self.digits[2] != 0 {
                return Err(Error::NoSquareRoot("unit part not 1 mod 8".into()));
            }
            match branch_hint.unwrap_or(1) {
                1 => 1,
                3 => 3,
                h => return invalid(format!("branch hint {h} must be 1 or 3 for p = 2")),
            }
        } else {
            let u0 = self.digits[0] as u64;
            let roots: Vec<u32> = (1..p).filter(|&a| (a as u64 * a as u64) % p as u64 == u0).collect();
            if roots.is_empty() {
                return Err(Error::NoSquareRoot(format!("{u0} is not a square mod {p}")));
            }
            match branch_hint {
                None => roots[0],
                Some(h) if roots.contains(&h) => h,
                Some(h) => return invalid(format!("branch hint {h} is not a root mod {p}")),
            }
        };
        let work = r + 2;
        let half = Self::from_ratio(1, 2, self.spec, work)?;
        let target = unit.pad_to(work);
        let mut a = Self::from_i64(start as i64, self.spec, work);
        let mut good = if p == 2 { 2 } else { 1 };
        while good < work {
            a = a.add(&target.div(&a)?)?.mul(&half)?.pad_to(work);
            good = if p == 2 { 2 * good - 1 } else { 2 * good };
        }
        let out_rel = if p == 2 { r - 1 } else { r };
        let root = a.truncate(out_rel);
        let v = self.v / 2;
        Ok(Self::normalized(self.spec, v, root.digits.clone(), v + out_rel))
    }

    /// Uniform sample from `disk`, known modulo π^`abs_prec`.
    pub fn random_in_disk<R: Rng + ?Sized>(disk: &Disk, abs_prec: i64, rng: &mut R) -> Result<Self> {
        let m = disk.radius_exponent();
        if abs_prec < m {
            return invalid(format!("precision {abs_prec} below disk radius exponent {m}"));
        }
        let c = disk.center();
        let spec = c.spec();
        let lo = c.low_index().min(m);
        let mut d = c.window_vec(lo, m);
        for _ in m..abs_prec {
            d.push(rng.gen_range(0..spec.p));
        }
        Ok(Self::normalized(spec, lo, d, abs_prec))
    }

    /// Uniform sample of the sphere `|x| = q^r`, known modulo π^`abs_prec`.
    pub fn random_with_norm<R: Rng + ?Sized>(spec: FieldSpec, r: i64, abs_prec: i64, rng: &mut R) -> Result<Self> {
        if abs_prec <= -r {
            return invalid("precision does not reach the leading digit");
        }
        let mut d = vec![rng.gen_range(1..spec.p)];
        for _ in (-r + 1)..abs_prec {
            d.push(rng.gen_range(0..spec.p));
        }
        Ok(Self::normalized(spec, -r, d, abs_prec))
    }

    /// Canonical text form, e.g. `Qp{p=5; v=-1; digits=1,2,3; prec=3}`.
    ///
    /// `prec` counts stored digits; for the zero element it holds the absolute precision.
    pub fn to_text(&self) -> String {
        let tag = if self.spec.is_char_zero() { "Qp" } else { "Fpt" };
        if self.is_zero() {
            return format!("{tag}{{p={}; v=inf; digits=; prec={}}}", self.spec.p, self.prec);
        }
        let digits: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        format!(
            "{tag}{{p={}; v={}; digits={}; prec={}}}",
            self.spec.p,
            self.v,
            digits.join(","),
            self.digits.len()
        )
    }

    pub fn parse_text(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = if let Some(r) = s.strip_prefix("Qp{") {
            (0, r)
        } else if let Some(r) = s.strip_prefix("Fpt{") {
            (1, r)
        } else {
            return Err(Error::Parse(format!("unknown element tag in {s:?}")));
        };
        let body = rest
            .strip_suffix('}')
            .ok_or_else(|| Error::Parse("missing closing brace".into()))?;
        let mut p = None;
        let mut v = None;
        let mut digits = None;
        let mut prec = None;
        for field in body.split(';') {
            let (k, val) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("malformed field {field:?}")))?;
            let val = val.trim();
            match k.trim() {
                "p" => p = Some(parse_num::<u32>(val)?),
                "v" => v = Some(if val == "inf" { None } else { Some(parse_num::<i64>(val)?) }),
                "digits" => {
                    digits = Some(if val.is_empty() {
                        Vec::new()
                    } else {
                        val.split(',').map(|d| parse_num::<u32>(d.trim())).collect::<Result<Vec<_>>>()?
                    })
                }
                "prec" => prec = Some(parse_num::<i64>(val)?),
                other => return Err(Error::Parse(format!("unknown field {other:?}"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let spec = if tag == 0 { FieldSpec::qp(p)? } else { FieldSpec::fpt(p)? };
        let v = v.ok_or_else(|| Error::Parse("missing v".into()))?;
        let digits = digits.ok_or_else(|| Error::Parse("missing digits".into()))?;
        let prec = prec.ok_or_else(|| Error::Parse("missing prec".into()))?;
        match v {
            None => {
                if !digits.is_empty() {
                    return Err(Error::Parse("zero element carries digits".into()));
                }
                Ok(Self::zero(spec, prec))
            }
            Some(v) => {
                if digits.len() as i64 != prec {
                    return Err(Error::Parse(format!("prec {prec} does not count {} digits", digits.len())));
                }
                Self::strict(spec, v, digits, v + prec)
            }
        }
    }

    fn strict(spec: FieldSpec, v: i64, digits: Vec<u32>, abs_prec: i64) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d >= spec.p) {
            return Err(Error::Parse(format!("digit {d} out of range for p = {}", spec.p)));
        }
        match digits.first() {
            None => Err(Error::Parse("nonzero element without digits".into())),
            Some(0) => Err(Error::Parse("leading zero digit".into())),
            Some(_) => Ok(LocalFieldElement { spec, v, digits, prec: abs_prec }),
        }
    }

    /// Exact equality of representation (spec, valuation, digits, precision).
    pub fn same_repr(&self, other: &Self) -> bool {
        self.spec == other.spec && self.digits == other.digits && self.prec == other.prec && (self.is_zero() || self.v == other.v)
    }

    pub(crate) fn unit_digits(&self) -> &[u32] {
        &self.digits
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

impl fmt::Display for LocalFieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// JSON form `{"char": 0 | p, "p": p}`.
#[derive(Clone, Copy, Serialize, Deserialize)]
struct FieldSpecJson {
    char: u32,
    p: u32,
}

impl From<FieldSpec> for FieldSpecJson {
    fn from(f: FieldSpec) -> Self {
        FieldSpecJson { char: f.char_value(), p: f.p }
    }
}

impl TryFrom<FieldSpecJson> for FieldSpec {
    type Error = Error;

    fn try_from(j: FieldSpecJson) -> Result<Self> {
        FieldSpec::new(j.char, j.p, j.p, 1)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonValuation {
    Finite(i64),
    Sentinel(String),
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    char: u32,
    p: u32,
    v: JsonValuation,
    digits: Vec<u32>,
    abs_prec: i64,
}

impl Serialize for LocalFieldElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ElementJson {
            char: self.spec.char_value(),
            p: self.spec.p,
            v: if self.is_zero() { JsonValuation::Sentinel("inf".into()) } else { JsonValuation::Finite(self.v) },
            digits: self.digits.clone(),
            abs_prec: self.prec,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LocalFieldElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ElementJson::deserialize(d)?;
        let spec = FieldSpec::new(j.char, j.p, j.p, 1).map_err(D::Error::custom)?;
        match j.v {
            JsonValuation::Sentinel(s) if s == "inf" => {
                if !j.digits.is_empty() {
                    return Err(D::Error::custom("zero element carries digits"));
                }
                Ok(Self::zero(spec, j.abs_prec))
            }
            JsonValuation::Sentinel(s) => Err(D::Error::custom(format!("bad valuation {s:?}"))),
            JsonValuation::Finite(v) => {
                if v + j.digits.len() as i64 != j.abs_prec {
                    return Err(D::Error::custom("v + len(digits) must equal abs_prec"));
                }
                Self::strict(spec, v, j.digits, j.abs_prec).map_err(D::Error::custom)
            }
        }
    }
}

/// Ordering of norms, usable for sorting by size.
pub fn cmp_norm(a: &LocalFieldElement, b: &LocalFieldElement) -> Ordering {
    a.norm_exponent().cmp(&b.norm_exponent())
}

/// p-adic valuation of a nonzero rational (integer-valued for char 0).
pub fn vp_rational(r: &Rational, p: u32) -> Option<i64> {
    if r.is_zero() {
        return None;
    }
    let (a, _) = vp_big(r.numer().magnitude(), p);
    let (b, _) = vp_big(r.denom().magnitude(), p);
    Some(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u32) -> FieldSpec {
        FieldSpec::qp(p).unwrap()
    }

    fn f(p: u32) -> FieldSpec {
        FieldSpec::fpt(p).unwrap()
    }

    #[test]
    fn rejects_unsupported_fields() {
        assert!(FieldSpec::new(0, 4, 4, 1).is_err());
        assert!(FieldSpec::new(0, 5, 25, 1).is_err());
        assert!(FieldSpec::new(0, 5, 5, 2).is_err());
        assert!(FieldSpec::new(3, 5, 5, 1).is_err());
        assert_eq!(FieldSpec::fpt(3).unwrap().prime_element(), PrimeElement::Indeterminate);
    }

    #[test]
    fn rational_expansions() {
        let x = LocalFieldElement::from_ratio(86, 5, q(5), 4).unwrap();
        assert_eq!(x.val(), Some(-1));
        assert_eq!(x.digits(), &[1, 2, 3, 0]);
        let m = LocalFieldElement::from_ratio(-1, 1, q(3), 3).unwrap();
        assert_eq!((m.val(), m.digits()), (Some(0), &[2u32, 2, 2][..]));
        let z = LocalFieldElement::from_ratio(0, 1, q(7), 5).unwrap();
        assert_eq!(z.valuation(), Valuation::Infinite);
        assert_eq!(z.norm_exponent(), NormExponent::NegInfinite);
        assert!(LocalFieldElement::from_ratio(1, 0, q(7), 5).is_err());
    }

    #[test]
    fn addition_carries_and_precision() {
        let a = LocalFieldElement::from_digits(q(5), 0, &[2, 0, 0], 3).unwrap();
        let b = LocalFieldElement::from_digits(q(5), 0, &[3, 0, 0], 3).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!((s.val(), s.digits(), s.abs_precision()), (Some(1), &[1u32, 0][..], 3));
        assert!(a.add(&a.neg()).unwrap().is_zero());
        let x = LocalFieldElement::from_ratio(7, 3, q(5), 8).unwrap();
        let y = LocalFieldElement::from_ratio(2, 9, q(5), 5).unwrap();
        assert_eq!(x.add(&y).unwrap().abs_precision(), 5);
    }

    #[test]
    fn multiplication() {
        let a = LocalFieldElement::from_ratio(1, 5, q(5), 6).unwrap();
        let b = LocalFieldElement::from_ratio(5, 1, q(5), 8).unwrap();
        let one = a.mul(&b).unwrap();
        assert_eq!(one.val(), Some(0));
        assert_eq!(one.digits()[0], 1);
        assert!(one.digits()[1..].iter().all(|&d| d == 0));
        let x = LocalFieldElement::from_ratio(86, 5, q(5), 10).unwrap();
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq, LocalFieldElement::from_ratio(7396, 25, q(5), 20).unwrap());
        let one_plus_t = LocalFieldElement::from_polys(&[1, 1], &[1], f(2), 6).unwrap();
        let sq = one_plus_t.mul(&one_plus_t).unwrap();
        assert_eq!(sq.digits(), &[1, 0, 1, 0, 0, 0]);
    }

    #[test]
    fn inversion() {
        let x = LocalFieldElement::from_ratio(-4, 1, q(5), 6).unwrap();
        assert_eq!(x.invert().unwrap().digits(), &[1; 6]);
        let t = LocalFieldElement::pi_power(f(3), 1, 5);
        let ti = t.invert().unwrap();
        assert_eq!((ti.val(), ti.digits()[0]), (Some(-1), 1));
        assert!(ti.digits()[1..].iter().all(|&d| d == 0));
        let a = LocalFieldElement::from_ratio(3, 2, q(2), 12).unwrap();
        let b = LocalFieldElement::from_ratio(2, 3, q(2), 20).unwrap();
        assert_eq!(a.invert().unwrap(), b);
        assert!(LocalFieldElement::zero(q(3), 4).invert().is_err());
    }

    #[test]
    fn integral_and_fractional() {
        let x = LocalFieldElement::from_ratio(86, 5, q(5), 3).unwrap();
        let ip = x.integral_part().unwrap();
        assert_eq!(ip.digits(), &[2, 3]);
        assert_eq!(ip.to_rational().unwrap(), Rational::from_integer(17.into()));
        let fp = x.fractional_part().unwrap();
        assert_eq!(fp.to_rational().unwrap(), Rational::new(1.into(), 5.into()));
        assert_eq!(ip.add(&fp).unwrap(), x);
        let y = LocalFieldElement::from_ratio(-3, 7, q(5), -2).unwrap();
        assert!(y.integral_part().is_err());
    }

    #[test]
    fn digit_access() {
        let x = LocalFieldElement::from_ratio(86, 5, q(5), 3).unwrap();
        assert_eq!(x.digit_at(-1).unwrap(), 1);
        assert_eq!(x.digit_at(-7).unwrap(), 0);
        assert!(x.digit_at(3).is_err());
    }

    #[test]
    fn square_roots() {
        let four = LocalFieldElement::from_i64(4, q(5), 10);
        let r = four.hensel_sqrt(None).unwrap();
        assert_eq!(r.digits()[0], 2);
        assert_eq!(r.mul(&r).unwrap(), four);
        let six = LocalFieldElement::from_i64(6, q(5), 10);
        let r = six.hensel_sqrt(Some(1)).unwrap();
        assert_eq!(r.cell_index(2).unwrap(), 16);
        assert_eq!(r.mul(&r).unwrap(), six);
        let two = LocalFieldElement::from_i64(2, q(5), 10);
        assert!(matches!(two.hensel_sqrt(None), Err(Error::NoSquareRoot(_))));
        let seventeen = LocalFieldElement::from_i64(17, q(2), 12);
        for hint in [1, 3] {
            let r = seventeen.hensel_sqrt(Some(hint)).unwrap();
            assert_eq!(r.cell_index(2).unwrap() as u32, hint);
            assert_eq!(r.mul(&r).unwrap(), seventeen);
        }
        assert!(LocalFieldElement::from_i64(5, q(2), 12).hensel_sqrt(None).is_err());
        assert!(LocalFieldElement::from_i64(5, q(5), 12).hensel_sqrt(None).is_err());
    }

    #[test]
    fn text_and_json_round_trip() {
        let x = LocalFieldElement::parse_text("Qp{p=5; v=-1; digits=1,2,3; prec=3}").unwrap();
        assert_eq!(x.abs_precision(), 2);
        assert_eq!(x.to_text(), "Qp{p=5; v=-1; digits=1,2,3; prec=3}");
        let y = LocalFieldElement::parse_text("Fpt{p=2; v=0; digits=1,0,1; prec=3}").unwrap();
        assert_eq!(y.spec(), f(2));
        assert!(LocalFieldElement::parse_text("Qp{p=5; v=0; digits=0,1; prec=2}").is_err());
        assert!(LocalFieldElement::parse_text("Qp{p=5; v=0; digits=5; prec=1}").is_err());
        let js = serde_json::to_string(&x).unwrap();
        assert_eq!(js, r#"{"char":0,"p":5,"v":-1,"digits":[1,2,3],"abs_prec":2}"#);
        let back: LocalFieldElement = serde_json::from_str(&js).unwrap();
        assert!(back.same_repr(&x));
        let z = LocalFieldElement::zero(f(3), 4);
        let zj = serde_json::to_string(&z).unwrap();
        assert!(zj.contains("\"inf\""));
        assert!(serde_json::from_str::<LocalFieldElement>(&zj).unwrap().same_repr(&z));
        assert!(serde_json::from_str::<LocalFieldElement>(r#"{"char":0,"p":5,"v":0,"digits":[0,1],"abs_prec":2}"#).is_err());
    }
}
