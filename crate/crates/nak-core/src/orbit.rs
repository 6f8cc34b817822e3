//! Digit windows of `[α·xⁿ]` for `n = 1..=N`.
//!
//! Writing `α = π^a·w` and `x = π^v·u` with unit `w, u`, digit `j` of `α·xⁿ`
//! is digit `j − a − vn` of `w·uⁿ`. The engines below only ever hold `w·uⁿ`
//! modulo a block precision, which is what makes long orbits affordable.

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::RealFft;
use crate::field::{FieldSpec, LocalFieldElement};
use crate::{gf2, kernel};

/// Rows of `window` digits, row `i` holding digits `0..window` of `[α·x^{i+1}]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitWindows {
    pub spec: FieldSpec,
    pub window: usize,
    pub n_max: u64,
    pub digits: Vec<u32>,
}

impl OrbitWindows {
    pub fn row(&self, n: u64) -> &[u32] {
        assert!(n >= 1 && n <= self.n_max, "n = {n} outside 1..={}", self.n_max);
        let i = (n - 1) as usize * self.window;
        &self.digits[i..i + self.window]
    }

    /// Level-`level` cell index `Σ c_j q^j` of `[α·xⁿ]`.
    pub fn cell_index(&self, n: u64, level: u32) -> u64 {
        assert!(level as usize <= self.window);
        let p = self.spec.p() as u64;
        self.row(n)[..level as usize].iter().rev().fold(0, |acc, &d| acc * p + d as u64)
    }
}

/// Which part of `w·uⁿ` row `n` needs: digits `lo(n)..lo(n) + width`.
#[derive(Clone, Copy)]
struct Layout {
    a: i64,
    v: i64,
    width: usize,
}

impl Layout {
    fn lo(&self, n: u64) -> i64 {
        -(self.a + self.v * n as i64)
    }

    /// Digits of `w·uⁿ` that must be known (zero or negative: none).
    fn hi(&self, n: u64) -> i64 {
        self.lo(n) + self.width as i64
    }

    /// Last `n` in `from..=n_max` whose row fits in precision `m`.
    fn last_within(&self, from: u64, n_max: u64, m: i64) -> u64 {
        if self.v >= 0 {
            return n_max;
        }
        // hi(n) = width − a − v·n <= m
        let slack = m - self.width as i64 + self.a;
        let last = (slack / -self.v).max(from as i64) as u64;
        last.min(n_max)
    }
}

fn extract(row: &mut [u32], lo: i64, digit: impl Fn(usize) -> u32) {
    for (j, out) in row.iter_mut().enumerate() {
        let t = lo + j as i64;
        *out = if t < 0 { 0 } else { digit(t as usize) };
    }
}

/// `[α·xⁿ]` windows for `n = 1..=n_max`, using the fastest engine for the field.
pub fn power_orbit(alpha: &LocalFieldElement, x: &LocalFieldElement, n_max: u64, window: usize) -> Result<OrbitWindows> {
    orbit_with(alpha, x, n_max, window, Engine::Auto)
}

/// `[βⁿ·x]` windows; the same computation with the roles of the factors exchanged.
pub fn geometric_orbit(beta: &LocalFieldElement, x: &LocalFieldElement, n_max: u64, window: usize) -> Result<OrbitWindows> {
    orbit_with(x, beta, n_max, window, Engine::Auto)
}

/// The same windows through the generic digit-array kernel; slower, used as a cross-check.
pub fn power_orbit_generic(alpha: &LocalFieldElement, x: &LocalFieldElement, n_max: u64, window: usize) -> Result<OrbitWindows> {
    orbit_with(alpha, x, n_max, window, Engine::Generic)
}

/// Straight repeated multiplication of field elements; the slowest and simplest path.
pub fn power_orbit_reference(alpha: &LocalFieldElement, x: &LocalFieldElement, n_max: u64, window: usize) -> Result<OrbitWindows> {
    let spec = check_inputs(alpha, x)?;
    let mut digits = Vec::with_capacity(n_max as usize * window);
    let mut acc = alpha.clone();
    for _ in 0..n_max {
        acc = acc.mul(x)?;
        digits.extend(acc.digit_window(0, window as i64)?);
    }
    Ok(OrbitWindows { spec, window, n_max, digits })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Engine {
    Auto,
    #[cfg_attr(not(test), allow(dead_code))]
    Fft,
    Generic,
}

fn check_inputs(alpha: &LocalFieldElement, x: &LocalFieldElement) -> Result<FieldSpec> {
    if alpha.spec() != x.spec() {
        return Err(Error::InvalidInput(format!("mismatched fields {} and {}", alpha.spec(), x.spec())));
    }
    Ok(x.spec())
}

fn orbit_with(alpha: &LocalFieldElement, x: &LocalFieldElement, n_max: u64, window: usize, engine: Engine) -> Result<OrbitWindows> {
    let spec = check_inputs(alpha, x)?;
    let (Some(a), Some(v)) = (alpha.val(), x.val()) else {
        return power_orbit_reference(alpha, x, n_max, window);
    };
    let layout = Layout { a, v, width: window };
    let mut digits = vec![0u32; n_max as usize * window];
    let need = (1..=n_max).map(|n| layout.hi(n)).max().unwrap_or(0);
    let have = alpha.rel_precision().min(x.rel_precision());
    if need > have {
        let x_abs = v + need;
        return Err(Error::InsufficientPrecision(format!(
            "orbit needs {need} significant digits of α and x (x modulo π^{x_abs}), have {have}"
        )));
    }
    let w = alpha.unit_digits();
    let u = x.unit_digits();
    let p = spec.p();
    match engine {
        Engine::Auto if spec.is_char_zero() => {
            if !dot_engine(p, w, u, layout, n_max, &mut digits, 0) {
                fft_engine(p, w, u, layout, n_max, &mut digits)
            }
        }
        Engine::Fft if spec.is_char_zero() => fft_engine(p, w, u, layout, n_max, &mut digits),
        Engine::Auto if p == 2 => gf2_engine(w, u, layout, n_max, &mut digits),
        _ => generic_engine(p, spec.carries(), w, u, layout, 1, n_max, &mut digits),
    }
    Ok(OrbitWindows { spec, window, n_max, digits })
}

fn row_mut(out: &mut [u32], width: usize, n: u64) -> &mut [u32] {
    let i = (n - 1) as usize * width;
    &mut out[i..i + width]
}

/// Block precision for rows starting at `n`: a quarter of headroom over the current need.
fn block_precision(layout: &Layout, n: u64) -> i64 {
    let h = layout.hi(n).max(1);
    h + h / 4 + 32
}

#[allow(clippy::too_many_arguments)]
fn generic_engine(p: u32, carry: bool, w: &[u32], u: &[u32], layout: Layout, from: u64, n_max: u64, out: &mut [u32]) {
    let mut n = from;
    while n <= n_max {
        let m = block_precision(&layout, n);
        let last = layout.last_within(n, n_max, m);
        let len = m as usize;
        let mut q = kernel::mul(w, &pow_digits(u, n, p, carry, len), p, carry, len);
        loop {
            extract(row_mut(out, layout.width, n), layout.lo(n), |t| q.get(t).copied().unwrap_or(0));
            if n == last {
                break;
            }
            q = kernel::mul(&q, u, p, carry, len);
            n += 1;
        }
        n += 1;
    }
}

fn pow_digits(u: &[u32], e: u64, p: u32, carry: bool, len: usize) -> Vec<u32> {
    let mut result = vec![0u32; len];
    result[0] = 1;
    let mut base: Vec<u32> = u.iter().take(len).copied().collect();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = kernel::mul(&result, &base, p, carry, len);
        }
        e >>= 1;
        if e > 0 {
            base = kernel::mul(&base, &base, p, carry, len);
        }
    }
    result
}

// ---- characteristic 2: bit-packed series -------------------------------------
//
// Coefficient t of G·U_b is the parity of Σ_i g_i·u_{t−i}. With U_b stored
// bit-reversed in a frame of F bits this is the parity of (G << (F−1−t)) & rev(U_b),
// and the 64 sub-word shifts of each giant G are tabulated once.

fn padded_words(d: &[u32], bits: usize) -> Vec<u64> {
    let mut v = gf2::pack(&d[..d.len().min(bits)]);
    v.resize(bits.div_ceil(64), 0);
    v
}

fn reversed_frame(words: &[u64]) -> Vec<u64> {
    words.iter().rev().map(|w| w.reverse_bits()).collect()
}

fn gf2_engine(w: &[u32], u: &[u32], layout: Layout, n_max: u64, out: &mut [u32]) {
    let width = layout.width;
    let hi_max = (1..=n_max).map(|n| layout.hi(n)).max().unwrap_or(0);
    if hi_max <= 0 {
        return;
    }
    let frame = (hi_max as usize).div_ceil(64) * 64;
    let words = frame / 64;
    let mut tm = gf2::TruncMul::new(frame);
    let uw = padded_words(u, frame);
    let babies = DOT_BABIES.min(n_max);
    let mut cur = uw.clone();
    let mut rev_babies = Vec::with_capacity(babies as usize);
    let mut scratch = vec![0u64; words];
    for b in 1..=babies {
        if b > 1 {
            tm.mul_into(&cur, &uw, &mut scratch);
            std::mem::swap(&mut cur, &mut scratch);
        }
        rev_babies.push(reversed_frame(&cur));
    }
    let step = cur;
    let mut giant = padded_words(w, frame);
    let mut n = 1;
    'giants: loop {
        let shifts: Vec<Vec<u64>> = (0..64)
            .map(|r| {
                let mut carry = 0u64;
                giant
                    .iter()
                    .map(|&g| {
                        let v = if r == 0 { g } else { (g << r) | carry };
                        carry = if r == 0 { 0 } else { g >> (64 - r) };
                        v
                    })
                    .collect()
            })
            .collect();
        for rev in &rev_babies {
            let lo = layout.lo(n);
            extract(row_mut(out, width, n), lo, |t| {
                let s = frame - 1 - t;
                let (q, r) = (s / 64, s % 64);
                let acc = shifts[r][..words - q]
                    .iter()
                    .zip(&rev[q..])
                    .fold(0u64, |a, (&g, &v)| a ^ (g & v));
                acc.count_ones() & 1
            });
            if n == n_max {
                break 'giants;
            }
            n += 1;
        }
        tm.mul_into(&giant, &step, &mut scratch);
        std::mem::swap(&mut giant, &mut scratch);
    }
}

// ---- characteristic 0: balanced-limb FFT products ------------------------------

/// Limb ring `ℤ/B^L` with `B = p^k`, multiplied through real FFTs of length `2L`.
struct LimbRing {
    p: u64,
    k: usize,
    base: u64,
    limbs: usize,
    fft: RealFft,
    pows: Vec<u64>,
}

/// Largest product coefficient trusted to round correctly in `f64`.
const FFT_COEFF_BOUND: f64 = 35_184_372_088_832.0; // 2^45

impl LimbRing {
    /// Smallest ring holding at least `digits` base-p digits, if the FFT can carry it.
    fn for_digits(p: u32, digits: usize) -> Option<Self> {
        let mut size = 16usize;
        loop {
            let limbs = size / 2;
            let mut k = 0;
            while {
                let b = (p as f64).powi(k as i32 + 1);
                b < 2f64.powi(30) && limbs as f64 * (b / 2.0).powi(2) <= FFT_COEFF_BOUND
            } {
                k += 1;
            }
            if k == 0 {
                return None;
            }
            if k * limbs >= digits {
                let base = (p as u64).pow(k as u32);
                let pows = (0..k).map(|i| (p as u64).pow(i as u32)).collect();
                return Some(LimbRing { p: p as u64, k, base, limbs, fft: RealFft::new(size), pows });
            }
            size *= 2;
        }
    }

    fn digits(&self) -> usize {
        self.k * self.limbs
    }

    fn from_digits(&self, d: &[u32]) -> Vec<u64> {
        let mut l = kernel::to_limbs(&d[..d.len().min(self.digits())], self.p as u32, self.k);
        l.resize(self.limbs, 0);
        l
    }

    fn digit(&self, limbs: &[u64], t: usize) -> u32 {
        ((limbs[t / self.k] / self.pows[t % self.k]) % self.p) as u32
    }

    fn spectrum(&mut self, limbs: &[u64]) -> Vec<Complex64> {
        let half = self.base / 2;
        let mut carry = 0u64;
        let balanced: Vec<f64> = limbs
            .iter()
            .map(|&l| {
                let d = l + carry;
                if d > half {
                    carry = 1;
                    d as f64 - self.base as f64
                } else {
                    carry = 0;
                    d as f64
                }
            })
            .collect();
        let mut s = vec![Complex64::new(0.0, 0.0); self.fft.spectrum_len()];
        self.fft.forward(&balanced, &mut s);
        s
    }

    /// Product of two transformed operands, reduced modulo `B^L`; `None` on a rounding scare.
    fn product(&mut self, a: &[Complex64], b: &[Complex64], buf: &mut Vec<f64>, scratch: &mut Vec<Complex64>) -> Option<Vec<u64>> {
        scratch.clear();
        scratch.extend(a.iter().zip(b).map(|(x, y)| x * y));
        buf.resize(self.fft.len(), 0.0);
        self.fft.inverse(scratch, buf);
        let base = self.base as i64;
        let mut carry = 0i64;
        let mut worst = 0.0f64;
        let mut out = Vec::with_capacity(self.limbs);
        for &c in &buf[..self.limbs] {
            let r = c.round();
            worst = worst.max((c - r).abs());
            let s = r as i64 + carry;
            let d = s.rem_euclid(base);
            carry = (s - d) / base;
            out.push(d as u64);
        }
        (worst < 0.2).then_some(out)
    }

    fn mul(&mut self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (sa, sb) = (self.spectrum(a), self.spectrum(b));
        self.product_or_exact(&sa, &sb, a, b)
    }

    fn product_or_exact(&mut self, sa: &[Complex64], sb: &[Complex64], a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut buf = Vec::new();
        let mut scratch = Vec::new();
        match self.product(sa, sb, &mut buf, &mut scratch) {
            Some(v) => v,
            None => self.exact_mul(a, b),
        }
    }

    fn exact_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let p = self.p as u32;
        let n = self.digits();
        let da = kernel::from_limbs(a, p, self.k, n);
        let db = kernel::from_limbs(b, p, self.k, n);
        self.from_digits(&kernel::mul(&da, &db, p, true, n))
    }

    fn pow(&mut self, u: &[u64], e: u64) -> Vec<u64> {
        let mut acc = vec![0u64; self.limbs];
        acc[0] = 1;
        for i in (0..64 - e.leading_zeros()).rev() {
            acc = self.mul(&acc, &acc);
            if (e >> i) & 1 == 1 {
                acc = self.mul(&acc, u);
            }
        }
        acc
    }
}

/// Baby steps kept per regime; each costs one stored spectrum.
const MAX_BABY_STEPS: u64 = 96;

fn fft_engine(p: u32, w: &[u32], u: &[u32], layout: Layout, n_max: u64, out: &mut [u32]) {
    let width = layout.width;
    let mut n = 1;
    while n <= n_max {
        let need = layout.hi(n).max(1) as usize;
        let Some(mut ring) = LimbRing::for_digits(p, need) else {
            generic_engine(p, true, w, u, layout, n, n_max, out);
            return;
        };
        let last = layout.last_within(n, n_max, ring.digits() as i64);
        let steps = last - n + 1;
        let babies = ((steps as f64).sqrt().ceil() as u64).clamp(1, MAX_BABY_STEPS).min(steps);
        let ul = ring.from_digits(u);
        // spectra of u^1..u^babies
        let mut baby_spec = Vec::with_capacity(babies as usize);
        let mut up = ul.clone();
        let mut up_spec = ring.spectrum(&up);
        let u_spec = up_spec.clone();
        for b in 1..=babies {
            if b > 1 {
                up = ring.product_or_exact(&up_spec, &u_spec, &up, &ul);
                up_spec = ring.spectrum(&up);
            }
            baby_spec.push((up.clone(), up_spec.clone()));
        }
        // giant: w·u^{n−1}
        let wl = ring.from_digits(w);
        let mut giant = ring.pow(&ul, n - 1);
        giant = ring.mul(&wl, &giant);
        let mut giant_spec = ring.spectrum(&giant);
        let mut buf = Vec::new();
        let mut scratch = Vec::new();
        'regime: loop {
            for (b, (bl, bs)) in baby_spec.iter().enumerate() {
                let q = match ring.product(&giant_spec, bs, &mut buf, &mut scratch) {
                    Some(v) => v,
                    None => ring.exact_mul(&giant, bl),
                };
                extract(row_mut(out, width, n), layout.lo(n), |t| ring.digit(&q, t));
                if n == last {
                    break 'regime;
                }
                n += 1;
                if b + 1 == baby_spec.len() {
                    giant = q;
                    giant_spec = ring.spectrum(&giant);
                }
            }
        }
        n = last + 1;
    }
}

// ---- characteristic 0, narrow windows: fixed-point fractional parts -----------
//
// For a giant G = w·u^e and a baby U_b = u^b, the top digits of
// G·U_b mod p^h are read off F = frac(G·U_b / p^h) = Σ_i L_i·R[h − k·i] mod 1,
// where L_i are the base-p^k limbs of U_b and R[m] = frac(G / p^m). The R are
// held in 64-bit fixed point, so each row costs one dot product of ~h/k terms
// and wraparound arithmetic does the reduction mod 1 for free.

/// Budget for `limbs · p^k · 2 · p^width`, the worst fixed-point error in units of 2^-64.
const DOT_ERROR_BUDGET: f64 = 1_099_511_627_776.0; // 2^40

/// Babies kept by the fixed-point engine.
const DOT_BABIES: u64 = 512;

/// `frac(G / p^m)` for `m = 0..=len` in units of 2^-64, each at most 2 units low.
fn frac_table(g: &[u32], p: u64, len: usize) -> Vec<u64> {
    let div = kernel::DivP::new(p);
    let mut r = Vec::with_capacity(len + 1);
    let mut cur = 0u64;
    r.push(0);
    for m in 1..=len {
        let d = g.get(m - 1).copied().unwrap_or(0) as u64;
        // floor((d·2^64 + cur) / p) by two 32-bit long-division steps
        let (q1, r1) = div.divrem((d << 32) | (cur >> 32));
        let (q2, _) = div.divrem((r1 << 32) | (cur & 0xffff_ffff));
        cur = (q1 << 32) | q2;
        r.push(cur);
    }
    r
}

struct DotPlan {
    k: usize,
    pw: u64,
    /// Fractional bits that must separate `frac(Y)` from 1 for the digits to be certain.
    margin: u64,
}

impl DotPlan {
    fn new(p: u32, width: usize, hi_max: usize, extra_margin: u64) -> Option<Self> {
        let pw = (p as u64).checked_pow(width as u32)?;
        let mut best = None;
        let mut k = 1usize;
        loop {
            let base = (p as f64).powi(k as i32);
            let limbs = hi_max.div_ceil(k) as f64;
            let err = limbs * base * 2.0 * pw as f64;
            if base >= 2f64.powi(40) || err > DOT_ERROR_BUDGET {
                break;
            }
            best = Some(DotPlan { k, pw, margin: err.ceil() as u64 + 1 + extra_margin });
            k += 1;
        }
        best
    }
}

#[inline(always)]
fn wrapping_dot_plain(a: &[u64], b: &[u64]) -> u64 {
    let mut acc = [0u64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for i in 0..8 {
            acc[i] = acc[i].wrapping_add(x[i].wrapping_mul(y[i]));
        }
    }
    let tail = ca.remainder().iter().zip(cb.remainder()).fold(0u64, |s, (&x, &y)| s.wrapping_add(x.wrapping_mul(y)));
    acc.iter().fold(tail, |s, &v| s.wrapping_add(v))
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f,avx512dq")]
unsafe fn wrapping_dot_avx512(a: &[u64], b: &[u64]) -> u64 {
    wrapping_dot_plain(a, b)
}

/// `Σ a_i·b_i mod 2^64`.
fn wrapping_dot(a: &[u64], b: &[u64]) -> u64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx512dq") {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { wrapping_dot_avx512(a, b) };
        }
    }
    wrapping_dot_plain(a, b)
}

/// Fixed-point engine; returns `false` when the window is too wide for it.
fn dot_engine(p: u32, w: &[u32], u: &[u32], layout: Layout, n_max: u64, out: &mut [u32], extra_margin: u64) -> bool {
    let width = layout.width;
    let hi_max = (1..=n_max).map(|n| layout.hi(n)).max().unwrap_or(0);
    if hi_max <= 0 {
        return true;
    }
    let hi_max = hi_max as usize;
    let Some(plan) = DotPlan::new(p, width, hi_max, extra_margin) else {
        return false;
    };
    let Some(mut top) = LimbRing::for_digits(p, hi_max) else {
        return false;
    };
    let pu = p as u64;
    // babies u^1..u^B at full precision, as base-p^k limbs for the dot products
    let babies = DOT_BABIES.min(n_max);
    let ul = top.from_digits(u);
    let u_spec = top.spectrum(&ul);
    let mut cur = ul.clone();
    let mut baby_limbs = Vec::with_capacity(babies as usize);
    let mut last_baby = Vec::new();
    for b in 1..=babies {
        if b > 1 {
            let s = top.spectrum(&cur);
            cur = top.product_or_exact(&s, &u_spec, &cur, &ul);
        }
        let d = kernel::from_limbs(&cur, p, top.k, hi_max);
        baby_limbs.push(kernel::to_limbs(&d, p, plan.k));
        if b == babies {
            last_baby = d;
        }
    }
    drop(top);
    let mut n = 1;
    while n <= n_max {
        let need = layout.hi(n).max(1) as usize;
        let Some(mut ring) = LimbRing::for_digits(p, need) else {
            return false;
        };
        let last = layout.last_within(n, n_max, ring.digits() as i64);
        let len = ring.digits();
        let ul = ring.from_digits(u);
        let step = ring.from_digits(&last_baby);
        let step_spec = ring.spectrum(&step);
        let mut giant = ring.pow(&ul, n - 1);
        giant = ring.mul(&ring.from_digits(w), &giant);
        'giants: loop {
            let g_digits = kernel::from_limbs(&giant, p, ring.k, len);
            let r = frac_table(&g_digits, pu, len);
            // R split by residue mod k and reversed, so every dot product reads forward
            let by_residue: Vec<Vec<u64>> = (0..plan.k)
                .map(|c| {
                    let mut v: Vec<u64> = r.iter().skip(c).step_by(plan.k).copied().collect();
                    v.reverse();
                    v
                })
                .collect();
            for limbs in &baby_limbs {
                let hi = layout.hi(n);
                let row = row_mut(out, width, n);
                if hi > 0 {
                    let h = hi as usize;
                    let (c, j) = (h % plan.k, h / plan.k);
                    let rc = &by_residue[c];
                    let take = (j + 1).min(limbs.len());
                    let start = rc.len() - 1 - j;
                    let s = wrapping_dot(&limbs[..take], &rc[start..start + take]);
                    let y = s as u128 * plan.pw as u128;
                    let frac = y as u64;
                    let lo = layout.lo(n);
                    if frac.checked_add(plan.margin).is_some() {
                        let top_digits = (y >> 64) as u64;
                        let base = h as i64 - width as i64;
                        extract(row, lo, |t| {
                            let e = (t as i64 - base) as u32;
                            ((top_digits / pu.pow(e)) % pu) as u32
                        });
                    } else {
                        let ub = kernel::from_limbs(limbs, p, plan.k, h);
                        let q = kernel::mul(&g_digits, &ub, p, true, h);
                        extract(row, lo, |t| q[t]);
                    }
                }
                if n == last {
                    break 'giants;
                }
                n += 1;
            }
            let gs = ring.spectrum(&giant);
            giant = ring.product_or_exact(&gs, &step_spec, &giant, &step);
        }
        n = last + 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element(spec: FieldSpec, v: i64, rel: usize, seed: u64) -> LocalFieldElement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = spec.p();
        let mut d: Vec<u32> = (0..rel).map(|_| rng.gen_range(0..p)).collect();
        d[0] = rng.gen_range(1..p);
        LocalFieldElement::from_digits(spec, v, &d, v + rel as i64).unwrap()
    }

    fn agree(spec: FieldSpec, a: i64, v: i64, n_max: u64, window: usize, seed: u64) {
        let rel = (window as i64 - a - v * n_max as i64).max(window as i64) as usize + 4;
        let alpha = if a == 0 && seed % 2 == 0 {
            LocalFieldElement::one(spec, rel as i64)
        } else {
            random_element(spec, a, rel, seed ^ 0xabc)
        };
        let x = random_element(spec, v, rel, seed);
        let fast = power_orbit(&alpha, &x, n_max, window).unwrap();
        let slow = power_orbit_reference(&alpha, &x, n_max, window).unwrap();
        let generic = power_orbit_generic(&alpha, &x, n_max, window).unwrap();
        assert_eq!(fast, slow, "{spec} a={a} v={v}");
        assert_eq!(generic, slow, "{spec} a={a} v={v}");
        if spec.is_char_zero() {
            let fft = orbit_with(&alpha, &x, n_max, window, Engine::Fft).unwrap();
            assert_eq!(fft, slow, "{spec} a={a} v={v}");
        }
    }

    #[test]
    fn engines_agree_char_zero() {
        for (i, &p) in [2u32, 3, 5, 7, 65521].iter().enumerate() {
            let spec = FieldSpec::qp(p).unwrap();
            agree(spec, 0, -1, 300, 3, i as u64);
            agree(spec, 2, -1, 120, 2, 10 + i as u64);
            agree(spec, -1, -2, 90, 4, 20 + i as u64);
            agree(spec, 0, 1, 20, 3, 30 + i as u64);
            agree(spec, 0, 0, 40, 3, 40 + i as u64);
        }
    }

    #[test]
    fn engines_agree_char_p() {
        for (i, &p) in [2u32, 3, 5].iter().enumerate() {
            let spec = FieldSpec::fpt(p).unwrap();
            for seed in 0..4 {
                agree(spec, 0, -1, 400, 3, 100 * seed + i as u64);
            }
            agree(spec, 1, -1, 150, 2, 7 + i as u64);
            agree(spec, 0, -3, 100, 5, 8 + i as u64);
        }
    }

    #[test]
    fn long_orbit_crosses_regimes() {
        let spec = FieldSpec::qp(5).unwrap();
        let x = random_element(spec, -1, 3000, 99);
        let one = LocalFieldElement::one(spec, 3000);
        let fast = power_orbit(&one, &x, 2900, 2).unwrap();
        let slow = power_orbit_generic(&one, &x, 2900, 2).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn fixed_point_fallback_is_exact() {
        let spec = FieldSpec::qp(3).unwrap();
        let x = random_element(spec, -1, 400, 5);
        let one = LocalFieldElement::one(spec, 400);
        let layout = Layout { a: 0, v: -1, width: 2 };
        let mut forced = vec![0u32; 2 * 350];
        // a margin this large sends every row through the exact product
        assert!(dot_engine(3, one.unit_digits(), x.unit_digits(), layout, 350, &mut forced, u64::MAX / 2));
        let slow = power_orbit_reference(&one, &x, 350, 2).unwrap();
        assert_eq!(forced, slow.digits);
    }

    #[test]
    fn frobenius_doubles_char_two_orbits() {
        // over 𝔽_2, (xⁿ)² = x^{2n} spreads the digits of [xⁿ] onto even indices
        let spec = FieldSpec::fpt(2).unwrap();
        let x = random_element(spec, -1, 700, 3);
        let one = LocalFieldElement::one(spec, 700);
        let orbit = power_orbit(&one, &x, 600, 6).unwrap();
        for m in 1..=300 {
            let (half, full) = (orbit.row(m), orbit.row(2 * m));
            for j in 0..6 {
                assert_eq!(full[j], if j % 2 == 0 { half[j / 2] } else { 0 });
            }
        }
    }

    #[test]
    fn precision_is_checked() {
        let spec = FieldSpec::qp(3).unwrap();
        let x = random_element(spec, -1, 50, 1);
        let one = LocalFieldElement::one(spec, 200);
        assert!(matches!(power_orbit(&one, &x, 100, 1), Err(Error::InsufficientPrecision(_))));
        assert!(power_orbit(&one, &x, 40, 1).is_ok());
    }

    #[test]
    fn cell_index_reads_low_digits_first() {
        let spec = FieldSpec::qp(5).unwrap();
        let one = LocalFieldElement::one(spec, 10);
        let x = LocalFieldElement::from_i64(7, spec, 10);
        let w = power_orbit(&one, &x, 2, 2).unwrap();
        // 7 = 2 + 1·5, 49 = 4 + 4·5 + 1·25
        assert_eq!(w.row(1), &[2, 1]);
        assert_eq!(w.cell_index(1, 2), 7);
        assert_eq!(w.cell_index(2, 2), 24);
    }
}
