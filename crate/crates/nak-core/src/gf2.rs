//! Bit-packed polynomial multiplication over 𝔽_2 (carry-less Karatsuba).

const CUTOFF: usize = 24;

fn clmul_soft(a: u64, b: u64) -> (u64, u64) {
    let (mut lo, mut hi) = (0u64, 0u64);
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            lo ^= a << i;
            if i > 0 {
                hi ^= a >> (64 - i);
            }
        }
    }
    (lo, hi)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq,sse4.1")]
unsafe fn school_hw(a: &[u64], b: &[u64], out: &mut [u64]) {
    use std::arch::x86_64::*;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        let xa = _mm_set_epi64x(0, x as i64);
        for (j, &y) in b.iter().enumerate() {
            let r = _mm_clmulepi64_si128(xa, _mm_set_epi64x(0, y as i64), 0x00);
            out[i + j] ^= _mm_cvtsi128_si64(r) as u64;
            out[i + j + 1] ^= _mm_extract_epi64(r, 1) as u64;
        }
    }
}

fn school(a: &[u64], b: &[u64], out: &mut [u64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("pclmulqdq") && std::is_x86_feature_detected!("sse4.1") {
            // SAFETY: the required CPU features were detected at runtime.
            unsafe { school_hw(a, b, out) };
            return;
        }
    }
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let (lo, hi) = clmul_soft(x, y);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
}

/// `out ^= a * b` for equal-length operands; `out.len() >= 2 * a.len()`.
fn kara(a: &[u64], b: &[u64], out: &mut [u64], scratch: &mut [u64]) {
    let n = a.len();
    if n <= CUTOFF {
        school(a, b, out);
        return;
    }
    let h = n / 2;
    let w = n - h;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let (sa, rest) = scratch.split_at_mut(w);
    let (sb, rest) = rest.split_at_mut(w);
    let (z, rest) = rest.split_at_mut(2 * w);
    sa.copy_from_slice(a1);
    sb.copy_from_slice(b1);
    for i in 0..h {
        sa[i] ^= a0[i];
        sb[i] ^= b0[i];
    }
    z.iter_mut().for_each(|v| *v = 0);
    kara(sa, sb, z, rest);
    // z currently holds (a0+a1)(b0+b1); add z0 and z2 into it while placing them in out.
    let (t0, rest2) = rest.split_at_mut(2 * h);
    t0.iter_mut().for_each(|v| *v = 0);
    kara(a0, b0, t0, rest2);
    for i in 0..2 * h {
        out[i] ^= t0[i];
        z[i] ^= t0[i];
    }
    let (t2, rest3) = rest2.split_at_mut(2 * w);
    t2.iter_mut().for_each(|v| *v = 0);
    kara(a1, b1, t2, rest3);
    for i in 0..2 * w {
        out[2 * h + i] ^= t2[i];
        z[i] ^= t2[i];
    }
    for i in 0..2 * w {
        out[h + i] ^= z[i];
    }
}

fn scratch_len(n: usize) -> usize {
    if n <= CUTOFF {
        return 0;
    }
    let w = n - n / 2;
    4 * w + 2 * (n / 2) + 2 * w + scratch_len(w)
}

/// Full product of two bit-packed polynomials.
pub(crate) fn mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    if n == 0 {
        return Vec::new();
    }
    let mut pa = a.to_vec();
    pa.resize(n, 0);
    let mut pb = b.to_vec();
    pb.resize(n, 0);
    let mut out = vec![0u64; 2 * n];
    let mut scratch = vec![0u64; scratch_len(n)];
    kara(&pa, &pb, &mut out, &mut scratch);
    out
}

/// Reusable multiplier for products truncated to a fixed number of bits.
pub(crate) struct TruncMul {
    words: usize,
    bits: usize,
    out: Vec<u64>,
    scratch: Vec<u64>,
}

impl TruncMul {
    pub(crate) fn new(bits: usize) -> Self {
        let words = bits.div_ceil(64).max(1);
        TruncMul { words, bits, out: vec![0; 2 * words], scratch: vec![0; scratch_len(words)] }
    }

    /// `dst = a * b mod t^bits`; operands hold `bits.div_ceil(64)` words.
    pub(crate) fn mul_into(&mut self, a: &[u64], b: &[u64], dst: &mut [u64]) {
        self.out.iter_mut().for_each(|v| *v = 0);
        kara(a, b, &mut self.out, &mut self.scratch);
        dst[..self.words].copy_from_slice(&self.out[..self.words]);
        mask_to(dst, self.bits);
    }
}

pub(crate) fn mask_to(v: &mut [u64], bits: usize) {
    let full = bits / 64;
    let rem = bits % 64;
    if full < v.len() {
        if rem > 0 {
            v[full] &= (1u64 << rem) - 1;
            v[full + 1..].iter_mut().for_each(|x| *x = 0);
        } else {
            v[full..].iter_mut().for_each(|x| *x = 0);
        }
    }
}

pub(crate) fn pack(bits: &[u32]) -> Vec<u64> {
    let mut v = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            v[i / 64] |= 1 << (i % 64);
        }
    }
    v
}

pub(crate) fn unpack(words: &[u64], len: usize) -> Vec<u32> {
    (0..len)
        .map(|i| words.get(i / 64).map_or(0, |w| ((w >> (i % 64)) & 1) as u32))
        .collect()
}
