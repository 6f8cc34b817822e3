//! Real-input FFT convolution on `f64`, built on a half-length complex transform.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct RealFft {
    n: usize,
    half: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    twiddles: Vec<Complex64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl RealFft {
    /// Transform of real length `n` (a power of two, at least 4).
    pub(crate) fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 4);
        let half = n / 2;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(half);
        let inv = planner.plan_fft_inverse(half);
        let twiddles = (0..=half)
            .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        RealFft {
            n,
            half,
            fwd,
            inv,
            twiddles,
            buf: vec![Complex64::new(0.0, 0.0); half],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    pub(crate) fn spectrum_len(&self) -> usize {
        self.half + 1
    }

    /// Forward transform of `x` zero-padded to `n`. `out` has `n/2 + 1` bins.
    pub(crate) fn forward(&mut self, x: &[f64], out: &mut [Complex64]) {
        debug_assert!(x.len() <= self.n && out.len() == self.half + 1);
        for (k, b) in self.buf.iter_mut().enumerate() {
            let re = x.get(2 * k).copied().unwrap_or(0.0);
            let im = x.get(2 * k + 1).copied().unwrap_or(0.0);
            *b = Complex64::new(re, im);
        }
        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        let m = self.half;
        for k in 0..=m {
            let zk = self.buf[k % m];
            let zmk = self.buf[(m - k) % m].conj();
            let e = (zk + zmk) * 0.5;
            let d = zk - zmk;
            let o = Complex64::new(d.im * 0.5, -d.re * 0.5);
            out[k] = e + self.twiddles[k] * o;
        }
    }

    /// Inverse transform, normalized, writing `n` real samples.
    pub(crate) fn inverse(&mut self, spec: &[Complex64], out: &mut [f64]) {
        debug_assert!(spec.len() == self.half + 1 && out.len() >= self.n);
        let m = self.half;
        for k in 0..m {
            let xk = spec[k];
            let xmk = spec[m - k].conj();
            let e = (xk + xmk) * 0.5;
            let o = (xk - xmk) * 0.5 * self.twiddles[k].conj();
            self.buf[k] = Complex64::new(e.re - o.im, e.im + o.re);
        }
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
        let s = 1.0 / m as f64;
        for k in 0..m {
            out[2 * k] = self.buf[k].re * s;
            out[2 * k + 1] = self.buf[k].im * s;
        }
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, RealFft>> = RefCell::new(HashMap::new());
}

pub(crate) fn with_plan<T>(n: usize, f: impl FnOnce(&mut RealFft) -> T) -> T {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        let plan = map.entry(n).or_insert_with(|| RealFft::new(n));
        f(plan)
    })
}

/// Linear convolution of `a` and `b`, first `out_len` coefficients.
/// Returns `None` when the rounding error is too large to trust.
pub(crate) fn convolve(a: &[u64], b: &[u64], out_len: usize) -> Option<Vec<u64>> {
    let a = &a[..a.len().min(out_len)];
    let b = &b[..b.len().min(out_len)];
    if a.is_empty() || b.is_empty() {
        return Some(vec![0; out_len]);
    }
    let full = a.len() + b.len() - 1;
    let n = full.next_power_of_two().max(4);
    let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
    let bf: Vec<f64> = b.iter().map(|&v| v as f64).collect();
    with_plan(n, |plan| {
        let mut sa = vec![Complex64::new(0.0, 0.0); plan.spectrum_len()];
        let mut sb = sa.clone();
        plan.forward(&af, &mut sa);
        plan.forward(&bf, &mut sb);
        for (x, y) in sa.iter_mut().zip(&sb) {
            *x *= *y;
        }
        let mut out = vec![0.0; plan.len()];
        plan.inverse(&sa, &mut out);
        let mut res = vec![0u64; out_len];
        let mut worst = 0.0f64;
        for (r, &v) in res.iter_mut().zip(out.iter().take(full)) {
            let rv = v.round();
            worst = worst.max((v - rv).abs());
            *r = rv.max(0.0) as u64;
        }
        (worst < 0.2).then_some(res)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[u64], b: &[u64], len: usize) -> Vec<u64> {
        let mut c = vec![0u64; len];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                if i + j < len {
                    c[i + j] += x * y;
                }
            }
        }
        c
    }

    #[test]
    fn matches_schoolbook() {
        let a: Vec<u64> = (0..300).map(|i| (i * 7919 + 13) % 15625).collect();
        let b: Vec<u64> = (0..257).map(|i| (i * 104729 + 5) % 15625).collect();
        for len in [1, 100, 556, 600] {
            assert_eq!(convolve(&a, &b, len).unwrap(), naive(&a, &b, len));
        }
    }

    #[test]
    fn round_trip() {
        let mut plan = RealFft::new(16);
        let x: Vec<f64> = (0..16).map(|i| (i * i) as f64).collect();
        let mut s = vec![Complex64::new(0.0, 0.0); 9];
        plan.forward(&x, &mut s);
        let mut y = vec![0.0; 16];
        plan.inverse(&s, &mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
