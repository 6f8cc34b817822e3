//! Quadratic Pisot–Chabauty numbers `ξ = (−1 − √(1 − 4p^{k+l}))/(2p^k)` and their
//! trace sequences, whose integral powers accumulate only at 0 and −1.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{is_prime, FieldSpec, LocalFieldElement, GUARD_DIGITS};
use crate::rational::{self, pow_int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PisotChabautySpec {
    pub p: u32,
    pub k: u32,
    pub l: u32,
}

impl PisotChabautySpec {
    pub fn new(p: u32, k: u32, l: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return invalid(format!("{p} is not prime"));
        }
        if l < 1 || k <= l {
            return invalid(format!("need k > l >= 1, got k={k} l={l}"));
        }
        FieldSpec::qp(p)?;
        Ok(PisotChabautySpec { p, k, l })
    }

    pub fn field(&self) -> FieldSpec {
        FieldSpec::qp(self.p).expect("validated prime")
    }

    /// Least n with `2p^{(l−k)n/2} < 1`, i.e. `p^{(k−l)n} > 4`; from there on `|T_n|_∞ < 1`.
    pub fn n0(&self) -> u64 {
        let step = BigInt::from(self.p).pow(self.k - self.l);
        let mut acc = step.clone();
        let mut n = 1;
        while acc <= BigInt::from(4) {
            acc *= &step;
            n += 1;
        }
        n
    }
}

/// ξ with `prec` significant digits. The square-root branch is the one ≡ 1 mod p
/// (mod 4 when p = 2), which makes `|ξ|_p = p^k`.
pub fn pisot_value(spec: &PisotChabautySpec, prec: i64) -> Result<LocalFieldElement> {
    let f = spec.field();
    let k = spec.k as i64;
    let work = prec + k + 2 + GUARD_DIGITS;
    let four_pkl = BigInt::from(4) * BigInt::from(spec.p).pow(spec.k + spec.l);
    let disc = LocalFieldElement::from_rational_abs(&(BigInt::one() - four_pkl), &BigInt::one(), f, work)?;
    let s = disc.hensel_sqrt(Some(1))?;
    let minus_one = LocalFieldElement::from_i64(-1, f, work);
    let den = LocalFieldElement::from_i64(2, f, work).mul(&LocalFieldElement::pi_power(f, k, work + k))?;
    let xi = minus_one.sub(&s)?.div(&den)?;
    if xi.val() != Some(-k) {
        return Err(Error::NoSquareRoot(format!("selected root has valuation {:?}, expected {}", xi.val(), -k)));
    }
    Ok(xi.truncate(-k + prec))
}

/// `T_0..T_{n_max}` with `T_{n+2} = −p^{−k}T_{n+1} − p^{l−k}T_n`, `T_0 = 2`, `T_1 = −p^{−k}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSequence {
    #[serde(with = "rational::serde_rational_vec")]
    pub terms: Vec<Rational>,
}

pub fn trace_sequence(spec: &PisotChabautySpec, n_max: usize) -> Result<TraceSequence> {
    if n_max < 2 {
        return invalid("n_max must be at least 2");
    }
    let (k, l) = (spec.k as i64, spec.l as i64);
    let sum = -pow_int(spec.p, -k);
    let prod = pow_int(spec.p, l - k);
    let mut terms = vec![rational::int(2), sum.clone()];
    for n in 2..=n_max {
        let next = &sum * &terms[n - 1] - &prod * &terms[n - 2];
        terms.push(next);
    }
    for t in &terms {
        let mut d = t.denom().clone();
        while (&d % BigInt::from(spec.p)).is_zero() {
            d /= BigInt::from(spec.p);
        }
        assert!(d.is_one(), "trace denominators are powers of p");
    }
    Ok(TraceSequence { terms })
}

/// `T_n² ≤ 4p^{(l−k)n}`, the Archimedean bound from the complex-conjugate pair.
pub fn archimedean_bound_holds(spec: &PisotChabautySpec, n: usize, t: &Rational) -> bool {
    let bound = Rational::from_integer(BigInt::from(4)) * pow_int(spec.p, (spec.l as i64 - spec.k as i64) * n as i64);
    t * t <= bound
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitPointRow {
    pub n: u64,
    /// Norm exponents (`None` for zero); `|y| = p^e`.
    pub int_part_norm: Option<i64>,
    pub int_part_plus_one_norm: Option<i64>,
    pub trace_gap_norm: Option<i64>,
    /// `[T_n] ∈ {0, −1}`; only claimed for `n ≥ n_0`.
    pub trace_int_in_set: Option<bool>,
    /// `|ξⁿ − T_n|_p = p^{−ln}` and `min(|[ξⁿ]|, |[ξⁿ]+1|) ≤ p^{−ln}`; only for `n ≥ n_0`.
    pub claim_holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitPointTable {
    pub spec: PisotChabautySpec,
    pub n0: u64,
    pub rows: Vec<LimitPointRow>,
}

impl LimitPointTable {
    pub fn all_claims_hold(&self) -> bool {
        self.rows.iter().all(|r| r.claim_holds != Some(false))
    }

    pub fn csv_header() -> Vec<&'static str> {
        vec!["n", "int_part_norm", "int_part_plus_one_norm", "trace_gap_norm", "trace_int_in_set", "claim_holds"]
    }

    pub fn csv_records(&self) -> Vec<Vec<String>> {
        let e = |x: Option<i64>| x.map_or("-inf".to_string(), |v| v.to_string());
        let b = |x: Option<bool>| x.map_or(String::new(), |v| v.to_string());
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    e(r.int_part_norm),
                    e(r.int_part_plus_one_norm),
                    e(r.trace_gap_norm),
                    b(r.trace_int_in_set),
                    b(r.claim_holds),
                ]
            })
            .collect()
    }
}

/// Significant digits of ξ needed to resolve `ξⁿ − T_n` for every `n ≤ n_max`.
pub fn required_precision(spec: &PisotChabautySpec, n_max: usize) -> i64 {
    (spec.k + spec.l) as i64 * n_max as i64 + GUARD_DIGITS
}

/// `ξ¹, …, ξ^{n_max}`.
pub fn pisot_powers(spec: &PisotChabautySpec, n_max: usize, prec: i64) -> Result<Vec<LocalFieldElement>> {
    let xi = pisot_value(spec, prec)?;
    let mut out = Vec::with_capacity(n_max);
    let mut acc = xi.clone();
    for _ in 0..n_max {
        out.push(acc.clone());
        acc = acc.mul(&xi)?;
    }
    Ok(out)
}

pub fn limit_point_table(spec: &PisotChabautySpec, n_max: usize, prec: i64) -> Result<LimitPointTable> {
    let need = required_precision(spec, n_max);
    if prec < need {
        return Err(Error::InsufficientPrecision(format!("need {need} digits of xi for n <= {n_max}, got {prec}")));
    }
    let f = spec.field();
    let traces = trace_sequence(spec, n_max.max(2))?;
    let n0 = spec.n0();
    let l = spec.l as i64;
    let powers = pisot_powers(spec, n_max, prec)?;
    let mut rows = Vec::with_capacity(n_max);
    for (i, xn) in powers.iter().enumerate() {
        let n = i as u64 + 1;
        let work = xn.abs_precision();
        let ip = xn.integral_part()?;
        let ip1 = ip.add(&LocalFieldElement::one(f, work))?;
        let t = &traces.terms[n as usize];
        let t_emb = LocalFieldElement::from_rational_scalar_abs(t, f, work)?;
        let gap = xn.sub(&t_emb)?;
        let norm = |x: &LocalFieldElement| x.norm_exponent().finite();
        let (a, b, g) = (norm(&ip), norm(&ip1), norm(&gap));
        let (in_set, claim) = if n >= n0 {
            let t_int = t_emb.integral_part()?;
            let in_set = t_int.is_zero() || t_int.add(&LocalFieldElement::one(f, work))?.is_zero();
            let target = -l * n as i64;
            let best = a.into_iter().chain(b).min();
            let closest_ok = match (a, b) {
                (None, _) | (_, None) => true,
                _ => best.is_some_and(|m| m <= target),
            };
            (Some(in_set), Some(in_set && g == Some(target) && closest_ok))
        } else {
            (None, None)
        };
        rows.push(LimitPointRow {
            n,
            int_part_norm: a,
            int_part_plus_one_norm: b,
            trace_gap_norm: g,
            trace_int_in_set: in_set,
            claim_holds: claim,
        });
    }
    Ok(LimitPointTable { spec: *spec, n0, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn check_min_poly(s: &PisotChabautySpec) {
        let xi = pisot_value(s, 60).unwrap();
        let f = s.field();
        assert_eq!(xi.val(), Some(-(s.k as i64)));
        let pk = LocalFieldElement::pi_power(f, s.k as i64, 200);
        let pl = LocalFieldElement::pi_power(f, s.l as i64, 200);
        let r = pk.mul(&xi.mul(&xi).unwrap()).unwrap().add(&xi).unwrap().add(&pl).unwrap();
        assert!(r.is_zero(), "p^k xi^2 + xi + p^l = {r}");
    }

    #[test]
    fn minimal_polynomial() {
        for &(p, k, l) in &[(3, 2, 1), (5, 3, 1), (2, 2, 1), (7, 4, 3)] {
            check_min_poly(&PisotChabautySpec::new(p, k, l).unwrap());
        }
        assert!(PisotChabautySpec::new(3, 1, 1).is_err());
    }

    #[test]
    fn trace_examples() {
        let s = PisotChabautySpec::new(3, 2, 1).unwrap();
        let t = trace_sequence(&s, 10).unwrap();
        assert_eq!(t.terms[0], rational::int(2));
        assert_eq!(t.terms[1], ratio(-1, 9));
        assert_eq!(t.terms[2], ratio(-53, 81));
        assert_eq!(&t.terms[2], &(&t.terms[1] * &t.terms[1] - ratio(2, 3)));
        for n in 3..=10 {
            assert!(archimedean_bound_holds(&s, n, &t.terms[n]));
        }
        assert_eq!(s.n0(), 2);
    }

    #[test]
    fn table_claims() {
        let s = PisotChabautySpec::new(3, 2, 1).unwrap();
        let table = limit_point_table(&s, 20, required_precision(&s, 20)).unwrap();
        assert!(table.all_claims_hold());
        assert!(table.rows[0].claim_holds.is_none());
        let row = &table.rows[9];
        assert_eq!(row.trace_gap_norm, Some(-10));
        assert!(limit_point_table(&s, 20, 10).is_err());
    }
}
