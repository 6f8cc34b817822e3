//! Moran (q-homogeneous) sets: lacunary schedules, the greedy point
//! constructor with membership certificates, branch levels, dimension
//! formulas and the isometric digit encoder.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{vp_u64, FieldSpec, LocalFieldElement, GUARD_DIGITS};
use crate::measures::Disk;
use crate::rational::{self, Rational};
use crate::scaling::{ScalingExponent, ScalingMapSpec};

/// The target sequence `b_n ∈ 𝒪`, indexed by constraint (index 0 is reserved
/// for instances whose start disk absorbs a first target).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Targets {
    Constant { value: LocalFieldElement },
    List { values: Vec<LocalFieldElement> },
    Seeded { seed: u64 },
}

impl Targets {
    pub fn zero(spec: FieldSpec) -> Self {
        Targets::Constant { value: LocalFieldElement::zero(spec, 0) }
    }

    /// `b_n`, as an exact representative known past `π^h`.
    pub fn target(&self, n: usize, h: i64, spec: FieldSpec) -> Result<LocalFieldElement> {
        let prec = h.max(0) + GUARD_DIGITS;
        let b = match self {
            Targets::Constant { value } => value.clone(),
            Targets::List { values } => values
                .get(n)
                .cloned()
                .ok_or_else(|| Error::InvalidInput(format!("no target with index {n}")))?,
            Targets::Seeded { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(n as u64);
                let digits: Vec<u32> = (0..h.max(0)).map(|_| rng.gen_range(0..spec.p())).collect();
                LocalFieldElement::from_digits(spec, 0, &digits, h.max(0))?
            }
        };
        if b.spec() != spec {
            return invalid("target lives in a different field");
        }
        if b.val().is_some_and(|v| v < 0) {
            return invalid(format!("target {n} is not in the valuation ring"));
        }
        Ok(b.pad_to(prec))
    }
}

/// Constraint data for `Γ_{b,H}`: start radius exponent, ratio exponents λ_n and depths H_n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoranSchedule {
    h0: i64,
    #[serde(with = "rational::serde_bigint_vec")]
    lambdas: Vec<BigInt>,
    #[serde(with = "rational::serde_bigint_vec")]
    hs: Vec<BigInt>,
    targets: Targets,
    #[serde(default, with = "rational::serde_rational_opt")]
    analytic_limit: Option<Rational>,
}

impl MoranSchedule {
    pub fn from_big(
        h0: i64,
        lambdas: Vec<BigInt>,
        hs: Vec<BigInt>,
        targets: Targets,
        analytic_limit: Option<Rational>,
    ) -> Result<Self> {
        let s = MoranSchedule { h0, lambdas, hs, targets, analytic_limit };
        s.validate()?;
        Ok(s)
    }

    pub fn explicit(h0: i64, lambdas: &[i64], hs: &[i64], targets: Targets) -> Result<Self> {
        Self::from_big(
            h0,
            lambdas.iter().map(|&l| BigInt::from(l)).collect(),
            hs.iter().map(|&h| BigInt::from(h)).collect(),
            targets,
            None,
        )
    }

    /// λ at the j-th constraint is `slope·(first_index + j − 1) + intercept`, H constant.
    pub fn linear(
        slope: i64,
        intercept: i64,
        h: i64,
        first_index: i64,
        h0: i64,
        count: usize,
        targets: Targets,
    ) -> Result<Self> {
        if slope <= 0 {
            return Err(Error::InvalidSchedule("linear schedules need a positive slope".into()));
        }
        let lambdas = (0..count as i64).map(|j| BigInt::from(slope * (first_index + j) + intercept)).collect();
        let hs = vec![BigInt::from(h); count];
        // λ grows like slope·n while ΣH grows like h·n
        let limit = Rational::new(BigInt::from(slope - h), BigInt::from(slope));
        Self::from_big(h0, lambdas, hs, targets, Some(limit))
    }

    /// Re-checks the lacunary invariants (useful after deserialization).
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if self.lambdas.len() != self.hs.len() {
            return bad("lambda and H sequences differ in length".into());
        }
        if let Some(j) = self.hs.iter().position(|h| h.is_negative()) {
            return bad(format!("H_{} is negative", j + 1));
        }
        if let Some(l1) = self.lambdas.first() {
            if *l1 < BigInt::from(self.h0) {
                return bad(format!("lambda_1 = {l1} is below H_0 = {}", self.h0));
            }
        }
        for j in 1..self.lambdas.len() {
            if &self.lambdas[j] - &self.lambdas[j - 1] < self.hs[j - 1] {
                return bad(format!("lambda_{} - lambda_{} is below H_{}", j + 1, j, j));
            }
        }
        Ok(())
    }

    pub fn h0(&self) -> i64 {
        self.h0
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// λ_j, 1-based.
    pub fn lambda(&self, j: usize) -> &BigInt {
        &self.lambdas[j - 1]
    }

    /// H_j, 1-based.
    pub fn h(&self, j: usize) -> &BigInt {
        &self.hs[j - 1]
    }

    pub fn lambda_i64(&self, j: usize) -> Result<i64> {
        self.lambda(j).to_i64().ok_or_else(|| Error::TooLarge(format!("lambda_{j} does not fit 64 bits")))
    }

    pub fn h_i64(&self, j: usize) -> Result<i64> {
        self.h(j).to_i64().ok_or_else(|| Error::TooLarge(format!("H_{j} does not fit 64 bits")))
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn analytic_limit(&self) -> Option<&Rational> {
        self.analytic_limit.as_ref()
    }

    /// Number of leading constraints with `λ_j + H_j ≤ precision`.
    pub fn active_constraints(&self, precision: i64) -> usize {
        let bound = BigInt::from(precision);
        (1..=self.len()).take_while(|&j| self.lambda(j) + self.h(j) <= bound).count()
    }

    /// A copy with `H_j` raised by `by`, if the result stays lacunary.
    pub fn with_raised_h(&self, j: usize, by: i64) -> Result<Self> {
        let mut hs = self.hs.clone();
        hs[j - 1] += by;
        Self::from_big(self.h0, self.lambdas.clone(), hs, self.targets.clone(), None)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaTerm {
    pub n: usize,
    #[serde(with = "rational::serde_rational")]
    pub ratio: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaDim {
    pub horizon: usize,
    pub terms: Vec<GammaTerm>,
    /// Minimum over the terms with `n > horizon/2`.
    pub tail_min: f64,
    #[serde(with = "rational::serde_rational_opt")]
    pub analytic_limit: Option<Rational>,
}

fn tail_min<'a>(terms: impl Iterator<Item = (usize, &'a Rational)>, horizon: usize) -> f64 {
    terms
        .filter(|(n, _)| *n > horizon / 2)
        .map(|(_, r)| rational::to_f64(r))
        .fold(f64::INFINITY, f64::min)
}

/// `(λ_n − Σ_{k<n} H_k)/(λ_n + H_n)` for `n ≤ horizon`.
pub fn gamma_dim(schedule: &MoranSchedule, horizon: usize) -> Result<GammaDim> {
    if horizon == 0 || horizon > schedule.len() {
        return invalid(format!("horizon {horizon} outside 1..={}", schedule.len()));
    }
    schedule.validate()?;
    let mut used = BigInt::zero();
    let mut terms = Vec::with_capacity(horizon);
    for n in 1..=horizon {
        let den = schedule.lambda(n) + schedule.h(n);
        if den.is_positive() {
            terms.push(GammaTerm { n, ratio: Rational::new(schedule.lambda(n) - &used, den) });
        }
        used += schedule.h(n);
    }
    let tail = tail_min(terms.iter().map(|t| (t.n, &t.ratio)), horizon);
    Ok(GammaDim { horizon, terms, tail_min: tail, analytic_limit: schedule.analytic_limit.clone() })
}

/// Base-q logarithms of the branching numbers `m_k`, separations `δ_k` and radii `d_k`
/// of the nested-disk description of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranData {
    pub log_m: Vec<Rational>,
    pub log_delta: Vec<Rational>,
    pub log_d: Vec<Rational>,
}

pub fn moran_data(schedule: &MoranSchedule, horizon: usize) -> Result<MoranData> {
    if horizon > schedule.len() {
        return invalid(format!("horizon {horizon} exceeds schedule length {}", schedule.len()));
    }
    let r = |b: BigInt| Rational::from_integer(b);
    let mut data = MoranData { log_m: vec![], log_delta: vec![], log_d: vec![] };
    for n in 1..=horizon {
        let lam = schedule.lambda(n);
        let m = if n == 1 {
            lam - BigInt::from(schedule.h0)
        } else {
            lam - schedule.lambda(n - 1) - schedule.h(n - 1)
        };
        data.log_m.push(r(m));
        data.log_delta.push(r(BigInt::one() - lam));
        data.log_d.push(r(-(lam + schedule.h(n))));
    }
    Ok(data)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoranBounds {
    /// `log(m_1⋯m_{k−1}) / −log(m_k δ_k)` where the denominator is positive.
    pub lower_terms: Vec<Option<f64>>,
    /// `log(m_1⋯m_k) / −log d_k` where the denominator is positive.
    pub upper_terms: Vec<Option<f64>>,
    pub lower: f64,
    pub upper: f64,
}

/// Exact term sequences of both nested-disk dimension bounds.
pub fn moran_bound_terms(
    log_m: &[Rational],
    log_delta: &[Rational],
    log_d: &[Rational],
    horizon: usize,
) -> Result<(Vec<Option<Rational>>, Vec<Option<Rational>>)> {
    if horizon > log_m.len() || horizon > log_delta.len() || horizon > log_d.len() {
        return invalid("horizon exceeds the supplied sequences");
    }
    let mut prefix = Rational::zero();
    let mut lower = Vec::with_capacity(horizon);
    let mut upper = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let den_lo = -(&log_m[k] + &log_delta[k]);
        lower.push(den_lo.is_positive().then(|| &prefix / &den_lo));
        prefix += &log_m[k];
        let den_up = -log_d[k].clone();
        upper.push(den_up.is_positive().then(|| &prefix / &den_up));
    }
    Ok((lower, upper))
}

/// Finite-horizon liminf estimates (tail minimum over `k > horizon/2`) of both bounds.
pub fn moran_bounds(log_m: &[Rational], log_delta: &[Rational], log_d: &[Rational], horizon: usize) -> Result<MoranBounds> {
    let (lo, up) = moran_bound_terms(log_m, log_delta, log_d, horizon)?;
    let tail = |t: &[Option<Rational>]| {
        tail_min(t.iter().enumerate().filter_map(|(i, r)| r.as_ref().map(|r| (i + 1, r))), horizon)
    };
    let as_f64 = |t: &[Option<Rational>]| t.iter().map(|r| r.as_ref().map(rational::to_f64)).collect();
    Ok(MoranBounds { lower: tail(&lo), upper: tail(&up), lower_terms: as_f64(&lo), upper_terms: as_f64(&up) })
}

/// Branch levels of `Γ_{b,H}` below a horizon, stored as inclusive intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchLevels {
    pub intervals: Vec<(i64, i64)>,
    pub horizon: i64,
}

impl BranchLevels {
    pub fn levels(&self) -> Vec<i64> {
        self.intervals.iter().flat_map(|&(a, b)| a..=b).collect()
    }

    pub fn count(&self) -> u64 {
        self.intervals.iter().map(|&(a, b)| (b - a + 1) as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, level: i64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= level && level <= b)
    }
}

/// `[H_0, λ_1 − 1] ∪ ⋃ [λ_n + H_n, λ_{n+1} − 1]` clipped to `[H_0, horizon)`. Levels past
/// the last constraint are free and count as branch levels.
pub fn branch_levels(schedule: &MoranSchedule, horizon: i64) -> Result<BranchLevels> {
    schedule.validate()?;
    let clip = |b: &BigInt| b.to_i64().unwrap_or(if b.is_negative() { i64::MIN } else { i64::MAX }).min(horizon);
    let mut intervals = Vec::new();
    let mut push = |a: i64, b: i64| {
        let b = b.min(horizon - 1);
        if a <= b {
            intervals.push((a, b));
        }
    };
    let mut start = schedule.h0;
    for j in 1..=schedule.len() {
        let lam = clip(schedule.lambda(j));
        push(start, lam.saturating_sub(1));
        start = clip(&(schedule.lambda(j) + schedule.h(j)));
        if start >= horizon {
            break;
        }
    }
    push(start, horizon - 1);
    Ok(BranchLevels { intervals, horizon })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRow {
    pub n: usize,
    pub lambda: i64,
    /// `v([f_n(x)] − b_n)`, capped by the evaluation precision.
    pub achieved: i64,
    pub required: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipCertificate {
    pub rows: Vec<CertificateRow>,
    pub pass: bool,
    pub precision: i64,
}

fn check_ratio(map: &ScalingMapSpec, lambda: i64, j: usize) -> Result<()> {
    match map.scaling_exponent()? {
        ScalingExponent::Scaling(l) if l == lambda => Ok(()),
        other => Err(Error::InvalidSchedule(format!(
            "map {j} has exponent {other:?} but the schedule says {lambda}"
        ))),
    }
}

/// `v([f(x)] − b)` using the zero-padded representative of `x`.
fn constraint_valuation(
    map: &ScalingMapSpec,
    x: &LocalFieldElement,
    b: &LocalFieldElement,
    lambda: i64,
    need: i64,
    guard: i64,
) -> Result<i64> {
    let mut extra = guard;
    for _ in 0..8 {
        let y = map.apply(&x.pad_to(lambda + need + extra))?;
        if y.abs_precision() >= need {
            let diff = y.integral_part()?.sub(b)?;
            let known = diff.abs_precision();
            return Ok(diff.val().map_or(known, |v| v.min(known)));
        }
        extra += need - y.abs_precision() + guard;
    }
    Err(Error::InsufficientPrecision(format!("could not evaluate a constraint to depth {need}")))
}

fn set_digit(x: &LocalFieldElement, level: i64, d: u32) -> Result<LocalFieldElement> {
    if d == 0 {
        return Ok(x.clone());
    }
    x.add(&LocalFieldElement::from_digits(x.spec(), level, &[d], x.abs_precision())?)
}

fn certify_with(
    maps: &[ScalingMapSpec],
    schedule: &MoranSchedule,
    x: &LocalFieldElement,
    precision: i64,
    guard: i64,
) -> Result<MembershipCertificate> {
    let spec = x.spec();
    let active = schedule.active_constraints(precision);
    if maps.len() < active {
        return invalid(format!("{active} constraints are active but only {} maps were given", maps.len()));
    }
    let mut rows = Vec::with_capacity(active);
    for j in 1..=active {
        let lambda = schedule.lambda_i64(j)?;
        let h = schedule.h_i64(j)?;
        check_ratio(&maps[j - 1], lambda, j)?;
        let b = schedule.targets().target(j, h, spec)?;
        let achieved = constraint_valuation(&maps[j - 1], x, &b, lambda, h, guard)?;
        rows.push(CertificateRow { n: j, lambda, achieved, required: h, pass: achieved >= h });
    }
    Ok(MembershipCertificate { pass: rows.iter().all(|r| r.pass), rows, precision })
}

/// Greedy digit descent into `Γ_{b,H} ∩ start`. Every constraint with
/// `λ_n + H_n ≤ precision` is enforced; free levels take digit 0.
pub fn construct_point(
    maps: &[ScalingMapSpec],
    schedule: &MoranSchedule,
    start: &Disk,
    precision: i64,
) -> Result<(LocalFieldElement, MembershipCertificate)> {
    schedule.validate()?;
    let spec = start.spec();
    if start.radius_exponent() != schedule.h0() {
        return invalid(format!(
            "start disk radius exponent {} differs from H_0 = {}",
            start.radius_exponent(),
            schedule.h0()
        ));
    }
    if precision < schedule.h0() {
        return invalid("precision is below the start disk's radius exponent");
    }
    let active = schedule.active_constraints(precision);
    if maps.len() < active {
        return invalid(format!("{active} constraints are active but only {} maps were given", maps.len()));
    }
    let mut x = start.center().pad_to(precision);
    for j in 1..=active {
        let map = &maps[j - 1];
        let lambda = schedule.lambda_i64(j)?;
        let h = schedule.h_i64(j)?;
        check_ratio(map, lambda, j)?;
        let b = schedule.targets().target(j, h, spec)?;
        for t in 0..h {
            let level = lambda + t;
            let mut hits = Vec::new();
            for d in 0..spec.q() {
                let cand = set_digit(&x, level, d)?;
                if constraint_valuation(map, &cand, &b, lambda, t + 1, GUARD_DIGITS)? > t {
                    hits.push(cand);
                }
            }
            x = match hits.len() {
                1 => hits.pop().expect("one candidate"),
                0 => {
                    return Err(Error::ConstructionFailure(format!(
                        "no digit at level {level} satisfies constraint {j}"
                    )))
                }
                k => {
                    return Err(Error::AmbiguityFailure(format!(
                        "{k} digits at level {level} satisfy constraint {j}"
                    )))
                }
            };
        }
    }
    let cert = certify_with(maps, schedule, &x, precision, GUARD_DIGITS)?;
    Ok((x, cert))
}

/// Re-evaluates every constraint with a wider guard; true iff the outcome matches `cert`.
pub fn verify_certificate(
    maps: &[ScalingMapSpec],
    schedule: &MoranSchedule,
    x: &LocalFieldElement,
    cert: &MembershipCertificate,
) -> Result<bool> {
    let fresh = certify_with(maps, schedule, x, cert.precision, 3 * GUARD_DIGITS + 5)?;
    let same_rows = fresh.rows.len() == cert.rows.len()
        && fresh.rows.iter().zip(&cert.rows).all(|(a, b)| a.n == b.n && a.pass == b.pass && a.required == b.required);
    Ok(same_rows && fresh.pass == cert.pass)
}

/// `x ↦ αx^m` on `domain` for each exponent.
pub fn power_maps(
    alpha: &LocalFieldElement,
    exponents: impl IntoIterator<Item = u64>,
    domain: &Disk,
) -> Result<Vec<ScalingMapSpec>> {
    exponents.into_iter().map(|m| ScalingMapSpec::power(alpha.clone(), m, domain.clone())).collect()
}

/// `x ↦ βⁿx` for each index.
pub fn geometric_maps(
    beta: &LocalFieldElement,
    indices: impl IntoIterator<Item = i64>,
    domain: &Disk,
) -> Result<Vec<ScalingMapSpec>> {
    indices.into_iter().map(|n| ScalingMapSpec::geometric(beta.clone(), n, domain.clone())).collect()
}

/// A complete constructor input.
#[derive(Debug, Clone)]
pub struct Instance {
    pub maps: Vec<ScalingMapSpec>,
    pub schedule: MoranSchedule,
    pub start: Disk,
}

/// `x ↦ (3/2)ⁿx` on `D(1/2, 1) ⊂ ℚ_2`, `n ≥ 0`, with `[x(3/2)ⁿ] ∈ 2ℤ_2`.
pub fn three_halves_instance(count: usize) -> Result<Instance> {
    let spec = FieldSpec::qp(2)?;
    let prec = count as i64 + 2 * GUARD_DIGITS;
    let beta = LocalFieldElement::from_ratio(3, 2, spec, prec + count as i64)?;
    let start = Disk::new(LocalFieldElement::from_ratio(1, 2, spec, prec)?, 0)?;
    let maps = geometric_maps(&beta, 0..count as i64, &start)?;
    let schedule = MoranSchedule::linear(1, 0, 1, 0, 0, count, Targets::zero(spec))?;
    Ok(Instance { maps, schedule, start })
}

/// The n-th positive integer not divisible by `p^k`.
pub fn nonmultiple_exponent(n: u64, p: u32, k: u32) -> u64 {
    let pk = (p as u64).pow(k);
    n + (n - 1) / (pk - 1)
}

/// Parameters of the biased-powers family: `|[αx^n] − b_n| ≤ q^{−H}` for every `n` not
/// divisible by `p^K`, realized on a disk of points with `|x| = q^{L}/|α|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasedPowersParams {
    pub k: u32,
    pub h: i64,
    pub l: i64,
    pub alpha: LocalFieldElement,
    pub targets: Targets,
}

/// Start disk `(π^{−L} + b_1)/α + π^{H+S}𝒪` and maps `αx^{m_n}`, `n ≥ 2`.
pub fn biased_powers_instance(params: &BiasedPowersParams, count: usize) -> Result<Instance> {
    let (schedule, exps) = biased_powers_schedule(params, count)?;
    let alpha = &params.alpha;
    let spec = alpha.spec();
    let (h0, l) = (schedule.h0(), params.l);
    let work = h0 + l + GUARD_DIGITS;
    let b1 = params.targets.target(0, params.h, spec)?.pad_to(work + l);
    let center = LocalFieldElement::pi_power(spec, -l, work + l).add(&b1)?.div(&alpha.pad_to(work + l))?;
    let start = Disk::new(center, h0)?;
    let maps = power_maps(alpha, exps, &start)?;
    Ok(Instance { maps, schedule, start })
}

/// The biased-powers schedule alone, with its exponents `m_n`.
pub fn biased_powers_schedule(params: &BiasedPowersParams, count: usize) -> Result<(MoranSchedule, Vec<u64>)> {
    let alpha = &params.alpha;
    let spec = alpha.spec();
    if !spec.is_char_zero() {
        return invalid("the biased-powers family is set in characteristic 0");
    }
    let Some(va) = alpha.val() else {
        return invalid("alpha must be nonzero");
    };
    let (k, h, l) = (params.k, params.h, params.l);
    if k == 0 || h < 1 || l < 1 {
        return invalid("need K >= 1, H >= 1, L >= 1");
    }
    let s = -va;
    if l - s < 1 {
        return invalid("need |x| > 1 on the start disk, i.e. L > log_q|alpha|");
    }
    let p = spec.p();
    let e = spec.e() as i64;
    let exps: Vec<u64> = (2..count as u64 + 2).map(|n| nonmultiple_exponent(n, p, k)).collect();
    let lambdas: Vec<BigInt> = exps
        .iter()
        .map(|&m| BigInt::from(s - e * vp_u64(m, p as u64) as i64 + (l - s) * (m as i64 - 1)))
        .collect();
    let pk = BigInt::from(p).pow(k);
    // λ grows like (L − S)·p^K/(p^K − 1) per constraint while ΣH grows like H
    let limit = Rational::one() - Rational::new(BigInt::from(h) * (&pk - 1), &pk * BigInt::from(l - s));
    let schedule =
        MoranSchedule::from_big(h + s, lambdas, vec![BigInt::from(h); count], params.targets.clone(), Some(limit))?;
    Ok((schedule, exps))
}

/// Every digit prefix of `start` down to `depth` that satisfies all constraints
/// decided above that depth, in cell-index order of the free digits.
pub fn exhaustive_prefixes(
    maps: &[ScalingMapSpec],
    schedule: &MoranSchedule,
    start: &Disk,
    depth: i64,
) -> Result<Vec<LocalFieldElement>> {
    let spec = start.spec();
    let h0 = schedule.h0();
    if depth < h0 {
        return invalid("depth is below the start disk's radius exponent");
    }
    let free = (depth - h0) as u32;
    let total = (spec.q() as u64)
        .checked_pow(free)
        .filter(|&n| n <= crate::measures::ENUMERATION_CAP)
        .ok_or_else(|| Error::TooLarge(format!("q^{free} prefixes")))?;
    let active = schedule.active_constraints(depth);
    if maps.len() < active {
        return invalid(format!("{active} constraints are active but only {} maps were given", maps.len()));
    }
    let mut constraints = Vec::with_capacity(active);
    for j in 1..=active {
        let lambda = schedule.lambda_i64(j)?;
        let h = schedule.h_i64(j)?;
        check_ratio(&maps[j - 1], lambda, j)?;
        constraints.push((lambda, h, schedule.targets().target(j, h, spec)?));
    }
    let base = start.center().truncate(h0).pad_to(depth);
    let mut out = Vec::new();
    'prefixes: for i in 0..total {
        let tail = LocalFieldElement::from_cell_index(spec, free, i);
        let mut x = base.clone();
        for (t, &d) in tail.digit_window(0, free as i64)?.iter().enumerate() {
            x = set_digit(&x, h0 + t as i64, d)?;
        }
        for (j, (lambda, h, b)) in constraints.iter().enumerate() {
            if constraint_valuation(&maps[j], &x, b, *lambda, *h, GUARD_DIGITS)? < *h {
                continue 'prefixes;
            }
        }
        out.push(x);
    }
    Ok(out)
}

/// ψ: digit n of the output is digit 0 of `[g_n(x)]`.
pub fn psi_encode(family: &[ScalingMapSpec], x: &LocalFieldElement, prec: usize) -> Result<LocalFieldElement> {
    if family.len() < prec {
        return Err(Error::InvalidFamily(format!("need {prec} maps, got {}", family.len())));
    }
    if x.val().is_some_and(|v| v < 0) {
        return Err(Error::OutOfDomain("psi is defined on the valuation ring".into()));
    }
    if x.abs_precision() < prec as i64 {
        return Err(Error::InsufficientPrecision(format!("x must be known to {prec} digits")));
    }
    let mut digits = Vec::with_capacity(prec);
    for (n, g) in family.iter().take(prec).enumerate() {
        match g.scaling_exponent()? {
            ScalingExponent::Scaling(l) if l == n as i64 => {}
            other => {
                return Err(Error::InvalidFamily(format!("map {n} has exponent {other:?}, expected {n}")))
            }
        }
        let y = g.apply(&x.truncate(n as i64 + 1))?;
        digits.push(y.digit_at(0)?);
    }
    LocalFieldElement::from_digits(x.spec(), 0, &digits, prec as i64)
}

/// A dimension value, exact whenever every logarithm involved is an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DimValue {
    Exact {
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    Approx { value: f64 },
}

impl DimValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DimValue::Exact { value } => rational::to_f64(value),
            DimValue::Approx { value } => *value,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            DimValue::Exact { value } => Some(value),
            DimValue::Approx { .. } => None,
        }
    }
}

/// `k` with `r = m^k`, if there is one.
fn exact_log(r: &Rational, m: u32) -> Option<i64> {
    let power_of = |n: &BigInt| -> Option<i64> {
        let mut n = n.clone();
        let mut k = 0;
        let m = BigInt::from(m);
        while n > BigInt::one() {
            let (q, rem) = n.div_rem(&m);
            if !rem.is_zero() {
                return None;
            }
            n = q;
            k += 1;
        }
        (n == BigInt::one()).then_some(k)
    };
    if r.denom().is_one() {
        power_of(r.numer())
    } else if r.numer().is_one() {
        power_of(r.denom()).map(|k| -k)
    } else {
        None
    }
}

fn ln_rational(r: &Rational) -> f64 {
    let shift_n = r.numer().bits().saturating_sub(900) as f64;
    let shift_d = r.denom().bits().saturating_sub(900) as f64;
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(f64::NAN);
    n.ln() - d.ln() + (shift_n - shift_d) * std::f64::consts::LN_2
}

/// Dimension of the digit-frequency set: `(1 − ρ) − ρ Σ p_j log_m p_j`.
pub fn freq_set_dim(m: u32, rho: &Rational, probs: &[Rational]) -> Result<DimValue> {
    if m < 2 {
        return invalid("base m must be at least 2");
    }
    if rho.is_negative() || *rho > Rational::one() {
        return invalid("rho must lie in [0, 1]");
    }
    if probs.iter().any(|p| p.is_negative()) {
        return invalid("probabilities must be nonnegative");
    }
    if probs.iter().sum::<Rational>() != Rational::one() {
        return invalid("probabilities must sum to 1");
    }
    let nonzero: Vec<&Rational> = probs.iter().filter(|p| !p.is_zero()).collect();
    let logs: Option<Vec<i64>> = nonzero.iter().map(|p| exact_log(p, m)).collect();
    Ok(match logs {
        Some(ks) => {
            let ent: Rational = nonzero.iter().zip(ks).map(|(p, k)| *p * Rational::from_integer(k.into())).sum();
            DimValue::Exact { value: Rational::one() - rho - rho * ent }
        }
        None => {
            let ln_m = (m as f64).ln();
            let ent: f64 = nonzero.iter().map(|p| rational::to_f64(p) * ln_rational(p) / ln_m).sum();
            let r = rational::to_f64(rho);
            DimValue::Approx { value: (1.0 - r) - r * ent }
        }
    })
}

/// Families with a closed-form dimension value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ClosedFormCase {
    /// `1 − (1 − p^{−K})H/L` for the biased-powers family.
    BiasedPowers { p: u32, k: u32, h: i64, l: i64 },
    /// `η/(1 + ε − ηε)`, lower bound for subsequences converging to targets.
    ConvergentSubsequence {
        #[serde(with = "rational::serde_rational")]
        eta: Rational,
        #[serde(with = "rational::serde_rational")]
        epsilon: Rational,
    },
    /// `log_q|z| / log_q(τ|z|)` for targets shrinking like `τ^{−n}`.
    ShrinkingTargets {
        q: u32,
        #[serde(with = "rational::serde_rational")]
        z_norm: Rational,
        #[serde(with = "rational::serde_rational")]
        tau: Rational,
    },
}

pub fn closed_form_dims(case: &ClosedFormCase) -> Result<DimValue> {
    match case {
        ClosedFormCase::BiasedPowers { p, k, h, l } => {
            if !crate::field::is_prime(*p as u64) || *k == 0 || *h < 1 || *l < 1 {
                return invalid("need p prime, K >= 1, H >= 1, L >= 1");
            }
            let pk = BigInt::from(*p).pow(*k);
            let frac = Rational::new(&pk - 1, pk);
            Ok(DimValue::Exact { value: Rational::one() - frac * Rational::new((*h).into(), (*l).into()) })
        }
        ClosedFormCase::ConvergentSubsequence { eta, epsilon } => {
            if !eta.is_positive() || *eta > Rational::one() || !epsilon.is_positive() || *epsilon >= Rational::one() {
                return invalid("need 0 < eta <= 1 and 0 < epsilon < 1");
            }
            Ok(DimValue::Exact { value: eta / (Rational::one() + epsilon - eta * epsilon) })
        }
        ClosedFormCase::ShrinkingTargets { q, z_norm, tau } => {
            if *q < 2 || *z_norm <= Rational::one() || *tau <= Rational::one() {
                return invalid("need q >= 2, |z| > 1 and tau > 1");
            }
            match (exact_log(z_norm, *q), exact_log(tau, *q)) {
                (Some(a), Some(b)) => Ok(DimValue::Exact { value: Rational::new(a.into(), (a + b).into()) }),
                _ => {
                    let a = ln_rational(z_norm);
                    let b = ln_rational(tau);
                    Ok(DimValue::Approx { value: a / (a + b) })
                }
            }
        }
    }
}

/// Subsequence `(n_k)` and schedule for targets shrinking like `τ^{−n}`, `τ = q^b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShrinkingTargetsPlan {
    #[serde(with = "rational::serde_bigint_vec")]
    pub exponents: Vec<BigInt>,
    pub schedule: MoranSchedule,
    pub start: Disk,
    pub audit_pass: bool,
}

fn ceil_mul(n: &BigInt, b: &Rational) -> BigInt {
    (Rational::from_integer(n.clone()) * b).ceil().to_integer()
}

/// Greedy minimal `n_1 < n_2 < …` with `p ∤ n_k`, `|z|^{n_1−1} ≥ δ^{−1}|α|^{−1}`,
/// `|z|^{n_{k+1}−n_k} ≥ τ^{n_k}` and `(k+1)²·(n_1 + ⋯ + n_k) ≤ n_{k+1}` (so the
/// ratio of the partial sums to the next term tends to 0).
pub fn shrinking_targets_schedule(
    z: &LocalFieldElement,
    tau_exponent: &Rational,
    delta_exponent: i64,
    alpha: &LocalFieldElement,
    count: usize,
    targets: Targets,
) -> Result<ShrinkingTargetsPlan> {
    let spec = z.spec();
    if !spec.is_char_zero() {
        return invalid("this family is set in characteristic 0");
    }
    let a = -z.val().ok_or_else(|| Error::InvalidInput("z must be nonzero".into()))?;
    let s = -alpha.val().ok_or_else(|| Error::InvalidInput("alpha must be nonzero".into()))?;
    if a < 1 || !tau_exponent.is_positive() {
        return invalid("need |z| > 1 and tau > 1");
    }
    let e = spec.e() as i64;
    if delta_exponent < e + 1 - a {
        return invalid("delta must be at most |z|/q^(e+1)");
    }
    if count == 0 {
        return invalid("count must be positive");
    }
    let p = BigInt::from(spec.p());
    let bump = |mut n: BigInt| {
        while (&n % &p).is_zero() {
            n += 1;
        }
        n
    };
    let big_a = BigInt::from(a);
    let first: BigInt = Rational::new(BigInt::from(delta_exponent - s), big_a.clone()).ceil().to_integer() + 1;
    let mut ns = vec![bump(first.max(BigInt::one()))];
    let mut sum = ns[0].clone();
    while ns.len() < count {
        let k = ns.len();
        let last = ns[k - 1].clone();
        let growth: BigInt = &last + ceil_mul(&last, &(tau_exponent / Rational::from_integer(big_a.clone())));
        let ratio = &sum * BigInt::from((k + 1) * (k + 1));
        let next = bump((&last + BigInt::one()).max(growth).max(ratio));
        sum += &next;
        ns.push(next);
    }
    let audit_pass = audit_shrinking(&ns, a, s, delta_exponent, tau_exponent, &p);
    let lambdas = ns.iter().map(|n| BigInt::from(s) + &big_a * (n - 1)).collect();
    let hs = ns.iter().map(|n| ceil_mul(n, tau_exponent)).collect();
    let limit = Rational::from_integer(big_a.clone()) / (Rational::from_integer(big_a) + tau_exponent);
    let schedule = MoranSchedule::from_big(delta_exponent, lambdas, hs, targets, Some(limit))?;
    let start = Disk::new(z.pad_to(delta_exponent.max(z.abs_precision())), delta_exponent)?;
    Ok(ShrinkingTargetsPlan { exponents: ns, schedule, start, audit_pass })
}

fn audit_shrinking(ns: &[BigInt], a: i64, s: i64, d: i64, b: &Rational, p: &BigInt) -> bool {
    let a_big = BigInt::from(a);
    if &a_big * (&ns[0] - 1) < BigInt::from(d - s) {
        return false;
    }
    let mut sum = BigInt::zero();
    for (k, n) in ns.iter().enumerate() {
        if (n % p).is_zero() {
            return false;
        }
        sum += n;
        if let Some(next) = ns.get(k + 1) {
            let gap = Rational::from_integer(&a_big * (next - n));
            if gap < Rational::from_integer(n.clone()) * b || next <= n {
                return false;
            }
            if &sum * BigInt::from((k + 2) * (k + 2)) > *next {
                return false;
            }
        }
    }
    true
}

/// Refinement, index shift and schedule for subsequences `αx^{r̃_n}` converging to targets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsequencePlan {
    pub refined: Vec<u64>,
    pub shift: usize,
    pub exponents: Vec<u64>,
    pub schedule: MoranSchedule,
    pub start: Disk,
    #[serde(with = "rational::serde_rational")]
    pub lower_bound: Rational,
}

/// Inserts terms so that `r̃_{n+1} ≤ (1+ε)r̃_n` and `p^K ∤ r̃_n`, spacing insertions
/// geometrically so gaps keep growing. Below `2/ε` an admissible insertion may not
/// exist; there the original terms are kept as they are.
pub fn refine_sequence(r: &[u64], epsilon: &Rational, pk: u64) -> Vec<u64> {
    let one_eps = rational::to_f64(&(Rational::one() + epsilon));
    let fits = |from: u64, to: u64| {
        Rational::from_integer(BigInt::from(to)) <= Rational::from_integer(BigInt::from(from)) * (Rational::one() + epsilon)
    };
    let mut out = vec![r[0]];
    for &target in &r[1..] {
        let mut cur = *out.last().expect("nonempty");
        while !fits(cur, target) {
            let ratio = target as f64 / cur as f64;
            let steps = (ratio.ln() / one_eps.ln()).ceil().max(2.0);
            let mut next = (cur as f64 * ratio.powf(1.0 / steps)).ceil() as u64;
            while !fits(cur, next) {
                next -= 1;
            }
            while next % pk == 0 {
                next -= 1;
            }
            if next <= cur {
                break;
            }
            out.push(next);
            cur = next;
        }
        out.push(target);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn convergent_subsequence_schedule(
    r: &[u64],
    z: &LocalFieldElement,
    alpha: &LocalFieldElement,
    delta_exponent: i64,
    k: u32,
    eta: &Rational,
    epsilon: &Rational,
    max_shift: usize,
    targets: Targets,
) -> Result<SubsequencePlan> {
    let bad = |m: String| Err(Error::InvalidSchedule(m));
    let spec = z.spec();
    if !spec.is_char_zero() {
        return invalid("this family is set in characteristic 0");
    }
    let a = -z.val().ok_or_else(|| Error::InvalidInput("z must be nonzero".into()))?;
    let s = -alpha.val().ok_or_else(|| Error::InvalidInput("alpha must be nonzero".into()))?;
    let e = spec.e() as i64;
    if a < 1 {
        return invalid("need |z| > 1");
    }
    if delta_exponent < e + 1 - a || delta_exponent < 1 {
        return invalid("delta must be below 1 and at most |z|/q^(e+1)");
    }
    let one = Rational::one();
    if !eta.is_positive() || *eta >= one || !epsilon.is_positive() || *epsilon >= one {
        return invalid("need 0 < eta < 1 and 0 < epsilon < 1");
    }
    if k == 0 {
        return invalid("K must be positive");
    }
    if r.len() < 4 {
        return bad("need at least four terms to audit the gap condition".into());
    }
    if r.windows(2).any(|w| w[1] <= w[0]) || r[0] == 0 {
        return bad("sequence must be positive and strictly increasing".into());
    }
    let p = spec.p() as u64;
    let pk = p.pow(k);
    if let Some(&bad_r) = r.iter().find(|&&x| x % pk == 0) {
        return bad(format!("{bad_r} is divisible by p^K = {pk}"));
    }
    let gaps: Vec<u64> = r.windows(2).map(|w| w[1] - w[0]).collect();
    let early = gaps[..gaps.len().div_ceil(4)].iter().max().copied().unwrap_or(0);
    let late = gaps[gaps.len() / 2..].iter().min().copied().unwrap_or(0);
    if late <= early {
        return bad(format!("gaps do not grow within the horizon (early max {early}, late min {late})"));
    }
    let refined = refine_sequence(r, epsilon, pk);
    let len = refined.len();
    let rt = |i: usize| refined[i - 1];
    let wide = |gap: u64| Rational::from_integer(BigInt::from(gap * a as u64)) * eta > Rational::from_integer(k.into());
    let shift = (1..=max_shift.min(len / 2)).find(|&n_cut| {
        let m = rt(n_cut);
        let first = a * (m as i64 - 1) - e * vp_u64(m, p) as i64 > delta_exponent - s;
        first && (n_cut..).take_while(|&n| n + n_cut <= len).all(|n| wide(rt(n + n_cut) - rt(n + n_cut - 1)))
    });
    let Some(shift) = shift else {
        return bad("no admissible index shift within the horizon".into());
    };
    let count = len - shift;
    let exponents: Vec<u64> = (1..=count).map(|n| rt(n + shift - 1)).collect();
    let lambdas = exponents
        .iter()
        .map(|&m| BigInt::from(s - e * vp_u64(m, p) as i64 + a * (m as i64 - 1)))
        .collect();
    let hs = (1..=count)
        .map(|n| {
            let gap = Rational::from_integer(BigInt::from(rt(n + shift) - rt(n + shift - 1)));
            ((&one - eta) * gap).floor().to_integer() * BigInt::from(a)
        })
        .collect();
    let schedule = MoranSchedule::from_big(delta_exponent, lambdas, hs, targets, None)?;
    let start = Disk::new(z.pad_to(delta_exponent.max(z.abs_precision())), delta_exponent)?;
    let lower_bound = eta / (&one + epsilon - eta * epsilon);
    Ok(SubsequencePlan { refined, shift, exponents, schedule, start, lower_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn q(p: u32) -> FieldSpec {
        FieldSpec::qp(p).unwrap()
    }

    #[test]
    fn schedule_validation() {
        let z = Targets::zero(q(3));
        assert!(MoranSchedule::explicit(2, &[1, 5], &[1, 1], z.clone()).is_err());
        assert!(MoranSchedule::explicit(0, &[1, 2], &[2, 1], z.clone()).is_err());
        assert!(MoranSchedule::explicit(0, &[1, 3], &[2, 1], z).is_ok());
    }

    #[test]
    fn gamma_examples() {
        let z = Targets::zero(q(2));
        let s = MoranSchedule::linear(2, 0, 1, 1, 2, 100, z.clone()).unwrap();
        let g = gamma_dim(&s, 100).unwrap();
        for t in &g.terms {
            let n = t.n as i64;
            assert_eq!(t.ratio, ratio(n + 1, 2 * n + 1));
        }
        assert_eq!(g.analytic_limit, Some(ratio(1, 2)));
        let m = MoranSchedule::linear(1, 0, 1, 1, 1, 50, z).unwrap();
        let g = gamma_dim(&m, 50).unwrap();
        assert!(g.terms.iter().all(|t| t.ratio == ratio(1, t.n as i64 + 1)));
        assert_eq!(g.analytic_limit, Some(int(0)));
    }

    #[test]
    fn moran_examples() {
        let k = 200;
        let full: Vec<Rational> = vec![int(1); k];
        let minus: Vec<Rational> = (1..=k as i64).map(|i| int(-i)).collect();
        let b = moran_bounds(&full, &minus, &minus, k).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        let minus2: Vec<Rational> = (1..=k as i64).map(|i| int(-2 * i)).collect();
        let b = moran_bounds(&full, &minus2, &minus2, k).unwrap();
        assert!((b.upper - 0.5).abs() < 1e-12);
        assert!((b.lower - 0.5).abs() < 0.01);
    }

    #[test]
    fn branch_examples() {
        let z = Targets::zero(q(2));
        let mahler = MoranSchedule::linear(1, 0, 1, 0, 0, 40, z.clone()).unwrap();
        assert!(branch_levels(&mahler, 40).unwrap().is_empty());
        let free = MoranSchedule::explicit(3, &[5, 9, 20], &[0, 0, 0], z.clone()).unwrap();
        assert_eq!(branch_levels(&free, 30).unwrap().levels(), (3..30).collect::<Vec<_>>());
        let s = MoranSchedule::explicit(1, &[3, 7], &[2, 1], z).unwrap();
        assert_eq!(branch_levels(&s, 12).unwrap().levels(), vec![1, 2, 5, 6, 8, 9, 10, 11]);
    }

    #[test]
    fn three_halves_point() {
        let inst = three_halves_instance(40).unwrap();
        let (x, cert) = construct_point(&inst.maps, &inst.schedule, &inst.start, 40).unwrap();
        assert!(cert.pass);
        assert_eq!(cert.rows.len(), 40);
        assert_eq!(x.val(), Some(-1));
        assert!(verify_certificate(&inst.maps, &inst.schedule, &x, &cert).unwrap());
    }

    #[test]
    fn trivial_schedule_passes_vacuously() {
        let z = Targets::zero(q(5));
        let s = MoranSchedule::explicit(0, &[2, 4], &[0, 0], z).unwrap();
        let d = Disk::new(LocalFieldElement::zero(q(5), 0), 0).unwrap();
        let one = LocalFieldElement::one(q(5), 30);
        let maps = vec![
            ScalingMapSpec::affine(LocalFieldElement::pi_power(q(5), -2, 30), one.clone(), Disk::unit(q(5))).unwrap(),
            ScalingMapSpec::affine(LocalFieldElement::pi_power(q(5), -4, 30), one, Disk::unit(q(5))).unwrap(),
        ];
        let (x, cert) = construct_point(&maps, &s, &d, 10).unwrap();
        assert!(cert.pass);
        assert!(x.is_zero());
    }

    #[test]
    fn mismatched_ratio_is_rejected() {
        let inst = three_halves_instance(5).unwrap();
        let z = Targets::zero(q(2));
        let wrong = MoranSchedule::linear(2, 0, 1, 0, 0, 5, z).unwrap();
        assert!(matches!(
            construct_point(&inst.maps, &wrong, &inst.start, 10),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn psi_examples() {
        let spec = q(3);
        let fam: Vec<_> = (0..12)
            .map(|n| {
                ScalingMapSpec::affine(
                    LocalFieldElement::pi_power(spec, -n, 40),
                    LocalFieldElement::zero(spec, 40),
                    Disk::unit(spec),
                )
                .unwrap()
            })
            .collect();
        let x = LocalFieldElement::from_ratio(7, 11, spec, 12).unwrap();
        assert_eq!(psi_encode(&fam, &x, 12).unwrap(), x);
        assert!(matches!(psi_encode(&fam[1..], &x, 11), Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn freq_dims() {
        let half = ratio(1, 2);
        assert_eq!(freq_set_dim(2, &half, &[half.clone(), half.clone()]).unwrap().exact(), Some(&int(1)));
        assert_eq!(freq_set_dim(2, &half, &[int(1), int(0)]).unwrap().exact(), Some(&half));
        let third = ratio(1, 3);
        let v = freq_set_dim(2, &int(0), &[third.clone(), third.clone(), third]).unwrap();
        assert!((v.to_f64() - 1.0).abs() < 1e-12);
        assert!(freq_set_dim(2, &half, &[half.clone()]).is_err());
    }

    #[test]
    fn closed_forms() {
        let v = closed_form_dims(&ClosedFormCase::BiasedPowers { p: 2, k: 1, h: 1, l: 10 }).unwrap();
        assert_eq!(v.exact(), Some(&ratio(19, 20)));
        let v = closed_form_dims(&ClosedFormCase::ShrinkingTargets { q: 5, z_norm: int(5), tau: int(5) }).unwrap();
        assert_eq!(v.exact(), Some(&ratio(1, 2)));
        let v = closed_form_dims(&ClosedFormCase::ConvergentSubsequence { eta: int(1), epsilon: ratio(1, 3) }).unwrap();
        assert_eq!(v.exact(), Some(&int(1)));
    }

    #[test]
    fn shrinking_targets_first_term() {
        let spec = q(5);
        let z = LocalFieldElement::from_ratio(1, 5, spec, 10).unwrap();
        let one = LocalFieldElement::one(spec, 10);
        let plan = shrinking_targets_schedule(&z, &int(1), 2, &one, 8, Targets::zero(spec)).unwrap();
        assert_eq!(plan.exponents[0], BigInt::from(3));
        assert!(plan.audit_pass);
    }

    #[test]
    fn subsequence_schedules() {
        let spec = q(3);
        let z = LocalFieldElement::pi_power(spec, -1, 20);
        let one = LocalFieldElement::one(spec, 20);
        let (eta, eps) = (ratio(1, 2), ratio(1, 2));
        let r: Vec<u64> = (1..30).map(|n| n * n + 1).collect();
        let plan = convergent_subsequence_schedule(&r, &z, &one, 1, 1, &eta, &eps, 20, Targets::zero(spec)).unwrap();
        assert!(plan.refined.iter().all(|x| x % 3 != 0));
        assert!(plan.refined.windows(2).filter(|w| w[0] >= 4).all(|w| 2 * w[1] <= 3 * w[0]));
        assert!(r.iter().all(|x| plan.refined.contains(x)));
        let lin: Vec<u64> = (1..30).map(|n| 2 * n).filter(|n| n % 3 != 0).collect();
        assert!(matches!(
            convergent_subsequence_schedule(&lin, &z, &one, 1, 1, &eta, &eps, 20, Targets::zero(spec)),
            Err(Error::InvalidSchedule(_))
        ));
        let sq: Vec<u64> = (1..30).map(|n| n * n).collect();
        assert!(matches!(
            convergent_subsequence_schedule(&sq, &z, &one, 1, 1, &eta, &eps, 20, Targets::zero(spec)),
            Err(Error::InvalidSchedule(_))
        ));
    }
}
