//! Disks, the measures μ, μ_k and μ*, empirical frequencies, and exhaustive
//! finite-quotient oracles.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{FieldSpec, LocalFieldElement, Tri};
use crate::rational::{self, pow_int, Rational};
use crate::scaling::{ScalingExponent, ScalingMapSpec};

/// Default cap on exhaustive enumeration.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// The disk `D(center, q^{-m})`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disk {
    center: LocalFieldElement,
    radius_exponent: i64,
}

impl PartialEq for Disk {
    fn eq(&self, other: &Self) -> bool {
        self.radius_exponent == other.radius_exponent && self.center == other.center
    }
}

impl Disk {
    pub fn new(center: LocalFieldElement, radius_exponent: i64) -> Result<Self> {
        if center.abs_precision() < radius_exponent {
            return Err(Error::InsufficientPrecision(format!(
                "disk center known modulo π^{} but radius exponent is {radius_exponent}",
                center.abs_precision()
            )));
        }
        Ok(Disk { center: center.truncate(radius_exponent), radius_exponent })
    }

    /// The valuation ring 𝒪.
    pub fn unit(spec: FieldSpec) -> Self {
        Disk { center: LocalFieldElement::zero(spec, 0), radius_exponent: 0 }
    }

    pub fn center(&self) -> &LocalFieldElement {
        &self.center
    }

    pub fn radius_exponent(&self) -> i64 {
        self.radius_exponent
    }

    pub fn spec(&self) -> FieldSpec {
        self.center.spec()
    }

    pub fn contains(&self, x: &LocalFieldElement) -> Result<bool> {
        if x.abs_precision() < self.radius_exponent {
            return Err(Error::InsufficientPrecision(format!(
                "membership in a radius q^-{} disk needs precision {}",
                self.radius_exponent, self.radius_exponent
            )));
        }
        let d = x.sub(&self.center)?;
        Ok(d.is_zero() || d.val().unwrap_or(i64::MAX) >= self.radius_exponent)
    }

    /// Whether the disk lies in 𝒪.
    pub fn in_unit_ball(&self) -> bool {
        self.radius_exponent >= 0 && self.center.val().is_none_or(|v| v >= 0)
    }

    /// The q sub-disks of radius exponent m + 1.
    pub fn sons(&self) -> Vec<Disk> {
        let spec = self.spec();
        let m = self.radius_exponent;
        (0..spec.p())
            .map(|d| {
                let step = LocalFieldElement::from_digits(spec, m, &[d], m + 1).expect("digit in range");
                let c = self.center.pad_to(m + 1).add(&step).expect("same spec");
                Disk { center: c, radius_exponent: m + 1 }
            })
            .collect()
    }

    /// Center digits at indices `0..m` (the disk must lie in 𝒪).
    fn prefix(&self) -> Result<Vec<u32>> {
        if !self.in_unit_ball() {
            return invalid("disk is not contained in the valuation ring");
        }
        self.center.digit_window(0, self.radius_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum MeasureSpec {
    Haar,
    MuK { k: u32 },
    MuStar,
}

impl MeasureSpec {
    pub fn check(&self, spec: FieldSpec) -> Result<()> {
        match self {
            MeasureSpec::Haar => Ok(()),
            MeasureSpec::MuK { k: 0 } => invalid("mu_k needs k >= 1"),
            _ if spec.is_char_zero() => Err(Error::UnsupportedMeasure(format!("{self:?} needs characteristic p"))),
            _ => Ok(()),
        }
    }
}

pub fn haar_of_disk(d: &Disk) -> Rational {
    pow_int(d.spec().q(), -d.radius_exponent)
}

fn pk(p: u32, k: u32) -> Option<u64> {
    (p as u64).checked_pow(k)
}

fn divides(pk: Option<u64>, i: i64) -> bool {
    match pk {
        Some(m) => i.rem_euclid(m as i64) == 0,
        None => i == 0,
    }
}

/// Membership in S_k (digits vanish off multiples of p^k) judged up to `level`.
pub fn in_s_k(x: &LocalFieldElement, k: u32, level: i64) -> Result<Tri> {
    let spec = x.spec();
    if spec.is_char_zero() {
        return invalid("S_k is defined in characteristic p");
    }
    let m = pk(spec.p(), k);
    let known = x.abs_precision().min(level);
    if let Some(v) = x.val() {
        for (j, &d) in x.digits().iter().enumerate() {
            let i = v + j as i64;
            if i >= known {
                break;
            }
            if d != 0 && !divides(m, i) {
                return Ok(Tri::No);
            }
        }
    }
    if x.abs_precision() >= level {
        return Ok(Tri::Yes);
    }
    if (x.abs_precision()..level).any(|i| !divides(m, i)) {
        Ok(Tri::Unknown)
    } else {
        Ok(Tri::Yes)
    }
}

fn mu_k_prefix(prefix: &[u32], p: u32, k: u32) -> Rational {
    let m = pk(p, k);
    let mut free = 0i64;
    for (i, &d) in prefix.iter().enumerate() {
        if divides(m, i as i64) {
            free += 1;
        } else if d != 0 {
            return Rational::zero();
        }
    }
    pow_int(p, -free)
}

fn mu_star_prefix(prefix: &[u32], p: u32) -> Rational {
    let m = prefix.len() as u64;
    let w = Rational::one() - pow_int(p, -1);
    let mut sum = pow_int(p, -(m as i64));
    let mut k = 1u32;
    // for p^k >= m the value no longer depends on k
    while pk(p, k).is_some_and(|v| v < m) {
        sum += pow_int(p, -(k as i64)) * mu_k_prefix(prefix, p, k);
        k += 1;
    }
    let tail = mu_k_prefix(prefix, p, k) * pow_int(p, -(k as i64));
    w * sum + tail
}

fn char_p_prefix(d: &Disk) -> Result<Vec<u32>> {
    if d.spec().is_char_zero() {
        return Err(Error::UnsupportedMeasure("mu_k and mu_star need characteristic p".into()));
    }
    d.prefix()
}

pub fn mu_k_of_disk(d: &Disk, k: u32) -> Result<Rational> {
    if k == 0 {
        return invalid("mu_k needs k >= 1");
    }
    Ok(mu_k_prefix(&char_p_prefix(d)?, d.spec().p(), k))
}

pub fn mu_star_of_disk(d: &Disk) -> Result<Rational> {
    Ok(mu_star_prefix(&char_p_prefix(d)?, d.spec().p()))
}

pub fn measure_of_disk(measure: MeasureSpec, d: &Disk) -> Result<Rational> {
    match measure {
        MeasureSpec::Haar => Ok(haar_of_disk(d)),
        MeasureSpec::MuK { k } => mu_k_of_disk(d, k),
        MeasureSpec::MuStar => mu_star_of_disk(d),
    }
}

fn cell_digits(p: u32, level: u32, index: u64) -> Vec<u32> {
    let mut v = index;
    (0..level)
        .map(|_| {
            let d = (v % p as u64) as u32;
            v /= p as u64;
            d
        })
        .collect()
}

/// Exact measure of every level-`level` cell of 𝒪, indexed by `Σ c_i q^i`.
pub fn cell_measures(measure: MeasureSpec, spec: FieldSpec, level: u32) -> Result<Vec<Rational>> {
    measure.check(spec)?;
    let cells = cell_count(spec, level, ENUMERATION_CAP)?;
    let p = spec.p();
    Ok((0..cells)
        .map(|i| {
            let prefix = cell_digits(p, level, i);
            match measure {
                MeasureSpec::Haar => pow_int(p, -(level as i64)),
                MeasureSpec::MuK { k } => mu_k_prefix(&prefix, p, k),
                MeasureSpec::MuStar => mu_star_prefix(&prefix, p),
            }
        })
        .collect())
}

fn cell_count(spec: FieldSpec, level: u32, cap: u64) -> Result<u64> {
    match (spec.q() as u64).checked_pow(level) {
        Some(n) if n <= cap => Ok(n),
        _ => Err(Error::TooLarge(format!("q^{level} residues exceed the cap {cap}"))),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub index: u64,
    pub center: LocalFieldElement,
    #[serde(with = "rational::serde_rational")]
    pub expected: Rational,
    pub observed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub level: u32,
    pub measure: MeasureSpec,
    pub n: u64,
    pub cells: Vec<CellRecord>,
    #[serde(with = "rational::serde_rational")]
    pub discrepancy: Rational,
}

impl FrequencyReport {
    /// Report from per-cell counts indexed by `Σ c_i q^i`.
    pub fn from_counts(spec: FieldSpec, level: u32, counts: &[u64], measure: MeasureSpec) -> Result<Self> {
        let expected = cell_measures(measure, spec, level)?;
        if expected.len() != counts.len() {
            return invalid(format!("{} counts for {} cells", counts.len(), expected.len()));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return invalid("empty sequence");
        }
        let big_n = rational::int(n as i64);
        let mut disc = Rational::zero();
        let cells = expected
            .into_iter()
            .zip(counts)
            .enumerate()
            .map(|(i, (e, &c))| {
                let dev = rational::abs_diff(&(rational::int(c as i64) / &big_n), &e);
                if dev > disc {
                    disc = dev;
                }
                CellRecord {
                    index: i as u64,
                    center: LocalFieldElement::from_cell_index(spec, level, i as u64),
                    expected: e,
                    observed: c,
                }
            })
            .collect();
        Ok(FrequencyReport { level, measure, n, cells, discrepancy: disc })
    }

    /// Recomputes the discrepancy from the embedded counts and expected values.
    pub fn recompute_discrepancy(&self) -> Rational {
        let big_n = rational::int(self.n as i64);
        self.cells
            .iter()
            .map(|c| rational::abs_diff(&(rational::int(c.observed as i64) / &big_n), &c.expected))
            .fold(Rational::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn csv_header() -> Vec<&'static str> {
        vec!["level", "measure", "cell", "digits", "expected_num", "expected_den", "expected", "observed", "n"]
    }

    pub fn csv_records(&self) -> Vec<Vec<String>> {
        let tag = match self.measure {
            MeasureSpec::Haar => "haar".to_string(),
            MeasureSpec::MuK { k } => format!("mu_{k}"),
            MeasureSpec::MuStar => "mu_star".to_string(),
        };
        self.cells
            .iter()
            .map(|c| {
                let digits = c
                    .center
                    .digit_window(0, self.level as i64)
                    .unwrap_or_default()
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                vec![
                    self.level.to_string(),
                    tag.clone(),
                    c.index.to_string(),
                    digits,
                    c.expected.numer().to_string(),
                    c.expected.denom().to_string(),
                    rational::to_f64(&c.expected).to_string(),
                    c.observed.to_string(),
                    self.n.to_string(),
                ]
            })
            .collect()
    }
}

pub fn empirical_frequencies(seq: &[LocalFieldElement], level: u32, measure: MeasureSpec) -> Result<FrequencyReport> {
    let Some(first) = seq.first() else {
        return invalid("empty sequence");
    };
    let spec = first.spec();
    let cells = cell_count(spec, level, ENUMERATION_CAP)?;
    let mut counts = vec![0u64; cells as usize];
    for x in seq {
        if x.spec() != spec {
            return invalid("mixed fields in sequence");
        }
        if x.val().is_some_and(|v| v < 0) {
            return invalid("sequence element outside the valuation ring");
        }
        counts[x.cell_index(level)? as usize] += 1;
    }
    FrequencyReport::from_counts(spec, level, &counts, measure)
}

pub fn discrepancy(seq: &[LocalFieldElement], level: u32, measure: MeasureSpec) -> Result<Rational> {
    Ok(empirical_frequencies(seq, level, measure)?.discrepancy)
}

/// All residues modulo π^m, each once, in cell-index order.
pub fn enumerate_quotient(spec: FieldSpec, m: u32, cap: u64) -> Result<Vec<LocalFieldElement>> {
    let n = cell_count(spec, m, cap)?;
    Ok((0..n).map(|i| LocalFieldElement::from_cell_index(spec, m, i)).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub depth: u32,
    pub target_level: u32,
    pub expected: u64,
    pub counts: Vec<u64>,
    pub pass: bool,
}

fn scaling_on_unit_ball(map: &ScalingMapSpec) -> Result<i64> {
    let d = map.domain();
    if d.radius_exponent() != 0 || !d.in_unit_ball() {
        return Err(Error::InvalidConfiguration("map domain must be the valuation ring".into()));
    }
    match map.scaling_exponent()? {
        ScalingExponent::Scaling(l) if l >= 0 => Ok(l),
        other => Err(Error::InvalidConfiguration(format!("map is not scaling with ratio >= 1: {other:?}"))),
    }
}

/// Pushes every residue mod π^m through `x ↦ [f(x)]` and counts target cells.
pub fn oracle_haar_invariance(map: &ScalingMapSpec, m: u32, target_level: u32) -> Result<InvarianceReport> {
    let lambda = scaling_on_unit_ball(map)?;
    if (m as i64) < lambda + target_level as i64 {
        return Err(Error::InvalidConfiguration(format!(
            "depth {m} below ratio exponent {lambda} + level {target_level}"
        )));
    }
    let spec = map.domain().spec();
    let targets = cell_count(spec, target_level, ENUMERATION_CAP)?;
    let mut counts = vec![0u64; targets as usize];
    for x in enumerate_quotient(spec, m, ENUMERATION_CAP)? {
        let y = map.apply(&x)?;
        counts[y.cell_index(target_level)? as usize] += 1;
    }
    let expected = (spec.q() as u64).pow(m - target_level);
    let pass = counts.iter().all(|&c| c == expected);
    Ok(InvarianceReport { depth: m, target_level, expected, counts, pass })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecorrelationReport {
    pub depth: u32,
    pub gamma: u32,
    /// Cell index of the target disk at level `gamma`.
    pub cell: u64,
    #[serde(with = "rational::serde_rational")]
    pub measure: Rational,
    #[serde(with = "rational::serde_rational")]
    pub expected: Rational,
    pub pass: bool,
}

fn decorrelation_pair(f: &ScalingMapSpec, g: &ScalingMapSpec, gamma: i64) -> Result<i64> {
    let lf = scaling_on_unit_ball(f)?;
    let lg = scaling_on_unit_ball(g)?;
    if lf <= lg {
        return Err(Error::InvalidConfiguration(format!("need lambda_f > lambda_g, got {lf} and {lg}")));
    }
    if gamma < 0 || gamma > lf - lg {
        return Err(Error::InvalidConfiguration(format!("gamma {gamma} outside 0..=lambda_f - lambda_g")));
    }
    Ok(lf)
}

/// Exact measure of `f̃⁻¹D ∩ g̃⁻¹D` by enumeration, compared with `μ(D)²`.
pub fn oracle_decorrelation(f: &ScalingMapSpec, g: &ScalingMapSpec, d: &Disk, depth: Option<u32>) -> Result<DecorrelationReport> {
    if !d.in_unit_ball() {
        return Err(Error::InvalidConfiguration("target disk must lie in the valuation ring".into()));
    }
    let gamma = d.radius_exponent();
    decorrelation_pair(f, g, gamma)?;
    let target = d.center().cell_index(gamma as u32)?;
    let all = oracle_decorrelation_cells(f, g, gamma as u32, depth)?;
    Ok(all.into_iter().nth(target as usize).expect("one report per cell"))
}

/// [`oracle_decorrelation`] for every level-`gamma` disk of 𝒪 from a single enumeration.
pub fn oracle_decorrelation_cells(
    f: &ScalingMapSpec,
    g: &ScalingMapSpec,
    gamma: u32,
    depth: Option<u32>,
) -> Result<Vec<DecorrelationReport>> {
    let lf = decorrelation_pair(f, g, gamma as i64)?;
    let m = depth.unwrap_or((lf + gamma as i64) as u32);
    if (m as i64) < lf + gamma as i64 {
        return Err(Error::InvalidConfiguration(format!("depth {m} below lambda_f + gamma")));
    }
    let spec = f.domain().spec();
    let cells = cell_count(spec, gamma, ENUMERATION_CAP)?;
    let mut hits = vec![0u64; cells as usize];
    let residues = enumerate_quotient(spec, m, ENUMERATION_CAP)?;
    let total = residues.len() as i64;
    for x in residues {
        let c = f.apply(&x)?.cell_index(gamma)?;
        if g.apply(&x)?.cell_index(gamma)? == c {
            hits[c as usize] += 1;
        }
    }
    let mu = pow_int(spec.q(), -(gamma as i64));
    let expected = &mu * &mu;
    Ok(hits
        .into_iter()
        .enumerate()
        .map(|(cell, h)| {
            let measure = rational::ratio(h as i64, total);
            DecorrelationReport { depth: m, gamma, cell: cell as u64, pass: measure == expected, measure, expected: expected.clone() }
        })
        .collect())
}

/// Draw from μ_k: digits at multiples of p^k uniform, others zero.
pub fn sample_mu_k<R: Rng + ?Sized>(spec: FieldSpec, k: u32, abs_prec: i64, rng: &mut R) -> LocalFieldElement {
    let m = pk(spec.p(), k);
    let digits: Vec<u32> = (0..abs_prec.max(0))
        .map(|i| if divides(m, i) { rng.gen_range(0..spec.p()) } else { 0 })
        .collect();
    LocalFieldElement::from_digits(spec, 0, &digits, abs_prec).expect("digits in range")
}

/// Draw from μ* through its mixture: k = 0 (Haar) with weight 1 − 1/p, k ≥ 1 with weight (1 − 1/p)p^{−k}.
pub fn sample_mu_star<R: Rng + ?Sized>(spec: FieldSpec, abs_prec: i64, rng: &mut R) -> LocalFieldElement {
    let mut k = 0u32;
    while rng.gen_range(0..spec.p()) == 0 {
        k += 1;
    }
    sample_mu_k(spec, k, abs_prec, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn f2() -> FieldSpec {
        FieldSpec::fpt(2).unwrap()
    }

    fn disk(spec: FieldSpec, v: i64, digits: &[u32], m: i64) -> Disk {
        Disk::new(LocalFieldElement::from_digits(spec, v, digits, m).unwrap(), m).unwrap()
    }

    #[test]
    fn haar_values() {
        let q5 = FieldSpec::qp(5).unwrap();
        assert_eq!(haar_of_disk(&Disk::unit(q5)), ratio(1, 1));
        assert_eq!(haar_of_disk(&disk(q5, 0, &[1], 3)), ratio(1, 125));
    }

    #[test]
    fn s_k_membership() {
        let x = LocalFieldElement::from_polys(&[1, 0, 1], &[1], f2(), 6).unwrap();
        assert_eq!(in_s_k(&x, 1, 6).unwrap(), Tri::Yes);
        assert_eq!(in_s_k(&x, 2, 6).unwrap(), Tri::No);
        assert_eq!(in_s_k(&LocalFieldElement::zero(f2(), 8), 3, 8).unwrap(), Tri::Yes);
        let short = LocalFieldElement::from_polys(&[1], &[1], f2(), 1).unwrap();
        assert_eq!(in_s_k(&short, 1, 4).unwrap(), Tri::Unknown);
    }

    #[test]
    fn mu_k_values() {
        assert_eq!(mu_k_of_disk(&disk(f2(), 0, &[0], 1), 1).unwrap(), ratio(1, 2));
        assert_eq!(mu_k_of_disk(&disk(f2(), 1, &[1], 2), 1).unwrap(), ratio(0, 1));
        assert_eq!(mu_k_of_disk(&Disk::unit(f2()), 1).unwrap(), ratio(1, 1));
        assert!(mu_k_of_disk(&Disk::unit(FieldSpec::qp(2).unwrap()), 1).is_err());
    }

    #[test]
    fn mu_star_values() {
        assert_eq!(mu_star_of_disk(&Disk::unit(f2())).unwrap(), ratio(1, 1));
        assert_eq!(mu_star_of_disk(&disk(f2(), 1, &[], 1)).unwrap(), ratio(1, 2));
        assert_eq!(mu_star_of_disk(&disk(f2(), 1, &[1], 2)).unwrap(), ratio(1, 8));
    }

    #[test]
    fn frequencies() {
        let q3 = FieldSpec::qp(3).unwrap();
        let cells = enumerate_quotient(q3, 2, ENUMERATION_CAP).unwrap();
        assert_eq!(cells.len(), 9);
        assert_eq!(discrepancy(&cells, 2, MeasureSpec::Haar).unwrap(), ratio(0, 1));
        let constant = vec![cells[4].clone(); 10];
        assert_eq!(discrepancy(&constant, 2, MeasureSpec::Haar).unwrap(), ratio(8, 9));
        assert_eq!(enumerate_quotient(q3, 0, ENUMERATION_CAP).unwrap().len(), 1);
        assert!(enumerate_quotient(q3, 20, ENUMERATION_CAP).is_err());
    }

    #[test]
    fn sons_of_unit_ball() {
        let q5 = FieldSpec::qp(5).unwrap();
        let sons = Disk::unit(q5).sons();
        assert_eq!(sons.len(), 5);
        assert_eq!(sons[3].center().cell_index(1).unwrap(), 3);
        assert!(sons[3].contains(&LocalFieldElement::from_i64(8, q5, 4)).unwrap());
    }
}
