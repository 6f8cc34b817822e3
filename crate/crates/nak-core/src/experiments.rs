//! Seeded experiments over the orbit engines and the exact oracles, each
//! producing a self-contained [`RunReport`].

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exceptional::{
    self, BiasedPowersParams, BranchLevels, ClosedFormCase, DimValue, GammaDim, MembershipCertificate, MoranBounds,
    Targets,
};
use crate::field::{vp_u64, FieldSpec, LocalFieldElement, GUARD_DIGITS};
use crate::measures::{self, DecorrelationReport, Disk, FrequencyReport, InvarianceReport, MeasureSpec, ENUMERATION_CAP};
use crate::orbit::{self, OrbitWindows};
use crate::rational::{self, pow_int, Rational};
use crate::scaling::ScalingMapSpec;
use crate::special::{self, LimitPointTable, PisotChabautySpec};

pub const SCHEMA: &str = "nak-report/1";

fn config_error<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidConfiguration(msg.into()))
}

/// Which indices `n` of a sequence enter the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Filter {
    All,
    /// `p ∤ n`.
    CoprimeToP,
    /// `p^k ∥ n`.
    ExactPower { k: u32 },
    /// `p^k ∤ n`.
    NotDivisibleByPower { k: u32 },
}

impl Filter {
    pub fn admits(&self, n: u64, p: u32) -> bool {
        let p = p as u64;
        match *self {
            Filter::All => true,
            Filter::CoprimeToP => n % p != 0,
            Filter::ExactPower { k } => vp_u64(n, p) == k,
            Filter::NotDivisibleByPower { k } => vp_u64(n, p) < k,
        }
    }

    pub fn check(&self, spec: FieldSpec) -> Result<()> {
        match *self {
            Filter::ExactPower { .. } if spec.is_char_zero() => config_error("the p^k || n filter needs characteristic p"),
            Filter::ExactPower { k: 0 } | Filter::NotDivisibleByPower { k: 0 } => config_error("filter exponent must be >= 1"),
            _ => Ok(()),
        }
    }
}

/// A field constant given exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scalar {
    Rational {
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    PiPower { exponent: i64 },
    Element { value: LocalFieldElement },
}

impl Scalar {
    pub fn one() -> Self {
        Scalar::Rational { value: Rational::one() }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational { value } => value.is_one(),
            Scalar::PiPower { exponent } => *exponent == 0,
            Scalar::Element { .. } => false,
        }
    }

    pub fn valuation(&self, spec: FieldSpec) -> Result<i64> {
        self.element(spec, 1)?.val().ok_or_else(|| Error::InvalidConfiguration("constant is zero".into()))
    }

    /// The constant with `digits` significant digits (an element is returned as given).
    pub fn element(&self, spec: FieldSpec, digits: i64) -> Result<LocalFieldElement> {
        match self {
            Scalar::Rational { value } => LocalFieldElement::from_rational_scalar(value, spec, digits),
            Scalar::PiPower { exponent } => Ok(LocalFieldElement::pi_power(spec, *exponent, exponent + digits)),
            Scalar::Element { value } if value.spec() == spec => Ok(value.clone()),
            Scalar::Element { .. } => config_error("constant lives in a different field"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Generator {
    /// `[α xⁿ]`.
    Power { alpha: Scalar },
    /// `[βⁿ x]`.
    Geometric { beta: Scalar },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum XSource {
    Explicit { value: LocalFieldElement },
    /// Haar-random on the sphere `|x| = q^r`.
    RandomWithNorm { exponent: i64 },
    RandomInDisk { disk: Disk },
    /// The constructed biased-powers point for the power generator, targets 0.
    BiasedPowers { k: u32, h: i64, l: i64 },
}

impl XSource {
    fn is_random(&self) -> bool {
        matches!(self, XSource::RandomWithNorm { .. } | XSource::RandomInDisk { .. })
    }

    /// `v(x)` when the source fixes it.
    fn valuation(&self, generator: &Generator, spec: FieldSpec) -> Result<Option<i64>> {
        Ok(match self {
            XSource::Explicit { value } => value.val(),
            XSource::RandomWithNorm { exponent } => Some(-exponent),
            XSource::RandomInDisk { disk } => match disk.center().val() {
                Some(v) if v < disk.radius_exponent() => Some(v),
                _ => None,
            },
            XSource::BiasedPowers { l, .. } => match generator {
                Generator::Power { alpha } => Some(-alpha.valuation(spec)? - l),
                Generator::Geometric { .. } => return config_error("the biased-powers point needs the power generator"),
            },
        })
    }
}

/// Settings shared by the sequence experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub generator: Generator,
    pub x: XSource,
    pub n: u64,
    pub levels: Vec<u32>,
    pub measure: MeasureSpec,
    pub filter: Filter,
    pub trials: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let spec = self.field;
        if self.n == 0 {
            return config_error("N must be at least 1");
        }
        if self.trials == 0 {
            return config_error("at least one trial is needed");
        }
        if !self.x.is_random() && self.trials != 1 {
            return config_error("a deterministic x admits a single trial");
        }
        check_levels(spec, &self.levels)?;
        self.filter.check(spec)?;
        self.measure.check(spec).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        if let XSource::Explicit { value } = &self.x {
            if value.spec() != spec {
                return config_error("x lives in a different field");
            }
        }
        if let XSource::RandomInDisk { disk } = &self.x {
            if disk.spec() != spec {
                return config_error("the disk lives in a different field");
            }
        }
        match &self.generator {
            Generator::Power { alpha } => {
                alpha.valuation(spec)?;
                match self.x.valuation(&self.generator, spec)? {
                    Some(v) if v < 0 => Ok(()),
                    _ => config_error("the power generator needs |x| > 1"),
                }
            }
            Generator::Geometric { beta } => {
                if beta.valuation(spec)? >= 0 {
                    return config_error("the geometric generator needs |beta| > 1");
                }
                if matches!(self.x, XSource::BiasedPowers { .. }) {
                    return config_error("the biased-powers point needs the power generator");
                }
                Ok(())
            }
        }
    }

    fn window(&self) -> usize {
        *self.levels.iter().max().expect("validated") as usize
    }
}

fn check_levels(spec: FieldSpec, levels: &[u32]) -> Result<()> {
    if levels.is_empty() {
        return config_error("no levels given");
    }
    for &m in levels {
        if m == 0 {
            return config_error("levels start at 1");
        }
        match (spec.q() as u64).checked_pow(m) {
            Some(c) if c <= ENUMERATION_CAP => {}
            _ => return config_error(format!("level {m} has more than {ENUMERATION_CAP} cells")),
        }
    }
    Ok(())
}

/// `x` for one trial, and the orbit windows it produces.
fn draw_x(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<LocalFieldElement> {
    let spec = cfg.field;
    let w = cfg.window() as i64;
    let n = cfg.n as i64;
    // digit j of αxⁿ reads digit j − a − vn of the unit part, so the product needs
    // absolute precision W; each factor's share is computed below
    let need_abs = |v_other: i64| w - v_other * n + GUARD_DIGITS;
    match (&cfg.generator, &cfg.x) {
        (_, XSource::Explicit { value }) => Ok(value.clone()),
        (Generator::Power { alpha }, src) => {
            let a = alpha.valuation(spec)?;
            let v = src.valuation(&cfg.generator, spec)?.expect("validated");
            let abs = w - a - v * n + v + GUARD_DIGITS;
            match src {
                XSource::RandomWithNorm { exponent } => LocalFieldElement::random_with_norm(spec, *exponent, abs, rng),
                XSource::RandomInDisk { disk } => LocalFieldElement::random_in_disk(disk, abs.max(disk.radius_exponent()), rng),
                XSource::BiasedPowers { k, h, l } => {
                    let params = BiasedPowersParams {
                        k: *k,
                        h: *h,
                        l: *l,
                        alpha: alpha.element(spec, abs - v + 2 * GUARD_DIGITS)?,
                        targets: Targets::zero(spec),
                    };
                    let precision = abs + GUARD_DIGITS;
                    let inst = exceptional::biased_powers_instance(&params, precision as usize + 2)?;
                    let (x, cert) = exceptional::construct_point(&inst.maps, &inst.schedule, &inst.start, precision)?;
                    if !cert.pass {
                        return Err(Error::ConstructionFailure("biased-powers certificate failed".into()));
                    }
                    Ok(x)
                }
                XSource::Explicit { .. } => unreachable!(),
            }
        }
        (Generator::Geometric { beta }, src) => {
            let b = beta.valuation(spec)?;
            let abs = need_abs(b);
            match src {
                XSource::RandomWithNorm { exponent } => LocalFieldElement::random_with_norm(spec, *exponent, abs, rng),
                XSource::RandomInDisk { disk } => LocalFieldElement::random_in_disk(disk, abs.max(disk.radius_exponent()), rng),
                _ => config_error("unsupported x source for the geometric generator"),
            }
        }
    }
}

fn orbit_for(cfg: &ExperimentConfig, x: &LocalFieldElement) -> Result<OrbitWindows> {
    let spec = cfg.field;
    let w = cfg.window();
    let n = cfg.n as i64;
    let xv = x.val().unwrap_or(0);
    match &cfg.generator {
        Generator::Power { alpha } => {
            let a = alpha.valuation(spec)?;
            let digits = w as i64 - a - xv * n + GUARD_DIGITS;
            orbit::power_orbit(&alpha.element(spec, digits)?, x, cfg.n, w)
        }
        Generator::Geometric { beta } => {
            let b = beta.valuation(spec)?;
            let digits = w as i64 - xv - b * n + GUARD_DIGITS;
            orbit::geometric_orbit(&beta.element(spec, digits)?, x, cfg.n, w)
        }
    }
}

fn trial_rng(seed: u64, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Level-`level` cell counts of the admitted rows.
pub fn tally(orbit: &OrbitWindows, level: u32, filter: Filter) -> Vec<u64> {
    let p = orbit.spec.p();
    let mut counts = vec![0u64; (orbit.spec.q() as usize).pow(level)];
    for n in (1..=orbit.n_max).filter(|&n| filter.admits(n, p)) {
        counts[orbit.cell_index(n, level) as usize] += 1;
    }
    counts
}

/// Counts for an arbitrary stream of cell indices.
pub fn tally_indices(spec: FieldSpec, level: u32, cells: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut counts = vec![0u64; (spec.q() as usize).pow(level)];
    for c in cells {
        counts[c as usize] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Less,
    AtMost,
    Equal,
    AtLeast,
    Greater,
}

/// A comparison bound, either rational or the square root of a nonnegative rational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Threshold {
    Exact {
        #[serde(with = "rational::serde_rational")]
        value: Rational,
    },
    Sqrt {
        #[serde(with = "rational::serde_rational")]
        radicand: Rational,
        decimal: f64,
    },
}

impl Threshold {
    pub fn exact(value: Rational) -> Self {
        Threshold::Exact { value }
    }

    pub fn sqrt(radicand: Rational) -> Self {
        let decimal = rational::to_f64(&radicand).sqrt();
        Threshold::Sqrt { radicand, decimal }
    }

    /// `c·√(q^level / n)`, the statistical tolerance scaled by `c`.
    pub fn tolerance(scale: u32, q: u32, level: u32, n: u64) -> Self {
        let c = Rational::from_integer(BigInt::from(scale));
        Self::sqrt(&c * &c * pow_int(q, level as i64) / Rational::from_integer(BigInt::from(n)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Threshold::Exact { value } => rational::to_f64(value),
            Threshold::Sqrt { decimal, .. } => *decimal,
        }
    }
}

/// How a per-trial verdict is combined over trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    AllTrials,
    /// At least `⌈19T/20⌉` of `T` trials.
    SeedRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    #[serde(with = "rational::serde_rational")]
    pub statistic: Rational,
    pub relation: Relation,
    pub threshold: Threshold,
    pub aggregation: Aggregation,
    pub pass: bool,
}

fn compare(stat: &Rational, rel: Relation, thr: &Threshold) -> bool {
    use std::cmp::Ordering::*;
    let ord = match thr {
        Threshold::Exact { value } => stat.cmp(value),
        Threshold::Sqrt { radicand, .. } => {
            if stat < &Rational::zero() {
                Less
            } else {
                (stat * stat).cmp(radicand)
            }
        }
    };
    match rel {
        Relation::Less => ord == Less,
        Relation::AtMost => ord != Greater,
        Relation::Equal => ord == Equal,
        Relation::AtLeast => ord != Less,
        Relation::Greater => ord == Greater,
    }
}

impl Verdict {
    pub fn new(name: impl Into<String>, statistic: Rational, relation: Relation, threshold: Threshold) -> Self {
        let pass = compare(&statistic, relation, &threshold);
        Verdict { name: name.into(), statistic, relation, threshold, aggregation: Aggregation::AllTrials, pass }
    }

    /// A verdict whose statistic counts failures and must be zero.
    pub fn no_failures(name: impl Into<String>, failures: usize) -> Self {
        Self::new(name, rational::int(failures as i64), Relation::Equal, Threshold::exact(Rational::zero()))
    }

    fn seed_rule(mut self) -> Self {
        self.aggregation = Aggregation::SeedRule;
        self
    }

    /// Re-derives `pass` from the statistic and threshold alone.
    pub fn recompute(&self) -> bool {
        compare(&self.statistic, self.relation, &self.threshold)
    }
}

fn within_tolerance(name: String, report: &FrequencyReport, q: u32) -> Verdict {
    Verdict::new(name, report.discrepancy.clone(), Relation::AtMost, Threshold::tolerance(4, q, report.level, report.n))
        .seed_rule()
}

/// Per-verdict combination over trials, in the order of the first trial.
fn aggregate(trials: &[&[Verdict]]) -> Vec<Verdict> {
    let Some(first) = trials.first() else {
        return Vec::new();
    };
    let t = trials.len() as i64;
    first
        .iter()
        .map(|v| {
            let passed = trials.iter().filter(|vs| vs.iter().any(|w| w.name == v.name && w.pass)).count() as i64;
            match v.aggregation {
                Aggregation::AllTrials => Verdict::no_failures(format!("{}/all_trials", v.name), (t - passed) as usize),
                Aggregation::SeedRule => Verdict::new(
                    format!("{}/seed_rule", v.name),
                    rational::int(passed),
                    Relation::AtLeast,
                    Threshold::exact(rational::int((19 * t + 19) / 20)),
                ),
            }
        })
        .collect()
}

/// Runs `job` for each trial, spreading trials over the available threads; results stay in trial order.
fn run_trials<T: Send>(trials: u32, job: impl Fn(u32) -> Result<T> + Sync) -> Result<Vec<T>> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(trials as usize).max(1);
    if threads == 1 {
        return (0..trials).map(&job).collect();
    }
    let mut slots: Vec<Option<Result<T>>> = (0..trials).map(|_| None).collect();
    std::thread::scope(|s| {
        let job = &job;
        let chunks: Vec<_> = slots
            .chunks_mut(trials.div_ceil(threads as u32) as usize)
            .enumerate()
            .map(|(c, chunk)| {
                let start = c * trials.div_ceil(threads as u32) as usize;
                s.spawn(move || {
                    for (i, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(job((start + i) as u32));
                    }
                })
            })
            .collect();
        for h in chunks {
            h.join().expect("trial thread panicked");
        }
    });
    slots.into_iter().map(|s| s.expect("every trial ran")).collect()
}

/// A report from any experiment: configuration echo, payload and verdicts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub experiment: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub data: ReportData,
    pub verdicts: Vec<Verdict>,
    /// `None` when the experiment reports data without a claim.
    pub pass: Option<bool>,
    pub wall_time_s: f64,
}

impl RunReport {
    fn new(experiment: &str, config: impl Serialize, seed: Option<u64>, data: ReportData, verdicts: Vec<Verdict>, claim: bool, start: Instant) -> Self {
        let pass = claim.then(|| verdicts.iter().all(|v| v.pass));
        RunReport {
            schema: SCHEMA.to_string(),
            experiment: experiment.to_string(),
            config: serde_json::to_value(config).expect("configs serialize"),
            seed,
            data,
            verdicts,
            pass,
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    }

    /// JSON without the wall time, identical for identical inputs.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(o) = v.as_object_mut() {
            o.remove("wall_time_s");
        }
        serde_json::to_string_pretty(&v).expect("reports serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// True when every verdict, and every frequency report's discrepancy, can be
    /// re-derived from the embedded data.
    pub fn recheck(&self) -> bool {
        let verdicts_ok = self.verdicts.iter().all(|v| v.recompute() == v.pass);
        let reports_ok = self.frequency_reports().iter().all(|r| r.recompute_discrepancy() == r.discrepancy);
        let trials_ok = match &self.data {
            ReportData::Sequence(d) => d.trials.iter().all(|t| t.verdicts.iter().all(|v| v.recompute() == v.pass)),
            ReportData::CharP(d) => d.trials.iter().all(|t| t.verdicts.iter().all(|v| v.recompute() == v.pass)),
            _ => true,
        };
        verdicts_ok && reports_ok && trials_ok
    }

    pub fn frequency_reports(&self) -> Vec<&FrequencyReport> {
        match &self.data {
            ReportData::Sequence(d) => d.trials.iter().flat_map(|t| &t.levels).collect(),
            ReportData::CharP(d) => d
                .trials
                .iter()
                .flat_map(|t| t.exact_power.iter().chain(&t.mu_star).chain(&t.haar))
                .collect(),
            ReportData::Pisot(d) => vec![&d.orbit_frequencies],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportData {
    Sequence(SequenceData),
    CharP(CharPData),
    Oracles(OracleData),
    Construct(Box<ConstructData>),
    Dim(DimData),
    Pisot(Box<PisotData>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceTrial {
    pub trial: u32,
    pub x: LocalFieldElement,
    pub levels: Vec<FrequencyReport>,
    pub verdicts: Vec<Verdict>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceData {
    pub trials: Vec<SequenceTrial>,
}

/// Frequencies of `[αxⁿ]` or `[βⁿx]` over the admitted `n ≤ N`, with one tolerance
/// verdict per level and trial.
pub fn run_koksma(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    let spec = cfg.field;
    let trials = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let x = draw_x(cfg, &mut rng)?;
        let orbit = orbit_for(cfg, &x)?;
        let mut levels = Vec::new();
        let mut verdicts = Vec::new();
        for &m in &cfg.levels {
            let counts = tally(&orbit, m, cfg.filter);
            let report = FrequencyReport::from_counts(spec, m, &counts, cfg.measure)?;
            verdicts.push(within_tolerance(format!("level_{m}/discrepancy"), &report, spec.q()));
            levels.push(report);
        }
        let pass = verdicts.iter().all(|v| v.pass);
        Ok(SequenceTrial { trial: t, x, levels, verdicts, pass })
    })?;
    let all: Vec<&[Verdict]> = trials.iter().map(|t| t.verdicts.as_slice()).collect();
    let verdicts = aggregate(&all);
    let seed = cfg.x.is_random().then_some(cfg.seed);
    Ok(RunReport::new("ud", cfg, seed, ReportData::Sequence(SequenceData { trials }), verdicts, true, start))
}

/// Settings of the characteristic-p experiment on `[αxⁿ]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharPConfig {
    pub field: FieldSpec,
    pub alpha: Scalar,
    pub x: XSource,
    pub n: u64,
    /// Levels of the filtered and unfiltered comparisons.
    pub levels: Vec<u32>,
    /// Level of the hull of `S̃_1`.
    pub hull_level: u32,
    /// Exponent `K` of the `p^K ∥ n` comparison.
    pub k: u32,
    pub trials: u32,
    pub seed: u64,
}

impl CharPConfig {
    pub fn validate(&self) -> Result<()> {
        if self.field.is_char_zero() {
            return config_error("this experiment needs characteristic p");
        }
        if self.k == 0 {
            return config_error("K must be at least 1");
        }
        check_levels(self.field, &[self.hull_level])?;
        self.as_sequence().validate()
    }

    fn as_sequence(&self) -> ExperimentConfig {
        let mut levels = self.levels.clone();
        if !levels.contains(&self.hull_level) {
            levels.push(self.hull_level);
        }
        ExperimentConfig {
            field: self.field,
            generator: Generator::Power { alpha: self.alpha.clone() },
            x: self.x.clone(),
            n: self.n,
            levels,
            measure: MeasureSpec::Haar,
            filter: Filter::All,
            trials: self.trials,
            seed: self.seed,
            output: None,
        }
    }
}

/// Terms of `[xⁿ]` landing in the level-`m` cells that meet `S̃_1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullReport {
    pub level: u32,
    pub n: u64,
    pub hits: u64,
    #[serde(with = "rational::serde_rational")]
    pub frequency: Rational,
    /// `⌊N/p⌋/N`: the share of `n` divisible by `p`, all of which land in the hull.
    #[serde(with = "rational::serde_rational")]
    pub forced_share: Rational,
    /// `q^{−(m − ⌈m/p⌉)}`.
    #[serde(with = "rational::serde_rational")]
    pub haar_measure: Rational,
}

fn hull_report(orbit: &OrbitWindows, m: u32) -> HullReport {
    let p = orbit.spec.p();
    let hits = (1..=orbit.n_max)
        .filter(|&n| orbit.row(n)[..m as usize].iter().enumerate().all(|(i, &d)| i as u32 % p == 0 || d == 0))
        .count() as u64;
    let n = orbit.n_max;
    let big = |v: u64| BigInt::from(v);
    HullReport {
        level: m,
        n,
        hits,
        frequency: Rational::new(big(hits), big(n)),
        forced_share: Rational::new(big(n / p as u64), big(n)),
        haar_measure: pow_int(orbit.spec.q(), -((m - m.div_ceil(p)) as i64)),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharPTrial {
    pub trial: u32,
    pub x: LocalFieldElement,
    pub hull: HullReport,
    /// `p^K ∥ n` against `μ_K`, one report per level.
    pub exact_power: Vec<FrequencyReport>,
    /// All `n` against `μ*`.
    pub mu_star: Vec<FrequencyReport>,
    /// All `n` against Haar measure.
    pub haar: Vec<FrequencyReport>,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharPData {
    pub trials: Vec<CharPTrial>,
}

/// `[αxⁿ]` in characteristic p: the deterministic hull excess, `μ_K` along `p^K ∥ n`,
/// and `μ*` against Haar over all `n`. For `α ≠ 1` only data is reported.
pub fn run_char_p(cfg: &CharPConfig) -> Result<RunReport> {
    let start = Instant::now();
    cfg.validate()?;
    let seq = cfg.as_sequence();
    let spec = cfg.field;
    let q = spec.q();
    let claim = cfg.alpha.is_one();
    let trials = run_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let x = draw_x(&seq, &mut rng)?;
        let orbit = orbit_for(&seq, &x)?;
        let hull = hull_report(&orbit, cfg.hull_level);
        let mut verdicts = Vec::new();
        if claim {
            verdicts.push(Verdict::new(
                "hull/forced_share",
                hull.frequency.clone(),
                Relation::AtLeast,
                Threshold::exact(hull.forced_share.clone()),
            ));
            verdicts.push(Verdict::new(
                "hull/exceeds_haar",
                hull.frequency.clone(),
                Relation::Greater,
                Threshold::exact(hull.haar_measure.clone()),
            ));
        }
        let (mut exact_power, mut mu_star, mut haar) = (Vec::new(), Vec::new(), Vec::new());
        for &m in &cfg.levels {
            let filtered = tally(&orbit, m, Filter::ExactPower { k: cfg.k });
            let all = tally(&orbit, m, Filter::All);
            let e = FrequencyReport::from_counts(spec, m, &filtered, MeasureSpec::MuK { k: cfg.k })?;
            let s = FrequencyReport::from_counts(spec, m, &all, MeasureSpec::MuStar)?;
            let h = FrequencyReport::from_counts(spec, m, &all, MeasureSpec::Haar)?;
            if claim {
                verdicts.push(within_tolerance(format!("level_{m}/exact_power_vs_mu_k"), &e, q));
                verdicts.push(within_tolerance(format!("level_{m}/all_vs_mu_star"), &s, q));
                verdicts.push(Verdict::new(
                    format!("level_{m}/all_vs_haar_separated"),
                    h.discrepancy.clone(),
                    Relation::Greater,
                    Threshold::tolerance(12, q, m, h.n),
                ));
            }
            exact_power.push(e);
            mu_star.push(s);
            haar.push(h);
        }
        Ok(CharPTrial { trial: t, x, hull, exact_power, mu_star, haar, verdicts })
    })?;
    let all: Vec<&[Verdict]> = trials.iter().map(|t| t.verdicts.as_slice()).collect();
    let verdicts = aggregate(&all);
    let seed = cfg.x.is_random().then_some(cfg.seed);
    Ok(RunReport::new("charp", cfg, seed, ReportData::CharP(CharPData { trials }), verdicts, claim, start))
}

/// Grid of the exhaustive invariance and decorrelation oracles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    pub primes: Vec<u32>,
    /// Largest λ of the invariance maps and largest `λ_f` of the decorrelation pairs.
    pub max_lambda: u32,
    /// Largest `λ_g` of the decorrelation pairs.
    pub max_lambda_g: u32,
    /// Random maps per grid point.
    pub specs_per_lambda: u32,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { primes: vec![2, 3, 5], max_lambda: 2, max_lambda_g: 2, specs_per_lambda: 20, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceCase {
    pub p: u32,
    pub lambda: u32,
    pub beta: LocalFieldElement,
    pub shift: LocalFieldElement,
    pub report: InvarianceReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecorrelationCase {
    pub p: u32,
    pub lambda_f: u32,
    pub lambda_g: u32,
    pub gamma: u32,
    pub f: ScalingMapSpec,
    pub g: ScalingMapSpec,
    pub cells: Vec<DecorrelationReport>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleData {
    pub invariance: Vec<InvarianceCase>,
    pub decorrelation: Vec<DecorrelationCase>,
}

/// `x ↦ π^{−λ}u·x + c` on 𝒪 with random unit `u` and random `c ∈ 𝒪`.
fn random_affine(spec: FieldSpec, lambda: u32, digits: i64, rng: &mut ChaCha8Rng) -> Result<ScalingMapSpec> {
    let l = lambda as i64;
    let beta = LocalFieldElement::random_with_norm(spec, l, -l + digits, rng)?;
    let shift = LocalFieldElement::random_in_disk(&Disk::unit(spec), digits, rng)?;
    ScalingMapSpec::affine(beta, shift, Disk::unit(spec))
}

pub fn run_oracles(cfg: &OracleConfig) -> Result<RunReport> {
    let start = Instant::now();
    if cfg.primes.is_empty() || cfg.specs_per_lambda == 0 {
        return config_error("need at least one prime and one map per grid point");
    }
    let mut invariance = Vec::new();
    let mut decorrelation = Vec::new();
    for &p in &cfg.primes {
        let spec = FieldSpec::qp(p).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        let mut rng = trial_rng(cfg.seed, p);
        for lambda in 0..=cfg.max_lambda {
            let m = lambda + 2;
            for _ in 0..cfg.specs_per_lambda {
                let map = random_affine(spec, lambda, m as i64 + GUARD_DIGITS, &mut rng)?;
                let report = measures::oracle_haar_invariance(&map, m, 2)?;
                let crate::scaling::MapKind::Affine { beta, c } = map.kind().clone() else {
                    unreachable!("affine by construction")
                };
                invariance.push(InvarianceCase { p, lambda, beta, shift: c, report });
            }
        }
        for lambda_f in 1..=cfg.max_lambda {
            for lambda_g in 0..lambda_f.min(cfg.max_lambda_g + 1) {
                let digits = (lambda_f + lambda_f - lambda_g) as i64 + GUARD_DIGITS;
                let f = random_affine(spec, lambda_f, digits, &mut rng)?;
                let g = random_affine(spec, lambda_g, digits, &mut rng)?;
                for gamma in 0..=lambda_f - lambda_g {
                    let cells = measures::oracle_decorrelation_cells(&f, &g, gamma, None)?;
                    let pass = cells.iter().all(|c| c.pass);
                    decorrelation.push(DecorrelationCase {
                        p,
                        lambda_f,
                        lambda_g,
                        gamma,
                        f: f.clone(),
                        g: g.clone(),
                        cells,
                        pass,
                    });
                }
            }
        }
    }
    let verdicts = vec![
        Verdict::no_failures("invariance/failing_maps", invariance.iter().filter(|c| !c.report.pass).count()),
        Verdict::no_failures("decorrelation/failing_cases", decorrelation.iter().filter(|c| !c.pass).count()),
    ];
    let data = ReportData::Oracles(OracleData { invariance, decorrelation });
    Ok(RunReport::new("oracle", cfg, Some(cfg.seed), data, verdicts, true, start))
}

/// Points of the exceptional sets that can be constructed digit by digit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum ConstructTarget {
    /// `[x(3/2)ⁿ] ∈ 2ℤ_2` for all `n ≥ 0`, `x ∈ D(1/2, 1)`.
    Mahler {
        precision: i64,
        /// Depth of the exhaustive uniqueness search, if any.
        search_depth: Option<i64>,
    },
    /// `[αx^m] ∈ π^H𝒪` for every `m` not divisible by `p^K`, in ℚ_p.
    BiasedPowers { p: u32, k: u32, h: i64, l: i64, alpha: Scalar, precision: i64 },
    /// `|[αx^{n_k}] − b_k| ≤ τ^{−n_k}` near `z`, `τ = q^b`.
    ShrinkingTargets {
        p: u32,
        z: Scalar,
        alpha: Scalar,
        #[serde(with = "rational::serde_rational")]
        tau_exponent: Rational,
        delta_exponent: i64,
        count: usize,
        precision: i64,
    },
    /// `[αx^{r̃_n}]` converging to the targets along a refinement of `r`.
    ConvergentSubsequence {
        p: u32,
        r: Vec<u64>,
        z: Scalar,
        alpha: Scalar,
        k: u32,
        #[serde(with = "rational::serde_rational")]
        eta: Rational,
        #[serde(with = "rational::serde_rational")]
        epsilon: Rational,
        delta_exponent: i64,
        max_shift: usize,
        precision: i64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructData {
    pub x: LocalFieldElement,
    /// Exponents of the constrained powers, where the family has them.
    pub exponents: Option<Vec<String>>,
    pub certificate: MembershipCertificate,
    /// Outcome of the independent re-evaluation of the certificate.
    pub recheck: bool,
    pub branch_levels: BranchLevels,
    /// Prefixes surviving the exhaustive search, as text.
    pub search_survivors: Option<Vec<String>>,
}

pub fn run_construct(target: &ConstructTarget) -> Result<RunReport> {
    let start = Instant::now();
    let qp = |p: u32| FieldSpec::qp(p).map_err(|e| Error::InvalidConfiguration(e.to_string()));
    let (maps, schedule, disk, precision, exponents, depth) = match target {
        ConstructTarget::Mahler { precision, search_depth } => {
            let count = (*precision).max(search_depth.unwrap_or(0)).max(1) as usize + 1;
            let inst = exceptional::three_halves_instance(count)?;
            (inst.maps, inst.schedule, inst.start, *precision, None, *search_depth)
        }
        ConstructTarget::BiasedPowers { p, k, h, l, alpha, precision } => {
            let spec = qp(*p)?;
            let params = BiasedPowersParams {
                k: *k,
                h: *h,
                l: *l,
                alpha: alpha.element(spec, precision + 2 * GUARD_DIGITS)?,
                targets: Targets::zero(spec),
            };
            let inst = exceptional::biased_powers_instance(&params, (*precision).max(1) as usize + 2)?;
            let exps = inst.maps.iter().map(map_exponent).collect();
            (inst.maps, inst.schedule, inst.start, *precision, Some(exps), None)
        }
        ConstructTarget::ShrinkingTargets { p, z, alpha, tau_exponent, delta_exponent, count, precision } => {
            let spec = qp(*p)?;
            let work = precision + 2 * GUARD_DIGITS;
            let z = z.element(spec, work)?;
            let alpha = alpha.element(spec, work)?;
            let plan = exceptional::shrinking_targets_schedule(&z, tau_exponent, *delta_exponent, &alpha, *count, Targets::zero(spec))?;
            if !plan.audit_pass {
                return Err(Error::InvalidSchedule("the emitted subsequence fails its own audit".into()));
            }
            let exps: Vec<u64> = plan.exponents.iter().map(|n| n.try_into().unwrap_or(u64::MAX)).collect();
            let maps = exceptional::power_maps(&alpha, exps.iter().copied(), &plan.start)?;
            let shown = plan.exponents.iter().map(|n| n.to_string()).collect();
            (maps, plan.schedule, plan.start, *precision, Some(shown), None)
        }
        ConstructTarget::ConvergentSubsequence { p, r, z, alpha, k, eta, epsilon, delta_exponent, max_shift, precision } => {
            let spec = qp(*p)?;
            let work = precision + 2 * GUARD_DIGITS;
            let z = z.element(spec, work)?;
            let alpha = alpha.element(spec, work)?;
            let plan = exceptional::convergent_subsequence_schedule(
                r,
                &z,
                &alpha,
                *delta_exponent,
                *k,
                eta,
                epsilon,
                *max_shift,
                Targets::zero(spec),
            )?;
            let maps = exceptional::power_maps(&alpha, plan.exponents.iter().copied(), &plan.start)?;
            let shown = plan.exponents.iter().map(|n| n.to_string()).collect();
            (maps, plan.schedule, plan.start, *precision, Some(shown), None)
        }
    };
    let (x, certificate) = exceptional::construct_point(&maps, &schedule, &disk, precision)?;
    let recheck = exceptional::verify_certificate(&maps, &schedule, &x, &certificate)?;
    let branch_levels = exceptional::branch_levels(&schedule, precision)?;
    let mut verdicts = vec![
        Verdict::no_failures("certificate/failing_rows", certificate.rows.iter().filter(|r| !r.pass).count()),
        Verdict::no_failures("certificate/recheck_mismatch", usize::from(!recheck)),
    ];
    let mut survivors = None;
    if let ConstructTarget::Mahler { .. } = target {
        verdicts.push(Verdict::no_failures("branch_levels/count", branch_levels.count() as usize));
        if let Some(d) = depth {
            let found = exceptional::exhaustive_prefixes(&maps, &schedule, &disk, d)?;
            let agrees = found.len() == 1 && found[0].truncate(d) == x.truncate(d);
            verdicts.push(Verdict::new(
                "search/survivors",
                rational::int(found.len() as i64),
                Relation::Equal,
                Threshold::exact(Rational::one()),
            ));
            verdicts.push(Verdict::no_failures("search/prefix_mismatch", usize::from(!agrees)));
            survivors = Some(found.iter().map(|e| e.truncate(d).to_text()).collect());
        }
    }
    let data = ConstructData { x, exponents, certificate, recheck, branch_levels, search_survivors: survivors };
    Ok(RunReport::new("construct", target, None, ReportData::Construct(Box::new(data)), verdicts, true, start))
}

fn map_exponent(m: &ScalingMapSpec) -> String {
    match m.kind() {
        crate::scaling::MapKind::Power { n, .. } => n.to_string(),
        crate::scaling::MapKind::Geometric { n, .. } => n.to_string(),
        crate::scaling::MapKind::Affine { .. } => "1".to_string(),
    }
}

/// Dimension computations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum DimTarget {
    ClosedForm { case: ClosedFormCase },
    FrequencySet {
        m: u32,
        #[serde(with = "rational::serde_rational")]
        rho: Rational,
        #[serde(with = "rational::serde_rational_vec")]
        probs: Vec<Rational>,
    },
    /// The ratio sequence of the biased-powers schedule and both nested-disk bounds.
    BiasedPowersSchedule { p: u32, k: u32, h: i64, l: i64, horizon: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimData {
    pub value: Option<DimValue>,
    pub gamma: Option<GammaDim>,
    pub bounds: Option<MoranBounds>,
    /// Whether `m_k δ_k = q·d_{k−1}` held at every index.
    pub identity_holds: Option<bool>,
}

pub fn run_dim(target: &DimTarget) -> Result<RunReport> {
    let start = Instant::now();
    let mut verdicts = Vec::new();
    let data = match target {
        DimTarget::ClosedForm { case } => {
            DimData { value: Some(exceptional::closed_form_dims(case)?), gamma: None, bounds: None, identity_holds: None }
        }
        DimTarget::FrequencySet { m, rho, probs } => DimData {
            value: Some(exceptional::freq_set_dim(*m, rho, probs)?),
            gamma: None,
            bounds: None,
            identity_holds: None,
        },
        DimTarget::BiasedPowersSchedule { p, k, h, l, horizon } => {
            let spec = FieldSpec::qp(*p).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
            let params =
                BiasedPowersParams { k: *k, h: *h, l: *l, alpha: LocalFieldElement::one(spec, 1), targets: Targets::zero(spec) };
            let (schedule, _) = exceptional::biased_powers_schedule(&params, *horizon)?;
            let gamma = exceptional::gamma_dim(&schedule, *horizon)?;
            let md = exceptional::moran_data(&schedule, *horizon)?;
            let identity = (1..*horizon).all(|i| &md.log_m[i] + &md.log_delta[i] == &md.log_d[i - 1] + Rational::one());
            let bounds = exceptional::moran_bounds(&md.log_m, &md.log_delta, &md.log_d, *horizon)?;
            let value = exceptional::closed_form_dims(&ClosedFormCase::BiasedPowers { p: *p, k: *k, h: *h, l: *l })?;
            if let (Some(limit), Some(v)) = (&gamma.analytic_limit, value.exact()) {
                verdicts.push(Verdict::new("gamma/limit_matches_closed_form", limit.clone(), Relation::Equal, Threshold::exact(v.clone())));
            }
            verdicts.push(Verdict::no_failures("bounds/identity_violations", usize::from(!identity)));
            DimData { value: Some(value), gamma: Some(gamma), bounds: Some(bounds), identity_holds: Some(identity) }
        }
    };
    Ok(RunReport::new("dim", target, None, ReportData::Dim(data), verdicts, true, start))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PisotConfig {
    pub p: u32,
    pub k: u32,
    pub l: u32,
    /// Rows of the limit-point table.
    pub n_max: usize,
    /// Length of the orbit whose level-1 discrepancy is reported.
    pub orbit_n: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PisotData {
    pub table: LimitPointTable,
    /// `v(ξ̄ⁿ)` for the conjugate `ξ̄ = T_1 − ξ`, by repeated multiplication.
    pub conjugate_valuations: Vec<Option<i64>>,
    pub orbit_frequencies: FrequencyReport,
}

pub fn run_pisot(cfg: &PisotConfig) -> Result<RunReport> {
    let start = Instant::now();
    let spec = PisotChabautySpec::new(cfg.p, cfg.k, cfg.l).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
    if cfg.n_max < 2 || cfg.orbit_n == 0 {
        return config_error("need at least two table rows and one orbit term");
    }
    let f = spec.field();
    let prec = special::required_precision(&spec, cfg.n_max);
    let table = special::limit_point_table(&spec, cfg.n_max, prec)?;

    let xi = special::pisot_value(&spec, prec)?;
    let t1 = LocalFieldElement::pi_power(f, -(cfg.k as i64), xi.abs_precision()).neg();
    let conj = t1.sub(&xi)?;
    let mut acc = conj.clone();
    let mut conjugate_valuations = Vec::with_capacity(cfg.n_max);
    for _ in 0..cfg.n_max {
        conjugate_valuations.push(acc.val());
        acc = acc.mul(&conj)?;
    }

    let orbit_prec = special::required_precision(&spec, cfg.orbit_n as usize);
    let xi_long = special::pisot_value(&spec, orbit_prec)?;
    let orbit = orbit::power_orbit(&LocalFieldElement::one(f, orbit_prec), &xi_long, cfg.orbit_n, 1)?;
    let orbit_frequencies = FrequencyReport::from_counts(f, 1, &tally(&orbit, 1, Filter::All), MeasureSpec::Haar)?;

    let l = cfg.l as i64;
    let gap_mismatch = table
        .rows
        .iter()
        .zip(&conjugate_valuations)
        .filter(|(r, c)| r.n >= 2 && (r.trace_gap_norm != Some(-l * r.n as i64) || **c != Some(l * r.n as i64)))
        .count();
    let verdicts = vec![
        Verdict::no_failures("trace_gap/path_mismatch", gap_mismatch),
        Verdict::no_failures("limit_points/failing_rows", table.rows.iter().filter(|r| r.claim_holds == Some(false)).count()),
        Verdict::new(
            "orbit/level_1_discrepancy",
            orbit_frequencies.discrepancy.clone(),
            Relation::Greater,
            Threshold::exact(rational::ratio(1, 2)),
        ),
    ];
    let data = PisotData { table, conjugate_valuations, orbit_frequencies };
    Ok(RunReport::new("pisot", cfg, None, ReportData::Pisot(Box::new(data)), verdicts, true, start))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u32) -> FieldSpec {
        FieldSpec::qp(p).unwrap()
    }

    fn ud(spec: FieldSpec, x: XSource, n: u64, levels: Vec<u32>, filter: Filter, trials: u32) -> ExperimentConfig {
        ExperimentConfig {
            field: spec,
            generator: Generator::Power { alpha: Scalar::one() },
            x,
            n,
            levels,
            measure: MeasureSpec::Haar,
            filter,
            trials,
            seed: 7,
            output: None,
        }
    }

    #[test]
    fn filters_match_valuations() {
        for p in [2u32, 3, 5] {
            for n in 1..500u64 {
                let v = vp_u64(n, p as u64);
                assert_eq!(Filter::CoprimeToP.admits(n, p), v == 0);
                assert_eq!(Filter::ExactPower { k: 2 }.admits(n, p), v == 2);
                assert_eq!(Filter::NotDivisibleByPower { k: 2 }.admits(n, p), v < 2);
            }
        }
        assert!(Filter::ExactPower { k: 1 }.check(q(3)).is_err());
        assert!(Filter::ExactPower { k: 1 }.check(FieldSpec::fpt(3).unwrap()).is_ok());
    }

    #[test]
    fn stub_stream_has_zero_discrepancy() {
        let spec = q(3);
        let counts = tally_indices(spec, 2, (0..9u64).cycle().take(9 * 4));
        let r = FrequencyReport::from_counts(spec, 2, &counts, MeasureSpec::Haar).unwrap();
        assert!(r.discrepancy.is_zero());
    }

    #[test]
    fn small_norm_is_rejected() {
        let cfg = ud(q(5), XSource::RandomWithNorm { exponent: 0 }, 100, vec![1], Filter::All, 1);
        assert!(matches!(run_koksma(&cfg), Err(Error::InvalidConfiguration(_))));
        let charp = CharPConfig {
            field: q(2),
            alpha: Scalar::one(),
            x: XSource::RandomWithNorm { exponent: 1 },
            n: 10,
            levels: vec![1],
            hull_level: 2,
            k: 1,
            trials: 1,
            seed: 0,
        };
        assert!(matches!(run_char_p(&charp), Err(Error::InvalidConfiguration(_))));
    }

    #[test]
    fn reports_are_deterministic_and_recheckable() {
        let cfg = ud(q(3), XSource::RandomWithNorm { exponent: 1 }, 2000, vec![1, 2], Filter::CoprimeToP, 3);
        let a = run_koksma(&cfg).unwrap();
        let b = run_koksma(&cfg).unwrap();
        assert_eq!(a.deterministic_json(), b.deterministic_json());
        assert!(a.recheck());
        let ReportData::Sequence(d) = &a.data else { panic!() };
        assert_eq!(d.trials.len(), 3);
        assert!(d.trials.iter().all(|t| t.levels[0].n == 1334));
    }

    #[test]
    fn orbit_counts_match_direct_powers() {
        let cfg = ud(q(5), XSource::RandomWithNorm { exponent: 1 }, 60, vec![2], Filter::All, 1);
        let x = draw_x(&cfg, &mut trial_rng(3, 0)).unwrap();
        let orbit = orbit_for(&cfg, &x).unwrap();
        let direct: Vec<u64> = (1..=60).map(|n| x.pow(n).cell_index(2).unwrap()).collect();
        assert_eq!(tally(&orbit, 2, Filter::All), tally_indices(q(5), 2, direct));
    }

    #[test]
    fn geometric_generator_runs() {
        let cfg = ExperimentConfig {
            generator: Generator::Geometric { beta: Scalar::Rational { value: rational::ratio(3, 2) } },
            ..ud(q(2), XSource::RandomInDisk { disk: Disk::unit(q(2)) }, 3000, vec![1, 2], Filter::All, 2)
        };
        let r = run_koksma(&cfg).unwrap();
        assert_eq!(r.pass, Some(true));
    }

    #[test]
    fn biased_point_concentrates_in_one_cell() {
        let cfg = ud(
            q(3),
            XSource::BiasedPowers { k: 1, h: 1, l: 1 },
            200,
            vec![1],
            Filter::NotDivisibleByPower { k: 1 },
            1,
        );
        let r = run_koksma(&cfg).unwrap();
        assert_eq!(r.pass, Some(false));
        let ReportData::Sequence(d) = &r.data else { panic!() };
        assert_eq!(d.trials[0].levels[0].discrepancy, rational::ratio(2, 3));
    }

    #[test]
    fn threshold_comparisons_are_exact() {
        let t = Threshold::tolerance(4, 5, 1, 100_000);
        assert_eq!(t, Threshold::sqrt(rational::ratio(80, 100_000)));
        // 0.0282842... is the root; a statistic just above and below
        assert!(compare(&rational::ratio(28284, 1_000_000), Relation::AtMost, &t));
        assert!(!compare(&rational::ratio(28285, 1_000_000), Relation::AtMost, &t));
    }

    #[test]
    fn seed_rule_allows_one_failure_in_twenty() {
        let ok = Verdict::new("d", Rational::zero(), Relation::AtMost, Threshold::exact(Rational::one())).seed_rule();
        let bad = Verdict::new("d", rational::int(2), Relation::AtMost, Threshold::exact(Rational::one())).seed_rule();
        let mut trials: Vec<Vec<Verdict>> = (0..19).map(|_| vec![ok.clone()]).collect();
        trials.push(vec![bad.clone()]);
        let refs: Vec<&[Verdict]> = trials.iter().map(|v| v.as_slice()).collect();
        assert!(aggregate(&refs)[0].pass);
        trials[0] = vec![bad];
        let refs: Vec<&[Verdict]> = trials.iter().map(|v| v.as_slice()).collect();
        assert!(!aggregate(&refs)[0].pass);
    }

    #[test]
    fn char_p_hull_excess_is_deterministic() {
        let cfg = CharPConfig {
            field: FieldSpec::fpt(2).unwrap(),
            alpha: Scalar::one(),
            x: XSource::RandomWithNorm { exponent: 1 },
            n: 4000,
            levels: vec![2],
            hull_level: 4,
            k: 1,
            trials: 2,
            seed: 11,
        };
        let r = run_char_p(&cfg).unwrap();
        let ReportData::CharP(d) = &r.data else { panic!() };
        for t in &d.trials {
            assert!(t.hull.frequency >= rational::ratio(1, 2));
            assert_eq!(t.hull.haar_measure, rational::ratio(1, 4));
        }
        assert!(r.recheck());
        let open = CharPConfig { alpha: Scalar::PiPower { exponent: -1 }, ..cfg };
        assert_eq!(run_char_p(&open).unwrap().pass, None);
    }
}
