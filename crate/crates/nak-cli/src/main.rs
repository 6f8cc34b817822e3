//! `nak`: experiments, oracles, constructions and dimension values from the command line.
//!
//! Exit status: 0 when every verdict passes, 1 when one fails, 2 on a configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nak_core::exceptional::{ClosedFormCase, DimValue};
use nak_core::experiments::{
    self, CharPConfig, ConstructTarget, DimTarget, ExperimentConfig, Filter, Generator, OracleConfig, PisotConfig,
    ReportData, RunReport, Scalar, XSource,
};
use nak_core::measures::{Disk, FrequencyReport};
use nak_core::special::LimitPointTable;
use nak_core::{FieldSpec, LocalFieldElement, MeasureSpec, Rational};

#[derive(Parser)]
#[command(name = "nak", version, about = "Uniform distribution and exceptional sets in local fields")]
struct Cli {
    /// Residue characteristic.
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Field characteristic: 0 for Q_p, p for F_p((t)).
    #[arg(long = "char", global = true)]
    characteristic: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the full JSON report here ("-" for stdout).
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write the report's tables as CSV here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Digits of precision for constructions and element conversion.
    #[arg(long, global = true)]
    precision: Option<i64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequencies of [alpha x^n] or [beta^n x] against a measure.
    Ud(UdArgs),
    /// Characteristic-p behaviour of [x^n]: hull excess, mu_K along p^K || n, and mu*.
    Charp(CharpArgs),
    /// Exhaustive invariance and decorrelation oracles for affine scaling maps.
    Oracle(OracleArgs),
    /// Construct a point of an exceptional set with a membership certificate.
    Construct {
        #[command(subcommand)]
        target: ConstructCmd,
    },
    /// Dimension values.
    Dim {
        #[command(subcommand)]
        target: DimCmd,
    },
    /// Pisot-Chabauty limit-point table and orbit frequencies.
    Pisot(PisotArgs),
    /// Parse, evaluate and format field elements.
    Element {
        #[command(subcommand)]
        action: ElementCmd,
    },
}

#[derive(Args)]
struct XArgs {
    /// Explicit x in text form, e.g. "Qp{p=5; v=-1; digits=1,2; prec=2}".
    #[arg(long, conflicts_with_all = ["x_norm", "x_disk", "x_biased"])]
    x: Option<String>,
    /// Random x with |x| = q^r.
    #[arg(long, value_name = "R")]
    x_norm: Option<i64>,
    /// Random x in the disk "CENTER@M", i.e. D(center, q^-M).
    #[arg(long, value_name = "CENTER@M")]
    x_disk: Option<String>,
    /// The constructed biased-powers point "K,H,L".
    #[arg(long, value_name = "K,H,L")]
    x_biased: Option<String>,
}

#[derive(Args)]
struct UdArgs {
    #[arg(long, short = 'n', default_value_t = 10_000)]
    n: u64,
    /// Comma-separated levels.
    #[arg(long, default_value = "1")]
    levels: String,
    /// Multiplier alpha (rational, "pi^k", or element text).
    #[arg(long, conflicts_with = "beta")]
    alpha: Option<String>,
    /// Ratio beta of the geometric sequence [beta^n x].
    #[arg(long)]
    beta: Option<String>,
    #[command(flatten)]
    x: XArgs,
    /// all, coprime, exact:K or not-divisible:K.
    #[arg(long, default_value = "all")]
    filter: String,
    /// haar, mu_k:K or mu_star.
    #[arg(long, default_value = "haar")]
    measure: String,
    #[arg(long, default_value_t = 1)]
    trials: u32,
}

#[derive(Args)]
struct CharpArgs {
    #[arg(long, short = 'n', default_value_t = 100_000)]
    n: u64,
    #[arg(long, default_value = "2")]
    levels: String,
    #[arg(long, default_value_t = 4)]
    hull_level: u32,
    /// Exponent K of the p^K || n comparison.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// A multiplier other than 1 reports data without verdicts.
    #[arg(long)]
    alpha: Option<String>,
    #[command(flatten)]
    x: XArgs,
    #[arg(long, default_value_t = 1)]
    trials: u32,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 2)]
    max_lambda: u32,
    #[arg(long, default_value_t = 2)]
    max_lambda_g: u32,
    #[arg(long, default_value_t = 20)]
    specs: u32,
    /// Primes to run; defaults to --p, or 2,3,5.
    #[arg(long)]
    primes: Option<String>,
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// The unique x in D(1/2, 1) of Q_2 with [x(3/2)^n] even for all n.
    Mahler {
        #[arg(long)]
        search_depth: Option<i64>,
    },
    /// x with [alpha x^m] in pi^H O for every m not divisible by p^K.
    BiasedPowers {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        h: i64,
        #[arg(long, default_value_t = 6)]
        l: i64,
        #[arg(long, default_value = "1")]
        alpha: String,
    },
    /// Targets shrinking like tau^-n along a lacunary subsequence.
    ShrinkingTargets {
        #[arg(long)]
        z: String,
        #[arg(long, default_value = "1")]
        alpha: String,
        /// b with tau = q^b.
        #[arg(long, default_value = "1")]
        tau_exponent: String,
        /// d with delta = q^-d.
        #[arg(long)]
        delta_exponent: i64,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Subsequences converging to targets along a refinement of r.
    ConvergentSubsequence {
        /// Comma-separated increasing exponents.
        #[arg(long)]
        r: String,
        #[arg(long)]
        z: String,
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        eta: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        delta_exponent: i64,
        #[arg(long, default_value_t = 8)]
        max_shift: usize,
    },
}

#[derive(Subcommand)]
enum DimCmd {
    /// 1 - (1 - p^-K) H / L.
    BiasedPowers {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        h: i64,
        #[arg(long)]
        l: i64,
    },
    /// log_q|z| / log_q(tau |z|).
    ShrinkingTargets {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        z_norm: String,
        #[arg(long)]
        tau: String,
    },
    /// eta / (1 + epsilon - eta epsilon).
    ConvergentSubsequence {
        #[arg(long)]
        eta: String,
        #[arg(long)]
        epsilon: String,
    },
    /// (1 - rho) - rho sum p_j log_m p_j.
    FrequencySet {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        rho: String,
        /// Comma-separated probabilities.
        #[arg(long)]
        probs: String,
    },
    /// Ratio sequence and nested-disk bounds of the biased-powers schedule.
    Schedule {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        h: i64,
        #[arg(long)]
        l: i64,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
}

#[derive(Args)]
struct PisotArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    l: u32,
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    #[arg(long, default_value_t = 200)]
    orbit_n: u64,
}

#[derive(Subcommand)]
enum ElementCmd {
    /// Text form to JSON.
    Parse { text: String },
    /// A rational number as an element of the field given by --p/--char.
    Eval { value: String },
    /// JSON form to text.
    Format { value: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("nak: {msg}");
            ExitCode::from(2)
        }
    }
}

type CliResult<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn field(cli: &Cli) -> CliResult<FieldSpec> {
    let p = cli.p.ok_or("--p is required")?;
    match cli.characteristic.unwrap_or(0) {
        0 => FieldSpec::qp(p).map_err(err),
        c if c == p => FieldSpec::fpt(p).map_err(err),
        c => Err(format!("--char must be 0 or p, got {c}")),
    }
}

fn rational(s: &str) -> CliResult<Rational> {
    s.trim().parse::<Rational>().map_err(|_| format!("not a rational number: {s}"))
}

fn scalar(s: &str) -> CliResult<Scalar> {
    let s = s.trim();
    if let Some(e) = s.strip_prefix("pi^").or_else(|| s.strip_prefix("t^")).or_else(|| s.strip_prefix("p^")) {
        let exponent = e.parse().map_err(|_| format!("bad exponent in {s}"))?;
        return Ok(Scalar::PiPower { exponent });
    }
    if s.contains('{') {
        return Ok(Scalar::Element { value: LocalFieldElement::parse_text(s).map_err(err)? });
    }
    Ok(Scalar::Rational { value: rational(s)? })
}

fn list<T: std::str::FromStr>(s: &str) -> CliResult<Vec<T>> {
    s.split(',').map(|t| t.trim().parse::<T>().map_err(|_| format!("bad list entry {t:?}"))).collect()
}

fn rationals(s: &str) -> CliResult<Vec<Rational>> {
    s.split(',').map(rational).collect()
}

fn filter(s: &str) -> CliResult<Filter> {
    let (name, k) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
    let k = || -> CliResult<u32> { k.ok_or(format!("{name} needs :K"))?.parse().map_err(err) };
    match name {
        "all" => Ok(Filter::All),
        "coprime" => Ok(Filter::CoprimeToP),
        "exact" => Ok(Filter::ExactPower { k: k()? }),
        "not-divisible" => Ok(Filter::NotDivisibleByPower { k: k()? }),
        _ => Err(format!("unknown filter {s}")),
    }
}

fn measure(s: &str) -> CliResult<MeasureSpec> {
    match s.split_once(':') {
        None if s == "haar" => Ok(MeasureSpec::Haar),
        None if s == "mu_star" => Ok(MeasureSpec::MuStar),
        Some(("mu_k", k)) => Ok(MeasureSpec::MuK { k: k.parse().map_err(err)? }),
        _ => Err(format!("unknown measure {s}")),
    }
}

fn x_source(args: &XArgs, spec: FieldSpec) -> CliResult<XSource> {
    if let Some(t) = &args.x {
        let value = LocalFieldElement::parse_text(t).map_err(err)?;
        return Ok(XSource::Explicit { value });
    }
    if let Some(d) = &args.x_disk {
        let (c, m) = d.rsplit_once('@').ok_or("--x-disk expects CENTER@M")?;
        let m: i64 = m.parse().map_err(err)?;
        let center = match scalar(c)? {
            Scalar::Element { value } => value,
            s => s.element(spec, m.max(1) + 16).map_err(err)?,
        };
        return Ok(XSource::RandomInDisk { disk: Disk::new(center, m).map_err(err)? });
    }
    if let Some(b) = &args.x_biased {
        let v: Vec<i64> = list(b)?;
        let [k, h, l] = v[..] else { return Err("--x-biased expects K,H,L".into()) };
        return Ok(XSource::BiasedPowers { k: k as u32, h, l });
    }
    Ok(XSource::RandomWithNorm { exponent: args.x_norm.unwrap_or(1) })
}

fn run(cli: &Cli) -> CliResult<ExitCode> {
    let report = match &cli.command {
        Command::Element { action } => return element(cli, action),
        Command::Ud(a) => {
            let spec = field(cli)?;
            let generator = match (&a.alpha, &a.beta) {
                (_, Some(b)) => Generator::Geometric { beta: scalar(b)? },
                (Some(al), None) => Generator::Power { alpha: scalar(al)? },
                (None, None) => Generator::Power { alpha: Scalar::one() },
            };
            let cfg = ExperimentConfig {
                field: spec,
                generator,
                x: x_source(&a.x, spec)?,
                n: a.n,
                levels: list(&a.levels)?,
                measure: measure(&a.measure)?,
                filter: filter(&a.filter)?,
                trials: a.trials,
                seed: cli.seed,
                output: cli.json.as_ref().map(|p| p.display().to_string()),
            };
            experiments::run_koksma(&cfg).map_err(err)?
        }
        Command::Charp(a) => {
            let spec = match (cli.p, cli.characteristic) {
                (Some(p), None) => FieldSpec::fpt(p).map_err(err)?,
                _ => field(cli)?,
            };
            let cfg = CharPConfig {
                field: spec,
                alpha: a.alpha.as_deref().map(scalar).transpose()?.unwrap_or_else(Scalar::one),
                x: x_source(&a.x, spec)?,
                n: a.n,
                levels: list(&a.levels)?,
                hull_level: a.hull_level,
                k: a.k,
                trials: a.trials,
                seed: cli.seed,
            };
            experiments::run_char_p(&cfg).map_err(err)?
        }
        Command::Oracle(a) => {
            let primes = match (&a.primes, cli.p) {
                (Some(s), _) => list(s)?,
                (None, Some(p)) => vec![p],
                (None, None) => vec![2, 3, 5],
            };
            let cfg = OracleConfig {
                primes,
                max_lambda: a.max_lambda,
                max_lambda_g: a.max_lambda_g,
                specs_per_lambda: a.specs,
                seed: cli.seed,
            };
            experiments::run_oracles(&cfg).map_err(err)?
        }
        Command::Construct { target } => experiments::run_construct(&construct_target(cli, target)?).map_err(err)?,
        Command::Dim { target } => experiments::run_dim(&dim_target(cli, target)?).map_err(err)?,
        Command::Pisot(a) => {
            let cfg = PisotConfig { p: cli.p.ok_or("--p is required")?, k: a.k, l: a.l, n_max: a.n_max, orbit_n: a.orbit_n };
            experiments::run_pisot(&cfg).map_err(err)?
        }
    };
    emit(cli, &report)
}

fn construct_target(cli: &Cli, target: &ConstructCmd) -> CliResult<ConstructTarget> {
    let p = || cli.p.ok_or_else(|| "--p is required".to_string());
    let precision = |default: i64| cli.precision.unwrap_or(default);
    Ok(match target {
        ConstructCmd::Mahler { search_depth } => {
            if cli.p.is_some_and(|p| p != 2) || cli.characteristic.is_some_and(|c| c != 0) {
                return Err("this construction lives in Q_2".into());
            }
            ConstructTarget::Mahler { precision: precision(64), search_depth: *search_depth }
        }
        ConstructCmd::BiasedPowers { k, h, l, alpha } => {
            ConstructTarget::BiasedPowers { p: p()?, k: *k, h: *h, l: *l, alpha: scalar(alpha)?, precision: precision(200) }
        }
        ConstructCmd::ShrinkingTargets { z, alpha, tau_exponent, delta_exponent, count } => ConstructTarget::ShrinkingTargets {
            p: p()?,
            z: scalar(z)?,
            alpha: scalar(alpha)?,
            tau_exponent: rational(tau_exponent)?,
            delta_exponent: *delta_exponent,
            count: *count,
            precision: precision(200),
        },
        ConstructCmd::ConvergentSubsequence { r, z, alpha, k, eta, epsilon, delta_exponent, max_shift } => {
            ConstructTarget::ConvergentSubsequence {
                p: p()?,
                r: list(r)?,
                z: scalar(z)?,
                alpha: scalar(alpha)?,
                k: *k,
                eta: rational(eta)?,
                epsilon: rational(epsilon)?,
                delta_exponent: *delta_exponent,
                max_shift: *max_shift,
                precision: precision(200),
            }
        }
    })
}

fn dim_target(cli: &Cli, target: &DimCmd) -> CliResult<DimTarget> {
    let p = || cli.p.ok_or_else(|| "--p is required".to_string());
    Ok(match target {
        DimCmd::BiasedPowers { k, h, l } => {
            DimTarget::ClosedForm { case: ClosedFormCase::BiasedPowers { p: p()?, k: *k, h: *h, l: *l } }
        }
        DimCmd::ShrinkingTargets { q, z_norm, tau } => DimTarget::ClosedForm {
            case: ClosedFormCase::ShrinkingTargets { q: *q, z_norm: rational(z_norm)?, tau: rational(tau)? },
        },
        DimCmd::ConvergentSubsequence { eta, epsilon } => DimTarget::ClosedForm {
            case: ClosedFormCase::ConvergentSubsequence { eta: rational(eta)?, epsilon: rational(epsilon)? },
        },
        DimCmd::FrequencySet { m, rho, probs } => {
            DimTarget::FrequencySet { m: *m, rho: rational(rho)?, probs: rationals(probs)? }
        }
        DimCmd::Schedule { k, h, l, horizon } => {
            DimTarget::BiasedPowersSchedule { p: p()?, k: *k, h: *h, l: *l, horizon: *horizon }
        }
    })
}

fn element(cli: &Cli, action: &ElementCmd) -> CliResult<ExitCode> {
    let x = match action {
        ElementCmd::Parse { text } => LocalFieldElement::parse_text(text).map_err(err)?,
        ElementCmd::Format { value } => serde_json::from_str::<LocalFieldElement>(value).map_err(err)?,
        ElementCmd::Eval { value } => {
            let r = rational(value)?;
            LocalFieldElement::from_rational_scalar(&r, field(cli)?, cli.precision.unwrap_or(16)).map_err(err)?
        }
    };
    let json = serde_json::to_string(&x).map_err(err)?;
    match action {
        ElementCmd::Parse { .. } => println!("{json}"),
        _ => println!("{}", x.to_text()),
    }
    if let Some(path) = &cli.json {
        write_text(path, &json)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if path == Path::new("-") {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn emit(cli: &Cli, report: &RunReport) -> CliResult<ExitCode> {
    summarize(report);
    if let Some(path) = &cli.json {
        write_text(path, &report.to_json())?;
    }
    if let Some(path) = &cli.csv {
        write_csv(path, report)?;
    }
    Ok(match report.pass {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}

fn show_dim(v: &DimValue) -> String {
    match v {
        DimValue::Exact { value } => format!("{value} = {}", v.to_f64()),
        DimValue::Approx { value } => format!("{value} (approximate)"),
    }
}

fn summarize(report: &RunReport) {
    match &report.data {
        ReportData::Sequence(d) => {
            for t in &d.trials {
                let discs: Vec<String> =
                    t.levels.iter().map(|r| format!("level {}: {:.6}", r.level, nak_core::rational::to_f64(&r.discrepancy))).collect();
                println!("trial {}: n = {}, {}", t.trial, t.levels[0].n, discs.join(", "));
            }
        }
        ReportData::CharP(d) => {
            for t in &d.trials {
                let h = &t.hull;
                println!(
                    "trial {}: hull frequency {} (forced share {}, Haar {})",
                    t.trial, h.frequency, h.forced_share, h.haar_measure
                );
            }
        }
        ReportData::Oracles(d) => {
            let bad_inv = d.invariance.iter().filter(|c| !c.report.pass).count();
            let bad_dec = d.decorrelation.iter().filter(|c| !c.pass).count();
            println!("invariance: {} maps, {} failing", d.invariance.len(), bad_inv);
            println!("decorrelation: {} cases, {} failing", d.decorrelation.len(), bad_dec);
        }
        ReportData::Construct(d) => {
            println!("x = {}", d.x.to_text());
            println!(
                "certificate: {} rows, pass {}, recheck {}; branch levels below {}: {}",
                d.certificate.rows.len(),
                d.certificate.pass,
                d.recheck,
                d.branch_levels.horizon,
                d.branch_levels.count()
            );
            if let Some(s) = &d.search_survivors {
                println!("prefixes surviving the exhaustive search: {}", s.len());
            }
        }
        ReportData::Dim(d) => {
            if let Some(v) = &d.value {
                println!("{}", show_dim(v));
            }
            if let Some(g) = &d.gamma {
                println!("ratio tail minimum at horizon {}: {}", g.horizon, g.tail_min);
            }
            if let Some(b) = &d.bounds {
                println!("nested-disk bounds: lower {}, upper {}", b.lower, b.upper);
            }
        }
        ReportData::Pisot(d) => {
            println!("n0 = {}, {} rows, all claims hold: {}", d.table.n0, d.table.rows.len(), d.table.all_claims_hold());
            println!(
                "level-1 discrepancy of {} terms: {}",
                d.orbit_frequencies.n,
                nak_core::rational::to_f64(&d.orbit_frequencies.discrepancy)
            );
        }
    }
    for v in &report.verdicts {
        println!(
            "{} {}: {} vs {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            nak_core::rational::to_f64(&v.statistic),
            v.threshold.to_f64()
        );
    }
}

fn write_csv(path: &Path, report: &RunReport) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let freq = |w: &mut csv::Writer<std::fs::File>, trial: u32, sub: &str, r: &FrequencyReport| -> CliResult<()> {
        for rec in r.csv_records() {
            let mut row = vec![trial.to_string(), sub.to_string()];
            row.extend(rec);
            w.write_record(&row).map_err(err)?;
        }
        Ok(())
    };
    let freq_header = |w: &mut csv::Writer<std::fs::File>| -> CliResult<()> {
        let mut h = vec!["trial", "part"];
        h.extend(FrequencyReport::csv_header());
        w.write_record(&h).map_err(err)
    };
    match &report.data {
        ReportData::Sequence(d) => {
            freq_header(&mut w)?;
            for t in &d.trials {
                for r in &t.levels {
                    freq(&mut w, t.trial, "sequence", r)?;
                }
            }
        }
        ReportData::CharP(d) => {
            freq_header(&mut w)?;
            for t in &d.trials {
                for (part, rs) in [("exact_power", &t.exact_power), ("mu_star", &t.mu_star), ("haar", &t.haar)] {
                    for r in rs {
                        freq(&mut w, t.trial, part, r)?;
                    }
                }
            }
        }
        ReportData::Oracles(d) => {
            w.write_record(["oracle", "p", "lambda_f", "lambda_g", "gamma", "cell", "measure", "expected", "pass"]).map_err(err)?;
            for c in &d.invariance {
                for (cell, n) in c.report.counts.iter().enumerate() {
                    let row = ["invariance".to_string(), c.p.to_string(), c.lambda.to_string(), String::new(),
                        c.report.target_level.to_string(), cell.to_string(), n.to_string(), c.report.expected.to_string(),
                        (*n == c.report.expected).to_string()];
                    w.write_record(&row).map_err(err)?;
                }
            }
            for c in &d.decorrelation {
                for r in &c.cells {
                    let row = ["decorrelation".to_string(), c.p.to_string(), c.lambda_f.to_string(), c.lambda_g.to_string(),
                        c.gamma.to_string(), r.cell.to_string(), r.measure.to_string(), r.expected.to_string(), r.pass.to_string()];
                    w.write_record(&row).map_err(err)?;
                }
            }
        }
        ReportData::Construct(d) => {
            w.write_record(["n", "lambda", "achieved", "required", "pass"]).map_err(err)?;
            for r in &d.certificate.rows {
                w.write_record([r.n.to_string(), r.lambda.to_string(), r.achieved.to_string(), r.required.to_string(), r.pass.to_string()])
                    .map_err(err)?;
            }
        }
        ReportData::Dim(d) => {
            w.write_record(["n", "ratio_num", "ratio_den", "ratio"]).map_err(err)?;
            for t in d.gamma.iter().flat_map(|g| &g.terms) {
                w.write_record([t.n.to_string(), t.ratio.numer().to_string(), t.ratio.denom().to_string(),
                    nak_core::rational::to_f64(&t.ratio).to_string()]).map_err(err)?;
            }
        }
        ReportData::Pisot(d) => {
            w.write_record(LimitPointTable::csv_header()).map_err(err)?;
            for rec in d.table.csv_records() {
                w.write_record(&rec).map_err(err)?;
            }
        }
    }
    w.flush().map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn scalar_forms() {
        assert!(matches!(scalar("pi^-1"), Ok(Scalar::PiPower { exponent: -1 })));
        assert!(matches!(scalar("t^2"), Ok(Scalar::PiPower { exponent: 2 })));
        assert!(matches!(scalar("86/5"), Ok(Scalar::Rational { .. })));
        assert!(scalar("x").is_err());
        assert!(matches!(filter("exact:2"), Ok(Filter::ExactPower { k: 2 })));
        assert!(filter("exact").is_err());
        assert!(matches!(measure("mu_k:3"), Ok(MeasureSpec::MuK { k: 3 })));
    }
}
