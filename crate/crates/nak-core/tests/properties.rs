use nak_core::exceptional::{self, BiasedPowersParams, MoranSchedule, Targets};
use nak_core::experiments::{self, ExperimentConfig, Filter, Generator, Scalar, XSource};
use nak_core::field::vp_rational;
use nak_core::measures::{self, Disk};
use nak_core::{FieldSpec, LocalFieldElement, MeasureSpec, NormExponent, Rational, ScalingMapSpec};
use num_bigint::BigInt;
use proptest::prelude::*;

const PRIMES: [u32; 4] = [2, 3, 5, 7];

fn spec_strategy() -> impl Strategy<Value = FieldSpec> {
    (0..PRIMES.len(), any::<bool>()).prop_map(|(i, char_p)| {
        let p = PRIMES[i];
        if char_p {
            FieldSpec::fpt(p).unwrap()
        } else {
            FieldSpec::qp(p).unwrap()
        }
    })
}

fn element_in(spec: FieldSpec, v: std::ops::Range<i64>, len: std::ops::Range<usize>) -> impl Strategy<Value = LocalFieldElement> {
    let p = spec.p();
    (v, prop::collection::vec(0..p, len), 1..p).prop_map(move |(v, mut digits, lead)| {
        digits.insert(0, lead);
        let prec = v + digits.len() as i64;
        LocalFieldElement::from_digits(spec, v, &digits, prec).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (LocalFieldElement, LocalFieldElement)> {
    spec_strategy().prop_flat_map(|s| (element_in(s, -4..4, 0..16), element_in(s, -4..4, 0..16)))
}

fn triple() -> impl Strategy<Value = (LocalFieldElement, LocalFieldElement, LocalFieldElement)> {
    spec_strategy().prop_flat_map(|s| (element_in(s, -3..3, 0..12), element_in(s, -3..3, 0..12), element_in(s, -3..3, 0..12)))
}

fn agree(a: &LocalFieldElement, b: &LocalFieldElement) -> bool {
    a.sub(b).unwrap().is_zero()
}

fn vp(mut n: u64, p: u64) -> u32 {
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_laws((x, y, z) in triple()) {
        prop_assert!(agree(&x.add(&y).unwrap(), &y.add(&x).unwrap()));
        prop_assert!(agree(&x.mul(&y).unwrap(), &y.mul(&x).unwrap()));
        prop_assert!(agree(&x.add(&y).unwrap().add(&z).unwrap(), &x.add(&y.add(&z).unwrap()).unwrap()));
        prop_assert!(agree(&x.mul(&y).unwrap().mul(&z).unwrap(), &x.mul(&y.mul(&z).unwrap()).unwrap()));
        let lhs = x.mul(&y.add(&z).unwrap()).unwrap();
        let rhs = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert!(agree(&lhs, &rhs));
        prop_assert!(x.sub(&x).unwrap().is_zero());
        prop_assert!(agree(&x.div(&y).unwrap().mul(&y).unwrap(), &x));
    }

    #[test]
    fn ultrametric((x, y) in pair()) {
        let (nx, ny) = (x.norm_exponent(), y.norm_exponent());
        let s = x.add(&y).unwrap().norm_exponent();
        prop_assert!(s <= nx.max(ny));
        if nx != ny {
            prop_assert_eq!(s, nx.max(ny));
        }
    }

    #[test]
    fn multiplicativity((x, y) in pair()) {
        let v = x.mul(&y).unwrap().val();
        prop_assert_eq!(v, Some(x.val().unwrap() + y.val().unwrap()));
        prop_assert_eq!(x.pow(3).val(), Some(3 * x.val().unwrap()));
    }

    #[test]
    fn precision_never_exceeds_the_rules((x, y) in pair()) {
        let s = x.add(&y).unwrap();
        prop_assert!(s.abs_precision() <= x.abs_precision().min(y.abs_precision()));
        let m = x.mul(&y).unwrap();
        let rel = x.rel_precision().min(y.rel_precision());
        prop_assert!(m.abs_precision() <= x.val().unwrap() + y.val().unwrap() + rel);
    }

    #[test]
    fn integral_and_fractional_parts_decompose(x in spec_strategy().prop_flat_map(|s| element_in(s, -6..3, 6..14))) {
        prop_assume!(x.abs_precision() >= 0);
        let i = x.integral_part().unwrap();
        let f = x.fractional_part().unwrap();
        prop_assert!(i.val().is_none_or(|v| v >= 0));
        prop_assert!(f.is_zero() || f.val().unwrap() < 0);
        let sum = i.add(&f).unwrap();
        prop_assert_eq!(sum.abs_precision(), x.abs_precision());
        prop_assert!(agree(&sum, &x));
    }

    #[test]
    fn text_and_json_round_trip(x in spec_strategy().prop_flat_map(|s| element_in(s, -5..5, 0..20))) {
        let t = LocalFieldElement::parse_text(&x.to_text()).unwrap();
        prop_assert!(t.same_repr(&x));
        let j: LocalFieldElement = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert!(j.same_repr(&x));
    }

    #[test]
    fn rationals_round_trip(i in 0..3usize, num in -100_000i64..100_000, den in 1i64..100_000, n in 1i64..30) {
        let p = PRIMES[i];
        let spec = FieldSpec::qp(p).unwrap();
        let x = LocalFieldElement::from_rational_abs(&BigInt::from(num), &BigInt::from(den), spec, n);
        prop_assume!(x.is_ok());
        let x = x.unwrap();
        let diff = x.to_rational().unwrap() - Rational::new(BigInt::from(num), BigInt::from(den));
        prop_assert!(vp_rational(&diff, p).is_none_or(|v| v >= n));
    }

    #[test]
    fn polynomial_quotients_round_trip(
        i in 0..3usize,
        num in prop::collection::vec(0u32..7, 1..8),
        den in prop::collection::vec(0u32..7, 0..6),
        c0 in 1u32..7,
        n in 1i64..25,
    ) {
        let p = PRIMES[i];
        let spec = FieldSpec::fpt(p).unwrap();
        let num: Vec<u32> = num.iter().map(|d| d % p).collect();
        let mut d = vec![c0 % p];
        d.extend(den.iter().map(|c| c % p));
        prop_assume!(d[0] != 0);
        let x = LocalFieldElement::from_polys(&num, &d, spec, n).unwrap();
        let poly = |cs: &[u32]| {
            cs.iter().enumerate().fold(LocalFieldElement::zero(spec, n + 10), |acc, (k, &c)| {
                let term = LocalFieldElement::from_i64(c as i64, spec, n + 10).mul(&LocalFieldElement::pi_power(spec, k as i64, n + 10)).unwrap();
                acc.add(&term).unwrap()
            })
        };
        prop_assert!(agree(&x.mul(&poly(&d)).unwrap(), &poly(&num)));
    }

    #[test]
    fn filters_match_valuations(n in 1u64..1_000_000, i in 0..PRIMES.len(), k in 1u32..4) {
        let p = PRIMES[i];
        let v = vp(n, p as u64);
        prop_assert_eq!(Filter::ExactPower { k }.admits(n, p), v == k);
        prop_assert_eq!(Filter::NotDivisibleByPower { k }.admits(n, p), v < k);
        prop_assert_eq!(Filter::CoprimeToP.admits(n, p), v == 0);
        prop_assert!(Filter::All.admits(n, p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn hensel_square_roots(y in (0..PRIMES.len()).prop_flat_map(|i| element_in(FieldSpec::qp(PRIMES[i]).unwrap(), -3..4, 4..20))) {
        let sq = y.mul(&y).unwrap();
        let s = sq.hensel_sqrt(None).unwrap();
        let back = s.mul(&s).unwrap();
        prop_assert!(back.abs_precision() <= sq.abs_precision() + 1);
        prop_assert!(agree(&back, &sq));
        let sign = |z: &LocalFieldElement| agree(z, &y) || agree(&z.neg(), &y);
        prop_assert!(sign(&s.truncate(y.abs_precision() - 1)));
    }
}

fn char_p_disk() -> impl Strategy<Value = Disk> {
    (0..3usize, 0i64..5).prop_flat_map(|(i, m)| {
        let spec = FieldSpec::fpt(PRIMES[i]).unwrap();
        prop::collection::vec(0..spec.p(), m as usize).prop_map(move |digits| {
            let index = digits.iter().rev().fold(0u64, |a, &d| a * spec.p() as u64 + d as u64);
            Disk::new(LocalFieldElement::from_cell_index(spec, m as u32, index), m).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mu_star_dominates_and_is_additive(d in char_p_disk()) {
        let p = d.spec().p() as i64;
        let star = measures::mu_star_of_disk(&d).unwrap();
        let haar = measures::haar_of_disk(&d);
        prop_assert!(star >= Rational::new(BigInt::from(p - 1), BigInt::from(p)) * &haar);
        let sons = d.sons();
        prop_assert_eq!(sons.iter().map(|s| measures::mu_star_of_disk(s).unwrap()).sum::<Rational>(), star);
        for k in 1..=3 {
            let mk = measures::mu_k_of_disk(&d, k).unwrap();
            prop_assert_eq!(sons.iter().map(|s| measures::mu_k_of_disk(s, k).unwrap()).sum::<Rational>(), mk);
        }
    }

    #[test]
    fn psi_is_an_isometry(
        i in 0..3usize,
        units in prop::collection::vec((1u32..7, 0u32..7), 10),
        shifts in prop::collection::vec(0u64..1000, 10),
        a in prop::collection::vec(0u32..7, 10),
        b in prop::collection::vec(0u32..7, 10),
        char_p in any::<bool>(),
    ) {
        let p = PRIMES[i];
        let spec = if char_p { FieldSpec::fpt(p).unwrap() } else { FieldSpec::qp(p).unwrap() };
        let work = 40;
        let family: Vec<ScalingMapSpec> = units
            .iter()
            .zip(&shifts)
            .enumerate()
            .map(|(n, (&(u0, u1), &c))| {
                let u = LocalFieldElement::from_digits(spec, 0, &[1 + u0 % (p - 1), u1 % p], 2).unwrap().pad_to(work);
                let beta = u.mul(&LocalFieldElement::pi_power(spec, -(n as i64), work)).unwrap();
                let c = LocalFieldElement::from_cell_index(spec, 6, c % (p as u64).pow(6)).pad_to(work);
                ScalingMapSpec::affine(beta, c, Disk::unit(spec)).unwrap()
            })
            .collect();
        let elt = |ds: &[u32]| {
            let index = ds.iter().rev().fold(0u64, |acc, &d| acc * p as u64 + (d % p) as u64);
            LocalFieldElement::from_cell_index(spec, 10, index)
        };
        let (x, y) = (elt(&a), elt(&b));
        let (px, py) = (exceptional::psi_encode(&family, &x, 10).unwrap(), exceptional::psi_encode(&family, &y, 10).unwrap());
        prop_assert_eq!(px.sub(&py).unwrap().norm_exponent(), x.sub(&y).unwrap().norm_exponent());
    }

    #[test]
    fn raising_h_lowers_every_gamma_term(
        gaps in prop::collection::vec(0i64..4, 12),
        hs in prop::collection::vec(0i64..3, 12),
        j in 1usize..12,
        by in 1i64..3,
    ) {
        let mut lambdas = Vec::new();
        let mut l = 1;
        for (g, h) in gaps.iter().zip(&hs) {
            lambdas.push(l);
            l += h + by + g;
        }
        let s = MoranSchedule::explicit(0, &lambdas, &hs, Targets::Seeded { seed: 0 }).unwrap();
        let raised = s.with_raised_h(j, by).unwrap();
        let (a, b) = (exceptional::gamma_dim(&s, 12).unwrap(), exceptional::gamma_dim(&raised, 12).unwrap());
        for (t, u) in a.terms.iter().zip(&b.terms) {
            prop_assert_eq!(t.n, u.n);
            prop_assert!(u.ratio <= t.ratio);
        }
        prop_assert!(b.tail_min <= a.tail_min);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn passing_certificates_recheck(i in 0..3usize, k in 1u32..3, h in 1i64..3, extra in 1i64..4, seed in any::<u64>()) {
        let p = PRIMES[i];
        let spec = FieldSpec::qp(p).unwrap();
        let params = BiasedPowersParams {
            k,
            h,
            l: h + extra,
            alpha: LocalFieldElement::one(spec, 80),
            targets: Targets::Seeded { seed },
        };
        let inst = exceptional::biased_powers_instance(&params, 8).unwrap();
        let (x, cert) = exceptional::construct_point(&inst.maps, &inst.schedule, &inst.start, 48).unwrap();
        prop_assert!(cert.pass);
        prop_assert!(exceptional::verify_certificate(&inst.maps, &inst.schedule, &x, &cert).unwrap());
    }

    #[test]
    fn reports_are_deterministic(i in 0..3usize, seed in any::<u64>(), r in 1i64..3) {
        let spec = FieldSpec::qp(PRIMES[i]).unwrap();
        let cfg = ExperimentConfig {
            field: spec,
            generator: Generator::Power { alpha: Scalar::one() },
            x: XSource::RandomWithNorm { exponent: r },
            n: 300,
            levels: vec![1, 2],
            measure: MeasureSpec::Haar,
            filter: Filter::All,
            trials: 2,
            seed,
            output: None,
        };
        let a = experiments::run_koksma(&cfg).unwrap();
        let b = experiments::run_koksma(&cfg).unwrap();
        prop_assert_eq!(a.deterministic_json(), b.deterministic_json());
        prop_assert!(a.recheck());
    }
}

#[test]
fn zero_has_the_smallest_norm() {
    let s = FieldSpec::qp(3).unwrap();
    assert_eq!(LocalFieldElement::zero(s, 5).norm_exponent(), NormExponent::NegInfinite);
}
