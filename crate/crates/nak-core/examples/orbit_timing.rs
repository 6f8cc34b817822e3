use std::time::Instant;

use nak_core::field::{FieldSpec, LocalFieldElement};
use nak_core::orbit::power_orbit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let p: u32 = args.get(1).map_or(5, |s| s.parse().unwrap());
    let char0 = args.get(2).map_or(true, |s| s == "0");
    let n: u64 = args.get(3).map_or(100_000, |s| s.parse().unwrap());
    let spec = if char0 { FieldSpec::qp(p).unwrap() } else { FieldSpec::fpt(p).unwrap() };
    let rel = n as usize + 10;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut d: Vec<u32> = (0..rel).map(|_| rng.gen_range(0..p)).collect();
    d[0] = 1 + rng.gen_range(0..p - 1);
    let x = LocalFieldElement::from_digits(spec, -1, &d, rel as i64 - 1).unwrap();
    let one = LocalFieldElement::one(spec, rel as i64);
    let t = Instant::now();
    let w = power_orbit(&one, &x, n, 2).unwrap();
    println!("{:?} for n = {n}; first row {:?}", t.elapsed(), w.row(1));
}
