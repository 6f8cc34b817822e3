//! Power, affine and geometric map families with exact scaling exponents.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{vp_u64, FieldSpec, LocalFieldElement, NormExponent};
use crate::measures::Disk;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    /// x ↦ αxⁿ
    Power { alpha: LocalFieldElement, n: u64 },
    /// x ↦ βx + c
    Affine { beta: LocalFieldElement, c: LocalFieldElement },
    /// x ↦ βⁿx
    Geometric { beta: LocalFieldElement, n: i64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingMapSpec {
    #[serde(flatten)]
    kind: MapKind,
    domain: Disk,
}

/// How a map changes distances on its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScalingExponent {
    /// |f(x) − f(y)| = q^λ |x − y|
    Scaling(i64),
    /// |f(x) − f(y)| = q^offset |x − y|^power (characteristic p, p | n)
    Holder { offset: i64, power: u64 },
}

/// `D(a, |a|/q^{e+1})` in characteristic 0, `D(a, |a|/q)` in characteristic p.
pub fn scaling_domain(a: &LocalFieldElement) -> Result<Disk> {
    let Some(v) = a.val() else {
        return invalid("scaling domain needs a nonzero center");
    };
    let spec = a.spec();
    let m = if spec.is_char_zero() { v + spec.e() as i64 + 1 } else { v + 1 };
    Disk::new(a.clone(), m)
}

fn nonzero_val(x: &LocalFieldElement, what: &str) -> Result<i64> {
    x.val().ok_or_else(|| Error::InvalidInput(format!("{what} must be nonzero")))
}

impl ScalingMapSpec {
    pub fn power(alpha: LocalFieldElement, n: u64, domain: Disk) -> Result<Self> {
        nonzero_val(&alpha, "alpha")?;
        if n == 0 {
            return invalid("power maps need n >= 1");
        }
        if alpha.spec() != domain.spec() {
            return invalid("alpha and domain live in different fields");
        }
        if n > 1 {
            let spec = domain.spec();
            let a = domain.center();
            let va = nonzero_val(a, "domain center")?;
            let p = spec.p() as u64;
            let needed = if spec.is_char_zero() {
                va + spec.e() as i64 + 1
            } else if n % p != 0 {
                va + 1
            } else {
                // the norm must be constant on the domain
                va + 1
            };
            if domain.radius_exponent() < needed {
                return invalid(format!(
                    "domain radius q^-{} is not inside the scaling domain q^-{needed} of its center",
                    domain.radius_exponent()
                ));
            }
        }
        Ok(ScalingMapSpec { kind: MapKind::Power { alpha, n }, domain })
    }

    pub fn affine(beta: LocalFieldElement, c: LocalFieldElement, domain: Disk) -> Result<Self> {
        nonzero_val(&beta, "beta")?;
        if beta.spec() != domain.spec() || c.spec() != domain.spec() {
            return invalid("map data and domain live in different fields");
        }
        Ok(ScalingMapSpec { kind: MapKind::Affine { beta, c }, domain })
    }

    pub fn geometric(beta: LocalFieldElement, n: i64, domain: Disk) -> Result<Self> {
        nonzero_val(&beta, "beta")?;
        if beta.spec() != domain.spec() {
            return invalid("beta and domain live in different fields");
        }
        Ok(ScalingMapSpec { kind: MapKind::Geometric { beta, n }, domain })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn domain(&self) -> &Disk {
        &self.domain
    }

    pub fn spec(&self) -> FieldSpec {
        self.domain.spec()
    }

    /// Re-validates a deserialized spec.
    pub fn validated(self) -> Result<Self> {
        match self.kind {
            MapKind::Power { alpha, n } => Self::power(alpha, n, self.domain),
            MapKind::Affine { beta, c } => Self::affine(beta, c, self.domain),
            MapKind::Geometric { beta, n } => Self::geometric(beta, n, self.domain),
        }
    }

    pub fn scaling_exponent(&self) -> Result<ScalingExponent> {
        match &self.kind {
            MapKind::Affine { beta, .. } => Ok(ScalingExponent::Scaling(-nonzero_val(beta, "beta")?)),
            MapKind::Geometric { beta, n } => Ok(ScalingExponent::Scaling(-n * nonzero_val(beta, "beta")?)),
            MapKind::Power { alpha, n } => {
                let va = nonzero_val(alpha, "alpha")?;
                if *n == 1 {
                    return Ok(ScalingExponent::Scaling(-va));
                }
                let spec = self.spec();
                let vc = nonzero_val(self.domain.center(), "domain center")?;
                let p = spec.p() as u64;
                let s = vp_u64(*n, p);
                if spec.is_char_zero() {
                    Ok(ScalingExponent::Scaling(-va - (spec.e() * s) as i64 - (*n as i64 - 1) * vc))
                } else if s == 0 {
                    Ok(ScalingExponent::Scaling(-va - (*n as i64 - 1) * vc))
                } else {
                    let ps = p.pow(s);
                    Ok(ScalingExponent::Holder { offset: -va - (*n as i64 - ps as i64) * vc, power: ps })
                }
            }
        }
    }

    fn check_domain(&self, x: &LocalFieldElement) -> Result<()> {
        let inside = match &self.kind {
            MapKind::Power { n, .. } if *n > 1 => self.domain.contains(x)?,
            _ => true,
        };
        if inside {
            Ok(())
        } else {
            Err(Error::OutOfDomain(format!("{x} is outside the map's domain")))
        }
    }

    pub fn apply(&self, x: &LocalFieldElement) -> Result<LocalFieldElement> {
        if x.spec() != self.spec() {
            return invalid("argument lives in a different field");
        }
        self.check_domain(x)?;
        match &self.kind {
            MapKind::Power { alpha, n } => alpha.mul(&x.pow(*n)),
            MapKind::Affine { beta, c } => beta.mul(x)?.add(c),
            MapKind::Geometric { beta, n } => beta.pow_i64(*n)?.mul(x),
        }
    }

    /// Norm exponent of `f(x) − f(y)` predicted by the exact scaling formulas.
    pub fn predicted_distance(&self, x: &LocalFieldElement, y: &LocalFieldElement) -> Result<NormExponent> {
        self.check_domain(x)?;
        self.check_domain(y)?;
        let d = x.sub(y)?;
        let Some(e) = d.norm_exponent().finite() else {
            return Ok(NormExponent::NegInfinite);
        };
        Ok(match self.scaling_exponent()? {
            ScalingExponent::Scaling(l) => NormExponent::Finite(l + e),
            ScalingExponent::Holder { offset, power } => NormExponent::Finite(offset + power as i64 * e),
        })
    }
}

/// λ for `x ↦ αxⁿ` on the scaling domain of a center with valuation `va`;
/// `None` when the map is not scaling (characteristic p, p | n).
pub fn power_lambda(spec: FieldSpec, alpha_val: i64, center_val: i64, n: u64) -> Option<i64> {
    let s = vp_u64(n, spec.p() as u64);
    if spec.is_char_zero() {
        Some(-alpha_val - (spec.e() * s) as i64 - (n as i64 - 1) * center_val)
    } else if s == 0 {
        Some(-alpha_val - (n as i64 - 1) * center_val)
    } else {
        None
    }
}

/// `#K_N`: pairs `(n, m)` with `n, m ≤ N` and `λ_n = λ_m`.
pub fn count_kn(schedule: &[i64], n: usize) -> Result<u64> {
    if n > schedule.len() {
        return invalid(format!("N = {n} exceeds schedule length {}", schedule.len()));
    }
    let mut classes: HashMap<i64, u64> = HashMap::new();
    for &l in &schedule[..n] {
        *classes.entry(l).or_default() += 1;
    }
    Ok(classes.values().map(|c| c * c).sum())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaClass {
    pub members: Vec<u64>,
    /// `#Λ ≤ e·log_p(N + k)/γ + 1`, decided in integers.
    pub bound_holds: bool,
}

/// `Λ^γ_{n,k,N} = {k ≤ m ≤ N+k−1 : mγ − v(m) = nγ − v(n)}`.
pub fn lambda_class(gamma: u64, n: u64, k: u64, big_n: u64, spec: FieldSpec) -> Result<LambdaClass> {
    if gamma == 0 {
        return invalid("gamma must be positive");
    }
    if k == 0 || n < k || n > big_n + k - 1 {
        return invalid(format!("need 1 <= k <= n <= N + k - 1, got k={k} n={n} N={big_n}"));
    }
    let p = spec.p() as u64;
    let e = spec.e() as i64;
    let key = |m: u64| m as i128 * gamma as i128 - (e * vp_u64(m, p) as i64) as i128;
    let target = key(n);
    let members: Vec<u64> = (k..big_n + k).filter(|&m| key(m) == target).collect();
    let s = members.len() as u64;
    // s ≤ e·log_p(N+k)/γ + 1  ⇔  p^{(s−1)γ} ≤ (N+k)^e
    let lhs = p.checked_pow(((s - 1) * gamma) as u32);
    let rhs = (big_n + k).checked_pow(e as u32);
    let bound_holds = match (lhs, rhs) {
        (Some(l), Some(r)) => l <= r,
        (None, _) => false,
        (Some(_), None) => true,
    };
    Ok(LambdaClass { members, bound_holds })
}

/// Least `n0` such that `λ_n ≥ m` for every `n0 ≤ n ≤ len`, where the domain has
/// diameter `q^{-m}` (1-based; `None` if even the last term fails).
pub fn expanding_cut(lambdas: &[i64], diam_exponent: i64) -> Option<usize> {
    let mut cut = None;
    for (i, &l) in lambdas.iter().enumerate().rev() {
        if l >= diam_exponent {
            cut = Some(i + 1);
        } else {
            break;
        }
    }
    cut
}

/// Right side of the `#K_N` bound used for power maps: `N·(e·log_p(N+n0)/log_q|a| + 1)`.
pub fn kn_bound(spec: FieldSpec, n0: u64, big_n: u64, norm_exponent: i64) -> f64 {
    let p = spec.p() as f64;
    big_n as f64 * (spec.e() as f64 * ((big_n + n0) as f64).ln() / p.ln() / norm_exponent as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u32) -> FieldSpec {
        FieldSpec::qp(p).unwrap()
    }

    #[test]
    fn domains() {
        let a = LocalFieldElement::from_ratio(1, 5, q(5), 6).unwrap();
        assert_eq!(scaling_domain(&a).unwrap().radius_exponent(), 1);
        let t_inv = LocalFieldElement::pi_power(FieldSpec::fpt(3).unwrap(), -1, 6);
        assert_eq!(scaling_domain(&t_inv).unwrap().radius_exponent(), 0);
        let one = LocalFieldElement::one(q(7), 6);
        assert_eq!(scaling_domain(&one).unwrap().radius_exponent(), 2);
        assert!(scaling_domain(&LocalFieldElement::zero(q(7), 6)).is_err());
    }

    #[test]
    fn exponents() {
        let a = LocalFieldElement::from_ratio(1, 5, q(5), 6).unwrap();
        let dom = scaling_domain(&a).unwrap();
        let one = LocalFieldElement::one(q(5), 10);
        let f5 = ScalingMapSpec::power(one.clone(), 5, dom.clone()).unwrap();
        assert_eq!(f5.scaling_exponent().unwrap(), ScalingExponent::Scaling(3));
        let f3 = ScalingMapSpec::power(one.clone(), 3, dom).unwrap();
        assert_eq!(f3.scaling_exponent().unwrap(), ScalingExponent::Scaling(2));
        let id = ScalingMapSpec::power(one, 1, Disk::unit(q(5))).unwrap();
        assert_eq!(id.scaling_exponent().unwrap(), ScalingExponent::Scaling(0));
    }

    #[test]
    fn holder_in_char_p() {
        let f3 = FieldSpec::fpt(3).unwrap();
        let a = LocalFieldElement::pi_power(f3, -1, 10);
        let map = ScalingMapSpec::power(LocalFieldElement::one(f3, 10), 3, scaling_domain(&a).unwrap()).unwrap();
        assert_eq!(map.scaling_exponent().unwrap(), ScalingExponent::Holder { offset: 0, power: 3 });
        let x = a.add(&LocalFieldElement::pi_power(f3, 2, 10)).unwrap();
        let y = a.add(&LocalFieldElement::pi_power(f3, 4, 10)).unwrap();
        let pred = map.predicted_distance(&x, &y).unwrap();
        assert_eq!(pred, NormExponent::Finite(-6));
        let got = map.apply(&x).unwrap().sub(&map.apply(&y).unwrap()).unwrap().norm_exponent();
        assert_eq!(got, pred);
        assert_eq!(map.predicted_distance(&x, &x).unwrap(), NormExponent::NegInfinite);
    }

    #[test]
    fn apply_examples() {
        let x = LocalFieldElement::from_ratio(86, 5, q(5), 12).unwrap();
        let sq = ScalingMapSpec::power(LocalFieldElement::one(q(5), 20), 2, scaling_domain(&x).unwrap()).unwrap();
        assert_eq!(sq.apply(&x).unwrap(), LocalFieldElement::from_ratio(7396, 25, q(5), 30).unwrap());
        let beta = LocalFieldElement::from_ratio(3, 2, q(2), 30).unwrap();
        let y = LocalFieldElement::from_ratio(5, 4, q(2), 20).unwrap();
        let g = ScalingMapSpec::geometric(beta, 4, Disk::unit(q(2))).unwrap();
        assert_eq!(g.apply(&y).unwrap().val(), Some(-2 - 4));
    }

    #[test]
    fn kn_counts() {
        assert_eq!(count_kn(&[1, 2, 3, 4], 4).unwrap(), 4);
        assert_eq!(count_kn(&[7; 6], 6).unwrap(), 36);
        assert_eq!(count_kn(&[1, 1, 2, 2, 3], 5).unwrap(), 9);
    }

    #[test]
    fn lambda_classes() {
        let c = lambda_class(1, 4, 1, 100, q(5)).unwrap();
        assert_eq!(c.members, vec![4, 5]);
        assert!(c.bound_holds);
        assert_eq!(lambda_class(2, 1, 1, 100, q(5)).unwrap().members, vec![1]);
    }

    #[test]
    fn cut() {
        assert_eq!(expanding_cut(&[0, 1, 0, 2, 3, 4], 1), Some(4));
        assert_eq!(expanding_cut(&[5, 6], 1), Some(1));
        assert_eq!(expanding_cut(&[5, 0], 1), None);
    }
}
