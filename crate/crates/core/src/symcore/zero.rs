use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::ratfunc::{to_rational, Atom};
use crate::error::{Error, Result};
use crate::scalar::rational_from_f64;

/// Number of admissible sample points per zero test.
pub const ZERO_TRIALS: usize = 20;
/// Relative tolerance of the floating zero test.
pub const ZERO_TOL: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 400;

/// Open box of variable ranges used to draw sample points. Variables without
/// an explicit range use `default`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub ranges: BTreeMap<String, (f64, f64)>,
    pub default: (f64, f64),
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox { ranges: BTreeMap::new(), default: (0.25, 1.25) }
    }
}

impl DomainBox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, lo: f64, hi: f64) -> Self {
        self.ranges.insert(var.to_string(), (lo, hi));
        self
    }

    pub fn range(&self, var: &str) -> (f64, f64) {
        self.ranges.get(var).copied().unwrap_or(self.default)
    }

    /// Nonempty when every range has `lo < hi`.
    pub fn is_valid(&self) -> bool {
        self.ranges.values().chain(std::iter::once(&self.default)).all(|(a, b)| a < b)
    }

    /// Seeded rational sample strictly inside the box for the given names.
    pub fn sample_rational(&self, vars: &[String], rng: &mut ChaCha8Rng) -> BTreeMap<String, BigRational> {
        let scale = BigInt::from(1u32 << 16);
        vars.iter()
            .map(|v| {
                let (lo, hi) = self.range(v);
                let k: u32 = rng.gen_range(1..(1u32 << 16));
                let t = BigRational::new(BigInt::from(k), scale.clone());
                let lo_q = rational_from_f64(lo);
                let hi_q = rational_from_f64(hi);
                (v.clone(), &lo_q + (hi_q - &lo_q) * t)
            })
            .collect()
    }

    /// Seeded floating sample strictly inside the box.
    pub fn sample(&self, vars: &[String], rng: &mut ChaCha8Rng) -> HashMap<String, f64> {
        vars.iter()
            .map(|v| {
                let (lo, hi) = self.range(v);
                let t: f64 = rng.gen_range(0.0..1.0);
                (v.clone(), lo + (hi - lo) * (0.001 + 0.998 * t))
            })
            .collect()
    }
}

/// Outcome of a zero test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ZeroVerdict {
    ProvedZero,
    ProbablyZero { trials: usize, tolerance: f64 },
    NonZero { point: BTreeMap<String, f64>, value: f64 },
}

impl ZeroVerdict {
    /// True for `ProvedZero` and `ProbablyZero`.
    pub fn is_zero(&self) -> bool {
        !self.is_nonzero()
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, ZeroVerdict::NonZero { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::ProvedZero => "ProvedZero",
            ZeroVerdict::ProbablyZero { .. } => "ProbablyZero",
            ZeroVerdict::NonZero { .. } => "NonZero",
        }
    }
}

/// The seeded generator behind every randomized check.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Decides whether `e` vanishes identically on `domain`.
///
/// `ProvedZero` exactly when the normal form is the literal 0. Otherwise the
/// numerator of the normal form is evaluated at seeded points: exactly when
/// every atom is a variable, in floating point relative to the sum of term
/// magnitudes otherwise.
pub fn is_zero(e: &Expr, domain: &DomainBox, seed: u64) -> Result<ZeroVerdict> {
    let r = to_rational(e).map_err(Error::DivisionByZero)?;
    if r.value.is_zero() {
        return Ok(ZeroVerdict::ProvedZero);
    }
    let vars = e.variables();
    let mut rng = rng_for(seed);
    let exact = r.table.only_variables();
    let mut ok = 0;
    for _ in 0..MAX_ATTEMPTS {
        if exact {
            let pt = domain.sample_rational(&vars, &mut rng);
            let vals: Vec<BigRational> = r
                .table
                .atoms
                .iter()
                .map(|a| match a {
                    Atom::Var(v) => pt[v].clone(),
                    Atom::Func(..) => unreachable!(),
                })
                .collect();
            let den = r.value.den.eval(&vals);
            if den.is_zero() {
                continue;
            }
            let num = r.value.num.eval(&vals);
            if !num.is_zero() {
                let point = pt.iter().map(|(k, v)| (k.clone(), v.to_f64().unwrap_or(f64::NAN))).collect();
                let value = (num / den).to_f64().unwrap_or(f64::NAN);
                return Ok(ZeroVerdict::NonZero { point, value });
            }
        } else {
            let pt = domain.sample(&vars, &mut rng);
            let Ok(vals) = r.table.eval_atoms(&pt) else { continue };
            let den = r.value.den.eval(&vals);
            if den == 0.0 || !den.is_finite() {
                continue;
            }
            let num = r.value.num.eval(&vals);
            let scale = r.value.num.eval_magnitude(&vals).max(f64::MIN_POSITIVE);
            if !num.is_finite() {
                continue;
            }
            if num.abs() > ZERO_TOL * scale {
                let point = pt.into_iter().collect();
                return Ok(ZeroVerdict::NonZero { point, value: num / den });
            }
        }
        ok += 1;
        if ok == ZERO_TRIALS {
            return Ok(ZeroVerdict::ProbablyZero { trials: ZERO_TRIALS, tolerance: ZERO_TOL });
        }
    }
    if ok == 0 {
        return Err(Error::NoAdmissiblePoint { attempts: MAX_ATTEMPTS });
    }
    Ok(ZeroVerdict::ProbablyZero { trials: ok, tolerance: ZERO_TOL })
}

/// Derives an independent seed for a labelled sub-test.
pub fn sub_seed(seed: u64, label: u64) -> u64 {
    let mut rng = rng_for(seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.gen()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn verdicts() {
        let b = DomainBox::default();
        assert_eq!(is_zero(&Expr::zero(), &b, 42).unwrap(), ZeroVerdict::ProvedZero);
        let v = is_zero(&parse("x*y - y*x + 1/1000*x").unwrap(), &b, 42).unwrap();
        assert!(v.is_nonzero());
        let v = is_zero(&parse("sqrt(x^2) - x").unwrap(), &b, 42).unwrap();
        assert!(matches!(v, ZeroVerdict::ProbablyZero { .. }));
        let v = is_zero(&parse("sqrt(x)*sqrt(y) - sqrt(x*y)").unwrap(), &b, 42).unwrap();
        assert!(matches!(v, ZeroVerdict::ProbablyZero { .. }));
    }

    #[test]
    fn deterministic_witness() {
        let b = DomainBox::default().with("x", -1.0, 1.0);
        let e = parse("x^3 + sin(x)").unwrap();
        assert_eq!(is_zero(&e, &b, 7).unwrap(), is_zero(&e, &b, 7).unwrap());
    }

    #[test]
    fn no_admissible_point() {
        let b = DomainBox::default().with("x", -2.0, -1.0);
        assert!(matches!(is_zero(&parse("sqrt(x)").unwrap(), &b, 1), Err(Error::NoAdmissiblePoint { .. })));
    }
}
