//! Continued fractions of rationals, quadratic irrationals and decimal strings.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, isqrt, liouville_truncated, parse_decimal, rat_to_f64, QuadNum};

/// A real number with an exact (or interval-certified) description.
#[derive(Debug, Clone, PartialEq)]
pub enum RealNumber {
    Rational(BigRational),
    Quadratic(QuadNum),
    /// Decimal string value; the true number lies within 10^{-digits} of `value`.
    Decimal { value: BigRational, digits: usize },
}

impl RealNumber {
    pub fn rational(p: i64, q: i64) -> Self {
        RealNumber::Rational(BigRational::new(int(p), int(q)))
    }

    /// a + b sqrt(d) with rational a, b.
    pub fn quadratic(a: BigRational, b: BigRational, d: BigInt) -> Result<Self> {
        let q = QuadNum::new(a, b, d).ok_or_else(|| Error::InvalidInput("sqrt of a nonpositive integer".into()))?;
        Ok(if q.is_rational() {
            RealNumber::Rational(q.a)
        } else {
            RealNumber::Quadratic(q)
        })
    }

    pub fn sqrt2() -> Self {
        Self::quadratic(BigRational::zero(), BigRational::one(), int(2)).expect("valid")
    }

    pub fn golden() -> Self {
        let h = BigRational::new(int(1), int(2));
        Self::quadratic(h.clone(), h, int(5)).expect("valid")
    }

    pub fn decimal(s: &str) -> Result<Self> {
        let (value, digits) =
            parse_decimal(s).ok_or_else(|| Error::InvalidInput(format!("not a decimal number: {s:?}")))?;
        Ok(RealNumber::Decimal { value, digits })
    }

    pub fn liouville(terms: u32) -> Self {
        RealNumber::Rational(liouville_truncated(terms))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealNumber::Rational(r) => rat_to_f64(r),
            RealNumber::Quadratic(q) => q.to_f64(),
            RealNumber::Decimal { value, .. } => rat_to_f64(value),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, RealNumber::Decimal { .. })
    }

    /// Exact sign of x - p/q when decidable.
    pub fn compare_with(&self, p: &BigInt, q: &BigInt) -> Option<Ordering> {
        let r = BigRational::new(p.clone(), q.clone());
        match self {
            RealNumber::Rational(x) => Some(x.cmp(&r)),
            RealNumber::Quadratic(x) => Some(x.cmp_value(&QuadNum::rational(r, &x.d))),
            RealNumber::Decimal { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            RealNumber::Rational(r) if r.denom().bits() > 64 => {
                format!("rational with {}-bit denominator", r.denom().bits())
            }
            RealNumber::Rational(r) => r.to_string(),
            RealNumber::Quadratic(q) => q.to_string(),
            RealNumber::Decimal { digits, .. } => format!("decimal to {digits} digits"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CfExpansion {
    pub value: RealNumber,
    pub partial_quotients: Vec<BigInt>,
    pub convergents: Vec<(BigInt, BigInt)>,
    /// The expansion ended (rational input).
    pub terminated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Above,
    Below,
}

fn convergents_of(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p2, mut p1) = (BigInt::zero(), BigInt::one());
    let (mut q2, mut q1) = (BigInt::one(), BigInt::zero());
    quotients
        .iter()
        .map(|a| {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, p.clone());
            q2 = std::mem::replace(&mut q1, q.clone());
            (p, q)
        })
        .collect()
}

/// Euclid on num/den; returns quotients and whether the expansion finished.
fn rational_quotients(x: &BigRational, k: usize) -> (Vec<BigInt>, bool) {
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut out = Vec::new();
    while out.len() < k {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        if r.is_zero() {
            return (out, true);
        }
        num = std::mem::replace(&mut den, r);
    }
    (out, false)
}

/// Periodic expansion of (P + sqrt D) / Q, exact.
fn quadratic_quotients(x: &QuadNum, k: usize) -> Vec<BigInt> {
    // x = (A + B sqrt d) / C with integers, C > 0
    let c = x.a.denom().lcm(x.b.denom());
    let cr = BigRational::from_integer(c.clone());
    let mut big_a = (&x.a * &cr).to_integer();
    let mut big_b = (&x.b * &cr).to_integer();
    let mut big_c = c;
    if big_b.is_negative() {
        big_a = -big_a;
        big_b = -big_b;
        big_c = -big_c;
    }
    let abs_c = big_c.abs();
    let dd = &big_b * &big_b * &x.d * &abs_c * &abs_c;
    let mut p = &big_a * &abs_c;
    let mut q = &big_c * &abs_c;
    let s = isqrt(&dd);
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        // sqrt D lies strictly inside (s, s + 1)
        let a = if q.is_positive() {
            (&p + &s).div_floor(&q)
        } else {
            (&p + &s + BigInt::one()).div_floor(&q)
        };
        p = &a * &q - &p;
        q = (&dd - &p * &p) / &q;
        out.push(a);
    }
    out
}

/// Lockstep Euclid on both ends of the decimal's uncertainty interval.
fn decimal_quotients(value: &BigRational, digits: usize, k: usize) -> Result<Vec<BigInt>> {
    let ulp = BigRational::new(BigInt::one(), num_traits::pow(int(10), digits));
    let (lo, _) = rational_quotients(&(value - &ulp), k + 1);
    let (hi, _) = rational_quotients(&(value + &ulp), k + 1);
    let mut out = Vec::new();
    // a quotient is certified only if both ends agree on it and on the next one existing
    for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
        if a != b || i + 1 >= lo.len().min(hi.len()) {
            break;
        }
        out.push(a.clone());
        if out.len() == k {
            break;
        }
    }
    if out.len() < k {
        return Err(Error::PrecisionExhausted {
            certified: out.len(),
            requested: k,
        });
    }
    Ok(out)
}

/// First `k` partial quotients and convergents of x.
pub fn continued_fraction(x: &RealNumber, k: usize) -> Result<CfExpansion> {
    if k == 0 {
        return Err(Error::ParameterOutOfRange("continued fraction needs K >= 1".into()));
    }
    let (quotients, terminated) = match x {
        RealNumber::Rational(r) => rational_quotients(r, k),
        RealNumber::Quadratic(q) if q.is_rational() => rational_quotients(&q.a, k),
        RealNumber::Quadratic(q) => (quadratic_quotients(q, k), false),
        RealNumber::Decimal { value, digits } => (decimal_quotients(value, *digits, k)?, false),
    };
    Ok(CfExpansion {
        value: x.clone(),
        convergents: convergents_of(&quotients),
        partial_quotients: quotients,
        terminated,
    })
}

/// Convergents strictly on one side of alpha.
pub fn killer_convergents(cf: &CfExpansion, side: Side, count: usize) -> Result<Vec<(BigInt, BigInt)>> {
    if cf.terminated {
        return Err(Error::RationalAlpha);
    }
    let want = match side {
        Side::Above => Ordering::Less,
        Side::Below => Ordering::Greater,
    };
    let picked: Vec<(BigInt, BigInt)> = cf
        .convergents
        .iter()
        .enumerate()
        .filter(|(k, (p, q))| match cf.value.compare_with(p, q) {
            Some(ord) => ord == want,
            // convergents alternate: even index below, odd index above
            None => (k % 2 == 1) == (side == Side::Above),
        })
        .map(|(_, pq)| pq.clone())
        .take(count)
        .collect();
    if picked.len() < count {
        return Err(Error::ExhaustedExpansion {
            available: picked.len(),
            requested: count,
        });
    }
    Ok(picked)
}

/// Expands far enough to return `count` convergents on `side`.
pub fn side_convergents(x: &RealNumber, side: Side, count: usize) -> Result<Vec<(BigInt, BigInt)>> {
    let cf = continued_fraction(x, 2 * count + 2)?;
    killer_convergents(&cf, side, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(i64, i64)]) -> Vec<(BigInt, BigInt)> {
        v.iter().map(|&(p, q)| (int(p), int(q))).collect()
    }

    #[test]
    fn sqrt2_expansion() {
        let cf = continued_fraction(&RealNumber::sqrt2(), 5).unwrap();
        assert_eq!(cf.partial_quotients, vec![int(1), int(2), int(2), int(2), int(2)]);
        assert_eq!(cf.convergents, pairs(&[(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]));
    }

    #[test]
    fn golden_expansion_is_fibonacci() {
        let cf = continued_fraction(&RealNumber::golden(), 12).unwrap();
        assert!(cf.partial_quotients.iter().all(|a| *a == int(1)));
        let mut fib = vec![1i64, 1];
        for i in 2..14 {
            fib.push(fib[i - 1] + fib[i - 2]);
        }
        for (k, (p, q)) in cf.convergents.iter().enumerate() {
            assert_eq!((p.clone(), q.clone()), (int(fib[k + 1]), int(fib[k])));
        }
    }

    #[test]
    fn rational_terminates() {
        let cf = continued_fraction(&RealNumber::rational(7, 3), 10).unwrap();
        assert_eq!(cf.partial_quotients, vec![int(2), int(3)]);
        assert!(cf.terminated);
        let neg = continued_fraction(&RealNumber::rational(-7, 3), 10).unwrap();
        assert_eq!(neg.partial_quotients, vec![int(-3), int(1), int(2)]);
        assert_eq!(neg.convergents.last().unwrap(), &(int(-7), int(3)));
    }

    #[test]
    fn killer_sides() {
        let cf = continued_fraction(&RealNumber::sqrt2(), 12).unwrap();
        assert_eq!(killer_convergents(&cf, Side::Above, 3).unwrap(), pairs(&[(3, 2), (17, 12), (99, 70)]));
        assert_eq!(killer_convergents(&cf, Side::Below, 3).unwrap(), pairs(&[(1, 1), (7, 5), (41, 29)]));
        let g = continued_fraction(&RealNumber::golden(), 6).unwrap();
        assert_eq!(killer_convergents(&g, Side::Above, 2).unwrap(), pairs(&[(2, 1), (5, 3)]));
        assert_eq!(
            killer_convergents(&g, Side::Above, 5),
            Err(Error::ExhaustedExpansion {
                available: 3,
                requested: 5
            })
        );
        let r = continued_fraction(&RealNumber::rational(7, 3), 5).unwrap();
        assert_eq!(killer_convergents(&r, Side::Above, 1), Err(Error::RationalAlpha));
    }

    #[test]
    fn decimal_matches_exact_until_precision_runs_out() {
        let d = RealNumber::decimal("1.4142135623730950488016887242096980785696718753769").unwrap();
        let cf = continued_fraction(&d, 20).unwrap();
        let exact = continued_fraction(&RealNumber::sqrt2(), 20).unwrap();
        assert_eq!(cf.convergents, exact.convergents);
        match continued_fraction(&d, 200) {
            Err(Error::PrecisionExhausted { certified, requested }) => {
                assert!(certified >= 20 && certified < 200);
                assert_eq!(requested, 200);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn negative_quadratic() {
        let x = RealNumber::quadratic(BigRational::zero(), -BigRational::one(), int(2)).unwrap();
        let cf = continued_fraction(&x, 4).unwrap();
        assert_eq!(cf.partial_quotients, vec![int(-2), int(1), int(1), int(2)]);
        let below = killer_convergents(&cf, Side::Below, 1).unwrap();
        assert_eq!(below, pairs(&[(-2, 1)]));
    }
}
