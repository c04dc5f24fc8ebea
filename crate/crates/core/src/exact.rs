//! Exact arithmetic in Q and Q(sqrt d).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(int(p), int(q))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    ratio_f64(r.numer(), r.denom())
}

/// n / d in floating point from the leading bits of each; cheap for long operands.
pub fn ratio_f64(n: &BigInt, d: &BigInt) -> f64 {
    const KEEP: u64 = 64;
    let (nb, db) = (n.bits(), d.bits());
    if nb <= KEEP && db <= KEEP {
        return n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN);
    }
    let sn = nb.saturating_sub(KEEP);
    let sd = db.saturating_sub(KEEP);
    let hn = (n >> sn).to_f64().unwrap_or(f64::NAN);
    let hd = (d >> sd).to_f64().unwrap_or(f64::NAN);
    let e = sn as i64 - sd as i64;
    let mut v = hn / hd;
    let mut e = e.clamp(-4000, 4000) as i32;
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        v *= 2f64.powi(step);
        e -= step;
    }
    v
}

pub fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

/// Square root of a nonnegative perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// Largest f with f^2 | d found by trial division up to `limit`; returns (f, d / f^2).
fn split_square(d: &BigInt, limit: u64) -> (BigInt, BigInt) {
    let mut f = BigInt::one();
    let mut rest = d.clone();
    let mut p: u64 = 2;
    while p <= limit {
        let pp = BigInt::from(p * p);
        if pp > rest {
            break;
        }
        while (&rest % &pp).is_zero() {
            rest /= &pp;
            f *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if let Some(s) = exact_sqrt(&rest) {
        f *= &s;
        rest = BigInt::one();
    }
    (f, rest)
}

/// a + b sqrt(d) with d > 1 free of small square factors. A rational value has b = 0.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadNum {
    pub a: BigRational,
    pub b: BigRational,
    pub d: BigInt,
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + ({})*sqrt({})", self.a, self.b, self.d)
        }
    }
}

impl QuadNum {
    /// Builds a + b sqrt(d); d must be positive.
    pub fn new(a: BigRational, b: BigRational, d: BigInt) -> Option<Self> {
        if !d.is_positive() {
            return None;
        }
        let (f, core) = split_square(&d, 1_000_000);
        let b = b * BigRational::from_integer(f);
        if core.is_one() {
            return Some(QuadNum {
                a: a + b,
                b: BigRational::zero(),
                d: BigInt::one(),
            });
        }
        Some(QuadNum { a, b, d: core })
    }

    pub fn rational(a: BigRational, d: &BigInt) -> Self {
        QuadNum {
            a,
            b: BigRational::zero(),
            d: d.clone(),
        }
    }

    pub fn from_int(n: &BigInt, d: &BigInt) -> Self {
        Self::rational(BigRational::from_integer(n.clone()), d)
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.a.is_integer()
    }

    fn field(&self, other: &QuadNum) -> BigInt {
        if self.is_rational() {
            other.d.clone()
        } else {
            debug_assert!(other.is_rational() || other.d == self.d, "mixed quadratic fields");
            self.d.clone()
        }
    }

    pub fn add(&self, o: &QuadNum) -> QuadNum {
        QuadNum {
            d: self.field(o),
            a: &self.a + &o.a,
            b: &self.b + &o.b,
        }
    }

    pub fn neg(&self) -> QuadNum {
        QuadNum {
            a: -&self.a,
            b: -&self.b,
            d: self.d.clone(),
        }
    }

    pub fn sub(&self, o: &QuadNum) -> QuadNum {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &QuadNum) -> QuadNum {
        let d = self.field(o);
        let dr = BigRational::from_integer(d.clone());
        QuadNum {
            a: &self.a * &o.a + &self.b * &o.b * dr,
            b: &self.a * &o.b + &self.b * &o.a,
            d,
        }
    }

    pub fn scale(&self, k: &BigRational) -> QuadNum {
        QuadNum {
            a: &self.a * k,
            b: &self.b * k,
            d: self.d.clone(),
        }
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with b^2 d
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigRational::from_integer(self.d.clone());
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_value(&self, o: &QuadNum) -> Ordering {
        self.sub(o).signum()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.floor().to_integer();
        }
        // a + b sqrt d = (A + B sqrt d) / C with integers, C > 0
        let c = self.a.denom().lcm(self.b.denom());
        let cr = BigRational::from_integer(c.clone());
        let big_a = (&self.a * &cr).to_integer();
        let big_b = (&self.b * &cr).to_integer();
        let mag = isqrt(&(&big_b * &big_b * &self.d));
        // B sqrt d lies strictly between s and s + 1 (B > 0) or -s - 1 and -s (B < 0)
        let lower = if big_b.is_positive() {
            &big_a + &mag
        } else {
            &big_a - &mag - 1
        };
        let cand = lower.div_floor(&c);
        let next = QuadNum::from_int(&(&cand + 1), &self.d);
        if self.cmp_value(&next) != Ordering::Less {
            cand + 1
        } else {
            cand
        }
    }

    /// Nearest integer (ties toward +infinity).
    pub fn round(&self) -> BigInt {
        self.add(&QuadNum::rational(rat(1, 2), &self.d)).floor()
    }

    /// Float value, evaluated without cancellation when the two parts nearly cancel.
    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return rat_to_f64(&self.a);
        }
        let d = self.d.to_f64().unwrap_or(f64::NAN);
        let af = rat_to_f64(&self.a);
        let bf = rat_to_f64(&self.b);
        let part = bf * d.sqrt();
        if af.signum() == part.signum() || af == 0.0 {
            return af + part;
        }
        // a + b sqrt d = (a^2 - b^2 d) / (a - b sqrt d)
        let num = &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.clone());
        rat_to_f64(&num) / (af - part)
    }
}

/// a + b sqrt d with integer data (A + B sqrt d) / C in i128, for fast exact offsets of k x.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadFast {
    a: i128,
    b: i128,
    c: i128,
    d: i128,
}

pub fn isqrt_i128(n: i128) -> i128 {
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl QuadFast {
    /// None when the data does not fit comfortably in machine integers.
    pub fn new(x: &QuadNum) -> Option<Self> {
        let c = x.a.denom().lcm(x.b.denom());
        let cr = BigRational::from_integer(c.clone());
        let a = (&x.a * &cr).to_integer().to_i64()? as i128;
        let b = (&x.b * &cr).to_integer().to_i64()? as i128;
        let c = c.to_i64()? as i128;
        let d = x.d.to_i64()? as i128;
        let bound = 1i128 << 30;
        (a.abs() < bound && b.abs() < bound && c < bound && d < bound && b != 0).then_some(QuadFast { a, b, c, d })
    }

    /// floor((p + q sqrt d) / r) for r > 0, q != 0.
    fn floor_of(&self, p: i128, q: i128, r: i128) -> Option<i128> {
        let t = q.checked_mul(q)?.checked_mul(self.d)?;
        let s = isqrt_i128(t);
        let lower = if q > 0 { p.checked_add(s)? } else { p.checked_sub(s)?.checked_sub(1)? };
        Some(lower.div_euclid(r))
    }

    /// Nearest integer to k x, the signed offset k x - nearest, and integrality.
    pub fn offset(&self, k: i128) -> Option<(i64, f64, bool)> {
        if k == 0 {
            return Some((0, 0.0, true));
        }
        let ka = k.checked_mul(self.a)?;
        let kb = k.checked_mul(self.b)?;
        // nearest = floor((2 k A + C + 2 k B sqrt d) / (2 C))
        let n = self.floor_of(ka.checked_mul(2)?.checked_add(self.c)?, kb.checked_mul(2)?, 2 * self.c)?;
        let u = ka.checked_sub(n.checked_mul(self.c)?)?;
        let v = kb;
        let sd = (self.d as f64).sqrt();
        let val = if u == 0 || (u > 0) == (v > 0) {
            (u as f64 + v as f64 * sd) / self.c as f64
        } else {
            let num = u.checked_mul(u)?.checked_sub(v.checked_mul(v)?.checked_mul(self.d)?)?;
            num as f64 / (u as f64 - v as f64 * sd) / self.c as f64
        };
        Some((i64::try_from(n).ok()?, val, false))
    }
}

/// Distance to the nearest integer together with the nearest integer, exact for rationals.
pub fn rational_offset(x: &BigRational) -> (BigInt, f64) {
    let n = (x + rat(1, 2)).floor().to_integer();
    let off = x - BigRational::from_integer(n.clone());
    (n, rat_to_f64(&off))
}

/// Same for a + b sqrt d.
pub fn quad_offset(x: &QuadNum) -> (BigInt, f64) {
    let n = x.round();
    let off = x.sub(&QuadNum::from_int(&n, &x.d)).to_f64();
    (n, off)
}

/// Rational approximation n / 10^digits of a decimal string such as "-3.1415".
pub fn parse_decimal(s: &str) -> Option<(BigRational, usize)> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (ip, fp) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
    let mut n: BigInt = digits.parse().ok()?;
    if neg {
        n = -n;
    }
    let den = num_traits::pow(int(10), fp.len());
    Some((BigRational::new(n, den), fp.len()))
}

/// Sum of 10^{-k!} for k = 1..=terms.
pub fn liouville_truncated(terms: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut fact: usize = 1;
    for k in 1..=terms as usize {
        fact *= k;
        sum += BigRational::new(BigInt::one(), num_traits::pow(int(10), fact));
    }
    sum
}
