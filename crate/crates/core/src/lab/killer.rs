//! Perturbations built from convergents p/q of alpha that force integer eigenvalues
//! of D_t + alpha D_x + R at j = q.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cf::{killer_convergents, CfExpansion, RealNumber, Side};
use crate::error::{Error, Result};
use crate::exact::{exact_sqrt, QuadNum};
use crate::linalg::{C64, ZERO};
use crate::symbol::SymbolFamily;
use crate::track::{ell_of, quad_point, EigenTrack, ExactInfo, TrackPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KillerMode {
    /// R_j = [[0, gamma_j], [gamma_j, 0]].
    NonCommutative,
    /// R_j = r_j I.
    Commutative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialMode {
    pub q: u64,
    pub p: BigInt,
    /// gamma_q^2 = p^2 - alpha^2 q^2 (non-commutative) or r_q = alpha q - p (commutative).
    pub exact_value: QuadNum,
    /// gamma_q or r_q.
    pub value: f64,
    /// The integer eigenvalue created at j = q.
    pub sigma: BigInt,
}

#[derive(Debug, Clone)]
pub struct KillerPerturbation {
    pub alpha: RealNumber,
    pub mode: KillerMode,
    pub side: Side,
    pub convergents: Vec<(BigInt, BigInt)>,
    pub special: BTreeMap<u64, SpecialMode>,
}

/// alpha as an element of Q(sqrt d); decimals are taken at their rational value.
fn alpha_field(alpha: &RealNumber) -> QuadNum {
    match alpha {
        RealNumber::Rational(r) => QuadNum::rational(r.clone(), &BigInt::one()),
        RealNumber::Quadratic(q) => q.clone(),
        RealNumber::Decimal { value, .. } => QuadNum::rational(value.clone(), &BigInt::one()),
    }
}

fn int_q(n: &BigInt, d: &BigInt) -> QuadNum {
    QuadNum::from_int(n, d)
}

/// sqrt j as an element of Q(sqrt d), when it is one.
fn sqrt_in_field(j: u64, d: &BigInt) -> Option<QuadNum> {
    let jb = BigInt::from(j);
    if let Some(s) = exact_sqrt(&jb) {
        return Some(int_q(&s, d));
    }
    if d.is_one() || !(&jb % d).is_zero() {
        return None;
    }
    let t = exact_sqrt(&(&jb / d))?;
    Some(QuadNum {
        a: BigRational::zero(),
        b: BigRational::from_integer(t),
        d: d.clone(),
    })
}

pub fn build_killer(cf: &CfExpansion, mode: KillerMode, count: usize) -> Result<KillerPerturbation> {
    if cf.terminated {
        return Err(Error::RationalAlpha);
    }
    let a = alpha_field(&cf.value);
    let side = if a.signum() == Ordering::Less { Side::Below } else { Side::Above };
    let convergents = killer_convergents(cf, side, count)?;
    let mut special = BTreeMap::new();
    for (p, q) in &convergents {
        let qj = q
            .to_u64()
            .ok_or_else(|| Error::ParameterOutOfRange(format!("denominator {q} exceeds the mode index range")))?;
        let qq = int_q(q, &a.d);
        let pq = int_q(p, &a.d);
        let aq = a.mul(&qq);
        let (exact_value, sigma) = match mode {
            KillerMode::NonCommutative => (pq.mul(&pq).sub(&aq.mul(&aq)), p.abs()),
            KillerMode::Commutative => (aq.sub(&pq), -p.clone()),
        };
        let value = match mode {
            KillerMode::NonCommutative => exact_value.to_f64().sqrt(),
            KillerMode::Commutative => exact_value.to_f64(),
        };
        special.insert(
            qj,
            SpecialMode {
                q: qj,
                p: p.clone(),
                exact_value,
                value,
                sigma,
            },
        );
    }
    Ok(KillerPerturbation {
        alpha: cf.value.clone(),
        mode,
        side,
        convergents,
        special,
    })
}

impl KillerPerturbation {
    pub fn special_js(&self) -> Vec<u64> {
        self.special.keys().copied().collect()
    }

    /// Track indices of the constructed integer eigenvalues.
    pub fn special_ells(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (&q, s) in &self.special {
            match self.mode {
                // both labels of level q are -/+ p
                KillerMode::NonCommutative => out.extend([ell_of(q, 1), ell_of(q, 2)]),
                KillerMode::Commutative => {
                    out.push(ell_of(q, 1));
                    let _ = s;
                }
            }
        }
        out
    }

    fn lookup(&self) -> Arc<BTreeMap<u64, f64>> {
        Arc::new(self.special.iter().map(|(q, s)| (*q, s.value)).collect())
    }

    pub fn family(&self) -> SymbolFamily {
        let table = self.lookup();
        match self.mode {
            KillerMode::NonCommutative => SymbolFamily::from_rule(
                format!("non-commutative killer over {}", self.alpha.describe()),
                0.5,
                ZERO,
                move |j| {
                    let g = C64::new(table.get(&j).copied().unwrap_or_else(|| (j as f64).sqrt()), 0.0);
                    [ZERO, g, g, ZERO]
                },
            ),
            KillerMode::Commutative => SymbolFamily::from_rule(
                format!("commutative killer over {}", self.alpha.describe()),
                0.5,
                ZERO,
                move |j| {
                    let r = C64::new(table.get(&j).copied().unwrap_or_else(|| (j as f64).sqrt()), 0.0);
                    [r, ZERO, ZERO, r]
                },
            ),
        }
    }

    /// Eigenvalues of alpha D_j + R_j (eps = 1) with exact integrality data.
    pub fn track(&self, max_probed: usize) -> EigenTrack {
        let a = alpha_field(&self.alpha);
        let af = a.to_f64();
        let sign = if af < 0.0 { -1.0 } else { 1.0 };
        let special = Arc::new(self.special.clone());
        let mode = self.mode;
        let label = format!("{mode:?} killer track over {}", self.alpha.describe());
        let a2 = a.mul(&a);
        EigenTrack::new(label, max_probed, move |j, m| {
            let jq = int_q(&BigInt::from(j), &a.d);
            match mode {
                KillerMode::NonCommutative => {
                    // sigma = -/+ sign(alpha) sqrt(alpha^2 j^2 + gamma_j^2)
                    let s = if m == 1 { -sign } else { sign };
                    if let Some(sp) = special.get(&j) {
                        let v = sp.sigma.to_i64().unwrap_or(i64::MAX) * s as i64;
                        return TrackPoint {
                            sigma: C64::new(v as f64, 0.0),
                            exact: Some(ExactInfo {
                                is_integer: true,
                                nearest: v,
                                offset: 0.0,
                            }),
                        };
                    }
                    let sq = a2.mul(&jq).mul(&jq).add(&jq);
                    let root = if sq.is_integer() { exact_sqrt(&sq.a.to_integer()) } else { None };
                    match root {
                        Some(r) => {
                            let v = r.to_i64().unwrap_or(i64::MAX) * s as i64;
                            TrackPoint {
                                sigma: C64::new(v as f64, 0.0),
                                exact: Some(ExactInfo {
                                    is_integer: true,
                                    nearest: v,
                                    offset: 0.0,
                                }),
                            }
                        }
                        None => {
                            let v = s * sq.to_f64().sqrt();
                            let n = v.round();
                            TrackPoint {
                                sigma: C64::new(v, 0.0),
                                exact: Some(ExactInfo {
                                    is_integer: false,
                                    nearest: n as i64,
                                    offset: v - n,
                                }),
                            }
                        }
                    }
                }
                KillerMode::Commutative => {
                    let base = if m == 1 { a.neg() } else { a.clone() }.mul(&jq);
                    let r = match special.get(&j) {
                        Some(sp) => Some(sp.exact_value.clone()),
                        None => sqrt_in_field(j, &a.d),
                    };
                    match r {
                        Some(r) => quad_point(&base.add(&r), ZERO),
                        None => {
                            // sqrt j lies outside Q(sqrt d), so sigma is irrational
                            let v = base.to_f64() + (j as f64).sqrt();
                            let n = v.round();
                            TrackPoint {
                                sigma: C64::new(v, 0.0),
                                exact: Some(ExactInfo {
                                    is_integer: false,
                                    nearest: n as i64,
                                    offset: v - n,
                                }),
                            }
                        }
                    }
                }
            }
        })
        .with_level_zero(ZERO)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::continued_fraction;
    use crate::exact::int;

    #[test]
    fn sqrt2_noncommutative_specials() {
        let cf = continued_fraction(&RealNumber::sqrt2(), 12).unwrap();
        let k = build_killer(&cf, KillerMode::NonCommutative, 3).unwrap();
        let got: Vec<(u64, QuadNum, BigInt)> =
            k.special.values().map(|s| (s.q, s.exact_value.clone(), s.sigma.clone())).collect();
        let one = QuadNum::from_int(&int(1), &int(2));
        assert_eq!(got, vec![(2, one.clone(), int(3)), (12, one.clone(), int(17)), (70, one, int(99))]);
        let t = k.track(200);
        assert!(t.at(12, 2).is_integer_hit(0.0));
        assert_eq!(t.at(12, 2).sigma.re, 17.0);
        assert_eq!(t.at(12, 1).sigma.re, -17.0);
        assert!(!t.at(13, 2).is_integer_hit(0.0));
    }

    #[test]
    fn sqrt2_commutative_specials() {
        let cf = continued_fraction(&RealNumber::sqrt2(), 12).unwrap();
        let k = build_killer(&cf, KillerMode::Commutative, 2).unwrap();
        let r2 = k.special[&2].value;
        let r12 = k.special[&12].value;
        assert!((r2 - (2.0 * 2f64.sqrt() - 3.0)).abs() < 1e-15);
        assert!((r12 - (-1.0 / (12.0 * 2f64.sqrt() + 17.0))).abs() < 1e-15);
        let t = k.track(100);
        let p = t.at(12, 1);
        assert!(p.is_integer_hit(0.0));
        assert_eq!(p.exact.unwrap().nearest, -17);
        assert!(!t.at(12, 2).is_integer_hit(0.0));
    }

    #[test]
    fn golden_noncommutative() {
        let cf = continued_fraction(&RealNumber::golden(), 8).unwrap();
        let k = build_killer(&cf, KillerMode::NonCommutative, 2).unwrap();
        assert_eq!(k.special_js(), vec![1, 3]);
        let s1 = &k.special[&1];
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s1.exact_value.to_f64() - (4.0 - phi * phi)).abs() < 1e-15);
        assert_eq!(s1.sigma, int(2));
        assert!(k.track(10).at(1, 2).is_integer_hit(0.0));
    }

    #[test]
    fn negative_alpha_uses_lower_side() {
        let x = RealNumber::quadratic(BigRational::zero(), -BigRational::one(), int(2)).unwrap();
        let cf = continued_fraction(&x, 12).unwrap();
        let k = build_killer(&cf, KillerMode::NonCommutative, 3).unwrap();
        assert_eq!(k.side, Side::Below);
        for s in k.special.values() {
            assert_eq!(s.exact_value.signum(), Ordering::Greater);
        }
        let t = k.track(100);
        for q in k.special_js() {
            assert!(t.at(q, 1).is_integer_hit(0.0) && t.at(q, 2).is_integer_hit(0.0));
        }
        let kc = build_killer(&cf, KillerMode::Commutative, 3).unwrap();
        let tc = kc.track(100);
        for q in kc.special_js() {
            assert!(tc.at(q, 1).is_integer_hit(0.0));
        }
    }

    #[test]
    fn rational_alpha_rejected() {
        let cf = continued_fraction(&RealNumber::rational(5, 3), 5).unwrap();
        assert!(matches!(build_killer(&cf, KillerMode::Commutative, 1), Err(Error::RationalAlpha)));
    }
}
