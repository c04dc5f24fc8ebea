//! Flattened eigenvalue sequences sigma_ell, ell = 2(j - 1) + m.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::cf::RealNumber;
use crate::diag::{eigen2_labeled, q_matrix};
use crate::exact::{quad_offset, ratio_f64, QuadFast, QuadNum};
use crate::linalg::{dist_to_int, C64};
use crate::symbol::SymbolFamily;

/// Exact position of Re sigma relative to the integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactInfo {
    pub is_integer: bool,
    pub nearest: i64,
    /// Re sigma - nearest, correctly signed.
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub sigma: C64,
    pub exact: Option<ExactInfo>,
}

impl TrackPoint {
    pub fn float(sigma: C64) -> Self {
        TrackPoint { sigma, exact: None }
    }

    /// dist(Re sigma, Z).
    pub fn real_distance(&self) -> f64 {
        match self.exact {
            Some(e) => e.offset.abs(),
            None => dist_to_int(self.sigma.re),
        }
    }

    pub fn imag_abs(&self) -> f64 {
        self.sigma.im.abs()
    }

    /// min over integers tau of |tau + sigma|.
    pub fn distance(&self) -> f64 {
        if let Some(e) = self.exact {
            if e.is_integer && self.sigma.im == 0.0 {
                return 0.0;
            }
        }
        self.real_distance().hypot(self.imag_abs())
    }

    /// Nearest integer to Re sigma.
    pub fn nearest(&self) -> i64 {
        match self.exact {
            Some(e) => e.nearest,
            None => self.sigma.re.round() as i64,
        }
    }

    /// sigma - tau, using the exact offset when tau is the nearest integer.
    pub fn minus_integer(&self, tau: i64) -> C64 {
        match self.exact {
            Some(e) if e.nearest == tau => C64::new(e.offset, self.sigma.im),
            _ => self.sigma - tau as f64,
        }
    }

    /// Real integer, exactly when exact data is present, else |sigma - round| <= tol.
    pub fn is_integer_hit(&self, tol: f64) -> bool {
        match self.exact {
            Some(e) if tol == 0.0 => e.is_integer && self.sigma.im == 0.0,
            Some(e) => (e.is_integer && self.sigma.im == 0.0) || self.distance() <= tol,
            None => self.distance() <= tol,
        }
    }
}

pub fn ell_of(j: u64, m: u8) -> usize {
    (2 * (j - 1) + m as u64) as usize
}

/// Inverse of `ell_of` for ell >= 1.
pub fn index_of(ell: usize) -> (u64, u8) {
    let j = (ell - 1) / 2 + 1;
    let m = (ell - 1) % 2 + 1;
    (j as u64, m as u8)
}

type PointRule = dyn Fn(u64, u8) -> TrackPoint + Send + Sync;

#[derive(Clone)]
pub struct EigenTrack {
    pub label: String,
    /// Eigenvalue of the scalar level 0, if the operator has one.
    pub level_zero: Option<C64>,
    pub max_probed: usize,
    rule: Arc<PointRule>,
}

impl fmt::Debug for EigenTrack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenTrack")
            .field("label", &self.label)
            .field("level_zero", &self.level_zero)
            .field("max_probed", &self.max_probed)
            .finish()
    }
}

impl EigenTrack {
    pub fn new(
        label: impl Into<String>,
        max_probed: usize,
        rule: impl Fn(u64, u8) -> TrackPoint + Send + Sync + 'static,
    ) -> Self {
        EigenTrack {
            label: label.into(),
            level_zero: None,
            max_probed,
            rule: Arc::new(rule),
        }
    }

    /// Track given directly in terms of ell.
    pub fn from_ell_fn(
        label: impl Into<String>,
        max_probed: usize,
        f: impl Fn(usize) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, max_probed, move |j, m| TrackPoint::float(f(ell_of(j, m))))
    }

    pub fn with_level_zero(mut self, sigma0: C64) -> Self {
        self.level_zero = Some(sigma0);
        self
    }

    pub fn with_max_probed(mut self, max_probed: usize) -> Self {
        self.max_probed = max_probed;
        self
    }

    pub fn at(&self, j: u64, m: u8) -> TrackPoint {
        (self.rule)(j, m)
    }

    pub fn point(&self, ell: usize) -> TrackPoint {
        let (j, m) = index_of(ell);
        self.at(j, m)
    }

    pub fn sigma(&self, ell: usize) -> C64 {
        self.point(ell).sigma
    }

    /// Eigenvalues of omega D_j + eps R_j, labeled against the linearization
    /// (-omega j + eps a_j, omega j + eps d_j).
    pub fn operator(omega: C64, family: &SymbolFamily, eps: C64, max_probed: usize, tol: f64) -> Self {
        let fam = family.clone();
        let label = format!("operator omega = {omega}, eps = {eps}, R = {}", family.description);
        EigenTrack::new(label, max_probed, move |j, m| {
            let r = fam.matrix(j) * eps;
            let anchors = [-omega * j as f64 + r[(0, 0)], omega * j as f64 + r[(1, 1)]];
            let e = eigen2_labeled(&q_matrix(omega, &r, j), anchors, tol);
            TrackPoint::float(e.eigenvalues[m as usize - 1])
        })
        .with_level_zero(family.scalar_at_zero * eps)
    }

    /// sigma_j^{1,2} = -/+ alpha j + shift for the constant real field alpha.
    ///
    /// With exact alpha and zero shift the distances to the integers are exact.
    pub fn vector_field(alpha: &RealNumber, shift: C64, max_probed: usize) -> Self {
        let label = format!("vector field alpha = {}, shift = {shift}", alpha.describe());
        let a = alpha.to_f64();
        let float_rule = move |j: u64, m: u8| {
            let s = if m == 1 { -a } else { a } * j as f64;
            TrackPoint::float(C64::new(s, 0.0) + shift)
        };
        let track = if shift != C64::zero() {
            EigenTrack::new(label, max_probed, float_rule)
        } else {
            match alpha {
                RealNumber::Rational(r) => {
                    let r = r.clone();
                    EigenTrack::new(label, max_probed, move |j, m| rational_multiple_point(&r, j, m))
                }
                RealNumber::Quadratic(q) => {
                    let q = q.clone();
                    let fast = QuadFast::new(&q);
                    EigenTrack::new(label, max_probed, move |j, m| {
                        let k = if m == 1 { -(j as i64) } else { j as i64 };
                        if let Some((nearest, offset, is_integer)) = fast.and_then(|f| f.offset(k as i128)) {
                            return TrackPoint {
                                sigma: C64::new(nearest as f64 + offset, 0.0),
                                exact: Some(ExactInfo {
                                    is_integer,
                                    nearest,
                                    offset,
                                }),
                            };
                        }
                        quad_point(&q.scale(&BigRational::from_integer(BigInt::from(k))), C64::zero())
                    })
                }
                RealNumber::Decimal { .. } => EigenTrack::new(label, max_probed, float_rule),
            }
        };
        track.with_level_zero(shift)
    }
}

/// Point at -/+ r j using integer arithmetic only (no gcd normalization).
fn rational_multiple_point(r: &BigRational, j: u64, m: u8) -> TrackPoint {
    let num = r.numer() * BigInt::from(j);
    let num = if m == 1 { -num } else { num };
    let den = r.denom();
    let (q, rem) = num.div_mod_floor(den);
    let twice: BigInt = &rem * 2u32;
    let (nearest, off_num) = if &twice >= den { (q + 1u32, rem - den) } else { (q, rem) };
    let offset = ratio_f64(&off_num, den);
    let nearest = nearest.to_i64().unwrap_or(i64::MAX);
    TrackPoint {
        sigma: C64::new(nearest as f64 + offset, 0.0),
        exact: Some(ExactInfo {
            is_integer: off_num.is_zero(),
            nearest,
            offset,
        }),
    }
}

/// Point with exact real part x (in Q(sqrt d)) and imaginary part im.
pub fn quad_point(x: &QuadNum, im: C64) -> TrackPoint {
    let (n, offset) = quad_offset(x);
    let nearest = n.to_i64().unwrap_or(i64::MAX);
    TrackPoint {
        sigma: C64::new(nearest as f64 + offset, im.re),
        exact: Some(ExactInfo {
            is_integer: x.is_integer(),
            nearest,
            offset,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, liouville_truncated};
    use crate::linalg::I;
    use crate::symbol::PowerLaw;

    #[test]
    fn flattening_roundtrip() {
        for ell in 1..1000 {
            let (j, m) = index_of(ell);
            assert_eq!(ell_of(j, m), ell);
        }
        assert_eq!(index_of(1), (1, 1));
        assert_eq!(index_of(2), (1, 2));
        assert_eq!(index_of(3), (2, 1));
    }

    #[test]
    fn distance_function() {
        let p = TrackPoint::float(C64::new(3.25, -0.5));
        assert!((p.distance() - 0.25f64.hypot(0.5)).abs() < 1e-15);
        assert!(p.distance() <= 0.5 + p.imag_abs());
        assert_eq!(TrackPoint::float(C64::new(-4.0, 0.0)).distance(), 0.0);
    }

    #[test]
    fn sqrt2_vector_field_exact() {
        let t = EigenTrack::vector_field(&RealNumber::sqrt2(), C64::zero(), 100);
        let p = t.at(12, 2);
        assert_eq!(p.exact.unwrap().nearest, 17);
        let expect = -1.0 / (12.0 * 2f64.sqrt() + 17.0);
        assert!((p.exact.unwrap().offset - expect).abs() < 1e-15);
        let p1 = t.at(12, 1);
        assert_eq!(p1.exact.unwrap().nearest, -17);
        assert!(!p1.exact.unwrap().is_integer);
    }

    #[test]
    fn liouville_offsets_are_exact() {
        let l = liouville_truncated(4);
        let t = EigenTrack::vector_field(&RealNumber::Rational(l), C64::zero(), 10);
        // 10^6 L = 110001 + 10^{-18} + ...
        let p = t.at(1_000_000, 2);
        let e = p.exact.unwrap();
        assert_eq!(e.nearest, 110_001);
        assert!((e.offset - 1e-18).abs() < 1e-30);
        let r = rational_multiple_point(&BigRational::new(int(7), int(2)), 2, 1);
        assert!(r.exact.unwrap().is_integer);
        assert_eq!(r.exact.unwrap().nearest, -7);
    }

    #[test]
    fn operator_track_labels_follow_linearization() {
        let fam = SymbolFamily::offdiag(PowerLaw::sqrt());
        let t = EigenTrack::operator(I, &fam, C64::new(1.0, 0.0), 100, 1e-12);
        let p1 = t.at(100, 1).sigma;
        let r = 9900f64.sqrt();
        assert!((p1 - (-I * r)).norm() < 1e-9);
        assert!((t.at(100, 2).sigma - I * r).norm() < 1e-9);
    }
}
