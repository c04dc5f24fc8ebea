//! Per-mode diagonalization of Q_j = omega D_j + R_j.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::log_log_fit;
use crate::linalg::{dx_symbol, inverse, mat2, max_norm, Mat2, C64, I, ONE, ZERO};
use crate::symbol::SymbolFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair2 {
    pub eigenvalues: [C64; 2],
    /// Columns are eigenvectors.
    pub s: Mat2,
    /// None when defective.
    pub s_inv: Option<Mat2>,
    pub defective: bool,
}

impl EigenPair2 {
    pub fn require_diagonalizable(self, j: u64) -> Result<Self> {
        if self.defective {
            Err(Error::Defective { j })
        } else {
            Ok(self)
        }
    }

    pub fn swapped(self) -> Self {
        let [l1, l2] = self.eigenvalues;
        let s = mat2(self.s[(0, 1)], self.s[(0, 0)], self.s[(1, 1)], self.s[(1, 0)]);
        EigenPair2 {
            eigenvalues: [l2, l1],
            s_inv: inverse(&s).filter(|_| !self.defective),
            s,
            defective: self.defective,
        }
    }
}

fn unit_max(v: [C64; 2]) -> [C64; 2] {
    let k = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    if k == ZERO {
        return v;
    }
    [v[0] / k, v[1] / k]
}

fn eigvec(m: &Mat2, lambda: C64) -> [C64; 2] {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let v1 = [b, lambda - a];
    let v2 = [lambda - d, c];
    let n1 = v1[0].norm().max(v1[1].norm());
    let n2 = v2[0].norm().max(v2[1].norm());
    unit_max(if n1 >= n2 { v1 } else { v2 })
}

fn less(x: C64, y: C64) -> bool {
    let tie = 1e-12 * (1.0 + x.norm().max(y.norm()));
    if (x.re - y.re).abs() > tie {
        x.re < y.re
    } else {
        x.im < y.im
    }
}

/// Closed-form eigendecomposition of a 2x2 complex matrix.
///
/// Eigenvalues come sorted by real part, ties by imaginary part. Columns of S are
/// scaled so that their largest entry is 1.
pub fn eigen2(m: &Mat2, tol: f64) -> EigenPair2 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let scale = 1.0 + max_norm(m).powi(2);
    let half = (a - d) * 0.5;
    let disc = half * half + b * c;
    let diagonal = b == ZERO && c == ZERO;
    let defective = !diagonal && disc.norm() < tol * scale;

    let (l1, l2, v1, v2) = if diagonal {
        (a, d, [ONE, ZERO], [ZERO, ONE])
    } else if b == ZERO {
        // lower triangular: spectrum is the diagonal
        let va = if a == d { [ZERO, ONE] } else { unit_max([a - d, c]) };
        (a, d, va, [ZERO, ONE])
    } else if c == ZERO {
        let vd = if a == d { [ONE, ZERO] } else { unit_max([b, d - a]) };
        (a, d, [ONE, ZERO], vd)
    } else {
        let mid = (a + d) * 0.5;
        let root = disc.sqrt();
        let (p, q) = (mid + root, mid - root);
        let big = if p.norm() >= q.norm() { p } else { q };
        let small = if big == ZERO { ZERO } else { (a * d - b * c) / big };
        (big, small, eigvec(m, big), eigvec(m, small))
    };
    let (l1, l2, v1, v2) = if less(l2, l1) { (l2, l1, v2, v1) } else { (l1, l2, v1, v2) };
    let s = mat2(v1[0], v2[0], v1[1], v2[1]);
    EigenPair2 {
        eigenvalues: [l1, l2],
        s_inv: if defective { None } else { inverse(&s) },
        s,
        defective,
    }
}

/// eigen2 with labels chosen to match `anchors` (closest total assignment).
pub fn eigen2_labeled(m: &Mat2, anchors: [C64; 2], tol: f64) -> EigenPair2 {
    let e = eigen2(m, tol);
    let [x, y] = e.eigenvalues;
    let keep = (x - anchors[0]).norm() + (y - anchors[1]).norm();
    let swap = (y - anchors[0]).norm() + (x - anchors[1]).norm();
    if swap < keep {
        e.swapped()
    } else {
        e
    }
}

/// Q_j = omega D_j + R.
pub fn q_matrix(omega: C64, r: &Mat2, j: u64) -> Mat2 {
    dx_symbol(j) * omega + r
}

/// Closed forms for R_j = [[0, gamma], [gamma, 0]] with omega real or purely imaginary.
pub fn closed_form_noncomm(omega: C64, gamma: f64, j: u64) -> Result<EigenPair2> {
    let jf = j as f64;
    if gamma == 0.0 {
        let l = omega * jf;
        return Ok(EigenPair2 {
            eigenvalues: [-l, l],
            s: Mat2::identity(),
            s_inv: Some(Mat2::identity()),
            defective: false,
        });
    }
    if omega.re != 0.0 && omega.im != 0.0 {
        return Err(Error::MixedOmega {
            re: omega.re,
            im: omega.im,
        });
    }
    let g = C64::new(gamma, 0.0);
    if omega.im == 0.0 {
        let alpha = omega.re;
        let root = (jf * jf * alpha * alpha + gamma * gamma).sqrt();
        // sigma^2 is the positive root
        let (l1, l2) = (C64::new(-root, 0.0), C64::new(root, 0.0));
        let m = mat2(C64::new(-alpha * jf, 0.0), g, g, C64::new(alpha * jf, 0.0));
        let v1 = eigvec(&m, l1);
        let v2 = eigvec(&m, l2);
        let s = mat2(v1[0], v2[0], v1[1], v2[1]);
        return Ok(EigenPair2 {
            eigenvalues: [l1, l2],
            s_inv: inverse(&s),
            s,
            defective: false,
        });
    }
    let beta = omega.im;
    let arg = beta * beta * jf * jf - gamma * gamma;
    if arg <= 0.0 {
        return Err(Error::SmallJ { j });
    }
    let root = arg.sqrt();
    // column for +i root: (-i, (j beta + root) / gamma); for -i root: (i, (-j beta + root) / gamma)
    let plus = [-I, C64::new((jf * beta + root) / gamma, 0.0)];
    let minus = [I, C64::new((-jf * beta + root) / gamma, 0.0)];
    let (l_plus, l_minus) = (I * root, -I * root);
    // sigma^1 continues -omega j = -i beta j
    let (l1, v1, l2, v2) = if beta > 0.0 {
        (l_minus, minus, l_plus, plus)
    } else {
        (l_plus, plus, l_minus, minus)
    };
    let s = mat2(v1[0], v2[0], v1[1], v2[1]);
    Ok(EigenPair2 {
        eigenvalues: [l1, l2],
        s_inv: inverse(&s),
        s,
        defective: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope_s: f64,
    pub slope_sinv: f64,
    pub residuals: (f64, f64),
    pub bounded: (bool, bool),
    /// First mode of the fitted range; every defective mode lies below it.
    pub j0: u64,
    pub j_max: u64,
    /// max_j |S_j| / j^slope_s and the same for the inverse.
    pub k_s: f64,
    pub k_sinv: f64,
    pub max_s: f64,
    pub max_sinv: f64,
    pub defective_js: Vec<u64>,
}

/// Growth of |S_j| and |S_j^{-1}| for omega D_j + R_j over j_min..=j_max.
pub fn strong_diag_profile(
    omega: C64,
    family: &SymbolFamily,
    j_min: u64,
    j_max: u64,
    tol: f64,
) -> Result<GrowthFit> {
    if j_min < 1 || j_max < j_min {
        return Err(Error::ParameterOutOfRange(format!("empty mode range [{j_min}, {j_max}]")));
    }
    let pairs: Vec<(u64, EigenPair2)> = (j_min..=j_max)
        .into_par_iter()
        .map(|j| (j, eigen2(&q_matrix(omega, &family.matrix(j), j), tol)))
        .collect();
    let defective_js: Vec<u64> = pairs.iter().filter(|(_, e)| e.defective).map(|(j, _)| *j).collect();
    let j0 = defective_js.last().map_or(j_min, |j| j + 1);
    let fitted: Vec<(f64, f64, f64)> = pairs
        .iter()
        .filter(|(j, _)| *j >= j0)
        .filter_map(|(j, e)| e.s_inv.map(|si| (*j as f64, max_norm(&e.s), max_norm(&si))))
        .collect();
    if fitted.len() < 2 || 2 * (j0 - j_min) > j_max - j_min + 1 {
        return Err(Error::Defective {
            j: defective_js.last().copied().unwrap_or(j_min),
        });
    }
    let fs = log_log_fit(&fitted.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>());
    let fi = log_log_fit(&fitted.iter().map(|p| (p.0, p.2)).collect::<Vec<_>>());
    let (slope_s, res_s) = fs.map_or((0.0, 0.0), |f| (f.slope, f.residual));
    let (slope_sinv, res_i) = fi.map_or((0.0, 0.0), |f| (f.slope, f.residual));
    let max_s = fitted.iter().map(|p| p.1).fold(0.0, f64::max);
    let max_sinv = fitted.iter().map(|p| p.2).fold(0.0, f64::max);
    let k_s = fitted.iter().map(|p| p.1 / p.0.powf(slope_s)).fold(0.0, f64::max);
    let k_sinv = fitted.iter().map(|p| p.2 / p.0.powf(slope_sinv)).fold(0.0, f64::max);
    Ok(GrowthFit {
        slope_s,
        slope_sinv,
        residuals: (res_s, res_i),
        bounded: (slope_s < 0.05 && max_s.is_finite(), slope_sinv < 0.05 && max_sinv.is_finite()),
        j0,
        j_max,
        k_s,
        k_sinv,
        max_s,
        max_sinv,
        defective_js,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_mat2;
    use crate::symbol::PowerLaw;

    fn reconstruct(e: &EigenPair2) -> Mat2 {
        let d = mat2(e.eigenvalues[0], ZERO, ZERO, e.eigenvalues[1]);
        e.s * d * e.s_inv.unwrap()
    }

    #[test]
    fn diagonal_input() {
        let e = eigen2(&real_mat2(-3.0, 0.0, 0.0, 3.0), 1e-12);
        assert_eq!(e.eigenvalues, [C64::new(-3.0, 0.0), C64::new(3.0, 0.0)]);
        assert_eq!(e.s, Mat2::identity());
        assert!(!e.defective);
    }

    #[test]
    fn symmetric_example_matches_characteristic_roots() {
        let m = real_mat2(-1.0, 1.0, 1.0, 1.0);
        let e = eigen2(&m, 1e-12);
        // xi^2 - 2 = 0
        assert!((e.eigenvalues[0] - C64::new(-2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((e.eigenvalues[1] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!(max_norm(&(reconstruct(&e) - m)) < 1e-14);
    }

    #[test]
    fn jordan_block_is_defective() {
        let e = eigen2(&real_mat2(0.0, 1.0, 0.0, 0.0), 1e-12);
        assert!(e.defective);
        assert!(e.s_inv.is_none());
        assert_eq!(e.clone().require_diagonalizable(3), Err(Error::Defective { j: 3 }));
    }

    #[test]
    fn triangular_spectrum_is_exact() {
        let m = mat2(C64::new(-1.7, 0.0), ZERO, C64::new(0.3, 2.0), C64::new(1.7, 0.0));
        let e = eigen2(&m, 1e-12);
        assert_eq!(e.eigenvalues, [C64::new(-1.7, 0.0), C64::new(1.7, 0.0)]);
        assert!(max_norm(&(reconstruct(&e) - m)) < 1e-15);
    }

    #[test]
    fn small_root_is_accurate() {
        // roots 1e8 and 1e-8: naive formula loses the small one
        let m = real_mat2(1e8, 1.0, -1.0, 0.0);
        let e = eigen2(&m, 1e-14);
        let prod = e.eigenvalues[0] * e.eigenvalues[1];
        assert!((prod - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        let e = closed_form_noncomm(C64::new(1.0, 0.0), 1.0, 1).unwrap();
        let g = eigen2(&real_mat2(-1.0, 1.0, 1.0, 1.0), 1e-12);
        for k in 0..2 {
            assert!((e.eigenvalues[k] - g.eigenvalues[k]).norm() < 1e-12);
        }
        let e = closed_form_noncomm(I, 10.0, 100).unwrap();
        let r = 9900f64.sqrt();
        assert!((e.eigenvalues[0] - (-I * r)).norm() < 1e-12);
        assert!((e.eigenvalues[1] - I * r).norm() < 1e-12);
        let m = mat2(-I * 100.0, C64::new(10.0, 0.0), C64::new(10.0, 0.0), I * 100.0);
        assert!(max_norm(&(reconstruct(&e) - m)) < 1e-10);
        let e = closed_form_noncomm(C64::new(0.0, 2.0), 0.0, 3).unwrap();
        assert_eq!(e.eigenvalues, [C64::new(0.0, -6.0), C64::new(0.0, 6.0)]);
        assert_eq!(e.s, Mat2::identity());
        assert!(matches!(closed_form_noncomm(C64::new(1.0, 1.0), 1.0, 2), Err(Error::MixedOmega { .. })));
        assert_eq!(closed_form_noncomm(I, 1.0, 1), Err(Error::SmallJ { j: 1 }));
    }

    #[test]
    fn imaginary_closed_form_entry_bound() {
        for j in 2..200u64 {
            let gamma = (j as f64).sqrt();
            let e = closed_form_noncomm(I, gamma, j).unwrap();
            assert!(max_norm(&e.s) <= 2.0 * j as f64 / gamma + 1e-12);
        }
    }

    #[test]
    fn profiles() {
        let sym = SymbolFamily::offdiag(PowerLaw::sqrt());
        let p = strong_diag_profile(C64::new(1.0, 0.0), &sym, 1, 2000, 1e-12).unwrap();
        assert!(p.slope_s.abs() < 0.02 && p.slope_sinv.abs() < 0.02);
        assert!(p.defective_js.is_empty());

        let p = strong_diag_profile(I, &sym, 1, 2000, 1e-12).unwrap();
        assert_eq!(p.defective_js, vec![1]);
        assert_eq!(p.j0, 2);
        assert!(p.slope_sinv < 0.05);

        let nil = SymbolFamily::nilpotent(PowerLaw::sqrt());
        let q = q_matrix(C64::new(0.618, 0.0), &nil.matrix(40), 40);
        let e = eigen2(&q, 1e-12);
        assert_eq!(e.eigenvalues, [C64::new(-0.618 * 40.0, 0.0), C64::new(0.618 * 40.0, 0.0)]);
    }

    #[test]
    fn profile_rejects_mostly_defective_ranges() {
        let jordan = SymbolFamily::from_rule("jordan", 0.0, ZERO, |_| [ZERO, ONE, ZERO, ZERO]);
        let r = strong_diag_profile(ZERO, &jordan, 1, 10, 1e-12);
        assert_eq!(r, Err(Error::Defective { j: 10 }));
    }
}
