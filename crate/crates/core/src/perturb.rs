//! Power series in eps of the eigenvalues and eigenvectors of omega D_j + eps R_j.

use serde::Serialize;

use crate::diag::{eigen2_labeled, q_matrix};
use crate::error::{Error, Result};
use crate::linalg::{mat2, Mat2, C64, ONE, ZERO};

pub const DEFAULT_ORDER: usize = 8;
pub const NEAR_SINGULAR: f64 = 1e-6;

/// Coefficients of sigma^m(eps) = sum_k sigma^m_k eps^k and of the eigenvector
/// corrections: v^1(eps) = (1, sum_k alpha_k eps^k), v^2(eps) = (sum_k beta_k eps^k, 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KatoSeries {
    pub j: u64,
    pub order: usize,
    pub omega: C64,
    /// Index k = 0..=order.
    pub sigma1: Vec<C64>,
    pub sigma2: Vec<C64>,
    /// Index k - 1 for k = 1..=order.
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

/// Neumaier-compensated sum.
pub fn compensated_sum(terms: impl IntoIterator<Item = C64>) -> C64 {
    let (mut s_re, mut c_re, mut s_im, mut c_im) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let step = |s: &mut f64, c: &mut f64, x: f64| {
        let t = *s + x;
        if s.abs() >= x.abs() {
            *c += (*s - t) + x;
        } else {
            *c += (x - t) + *s;
        }
        *s = t;
    };
    for z in terms {
        step(&mut s_re, &mut c_re, z.re);
        step(&mut s_im, &mut c_im, z.im);
    }
    C64::new(s_re + c_re, s_im + c_im)
}

/// sum_k coeffs[k] eps^{k + shift}.
fn eval_poly(coeffs: &[C64], eps: C64, shift: i32) -> C64 {
    let mut p = eps.powi(shift);
    compensated_sum(coeffs.iter().map(|c| {
        let t = c * p;
        p *= eps;
        t
    }))
}

impl KatoSeries {
    pub fn sigma(&self, m: u8) -> &[C64] {
        if m == 1 {
            &self.sigma1
        } else {
            &self.sigma2
        }
    }

    /// Truncated sigma^m(eps).
    pub fn eval(&self, m: u8, eps: C64) -> C64 {
        eval_poly(self.sigma(m), eps, 0)
    }

    pub fn alpha_sum(&self, eps: C64) -> C64 {
        eval_poly(&self.alpha, eps, 1)
    }

    pub fn beta_sum(&self, eps: C64) -> C64 {
        eval_poly(&self.beta, eps, 1)
    }
}

/// Series through order K from the recursions
/// alpha_k = ((a - d) alpha_{k-1} + b sum_{n=2}^{k-1} alpha_{n-1} alpha_{k-n}) / (2 omega j),
/// beta_k = ((a - d) beta_{k-1} - c sum_{n=2}^{k-1} beta_{n-1} beta_{k-n}) / (2 omega j),
/// seeded by alpha_1 = -c / (2 omega j), beta_1 = b / (2 omega j).
pub fn kato_series(omega: C64, r: [C64; 4], j: u64, order: usize) -> Result<KatoSeries> {
    if omega == ZERO {
        return Err(Error::ZeroOmega);
    }
    if order == 0 || j == 0 {
        return Err(Error::ParameterOutOfRange("kato series needs K >= 1 and j >= 1".into()));
    }
    let [a, b, c, d] = r;
    let w = omega * (2.0 * j as f64);
    let mut alpha = vec![-c / w];
    let mut beta = vec![b / w];
    for k in 2..=order {
        let conv = |v: &[C64]| compensated_sum((2..k).map(|n| v[n - 2] * v[k - n - 1]));
        let ak = ((a - d) * alpha[k - 2] + b * conv(&alpha)) / w;
        let bk = ((a - d) * beta[k - 2] - c * conv(&beta)) / w;
        alpha.push(ak);
        beta.push(bk);
    }
    let oj = omega * j as f64;
    let mut sigma1 = vec![-oj, a];
    let mut sigma2 = vec![oj, d];
    for k in 2..=order {
        sigma1.push(b * alpha[k - 2]);
        sigma2.push(c * beta[k - 2]);
    }
    Ok(KatoSeries {
        j,
        order,
        omega,
        sigma1,
        sigma2,
        alpha,
        beta,
    })
}

/// binom(1/2, k).
pub fn half_binomial(k: usize) -> f64 {
    let mut a = 1.0;
    for i in 0..k {
        a *= (0.5 - i as f64) / (i as f64 + 1.0);
    }
    a
}

/// Closed-form expansion of -/+ sqrt(omega^2 j^2 + eps^2 gamma^2) for R = [[0, gamma], [gamma, 0]].
pub fn sqrt_series(omega: C64, gamma: f64, j: u64, order: usize) -> Result<KatoSeries> {
    if omega == ZERO {
        return Err(Error::ZeroOmega);
    }
    if order == 0 || j == 0 {
        return Err(Error::ParameterOutOfRange("sqrt series needs K >= 1 and j >= 1".into()));
    }
    let oj = omega * j as f64;
    // coefficient of eps^{2h} in sqrt(omega^2 j^2 + eps^2 gamma^2)
    let t = |h: usize| C64::new(gamma.powi(2 * h as i32), 0.0) / oj.powi(2 * h as i32 - 1) * half_binomial(h);
    let mut sigma1 = vec![ZERO; order + 1];
    let mut sigma2 = vec![ZERO; order + 1];
    sigma1[0] = -oj;
    sigma2[0] = oj;
    for h in (1..).take_while(|h| 2 * h <= order) {
        sigma2[2 * h] = t(h);
        sigma1[2 * h] = -t(h);
    }
    // first row of the eigen-equation: alpha(eps) = (sigma^1(eps) + omega j) / (eps gamma)
    let mut alpha = vec![ZERO; order];
    if gamma != 0.0 {
        for k in (1..=order).step_by(2) {
            alpha[k - 1] = -t(k.div_ceil(2)) / gamma;
        }
    }
    let beta = alpha.iter().map(|z| -z).collect();
    Ok(KatoSeries {
        j,
        order,
        omega,
        sigma1,
        sigma2,
        alpha,
        beta,
    })
}

/// Explicit bound on the tail sum_{k > N} |gamma^{2k} / (omega j)^{2k-1} a_k eps^{2k}|
/// for |gamma_j| <= C j^delta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub delta: f64,
    pub c_gamma: f64,
    pub omega_abs: f64,
    pub n: usize,
    pub eta: f64,
    pub epsilon0: f64,
    pub j0: u64,
}

impl TailBound {
    pub fn new(delta: f64, c_gamma: f64, omega: C64, n: usize) -> Result<Self> {
        let omega_abs = omega.norm();
        if !(delta < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("delta = {delta} must be < 1")));
        }
        if c_gamma <= 0.0 || omega_abs == 0.0 {
            return Err(Error::ParameterOutOfRange("C_gamma and |omega| must be positive".into()));
        }
        let eta = -(2.0 * n as f64 * (delta - 1.0) + 1.0);
        if !(eta > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "eta = {eta} must be positive (N = {n}, delta = {delta})"
            )));
        }
        Ok(TailBound {
            delta,
            c_gamma,
            omega_abs,
            n,
            eta,
            epsilon0: omega_abs / (2.0 * c_gamma),
            j0: 1,
        })
    }

    pub fn value(&self, j: u64, eps: f64) -> Result<f64> {
        if !(eps.abs() < self.epsilon0) {
            return Err(Error::ParameterOutOfRange(format!(
                "|eps| = {} not below eps0 = {}",
                eps.abs(),
                self.epsilon0
            )));
        }
        if j < self.j0 {
            return Err(Error::ParameterOutOfRange(format!("j = {j} below j0 = {}", self.j0)));
        }
        let k = self.omega_abs / (3.0 * 2f64.powi(2 * self.n as i32 + 1));
        Ok(k * (j as f64).powf(-self.eta))
    }
}

pub fn tail_bound(delta: f64, c_gamma: f64, omega: C64, j: u64, n: usize, eps: f64) -> Result<f64> {
    TailBound::new(delta, c_gamma, omega, n)?.value(j, eps)
}

/// sum_{k > N} of the sqrt-expansion term moduli, summed until negligible.
pub fn sqrt_series_tail(omega: C64, gamma: f64, j: u64, n: usize, eps: f64) -> f64 {
    let oj = omega.norm() * j as f64;
    let x = (gamma * eps / oj).powi(2);
    let mut total = 0.0;
    let mut k = n + 1;
    let mut term = oj * x.powi(k as i32);
    let mut coeff = half_binomial(k).abs();
    loop {
        let t = term * coeff;
        total += t;
        if t <= total * 1e-18 || k > 100_000 {
            break;
        }
        coeff *= ((k as f64 - 0.5) / (k as f64 + 1.0)).abs();
        term *= x;
        k += 1;
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledS {
    pub s: Mat2,
    pub det_margin: f64,
}

/// S(eps) = [[1, sum beta_k eps^k], [sum alpha_k eps^k, 1]].
pub fn assemble_s_eps(series: &KatoSeries, eps: C64) -> Result<AssembledS> {
    if !(eps.norm() < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("|eps| = {} must be < 1", eps.norm())));
    }
    let a = series.alpha_sum(eps);
    let b = series.beta_sum(eps);
    let det_margin = (ONE - a * b).norm();
    if det_margin < NEAR_SINGULAR {
        return Err(Error::NearSingular { margin: det_margin });
    }
    Ok(AssembledS {
        s: mat2(ONE, b, a, ONE),
        det_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesComparison {
    pub j: u64,
    pub eps: C64,
    pub order: usize,
    pub series_vals: [C64; 2],
    pub direct_vals: [C64; 2],
    pub abs_err: [f64; 2],
}

pub fn series_vs_direct(omega: C64, r: [C64; 4], j: u64, eps: C64, order: usize, tol: f64) -> Result<SeriesComparison> {
    let ks = kato_series(omega, r, j, order)?;
    let series_vals = [ks.eval(1, eps), ks.eval(2, eps)];
    let [a, b, c, d] = r;
    let rm = mat2(a, b, c, d) * eps;
    let oj = omega * j as f64;
    let anchors = [-oj + eps * a, oj + eps * d];
    let e = eigen2_labeled(&q_matrix(omega, &rm, j), anchors, tol).require_diagonalizable(j)?;
    let direct_vals = e.eigenvalues;
    Ok(SeriesComparison {
        j,
        eps,
        order,
        abs_err: [(series_vals[0] - direct_vals[0]).norm(), (series_vals[1] - direct_vals[1]).norm()],
        series_vals,
        direct_vals,
    })
}

/// Largest eps on the grid eps_max * 2^{-i} (scanning upward) with series error below tol.
pub fn empirical_radius(omega: C64, r: [C64; 4], j: u64, order: usize, tol: f64, eps_max: f64) -> Result<Option<f64>> {
    let mut best = None;
    for i in (0..40).rev() {
        let eps = eps_max * 0.5f64.powi(i);
        let cmp = series_vs_direct(omega, r, j, C64::new(eps, 0.0), order, 1e-14)?;
        if cmp.abs_err[0].max(cmp.abs_err[1]) <= tol {
            best = Some(eps);
        } else {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::eigen2;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn second_order_symmetric() {
        let s = kato_series(c(1.0), [ZERO, c(2.0), c(2.0), ZERO], 5, 4).unwrap();
        assert!((s.sigma1[2] - c(-0.4)).norm() < 1e-15);
        assert!((s.sigma2[2] - c(0.4)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_series_terminates() {
        let s = kato_series(c(0.7), [c(1.5), ZERO, ZERO, c(-2.0)], 3, 8).unwrap();
        assert_eq!(s.sigma1[1], c(1.5));
        assert_eq!(s.sigma2[1], c(-2.0));
        assert!(s.sigma1[2..].iter().chain(&s.sigma2[2..]).all(|z| *z == ZERO));
    }

    #[test]
    fn third_order_general() {
        let s = kato_series(c(1.0), [ZERO, c(1.0), c(1.0), c(2.0)], 1, 4).unwrap();
        assert!((s.sigma1[3] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(half_binomial(1), 0.5);
        assert_eq!(half_binomial(2), -0.125);
        assert_eq!(half_binomial(3), 0.0625);
        for k in 1..30 {
            assert!(half_binomial(k).abs() <= 0.5);
        }
    }

    #[test]
    fn sqrt_series_value() {
        let s = sqrt_series(c(1.0), 1.0, 1, 8).unwrap();
        let v = s.eval(2, c(0.1));
        assert!((v - c(1.01f64.sqrt())).norm() < 1e-10);
        assert!((v.re - 1.004_987_562_1).abs() < 1e-10);
        let z = sqrt_series(c(2.0), 0.0, 3, 6).unwrap();
        assert_eq!(z.eval(1, c(0.3)), c(-6.0));
        assert_eq!(z.eval(2, c(0.3)), c(6.0));
    }

    #[test]
    fn zero_omega_rejected() {
        assert_eq!(kato_series(ZERO, [ZERO; 4], 1, 2), Err(Error::ZeroOmega));
        assert_eq!(sqrt_series(ZERO, 1.0, 1, 2), Err(Error::ZeroOmega));
    }

    #[test]
    fn tail_bound_examples() {
        assert!(matches!(tail_bound(0.5, 1.0, c(1.0), 10, 1, 0.1), Err(Error::ParameterOutOfRange(_))));
        let b = TailBound::new(0.5, 1.0, c(1.0), 2).unwrap();
        assert_eq!(b.eta, 1.0);
        let v = b.value(100, 0.1).unwrap();
        assert!((v - 1.0 / 96.0 / 100.0).abs() < 1e-18);
        let tail = sqrt_series_tail(c(1.0), 10.0, 100, 2, 0.1);
        assert!(tail <= v);
        // first omitted term gamma^6 eps^6 a_3 / (omega j)^5
        assert!((tail - 0.0625e-10).abs() / tail < 1e-3);
        assert!(tail_bound(0.5, 1.0, c(1.0), 10, 2, 0.6).is_err());
        assert!(tail_bound(1.0, 1.0, c(1.0), 10, 2, 0.1).is_err());
    }

    #[test]
    fn assembly() {
        let s = kato_series(c(1.0), [ZERO; 4], 7, 8).unwrap();
        let a = assemble_s_eps(&s, c(0.5)).unwrap();
        assert_eq!(a.s, Mat2::identity());
        assert_eq!(a.det_margin, 1.0);

        let g = 10.0;
        let s = kato_series(c(1.0), [ZERO, c(g), c(g), ZERO], 100, 8).unwrap();
        let a = assemble_s_eps(&s, c(0.05)).unwrap();
        assert!((a.s[(1, 0)] - c(-0.0025)).norm() < 1e-7);
        assert!((a.s[(0, 1)] - c(0.0025)).norm() < 1e-7);
        assert!(a.det_margin > 1.0 && a.det_margin < 1.001);
        // eigenvector oracle: column 1 of S is proportional to the sigma^1 eigenvector
        let m = mat2(c(-100.0), c(0.5), c(0.5), c(100.0));
        let e = eigen2(&m, 1e-14);
        let ratio = e.s[(1, 0)] / e.s[(0, 0)];
        assert!((ratio - a.s[(1, 0)]).norm() < 1e-12);

        assert!(matches!(assemble_s_eps(&s, c(1.0)), Err(Error::ParameterOutOfRange(_))));
        // alpha = beta = 1 / eps makes 1 - alpha beta vanish at eps = 1/2
        let synthetic = KatoSeries {
            j: 1,
            order: 1,
            omega: c(1.0),
            sigma1: vec![c(-1.0), ZERO],
            sigma2: vec![c(1.0), ZERO],
            alpha: vec![c(2.0)],
            beta: vec![c(0.5)],
        };
        assert!(matches!(assemble_s_eps(&synthetic, c(0.999_999_9)), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn direct_comparisons() {
        let nil = series_vs_direct(c(1.3), [ZERO, ZERO, c(4.0), ZERO], 6, c(0.7), 8, 1e-12).unwrap();
        assert_eq!(nil.abs_err, [0.0, 0.0]);
        let g = 10f64.sqrt();
        let r = series_vs_direct(c(1.0), [ZERO, c(g), c(g), ZERO], 10, c(0.05), 8, 1e-12).unwrap();
        assert!(r.abs_err[0] <= 1e-10 && r.abs_err[1] <= 1e-10);
        let tri = series_vs_direct(c(0.9), [c(0.3), ZERO, c(5.0), c(-1.1)], 4, C64::new(0.4, 0.2), 1, 1e-12).unwrap();
        assert!(tri.abs_err[0] < 1e-15 && tri.abs_err[1] < 1e-15);
    }
}
