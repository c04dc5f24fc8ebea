//! 2x2 complex matrix helpers.

use nalgebra::Matrix2;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<Complex64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major constructor.
pub fn mat2(a: C64, b: C64, c: C64, d: C64) -> Mat2 {
    Matrix2::new(a, b, c, d)
}

pub fn real_mat2(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
    mat2(a.into(), b.into(), c.into(), d.into())
}

/// diag(-j, j), the symbol of D_x on level j.
pub fn dx_symbol(j: u64) -> Mat2 {
    let j = j as f64;
    real_mat2(-j, 0.0, 0.0, j)
}

/// Max-entry norm.
pub fn max_norm(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn entries(m: &Mat2) -> [C64; 4] {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]
}

pub fn det(m: &Mat2) -> C64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let dt = det(m);
    if dt == ZERO || !dt.is_finite() {
        return None;
    }
    Some(mat2(m[(1, 1)] / dt, -m[(0, 1)] / dt, -m[(1, 0)] / dt, m[(0, 0)] / dt))
}

/// Distance from a real number to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// min over integers tau of |tau + sigma|.
pub fn small_divisor(sigma: C64) -> f64 {
    dist_to_int(sigma.re).hypot(sigma.im)
}
