//! Least-squares line fits and dyadic windows.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares y = slope * x + intercept. Needs two distinct abscissae.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
        points: n,
    })
}

/// Fit ln y against ln x, skipping points with nonpositive or non-finite coordinates.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<LineFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    least_squares(&logs)
}

/// Half-open index range [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn new(lo: usize, hi: usize) -> Self {
        Window { lo, hi }
    }

    pub fn contains(&self, x: usize) -> bool {
        x >= self.lo && x < self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// Windows [2^k, 2^{k+1}) for k in k_lo..=k_hi.
pub fn dyadic_windows(k_lo: u32, k_hi: u32) -> Vec<Window> {
    (k_lo..=k_hi).map(|k| Window::new(1 << k, 1 << (k + 1))).collect()
}

/// Dyadic windows covering [first, last]. A trailing piece shorter than half a
/// dyadic window is merged into its predecessor.
pub fn dyadic_cover(first: usize, last: usize) -> Vec<Window> {
    let mut out: Vec<Window> = Vec::new();
    if last < first {
        return out;
    }
    let mut lo = first.max(1);
    while lo <= last {
        let next = (lo + 1).next_power_of_two();
        let hi = next.min(last + 1);
        if hi < next && 2 * (hi - lo) < next - lo && !out.is_empty() {
            out.last_mut().unwrap().hi = hi;
        } else {
            out.push(Window::new(lo, hi));
        }
        lo = hi;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let f = least_squares(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-13);
        assert!(f.residual < 1e-13);
    }

    #[test]
    fn log_log_power_law() {
        let pts: Vec<(f64, f64)> = (1..100).map(|j| (j as f64, 3.0 * (j as f64).powf(0.7))).collect();
        let f = log_log_fit(&pts).unwrap();
        assert!((f.slope - 0.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(least_squares(&[(1.0, 1.0)]).is_none());
        assert!(least_squares(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
        assert!(log_log_fit(&[(1.0, 0.0), (2.0, 0.0)]).is_none());
    }

    #[test]
    fn dyadic_cover_is_a_partition() {
        let w = dyadic_cover(3, 40);
        assert_eq!(w.first().unwrap().lo, 3);
        assert_eq!(w.last().unwrap().hi, 41);
        for pair in w.windows(2) {
            assert_eq!(pair[0].hi, pair[1].lo);
        }
        assert_eq!(dyadic_windows(4, 5), vec![Window::new(16, 32), Window::new(32, 64)]);
    }
}
