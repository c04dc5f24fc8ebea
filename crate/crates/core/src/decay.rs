//! Decay classification of Fourier coefficient sequences and Sobolev tails.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::ser::Serializer;
use serde::Serialize;

use crate::coeff::{CoeffTable, Level};
use crate::error::{Error, Result};
use crate::fit::{dyadic_windows, least_squares, log_log_fit, Window};
use crate::linalg::{C64, I, ZERO};

pub const DEFAULT_SLOPE_THRESHOLD: f64 = 8.0;

pub fn default_windows() -> Vec<Window> {
    dyadic_windows(4, 13)
}

/// Sum over j <= big_j of |u_j|^2 <j>^{2s}, with <0> = 1 and <j> = j otherwise.
pub fn sobolev_tail(u: &CoeffTable, s: f64, big_j: usize) -> Result<f64> {
    if big_j > u.max_j() {
        return Err(Error::ParameterOutOfRange(format!(
            "tail index {big_j} beyond table depth {}",
            u.max_j()
        )));
    }
    Ok(u
        .levels()
        .take_while(|(j, _)| *j <= big_j)
        .map(|(j, l)| {
            let w = if j == 0 { 1.0 } else { (j as f64).powf(2.0 * s) };
            l.norm_sq() * w
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayClass {
    SuperPolynomialDecay,
    PolynomialGrowth,
    Unbounded,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSlope {
    Finite(f64),
    /// Window holds only zero levels.
    NegInfinity,
    /// Single nonzero level and nothing earlier to compare with.
    Insufficient,
}

impl Serialize for WindowSlope {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WindowSlope::Finite(x) => s.serialize_f64(*x),
            WindowSlope::NegInfinity => s.serialize_str("-inf"),
            WindowSlope::Insufficient => s.serialize_str("insufficient"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFit {
    pub lo: usize,
    pub hi: usize,
    pub slope: WindowSlope,
    #[serde(skip)]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayVerdict {
    pub class: DecayClass,
    pub fitted_slope: Option<f64>,
    pub windows: Vec<WindowFit>,
    pub evidence: String,
}

struct Spectral {
    planner: FftPlanner<f64>,
}

impl Spectral {
    fn plan(&mut self, n: usize) -> Arc<dyn Fft<f64>> {
        self.planner.plan_fft_inverse(n)
    }

    /// max over alpha <= alpha_max and over the 4 n_t + 1 grid of |d_t^alpha c(t)|.
    fn magnitude(&mut self, level: &Level, alpha_max: u32) -> f64 {
        let (n_t, comps) = level.as_modes();
        if n_t == 0 {
            return comps.iter().fold(0.0, |acc: f64, c| acc.hypot(c[0].norm()));
        }
        let g = 4 * n_t + 1;
        let fft = self.plan(g);
        let mut best: f64 = 0.0;
        for alpha in 0..=alpha_max {
            let mut acc = vec![0.0f64; g];
            for c in &comps {
                let mut buf = vec![ZERO; g];
                for (idx, z) in c.iter().enumerate() {
                    if *z == ZERO {
                        continue;
                    }
                    let n = idx as i64 - n_t as i64;
                    let factor = (I * n as f64).powu(alpha);
                    buf[n.rem_euclid(g as i64) as usize] = *z * factor;
                }
                fft.process(&mut buf);
                for (a, z) in acc.iter_mut().zip(&buf) {
                    *a += z.norm_sqr();
                }
            }
            best = acc.into_iter().fold(best, |m, x| m.max(x.sqrt()));
        }
        best
    }
}

/// Per-level magnitudes on the given windows, zero levels dropped.
pub fn level_magnitudes(c: &CoeffTable, alpha_max: u32, windows: &[Window]) -> Vec<(usize, f64)> {
    let mut sp = Spectral {
        planner: FftPlanner::new(),
    };
    c.levels()
        .filter(|(j, _)| windows.iter().any(|w| w.contains(*j)))
        .map(|(j, l)| (j, sp.magnitude(l, alpha_max)))
        .filter(|(_, m)| *m > 0.0)
        .collect()
}

fn lnpt(p: &(usize, f64)) -> (f64, f64) {
    ((p.0 as f64).ln(), p.1.ln())
}

pub fn classify_decay(
    c: &CoeffTable,
    alpha_max: u32,
    windows: &[Window],
    slope_threshold: f64,
) -> DecayVerdict {
    if c.is_zero() {
        return DecayVerdict {
            class: DecayClass::SuperPolynomialDecay,
            fitted_slope: None,
            windows: windows
                .iter()
                .map(|w| WindowFit {
                    lo: w.lo,
                    hi: w.hi,
                    slope: WindowSlope::NegInfinity,
                    points: 0,
                })
                .collect(),
            evidence: "identically zero".into(),
        };
    }
    let mags = level_magnitudes(c, alpha_max, windows);
    let mut fits = Vec::with_capacity(windows.len());
    let mut prev_peak: Option<(usize, f64)> = None;
    for w in windows {
        let pts: Vec<(usize, f64)> = mags.iter().copied().filter(|(j, _)| w.contains(*j)).collect();
        let slope = match pts.len() {
            0 => WindowSlope::NegInfinity,
            1 => match prev_peak {
                Some(p) => {
                    let (x0, y0) = lnpt(&p);
                    let (x1, y1) = lnpt(&pts[0]);
                    WindowSlope::Finite((y1 - y0) / (x1 - x0))
                }
                None => WindowSlope::Insufficient,
            },
            _ => {
                let lp: Vec<(f64, f64)> = pts.iter().map(lnpt).collect();
                match least_squares(&lp) {
                    Some(f) => WindowSlope::Finite(f.slope),
                    None => WindowSlope::Insufficient,
                }
            }
        };
        if let Some(peak) = pts.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)) {
            prev_peak = Some(peak);
        }
        fits.push(WindowFit {
            lo: w.lo,
            hi: w.hi,
            slope,
            points: pts.len(),
        });
    }
    let fitted_slope = log_log_fit(
        &mags.iter().map(|(j, m)| (*j as f64, *m)).collect::<Vec<_>>(),
    )
    .map(|f| f.slope);

    let finite: Vec<f64> = fits
        .iter()
        .filter_map(|f| match f.slope {
            WindowSlope::Finite(x) => Some(x),
            _ => None,
        })
        .collect();
    let slack = |a: f64, b: f64| 1e-9 * (1.0 + a.abs().max(b.abs()));
    let non_increasing = finite.windows(2).all(|p| p[1] <= p[0] + slack(p[0], p[1]));
    let non_decreasing = finite.windows(2).all(|p| p[1] >= p[0] - slack(p[0], p[1]));
    let fmt_slopes = || {
        finite
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    };

    let (class, evidence) = if mags.is_empty() {
        (
            DecayClass::SuperPolynomialDecay,
            "vanishes on every probed window".to_string(),
        )
    } else if finite.is_empty() {
        (
            DecayClass::Undecided,
            format!("{} nonzero level(s), no window slope available", mags.len()),
        )
    } else if finite.iter().all(|&x| x < -slope_threshold) {
        if non_increasing {
            (
                DecayClass::SuperPolynomialDecay,
                format!("window slopes [{}] all below -{slope_threshold} and non-increasing", fmt_slopes()),
            )
        } else {
            (
                DecayClass::Undecided,
                format!("steep window slopes [{}] without monotone steepening", fmt_slopes()),
            )
        }
    } else if finite.len() >= 2 && finite.iter().all(|&x| x > slope_threshold) && non_decreasing {
        (
            DecayClass::Unbounded,
            format!("window slopes [{}] above {slope_threshold} and non-decreasing", fmt_slopes()),
        )
    } else {
        let top = finite.iter().copied().fold(f64::MIN, f64::max);
        (
            DecayClass::PolynomialGrowth,
            format!("window slopes bounded above by {top:.3}"),
        )
    };
    DecayVerdict {
        class,
        fitted_slope,
        windows: fits,
        evidence,
    }
}

/// Table holding |c_j| = f(j) in the first component for j in range.
pub fn table_from_magnitudes(range: std::ops::RangeInclusive<usize>, f: impl Fn(usize) -> f64) -> CoeffTable {
    let mut t = CoeffTable::new(*range.end());
    for j in range {
        let comps = if j == 0 {
            vec![C64::new(f(j), 0.0)]
        } else {
            vec![C64::new(f(j), 0.0), ZERO]
        };
        t.set_constant(j, comps).expect("shape fixed by level");
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta4_tail() {
        let u = table_from_magnitudes(1..=10_000, |j| (j as f64).powi(-2));
        let s = sobolev_tail(&u, 0.0, 10_000).unwrap();
        assert!((s - std::f64::consts::PI.powi(4) / 90.0).abs() < 1e-3);
    }

    #[test]
    fn single_level_tail() {
        let mut u = CoeffTable::new(10);
        u.set_constant(5, vec![C64::new(1.0, 0.0), ZERO]).unwrap();
        assert_eq!(sobolev_tail(&u, 3.0, 10).unwrap(), 15625.0);
        assert_eq!(sobolev_tail(&CoeffTable::new(10), -4.0, 10).unwrap(), 0.0);
        assert!(sobolev_tail(&u, 0.0, 11).is_err());
    }

    #[test]
    fn classifier_examples() {
        let w = default_windows();
        let exp = table_from_magnitudes(1..=20_000, |j| (-(j as f64)).exp());
        // e^{-j} underflows past j ~ 745; the remaining windows are identically zero
        let v = classify_decay(&exp, 0, &w, DEFAULT_SLOPE_THRESHOLD);
        assert_eq!(v.class, DecayClass::SuperPolynomialDecay);

        let ones = table_from_magnitudes(1..=20_000, |_| 1.0);
        let v = classify_decay(&ones, 0, &w, DEFAULT_SLOPE_THRESHOLD);
        assert_eq!(v.class, DecayClass::PolynomialGrowth);
        assert!(v.fitted_slope.unwrap().abs() < 1e-12);

        let cube = table_from_magnitudes(1..=20_000, |j| (j as f64).powi(3));
        let v = classify_decay(&cube, 0, &w, DEFAULT_SLOPE_THRESHOLD);
        assert_eq!(v.class, DecayClass::PolynomialGrowth);
        assert!((v.fitted_slope.unwrap() - 3.0).abs() < 0.01);

        let zero = CoeffTable::new(100);
        let v = classify_decay(&zero, 0, &w, DEFAULT_SLOPE_THRESHOLD);
        assert_eq!(v.class, DecayClass::SuperPolynomialDecay);
        assert_eq!(v.evidence, "identically zero");
    }

    #[test]
    fn fast_growth_is_unbounded() {
        let t = table_from_magnitudes(1..=20_000, |j| (j as f64 / 40.0).exp());
        let v = classify_decay(&t, 0, &default_windows(), DEFAULT_SLOPE_THRESHOLD);
        // early windows grow slowly, so the run is polynomial at small scale
        assert_eq!(v.class, DecayClass::PolynomialGrowth);
        let far = dyadic_windows(9, 13);
        let v = classify_decay(&t, 0, &far, DEFAULT_SLOPE_THRESHOLD);
        assert_eq!(v.class, DecayClass::Unbounded);
    }

    #[test]
    fn spectral_derivative_of_single_mode() {
        for tau in [1i64, 3, 17] {
            let n_t = tau as usize;
            let mut comps = vec![vec![ZERO; 2 * n_t + 1], vec![ZERO; 2 * n_t + 1]];
            comps[0][(n_t as i64 - tau) as usize] = C64::new(1.0, 0.0);
            let level = Level::Modes { n_t, comps };
            let mut sp = Spectral {
                planner: FftPlanner::new(),
            };
            for alpha in 0..4u32 {
                let m = sp.magnitude(&level, alpha);
                let expect = (tau as f64).powi(alpha as i32).max(1.0);
                assert!((m - expect).abs() < 1e-9 * expect, "tau {tau} alpha {alpha}: {m}");
            }
        }
    }

    #[test]
    fn serialization_of_symbolic_slopes() {
        let f = WindowFit {
            lo: 1,
            hi: 2,
            slope: WindowSlope::NegInfinity,
            points: 0,
        };
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"lo":1,"hi":2,"slope":"-inf"}"#);
    }
}
