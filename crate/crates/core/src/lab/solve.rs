//! Scalar solves of (d_t + i sigma) v = g on T_t, the coupled system
//! (D_t + Q_j(eps)^T) U_j = F_j, and the |1 - e^{-2 pi i sigma}| probe.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::ops::RangeInclusive;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::coeff::{CoeffTable, Level};
use crate::diag::{eigen2, q_matrix};
use crate::error::{Error, Result};
use crate::fit::dyadic_cover;
use crate::gh::envelope;
use crate::linalg::{small_divisor, Mat2, C64, I, ONE, ZERO};
use crate::symbol::SymbolFamily;
use crate::track::EigenTrack;

pub const RESONANCE_TOL: f64 = 1e-13;
const GL_NODES: usize = 24;
const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveMethod {
    FourierSpace,
    Integral,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeSolution {
    /// Modes n = -n_t..=n_t.
    Modes(Vec<C64>),
    /// Values at t_k = 2 pi k / G.
    Samples(Vec<C64>),
}

impl ModeSolution {
    pub fn to_modes(&self, n_t: usize) -> Vec<C64> {
        match self {
            ModeSolution::Modes(v) => v.clone(),
            ModeSolution::Samples(s) => modes_from_samples(s, n_t),
        }
    }

    pub fn to_samples(&self, grid: usize) -> Vec<C64> {
        match self {
            ModeSolution::Modes(v) => samples_from_modes(v, grid),
            ModeSolution::Samples(s) => s.clone(),
        }
    }
}

/// Values of sum_n c_n e^{int} on an equispaced grid of the given size.
pub fn samples_from_modes(modes: &[C64], grid: usize) -> Vec<C64> {
    let n_t = (modes.len() - 1) / 2;
    assert!(grid > 2 * n_t, "grid too coarse for the band");
    let mut buf = vec![ZERO; grid];
    for (i, c) in modes.iter().enumerate() {
        let n = i as i64 - n_t as i64;
        buf[n.rem_euclid(grid as i64) as usize] += c;
    }
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    buf
}

/// Modes n = -n_t..=n_t of equispaced samples.
pub fn modes_from_samples(samples: &[C64], n_t: usize) -> Vec<C64> {
    let g = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    let scale = 1.0 / g as f64;
    (-(n_t as i64)..=n_t as i64)
        .map(|n| buf[n.rem_euclid(g as i64) as usize] * scale)
        .collect()
}

pub fn check_sigma(sigma: C64) -> Result<()> {
    if sigma.im == 0.0 && sigma.re.fract() == 0.0 {
        return Err(Error::IntegerSigma {
            sigma: sigma.re,
            location: None,
        });
    }
    let distance = small_divisor(sigma);
    if distance < RESONANCE_TOL {
        return Err(Error::ResonanceNear { distance });
    }
    Ok(())
}

/// Grid used by the Integral route when g is given by modes.
pub fn integral_grid(n_t: usize) -> usize {
    (4 * n_t + 4).max(16)
}

pub fn solve_mode(sigma: C64, g: &[C64], method: SolveMethod) -> Result<ModeSolution> {
    if g.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("mode vector of even length {}", g.len())));
    }
    check_sigma(sigma)?;
    let n_t = (g.len() - 1) / 2;
    match method {
        SolveMethod::FourierSpace => Ok(ModeSolution::Modes(
            g.iter()
                .enumerate()
                .map(|(i, gn)| gn / (I * (sigma + (i as f64 - n_t as f64))))
                .collect(),
        )),
        SolveMethod::Integral => {
            solve_samples(sigma, &samples_from_modes(g, integral_grid(n_t))).map(ModeSolution::Samples)
        }
    }
}

fn gl_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(GL_NODES).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Composite Gauss-Legendre value of the integral of e^{i kappa s} over [0, 2 pi].
fn oscillatory_integral(kappa: C64) -> C64 {
    let panels = ((kappa.norm() + 1.0) * 2.0 * PI / 4.0).ceil().max(4.0) as usize;
    let h = 2.0 * PI / panels as f64;
    let rule = gl_rule();
    let mut acc = ZERO;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(x, w) in rule {
            acc += (I * kappa * (mid + 0.5 * h * x)).exp() * w;
        }
    }
    acc * (0.5 * h)
}

/// Integral-formula solve from samples of g on an equispaced grid.
///
/// Im sigma <= 0: v(t) = (1 - e^{-2 pi i sigma})^{-1} int_0^{2pi} e^{-i sigma s} g(t - s) ds.
/// Im sigma > 0:  v(t) = (e^{2 pi i sigma} - 1)^{-1} int_0^{2pi} e^{i sigma s} g(t + s) ds.
pub fn solve_samples(sigma: C64, samples: &[C64]) -> Result<Vec<C64>> {
    check_sigma(sigma)?;
    let grid = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let lower = sigma.im <= 0.0;
    let pref = if lower {
        ONE / (ONE - (-2.0 * PI * I * sigma).exp())
    } else {
        ONE / ((2.0 * PI * I * sigma).exp() - ONE)
    };
    let scale = 1.0 / grid as f64;
    for (k, c) in buf.iter_mut().enumerate() {
        let n = if k <= grid / 2 { k as f64 } else { k as f64 - grid as f64 };
        let kappa = if lower { -(sigma + n) } else { sigma + n };
        *c *= pref * oscillatory_integral(kappa) * scale;
    }
    FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
    Ok(buf)
}

/// max_n |i(n + sigma) v_n - g_n| / max(1, max_n |g_n|).
pub fn mode_residual(sigma: C64, v: &[C64], g: &[C64]) -> f64 {
    let n_t = (g.len() - 1) / 2;
    let scale = g.iter().map(|z| z.norm()).fold(1.0, f64::max);
    v.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (vn, gn))| (I * (sigma + (i as f64 - n_t as f64)) * vn - gn).norm())
        .fold(0.0, f64::max)
        / scale
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub u: CoeffTable,
    /// max_n ||(n + Q_j^T) U_n - F_n|| per level.
    pub residuals: BTreeMap<usize, f64>,
}

impl SystemSolution {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

fn locate(e: Error, j: usize, m: usize) -> Error {
    match e {
        Error::IntegerSigma { sigma, .. } => Error::IntegerSigma {
            sigma,
            location: Some((j, m)),
        },
        other => other,
    }
}

fn solve_level(omega: C64, family: &SymbolFamily, eps: C64, j: usize, level: &Level) -> Result<(Level, f64)> {
    let (n_t, comps) = level.as_modes();
    let width = 2 * n_t + 1;
    let qt: Mat2 = if j == 0 {
        Mat2::identity() * (eps * family.scalar_at_zero)
    } else {
        q_matrix(omega, &(family.matrix(j as u64) * eps), j as u64).transpose()
    };
    let mut out = vec![vec![ZERO; width]; comps.len()];
    if j == 0 {
        let sigma = qt[(0, 0)];
        let g: Vec<C64> = comps[0].iter().map(|f| I * f).collect();
        out[0] = solve_mode(sigma, &g, SolveMethod::FourierSpace)
            .map_err(|e| locate(e, 0, 1))?
            .to_modes(n_t);
    } else {
        let pair = eigen2(&qt, EIGEN_TOL).require_diagonalizable(j as u64)?;
        let s_inv = pair.s_inv.expect("diagonalizable");
        let mut w = [vec![ZERO; width], vec![ZERO; width]];
        let mut g = [vec![ZERO; width], vec![ZERO; width]];
        for n in 0..width {
            for m in 0..2 {
                g[m][n] = I * (s_inv[(m, 0)] * comps[0][n] + s_inv[(m, 1)] * comps[1][n]);
            }
        }
        for m in 0..2 {
            w[m] = solve_mode(pair.eigenvalues[m], &g[m], SolveMethod::FourierSpace)
                .map_err(|e| locate(e, j, m + 1))?
                .to_modes(n_t);
        }
        for n in 0..width {
            for r in 0..2 {
                out[r][n] = pair.s[(r, 0)] * w[0][n] + pair.s[(r, 1)] * w[1][n];
            }
        }
    }
    let mut residual: f64 = 0.0;
    for n in 0..width {
        let nn = n as f64 - n_t as f64;
        for r in 0..comps.len() {
            let mut lhs = out[r][n] * nn;
            for c in 0..comps.len() {
                lhs += qt[(r, c)] * out[c][n];
            }
            residual = residual.max((lhs - comps[r][n]).norm());
        }
    }
    let solved = match level {
        Level::Constant(_) => Level::Constant(out.into_iter().map(|c| c[0]).collect()),
        Level::Modes { .. } => Level::Modes { n_t, comps: out },
    };
    Ok((solved, residual))
}

/// Level-wise solve of (D_t + Q_j(eps)^T) U_j = F_j.
pub fn solve_system(omega: C64, family: &SymbolFamily, eps: C64, f: &CoeffTable) -> Result<SystemSolution> {
    let levels: Vec<(usize, &Level)> = f.levels().collect();
    let solved: Vec<Result<(usize, Level, f64)>> = levels
        .par_iter()
        .map(|&(j, lvl)| solve_level(omega, family, eps, j, lvl).map(|(l, r)| (j, l, r)))
        .collect();
    let mut u = CoeffTable::new(f.max_j());
    let mut residuals = BTreeMap::new();
    for s in solved {
        let (j, level, r) = s?;
        u.set_level(j, level)?;
        residuals.insert(j, r);
    }
    Ok(SystemSolution { u, residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lt2Row {
    pub ell: usize,
    pub dist: f64,
    pub lt2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Fitted M in value >= C ell^{-M}.
    pub exponent: f64,
    pub c: f64,
    pub zero_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lt2Probe {
    pub rows: Vec<Lt2Row>,
    pub dist_fit: ExponentFit,
    pub lt2_fit: ExponentFit,
}

/// |1 - e^{-2 pi i sigma}| = e^{pi Im sigma} 2 |sin(pi (r + i Im sigma))|, r the real offset.
pub fn lt2_value(r: f64, im: f64) -> f64 {
    2.0 * (PI * im).exp() * (C64::new(r, im) * PI).sin().norm()
}

pub fn lt2_probe(track: &EigenTrack, ell_range: RangeInclusive<usize>) -> Lt2Probe {
    let (lo, hi) = (*ell_range.start().max(&1), *ell_range.end());
    let rows: Vec<Lt2Row> = (lo..=hi)
        .into_par_iter()
        .map(|ell| {
            let p = track.point(ell);
            let r = match p.exact {
                Some(e) => e.offset,
                None => p.sigma.re - p.sigma.re.round(),
            };
            Lt2Row {
                ell,
                dist: p.distance(),
                lt2: lt2_value(r, p.sigma.im),
            }
        })
        .collect();
    let windows = dyadic_cover(lo, hi);
    let fit = |f: &dyn Fn(&Lt2Row) -> f64| {
        let vals: Vec<(usize, f64, bool)> = rows.iter().map(|r| (r.ell, f(r), f(r) == 0.0)).collect();
        let env = envelope(&vals, &windows, lo);
        ExponentFit {
            exponent: env.theta,
            c: env.c,
            zero_count: env.zero_count,
        }
    };
    let dist_fit = fit(&|r| r.dist);
    let lt2_fit = fit(&|r| r.lt2);
    Lt2Probe { rows, dist_fit, lt2_fit }
}

/// Max-norm distance between two solutions given by modes.
pub fn max_mode_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
