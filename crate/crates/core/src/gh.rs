//! Small-divisor envelopes, integer hits and the GH verdict of an eigenvalue track.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{dyadic_cover, least_squares, Window};
use crate::linalg::{small_divisor, C64};
use crate::track::{index_of, EigenTrack, TrackPoint};

/// Float-track values at or below this (relative to 1 + |sigma|) count as zero for a branch.
pub const BRANCH_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowMin {
    pub lo: usize,
    pub hi: usize,
    /// None when the window has no admissible index.
    pub min: Option<f64>,
    pub ell_at_min: Option<usize>,
    /// -ln(min) / ln(ell at min).
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub theta: f64,
    pub c: f64,
    pub windows: Vec<WindowMin>,
    /// Indices whose value is zero (to noise level for the branches).
    pub zero_count: usize,
    pub first_zero: Option<usize>,
    pub liouville_pattern: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineFit {
    pub c: f64,
    pub theta: f64,
    pub ell0: usize,
    pub combined: Envelope,
    /// dist(Re sigma, Z).
    pub real_branch: Envelope,
    /// |Im sigma|.
    pub imag_branch: Envelope,
    pub integer_hits: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    /// Indices below ell0 are ignored.
    pub ell0: usize,
    /// Known integer hits; excluded from the envelopes and recorded.
    pub hits: Vec<usize>,
}

/// Windows starting below this index do not enter the record-exponent test.
pub const RECORD_MIN_ELL: usize = 16;

fn record_pattern(windows: &[WindowMin]) -> bool {
    // exponents of successive record minima must climb by at least 1 over >= 3 records
    let mut records: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    for w in windows.iter().filter(|w| w.lo >= RECORD_MIN_ELL) {
        if let (Some(m), Some(e)) = (w.min, w.exponent) {
            if m < best {
                best = m;
                if records.last().is_none_or(|&r| e > r) {
                    records.push(e);
                }
            }
        }
    }
    records.len() >= 3 && records[records.len() - 1] - records[0] >= 1.0
}

pub(crate) fn envelope(values: &[(usize, f64, bool)], windows: &[Window], ell0: usize) -> Envelope {
    // values: (ell, value, is_zero), ascending in ell
    let mut per = Vec::with_capacity(windows.len());
    for w in windows {
        let lo = w.lo.max(ell0);
        let start = values.partition_point(|v| v.0 < lo);
        let end = values.partition_point(|v| v.0 < w.hi);
        let slice = &values[start.min(end)..end];
        let best = slice
            .iter()
            .filter(|v| !v.2)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        per.push(match best {
            Some(&(ell, m, _)) => WindowMin {
                lo: w.lo,
                hi: w.hi,
                min: Some(m),
                ell_at_min: Some(ell),
                exponent: (ell >= 2 && m > 0.0).then(|| -m.ln() / (ell as f64).ln()),
            },
            None => WindowMin {
                lo: w.lo,
                hi: w.hi,
                min: None,
                ell_at_min: None,
                exponent: None,
            },
        });
    }
    let pts: Vec<(f64, f64)> = per
        .iter()
        .filter_map(|w| match (w.min, w.ell_at_min) {
            (Some(m), Some(l)) if m > 0.0 => Some(((l as f64).ln(), m.ln())),
            _ => None,
        })
        .collect();
    let theta = match least_squares(&pts) {
        Some(f) => (-f.slope).max(0.0),
        None => per.iter().filter_map(|w| w.exponent).fold(0.0, f64::max),
    };
    let probed = values.iter().filter(|v| v.0 >= ell0 && windows.iter().any(|w| w.contains(v.0)));
    let mut c = f64::INFINITY;
    let mut zero_count = 0;
    let mut first_zero = None;
    for &(ell, v, z) in probed {
        if z {
            zero_count += 1;
            first_zero.get_or_insert(ell);
            continue;
        }
        let scaled = if theta == 0.0 { v } else { v * (ell as f64).powf(theta) };
        c = c.min(scaled);
    }
    if !c.is_finite() {
        c = 0.0;
    }
    Envelope {
        theta,
        c,
        liouville_pattern: record_pattern(&per),
        windows: per,
        zero_count,
        first_zero,
    }
}

struct Sampled {
    combined: Vec<(usize, f64, bool)>,
    real: Vec<(usize, f64, bool)>,
    imag: Vec<(usize, f64, bool)>,
}

fn sample(track: &EigenTrack, windows: &[Window], ell0: usize, skip: &BTreeSet<usize>) -> Sampled {
    let mut ells: Vec<usize> = windows
        .iter()
        .flat_map(|w| w.lo.max(ell0).max(1)..w.hi)
        .filter(|l| !skip.contains(l))
        .collect();
    ells.sort_unstable();
    ells.dedup();
    let pts: Vec<(usize, TrackPoint)> = ells.par_iter().map(|&l| (l, track.point(l))).collect();
    // exact tracks report true distances, so only float tracks get a noise floor
    let floor = |p: &TrackPoint| match p.exact {
        Some(_) => 0.0,
        None => BRANCH_NOISE * (1.0 + p.sigma.norm()),
    };
    Sampled {
        combined: pts.iter().map(|(l, p)| (*l, p.distance(), p.distance() == 0.0)).collect(),
        real: pts
            .iter()
            .map(|(l, p)| (*l, p.real_distance(), p.real_distance() <= floor(p)))
            .collect(),
        imag: pts
            .iter()
            .map(|(l, p)| (*l, p.imag_abs(), p.imag_abs() <= floor(p)))
            .collect(),
    }
}

/// Envelope fit d_ell >= C ell^{-theta} over the windows; fails on an exact hit.
pub fn diophantine_fit(track: &EigenTrack, windows: &[Window]) -> Result<DiophantineFit> {
    let fit = diophantine_fit_with(track, windows, &FitOptions::default());
    match fit.combined.first_zero {
        Some(ell) => Err(Error::IntegerHit { ell }),
        None => Ok(fit),
    }
}

pub fn diophantine_fit_with(track: &EigenTrack, windows: &[Window], opts: &FitOptions) -> DiophantineFit {
    let skip: BTreeSet<usize> = opts.hits.iter().copied().collect();
    let s = sample(track, windows, opts.ell0, &skip);
    let combined = envelope(&s.combined, windows, opts.ell0);
    DiophantineFit {
        c: combined.c,
        theta: combined.theta,
        ell0: opts.ell0,
        real_branch: envelope(&s.real, windows, opts.ell0),
        imag_branch: envelope(&s.imag, windows, opts.ell0),
        combined,
        integer_hits: opts.hits.clone(),
    }
}

/// All 1 <= ell <= ell_max with dist(sigma_ell, Z) <= tol (tol = 0: exact hits only).
pub fn gamma_q_scan(track: &EigenTrack, ell_max: usize, tol: f64) -> Vec<usize> {
    (1..=ell_max)
        .into_par_iter()
        .filter(|&l| track.point(l).is_integer_hit(tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[allow(non_camel_case_types)]
pub enum Verdict {
    GH_TypeI,
    GH_TypeII,
    NotGH_IntegerHits,
    NotGH_LiouvillePattern,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelZero {
    pub sigma: C64,
    pub is_integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhReport {
    pub verdict: Verdict,
    pub fitted_c: f64,
    pub fitted_theta: f64,
    pub ell0: usize,
    pub gamma_q_hits: Vec<usize>,
    pub window_data: Vec<WindowMin>,
    pub real_branch: BranchSummary,
    pub imag_branch: BranchSummary,
    pub level_zero: Option<LevelZero>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSummary {
    pub theta: f64,
    pub c: f64,
    pub zero_count: usize,
    pub liouville_pattern: bool,
}

impl From<&Envelope> for BranchSummary {
    fn from(e: &Envelope) -> Self {
        BranchSummary {
            theta: e.theta,
            c: e.c,
            zero_count: e.zero_count,
            liouville_pattern: e.liouville_pattern,
        }
    }
}

/// Hits spread over at least this many dyadic j-bands count as an infinite family.
pub const PERSISTENT_BANDS: usize = 3;

/// Number of distinct dyadic bands [2^k, 2^{k+1}) of j occupied by the hits.
pub fn hit_bands(hits: &[usize]) -> usize {
    hits.iter()
        .map(|&l| 63 - index_of(l).0.leading_zeros())
        .collect::<BTreeSet<_>>()
        .len()
}

pub fn classify_gh_type(track: &EigenTrack, fit: &DiophantineFit) -> GhReport {
    let mut notes = Vec::new();
    let hits = fit.integer_hits.clone();
    let level_zero = track.level_zero.map(|s| LevelZero {
        sigma: s,
        is_integer: small_divisor(s) == 0.0,
    });
    if let Some(lz) = &level_zero {
        if lz.is_integer {
            notes.push(format!("level 0 eigenvalue {} is an integer: constant-in-x kernel", lz.sigma));
        }
    }
    let bands = hit_bands(&hits);
    let verdict = if !hits.is_empty() && bands >= PERSISTENT_BANDS {
        notes.push(format!(
            "{} exact integer eigenvalue(s) spread over {bands} dyadic bands of j",
            hits.len()
        ));
        Verdict::NotGH_IntegerHits
    } else if fit.combined.liouville_pattern {
        notes.push("window-minimum exponents keep climbing (heuristic at finite scale)".into());
        Verdict::NotGH_LiouvillePattern
    } else if fit.imag_branch.zero_count == 0 && !fit.imag_branch.liouville_pattern {
        Verdict::GH_TypeII
    } else if fit.real_branch.zero_count == 0 && !fit.real_branch.liouville_pattern {
        Verdict::GH_TypeI
    } else {
        notes.push("neither branch is bounded away from zero on every window".into());
        Verdict::Undecided
    };
    if !hits.is_empty() && verdict != Verdict::NotGH_IntegerHits {
        notes.push(format!("finitely many integer hits {hits:?}; envelope fitted for ell >= {}", fit.ell0));
    }
    GhReport {
        verdict,
        fitted_c: fit.c,
        fitted_theta: fit.theta,
        ell0: fit.ell0,
        gamma_q_hits: hits,
        window_data: fit.combined.windows.clone(),
        real_branch: (&fit.real_branch).into(),
        imag_branch: (&fit.imag_branch).into(),
        level_zero,
        notes,
    }
}

/// Scan, fit and classify a track over 1..=ell_max with dyadic windows.
pub fn analyze_track(track: &EigenTrack, ell_max: usize, hit_tol: f64) -> GhReport {
    let hits = gamma_q_scan(track, ell_max, hit_tol);
    let persistent = hit_bands(&hits) >= PERSISTENT_BANDS;
    let ell0 = if hits.is_empty() || persistent {
        1
    } else {
        hits.last().unwrap() + 1
    };
    let windows = dyadic_cover(1, ell_max);
    let fit = diophantine_fit_with(track, &windows, &FitOptions { ell0, hits });
    classify_gh_type(track, &fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::RealNumber;
    use crate::fit::dyadic_cover;
    use crate::linalg::I;

    #[test]
    fn half_offset_track() {
        let t = EigenTrack::from_ell_fn("l+1/2", 4096, |l| C64::new(l as f64 + 0.5, 0.0));
        let f = diophantine_fit(&t, &dyadic_cover(1, 4096)).unwrap();
        assert_eq!(f.theta, 0.0);
        assert_eq!(f.c, 0.5);
        assert!(gamma_q_scan(&t, 4096, 0.0).is_empty());
    }

    #[test]
    fn exact_hit_is_reported() {
        let t = EigenTrack::from_ell_fn("hit", 100, |l| C64::new(if l == 37 { 5.0 } else { 0.25 }, 0.0));
        assert_eq!(diophantine_fit(&t, &dyadic_cover(1, 100)), Err(Error::IntegerHit { ell: 37 }));
        assert_eq!(gamma_q_scan(&t, 100, 0.0), vec![37]);
    }

    #[test]
    fn type_examples() {
        let t = EigenTrack::from_ell_fn("i l", 4096, |l| I * l as f64);
        assert_eq!(analyze_track(&t, 4096, 0.0).verdict, Verdict::GH_TypeII);
        let g = EigenTrack::vector_field(&RealNumber::golden(), C64::new(0.0, 0.0), 4096);
        let r = analyze_track(&g, 4096, 0.0);
        assert_eq!(r.verdict, Verdict::GH_TypeI);
        assert!(r.fitted_theta > 0.8 && r.fitted_theta < 1.2, "{}", r.fitted_theta);
    }

    #[test]
    fn sparse_hits_only_shift_ell0() {
        let t = EigenTrack::from_ell_fn("one hit", 512, |l| {
            C64::new(if l == 9 { 3.0 } else { l as f64 + 0.5 }, 0.0)
        });
        let r = analyze_track(&t, 512, 0.0);
        assert_eq!(r.gamma_q_hits, vec![9]);
        assert_eq!(r.ell0, 10);
        assert_eq!(r.verdict, Verdict::GH_TypeI);
    }

    #[test]
    fn envelope_holds_pointwise() {
        let g = EigenTrack::vector_field(&RealNumber::sqrt2(), C64::new(0.0, 0.0), 5000);
        let f = diophantine_fit(&g, &dyadic_cover(1, 5000)).unwrap();
        for l in 1..5000 {
            assert!(g.point(l).distance() >= f.c * (l as f64).powf(-f.theta) * (1.0 - 1e-12));
        }
    }
}
