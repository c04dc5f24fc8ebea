//! Pairs (v, g) with (d_t + i sigma_ell) v_ell = g_ell mode by mode.

use std::collections::BTreeMap;

use crate::coeff::CoeffTable;
use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::track::{index_of, EigenTrack};

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessPair {
    pub v: CoeffTable,
    pub g: CoeffTable,
    pub tau_picks: Vec<i64>,
    pub ell_picks: Vec<usize>,
    /// |sigma_ell - tau| at each pick.
    pub gaps: Vec<f64>,
}

/// v_ell = e^{-i tau t} on each pick and 0 elsewhere, g_ell = i (sigma_ell - tau) e^{-i tau t}.
/// A missing tau defaults to the nearest integer to Re sigma_ell.
pub fn build_witness(track: &EigenTrack, picks: &[(usize, Option<i64>)]) -> Result<WitnessPair> {
    if picks.is_empty() {
        return Err(Error::EmptyPicks);
    }
    let mut by_level: BTreeMap<u64, Vec<(usize, i64, C64)>> = BTreeMap::new();
    let mut tau_picks = Vec::with_capacity(picks.len());
    let mut ell_picks = Vec::with_capacity(picks.len());
    let mut gaps = Vec::with_capacity(picks.len());
    for &(ell, tau) in picks {
        if ell == 0 {
            return Err(Error::InvalidInput("picks are indexed from ell = 1".into()));
        }
        let p = track.point(ell);
        let tau = tau.unwrap_or_else(|| p.nearest());
        let gap = p.minus_integer(tau);
        let (j, m) = index_of(ell);
        by_level.entry(j).or_default().push((m as usize - 1, tau, I * gap));
        tau_picks.push(tau);
        ell_picks.push(ell);
        gaps.push(gap.norm());
    }
    let max_j = *by_level.keys().next_back().unwrap() as usize;
    let mut v = CoeffTable::new(max_j);
    let mut g = CoeffTable::new(max_j);
    for (j, entries) in by_level {
        let n_t = entries.iter().map(|e| e.1.unsigned_abs() as usize).max().unwrap();
        let mut vc = vec![vec![ZERO; 2 * n_t + 1]; 2];
        let mut gc = vc.clone();
        for (comp, tau, coef) in entries {
            let idx = (n_t as i64 - tau) as usize;
            vc[comp][idx] = ONE;
            gc[comp][idx] = coef;
        }
        v.set_modes(j as usize, n_t, vc)?;
        g.set_modes(j as usize, n_t, gc)?;
    }
    Ok(WitnessPair {
        v,
        g,
        tau_picks,
        ell_picks,
        gaps,
    })
}

impl WitnessPair {
    /// max over picks of |i(n + sigma) v_n - g_n| at n = -tau.
    pub fn residual(&self, track: &EigenTrack) -> f64 {
        self.ell_picks
            .iter()
            .zip(&self.tau_picks)
            .map(|(&ell, &tau)| {
                let (j, m) = index_of(ell);
                let sigma = track.sigma(ell);
                let v = self.v.get(j as usize).unwrap().mode(m as usize - 1, -tau);
                let g = self.g.get(j as usize).unwrap().mode(m as usize - 1, -tau);
                (I * (sigma - tau as f64) * v - g).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn g_is_zero(&self) -> bool {
        self.g.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::TrackPoint;

    #[test]
    fn single_pick() {
        let track = EigenTrack::new("c", 16, |_, _| TrackPoint::float(C64::new(5.3, 0.0)));
        let w = build_witness(&track, &[(3, Some(5))]).unwrap();
        let g = w.g.get(2).unwrap();
        assert!((g.mode(0, -5) - C64::new(0.0, 0.3)).norm() < 1e-15);
        assert!((g.mode(0, -5).norm() - 0.3).abs() < 1e-15);
        assert_eq!(w.v.get(2).unwrap().mode(0, -5), ONE);
        assert!(w.residual(&track) < 1e-15);
        assert_eq!(w.tau_picks, vec![5]);
    }

    #[test]
    fn default_tau_and_empty() {
        let track = EigenTrack::new("c", 16, |j, _| TrackPoint::float(C64::new(j as f64 - 0.2, 0.1)));
        let w = build_witness(&track, &[(1, None), (2, None), (8, None)]).unwrap();
        assert_eq!(w.tau_picks, vec![1, 1, 4]);
        assert!(w.residual(&track) < 1e-15);
        assert!(matches!(build_witness(&track, &[]), Err(Error::EmptyPicks)));
    }
}
