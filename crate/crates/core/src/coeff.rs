//! Fourier coefficient tables on the torus.
//!
//! Level j carries the coefficients against e^{-ijx}, e^{ijx} (level 0 carries the
//! constant mode only). Each coefficient is either a number or a trigonometric
//! polynomial in t stored by its modes n = -n_t..=n_t.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

pub fn level_dim(j: usize) -> usize {
    if j == 0 {
        1
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Level {
    Constant(Vec<C64>),
    Modes { n_t: usize, comps: Vec<Vec<C64>> },
}

impl Level {
    pub fn dim(&self) -> usize {
        match self {
            Level::Constant(v) => v.len(),
            Level::Modes { comps, .. } => comps.len(),
        }
    }

    pub fn n_t(&self) -> usize {
        match self {
            Level::Constant(_) => 0,
            Level::Modes { n_t, .. } => *n_t,
        }
    }

    /// Squared L^2(T_t) norm summed over components (t-average normalization).
    pub fn norm_sq(&self) -> f64 {
        match self {
            Level::Constant(v) => v.iter().map(|z| z.norm_sqr()).sum(),
            Level::Modes { comps, .. } => comps.iter().flatten().map(|z| z.norm_sqr()).sum(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Level::Constant(v) => v.iter().all(|z| *z == ZERO),
            Level::Modes { comps, .. } => comps.iter().flatten().all(|z| *z == ZERO),
        }
    }

    /// Mode vectors of every component, widening constants to n_t = 0.
    pub fn as_modes(&self) -> (usize, Vec<Vec<C64>>) {
        match self {
            Level::Constant(v) => (0, v.iter().map(|z| vec![*z]).collect()),
            Level::Modes { n_t, comps } => (*n_t, comps.clone()),
        }
    }

    /// Component k, mode n (zero outside the stored band).
    pub fn mode(&self, k: usize, n: i64) -> C64 {
        match self {
            Level::Constant(v) => {
                if n == 0 {
                    v[k]
                } else {
                    ZERO
                }
            }
            Level::Modes { n_t, comps } => {
                let idx = n + *n_t as i64;
                if idx < 0 || idx as usize >= comps[k].len() {
                    ZERO
                } else {
                    comps[k][idx as usize]
                }
            }
        }
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Level {
        match self {
            Level::Constant(v) => Level::Constant(v.iter().map(|&z| f(z)).collect()),
            Level::Modes { n_t, comps } => Level::Modes {
                n_t: *n_t,
                comps: comps.iter().map(|c| c.iter().map(|&z| f(z)).collect()).collect(),
            },
        }
    }
}

/// Sparse table of levels 0..=max_j; absent levels are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoeffTable {
    max_j: usize,
    levels: BTreeMap<usize, Level>,
}

impl CoeffTable {
    pub fn new(max_j: usize) -> Self {
        CoeffTable {
            max_j,
            levels: BTreeMap::new(),
        }
    }

    pub fn max_j(&self) -> usize {
        self.max_j
    }

    fn check(&self, j: usize, dim: usize) -> Result<()> {
        if j > self.max_j {
            return Err(Error::InvalidInput(format!("level {j} beyond max_j {}", self.max_j)));
        }
        if dim != level_dim(j) {
            return Err(Error::ShapeMismatch {
                level: j,
                expected: level_dim(j),
                found: dim,
            });
        }
        Ok(())
    }

    pub fn set_constant(&mut self, j: usize, values: Vec<C64>) -> Result<()> {
        self.check(j, values.len())?;
        self.levels.insert(j, Level::Constant(values));
        Ok(())
    }

    pub fn set_modes(&mut self, j: usize, n_t: usize, comps: Vec<Vec<C64>>) -> Result<()> {
        self.check(j, comps.len())?;
        if let Some(c) = comps.iter().find(|c| c.len() != 2 * n_t + 1) {
            return Err(Error::InvalidInput(format!(
                "level {j}: mode vector of length {} does not match n_t = {n_t}",
                c.len()
            )));
        }
        self.levels.insert(j, Level::Modes { n_t, comps });
        Ok(())
    }

    pub fn set_level(&mut self, j: usize, level: Level) -> Result<()> {
        match level {
            Level::Constant(v) => self.set_constant(j, v),
            Level::Modes { n_t, comps } => self.set_modes(j, n_t, comps),
        }
    }

    pub fn get(&self, j: usize) -> Option<&Level> {
        self.levels.get(&j)
    }

    pub fn levels(&self) -> impl Iterator<Item = (usize, &Level)> {
        self.levels.iter().map(|(j, l)| (*j, l))
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn is_x_only(&self) -> bool {
        self.levels.values().all(|l| matches!(l, Level::Constant(_)))
    }

    pub fn is_zero(&self) -> bool {
        self.levels.values().all(Level::is_zero)
    }

    pub fn scaled(&self, c: C64) -> CoeffTable {
        CoeffTable {
            max_j: self.max_j,
            levels: self.levels.iter().map(|(j, l)| (*j, l.map(|z| z * c))).collect(),
        }
    }

    /// a * self + b * other, level by level.
    pub fn combine(&self, a: C64, other: &CoeffTable, b: C64) -> CoeffTable {
        let mut out = CoeffTable::new(self.max_j.max(other.max_j));
        let keys: std::collections::BTreeSet<usize> =
            self.levels.keys().chain(other.levels.keys()).copied().collect();
        for j in keys {
            let x = self.levels.get(&j);
            let y = other.levels.get(&j);
            let level = match (x, y) {
                (Some(Level::Constant(u)), Some(Level::Constant(v))) => {
                    Level::Constant(u.iter().zip(v).map(|(p, q)| a * p + b * q).collect())
                }
                (Some(l), None) => l.map(|z| a * z),
                (None, Some(l)) => l.map(|z| b * z),
                (Some(l1), Some(l2)) => {
                    let n_t = l1.n_t().max(l2.n_t());
                    let comps = (0..level_dim(j))
                        .map(|k| {
                            (-(n_t as i64)..=n_t as i64)
                                .map(|n| a * l1.mode(k, n) + b * l2.mode(k, n))
                                .collect()
                        })
                        .collect();
                    Level::Modes { n_t, comps }
                }
                (None, None) => unreachable!(),
            };
            out.levels.insert(j, level);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_rules() {
        let mut t = CoeffTable::new(4);
        assert!(t.set_constant(0, vec![ZERO]).is_ok());
        assert_eq!(
            t.set_constant(0, vec![ZERO, ZERO]),
            Err(Error::ShapeMismatch {
                level: 0,
                expected: 1,
                found: 2
            })
        );
        assert!(t.set_constant(3, vec![ZERO]).is_err());
        assert!(t.set_constant(5, vec![ZERO, ZERO]).is_err());
        assert!(t.set_modes(2, 1, vec![vec![ZERO; 3], vec![ZERO; 2]]).is_err());
        assert!(t.set_modes(2, 1, vec![vec![ZERO; 3], vec![ZERO; 3]]).is_ok());
    }

    #[test]
    fn combine_mixes_constant_and_modes() {
        let mut u = CoeffTable::new(2);
        u.set_constant(1, vec![C64::new(1.0, 0.0), ZERO]).unwrap();
        let mut v = CoeffTable::new(2);
        v.set_modes(1, 1, vec![vec![ZERO, C64::new(2.0, 0.0), C64::new(3.0, 0.0)], vec![ZERO; 3]])
            .unwrap();
        let w = u.combine(C64::new(2.0, 0.0), &v, C64::new(1.0, 0.0));
        let l = w.get(1).unwrap();
        assert_eq!(l.mode(0, 0), C64::new(4.0, 0.0));
        assert_eq!(l.mode(0, 1), C64::new(3.0, 0.0));
        assert_eq!(l.mode(0, 5), ZERO);
    }
}
