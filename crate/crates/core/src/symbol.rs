//! Matrix symbols R_j of x-invariant operators on the circle.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffTable, Level};
use crate::error::{Error, Result};
use crate::fit::log_log_fit;
use crate::linalg::{dx_symbol, mat2, max_norm, Mat2, C64, ZERO};

/// c * j^p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub scale: C64,
    pub power: f64,
}

impl PowerLaw {
    pub fn new(scale: C64, power: f64) -> Self {
        PowerLaw { scale, power }
    }

    pub fn constant(c: C64) -> Self {
        PowerLaw { scale: c, power: 0.0 }
    }

    pub fn sqrt() -> Self {
        PowerLaw::new(C64::new(1.0, 0.0), 0.5)
    }

    pub fn eval(&self, j: u64) -> C64 {
        if self.power == 0.0 {
            self.scale
        } else if self.power == 0.5 {
            self.scale * (j as f64).sqrt()
        } else {
            self.scale * (j as f64).powf(self.power)
        }
    }

    fn exponent(&self) -> f64 {
        if self.scale == ZERO {
            0.0
        } else {
            self.power
        }
    }
}

type EntryRule = dyn Fn(u64) -> [C64; 4] + Send + Sync;

/// Symbol R_0 (scalar) and j -> R_j = [[a, b], [c, d]] for j >= 1.
#[derive(Clone)]
pub struct SymbolFamily {
    pub scalar_at_zero: C64,
    pub declared_delta: f64,
    pub description: String,
    rule: Arc<EntryRule>,
}

impl fmt::Debug for SymbolFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolFamily")
            .field("description", &self.description)
            .field("declared_delta", &self.declared_delta)
            .field("scalar_at_zero", &self.scalar_at_zero)
            .finish()
    }
}

/// Value of the symbol at a level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolValue {
    Scalar(C64),
    Matrix(Mat2),
}

impl SymbolFamily {
    pub fn from_rule(
        description: impl Into<String>,
        declared_delta: f64,
        scalar_at_zero: C64,
        rule: impl Fn(u64) -> [C64; 4] + Send + Sync + 'static,
    ) -> Self {
        SymbolFamily {
            scalar_at_zero,
            declared_delta,
            description: description.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn zero() -> Self {
        Self::from_rule("zero", 0.0, ZERO, |_| [ZERO; 4])
    }

    /// [[0, gamma_j], [gamma_j, 0]].
    pub fn offdiag(gamma: PowerLaw) -> Self {
        Self::from_rule(
            format!("offdiag gamma_j = ({})*j^{}", gamma.scale, gamma.power),
            gamma.exponent(),
            ZERO,
            move |j| {
                let g = gamma.eval(j);
                [ZERO, g, g, ZERO]
            },
        )
    }

    /// r_j times the identity.
    pub fn diagonal(r: PowerLaw) -> Self {
        Self::from_rule(
            format!("diagonal r_j = ({})*j^{}", r.scale, r.power),
            r.exponent(),
            r.scale,
            move |j| {
                let v = r.eval(j);
                [v, ZERO, ZERO, v]
            },
        )
    }

    pub fn general(a: PowerLaw, b: PowerLaw, c: PowerLaw, d: PowerLaw) -> Self {
        let delta = [a, b, c, d].iter().map(PowerLaw::exponent).fold(f64::MIN, f64::max);
        Self::from_rule("general", delta, ZERO, move |j| {
            [a.eval(j), b.eval(j), c.eval(j), d.eval(j)]
        })
    }

    /// [[0, 0], [c_j, 0]].
    pub fn nilpotent(c: PowerLaw) -> Self {
        Self::from_rule(
            format!("nilpotent c_j = ({})*j^{}", c.scale, c.power),
            c.exponent(),
            ZERO,
            move |j| [ZERO, ZERO, c.eval(j), ZERO],
        )
    }

    pub fn with_scalar_at_zero(mut self, r0: C64) -> Self {
        self.scalar_at_zero = r0;
        self
    }

    pub fn entries(&self, j: u64) -> [C64; 4] {
        (self.rule)(j)
    }

    /// R_j for j >= 1.
    pub fn matrix(&self, j: u64) -> Mat2 {
        let [a, b, c, d] = self.entries(j);
        mat2(a, b, c, d)
    }

    /// eps * R.
    pub fn scaled(&self, eps: C64) -> SymbolFamily {
        let inner = self.rule.clone();
        SymbolFamily {
            scalar_at_zero: self.scalar_at_zero * eps,
            declared_delta: self.declared_delta,
            description: format!("({eps}) * {}", self.description),
            rule: Arc::new(move |j| inner(j).map(|z| z * eps)),
        }
    }

    /// Same family with probed levels cached.
    pub fn memoized(&self) -> SymbolFamily {
        let inner = self.rule.clone();
        let cache: Arc<RwLock<HashMap<u64, [C64; 4]>>> = Arc::default();
        SymbolFamily {
            scalar_at_zero: self.scalar_at_zero,
            declared_delta: self.declared_delta,
            description: self.description.clone(),
            rule: Arc::new(move |j| {
                if let Some(v) = cache.read().ok().and_then(|m| m.get(&j).copied()) {
                    return v;
                }
                let v = inner(j);
                if let Ok(mut m) = cache.write() {
                    m.insert(j, v);
                }
                v
            }),
        }
    }
}

pub fn symbol_at(family: &SymbolFamily, j: u64) -> SymbolValue {
    if j == 0 {
        SymbolValue::Scalar(family.scalar_at_zero)
    } else {
        SymbolValue::Matrix(family.matrix(j))
    }
}

/// D_j = diag(-j, j).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagSymbol {
    pub j: u64,
}

impl DiagSymbol {
    pub fn matrix(&self) -> Mat2 {
        dx_symbol(self.j)
    }
}

/// Coefficient action of R: level j maps to R_j^T u_j, level 0 to R_0 u_0.
pub fn apply_symbol(family: &SymbolFamily, u: &CoeffTable) -> Result<CoeffTable> {
    let mut out = CoeffTable::new(u.max_j());
    for (j, level) in u.levels() {
        let apply = |v: &[C64]| -> Vec<C64> {
            if j == 0 {
                vec![family.scalar_at_zero * v[0]]
            } else {
                let m = family.matrix(j as u64).transpose();
                vec![m[(0, 0)] * v[0] + m[(0, 1)] * v[1], m[(1, 0)] * v[0] + m[(1, 1)] * v[1]]
            }
        };
        let mapped = match level {
            Level::Constant(v) => Level::Constant(apply(v)),
            Level::Modes { n_t, comps } => {
                let width = 2 * n_t + 1;
                let mut new_comps = vec![vec![ZERO; width]; comps.len()];
                for n in 0..width {
                    let col: Vec<C64> = comps.iter().map(|c| c[n]).collect();
                    for (k, z) in apply(&col).into_iter().enumerate() {
                        new_comps[k][n] = z;
                    }
                }
                Level::Modes {
                    n_t: *n_t,
                    comps: new_comps,
                }
            }
        };
        out.set_level(j, mapped)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Log-log fit of the max-entry norm of R_j over j_min..=j_max.
pub fn estimate_order(family: &SymbolFamily, j_min: u64, j_max: u64) -> Result<OrderEstimate> {
    if j_min < 1 || j_min >= j_max {
        return Err(Error::ParameterOutOfRange(format!(
            "order fit needs 1 <= j_min < j_max, got [{j_min}, {j_max}]"
        )));
    }
    let pts: Vec<(f64, f64)> = (j_min..=j_max)
        .map(|j| (j as f64, max_norm(&family.matrix(j))))
        .filter(|p| p.1 > 0.0)
        .collect();
    if pts.is_empty() {
        return Err(Error::ZeroSymbol { j_min, j_max });
    }
    if pts.len() == 1 {
        return Ok(OrderEstimate {
            slope: 0.0,
            intercept: pts[0].1.ln(),
            residual: 0.0,
        });
    }
    let f = log_log_fit(&pts).ok_or(Error::ZeroSymbol { j_min, j_max })?;
    Ok(OrderEstimate {
        slope: f.slope,
        intercept: f.intercept,
        residual: f.residual,
    })
}

/// D_j R_j - R_j D_j.
pub fn commutator_with_dx(family: &SymbolFamily, j: u64) -> Mat2 {
    let d = dx_symbol(j);
    let r = family.matrix(j);
    d * r - r * d
}

pub fn normality_check(m: &Mat2, tol: f64) -> bool {
    let h = m.adjoint();
    max_norm(&(m * h - h * m)) <= tol
}
