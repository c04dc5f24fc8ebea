//! Scenario files.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cf::RealNumber;
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::symbol::{PowerLaw, SymbolFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSpec {
    Rational([i64; 2]),
    /// a + b sqrt(d) with a, b written as "p" or "p/q".
    Quadratic { a: String, b: String, d: String },
    Decimal(String),
    LiouvilleTruncated(u32),
}

fn parse_rational(s: &str, field: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::Schema {
        pointer: format!("/alpha/quadratic/{field}"),
        message: format!("not a rational number: {s:?}"),
    })
}

impl AlphaSpec {
    pub fn to_real(&self) -> Result<RealNumber> {
        match self {
            AlphaSpec::Rational([p, q]) => {
                if *q == 0 {
                    return Err(Error::Schema {
                        pointer: "/alpha/rational/1".into(),
                        message: "zero denominator".into(),
                    });
                }
                Ok(RealNumber::rational(*p, *q))
            }
            AlphaSpec::Quadratic { a, b, d } => {
                let d = BigInt::from_str(d.trim()).map_err(|_| Error::Schema {
                    pointer: "/alpha/quadratic/d".into(),
                    message: format!("not an integer: {d:?}"),
                })?;
                RealNumber::quadratic(parse_rational(a, "a")?, parse_rational(b, "b")?, d)
            }
            AlphaSpec::Decimal(s) => RealNumber::decimal(s),
            AlphaSpec::LiouvilleTruncated(k) => Ok(RealNumber::liouville(*k)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    #[serde(default = "one")]
    pub scale: C64,
    #[serde(default)]
    pub power: f64,
}

impl LawSpec {
    pub fn law(&self) -> PowerLaw {
        PowerLaw::new(self.scale, self.power)
    }
}

fn one() -> C64 {
    ONE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationSpec {
    None,
    OffdiagGamma {
        #[serde(default = "one")]
        scale: C64,
        power: f64,
    },
    DiagonalR {
        #[serde(default = "one")]
        scale: C64,
        power: f64,
        #[serde(default)]
        r0: C64,
    },
    General {
        a: LawSpec,
        b: LawSpec,
        c: LawSpec,
        d: LawSpec,
    },
    Nilpotent {
        #[serde(default = "one")]
        scale: C64,
        power: f64,
    },
    KillerNoncommutative {
        count: usize,
    },
    KillerCommutative {
        count: usize,
    },
}

impl PerturbationSpec {
    pub fn is_killer(&self) -> bool {
        matches!(
            self,
            PerturbationSpec::KillerNoncommutative { .. } | PerturbationSpec::KillerCommutative { .. }
        )
    }

    /// Family for the non-killer kinds.
    pub fn family(&self) -> Option<SymbolFamily> {
        Some(match self {
            PerturbationSpec::None => SymbolFamily::zero(),
            PerturbationSpec::OffdiagGamma { scale, power } => SymbolFamily::offdiag(PowerLaw::new(*scale, *power)),
            PerturbationSpec::DiagonalR { scale, power, r0 } => {
                SymbolFamily::diagonal(PowerLaw::new(*scale, *power)).with_scalar_at_zero(*r0)
            }
            PerturbationSpec::General { a, b, c, d } => SymbolFamily::general(a.law(), b.law(), c.law(), d.law()),
            PerturbationSpec::Nilpotent { scale, power } => SymbolFamily::nilpotent(PowerLaw::new(*scale, *power)),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Report,
    EigenTrack,
    Series,
    Witness,
    SolveDemo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub omega: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaSpec>,
    pub perturbation: PerturbationSpec,
    pub epsilon: Vec<C64>,
    pub ell_max: usize,
    #[serde(rename = "K")]
    pub series_order: usize,
    pub outputs: Vec<OutputKind>,
    /// Distance to Z at or below which an index counts as an integer hit.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub hit_tol: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

fn schema(pointer: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut pointer = String::new();
            for seg in e.path().iter() {
                use serde_path_to_error::Segment;
                match seg {
                    Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                    Segment::Map { key } => pointer.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                    Segment::Enum { variant } => pointer.push_str(&format!("/{variant}")),
                    Segment::Unknown => pointer.push_str("/?"),
                }
            }
            schema(&pointer, e.inner().to_string())
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell_max < 64 {
            return Err(schema("/ell_max", format!("ell_max must be at least 64, got {}", self.ell_max)));
        }
        if !(1..=16).contains(&self.series_order) {
            return Err(schema("/K", format!("K must lie in [1, 16], got {}", self.series_order)));
        }
        if self.epsilon.is_empty() {
            return Err(schema("/epsilon", "at least one epsilon is required"));
        }
        let killer = self.perturbation.is_killer();
        for (i, e) in self.epsilon.iter().enumerate() {
            // killers are defined at eps = 1
            let ok = e.norm() < 1.0 || (killer && *e == ONE);
            if !ok || !e.re.is_finite() || !e.im.is_finite() {
                return Err(schema(&format!("/epsilon/{i}"), format!("|epsilon| must be < 1, got {e}")));
            }
        }
        if !(self.hit_tol >= 0.0) {
            return Err(schema("/hit_tol", "hit_tol must be non-negative"));
        }
        if let Some(a) = &self.alpha {
            let x = a.to_real()?.to_f64();
            if (self.omega - C64::new(x, 0.0)).norm() > 1e-12 * x.abs().max(1.0) {
                return Err(schema("/omega", format!("omega {} does not match alpha = {x}", self.omega)));
            }
        } else if killer {
            return Err(schema("/alpha", "killer perturbations need an exact alpha"));
        }
        if self.omega == ZERO {
            return Err(schema("/omega", "omega must be nonzero"));
        }
        if let PerturbationSpec::KillerNoncommutative { count } | PerturbationSpec::KillerCommutative { count } =
            self.perturbation
        {
            if count == 0 {
                return Err(schema("/perturbation/count", "count must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"name": "t", "omega": [1.0, 0.0], "perturbation": {"kind": "offdiag_gamma", "power": 0.5},
        "epsilon": [[0.1, 0.0]], "ell_max": 128, "K": 4, "outputs": ["report"]}"#;

    #[test]
    fn parses_and_round_trips() {
        let sc = Scenario::parse(BASE).unwrap();
        assert_eq!(sc.perturbation, PerturbationSpec::OffdiagGamma { scale: ONE, power: 0.5 });
        assert_eq!(Scenario::parse(&sc.to_json()).unwrap(), sc);
    }

    #[test]
    fn unknown_key_reports_pointer() {
        let bad = BASE.replace("\"power\": 0.5", "\"power\": 0.5, \"colour\": 1");
        match Scenario::parse(&bad) {
            Err(Error::Schema { pointer, message }) => {
                assert!(pointer.starts_with("/perturbation"), "{pointer}");
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let bad = BASE.replace("\"K\": 4", "\"K\": 4, \"extra\": true");
        assert!(matches!(Scenario::parse(&bad), Err(Error::Schema { .. })));
    }

    #[test]
    fn invariants_enforced() {
        for (from, to, ptr) in [
            ("\"ell_max\": 128", "\"ell_max\": 32", "/ell_max"),
            ("\"K\": 4", "\"K\": 17", "/K"),
            ("[[0.1, 0.0]]", "[[1.0, 0.0]]", "/epsilon/0"),
        ] {
            match Scenario::parse(&BASE.replace(from, to)) {
                Err(Error::Schema { pointer, .. }) => assert_eq!(pointer, ptr),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn alpha_forms() {
        let q = AlphaSpec::Quadratic {
            a: "1/2".into(),
            b: "1/2".into(),
            d: "5".into(),
        };
        assert!((q.to_real().unwrap().to_f64() - 1.618033988749895).abs() < 1e-15);
        let j = serde_json::to_string(&AlphaSpec::LiouvilleTruncated(6)).unwrap();
        assert_eq!(j, r#"{"liouville_truncated":6}"#);
        let r: AlphaSpec = serde_json::from_str(r#"{"rational": [3, 7]}"#).unwrap();
        assert_eq!(r, AlphaSpec::Rational([3, 7]));
    }
}
