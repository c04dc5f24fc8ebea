//! Built-in scenarios.

use super::schema::{AlphaSpec, OutputKind, PerturbationSpec, Scenario};
use crate::linalg::{C64, I, ONE, ZERO};

fn omega_of(alpha: &AlphaSpec) -> C64 {
    C64::new(alpha.to_real().expect("builtin alpha").to_f64(), 0.0)
}

fn golden() -> AlphaSpec {
    AlphaSpec::Quadratic {
        a: "1/2".into(),
        b: "1/2".into(),
        d: "5".into(),
    }
}

fn sqrt2() -> AlphaSpec {
    AlphaSpec::Quadratic {
        a: "0".into(),
        b: "1".into(),
        d: "2".into(),
    }
}

fn with_alpha(
    name: &str,
    alpha: AlphaSpec,
    perturbation: PerturbationSpec,
    epsilon: Vec<C64>,
    ell_max: usize,
    outputs: Vec<OutputKind>,
) -> Scenario {
    Scenario {
        name: name.into(),
        omega: omega_of(&alpha),
        alpha: Some(alpha),
        perturbation,
        epsilon,
        ell_max,
        series_order: 8,
        outputs,
        hit_tol: 0.0,
    }
}

fn plain(
    name: &str,
    omega: C64,
    perturbation: PerturbationSpec,
    epsilon: Vec<C64>,
    ell_max: usize,
    outputs: Vec<OutputKind>,
) -> Scenario {
    Scenario {
        name: name.into(),
        omega,
        alpha: None,
        perturbation,
        epsilon,
        ell_max,
        series_order: 8,
        outputs,
        hit_tol: 0.0,
    }
}

pub fn builtins() -> Vec<Scenario> {
    use OutputKind::*;
    let sqrt_gamma = PerturbationSpec::OffdiagGamma { scale: ONE, power: 0.5 };
    vec![
        with_alpha(
            "gw_vectorfield_goldenratio",
            golden(),
            PerturbationSpec::None,
            vec![ZERO],
            32768,
            vec![Report, EigenTrack, Witness],
        ),
        with_alpha(
            "gw_vectorfield_sqrt2",
            sqrt2(),
            PerturbationSpec::None,
            vec![ZERO],
            32768,
            vec![Report, EigenTrack],
        ),
        with_alpha(
            "liouville_vectorfield",
            AlphaSpec::LiouvilleTruncated(6),
            PerturbationSpec::None,
            vec![ZERO],
            1 << 21,
            vec![Report, Witness],
        ),
        with_alpha(
            "killer_sqrt2_noncommutative",
            sqrt2(),
            PerturbationSpec::KillerNoncommutative { count: 6 },
            vec![ONE],
            32768,
            vec![Report, EigenTrack, Witness],
        ),
        with_alpha(
            "killer_sqrt2_commutative",
            sqrt2(),
            PerturbationSpec::KillerCommutative { count: 4 },
            vec![ONE],
            32768,
            vec![Report, EigenTrack, Witness],
        ),
        with_alpha(
            "killer_golden_noncommutative",
            golden(),
            PerturbationSpec::KillerNoncommutative { count: 8 },
            vec![ONE],
            4096,
            vec![Report, Witness],
        ),
        plain(
            "beta_nonzero_offdiag",
            I,
            sqrt_gamma.clone(),
            vec![C64::new(0.5, 0.0), C64::new(0.9, 0.0)],
            16384,
            vec![Report, Series, SolveDemo],
        ),
        plain(
            "nilpotent_sweep_golden",
            omega_of(&golden()),
            PerturbationSpec::Nilpotent { scale: ONE, power: 0.5 },
            vec![ZERO, C64::new(0.3, 0.0), C64::new(0.7, 0.0)],
            32768,
            vec![Report],
        ),
        plain(
            "symmetric_offdiag_unitary",
            omega_of(&sqrt2()),
            sqrt_gamma.clone(),
            vec![C64::new(0.2, 0.0)],
            8192,
            vec![Report, Series, SolveDemo],
        ),
        plain(
            "series_sqrt_gamma",
            ONE,
            sqrt_gamma,
            vec![C64::new(0.05, 0.0)],
            2048,
            vec![Report, Series],
        ),
    ]
}

pub fn builtin_names() -> Vec<String> {
    builtins().into_iter().map(|s| s.name).collect()
}

pub fn builtin(name: &str) -> Option<Scenario> {
    builtins().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate_and_round_trip() {
        for sc in builtins() {
            sc.validate().unwrap_or_else(|e| panic!("{}: {e}", sc.name));
            assert_eq!(Scenario::parse(&sc.to_json()).unwrap(), sc, "{}", sc.name);
        }
    }
}
