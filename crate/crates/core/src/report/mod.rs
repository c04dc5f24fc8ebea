//! Scenario-driven analysis runs and their artifacts.

mod builtins;
mod emit;
mod schema;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cf::continued_fraction;
use crate::coeff::CoeffTable;
use crate::decay::{classify_decay, DecayVerdict, DEFAULT_SLOPE_THRESHOLD};
use crate::diag::{strong_diag_profile, GrowthFit};
use crate::error::{Error, Result};
use crate::fit::dyadic_cover;
use crate::gh::{analyze_track, GhReport};
use crate::lab::{build_killer, build_witness, solve_system, KillerMode, KillerPerturbation, WitnessPair};
use crate::linalg::{C64, ONE, ZERO};
use crate::perturb::{kato_series, series_vs_direct, SeriesComparison};
use crate::symbol::{estimate_order, OrderEstimate, SymbolFamily};
use crate::track::{index_of, EigenTrack};

pub use builtins::{builtin, builtin_names, builtins};
pub use emit::{emit_report, Format};
pub use schema::{AlphaSpec, LawSpec, OutputKind, PerturbationSpec, Scenario};

pub const DIAG_TOL: f64 = 1e-12;
pub const DEMO_SEED: u64 = 0x5eed_0001;
const SERIES_JS: [u64; 3] = [8, 64, 512];
const PROFILE_J_MAX: u64 = 2048;
const DEMO_LEVELS: usize = 64;
const DEMO_NT: usize = 8;

/// Which module and parameters produced a section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub module: &'static str,
    pub operation: &'static str,
    pub parameters: BTreeMap<&'static str, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sourced<T> {
    pub source: Provenance,
    pub result: T,
}

fn sourced<T>(module: &'static str, operation: &'static str, params: &[(&'static str, Value)], result: T) -> Sourced<T> {
    Sourced {
        source: Provenance {
            module,
            operation,
            parameters: params.iter().cloned().collect(),
        },
        result,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisError {
    pub stage: String,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialModeSummary {
    pub q: String,
    pub p: String,
    pub sigma: String,
    /// gamma_q^2 or r_q in exact form.
    pub exact_value: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillerSummary {
    pub mode: KillerMode,
    pub side: crate::cf::Side,
    pub special: Vec<SpecialModeSummary>,
    pub special_ells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub epsilon: C64,
    pub track: String,
    pub gh: Sourced<GhReport>,
    pub strong_diag: Option<Sourced<GrowthFit>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub ell_picks: Vec<usize>,
    pub tau_picks: Vec<i64>,
    pub gaps: Vec<f64>,
    pub residual: f64,
    pub g_identically_zero: bool,
    pub v_decay: DecayVerdict,
    pub g_decay: DecayVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveDemoSummary {
    pub seed: u64,
    pub levels: usize,
    pub n_t: usize,
    pub max_residual: f64,
}

/// CSV payloads; kept out of report.json.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    /// (ell, j, m, sigma, dist to Z) for the first epsilon.
    pub eigen_track: Vec<(usize, u64, u8, C64, f64)>,
    /// (j, m, k, coefficient).
    pub series: Vec<(u64, u8, usize, C64)>,
    pub witness: Option<WitnessPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: Value,
    pub scenario: Scenario,
    pub order_estimate: Option<Sourced<OrderEstimate>>,
    pub killer: Option<Sourced<KillerSummary>>,
    pub epsilon_reports: Vec<EpsilonReport>,
    pub series: Option<Sourced<Vec<SeriesComparison>>>,
    pub witness: Option<Sourced<WitnessSummary>>,
    pub solve_demo: Option<Sourced<SolveDemoSummary>>,
    pub errors: Vec<AnalysisError>,
    #[serde(skip)]
    pub artifacts: Artifacts,
}

impl Report {
    /// 0 on a clean run, 2 when an analysis step failed.
    pub fn exit_code(&self) -> i32 {
        if self.errors.is_empty() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn verdicts(&self) -> Vec<crate::gh::Verdict> {
        self.epsilon_reports.iter().map(|e| e.gh.result.verdict).collect()
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Scenario::parse(&text)
}

/// Loads and analyzes a scenario file. Err only for I/O and schema problems.
pub fn run_scenario(path: &Path) -> Result<Report> {
    Ok(analyze(&load_scenario(path)?))
}

fn c_json(z: C64) -> Value {
    json!([z.re, z.im])
}

struct Run<'a> {
    sc: &'a Scenario,
    errors: Vec<AnalysisError>,
}

impl Run<'_> {
    fn fail(&mut self, stage: impl Into<String>, e: &Error) {
        self.errors.push(AnalysisError {
            stage: stage.into(),
            kind: e.kind(),
            message: e.to_string(),
        });
    }

    fn wants(&self, k: OutputKind) -> bool {
        self.sc.outputs.contains(&k)
    }
}

fn killer_summary(k: &KillerPerturbation) -> KillerSummary {
    KillerSummary {
        mode: k.mode,
        side: k.side,
        special: k
            .special
            .values()
            .map(|s| SpecialModeSummary {
                q: s.q.to_string(),
                p: s.p.to_string(),
                sigma: s.sigma.to_string(),
                exact_value: s.exact_value.to_string(),
                value: s.value,
            })
            .collect(),
        special_ells: k.special_ells(),
    }
}

/// The smallest-distance index of every fitted window.
fn window_picks(gh: &GhReport) -> Vec<(usize, Option<i64>)> {
    gh.window_data.iter().filter_map(|w| w.ell_at_min.map(|l| (l, None))).collect()
}

fn decay_windows(max_j: usize) -> Vec<crate::fit::Window> {
    dyadic_cover(1, max_j + 1)
}

pub fn analyze(sc: &Scenario) -> Report {
    let mut run = Run {
        sc,
        errors: Vec::new(),
    };
    let alpha = match sc.alpha.as_ref().map(|a| a.to_real()) {
        Some(Ok(a)) => Some(a),
        Some(Err(e)) => {
            run.fail("alpha", &e);
            None
        }
        None => None,
    };

    // family and, for killers, the construction
    let mut killer = None;
    let family: Option<SymbolFamily> = match &sc.perturbation {
        PerturbationSpec::KillerNoncommutative { count } | PerturbationSpec::KillerCommutative { count } => {
            let mode = if matches!(sc.perturbation, PerturbationSpec::KillerNoncommutative { .. }) {
                KillerMode::NonCommutative
            } else {
                KillerMode::Commutative
            };
            let built = alpha
                .as_ref()
                .ok_or(Error::RationalAlpha)
                .and_then(|a| continued_fraction(a, 2 * count + 4))
                .and_then(|cf| build_killer(&cf, mode, *count));
            match built {
                Ok(k) => {
                    let f = k.family();
                    killer = Some(k);
                    Some(f)
                }
                Err(e) => {
                    run.fail("build_killer", &e);
                    None
                }
            }
        }
        other => other.family(),
    };
    let unperturbed = sc.perturbation == PerturbationSpec::None;

    let order_estimate = match &family {
        Some(f) if !unperturbed => {
            let (lo, hi) = (16, 8192);
            match estimate_order(f, lo, hi) {
                Ok(o) => Some(sourced(
                    "symbol-core",
                    "estimate_order",
                    &[("j_min", json!(lo)), ("j_max", json!(hi))],
                    o,
                )),
                Err(e) => {
                    run.fail("estimate_order", &e);
                    None
                }
            }
        }
        _ => None,
    };

    let killer_section = killer.as_ref().map(|k| {
        let count = k.special.len();
        sourced(
            "gh-lab",
            "build_killer",
            &[("alpha", json!(k.alpha.describe())), ("count", json!(count))],
            killer_summary(k),
        )
    });

    let mut epsilon_reports = Vec::new();
    let mut first_track: Option<EigenTrack> = None;
    if let Some(family) = &family {
        for &eps in &sc.epsilon {
            let track = match (&killer, &alpha) {
                (Some(k), _) if eps == ONE => k.track(sc.ell_max),
                (None, Some(a)) if unperturbed => EigenTrack::vector_field(a, ZERO, sc.ell_max),
                _ => EigenTrack::operator(sc.omega, family, eps, sc.ell_max, DIAG_TOL),
            };
            let gh = analyze_track(&track, sc.ell_max, sc.hit_tol);
            let j_max = ((sc.ell_max / 2) as u64).min(PROFILE_J_MAX);
            let strong_diag = match strong_diag_profile(sc.omega, &family.scaled(eps), 1, j_max, DIAG_TOL) {
                Ok(p) => Some(sourced(
                    "diagonalizer",
                    "strong_diag_profile",
                    &[
                        ("omega", c_json(sc.omega)),
                        ("epsilon", c_json(eps)),
                        ("j_min", json!(1)),
                        ("j_max", json!(j_max)),
                        ("tol", json!(DIAG_TOL)),
                    ],
                    p,
                )),
                Err(e) => {
                    run.fail(format!("strong_diag_profile eps={eps}"), &e);
                    None
                }
            };
            epsilon_reports.push(EpsilonReport {
                epsilon: eps,
                track: track.label.clone(),
                gh: sourced(
                    "diophantine-gh",
                    "analyze_track",
                    &[("ell_max", json!(sc.ell_max)), ("hit_tol", json!(sc.hit_tol))],
                    gh,
                ),
                strong_diag,
            });
            first_track.get_or_insert(track);
        }
    }

    let mut artifacts = Artifacts::default();
    if let Some(t) = &first_track {
        if run.wants(OutputKind::EigenTrack) {
            artifacts.eigen_track = (1..=sc.ell_max)
                .map(|l| {
                    let (j, m) = index_of(l);
                    let p = t.point(l);
                    (l, j, m, p.sigma, p.distance())
                })
                .collect();
        }
    }

    let mut series = None;
    if let (Some(family), true) = (&family, run.wants(OutputKind::Series)) {
        let js: Vec<u64> = SERIES_JS.iter().copied().filter(|&j| j as usize <= sc.ell_max / 2).collect();
        let mut rows = Vec::new();
        for &j in &js {
            match kato_series(sc.omega, family.entries(j), j, sc.series_order) {
                Ok(ks) => {
                    for (m, coeffs) in [(1u8, &ks.sigma1), (2u8, &ks.sigma2)] {
                        for (k, c) in coeffs.iter().enumerate() {
                            artifacts.series.push((j, m, k, *c));
                        }
                    }
                }
                Err(e) => run.fail(format!("kato_series j={j}"), &e),
            }
            for &eps in &sc.epsilon {
                match series_vs_direct(sc.omega, family.entries(j), j, eps, sc.series_order, DIAG_TOL) {
                    Ok(c) => rows.push(c),
                    Err(e) => run.fail(format!("series_vs_direct j={j} eps={eps}"), &e),
                }
            }
        }
        series = Some(sourced(
            "perturbation-engine",
            "series_vs_direct",
            &[
                ("omega", c_json(sc.omega)),
                ("K", json!(sc.series_order)),
                ("j", json!(js)),
            ],
            rows,
        ));
    }

    let mut witness = None;
    if let (Some(track), true) = (&first_track, run.wants(OutputKind::Witness)) {
        let picks: Vec<(usize, Option<i64>)> = match &killer {
            Some(k) if sc.epsilon[0] == ONE => k
                .special_ells()
                .into_iter()
                .filter(|&l| l <= sc.ell_max)
                .map(|l| (l, None))
                .collect(),
            _ => window_picks(&epsilon_reports[0].gh.result),
        };
        match build_witness(track, &picks) {
            Ok(w) => {
                let windows = decay_windows(w.v.max_j());
                let summary = WitnessSummary {
                    ell_picks: w.ell_picks.clone(),
                    tau_picks: w.tau_picks.clone(),
                    gaps: w.gaps.clone(),
                    residual: w.residual(track),
                    g_identically_zero: w.g_is_zero(),
                    v_decay: classify_decay(&w.v, 0, &windows, DEFAULT_SLOPE_THRESHOLD),
                    g_decay: classify_decay(&w.g, 0, &windows, DEFAULT_SLOPE_THRESHOLD),
                };
                witness = Some(sourced(
                    "gh-lab",
                    "build_witness",
                    &[
                        ("picks", json!(picks.len())),
                        ("alpha_max", json!(0)),
                        ("slope_threshold", json!(DEFAULT_SLOPE_THRESHOLD)),
                    ],
                    summary,
                ));
                artifacts.witness = Some(w);
            }
            Err(e) => run.fail("build_witness", &e),
        }
    }

    let mut solve_demo = None;
    if let (Some(family), true) = (&family, run.wants(OutputKind::SolveDemo)) {
        let eps = sc.epsilon[0];
        let levels = DEMO_LEVELS.min(sc.ell_max / 2);
        let mut rng = ChaCha8Rng::seed_from_u64(DEMO_SEED);
        let mut f = CoeffTable::new(levels);
        for j in 1..=levels {
            let comps = (0..2)
                .map(|_| {
                    (0..2 * DEMO_NT + 1)
                        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            f.set_modes(j, DEMO_NT, comps).expect("shape");
        }
        match solve_system(sc.omega, family, eps, &f) {
            Ok(sol) => {
                solve_demo = Some(sourced(
                    "gh-lab",
                    "solve_system",
                    &[
                        ("omega", c_json(sc.omega)),
                        ("epsilon", c_json(eps)),
                        ("seed", json!(DEMO_SEED)),
                    ],
                    SolveDemoSummary {
                        seed: DEMO_SEED,
                        levels,
                        n_t: DEMO_NT,
                        max_residual: sol.max_residual(),
                    },
                ))
            }
            Err(e) => run.fail("solve_system", &e),
        }
    }

    Report {
        tool: json!({"name": "torusgh", "version": env!("CARGO_PKG_VERSION")}),
        scenario: sc.clone(),
        order_estimate,
        killer: killer_section,
        epsilon_reports,
        series,
        witness,
        solve_demo,
        errors: run.errors,
        artifacts,
    }
}
