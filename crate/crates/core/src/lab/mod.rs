//! Explicit constructions: GH-destroying perturbations, non-smooth witnesses and
//! the per-mode solvers of (d_t + i sigma) v = g.

pub mod killer;
pub mod solve;
pub mod witness;

pub use killer::{build_killer, KillerMode, KillerPerturbation, SpecialMode};
pub use solve::{lt2_probe, solve_mode, solve_system, Lt2Probe, ModeSolution, SolveMethod, SystemSolution};
pub use witness::{build_witness, WitnessPair};
