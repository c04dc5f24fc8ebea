//! Global hypoellipticity of D_t + omega D_x + eps R on the 2-torus, studied through
//! the 2x2 matrix symbols of R.

pub mod cf;
pub mod coeff;
pub mod decay;
pub mod diag;
pub mod error;
pub mod exact;
pub mod fit;
pub mod gh;
pub mod lab;
pub mod linalg;
pub mod perturb;
pub mod report;
pub mod symbol;
pub mod track;

pub use error::{Error, Result};
