//! Pathwise solver for Young differential delay equations
//! `dx = f(x_t) dt + g(x_t) dω` driven by ν-Hölder paths with ν > 1/2.

pub mod cli;
pub mod coefficients;
pub mod driver;
pub mod emit;
pub mod error;
pub mod path;
pub mod scenario;
pub mod sensitivity;
pub mod solver;
pub mod verify;
pub mod young;

pub use error::{Error, Result};
pub use path::{segment, GridPath, NormReport, Segment, SegmentView, Witness};
