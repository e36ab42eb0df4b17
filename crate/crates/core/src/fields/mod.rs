//! The asymptotic spaces as data: a finite log-power expansion at infinity
//! multiplied by a cutoff, plus a remainder sampled on a periodic grid.

pub mod asyf;
pub mod cutoff;
mod field;
pub mod grid;
pub mod terms;
mod vector;

pub use cutoff::Cutoff;
pub use field::{embedding_ratio, w_norm, w_norm_values, AsymptoticField, FieldError, RemainderGrid, SpaceParams};
pub use grid::{Grid, GridSpec};
pub use terms::{AsymptoticPart, AsymptoticTerm};
pub use vector::{make_divergence_free, VectorField};
