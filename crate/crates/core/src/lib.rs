//! Fields on the plane with log-power expansions at infinity, the heat
//! semigroup on them, and a local Navier–Stokes solver built on a
//! Duhamel fixed point.

pub mod angular;
pub mod fields;
pub mod quadrature;
pub mod fit;
pub mod laplace;
pub mod heat;
pub mod navier_stokes;
pub mod oracle;
pub mod experiments;
pub mod cli;
