//! Coulomb gas solutions of the multiple-SLE boundary system: arc diagrams,
//! meander matrices, contour integrals, limit functionals and connectivity weights.

pub mod asymptotics;
pub mod cftdata;
pub mod cli;
pub mod combinatorics;
pub mod coulomb;
pub mod error;
pub mod meander;
pub mod quadrature;
pub mod weights;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/diagrams.md")]
    pub mod diagrams {}
    #[doc = include_str!("../../../book/src/meander.md")]
    pub mod meander {}
    #[doc = include_str!("../../../book/src/speeds.md")]
    pub mod speeds {}
    #[doc = include_str!("../../../book/src/integrals.md")]
    pub mod integrals {}
    #[doc = include_str!("../../../book/src/limits.md")]
    pub mod limits {}
    #[doc = include_str!("../../../book/src/weights.md")]
    pub mod weights {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
