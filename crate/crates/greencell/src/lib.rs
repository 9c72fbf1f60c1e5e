//! Green cell association in K-tier Poisson heterogeneous networks.
//!
//! Analytic association statistics, green coverage probability and energy
//! efficiency for power-law cell association, with a Monte Carlo simulator
//! that reproduces each quantity on sampled layouts. The guide in `book/`
//! walks through the model; its code blocks run as doc-tests.
//!
//! ```
//! use greencell::association::AssociationScheme;
//! use greencell::coverage::{Bound, CoverageAnalyzer, VoidModel};
//! use greencell::model::{NetworkConfig, M2_PER_KM2};
//!
//! let net = NetworkConfig::table_ii(370.0 / M2_PER_KM2);
//! let gca = CoverageAnalyzer::new(&AssociationScheme::gca(), &net).unwrap();
//! let rho = gca.green_coverage(0.1, Bound::Lower, VoidModel::Analytic).unwrap().rho;
//! assert!(rho > 0.5 && rho < 0.7);
//! ```

pub mod association;
pub mod coverage;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod model;
pub mod montecarlo;
pub mod specfun;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/network-model.md")]
    pub struct NetworkModel;
    #[doc = include_str!("../../../book/src/association.md")]
    pub struct Association;
    #[doc = include_str!("../../../book/src/coverage.md")]
    pub struct Coverage;
    #[doc = include_str!("../../../book/src/energy.md")]
    pub struct Energy;
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    pub struct MonteCarlo;
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub struct Experiments;
}
