//! Monte Carlo simulation of the network seen from a typical user at the
//! origin.
//!
//! Each trial draws Poisson base stations (and users) in a disk, associates
//! every user, marks stations without other users as void, and records the
//! typical user's serving tier and SIR. Several schemes can share the same
//! layouts and link gains, so orderings between them are free of sampling
//! noise from the layout.

mod estimate;
mod layout;
mod rng;

pub use estimate::{
    compare_green_rules, estimate_association, estimate_energy, estimate_green_coverage, estimate_scheme_cdf,
    ks_statistic, simulate, AssociationEstimate, CoverageEstimate, EnergyEstimate, InteriorCount, MetricEstimate,
    RuleAgreement, SchemeCdf, SchemeSamples, SimConfig, TrialMode, TrialOutcome,
};
pub use layout::{realize, sample_realization, Choice, Layout, Realization, SimWindow, Station, CAMPBELL_TOLERANCE};
pub use rng::{LinkGains, ORIGIN_USER};
