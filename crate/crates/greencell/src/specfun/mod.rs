//! Special functions and numerical building blocks: gamma functions, the
//! two interference kernels, adaptive quadrature, Laplace inversion and
//! expectation nodes for channel gains.

mod gamma;
mod kernels;
mod laplace;
mod nodes;
mod quad;

pub use gamma::{gamma, ln_gamma, upper_incomplete_gamma};
pub use kernels::{ell, ell_complex, ell_first_form, ell_second_form, hbar, hbar_complex};
pub use laplace::{inverse_laplace, inverse_laplace_cdf, IltOutcome, IltSpec};
pub use nodes::GainNodes;
pub use quad::{integrate, Domain, Integral, Quadrature};
