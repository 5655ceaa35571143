//! Special functions and Gaussian quadrature.

pub mod airy;
pub mod bessel;
pub mod hermite;
pub mod laguerre;
pub mod quadrature;
pub mod zeros;

pub use airy::{airy_ai, airy_negative_zero};
pub use bessel::{bessel_i0, bessel_i0_scaled, bessel_j0};
pub use hermite::{hermite_function, hermite_functions};
pub use laguerre::{laguerre_eval, psi_derivative, psi_eval, weighted_laguerre, weighted_laguerre_all, SemiclassicalPoint};
pub use quadrature::{gauss_rule, QuadratureKind, QuadratureRule};
pub use zeros::{
    edge_zero_check, laguerre_zeros, psi_edge_residual, psi_shape, psi_table, zero_counting_cdf, zero_counting_limit,
    zero_counting_sup_gap, LaguerreZeroSet, PsiShape,
};
