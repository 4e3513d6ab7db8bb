//! Numerical kernels: adaptive quadrature, bracketed roots and the
//! ρ coverage integrals.

pub mod quadrature;
pub mod roots;
pub mod special;

pub use quadrature::{integrate, integrate_semi_infinite, QuadratureConfig};
pub use roots::{find_root, log_space, scan_bracket, RootConfig};
pub use special::{rho_const, rho_excl, rho_full, rho_tail, safe_acos};
