//! Numerics for the inverse tempered stable subordinator
//! `E_λ(t) = inf{u > 0 : D_λ(u) > t}`, where `D_λ` has Laplace symbol
//! `Ψ(s) = (s+λ)^β − λ^β`.

mod contour;
pub mod error;
pub mod its_density;
pub mod moments;
pub mod montecarlo;
pub mod pde_check;
pub mod quadrature;
pub mod registry;
pub mod selfcheck;
pub mod special_fn;
pub mod stable_family;

pub use error::{Error, Result};
pub use stable_family::TemperedStableParams;
