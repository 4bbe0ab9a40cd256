//! Numerical toolkit for Hardy spaces built on Wiener amalgam spaces `(L^p, l^q)(R^d)`, d = 1, 2.
//!
//! Functions live on a periodic box `[-L, L)^d` sampled at `n` points per axis. On top of that
//! sit amalgam norms, the Poisson/heat kernel bank, Fourier multipliers and Riesz transforms,
//! harmonic and caloric extensions with their maximal functions, the Weyl half-derivative in
//! time, Cauchy-Riemann residual checks, and the Hardy-space quantities with an equivalence
//! harness. [`oracle`] holds slow independent implementations used for cross-checks.
//!
//! ```
//! use hardy_amalgam::*;
//! # fn main() -> Result<()> {
//! let spec = make_grid(1, 32.0, 4096)?;
//! let f = sample(&FunctionSpec::BandLimited { seed: 1, low: 0.125, high: 0.5 }, spec)?;
//! let e = Exponents::new(1.0, 1.0)?;
//! let tg = TimeGrid::log_spaced(1e-3, 64.0, 48)?;
//!
//! let norm = amalgam_norm(&f, e, Window::Discrete)?;
//! let hardy = hardy_norm_maximal(&f, e, &tg)?;
//! let residual = caloric_cr_residual(&caloric_lift(&f, &tg)?, HalfDerivativeMode::Spectral)?;
//! assert!(norm > 0.0 && hardy > 0.0 && residual.a_res < 1e-6);
//! # Ok(())
//! # }
//! ```

pub mod amalgam;
pub mod crsys;
pub mod error;
pub mod extension;
pub mod grid;
pub mod hardy;
pub mod kernels;
pub mod oracle;
pub mod quad;
pub mod spectral;
pub mod weyl;

pub use amalgam::{amalgam_norm, holder_gap, interpolation_gap, Exponents, Gap, Window};
pub use crsys::{
    caloric_cr_residual, harmonic_cr_residual, sup_vector_amalgam_norm, ConjugateField, Flavor,
    HalfDerivativeMode,
};
pub use error::{Error, Result};
pub use extension::{extend, ExtensionStack, KernelTag, TimeGrid};
pub use grid::{lp_norm, make_grid, sample, FunctionSpec, GridFunction, GridSpec};
pub use hardy::{
    caloric_lift, equivalence_report, harmonic_lift, hardy_norm_maximal, hardy_quantity_multiplier,
    hardy_quantity_riesz, make_atom, AtomSpec, EquivalenceReport, Method,
};
pub use kernels::{make_kernel, KernelKind};
pub use spectral::{apply_multiplier, convolve, riesz, riesz_compose, MultiplierFamily, SphereSymbol};
pub use weyl::{half_derivative_quadrature, half_derivative_spectral, time_derivative, TimeProfile};

/// Crate version, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
