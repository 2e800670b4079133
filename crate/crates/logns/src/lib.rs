//! Numerical laboratory for the logarithmic Schrödinger equation
//! `-Δu + λu = u log u²` posed on waveguide domains `R^d × T^n`.
//!
//! The crate computes mass-constrained ground states of the anisotropic
//! energy family `I_mu`, measures how minimizers depend on the compact
//! (torus) directions as `mu` varies, evaluates closed-form test-function
//! energy bounds, and integrates the time-dependent equation with a
//! split-step spectral scheme. Everything is validated against the exact
//! Gausson solution, which is analytic on `R^d`.
//!
//! Modules mirror the pipeline:
//!
//! - [`domain`]: spectral discretization of the truncated box × torus,
//!   quadrature, and Fourier-multiplier operators.
//! - [`energy`]: the energy functional, its `F1`/`F2` decomposition, the
//!   first variation, and the Gagliardo–Nirenberg ratio.
//! - [`oracle`]: exact Gausson masses, multipliers, and energies.
//! - [`gradflow`]: normalized gradient flow ground-state solver.
//! - [`bounds`]: tent and Dirichlet-eigenfunction test-function bounds.
//! - [`depscan`]: sweeps over the anisotropy weight `mu` with regime
//!   classification.
//! - [`evolve`]: split-step time integration and orbital-stability
//!   experiments.
//! - [`propcheck`]: property suites for identities that are checkable by
//!   direct computation.
//! - [`snapshot`] / [`csv`]: persistence formats shared with the CLI.
//!
//! With the default `parallel` feature the pointwise and FFT-line kernels
//! run on rayon. All reductions are chunked with a fixed chunk length and
//! combined in a fixed order, so results are bitwise identical for any
//! thread count and for the sequential fallback build
//! (`--no-default-features`).

pub mod bounds;
pub mod csv;
pub mod depscan;
pub mod domain;
pub mod energy;
pub mod error;
pub mod evolve;
pub mod fft;
pub mod gradflow;
pub mod oracle;
pub mod par;
pub mod propcheck;
pub mod quad;
pub mod snapshot;

pub use error::{Error, Result};
pub use num_complex::Complex64;
