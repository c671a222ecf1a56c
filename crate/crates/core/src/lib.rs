//! Moment evaluation for polynomial-coefficient SDEs without sampling.
//!
//! For `dX = a(X) dt + B(X) dW(t)` with polynomial `a` and `B B^T`, the
//! statistic `E[(X(T) - x_ini)^alpha | X(0) = x_ini]` is the value at
//! `x_ini` of the solution of the backward Kolmogorov equation. Expanding
//! that solution in the shifted monomial basis `(x - x_ini)^n` turns the
//! adjoint generator into a sparse table of lattice *events*, and the
//! statistic into the weight accumulated at `n = 0` by a finite
//! dynamic-programming walk of length `M`.
//!
//! The crate provides:
//!
//! * [`polynomial`] - sparse multivariate polynomials with exact
//!   origin-shift rewriting;
//! * [`generator`] - compilation of a model into merged lattice events and
//!   matrix-element queries;
//! * [`propagator`] - four time-stepping schemes over sparse weight maps
//!   (explicit 1st/2nd order and resolvent-based implicit 1st/2nd order),
//!   plus a brute-force walk enumerator;
//! * [`extrapolation`] - two-point step-count extrapolation to the
//!   `M -> infinity` limit;
//! * [`oracle`] - independent reference solvers (closed forms, truncated
//!   coupled ODEs, Euler-Maruyama Monte Carlo);
//! * [`models`] - the Ornstein-Uhlenbeck and noisy van der Pol presets.
//!
//! ```
//! use sde_moments::models::{build_ou, OuParams};
//! use sde_moments::{Generator, MultiIndex, RunPlan, StepScheme};
//!
//! let params = OuParams { gamma: 1.0, sigma: 0.5, x_ini: 1.0 };
//! let model = build_ou(&params).unwrap();
//! let generator = Generator::compile(&model, &params.origin()).unwrap();
//! let plan = RunPlan::new(
//!     1.0,
//!     128,
//!     MultiIndex::from_slice(&[1]),
//!     StepScheme::Implicit2 { keep_two_hop_denominator: false },
//! );
//! let estimate = sde_moments::propagator::run(&generator, &plan).unwrap();
//! assert!((estimate - (f64::exp(-1.0) - 1.0)).abs() < 1e-4);
//! ```

pub mod error;
pub mod extrapolation;
pub mod generator;
pub mod index;
pub mod models;
pub mod oracle;
pub mod polynomial;
pub mod propagator;
pub mod weight_map;

pub use error::{Error, Result};
pub use extrapolation::EstimatePair;
pub use generator::{Event, Generator, SdeModel};
pub use index::MultiIndex;
pub use polynomial::Polynomial;
pub use propagator::{RunPlan, StepScheme};
pub use weight_map::WeightMap;
