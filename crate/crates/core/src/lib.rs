//! Stationary determinantal point processes on the p-adic numbers.
//!
//! The kernel `K_S(x, y) = FT(1_S)(x - y)` of a finite union of balls `S`
//! is handled in closed form: Fourier transforms, coset covariances of the
//! window counts, spectral densities and tail sums are exact rationals or
//! exact cyclotomic numbers. A discretized sampler checks the closed forms
//! by Monte Carlo and demonstrates number rigidity through linear
//! prediction of interior counts from exterior ones.

pub mod ball;
pub mod covariance;
pub mod cyclotomic;
pub mod fourier;
pub mod padic;
pub mod sampler;
pub mod spectral;

pub use ball::{Ball, BallError, BallSet, MultiplicityProfile};
pub use cyclotomic::Cyclotomic;
pub use padic::{PAdic, PadicError, Rational, UnitComplex, DEFAULT_PRECISION};
