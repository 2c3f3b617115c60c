//! Direct and inverse spectral problems for rank-one perturbations
//! `A + <., phi> psi` of self-adjoint operators with discrete, separated spectrum.

pub mod assign;
pub mod charfn;
pub mod direct;
pub mod error;
pub mod gallery;
pub mod inverse;
pub mod io;
pub mod model;
pub mod oracle;

pub use charfn::{Bounded, CharacteristicFunction, Meromorphic, Point, Radii};
pub use direct::{solve_direct, DirectOptions, Origin, PerturbedSpectrum, SpectrumEntry};
pub use error::{Error, Result};
