//! Numerical laboratory for the superintegrable Kepler-related Hamiltonian
//! `H = (p_a² + p_b²)/(2(a²+b²)) + (k1 + k2·a + k3·b)/(a²+b²)` in parabolic coordinates.
//!
//! Every scalar is generic over [`Scalar`] (`f32` or `f64`); dense linear algebra
//! (rank, kernels, spectra) runs in `f64`. Concrete `f64` aliases are exported at the
//! crate root.

pub mod autodiff;
pub mod brackets;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod inventory;
pub mod forms;
pub mod observables;
pub mod phase;
pub mod sample;
pub mod scalar;

pub use autodiff::{
    eval_grad, eval_hess, ComplexObservable, ComplexPhaseFunction, Dual1, Dual2, Jet, PhaseFunction, DIM,
};
pub use error::{Error, Result};
pub use observables::{ComplexFunction, InvariantSet, Observable};
pub use phase::{from_cartesian, to_cartesian, CartesianPoint, ModelParams, PhasePoint, DEFAULT_ORIGIN_EPS};
pub use sample::PointSampler;
pub use scalar::Scalar;

pub type PhasePoint64 = PhasePoint<f64>;
pub type PhasePoint32 = PhasePoint<f32>;
pub type CartesianPoint64 = CartesianPoint<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type ModelParams32 = ModelParams<f32>;
pub type ComplexObservable64 = ComplexObservable<f64>;
pub type InvariantSet64 = InvariantSet<f64>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type DriftReport64 = dynamics::DriftReport<f64>;
