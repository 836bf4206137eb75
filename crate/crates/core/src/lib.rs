//! Structured state-space systems `ẋ = JHx + Bu` with `J` skew-adjoint and
//! `H` self-adjoint, and numerical tools for studying their controllability:
//! Kalman rank certificates, a coordinate isomorphism, seeded samplers and
//! Monte Carlo studies.
//!
//! Everything is generic over the scalar ([`Scalar`]: `f32`, `f64` and their
//! complex counterparts); the aliases below fix the common `f64` cases.

pub mod ctrb;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod sample;
pub mod scalar;
pub mod system;
pub mod vectorize;

pub use num_complex::Complex64;

pub use ctrb::{
    canonical_witness, kalman_matrix, minor_verdict, minors_order_n, pbh_check, rank_svd,
    KalmanMatrix, MinorSet, RankReport,
};
pub use error::{Error, Result};
pub use io::AnySystem;
pub use sample::{
    perturb, sample_ph, sample_pht, sample_uncontrollable, stream_rng, HLaw, PerturbationSpec,
    SamplerSpec,
};
pub use scalar::{Real, Scalar, ScalarField};
pub use system::{Dims, PhSystem, PhtSystem};
pub use vectorize::{pack, packed_len, unpack, PackedVector};

pub type RealPht = PhtSystem<f64>;
pub type ComplexPht = PhtSystem<Complex64>;
pub type RealPh = PhSystem<f64>;
pub type ComplexPh = PhSystem<Complex64>;
pub type RealPacked = PackedVector<f64>;
