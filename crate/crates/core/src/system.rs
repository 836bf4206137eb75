//! Structured port-Hamiltonian system types.
//!
//! A [`PhtSystem`] is a triple `(J, H, B)` with `J` skew-adjoint and `H`
//! self-adjoint; a [`PhSystem`] additionally has `H` positive definite.
//! Symmetry is enforced by projection at construction, so both invariants
//! hold exactly in floating point afterwards.

use std::ops::Deref;

use nalgebra::DMatrix;
use num_traits::{Float, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Real, Scalar, ScalarField};

/// Default residual gate for [`PhtSystem::validate`].
pub const DEFAULT_STRUCTURE_TOL: f64 = 1e-9;

/// State and input dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
}

impl Dims {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "dimensions must be positive, got n={n}, m={m}"
            )));
        }
        Ok(Dims { n, m })
    }
}

/// `(J, H, B)` with `J = -J*` and `H = H*`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhtSystem<T: Scalar> {
    dims: Dims,
    j: DMatrix<T>,
    h: DMatrix<T>,
    b: DMatrix<T>,
}

pub(crate) fn skew_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(linalg::real(0.5));
    (m - m.adjoint()) * half
}

pub(crate) fn hermitian_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(linalg::real(0.5));
    (m + m.adjoint()) * half
}

fn check_finite<T: Scalar>(name: &'static str, m: &DMatrix<T>) -> Result<()> {
    let finite = m.iter().all(|x| {
        let (re, im) = x.parts();
        re.is_finite() && im.is_finite()
    });
    if finite {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} has a non-finite entry")))
    }
}

impl<T: Scalar> PhtSystem<T> {
    /// Checks shapes and symmetry residuals, then stores `(J - J*)/2` and
    /// `(H + H*)/2`.
    ///
    /// The residual gate is `‖J + J*‖_F ≤ tol·(1 + ‖J‖_F)` and likewise for `H`.
    pub fn validate(j: DMatrix<T>, h: DMatrix<T>, b: DMatrix<T>, tol: T::Re) -> Result<Self> {
        if !(tol >= T::Re::zero()) {
            return Err(Error::InvalidParameter(format!(
                "structure tolerance must be non-negative, got {tol:?}"
            )));
        }
        let n = j.nrows();
        if j.ncols() != n || h.nrows() != n || h.ncols() != n || b.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "J is {}x{}, H is {}x{}, B is {}x{}",
                j.nrows(),
                j.ncols(),
                h.nrows(),
                h.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let dims = Dims::new(n, b.ncols())?;
        check_finite("J", &j)?;
        check_finite("H", &h)?;
        check_finite("B", &b)?;

        let one = T::Re::one();
        let j_res = (&j + j.adjoint()).norm();
        let j_bound = tol * (one + j.norm());
        if !(j_res <= j_bound) {
            return Err(Error::StructureViolation {
                matrix: "J",
                residual: j_res.to_f64_lossy(),
                bound: j_bound.to_f64_lossy(),
            });
        }
        let h_res = (&h - h.adjoint()).norm();
        let h_bound = tol * (one + h.norm());
        if !(h_res <= h_bound) {
            return Err(Error::StructureViolation {
                matrix: "H",
                residual: h_res.to_f64_lossy(),
                bound: h_bound.to_f64_lossy(),
            });
        }

        Ok(PhtSystem {
            dims,
            j: skew_part(&j),
            h: hermitian_part(&h),
            b,
        })
    }

    /// The all-zero system.
    pub fn zeros(dims: Dims) -> Self {
        PhtSystem {
            dims,
            j: DMatrix::zeros(dims.n, dims.n),
            h: DMatrix::zeros(dims.n, dims.n),
            b: DMatrix::zeros(dims.n, dims.m),
        }
    }

    /// Assembles a system whose `J`, `H` are already exactly structured.
    pub(crate) fn from_structured(dims: Dims, j: DMatrix<T>, h: DMatrix<T>, b: DMatrix<T>) -> Self {
        debug_assert!((&j + j.adjoint()).iter().all(|x| x.is_zero()));
        debug_assert!((&h - h.adjoint()).iter().all(|x| x.is_zero()));
        PhtSystem { dims, j, h, b }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn field(&self) -> ScalarField {
        T::FIELD
    }

    pub fn j(&self) -> &DMatrix<T> {
        &self.j
    }

    pub fn h(&self) -> &DMatrix<T> {
        &self.h
    }

    pub fn b(&self) -> &DMatrix<T> {
        &self.b
    }

    pub fn into_parts(self) -> (DMatrix<T>, DMatrix<T>, DMatrix<T>) {
        (self.j, self.h, self.b)
    }

    /// `J·H`, the state matrix of `ẋ = JHx + Bu`.
    pub fn system_matrix(&self) -> DMatrix<T> {
        &self.j * &self.h
    }

    /// Replaces `B`, keeping `J` and `H`.
    pub fn with_input(&self, b: DMatrix<T>) -> Result<Self> {
        if b.nrows() != self.dims.n {
            return Err(Error::DimensionMismatch(format!(
                "B has {} rows, expected {}",
                b.nrows(),
                self.dims.n
            )));
        }
        let dims = Dims::new(self.dims.n, b.ncols())?;
        Ok(PhtSystem {
            dims,
            j: self.j.clone(),
            h: self.h.clone(),
            b,
        })
    }

    /// `alpha·self + beta·other`, which stays in the (real) vector space of
    /// structured triples.
    pub fn linear_combination(&self, alpha: T::Re, other: &Self, beta: T::Re) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine {:?} with {:?}",
                self.dims, other.dims
            )));
        }
        let a = T::from_real(alpha);
        let b = T::from_real(beta);
        let j = &self.j * a + &other.j * b;
        let h = &self.h * a + &other.h * b;
        let bm = &self.b * a + &other.b * b;
        Ok(PhtSystem {
            dims: self.dims,
            j: skew_part(&j),
            h: hermitian_part(&h),
            b: bm,
        })
    }

    /// Frobenius norm of the triple, `sqrt(‖J‖² + ‖H‖² + ‖B‖²)`.
    pub fn frobenius_norm(&self) -> T::Re {
        let sq = self.j.norm_squared() + self.h.norm_squared() + self.b.norm_squared();
        Float::sqrt(sq)
    }

    /// Applies `validate_ph` with the default margin.
    pub fn into_ph(self) -> Result<PhSystem<T>> {
        PhSystem::validate(self, None)
    }
}

/// Default positive definiteness margin `1e-12·max(1, ‖H‖₂)`.
pub fn default_pd_delta<R: Real>(h_norm: R) -> R {
    linalg::real::<R>(1e-12) * Float::max(R::one(), h_norm)
}

/// A [`PhtSystem`] with positive definite `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhSystem<T: Scalar> {
    base: PhtSystem<T>,
    pd_margin: T::Re,
}

impl<T: Scalar> PhSystem<T> {
    /// Accepts `sys` iff the smallest eigenvalue of `H` is at least `delta`
    /// (default [`default_pd_delta`]).
    pub fn validate(sys: PhtSystem<T>, delta: Option<T::Re>) -> Result<Self> {
        let ev = linalg::hermitian_eigenvalues(&sys.h)?;
        let min = ev[0];
        let h_norm = Float::max(Float::abs(ev[0]), Float::abs(ev[ev.len() - 1]));
        let delta = delta.unwrap_or_else(|| default_pd_delta(h_norm));
        if !(delta > T::Re::zero()) {
            return Err(Error::InvalidParameter(format!(
                "positive definiteness margin must be positive, got {delta:?}"
            )));
        }
        if !(min >= delta) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min.to_f64_lossy(),
                delta: delta.to_f64_lossy(),
            });
        }
        Ok(PhSystem {
            base: sys,
            pd_margin: min,
        })
    }

    /// Smallest eigenvalue of `H`.
    pub fn pd_margin(&self) -> T::Re {
        self.pd_margin
    }

    pub fn base(&self) -> &PhtSystem<T> {
        &self.base
    }

    pub fn into_base(self) -> PhtSystem<T> {
        self.base
    }
}

impl<T: Scalar> Deref for PhSystem<T> {
    type Target = PhtSystem<T>;

    fn deref(&self) -> &PhtSystem<T> {
        &self.base
    }
}

impl<T: Scalar> AsRef<PhtSystem<T>> for PhtSystem<T> {
    fn as_ref(&self) -> &PhtSystem<T> {
        self
    }
}

impl<T: Scalar> AsRef<PhtSystem<T>> for PhSystem<T> {
    fn as_ref(&self) -> &PhtSystem<T> {
        &self.base
    }
}
