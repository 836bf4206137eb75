//! Controllability certificates for `ẋ = JHx + Bu`.
//!
//! Three independent verdicts are available: the numerical rank of the
//! Kalman matrix, the order-`n` minors of the Kalman matrix (whose common
//! zero set is the uncontrollable variety) and the Hautus test on the
//! pencils `[JH - λI, B]`.

use nalgebra::{DMatrix, LU};
use num_traits::{Float, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Real, Scalar};
use crate::system::{Dims, PhSystem, PhtSystem};

/// Default enumeration cap for [`minors_order_n`].
pub const DEFAULT_MINOR_CAP: u128 = 200_000;

/// Relative threshold of the floating point minor verdict, scaled by `‖K‖₂ⁿ`.
pub const MINOR_REL_TOL: f64 = 1e-10;

/// Default relative threshold of [`pbh_check`], scaled by `‖JH‖₂ + ‖B‖₂`.
pub const DEFAULT_PBH_TOL: f64 = 1e-8;

/// Absolute rank threshold used when the Kalman matrix vanishes.
const ZERO_FLOOR: f64 = 1e-300;

/// `[B, JHB, …, (JH)^(n-1) B]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    dims: Dims,
}

impl<T: Scalar> KalmanMatrix<T> {
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Block `j`, equal to `(JH)^j B`.
    pub fn block(&self, j: usize) -> DMatrix<T> {
        let m = self.dims.m;
        self.matrix.columns(j * m, m).into_owned()
    }
}

pub fn kalman_matrix<T: Scalar>(sys: &impl AsRef<PhtSystem<T>>) -> KalmanMatrix<T> {
    let sys = sys.as_ref();
    let dims = sys.dims();
    let Dims { n, m } = dims;
    let a = sys.system_matrix();
    let mut matrix = DMatrix::<T>::zeros(n, n * m);
    let mut block = sys.b().clone();
    for j in 0..n {
        matrix.columns_mut(j * m, m).copy_from(&block);
        if j + 1 < n {
            block = &a * &block;
        }
    }
    KalmanMatrix { matrix, dims }
}

/// Numerical rank evidence for one Kalman matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub tol_used: f64,
    pub controllable: bool,
}

impl RankReport {
    /// The `n`-th singular value, the one that decides the verdict.
    pub fn sigma_n(&self, n: usize) -> f64 {
        self.singular_values.get(n - 1).copied().unwrap_or(0.0)
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

/// `eps·max(n, nm)`, the default relative rank threshold.
pub fn default_rank_rel_tol<R: Real>(dims: Dims) -> R {
    let scale = dims.n.max(dims.n * dims.m);
    R::epsilon() * linalg::real::<R>(scale as f64)
}

/// Rank by counting singular values above `rel_tol·σ_max`.
pub fn rank_svd<T: Scalar>(k: &KalmanMatrix<T>, rel_tol: Option<T::Re>) -> Result<RankReport> {
    let rel_tol = rel_tol.unwrap_or_else(|| default_rank_rel_tol(k.dims));
    if !(rel_tol > T::Re::zero()) {
        return Err(Error::InvalidParameter(format!(
            "relative rank tolerance must be positive, got {rel_tol:?}"
        )));
    }
    let sv = linalg::singular_values(&k.matrix)?;
    let sigma_max = sv.first().copied().unwrap_or_else(T::Re::zero);
    let tol = if sigma_max > T::Re::zero() {
        rel_tol * sigma_max
    } else {
        linalg::real(ZERO_FLOOR)
    };
    let rank = sv.iter().filter(|s| **s > tol).count();
    Ok(RankReport {
        rank,
        singular_values: sv.iter().map(|s| s.to_f64_lossy()).collect(),
        tol_used: tol.to_f64_lossy(),
        controllable: rank == k.dims.n,
    })
}

/// All order-`n` minors of a Kalman matrix, in lexicographic order of the
/// selected column subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorSet<T: Scalar> {
    pub values: Vec<T>,
    pub q: usize,
}

impl<T: Scalar> MinorSet<T> {
    /// At least one minor exceeds `tol` in modulus.
    pub fn any_nonzero(&self, tol: T::Re) -> bool {
        self.values.iter().any(|v| v.modulus() > tol)
    }

    pub fn max_modulus(&self) -> T::Re {
        self.values
            .iter()
            .map(|v| v.modulus())
            .fold(T::Re::zero(), Float::max)
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Column index subsets of size `k` from `0..n`, lexicographic.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn minors_order_n<T: Scalar>(k: &KalmanMatrix<T>, cap: u128) -> Result<MinorSet<T>> {
    let Dims { n, m } = k.dims;
    let cols = n * m;
    let q = binomial(cols, n);
    if q > cap {
        return Err(Error::CombinatorialBlowup { q, cap });
    }
    let subsets = combinations(cols, n);
    let values: Vec<T> = subsets
        .par_iter()
        .map(|subset| {
            let sub = k.matrix.select_columns(subset.iter());
            LU::new(sub).determinant()
        })
        .collect();
    Ok(MinorSet {
        q: values.len(),
        values,
    })
}

/// `MINOR_REL_TOL·‖K‖₂ⁿ`, the threshold respecting the degree-`n`
/// homogeneity of the minors.
pub fn minor_tol<T: Scalar>(k: &KalmanMatrix<T>) -> Result<T::Re> {
    let norm = linalg::spectral_norm(&k.matrix)?;
    Ok(linalg::real::<T::Re>(MINOR_REL_TOL) * Float::powi(norm, k.dims.n as i32))
}

/// Controllability verdict from the minors.
pub fn minor_verdict<T: Scalar>(k: &KalmanMatrix<T>, cap: u128) -> Result<bool> {
    let minors = minors_order_n(k, cap)?;
    let tol = minor_tol(k)?;
    if tol.is_zero() {
        return Ok(false);
    }
    Ok(minors.any_nonzero(tol))
}

/// Smallest value of `σ_min([JH - λI, B])` over the eigenvalues `λ` of `JH`,
/// together with the scale `‖JH‖₂ + ‖B‖₂`.
pub fn pbh_margin<T: Scalar>(sys: &impl AsRef<PhtSystem<T>>) -> Result<(T::Re, T::Re)> {
    let sys = sys.as_ref();
    let a = sys.system_matrix();
    let scale = linalg::spectral_norm(&a)? + linalg::spectral_norm(sys.b())?;
    let mut worst = T::Re::infinity();
    for lambda in linalg::eigenvalues(&a)? {
        let s = linalg::sigma_min(&linalg::pencil(&a, sys.b(), lambda))?;
        worst = Float::min(worst, s);
    }
    Ok((worst, scale))
}

/// Hautus test: every pencil `[JH - λI, B]` at an eigenvalue `λ` keeps
/// `σ_min > tol·(‖JH‖₂ + ‖B‖₂)`.
pub fn pbh_check<T: Scalar>(sys: &impl AsRef<PhtSystem<T>>, tol: Option<T::Re>) -> Result<bool> {
    let tol = tol.unwrap_or_else(|| linalg::real(DEFAULT_PBH_TOL));
    let (worst, scale) = pbh_margin(sys)?;
    if scale.is_zero() {
        return Ok(false);
    }
    Ok(worst > tol * scale)
}

/// The controllable triple `J = tridiag(1, 0, -1)`, `H = I`, `B = [e₁, 0]`.
pub fn canonical_witness<T: Scalar>(n: usize, m: usize) -> Result<PhSystem<T>> {
    let dims = Dims::new(n, m)?;
    let one = T::one();
    let mut j = DMatrix::<T>::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        j[(i + 1, i)] = one;
        j[(i, i + 1)] = -one;
    }
    let h = DMatrix::<T>::identity(n, n);
    let mut b = DMatrix::<T>::zeros(n, m);
    b[(0, 0)] = one;
    PhSystem::validate(PhtSystem::from_structured(dims, j, h, b), None)
}
