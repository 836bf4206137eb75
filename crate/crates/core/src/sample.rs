//! Random structured systems.
//!
//! All laws here have a jointly continuous density on coordinate space, so
//! they put zero mass on any proper algebraic subset. Reproducibility comes
//! from [`stream_rng`]: a master seed plus a per-draw stream index select an
//! independent ChaCha stream, so batches are identical regardless of how
//! draws are scheduled across threads.

use nalgebra::DMatrix;
use num_traits::{Float, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Scalar, ScalarField};
use crate::system::{hermitian_part, skew_part, Dims, PhSystem, PhtSystem};

/// Redraws allowed before a positive definite law is declared degenerate.
pub const MAX_PD_DRAWS: usize = 16;

/// Generator for draw `index` of the batch seeded by `master`.
pub fn stream_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Derives an independent master seed for a named sub-experiment.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    // splitmix64 over the tag bytes
    let mut x = master;
    for byte in tag.bytes() {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15 ^ u64::from(byte));
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
    }
    x
}

/// Law of `H` for positive definite samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum HLaw {
    /// `H = A·A*/p` with `A` an `n×p` Gaussian matrix.
    Wishart { p: usize },
    /// `H = A·A* + eps·I` with `A` an `n×n` Gaussian matrix.
    ShiftedGram { eps: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub dims: Dims,
    pub field: ScalarField,
    pub j_scale: f64,
    pub h_law: HLaw,
    pub b_scale: f64,
    pub seed: u64,
}

impl SamplerSpec {
    /// Real Wishart law with `p = n` and unit scales.
    pub fn wishart(n: usize, m: usize, seed: u64) -> Result<Self> {
        let spec = SamplerSpec {
            dims: Dims::new(n, m)?,
            field: ScalarField::Real,
            j_scale: 1.0,
            h_law: HLaw::Wishart { p: n },
            b_scale: 1.0,
            seed,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_field(mut self, field: ScalarField) -> Self {
        self.field = field;
        self
    }

    pub fn check(&self) -> Result<()> {
        Dims::new(self.dims.n, self.dims.m)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("j_scale", self.j_scale)?;
        positive("b_scale", self.b_scale)?;
        match self.h_law {
            HLaw::Wishart { p } if p < self.dims.n => Err(Error::InvalidParameter(format!(
                "wishart degrees of freedom p={p} must be at least n={}",
                self.dims.n
            ))),
            HLaw::ShiftedGram { eps } => positive("shifted_gram eps", eps),
            _ => Ok(()),
        }
    }
}

fn gaussian<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::standard_normal(rng))
}

fn scaled<T: Scalar>(m: DMatrix<T>, s: f64) -> DMatrix<T> {
    m * T::from_real(linalg::real(s))
}

fn skew_gaussian<T: Scalar, R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<T> {
    let g = gaussian::<T, R>(n, n, rng);
    skew_part(&scaled(g, scale))
}

fn pd_draw<T: Scalar, R: Rng + ?Sized>(n: usize, law: HLaw, rng: &mut R) -> DMatrix<T> {
    let h = match law {
        HLaw::Wishart { p } => {
            let a = gaussian::<T, R>(n, p, rng);
            scaled(&a * a.adjoint(), 1.0 / p as f64)
        }
        HLaw::ShiftedGram { eps } => {
            let a = gaussian::<T, R>(n, n, rng);
            &a * a.adjoint() + DMatrix::<T>::identity(n, n) * T::from_real(linalg::real(eps))
        }
    };
    hermitian_part(&h)
}

/// A structured triple with Gaussian `J`, `H`, `B`; `H` is only Hermitian.
pub fn sample_pht<T: Scalar, R: Rng + ?Sized>(spec: &SamplerSpec, rng: &mut R) -> PhtSystem<T> {
    let Dims { n, m } = spec.dims;
    let j = skew_gaussian::<T, R>(n, spec.j_scale, rng);
    let h = hermitian_part(&gaussian::<T, R>(n, n, rng));
    let b = scaled(gaussian::<T, R>(n, m, rng), spec.b_scale);
    PhtSystem::from_structured(spec.dims, j, h, b)
}

/// Positive definite `H` drawn from the sampler's law, retrying on the
/// probability-zero event of a singular draw.
fn pd_block<T: Scalar, R: Rng + ?Sized>(n: usize, law: HLaw, rng: &mut R) -> Result<DMatrix<T>> {
    for _ in 0..MAX_PD_DRAWS {
        let h = pd_draw::<T, R>(n, law, rng);
        let ev = linalg::hermitian_eigenvalues(&h)?;
        let norm = Float::max(Float::abs(ev[0]), Float::abs(ev[n - 1]));
        if ev[0] >= crate::system::default_pd_delta(norm) {
            return Ok(h);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_PD_DRAWS,
    })
}

pub fn sample_ph<T: Scalar, R: Rng + ?Sized>(spec: &SamplerSpec, rng: &mut R) -> Result<PhSystem<T>> {
    let Dims { n, m } = spec.dims;
    let j = skew_gaussian::<T, R>(n, spec.j_scale, rng);
    let h = pd_block::<T, R>(n, spec.h_law, rng)?;
    let b = scaled(gaussian::<T, R>(n, m, rng), spec.b_scale);
    PhSystem::validate(PhtSystem::from_structured(spec.dims, j, h, b), None)
}

/// A PH system whose last `k` states are decoupled from the input:
/// `J = diag(J₁, J₂)`, `H = diag(H₁, H₂)`, `B = [B₁; 0]`.
pub fn sample_uncontrollable<T: Scalar, R: Rng + ?Sized>(
    spec: &SamplerSpec,
    k: usize,
    rng: &mut R,
) -> Result<PhSystem<T>> {
    let Dims { n, m } = spec.dims;
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "decoupled block size k={k} must satisfy 1 <= k < n={n}"
        )));
    }
    let top = n - k;
    let block_law = |size: usize| match spec.h_law {
        HLaw::Wishart { p } => HLaw::Wishart { p: p.max(size) },
        law => law,
    };
    let j1 = skew_gaussian::<T, R>(top, spec.j_scale, rng);
    let j2 = skew_gaussian::<T, R>(k, spec.j_scale, rng);
    let h1 = pd_block::<T, R>(top, block_law(top), rng)?;
    let h2 = pd_block::<T, R>(k, block_law(k), rng)?;
    let b1 = scaled(gaussian::<T, R>(top, m, rng), spec.b_scale);

    let mut j = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, m);
    j.view_mut((0, 0), (top, top)).copy_from(&j1);
    j.view_mut((top, top), (k, k)).copy_from(&j2);
    h.view_mut((0, 0), (top, top)).copy_from(&h1);
    h.view_mut((top, top), (k, k)).copy_from(&h2);
    b.view_mut((0, 0), (top, m)).copy_from(&b1);
    PhSystem::validate(PhtSystem::from_structured(spec.dims, j, h, b), None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub epsilon: f64,
    pub max_retries: usize,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            epsilon: 1e-3,
            max_retries: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed<T: Scalar> {
    pub system: PhSystem<T>,
    pub epsilon_used: f64,
    pub halvings: usize,
}

/// Gaussian structured direction of unit joint Frobenius norm.
pub fn unit_direction<T: Scalar, R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> PhtSystem<T> {
    let Dims { n, m } = dims;
    let j = skew_gaussian::<T, R>(n, 1.0, rng);
    let h = hermitian_part(&gaussian::<T, R>(n, n, rng));
    let b = gaussian::<T, R>(n, m, rng);
    let dir = PhtSystem::from_structured(dims, j, h, b);
    let norm = dir.frobenius_norm();
    if norm.is_zero() {
        return dir;
    }
    let zero = PhtSystem::zeros(dims);
    dir.linear_combination(T::Re::one() / norm, &zero, T::Re::zero())
        .expect("same dims")
}

/// `sys + ε·Δ` for a random unit direction `Δ`, halving `ε` along the same
/// direction until `H` is positive definite again.
pub fn perturb<T: Scalar, R: Rng + ?Sized>(
    sys: &PhSystem<T>,
    spec: &PerturbationSpec,
    rng: &mut R,
) -> Result<Perturbed<T>> {
    if !(spec.epsilon >= 0.0) || !spec.epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "perturbation size must be non-negative, got {}",
            spec.epsilon
        )));
    }
    let dir = unit_direction::<T, R>(sys.dims(), rng);
    if spec.epsilon == 0.0 {
        return Ok(Perturbed {
            system: sys.clone(),
            epsilon_used: 0.0,
            halvings: 0,
        });
    }
    let mut eps = spec.epsilon;
    for halvings in 0..=spec.max_retries {
        let candidate = sys.linear_combination(T::Re::one(), &dir, linalg::real(eps))?;
        match PhSystem::validate(candidate, None) {
            Ok(system) => {
                return Ok(Perturbed {
                    system,
                    epsilon_used: eps,
                    halvings,
                })
            }
            Err(Error::NotPositiveDefinite { .. }) => eps *= 0.5,
            Err(other) => return Err(other),
        }
    }
    Err(Error::PerturbationFailed {
        retries: spec.max_retries,
        last_epsilon: eps * 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctrb::{kalman_matrix, rank_svd};
    use crate::vectorize::pack;
    use num_complex::Complex64;

    #[test]
    fn fixed_seed_is_reproducible() {
        let spec = SamplerSpec::wishart(3, 2, 42).unwrap();
        let a: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(42, 7)).unwrap();
        let b: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(42, 7)).unwrap();
        assert_eq!(a, b);
        let c: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(42, 8)).unwrap();
        assert_ne!(a, c);
        let pa = pack::<Complex64>(&sample_pht(&spec, &mut stream_rng(1, 0)));
        let pb = pack::<Complex64>(&sample_pht(&spec, &mut stream_rng(1, 0)));
        assert_eq!(
            pa.coords.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            pb.coords.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn outputs_are_exactly_structured() {
        let spec = SamplerSpec::wishart(4, 2, 3).unwrap();
        for i in 0..50 {
            let s: PhtSystem<Complex64> = sample_pht(&spec, &mut stream_rng(3, i));
            assert!((s.j() + s.j().adjoint()).iter().all(|z| z.norm() == 0.0));
            assert!((s.h() - s.h().adjoint()).iter().all(|z| z.norm() == 0.0));
            let (j, h, b) = s.clone().into_parts();
            assert_eq!(PhtSystem::validate(j, h, b, 0.0).unwrap(), s);
        }
    }

    #[test]
    fn shifted_gram_margin_at_least_eps() {
        let mut spec = SamplerSpec::wishart(4, 1, 5).unwrap();
        spec.h_law = HLaw::ShiftedGram { eps: 1.0 };
        for i in 0..200 {
            let s: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(5, i)).unwrap();
            assert!(s.pd_margin() >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn spec_checks() {
        let mut spec = SamplerSpec::wishart(3, 1, 0).unwrap();
        spec.h_law = HLaw::Wishart { p: 2 };
        assert!(spec.check().is_err());
        spec.h_law = HLaw::ShiftedGram { eps: 0.0 };
        assert!(spec.check().is_err());
        spec.h_law = HLaw::Wishart { p: 3 };
        spec.b_scale = -1.0;
        assert!(spec.check().is_err());
    }

    #[test]
    fn decoupled_block_shape() {
        let spec = SamplerSpec::wishart(2, 1, 9).unwrap();
        let s: PhSystem<f64> = sample_uncontrollable(&spec, 1, &mut stream_rng(9, 0)).unwrap();
        assert_eq!(s.j(), &DMatrix::zeros(2, 2));
        assert_eq!(s.h()[(0, 1)], 0.0);
        assert_eq!(s.b()[(1, 0)], 0.0);
        let r = rank_svd(&kalman_matrix(&s), None).unwrap();
        assert_eq!(r.rank, 1);
        assert!(sample_uncontrollable::<f64, _>(&spec, 2, &mut stream_rng(9, 0)).is_err());
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let spec = SamplerSpec::wishart(3, 1, 1).unwrap();
        let s: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(1, 0)).unwrap();
        let p = perturb(&s, &PerturbationSpec { epsilon: 0.0, max_retries: 0 }, &mut stream_rng(2, 0))
            .unwrap();
        assert_eq!(p.system, s);
        assert_eq!(p.epsilon_used, 0.0);
    }

    #[test]
    fn small_perturbation_keeps_definiteness_without_halving() {
        let spec = SamplerSpec::wishart(3, 2, 4).unwrap();
        for i in 0..100 {
            let s: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(4, i)).unwrap();
            let eps = 0.9 * s.pd_margin();
            let p = perturb(&s, &PerturbationSpec { epsilon: eps, max_retries: 0 }, &mut stream_rng(5, i))
                .unwrap();
            assert_eq!(p.halvings, 0);
            assert_eq!(p.epsilon_used, eps);
        }
    }

    #[test]
    fn large_perturbation_halves() {
        // H = 1e-3·I sits close to the boundary of the cone
        let spec = SamplerSpec::wishart(3, 1, 0).unwrap();
        let base: PhSystem<f64> = sample_ph(&spec, &mut stream_rng(0, 0)).unwrap();
        let h = DMatrix::identity(3, 3) * 1e-3;
        let (j, _, b) = base.into_base().into_parts();
        let s = PhtSystem::validate(j, h, b, 0.0).unwrap().into_ph().unwrap();
        let mut halved = 0;
        for i in 0..50 {
            let p = perturb(&s, &PerturbationSpec { epsilon: 10.0, max_retries: 60 }, &mut stream_rng(8, i))
                .unwrap();
            assert!(p.epsilon_used <= 10.0);
            halved += p.halvings;
        }
        assert!(halved > 0);
        let mut failures = 0;
        for i in 0..50 {
            let spec = PerturbationSpec { epsilon: 10.0, max_retries: 0 };
            match perturb(&s, &spec, &mut stream_rng(8, i)) {
                Err(Error::PerturbationFailed { retries: 0, .. }) => failures += 1,
                Ok(p) => assert_eq!(p.halvings, 0),
                Err(other) => panic!("unexpected {other}"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn unit_direction_has_unit_norm() {
        let d: PhtSystem<Complex64> = unit_direction(Dims::new(3, 2).unwrap(), &mut stream_rng(0, 1));
        assert!((d.frobenius_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, "probe"), derive_seed(1, "base"));
        assert_ne!(derive_seed(1, "probe"), derive_seed(2, "probe"));
        assert_eq!(derive_seed(1, "probe"), derive_seed(1, "probe"));
    }
}
