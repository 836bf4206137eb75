//! Scalar abstraction shared by every matrix routine in the crate.

use std::fmt;

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Field over which a system is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Real => f.write_str("real"),
            ScalarField::Complex => f.write_str("complex"),
        }
    }
}

impl std::str::FromStr for ScalarField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" | "r" => Ok(ScalarField::Real),
            "complex" | "c" => Ok(ScalarField::Complex),
            other => Err(format!("unknown field `{other}` (expected real or complex)")),
        }
    }
}

/// Floating point type underlying a scalar: f32 or f64.
pub trait Real:
    RealField + Float + FromPrimitive + ToPrimitive + Copy + Send + Sync + fmt::Debug
{
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix entry type: a real float or a complex number over one.
pub trait Scalar: ComplexField<RealField = <Self as Scalar>::Re> + Copy + Send + Sync {
    type Re: Real;

    const FIELD: ScalarField;

    /// Builds a scalar from real and imaginary parts. The imaginary part is
    /// dropped for real scalars.
    fn from_parts(re: Self::Re, im: Self::Re) -> Self;

    fn parts(self) -> (Self::Re, Self::Re);

    fn to_complex(self) -> Complex<Self::Re> {
        let (re, im) = self.parts();
        Complex::new(re, im)
    }

    /// One draw with i.i.d. standard normal real (and imaginary) parts.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            type Re = $t;
            const FIELD: ScalarField = ScalarField::Real;

            fn from_parts(re: $t, _im: $t) -> Self {
                re
            }

            fn parts(self) -> ($t, $t) {
                (self, 0.0)
            }

            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(StandardNormal)
            }
        }
    )*};
}

macro_rules! impl_complex_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for Complex<$t> {
            type Re = $t;
            const FIELD: ScalarField = ScalarField::Complex;

            fn from_parts(re: $t, im: $t) -> Self {
                Complex::new(re, im)
            }

            fn parts(self) -> ($t, $t) {
                (self.re, self.im)
            }

            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                let re = rng.sample(StandardNormal);
                let im = rng.sample(StandardNormal);
                Complex::new(re, im)
            }
        }
    )*};
}

impl_real_scalar!(f32, f64);
impl_complex_scalar!(f32, f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_roundtrip() {
        let z = Complex::new(1.5f64, -2.0);
        assert_eq!(<Complex<f64> as Scalar>::from_parts(1.5, -2.0), z);
        assert_eq!(z.parts(), (1.5, -2.0));
        assert_eq!(<f64 as Scalar>::from_parts(3.0, 7.0), 3.0);
        assert_eq!(<f32 as Scalar>::FIELD, ScalarField::Real);
    }

    #[test]
    fn field_parses() {
        assert_eq!("real".parse::<ScalarField>(), Ok(ScalarField::Real));
        assert_eq!("complex".parse::<ScalarField>(), Ok(ScalarField::Complex));
        assert!("quaternion".parse::<ScalarField>().is_err());
    }
}
