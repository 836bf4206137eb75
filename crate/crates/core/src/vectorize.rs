//! Coordinates for structured triples.
//!
//! A real triple is determined by the strict upper triangle of `J`, the upper
//! triangle of `H` (diagonal included) and all of `B`, which gives
//! `n(n-1)/2 + n(n+1)/2 + nm = n² + nm` coordinates. Coordinates are laid out
//! in exactly that order: `J` row-major, `H` row-major, `B` column-major.
//!
//! Over the complexes the structured triples form a real vector space of
//! dimension `2n² + 2nm`. The layout is
//!
//! 1. strict upper triangle of `J`, row-major, as `(re, im)` pairs;
//! 2. imaginary parts of the diagonal of `J`;
//! 3. upper triangle of `H`, row-major, diagonal entries contributing only
//!    their real part and off-diagonal entries an `(re, im)` pair;
//! 4. `B` column-major as `(re, im)` pairs.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarField};
use crate::system::{Dims, PhtSystem};

/// Image of a [`PhtSystem`] in coordinate space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedVector<R = f64> {
    pub field: ScalarField,
    pub n: usize,
    pub m: usize,
    pub coords: Vec<R>,
}

impl<R> PackedVector<R> {
    pub fn dims(&self) -> Result<Dims> {
        Dims::new(self.n, self.m)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Number of real coordinates of a structured triple.
pub fn packed_len(dims: Dims, field: ScalarField) -> usize {
    let Dims { n, m } = dims;
    match field {
        ScalarField::Real => n * (n - 1) / 2 + n * (n + 1) / 2 + n * m,
        ScalarField::Complex => 2 * n * n + 2 * n * m,
    }
}

pub fn pack<T: Scalar>(sys: &PhtSystem<T>) -> PackedVector<T::Re> {
    let Dims { n, m } = sys.dims();
    let complex = T::FIELD == ScalarField::Complex;
    let mut coords = Vec::with_capacity(packed_len(sys.dims(), T::FIELD));
    let mut push = |x: T, with_im: bool| {
        let (re, im) = x.parts();
        coords.push(re);
        if with_im {
            coords.push(im);
        }
    };

    let (j, h, b) = (sys.j(), sys.h(), sys.b());
    for r in 0..n {
        for c in r + 1..n {
            push(j[(r, c)], complex);
        }
    }
    if complex {
        for r in 0..n {
            push(T::from_parts(j[(r, r)].parts().1, T::Re::zero()), false);
        }
    }
    for r in 0..n {
        push(h[(r, r)], false);
        for c in r + 1..n {
            push(h[(r, c)], complex);
        }
    }
    for c in 0..m {
        for r in 0..n {
            push(b[(r, c)], complex);
        }
    }

    PackedVector {
        field: T::FIELD,
        n,
        m,
        coords,
    }
}

pub fn unpack<T: Scalar>(v: &PackedVector<T::Re>) -> Result<PhtSystem<T>> {
    if v.field != T::FIELD {
        return Err(Error::FieldMismatch {
            expected: T::FIELD,
            found: v.field,
        });
    }
    let dims = v.dims()?;
    let expected = packed_len(dims, T::FIELD);
    if v.coords.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: v.coords.len(),
        });
    }

    let Dims { n, m } = dims;
    let complex = T::FIELD == ScalarField::Complex;
    let zero = T::Re::zero();
    let mut it = v.coords.iter().copied();
    let mut next = |with_im: bool| {
        let re = it.next().expect("length checked");
        let im = if with_im {
            it.next().expect("length checked")
        } else {
            zero
        };
        T::from_parts(re, im)
    };

    let mut j = DMatrix::<T>::zeros(n, n);
    let mut h = DMatrix::<T>::zeros(n, n);
    let mut b = DMatrix::<T>::zeros(n, m);
    for r in 0..n {
        for c in r + 1..n {
            let x = next(complex);
            j[(r, c)] = x;
            j[(c, r)] = -x.conjugate();
        }
    }
    if complex {
        for r in 0..n {
            let im = next(false).parts().0;
            j[(r, r)] = T::from_parts(zero, im);
        }
    }
    for r in 0..n {
        h[(r, r)] = next(false);
        for c in r + 1..n {
            let x = next(complex);
            h[(r, c)] = x;
            h[(c, r)] = x.conjugate();
        }
    }
    for c in 0..m {
        for r in 0..n {
            b[(r, c)] = next(complex);
        }
    }

    Ok(PhtSystem::from_structured(dims, j, h, b))
}
