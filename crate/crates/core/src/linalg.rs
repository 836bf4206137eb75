//! Small dense helpers on top of nalgebra used across the crate.

use nalgebra::linalg::Hessenberg;
use nalgebra::{ComplexField, DMatrix, SymmetricEigen, SVD};
use num_complex::Complex;
use num_traits::{Float, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

const SVD_MAX_ITER: usize = 10_000;

/// Singular values in descending order.
pub fn singular_values<T>(m: &DMatrix<T>) -> Result<Vec<T::RealField>>
where
    T: ComplexField,
    T::RealField: Real,
{
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, T::RealField::epsilon(), SVD_MAX_ITER)
        .ok_or(Error::SvdFailure)?;
    let mut sv: Vec<T::RealField> = svd.singular_values.iter().copied().collect();
    if sv.iter().any(|s| !Float::is_finite(*s)) {
        return Err(Error::SvdFailure);
    }
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv)
}

/// Largest singular value; zero for an empty matrix.
pub fn spectral_norm<T>(m: &DMatrix<T>) -> Result<T::RealField>
where
    T: ComplexField,
    T::RealField: Real,
{
    Ok(singular_values(m)?.first().copied().unwrap_or_else(T::RealField::zero))
}

/// Smallest singular value of a wide or square matrix (the `min(rows, cols)`-th one).
pub fn sigma_min<T>(m: &DMatrix<T>) -> Result<T::RealField>
where
    T: ComplexField,
    T::RealField: Real,
{
    Ok(singular_values(m)?.last().copied().unwrap_or_else(T::RealField::zero))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues<T: Scalar>(h: &DMatrix<T>) -> Result<Vec<T::Re>> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), T::Re::epsilon(), SVD_MAX_ITER + 100 * n)
        .ok_or(Error::EigenFailure)?;
    let mut ev: Vec<T::Re> = eig.eigenvalues.iter().copied().collect();
    if ev.iter().any(|s| !Float::is_finite(*s)) {
        return Err(Error::EigenFailure);
    }
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(ev)
}

pub fn to_complex_matrix<T: Scalar>(m: &DMatrix<T>) -> DMatrix<Complex<T::Re>> {
    m.map(|x| x.to_complex())
}

/// Eigenvalues of a general square matrix, computed in complex arithmetic by
/// Hessenberg reduction followed by shifted QR sweeps.
pub fn eigenvalues<T: Scalar>(m: &DMatrix<T>) -> Result<Vec<Complex<T::Re>>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mc = to_complex_matrix(m);
    if n == 1 {
        return Ok(vec![mc[(0, 0)]]);
    }
    let scale = mc.iter().map(|z| cabs1(*z)).fold(T::Re::zero(), Float::max);
    if scale.is_zero() {
        return Ok(vec![Complex::zero(); n]);
    }
    let inv = Complex::new(T::Re::one() / scale, T::Re::zero());
    let h = Hessenberg::new(mc * inv).unpack_h();
    let mut ev = hessenberg_qr(h)?;
    for z in &mut ev {
        *z = *z * scale;
    }
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(ev)
}

fn cabs1<R: Real>(z: Complex<R>) -> R {
    Float::abs(z.re) + Float::abs(z.im)
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens<R: Real>(a: Complex<R>, b: Complex<R>) -> (R, Complex<R>) {
    let na = a.norm();
    let nb = b.norm();
    if nb.is_zero() {
        return (R::one(), Complex::zero());
    }
    if na.is_zero() {
        return (R::zero(), Complex::one());
    }
    let r = Float::hypot(na, nb);
    let c = na / r;
    let s = a * b.conj() / Complex::new(na * r, R::zero());
    (c, s)
}

fn hessenberg_qr<R: Real>(mut h: DMatrix<Complex<R>>) -> Result<Vec<Complex<R>>> {
    let n = h.nrows();
    let eps = R::epsilon();
    let hnorm = h.iter().map(|z| cabs1(*z)).fold(R::zero(), Float::max);
    let max_iter = 30 * n.max(10);
    let mut ev = vec![Complex::zero(); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let mut rots: Vec<(R, Complex<R>)> = Vec::with_capacity(n);

    loop {
        // Deflate negligible subdiagonal entries.
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs1(h[(lo, lo - 1)]);
            let local = cabs1(h[(lo - 1, lo - 1)]) + cabs1(h[(lo, lo)]);
            if sub <= eps * local || sub <= eps * hnorm {
                h[(lo, lo - 1)] = Complex::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            ev[hi] = h[(hi, hi)];
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if total > max_iter * n {
            return Err(Error::EigenFailure);
        }

        let shift = if iter % 10 == 0 {
            // exceptional shift breaks symmetric stagnation
            h[(hi, hi)] + Complex::new(real::<R>(0.75) * cabs1(h[(hi, hi - 1)]), R::zero())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rots.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            let cz = Complex::new(c, R::zero());
            for col in k..=hi {
                let x = h[(k, col)];
                let y = h[(k + 1, col)];
                h[(k, col)] = cz * x + s * y;
                h[(k + 1, col)] = -s.conj() * x + cz * y;
            }
            h[(k + 1, k)] = Complex::zero();
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            let cz = Complex::new(*c, R::zero());
            let last = (k + 2).min(hi);
            for row in lo..=last {
                let x = h[(row, k)];
                let y = h[(row, k + 1)];
                h[(row, k)] = x * cz + y * s.conj();
                h[(row, k + 1)] = -x * s + y * cz;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(ev)
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift<R: Real>(
    a: Complex<R>,
    b: Complex<R>,
    c: Complex<R>,
    d: Complex<R>,
) -> Complex<R> {
    let two = Complex::new(real::<R>(2.0), R::zero());
    let half_tr = (a + d) / two;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// `[A - lambda I, B]` assembled in complex arithmetic.
pub fn pencil<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    lambda: Complex<T::Re>,
) -> DMatrix<Complex<T::Re>> {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = DMatrix::zeros(n, n + m);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(i, j)].to_complex();
        }
        out[(i, i)] -= lambda;
        for j in 0..m {
            out[(i, n + j)] = b[(i, j)].to_complex();
        }
    }
    out
}

pub(crate) fn real<R: Real>(x: f64) -> R {
    R::from_f64_lossy(x)
}
