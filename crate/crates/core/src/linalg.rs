//! Small dense complex linear algebra.
//!
//! Matrices here stay at a few hundred rows at most, so everything is plain
//! row-major storage with straightforward loops.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cplx(T::one());
        }
        m
    }

    pub fn from_diag(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Outer product `Σ_b b b*` over the given vectors.
    pub fn projector_onto(dim: usize, basis: &[Vec<C<T>>]) -> Self {
        let mut m = Self::zeros(dim, dim);
        for b in basis {
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] += b[i] * b[j].conj();
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C::default() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "matrix with {} columns applied to vector of length {}",
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C<T>, C<T>) -> C<T>) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `U A U*`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.data
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// `Σ conj(a_i) b_i`.
pub fn vdot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vnorm<T: Real>(a: &[C<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

pub fn vsub<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vadd<T: Real>(a: &[C<T>], b: &[C<T>]) -> Vec<C<T>> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vscale<T: Real>(a: &[C<T>], c: C<T>) -> Vec<C<T>> {
    a.iter().map(|x| x * c).collect()
}

pub fn vmax_abs_diff<T: Real>(a: &[C<T>], b: &[C<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((x - y).norm()))
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
///
/// The matrix is embedded as the real symmetric `[[Re, -Im], [Im, Re]]`, whose
/// spectrum is that of the input with every eigenvalue doubled, and
/// diagonalized by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues<T: Real>(h: &CMatrix<T>) -> Result<Vec<T>> {
    if !h.is_square() {
        return Err(Error::Shape("eigenvalues of a non-square matrix".into()));
    }
    let n = h.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = 2 * n;
    let mut a = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrize to absorb rounding in the Hermitian input
            let z = (h[(i, j)] + h[(j, i)].conj()) * T::lit(0.5);
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    jacobi_symmetric(&mut a, m);
    let mut ev: Vec<T> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    // every eigenvalue appears twice; keep one of each pair
    Ok(ev.chunks(2).map(|p| (p[0] + p[1]) * T::lit(0.5)).collect())
}

fn jacobi_symmetric<T: Real>(a: &mut [T], n: usize) {
    let total: T = a.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if total == T::zero() {
        return;
    }
    let eps = T::epsilon() * total;
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= eps {
            return;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

/// Largest singular value of `A` restricted to the span of `basis`, which
/// must be orthonormal: `sqrt(λ_max(B* A* A B))`.
pub fn restricted_spectral_norm<T: Real>(a: &CMatrix<T>, basis: &[Vec<C<T>>]) -> Result<T> {
    if basis.is_empty() {
        return Ok(T::zero());
    }
    let images: Vec<Vec<C<T>>> = basis.iter().map(|b| a.apply(b)).collect::<Result<_>>()?;
    let r = images.len();
    let gram = CMatrix::from_fn(r, r, |i, j| vdot(&images[i], &images[j]));
    let ev = hermitian_eigenvalues(&gram)?;
    Ok(ev.last().copied().unwrap_or_else(T::zero).max(T::zero()).sqrt())
}

/// Orthonormalizes the columns of `m` (modified Gram–Schmidt, two passes).
/// The implied `R` factor has a positive real diagonal, so a Gaussian input
/// yields a Haar-distributed unitary.
pub fn orthonormalize_columns<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q: Vec<Vec<C<T>>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = m.column(j);
        let orig = v.clone();
        for _ in 0..2 {
            for u in &q {
                let proj = vdot(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
        }
        let n = vnorm(&v);
        if n <= T::epsilon() * vnorm(&orig).max(T::one()) {
            return Err(Error::InvalidArgument("columns are linearly dependent".into()));
        }
        q.push(v.iter().map(|x| x / n).collect());
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| q[j][i]))
}

/// `max |U*U - I|`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> Result<T> {
    if !u.is_square() {
        return Err(Error::Shape("unitary must be square".into()));
    }
    Ok(u.adjoint().matmul(u)?.sub(&CMatrix::identity(u.rows()))?.max_abs())
}
