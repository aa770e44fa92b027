//! Dense self-adjoint matrices and the spectral kernels built on them.
//!
//! [`SelfAdjoint<T>`] stores an `n × n` matrix whose entries satisfy
//! `m[i][j] == conj(m[j][i])` bit for bit. The real instance is
//! [`SymmetricMatrix`], the complex one [`HermitianMatrix`]. Elementwise
//! arithmetic between self-adjoint matrices preserves the invariant exactly;
//! anything that goes through a matrix product is re-symmetrized on the way
//! back in.
//!
//! Eigendecompositions are delegated to `nalgebra` (small matrices) or `faer`
//! (large ones) and re-sorted so that eigenvalues are descending.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, invalid, Error, Result};

/// Dimension from which eigendecompositions go through `faer`, whose blocked
/// tridiagonalization beats `nalgebra` on larger matrices.
const FAER_MIN_DIM: usize = 96;

/// Scalar field of a self-adjoint matrix: `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + Send + Sync + fmt::Display + 'static
{
    const IS_COMPLEX: bool;

    /// Real and imaginary parts.
    fn parts(self) -> (f64, f64);

    /// Builds a scalar from parts; real scalars reject a non-zero imaginary part.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    /// Standard Gaussian draw (complex draws have `E|z|² = 2`).
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Unsorted eigenpairs of a self-adjoint matrix via `faer`.
    fn faer_eigen(m: &DMatrix<Self>) -> Option<(Vec<f64>, DMatrix<Self>)>;
}

fn faer_eigen_impl<T>(m: &DMatrix<T>) -> Option<(Vec<f64>, DMatrix<T>)>
where
    T: Scalar + faer::traits::ComplexField,
{
    let n = m.nrows();
    let fm = faer::Mat::<T>::from_fn(n, n, |i, j| m[(i, j)]);
    let eig = fm.self_adjoint_eigen(faer::Side::Lower).ok()?;
    let (s, u) = (eig.S(), eig.U());
    let values = (0..n).map(|k| s[k].real()).collect();
    Some((values, DMatrix::from_fn(n, n, |i, k| u[(i, k)])))
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn faer_eigen(m: &DMatrix<Self>) -> Option<(Vec<f64>, DMatrix<Self>)> {
        faer_eigen_impl(m)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    fn faer_eigen(m: &DMatrix<Self>) -> Option<(Vec<f64>, DMatrix<Self>)> {
        faer_eigen_impl(m)
    }
}

/// A dense `n × n` real-symmetric or complex-Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfAdjoint<T: Scalar> {
    m: DMatrix<T>,
}

pub type SymmetricMatrix = SelfAdjoint<f64>;
pub type HermitianMatrix = SelfAdjoint<Complex64>;

/// Eigenpairs sorted by descending eigenvalue; `vectors` has orthonormal columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Scalar> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

impl<T: Scalar> SelfAdjoint<T> {
    /// Wraps a square matrix, replacing it by its self-adjoint part `(M + M*)/2`.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(invalid("matrix dimension must be at least 1"));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self::symmetrized(m))
    }

    /// Like [`SelfAdjoint::new`] but rejects inputs that are not already
    /// self-adjoint to within `tol` (absolute, entrywise).
    pub fn new_checked(m: DMatrix<T>, tol: f64) -> Result<Self> {
        let n = m.nrows();
        if n == m.ncols() {
            for i in 0..n {
                for j in 0..=i {
                    let d = (m[(i, j)] - m[(j, i)].conjugate()).modulus();
                    if d > tol {
                        return Err(invalid(format!(
                            "entries ({i},{j}) and ({j},{i}) are not conjugate (gap {d:e})"
                        )));
                    }
                }
            }
        }
        Self::new(m)
    }

    /// Builds the matrix from its upper triangle: `f(i, j)` is called for
    /// `i <= j` only and mirrored. Diagonal values keep their real part.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        let mut m = DMatrix::<T>::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                let v = f(i, j);
                if i == j {
                    m[(i, i)] = T::from_real(v.real());
                } else {
                    m[(i, j)] = v;
                    m[(j, i)] = v.conjugate();
                }
            }
        }
        Self { m }
    }

    fn symmetrized(mut m: DMatrix<T>) -> Self {
        let n = m.nrows();
        let half = T::from_real(0.5);
        for j in 0..n {
            m[(j, j)] = T::from_real(m[(j, j)].real());
            for i in 0..j {
                let v = (m[(i, j)] + m[(j, i)].conjugate()) * half;
                m[(i, j)] = v;
                m[(j, i)] = v.conjugate();
            }
        }
        Self { m }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_upper(n, |_, _| T::from_real(0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_upper(n, |i, j| if i == j { T::from_real(1.0) } else { T::from_real(0.0) })
    }

    /// The all-ones matrix `J`.
    pub fn ones(n: usize) -> Self {
        Self::from_upper(n, |_, _| T::from_real(1.0))
    }

    /// `v v*`.
    pub fn outer(v: &DVector<T>) -> Self {
        Self::from_upper(v.len(), |i, j| v[i] * v[j].conjugate())
    }

    /// `Y Y*` for a factor with `n` rows.
    pub fn gram(y: &DMatrix<T>) -> Self {
        Self::symmetrized(y * y.adjoint())
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self::from_upper(d.len(), |i, j| if i == j { T::from_real(d[i]) } else { T::from_real(0.0) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.m[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].real()).collect()
    }

    /// Applies `f` to the upper triangle and mirrors.
    pub fn map_upper(&self, mut f: impl FnMut(usize, usize, T) -> T) -> Self {
        Self::from_upper(self.dim(), |i, j| f(i, j, self.m[(i, j)]))
    }

    /// Applies an entrywise map that commutes with conjugation.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        self.map_upper(|_, _, v| f(v))
    }

    pub fn scale(&self, s: f64) -> Self {
        let s = T::from_real(s);
        Self { m: self.m.map(|x| x * s) }
    }

    /// `self + s * other` without an intermediate allocation.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        let s = T::from_real(s);
        Self { m: self.m.zip_map(&other.m, |a, b| a + b * s) }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
    }

    /// Entrywise ℓ₁ norm `Σ |m_ij|`.
    pub fn l1_norm(&self) -> f64 {
        self.m.iter().map(|x| x.modulus()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, x| acc.max(x.modulus()))
    }

    /// Sum of all entries; real because the matrix is self-adjoint.
    pub fn entry_sum(&self) -> f64 {
        self.m.iter().map(|x| x.real()).sum()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Full eigendecomposition with eigenvalues in descending order.
    pub fn eigen(&self) -> Result<EigenDecomposition<T>> {
        if self.m.iter().any(|x| !x.is_finite()) {
            return Err(invalid("eigendecomposition of a matrix with non-finite entries"));
        }
        let n = self.dim();
        let (raw_values, raw_vectors) = if n >= FAER_MIN_DIM {
            T::faer_eigen(&self.m)
        } else {
            self.m.clone().try_symmetric_eigen(f64::EPSILON, 0).map(|e| (e.eigenvalues.as_slice().to_vec(), e.eigenvectors))
        }
        .ok_or_else(|| invalid("eigendecomposition did not converge"))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw_values[b].total_cmp(&raw_values[a]));
        let values = order.iter().map(|&k| raw_values[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, c| raw_vectors[(i, order[c])]);
        Ok(EigenDecomposition { values, vectors })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigen()?.values.last().expect("n >= 1"))
    }

    /// Frobenius-nearest positive semidefinite matrix: negative eigenvalues
    /// are clamped to zero.
    pub fn project_psd(&self) -> Result<Self> {
        let eig = self.eigen()?;
        Ok(eig.reconstruct_clamped())
    }

    /// Leading eigenpair `(λ_max, v)` with `‖v‖₂ = target_norm`.
    ///
    /// Phase convention: the first entry of largest modulus is made real and
    /// non-negative. A degenerate top eigenspace yields whichever maximizer
    /// the eigensolver returns, normalized by the same convention.
    pub fn top_eigenvector(&self, target_norm: f64) -> Result<(f64, DVector<T>)> {
        let eig = self.eigen()?;
        let v = eig.vectors.column(0).into_owned();
        Ok((eig.values[0], normalize_phase(v, target_norm)))
    }
}

/// Rescales `v` to `target_norm` and rotates it so that its first
/// largest-modulus entry is real and non-negative.
pub(crate) fn normalize_phase<T: Scalar>(v: DVector<T>, target_norm: f64) -> DVector<T> {
    let norm = v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v;
    }
    let mut pivot = 0;
    let mut best = -1.0;
    for (i, x) in v.iter().enumerate() {
        // Small slack so rounding noise cannot move the pivot between
        // entries of numerically equal modulus.
        if x.modulus() > best * (1.0 + 1e-12) {
            best = x.modulus();
            pivot = i;
        }
    }
    let p = v[pivot];
    let rot = if p.modulus() > 0.0 { p.conjugate() * T::from_real(1.0 / p.modulus()) } else { T::from_real(1.0) };
    let s = T::from_real(target_norm / norm);
    v.map(|x| x * rot * s)
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V max(Λ, 0) V*`.
    pub fn reconstruct_clamped(&self) -> SelfAdjoint<T> {
        let n = self.dim();
        let keep: Vec<usize> = (0..n).filter(|&k| self.values[k] > 0.0).collect();
        if keep.is_empty() {
            return SelfAdjoint::zeros(n);
        }
        let w = DMatrix::from_fn(n, keep.len(), |i, c| {
            let k = keep[c];
            self.vectors[(i, k)] * T::from_real(self.values[k].sqrt())
        });
        SelfAdjoint::gram(&w)
    }

    /// `V Λ V*`.
    pub fn reconstruct(&self) -> SelfAdjoint<T> {
        let n = self.dim();
        let scaled = DMatrix::from_fn(n, n, |i, k| self.vectors[(i, k)] * T::from_real(self.values[k]));
        SelfAdjoint::symmetrized(scaled * self.vectors.adjoint())
    }
}

/// `⟨A, B⟩ = Σ_ij A_ij conj(B_ij)`, real for self-adjoint arguments.
pub fn frobenius_inner<T: Scalar>(a: &SelfAdjoint<T>, b: &SelfAdjoint<T>) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(inner_unchecked(a, b))
}

pub(crate) fn inner_unchecked<T: Scalar>(a: &SelfAdjoint<T>, b: &SelfAdjoint<T>) -> f64 {
    // Re(a conj(b)) summed; the imaginary parts cancel pairwise.
    a.m.iter()
        .zip(b.m.iter())
        .map(|(x, y)| {
            let (xr, xi) = x.parts();
            let (yr, yi) = y.parts();
            xr * yr + xi * yi
        })
        .sum()
}

/// Thin singular value decomposition `M = U diag(σ) Vᵀ`, σ descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(invalid("svd of a matrix with non-finite entries"));
    }
    if m.is_empty() {
        return Err(invalid("svd of an empty matrix"));
    }
    let dec = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| invalid("svd did not converge"))?;
    let u = dec.u.expect("requested U");
    let vt = dec.v_t.expect("requested Vᵀ");
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    Ok(Svd {
        u: DMatrix::from_fn(u.nrows(), k, |i, c| u[(i, order[c])]),
        singular_values: order.iter().map(|&c| dec.singular_values[c]).collect(),
        v: DMatrix::from_fn(vt.ncols(), k, |i, c| vt[(order[c], i)]),
    })
}

impl<T: Scalar> Add for &SelfAdjoint<T> {
    type Output = SelfAdjoint<T>;
    fn add(self, rhs: Self) -> SelfAdjoint<T> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matrix sum");
        SelfAdjoint { m: &self.m + &rhs.m }
    }
}

impl<T: Scalar> Sub for &SelfAdjoint<T> {
    type Output = SelfAdjoint<T>;
    fn sub(self, rhs: Self) -> SelfAdjoint<T> {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matrix difference");
        SelfAdjoint { m: &self.m - &rhs.m }
    }
}

impl<T: Scalar> Mul<f64> for &SelfAdjoint<T> {
    type Output = SelfAdjoint<T>;
    fn mul(self, s: f64) -> SelfAdjoint<T> {
        self.scale(s)
    }
}

/// Writes the coordinate text format: a header `n nnz`, then one line per
/// non-zero entry, `i j value` (real) or `i j re im` (complex), 1-indexed,
/// column-major order. Values use the shortest round-trip representation.
pub fn write_coordinate<T: Scalar, W: Write>(m: &SelfAdjoint<T>, mut w: W) -> Result<()> {
    let n = m.dim();
    let nnz = m.m.iter().filter(|x| x.modulus_squared() != 0.0).count();
    writeln!(w, "{n} {nnz}")?;
    for j in 0..n {
        for i in 0..n {
            let x = m.m[(i, j)];
            if x.modulus_squared() == 0.0 {
                continue;
            }
            let (re, im) = x.parts();
            if T::IS_COMPLEX {
                writeln!(w, "{} {} {re:?} {im:?}", i + 1, j + 1)?;
            } else {
                writeln!(w, "{} {} {re:?}", i + 1, j + 1)?;
            }
        }
    }
    Ok(())
}

/// Reads the coordinate text format written by [`write_coordinate`].
/// Entries absent from the file are zero; the result must be self-adjoint.
pub fn read_coordinate<T: Scalar, R: BufRead>(r: R) -> Result<SelfAdjoint<T>> {
    let mut lines = r.lines().enumerate().filter_map(|(k, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        other => Some((k + 1, other)),
    });
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
    let header = header?;
    let hv: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str, line: usize| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse { line, msg: format!("expected an integer, found {s:?}") })
    };
    if hv.len() != 2 {
        return Err(Error::Parse { line: hline, msg: "header must be `n nnz`".into() });
    }
    let n = parse_usize(hv[0], hline)?;
    let nnz = parse_usize(hv[1], hline)?;
    if n == 0 {
        return Err(Error::Parse { line: hline, msg: "dimension must be at least 1".into() });
    }
    let mut m = DMatrix::<T>::zeros(n, n);
    let mut count = 0;
    for (line, text) in lines {
        let text = text?;
        let f: Vec<&str> = text.split_whitespace().collect();
        let want = if T::IS_COMPLEX { 4 } else { 3 };
        if f.len() != want {
            return Err(Error::Parse { line, msg: format!("expected {want} fields, found {}", f.len()) });
        }
        let i = parse_usize(f[0], line)?;
        let j = parse_usize(f[1], line)?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Parse { line, msg: format!("index ({i},{j}) outside 1..={n}") });
        }
        let num = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse { line, msg: format!("expected a number, found {s:?}") })
        };
        let re = num(f[2])?;
        let im = if T::IS_COMPLEX { num(f[3])? } else { 0.0 };
        m[(i - 1, j - 1)] = T::from_parts(re, im).expect("imaginary part only read for complex scalars");
        count += 1;
    }
    if count != nnz {
        return Err(Error::Parse { line: hline, msg: format!("header announces {nnz} entries, found {count}") });
    }
    SelfAdjoint::new_checked(m, 0.0)
}
