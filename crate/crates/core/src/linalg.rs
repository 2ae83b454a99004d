//! Dense complex linear algebra for the small (2×2 and 4×4) operators used
//! throughout the crate.
//!
//! Matrices are stored inline in a fixed `MAX_DIM × MAX_DIM` buffer so they
//! are `Copy` and never allocate; this matters in the master-equation
//! integrator where millions of products are formed per run.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Default absolute tolerance for structural checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix of dimension `dim ≤ 4`, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [Complex64; MAX_DIM * MAX_DIM],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "matrix dimension {dim} outside 1..={MAX_DIM}"
        );
        Self {
            dim,
            data: [ZERO; MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from nested rows. Panics on ragged or oversized input.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "row {i} has length {} != {dim}", row.len());
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), dim, "row {i} has length {} != {dim}", row.len());
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[StateVector]) -> Self {
        let dim = cols.len();
        let mut m = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.dim(), dim);
            for i in 0..dim {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        assert_eq!(a.dim(), b.dim());
        let mut m = Self::zeros(a.dim());
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, j: usize) -> StateVector {
        let mut v = StateVector::zeros(self.dim);
        for i in 0..self.dim {
            v[i] = self[(i, j)];
        }
        v
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(j, i)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for v in m.data.iter_mut() {
            *v *= s;
        }
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance `max |Aᵢⱼ − Bᵢⱼ|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        (*self - *other).max_abs()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// `max |A − A†|`.
    pub fn hermiticity_residue(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residue() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        (*self + self.adjoint()).max_abs() <= tol
    }

    /// `max |A†A − 1|`.
    pub fn unitarity_residue(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residue() <= tol
    }

    /// Upper-left `dim × dim` block.
    pub fn top_left(&self, dim: usize) -> Self {
        assert!(dim <= self.dim);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }

    /// Embeds `self` as the upper-left block of a larger zero matrix.
    pub fn embed(&self, dim: usize) -> Self {
        assert!(dim >= self.dim);
        let mut m = Self::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self[(i, j)];
            }
        }
        m
    }

    /// `(M + M†)/2` if the drift `max|M − M†|` is below `drift_bound`.
    pub fn hermitize(&self, drift_bound: f64) -> Result<Self> {
        let residue = self.hermiticity_residue();
        if !(residue < drift_bound) {
            return Err(Error::IntegrationDiverged(format!(
                "hermiticity drift {residue:.3e} exceeds bound {drift_bound:.3e}"
            )));
        }
        Ok((*self + self.adjoint()).scale_real(0.5))
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    pub fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.dim).flat_map(move |i| (0..self.dim).map(move |j| self[(i, j)]))
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues ascending; eigenvectors are the columns of the
    /// returned unitary.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        if !self.is_hermitian(1e-9 * self.max_abs().max(1.0)) {
            return Err(Error::Validation(format!(
                "hermitian_eigen: matrix not Hermitian (residue {:.3e})",
                self.hermiticity_residue()
            )));
        }
        Ok(jacobi_eigen(self))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &self.data[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.dim && j < self.dim);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl Add for ComplexMatrix {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexMatrix {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a += *b;
        }
    }
}

impl Sub for ComplexMatrix {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl SubAssign for ComplexMatrix {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(rhs.data.iter()) {
            *a -= *b;
        }
    }
}

impl Neg for ComplexMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * MAX_DIM + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * MAX_DIM + j] += a * rhs.data[k * MAX_DIM + j];
                }
            }
        }
        out
    }
}

impl Mul<StateVector> for ComplexMatrix {
    type Output = StateVector;
    fn mul(self, rhs: StateVector) -> StateVector {
        assert_eq!(self.dim, rhs.dim(), "dimension mismatch");
        let mut out = StateVector::zeros(self.dim);
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self[(i, j)] * rhs[j]).sum();
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Result of [`ComplexMatrix::hermitian_eigen`].
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    pub values: [f64; MAX_DIM],
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values[..self.vectors.dim()]
    }

    /// `V · diag(g(λ)) · V†`.
    pub fn map(&self, g: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let diag: Vec<Complex64> = self.eigenvalues().iter().map(|&l| g(l)).collect();
        let mut scaled = self.vectors;
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= diag[j];
            }
        }
        scaled * self.vectors.adjoint()
    }
}

fn jacobi_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.dim();
    let mut a = *m;
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                // Phase-align a_pq to a real positive number, then apply a
                // real symmetric rotation.
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let mut j = ComplexMatrix::identity(n);
                j[(p, p)] = Complex64::new(c, 0.0);
                j[(p, q)] = Complex64::new(s, 0.0);
                j[(q, p)] = -phase.conj() * s;
                j[(q, q)] = phase.conj() * c;
                a = j.adjoint() * a * j;
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                v = v * j;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let mut values = [0.0; MAX_DIM];
    let mut vectors = ComplexMatrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        values[k] = a[(src, src)].re;
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    HermitianEigen { values, vectors }
}

/// `exp(G·t)` for an anti-Hermitian generator `G`, via the spectral
/// decomposition of the Hermitian matrix `iG`.
pub fn expm_generator(generator: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let tol = DEFAULT_TOL * generator.max_abs().max(1.0);
    if !generator.is_anti_hermitian(tol) {
        return Err(Error::Validation(format!(
            "expm_generator: generator is not anti-Hermitian (residue {:.3e})",
            (*generator + generator.adjoint()).max_abs()
        )));
    }
    let h = generator.scale(I);
    // Symmetrize away rounding so the Jacobi solver sees an exact Hermitian.
    let h = (h + h.adjoint()).scale_real(0.5);
    let eig = jacobi_eigen(&h);
    // G = -i H, so exp(G t) = V diag(e^{-i λ t}) V†.
    Ok(eig.map(|l| Complex64::from_polar(1.0, -l * t)))
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(hamiltonian: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    expm_generator(&hamiltonian.scale(-I), t)
}

/// Complex column vector of dimension `≤ 4`.
#[derive(Clone, Copy, PartialEq)]
pub struct StateVector {
    dim: usize,
    amps: [Complex64; MAX_DIM],
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        Self {
            dim,
            amps: [ZERO; MAX_DIM],
        }
    }

    /// Unnormalized vector from amplitudes.
    pub fn from_amplitudes(amps: &[Complex64]) -> Self {
        let mut v = Self::zeros(amps.len());
        v.amps[..amps.len()].copy_from_slice(amps);
        v
    }

    pub fn from_real(amps: &[f64]) -> Self {
        let c: Vec<Complex64> = amps.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_amplitudes(&c)
    }

    /// Normalizing constructor.
    pub fn normalized(amps: &[Complex64]) -> Result<Self> {
        let v = Self::from_amplitudes(amps);
        let n = v.norm();
        if !(n > 1e-300) || !n.is_finite() {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        Ok(v.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v[k] = ONE;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps[..self.dim]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        (0..self.dim).map(|i| self[i].conj() * other[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut v = *self;
        for a in v.amps.iter_mut() {
            *a *= s;
        }
        v
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(self, self)
    }
}

impl Index<usize> for StateVector {
    type Output = Complex64;
    #[inline]
    fn index(&self, i: usize) -> &Complex64 {
        debug_assert!(i < self.dim);
        &self.amps[i]
    }
}

impl IndexMut<usize> for StateVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        debug_assert!(i < self.dim);
        &mut self.amps[i]
    }
}

impl Add for StateVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.amps[i] += rhs.amps[i];
        }
        self
    }
}

impl Sub for StateVector {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        for i in 0..self.dim {
            self.amps[i] -= rhs.amps[i];
        }
        self
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amplitudes()).finish()
    }
}

/// Hermitian, unit-trace, positive semidefinite 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates `m` as a density matrix within `tol`.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let herm = m.hermiticity_residue();
        if herm > tol {
            return Err(Error::Validation(format!(
                "density matrix not Hermitian (residue {herm:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::Validation(format!(
                "density matrix trace {:.12} != 1",
                tr.re
            )));
        }
        let min_eig = jacobi_eigen(&(m + m.adjoint()).scale_real(0.5)).values[0];
        if min_eig < -tol {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Wraps `m` without validation. For states produced by trusted dynamics.
    pub fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "pure state vector has norm {n:.15}, expected 1"
            )));
        }
        Ok(Self(psi.projector()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `Tr σ²`.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    pub fn min_eigenvalue(&self) -> f64 {
        jacobi_eigen(&(self.0 + self.0.adjoint()).scale_real(0.5)).values[0]
    }

    /// `U σ U†`.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self(self.0.conjugate_by(u))
    }
}

/// `F = Tr{σ_ref σ}` for a pure reference state.
pub fn state_fidelity(reference: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if !reference.is_pure(1e-8) {
        return Err(Error::Validation(format!(
            "fidelity reference must be pure (Tr σ² = {:.12})",
            reference.purity()
        )));
    }
    let tr = (*reference.matrix() * *sigma.matrix()).trace();
    if tr.im.abs() >= 1e-10 {
        return Err(Error::Validation(format!(
            "fidelity trace has imaginary residue {:.3e}",
            tr.im
        )));
    }
    Ok(tr.re)
}
