//! Dense complex linear-algebra kernels shared by every other module.
//!
//! All matrices are `DMatrix<Complex64>`; real data is embedded with a zero
//! imaginary part. The complex Schur form comes from nalgebra, eigenvectors
//! are recovered from the triangular factor by back substitution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Condition estimate above which an eigenvector basis is treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e12;

#[inline]
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn to_complex_vec(v: &DVector<f64>) -> CVec {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Largest absolute imaginary entry.
pub fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.im.abs()))
}

pub fn is_real(m: &CMat, tol: f64) -> bool {
    max_imag(m) <= tol * m.norm().max(f64::MIN_POSITIVE)
}

/// Plain transpose-dot `x^T y`, no conjugation.
pub fn dotu(x: &CVec, y: &CVec) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn max_real_part(values: &[Complex64]) -> f64 {
    values.iter().fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re))
}

pub fn spectral_radius(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Smallest pairwise distance between listed values (infinite for fewer than two).
pub fn min_separation(values: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// Complex Schur factorization `A = U T U^*` with `T` upper triangular.
#[derive(Clone, Debug)]
pub struct SchurForm {
    pub unitary: CMat,
    pub upper: CMat,
}

impl SchurForm {
    pub fn new(a: &CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "Schur form needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        if n == 0 {
            return Ok(Self {
                unitary: CMat::zeros(0, 0),
                upper: CMat::zeros(0, 0),
            });
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 200 * n.max(10))
            .ok_or(Error::NoConvergence)?;
        let (unitary, mut upper) = schur.unpack();
        // nalgebra leaves roundoff below the diagonal; the kernels assume exact zeros.
        for j in 0..n {
            for i in j + 1..n {
                upper[(i, j)] = ZERO;
            }
        }
        Ok(Self { unitary, upper })
    }

    pub fn dim(&self) -> usize {
        self.upper.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.upper[(i, i)]).collect()
    }
}

/// Eigendecomposition `A = S diag(values) S^{-1}`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    /// Right eigenvectors as unit-norm columns.
    pub vectors: CMat,
    /// `S^{-1}`; its rows are the matching left eigenvectors.
    pub inverse: CMat,
    /// `||S||_F ||S^{-1}||_F`, an upper estimate of the 2-norm condition number.
    pub condition: f64,
}

impl Eigen {
    pub fn new(a: &CMat) -> Result<Self> {
        let schur = SchurForm::new(a)?;
        Self::from_schur(&schur)
    }

    pub fn from_schur(schur: &SchurForm) -> Result<Self> {
        let t = &schur.upper;
        let n = t.nrows();
        let values = schur.eigenvalues();
        let tnorm = t.norm().max(f64::MIN_POSITIVE);
        let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
        let mut y = CMat::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = ONE;
            for i in (0..k).rev() {
                let mut acc = ZERO;
                for j in i + 1..=k {
                    acc += t[(i, j)] * y[(j, k)];
                }
                let mut den = t[(i, i)] - lambda;
                if den.norm() < smin {
                    den = Complex64::new(smin, 0.0);
                }
                y[(i, k)] = -acc / den;
            }
        }
        let mut vectors = &schur.unitary * y;
        for mut col in vectors.column_iter_mut() {
            let nrm = col.norm();
            if nrm > 0.0 {
                col /= Complex64::new(nrm, 0.0);
            }
        }
        let inverse = match vectors.clone().try_inverse() {
            Some(inv) => inv,
            None => {
                return Err(Error::Defective {
                    condition: f64::INFINITY,
                })
            }
        };
        let condition = vectors.norm() * inverse.norm();
        if !condition.is_finite() || condition > DEFECTIVE_CONDITION {
            return Err(Error::Defective { condition });
        }
        Ok(Self {
            values,
            vectors,
            inverse,
            condition,
        })
    }

    /// Rebuild `f(A) = S f(Λ) S^{-1}` for a scalar function applied to the eigenvalues.
    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        scaled * &self.inverse
    }
}

/// LU solve with a pivot-ratio singularity gate.
pub fn solve(a: &CMat, rhs: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let lu = a.clone().lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = u[(i, i)].norm();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if n > 0 && (hi == 0.0 || lo <= hi * f64::EPSILON * n as f64) {
        return None;
    }
    lu.solve(rhs)
}

/// Solve `(s I - A) X = rhs`.
pub fn shifted_solve(a: &CMat, s: Complex64, rhs: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let mut m = -a.clone();
    for i in 0..n {
        m[(i, i)] += s;
    }
    solve(&m, rhs).ok_or(Error::SingularShift { shift: s })
}

/// Orthonormal basis for the column span of `v` via thin QR.
pub fn orthonormalize(v: &CMat) -> CMat {
    let qr = v.clone().qr();
    qr.q()
}

/// `(M + M^*) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Relative deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let nrm = m.norm();
    if nrm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / nrm
}

/// Block-diagonal assembly of square blocks.
pub fn block_diag(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(n, m);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Matrix exponential through an eigendecomposition.
pub fn expm_eigen(a: &CMat) -> Result<CMat> {
    let eig = Eigen::new(a)?;
    Ok(eig.apply(|z| z.exp()))
}
