//! Dense Lyapunov and Sylvester solvers (Bartels–Stewart on the complex Schur form).
//!
//! [`ShiftedLyapunov`] factors a matrix `Q` once and then solves any block of
//! the Lyapunov equation whose coefficient is `blkdiag(Q + mu_1 I, ..., Q + mu_K I)`
//! by triangular back substitution on the shared Schur factor.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_part, CMat, SchurForm, ZERO};

/// Which of the two dual Lyapunov equations to solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LyapunovMode {
    /// `A^* X + X A + R = 0`
    Observability,
    /// `A X + X A^* + R = 0`
    Controllability,
}

const HERMITIAN_TOL: f64 = 1e-10;

fn gap_tolerance(scale: f64) -> f64 {
    1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
}

/// Solve `(T1 + s1)^* Y + Y (T2 + s2) + R = 0` with `T1`, `T2` upper triangular.
fn triangular_observability(
    t1: &CMat,
    s1: Complex64,
    t2: &CMat,
    s2: Complex64,
    r: &CMat,
) -> Result<CMat> {
    let (n1, n2) = (t1.nrows(), t2.nrows());
    let tol = gap_tolerance(t1.norm() + t2.norm() + s1.norm() + s2.norm());
    let mut y = CMat::zeros(n1, n2);
    let mut rhs = vec![ZERO; n1];
    for q in 0..n2 {
        for i in 0..n1 {
            rhs[i] = -r[(i, q)];
        }
        for p in 0..q {
            let coef = t2[(p, q)];
            if coef != ZERO {
                let col = y.column(p);
                for i in 0..n1 {
                    rhs[i] -= coef * col[i];
                }
            }
        }
        let shift = t2[(q, q)] + s2 + s1.conj();
        for i in 0..n1 {
            let tcol = t1.column(i);
            let mut acc = rhs[i];
            {
                let ycol = y.column(q);
                for j in 0..i {
                    acc -= tcol[j].conj() * ycol[j];
                }
            }
            let den = tcol[i].conj() + shift;
            if den.norm() <= tol {
                return Err(Error::SpectralOverlap { gap: den.norm() });
            }
            y[(i, q)] = acc / den;
        }
    }
    Ok(y)
}

/// Solve `(T1 + s1) Y + Y (T2 + s2)^* + R = 0` with `T1`, `T2` upper triangular.
fn triangular_controllability(
    t1: &CMat,
    s1: Complex64,
    t2: &CMat,
    s2: Complex64,
    r: &CMat,
) -> Result<CMat> {
    let (n1, n2) = (t1.nrows(), t2.nrows());
    let tol = gap_tolerance(t1.norm() + t2.norm() + s1.norm() + s2.norm());
    let mut y = CMat::zeros(n1, n2);
    let mut rhs = vec![ZERO; n1];
    for q in (0..n2).rev() {
        for i in 0..n1 {
            rhs[i] = -r[(i, q)];
        }
        for p in q + 1..n2 {
            let coef = t2[(q, p)].conj();
            if coef != ZERO {
                let col = y.column(p);
                for i in 0..n1 {
                    rhs[i] -= coef * col[i];
                }
            }
        }
        let shift = s1 + (t2[(q, q)] + s2).conj();
        for i in (0..n1).rev() {
            let tcol = t1.column(i);
            let den = tcol[i] + shift;
            if den.norm() <= tol {
                return Err(Error::SpectralOverlap { gap: den.norm() });
            }
            let yi = rhs[i] / den;
            y[(i, q)] = yi;
            for j in 0..i {
                rhs[j] -= tcol[j] * yi;
            }
        }
    }
    Ok(y)
}

/// One Schur factorization of `Q`, reusable for every diagonal shift `Q + mu I`.
#[derive(Clone, Debug)]
pub struct ShiftedLyapunov {
    schur: SchurForm,
}

impl ShiftedLyapunov {
    pub fn new(q: &CMat) -> Result<Self> {
        Ok(Self {
            schur: SchurForm::new(q)?,
        })
    }

    pub fn from_schur(schur: SchurForm) -> Self {
        Self { schur }
    }

    pub fn dim(&self) -> usize {
        self.schur.dim()
    }

    pub fn schur(&self) -> &SchurForm {
        &self.schur
    }

    /// Solve the `(i, j)` block equation
    /// `(Q + mu_i)^* X + X (Q + mu_j) + R = 0` (observability) or
    /// `(Q + mu_i) X + X (Q + mu_j)^* + R = 0` (controllability).
    pub fn solve_block(
        &self,
        mu_i: Complex64,
        mu_j: Complex64,
        rhs: &CMat,
        mode: LyapunovMode,
    ) -> Result<CMat> {
        let n = self.dim();
        if rhs.nrows() != n || rhs.ncols() != n {
            return Err(Error::Shape(format!(
                "block right-hand side is {}x{}, expected {n}x{n}",
                rhs.nrows(),
                rhs.ncols()
            )));
        }
        let u = &self.schur.unitary;
        let rt = u.adjoint() * rhs * u;
        let y = self.solve_block_schur(mu_i, mu_j, &rt, mode)?;
        Ok(u * y * u.adjoint())
    }

    /// Same as [`solve_block`](Self::solve_block) with `R` and the solution
    /// both expressed in Schur coordinates (`U^* R U` in, `U^* X U` out).
    pub fn solve_block_schur(
        &self,
        mu_i: Complex64,
        mu_j: Complex64,
        rhs: &CMat,
        mode: LyapunovMode,
    ) -> Result<CMat> {
        let t = &self.schur.upper;
        match mode {
            LyapunovMode::Observability => triangular_observability(t, mu_i, t, mu_j, rhs),
            LyapunovMode::Controllability => triangular_controllability(t, mu_i, t, mu_j, rhs),
        }
    }

    /// Solve the full `Kn x Kn` equation with coefficient `blkdiag(Q + mu_k I)`.
    ///
    /// Only the upper block triangle is solved; the lower one follows from
    /// Hermitian symmetry. Blocks run in parallel but are assembled in a
    /// fixed order.
    pub fn solve(&self, shifts: &[Complex64], rhs: &CMat, mode: LyapunovMode) -> Result<CMat> {
        let n = self.dim();
        let k = shifts.len();
        if rhs.nrows() != n * k || rhs.ncols() != n * k {
            return Err(Error::Shape(format!(
                "right-hand side is {}x{}, expected {}x{}",
                rhs.nrows(),
                rhs.ncols(),
                n * k,
                n * k
            )));
        }
        let defect = hermitian_defect(rhs);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: defect });
        }
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
        let blocks: Vec<Result<CMat>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let r = rhs.view((i * n, j * n), (n, n)).into_owned();
                self.solve_block(shifts[i], shifts[j], &r, mode)
            })
            .collect();
        let mut x = CMat::zeros(n * k, n * k);
        for (&(i, j), block) in pairs.iter().zip(blocks) {
            let mut block = block?;
            if i == j {
                block = hermitian_part(&block);
                x.view_mut((i * n, i * n), (n, n)).copy_from(&block);
            } else {
                x.view_mut((i * n, j * n), (n, n)).copy_from(&block);
                x.view_mut((j * n, i * n), (n, n)).copy_from(&block.adjoint());
            }
        }
        Ok(x)
    }
}

/// Solve `A^* X + X A + R = 0` or `A X + X A^* + R = 0` for Hermitian `R`.
pub fn solve_lyapunov(a: &CMat, rhs: &CMat, mode: LyapunovMode) -> Result<CMat> {
    if !a.is_square() || rhs.shape() != a.shape() {
        return Err(Error::Shape(format!(
            "Lyapunov coefficient {}x{} and right-hand side {}x{} do not match",
            a.nrows(),
            a.ncols(),
            rhs.nrows(),
            rhs.ncols()
        )));
    }
    let defect = hermitian_defect(rhs);
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let solver = ShiftedLyapunov::new(a)?;
    let x = solver.solve_block(ZERO, ZERO, rhs, mode)?;
    Ok(hermitian_part(&x))
}

/// Solve the block-shifted Lyapunov equation with coefficient
/// `blkdiag(Q + mu_1 I, ..., Q + mu_K I)`, factoring `Q` once.
pub fn solve_lyapunov_block_shifted(
    q: &CMat,
    shifts: &[Complex64],
    rhs: &CMat,
    mode: LyapunovMode,
) -> Result<CMat> {
    ShiftedLyapunov::new(q)?.solve(shifts, rhs, mode)
}

/// Solve the Sylvester equation `A^* X + X B + R = 0` (two independent Schur forms).
pub fn solve_sylvester(a: &CMat, b: &CMat, rhs: &CMat) -> Result<CMat> {
    let sa = SchurForm::new(a)?;
    let sb = SchurForm::new(b)?;
    solve_sylvester_schur(&sa, &sb, rhs)
}

/// As [`solve_sylvester`] with precomputed Schur forms.
pub fn solve_sylvester_schur(sa: &SchurForm, sb: &SchurForm, rhs: &CMat) -> Result<CMat> {
    if rhs.nrows() != sa.dim() || rhs.ncols() != sb.dim() {
        return Err(Error::Shape(format!(
            "Sylvester right-hand side is {}x{}, expected {}x{}",
            rhs.nrows(),
            rhs.ncols(),
            sa.dim(),
            sb.dim()
        )));
    }
    let rt = sa.unitary.adjoint() * rhs * &sb.unitary;
    let y = triangular_observability(&sa.upper, ZERO, &sb.upper, ZERO, &rt)?;
    Ok(&sa.unitary * y * sb.unitary.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cplx;

    fn kron_oracle(a: &CMat, rhs: &CMat, mode: LyapunovMode) -> CMat {
        // vec(A^* X + X A) = (I ⊗ A^* + A^T ⊗ I) vec(X), column-major vec.
        let n = a.nrows();
        let (left, right) = match mode {
            LyapunovMode::Observability => (a.adjoint(), a.clone()),
            LyapunovMode::Controllability => (a.clone(), a.adjoint()),
        };
        let mut k = CMat::zeros(n * n, n * n);
        for j in 0..n {
            for i in 0..n {
                let row = j * n + i;
                for p in 0..n {
                    k[(row, j * n + p)] += left[(i, p)];
                    k[(row, p * n + i)] += right[(p, j)];
                }
            }
        }
        let b = CMat::from_iterator(n * n, 1, rhs.iter().map(|z| -z));
        let x = k.lu().solve(&b).unwrap();
        CMat::from_iterator(n, n, x.iter().cloned())
    }

    fn sample(n: usize, salt: usize) -> CMat {
        let mut a = CMat::from_fn(n, n, |i, j| {
            let v = ((i * 13 + j * 7 + salt * 5) % 11) as f64 / 11.0 - 0.5;
            let w = ((i * 3 + j * 17 + salt) % 7) as f64 / 7.0 - 0.5;
            cplx(v, 0.3 * w)
        });
        for i in 0..n {
            a[(i, i)] -= cplx(2.5, 0.0);
        }
        a
    }

    #[test]
    fn scalar_observability() {
        let a = CMat::from_element(1, 1, cplx(-1.0, 0.0));
        let r = CMat::from_element(1, 1, cplx(1.0, 0.0));
        let x = solve_lyapunov(&a, &r, LyapunovMode::Observability).unwrap();
        assert!((x[(0, 0)] - cplx(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_kronecker_oracle_both_modes() {
        let a = sample(4, 1);
        let g = sample(4, 2);
        let r = &g * g.adjoint();
        for mode in [LyapunovMode::Observability, LyapunovMode::Controllability] {
            let x = solve_lyapunov(&a, &r, mode).unwrap();
            let oracle = kron_oracle(&a, &r, mode);
            assert!((&x - &oracle).norm() <= 1e-10 * oracle.norm());
            assert!(hermitian_defect(&x) <= 1e-13);
        }
    }

    #[test]
    fn rejects_non_hermitian_rhs() {
        let a = sample(3, 0);
        let r = CMat::from_fn(3, 3, |i, j| cplx(i as f64, j as f64));
        assert!(matches!(
            solve_lyapunov(&a, &r, LyapunovMode::Observability),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_spectral_overlap() {
        // A = diag(1, -1): lambda_1 + conj(lambda_2) = 0.
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cplx(1.0, 0.0), cplx(-1.0, 0.0)]));
        let r = CMat::identity(2, 2);
        assert!(matches!(
            solve_lyapunov(&a, &r, LyapunovMode::Observability),
            Err(Error::SpectralOverlap { .. })
        ));
    }

    #[test]
    fn sylvester_residual() {
        let a = sample(4, 3);
        let b = sample(3, 4);
        let r = CMat::from_fn(4, 3, |i, j| cplx(i as f64 - j as f64, 0.25 * (i + j) as f64));
        let x = solve_sylvester(&a, &b, &r).unwrap();
        let res = a.adjoint() * &x + &x * &b + &r;
        assert!(res.norm() <= 1e-12 * r.norm());
    }
}
