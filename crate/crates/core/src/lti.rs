//! Dense continuous-time LTI systems `x' = Ax + Bu, y = Cx` and their H2 geometry.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    max_real_part, min_separation, shifted_solve, spectral_radius, to_complex, CMat, Eigen,
    SchurForm,
};
use crate::lyapunov::{solve_sylvester_schur, LyapunovMode, ShiftedLyapunov};

/// Eigenvalues with real part at or above `-STABILITY_MARGIN` count as unstable.
pub const STABILITY_MARGIN: f64 = 1e-10;

/// Poles closer than this fraction of the spectral radius are treated as clustered.
pub const POLE_CLUSTER_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct LtiSystem {
    a: CMat,
    b: CMat,
    c: CMat,
}

/// Eigenvalues of the state matrix, optionally with right/left eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub right: Option<CMat>,
    pub left: Option<CMat>,
}

impl Spectrum {
    pub fn max_real_part(&self) -> f64 {
        max_real_part(&self.eigenvalues)
    }

    pub fn is_stable(&self) -> bool {
        self.max_real_part() < -STABILITY_MARGIN
    }
}

impl LtiSystem {
    pub fn new(a: CMat, b: CMat, c: CMat) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || !a.is_square() {
            return Err(Error::Shape(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(Error::Shape(format!("B is {}x{}, expected {n}xm", b.nrows(), b.ncols())));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(Error::Shape(format!("C is {}x{}, expected px{n}", c.nrows(), c.ncols())));
        }
        Ok(Self { a, b, c })
    }

    pub fn from_real(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<Self> {
        Self::new(to_complex(a), to_complex(b), to_complex(c))
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn into_parts(self) -> (CMat, CMat, CMat) {
        (self.a, self.b, self.c)
    }

    /// True when every matrix has (relatively) negligible imaginary part.
    pub fn is_real(&self, tol: f64) -> bool {
        crate::linalg::is_real(&self.a, tol)
            && crate::linalg::is_real(&self.b, tol)
            && crate::linalg::is_real(&self.c, tol)
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        let schur = SchurForm::new(&self.a)?;
        Ok(Spectrum {
            eigenvalues: schur.eigenvalues(),
            right: None,
            left: None,
        })
    }

    pub fn spectrum_with_vectors(&self) -> Result<Spectrum> {
        let eig = Eigen::new(&self.a)?;
        Ok(Spectrum {
            eigenvalues: eig.values,
            right: Some(eig.vectors),
            left: Some(eig.inverse.adjoint()),
        })
    }

    pub fn is_stable(&self) -> Result<bool> {
        Ok(self.spectrum()?.is_stable())
    }

    /// State-space similarity `(S A S^{-1}, S B, C S^{-1})`.
    pub fn similarity(&self, s: &CMat) -> Result<Self> {
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("similarity transform is singular".into()))?;
        Self::new(s * &self.a * &inv, s * &self.b, &self.c * inv)
    }

    /// `C (sI - A)^{-1} B` through an LU solve.
    pub fn eval_transfer(&self, s: Complex64) -> Result<CMat> {
        Ok(&self.c * shifted_solve(&self.a, s, &self.b)?)
    }

    /// Scalar transfer value of a SISO system.
    pub fn eval_siso(&self, s: Complex64) -> Result<Complex64> {
        if self.inputs() != 1 || self.outputs() != 1 {
            return Err(Error::Shape("eval_siso needs a single-input single-output system".into()));
        }
        Ok(self.eval_transfer(s)?[(0, 0)])
    }
}

fn require_stable(schur: &SchurForm) -> Result<()> {
    let max_re = max_real_part(&schur.eigenvalues());
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    Ok(())
}

/// Controllability Gramian `P` with `AP + PA^* + BB^* = 0`.
pub fn controllability_gramian(sys: &LtiSystem) -> Result<CMat> {
    let solver = ShiftedLyapunov::new(sys.a())?;
    require_stable(solver.schur())?;
    let rhs = sys.b() * sys.b().adjoint();
    solver.solve_block(Complex64::default(), Complex64::default(), &rhs, LyapunovMode::Controllability)
}

/// Observability Gramian `Q` with `A^*Q + QA + C^*C = 0`.
pub fn observability_gramian(sys: &LtiSystem) -> Result<CMat> {
    let solver = ShiftedLyapunov::new(sys.a())?;
    require_stable(solver.schur())?;
    let rhs = sys.c().adjoint() * sys.c();
    solver.solve_block(Complex64::default(), Complex64::default(), &rhs, LyapunovMode::Observability)
}

/// `||G||_H2 = sqrt(trace(C P C^*))` with the controllability Gramian.
pub fn h2_norm_gramian(sys: &LtiSystem) -> Result<f64> {
    let p = controllability_gramian(sys)?;
    let tr = (sys.c() * p * sys.c().adjoint()).trace().re;
    Ok(tr.max(0.0).sqrt())
}

/// `sqrt(trace(B^* Q B))` with the observability Gramian; the dual route.
pub fn h2_norm_gramian_observability(sys: &LtiSystem) -> Result<f64> {
    let q = observability_gramian(sys)?;
    let tr = (sys.b().adjoint() * q * sys.b()).trace().re;
    Ok(tr.max(0.0).sqrt())
}

fn check_io_match(g: &LtiSystem, h: &LtiSystem) -> Result<()> {
    if g.inputs() != h.inputs() || g.outputs() != h.outputs() {
        return Err(Error::Shape(format!(
            "systems have different input/output counts: {}x{} vs {}x{}",
            g.outputs(),
            g.inputs(),
            h.outputs(),
            h.inputs()
        )));
    }
    Ok(())
}

/// `<G, H>_H2 = (1/2pi) ∫ trace(conj(G(iw)) H(iw)^T) dw` evaluated from the
/// poles and residues of `H`: `sum_k c_k^T conj(G(-conj(mu_k))) b_k`.
///
/// `H` must have simple, well-separated poles with a well-conditioned
/// eigenvector basis; semi-simple spectra are accepted only through that gate.
pub fn h2_inner_residue(g: &LtiSystem, h: &LtiSystem) -> Result<Complex64> {
    check_io_match(g, h)?;
    require_stable(&SchurForm::new(g.a())?)?;
    let eig = Eigen::new(h.a())?;
    let max_re = max_real_part(&eig.values);
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    let threshold = POLE_CLUSTER_TOL * spectral_radius(&eig.values);
    let separation = min_separation(&eig.values);
    if separation <= threshold {
        return Err(Error::ClusteredPoles {
            separation,
            threshold,
        });
    }
    let cs = h.c() * &eig.vectors; // columns: c_k
    let bs = &eig.inverse * h.b(); // rows: b_k^T
    let mut total = Complex64::default();
    for (k, mu) in eig.values.iter().enumerate() {
        let gbar = g.eval_transfer(-mu.conj())?.map(|z| z.conj());
        let ck = cs.column(k);
        let bk = bs.row(k);
        let mut term = Complex64::default();
        for i in 0..gbar.nrows() {
            for j in 0..gbar.ncols() {
                term += ck[i] * gbar[(i, j)] * bk[j];
            }
        }
        total += term;
    }
    Ok(total)
}

/// `<G, H>_H2 = trace(B_G^* X B_H)` with `A_G^* X + X A_H + C_G^* C_H = 0`.
pub fn h2_inner_gramian(g: &LtiSystem, h: &LtiSystem) -> Result<Complex64> {
    check_io_match(g, h)?;
    let sg = SchurForm::new(g.a())?;
    let sh = SchurForm::new(h.a())?;
    require_stable(&sg)?;
    require_stable(&sh)?;
    let rhs = g.c().adjoint() * h.c();
    let x = solve_sylvester_schur(&sg, &sh, &rhs)?;
    Ok((g.b().adjoint() * x * h.b()).trace())
}

/// Realization of `G - H` as `blkdiag(A_G, A_H), [B_G; B_H], [C_G, -C_H]`.
pub fn difference(g: &LtiSystem, h: &LtiSystem) -> Result<LtiSystem> {
    check_io_match(g, h)?;
    let a = crate::linalg::block_diag(&[g.a().clone(), h.a().clone()]);
    let mut b = CMat::zeros(g.n() + h.n(), g.inputs());
    b.rows_mut(0, g.n()).copy_from(g.b());
    b.rows_mut(g.n(), h.n()).copy_from(h.b());
    let mut c = CMat::zeros(g.outputs(), g.n() + h.n());
    c.columns_mut(0, g.n()).copy_from(g.c());
    c.columns_mut(g.n(), h.n()).copy_from(&(-h.c()));
    LtiSystem::new(a, b, c)
}
