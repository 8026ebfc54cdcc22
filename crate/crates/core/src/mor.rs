//! Model reduction: the LTP-to-MIMO lift, Petrov–Galerkin projections, IRKA,
//! balanced truncation, POD, and the reduction driver with its error bound.

use std::fmt;
use std::str::FromStr;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    cplx, is_real, max_real_part, orthonormalize, real_part, shifted_solve, solve, to_complex,
    CMat, CVec, Eigen, SchurForm, ZERO,
};
use crate::lti::{self, LtiSystem, STABILITY_MARGIN};
use crate::ltp::{self, FloquetFourierSystem};
use crate::lyapunov::solve_sylvester_schur;
use crate::sim::{self, InputSignal, Model, SimOptions};

/// Biorthogonality tolerance on `||W^T V - I||_F`.
pub const BIORTHOGONALITY_TOL: f64 = 1e-10;

/// Singular-value ratio below which a snapshot basis is rank deficient.
pub const POD_RANK_TOL: f64 = 1e-13;

/// LTI MIMO system `(Q, [b_{-N} .. b_N], [c_{-N} .. c_N]^T)` of an LTP system.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedMimo {
    pub system: LtiSystem,
    pub omega0: f64,
    pub order: usize,
}

impl LiftedMimo {
    pub fn unlift(&self) -> Result<FloquetFourierSystem> {
        unlift_to_ltp(&self.system, self.omega0)
    }
}

pub fn lift_to_mimo(sys: &FloquetFourierSystem) -> LiftedMimo {
    let n = sys.n();
    let width = sys.b_coeffs().len();
    let mut b = CMat::zeros(n, width);
    let mut c = CMat::zeros(width, n);
    for (p, (bk, ck)) in sys.b_coeffs().iter().zip(sys.c_coeffs()).enumerate() {
        b.set_column(p, bk);
        c.set_row(p, &ck.transpose());
    }
    LiftedMimo {
        system: LtiSystem::new(sys.q().clone(), b, c).expect("lifted shapes are consistent"),
        omega0: sys.omega0(),
        order: sys.order(),
    }
}

/// Inverse of [`lift_to_mimo`] on the coefficient level.
pub fn unlift_to_ltp(h: &LtiSystem, omega0: f64) -> Result<FloquetFourierSystem> {
    let m = h.inputs();
    if m % 2 == 0 || h.outputs() != m {
        return Err(Error::Shape(format!(
            "lifted system needs 2N+1 inputs and as many outputs, got {} inputs and {} outputs",
            m,
            h.outputs()
        )));
    }
    let b = (0..m).map(|p| h.b().column(p).into_owned()).collect();
    let c = (0..m).map(|p| h.c().row(p).transpose()).collect();
    FloquetFourierSystem::new(h.a().clone(), omega0, b, c)
}

/// Trial and test bases with `W^T V = I_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionPair {
    v: CMat,
    w: CMat,
}

impl ProjectionPair {
    pub fn new(v: CMat, w: CMat) -> Result<Self> {
        if v.shape() != w.shape() || v.ncols() == 0 || v.ncols() > v.nrows() {
            return Err(Error::Shape(format!(
                "V is {}x{} and W is {}x{}; both must be n x r with 1 <= r <= n",
                v.nrows(),
                v.ncols(),
                w.nrows(),
                w.ncols()
            )));
        }
        let defect = (w.transpose() * &v - CMat::identity(v.ncols(), v.ncols())).norm();
        if !(defect <= BIORTHOGONALITY_TOL) {
            return Err(Error::Biorthogonality { defect });
        }
        Ok(Self { v, w })
    }

    /// Rescale `W` so that `W^T V = I`; both bases are orthonormalized first.
    pub fn biorthogonalize(v: &CMat, w: &CMat) -> Result<Self> {
        let (v, w) = (orthonormalize(v), orthonormalize(w));
        let m = v.transpose() * &w;
        let r = v.ncols();
        let wt = solve(&m.transpose(), &w.transpose()).ok_or(Error::Biorthogonality { defect: f64::INFINITY })?;
        let w = wt.transpose();
        let defect = (w.transpose() * &v - CMat::identity(r, r)).norm();
        if !(defect <= BIORTHOGONALITY_TOL) {
            return Err(Error::Biorthogonality { defect });
        }
        Ok(Self { v, w })
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn r(&self) -> usize {
        self.v.ncols()
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn is_real(&self) -> bool {
        is_real(&self.v, 0.0) && is_real(&self.w, 0.0)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.n() {
            return Err(Error::Shape(format!("projection acts on {} states, system has {n}", self.n())));
        }
        Ok(())
    }

    /// `(W^T A V, W^T B, C V)`.
    pub fn project_lti(&self, sys: &LtiSystem) -> Result<LtiSystem> {
        self.check_dim(sys.n())?;
        let wt = self.w.transpose();
        LtiSystem::new(&wt * sys.a() * &self.v, &wt * sys.b(), sys.c() * &self.v)
    }

    /// `(W^T Q V, W^T b_k, V^T c_k)` coefficient-wise.
    pub fn project_ltp(&self, sys: &FloquetFourierSystem) -> Result<FloquetFourierSystem> {
        self.check_dim(sys.n())?;
        let wt = self.w.transpose();
        let vt = self.v.transpose();
        FloquetFourierSystem::new(
            &wt * sys.q() * &self.v,
            sys.omega0(),
            sys.b_coeffs().iter().map(|b| &wt * b).collect(),
            sys.c_coeffs().iter().map(|c| &vt * c).collect(),
        )
    }

    /// `I - V W^T`.
    fn complement(&self) -> CMat {
        CMat::identity(self.n(), self.n()) - &self.v * self.w.transpose()
    }

    /// `A V - V W^T A V`.
    fn coupling(&self, a: &CMat) -> CMat {
        let av = a * &self.v;
        &av - &self.v * (self.w.transpose() * &av)
    }

    /// Error system `G - G~` in the coordinates `(x - V x~, x~)`:
    /// `[[A, AV - V A~], [0, A~]]`, `[(I - V W^T) B; W^T B]`, `[C, 0]`.
    ///
    /// Unlike the plain block-diagonal difference it carries no cancellation,
    /// so tiny errors (e.g. `r = n`) are resolved to roundoff.
    pub fn lti_error_system(&self, sys: &LtiSystem) -> Result<LtiSystem> {
        self.check_dim(sys.n())?;
        let (n, r) = (self.n(), self.r());
        let wt = self.w.transpose();
        let mut a = CMat::zeros(n + r, n + r);
        a.view_mut((0, 0), (n, n)).copy_from(sys.a());
        a.view_mut((0, n), (n, r)).copy_from(&self.coupling(sys.a()));
        a.view_mut((n, n), (r, r)).copy_from(&(&wt * sys.a() * &self.v));
        let mut b = CMat::zeros(n + r, sys.inputs());
        b.rows_mut(0, n).copy_from(&(self.complement() * sys.b()));
        b.rows_mut(n, r).copy_from(&(&wt * sys.b()));
        let mut c = CMat::zeros(sys.outputs(), n + r);
        c.columns_mut(0, n).copy_from(sys.c());
        LtiSystem::new(a, b, c)
    }

    /// LTP counterpart of [`ProjectionPair::lti_error_system`].
    pub fn ltp_error_system(&self, sys: &FloquetFourierSystem) -> Result<FloquetFourierSystem> {
        self.check_dim(sys.n())?;
        let (n, r) = (self.n(), self.r());
        let wt = self.w.transpose();
        let mut q = CMat::zeros(n + r, n + r);
        q.view_mut((0, 0), (n, n)).copy_from(sys.q());
        q.view_mut((0, n), (n, r)).copy_from(&self.coupling(sys.q()));
        q.view_mut((n, n), (r, r)).copy_from(&(&wt * sys.q() * &self.v));
        let comp = self.complement();
        let b = sys
            .b_coeffs()
            .iter()
            .map(|bk| {
                let mut e = CVec::zeros(n + r);
                e.rows_mut(0, n).copy_from(&(&comp * bk));
                e.rows_mut(n, r).copy_from(&(&wt * bk));
                e
            })
            .collect();
        let c = sys
            .c_coeffs()
            .iter()
            .map(|ck| {
                let mut e = CVec::zeros(n + r);
                e.rows_mut(0, n).copy_from(ck);
                e
            })
            .collect();
        FloquetFourierSystem::new(q, sys.omega0(), b, c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionMethod {
    Irka,
    BalancedTruncation,
    Pod,
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Irka => "irka",
            Self::BalancedTruncation => "bt",
            Self::Pod => "pod",
        })
    }
}

impl FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "irka" => Ok(Self::Irka),
            "bt" => Ok(Self::BalancedTruncation),
            "pod" => Ok(Self::Pod),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}' (irka, bt or pod)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrkaOptions {
    /// Bound on the relative shift movement between iterations.
    pub tol: f64,
    pub max_iter: usize,
    /// Seeds the fallback shift directions.
    pub seed: u64,
    /// Return the best iterate instead of an error when `max_iter` is hit.
    pub allow_unconverged: bool,
}

impl Default for IrkaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 100,
            seed: 0,
            allow_unconverged: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrkaDiagnostics {
    pub iterations: usize,
    pub shift_movement: f64,
    pub converged: bool,
    /// H2 error after each iteration.
    pub errors: Vec<f64>,
    /// Interpolation points of the returned model.
    pub shifts: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct IrkaResult {
    pub reduced: LtiSystem,
    pub projection: ProjectionPair,
    pub diagnostics: IrkaDiagnostics,
}

/// Interpolation data: points `sigma_i`, right directions `d_i`, left directions `e_i`.
#[derive(Clone, Debug)]
struct Tangents {
    shifts: Vec<Complex64>,
    right: Vec<CVec>,
    left: Vec<CVec>,
}

fn check_order(n: usize, r: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!("reduced order must satisfy 1 <= r <= n = {n}, got {r}")));
    }
    Ok(())
}

fn require_stable(sys: &LtiSystem) -> Result<SchurForm> {
    let schur = SchurForm::new(sys.a())?;
    let max_re = max_real_part(&schur.eigenvalues());
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    Ok(schur)
}

fn is_real_value(z: Complex64) -> bool {
    z.im.abs() <= 1e-8 * z.norm().max(f64::MIN_POSITIVE)
}

/// Residue-ranked initial interpolation data from the poles of `A`.
fn initial_tangents(sys: &LtiSystem, r: usize, real: bool, seed: u64) -> Tangents {
    if let Ok(eig) = Eigen::new(sys.a()) {
        let cs = sys.c() * &eig.vectors;
        let bs = &eig.inverse * sys.b();
        let weight = |j: usize| {
            cs.column(j).norm() * bs.row(j).norm() / eig.values[j].re.abs().max(f64::MIN_POSITIVE).sqrt()
        };
        let mut order: Vec<usize> = (0..eig.values.len()).collect();
        order.sort_by(|&i, &j| weight(j).total_cmp(&weight(i)).then(i.cmp(&j)));
        let mut t = Tangents {
            shifts: Vec::new(),
            right: Vec::new(),
            left: Vec::new(),
        };
        let push = |t: &mut Tangents, lam: Complex64, b: CVec, c: CVec| {
            t.shifts.push(-lam.conj());
            t.right.push(b.conjugate());
            t.left.push(c.conjugate());
        };
        for &j in &order {
            let slots = r - t.shifts.len();
            if slots == 0 {
                break;
            }
            let lam = eig.values[j];
            let b = bs.row(j).transpose();
            let c = cs.column(j).into_owned();
            if !real {
                push(&mut t, lam, b, c);
            } else if is_real_value(lam) {
                push(&mut t, cplx(lam.re, 0.0), b.map(|z| cplx(z.norm(), 0.0)), c.map(|z| cplx(z.norm(), 0.0)));
            } else if lam.im > 0.0 && slots >= 2 {
                push(&mut t, lam, b.clone(), c.clone());
                push(&mut t, lam.conj(), b.conjugate(), c.conjugate());
            }
        }
        // A single slot left over by a conjugate pair gets a real shift at that pair's real part.
        if t.shifts.len() < r {
            if let Some(&j) = order.iter().find(|&&j| !is_real_value(eig.values[j])) {
                let lam = cplx(eig.values[j].re, 0.0);
                let b = bs.row(j).transpose().map(|z| cplx(z.norm(), 0.0));
                let c = cs.column(j).map(|z| cplx(z.norm(), 0.0));
                while t.shifts.len() < r {
                    push(&mut t, lam, b.clone(), c.clone());
                }
            }
        }
        if t.shifts.len() == r && t.shifts.iter().all(|s| s.re > 0.0) {
            return t;
        }
    }
    fallback_tangents(sys, r, seed)
}

/// Log-spaced real shifts over the spectral magnitude range with seeded random directions.
fn fallback_tangents(sys: &LtiSystem, r: usize, seed: u64) -> Tangents {
    let mags: Vec<f64> = sys
        .spectrum()
        .map(|s| s.eigenvalues.iter().map(|z| z.norm()).collect())
        .unwrap_or_default();
    let lo = mags.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-6);
    let hi = mags.iter().cloned().fold(0.0f64, f64::max).max(lo * 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rand_vec = |len: usize| CVec::from_fn(len, |_, _| cplx(rng.random_range(-1.0..1.0), 0.0));
    let mut t = Tangents {
        shifts: Vec::with_capacity(r),
        right: Vec::with_capacity(r),
        left: Vec::with_capacity(r),
    };
    for i in 0..r {
        let frac = if r > 1 { i as f64 / (r - 1) as f64 } else { 0.5 };
        t.shifts.push(cplx(lo * (hi / lo).powf(frac), 0.0));
        t.right.push(rand_vec(sys.inputs()));
        t.left.push(rand_vec(sys.outputs()));
    }
    t
}

/// Columns `(sigma_i I - A)^{-1} M d_i`.
fn tangential_columns(a: &CMat, m: &CMat, shifts: &[Complex64], dirs: &[CVec]) -> Result<CMat> {
    let cols: Vec<Result<CVec>> = shifts
        .par_iter()
        .zip(dirs.par_iter())
        .map(|(&s, d)| {
            let rhs = m * d;
            let rhs = CMat::from_column_slice(rhs.len(), 1, rhs.as_slice());
            Ok(shifted_solve(a, s, &rhs)?.column(0).into_owned())
        })
        .collect();
    let mut out = CMat::zeros(a.nrows(), shifts.len());
    for (j, c) in cols.into_iter().enumerate() {
        out.set_column(j, &c?);
    }
    Ok(out)
}

/// Real basis of `span{Re V, Im V}` truncated to `r` columns.
fn realify(v: &CMat, r: usize) -> CMat {
    let n = v.nrows();
    let mut m = DMatrix::<f64>::zeros(n, 2 * v.ncols());
    for j in 0..v.ncols() {
        for i in 0..n {
            m[(i, 2 * j)] = v[(i, j)].re;
            m[(i, 2 * j + 1)] = v[(i, j)].im;
        }
    }
    let svd = m.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut out = DMatrix::<f64>::zeros(n, r);
    for (k, &i) in idx.iter().take(r).enumerate() {
        out.set_column(k, &u.column(i));
    }
    to_complex(&out)
}

fn shift_movement(new: &[Complex64], old: &[Complex64]) -> f64 {
    new.iter()
        .map(|s| {
            let d = old.iter().map(|o| (s - o).norm()).fold(f64::INFINITY, f64::min);
            d / s.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Interpolation data of the next IRKA step from the reduced model's poles and residues.
/// Unstable reduced poles are reflected before mirroring.
fn tangents_from_reduced(red: &LtiSystem) -> Result<Tangents> {
    let eig = Eigen::new(red.a())?;
    let cs = red.c() * &eig.vectors;
    let bs = &eig.inverse * red.b();
    let mut t = Tangents {
        shifts: Vec::new(),
        right: Vec::new(),
        left: Vec::new(),
    };
    for (j, &lam) in eig.values.iter().enumerate() {
        let lam = if lam.re >= 0.0 { -lam.conj() } else { lam };
        t.shifts.push(-lam.conj());
        t.right.push(bs.row(j).transpose().conjugate());
        t.left.push(cs.column(j).conjugate());
    }
    Ok(t)
}

/// Cheap H2 error `||H||^2 - 2 Re<H, H~> + ||H~||^2` for iteration tracking.
struct ErrorTracker {
    schur: SchurForm,
    norm2: f64,
}

impl ErrorTracker {
    fn new(sys: &LtiSystem, schur: SchurForm) -> Result<Self> {
        let norm = lti::h2_norm_gramian(sys)?;
        Ok(Self { schur, norm2: norm * norm })
    }

    fn error(&self, sys: &LtiSystem, red: &LtiSystem) -> f64 {
        let Ok(sr) = SchurForm::new(red.a()) else { return f64::NAN };
        if max_real_part(&sr.eigenvalues()) >= 0.0 {
            return f64::INFINITY;
        }
        let rhs = sys.c().adjoint() * red.c();
        let Ok(x) = solve_sylvester_schur(&self.schur, &sr, &rhs) else { return f64::NAN };
        let cross = (sys.b().adjoint() * x * red.b()).trace().re;
        let red2 = lti::h2_norm_gramian(red).map(|v| v * v).unwrap_or(f64::NAN);
        (self.norm2 - 2.0 * cross + red2).max(0.0).sqrt()
    }
}

/// Iterative rational Krylov reduction of `sys` to order `r`.
///
/// Interpolation points are the mirrored reduced poles `-conj(lambda_i)`,
/// with tangential directions from the reduced residues. For real systems the
/// bases are kept real.
pub fn irka(sys: &LtiSystem, r: usize, opts: &IrkaOptions) -> Result<IrkaResult> {
    check_order(sys.n(), r)?;
    let schur = require_stable(sys)?;
    let real = sys.is_real(0.0);
    let tracker = ErrorTracker::new(sys, schur)?;
    let ct = sys.c().transpose();
    let at = sys.a().transpose();

    let mut tangents = initial_tangents(sys, r, real, opts.seed);
    let mut errors = Vec::new();
    let mut best: Option<(f64, LtiSystem, ProjectionPair, Vec<Complex64>)> = None;
    let mut movement = f64::INFINITY;
    let mut iterations = 0;
    let mut last = None;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut v = tangential_columns(sys.a(), sys.b(), &tangents.shifts, &tangents.right)?;
        let mut w = tangential_columns(&at, &ct, &tangents.shifts, &tangents.left)?;
        if real {
            v = realify(&v, r);
            w = realify(&w, r);
        }
        let pp = ProjectionPair::biorthogonalize(&v, &w)?;
        let red = pp.project_lti(sys)?;
        let err = tracker.error(sys, &red);
        errors.push(err);
        let next = tangents_from_reduced(&red)?;
        movement = shift_movement(&next.shifts, &tangents.shifts);
        let used = std::mem::replace(&mut tangents, next);
        if err.is_finite() && best.as_ref().is_none_or(|b| err < b.0) {
            best = Some((err, red.clone(), pp.clone(), used.shifts.clone()));
        }
        last = Some((red, pp, used.shifts));
        if movement <= opts.tol {
            break;
        }
    }
    let converged = movement <= opts.tol;
    if !converged && !opts.allow_unconverged {
        return Err(Error::IrkaNotConverged {
            iterations,
            shift_movement: movement,
        });
    }
    let (reduced, projection, shifts) = if converged {
        last.expect("at least one iteration")
    } else {
        best.map(|(_, a, b, c)| (a, b, c)).or(last).expect("at least one iteration")
    };
    let max_re = max_real_part(&reduced.spectrum()?.eigenvalues);
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::UnstableReduction { max_real_part: max_re });
    }
    Ok(IrkaResult {
        reduced,
        projection,
        diagnostics: IrkaDiagnostics {
            iterations,
            shift_movement: movement,
            converged,
            errors,
            shifts,
        },
    })
}

fn hermitian_sqrt_factor<T: ComplexField<RealField = f64>>(p: DMatrix<T>) -> DMatrix<T> {
    let eig = p.symmetric_eigen();
    let mut l = eig.eigenvectors;
    for (j, mut col) in l.column_iter_mut().enumerate() {
        col *= T::from_real(eig.eigenvalues[j].max(0.0).sqrt());
    }
    l
}

fn square_root_bt<T: ComplexField<RealField = f64>>(
    p: DMatrix<T>,
    q: DMatrix<T>,
    r: usize,
) -> Result<(DMatrix<T>, DMatrix<T>, Vec<f64>)> {
    let lp = hermitian_sqrt_factor(p);
    let lq = hermitian_sqrt_factor(q);
    let m = lq.adjoint() * &lp;
    let svd = m.svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let hsv: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let ratio = hsv[r - 1] / hsv[0].max(f64::MIN_POSITIVE);
    if !(ratio > POD_RANK_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    let n = lp.nrows();
    let mut v = DMatrix::<T>::zeros(n, r);
    let mut w = DMatrix::<T>::zeros(n, r);
    for (k, &i) in idx.iter().take(r).enumerate() {
        let scale = T::from_real(1.0 / svd.singular_values[i].sqrt());
        v.set_column(k, &(&lp * vt.row(i).adjoint() * scale.clone()));
        w.set_column(k, &(&lq * u.column(i) * scale));
    }
    // W^T V = I with the transpose convention.
    Ok((v, w.map(|z| z.conjugate()), hsv))
}

/// Square-root balanced truncation; returns the reduced model, the projection
/// and the Hankel singular values.
pub fn balanced_truncation(sys: &LtiSystem, r: usize) -> Result<(LtiSystem, ProjectionPair, Vec<f64>)> {
    check_order(sys.n(), r)?;
    require_stable(sys)?;
    let p = lti::controllability_gramian(sys)?;
    let q = lti::observability_gramian(sys)?;
    let (v, w, hsv) = if sys.is_real(0.0) {
        let (v, w, h) = square_root_bt(real_part(&p), real_part(&q), r)?;
        (to_complex(&v), to_complex(&w), h)
    } else {
        square_root_bt(p, q, r)?
    };
    let pp = ProjectionPair::new(v, w)?;
    Ok((pp.project_lti(sys)?, pp, hsv))
}

/// Galerkin basis from the leading `r` left singular vectors of a snapshot matrix.
pub fn pod_reduce(snapshots: &CMat, r: usize) -> Result<ProjectionPair> {
    let n = snapshots.nrows();
    check_order(n, r)?;
    let real = is_real(snapshots, 1e-12);
    let (u, sv): (CMat, Vec<f64>) = if real {
        let svd = real_part(snapshots).svd(true, false);
        (to_complex(&svd.u.expect("u requested")), svd.singular_values.iter().cloned().collect())
    } else {
        let svd = snapshots.clone().svd(true, false);
        (svd.u.expect("u requested"), svd.singular_values.iter().cloned().collect())
    };
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    if idx.len() < r {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let ratio = sv[idx[r - 1]] / sv[idx[0]].max(f64::MIN_POSITIVE);
    if !(ratio >= POD_RANK_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    let mut v = CMat::zeros(n, r);
    for (k, &i) in idx.iter().take(r).enumerate() {
        v.set_column(k, &u.column(i));
    }
    let w = v.conjugate();
    ProjectionPair::new(v, w)
}

/// Snapshot training run for POD.
#[derive(Clone, Debug, PartialEq)]
pub struct PodTraining {
    pub input: InputSignal,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for PodTraining {
    fn default() -> Self {
        Self {
            input: InputSignal::unit_step(),
            dt: 1.0,
            t_final: 100.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionOptions {
    pub method: ReductionMethod,
    pub irka: IrkaOptions,
    pub pod: PodTraining,
    /// Precomputed snapshots; when absent POD simulates the full system.
    pub pod_snapshots: Option<CMat>,
    /// Largest `(n + r) x (active input shells)` for which the exact LTP error is computed.
    pub ltp_error_limit: usize,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            method: ReductionMethod::Irka,
            irka: IrkaOptions {
                allow_unconverged: true,
                ..IrkaOptions::default()
            },
            pod: PodTraining::default(),
            pod_snapshots: None,
            ltp_error_limit: 200_000,
        }
    }
}

impl ReductionOptions {
    pub fn with_method(method: ReductionMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub r: usize,
    /// Fourier truncation order actually used.
    pub order: usize,
    pub method: ReductionMethod,
    pub reduced: FloquetFourierSystem,
    pub projection: ProjectionPair,
    /// `||H_[N] - H~_[N]||_H2`.
    pub mimo_error: f64,
    /// `||G_[N] - G~_[N]||_H2`.
    pub ltp_error: Option<f64>,
    /// `sqrt(2N + 1) ||H_[N] - H~_[N]||_H2`.
    pub bound: f64,
    pub irka: Option<IrkaDiagnostics>,
}

/// Lifted system with real coefficients when `b(t)`, `c(t)` and `Q` are real:
/// the pairs `(b_k, b_{-k})` become `(sqrt2 Re b_k, sqrt2 Im b_k)` (a unitary
/// input mixing, likewise for outputs), which leaves every H2 quantity unchanged.
fn realified_lift(sys: &FloquetFourierSystem) -> Option<LtiSystem> {
    if !is_real(sys.q(), 0.0) || !sys.is_conjugate_symmetric(1e-12) {
        return None;
    }
    let n = sys.n();
    let order = sys.order() as i64;
    let width = 2 * sys.order() + 1;
    let s2 = std::f64::consts::SQRT_2;
    let mut b = DMatrix::<f64>::zeros(n, width);
    let mut c = DMatrix::<f64>::zeros(width, n);
    let b0 = sys.b_at(0).unwrap();
    let c0 = sys.c_at(0).unwrap();
    for i in 0..n {
        b[(i, 0)] = b0[i].re;
        c[(0, i)] = c0[i].re;
    }
    for k in 1..=order {
        let (bk, ck) = (sys.b_at(k).unwrap(), sys.c_at(k).unwrap());
        let col = 2 * k as usize - 1;
        for i in 0..n {
            b[(i, col)] = s2 * bk[i].re;
            b[(i, col + 1)] = s2 * bk[i].im;
            c[(col, i)] = s2 * ck[i].re;
            c[(col + 1, i)] = s2 * ck[i].im;
        }
    }
    LtiSystem::from_real(&real_part(sys.q()), &b, &c).ok()
}

fn require_hurwitz_q(q: &CMat, reduced: bool) -> Result<()> {
    let max_re = max_real_part(&SchurForm::new(q)?.eigenvalues());
    if max_re >= -STABILITY_MARGIN {
        return Err(if reduced {
            Error::UnstableReduction { max_real_part: max_re }
        } else {
            Error::Unstable { max_real_part: max_re }
        });
    }
    Ok(())
}

/// Number of input shells with a nonzero coefficient.
fn active_input_shells(sys: &FloquetFourierSystem) -> usize {
    sys.b_coeffs().iter().filter(|b| b.iter().any(|z| *z != ZERO)).count()
}

/// Reduce an LTP system: truncate to order `N`, lift, reduce the lifted MIMO
/// system, unlift, and evaluate the MIMO error, the bound
/// `sqrt(2N + 1) ||H_[N] - H~_[N]||` and (when affordable) the LTP error.
pub fn reduce_ltp_algorithm1(
    sys: &FloquetFourierSystem,
    r: usize,
    order: usize,
    opts: &ReductionOptions,
) -> Result<ReductionReport> {
    check_order(sys.n(), r)?;
    require_hurwitz_q(sys.q(), false)?;
    let order = order.min(sys.order());
    let truncated = sys.truncate(order);
    let lifted = lift_to_mimo(&truncated);

    let mut irka_diag = None;
    let projection = match opts.method {
        ReductionMethod::Irka => {
            let target = realified_lift(&truncated).unwrap_or_else(|| lifted.system.clone());
            let res = irka(&target, r, &opts.irka)?;
            irka_diag = Some(res.diagnostics);
            res.projection
        }
        ReductionMethod::BalancedTruncation => {
            let target = realified_lift(&truncated).unwrap_or_else(|| lifted.system.clone());
            balanced_truncation(&target, r)?.1
        }
        ReductionMethod::Pod => {
            let snapshots = match &opts.pod_snapshots {
                Some(x) => x.clone(),
                None => {
                    let t = &opts.pod;
                    sim::simulate_backward_euler(
                        Model::FloquetFourier(sys),
                        &t.input,
                        SimOptions::new(t.dt, t.t_final).with_states(),
                    )?
                    .states
                    .expect("states requested")
                }
            };
            pod_reduce(&snapshots, r)?
        }
    };

    let reduced_mimo = projection.project_lti(&lifted.system)?;
    let reduced = unlift_to_ltp(&reduced_mimo, sys.omega0())?;
    require_hurwitz_q(reduced.q(), true)?;

    let mimo_error = lti::h2_norm_gramian(&projection.lti_error_system(&lifted.system)?)?;
    let bound = ((2 * order + 1) as f64).sqrt() * mimo_error;
    let work = (sys.n() + r) * active_input_shells(&truncated);
    let ltp_error = if work <= opts.ltp_error_limit {
        let err_sys = projection.ltp_error_system(&truncated)?;
        Some(ltp::h2_norm_zhou_hagiwara(&err_sys, order)?.value)
    } else {
        None
    };
    Ok(ReductionReport {
        r,
        order,
        method: opts.method,
        reduced,
        projection,
        mimo_error,
        ltp_error,
        bound,
        irka: irka_diag,
    })
}

/// Two-term bound `||G - G~_[N]|| <= ||G - G_[N]|| + sqrt(2N + 1) ||H_[N] - H~_[N]||`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundComponents {
    pub order: usize,
    /// `||G - G_[N]||`; `None` when the expansion of `G` does not exceed `N`,
    /// in which case the term vanishes.
    pub fourier_truncation: Option<f64>,
    pub mimo_error: f64,
    pub scaled_mimo_error: f64,
    pub total: f64,
}

pub fn error_bound_report(
    full: &FloquetFourierSystem,
    reduced: &FloquetFourierSystem,
    order: usize,
) -> Result<BoundComponents> {
    if (full.omega0() - reduced.omega0()).abs() > 1e-12 * full.omega0().max(reduced.omega0()) {
        return Err(Error::FrequencyMismatch {
            left: full.omega0(),
            right: reduced.omega0(),
        });
    }
    let full_n = full.truncate(order);
    let fourier_truncation = if full.order() > order {
        Some(ltp::h2_norm_zhou_hagiwara(&truncation_error_system(full, order)?, full.order())?.value)
    } else {
        None
    };
    let h = lift_to_mimo(&full_n).system;
    let h_red = lift_to_mimo(&reduced.truncate(order)).system;
    let mimo_error = lti::h2_norm_gramian(&lti::difference(&h, &h_red)?)?;
    let scaled = ((2 * order + 1) as f64).sqrt() * mimo_error;
    Ok(BoundComponents {
        order,
        fourier_truncation,
        mimo_error,
        scaled_mimo_error: scaled,
        total: fourier_truncation.unwrap_or(0.0) + scaled,
    })
}

/// `G - G_[N]` as `blkdiag(Q, Q)`, `[b - b_N; b_N]`, `[c; c - c_N]`.
pub fn truncation_error_system(full: &FloquetFourierSystem, order: usize) -> Result<FloquetFourierSystem> {
    let n = full.n();
    let trunc = full.truncate(order).truncate(full.order());
    let q = crate::linalg::block_diag(&[full.q().clone(), full.q().clone()]);
    let stack = |x: CVec, y: CVec| -> CVec {
        CVec::from_iterator(2 * n, x.iter().cloned().chain(y.iter().cloned()))
    };
    let b = full
        .b_coeffs()
        .iter()
        .zip(trunc.b_coeffs())
        .map(|(b, bn)| stack(b - bn, bn.clone()))
        .collect();
    let c = full
        .c_coeffs()
        .iter()
        .zip(trunc.c_coeffs())
        .map(|(c, cn)| stack(c.clone(), c - cn))
        .collect();
    FloquetFourierSystem::new(q, full.omega0(), b, c)
}
