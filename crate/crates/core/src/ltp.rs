//! SISO linear time-periodic systems in Floquet–Fourier form
//! `z' = Q z + b(t) u`, `y = c(t)^T z` with
//! `b(t) = sum_k b_k e^{i k w0 t}`, `c(t) = sum_k c_k e^{i k w0 t}`.
//!
//! The subsystem `g_k(s) = sum_l c_{k-l}^T (s_l I - Q)^{-1} b_l`, `s_l = s + i l w0`,
//! maps an input at frequency `w` to the output at `w + k w0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    block_diag, cplx, dotu, min_separation, shifted_solve, spectral_radius, CMat, CVec, Eigen,
    SchurForm, ONE, ZERO,
};
use crate::lti::{self, LtiSystem, POLE_CLUSTER_TOL, STABILITY_MARGIN};
use crate::lyapunov::{LyapunovMode, ShiftedLyapunov};

/// Relative tolerance on `||Q_G - Q_H||` for the shared-state-matrix gate.
const SHARED_Q_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FloquetFourierSystem {
    q: CMat,
    omega0: f64,
    /// `b_{-N}, ..., b_N`.
    b: Vec<CVec>,
    /// `c_{-N}, ..., c_N`.
    c: Vec<CVec>,
}

/// One harmonic of the steady-state response to `e^{i w t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub k: i64,
    /// `w + k w0`.
    pub frequency: f64,
    /// `g_k(i w)`.
    pub gain: Complex64,
}

impl FloquetFourierSystem {
    pub fn new(q: CMat, omega0: f64, b: Vec<CVec>, c: Vec<CVec>) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidArgument(format!("omega0 must be positive, got {omega0}")));
        }
        let n = q.nrows();
        if n == 0 || !q.is_square() {
            return Err(Error::Shape(format!("Q must be square and nonempty, got {}x{}", q.nrows(), q.ncols())));
        }
        if b.len() != c.len() || b.len() % 2 == 0 {
            return Err(Error::Shape(format!(
                "coefficient lists need equal odd length 2N+1, got {} and {}",
                b.len(),
                c.len()
            )));
        }
        if b.iter().chain(c.iter()).any(|v| v.len() != n) {
            return Err(Error::Shape(format!("every coefficient must have length {n}")));
        }
        Ok(Self { q, omega0, b, c })
    }

    /// Time-invariant SISO system viewed as an LTP system with `N = 0`.
    pub fn from_lti(sys: &LtiSystem, omega0: f64) -> Result<Self> {
        if sys.inputs() != 1 || sys.outputs() != 1 {
            return Err(Error::Shape("only single-input single-output systems embed as N = 0".into()));
        }
        Self::new(
            sys.a().clone(),
            omega0,
            vec![sys.b().column(0).into_owned()],
            vec![sys.c().row(0).transpose()],
        )
    }

    pub fn q(&self) -> &CMat {
        &self.q
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega0
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        (self.b.len() - 1) / 2
    }

    pub fn b_coeffs(&self) -> &[CVec] {
        &self.b
    }

    pub fn c_coeffs(&self) -> &[CVec] {
        &self.c
    }

    pub fn b_at(&self, k: i64) -> Option<&CVec> {
        self.index(k).map(|p| &self.b[p])
    }

    pub fn c_at(&self, k: i64) -> Option<&CVec> {
        self.index(k).map(|p| &self.c[p])
    }

    fn index(&self, k: i64) -> Option<usize> {
        let n = self.order() as i64;
        (k.abs() <= n).then(|| (k + n) as usize)
    }

    /// Centered truncation to order `order`; larger orders pad with zeros.
    pub fn truncate(&self, order: usize) -> Self {
        let n = self.n();
        let pick = |coeffs: &[CVec]| -> Vec<CVec> {
            (-(order as i64)..=order as i64)
                .map(|k| self.index(k).map_or_else(|| CVec::zeros(n), |p| coeffs[p].clone()))
                .collect()
        };
        Self {
            q: self.q.clone(),
            omega0: self.omega0,
            b: pick(&self.b),
            c: pick(&self.c),
        }
    }

    /// Multiply every `c_k` by `alpha`.
    pub fn scale_output(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for c in &mut out.c {
            *c *= alpha;
        }
        out
    }

    /// `b_{-k} = conj(b_k)` and `c_{-k} = conj(c_k)`, i.e. real `b(t)` and `c(t)`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let n = self.order();
        let scale = self
            .b
            .iter()
            .chain(self.c.iter())
            .fold(0.0f64, |acc, v| acc.max(v.norm()))
            .max(f64::MIN_POSITIVE);
        (0..=n).all(|j| {
            let (lo, hi) = (n - j, n + j);
            (&self.b[lo] - self.b[hi].conjugate()).norm() <= tol * scale
                && (&self.c[lo] - self.c[hi].conjugate()).norm() <= tol * scale
        })
    }

    pub fn is_hurwitz(&self) -> bool {
        crate::floquet::is_hurwitz(&self.q)
    }

    /// `b(t)`.
    pub fn b_eval(&self, t: f64) -> CVec {
        self.series(&self.b, t)
    }

    /// `c(t)`.
    pub fn c_eval(&self, t: f64) -> CVec {
        self.series(&self.c, t)
    }

    fn series(&self, coeffs: &[CVec], t: f64) -> CVec {
        let n = self.order() as i64;
        let mut out = CVec::zeros(self.n());
        for (p, v) in coeffs.iter().enumerate() {
            let k = p as i64 - n;
            out.axpy(cplx(0.0, k as f64 * self.omega0 * t).exp(), v, ONE);
        }
        out
    }

    /// Indices `k` with a possibly nonzero subsystem, `-2N..=2N`.
    pub fn subsystem_indices(&self) -> std::ops::RangeInclusive<i64> {
        let n = 2 * self.order() as i64;
        -n..=n
    }

    /// Input shells `l` contributing to `g_k`: `|l| <= N`, `|k - l| <= N`, `b_l != 0`.
    fn active_shells(&self, k: i64) -> Vec<i64> {
        let n = self.order() as i64;
        (-n..=n)
            .filter(|&l| (k - l).abs() <= n)
            .filter(|&l| self.b_at(l).is_some_and(|b| b.iter().any(|z| *z != ZERO)))
            .collect()
    }

    /// `g_k(s)`; exactly zero for `|k| > 2N`.
    pub fn eval_subsystem(&self, k: i64, s: Complex64) -> Result<Complex64> {
        let mut total = ZERO;
        for l in self.active_shells(k) {
            let sl = s + cplx(0.0, l as f64 * self.omega0);
            let b = CMat::from_column_slice(self.n(), 1, self.b_at(l).unwrap().as_slice());
            let x = shifted_solve(&self.q, sl, &b)?;
            total += dotu(self.c_at(k - l).unwrap(), &x.column(0).into_owned());
        }
        Ok(total)
    }

    /// Finite LTI realization of `g_k`: `blkdiag(Q - i l w0 I)` over the active shells.
    /// `None` when `g_k` vanishes identically.
    pub fn subsystem_realization(&self, k: i64) -> Result<Option<LtiSystem>> {
        let shells = self.active_shells(k);
        if shells.is_empty() {
            return Ok(None);
        }
        let n = self.n();
        let blocks: Vec<CMat> = shells.iter().map(|&l| self.shifted_q(-(l as f64) * self.omega0)).collect();
        let a = block_diag(&blocks);
        let mut b = CMat::zeros(n * shells.len(), 1);
        let mut c = CMat::zeros(1, n * shells.len());
        for (p, &l) in shells.iter().enumerate() {
            b.view_mut((p * n, 0), (n, 1)).copy_from(self.b_at(l).unwrap());
            c.view_mut((0, p * n), (1, n)).copy_from(&self.c_at(k - l).unwrap().transpose());
        }
        Ok(Some(LtiSystem::new(a, b, c)?))
    }

    /// `Q + i w I`.
    fn shifted_q(&self, w: f64) -> CMat {
        let mut m = self.q.clone();
        for i in 0..self.n() {
            m[(i, i)] += cplx(0.0, w);
        }
        m
    }

    /// Realization of `G - H` as `blkdiag(Q_G, Q_H)`, `[b; b~]`, `[c; -c~]`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        check_frequency(self, other)?;
        let order = self.order().max(other.order());
        let (g, h) = (self.truncate(order), other.truncate(order));
        let q = block_diag(&[g.q.clone(), h.q.clone()]);
        let stack = |x: &CVec, y: &CVec| -> CVec {
            CVec::from_iterator(x.len() + y.len(), x.iter().cloned().chain(y.iter().cloned()))
        };
        let b = g.b.iter().zip(&h.b).map(|(x, y)| stack(x, y)).collect();
        let c = g.c.iter().zip(&h.c).map(|(x, y)| stack(x, &(-y))).collect();
        Self::new(q, self.omega0, b, c)
    }

    /// Steady-state response to `e^{i w t}`: one entry per nontrivial subsystem.
    pub fn steady_state_harmonics(&self, omega: f64) -> Result<Vec<Harmonic>> {
        require_hurwitz(&self.q)?;
        self.subsystem_indices()
            .map(|k| {
                Ok(Harmonic {
                    k,
                    frequency: omega + k as f64 * self.omega0,
                    gain: self.eval_subsystem(k, cplx(0.0, omega))?,
                })
            })
            .collect()
    }
}

fn require_hurwitz(q: &CMat) -> Result<()> {
    let schur = SchurForm::new(q)?;
    let max_re = crate::linalg::max_real_part(&schur.eigenvalues());
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    Ok(())
}

fn check_frequency(g: &FloquetFourierSystem, h: &FloquetFourierSystem) -> Result<()> {
    let (a, b) = (g.omega0, h.omega0);
    if (a - b).abs() > 1e-12 * a.max(b) {
        return Err(Error::FrequencyMismatch { left: a, right: b });
    }
    Ok(())
}

/// `||G||_H2 = sqrt(sum_k ||g_k||^2)`, each term a Gramian norm of the realized subsystem.
pub fn h2_norm_subsystem_sum(sys: &FloquetFourierSystem) -> Result<f64> {
    require_hurwitz(&sys.q)?;
    let ks: Vec<i64> = sys.subsystem_indices().collect();
    let terms: Vec<Result<f64>> = ks
        .par_iter()
        .map(|&k| match sys.subsystem_realization(k)? {
            Some(g) => lti::h2_norm_gramian(&g).map(|v| v * v),
            None => Ok(0.0),
        })
        .collect();
    let mut total = 0.0;
    for t in terms {
        total += t?;
    }
    Ok(total.sqrt())
}

/// `<G, H>_H2 = sum_k <g_k, h_k>`, each term by the LTI residue formula.
///
/// When a subsystem's poles are too clustered for residues (shells of `Q`
/// colliding across `l`), that term falls back to the Sylvester route.
pub fn h2_inner_subsystem_sum(g: &FloquetFourierSystem, h: &FloquetFourierSystem) -> Result<Complex64> {
    check_frequency(g, h)?;
    require_hurwitz(&g.q)?;
    require_hurwitz(&h.q)?;
    let n = g.order().max(h.order()) as i64;
    let ks: Vec<i64> = (-2 * n..=2 * n).collect();
    let terms: Vec<Result<Complex64>> = ks
        .par_iter()
        .map(|&k| {
            let (Some(gk), Some(hk)) = (g.subsystem_realization(k)?, h.subsystem_realization(k)?) else {
                return Ok(ZERO);
            };
            match lti::h2_inner_residue(&gk, &hk) {
                Ok(v) => Ok(v),
                Err(Error::ClusteredPoles { .. } | Error::Defective { .. }) => {
                    lti::h2_inner_gramian(&gk, &hk)
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut total = ZERO;
    for t in terms {
        total += t?;
    }
    Ok(total)
}

/// Pole-residue evaluation result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoleResidueValue {
    pub value: Complex64,
    /// Magnitude of the outermost `l` shell that was summed.
    pub remainder: f64,
}

/// `<G, H>_H2 = sum_k sum_l sum_j conj(g_k(-conj(mu))) res[h_k, mu]`,
/// `mu = lambda_j(Q) - i l w0`, for systems sharing `Q`. Shells with
/// `|l| > ell_max` are dropped.
pub fn h2_inner_pole_residue(
    g: &FloquetFourierSystem,
    h: &FloquetFourierSystem,
    ell_max: usize,
) -> Result<PoleResidueValue> {
    check_frequency(g, h)?;
    if g.q.shape() != h.q.shape() || (&g.q - &h.q).norm() > SHARED_Q_TOL * g.q.norm().max(1.0) {
        return Err(Error::SharedStateMatrix);
    }
    let w0 = g.omega0;
    let eig = Eigen::new(&g.q)?;
    let max_re = crate::linalg::max_real_part(&eig.values);
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    let max_imag = eig.values.iter().fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    if max_imag >= w0 {
        return Err(Error::SpectralGap { max_imag, omega0: w0 });
    }
    let threshold = POLE_CLUSTER_TOL * spectral_radius(&eig.values);
    let separation = min_separation(&eig.values);
    if separation <= threshold {
        return Err(Error::ClusteredPoles { separation, threshold });
    }

    let order = g.order().max(h.order());
    let (g, h) = (g.truncate(order), h.truncate(order));
    // Modal coordinates: b_l -> S^{-1} b_l, c_k -> S^T c_k.
    let modal = |v: &[CVec], m: &CMat| -> Vec<CVec> { v.iter().map(|x| m * x).collect() };
    let st = eig.vectors.transpose();
    let (gb, gc) = (modal(&g.b, &eig.inverse), modal(&g.c, &st));
    let (hb, hc) = (modal(&h.b, &eig.inverse), modal(&h.c, &st));
    let lam = &eig.values;
    let n = order as i64;
    fn at(v: &[CVec], k: i64) -> Option<&CVec> {
        let n = (v.len() / 2) as i64;
        (k.abs() <= n).then(|| &v[(k + n) as usize])
    }

    // Modal evaluation of g_k(s).
    let eval_g = |k: i64, s: Complex64| -> Complex64 {
        let mut acc = ZERO;
        for l in -n..=n {
            let (Some(cb), Some(bl)) = (at(&gc, k - l), at(&gb, l)) else { continue };
            let sl = s + cplx(0.0, l as f64 * w0);
            for j in 0..lam.len() {
                acc += cb[j] * bl[j] / (sl - lam[j]);
            }
        }
        acc
    };

    let ell = (ell_max as i64).min(n);
    let shells: Vec<i64> = (-ell..=ell).collect();
    let per_shell: Vec<Complex64> = shells
        .par_iter()
        .map(|&l| {
            let mut acc = ZERO;
            let Some(bl) = at(&hb, l) else { return acc };
            for k in (l - n)..=(l + n) {
                let Some(cb) = at(&hc, k - l) else { continue };
                for j in 0..lam.len() {
                    let res = cb[j] * bl[j];
                    if res == ZERO {
                        continue;
                    }
                    let mu = lam[j] - cplx(0.0, l as f64 * w0);
                    acc += eval_g(k, -mu.conj()).conj() * res;
                }
            }
            acc
        })
        .collect();
    let value = per_shell.iter().sum();
    let remainder = if ell_max as i64 > n {
        0.0
    } else {
        per_shell
            .iter()
            .zip(&shells)
            .filter(|(_, &l)| l.abs() == ell)
            .map(|(v, _)| v.norm())
            .sum()
    };
    Ok(PoleResidueValue { value, remainder })
}

/// Block-diagonal frequency-shifted LTI embedding of order `N_e`.
///
/// State block `m = -N_e..N_e` carries `Q + i m w0 I` and input `b_{-m}`; output
/// block row `j = -(N_e+N_c)..(N_e+N_c)` couples to state block `m` through
/// `c_{m-j}^T` when `|m - j| <= N_c`, `N_c = min(N, N_e)`.
#[derive(Clone, Debug)]
pub struct ZhouHagiwaraEmbedding {
    pub embed_order: usize,
    pub system: LtiSystem,
}

impl ZhouHagiwaraEmbedding {
    pub fn assemble(sys: &FloquetFourierSystem, embed_order: usize) -> Result<Self> {
        let n = sys.n();
        let ne = embed_order as i64;
        let nc = sys.order().min(embed_order) as i64;
        let blocks = 2 * embed_order + 1;
        let rows = 2 * (ne + nc) as usize + 1;
        let shifted: Vec<CMat> = (-ne..=ne).map(|m| sys.shifted_q(m as f64 * sys.omega0)).collect();
        let a = block_diag(&shifted);
        let mut b = CMat::zeros(n * blocks, 1);
        let mut c = CMat::zeros(rows, n * blocks);
        for (p, m) in (-ne..=ne).enumerate() {
            if let Some(bm) = sys.b_at(-m) {
                b.view_mut((p * n, 0), (n, 1)).copy_from(bm);
            }
            for (row, j) in (-(ne + nc)..=(ne + nc)).enumerate() {
                if (m - j).abs() <= nc {
                    let cv = sys.c_at(m - j).unwrap();
                    c.view_mut((row, p * n), (1, n)).copy_from(&cv.transpose());
                }
            }
        }
        Ok(Self {
            embed_order,
            system: LtiSystem::new(a, b, c)?,
        })
    }

    /// Block shifts `i m w0`, `m = -N_e..N_e`.
    pub fn shifts(embed_order: usize, omega0: f64) -> Vec<Complex64> {
        let ne = embed_order as i64;
        (-ne..=ne).map(|m| cplx(0.0, m as f64 * omega0)).collect()
    }
}

/// Both Gramian traces of the embedding and their agreement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZhouHagiwaraNorm {
    pub embed_order: usize,
    pub value: f64,
    /// `sqrt(trace(B^* V B))` with the observability Gramian.
    pub v_path: f64,
    /// `sqrt(trace(C W C^*))` with the controllability Gramian.
    pub w_path: f64,
    /// `|v_path - w_path| / max(v_path, w_path)`.
    pub discrepancy: f64,
}

/// LTP H2 norm from the Gramians of the embedding of order `N_e`.
///
/// The embedding is never assembled: `Q` is factored once, and each path
/// solves one block equation per shell offset `l' - l` that reaches a
/// nonzero output coupling.
pub fn h2_norm_zhou_hagiwara(sys: &FloquetFourierSystem, embed_order: usize) -> Result<ZhouHagiwaraNorm> {
    let solver = ShiftedLyapunov::new(&sys.q)?;
    let max_re = crate::linalg::max_real_part(&solver.schur().eigenvalues());
    if max_re >= -STABILITY_MARGIN {
        return Err(Error::Unstable { max_real_part: max_re });
    }
    let ne = embed_order as i64;
    let nc = sys.order().min(embed_order) as i64;
    let w0 = sys.omega0;
    // Input shells in the `l` labelling: block `m` holds `b_{-m}` and `Q + i m w0 = Q - i l w0`.
    let shells: Vec<i64> = (-ne..=ne)
        .filter(|&l| sys.b_at(l).is_some_and(|b| b.iter().any(|z| *z != ZERO)))
        .collect();
    if shells.is_empty() {
        return Ok(ZhouHagiwaraNorm {
            embed_order,
            value: 0.0,
            v_path: 0.0,
            w_path: 0.0,
            discrepancy: 0.0,
        });
    }
    let shift = |l: i64| cplx(0.0, -(l as f64) * w0);
    // Everything below lives in Schur coordinates: b -> U^* b, c^T -> c^T U.
    let u = &solver.schur().unitary;
    let b_hat: Vec<CVec> = shells.iter().map(|&l| u.adjoint() * sys.b_at(l).unwrap()).collect();
    let c_hat: Vec<CVec> = (-nc..=nc).map(|j| u.transpose() * sys.c_at(j).unwrap()).collect();
    // cross(d) = sum_k conj(c_{k-l}) c_{k-l'}^T with d = l - l'; rows span every k with |k - l| <= N_c.
    let cross_hat: Vec<CMat> = (-2 * nc..=2 * nc)
        .map(|d| {
            let mut acc = CMat::zeros(sys.n(), sys.n());
            for j in -nc..=nc {
                if (j + d).abs() <= nc {
                    let cj = &c_hat[(j + nc) as usize];
                    let cp = &c_hat[(j + d + nc) as usize];
                    acc += cj.conjugate() * cp.transpose();
                }
            }
            acc
        })
        .collect();
    let zero_block = CMat::zeros(sys.n(), sys.n());
    let cross = |d: i64| -> &CMat {
        if d.abs() <= 2 * nc {
            &cross_hat[(d + 2 * nc) as usize]
        } else {
            &zero_block
        }
    };
    // Both block equations depend on (l, l') only through d = l' - l, so the
    // pairs sharing d are summed into one right-hand side per path.
    let offsets: Vec<i64> = (-2 * nc..=2 * nc)
        .filter(|&d| cross(d).iter().any(|z| *z != ZERO))
        .filter(|&d| shells.iter().any(|&l| shells.contains(&(l + d))))
        .collect();
    let n = sys.n();
    let terms: Vec<Result<(Complex64, Complex64)>> = offsets
        .par_iter()
        .map(|&d| {
            // outer = sum_l b_l b_{l+d}^*.
            let mut outer = CMat::zeros(n, n);
            for (i, &l) in shells.iter().enumerate() {
                if let Some(j) = shells.iter().position(|&lp| lp == l + d) {
                    outer += &b_hat[i] * b_hat[j].adjoint();
                }
            }
            // W path: Q_l W + W Q_{l+d}^* + outer = 0, term tr(W cross(d)).
            let w = solver.solve_block_schur(shift(-d), ZERO, &outer, LyapunovMode::Controllability)?;
            let w_term = w.transpose().dot(cross(d));
            // V path: Q_l^* V + V Q_{l+d} + cross(-d) = 0, term sum_l b_l^* V b_{l+d} = tr(V outer^*).
            let v = solver.solve_block_schur(ZERO, shift(d), cross(-d), LyapunovMode::Observability)?;
            let v_term = v.transpose().dot(&outer.adjoint());
            Ok((v_term, w_term))
        })
        .collect();
    let (mut v_total, mut w_total) = (0.0, 0.0);
    for t in terms {
        let (v, w) = t?;
        v_total += v.re;
        w_total += w.re;
    }
    let v_path = v_total.max(0.0).sqrt();
    let w_path = w_total.max(0.0).sqrt();
    let big = v_path.max(w_path);
    let discrepancy = if big > 0.0 { (v_path - w_path).abs() / big } else { 0.0 };
    Ok(ZhouHagiwaraNorm {
        embed_order,
        value: 0.5 * (v_path + w_path),
        v_path,
        w_path,
        discrepancy,
    })
}

/// Norms at `N_e = start, 2 start, 4 start, ...` until the relative change
/// drops to `tol` or `max_order` is passed.
pub fn zhou_hagiwara_convergence(
    sys: &FloquetFourierSystem,
    start: usize,
    max_order: usize,
    tol: f64,
) -> Result<Vec<ZhouHagiwaraNorm>> {
    let mut trace = Vec::new();
    let mut ne = start.max(1);
    loop {
        let v = h2_norm_zhou_hagiwara(sys, ne)?;
        let done = trace.last().is_some_and(|prev: &ZhouHagiwaraNorm| {
            (v.value - prev.value).abs() <= tol * v.value.max(f64::MIN_POSITIVE)
        });
        trace.push(v);
        if done || ne >= max_order {
            return Ok(trace);
        }
        ne = (2 * ne).min(max_order.max(ne + 1));
    }
}

/// Real matrix from a list of real-valued samples (helper for tests and benchmarks).
pub fn real_coefficients(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| cplx(x, 0.0)))
}

/// `Q` as a real matrix when its imaginary part vanishes.
pub fn real_q(sys: &FloquetFourierSystem) -> Option<DMatrix<f64>> {
    crate::linalg::is_real(&sys.q, 0.0).then(|| sys.q.map(|z| z.re))
}
