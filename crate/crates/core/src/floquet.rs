//! Monodromy matrices and Floquet factorizations `X(t) = P(t) e^{Qt}`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier;
use crate::linalg::{max_imag, to_complex, to_complex_vec, CMat, CVec, Eigen, SchurForm};
use crate::lti::STABILITY_MARGIN;
use crate::ltp::FloquetFourierSystem;

/// Default RK4 step count per period.
pub const DEFAULT_STEPS: usize = 2048;

type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// A `T`-periodic real matrix function `A(t)`.
#[derive(Clone)]
pub enum PeriodicMatrixSampler {
    Function { period: f64, dim: usize, f: MatrixFn },
    /// Uniform samples on `[0, T)` evaluated through their trigonometric interpolant.
    Sampled {
        period: f64,
        samples: Vec<DMatrix<f64>>,
        coefficients: Vec<CMat>,
    },
}

impl std::fmt::Debug for PeriodicMatrixSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Function { period, dim, .. } => f
                .debug_struct("Function")
                .field("period", period)
                .field("dim", dim)
                .finish(),
            Self::Sampled { period, samples, .. } => f
                .debug_struct("Sampled")
                .field("period", period)
                .field("grid", &samples.len())
                .finish(),
        }
    }
}

impl PeriodicMatrixSampler {
    pub fn from_fn<F>(period: f64, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        Ok(Self::Function {
            period,
            dim,
            f: Arc::new(f),
        })
    }

    pub fn constant(a: DMatrix<f64>, period: f64) -> Result<Self> {
        let dim = a.nrows();
        Self::from_fn(period, dim, move |_| a.clone())
    }

    pub fn from_samples(period: f64, samples: Vec<DMatrix<f64>>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        let n_t = samples.len();
        if n_t == 0 || !n_t.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "sample grid length must be a power of two, got {n_t}"
            )));
        }
        let dim = samples[0].nrows();
        if samples.iter().any(|s| s.nrows() != dim || s.ncols() != dim) {
            return Err(Error::Shape("periodic samples must all be square of equal size".into()));
        }
        let flat: Vec<CVec> = samples
            .iter()
            .map(|s| CVec::from_iterator(dim * dim, s.iter().map(|&x| Complex64::new(x, 0.0))))
            .collect();
        let raw = fourier::dft(&flat)?;
        let half = n_t / 2;
        let coefficients = raw
            .into_iter()
            .take(half + 1)
            .map(|v| CMat::from_iterator(dim, dim, v.iter().cloned()))
            .collect();
        Ok(Self::Sampled {
            period,
            samples,
            coefficients,
        })
    }

    pub fn period(&self) -> f64 {
        match self {
            Self::Function { period, .. } | Self::Sampled { period, .. } => *period,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Function { dim, .. } => *dim,
            Self::Sampled { samples, .. } => samples[0].nrows(),
        }
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.period()
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match self {
            Self::Function { f, period, .. } => f(t.rem_euclid(*period)),
            Self::Sampled {
                period,
                samples,
                coefficients,
            } => {
                let n_t = samples.len();
                let dim = samples[0].nrows();
                let w = 2.0 * PI / period;
                let mut out = coefficients[0].map(|z| z.re);
                if n_t == 1 {
                    return out;
                }
                let half = n_t / 2;
                for (k, c) in coefficients.iter().enumerate().skip(1) {
                    let phase = Complex64::new(0.0, k as f64 * w * t).exp();
                    let weight = if k == half { 1.0 } else { 2.0 };
                    for j in 0..dim {
                        for i in 0..dim {
                            let v = c[(i, j)] * phase;
                            out[(i, j)] += weight * v.re;
                        }
                    }
                }
                out
            }
        }
    }
}

fn rk4_step(a: &PeriodicMatrixSampler, t: f64, h: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
    let a0 = a.eval(t);
    let am = a.eval(t + 0.5 * h);
    let a1 = a.eval(t + h);
    let k1 = &a0 * x;
    let k2 = &am * (x + &k1 * (0.5 * h));
    let k3 = &am * (x + &k2 * (0.5 * h));
    let k4 = &a1 * (x + &k3 * h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fundamental matrix `X(t_i)`, `X(0) = I`, at `grid + 1` uniform points of
/// `[0, T]`, integrated with fixed-step RK4 (`steps` is rounded up to a
/// multiple of `grid`).
pub fn fundamental_matrix(
    a: &PeriodicMatrixSampler,
    steps: usize,
    grid: usize,
) -> Result<Vec<DMatrix<f64>>> {
    if grid == 0 || steps == 0 {
        return Err(Error::InvalidArgument("steps and grid must be positive".into()));
    }
    let per_cell = steps.div_ceil(grid);
    let total = per_cell * grid;
    let h = a.period() / total as f64;
    let n = a.dim();
    let mut x = DMatrix::<f64>::identity(n, n);
    let mut out = Vec::with_capacity(grid + 1);
    out.push(x.clone());
    for cell in 0..grid {
        for s in 0..per_cell {
            let t = (cell * per_cell + s) as f64 * h;
            x = rk4_step(a, t, h, &x);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("fundamental matrix overflowed".into()));
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// One-period state transition `M = X(T)` with `X(0) = I`.
pub fn monodromy(a: &PeriodicMatrixSampler, steps: usize) -> Result<DMatrix<f64>> {
    let mut xs = fundamental_matrix(a, steps, 1)?;
    Ok(xs.pop().expect("grid has two points"))
}

/// `true` iff every eigenvalue of `q` has real part below `-STABILITY_MARGIN`.
pub fn is_hurwitz(q: &CMat) -> bool {
    match SchurForm::new(q) {
        Ok(s) => s
            .eigenvalues()
            .iter()
            .all(|z| z.re < -STABILITY_MARGIN),
        Err(_) => false,
    }
}

#[derive(Clone, Debug)]
pub struct FloquetFactors {
    pub period: f64,
    /// Constant Floquet state map.
    pub q: CMat,
    /// `P(t_i)` on the uniform grid `t_i = i T / grid`, `P(0) = I`.
    pub p_samples: Vec<CMat>,
    /// Fundamental matrix on the same grid (`grid + 1` points, last is `M`).
    pub x_samples: Vec<DMatrix<f64>>,
    pub monodromy: DMatrix<f64>,
    /// Conditioning notes, e.g. a multiplier close to the logarithm branch cut.
    pub warnings: Vec<String>,
}

impl FloquetFactors {
    pub fn grid_times(&self) -> Vec<f64> {
        let n = self.p_samples.len();
        (0..n).map(|i| i as f64 * self.period / n as f64).collect()
    }

    /// `e^{Qt}` through the eigendecomposition of `Q`.
    pub fn exp_q(&self, t: f64) -> Result<CMat> {
        let eig = Eigen::new(&self.q)?;
        Ok(eig.apply(|z| (z * t).exp()))
    }
}

#[derive(Clone, Debug)]
pub struct FloquetTransform {
    pub factors: FloquetFactors,
    /// `P^{-1}(t_i) b(t_i)`.
    pub b_samples: Vec<CVec>,
    /// `P(t_i)^T c(t_i)`, i.e. the transformed output map `c^T(t) P(t)`.
    pub c_samples: Vec<CVec>,
}

impl FloquetTransform {
    /// Floquet–Fourier form truncated to `order` harmonics.
    pub fn to_floquet_fourier(&self, order: usize) -> Result<FloquetFourierSystem> {
        let b = fourier::centered_coefficients(&self.b_samples, order)?;
        let c = fourier::centered_coefficients(&self.c_samples, order)?;
        FloquetFourierSystem::new(self.factors.q.clone(), 2.0 * PI / self.factors.period, b, c)
    }
}

const BRANCH_WARN_ANGLE: f64 = 0.99 * PI;

/// Principal logarithm `ln M / T` via eigendecomposition, with its eigenbasis.
fn floquet_exponent(m: &DMatrix<f64>, period: f64, warnings: &mut Vec<String>) -> Result<(CMat, Eigen)> {
    let eig = Eigen::new(&to_complex(m))?;
    let scale = eig.values.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    for mu in &eig.values {
        let on_cut = mu.norm() <= f64::EPSILON * scale.max(1.0)
            || (mu.re < 0.0 && mu.im.abs() <= 1e3 * f64::EPSILON * mu.norm());
        if on_cut {
            return Err(Error::LogBranch { eigenvalue: *mu });
        }
        if mu.arg().abs() > BRANCH_WARN_ANGLE {
            let msg = format!(
                "monodromy eigenvalue {mu} has |arg| = {:.6} close to pi; principal branch taken",
                mu.arg().abs()
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let mut q = eig.apply(|z| z.ln() / period);
    if max_imag(&q) <= 1e-10 * q.norm().max(1.0) {
        q = q.map(|z| Complex64::new(z.re, 0.0));
    }
    Ok((q, eig))
}

/// Floquet factors only (no input/output maps).
pub fn floquet_factors(a: &PeriodicMatrixSampler, steps: usize, grid: usize) -> Result<FloquetFactors> {
    let period = a.period();
    let x_samples = fundamental_matrix(a, steps, grid)?;
    let m = x_samples[grid].clone();
    let mut warnings = Vec::new();
    let (q, eig) = floquet_exponent(&m, period, &mut warnings)?;
    let log_values: Vec<Complex64> = eig.values.iter().map(|z| z.ln() / period).collect();
    let n = a.dim();
    let mut p_samples = Vec::with_capacity(grid);
    p_samples.push(CMat::identity(n, n));
    for (i, x) in x_samples.iter().enumerate().take(grid).skip(1) {
        let t = i as f64 * period / grid as f64;
        let mut scaled = eig.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= (-log_values[j] * t).exp();
        }
        let e_neg = scaled * &eig.inverse;
        let mut p = to_complex(x) * e_neg;
        if max_imag(&p) <= 1e-10 * p.norm().max(1.0) {
            p = p.map(|z| Complex64::new(z.re, 0.0));
        }
        p_samples.push(p);
    }
    Ok(FloquetFactors {
        period,
        q,
        p_samples,
        x_samples,
        monodromy: m,
        warnings,
    })
}

/// Transform `x' = A(t)x + b(t)u, y = c(t)^T x` into `z' = Qz + P^{-1}b u, y = c^T P z`.
///
/// `b_samples` and `c_samples` are given on the uniform grid `t_i = i T / grid`
/// (grid length a power of two).
pub fn floquet_transform(
    a: &PeriodicMatrixSampler,
    b_samples: &[DVector<f64>],
    c_samples: &[DVector<f64>],
    steps: usize,
) -> Result<FloquetTransform> {
    let grid = b_samples.len();
    if grid == 0 || !grid.is_power_of_two() || c_samples.len() != grid {
        return Err(Error::InvalidArgument(format!(
            "b and c need the same power-of-two sample count, got {} and {}",
            b_samples.len(),
            c_samples.len()
        )));
    }
    let n = a.dim();
    if b_samples.iter().chain(c_samples.iter()).any(|v| v.len() != n) {
        return Err(Error::Shape(format!("b/c samples must have length {n}")));
    }
    let factors = floquet_factors(a, steps, grid)?;
    let mut bt = Vec::with_capacity(grid);
    let mut ct = Vec::with_capacity(grid);
    for i in 0..grid {
        let p = &factors.p_samples[i];
        let b = to_complex_vec(&b_samples[i]);
        let pb = p
            .clone()
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::InvalidArgument(format!("P(t_{i}) is singular")))?;
        bt.push(pb);
        ct.push(p.transpose() * to_complex_vec(&c_samples[i]));
    }
    Ok(FloquetTransform {
        factors,
        b_samples: bt,
        c_samples: ct,
    })
}
