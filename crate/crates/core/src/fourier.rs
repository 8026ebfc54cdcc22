//! Discrete Fourier helpers for uniformly sampled periodic data.
//!
//! Coefficients follow the `e^{+i k w0 t}` convention:
//! `x(t) = sum_k x_k e^{i k w0 t}`, so `x_k = (1/n) sum_j x(t_j) e^{-2 pi i k j / n}`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CVec;

/// Forward DFT of vector samples, normalized by `1/n`, in FFT order `k = 0..n-1`.
pub fn dft(samples: &[CVec]) -> Result<Vec<CVec>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let dim = samples[0].len();
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::Shape("samples have inconsistent lengths".into()));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut out = vec![CVec::zeros(dim); n];
    let scale = 1.0 / n as f64;
    let mut buf = vec![Complex64::default(); n];
    for row in 0..dim {
        for (j, s) in samples.iter().enumerate() {
            buf[j] = s[row];
        }
        fft.process(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            out[k][row] = v * scale;
        }
    }
    Ok(out)
}

/// Centered coefficients `x_{-order}..x_{order}` of a sampled periodic signal.
///
/// For even `n` and `order == n/2` the Nyquist coefficient is split evenly
/// between `+n/2` and `-n/2`, which keeps the trigonometric interpolant real
/// for real samples and exact on the grid.
pub fn centered_coefficients(samples: &[CVec], order: usize) -> Result<Vec<CVec>> {
    let n = samples.len();
    if 2 * order > n {
        return Err(Error::InvalidArgument(format!(
            "Fourier order {order} exceeds what {n} samples resolve ({})",
            n / 2
        )));
    }
    let raw = dft(samples)?;
    let nyquist = n % 2 == 0 && 2 * order == n;
    let mut out = Vec::with_capacity(2 * order + 1);
    for k in -(order as i64)..=(order as i64) {
        let idx = k.rem_euclid(n as i64) as usize;
        let mut v = raw[idx].clone();
        if nyquist && k.unsigned_abs() as usize == order {
            v *= Complex64::new(0.5, 0.0);
        }
        out.push(v);
    }
    Ok(out)
}

/// Largest centered order representable by `n` samples.
pub fn max_order(n: usize) -> usize {
    n / 2
}
