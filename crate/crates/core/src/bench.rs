//! Ready-made reduction benchmarks: a system in Floquet–Fourier form, the
//! truncation order to reduce at, and POD training snapshots.

use std::f64::consts::PI;
use std::time::Instant;

use crate::error::Result;
use crate::linalg::CMat;
use crate::lti::LtiSystem;
use crate::ltp::FloquetFourierSystem;
use crate::mor::{self, IrkaOptions, ReductionMethod, ReductionOptions, ReductionReport};
use crate::sim::{self, InputSignal, Model, SimOptions};

/// Input frequency used to train POD on the modulated structure.
pub const MODULATED_TRAINING_OMEGA: f64 = 19.2875;

#[derive(Clone, Debug)]
pub struct BenchCase {
    pub name: &'static str,
    pub system: FloquetFourierSystem,
    pub order: usize,
    /// State snapshots (columns) of the training run, in the coordinates of `system`.
    pub pod_snapshots: CMat,
}

/// Heat equation with a moving source: `n_interior` nodes, `grid_t` samples
/// per period and `N = grid_t / 2`. POD is trained on the physical model with
/// a unit step, `dt = 1`, `t_final = 100`.
pub fn heat_case(n_interior: usize, grid_t: usize) -> Result<BenchCase> {
    let heat = sim::build_heat_benchmark(n_interior, grid_t)?;
    let order = grid_t / 2;
    let system = heat.floquet_fourier(order)?;
    let model = heat.sampled_ltp();
    let trace = sim::simulate_backward_euler(
        Model::Sampled(&model),
        &InputSignal::unit_step(),
        SimOptions::new(1.0, sim::HEAT_PERIOD).with_states(),
    )?;
    Ok(BenchCase {
        name: "heat",
        system,
        order,
        pod_snapshots: trace.states.expect("states requested"),
    })
}

/// Modulated 3-input/3-output structure (`N = 2`). POD is trained on
/// `u(t) = sin(19.2875 t)`.
pub fn modulated_case(base: &LtiSystem, omega0: f64) -> Result<BenchCase> {
    let system = sim::build_modulated_benchmark(base, omega0)?;
    let trace = sim::simulate_backward_euler(
        Model::FloquetFourier(&system),
        &InputSignal::Sine {
            omega: MODULATED_TRAINING_OMEGA,
            phase: 0.0,
            amplitude: 1.0,
        },
        SimOptions::new(0.01, 20.0).with_states(),
    )?;
    Ok(BenchCase {
        name: "modulated",
        system,
        order: 2,
        pod_snapshots: trace.states.expect("states requested"),
    })
}

/// Synthetic modulated RLC ladder, Floquet-transformed on `grid` points and
/// truncated at `order`. POD is trained in Floquet coordinates on a pulse of
/// width `0.06 T`.
pub fn circuit_case(sections: usize, seed: u64, grid: usize, order: usize) -> Result<BenchCase> {
    let ckt = sim::synthetic_circuit(sections, seed)?;
    let (system, _) = ckt.floquet_fourier(grid, order, crate::floquet::DEFAULT_STEPS)?;
    let period = ckt.period();
    let trace = sim::simulate_backward_euler(
        Model::FloquetFourier(&system),
        &InputSignal::Pulse {
            width: 0.06 * period,
            amplitude: 1.0,
        },
        SimOptions::new(period / 64.0, 60.0).with_states(),
    )?;
    Ok(BenchCase {
        name: "circuit",
        system,
        order,
        pod_snapshots: trace.states.expect("states requested"),
    })
}

/// Modulator frequency used when none is given.
pub const DEFAULT_MODULATION_FREQUENCY: f64 = 2.0;

/// One reduction of a benchmark, timed.
#[derive(Debug)]
pub struct BenchRun {
    pub r: usize,
    pub method: ReductionMethod,
    pub outcome: Result<ReductionReport>,
    pub wall_time_s: f64,
}

impl BenchRun {
    /// LTP error, with an unstable reduced model counted as infinite error.
    pub fn ltp_error(&self) -> Option<f64> {
        match &self.outcome {
            Ok(rep) => rep.ltp_error,
            Err(crate::Error::UnstableReduction { .. }) => Some(f64::INFINITY),
            Err(_) => None,
        }
    }
}

pub fn run(case: &BenchCase, r: usize, method: ReductionMethod, irka: &IrkaOptions) -> BenchRun {
    let mut opts = ReductionOptions::with_method(method);
    opts.irka = *irka;
    if method == ReductionMethod::Pod {
        opts.pod_snapshots = Some(case.pod_snapshots.clone());
    }
    let start = Instant::now();
    let outcome = mor::reduce_ltp_algorithm1(&case.system, r, case.order, &opts);
    BenchRun {
        r,
        method,
        outcome,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Pearson correlation of `ln x` against `ln y`.
pub fn log_correlation(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&lx), mean(&ly));
    let cov: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Steady-state harmonic gains `g_k` estimated from a simulated output:
/// `g_k = 2i mean(y(t) e^{-i (omega + k omega0) t})` over `window`, for the
/// input `sin(omega t)`.
pub fn demodulate(times: &[f64], outputs: &[f64], omega: f64, omega0: f64, k: i64, window: (f64, f64)) -> num_complex::Complex64 {
    let freq = omega + k as f64 * omega0;
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    let mut count = 0usize;
    for (&t, &y) in times.iter().zip(outputs) {
        if t >= window.0 && t < window.1 {
            acc += y * num_complex::Complex64::from_polar(1.0, -freq * t);
            count += 1;
        }
    }
    num_complex::Complex64::new(0.0, 2.0) * acc / count.max(1) as f64
}

/// Period of the slow envelope when `omega = omega0 / 4`.
pub fn quarter_rate_window(omega0: f64) -> f64 {
    4.0 * 2.0 * PI / omega0
}
