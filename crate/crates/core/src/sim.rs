//! Backward-Euler simulation and the benchmark systems.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::floquet::{self, PeriodicMatrixSampler};
use crate::fourier;
use crate::linalg::{cplx, dotu, to_complex, to_complex_vec, CMat, CVec};
use crate::lti::LtiSystem;
use crate::ltp::FloquetFourierSystem;

#[derive(Clone, Debug, PartialEq)]
pub enum InputSignal {
    /// `u(t) = amplitude`.
    Step { amplitude: f64 },
    /// `u(t) = amplitude` for `t < width`, zero afterwards.
    Pulse { width: f64, amplitude: f64 },
    /// `u(t) = amplitude sin(omega t + phase)`.
    Sine { omega: f64, phase: f64, amplitude: f64 },
    /// One value per simulation grid point.
    Sampled { values: Vec<f64> },
}

impl InputSignal {
    pub fn unit_step() -> Self {
        Self::Step { amplitude: 1.0 }
    }

    pub fn value(&self, t: f64, index: usize) -> Result<f64> {
        Ok(match self {
            Self::Step { amplitude } => *amplitude,
            Self::Pulse { width, amplitude } => {
                if t < *width {
                    *amplitude
                } else {
                    0.0
                }
            }
            Self::Sine { omega, phase, amplitude } => amplitude * (omega * t + phase).sin(),
            Self::Sampled { values } => *values.get(index).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "sampled input has {} values but the grid needs index {index}",
                    values.len()
                ))
            })?,
        })
    }
}

/// Parses `step`, `sine:<omega>` and `pulse:<width>`; file-backed signals are loaded elsewhere.
impl FromStr for InputSignal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("bad number in signal spec: {v}")))
        };
        match s.split_once(':') {
            None if s == "step" => Ok(Self::unit_step()),
            Some(("sine", w)) => Ok(Self::Sine {
                omega: num(w)?,
                phase: 0.0,
                amplitude: 1.0,
            }),
            Some(("pulse", w)) => Ok(Self::Pulse {
                width: num(w)?,
                amplitude: 1.0,
            }),
            _ => Err(Error::InvalidArgument(format!(
                "unknown signal '{s}' (expected step, sine:<omega>, pulse:<t> or file:<path>)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTrace {
    pub times: Vec<f64>,
    pub inputs: Vec<f64>,
    /// Real part of `y(t_k)`.
    pub outputs: Vec<f64>,
    /// State snapshots `x(t_0), ..., x(t_m)` as columns.
    pub states: Option<CMat>,
}

impl SimulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// `max_k |y_k - y'_k|` on a common grid.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Shape(format!("traces have {} and {} samples", self.len(), other.len())));
        }
        Ok(self
            .outputs
            .iter()
            .zip(&other.outputs)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs())))
    }
}

type VectorFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Physical LTP realization `x' = A(t) x + b(t) u`, `y = c(t)^T x`.
#[derive(Clone)]
pub struct SampledLtp {
    pub a: PeriodicMatrixSampler,
    pub b: VectorFn,
    pub c: VectorFn,
    /// Set when `A(t)` is constant, so the implicit matrix is factored once.
    pub constant_a: Option<DMatrix<f64>>,
}

impl std::fmt::Debug for SampledLtp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledLtp")
            .field("a", &self.a)
            .field("constant_a", &self.constant_a.is_some())
            .finish()
    }
}

/// Anything the backward-Euler driver can integrate.
#[derive(Clone, Copy, Debug)]
pub enum Model<'a> {
    Lti(&'a LtiSystem),
    FloquetFourier(&'a FloquetFourierSystem),
    Sampled(&'a SampledLtp),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub t_final: f64,
    pub keep_states: bool,
}

impl SimOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            keep_states: false,
        }
    }

    pub fn with_states(mut self) -> Self {
        self.keep_states = true;
        self
    }
}

fn implicit_factor(a: &CMat, dt: f64) -> Result<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    let n = a.nrows();
    let m = CMat::identity(n, n) - a * cplx(dt, 0.0);
    // Reuse the pivot-ratio gate of the general solver.
    if crate::linalg::solve(&m, &CMat::zeros(n, 0)).is_none() {
        return Err(Error::SingularShift { shift: cplx(1.0 / dt, 0.0) });
    }
    Ok(m.lu())
}

/// `x_{k+1} = (I - dt A(t_{k+1}))^{-1} (x_k + dt b(t_{k+1}) u_{k+1})`,
/// `y_k = c(t_k)^T x_k`, `x_0 = 0` on the grid `t_k = k dt`.
pub fn simulate_backward_euler(model: Model<'_>, input: &InputSignal, opts: SimOptions) -> Result<SimulationTrace> {
    let SimOptions { dt, t_final, keep_states } = opts;
    if !(dt > 0.0) || !dt.is_finite() || !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_final >= 0, got {dt}, {t_final}")));
    }
    let steps = (t_final / dt).round() as usize;
    let n = match model {
        Model::Lti(s) => {
            if s.inputs() != 1 || s.outputs() != 1 {
                return Err(Error::Shape("simulation needs a single-input single-output system".into()));
            }
            s.n()
        }
        Model::FloquetFourier(s) => s.n(),
        Model::Sampled(s) => s.a.dim(),
    };
    let constant = match model {
        Model::Lti(s) => Some(s.a().clone()),
        Model::FloquetFourier(s) => Some(s.q().clone()),
        Model::Sampled(s) => s.constant_a.as_ref().map(to_complex),
    };
    let lu = constant.as_ref().map(|a| implicit_factor(a, dt)).transpose()?;
    let b_at = |t: f64| -> CVec {
        match model {
            Model::Lti(s) => s.b().column(0).into_owned(),
            Model::FloquetFourier(s) => s.b_eval(t),
            Model::Sampled(s) => to_complex_vec(&(s.b)(t)),
        }
    };
    let c_at = |t: f64| -> CVec {
        match model {
            Model::Lti(s) => s.c().row(0).transpose(),
            Model::FloquetFourier(s) => s.c_eval(t),
            Model::Sampled(s) => to_complex_vec(&(s.c)(t)),
        }
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);
    let mut states = keep_states.then(|| CMat::zeros(n, steps + 1));
    let mut x = CVec::zeros(n);
    times.push(0.0);
    inputs.push(input.value(0.0, 0)?);
    outputs.push(0.0);
    for k in 1..=steps {
        let t = k as f64 * dt;
        let u = input.value(t, k)?;
        let rhs = &x + b_at(t) * cplx(dt * u, 0.0);
        x = match (&lu, model) {
            (Some(lu), _) => lu.solve(&rhs).ok_or(Error::SingularShift { shift: cplx(1.0 / dt, 0.0) })?,
            (None, Model::Sampled(s)) => {
                let a = to_complex(&s.a.eval(t));
                implicit_factor(&a, dt)?
                    .solve(&rhs)
                    .ok_or(Error::SingularShift { shift: cplx(1.0 / dt, 0.0) })?
            }
            (None, _) => unreachable!("time-invariant models always have a factorization"),
        };
        if let Some(st) = states.as_mut() {
            st.set_column(k, &x);
        }
        times.push(t);
        inputs.push(u);
        outputs.push(dotu(&c_at(t), &x).re);
    }
    Ok(SimulationTrace {
        times,
        inputs,
        outputs,
        states,
    })
}

/// Placement of the moving point source on the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SourceRule {
    /// Whole source on the nearest node, scaled by `1/h`.
    #[default]
    NearestNode,
    /// Linear split between the two neighbouring nodes.
    LinearSplit,
}

/// 1D heat equation on `(0, 1)` with Dirichlet ends, a point source moving as
/// `xi(t) = 0.5 + 0.4 sin(8 pi t / T)` and the midpoint temperature as output.
#[derive(Clone, Debug)]
pub struct HeatBenchmark {
    pub n: usize,
    pub h: f64,
    pub period: f64,
    pub rule: SourceRule,
    pub grid_t: usize,
    a: DMatrix<f64>,
    output_node: usize,
}

pub const HEAT_PERIOD: f64 = 100.0;

impl HeatBenchmark {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn omega0(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn source_position(&self, t: f64) -> f64 {
        0.5 + 0.4 * (8.0 * PI * t / self.period).sin()
    }

    /// 0-based interior node nearest to the source.
    pub fn source_node(&self, t: f64) -> usize {
        let j = (self.source_position(t) / self.h).round() as i64 - 1;
        j.clamp(0, self.n as i64 - 1) as usize
    }

    pub fn b(&self, t: f64) -> DVector<f64> {
        let mut b = DVector::zeros(self.n);
        match self.rule {
            SourceRule::NearestNode => b[self.source_node(t)] = 1.0 / self.h,
            SourceRule::LinearSplit => {
                let s = self.source_position(t) / self.h - 1.0;
                let lo = s.floor().clamp(0.0, (self.n - 1) as f64) as usize;
                let hi = (lo + 1).min(self.n - 1);
                let frac = (s - lo as f64).clamp(0.0, 1.0);
                b[lo] += (1.0 - frac) / self.h;
                b[hi] += frac / self.h;
            }
        }
        b
    }

    pub fn c(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.n);
        c[self.output_node] = 1.0;
        c
    }

    pub fn output_node(&self) -> usize {
        self.output_node
    }

    pub fn b_samples(&self) -> Vec<DVector<f64>> {
        (0..self.grid_t)
            .map(|i| self.b(i as f64 * self.period / self.grid_t as f64))
            .collect()
    }

    /// Physical realization for time simulation.
    pub fn sampled_ltp(&self) -> SampledLtp {
        let this = self.clone();
        let c = self.c();
        SampledLtp {
            a: PeriodicMatrixSampler::constant(self.a.clone(), self.period).expect("positive period"),
            b: Arc::new(move |t| this.b(t)),
            c: Arc::new(move |_| c.clone()),
            constant_a: Some(self.a.clone()),
        }
    }

    /// Floquet–Fourier form of order `order` from the DFT of the sampled input map.
    /// `A` is constant, so the Floquet factor is the identity and `Q = A`.
    pub fn floquet_fourier(&self, order: usize) -> Result<FloquetFourierSystem> {
        let samples: Vec<CVec> = self.b_samples().iter().map(to_complex_vec).collect();
        let b = fourier::centered_coefficients(&samples, order)?;
        let mut c = vec![CVec::zeros(self.n); 2 * order + 1];
        c[order] = to_complex_vec(&self.c());
        FloquetFourierSystem::new(to_complex(&self.a), self.omega0(), b, c)
    }
}

/// Heat benchmark with `n_interior` nodes and `grid_t` input samples per period.
pub fn build_heat_benchmark(n_interior: usize, grid_t: usize) -> Result<HeatBenchmark> {
    build_heat_benchmark_with(n_interior, grid_t, SourceRule::NearestNode)
}

pub fn build_heat_benchmark_with(n_interior: usize, grid_t: usize, rule: SourceRule) -> Result<HeatBenchmark> {
    if n_interior < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 interior nodes, got {n_interior}")));
    }
    if grid_t < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 time samples, got {grid_t}")));
    }
    let n = n_interior;
    let h = 1.0 / (n + 1) as f64;
    let scale = 1.0 / (h * h);
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            -2.0 * scale
        } else if i.abs_diff(j) == 1 {
            scale
        } else {
            0.0
        }
    });
    let output_node = ((0.5 * (n + 1) as f64).round() as usize - 1).min(n - 1);
    Ok(HeatBenchmark {
        n,
        h,
        period: HEAT_PERIOD,
        rule,
        grid_t,
        a,
        output_node,
    })
}

/// `b(t) = b_0 + b_1 cos(w0 t) + b_2 cos(2 w0 t)` from the three input columns,
/// and the same for `c(t)` from the three output rows.
pub fn build_modulated_benchmark(base: &LtiSystem, omega0: f64) -> Result<FloquetFourierSystem> {
    if base.inputs() != 3 || base.outputs() != 3 {
        return Err(Error::Shape(format!(
            "modulated benchmark needs 3 inputs and 3 outputs, got {} and {}",
            base.inputs(),
            base.outputs()
        )));
    }
    let half = cplx(0.5, 0.0);
    let bcol = |j: usize| base.b().column(j).into_owned();
    let crow = |j: usize| base.c().row(j).transpose();
    let b = vec![bcol(2) * half, bcol(1) * half, bcol(0), bcol(1) * half, bcol(2) * half];
    let c = vec![crow(2) * half, crow(1) * half, crow(0), crow(1) * half, crow(2) * half];
    FloquetFourierSystem::new(base.a().clone(), omega0, b, c)
}

/// Lightly damped modal structure with `modes` second-order modes (`2 modes`
/// states), 3 inputs and 3 outputs.
pub fn synthetic_structure(modes: usize, seed: u64) -> Result<LtiSystem> {
    if modes == 0 {
        return Err(Error::InvalidArgument("need at least one mode".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * modes;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let (w_lo, w_hi) = (0.5f64, 50.0f64);
    for j in 0..modes {
        let frac = if modes > 1 { j as f64 / (modes - 1) as f64 } else { 0.0 };
        let w = w_lo * (w_hi / w_lo).powf(frac) * (1.0 + 0.05 * rng.random_range(-1.0..1.0));
        let zeta = rng.random_range(0.005..0.03);
        let re = -zeta * w;
        let im = w * (1.0 - zeta * zeta).sqrt();
        let k = 2 * j;
        a[(k, k)] = re;
        a[(k, k + 1)] = im;
        a[(k + 1, k)] = -im;
        a[(k + 1, k + 1)] = re;
    }
    let b = DMatrix::from_fn(n, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
    let c = DMatrix::from_fn(3, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    LtiSystem::from_real(&a, &b, &c)
}

/// RLC ladder with periodically modulated inductors: node voltages `v_1..v_s`
/// and inductor currents `i_1..i_{s-1}`, current injected at node 1, output `v_s`.
#[derive(Clone, Debug)]
pub struct CircuitBenchmark {
    pub sampler: PeriodicMatrixSampler,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub omega0: f64,
}

pub fn synthetic_circuit(sections: usize, seed: u64) -> Result<CircuitBenchmark> {
    if sections < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 sections, got {sections}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = sections;
    let n = 2 * s - 1;
    let cap: Vec<f64> = (0..s).map(|_| rng.random_range(0.8..1.2)).collect();
    let shunt: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..0.2)).collect();
    let ind: Vec<f64> = (0..s - 1).map(|_| rng.random_range(0.8..1.2)).collect();
    let res: Vec<f64> = (0..s - 1).map(|_| rng.random_range(0.05..0.2)).collect();
    let phase: Vec<f64> = (0..s - 1).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let depth = 0.3;
    let c1 = cap[0];

    let assemble = move |l_of: &dyn Fn(usize) -> f64| -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..s {
            a[(i, i)] = -shunt[i] / cap[i];
            if i > 0 {
                a[(i, s + i - 1)] = 1.0 / cap[i];
            }
            if i < s - 1 {
                a[(i, s + i)] = -1.0 / cap[i];
            }
        }
        for j in 0..s - 1 {
            let l = l_of(j);
            a[(s + j, j)] = 1.0 / l;
            a[(s + j, j + 1)] = -1.0 / l;
            a[(s + j, s + j)] = -res[j] / l;
        }
        a
    };
    let mean = assemble(&|j| ind[j]);
    let spread = LtiSystem::from_real(&mean, &DMatrix::zeros(n, 1), &DMatrix::zeros(1, n))?
        .spectrum()?
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.im.abs()));
    // Keep the Floquet exponents well inside the principal strip |Im| < w0 / 2.
    let omega0 = 4.0 * spread.max(0.25);
    let ind2 = ind.clone();
    let phase2 = phase.clone();
    let sampler = PeriodicMatrixSampler::from_fn(2.0 * PI / omega0, n, move |t| {
        assemble(&|j| ind2[j] * (1.0 + depth * (omega0 * t + phase2[j]).cos()))
    })?;
    let mut b = DVector::zeros(n);
    b[0] = 1.0 / c1;
    let mut c = DVector::zeros(n);
    c[s - 1] = 1.0;
    Ok(CircuitBenchmark { sampler, b, c, omega0 })
}

impl CircuitBenchmark {
    pub fn period(&self) -> f64 {
        self.sampler.period()
    }

    /// Physical realization for time simulation.
    pub fn sampled_ltp(&self) -> SampledLtp {
        let (b, c) = (self.b.clone(), self.c.clone());
        SampledLtp {
            a: self.sampler.clone(),
            b: Arc::new(move |_| b.clone()),
            c: Arc::new(move |_| c.clone()),
            constant_a: None,
        }
    }

    /// Floquet transform on `grid` points, then centered truncation to `order`.
    pub fn floquet_fourier(&self, grid: usize, order: usize, steps: usize) -> Result<(FloquetFourierSystem, floquet::FloquetTransform)> {
        let bs = vec![self.b.clone(); grid];
        let cs = vec![self.c.clone(); grid];
        let tr = floquet::floquet_transform(&self.sampler, &bs, &cs, steps)?;
        Ok((tr.to_floquet_fourier(order)?, tr))
    }
}
