use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ltpmor::bench::{self, BenchCase, BenchRun};
use ltpmor::floquet;
use ltpmor::io::{self, BenchRow, PeriodicData, ReportJson, SystemFile};
use ltpmor::linalg::{cplx, CVec};
use ltpmor::mor::{self, IrkaOptions, ReductionMethod, ReductionOptions};
use ltpmor::sim::{self, InputSignal, Model, SampledLtp, SimOptions, SimulationTrace};
use ltpmor::{lti, ltp, Error, FloquetFourierSystem, LtiSystem, Result};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::{BenchArgs, BenchCaseName, BoundArgs, Cli, Command, FloquetArgs, H2normArgs, ReduceArgs, SimulateArgs};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Reduce(a) => reduce(a),
        Command::H2norm(a) => h2norm(a),
        Command::Bound(a) => bound(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Floquet(a) => floquet_cmd(a),
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => io::write_atomic(p, bytes),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, text.as_bytes())
}

fn parse_signal(spec: &str) -> Result<InputSignal> {
    match spec.strip_prefix("file:") {
        Some(path) => Ok(InputSignal::Sampled {
            values: io::read_signal_csv(Path::new(path))?,
        }),
        None => spec.parse(),
    }
}

fn irka_options(tol: f64, max_iter: usize, seed: u64, strict: bool) -> Result<IrkaOptions> {
    positive("--tol", tol)?;
    if max_iter == 0 {
        return Err(Error::InvalidArgument("--max-iter must be at least 1".into()));
    }
    Ok(IrkaOptions {
        tol,
        max_iter,
        seed,
        allow_unconverged: !strict,
    })
}

fn load_ltp(path: &Path, omega0: f64) -> Result<FloquetFourierSystem> {
    positive("--omega0", omega0)?;
    io::read_system(path)?.into_ltp(omega0)
}

fn reduced_path(args: &ReduceArgs) -> Option<PathBuf> {
    if let Some(p) = &args.reduced {
        return Some(p.clone());
    }
    let out = args.output.as_ref()?;
    let stem = out.file_stem()?.to_string_lossy().into_owned();
    Some(out.with_file_name(format!("{stem}.reduced.json")))
}

fn reduce(args: ReduceArgs) -> Result<()> {
    let g = load_ltp(&args.input, args.omega0)?;
    if args.order == 0 || args.order >= g.n() {
        return Err(Error::InvalidArgument(format!(
            "reduced order must satisfy 1 <= r < n = {}, got {}",
            g.n(),
            args.order
        )));
    }
    positive("--dt", args.dt)?;
    positive("--tfinal", args.tfinal)?;
    let mut opts = ReductionOptions::with_method(args.method);
    opts.irka = irka_options(args.tol, args.max_iter, args.seed, args.strict)?;
    opts.pod = mor::PodTraining {
        input: parse_signal(&args.signal)?,
        dt: args.dt,
        t_final: args.tfinal,
    };
    let order = args.fourier_trunc.unwrap_or(g.order());
    let rep = mor::reduce_ltp_algorithm1(&g, args.order, order, &opts)?;
    if let Some(p) = reduced_path(&args) {
        io::write_ltp(&p, &rep.reduced)?;
    }
    emit_json(args.output.as_deref(), &ReportJson::from_report(&rep))
}

#[derive(Serialize, Default)]
struct PathResult {
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    remainder: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TraceEntry>>,
}

#[derive(Serialize)]
struct TraceEntry {
    embed_order: usize,
    value: f64,
    discrepancy: f64,
}

impl PathResult {
    fn ok(value: f64) -> Self {
        Self {
            status: "ok".into(),
            value: Some(value),
            ..Self::default()
        }
    }

    fn from_error(e: &Error) -> Self {
        let status = match e {
            Error::SpectralGap { .. } => "refused: spectral gap".to_string(),
            Error::SharedStateMatrix | Error::ClusteredPoles { .. } | Error::Defective { .. } => {
                format!("refused: {}", e.kind().replace('_', " "))
            }
            _ => format!("failed: {}", e.kind().replace('_', " ")),
        };
        Self {
            status,
            detail: Some(e.to_string()),
            ..Self::default()
        }
    }
}

#[derive(Serialize)]
struct NormReport {
    kind: &'static str,
    n: usize,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    value: f64,
    paths: BTreeMap<&'static str, PathResult>,
    /// Relative differences `|a - b| / max(a, b)` between successful paths.
    discrepancies: BTreeMap<String, f64>,
}

fn discrepancies(paths: &BTreeMap<&'static str, PathResult>) -> BTreeMap<String, f64> {
    let ok: Vec<(&str, f64)> = paths.iter().filter_map(|(k, p)| p.value.map(|v| (*k, v))).collect();
    let mut out = BTreeMap::new();
    for (i, (a, va)) in ok.iter().enumerate() {
        for (b, vb) in &ok[i + 1..] {
            let big = va.max(*vb);
            let rel = if big > 0.0 { (va - vb).abs() / big } else { 0.0 };
            out.insert(format!("{a}/{b}"), rel);
        }
    }
    out
}

fn h2norm(args: H2normArgs) -> Result<()> {
    positive("--tol", args.tol)?;
    if args.embed_order == 0 || args.max_embed_order < args.embed_order {
        return Err(Error::InvalidArgument(
            "--embed-order must be at least 1 and at most --max-embed-order".into(),
        ));
    }
    let report = match io::read_system(&args.input)? {
        SystemFile::Lti(sys) => lti_norm_report(&sys)?,
        SystemFile::Ltp(g) => ltp_norm_report(&g, &args)?,
    };
    emit_json(args.output.as_deref(), &report)
}

fn lti_norm_report(sys: &LtiSystem) -> Result<NormReport> {
    let value = lti::h2_norm_gramian(sys)?;
    let mut paths = BTreeMap::new();
    paths.insert("gramian", PathResult::ok(value));
    paths.insert(
        "residue",
        match lti::h2_inner_residue(sys, sys) {
            Ok(v) => PathResult::ok(v.re.max(0.0).sqrt()),
            Err(e) => PathResult::from_error(&e),
        },
    );
    Ok(NormReport {
        kind: "lti",
        n: sys.n(),
        order: None,
        value,
        discrepancies: discrepancies(&paths),
        paths,
    })
}

fn ltp_norm_report(g: &FloquetFourierSystem, args: &H2normArgs) -> Result<NormReport> {
    if !g.is_hurwitz() {
        let max_re = ltpmor::linalg::max_real_part(&ltpmor::linalg::SchurForm::new(g.q())?.eigenvalues());
        return Err(Error::Unstable { max_real_part: max_re });
    }
    let mut paths = BTreeMap::new();
    paths.insert(
        "subsystem_sum",
        match ltp::h2_norm_subsystem_sum(g) {
            Ok(v) => PathResult::ok(v),
            Err(e) => PathResult::from_error(&e),
        },
    );
    let trace = ltp::zhou_hagiwara_convergence(g, args.embed_order, args.max_embed_order, args.tol)?;
    let last = *trace.last().expect("at least one embedding order");
    paths.insert(
        "zhou_hagiwara",
        PathResult {
            trace: Some(
                trace
                    .iter()
                    .map(|z| TraceEntry {
                        embed_order: z.embed_order,
                        value: z.value,
                        discrepancy: z.discrepancy,
                    })
                    .collect(),
            ),
            ..PathResult::ok(last.value)
        },
    );
    let ell_max = args.ell_max.unwrap_or(g.order());
    paths.insert(
        "pole_residue",
        match ltp::h2_inner_pole_residue(g, g, ell_max) {
            Ok(v) => PathResult {
                remainder: Some(v.remainder),
                ..PathResult::ok(v.value.re.max(0.0).sqrt())
            },
            Err(e) => PathResult::from_error(&e),
        },
    );
    Ok(NormReport {
        kind: "ltp",
        n: g.n(),
        order: Some(g.order()),
        value: last.value,
        discrepancies: discrepancies(&paths),
        paths,
    })
}

#[derive(Serialize)]
struct BoundReport {
    #[serde(rename = "N")]
    order: usize,
    fourier_truncation: Option<f64>,
    mimo_error: f64,
    scaled_mimo_error: f64,
    bound: f64,
}

fn bound(args: BoundArgs) -> Result<()> {
    let full = load_ltp(&args.input, args.omega0)?;
    let reduced = load_ltp(&args.reduced, args.omega0)?;
    let order = args.fourier_trunc.unwrap_or(full.order());
    let c = mor::error_bound_report(&full, &reduced, order)?;
    emit_json(
        args.output.as_deref(),
        &BoundReport {
            order: c.order,
            fourier_truncation: c.fourier_truncation,
            mimo_error: c.mimo_error,
            scaled_mimo_error: c.scaled_mimo_error,
            bound: c.total,
        },
    )
}

/// Trigonometric interpolant of real vector samples over one period.
fn periodic_vector(samples: &[DVector<f64>], period: f64) -> Result<Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>> {
    let complex: Vec<CVec> = samples.iter().map(ltpmor::linalg::to_complex_vec).collect();
    let order = samples.len() / 2;
    let coeffs = ltpmor::fourier::centered_coefficients(&complex, order)?;
    let w0 = 2.0 * std::f64::consts::PI / period;
    Ok(Arc::new(move |t: f64| {
        let mut acc = CVec::zeros(coeffs[0].len());
        for (i, c) in coeffs.iter().enumerate() {
            let k = i as f64 - order as f64;
            acc += c * cplx(0.0, k * w0 * t).exp();
        }
        acc.map(|z| z.re)
    }))
}

fn sampled_model(data: &PeriodicData) -> Result<SampledLtp> {
    let a = data.sampler()?;
    let constant_a = data
        .a_samples
        .windows(2)
        .all(|w| w[0] == w[1])
        .then(|| data.a_samples[0].clone());
    Ok(SampledLtp {
        a,
        b: periodic_vector(&data.b_samples, data.period)?,
        c: periodic_vector(&data.c_samples, data.period)?,
        constant_a,
    })
}

enum AnyModel {
    Lti(LtiSystem),
    Ltp(FloquetFourierSystem),
    Sampled(SampledLtp),
}

impl AnyModel {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("A_samples").is_some() {
            let data = serde_json::from_value::<io::PeriodicJson>(value)?.decode()?;
            return Ok(Self::Sampled(sampled_model(&data)?));
        }
        Ok(match io::parse_system(&text)? {
            SystemFile::Lti(s) => Self::Lti(s),
            SystemFile::Ltp(g) => Self::Ltp(g),
        })
    }

    fn simulate(&self, input: &InputSignal, opts: SimOptions) -> Result<SimulationTrace> {
        let model = match self {
            Self::Lti(s) => Model::Lti(s),
            Self::Ltp(g) => Model::FloquetFourier(g),
            Self::Sampled(m) => Model::Sampled(m),
        };
        sim::simulate_backward_euler(model, input, opts)
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    positive("--dt", args.dt)?;
    positive("--tfinal", args.tfinal)?;
    let input = parse_signal(&args.signal)?;
    let opts = SimOptions::new(args.dt, args.tfinal);
    let trace = AnyModel::load(&args.input)?.simulate(&input, opts)?;
    let reference = match &args.reference {
        Some(p) => Some(AnyModel::load(p)?.simulate(&input, opts)?.outputs),
        None => None,
    };
    emit(args.output.as_deref(), &io::trace_to_csv(&trace, reference.as_deref())?)
}

fn parse_methods(list: &str) -> Result<Vec<ReductionMethod>> {
    let methods: Vec<ReductionMethod> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::InvalidArgument("--methods is empty".into()));
    }
    Ok(methods)
}

fn build_case(args: &BenchArgs) -> Result<BenchCase> {
    match args.case {
        BenchCaseName::Heat => {
            let n = args.n.unwrap_or(100);
            if n < 3 {
                return Err(Error::InvalidArgument("heat needs --n >= 3".into()));
            }
            if args.grid < 2 || !args.grid.is_power_of_two() {
                return Err(Error::InvalidArgument("--grid must be a power of two >= 2".into()));
            }
            bench::heat_case(n, args.grid)
        }
        BenchCaseName::Modulated => {
            let omega0 = args.omega0.unwrap_or(bench::DEFAULT_MODULATION_FREQUENCY);
            positive("--omega0", omega0)?;
            let base = match &args.base {
                Some(p) => io::read_lti(p)?,
                None => {
                    let n = args.n.unwrap_or(90);
                    if n < 2 || n % 2 != 0 {
                        return Err(Error::InvalidArgument("modulated --n must be even and >= 2".into()));
                    }
                    ltpmor::sim::synthetic_structure(n / 2, args.seed)?
                }
            };
            bench::modulated_case(&base, omega0)
        }
        BenchCaseName::Circuit => {
            let sections = args.n.unwrap_or(10);
            if args.grid < 2 || !args.grid.is_power_of_two() {
                return Err(Error::InvalidArgument("--grid must be a power of two >= 2".into()));
            }
            let order = args.fourier_trunc.unwrap_or(8);
            bench::circuit_case(sections, args.seed, args.grid, order)
        }
    }
}

fn bench_row(run: &BenchRun) -> BenchRow {
    let (mimo_error, bound) = match &run.outcome {
        Ok(rep) => (rep.mimo_error, rep.bound),
        Err(Error::UnstableReduction { .. }) => (f64::INFINITY, f64::INFINITY),
        Err(_) => (f64::NAN, f64::NAN),
    };
    BenchRow {
        r: run.r,
        method: run.method.to_string(),
        mimo_error,
        ltp_error: run.ltp_error().unwrap_or(f64::NAN),
        bound,
        wall_time_s: run.wall_time_s,
    }
}

fn bench_cmd(args: BenchArgs) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let irka = irka_options(args.tol, args.max_iter, args.seed, false)?;
    if args.rstep == 0 || args.rmin == 0 {
        return Err(Error::InvalidArgument("--rmin and --rstep must be at least 1".into()));
    }
    let case = build_case(&args)?;
    let n = case.system.n();
    let default_rmax = match args.case {
        BenchCaseName::Heat => 24,
        BenchCaseName::Modulated => 80,
        BenchCaseName::Circuit => n - 1,
    };
    let rmax = args.rmax.unwrap_or(default_rmax.min(n - 1));
    if rmax >= n || rmax < args.rmin {
        return Err(Error::InvalidArgument(format!(
            "need rmin <= rmax < n = {n}, got {}..{rmax}",
            args.rmin
        )));
    }
    let tasks: Vec<(usize, ReductionMethod)> = (args.rmin..=rmax)
        .step_by(args.rstep)
        .flat_map(|r| methods.iter().map(move |&m| (r, m)))
        .collect();
    let runs: Vec<BenchRun> = tasks.par_iter().map(|&(r, m)| bench::run(&case, r, m, &irka)).collect();
    for run in &runs {
        if let Err(e) = &run.outcome {
            eprintln!("r = {} {}: {e}", run.r, run.method);
        }
    }
    let rows: Vec<BenchRow> = runs.iter().map(bench_row).collect();
    emit(args.output.as_deref(), &io::bench_to_csv(&rows)?)
}

fn floquet_cmd(args: FloquetArgs) -> Result<()> {
    if args.steps == 0 {
        return Err(Error::InvalidArgument("--steps must be at least 1".into()));
    }
    let data = io::read_periodic(&args.input)?;
    let sampler = data.sampler()?;
    let tr = floquet::floquet_transform(&sampler, &data.b_samples, &data.c_samples, args.steps)?;
    for w in &tr.factors.warnings {
        eprintln!("warning: {w}");
    }
    let order = args.fourier_trunc.unwrap_or(data.b_samples.len() / 2);
    let g = tr.to_floquet_fourier(order)?;
    emit(args.output.as_deref(), io::ltp_to_string(&g)?.as_bytes())
}
