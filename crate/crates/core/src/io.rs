//! File formats: JSON system descriptions, reduction reports and CSV traces.
//!
//! Matrices are row-major nested arrays split into `re` and an optional `im`
//! part. JSON numbers use the shortest representation that round-trips
//! exactly; CSV columns are written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::PeriodicMatrixSampler;
use crate::linalg::{cplx, CMat, CVec};
use crate::lti::LtiSystem;
use crate::ltp::FloquetFourierSystem;
use crate::mor::ReductionReport;
use crate::sim::SimulationTrace;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(i, j)).collect()).collect()
        };
        let re = rows(&|i, j| m[(i, j)].re);
        let im = m.iter().any(|z| z.im != 0.0).then(|| rows(&|i, j| m[(i, j)].im));
        Self { re, im }
    }

    pub fn to_matrix(&self, rows: usize, cols: usize, name: &str) -> Result<CMat> {
        let check = |part: &Vec<Vec<f64>>, which: &str| -> Result<()> {
            if part.len() != rows || part.iter().any(|r| r.len() != cols) {
                return Err(Error::Shape(format!("{name}.{which} must be {rows}x{cols}")));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        Ok(CMat::from_fn(rows, cols, |i, j| {
            cplx(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LtiJson {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    #[serde(rename = "A")]
    pub a: MatrixJson,
    #[serde(rename = "B")]
    pub b: MatrixJson,
    #[serde(rename = "C")]
    pub c: MatrixJson,
}

impl LtiJson {
    pub fn from_system(sys: &LtiSystem) -> Self {
        Self {
            n: sys.n(),
            m: sys.inputs(),
            p: sys.outputs(),
            a: MatrixJson::from_matrix(sys.a()),
            b: MatrixJson::from_matrix(sys.b()),
            c: MatrixJson::from_matrix(sys.c()),
        }
    }

    pub fn to_system(&self) -> Result<LtiSystem> {
        LtiSystem::new(
            self.a.to_matrix(self.n, self.n, "A")?,
            self.b.to_matrix(self.n, self.m, "B")?,
            self.c.to_matrix(self.p, self.n, "C")?,
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffJson {
    pub k: i64,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
}

impl CoeffJson {
    fn from_vector(k: i64, v: &CVec) -> Self {
        Self {
            k,
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().any(|z| z.im != 0.0).then(|| v.iter().map(|z| z.im).collect()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LtpJson {
    pub omega0: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "Q")]
    pub q: MatrixJson,
    pub b_coeffs: Vec<CoeffJson>,
    pub c_coeffs: Vec<CoeffJson>,
}

fn coeffs_from_json(list: &[CoeffJson], n: usize, order: usize, name: &str) -> Result<Vec<CVec>> {
    let width = 2 * order + 1;
    let mut out: Vec<Option<CVec>> = vec![None; width];
    for c in list {
        if c.k.unsigned_abs() as usize > order {
            return Err(Error::Parse(format!("{name}: index k = {} outside -{order}..{order}", c.k)));
        }
        if c.re.len() != n || c.im.as_ref().is_some_and(|im| im.len() != n) {
            return Err(Error::Shape(format!("{name}[k = {}] must have length {n}", c.k)));
        }
        let slot = &mut out[(c.k + order as i64) as usize];
        if slot.is_some() {
            return Err(Error::Parse(format!("{name}: index k = {} appears twice", c.k)));
        }
        *slot = Some(CVec::from_fn(n, |i, _| {
            cplx(c.re[i], c.im.as_ref().map_or(0.0, |im| im[i]))
        }));
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::Parse(format!("{name}: missing index k = {}", i as i64 - order as i64)))
        })
        .collect()
}

impl LtpJson {
    pub fn from_system(sys: &FloquetFourierSystem) -> Self {
        let order = sys.order() as i64;
        let list = |v: &[CVec]| -> Vec<CoeffJson> {
            v.iter().enumerate().map(|(i, x)| CoeffJson::from_vector(i as i64 - order, x)).collect()
        };
        Self {
            omega0: sys.omega0(),
            n: sys.n(),
            order: sys.order(),
            q: MatrixJson::from_matrix(sys.q()),
            b_coeffs: list(sys.b_coeffs()),
            c_coeffs: list(sys.c_coeffs()),
        }
    }

    pub fn to_system(&self) -> Result<FloquetFourierSystem> {
        let q = self.q.to_matrix(self.n, self.n, "Q")?;
        let b = coeffs_from_json(&self.b_coeffs, self.n, self.order, "b_coeffs")?;
        let c = coeffs_from_json(&self.c_coeffs, self.n, self.order, "c_coeffs")?;
        FloquetFourierSystem::new(q, self.omega0, b, c)
    }
}

/// Either kind of system file.
#[derive(Clone, Debug)]
pub enum SystemFile {
    Lti(LtiSystem),
    Ltp(FloquetFourierSystem),
}

impl SystemFile {
    /// LTP view of the contents; an LTI system becomes an `N = 0` LTP system
    /// when it is SISO.
    pub fn into_ltp(self, omega0: f64) -> Result<FloquetFourierSystem> {
        match self {
            SystemFile::Ltp(g) => Ok(g),
            SystemFile::Lti(s) => FloquetFourierSystem::from_lti(&s, omega0),
        }
    }
}

pub fn parse_system(text: &str) -> Result<SystemFile> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("omega0").is_some() {
        Ok(SystemFile::Ltp(serde_json::from_value::<LtpJson>(value)?.to_system()?))
    } else {
        Ok(SystemFile::Lti(serde_json::from_value::<LtiJson>(value)?.to_system()?))
    }
}

pub fn read_system(path: &Path) -> Result<SystemFile> {
    parse_system(&fs::read_to_string(path)?)
}

pub fn read_lti(path: &Path) -> Result<LtiSystem> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<LtiJson>(&text)?.to_system()
}

pub fn read_ltp(path: &Path) -> Result<FloquetFourierSystem> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<LtpJson>(&text)?.to_system()
}

pub fn lti_to_string(sys: &LtiSystem) -> Result<String> {
    Ok(serde_json::to_string_pretty(&LtiJson::from_system(sys))?)
}

pub fn ltp_to_string(sys: &FloquetFourierSystem) -> Result<String> {
    Ok(serde_json::to_string_pretty(&LtpJson::from_system(sys))?)
}

pub fn write_lti(path: &Path, sys: &LtiSystem) -> Result<()> {
    write_atomic(path, lti_to_string(sys)?.as_bytes())
}

pub fn write_ltp(path: &Path, sys: &FloquetFourierSystem) -> Result<()> {
    write_atomic(path, ltp_to_string(sys)?.as_bytes())
}

/// Raw periodic state matrix, input and output vectors on a uniform grid over one period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicJson {
    #[serde(rename = "T")]
    pub period: f64,
    pub grid: usize,
    #[serde(rename = "A_samples")]
    pub a_samples: Vec<Vec<Vec<f64>>>,
    pub b_samples: Vec<Vec<f64>>,
    pub c_samples: Vec<Vec<f64>>,
}

/// Decoded periodic-matrix file.
#[derive(Clone, Debug)]
pub struct PeriodicData {
    pub period: f64,
    pub a_samples: Vec<DMatrix<f64>>,
    pub b_samples: Vec<DVector<f64>>,
    pub c_samples: Vec<DVector<f64>>,
}

impl PeriodicData {
    pub fn sampler(&self) -> Result<PeriodicMatrixSampler> {
        PeriodicMatrixSampler::from_samples(self.period, self.a_samples.clone())
    }

    pub fn to_json(&self) -> PeriodicJson {
        PeriodicJson {
            period: self.period,
            grid: self.a_samples.len(),
            a_samples: self
                .a_samples
                .iter()
                .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
                .collect(),
            b_samples: self.b_samples.iter().map(|v| v.iter().copied().collect()).collect(),
            c_samples: self.c_samples.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

impl PeriodicJson {
    pub fn decode(&self) -> Result<PeriodicData> {
        let g = self.grid;
        if g == 0 || self.a_samples.len() != g || self.b_samples.len() != g || self.c_samples.len() != g {
            return Err(Error::Shape(format!("every sample list must have grid = {g} entries")));
        }
        let n = self.a_samples[0].len();
        let mut a = Vec::with_capacity(g);
        for (i, m) in self.a_samples.iter().enumerate() {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::Shape(format!("A_samples[{i}] must be {n}x{n}")));
            }
            a.push(DMatrix::from_fn(n, n, |r, c| m[r][c]));
        }
        let vectors = |list: &[Vec<f64>], name: &str| -> Result<Vec<DVector<f64>>> {
            list.iter()
                .enumerate()
                .map(|(i, v)| {
                    if v.len() != n {
                        Err(Error::Shape(format!("{name}[{i}] must have length {n}")))
                    } else {
                        Ok(DVector::from_column_slice(v))
                    }
                })
                .collect()
        };
        Ok(PeriodicData {
            period: self.period,
            a_samples: a,
            b_samples: vectors(&self.b_samples, "b_samples")?,
            c_samples: vectors(&self.c_samples, "c_samples")?,
        })
    }
}

pub fn read_periodic(path: &Path) -> Result<PeriodicData> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<PeriodicJson>(&text)?.decode()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrkaSummary {
    pub iterations: usize,
    pub shift_movement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub r: usize,
    #[serde(rename = "N")]
    pub order: usize,
    pub method: String,
    pub mimo_error: f64,
    pub ltp_error: Option<f64>,
    pub bound: f64,
    pub irka: Option<IrkaSummary>,
}

impl ReportJson {
    pub fn from_report(rep: &ReductionReport) -> Self {
        Self {
            r: rep.r,
            order: rep.order,
            method: rep.method.to_string(),
            mimo_error: rep.mimo_error,
            ltp_error: rep.ltp_error,
            bound: rep.bound,
            irka: rep.irka.as_ref().map(|d| IrkaSummary {
                iterations: d.iterations,
                shift_movement: d.shift_movement,
            }),
        }
    }
}

/// Write via a temporary file in the target directory, then rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Full-precision float for CSV columns.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `time,u,y` trace, extended with `y_ref,abs_err` when a reference output is given.
pub fn trace_to_csv(trace: &SimulationTrace, reference: Option<&[f64]>) -> Result<Vec<u8>> {
    if let Some(r) = reference {
        if r.len() != trace.len() {
            return Err(Error::Shape(format!(
                "reference has {} samples, trace has {}",
                r.len(),
                trace.len()
            )));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time", "u", "y"];
    if reference.is_some() {
        header.extend(["y_ref", "abs_err"]);
    }
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..trace.len() {
        let mut row = vec![fmt_f64(trace.times[i]), fmt_f64(trace.inputs[i]), fmt_f64(trace.outputs[i])];
        if let Some(r) = reference {
            row.push(fmt_f64(r[i]));
            row.push(fmt_f64((trace.outputs[i] - r[i]).abs()));
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_trace_csv(path: &Path, trace: &SimulationTrace, reference: Option<&[f64]>) -> Result<()> {
    write_atomic(path, &trace_to_csv(trace, reference)?)
}

/// One row of a reduction sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub r: usize,
    pub method: String,
    pub mimo_error: f64,
    /// Infinite for an unstable reduced model, NaN when not computed.
    pub ltp_error: f64,
    pub bound: f64,
    pub wall_time_s: f64,
}

pub fn bench_to_csv(rows: &[BenchRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "method", "mimo_error", "ltp_error", "bound", "wall_time_s"])
        .map_err(csv_error)?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            row.method.clone(),
            fmt_f64(row.mimo_error),
            fmt_f64(row.ltp_error),
            fmt_f64(row.bound),
            fmt_f64(row.wall_time_s),
        ])
        .map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Input samples from a CSV file: the `u` column when present, else the last column.
pub fn read_signal_csv(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_error)?;
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() {
        return Err(Error::Parse("signal file has no columns".into()));
    }
    let col = headers.iter().position(|h| h.trim() == "u").unwrap_or(headers.len() - 1);
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let field = rec.get(col).ok_or_else(|| Error::Parse(format!("row {} is short", line + 2)))?;
        out.push(
            field
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 2)))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_complex;

    fn sample_ltp() -> FloquetFourierSystem {
        let q = CMat::from_fn(2, 2, |i, j| cplx(if i == j { -1.0 - i as f64 } else { 0.3 }, 0.1 * j as f64));
        let v = |x: f64| CVec::from_vec(vec![cplx(x, 0.0), cplx(0.5, -x)]);
        FloquetFourierSystem::new(q, 2.5, vec![v(0.1), v(1.0), v(0.1)], vec![v(0.0), v(0.7), v(0.0)]).unwrap()
    }

    #[test]
    fn ltp_round_trip_is_exact() {
        let g = sample_ltp();
        let back = match parse_system(&ltp_to_string(&g).unwrap()).unwrap() {
            SystemFile::Ltp(x) => x,
            SystemFile::Lti(_) => panic!("wrong kind"),
        };
        assert_eq!(back.q(), g.q());
        assert_eq!(back.b_coeffs(), g.b_coeffs());
        assert_eq!(back.c_coeffs(), g.c_coeffs());
        assert_eq!(back.omega0(), g.omega0());
    }

    #[test]
    fn real_lti_omits_imaginary_part() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -2.0]);
        let s = LtiSystem::new(to_complex(&a), to_complex(&DMatrix::from_element(2, 1, 1.0)), to_complex(&DMatrix::from_element(1, 2, 1.0))).unwrap();
        let text = lti_to_string(&s).unwrap();
        assert!(!text.contains("\"im\""));
        let back = match parse_system(&text).unwrap() {
            SystemFile::Lti(x) => x,
            SystemFile::Ltp(_) => panic!("wrong kind"),
        };
        assert_eq!(back.a(), s.a());
    }

    #[test]
    fn missing_or_duplicate_index_rejected() {
        let mut j = LtpJson::from_system(&sample_ltp());
        j.b_coeffs.remove(1);
        assert!(matches!(j.to_system(), Err(Error::Parse(m)) if m.contains("missing index k = 0")));
        let mut j = LtpJson::from_system(&sample_ltp());
        j.c_coeffs[2].k = 0;
        assert!(matches!(j.to_system(), Err(Error::Parse(m)) if m.contains("twice")));
    }

    #[test]
    fn matrix_shape_checked() {
        let text = r#"{"n":2,"m":1,"p":1,"A":{"re":[[1,0]]},"B":{"re":[[1],[1]]},"C":{"re":[[1,1]]}}"#;
        assert!(matches!(parse_system(text), Err(Error::Shape(_))));
        assert!(matches!(parse_system("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn trace_csv_has_full_precision() {
        let tr = SimulationTrace {
            times: vec![0.0, 0.1],
            inputs: vec![1.0, 1.0],
            outputs: vec![0.0, 1.0 / 3.0],
            states: None,
        };
        let text = String::from_utf8(trace_to_csv(&tr, Some(&[0.0, 0.3])).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("time,u,y,y_ref,abs_err"));
        let last: Vec<f64> = lines.nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[2], 1.0 / 3.0);
        assert_eq!(last[4], (1.0 / 3.0 - 0.3f64).abs());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "second");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn periodic_file_round_trip() {
        let data = PeriodicData {
            period: 2.0,
            a_samples: (0..4).map(|i| DMatrix::from_element(1, 1, -1.0 - 0.1 * i as f64)).collect(),
            b_samples: vec![DVector::from_element(1, 1.0); 4],
            c_samples: vec![DVector::from_element(1, 2.0); 4],
        };
        let text = serde_json::to_string(&data.to_json()).unwrap();
        let back: PeriodicJson = serde_json::from_str(&text).unwrap();
        let back = back.decode().unwrap();
        assert_eq!(back.a_samples, data.a_samples);
        assert_eq!(back.sampler().unwrap().dim(), 1);
    }
}
