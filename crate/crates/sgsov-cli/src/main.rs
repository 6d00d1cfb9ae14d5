//! Command-line driver: builds a model from a JSON run config, runs one stage of
//! the verification pipeline and streams the results as JSON lines (and optionally CSV).

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sgsov::config::{ModelConfig, OutputFormat, RunConfig};
use sgsov::form_factors::{dense_operator, npoint, npoint_dense, LocalOperator};
use sgsov::linalg::vnorm;
use sgsov::local_ops::ElementaryBasisElement;
use sgsov::oracle::{self, ComparisonReport, PairResult, Prepared, Tolerances};
use sgsov::sov_basis::SovBasis;
use sgsov::spectrum as sp;
use sgsov::{Model64, SgError, C64};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sgsov", version, about = "SOV for the cyclic lattice sine-Gordon model, checked against dense oracles")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in parameter set used when no config is given.
    #[arg(long, global = true, value_parser = ["cfg-a", "cfg-b", "single-site", "homogeneous", "stretch"])]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Uniform tolerance overriding every pass threshold.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write rows as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Also write rows as JSON lines.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Yang-Baxter, quantum determinant, Theta, hermiticity and average checks.
    CheckAlgebra {
        /// Also run the local-operator reconstructions.
        #[arg(long)]
        reconstruct: bool,
    },
    /// Builds and validates the SOV basis.
    SovBuild,
    /// One row per transfer-matrix eigenstate.
    Spectrum,
    /// Scalar-product determinant checks against dense inner products.
    Scalar,
    /// Form factors by determinant next to the dense oracle.
    Ff {
        #[arg(value_enum)]
        kind: FfKind,
        #[arg(long, default_value_t = 1)]
        site: usize,
        /// Elementary element, e.g. "h=0,h0=0,o=0/1/1"; repeatable. Default: built-in cases.
        #[arg(long)]
        element: Vec<String>,
        /// Comma-separated operator list for npoint, e.g. "u1,u1".
        #[arg(long, default_value = "u1,u1")]
        ops: String,
        /// Restrict npoint to one eigenstate.
        #[arg(long)]
        state: Option<usize>,
        /// Visit every i-th left and j-th right eigenstate, as "i,j".
        #[arg(long, default_value = "1,1")]
        stride: String,
    },
    /// The full suite, criteria 1-8.
    VerifyAll,
}

#[derive(Clone, Copy, ValueEnum)]
enum FfKind {
    U,
    Elementary,
    Npoint,
}

enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Complex(C64),
    ComplexList(Vec<C64>),
    Json(Value),
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Shortest round-trip text; scientific notation outside [1e-4, 1e15).
fn render_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// CSV complex rendering: `re+imj`, e.g. `1.5-0.25j`, `2e-17+1j`.
fn render_complex(z: C64) -> String {
    let im = render_float(z.im);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{}{sign}{im}j", render_float(z.re))
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => num(*x),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Complex(z) => json!([num(z.re), num(z.im)]),
            Cell::ComplexList(v) => Value::Array(v.iter().map(|z| json!([num(z.re), num(z.im)])).collect()),
            Cell::Json(v) => v.clone(),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => render_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Complex(z) => render_complex(*z),
            Cell::ComplexList(v) => v.iter().map(|z| render_complex(*z)).collect::<Vec<_>>().join(";"),
            Cell::Json(v) => v.to_string(),
        }
    }
}

/// Single-writer, ordered, flushed after every row.
struct Emitter {
    columns: &'static [&'static str],
    stdout: io::Stdout,
    json: Option<BufWriter<File>>,
    csv: Option<csv::Writer<File>>,
}

impl Emitter {
    fn new(columns: &'static [&'static str], json: Option<PathBuf>, csv_path: Option<PathBuf>) -> io::Result<Self> {
        let json = json.map(File::create).transpose()?.map(BufWriter::new);
        let mut csv = csv_path.map(csv::Writer::from_path).transpose().map_err(io::Error::other)?;
        if let Some(w) = csv.as_mut() {
            w.write_record(columns).map_err(io::Error::other)?;
            w.flush()?;
        }
        Ok(Self { columns, stdout: io::stdout(), json, csv })
    }

    fn row(&mut self, cells: Vec<Cell>) -> io::Result<()> {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        let obj: serde_json::Map<String, Value> = self.columns.iter().zip(&cells).map(|(k, c)| (k.to_string(), c.to_json())).collect();
        let line = Value::Object(obj).to_string();
        let mut out = self.stdout.lock();
        writeln!(out, "{line}")?;
        out.flush()?;
        if let Some(w) = self.json.as_mut() {
            writeln!(w, "{line}")?;
            w.flush()?;
        }
        if let Some(w) = self.csv.as_mut() {
            w.write_record(cells.iter().map(Cell::to_csv)).map_err(io::Error::other)?;
            w.flush()?;
        }
        Ok(())
    }
}

const REPORT_COLUMNS: &[&str] = &["criterion", "label", "lhs", "rhs", "abs_err", "rel_err", "tolerance", "pass", "context"];
const SPECTRUM_COLUMNS: &[&str] =
    &["index", "sector", "t_min_degree", "t_coefficients", "q_coefficients", "baxter_residual", "functional_equation_residual", "pass"];
const PAIR_COLUMNS: &[&str] = &["element", "left", "right", "determinant", "oracle", "scale", "selection_rule_applied", "rel_err", "abs_err", "pass"];
const NPOINT_COLUMNS: &[&str] = &["ops", "state", "expansion", "dense", "rel_err", "abs_err", "pass"];

fn report_cells(r: &ComparisonReport) -> Vec<Cell> {
    vec![
        Cell::Int(r.criterion as i64),
        Cell::Text(r.label.clone()),
        Cell::Complex(C64::new(r.lhs[0], r.lhs[1])),
        Cell::Complex(C64::new(r.rhs[0], r.rhs[1])),
        Cell::Float(r.abs_err),
        Cell::Float(r.rel_err),
        Cell::Float(r.tolerance),
        Cell::Bool(r.pass),
        Cell::Json(Value::Object(r.context.clone())),
    ]
}

fn pair_cells(element: &str, r: &PairResult) -> Vec<Cell> {
    vec![
        Cell::Text(element.into()),
        Cell::Int(r.left as i64),
        Cell::Int(r.right as i64),
        Cell::Complex(C64::new(r.determinant[0], r.determinant[1])),
        Cell::Complex(C64::new(r.oracle[0], r.oracle[1])),
        Cell::Float(r.scale),
        Cell::Bool(r.selection_rule_applied),
        Cell::Float(r.rel_err),
        Cell::Float(r.abs_err),
        Cell::Bool(r.pass),
    ]
}

enum Failure {
    Sg(SgError),
    Io(io::Error),
}

impl From<SgError> for Failure {
    fn from(e: SgError) -> Self {
        Failure::Sg(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

struct Run {
    model: Model64,
    seed: u64,
    tol: Tolerances,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
}

impl Run {
    fn emitter(&self, columns: &'static [&'static str]) -> io::Result<Emitter> {
        Emitter::new(columns, self.json.clone(), self.csv.clone())
    }
}

fn load(common: &Common) -> Result<Run, SgError> {
    let cfg = match (&common.config, &common.preset) {
        (Some(path), _) => RunConfig::from_path(path)?,
        (None, Some(name)) => RunConfig {
            name: Some(name.clone()),
            model: ModelConfig::preset(name).ok_or_else(|| SgError::Config(format!("unknown preset {name}")))?,
            seed: None,
            tol: None,
            tolerances: None,
            output: None,
        },
        (None, None) => return Err(SgError::Config("either --config or --preset is required".into())),
    };
    if let Some(t) = common.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(SgError::Config(format!("--tol must be positive, got {t}")));
        }
    }
    let model = cfg.model.build::<f64>()?;
    let tol = match common.tol {
        Some(t) => Tolerances::uniform(t),
        None => cfg.effective_tolerances(),
    };
    let (mut json, mut csv) = (common.json.clone(), common.csv.clone());
    if let Some(out) = &cfg.output {
        match out.format {
            OutputFormat::Json if json.is_none() => json = Some(out.path.clone()),
            OutputFormat::Csv if csv.is_none() => csv = Some(out.path.clone()),
            _ => {}
        }
    }
    Ok(Run { model, seed: common.seed.or(cfg.seed).unwrap_or(0), tol, json, csv })
}

/// Emits reports and folds them into an exit code.
fn emit_reports(em: &mut Emitter, reports: impl IntoIterator<Item = ComparisonReport>, status: &mut Status) -> io::Result<()> {
    for r in reports {
        status.note(&r);
        em.row(report_cells(&r))?;
    }
    Ok(())
}

#[derive(Default)]
struct Status {
    failed: bool,
    error_code: Option<i32>,
}

impl Status {
    fn note(&mut self, r: &ComparisonReport) {
        if !r.pass {
            self.failed = true;
        }
        if self.error_code.is_none() {
            self.error_code = r.error_exit_code();
        }
    }

    fn code(&self) -> u8 {
        match (self.error_code, self.failed) {
            (Some(c), _) => c as u8,
            (None, true) => 1,
            (None, false) => 0,
        }
    }
}

fn run(cmd: &Cmd, r: &Run) -> Result<u8, Failure> {
    let mut status = Status::default();
    match cmd {
        Cmd::CheckAlgebra { reconstruct } => {
            let mut em = r.emitter(REPORT_COLUMNS)?;
            emit_reports(&mut em, oracle::algebra_reports(&r.model, r.seed, &r.tol), &mut status)?;
            if *reconstruct {
                emit_reports(&mut em, oracle::reconstruction_reports(&r.model, &r.tol), &mut status)?;
            }
        }
        Cmd::SovBuild => {
            let mut em = r.emitter(REPORT_COLUMNS)?;
            let basis = SovBasis::build(&r.model)?;
            emit_reports(&mut em, oracle::basis_reports(&basis, &r.tol), &mut status)?;
        }
        Cmd::Spectrum => {
            let mut em = r.emitter(SPECTRUM_COLUMNS)?;
            let basis = SovBasis::build(&r.model)?;
            let states = sp::diagonalize_transfer(&basis)?;
            let pts = oracle::LambdaSampler::for_model(r.seed, &r.model, Some(&basis)).take(oracle::ALGEBRA_POINTS);
            for (i, s) in states.iter().enumerate() {
                let q = sp::fit_q_polynomial(&r.model, &s.state.t, false)?;
                let bx = sp::baxter_residual(&r.model, &s.state.t, &q, false, &pts).max(s.baxter_grid_residual(&basis));
                let fe = sp::check_functional_equation(&r.model, &s.state.t, &pts);
                let pass = bx <= r.tol.spectrum && fe <= r.tol.spectrum;
                status.failed |= !pass;
                em.row(vec![
                    Cell::Int(i as i64),
                    Cell::Int(s.state.sector as i64),
                    Cell::Int(s.state.t.min_deg),
                    Cell::ComplexList(s.state.t.coeffs.clone()),
                    Cell::ComplexList(q.coeffs.clone()),
                    Cell::Float(bx),
                    Cell::Float(fe),
                    Cell::Bool(pass),
                ])?;
            }
        }
        Cmd::Scalar => {
            let mut em = r.emitter(REPORT_COLUMNS)?;
            let st = Prepared::build(&r.model)?;
            emit_reports(&mut em, oracle::scalar_reports(&st, r.seed, &r.tol), &mut status)?;
        }
        Cmd::Ff { kind, site, element, ops, state, stride } => {
            let stride = parse_stride(stride)?;
            let st = Prepared::build(&r.model)?;
            match kind {
                FfKind::U => {
                    let mut em = r.emitter(PAIR_COLUMNS)?;
                    let rows = oracle::ff_u_sweep(&st.basis, &st.states, &st.left, &st.right, *site, r.tol.ff_u)?;
                    for row in rows.iter().filter(|x| x.left % stride.0 == 0 && x.right % stride.1 == 0) {
                        status.failed |= !row.pass;
                        em.row(pair_cells(&format!("u{site}"), row))?;
                    }
                }
                FfKind::Elementary => {
                    let pr = &st.basis.params;
                    let els: Vec<ElementaryBasisElement> = if element.is_empty() {
                        oracle::elementary_cases(pr.nn(), pr.e_n() == 1)
                    } else {
                        element.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
                    };
                    for el in &els {
                        el.validate(pr.nn(), pr.p)?;
                        if pr.e_n() == 0 && (el.h > 0 || el.h0 > 0) {
                            return Err(SgError::InvalidParams(format!("{el}: h and h0 apply to even chains only")).into());
                        }
                    }
                    let mut em = r.emitter(PAIR_COLUMNS)?;
                    for el in &els {
                        let rows = oracle::ff_elementary_sweep(&st.basis, &st.states, &st.left, &st.right, el, stride, r.tol.ff_elementary)?;
                        let name = el.to_string();
                        for row in &rows {
                            status.failed |= !row.pass;
                            em.row(pair_cells(&name, row))?;
                        }
                    }
                }
                FfKind::Npoint => {
                    let lops: Vec<LocalOperator> = ops.split(',').map(|s| LocalOperator::parse(s.trim())).collect::<Result<_, _>>()?;
                    let dense: Vec<_> = lops.iter().map(|o| dense_operator(&st.basis, o)).collect::<Result<_, _>>()?;
                    let ts: Vec<usize> = match state {
                        Some(t) if *t >= st.states.len() => return Err(SgError::IndexOutOfRange(format!("state {t} of {}", st.states.len())).into()),
                        Some(t) => vec![*t],
                        None => (0..st.states.len()).step_by(stride.0).collect(),
                    };
                    let mut em = r.emitter(NPOINT_COLUMNS)?;
                    for t in ts {
                        let v = npoint(&st.basis, &st.states, t, &lops)?;
                        let d = npoint_dense(&st.basis, &st.states[t], &dense)?;
                        let sc = vnorm(&st.left[t]) * vnorm(&st.right[t]) / st.left[t].dot(&st.right[t]).norm();
                        let rep = ComparisonReport::compare(8, "npoint", v, d, sc, r.tol.npoint);
                        status.failed |= !rep.pass;
                        em.row(vec![
                            Cell::Text(ops.clone()),
                            Cell::Int(t as i64),
                            Cell::Complex(v),
                            Cell::Complex(d),
                            Cell::Float(rep.rel_err),
                            Cell::Float(rep.abs_err),
                            Cell::Bool(rep.pass),
                        ])?;
                    }
                }
            }
        }
        Cmd::VerifyAll => {
            let mut em = r.emitter(REPORT_COLUMNS)?;
            let mut io_err = None;
            oracle::verify_suite_with(&r.model, r.seed, &r.tol, &mut |rep| {
                if io_err.is_none() {
                    if let Err(e) = emit_reports(&mut em, [rep], &mut status) {
                        io_err = Some(e);
                    }
                }
            });
            if let Some(e) = io_err {
                return Err(e.into());
            }
        }
    }
    Ok(status.code())
}

fn parse_stride(s: &str) -> Result<(usize, usize), SgError> {
    let bad = || SgError::Config(format!("--stride expects 'i,j' with positive integers, got '{s}'"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let r = match load(&cli.common) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli.cmd, &r) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Sg(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Io(e)) => {
            if e.kind() != io::ErrorKind::BrokenPipe {
                eprintln!("error: output: {e}");
            }
            ExitCode::from(2)
        }
    }
}
