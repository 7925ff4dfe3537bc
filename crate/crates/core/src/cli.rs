//! The `hill` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification subcommand fails its
//! tolerance, 2 on usage, input, output or numerical errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::monodromy::{discriminant_jet, multipliers, reference_discriminant};
use crate::ode::IntegratorConfig;
use crate::parse::parse_complex;
use crate::picard::{picard_discriminant, vanishing_integrals, PicardConfig};
use crate::potential::PotentialDocument;
use crate::report::{
    arc_rows, json_document, write_csv, BandCsvRow, CsvRecord, EigenCsvRow, GridCsvRow,
    HomotopyCsvRow, Meta,
};
use crate::spectrum::{
    band_edges_real, grid_scan, homotopy_scan, periodic_eigenvalues, spectral_distance,
    trace_arc, verify_gasymov, ArcConfig, BandConfig, BoundingBox, GridSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hill", version, about = "Floquet discriminants and spectra of Hill operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discriminant, its derivative and the multipliers at one point.
    Disc(DiscArgs),
    /// Discriminant and spectral distance on a rectangular grid.
    Grid(GridCmd),
    /// Compare the discriminant with 2cos(2π√z) on a grid.
    VerifyGasymov(VerifyArgs),
    /// Bands of a real potential on a real window.
    Bands(BandsArgs),
    /// Trace spectral arcs through seed points.
    Arcs(ArcsArgs),
    /// Discriminant of the scaled potential at z = 1 from the Picard series.
    Picard(PicardArgs),
    /// Discriminant at 1/n² along the path εV, ε ∈ [0, 1].
    Homotopy(HomotopyArgs),
    /// Periodic eigenvalues by Newton iteration from the seeds n².
    Eigs(EigsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Potential file (JSON).
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, default_value_t = 1e-14)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-14)]
    atol: f64,
    /// Integrator step budget per solve.
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    /// Report file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON summary file, written alongside a CSV report.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    re_min: f64,
    #[arg(long, default_value_t = 9.0, allow_negative_numbers = true)]
    re_max: f64,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    im_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    im_max: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            re_min: self.re_min,
            re_max: self.re_max,
            im_min: self.im_min,
            im_max: self.im_max,
            step: self.step,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct DiscArgs {
    #[command(flatten)]
    common: Common,
    /// Spectral parameter, `a+bi`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Complex64,
    /// Tolerance for the spectrum membership verdict.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct GridCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    /// Spectral distance counted as on the spectrum.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct BandsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
    zmin: f64,
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    zmax: f64,
    #[arg(long, default_value_t = 0.01)]
    scan_step: f64,
    #[arg(long, default_value_t = 1e-6)]
    tangency_tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct ArcsArgs {
    #[command(flatten)]
    common: Common,
    /// Seed point on the spectrum, `a+bi`; repeat for several arcs.
    #[arg(long = "z", value_parser = parse_complex, allow_hyphen_values = true, required = true)]
    seeds: Vec<Complex64>,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    re_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    re_max: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    im_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    im_max: f64,
    /// Predictor-corrector steps per direction.
    #[arg(long, default_value_t = 10_000)]
    steps: usize,
}

#[derive(Debug, Args, Serialize)]
struct PicardArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3)]
    n: u64,
    #[arg(long, default_value_t = 12)]
    depth: usize,
    #[arg(long, default_value_t = 60)]
    harmonics: u32,
    /// Largest `k` in the vanishing-integral table.
    #[arg(long, default_value_t = 5)]
    k_max: i64,
    /// Allowed deviation of the discriminant from 2.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct HomotopyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 3)]
    n: u64,
    /// Number of ε values, endpoints included.
    #[arg(long, default_value_t = 11)]
    steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args, Serialize)]
struct EigsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 4)]
    count: usize,
    /// Newton stopping tolerance on `|Δ - 2|`.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

struct Context<'a> {
    common: &'a Common,
    meta: Meta,
    document: PotentialDocument,
    icfg: IntegratorConfig,
}

impl<'a> Context<'a> {
    fn new<A: Serialize>(name: &str, common: &'a Common, args: &A) -> Result<Self, Failure> {
        let bytes = std::fs::read(&common.potential)
            .map_err(|e| Failure(format!("{}: {e}", common.potential.display())))?;
        let document = PotentialDocument::from_slice(&bytes)
            .map_err(|e| Failure(format!("{}: {e}", common.potential.display())))?;
        let icfg = IntegratorConfig {
            rtol: common.rtol,
            atol: common.atol,
            max_steps: common.max_steps,
            ..IntegratorConfig::default()
        };
        icfg.validate()?;
        let meta = Meta::new(
            name,
            &common.potential.to_string_lossy(),
            document.label.clone(),
            serde_json::to_value(args)?,
        );
        Ok(Self {
            common,
            meta,
            document,
            icfg,
        })
    }

    /// Writes `rows` as CSV or, in JSON mode, `summary` with the rows inlined.
    fn emit<R: CsvRecord>(&self, default: Format, rows: &[R], summary: Value) -> Result<(), Failure> {
        match self.common.format.unwrap_or(default) {
            Format::Csv => {
                with_output(self.common.output.as_deref(), |w| write_csv(w, &self.meta, rows))?;
                if let Some(path) = &self.common.summary {
                    let doc = json_document(&self.meta, summary);
                    std::fs::write(path, doc)
                        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                }
            }
            Format::Json => {
                let mut summary = summary;
                if let Value::Object(map) = &mut summary {
                    map.insert("rows".into(), serde_json::to_value(rows)?);
                }
                let doc = json_document(&self.meta, summary);
                with_output(self.common.output.as_deref(), |w| w.write_all(doc.as_bytes()))?;
            }
        }
        Ok(())
    }
}

fn with_output<F>(path: Option<&Path>, f: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Failure(format!("{}: {e}", p.display())))
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w).and_then(|_| w.flush()).map_err(Failure::from)
        }
    }
}

fn c_json(prefix: &str, z: Complex64, map: &mut serde_json::Map<String, Value>) {
    map.insert(format!("{prefix}_re"), json!(z.re));
    map.insert(format!("{prefix}_im"), json!(z.im));
}

fn disc(a: &DiscArgs) -> Outcome {
    let ctx = Context::new("disc", &a.common, a)?;
    let v = &ctx.document.potential;
    let jet = discriminant_jet(v, a.z, &ctx.icfg)?;
    let pair = multipliers(jet.delta);
    let dist = spectral_distance(jet.delta);
    let mut map = serde_json::Map::new();
    c_json("z", a.z, &mut map);
    c_json("delta", jet.delta, &mut map);
    c_json("derivative", jet.derivative, &mut map);
    c_json("rho_plus", pair.rho_plus, &mut map);
    c_json("rho_minus", pair.rho_minus, &mut map);
    c_json("free", reference_discriminant(a.z), &mut map);
    map.insert("dist".into(), json!(dist));
    map.insert("in_spectrum".into(), json!(dist <= a.tol));
    let row = GridCsvRow {
        re_z: a.z.re,
        im_z: a.z.im,
        re_delta: jet.delta.re,
        im_delta: jet.delta.im,
        dist,
    };
    ctx.emit(Format::Json, &[row], Value::Object(map))?;
    Ok(true)
}

fn grid(a: &GridCmd) -> Outcome {
    let ctx = Context::new("grid", &a.common, a)?;
    let rows = grid_scan(&ctx.document.potential, &a.grid.spec(), &ctx.icfg)?;
    let on = rows.iter().filter(|r| r.dist <= a.tol).count();
    let min = rows.iter().map(|r| r.dist).fold(f64::INFINITY, f64::min);
    let csv: Vec<GridCsvRow> = rows.iter().map(GridCsvRow::from).collect();
    ctx.emit(
        Format::Csv,
        &csv,
        json!({ "points": rows.len(), "in_spectrum": on, "min_dist": min, "tol": a.tol }),
    )?;
    Ok(true)
}

fn verify(a: &VerifyArgs) -> Outcome {
    let ctx = Context::new("verify-gasymov", &a.common, a)?;
    let report = verify_gasymov(&ctx.document.potential, &a.grid.spec(), a.tol, &ctx.icfg)?;
    let csv: Vec<GridCsvRow> = report.rows.iter().map(GridCsvRow::from).collect();
    let worst = report.worst_z.unwrap_or_default();
    ctx.emit(
        Format::Csv,
        &csv,
        json!({
            "points": report.rows.len(),
            "max_deviation": report.max_deviation,
            "worst_z_re": worst.re,
            "worst_z_im": worst.im,
            "tol": report.tol,
            "pass": report.pass,
        }),
    )?;
    if !report.pass {
        eprintln!(
            "verify-gasymov: max deviation {:e} at {} exceeds {:e}",
            report.max_deviation, worst, report.tol
        );
    }
    Ok(report.pass)
}

fn bands(a: &BandsArgs) -> Outcome {
    let ctx = Context::new("bands", &a.common, a)?;
    let bcfg = BandConfig {
        scan_step: a.scan_step,
        tangency_tol: a.tangency_tol,
        ..BandConfig::default()
    };
    let s = band_edges_real(&ctx.document.potential, a.zmin, a.zmax, &bcfg, &ctx.icfg)?;
    let csv: Vec<BandCsvRow> = s.bands.iter().map(BandCsvRow::from).collect();
    let edges: Vec<Value> = s
        .edges
        .iter()
        .map(|e| json!({ "z": e.z, "kind": e.kind.label(), "residual": e.residual }))
        .collect();
    let tangencies: Vec<f64> = s.tangencies.iter().map(|e| e.z).collect();
    ctx.emit(
        Format::Csv,
        &csv,
        json!({ "bands": s.bands.len(), "edges": edges, "tangencies": tangencies }),
    )?;
    Ok(true)
}

fn arcs(a: &ArcsArgs) -> Outcome {
    let ctx = Context::new("arcs", &a.common, a)?;
    let cfg = ArcConfig {
        max_steps: a.steps,
        bbox: BoundingBox {
            re_min: a.re_min,
            re_max: a.re_max,
            im_min: a.im_min,
            im_max: a.im_max,
        },
        ..ArcConfig::default()
    };
    let traced = a
        .seeds
        .par_iter()
        .map(|&seed| trace_arc(&ctx.document.potential, seed, &cfg, &ctx.icfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut first = 0;
    let summary: Vec<Value> = a
        .seeds
        .iter()
        .zip(&traced)
        .map(|(seed, arc)| {
            let entry = json!({
                "seed_re": seed.re,
                "seed_im": seed.im,
                "first_idx": first,
                "points": arc.points.len(),
                "start": arc.start.label(),
                "end": arc.end.label(),
            });
            first += arc.points.len();
            entry
        })
        .collect();
    ctx.emit(Format::Csv, &arc_rows(&traced), json!({ "arcs": summary }))?;
    Ok(true)
}

fn picard(a: &PicardArgs) -> Outcome {
    let ctx = Context::new("picard", &a.common, a)?;
    let cfg = PicardConfig {
        depth: a.depth,
        harmonics: a.harmonics,
        ..PicardConfig::default()
    };
    let p = picard_discriminant(&ctx.document.potential, a.n, &cfg)?;
    let records = vanishing_integrals(&p, a.n, a.k_max);
    let all_zero = records.iter().all(|r| r.is_zero());
    let deviation = (p.delta - 2.0).norm();
    let pass = deviation <= a.tol && all_zero;
    let mut map = serde_json::Map::new();
    c_json("delta", p.delta, &mut map);
    c_json("c_end", p.c_end, &mut map);
    c_json("sp_end", p.sp_end, &mut map);
    map.insert("deviation".into(), json!(deviation));
    map.insert("tol".into(), json!(a.tol));
    map.insert("integrals_checked".into(), json!(records.len()));
    map.insert("integrals_all_zero".into(), json!(all_zero));
    map.insert("cos_last_norm".into(), json!(p.cos_run.last_norm()));
    map.insert("sin_last_norm".into(), json!(p.sin_run.last_norm()));
    map.insert("converged".into(), json!(p.cos_run.converged(&cfg) && p.sin_run.converged(&cfg)));
    map.insert("cos_iterates".into(), serde_json::to_value(p.cos_run.summaries())?);
    map.insert("sin_iterates".into(), serde_json::to_value(p.sin_run.summaries())?);
    map.insert("pass".into(), json!(pass));
    ctx.emit(Format::Json, &records, Value::Object(map))?;
    if !pass {
        eprintln!("picard: deviation {deviation:e}, integrals all zero: {all_zero}");
    }
    Ok(pass)
}

fn homotopy(a: &HomotopyArgs) -> Outcome {
    let ctx = Context::new("homotopy", &a.common, a)?;
    let r = homotopy_scan(&ctx.document.potential, a.n, a.steps, a.tol, &ctx.icfg)?;
    let csv: Vec<HomotopyCsvRow> = r
        .rows
        .iter()
        .map(|row| HomotopyCsvRow {
            eps: row.eps,
            re_delta: row.delta.re,
            im_delta: row.delta.im,
            deviation: row.deviation,
        })
        .collect();
    ctx.emit(
        Format::Csv,
        &csv,
        json!({
            "n": r.n,
            "target": r.target,
            "max_deviation": r.max_deviation,
            "tol": r.tol,
            "pass": r.pass,
        }),
    )?;
    if !r.pass {
        eprintln!("homotopy: max deviation {:e} exceeds {:e}", r.max_deviation, r.tol);
    }
    Ok(r.pass)
}

fn eigs(a: &EigsArgs) -> Outcome {
    let ctx = Context::new("eigs", &a.common, a)?;
    let out = periodic_eigenvalues(&ctx.document.potential, a.count, a.tol, &ctx.icfg)?;
    let csv: Vec<EigenCsvRow> = out
        .iter()
        .enumerate()
        .map(|(idx, e)| EigenCsvRow {
            idx,
            seed: e.seed,
            re_z: e.z.re,
            im_z: e.z.im,
            residual: e.residual,
            converged: e.converged,
        })
        .collect();
    let converged = out.iter().filter(|e| e.converged).count();
    ctx.emit(
        Format::Csv,
        &csv,
        json!({ "count": out.len(), "converged": converged, "root_tol": a.tol }),
    )?;
    Ok(true)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var("HILL_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure(format!("HILL_THREADS must be a nonnegative integer, got {s:?}")))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Disc(a) => disc(a),
        Command::Grid(a) => grid(a),
        Command::VerifyGasymov(a) => verify(a),
        Command::Bands(a) => bands(a),
        Command::Arcs(a) => arcs(a),
        Command::Picard(a) => picard(a),
        Command::Homotopy(a) => homotopy(a),
        Command::Eigs(a) => eigs(a),
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let outcome = thread_pool().and_then(|pool| pool.install(|| dispatch(&cli.command)));
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(Failure(msg)) => {
            eprintln!("hill: {msg}");
            EXIT_ERROR
        }
    }
}
