//! Command-line front end: spectral summaries, finite-difference solves,
//! diagram data, scalarization minimizers and the verification suites.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use spectral_torsion::diagram::{self, DiagramPoint, EigenIndex, Family, SampleOptions};
use spectral_torsion::verify::{self, Suite, VerifyOptions};
use spectral_torsion::{exact, fd, Error, RasterDomain, Shape, SpectralSummary};

const THREADS_VAR: &str = "SPECTRAL_TORSION_THREADS";

#[derive(Parser)]
#[command(name = "spectral-torsion", version, about = "Eigenvalues and torsional rigidity of Dirichlet Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form, series or heat-quadrature summary of a shape.
    Exact {
        /// Shape as JSON, e.g. '{"type":"ball","d":2,"r":1.0}'.
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Finite-difference summary of a planar shape or a mask file.
    Fd {
        #[arg(long, conflicts_with = "raster", required_unless_present = "raster")]
        shape: Option<String>,
        /// Mask file: header `h nx ny`, then rows of 0/1 from the top.
        #[arg(long)]
        raster: Option<PathBuf>,
        /// Grid spacing; required with --shape.
        #[arg(long)]
        h: Option<f64>,
        /// Also solve at h/2 and report Richardson-extrapolated values.
        #[arg(long)]
        refine: bool,
    },
    /// Writes diagram points and bound curves as CSV.
    Diagram {
        /// Comma-separated subset of two_disks, rectangles, omega_n, raster_grid.
        #[arg(long, value_delimiter = ',', default_value = "two_disks,rectangles,omega_n")]
        families: Vec<String>,
        /// Points per family.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Output directory for points.csv and bounds.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Keep each shape's own measure instead of normalizing to 1.
        #[arg(long)]
        raw: bool,
    },
    /// Minimizer of k*lambda1 + T or l*lambda2 + T.
    Scalarize {
        #[arg(long, conflicts_with = "l", required_unless_present = "l")]
        k: Option<f64>,
        #[arg(long)]
        l: Option<f64>,
        /// Which eigenvalue enters the functional (1 or 2).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        eigen: Option<u8>,
        #[arg(long, default_value_t = 2)]
        d: u32,
        /// Also search the finite-dimensional families numerically.
        #[arg(long)]
        brute: bool,
    },
    /// Runs a verification suite; exits 1 if any hard check fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Adds a summary violating lambda1*T <= |Omega| to the corpus.
        #[arg(long, hide = true)]
        inject_corrupt: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Violation { .. } | Error::Numeric(_) => 1,
        Error::Parse(_) | Error::Domain(_) => 2,
        Error::Unsupported(_) => 3,
        Error::Resolution(_) => 4,
        Error::Io(_) => 5,
    }
}

/// A number rounded to 12 significant digits.
fn num(v: f64) -> Value {
    match diagram::fmt_sig(v).parse::<f64>() {
        Ok(r) if r.is_finite() => json!(r),
        _ => Value::Null,
    }
}

fn summary_json(s: &SpectralSummary, shape: Option<&Shape>) -> Value {
    let mut m = Map::new();
    if let Some(shape) = shape {
        m.insert("shape".into(), serde_json::to_value(shape).expect("shape encoding is infallible"));
    }
    m.insert("lambda1".into(), num(s.lambda1));
    if let Some(l2) = s.lambda2 {
        m.insert("lambda2".into(), num(l2));
    }
    m.insert("torsion".into(), num(s.torsion));
    m.insert("measure".into(), num(s.measure));
    m.insert("dim".into(), json!(s.dim));
    m.insert("method".into(), json!(s.method.to_string()));
    m.insert("err".into(), num(s.err));
    Value::Object(m)
}

/// Writes to standard output; a closed pipe downstream is not an error.
fn emit(text: &str) -> Result<(), Error> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn print_json(v: &Value) -> Result<(), Error> {
    emit(&serde_json::to_string_pretty(v).expect("json output is infallible"))
}

fn cmd_exact(shape: &str, tol: f64) -> Result<(), Error> {
    let shape = Shape::from_json(shape)?;
    let s = exact::summary(&shape, tol)?;
    print_json(&summary_json(&s, Some(&shape)))
}

fn cmd_fd(shape: Option<&str>, raster: Option<&Path>, h: Option<f64>, refine: bool) -> Result<(), Error> {
    let shape = match (shape, raster) {
        (Some(json), _) => Shape::from_json(json)?,
        (None, Some(path)) => Shape::raster(RasterDomain::read_mask_file(path)?, Some(path.to_path_buf())),
        (None, None) => return Err(Error::Parse("one of --shape or --raster is required".into())),
    };
    let h = match (&shape, h) {
        (_, Some(h)) => h,
        (Shape::Raster(r), None) => r.domain.h(),
        _ => return Err(Error::Parse("--h is required with --shape".into())),
    };
    let s = fd::fd_summary(&shape, h, refine)?;
    let mut v = summary_json(&s, Some(&shape));
    v["h"] = num(h);
    v["refined"] = json!(refine);
    print_json(&v)
}

fn family_rank(tag: &str) -> usize {
    Family::ALL.iter().position(|f| f.tag() == tag).unwrap_or(usize::MAX)
}

fn cmd_diagram(families: &[String], n: usize, out: &Path, raw: bool) -> Result<(), Error> {
    let families: Vec<Family> = families.iter().map(|f| f.trim().parse()).collect::<Result<_, _>>()?;
    let opts = SampleOptions { raw, ..SampleOptions::default() };
    let mut points: Vec<DiagramPoint> = Vec::new();
    for family in families {
        points.extend(diagram::sample_family(family, n, &opts)?);
    }
    points.sort_by(|a, b| {
        family_rank(&a.family)
            .cmp(&family_rank(&b.family))
            .then_with(|| a.params.partial_cmp(&b.params).unwrap_or(std::cmp::Ordering::Equal))
    });
    points.dedup_by(|a, b| a.family == b.family && a.params == b.params);

    std::fs::create_dir_all(out)?;
    let points_path = out.join("points.csv");
    diagram::write_points_csv(BufWriter::new(File::create(&points_path)?), &points)?;

    // Bound curves cover the sampled range, with a floor so the cone is visible.
    let x_max = points
        .iter()
        .filter(|_| !raw)
        .map(|p| p.x)
        .fold(4.0 * diagram::disk_x(), f64::max)
        * 1.05;
    let rows = diagram::bound_rows(200, x_max)?;
    let bounds_path = out.join("bounds.csv");
    diagram::write_bounds_csv(BufWriter::new(File::create(&bounds_path)?), &rows)?;

    print_json(&json!({
        "points": points_path,
        "rows": points.len(),
        "bounds": bounds_path,
        "bound_rows": rows.len(),
    }))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cmd_scalarize(k: Option<f64>, l: Option<f64>, eigen: Option<u8>, d: u32, brute: bool) -> Result<(), Error> {
    let (coefficient, default_eigen) = match (k, l) {
        (Some(k), _) => (k, 1),
        (None, Some(l)) => (l, 2),
        (None, None) => return Err(Error::Parse("one of --k or --l is required".into())),
    };
    let index = match eigen.unwrap_or(default_eigen) {
        1 => EigenIndex::First,
        _ => EigenIndex::Second,
    };
    let predicted = match index {
        EigenIndex::First => diagram::scalarize_k_predict(coefficient, d)?,
        EigenIndex::Second => diagram::scalarize_l_predict(coefficient, d)?,
    };
    let s = exact::summary(&predicted.minimizer, 1e-12)?;
    let radius = match &predicted.minimizer {
        Shape::Ball { r, .. } => *r,
        Shape::Union { parts } => match parts.first() {
            Some(Shape::Ball { r, .. }) => *r,
            _ => f64::NAN,
        },
        _ => f64::NAN,
    };
    let mut report = json!({
        "coefficient": num(coefficient),
        "eigen": if index == EigenIndex::First { 1 } else { 2 },
        "d": d,
        "regime": predicted.regime,
        "threshold": num(predicted.threshold),
        "minimizer": predicted.minimizer,
        "radius": num(radius),
        "value": num(predicted.value),
        "summary": summary_json(&s, None),
    });
    if brute {
        let (shape, value) = diagram::scalarize_brute(coefficient, index, d, 200)?;
        let same_class = shape.tag() == predicted.minimizer.tag();
        let value_gap = rel(value, predicted.value);
        let measure_gap = rel(shape.measure(), predicted.minimizer.measure());
        report["brute"] = json!({
            "minimizer": shape,
            "value": num(value),
            "same_class": same_class,
            "value_rel_diff": num(value_gap),
            "measure_rel_diff": num(measure_gap),
            "agrees": same_class && value_gap <= 1e-4 && measure_gap <= 1e-3,
        });
    }
    print_json(&report)
}

fn cmd_verify(suite: &str, inject_corrupt: bool) -> Result<bool, Error> {
    let suite: Suite = suite.parse()?;
    let report = verify::run(suite, &VerifyOptions { inject_corrupt });
    emit(&report.to_string())?;
    Ok(report.passed())
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Parse(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Numeric(format!("thread pool setup failed: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Exact { shape, tol } => cmd_exact(shape, *tol).map(|()| true),
        Command::Fd { shape, raster, h, refine } => {
            cmd_fd(shape.as_deref(), raster.as_deref(), *h, *refine).map(|()| true)
        }
        Command::Diagram { families, n, out, raw } => cmd_diagram(families, *n, out, *raw).map(|()| true),
        Command::Scalarize { k, l, eigen, d, brute } => cmd_scalarize(*k, *l, *eigen, *d, *brute).map(|()| true),
        Command::Verify { suite, inject_corrupt } => cmd_verify(suite, *inject_corrupt),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
