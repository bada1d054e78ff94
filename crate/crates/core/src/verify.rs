//! Built-in verification suites.
//!
//! Each suite evaluates hard checks (rigorous inequalities and identities
//! that every computed value must satisfy) and informational monitors
//! (conjectured bounds that are observed but never enforced). A report
//! passes iff no hard check fails.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagram::{self, EigenIndex, Family, SampleOptions};
use crate::error::{Error, Result};
use crate::exact;
use crate::fd;
use crate::heat;
use crate::shapes::{Method, Shape, SpectralSummary, PRODUCT_BOUND_CHECK};
use crate::specfun::{self, ball_volume_unchecked, BesselOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Inequalities,
    Heat,
    Fd,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inequalities" => Ok(Suite::Inequalities),
            "heat" => Ok(Suite::Heat),
            "fd" => Ok(Suite::Fd),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!("unknown suite `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub outcome: Outcome,
    pub check: String,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Info => "INFO",
        };
        write!(f, "{tag} {}: {}", self.check, self.detail)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    fn push(&mut self, outcome: Outcome, check: &str, detail: String) {
        self.lines.push(CheckLine { outcome, check: check.to_string(), detail });
    }

    /// Records a hard check: `Ok(detail)` passes, any error fails.
    fn hard(&mut self, check: &str, result: Result<String>) {
        match result {
            Ok(detail) => self.push(Outcome::Pass, check, detail),
            Err(Error::Violation { check: inner, detail }) if inner != check => {
                self.push(Outcome::Fail, check, format!("{inner}: {detail}"))
            }
            Err(Error::Violation { detail, .. }) => self.push(Outcome::Fail, check, detail),
            Err(e) => self.push(Outcome::Fail, check, e.to_string()),
        }
    }

    fn info(&mut self, check: &str, detail: String) {
        self.push(Outcome::Info, check, detail);
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.outcome != Outcome::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| l.outcome == Outcome::Fail)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        let count = |o: Outcome| self.lines.iter().filter(|l| l.outcome == o).count();
        write!(
            f,
            "{} passed, {} failed, {} info",
            count(Outcome::Pass),
            count(Outcome::Fail),
            count(Outcome::Info)
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Adds a summary with `lambda1 T > |Omega|` to the corpus, to prove
    /// that the product bound check can fail.
    pub inject_corrupt: bool,
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Report {
    let mut report = Report::default();
    if matches!(suite, Suite::Inequalities | Suite::All) {
        inequalities(&mut report, opts);
    }
    if matches!(suite, Suite::Heat | Suite::All) {
        heat_suite(&mut report);
    }
    if matches!(suite, Suite::Fd | Suite::All) {
        fd_suite(&mut report);
    }
    report
}

fn ensure(cond: bool, check: &str, detail: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Violation { check: check.to_string(), detail: detail() })
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random rectangles with `a <= b <= 10a`, reproducible from `seed`.
pub fn random_rectangles(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = rng.gen_range(0.1..2.0);
            (a, a * rng.gen_range(1.0..10.0))
        })
        .collect()
}

// Corpus -------------------------------------------------------------------

struct Entry {
    label: String,
    summary: SpectralSummary,
    is_ball: bool,
}

impl Entry {
    /// Relative slack for comparing against sharp constants.
    fn slack(&self) -> f64 {
        match self.summary.method {
            Method::FiniteDifference => 1e-2 + self.summary.err,
            _ => 1e-12 + self.summary.err,
        }
    }
}

fn corpus(report: &mut Report, opts: &VerifyOptions) -> Vec<Entry> {
    let mut shapes: Vec<(String, Shape, bool)> = Vec::new();
    let mut add = |label: String, s: Result<Shape>, ball: bool, report: &mut Report| match s {
        Ok(s) => shapes.push((label, s, ball)),
        Err(e) => report.hard("corpus construction", Err(e)),
    };
    for d in 1..=30 {
        for r in [0.5, 1.0, 2.0] {
            add(format!("ball d={d} r={r}"), Shape::ball(d, r), true, report);
        }
    }
    for (i, (a, b)) in random_rectangles(20, 7).into_iter().enumerate() {
        add(format!("rectangle #{i} {a:.4}x{b:.4}"), Shape::rect(a, b), false, report);
    }
    for i in 0..20 {
        let x = diagram::disk_x() * (1.0 + i as f64 / 19.0);
        add(format!("two-disk union #{i}"), diagram::two_disk_union(x), i == 0, report);
    }
    for n in 1..=8 {
        add(format!("omega_n n={n}"), exact::omega_n_union(n, 2), n == 1, report);
    }
    add("cube".into(), Shape::product(vec![Shape::interval(1.0).unwrap(); 3]), false, report);
    add(
        "box 1x2x3".into(),
        Shape::product(vec![Shape::interval(1.0).unwrap(), Shape::interval(2.0).unwrap(), Shape::interval(3.0).unwrap()]),
        false,
        report,
    );
    add("slab 0.05 x disk".into(), Shape::slab(0.05, Shape::ball(2, 1.0).unwrap()), false, report);

    let mut out = Vec::new();
    for (label, shape, is_ball) in shapes {
        match exact::summary(&shape, 1e-12) {
            Ok(summary) => out.push(Entry { label, summary, is_ball }),
            Err(e) => report.hard(&format!("summary of {label}"), Err(e)),
        }
    }
    let opts_fd = SampleOptions::default();
    for (i, shape) in opts_fd.raster_shapes.iter().enumerate() {
        let h = shape.measure().sqrt() * opts_fd.raster_resolution;
        match fd::fd_summary(shape, h, true) {
            Ok(summary) => out.push(Entry { label: format!("raster #{i} {}", shape.tag()), summary, is_ball: i == 0 }),
            Err(e) => report.hard(&format!("finite-difference summary of raster #{i}"), Err(e)),
        }
    }
    if opts.inject_corrupt {
        out.push(Entry {
            label: "injected corrupt summary".into(),
            summary: SpectralSummary::unchecked(10.0, Some(20.0), 1.0, 1.0, 2, Method::Exact, 0.0),
            is_ball: false,
        });
    }
    out
}

fn for_all(report: &mut Report, check: &str, entries: &[Entry], test: impl Fn(&Entry) -> Result<()>) {
    let failures: Vec<String> = entries
        .iter()
        .filter_map(|e| test(e).err().map(|err| format!("{} ({err})", e.label)))
        .collect();
    if failures.is_empty() {
        report.hard(check, Ok(format!("{} shapes", entries.len())));
    } else {
        report.hard(
            check,
            Err(Error::Violation { check: check.into(), detail: format!("{} violations: {}", failures.len(), failures.join("; ")) }),
        );
    }
}

fn inequalities(report: &mut Report, opts: &VerifyOptions) {
    special_functions(report);
    let entries = corpus(report, opts);

    for_all(report, PRODUCT_BOUND_CHECK, &entries, |e| e.summary.validate());
    for_all(report, "Faber-Krahn", &entries, |e| {
        let s = &e.summary;
        let d = f64::from(s.dim);
        let lhs = s.measure.powf(2.0 / d) * s.lambda1;
        let rhs = ball_volume_unchecked(s.dim).powf(2.0 / d) * specfun::ball_mode_sq(s.dim);
        ensure(lhs >= rhs * (1.0 - e.slack()), "Faber-Krahn", || format!("{lhs} < {rhs}"))?;
        if e.is_ball && s.method == Method::Exact {
            ensure(rel(lhs, rhs) <= 1e-10, "Faber-Krahn equality", || format!("{lhs} vs {rhs}"))?;
        }
        Ok(())
    });
    for_all(report, "Saint-Venant torsion bound", &entries, |e| {
        let s = &e.summary;
        let d = f64::from(s.dim);
        let ball = ball_volume_unchecked(s.dim).powf(-2.0 / d) * s.measure.powf((d + 2.0) / d) / (d * (d + 2.0));
        ensure(s.torsion <= ball * (1.0 + e.slack()), "Saint-Venant", || format!("T = {} > {ball}", s.torsion))
    });
    for_all(report, "Kohler-Jobin", &entries, |e| {
        let s = &e.summary;
        let value = exact::kohler_jobin_value(s);
        let ball = exact::kohler_jobin_ball(s.dim)?;
        let slack = e.slack() * (1.0 + f64::from(s.dim + 2) / 2.0);
        ensure(value >= ball * (1.0 - slack), "Kohler-Jobin", || format!("{value} < {ball}"))?;
        if e.is_ball {
            let tol = if s.method == Method::FiniteDifference { 1e-2 } else { 1e-9 };
            ensure(rel(value, ball) <= tol, "Kohler-Jobin equality", || format!("{value} vs {ball}"))?;
        }
        Ok(())
    });
    let max_eff = entries
        .iter()
        .filter(|e| e.summary.dim >= 2 && e.summary.validate().is_ok())
        .map(|e| (exact::efficiency(&e.summary), e.label.as_str()))
        .fold((0.0, ""), |a, b| if b.0 > a.0 { b } else { a });
    report.info(
        "efficiency conjecture monitor",
        format!(
            "max lambda1 T/|Omega| = {:.6} ({}) vs pi^2/12 = {:.6}: {}",
            max_eff.0,
            max_eff.1,
            PI * PI / 12.0,
            if max_eff.0 <= PI * PI / 12.0 + 1e-3 { "consistent" } else { "exceeds conjectured supremum" }
        ),
    );

    report.hard("slab approach", slab_approach());
    report.hard("rectangle lower bound", rectangle_lower());
    report.hard("rectangle asymptotic window", rectangle_window());
    report.hard("alpha sequence", alpha_sequence());
    report.hard("omega_n family", omega_n_checks());
    report.hard("two-disk curve", two_disk_checks());
    report.hard("conicity", conicity());
    diagram_checks(report);
    report.hard("minimizers of k lambda1 + T", scalarization(EigenIndex::First));
    report.hard("minimizers of l lambda2 + T", scalarization(EigenIndex::Second));
}

fn special_functions(report: &mut Report) {
    report.hard(
        "Bessel first zeros",
        (|| {
            let j = specfun::bessel_first_zero(BesselOrder::new(0.0)?)?;
            ensure((j - 2.405).abs() < 5e-4, "j01", || format!("j01 = {j}"))?;
            let mut prev = 0.0;
            for i in 0..=28 {
                let nu = 0.5 * f64::from(i);
                let order = BesselOrder::new(nu)?;
                let z = specfun::bessel_first_zero(order)?;
                ensure(z > prev, "zeros increasing", || format!("j at nu = {nu} not above previous"))?;
                let (lo, hi) = (specfun::bessel_j(order, z - 1e-6)?, specfun::bessel_j(order, z + 1e-6)?);
                ensure(lo * hi < 0.0, "sign change", || format!("no sign change at nu = {nu}"))?;
                prev = z;
            }
            Ok(format!("j01 = {j:.12}, increasing and sign-changing for nu = 0..14"))
        })(),
    );
    report.hard(
        "Gamma recurrence and zeta monotonicity",
        (|| {
            for i in 1..200 {
                let x = 0.05 * f64::from(i);
                let (g, g1) = (specfun::gamma_fn(x)?, specfun::gamma_fn(x + 1.0)?);
                ensure(rel(g1, x * g) <= 1e-12, "Gamma recurrence", || format!("x = {x}"))?;
            }
            let mut prev = specfun::zeta_int(2)?;
            for n in 3..64 {
                let z = specfun::zeta_int(n)?;
                ensure(z <= prev && z >= 1.0, "zeta decreasing", || format!("n = {n}"))?;
                prev = z;
            }
            Ok("Gamma(x+1) = x Gamma(x) on (0, 10); zeta(n) decreasing to 1".into())
        })(),
    );
}

fn slab_approach() -> Result<String> {
    let mut values = Vec::new();
    for a in [0.2, 0.1, 0.05, 0.02] {
        values.push(exact::efficiency(&exact::summary(&Shape::rect(a, 1.0 / a)?, 1e-12)?));
    }
    ensure(values.windows(2).all(|w| w[1] > w[0]), "slab approach", || format!("not increasing: {values:?}"))?;
    ensure(values[3] >= 0.80 && values[3] < PI * PI / 12.0, "slab approach", || format!("F(0.02) = {}", values[3]))?;
    Ok(format!("efficiency of Rect(a, 1/a) for a = 0.2..0.02: {values:.6?}"))
}

fn rectangle_lower() -> Result<String> {
    let rects = random_rectangles(100, 11);
    let mut min_gap = f64::INFINITY;
    for &(a, b) in &rects {
        let t = exact::rect_torsion_series(a, b, 1e-13)?;
        let lo = exact::rect_torsion_lower(a, b)?;
        ensure(lo < t.value - t.err, "rectangle lower bound", || format!("({a}, {b}): {lo} >= {}", t.value))?;
        ensure(t.value <= a * b, PRODUCT_BOUND_CHECK, || format!("({a}, {b})"))?;
        min_gap = min_gap.min((t.value - lo) / t.value);
    }
    Ok(format!("{} rectangles, smallest relative margin {min_gap:.3e}", rects.len()))
}

fn rectangle_window() -> Result<String> {
    let mut rects = random_rectangles(100, 13);
    rects.push((0.1, 10.0));
    for &(a, b) in &rects {
        let t = exact::rect_torsion_series(a, b, 1e-14)?;
        let (approx, bound) = exact::rect_torsion_asymptotic(a, b)?;
        ensure((t.value - approx).abs() <= bound + t.err, "asymptotic window", || format!("({a}, {b})"))?;
    }
    let t = exact::rect_torsion_series(0.1, 10.0, 1e-14)?;
    let residual = (t.value - exact::rect_torsion_asymptotic(0.1, 10.0)?.0).abs();
    ensure(residual <= 6.7e-8, "asymptotic window", || format!("residual at (0.1, 10) = {residual}"))?;
    Ok(format!("{} rectangles; residual at (0.1, 10) = {residual:.3e}", rects.len()))
}

fn alpha_sequence() -> Result<String> {
    let a: Vec<f64> = (2..=30).map(exact::alpha).collect::<Result<_>>()?;
    for (i, want) in [0.723, 0.658, 0.612].into_iter().enumerate() {
        ensure((a[i] - want).abs() < 5e-4, "alpha values", || format!("alpha({}) = {}", i + 2, a[i]))?;
    }
    ensure(a.windows(2).all(|w| w[1] < w[0]) && a.iter().all(|&v| v > 0.25), "alpha decreasing", || {
        format!("{a:?}")
    })?;
    Ok(format!("alpha(2..4) = {:.4}, {:.4}, {:.4}; decreasing above 1/4 to alpha(30) = {:.4}", a[0], a[1], a[2], a[28]))
}

fn omega_n_checks() -> Result<String> {
    for n in 1..=8 {
        let explicit = exact::summary(&exact::omega_n_union(n, 2)?, 1e-12)?;
        let value = exact::omega_n_value(n, 2)?;
        let direct = explicit.lambda1 * explicit.torsion / explicit.measure;
        ensure(rel(direct, value) <= 1e-12, "omega_n union", || format!("n = {n}: {direct} vs {value}"))?;
    }
    let values: Vec<f64> = (1..=256).map(|n| exact::omega_n_value(n, 2)).collect::<Result<_>>()?;
    ensure(values.windows(2).all(|w| w[1] < w[0]), "omega_n decreasing", || "not decreasing".into())?;
    ensure(values[255] < 0.05, "omega_n decay", || format!("value at 256 = {}", values[255]))?;
    Ok(format!("explicit unions agree for n <= 8; decreasing to {:.5} at n = 256", values[255]))
}

fn two_disk_checks() -> Result<String> {
    let points = diagram::sample_family(Family::TwoDisks, 100, &SampleOptions::default())?;
    let mut worst: f64 = 0.0;
    for p in &points {
        worst = worst.max(rel(p.y, diagram::two_disk_curve(p.x)?));
    }
    ensure(worst <= 1e-10, "two-disk curve", || format!("largest deviation {worst}"))?;
    let end = 8.0 / specfun::ball_mode_sq(2);
    let (first, last) = (&points[0], &points[points.len() - 1]);
    ensure(rel(first.y, end) <= 1e-12 && rel(last.y, end) <= 1e-12, "two-disk endpoints", || {
        format!("{} and {} vs {end}", first.y, last.y)
    })?;
    Ok(format!("100 unions on the curve (largest deviation {worst:.2e}); both endpoints at y = {end:.10}"))
}

fn conicity() -> Result<String> {
    let shapes = [
        Shape::ball(2, 0.4)?,
        Shape::rect(0.3, 0.8)?,
        Shape::union(vec![Shape::ball(2, 0.3)?, Shape::ball(2, 0.2)?])?,
        exact::omega_n_union(3, 2)?,
    ];
    for s in &shapes {
        let base = diagram::to_xy(&exact::summary(s, 1e-13)?)?;
        for t in [1.0, 1.5, 2.0, 4.0] {
            // lengths shrink by sqrt(t), so lambda1 and 1/(lambda1 T) grow by t
            let p = diagram::to_xy(&exact::summary(&s.scale(1.0 / f64::sqrt(t))?, 1e-13)?)?;
            ensure(rel(p.x, t * base.x) <= 1e-12 && rel(p.y, t * base.y) <= 1e-12, "conicity", || {
                format!("{} at t = {t}", s.tag())
            })?;
        }
    }
    Ok(format!("{} shapes, t in {{1, 1.5, 2, 4}}", shapes.len()))
}

fn diagram_checks(report: &mut Report) {
    let opts = SampleOptions::default();
    let mut all = Vec::new();
    for (family, n) in [(Family::TwoDisks, 50), (Family::Rectangles, 40), (Family::OmegaN, 8), (Family::RasterGrid, 10)] {
        match diagram::sample_family(family, n, &opts) {
            Ok(points) => {
                report.hard(&format!("diagram hard bounds ({})", family.tag()), Ok(format!("{} points", points.len())));
                all.extend(points);
            }
            Err(e) => report.hard(&format!("diagram hard bounds ({})", family.tag()), Err(e)),
        }
    }
    let monitor = diagram::conjecture_monitor(&all, 1e-3);
    report.info(
        "conjectured floor y >= 12/pi^2",
        format!(
            "{} points, min y = {:.6} vs {:.6}: {}",
            monitor.points,
            monitor.min_y,
            monitor.floor,
            if monitor.consistent { "consistent" } else { "below the conjectured floor" }
        ),
    );
    let off = diagram::vertical_convexity_report(&all);
    report.info(
        "vertical segments to the Kohler-Jobin line",
        format!("{off} of {} points lie above the line", all.len()),
    );
}

fn scalarization(index: EigenIndex) -> Result<String> {
    let d = 2;
    let threshold = match index {
        EigenIndex::First => diagram::k_threshold(d)?,
        EigenIndex::Second => diagram::l_threshold(d)?,
    };
    let predict = |c: f64, d: u32| match index {
        EigenIndex::First => diagram::scalarize_k_predict(c, d),
        EigenIndex::Second => diagram::scalarize_l_predict(c, d),
    };
    let r_star = match index {
        EigenIndex::First => diagram::k_radius(threshold, d)?,
        EigenIndex::Second => diagram::l_radius(threshold, d)?,
    };
    let count = if index == EigenIndex::First { 1.0 } else { 2.0 };
    let m = count * PI * r_star * r_star;
    ensure(rel(m, 1.0) <= 1e-12, "threshold identity", || format!("measure at threshold = {m}"))?;
    let mut worst: f64 = 0.0;
    for factor in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let c = threshold * factor;
        let p = predict(c, d)?;
        let (shape, value) = diagram::scalarize_brute(c, index, d, 200)?;
        ensure(shape.tag() == p.minimizer.tag(), "minimizer class", || {
            format!("coefficient {c}: brute force found {} but predicted {}", shape.tag(), p.minimizer.tag())
        })?;
        ensure(rel(shape.measure(), p.minimizer.measure()) <= 1e-3, "minimizer measure", || {
            format!("coefficient {c}: measure {} vs {}", shape.measure(), p.minimizer.measure())
        })?;
        ensure(value >= p.value * (1.0 - 1e-12), "prediction optimal", || format!("coefficient {c}: brute {value} < {}", p.value))?;
        worst = worst.max(rel(value, p.value));
        ensure(rel(value, p.value) <= 1e-4, "brute-force agreement", || format!("coefficient {c}: {value} vs {}", p.value))?;
        if index == EigenIndex::Second {
            let s = exact::summary(&p.minimizer, 1e-12)?;
            let Shape::Union { parts } = &p.minimizer else { unreachable!("union minimizer") };
            let one = exact::summary(&parts[0], 1e-12)?;
            ensure(rel(s.lambda2.unwrap_or(f64::NAN), one.lambda1) <= 1e-12, "union lambda2", || {
                format!("lambda2 {:?} vs {}", s.lambda2, one.lambda1)
            })?;
        }
    }
    Ok(format!("threshold {threshold:.6e}; 3 coefficients per regime, worst relative gap {worst:.2e}"))
}

// Heat suite -----------------------------------------------------------------

fn heat_suite(report: &mut Report) {
    report.hard(
        "interval heat content",
        (|| {
            for a in [0.5, 1.0, 2.0] {
                ensure(heat::q_interval(a, 0.0, 1e-15)? == a, "Q(0) = a", || format!("a = {a}"))?;
                let lam = PI * PI / (a * a);
                let mut prev = a;
                for i in 1..500 {
                    let t = 1e-6 * 1.04f64.powi(i);
                    let q = heat::q_interval(a, t, 1e-15)?;
                    ensure((0.0..=a).contains(&q), "0 <= Q <= a", || format!("a = {a}, t = {t}"))?;
                    ensure(q < prev || q == 0.0, "Q decreasing", || format!("a = {a}, t = {t}"))?;
                    ensure(q <= a * (-t * lam).exp() * (1.0 + 1e-12), "Q envelope", || format!("a = {a}, t = {t}"))?;
                    prev = q;
                }
                let integral = heat::HeatContentCurve::interval(a)?.time_integral(1e-11)?;
                ensure(rel(integral, a.powi(3) / 12.0) <= 1e-8, "integral of Q", || {
                    format!("a = {a}: {integral} vs {}", a.powi(3) / 12.0)
                })?;
            }
            Ok("a in {0.5, 1, 2}: Q(0) = a, decreasing, within envelope, integral a^3/12 to 1e-8".into())
        })(),
    );
    report.hard(
        "rectangle torsion: series vs heat quadrature",
        (|| {
            let mut worst: f64 = 0.0;
            for (a, b) in random_rectangles(50, 17) {
                let s = exact::rect_torsion_series(a, b, 1e-13)?.value;
                let q = heat::torsion_rect_via_heat(a, b, 1e-8)?;
                worst = worst.max(rel(q, s));
                ensure(rel(q, s) <= 1e-5, "series vs heat", || format!("({a}, {b}): {s} vs {q}"))?;
            }
            Ok(format!("50 rectangles, worst relative difference {worst:.2e}"))
        })(),
    );
    report.hard(
        "product torsion sandwich",
        (|| {
            let mut gaps = Vec::new();
            for eps in [0.2, 0.1, 0.05, 0.025] {
                let t1 = eps * eps * eps / 12.0;
                let lo = heat::product_torsion_lower(t1, PI * PI / (eps * eps), eps, 1, 1.0, 2.0)?;
                let hi = heat::product_torsion_upper(t1, 1.0)?;
                let t = heat::torsion_rect_via_heat(eps, 1.0, 1e-10)?;
                ensure(lo <= t && t <= hi, "sandwich", || format!("eps = {eps}: {lo} <= {t} <= {hi}"))?;
                gaps.push((hi - lo) / eps.powi(3));
            }
            for w in gaps.windows(2) {
                ensure((0.45..=0.55).contains(&(w[1] / w[0])), "gap order", || format!("gaps/eps^3 = {gaps:?}"))?;
            }
            let shown: Vec<String> = gaps.iter().map(|g| format!("{g:.4e}")).collect();
            Ok(format!("eps = 0.2..0.025, gap/eps^3 halves: {}", shown.join(", ")))
        })(),
    );
    report.hard(
        "slab constant",
        (|| {
            ensure(rel(heat::c_constant(1)?, 2.0) <= 1e-12, "C_1 = 2", String::new)?;
            ensure(rel(heat::c_constant(2)?, PI) <= 1e-12, "C_2 = pi", String::new)?;
            for d in 1..=3 {
                let (c, q) = (heat::c_constant(d)?, heat::c_constant_quadrature(d, 1e-12)?);
                ensure((c - q).abs() <= 1e-8, "C_d quadrature", || format!("d = {d}: {c} vs {q}"))?;
            }
            Ok("C_1 = 2, C_2 = pi, quadrature agrees for d = 1..3".into())
        })(),
    );
    report.hard(
        "eigenvalue-sum comparison",
        (|| {
            let ab = heat::ab_bound(2)?;
            let ratio = exact::kohler_jobin_ball(2)? / ab;
            ensure((ab - 3.629).abs() < 5e-4, "ab bound", || format!("ab_bound(2) = {ab}"))?;
            ensure((ratio - 3.62).abs() < 5e-3, "ratio", || format!("ratio = {ratio}"))?;
            let eig = heat::disk_eigenvalues(1.0, 40)?;
            let lower = heat::eigsum_lower_bound(2, &eig)?;
            ensure(lower <= PI / 8.0, "eigenvalue-sum bound", || format!("{lower} > pi/8"))?;
            Ok(format!("ab_bound(2) = {ab:.4}, ball ratio {ratio:.4}, 40-term disk bound {lower:.4} <= pi/8"))
        })(),
    );
}

// Finite-difference suite ---------------------------------------------------

fn fd_suite(report: &mut Report) {
    report.hard(
        "discrete maximum principle and product bound",
        (|| {
            let shapes = diagram::default_raster_shapes();
            for s in &shapes {
                let h = s.measure().sqrt() / 32.0;
                let dom = fd::rasterize(s, h)?;
                let (t, w) = fd::torsion_fd(&dom)?;
                ensure(w.values.iter().all(|&v| v > 0.0), "maximum principle", || s.tag().to_string())?;
                let l1 = fd::eigen_fd(&dom, 1)?[0];
                ensure(l1 * t <= dom.measure() * (1.0 + 5.0 * h), "discrete product bound", || s.tag().into())?;
            }
            Ok(format!("{} raster shapes", shapes.len()))
        })(),
    );
    report.hard(
        "monotone under inclusion",
        (|| {
            let h = 1.0 / 50.0;
            let small = fd::solve_domain(&fd::rasterize(&Shape::rect(0.8, 0.8)?, h)?)?;
            let big = fd::solve_domain(&fd::rasterize(&Shape::rect(1.0, 1.0)?, h)?)?;
            ensure(big.torsion > small.torsion && big.lambda1 < small.lambda1, "inclusion", || {
                format!("{small:?} vs {big:?}")
            })?;
            Ok("square 0.8 inside square 1 at h = 1/50".into())
        })(),
    );
    report.hard(
        "second-order convergence",
        (|| {
            let disk = Shape::ball(2, 1.0)?;
            let (j0, j1) = (specfun::ball_mode_sq(2), specfun::ball_second_mode_sq(2));
            let mut errs = Vec::new();
            for h in [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0] {
                let v = fd::solve_domain(&fd::rasterize(&disk, h)?)?;
                errs.push(((v.lambda1 - j0).abs(), (v.lambda2.unwrap_or(f64::NAN) - j1).abs()));
            }
            let mut ratios = Vec::new();
            for w in errs.windows(2) {
                for r in [w[0].0 / w[1].0, w[0].1 / w[1].1] {
                    ensure((3.5..=4.5).contains(&r), "O(h^2)", || format!("ratio {r}"))?;
                    ratios.push(r);
                }
            }
            Ok(format!("unit disk lambda1, lambda2 error ratios {ratios:.3?}"))
        })(),
    );
    report.hard(
        "accuracy against closed forms",
        (|| {
            let disk = Shape::ball(2, 1.0)?;
            let v = fd::solve_domain(&fd::rasterize(&disk, 1.0 / 64.0)?)?;
            ensure(rel(v.lambda1, specfun::ball_mode_sq(2)) <= 5e-3, "disk lambda1", || format!("{}", v.lambda1))?;
            ensure(rel(v.torsion, PI / 8.0) <= 5e-3, "disk torsion", || format!("{}", v.torsion))?;
            let sq = fd::eigen_fd(&fd::rasterize(&Shape::rect(1.0, 1.0)?, 0.25)?, 1)?[0];
            ensure(rel(sq, fd::discrete_square_lambda1(0.25)) <= 1e-9, "discrete square", || format!("{sq}"))?;
            for (a, b) in random_rectangles(5, 19) {
                let t = fd::torsion_fd(&fd::rasterize(&Shape::rect(a, b)?, a / 64.0)?)?.0;
                let s = exact::rect_torsion_series(a, b, 1e-12)?.value;
                ensure(rel(t, s) <= 5e-3, "rectangle torsion", || format!("({a}, {b}): {t} vs {s}"))?;
            }
            Ok("unit disk at h = 1/64 and 5 rectangles at h = a/64 within 0.5%; square at h = 1/4 exact".into())
        })(),
    );
    report.hard(
        "equal disks share the ground state",
        (|| {
            let disk = Shape::ball(2, 0.4)?;
            let h = 0.02;
            let one = fd::solve_domain(&fd::rasterize(&disk, h)?)?;
            let two = fd::solve_domain(&fd::rasterize(&Shape::union(vec![disk.clone(), disk])?, h)?)?;
            let l2 = two.lambda2.unwrap_or(f64::NAN);
            ensure(rel(l2, two.lambda1) <= 1e-9 && rel(two.lambda1, one.lambda1) <= 1e-9, "equal disks", || {
                format!("{} {} {}", two.lambda1, l2, one.lambda1)
            })?;
            let exact_l = specfun::ball_mode_sq(2) / 0.16;
            ensure(rel(l2, exact_l) <= 1e-2, "equal disks vs exact", || format!("{l2} vs {exact_l}"))?;
            Ok(format!("lambda2 = lambda1 = {l2:.6} (exact {exact_l:.6})"))
        })(),
    );
    report.hard(
        "square symmetry",
        (|| {
            let dom = fd::rasterize(&Shape::rect(1.0, 1.0)?, 1.0 / 24.0)?;
            let (_, w) = fd::torsion_fd(&dom)?;
            let pairs = fd::eigen_fd_with_vectors(&dom, 1, 1e-11)?;
            let phi = &pairs[0].1;
            let n = 24;
            let scale_w = w.values.iter().cloned().fold(0.0, f64::max);
            let scale_p = phi.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let mut worst: f64 = 0.0;
            for i in 0..=n {
                for j in 0..=n {
                    for (a, b) in [(n - i, j), (i, n - j), (j, i), (n - j, n - i)] {
                        worst = worst
                            .max((w.at(i, j) - w.at(a, b)).abs() / scale_w)
                            .max((phi.at(i, j) - phi.at(a, b)).abs() / scale_p);
                    }
                }
            }
            ensure(worst <= 1e-8, "dihedral symmetry", || format!("asymmetry {worst}"))?;
            Ok(format!("torsion field and ground state symmetric to {worst:.1e}"))
        })(),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrupt_summary_is_caught() {
        let mut report = Report::default();
        let entries = corpus(&mut report, &VerifyOptions { inject_corrupt: true });
        for_all(&mut report, PRODUCT_BOUND_CHECK, &entries, |e| e.summary.validate());
        assert!(!report.passed());
        let fail = report.failures().next().unwrap();
        assert_eq!(fail.check, PRODUCT_BOUND_CHECK);
        assert!(fail.detail.contains("injected corrupt summary"));
    }

    #[test]
    fn suite_names() {
        assert_eq!("fd".parse::<Suite>().unwrap(), Suite::Fd);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn report_formatting() {
        let mut r = Report::default();
        r.hard("a", Ok("fine".into()));
        r.info("b", "noted".into());
        assert!(r.passed());
        assert_eq!(r.to_string(), "PASS a: fine\nINFO b: noted\n1 passed, 0 failed, 1 info");
    }
}
