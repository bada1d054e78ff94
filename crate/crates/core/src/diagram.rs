//! The attainable set of pairs `(lambda1, 1/(lambda1 T))` over planar
//! domains of measure at most one.
//!
//! Points are normalized to measure one (the set is conical, so nothing is
//! lost). The module also holds the explicit bound curves, parametric
//! families that sample the set, and the two scalarized problems
//! `min k lambda1 + T` and `min l lambda2 + T` over `|Omega| <= 1`, with
//! closed-form predictions and a brute-force search over ball, two-ball
//! and rectangle families to cross-check them.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact;
use crate::fd;
use crate::shapes::{Shape, SpectralSummary};
use crate::specfun::{ball_mode_sq, ball_second_mode_sq, ball_volume_unchecked};

/// Relative slack used when a value must sit exactly on an interval end.
const EDGE: f64 = 1e-12;

fn j01_sq() -> f64 {
    static J: OnceLock<f64> = OnceLock::new();
    *J.get_or_init(|| ball_mode_sq(2))
}

/// Faber-Krahn corner `pi j_{0,1}^2`, the `x` of the unit-area disk.
pub fn disk_x() -> f64 {
    PI * j01_sq()
}

/// Slope `8 / (pi j_{0,1}^4)` of the Kohler-Jobin line `y = slope x`.
pub fn kohler_jobin_slope() -> f64 {
    8.0 / (PI * j01_sq() * j01_sq())
}

/// Conjectured floor `12 / pi^2`, never enforced.
pub fn conjectured_floor() -> f64 {
    12.0 / (PI * PI)
}

/// One point of the diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub x: f64,
    pub y: f64,
    pub family: String,
    pub params: Vec<f64>,
    /// Relative error of `y` (the error of `x` is at most half of it).
    pub err: f64,
}

impl DiagramPoint {
    pub fn tagged(mut self, family: &str, params: Vec<f64>) -> Self {
        self.family = family.to_string();
        self.params = params;
        self
    }

    /// Checks the three rigorous constraints: Faber-Krahn `x >= pi j^2`,
    /// Saint-Venant `x y >= 8 pi` and Kohler-Jobin `y <= slope x`, each
    /// relaxed by `err`.
    pub fn check_hard_bounds(&self) -> Result<()> {
        let e = self.err + EDGE;
        let fail = |check: &str, detail: String| Err(Error::Violation { check: check.into(), detail });
        if self.x < disk_x() * (1.0 - e) {
            return fail("x >= pi j01^2", format!("{} point x = {} below {}", self.family, self.x, disk_x()));
        }
        if self.x * self.y < 8.0 * PI * (1.0 - e) {
            return fail("x y >= 8 pi", format!("{} point x y = {}", self.family, self.x * self.y));
        }
        if self.y > kohler_jobin_slope() * self.x * (1.0 + e) {
            return fail(
                "y <= 8 x / (pi j01^4)",
                format!("{} point y = {} above {}", self.family, self.y, kohler_jobin_slope() * self.x),
            );
        }
        Ok(())
    }
}

fn require_planar(s: &SpectralSummary) -> Result<()> {
    if s.dim != 2 {
        return Err(Error::Unsupported(format!("the diagram is planar, got a {}-D summary", s.dim)));
    }
    Ok(())
}

/// `(lambda1, 1/(lambda1 T))` of a planar summary with measure at most one.
pub fn to_xy(s: &SpectralSummary) -> Result<DiagramPoint> {
    require_planar(s)?;
    if s.measure > 1.0 + EDGE {
        return Err(domain(format!("diagram points need measure <= 1, got {}", s.measure)));
    }
    Ok(to_xy_raw(s))
}

/// Like [`to_xy`] without the planarity and measure checks.
pub fn to_xy_raw(s: &SpectralSummary) -> DiagramPoint {
    DiagramPoint {
        x: s.lambda1,
        y: 1.0 / (s.lambda1 * s.torsion),
        family: String::new(),
        params: Vec::new(),
        err: 2.0 * s.err,
    }
}

/// Dilation of `s` to measure one.
pub fn normalize_to_measure(s: &Shape) -> Result<Shape> {
    if s.is_raster() {
        return Err(Error::Unsupported("a raster cannot be rescaled".into()));
    }
    s.scale(s.measure().powf(-1.0 / f64::from(s.dimension())))
}

/// The summary the same shape would have after dilation to measure one.
pub fn normalize_summary(s: &SpectralSummary) -> Result<SpectralSummary> {
    let d = f64::from(s.dim);
    let t = s.measure.powf(-1.0 / d);
    SpectralSummary::new(
        s.lambda1 / (t * t),
        s.lambda2.map(|l| l / (t * t)),
        s.torsion * t.powf(d + 2.0),
        1.0,
        s.dim,
        s.method,
        s.err,
    )
}

/// `(y_low, y_high, conjectured_low)` at `x`: the Saint-Venant curve
/// `8 pi / x`, the Kohler-Jobin line and the conjectured floor `12/pi^2`.
pub fn region_bounds(x: f64) -> Result<(f64, f64, f64)> {
    if !(x.is_finite() && x >= disk_x() * (1.0 - EDGE)) {
        return Err(domain(format!("x = {x} is below the Faber-Krahn threshold {}", disk_x())));
    }
    Ok((8.0 * PI / x, kohler_jobin_slope() * x, conjectured_floor()))
}

/// `y` of the union of two disks of total area one with `lambda1 = x`,
/// `8 pi x / (x^2 - 2 pi j^2 x + 2 pi^2 j^4)` on `[pi j^2, 2 pi j^2]`.
pub fn two_disk_curve(x: f64) -> Result<f64> {
    let j2 = j01_sq();
    if !(x >= PI * j2 * (1.0 - EDGE) && x <= 2.0 * PI * j2 * (1.0 + EDGE)) {
        return Err(domain(format!("two-disk curve is defined on [{}, {}], got {x}", PI * j2, 2.0 * PI * j2)));
    }
    Ok(8.0 * PI * x / (x * x - 2.0 * PI * j2 * x + 2.0 * PI * PI * j2 * j2))
}

/// The explicit two-disk union behind [`two_disk_curve`]: radii with
/// `R^2 = j^2 / x` and `r^2 = 1/pi - R^2`; a single disk at the left end.
pub fn two_disk_union(x: f64) -> Result<Shape> {
    two_disk_curve(x)?;
    let big_sq = (j01_sq() / x).min(1.0 / PI);
    let small_sq = 1.0 / PI - big_sq;
    if small_sq <= EDGE / PI {
        return Shape::ball(2, big_sq.sqrt());
    }
    Shape::union(vec![Shape::ball(2, big_sq.sqrt())?, Shape::ball(2, small_sq.sqrt())?])
}

/// Upper bound for `y` of unit-area rectangles,
/// `h(x / (2 pi^2))` with
/// `h(t) = 90 / (pi^2 t (11 + 15t - 22t^2 + (22t - 15) sqrt(t^2 - 1)))`.
///
/// A rectangle of area one with `lambda1 = x` has sides `a <= b` with
/// `a^2 + b^2 = 2t`; inserting `a^2 = t - sqrt(t^2 - 1)` into the lower
/// bound `T >= a^3 b / 12 - 11 a^4 / 180` gives this curve.
pub fn rect_curve(x: f64) -> Result<f64> {
    let t0 = 2.0 * PI * PI;
    if !(x.is_finite() && x >= t0 * (1.0 - EDGE)) {
        return Err(domain(format!("rectangle curve needs x >= 2 pi^2, got {x}")));
    }
    let t = (x / t0).max(1.0);
    let s = (t * t - 1.0).sqrt();
    Ok(90.0 / (PI * PI * t * (11.0 + 15.0 * t - 22.0 * t * t + (22.0 * t - 15.0) * s)))
}

// Families -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    TwoDisks,
    Rectangles,
    OmegaN,
    RasterGrid,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::TwoDisks => "two_disks",
            Family::Rectangles => "rectangles",
            Family::OmegaN => "omega_n",
            Family::RasterGrid => "raster_grid",
        }
    }

    pub const ALL: [Family; 4] = [Family::TwoDisks, Family::Rectangles, Family::OmegaN, Family::RasterGrid];
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::Parse(format!("unknown family `{s}`")))
    }
}

/// Knobs for [`sample_family`].
#[derive(Debug, Clone)]
pub struct SampleOptions {
    /// Largest side ratio `b/a` of the rectangle sweep.
    pub max_aspect: f64,
    /// Shapes solved by finite differences in the raster family.
    pub raster_shapes: Vec<Shape>,
    /// Grid spacing as a fraction of `sqrt(|Omega|)` for raster shapes.
    pub raster_resolution: f64,
    /// Emit raw natural-scale points (rasters only; the other families are
    /// built at measure one) and skip the hard-bound checks.
    pub raw: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            max_aspect: 16.0,
            raster_shapes: default_raster_shapes(),
            raster_resolution: 1.0 / 32.0,
            raw: false,
        }
    }
}

/// Ten planar shapes used wherever a raster corpus is needed.
pub fn default_raster_shapes() -> Vec<Shape> {
    let b = |r: f64| Shape::ball(2, r).expect("valid radius");
    let r = |a: f64, c: f64| Shape::rect(a, c).expect("valid sides");
    let u = |p: Vec<Shape>| Shape::union(p).expect("planar parts");
    vec![
        b(0.5),
        r(1.0, 1.0),
        r(0.5, 2.0),
        r(0.25, 4.0),
        r(0.6, 1.0),
        u(vec![b(0.4), b(0.4)]),
        u(vec![b(0.5), b(0.3)]),
        u(vec![b(0.3), b(0.3), b(0.3)]),
        u(vec![b(0.4), r(0.7, 0.7)]),
        u(vec![r(0.5, 0.5), r(0.3, 1.2)]),
    ]
}

fn two_disk_point(s: f64) -> Result<DiagramPoint> {
    let x = disk_x() * (1.0 + s);
    let shape = two_disk_union(x)?;
    let summary = exact::summary(&shape, 1e-12)?;
    let ratio = match &shape {
        Shape::Union { parts } => match (&parts[0], &parts[1]) {
            (Shape::Ball { r: big, .. }, Shape::Ball { r: small, .. }) => small / big,
            _ => 0.0,
        },
        _ => 0.0,
    };
    Ok(to_xy(&summary)?.tagged(Family::TwoDisks.tag(), vec![s, ratio]))
}

fn rectangle_point(aspect: f64) -> Result<DiagramPoint> {
    let a = aspect.powf(-0.5);
    let summary = exact::summary(&Shape::rect(a, 1.0 / a)?, 1e-12)?;
    Ok(to_xy(&summary)?.tagged(Family::Rectangles.tag(), vec![aspect, 0.0]))
}

fn omega_n_point(n: u32) -> Result<DiagramPoint> {
    Ok(to_xy(&exact::omega_n_summary(n, 2)?)?.tagged(Family::OmegaN.tag(), vec![f64::from(n), 0.0]))
}

fn raster_point(index: usize, shape: &Shape, opts: &SampleOptions) -> Result<DiagramPoint> {
    let h = shape.measure().sqrt() * opts.raster_resolution;
    let summary = fd::fd_summary(shape, h, true)?;
    let point = if opts.raw { to_xy_raw(&summary) } else { to_xy(&normalize_summary(&summary)?)? };
    Ok(point.tagged(Family::RasterGrid.tag(), vec![index as f64, h]))
}

fn sweep(n: usize) -> Vec<f64> {
    match n {
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Samples one family, sorted by parameters.
///
/// `two_disks` sweeps `x` evenly over `[pi j^2, 2 pi j^2]` (`param1` is the
/// position in `[0, 1]`, `param2 = r/R`); `rectangles` sweeps the side ratio
/// geometrically over `[1, max_aspect]`; `omega_n` takes `n = 1..=n_points`;
/// `raster_grid` solves the first `n_points` configured shapes by
/// refined finite differences. Unless `raw` is set, every point is checked
/// against the hard bounds and a violation aborts the sweep.
pub fn sample_family(family: Family, n_points: usize, opts: &SampleOptions) -> Result<Vec<DiagramPoint>> {
    if n_points == 0 {
        return Err(domain("n_points must be at least 1"));
    }
    let mut points: Vec<DiagramPoint> = match family {
        Family::TwoDisks => sweep(n_points).into_par_iter().map(two_disk_point).collect::<Result<_>>()?,
        Family::Rectangles => {
            if !(opts.max_aspect >= 1.0 && opts.max_aspect.is_finite()) {
                return Err(domain(format!("max aspect must be >= 1, got {}", opts.max_aspect)));
            }
            sweep(n_points)
                .into_par_iter()
                .map(|s| rectangle_point(opts.max_aspect.powf(s)))
                .collect::<Result<_>>()?
        }
        Family::OmegaN => {
            let top = u32::try_from(n_points).map_err(|_| domain("too many omega_n points"))?;
            (1..=top).into_par_iter().map(omega_n_point).collect::<Result<_>>()?
        }
        Family::RasterGrid => opts
            .raster_shapes
            .par_iter()
            .take(n_points)
            .enumerate()
            .map(|(i, s)| raster_point(i, s, opts))
            .collect::<Result<_>>()?,
    };
    points.sort_by(|p, q| {
        p.params
            .iter()
            .zip(&q.params)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if !opts.raw {
        for p in &points {
            p.check_hard_bounds()?;
        }
    }
    Ok(points)
}

/// Observations relevant to the conjectured floor `y >= 12/pi^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub points: usize,
    pub min_y: f64,
    pub max_efficiency: f64,
    pub floor: f64,
    pub consistent: bool,
}

/// Summarizes how close sampled points come to the conjectured floor.
/// `consistent` means no point lies below `12/pi^2` by more than `tol`
/// (relative); this is an observation, not a check.
pub fn conjecture_monitor(points: &[DiagramPoint], tol: f64) -> ConjectureReport {
    let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let floor = conjectured_floor();
    ConjectureReport {
        points: points.len(),
        min_y,
        max_efficiency: 1.0 / min_y,
        floor,
        consistent: points.iter().all(|p| p.y >= floor * (1.0 - tol - p.err)),
    }
}

/// Whether the upward vertical segment from each point to the
/// Kohler-Jobin line stays inside the hard bounds, i.e. every point lies
/// on or below that line. Returns the number of inconsistent points.
pub fn vertical_convexity_report(points: &[DiagramPoint]) -> usize {
    points
        .iter()
        .filter(|p| p.y > kohler_jobin_slope() * p.x * (1.0 + p.err + EDGE))
        .count()
}

// Scalarization --------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    BelowThreshold,
    AboveThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarizationResult {
    pub coefficient: f64,
    pub regime: Regime,
    pub minimizer: Shape,
    pub value: f64,
    pub threshold: f64,
}

fn check_scalar_inputs(c: f64, d: u32) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain(format!("coefficient must be positive, got {c}")));
    }
    if !(2..=30).contains(&d) {
        return Err(domain(format!("dimension must be in 2..=30, got {d}")));
    }
    Ok(())
}

/// `k*_d = 1 / (2 d omega_d^{4/d} j^2)`.
pub fn k_threshold(d: u32) -> Result<f64> {
    check_scalar_inputs(1.0, d)?;
    let df = f64::from(d);
    Ok(1.0 / (2.0 * df * ball_volume_unchecked(d).powf(4.0 / df) * ball_mode_sq(d)))
}

/// `l*_d = 1 / (2 d (2 omega_d)^{4/d} j^2)`.
pub fn l_threshold(d: u32) -> Result<f64> {
    check_scalar_inputs(1.0, d)?;
    let df = f64::from(d);
    Ok(1.0 / (2.0 * df * (2.0 * ball_volume_unchecked(d)).powf(4.0 / df) * ball_mode_sq(d)))
}

/// `R_k = (2 k d j^2 / omega_d)^{1/(d+4)}`, the unconstrained optimal radius.
pub fn k_radius(k: f64, d: u32) -> Result<f64> {
    check_scalar_inputs(k, d)?;
    let df = f64::from(d);
    Ok((2.0 * k * df * ball_mode_sq(d) / ball_volume_unchecked(d)).powf(1.0 / (df + 4.0)))
}

/// `R_l = (l d j^2 / omega_d)^{1/(d+4)}`.
pub fn l_radius(l: f64, d: u32) -> Result<f64> {
    check_scalar_inputs(l, d)?;
    let df = f64::from(d);
    Ok((l * df * ball_mode_sq(d) / ball_volume_unchecked(d)).powf(1.0 / (df + 4.0)))
}

/// Predicted minimizer of `k lambda1 + T` over `|Omega| <= 1`: the ball of
/// radius `R_k` up to the threshold, the unit-measure ball beyond it.
pub fn scalarize_k_predict(k: f64, d: u32) -> Result<ScalarizationResult> {
    let threshold = k_threshold(d)?;
    check_scalar_inputs(k, d)?;
    let (regime, minimizer) = if k <= threshold {
        (Regime::BelowThreshold, Shape::ball(d, k_radius(k, d)?)?)
    } else {
        (Regime::AboveThreshold, Shape::ball_with_measure(d, 1.0)?)
    };
    let r = match minimizer {
        Shape::Ball { r, .. } => r,
        _ => unreachable!("ball minimizer"),
    };
    let value = k * exact::ball_lambda1(d, r)? + exact::ball_torsion(d, r)?;
    Ok(ScalarizationResult { coefficient: k, regime, minimizer, value, threshold })
}

/// Predicted minimizer of `l lambda2 + T` over `|Omega| <= 1`: two equal
/// disjoint balls of radius `R_l` up to the threshold, two balls of
/// measure `1/2` beyond it.
pub fn scalarize_l_predict(l: f64, d: u32) -> Result<ScalarizationResult> {
    let threshold = l_threshold(d)?;
    check_scalar_inputs(l, d)?;
    let (regime, ball) = if l <= threshold {
        (Regime::BelowThreshold, Shape::ball(d, l_radius(l, d)?)?)
    } else {
        (Regime::AboveThreshold, Shape::ball_with_measure(d, 0.5)?)
    };
    let r = match ball {
        Shape::Ball { r, .. } => r,
        _ => unreachable!("ball minimizer"),
    };
    let value = l * exact::ball_lambda1(d, r)? + 2.0 * exact::ball_torsion(d, r)?;
    let minimizer = Shape::union(vec![ball.clone(), ball])?;
    Ok(ScalarizationResult { coefficient: l, regime, minimizer, value, threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenIndex {
    First,
    Second,
}

/// Candidate of the brute-force search, kept in closed-form parameters
/// until the end.
#[derive(Debug, Clone, Copy)]
enum Candidate {
    Ball { r: f64 },
    TwoBalls { big: f64, small: f64 },
    Rect { a: f64, b: f64 },
}

impl Candidate {
    fn shape(self, d: u32) -> Result<Shape> {
        match self {
            Candidate::Ball { r } => Shape::ball(d, r),
            Candidate::TwoBalls { big, small } => Shape::union(vec![Shape::ball(d, big)?, Shape::ball(d, small)?]),
            Candidate::Rect { a, b } => Shape::rect(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    value: f64,
    measure: f64,
    tag: &'static str,
    cand: Candidate,
}

/// Smaller value first; near-ties go to the smaller measure, then the
/// lexicographically smaller shape tag.
fn better(a: &Scored, b: &Scored) -> bool {
    let scale = a.value.abs().max(b.value.abs());
    if (a.value - b.value).abs() > 1e-13 * scale {
        return a.value < b.value;
    }
    if (a.measure - b.measure).abs() > 1e-13 {
        return a.measure < b.measure;
    }
    a.tag < b.tag
}

fn best_of(items: impl Iterator<Item = Scored>) -> Option<Scored> {
    items.fold(None, |acc: Option<Scored>, s| match acc {
        Some(a) if !better(&s, &a) => Some(a),
        _ => Some(s),
    })
}

/// Grid search over a box of parameters with `passes` zoom rounds.
/// Each axis is sampled at `n` evenly spaced points including both ends;
/// the next round shrinks to the two neighbouring cells of the best point.
fn zoom_search(
    mut bounds: Vec<(f64, f64)>,
    n: usize,
    passes: usize,
    eval: &(dyn Fn(&[f64]) -> Option<Scored> + Sync),
) -> Option<Scored> {
    let mut best: Option<Scored> = None;
    let dims = bounds.len();
    for _ in 0..passes {
        let total = n.pow(dims as u32);
        let point = |idx: usize| -> Vec<f64> {
            let mut rest = idx;
            bounds
                .iter()
                .map(|&(lo, hi)| {
                    let i = rest % n;
                    rest /= n;
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                })
                .collect()
        };
        let round = (0..total)
            .into_par_iter()
            .filter_map(|idx| eval(&point(idx)).map(|s| (idx, s)))
            .reduce_with(|a, b| if better(&b.1, &a.1) { b } else { a });
        let Some((idx, s)) = round else { break };
        if best.is_none_or(|b| better(&s, &b)) {
            best = Some(s);
        }
        let centre = point(idx);
        bounds = bounds
            .iter()
            .zip(centre)
            .map(|(&(lo, hi), c)| {
                let step = (hi - lo) / (n - 1) as f64;
                ((c - step).max(lo), (c + step).min(hi))
            })
            .collect();
    }
    best
}

/// Brute-force minimum of `coefficient * lambda_i + T` over `|Omega| <= 1`.
///
/// Families: single balls of radius in `(0, omega_d^{-1/d}]`; pairs of
/// disjoint balls parametrized by total measure `m in (0, 1]` and small
/// fraction `f in (0, 1/2]`; in the plane also rectangles by side ratio
/// and measure. Each family is searched on a `grid_density` grid per axis
/// followed by three zoom rounds. The search is non-exhaustive by nature.
pub fn scalarize_brute(coefficient: f64, index: EigenIndex, d: u32, grid_density: usize) -> Result<(Shape, f64)> {
    check_scalar_inputs(coefficient, d)?;
    if grid_density < 3 {
        return Err(domain(format!("grid density must be at least 3, got {grid_density}")));
    }
    const PASSES: usize = 4;
    let df = f64::from(d);
    let omega = ball_volume_unchecked(d);
    let j1 = ball_mode_sq(d);
    let j2 = ball_second_mode_sq(d);
    let ball_t = move |r: f64| omega * r.powf(df + 2.0) / (df * (df + 2.0));
    let radius = move |m: f64| (m / omega).powf(1.0 / df);
    let r_max = radius(1.0);
    let c = coefficient;

    let ball = move |p: &[f64]| -> Option<Scored> {
        let r = p[0];
        (r > 0.0).then(|| {
            let lam = match index {
                EigenIndex::First => j1 / (r * r),
                EigenIndex::Second => j2 / (r * r),
            };
            Scored { value: c * lam + ball_t(r), measure: omega * r.powf(df), tag: "ball", cand: Candidate::Ball { r } }
        })
    };
    let two = move |p: &[f64]| -> Option<Scored> {
        let (m, f) = (p[0], p[1]);
        (m > 0.0 && f > 0.0).then(|| {
            let (big, small) = (radius(m * (1.0 - f)), radius(m * f));
            let lam = match index {
                EigenIndex::First => j1 / (big * big),
                EigenIndex::Second => (j2 / (big * big)).min(j1 / (small * small)),
            };
            Scored {
                value: c * lam + ball_t(big) + ball_t(small),
                measure: m,
                tag: "union",
                cand: Candidate::TwoBalls { big, small },
            }
        })
    };
    let n = grid_density;
    let mut found = vec![
        zoom_search(vec![(0.0, r_max)], n, PASSES, &ball),
        zoom_search(vec![(0.0, 1.0), (0.0, 0.5)], n.min(400), PASSES, &two),
    ];
    if d == 2 {
        found.push(rectangle_search(c, index, n)?);
    }
    let best = best_of(found.into_iter().flatten()).ok_or_else(|| Error::Numeric("empty search".into()))?;
    Ok((best.cand.shape(d)?, best.value))
}

/// Rectangles of side ratio `rho in [1, 20]` and measure `m in (0, 1]`:
/// `lambda = lambda(rho) / m` and `T = m^2 T(rho)` from one series
/// evaluation per ratio.
fn rectangle_search(c: f64, index: EigenIndex, n: usize) -> Result<Option<Scored>> {
    const MAX_RATIO: f64 = 20.0;
    let unit = |rho: f64| -> Result<(f64, f64, f64)> {
        let a = rho.powf(-0.5);
        let b = 1.0 / a;
        let lam = match index {
            EigenIndex::First => exact::rect_lambda1(a, b)?,
            EigenIndex::Second => exact::rect_lambda2(a, b)?,
        };
        Ok((a, lam, exact::rect_torsion_series(a, b, 1e-12)?.value))
    };
    let mut bounds = (1.0f64, MAX_RATIO);
    let mut best: Option<Scored> = None;
    let ms: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    for _ in 0..3 {
        let rhos: Vec<f64> = (0..n).map(|i| bounds.0 + (bounds.1 - bounds.0) * i as f64 / (n - 1) as f64).collect();
        let units: Vec<(f64, f64, f64)> = rhos.par_iter().map(|&r| unit(r)).collect::<Result<_>>()?;
        let mut round: Option<(usize, Scored)> = None;
        for (i, &(a, lam, t)) in units.iter().enumerate() {
            // the measure optimum for this ratio, clamped to the constraint,
            // plus the grid values around it
            let m_opt = (c * lam / (2.0 * t)).cbrt().min(1.0);
            for m in ms.iter().copied().chain([m_opt]) {
                let s = m.sqrt();
                let cand = Scored {
                    value: c * lam / m + t * m * m,
                    measure: m,
                    tag: "rect",
                    cand: Candidate::Rect { a: a * s, b: s / a },
                };
                if round.is_none_or(|(_, r)| better(&cand, &r)) {
                    round = Some((i, cand));
                }
            }
        }
        let Some((i, s)) = round else { break };
        if best.is_none_or(|b| better(&s, &b)) {
            best = Some(s);
        }
        let step = (bounds.1 - bounds.0) / (n - 1) as f64;
        bounds = ((rhos[i] - step).max(1.0), (rhos[i] + step).min(MAX_RATIO));
    }
    Ok(best)
}

// CSV output -------------------------------------------------------------

/// `v` rounded to 12 significant digits, printed without trailing noise.
pub fn fmt_sig(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("float formatting round-trips");
    rounded.to_string()
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Numeric(format!("csv output failed: {other:?}")),
    }
}

/// Writes `family,param1,param2,x,y,err`.
pub fn write_points_csv<W: Write>(out: W, points: &[DiagramPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "param1", "param2", "x", "y", "err"]).map_err(csv_error)?;
    for p in points {
        let param = |i: usize| p.params.get(i).map(|v| fmt_sig(*v)).unwrap_or_default();
        w.write_record([p.family.clone(), param(0), param(1), fmt_sig(p.x), fmt_sig(p.y), fmt_sig(p.err)])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the bound-curve table; `None` where a curve is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub x: f64,
    pub y_low: f64,
    pub y_high: f64,
    pub y_conjectured: f64,
    pub two_disk: Option<f64>,
    pub rect_bound: Option<f64>,
}

/// Bound curves at `n` evenly spaced `x` in `[pi j^2, x_max]`.
pub fn bound_rows(n: usize, x_max: f64) -> Result<Vec<BoundRow>> {
    if n < 2 || !(x_max > disk_x()) {
        return Err(domain(format!("need n >= 2 and x_max > {}", disk_x())));
    }
    (0..n)
        .map(|i| {
            let x = disk_x() + (x_max - disk_x()) * i as f64 / (n - 1) as f64;
            let (y_low, y_high, y_conjectured) = region_bounds(x)?;
            Ok(BoundRow {
                x,
                y_low,
                y_high,
                y_conjectured,
                two_disk: two_disk_curve(x).ok(),
                rect_bound: rect_curve(x).ok(),
            })
        })
        .collect()
}

/// Writes `x,y_low,y_high,y_conjectured,two_disk,rect_bound`.
pub fn write_bounds_csv<W: Write>(out: W, rows: &[BoundRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y_low", "y_high", "y_conjectured", "two_disk", "rect_bound"]).map_err(csv_error)?;
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt_sig(r.x),
            fmt_sig(r.y_low),
            fmt_sig(r.y_high),
            fmt_sig(r.y_conjectured),
            opt(r.two_disk),
            opt(r.rect_bound),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
