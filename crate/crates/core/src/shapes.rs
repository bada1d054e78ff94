//! Domain vocabulary: balls, rectangles, intervals, products, disjoint
//! unions and rasterized 2-D masks, together with the per-shape spectral
//! summary record.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fd::RasterDomain;
use crate::specfun::ball_volume_unchecked;

/// A 2-D raster domain together with the file it was loaded from, if any.
#[derive(Debug, Clone)]
pub struct RasterRef {
    pub path: Option<PathBuf>,
    pub domain: Arc<RasterDomain>,
}

impl PartialEq for RasterRef {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }
}

/// Closed vocabulary of domains.
///
/// Build values through the constructors ([`Shape::ball`], [`Shape::rect`],
/// ...), which check positivity and normalize rectangles to `a <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr", into = "ShapeRepr")]
pub enum Shape {
    Ball { d: u32, r: f64 },
    /// Rectangle with sides `a <= b`.
    Rect { a: f64, b: f64 },
    Interval { len: f64 },
    Product { factors: Vec<Shape> },
    Union { parts: Vec<Shape> },
    Raster(RasterRef),
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Shape {
    pub fn ball(d: u32, r: f64) -> Result<Self> {
        if !(1..=30).contains(&d) {
            return Err(domain(format!("ball dimension must be in 1..=30, got {d}")));
        }
        Ok(Shape::Ball { d, r: positive("ball radius", r)? })
    }

    /// Ball in `R^d` with the given measure.
    pub fn ball_with_measure(d: u32, measure: f64) -> Result<Self> {
        let m = positive("ball measure", measure)?;
        Shape::ball(d, (m / ball_volume_unchecked(d.clamp(1, 30))).powf(1.0 / f64::from(d)))
    }

    /// Rectangle; the sides are swapped if needed so that `a <= b`.
    pub fn rect(a: f64, b: f64) -> Result<Self> {
        let a = positive("rect side a", a)?;
        let b = positive("rect side b", b)?;
        Ok(if a <= b { Shape::Rect { a, b } } else { Shape::Rect { a: b, b: a } })
    }

    pub fn interval(len: f64) -> Result<Self> {
        Ok(Shape::Interval { len: positive("interval length", len)? })
    }

    pub fn product(factors: Vec<Shape>) -> Result<Self> {
        if factors.is_empty() {
            return Err(domain("product needs at least one factor"));
        }
        let dim: u32 = factors.iter().map(Shape::dimension).sum();
        if dim > 30 {
            return Err(domain(format!("product dimension {dim} exceeds 30")));
        }
        Ok(Shape::Product { factors })
    }

    pub fn union(parts: Vec<Shape>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(domain("disjoint union needs at least one part"));
        };
        let d = first.dimension();
        if parts.iter().any(|p| p.dimension() != d) {
            return Err(domain("disjoint union parts must share the ambient dimension"));
        }
        Ok(Shape::Union { parts })
    }

    pub fn raster(domain: RasterDomain, path: Option<PathBuf>) -> Self {
        Shape::Raster(RasterRef { path, domain: Arc::new(domain) })
    }

    /// Slab `(0, eps) x omega`.
    pub fn slab(eps: f64, cross_section: Shape) -> Result<Self> {
        Shape::product(vec![Shape::interval(eps)?, cross_section])
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        match self {
            Shape::Ball { d, r } => ball_volume_unchecked(*d) * r.powi(*d as i32),
            Shape::Rect { a, b } => a * b,
            Shape::Interval { len } => *len,
            Shape::Product { factors } => factors.iter().map(Shape::measure).product(),
            Shape::Union { parts } => parts.iter().map(Shape::measure).sum(),
            Shape::Raster(r) => r.domain.measure(),
        }
    }

    /// Ambient dimension.
    pub fn dimension(&self) -> u32 {
        match self {
            Shape::Ball { d, .. } => *d,
            Shape::Rect { .. } | Shape::Raster(_) => 2,
            Shape::Interval { .. } => 1,
            Shape::Product { factors } => factors.iter().map(Shape::dimension).sum(),
            Shape::Union { parts } => parts[0].dimension(),
        }
    }

    /// Dilation by `t > 0`. Rasters must be re-rasterized instead.
    pub fn scale(&self, t: f64) -> Result<Shape> {
        positive("scale factor", t)?;
        Ok(match self {
            Shape::Ball { d, r } => Shape::Ball { d: *d, r: r * t },
            Shape::Rect { a, b } => Shape::Rect { a: a * t, b: b * t },
            Shape::Interval { len } => Shape::Interval { len: len * t },
            Shape::Product { factors } => Shape::Product {
                factors: factors.iter().map(|f| f.scale(t)).collect::<Result<_>>()?,
            },
            Shape::Union { parts } => Shape::Union {
                parts: parts.iter().map(|p| p.scale(t)).collect::<Result<_>>()?,
            },
            Shape::Raster(_) => {
                return Err(Error::Unsupported("cannot scale a raster shape; re-rasterize instead".into()))
            }
        })
    }

    /// `(d-1)`-dimensional measure of the boundary, for the convex shapes
    /// where it is known in closed form.
    pub fn boundary_measure(&self) -> Result<f64> {
        match self {
            Shape::Ball { d, r } => Ok(f64::from(*d) * ball_volume_unchecked(*d) * r.powi(*d as i32 - 1)),
            Shape::Rect { a, b } => Ok(2.0 * (a + b)),
            Shape::Interval { .. } => Ok(2.0),
            _ => Err(Error::Unsupported(format!("boundary measure of {} shape", self.tag()))),
        }
    }

    /// Short variant name, as used in the JSON encoding.
    pub fn tag(&self) -> &'static str {
        match self {
            Shape::Ball { .. } => "ball",
            Shape::Rect { .. } => "rect",
            Shape::Interval { .. } => "interval",
            Shape::Product { .. } => "product",
            Shape::Union { .. } => "union",
            Shape::Raster(_) => "raster",
        }
    }

    pub fn is_raster(&self) -> bool {
        match self {
            Shape::Raster(_) => true,
            Shape::Product { factors } => factors.iter().any(Shape::is_raster),
            Shape::Union { parts } => parts.iter().any(Shape::is_raster),
            _ => false,
        }
    }

    pub fn from_json(s: &str) -> Result<Shape> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("shape encoding is infallible")
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

/// Wire form of [`Shape`].
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ShapeRepr {
    Ball { d: u32, r: f64 },
    Rect { a: f64, b: f64 },
    Interval { len: f64 },
    Product { factors: Vec<ShapeRepr> },
    Union { parts: Vec<ShapeRepr> },
    Raster { path: PathBuf },
}

impl TryFrom<ShapeRepr> for Shape {
    type Error = Error;

    fn try_from(repr: ShapeRepr) -> Result<Shape> {
        match repr {
            ShapeRepr::Ball { d, r } => Shape::ball(d, r),
            ShapeRepr::Rect { a, b } => Shape::rect(a, b),
            ShapeRepr::Interval { len } => Shape::interval(len),
            ShapeRepr::Product { factors } => {
                Shape::product(factors.into_iter().map(Shape::try_from).collect::<Result<_>>()?)
            }
            ShapeRepr::Union { parts } => {
                Shape::union(parts.into_iter().map(Shape::try_from).collect::<Result<_>>()?)
            }
            ShapeRepr::Raster { path } => {
                let dom = RasterDomain::read_mask_file(&path)?;
                Ok(Shape::raster(dom, Some(path)))
            }
        }
    }
}

impl From<Shape> for ShapeRepr {
    fn from(s: Shape) -> ShapeRepr {
        match s {
            Shape::Ball { d, r } => ShapeRepr::Ball { d, r },
            Shape::Rect { a, b } => ShapeRepr::Rect { a, b },
            Shape::Interval { len } => ShapeRepr::Interval { len },
            Shape::Product { factors } => ShapeRepr::Product { factors: factors.into_iter().map(Into::into).collect() },
            Shape::Union { parts } => ShapeRepr::Union { parts: parts.into_iter().map(Into::into).collect() },
            Shape::Raster(r) => ShapeRepr::Raster { path: r.path.unwrap_or_else(|| PathBuf::from("<memory>")) },
        }
    }
}

/// How a summary was obtained, ordered from strongest to weakest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Series,
    HeatQuadrature,
    FiniteDifference,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Series => "series",
            Method::HeatQuadrature => "heat_quadrature",
            Method::FiniteDifference => "finite_difference",
        })
    }
}

/// First eigenvalues, torsional rigidity and measure of one shape.
///
/// `err` is a relative error estimate shared by all fields. Construction
/// through [`SpectralSummary::new`] rejects `lambda1 * torsion > measure *
/// (1 + err)`, so every checked summary satisfies that bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub lambda1: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda2: Option<f64>,
    pub torsion: f64,
    pub measure: f64,
    pub dim: u32,
    pub method: Method,
    pub err: f64,
}

/// Name of the `lambda1 * T <= |Omega|` check, as it appears in reports.
pub const PRODUCT_BOUND_CHECK: &str = "lambda1*T <= |Omega|";

impl SpectralSummary {
    pub fn new(
        lambda1: f64,
        lambda2: Option<f64>,
        torsion: f64,
        measure: f64,
        dim: u32,
        method: Method,
        err: f64,
    ) -> Result<Self> {
        let s = Self::unchecked(lambda1, lambda2, torsion, measure, dim, method, err);
        s.validate()?;
        Ok(s)
    }

    /// Builds a summary without any checks. Meant for negative tests.
    pub fn unchecked(
        lambda1: f64,
        lambda2: Option<f64>,
        torsion: f64,
        measure: f64,
        dim: u32,
        method: Method,
        err: f64,
    ) -> Self {
        SpectralSummary { lambda1, lambda2, torsion, measure, dim, method, err }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda1", self.lambda1), ("torsion", self.torsion), ("measure", self.measure)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("summary {name} must be positive and finite, got {v}")));
            }
        }
        if !(self.err.is_finite() && self.err >= 0.0) {
            return Err(domain(format!("summary err must be finite and >= 0, got {}", self.err)));
        }
        if let Some(l2) = self.lambda2 {
            if !(l2.is_finite() && l2 >= self.lambda1 * (1.0 - self.err) - 1e-12 * self.lambda1) {
                return Err(domain(format!("lambda2 = {l2} below lambda1 = {}", self.lambda1)));
            }
        }
        let lhs = self.lambda1 * self.torsion;
        let rhs = self.measure * (1.0 + self.err) * (1.0 + 1e-12);
        if lhs > rhs {
            return Err(Error::Violation {
                check: PRODUCT_BOUND_CHECK.into(),
                detail: format!("lambda1*T = {lhs} exceeds |Omega|(1+err) = {rhs}"),
            });
        }
        Ok(())
    }
}
