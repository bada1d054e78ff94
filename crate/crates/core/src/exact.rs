//! Closed forms and series for balls, intervals and rectangles, the
//! disjoint-union rule, the efficiency and Kohler-Jobin functionals, and
//! [`summary`], which dispatches a [`Shape`] to the best available method.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::heat;
use crate::shapes::{Method, Shape, SpectralSummary};
use crate::specfun::{ball_mode_sq, ball_second_mode_sq, ball_volume_unchecked, zeta_int};

fn check_ball(d: u32, r: f64) -> Result<()> {
    if !(1..=30).contains(&d) {
        return Err(domain(format!("ball dimension must be in 1..=30, got {d}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(domain(format!("ball radius must be positive, got {r}")));
    }
    Ok(())
}

fn check_sides(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(domain(format!("rectangle sides must be positive, got ({a}, {b})")));
    }
    Ok(())
}

/// `j_{d/2-1,1}^2 / R^2`.
pub fn ball_lambda1(d: u32, r: f64) -> Result<f64> {
    check_ball(d, r)?;
    Ok(ball_mode_sq(d) / (r * r))
}

/// `j_{d/2,1}^2 / R^2`.
pub fn ball_lambda2(d: u32, r: f64) -> Result<f64> {
    check_ball(d, r)?;
    Ok(ball_second_mode_sq(d) / (r * r))
}

/// `omega_d R^{d+2} / (d (d+2))`.
pub fn ball_torsion(d: u32, r: f64) -> Result<f64> {
    check_ball(d, r)?;
    let df = f64::from(d);
    Ok(ball_volume_unchecked(d) * r.powi(d as i32 + 2) / (df * (df + 2.0)))
}

/// Efficiency `lambda1 T / |B|` of a `d`-ball, `j_{d/2-1,1}^2 / (d (d+2))`.
pub fn alpha(d: u32) -> Result<f64> {
    if !(2..=30).contains(&d) {
        return Err(domain(format!("alpha needs 2 <= d <= 30, got {d}")));
    }
    let df = f64::from(d);
    Ok(ball_mode_sq(d) / (df * (df + 2.0)))
}

pub fn rect_lambda1(a: f64, b: f64) -> Result<f64> {
    check_sides(a, b)?;
    Ok(PI * PI * (1.0 / (a * a) + 1.0 / (b * b)))
}

/// Second eigenvalue: the `(1, 2)` mode along the longer side.
pub fn rect_lambda2(a: f64, b: f64) -> Result<f64> {
    check_sides(a, b)?;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    Ok(PI * PI * (1.0 / (a * a) + 4.0 / (b * b)))
}

#[derive(Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Truncated series value with a rigorous bound on the discarded tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Absolute bound on the truncation error.
    pub err: f64,
}

const SERIES_MAX_K: u64 = 1 << 20;

/// Torsional rigidity of the `a x b` rectangle from the double sine series
///
/// `T = 64ab/pi^6 * sum_{k,l odd} k^-2 l^-2 (k^2/a^2 + l^2/b^2)^-1`.
///
/// The inner sum over `l` is done in closed form with
/// `sum_{l odd} 1/(l^2 + c^2) = pi tanh(pi c/2) / (4c)`, which leaves
///
/// `T = a^3 b/12 - 16 a^4/pi^5 * sum_{k odd} tanh(k pi b/(2a)) / k^5`
///
/// for `a <= b`. The `k` sum is truncated at `K`, doubling until the tail,
/// at most `16 a^4/pi^5 * 1/(8 K^4)` since `tanh <= 1`, falls below
/// `tol * value`.
pub fn rect_torsion_series(a: f64, b: f64, tol: f64) -> Result<SeriesValue> {
    check_sides(a, b)?;
    if !(tol.is_finite() && tol >= 1e-14) {
        return Err(domain(format!("series tolerance must be >= 1e-14, got {tol}")));
    }
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let pref = 16.0 * a.powi(4) / PI.powi(5);
    let lead = a.powi(3) * b / 12.0;
    let term = |k: u64| {
        let kf = k as f64;
        (kf * PI * b / (2.0 * a)).tanh() / kf.powi(5)
    };
    // odd k in (k_done, k_new]; k_done is odd or the start marker -1
    let mut k_done: i64 = -1;
    let mut k_new: i64 = 15;
    let mut terms: Vec<f64> = Vec::new();
    loop {
        terms.extend((k_done + 2..=k_new).step_by(2).map(|k| term(k as u64)));
        // add the smallest terms first
        let mut sum = NeumaierSum::default();
        terms.iter().rev().for_each(|&t| sum.add(t));
        let total = lead - pref * sum.value();
        let kf = k_new as f64;
        let tail = pref / (8.0 * kf.powi(4));
        if total > 0.0 && tail <= tol * total {
            return Ok(SeriesValue { value: total, err: tail });
        }
        if k_new as u64 >= SERIES_MAX_K {
            return Err(Error::Numeric(format!("rectangle torsion series did not reach tol {tol} by K = {k_new}")));
        }
        k_done = k_new;
        k_new = 2 * k_new + 1;
    }
}

/// Lower bound `a^3 b/12 - 11 a^4/180` for `a <= b`.
pub fn rect_torsion_lower(a: f64, b: f64) -> Result<f64> {
    check_sides(a, b)?;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    Ok(a.powi(3) * b / 12.0 - 11.0 * a.powi(4) / 180.0)
}

/// Two-term thin-rectangle expansion `a^3 b/12 - 31 zeta(5) a^4/(2 pi^5)`
/// and the bound `a^5/(15 b)` on its distance from the true torsion.
pub fn rect_torsion_asymptotic(a: f64, b: f64) -> Result<(f64, f64)> {
    check_sides(a, b)?;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let approx = a.powi(3) * b / 12.0 - 31.0 * zeta_int(5)? * a.powi(4) / (2.0 * PI.powi(5));
    Ok((approx, a.powi(5) / (15.0 * b)))
}

/// Summary of a disjoint union from the summaries of its parts.
///
/// Torsion and measure add; `lambda1` is the smallest part eigenvalue and
/// `lambda2` the second-smallest entry of the merged eigenvalue multiset.
/// `lambda2` is left unset when a part without a known `lambda2` could
/// hide an eigenvalue below that candidate.
pub fn union_summary(parts: &[SpectralSummary]) -> Result<SpectralSummary> {
    let Some(first) = parts.first() else {
        return Err(domain("union_summary needs at least one part"));
    };
    if parts.iter().any(|p| p.dim != first.dim) {
        return Err(domain("union parts must share dimension"));
    }
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    let mut eig: Vec<f64> = Vec::with_capacity(2 * parts.len());
    for p in parts {
        eig.push(p.lambda1);
        eig.extend(p.lambda2);
    }
    eig.sort_by(f64::total_cmp);
    let lambda1 = eig[0];
    let candidate = eig[1];
    let hidden = parts.iter().any(|p| p.lambda2.is_none() && p.lambda1 < candidate);
    let lambda2 = (!hidden).then_some(candidate);
    let torsion = parts.iter().map(|p| p.torsion).sum();
    let measure = parts.iter().map(|p| p.measure).sum();
    let method = parts.iter().map(|p| p.method).max().unwrap_or(Method::Exact);
    let err = parts.iter().map(|p| p.err).fold(0.0, f64::max);
    SpectralSummary::new(lambda1, lambda2, torsion, measure, first.dim, method, err)
}

/// `lambda1 T` for the union of one ball of volume `1/n` and `n(n-1)`
/// balls of volume `1/n^2` in `R^d` (total measure 1):
/// `alpha_d (n^{2/d} + n - 1) / n^{1 + 2/d}`.
pub fn omega_n_value(n: u32, d: u32) -> Result<f64> {
    if n == 0 {
        return Err(domain("omega_n needs n >= 1"));
    }
    let nf = f64::from(n);
    let p = 2.0 / f64::from(d);
    Ok(alpha(d)? * (nf.powf(p) + nf - 1.0) / nf.powf(1.0 + p))
}

/// Summary of the same family without materializing the `n^2 - n + 1` parts.
pub fn omega_n_summary(n: u32, d: u32) -> Result<SpectralSummary> {
    let value = omega_n_value(n, d)?;
    let nf = f64::from(n);
    let lambda1 = ball_mode_sq(d) * (ball_volume_unchecked(d) * nf).powf(2.0 / f64::from(d));
    let big = lambda1;
    let small = big * nf.powf(2.0 / f64::from(d));
    // the big ball's own second mode versus the small balls' first mode
    let big_second = ball_second_mode_sq(d) * (ball_volume_unchecked(d) * nf).powf(2.0 / f64::from(d));
    let lambda2 = if n == 1 { big_second } else { big_second.min(small) };
    SpectralSummary::new(lambda1, Some(lambda2), value / lambda1, 1.0, d, Method::Exact, 0.0)
}

/// The same family as an explicit [`Shape::Union`].
pub fn omega_n_union(n: u32, d: u32) -> Result<Shape> {
    if n == 0 {
        return Err(domain("omega_n needs n >= 1"));
    }
    let nf = f64::from(n);
    let mut parts = vec![Shape::ball_with_measure(d, 1.0 / nf)?];
    let small = Shape::ball_with_measure(d, 1.0 / (nf * nf))?;
    parts.extend(std::iter::repeat_n(small, (n * (n - 1)) as usize));
    Shape::union(parts)
}

/// `lambda1 T / |Omega|`, invariant under dilation.
pub fn efficiency(s: &SpectralSummary) -> f64 {
    s.lambda1 * s.torsion / s.measure
}

/// Limit of the efficiency of `omega x B_k(eps)` as `eps -> 0`: the
/// `k`-ball value `alpha_k`, with `k = 1` giving the slab value `pi^2/12`.
pub fn cross_section_f(k: u32) -> Result<f64> {
    match k {
        1 => Ok(PI * PI / 12.0),
        2..=30 => alpha(k),
        _ => Err(domain(format!("cross_section_f needs 1 <= k <= 30, got {k}"))),
    }
}

/// `T lambda1^{(d+2)/2}`, minimized by the ball.
pub fn kohler_jobin_value(s: &SpectralSummary) -> f64 {
    s.torsion * s.lambda1.powf(f64::from(s.dim + 2) / 2.0)
}

/// [`kohler_jobin_value`] of any `d`-ball: `omega_d j^{d+2} / (d (d+2))`.
pub fn kohler_jobin_ball(d: u32) -> Result<f64> {
    Ok(ball_torsion(d, 1.0)? * ball_lambda1(d, 1.0)?.powf(f64::from(d + 2) / 2.0))
}

fn interval_summary(len: f64) -> Result<SpectralSummary> {
    let l1 = PI * PI / (len * len);
    SpectralSummary::new(l1, Some(4.0 * l1), len.powi(3) / 12.0, len, 1, Method::Exact, 0.0)
}

fn box_sides(factors: &[Shape], out: &mut Vec<f64>) -> bool {
    for f in factors {
        match f {
            Shape::Interval { len } => out.push(*len),
            Shape::Rect { a, b } => out.extend([*a, *b]),
            Shape::Product { factors } => {
                if !box_sides(factors, out) {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Spectral summary of a shape by the best available method.
///
/// Balls and intervals are exact; rectangles use the sine series for the
/// torsion; boxes of dimension three or more integrate the product of
/// interval heat contents; `interval x (ball | box)` slabs report the
/// midpoint of the heat-content upper and lower bounds with the half-gap
/// as `err`; unions combine their parts; rasters go through the
/// finite-difference solver at the stored grid spacing.
pub fn summary(s: &Shape, tol: f64) -> Result<SpectralSummary> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    match s {
        Shape::Ball { d, r } => {
            let lambda2 = if *d == 1 { Some(4.0 * ball_lambda1(1, *r)?) } else { Some(ball_lambda2(*d, *r)?) };
            SpectralSummary::new(ball_lambda1(*d, *r)?, lambda2, ball_torsion(*d, *r)?, s.measure(), *d, Method::Exact, 0.0)
        }
        Shape::Interval { len } => interval_summary(*len),
        Shape::Rect { a, b } => rect_summary(*a, *b, tol),
        Shape::Union { parts } => {
            let sums = parts.iter().map(|p| summary(p, tol)).collect::<Result<Vec<_>>>()?;
            union_summary(&sums)
        }
        Shape::Product { factors } => product_summary(factors, tol),
        Shape::Raster(r) => crate::fd::raster_summary(&r.domain),
    }
}

fn rect_summary(a: f64, b: f64, tol: f64) -> Result<SpectralSummary> {
    let t = rect_torsion_series(a, b, tol.max(1e-14))?;
    SpectralSummary::new(
        rect_lambda1(a, b)?,
        Some(rect_lambda2(a, b)?),
        t.value,
        a * b,
        2,
        Method::Series,
        t.err / t.value,
    )
}

fn product_summary(factors: &[Shape], tol: f64) -> Result<SpectralSummary> {
    if factors.len() == 1 {
        return summary(&factors[0], tol);
    }
    let mut sides = Vec::new();
    if box_sides(factors, &mut sides) {
        return box_summary(&sides, tol);
    }
    // interval x convex cross-section
    let (eps, cross) = match factors {
        [Shape::Interval { len }, other] | [other, Shape::Interval { len }] => (*len, other),
        _ => {
            return Err(Error::Unsupported(format!(
                "product of [{}]",
                factors.iter().map(Shape::tag).collect::<Vec<_>>().join(", ")
            )))
        }
    };
    if cross.is_raster() || !matches!(cross, Shape::Ball { .. }) {
        return Err(Error::Unsupported(format!("slab over a {} cross-section", cross.tag())));
    }
    let inner = summary(cross, tol)?;
    let t1 = eps.powi(3) / 12.0;
    let l1 = PI * PI / (eps * eps);
    let m2 = cross.measure();
    let upper = heat::product_torsion_upper(t1, m2)?;
    let lower = heat::product_torsion_lower(t1, l1, eps, cross.dimension(), m2, cross.boundary_measure()?)?;
    if lower <= 0.0 {
        return Err(Error::Unsupported(format!(
            "slab bounds are vacuous for thickness {eps} over this cross-section"
        )));
    }
    let mid = 0.5 * (upper + lower);
    let lambda2 = inner.lambda2.map(|l2| (l1 + l2).min(4.0 * l1 + inner.lambda1));
    SpectralSummary::new(
        l1 + inner.lambda1,
        lambda2,
        mid,
        eps * m2,
        1 + inner.dim,
        Method::HeatQuadrature,
        0.5 * (upper - lower) / mid,
    )
}

fn box_summary(sides: &[f64], tol: f64) -> Result<SpectralSummary> {
    if sides.len() == 2 {
        return rect_summary(sides[0], sides[1], tol);
    }
    let lambda1: f64 = sides.iter().map(|l| PI * PI / (l * l)).sum();
    let longest = sides.iter().copied().fold(0.0, f64::max);
    let lambda2 = lambda1 + 3.0 * PI * PI / (longest * longest);
    let torsion = heat::torsion_box_via_heat(sides, tol)?;
    SpectralSummary::new(
        lambda1,
        Some(lambda2),
        torsion,
        sides.iter().product(),
        sides.len() as u32,
        Method::HeatQuadrature,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{bessel_first_zero, BesselOrder};

    fn j01() -> f64 {
        bessel_first_zero(BesselOrder::new(0.0).unwrap()).unwrap()
    }

    #[test]
    fn ball_eigenvalues() {
        assert!((ball_lambda1(2, 1.0).unwrap() - 5.7832).abs() < 5e-3);
        let r = (1.0 / PI).sqrt();
        assert!((ball_lambda1(2, r).unwrap() - 18.168).abs() < 1e-3);
        assert!((ball_lambda2(2, 1.0).unwrap() - 14.682).abs() < 1e-2);
        let ratio = ball_lambda1(2, 1.0).unwrap() / ball_lambda2(2, 1.0).unwrap();
        assert!((ratio - 0.3939).abs() < 1e-4);
        for d in 1..=30 {
            let q = ball_lambda1(d, 1.4).unwrap() / ball_lambda1(d, 0.7).unwrap();
            assert!((q - 0.25).abs() < 1e-14);
            let q = ball_lambda2(d, 1.4).unwrap() / ball_lambda2(d, 0.7).unwrap();
            assert!((q - 0.25).abs() < 1e-14);
        }
        assert!(ball_lambda1(0, 1.0).is_err());
        assert!(ball_lambda1(2, 0.0).is_err());
    }

    #[test]
    fn interval_as_one_ball() {
        // the 1-ball of radius r is the interval of length 2r
        let r = 0.35;
        let b = summary(&Shape::ball(1, r).unwrap(), 1e-12).unwrap();
        let i = summary(&Shape::interval(2.0 * r).unwrap(), 1e-12).unwrap();
        assert!((b.lambda1 - i.lambda1).abs() < 1e-12 * i.lambda1);
        assert!((b.torsion - i.torsion).abs() < 1e-12 * i.torsion);
        assert!((b.lambda2.unwrap() - i.lambda2.unwrap()).abs() < 1e-12 * i.lambda1);
    }

    #[test]
    fn ball_torsion_values() {
        assert!((ball_torsion(2, 1.0).unwrap() - PI / 8.0).abs() < 1e-15);
        for r in [0.3, 1.0, 2.5] {
            let m = PI * r * r;
            assert!((ball_torsion(2, r).unwrap() - m * m / (8.0 * PI)).abs() < 1e-12 * m * m);
        }
        for d in 1..=30 {
            let q = ball_torsion(d, 1.7).unwrap() / ball_torsion(d, 1.0).unwrap();
            let e = 1.7f64.powi(d as i32 + 2);
            assert!(((q - e) / e).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_reported_values() {
        assert!((alpha(2).unwrap() - 0.723).abs() < 1e-3);
        assert!((alpha(3).unwrap() - 0.658).abs() < 1e-3);
        assert!((alpha(4).unwrap() - 0.612).abs() < 1e-3);
        assert!(alpha(1).is_err());
    }

    #[test]
    fn rectangle_eigenvalues() {
        assert!((rect_lambda1(1.0, 1.0).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        let v = rect_lambda1(0.01, 1000.0).unwrap();
        assert!(((v - PI * PI * 1e4) / v).abs() < 1e-9);
        let q = rect_lambda1(2.0, 6.0).unwrap() / rect_lambda1(1.0, 3.0).unwrap();
        assert!((q - 0.25).abs() < 1e-15);
        assert!((rect_lambda2(1.0, 1.0).unwrap() - 5.0 * PI * PI).abs() < 1e-12);
    }

    /// Plain truncated double series, summed to k,l <= 99.
    fn series_oracle(a: f64, b: f64, kmax: u32) -> f64 {
        let mut s = NeumaierSum::default();
        for k in (1..=kmax).step_by(2) {
            for l in (1..=kmax).step_by(2) {
                let (k, l) = (f64::from(k), f64::from(l));
                s.add(1.0 / (k * k * l * l * (k * k / (a * a) + l * l / (b * b))));
            }
        }
        64.0 * a * b / PI.powi(6) * s.value()
    }

    #[test]
    fn closed_inner_sum_matches_double_series() {
        for (a, b) in [(1.0, 1.0), (0.3, 1.7), (0.5, 4.0)] {
            let direct = series_oracle(a, b, 1999);
            let t = rect_torsion_series(a, b, 1e-13).unwrap();
            // rigorous tail of the square truncation at K = 1999
            let k3 = 1999.0f64.powi(3);
            let oracle_tail = 64.0 * a * b / PI.powi(6) * (PI * PI / 8.0) * (a * a + b * b) / (6.0 * k3);
            assert!(t.value >= direct - t.err, "{a} {b}");
            assert!(t.value - direct <= oracle_tail + t.err + 1e-15, "{a} {b}");
        }
    }

    #[test]
    fn rectangle_series() {
        let oracle = series_oracle(1.0, 1.0, 99);
        let t = rect_torsion_series(1.0, 1.0, 1e-10).unwrap();
        assert!((t.value - 0.03514).abs() < 1e-4);
        assert!((t.value - oracle).abs() < 1e-5);
        assert!(t.err <= 1e-10 * t.value);
        let lo = 1.0 / 12.0 - 31.0 * zeta_int(5).unwrap() / (2.0 * PI.powi(5));
        assert!(t.value >= lo - 1.0 / 15.0 && t.value <= lo + 1.0 / 15.0);
        let thin = rect_torsion_series(0.1, 10.0, 1e-10).unwrap();
        // independent closed form a^3 b/12 - 16 a^4/pi^5 sum tanh(k pi b/2a)/k^5
        assert!((thin.value - 0.000_828_081_259_364).abs() < 1e-13);
        assert!((thin.value - 0.000_828_08).abs() < 7e-8);
        // order of the sides is irrelevant
        let t12 = rect_torsion_series(1.0, 2.0, 1e-10).unwrap().value;
        let t21 = rect_torsion_series(2.0, 1.0, 1e-10).unwrap().value;
        assert_eq!(t12, t21);
        assert!(rect_torsion_series(1.0, 1.0, 1e-16).is_err());
    }

    #[test]
    fn rectangle_lower_and_asymptotic() {
        assert!((rect_torsion_lower(1.0, 1.0).unwrap() - (1.0 / 12.0 - 11.0 / 180.0)).abs() < 1e-15);
        let v = rect_torsion_lower(0.1, 10.0).unwrap();
        assert!((v - (0.1f64.powi(3) * 10.0 / 12.0 - 11e-4 / 180.0)).abs() < 1e-15);
        assert!((v - 0.000827).abs() < 1e-6);
        let (approx, bound) = rect_torsion_asymptotic(1.0, 1.0).unwrap();
        assert!((approx - 0.030_812_593_643).abs() < 1e-11);
        assert!((bound - 1.0 / 15.0).abs() < 1e-15);
        let (approx, bound) = rect_torsion_asymptotic(0.1, 10.0).unwrap();
        assert!((approx - 0.000_828_08).abs() < 1e-8);
        assert!((bound - 6.666_666_666_666_667e-8).abs() < 1e-20);
    }

    #[test]
    fn equal_balls_union() {
        let b = summary(&Shape::ball(2, 0.4).unwrap(), 1e-12).unwrap();
        let u = union_summary(&[b.clone(), b.clone()]).unwrap();
        assert_eq!(u.lambda2, Some(b.lambda1));
        assert!((u.torsion - 2.0 * b.torsion).abs() < 1e-15);
        assert_eq!(union_summary(std::slice::from_ref(&b)).unwrap(), b);
        assert!(union_summary(&[]).is_err());
    }

    #[test]
    fn two_disk_union_formula() {
        for big in [0.5, 0.6, 0.8, 0.95] {
            let r_big = (big / PI).sqrt();
            let r_small = ((1.0 - big) / PI).sqrt();
            let s = summary(
                &Shape::union(vec![Shape::ball(2, r_big).unwrap(), Shape::ball(2, r_small).unwrap()]).unwrap(),
                1e-12,
            )
            .unwrap();
            let j = j01();
            assert!((s.lambda1 - j * j / (r_big * r_big)).abs() < 1e-12 * s.lambda1);
            let r2 = r_big * r_big;
            let t = (2.0 * PI * PI * r2 * r2 - 2.0 * PI * r2 + 1.0) / (8.0 * PI);
            assert!((s.torsion - t).abs() < 1e-14);
        }
    }

    #[test]
    fn union_lambda2_hidden_by_unknown_part() {
        let a = SpectralSummary::new(1.0, None, 0.1, 1.0, 2, Method::Exact, 0.0).unwrap();
        let b = SpectralSummary::new(3.0, Some(4.0), 0.1, 1.0, 2, Method::Exact, 0.0).unwrap();
        assert_eq!(union_summary(&[a.clone(), b.clone()]).unwrap().lambda2, None);
        let c = SpectralSummary::new(0.5, Some(0.9), 0.1, 1.0, 2, Method::Series, 0.0).unwrap();
        let u = union_summary(&[a, c]).unwrap();
        assert_eq!(u.lambda2, Some(0.9));
        assert_eq!(u.method, Method::Series);
    }

    #[test]
    fn omega_n_family() {
        for d in 2..=6 {
            let s1 = summary(&Shape::ball_with_measure(d, 1.0).unwrap(), 1e-12).unwrap();
            assert!((omega_n_value(1, d).unwrap() - s1.lambda1 * s1.torsion).abs() < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for p in 1..=8 {
            let v = omega_n_value(1 << p, 2).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let u = summary(&omega_n_union(4, 2).unwrap(), 1e-12).unwrap();
        assert!((u.lambda1 * u.torsion - omega_n_value(4, 2).unwrap()).abs() < 1e-12);
        let fast = omega_n_summary(4, 2).unwrap();
        assert!((fast.lambda1 - u.lambda1).abs() < 1e-9);
        assert!((fast.lambda2.unwrap() - u.lambda2.unwrap()).abs() < 1e-9);
        assert!(omega_n_value(0, 2).is_err());
    }

    #[test]
    fn efficiency_values() {
        for d in 2..=10 {
            for r in [0.3, 1.0, 4.0] {
                let s = summary(&Shape::ball(d, r).unwrap(), 1e-12).unwrap();
                assert!((efficiency(&s) - alpha(d).unwrap()).abs() < 1e-10);
            }
        }
        let thin = summary(&Shape::rect(0.02, 1.0).unwrap(), 1e-10).unwrap();
        assert!((efficiency(&thin) - 0.812_424_694_894).abs() < 1e-9);
        assert!(efficiency(&thin) < PI * PI / 12.0);
    }

    #[test]
    fn cross_sections() {
        assert!((cross_section_f(1).unwrap() - 0.8225).abs() < 1e-4);
        assert!((cross_section_f(2).unwrap() - 0.723).abs() < 1e-3);
        for k in 1..=30 {
            assert!(cross_section_f(k).unwrap() <= PI * PI / 12.0 + 1e-15);
        }
        assert!(cross_section_f(0).is_err());
    }

    #[test]
    fn kohler_jobin_disk() {
        let j = j01();
        let expect = PI / 8.0 * j.powi(4);
        assert!((expect - 13.134).abs() < 1e-3);
        for r in [0.2, 1.0, 3.0] {
            let s = summary(&Shape::ball(2, r).unwrap(), 1e-12).unwrap();
            assert!((kohler_jobin_value(&s) - expect).abs() < 1e-10 * expect);
        }
        let sq = summary(&Shape::rect(1.0, 1.0).unwrap(), 1e-12).unwrap();
        assert!(kohler_jobin_value(&sq) > expect);
    }

    #[test]
    fn summaries() {
        let s = summary(&Shape::ball(2, 1.0).unwrap(), 1e-12).unwrap();
        assert!((s.lambda1 - 5.7832).abs() < 1e-4 && (s.torsion - std::f64::consts::FRAC_PI_8).abs() < 1e-12);
        assert_eq!(s.method, Method::Exact);
        let s = summary(&Shape::interval(1.0).unwrap(), 1e-12).unwrap();
        assert!((s.torsion - 1.0 / 12.0).abs() < 1e-15);
        let s = summary(&Shape::rect(1.0, 1.0).unwrap(), 1e-12).unwrap();
        assert!((s.torsion - 0.03514).abs() < 1e-5 && (s.lambda1 - 19.7392).abs() < 1e-4);
        assert_eq!(s.method, Method::Series);
    }

    #[test]
    fn box_product_matches_rectangle() {
        let p = Shape::product(vec![Shape::interval(0.5).unwrap(), Shape::interval(1.5).unwrap()]).unwrap();
        let s = summary(&p, 1e-10).unwrap();
        let r = summary(&Shape::rect(0.5, 1.5).unwrap(), 1e-10).unwrap();
        assert!((s.torsion - r.torsion).abs() < 1e-12);
        let cube = Shape::product(vec![Shape::interval(1.0).unwrap(), Shape::rect(1.0, 1.0).unwrap()]).unwrap();
        let s = summary(&cube, 1e-9).unwrap();
        // unit cube: 512/pi^8 * sum over odd k,l,m of 1/(k^2 l^2 m^2 (k^2+l^2+m^2))
        assert!((s.torsion - 0.020_168_5).abs() < 1e-6, "{}", s.torsion);
        assert_eq!(s.dim, 3);
        assert_eq!(s.method, Method::HeatQuadrature);
    }

    #[test]
    fn slab_over_disk_uses_bounds() {
        let eps = 0.05;
        let s = summary(&Shape::slab(eps, Shape::ball(2, 1.0).unwrap()).unwrap(), 1e-10).unwrap();
        let upper = eps.powi(3) / 12.0 * PI;
        assert!(s.torsion <= upper && s.torsion * (1.0 + s.err) <= upper * (1.0 + 1e-12));
        assert!((s.lambda1 - (PI * PI / (eps * eps) + ball_lambda1(2, 1.0).unwrap())).abs() < 1e-9);
        assert!(efficiency(&s) <= 1.0);
        assert!(summary(&Shape::slab(1.0, Shape::ball(2, 1.0).unwrap()).unwrap(), 1e-10).is_err());
        let two_balls = Shape::product(vec![Shape::ball(2, 1.0).unwrap(), Shape::ball(2, 1.0).unwrap()]).unwrap();
        assert!(matches!(summary(&two_balls, 1e-10), Err(Error::Unsupported(_))));
    }

    #[test]
    fn scaling_laws_for_exact_shapes() {
        let shapes = vec![
            Shape::ball(2, 1.0).unwrap(),
            Shape::ball(5, 0.8).unwrap(),
            Shape::interval(0.6).unwrap(),
            Shape::rect(0.4, 1.3).unwrap(),
            Shape::union(vec![Shape::ball(3, 0.5).unwrap(), Shape::ball(3, 0.2).unwrap()]).unwrap(),
        ];
        for s in &shapes {
            let base = summary(s, 1e-13).unwrap();
            let d = s.dimension() as i32;
            for t in [0.5, 2.0] {
                let sc = summary(&s.scale(t).unwrap(), 1e-13).unwrap();
                assert!(((sc.lambda1 * t * t - base.lambda1) / base.lambda1).abs() < 1e-12);
                let te = t.powi(d + 2);
                assert!(((sc.torsion / te - base.torsion) / base.torsion).abs() < 1e-12);
                let kj = (kohler_jobin_value(&sc) - kohler_jobin_value(&base)) / kohler_jobin_value(&base);
                assert!(kj.abs() < 1e-10);
            }
        }
    }
}
