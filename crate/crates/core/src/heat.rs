//! Heat content of intervals and boxes, torsion as the time integral of
//! heat content, and the torsion bounds and eigenvalue-sum inequalities
//! that follow from heat-kernel arguments.
//!
//! For a product `M = M1 x M2` the heat content factorizes,
//! `Q_M(t) = Q_M1(t) Q_M2(t)`, and `T(M) = int_0^inf Q_M(t) dt`. Every
//! computation here reduces to intervals and their products.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::quad::adaptive_simpson;
use crate::specfun::{ball_volume_unchecked, bessel_zeros, gamma_pos, BesselOrder};

/// Heat content `Q_(0,a)(t)` of an interval, to absolute accuracy `tol`.
///
/// For `t >= a^2/(2 pi)` the eigenfunction series
/// `8a/pi^2 sum_{k odd} k^-2 exp(-t pi^2 k^2/a^2)` is summed until its
/// geometric tail bound drops below `tol`. Shorter times use the
/// image-charge form `a - 4 sqrt(t/pi) - 8/sqrt(pi) sum_k g_k(t)`, whose
/// terms decay like `exp(-k^2 a^2/(4t))`; both forms agree identically.
pub fn q_interval(a: f64, t: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(domain(format!("interval length must be positive, got {a}")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(domain(format!("time must be finite and >= 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    Ok(q_interval_raw(a, t, tol))
}

pub(crate) fn q_interval_raw(a: f64, t: f64, tol: f64) -> f64 {
    if t == 0.0 {
        return a;
    }
    if t >= a * a / (2.0 * PI) {
        q_eigen_series(a, t, tol)
    } else {
        q_image_series(a, t, tol)
    }
}

fn q_eigen_series(a: f64, t: f64, tol: f64) -> f64 {
    let pref = 8.0 * a / (PI * PI);
    let rate = t * PI * PI / (a * a);
    let mut sum = 0.0;
    let mut k = 1.0f64;
    loop {
        sum += (-rate * k * k).exp() / (k * k);
        let next = k + 2.0;
        let next_term = (-rate * next * next).exp() / (next * next);
        // later ratios are at most exp(-rate ((next+2)^2 - next^2))
        let ratio = (-rate * (4.0 * next + 4.0)).exp();
        if pref * next_term / (1.0 - ratio) <= tol || next_term == 0.0 {
            break;
        }
        k = next;
    }
    pref * sum
}

fn q_image_series(a: f64, t: f64, tol: f64) -> f64 {
    let st = t.sqrt();
    let spi = PI.sqrt();
    let mut corr = 0.0;
    let mut k = 1.0f64;
    loop {
        let ka = k * a;
        let g = 2.0 * st * (-ka * ka / t).exp() - 2.0 * spi * ka * libm::erfc(ka / st) - st * (-ka * ka / (4.0 * t)).exp()
            + 0.5 * spi * ka * libm::erfc(ka / (2.0 * st));
        corr += g;
        // |g_k| <= 8 sqrt(t) exp(-k^2 a^2 / (4t)); successive bounds shrink by
        // more than a factor exp(-3a^2/(4t)) < 1/2 here
        let next = (k + 1.0) * a;
        let bound = 8.0 / spi * 8.0 * st * (-next * next / (4.0 * t)).exp();
        if 2.0 * bound <= tol {
            break;
        }
        k += 1.0;
    }
    a - 4.0 * (t / PI).sqrt() - 8.0 / spi * corr
}

/// Heat content of a box `(0, s_1) x ... x (0, s_n)` as the product of
/// interval heat contents.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatContentCurve {
    sides: Vec<f64>,
}

impl HeatContentCurve {
    pub fn new(sides: Vec<f64>) -> Result<Self> {
        if sides.is_empty() || sides.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(domain("box sides must be a non-empty list of positive lengths"));
        }
        Ok(HeatContentCurve { sides })
    }

    pub fn interval(a: f64) -> Result<Self> {
        Self::new(vec![a])
    }

    /// `Q(t)`, each factor accurate to `1e-16` of its length.
    pub fn eval(&self, t: f64) -> f64 {
        self.sides.iter().map(|&s| q_interval_raw(s, t, 1e-16 * s)).product()
    }

    pub fn measure(&self) -> f64 {
        self.sides.iter().product()
    }

    pub fn lambda1(&self) -> f64 {
        self.sides.iter().map(|s| PI * PI / (s * s)).sum()
    }

    /// `Q(t) <= exp(-t lambda1) |M|`.
    pub fn envelope(&self, t: f64) -> f64 {
        (-t * self.lambda1()).exp() * self.measure()
    }

    /// `int_0^inf Q(t) dt` to relative accuracy `tol`.
    ///
    /// The integral is cut at `t_max` where the envelope tail
    /// `|M| exp(-t_max lambda1) / lambda1` is below half the error budget;
    /// `[0, t_max]` is integrated in `s = sqrt(t)`, which removes the
    /// `sqrt(t)` behaviour of `Q` near zero.
    pub fn time_integral(&self, tol: f64) -> Result<f64> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(domain(format!("tolerance must be positive, got {tol}")));
        }
        let shortest = self.sides.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = shortest.powi(3) / 12.0 * self.measure() / shortest;
        // torsion of a box is never below a twentieth of this upper bound
        // for the dimensions handled here
        let budget = tol * 0.05 * upper;
        let lam = self.lambda1();
        let t_max = ((2.0 * self.measure() / (lam * budget)).ln() / lam).max(0.0);
        let s_max = t_max.sqrt();
        adaptive_simpson(|s| 2.0 * s * self.eval(s * s), 0.0, s_max, 0.5 * budget)
    }
}

/// Torsional rigidity of a box from its heat content.
pub fn torsion_box_via_heat(sides: &[f64], tol: f64) -> Result<f64> {
    HeatContentCurve::new(sides.to_vec())?.time_integral(tol)
}

/// `T(R_{a,b}) = int_0^inf Q_(0,a)(t) Q_(0,b)(t) dt`.
pub fn torsion_rect_via_heat(a: f64, b: f64, tol: f64) -> Result<f64> {
    torsion_box_via_heat(&[a, b], tol)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `T(M1 x M2) <= T(M1) |M2|`.
pub fn product_torsion_upper(t1: f64, m2: f64) -> Result<f64> {
    check_positive("T(M1)", t1)?;
    check_positive("|M2|", m2)?;
    Ok(t1 * m2)
}

/// `sqrt(pi) d2 Gamma((d2+1)/2) / Gamma((d2+2)/2)`.
pub fn c_constant(d2: u32) -> Result<f64> {
    if !(1..=30).contains(&d2) {
        return Err(domain(format!("c_constant needs 1 <= d2 <= 30, got {d2}")));
    }
    let d = f64::from(d2);
    Ok(PI.sqrt() * d * gamma_pos((d + 1.0) / 2.0) / gamma_pos((d + 2.0) / 2.0))
}

/// Independent quadrature for [`c_constant`]:
/// `2 d omega_d int_0^inf e^{-t} (4 pi t)^{-d/2} int_0^inf r^d e^{-r^2/(4t)} dr dt`,
/// with `t = v^2` and `r = 2 v s` to remove the endpoint singularity and
/// both ranges cut where the integrand is below `e^{-60}`.
pub fn c_constant_quadrature(d2: u32, tol: f64) -> Result<f64> {
    if !(1..=30).contains(&d2) {
        return Err(domain(format!("c_constant needs 1 <= d2 <= 30, got {d2}")));
    }
    let d = f64::from(d2);
    let inner = adaptive_simpson(|s: f64| s.powf(d) * (-s * s).exp(), 0.0, 8.0 + d.sqrt(), tol * 1e-2)?;
    let outer = adaptive_simpson(
        |v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            let t = v * v;
            // dt = 2v dv and dr = 2v ds
            2.0 * v * (-t).exp() * (4.0 * PI * t).powf(-d / 2.0) * (2.0 * v).powf(d + 1.0) * inner
        },
        0.0,
        (60.0f64 + 10.0 * d).sqrt(),
        tol,
    )?;
    Ok(2.0 * d * ball_volume_unchecked(d2) * outer)
}

/// Lower bound for the torsion of `M1 x M2` with `M2` convex and bounded:
///
/// `T(M1)|M2| - C_{d2} lambda1(M1)^{-3/2} |M1| H^{d2-1}(boundary of M2)`.
///
/// The value may be negative when `M1` is not thin relative to `M2`.
pub fn product_torsion_lower(t1: f64, lambda1_1: f64, m1: f64, d2: u32, m2: f64, surf2: f64) -> Result<f64> {
    check_positive("T(M1)", t1)?;
    check_positive("lambda1(M1)", lambda1_1)?;
    check_positive("|M1|", m1)?;
    check_positive("|M2|", m2)?;
    check_positive("boundary measure of M2", surf2)?;
    Ok(t1 * m2 - c_constant(d2)? * lambda1_1.powf(-1.5) * m1 * surf2)
}

/// `(2/(d+2)) (4 pi d/(d+2))^{d/2}`.
pub fn eigsum_prefactor(d: u32) -> f64 {
    let df = f64::from(d);
    2.0 / (df + 2.0) * (4.0 * PI * df / (df + 2.0)).powf(df / 2.0)
}

/// Lower bound `prefactor * sum_k lambda_k^{-(d+2)/2}` on the torsion,
/// from any ascending prefix of the Dirichlet spectrum.
pub fn eigsum_lower_bound(d: u32, eigenvalues: &[f64]) -> Result<f64> {
    if d == 0 {
        return Err(domain("dimension must be >= 1"));
    }
    if eigenvalues.is_empty() {
        return Err(domain("need at least one eigenvalue"));
    }
    if eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(domain("eigenvalues must be positive and finite"));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("eigenvalues must be given in ascending order"));
    }
    let p = -(f64::from(d) + 2.0) / 2.0;
    Ok(eigsum_prefactor(d) * eigenvalues.iter().map(|l| l.powf(p)).sum::<f64>())
}

/// Lower bound for `T lambda1^{(d+2)/2}` obtained from the eigenvalue-sum
/// bound with two terms and the ball ratio `lambda1(B)/lambda2(B)`.
pub fn ab_bound(d: u32) -> Result<f64> {
    if !(2..=30).contains(&d) {
        return Err(domain(format!("ab_bound needs 2 <= d <= 30, got {d}")));
    }
    let df = f64::from(d);
    let ratio = crate::specfun::ball_mode_sq(d) / crate::specfun::ball_second_mode_sq(d);
    Ok(eigsum_prefactor(d) * gamma_pos(1.0 + df / 2.0) * (1.0 + ratio.powf((df + 2.0) / 2.0)))
}

/// The `count` smallest Dirichlet eigenvalues of the disk of radius `r`,
/// `j_{m,k}^2 / r^2`, with multiplicity two for `m >= 1`.
pub fn disk_eigenvalues(r: f64, count: usize) -> Result<Vec<f64>> {
    check_positive("disk radius", r)?;
    let mut cutoff = 10.0f64;
    loop {
        let mut all = Vec::new();
        let mut m = 0u32;
        loop {
            if f64::from(m) > crate::specfun::MAX_ORDER {
                break;
            }
            let n_guess = (cutoff / PI) as usize + 2;
            let zeros = bessel_zeros(BesselOrder::new(f64::from(m))?, n_guess)?;
            let below: Vec<f64> = zeros.into_iter().filter(|z| *z < cutoff).collect();
            if below.is_empty() {
                break;
            }
            let mult = if m == 0 { 1 } else { 2 };
            for z in below {
                for _ in 0..mult {
                    all.push(z * z);
                }
            }
            m += 1;
        }
        if all.len() >= count {
            all.sort_by(f64::total_cmp);
            all.truncate(count);
            return Ok(all.into_iter().map(|v| v / (r * r)).collect());
        }
        if cutoff >= 60.0 {
            return Err(Error::Numeric(format!("cannot enumerate {count} disk eigenvalues")));
        }
        cutoff *= 1.5;
    }
}
