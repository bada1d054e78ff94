//! Special functions used throughout the crate: Bessel functions of the
//! first kind of real order, their positive zeros, Gamma, `zeta` at
//! integers and unit-ball volumes.
//!
//! Everything works in `f64`; accuracy targets are stated per function.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Largest Bessel order accepted by the public entry points.
pub const MAX_ORDER: f64 = 25.0;
/// Largest argument accepted by [`bessel_j`].
pub const MAX_ARG: f64 = 100.0;

/// Order `nu >= 0` of a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(domain(format!("Bessel order must be finite and >= 0, got {nu}")));
        }
        Ok(BesselOrder(nu))
    }

    /// Order `d/2 - 1` attached to the first Dirichlet eigenvalue of a
    /// `d`-ball, for `d >= 2`.
    pub fn for_ball(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(domain(format!("ball order needs d >= 2, got {d}")));
        }
        Self::new(f64::from(d) / 2.0 - 1.0)
    }

    pub fn nu(self) -> f64 {
        self.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (x - 1 in the usual presentation)
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Gamma function for positive arguments.
///
/// Lanczos approximation (g = 7, nine terms); arguments below 1/2 are
/// shifted up with `Gamma(x) = Gamma(x + 1) / x`. Relative error is
/// below 1e-13 on `[0.5, 50]`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain(format!("gamma_fn needs a positive finite argument, got {x}")));
    }
    Ok(gamma_pos(x))
}

pub(crate) fn gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        return gamma_pos(x + 1.0) / x;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
}

/// `ln Gamma(x)` for `x > 0`, without overflow for large `x`.
pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

// B_2, B_4, ..., B_12
const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// Riemann zeta at an integer `n >= 2`.
///
/// Direct summation of the first terms followed by an Euler-Maclaurin
/// tail; absolute error is at the rounding level.
pub fn zeta_int(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("zeta_int needs n >= 2, got {n}")));
    }
    const N: u32 = 16;
    let s = f64::from(n);
    let nn = f64::from(N);
    // sum the head from the smallest term up
    let mut head = 0.0;
    for k in (1..N).rev() {
        head += f64::from(k).powf(-s);
    }
    let mut tail = nn.powf(1.0 - s) / (s - 1.0) + 0.5 * nn.powf(-s);
    // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let j = j as f64 + 1.0;
        tail += b / fact * rising * nn.powf(-s - 2.0 * j + 1.0);
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    Ok(head + tail)
}

/// Lebesgue measure of the unit ball in `R^d`, `pi^{d/2} / Gamma(1 + d/2)`.
pub fn unit_ball_volume(d: u32) -> Result<f64> {
    if !(1..=30).contains(&d) {
        return Err(domain(format!("unit_ball_volume needs 1 <= d <= 30, got {d}")));
    }
    Ok(ball_volume_unchecked(d))
}

pub(crate) fn ball_volume_unchecked(d: u32) -> f64 {
    let half = f64::from(d) / 2.0;
    PI.powf(half) / gamma_pos(1.0 + half)
}

/// `J_nu(x)` for `0 <= nu <= 25` and `0 <= x <= 100`, absolute error
/// below 1e-10.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    let nu = order.nu();
    if nu > MAX_ORDER {
        return Err(domain(format!("bessel_j order {nu} exceeds {MAX_ORDER}")));
    }
    if !x.is_finite() || !(0.0..=MAX_ARG).contains(&x) {
        return Err(domain(format!("bessel_j argument must lie in [0, {MAX_ARG}], got {x}")));
    }
    Ok(bessel_j_raw(nu, x))
}

// Ascending series when the summed magnitude (roughly I_nu(x)) stays
// small enough not to swamp J_nu: x <= 15, or x <= nu. Otherwise Hankel's
// expansion for the fractional order and its successor, then upward
// recurrence, which is stable while the order stays below x.
const SERIES_LIMIT: f64 = 15.0;

pub(crate) fn bessel_j_raw(nu: f64, x: f64) -> f64 {
    if x <= SERIES_LIMIT || x <= nu {
        return bessel_series(nu, x);
    }
    let steps = nu.floor();
    let mu = nu - steps;
    let mut prev = hankel_j(mu, x);
    if steps == 0.0 {
        return prev;
    }
    let mut cur = hankel_j(mu + 1.0, x);
    let mut m = mu + 1.0;
    while m < nu - 0.5 {
        let next = 2.0 * m / x * cur - prev;
        prev = cur;
        cur = next;
        m += 1.0;
    }
    cur
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let q = half * half;
    let mut term = (nu * half.ln() - ln_gamma_pos(nu + 1.0)).exp();
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= -q / (k * (k + nu));
        sum += term;
        if k > half && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        if term == 0.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Hankel's large-argument expansion; used only for `mu < 2`, `x > 15`,
/// where the smallest term is below 1e-13.
fn hankel_j(mu: f64, x: f64) -> f64 {
    let m4 = 4.0 * mu * mu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = f64::from(2 * k - 1);
            term *= (m4 - odd * odd) / (f64::from(k) * 8.0 * x);
        }
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // a_k / x^k alternates between P (even k) and Q (odd k) with signs
        // (-1)^{k/2} and (-1)^{(k-1)/2}
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * mu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn bessel_j_prime(nu: f64, x: f64) -> f64 {
    nu / x * bessel_j_raw(nu, x) - bessel_j_raw(nu + 1.0, x)
}

const SCAN_STEP: f64 = 0.25;

/// Smallest positive zero `j_{nu,1}` of `J_nu`, absolute error below 1e-10.
///
/// A sign change is bracketed by scanning up from `max(nu, 1)` (the first
/// zero exceeds `nu`), bisected to width 1e-3 and polished with Newton
/// steps kept inside the bracket.
pub fn bessel_first_zero(order: BesselOrder) -> Result<f64> {
    if order.nu() > MAX_ORDER {
        return Err(domain(format!("bessel_first_zero order {} exceeds {MAX_ORDER}", order.nu())));
    }
    Ok(bessel_zeros_raw(order.nu(), 1)[0])
}

/// The first `count` positive zeros of `J_nu` that lie below 100.
///
/// Returns fewer than `count` when the scan runs past the argument range.
pub fn bessel_zeros(order: BesselOrder, count: usize) -> Result<Vec<f64>> {
    if order.nu() > MAX_ORDER {
        return Err(domain(format!("bessel_zeros order {} exceeds {MAX_ORDER}", order.nu())));
    }
    Ok(bessel_zeros_raw(order.nu(), count))
}

fn bessel_zeros_raw(nu: f64, count: usize) -> Vec<f64> {
    let mut zeros = Vec::with_capacity(count);
    let mut lo = nu.max(1.0);
    let mut f_lo = bessel_j_raw(nu, lo);
    while zeros.len() < count {
        let hi = lo + SCAN_STEP;
        if hi > MAX_ARG {
            break;
        }
        let f_hi = bessel_j_raw(nu, hi);
        if f_hi == 0.0 {
            zeros.push(hi);
            lo = hi + 1e-3;
            f_lo = bessel_j_raw(nu, lo);
            continue;
        }
        if f_lo.signum() != f_hi.signum() {
            zeros.push(refine_zero(nu, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    zeros
}

fn refine_zero(nu: f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_sign = f_lo.signum();
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if bessel_j_raw(nu, mid).signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let f = bessel_j_raw(nu, x);
        let step = f / bessel_j_prime(nu, x);
        let mut next = x - step;
        if !(lo..=hi).contains(&next) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if bessel_j_raw(nu, next).signum() == lo_sign {
            lo = lo.max(next.min(hi));
        } else {
            hi = hi.min(next.max(lo));
        }
        let done = (next - x).abs() < 1e-15 * x.max(1.0);
        x = next;
        if done {
            break;
        }
    }
    x
}

/// `j_{d/2-1,1}^2`, the first Dirichlet eigenvalue of the unit `d`-ball.
/// For `d = 1` this is `(pi/2)^2` (the interval `(-1, 1)`).
pub(crate) fn ball_mode_sq(d: u32) -> f64 {
    if d == 1 {
        return 0.25 * PI * PI;
    }
    let j = bessel_zeros_raw(f64::from(d) / 2.0 - 1.0, 1)[0];
    j * j
}

/// `j_{d/2,1}^2`, the second Dirichlet eigenvalue of the unit `d`-ball.
pub(crate) fn ball_second_mode_sq(d: u32) -> f64 {
    let j = bessel_zeros_raw(f64::from(d) / 2.0, 1)[0];
    j * j
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ord(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(2.5).unwrap(), 1.5 * 0.5 * PI.sqrt(), max_relative = 1e-13);
        // 10! = 3628800
        assert_relative_eq!(gamma_fn(11.0).unwrap(), 3_628_800.0, max_relative = 1e-13);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn gamma_recurrence_on_grid() {
        let mut x = 0.5;
        while x < 49.0 {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            assert_relative_eq!(ln_gamma_pos(x), gamma_pos(x).ln(), epsilon = 1e-12);
            x += 0.37;
        }
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_int(4).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta_int(6).unwrap() - PI.powi(6) / 945.0).abs() < 1e-14);
        assert!((zeta_int(2).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!(zeta_int(1).is_err());
        assert!(zeta_int(0).is_err());
    }

    #[test]
    fn zeta_five_against_direct_sum() {
        // sum to K plus the integral tail bracket K^{-4}/4 .. (K+1)^{-4}/4
        let k_max = 20_000u32;
        let mut s = 0.0;
        for k in (1..=k_max).rev() {
            s += f64::from(k).powi(-5);
        }
        let kf = f64::from(k_max);
        let lo = s + (kf + 1.0).powi(-4) / 4.0;
        let hi = s + kf.powi(-4) / 4.0;
        let z = zeta_int(5).unwrap();
        assert!(z >= lo - 1e-15 && z <= hi + 1e-15, "{lo} <= {z} <= {hi}");
        assert!((z - 1.036_927_755_1).abs() < 1e-10);
    }

    #[test]
    fn zeta_decreases_to_one() {
        let mut prev = zeta_int(2).unwrap();
        for n in 3..60 {
            let z = zeta_int(n).unwrap();
            assert!(z <= prev && z >= 1.0);
            prev = z;
        }
        assert!((prev - 1.0).abs() < 1e-17);
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(1).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(2).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0, max_relative = 1e-14);
        assert!(unit_ball_volume(0).is_err());
        assert!(unit_ball_volume(31).is_err());
    }

    #[test]
    fn bessel_trivial_values() {
        assert_eq!(bessel_j(ord(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(ord(1.0), 0.0).unwrap(), 0.0);
        assert!(bessel_j(ord(0.0), 2.404_825_557_695_773).unwrap().abs() < 1e-10);
        assert!(bessel_j(ord(26.0), 1.0).is_err());
        assert!(bessel_j(ord(0.0), 101.0).is_err());
        assert!(bessel_j(ord(0.0), -1.0).is_err());
        assert!(BesselOrder::new(-0.5).is_err());
    }

    #[test]
    fn bessel_half_order_closed_form() {
        // J_{1/2}(x) = sqrt(2/(pi x)) sin x ; J_{3/2} = sqrt(2/(pi x)) (sin x / x - cos x)
        for i in 1..400 {
            let x = 0.25 * f64::from(i);
            let c = (2.0 / (PI * x)).sqrt();
            let j_half = bessel_j(ord(0.5), x).unwrap();
            let j_3half = bessel_j(ord(1.5), x).unwrap();
            assert!((j_half - c * x.sin()).abs() < 1e-10, "x={x}");
            assert!((j_3half - c * (x.sin() / x - x.cos())).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn bessel_paths_agree_across_switch() {
        // recurrence J_{n-1} + J_{n+1} = (2n/x) J_n must hold for either path
        for &nu in &[1.0, 2.5, 7.0, 12.3, 20.0, 24.0] {
            for i in 0..200 {
                let x = 0.5 + 0.5 * f64::from(i);
                let lhs = bessel_j_raw(nu - 1.0, x) + bessel_j_raw(nu + 1.0, x);
                let rhs = 2.0 * nu / x * bessel_j_raw(nu, x);
                assert!((lhs - rhs).abs() < 1e-10, "nu={nu} x={x}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn first_zeros() {
        let j0 = bessel_first_zero(ord(0.0)).unwrap();
        assert!((j0 - 2.405).abs() < 1e-3);
        assert!((j0 - 2.404_825_557_695_773).abs() < 1e-10);
        assert!((bessel_first_zero(ord(0.5)).unwrap() - PI).abs() < 1e-10);
        assert!((bessel_first_zero(ord(1.0)).unwrap() - 3.831_705_970_207_512).abs() < 1e-10);
        assert!(bessel_first_zero(ord(25.5)).is_err());
    }

    #[test]
    fn zero_is_a_sign_change() {
        let mut nu = 0.0;
        while nu <= 25.0 {
            let z = bessel_first_zero(ord(nu)).unwrap();
            let a = bessel_j(ord(nu), z - 1e-6).unwrap();
            let b = bessel_j(ord(nu), z + 1e-6).unwrap();
            assert!(a > 0.0 && b < 0.0, "nu={nu} z={z}");
            nu += 0.5;
        }
    }

    #[test]
    fn first_zero_increasing_in_order() {
        let mut prev = 0.0;
        for i in 0..=28 {
            let z = bessel_first_zero(ord(0.5 * f64::from(i))).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }

    #[test]
    fn higher_zeros_of_j0() {
        let z = bessel_zeros(ord(0.0), 4).unwrap();
        let expect = [2.404_825_557_695_773, 5.520_078_110_286_311, 8.653_727_912_911_013, 11.791_534_439_014_281];
        for (a, b) in z.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
        // sin zeros for order 1/2
        let z = bessel_zeros(ord(0.5), 10).unwrap();
        for (k, v) in z.iter().enumerate() {
            assert!((v - PI * (k as f64 + 1.0)).abs() < 1e-10);
        }
    }
}
