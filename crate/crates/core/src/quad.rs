//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` with adaptive
/// Simpson and the usual Richardson correction on accepted panels.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("bad quadrature request [{a}, {b}] tol {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut exhausted = false;
    // a uniform first split keeps narrow features from hiding between samples
    let panels = 16;
    let step = (b - a) / f64::from(panels);
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + step * f64::from(i);
        let hi = if i + 1 == panels { b } else { lo + step };
        let (flo, fhi) = (f(lo), f(hi));
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let s = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += recurse(&f, lo, hi, flo, fmid, fhi, s, tol / f64::from(panels), MAX_DEPTH, &mut exhausted);
    }
    if exhausted || !total.is_finite() {
        return Err(Error::Numeric(format!(
            "adaptive Simpson did not reach tol {tol} on [{a}, {b}]"
        )));
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    exhausted: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *exhausted = true;
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, exhausted)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_transcendentals() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(|x| (-x).exp(), 0.0, 40.0, 1e-13).unwrap();
        assert!((v - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
        assert_eq!(adaptive_simpson(|x| x, 1.0, 1.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn sqrt_singularity_still_converges() {
        let v = adaptive_simpson(f64::sqrt, 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonsense() {
        assert!(adaptive_simpson(|x| x, 0.0, f64::INFINITY, 1e-9).is_err());
        assert!(adaptive_simpson(|x| x, 0.0, 1.0, 0.0).is_err());
        assert!(adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-9).is_err());
    }
}
