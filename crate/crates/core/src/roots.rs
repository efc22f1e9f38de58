//! Bracketed root finding (Brent's method).

use crate::error::{Error, Result};

/// Finds `x` in `[lo, hi]` with `f(x) = 0`, assuming a sign change.
pub fn brent<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed on [{lo}, {hi}] (f = {flo:e}, {fhi:e})"
        )));
    }
    if flo.abs() < fhi.abs() {
        std::mem::swap(&mut lo, &mut hi);
        std::mem::swap(&mut flo, &mut fhi);
    }
    let (mut a, mut fa) = (lo, flo);
    let (mut b, mut fb) = (hi, fhi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..300 {
        if fb == 0.0 {
            return Ok(b);
        }
        let tol = xtol * b.abs().max(1e-300) + 4.0 * f64::EPSILON * b.abs();
        if (b - a).abs() <= tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo_bound = (3.0 * a + b) / 4.0;
        let outside = !((s > lo_bound.min(b)) && (s < lo_bound.max(b)));
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0
        };
        let tiny = if bisected { (b - c).abs() < tol } else { (c - d).abs() < tol };
        if outside || slow || tiny {
            s = 0.5 * (a + b);
            bisected = true;
        } else {
            bisected = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

/// Solves `g(t) = p` for a nonincreasing `g` on `[lo, ∞)`, doubling the
/// upper bracket until it straddles the target.
pub fn invert_decreasing<G: Fn(f64) -> f64>(g: G, p: f64, lo: f64, start_hi: f64, xtol: f64) -> Result<f64> {
    let mut hi = start_hi.max(lo + 1.0);
    let mut guard = 0;
    while g(hi) > p {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(Error::Domain(format!("cannot bracket level {p:e}")));
        }
    }
    brent(|t| g(t) - p, lo, hi, xtol)
}
