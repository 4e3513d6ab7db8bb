//! Bracketed root finding (Brent's method).

use serde::{Deserialize, Serialize};

use crate::error::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    /// Absolute tolerance on the root.
    pub x_tol: f64,
    pub max_iters: usize,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self { x_tol: 1e-10, max_iters: 200 }
    }
}

impl RootConfig {
    pub fn with_x_tol(self, x_tol: f64) -> Self {
        Self { x_tol, ..self }
    }
}

/// Root of `f` on `[lo, hi]` by Brent's method (inverse quadratic / secant
/// steps safeguarded by bisection). Requires `f(lo)·f(hi) ≤ 0`.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, cfg: &RootConfig) -> Result<f64, NumericsError> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(NumericsError::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iters {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * cfg.x_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(NumericsError::NonConvergence { iters: cfg.max_iters, x: b })
}

/// First adjacent pair of `xs` across which `f` changes sign (or hits zero).
pub fn scan_bracket<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64]) -> Option<(f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    for &x in xs {
        let fx = f(x);
        if let Some((px, pf)) = prev {
            if pf == 0.0 || pf * fx <= 0.0 {
                return Some((px, x));
            }
        }
        prev = Some((x, fx));
    }
    None
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect()
}
