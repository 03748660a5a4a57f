//! Hurwitz-Lerch transcendent `Phi(z, s, a) = sum_{k>=0} z^k (k + a)^(-s)`
//! by direct summation with a geometric tail bound.

use crate::error::{Error, Result};

const MAX_TERMS: usize = 10_000_000;

/// Direct-summation evaluation of the Lerch transcendent for `|z| < 1`.
///
/// Summation stops once the bound on the remaining tail drops below
/// `max(abs_tol, 1e-15 * |partial sum|)`. A zero base `k + a == 0` contributes
/// nothing when `s < 0` (as in `0^r`), and is a pole when `s > 0`.
pub fn lerch_phi(z: f64, s: f64, a: f64, abs_tol: f64) -> Result<f64> {
    if !(z.is_finite() && s.is_finite() && a.is_finite()) || z.abs() >= 1.0 {
        return Err(Error::Domain(format!("lerch_phi needs |z| < 1, got z={z}")));
    }
    if a < 0.0 {
        return Err(Error::Domain(format!("lerch_phi needs a >= 0, got a={a}")));
    }
    if a == 0.0 && s > 0.0 {
        return Err(Error::Domain("lerch_phi has a pole at k + a = 0 for s > 0".into()));
    }
    if z == 0.0 {
        return Ok(if a == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { a.powf(-s) });
    }

    let term = |k: usize| {
        let base = k as f64 + a;
        if base == 0.0 {
            if s == 0.0 { 1.0 } else { 0.0 }
        } else {
            z.powi(k as i32) * base.powf(-s)
        }
    };

    let az = z.abs();
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 0..MAX_TERMS {
        let t = term(k);
        // Kahan summation keeps alternating (z < 0) series accurate
        let y = t - comp;
        let next = sum + y;
        comp = (next - sum) - y;
        sum = next;

        let base = k as f64 + a;
        if base <= 0.0 {
            continue;
        }
        // every later ratio |t_{j+1} / t_j| is at most `ratio`
        let ratio = if s >= 0.0 { az } else { az * ((base + 1.0) / base).powf(-s) };
        if ratio < 1.0 {
            let tail = t.abs() * ratio / (1.0 - ratio);
            if tail <= abs_tol.max(1e-15 * sum.abs()) {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence { iterations: MAX_TERMS })
}
