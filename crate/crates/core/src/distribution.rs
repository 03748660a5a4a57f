//! Exact evaluation of the PTE count law.
//!
//! The pmf is a two-component geometric mixture,
//!
//! ```text
//! p(x) = theta * [ (1 - alpha) / (1 + theta)^(x+1) + 2 alpha / (1 + 2 theta)^(x+1) ]
//! ```
//!
//! Every evaluation factors out the slow branch `(1 + theta)^-(x+1)` and works
//! with `rho = (1 + theta) / (1 + 2 theta) < 1`, which keeps the bracket a sum
//! of non-negative terms for either sign of `alpha`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PteParams;

/// Tolerance below which two adjacent probabilities are treated as tied modes.
pub const MODE_TIE_TOLERANCE: f64 = 1e-14;

/// One or two adjacent modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Single(u64),
    Double(u64, u64),
}

impl Mode {
    pub fn values(&self) -> Vec<u64> {
        match *self {
            Mode::Single(m) => vec![m],
            Mode::Double(a, b) => vec![a, b],
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        match *self {
            Mode::Single(m) => m == x,
            Mode::Double(a, b) => a == x || b == x,
        }
    }
}

impl PteParams {
    /// `(1 - alpha) + 2 alpha rho^k`, evaluated without cancellation.
    #[inline]
    pub(crate) fn pmf_bracket(&self, k: f64) -> f64 {
        let a = self.alpha();
        let t = k * self.log_rho();
        if a >= 0.0 {
            (1.0 - a) + 2.0 * a * t.exp()
        } else {
            // (1 + a) + 2a (rho^k - 1), both terms non-negative
            (1.0 + a) + 2.0 * a * t.exp_m1()
        }
    }

    /// `(1 - alpha) + alpha rho^k`, the survival bracket.
    #[inline]
    fn survival_bracket(&self, k: f64) -> f64 {
        let a = self.alpha();
        let t = k * self.log_rho();
        if a >= 0.0 {
            (1.0 - a) + a * t.exp()
        } else {
            1.0 + a * t.exp_m1()
        }
    }

    pub fn pmf(&self, x: u64) -> f64 {
        self.log_pmf(x).exp()
    }

    /// Natural log of the pmf; finite for every `x` representable as `f64`
    /// long after the pmf itself underflows.
    pub fn log_pmf(&self, x: u64) -> f64 {
        let k = x as f64 + 1.0;
        let th = self.theta();
        th.ln() - k * th.ln_1p() + self.pmf_bracket(k).ln()
    }

    /// `p(0..=x_max)` generated from `p(0)` by the successive-ratio recursion.
    pub fn pmf_recursive(&self, x_max: usize) -> Vec<f64> {
        let th = self.theta();
        let q1 = 1.0 / (1.0 + th);
        let mut out = Vec::with_capacity(x_max + 1);
        let mut p = th * (1.0 + self.alpha() + 2.0 * th) / ((1.0 + th) * (1.0 + 2.0 * th));
        out.push(p);
        let rho = self.log_rho().exp();
        let mut prev = self.pmf_bracket(1.0);
        for x in 0..x_max {
            let next = self.pmf_bracket(x as f64 + 2.0);
            // only the alpha = 1 bracket 2 rho^k can underflow; its ratio is rho
            let ratio = if prev > 0.0 { next / prev } else { rho };
            p *= q1 * ratio;
            out.push(p);
            prev = next;
        }
        out
    }

    /// `P(X <= x)`.
    pub fn cdf(&self, x: u64) -> f64 {
        1.0 - self.survival(x + 1)
    }

    /// `P(X >= x)`. Note the inclusive convention: `cdf(x) + survival(x + 1) == 1`.
    pub fn survival(&self, x: u64) -> f64 {
        if x == 0 {
            return 1.0;
        }
        let k = x as f64;
        (-k * self.theta().ln_1p()).exp() * self.survival_bracket(k)
    }

    /// Probability generating function `E[t^X]` for `|t| <= 1`.
    pub fn pgf(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t.abs() > 1.0 {
            return Err(Error::Domain(format!("pgf argument must satisfy |t| <= 1, got {t}")));
        }
        let (a, th) = (self.alpha(), self.theta());
        let s = 1.0 - t;
        Ok((th * s * (1.0 + a) + 2.0 * th * th) / ((s + th) * (s + 2.0 * th)))
    }

    /// Mode located by the sign of the successive ratio `p(x+1) / p(x)`.
    ///
    /// The pmf is unimodal, so the ratio exceeds one on `[0, x*)` and not
    /// after; the boundary is found by exponential search plus bisection on
    /// that predicate, which stays cheap even when the mode is far out.
    pub fn mode(&self) -> Mode {
        let th = self.theta();
        let q1 = 1.0 / (1.0 + th);
        let rises = |x: u64| {
            let k = x as f64 + 1.0;
            q1 * self.pmf_bracket(k + 1.0) > self.pmf_bracket(k)
        };
        let peak = if !rises(0) {
            0
        } else {
            let mut lo = 0u64;
            let mut hi = 1u64;
            while rises(hi) {
                lo = hi;
                hi = hi.saturating_mul(2);
            }
            // rises(lo) && !rises(hi)
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if rises(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        let p = self.pmf(peak);
        if (self.pmf(peak + 1) - p).abs() <= MODE_TIE_TOLERANCE {
            Mode::Double(peak, peak + 1)
        } else if peak > 0 && (self.pmf(peak - 1) - p).abs() <= MODE_TIE_TOLERANCE {
            Mode::Double(peak - 1, peak)
        } else {
            Mode::Single(peak)
        }
    }

    /// Closed-form mode, kept as a cross-check on [`PteParams::mode`].
    ///
    /// `p(x+1) >= p(x)` iff `(1 - alpha) + 4 alpha rho^(x+2) <= 0`, which can
    /// only hold for `alpha < 0`; solving for `x` gives the threshold
    /// `m = log_rho((alpha - 1) / (4 alpha)) - 2`. Integer `m` means a tie.
    pub fn mode_closed_form(&self) -> Mode {
        let a = self.alpha();
        if a >= 0.0 {
            return Mode::Single(0);
        }
        let m = ((a - 1.0) / (4.0 * a)).ln() / self.log_rho() - 2.0;
        if m < 0.0 {
            return Mode::Single(0);
        }
        let r = m.round();
        if (m - r).abs() < 1e-9 {
            Mode::Double(r as u64, r as u64 + 1)
        } else {
            Mode::Single(m.floor() as u64 + 1)
        }
    }

    /// Density of the transmuted-exponential mixing law at `lambda`.
    pub fn ted_pdf(&self, lambda: f64) -> f64 {
        if lambda < 0.0 {
            return 0.0;
        }
        let (a, th) = (self.alpha(), self.theta());
        let e = (-th * lambda).exp();
        th * e * ((1.0 - a) + 2.0 * a * e)
    }

    pub fn ted_cdf(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let (a, th) = (self.alpha(), self.theta());
        -(1.0 - a) * (-th * lambda).exp_m1() - a * (-2.0 * th * lambda).exp_m1()
    }

    /// Inverse of [`PteParams::ted_cdf`] on `[0, 1)`.
    pub fn ted_quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile level must lie in [0, 1), got {u}")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        let (a, th) = (self.alpha(), self.theta());
        let disc = 1.0 + 2.0 * a - 4.0 * u * a + a * a;
        // (1 - a + sqrt(disc)) / (2 (1 - u)) written as 1 + excess
        let excess = u * (1.0 - 2.0 * a / (disc.sqrt() + 1.0 + a)) / (1.0 - u);
        Ok(excess.ln_1p() / th)
    }
}
