use serde::Serialize;

use crate::error::Result;
use crate::lerch::lerch_phi;
use crate::params::PteParams;

/// Absolute tail tolerance for series-evaluated raw moments.
pub const MOMENT_SERIES_TOL: f64 = 1e-12;

/// Mean, variance, skewness `mu3 / mu2^1.5`, kurtosis `mu4 / mu2^2`
/// (non-excess) and coefficient of variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub cv: f64,
}

impl PteParams {
    pub fn mean(&self) -> f64 {
        (2.0 - self.alpha()) / (2.0 * self.theta())
    }

    /// `E[X^r]`. Orders up to four use polynomial closed forms, higher orders
    /// sum the Lerch series of each geometric branch.
    pub fn raw_moment(&self, r: u32) -> Result<f64> {
        let (a, t) = (self.alpha(), self.theta());
        let value = match r {
            0 => 1.0,
            1 => self.mean(),
            2 => (4.0 - 3.0 * a + 2.0 * t - a * t) / (2.0 * t * t),
            3 => {
                (24.0 + 24.0 * t + 4.0 * t * t - 21.0 * a - 18.0 * t * a - 2.0 * t * t * a)
                    / (4.0 * t.powi(3))
            }
            4 => {
                (48.0 + 72.0 * t + 28.0 * t * t + 2.0 * t.powi(3)
                    - 45.0 * a
                    - 63.0 * t * a
                    - 21.0 * t * t * a
                    - t.powi(3) * a)
                    / (2.0 * t.powi(4))
            }
            _ => {
                let z1 = 1.0 / (1.0 + t);
                let z2 = 1.0 / (1.0 + 2.0 * t);
                let s = -f64::from(r);
                let mut v = 0.0;
                if a != 1.0 {
                    v += (1.0 - a) * (1.0 - z1) * lerch_phi(z1, s, 0.0, MOMENT_SERIES_TOL)?;
                }
                if a != 0.0 {
                    v += a * (1.0 - z2) * lerch_phi(z2, s, 0.0, MOMENT_SERIES_TOL)?;
                }
                v
            }
        };
        Ok(value)
    }

    pub fn variance(&self) -> f64 {
        let (a, t) = (self.alpha(), self.theta());
        (4.0 + 2.0 * t * (2.0 - a) - a * (2.0 + a)) / (4.0 * t * t)
    }

    pub fn moments(&self) -> MomentSummary {
        let (a, t) = (self.alpha(), self.theta());
        // 4 theta^2 * variance
        let d = 4.0 - 2.0 * t * (a - 2.0) - a * (a + 2.0);
        let skew_num = 2.0
            * (8.0 + 4.0 * t * (3.0 + t)
                - 3.0 * a
                - 2.0 * t * a * (3.0 + t)
                - 3.0 * a * a * (1.0 + t)
                - a.powi(3));
        let kurt_num = 16.0 * (1.0 + t) * (9.0 + t * (9.0 + t))
            - 8.0 * (1.0 + t) * (9.0 + t * (12.0 + t)) * a
            - 8.0 * (6.0 + t * (9.0 + 2.0 * t)) * a * a
            - 12.0 * (1.0 + t) * a.powi(3)
            - 3.0 * a.powi(4);
        MomentSummary {
            mean: self.mean(),
            variance: self.variance(),
            skewness: skew_num / d.powf(1.5),
            kurtosis: kurt_num / (d * d),
            cv: d.sqrt() / (2.0 - a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, t: f64) -> PteParams {
        PteParams::new(a, t).unwrap()
    }

    /// Summation oracle: central moments from the pmf, truncated once the
    /// geometric tail bound on `x^4 p(x)` is negligible.
    fn summed(q: &PteParams) -> MomentSummary {
        let n = 20_000u64;
        let mean: f64 = (0..n).map(|x| x as f64 * q.pmf(x)).sum();
        let c = |r: i32| -> f64 { (0..n).map(|x| (x as f64 - mean).powi(r) * q.pmf(x)).sum() };
        let (m2, m3, m4) = (c(2), c(3), c(4));
        MomentSummary {
            mean,
            variance: m2,
            skewness: m3 / m2.powf(1.5),
            kurtosis: m4 / (m2 * m2),
            cv: m2.sqrt() / mean,
        }
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn geometric_raw_moments() {
        let q = p(0.0, 1.0);
        assert!((q.raw_moment(3).unwrap() - 13.0).abs() < 1e-12);
        assert!((q.raw_moment(4).unwrap() - 75.0).abs() < 1e-12);
        // r = 5 via the series: sum x^5 / 2^(x+1) = 541
        assert!((q.raw_moment(5).unwrap() - 541.0).abs() < 1e-9);
    }

    #[test]
    fn seizure_mean() {
        let m = p(-0.701, 0.873).raw_moment(1).unwrap();
        assert!((m - 2.701 / 1.746).abs() < 1e-12);
        assert!((m - 1.547).abs() < 1e-3);
    }

    #[test]
    fn closed_forms_agree_with_series_for_low_orders() {
        for &(a, t) in &[(-0.5, 0.8), (0.3, 2.5), (1.0, 0.4), (-1.0, 0.1)] {
            let q = p(a, t);
            for r in 1..=4u32 {
                let z1 = 1.0 / (1.0 + t);
                let z2 = 1.0 / (1.0 + 2.0 * t);
                let s = -f64::from(r);
                let series = (1.0 - a) * (1.0 - z1) * lerch_phi(z1, s, 0.0, 1e-12).unwrap()
                    + a * (1.0 - z2) * lerch_phi(z2, s, 0.0, 1e-12).unwrap();
                assert!(close(q.raw_moment(r).unwrap(), series, 1e-12), "{a} {t} {r}");
            }
        }
    }

    #[test]
    fn high_order_moment_matches_summation() {
        let q = p(-0.3, 1.1);
        let direct: f64 = (0..4000u64).map(|x| (x as f64).powi(7) * q.pmf(x)).sum();
        assert!(close(q.raw_moment(7).unwrap(), direct, 1e-12));
    }

    #[test]
    fn geometric_summary() {
        let m = p(0.0, 1.0).moments();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.variance, 2.0);
        assert!((m.skewness - 3.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((m.kurtosis - 9.5).abs() < 1e-14);
        assert!((m.cv - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(p(1.0, 0.5).mean(), 1.0);
    }

    #[test]
    fn summary_matches_summation_oracle() {
        for &(a, t) in &[(-0.5, 0.8), (0.9, 0.3), (-1.0, 2.0), (0.2, 6.0)] {
            let q = p(a, t);
            let (m, o) = (q.moments(), summed(&q));
            assert!(close(m.mean, o.mean, 1e-10));
            assert!(close(m.variance, o.variance, 1e-9));
            assert!(close(m.skewness, o.skewness, 1e-8));
            assert!(close(m.kurtosis, o.kurtosis, 1e-8));
            assert!(close(m.cv, o.cv, 1e-9));
        }
    }

    #[test]
    fn always_overdispersed() {
        for i in 0..=20 {
            for j in 1..=20 {
                let q = p(-1.0 + 0.1 * i as f64, 0.05 * j as f64 * j as f64);
                assert!(q.variance() > q.mean());
            }
        }
    }
}
