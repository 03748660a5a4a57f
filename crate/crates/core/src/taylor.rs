//! Formal Taylor expansion of the mixed-Poisson probability around the
//! point `k`: `P(k) ~ g(k) + (1/k) sum_{i>=2} mu_i f^(i)(k) / i!`, where
//! `g` is the mixing density, `f(x) = x g(x)` and `mu_i` are the central
//! moments of a gamma variable with shape `k` and unit scale.
//!
//! The series is asymptotic, not convergent in general; it is an
//! approximation to [`PteParams::pmf`], not a replacement.

use crate::params::PteParams;

impl PteParams {
    /// `i`-th derivative of `f(x) = x * ted_pdf(x)`.
    ///
    /// Each branch is `c x e^{-b x}`, whose `i`-th derivative is
    /// `c (-b)^(i-1) e^{-b x} (i - b x)`.
    pub fn taylor_f_derivative(&self, i: u32, x: f64) -> f64 {
        let (a, th) = (self.alpha(), self.theta());
        let branch = |c: f64, b: f64| {
            let sign = if i == 0 { 1.0 / -b } else { (-b).powi(i as i32 - 1) };
            c * sign * (-b * x).exp() * (f64::from(i) - b * x)
        };
        branch((1.0 - a) * th, th) + branch(2.0 * a * th, 2.0 * th)
    }

    /// Expansion of `pmf(k)` keeping the correction terms `mu_2 .. mu_{n_terms+1}`.
    /// `n_terms = 0` gives the leading term `g(k)` alone.
    pub fn taylor_pmf(&self, k: u64, n_terms: usize) -> f64 {
        assert!(k >= 1, "expansion point must be at least 1");
        let kf = k as f64;
        let central = gamma_central_moments(kf, n_terms + 1);
        let mut total = self.ted_pdf(kf);
        let mut fact = 1.0;
        for i in 1..=(n_terms + 1) {
            fact *= i as f64;
            if i < 2 {
                continue;
            }
            total += central[i] * self.taylor_f_derivative(i as u32, kf) / fact / kf;
        }
        total
    }
}

/// Central moments `mu_0 .. mu_n` of Gamma(shape, scale 1).
///
/// Uses the cumulants `kappa_j = shape (j-1)!` and the moment-cumulant
/// recursion `mu_n = sum_{j=2}^{n} C(n-1, j-1) kappa_j mu_{n-j}`.
pub fn gamma_central_moments(shape: f64, n: usize) -> Vec<f64> {
    let mut mu = vec![0.0; n.max(1) + 1];
    mu[0] = 1.0;
    let mut kappa = vec![0.0; n + 1];
    let mut fact = 1.0;
    for (j, kj) in kappa.iter_mut().enumerate().skip(1) {
        if j >= 2 {
            fact *= (j - 1) as f64;
        }
        *kj = if j == 1 { 0.0 } else { shape * fact };
    }
    for m in 2..=n {
        let mut binom = 1.0; // C(m-1, j-1) starting at j = 1
        let mut acc = 0.0;
        for j in 1..=m {
            if j > 1 {
                binom *= (m - j + 1) as f64 / (j - 1) as f64;
            }
            acc += binom * kappa[j] * mu[m - j];
        }
        mu[m] = acc;
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, t: f64) -> PteParams {
        PteParams::new(a, t).unwrap()
    }

    #[test]
    fn gamma_moments_known_values() {
        let k = 7.0;
        let mu = gamma_central_moments(k, 6);
        assert_eq!(mu[1], 0.0);
        assert!((mu[2] - k).abs() < 1e-12);
        assert!((mu[3] - 2.0 * k).abs() < 1e-12);
        assert!((mu[4] - (3.0 * k * k + 6.0 * k)).abs() < 1e-9);
        assert!((mu[5] - (20.0 * k * k + 24.0 * k)).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let q = p(0.4, 0.7);
        let f = |x: f64| x * q.ted_pdf(x);
        let (x, h) = (3.0, 1e-3);
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        assert!((q.taylor_f_derivative(1, x) - d1).abs() < 1e-7);
        assert!((q.taylor_f_derivative(2, x) - d2).abs() < 1e-6);
        assert!((q.taylor_f_derivative(0, x) - f(x)).abs() < 1e-15);
    }

    #[test]
    fn leading_term_is_mixing_density() {
        let v = p(0.0, 1.0).taylor_pmf(10, 0);
        assert!((v - (-10f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn three_terms_within_five_percent() {
        let q = p(0.5, 0.5);
        let exact = q.pmf(20);
        let approx = q.taylor_pmf(20, 3);
        assert!(((approx - exact) / exact).abs() < 0.05, "{approx} vs {exact}");
    }

    #[test]
    fn corrections_improve_leading_term() {
        let q = p(-0.3, 1.0);
        let exact = q.pmf(30);
        let e0 = (q.taylor_pmf(30, 0) - exact).abs();
        let e3 = (q.taylor_pmf(30, 3) - exact).abs();
        assert!(e3 < e0, "{e3} !< {e0}");
    }
}
