//! Parameter estimation for count data: method of moments, zero proportion
//! plus mean, and maximum likelihood with observed information.

use serde::{Deserialize, Serialize};

use crate::dataset::CountDataset;
use crate::error::{Error, Result};
use crate::optim::{minimize_bfgs, BfgsOptions};
use crate::params::PteParams;

/// Gradient-norm tolerance (transformed coordinates) for [`fit_mle`].
pub const MLE_GRAD_TOL: f64 = 1e-8;
/// Default iteration cap for [`fit_mle`].
pub const MLE_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Moments,
    ProportionMoment,
    Mle,
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FitMethod::Moments => "moments",
            FitMethod::ProportionMoment => "proportion_moment",
            FitMethod::Mle => "mle",
        })
    }
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moments" => Ok(FitMethod::Moments),
            "proportion_moment" | "proportion" => Ok(FitMethod::ProportionMoment),
            "mle" => Ok(FitMethod::Mle),
            other => Err(Error::InvalidParameter(format!("unknown fit method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: PteParams,
    pub method: FitMethod,
    pub loglik: f64,
    /// Standard errors of `(alpha, theta)` from observed information.
    pub se: Option<[f64; 2]>,
    pub cov: Option<[[f64; 2]; 2]>,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the estimate sits on the edge of the parameter space
    /// (`|alpha|` within 1e-6 of 1, or `theta` outside `[1e-8, 1e8]`).
    pub at_boundary: bool,
}

impl FitResult {
    fn closed_form(params: PteParams, method: FitMethod, data: &CountDataset) -> Self {
        Self {
            params,
            method,
            loglik: loglik(&params, data),
            se: None,
            cov: None,
            converged: true,
            iterations: 0,
            at_boundary: false,
        }
    }

    /// The fit itself, or `NonConvergence` when the optimizer stopped early.
    pub fn require_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { iterations: self.iterations })
        }
    }
}

/// Log-likelihood `sum_x freq(x) log p(x)`.
pub fn loglik(params: &PteParams, data: &CountDataset) -> f64 {
    data.rows()
        .iter()
        .filter(|r| r.1 > 0)
        .map(|&(x, f)| f as f64 * params.log_pmf(x))
        .sum()
}

/// First and second derivatives of `log p(x)` in `(alpha, theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDerivatives {
    pub d_alpha: f64,
    pub d_theta: f64,
    pub d_alpha_alpha: f64,
    pub d_alpha_theta: f64,
    pub d_theta_theta: f64,
}

impl PteParams {
    /// Derivatives of `log p(x)`. Writing `p(x) = theta * S` with
    /// `S = (1-alpha) q1^k + 2 alpha q2^k`, `k = x + 1`, every ratio
    /// `dS/S` is expressed through `rho^k` so nothing underflows.
    pub fn log_pmf_derivatives(&self, x: u64) -> PointDerivatives {
        let (a, th) = (self.alpha(), self.theta());
        let k = x as f64 + 1.0;
        let q1 = 1.0 / (1.0 + th);
        let q2 = 1.0 / (1.0 + 2.0 * th);
        let rk = (k * self.log_rho()).exp();
        let b = self.pmf_bracket(k);

        let s_a = (2.0 * rk - 1.0) / b;
        let s_t = -k * ((1.0 - a) * q1 + 4.0 * a * q2 * rk) / b;
        let s_at = k * (q1 - 4.0 * q2 * rk) / b;
        let s_tt = k * (k + 1.0) * ((1.0 - a) * q1 * q1 + 8.0 * a * q2 * q2 * rk) / b;

        PointDerivatives {
            d_alpha: s_a,
            d_theta: 1.0 / th + s_t,
            d_alpha_alpha: -s_a * s_a,
            d_alpha_theta: s_at - s_a * s_t,
            d_theta_theta: -1.0 / (th * th) + s_tt - s_t * s_t,
        }
    }
}

/// Gradient of [`loglik`] in `(alpha, theta)`.
pub fn score(params: &PteParams, data: &CountDataset) -> [f64; 2] {
    let mut g = [0.0; 2];
    for &(x, f) in data.rows().iter().filter(|r| r.1 > 0) {
        let d = params.log_pmf_derivatives(x);
        g[0] += f as f64 * d.d_alpha;
        g[1] += f as f64 * d.d_theta;
    }
    g
}

/// Hessian of [`loglik`] in `(alpha, theta)`.
pub fn hessian(params: &PteParams, data: &CountDataset) -> [[f64; 2]; 2] {
    let mut h = [[0.0; 2]; 2];
    for &(x, f) in data.rows().iter().filter(|r| r.1 > 0) {
        let d = params.log_pmf_derivatives(x);
        let f = f as f64;
        h[0][0] += f * d.d_alpha_alpha;
        h[0][1] += f * d.d_alpha_theta;
        h[1][1] += f * d.d_theta_theta;
    }
    h[1][0] = h[0][1];
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservedInformation {
    /// Negative Hessian of the log-likelihood.
    pub matrix: [[f64; 2]; 2],
    pub cov: [[f64; 2]; 2],
    pub se: [f64; 2],
}

/// Observed information at `params` (normally the MLE) and the implied
/// standard errors.
pub fn observed_information(params: &PteParams, data: &CountDataset) -> Result<ObservedInformation> {
    let h = hessian(params, data);
    let m = [[-h[0][0], -h[0][1]], [-h[1][0], -h[1][1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if !(m[0][0] > 0.0 && m[1][1] > 0.0 && det > 0.0) || !det.is_finite() {
        return Err(Error::SingularInformation);
    }
    let cov = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    Ok(ObservedInformation { matrix: m, cov, se: [cov[0][0].sqrt(), cov[1][1].sqrt()] })
}

/// Both solutions of the first-two-moment equations that fall in the
/// parameter space. The pair `(mu1, mu2)` is shared by `alpha` and
/// `(4 - 4 alpha) / (4 - 3 alpha)`, so two admissible roots are common.
pub fn moment_solutions(m1: f64, m2: f64) -> Vec<PteParams> {
    let d = 4.0 * m1 + 9.0 * m1 * m1 - 4.0 * m2;
    if !(d >= 0.0) || m1 == m2 {
        return Vec::new();
    }
    let mut out: Vec<PteParams> = [-1.0, 1.0]
        .iter()
        .filter_map(|&sign| {
            let sd = sign * d.sqrt();
            let alpha = 2.0 + 3.0 * m1 * m1 / (m1 - m2) + m1 * sd / (m1 - m2);
            let theta = (-3.0 * m1 - sd) / (2.0 * (m1 - m2));
            PteParams::new(alpha, theta).ok()
        })
        .collect();
    out.dedup();
    out
}

/// Method-of-moments estimator from the sample mean `m1` and raw second
/// moment `m2`.
pub fn moments_estimate(m1: f64, m2: f64) -> Result<PteParams> {
    let d = 4.0 * m1 + 9.0 * m1 * m1 - 4.0 * m2;
    if !d.is_finite() || d < 0.0 {
        return Err(Error::InfeasibleMoments(format!("discriminant {d} is negative")));
    }
    if m1 == m2 {
        return Err(Error::InfeasibleMoments("first and second moments coincide".into()));
    }
    let sd = d.sqrt();
    let alpha = 2.0 + 3.0 * m1 * m1 / (m1 - m2) + m1 * sd / (m1 - m2);
    let theta = (-3.0 * m1 - sd) / (2.0 * (m1 - m2));
    PteParams::new(alpha, theta).map_err(|_| {
        Error::InfeasibleMoments(format!("solution (alpha={alpha}, theta={theta}) is out of range"))
    })
}

pub fn fit_moments(data: &CountDataset) -> Result<FitResult> {
    let params = moments_estimate(data.mean(), data.second_moment())?;
    Ok(FitResult::closed_form(params, FitMethod::Moments, data))
}

/// Estimator matching the zero proportion `p0` and the mean `xbar`.
pub fn proportion_moment_estimate(p0: f64, xbar: f64) -> Result<PteParams> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InfeasibleStatistics(format!("zero proportion {p0} not in (0, 1)")));
    }
    if !(xbar > 0.0) {
        return Err(Error::InfeasibleStatistics(format!("mean {xbar} is not positive")));
    }
    let den = xbar + p0 - 1.0;
    if den == 0.0 {
        return Err(Error::InfeasibleStatistics("mean + zero proportion equals 1".into()));
    }
    let radicand = 9.0 - 10.0 * p0 - 8.0 * xbar * p0 + p0 * p0;
    if radicand < 0.0 {
        return Err(Error::InfeasibleStatistics(format!("radicand {radicand} is negative")));
    }
    let r = radicand.sqrt();
    let alpha = 0.5 * (4.0 - 3.0 * xbar / den + 3.0 * xbar * p0 / den - xbar * r / den);
    let theta = (3.0 - 3.0 * p0 + r) / (4.0 * den);
    PteParams::new(alpha, theta).map_err(|_| {
        Error::InfeasibleStatistics(format!(
            "solution (alpha={alpha}, theta={theta}) is out of range"
        ))
    })
}

pub fn fit_proportion_moment(data: &CountDataset) -> Result<FitResult> {
    let params = proportion_moment_estimate(data.zero_proportion(), data.mean())?;
    Ok(FitResult::closed_form(params, FitMethod::ProportionMoment, data))
}

/// Starting point for [`fit_mle`]: the moment estimate when it exists,
/// otherwise `(0, 1 / m1)`.
pub fn default_init(data: &CountDataset) -> PteParams {
    moments_estimate(data.mean(), data.second_moment()).unwrap_or_else(|_| {
        let m1 = data.mean().max(1e-3);
        PteParams::new(0.0, 1.0 / m1).expect("positive rate")
    })
}

const ALPHA_EDGE: f64 = 1.0 - 1e-12;

/// Maximum likelihood over the open box, optimizing `alpha = tanh(u)`,
/// `theta = exp(v)` by BFGS with the analytic score.
///
/// Non-convergence is reported through `converged = false` with the best
/// iterate; call [`FitResult::require_converged`] to turn it into an error.
pub fn fit_mle(data: &CountDataset, init: Option<PteParams>) -> FitResult {
    fit_mle_with(data, init, &BfgsOptions { max_iter: MLE_MAX_ITER, grad_tol: MLE_GRAD_TOL })
}

pub fn fit_mle_with(data: &CountDataset, init: Option<PteParams>, opts: &BfgsOptions) -> FitResult {
    let start = init.unwrap_or_else(|| default_init(data));
    let x0 = [
        start.alpha().clamp(-1.0 + 1e-6, 1.0 - 1e-6).atanh(),
        start.theta().ln(),
    ];

    let objective = |z: &[f64]| -> (f64, Vec<f64>) {
        let alpha = z[0].tanh().clamp(-ALPHA_EDGE, ALPHA_EDGE);
        let theta = z[1].exp();
        let Ok(p) = PteParams::new(alpha, theta) else {
            return (f64::NAN, vec![f64::NAN; 2]);
        };
        let g = score(&p, data);
        let value = -loglik(&p, data);
        (value, vec![-g[0] * (1.0 - alpha * alpha), -g[1] * theta])
    };
    let min = minimize_bfgs(objective, &x0, opts);

    let alpha = min.x[0].tanh().clamp(-ALPHA_EDGE, ALPHA_EDGE);
    let theta = min.x[1].exp();
    let params = PteParams::new(alpha, theta).unwrap_or(start);
    let at_boundary = alpha.abs() > 1.0 - 1e-6 || !(1e-8..=1e8).contains(&theta);
    let info = if at_boundary { None } else { observed_information(&params, data).ok() };
    FitResult {
        params,
        method: FitMethod::Mle,
        loglik: loglik(&params, data),
        se: info.map(|i| i.se),
        cov: info.map(|i| i.cov),
        converged: min.converged,
        iterations: min.iterations,
        at_boundary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn p(a: f64, t: f64) -> PteParams {
        PteParams::new(a, t).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn moments_estimator_examples() {
        let e = moments_estimate(1.0, 3.0).unwrap();
        assert!(e.alpha().abs() < 1e-15 && (e.theta() - 1.0).abs() < 1e-15);
        assert!(matches!(moments_estimate(1.0, 4.0), Err(Error::InfeasibleMoments(_))));
        assert!(matches!(moments_estimate(2.0, 2.0), Err(Error::InfeasibleMoments(_))));
    }

    #[test]
    fn moments_round_trip_below_two_thirds() {
        for &(a, t) in &[(-0.9, 0.1), (-0.2, 3.0), (0.0, 1.0), (0.5, 0.3), (0.66, 7.0)] {
            let q = p(a, t);
            let e = moments_estimate(q.raw_moment(1).unwrap(), q.raw_moment(2).unwrap()).unwrap();
            assert!((e.alpha() - a).abs() < 1e-10 && rel(e.theta(), t) < 1e-10, "{a} {t}");
        }
    }

    #[test]
    fn moments_are_shared_by_partner_alpha() {
        // alpha > 2/3 has the same first two moments as (4 - 4a)/(4 - 3a)
        let q = p(0.85, 1.3);
        let (m1, m2) = (q.raw_moment(1).unwrap(), q.raw_moment(2).unwrap());
        let partner = (4.0 - 4.0 * 0.85) / (4.0 - 3.0 * 0.85);
        let e = moments_estimate(m1, m2).unwrap();
        assert!((e.alpha() - partner).abs() < 1e-10);
        assert!((e.raw_moment(1).unwrap() - m1).abs() < 1e-10);
        assert!((e.raw_moment(2).unwrap() - m2).abs() < 1e-10);
        let all = moment_solutions(m1, m2);
        assert_eq!(all.len(), 2);
        assert!(all.iter().any(|s| (s.alpha() - 0.85).abs() < 1e-10));
    }

    #[test]
    fn proportion_moment_examples() {
        let e = proportion_moment_estimate(0.5, 1.0).unwrap();
        assert!(e.alpha().abs() < 1e-15 && (e.theta() - 1.0).abs() < 1e-15);
        let q = p(-0.701, 0.873);
        let e = proportion_moment_estimate(q.pmf(0), q.mean()).unwrap();
        assert!((e.alpha() + 0.701).abs() < 1e-8 && (e.theta() - 0.873).abs() < 1e-8);
        assert!(matches!(
            proportion_moment_estimate(0.9, 5.0),
            Err(Error::InfeasibleStatistics(_))
        ));
        assert!(proportion_moment_estimate(0.0, 1.0).is_err());
        assert!(proportion_moment_estimate(0.5, 0.5).is_err());
    }

    #[test]
    fn loglik_examples() {
        let d = CountDataset::seizure();
        let l = loglik(&p(-0.701, 0.873), &d);
        assert!((l + 594.85).abs() < 0.1, "{l}");
        let one = CountDataset::from_pairs([(0, 1)]).unwrap();
        assert!((loglik(&p(0.0, 1.0), &one) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn score_single_zero() {
        let one = CountDataset::from_pairs([(0, 1)]).unwrap();
        let g = score(&p(0.0, 1.0), &one);
        assert!((g[1] - 0.5).abs() < 1e-15);
        // d/dalpha log p(0) at alpha = 0: (-q1 + 2 q2) / q1 = -1 + 2 * 2/3
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn score_matches_central_differences() {
        let d = CountDataset::from_pairs([(0, 5), (1, 3), (2, 4), (5, 2), (11, 1)]).unwrap();
        for &(a, t) in &[(-0.6, 0.7), (0.3, 2.0), (0.9, 0.2)] {
            let q = p(a, t);
            let g = score(&q, &d);
            let h = 1e-6;
            let ga = (loglik(&p(a + h, t), &d) - loglik(&p(a - h, t), &d)) / (2.0 * h);
            let gt = (loglik(&p(a, t + h), &d) - loglik(&p(a, t - h), &d)) / (2.0 * h);
            assert!(rel(g[0], ga) < 1e-6 && rel(g[1], gt) < 1e-6, "{g:?} vs {ga} {gt}");
        }
    }

    #[test]
    fn information_matches_finite_difference_hessian() {
        let d = CountDataset::from_pairs([(0, 1), (1, 1)]).unwrap();
        let q = p(0.0, 1.0);
        let info = observed_information(&q, &d);
        let h = 1e-5;
        let sa = |a: f64, t: f64| score(&p(a, t), &d);
        let haa = (sa(h, 1.0)[0] - sa(-h, 1.0)[0]) / (2.0 * h);
        let hat = (sa(0.0, 1.0 + h)[0] - sa(0.0, 1.0 - h)[0]) / (2.0 * h);
        let htt = (sa(0.0, 1.0 + h)[1] - sa(0.0, 1.0 - h)[1]) / (2.0 * h);
        let hh = hessian(&q, &d);
        assert!(rel(hh[0][0], haa) < 1e-6);
        assert!(rel(hh[0][1], hat) < 1e-6);
        assert!(rel(hh[1][1], htt) < 1e-6);
        // two points and two parameters: information exists but may be singular
        if let Ok(i) = info {
            assert!(i.matrix[0][0] > 0.0);
        }
    }

    #[test]
    fn information_doubles_with_data() {
        let d = CountDataset::seizure();
        let q = p(-0.7, 0.87);
        let a = observed_information(&q, &d).unwrap();
        let b = observed_information(&q, &d.scaled(2).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(b.matrix[i][j], 2.0 * a.matrix[i][j]) < 1e-12);
            }
        }
    }

    #[test]
    fn mle_seizure() {
        let fit = fit_mle(&CountDataset::seizure(), None);
        assert!(fit.converged, "{fit:?}");
        assert!((fit.params.alpha() + 0.701).abs() < 0.01);
        assert!((fit.params.theta() - 0.873).abs() < 0.005);
        assert!((fit.loglik + 594.85).abs() < 0.1);
        let g = score(&fit.params, &CountDataset::seizure());
        assert!(g[0].abs() / 351.0 < 1e-6 && g[1].abs() / 351.0 < 1e-6);
        let se = fit.se.unwrap();
        assert!(se[0] > 0.0 && se[1] > 0.0);
        let cov = fit.cov.unwrap();
        assert_eq!(cov[0][1], cov[1][0]);
    }

    #[test]
    fn mle_recovers_simulated_geometric() {
        let xs = p(0.0, 1.0).sample(100_000, &mut RngStream::new(11));
        let d = CountDataset::from_counts(xs).unwrap();
        let fit = fit_mle(&d, None);
        assert!(fit.converged);
        assert!(fit.params.alpha().abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn mle_all_zero_sample_hits_boundary() {
        let d = CountDataset::from_pairs([(0, 100)]).unwrap();
        let fit = fit_mle(&d, None);
        assert!(!fit.converged || fit.at_boundary, "{fit:?}");
        assert!(fit.params.theta() > 10.0);
    }

    #[test]
    fn loglik_ignores_row_order() {
        let a = CountDataset::from_pairs([(3, 2), (0, 7), (1, 4)]).unwrap();
        let b = CountDataset::from_pairs([(1, 4), (3, 2), (0, 7)]).unwrap();
        let q = p(0.2, 0.5);
        assert_eq!(loglik(&q, &a), loglik(&q, &b));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [FitMethod::Moments, FitMethod::ProportionMoment, FitMethod::Mle] {
            assert_eq!(m.to_string().parse::<FitMethod>().unwrap(), m);
        }
    }
}
