//! PTE count regression with a log link, `mu_i = exp(x_i' beta)`, under the
//! mean parametrization `alpha = 2 - nu`, `theta = nu / (2 mu)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::optim::{minimize_bfgs, BfgsOptions};
use crate::params::PteParams;
use crate::rng::RngStream;

/// Linear predictors are clamped to this magnitude before exponentiating.
pub const ETA_CLAMP: f64 = 700.0;
/// Transformed-space gradient tolerance for [`fit_regression`].
pub const REGRESSION_GRAD_TOL: f64 = 1e-6;
const NU_EDGE: f64 = 1e-8;
const CHUNK: usize = 512;

/// Design matrix (intercept first) and count response.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    x: DMatrix<f64>,
    y: Vec<u64>,
    names: Vec<String>,
}

impl RegressionData {
    /// `x` is `n x s` with the intercept column included by the caller.
    pub fn new(x: DMatrix<f64>, y: Vec<u64>, names: Vec<String>) -> Result<Self> {
        let (n, s) = x.shape();
        if s == 0 {
            return Err(Error::InvalidData("design has no columns".into()));
        }
        if y.len() != n {
            return Err(Error::InvalidData(format!("{} responses for {n} design rows", y.len())));
        }
        if names.len() != s {
            return Err(Error::InvalidData(format!("{} names for {s} columns", names.len())));
        }
        if n < s {
            return Err(Error::InvalidData(format!("{n} rows cannot identify {s} coefficients")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("design contains non-finite values".into()));
        }
        for (j, col) in x.column_iter().enumerate() {
            if col.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidData(format!("column '{}' is identically zero", names[j])));
            }
        }
        Ok(Self { x, y, names })
    }

    /// Prepends an intercept column named `(Intercept)` to the covariates.
    pub fn with_intercept(covariates: &[(String, Vec<f64>)], y: Vec<u64>) -> Result<Self> {
        let n = y.len();
        if let Some((name, _)) = covariates.iter().find(|c| c.1.len() != n) {
            return Err(Error::InvalidData(format!("column '{name}' has the wrong length")));
        }
        let s = covariates.len() + 1;
        let x = DMatrix::from_fn(n, s, |i, j| if j == 0 { 1.0 } else { covariates[j - 1].1[i] });
        let mut names = vec!["(Intercept)".to_string()];
        names.extend(covariates.iter().map(|c| c.0.clone()));
        Self::new(x, y, names)
    }

    /// Draws responses from the PTE regression model at `(nu, beta)` with
    /// standard-normal covariates.
    pub fn simulate(n: usize, nu: f64, beta: &[f64], rng: &mut RngStream) -> Result<Self> {
        let s = beta.len();
        let mut x = DMatrix::zeros(n, s);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            x[(i, 0)] = 1.0;
            for j in 1..s {
                x[(i, j)] = rng.standard_normal();
            }
            let eta: f64 = (0..s).map(|j| x[(i, j)] * beta[j]).sum();
            y.push(reparam_to_pte(nu, eta.exp())?.sample_one(rng));
        }
        let names = (0..s).map(|j| if j == 0 { "(Intercept)".into() } else { format!("x{j}") }).collect();
        Self::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of coefficients `s`.
    pub fn n_coef(&self) -> usize {
        self.x.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn response(&self) -> &[u64] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Rows reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let x = DMatrix::from_fn(self.n(), self.n_coef(), |i, j| self.x[(perm[i], j)]);
        let y = perm.iter().map(|&i| self.y[i]).collect();
        Self::new(x, y, self.names.clone())
    }

    fn rank(&self) -> usize {
        let sv = self.x.clone().svd(false, false).singular_values;
        let top = sv.max();
        let tol = top * self.n().max(self.n_coef()) as f64 * f64::EPSILON;
        sv.iter().filter(|v| **v > tol).count()
    }

    fn check_rank(&self) -> Result<()> {
        let rank = self.rank();
        if rank < self.n_coef() {
            return Err(Error::RankDeficientDesign { rank, columns: self.n_coef() });
        }
        Ok(())
    }

    fn eta(&self, i: usize, beta: &[f64]) -> (f64, bool) {
        let eta: f64 = self.x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
        if eta.abs() > ETA_CLAMP {
            (eta.signum() * ETA_CLAMP, true)
        } else {
            (eta, false)
        }
    }
}

/// `alpha = 2 - nu`, `theta = nu / (2 mu)`; the result has mean `mu`.
pub fn reparam_to_pte(nu: f64, mu: f64) -> Result<PteParams> {
    if !(1.0..=3.0).contains(&nu) {
        return Err(Error::Domain(format!("nu must lie in [1, 3], got {nu}")));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    PteParams::new(2.0 - nu, nu / (2.0 * mu))
}

/// Log-likelihood with its `(nu, beta)` gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionLoglik {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Some linear predictor hit the `±700` clamp.
    pub clamped: bool,
}

/// Fixed-order pairwise sum, independent of how the terms were produced.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Value and gradient of the regression log-likelihood. Observations are
/// processed in parallel over fixed chunks and combined pairwise, so the
/// result does not depend on the thread count.
pub fn loglik_regression_grad(nu: f64, beta: &[f64], data: &RegressionData) -> Result<RegressionLoglik> {
    if !(1.0..=3.0).contains(&nu) {
        return Err(Error::Domain(format!("nu must lie in [1, 3], got {nu}")));
    }
    if beta.len() != data.n_coef() || beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter("beta must be finite with one entry per column".into()));
    }
    let s = data.n_coef();
    let alpha = 2.0 - nu;
    let idx: Vec<usize> = (0..data.n()).collect();
    let partial: Vec<(Vec<f64>, bool)> = idx
        .par_chunks(CHUNK)
        .map(|rows| {
            // slot 0: loglik, slot 1: d/dnu, then d/dbeta
            let mut terms = vec![Vec::with_capacity(rows.len()); s + 2];
            let mut clamped = false;
            for &i in rows {
                let (eta, c) = data.eta(i, beta);
                clamped |= c;
                let theta = nu / 2.0 * (-eta).exp();
                let p = PteParams::new(alpha, theta).expect("nu in range, theta positive");
                let y = data.y[i];
                let d = p.log_pmf_derivatives(y);
                terms[0].push(p.log_pmf(y));
                terms[1].push(-d.d_alpha + d.d_theta * theta / nu);
                let db = if c { 0.0 } else { -d.d_theta * theta };
                for j in 0..s {
                    terms[j + 2].push(db * data.x[(i, j)]);
                }
            }
            (terms.iter().map(|t| pairwise_sum(t)).collect(), clamped)
        })
        .collect();
    let clamped = partial.iter().any(|p| p.1);
    let totals: Vec<f64> = (0..s + 2)
        .map(|k| pairwise_sum(&partial.iter().map(|p| p.0[k]).collect::<Vec<_>>()))
        .collect();
    Ok(RegressionLoglik { value: totals[0], grad: totals[1..].to_vec(), clamped })
}

/// `sum_i log p(y_i; 2 - nu, nu / (2 mu_i))` with `mu_i = exp(x_i' beta)`.
pub fn loglik_regression(nu: f64, beta: &[f64], data: &RegressionData) -> Result<f64> {
    Ok(loglik_regression_grad(nu, beta, data)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
}

fn coefficient_rows(names: &[String], est: &[f64], se: Option<&[f64]>) -> Vec<CoefficientRow> {
    let normal = Normal::standard();
    names
        .iter()
        .zip(est)
        .enumerate()
        .map(|(k, (name, &estimate))| {
            let se = se.map(|s| s[k]).filter(|s| s.is_finite() && *s > 0.0);
            let t = se.map(|s| estimate / s);
            let p = t.map(|t| 2.0 * normal.sf(t.abs()));
            CoefficientRow { name: name.clone(), estimate, se, t, p }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub nu: f64,
    pub beta: Vec<f64>,
    /// Covariance of `(nu, beta)` from the inverse observed information.
    pub cov: Option<Vec<Vec<f64>>>,
    /// `nu` first, then one row per coefficient.
    pub rows: Vec<CoefficientRow>,
    pub loglik: f64,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub at_boundary: bool,
    pub clamped: bool,
}

impl RegressionFit {
    pub fn require_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { iterations: self.iterations })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionInit {
    pub nu: f64,
    pub beta: Vec<f64>,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Maximum likelihood for `(nu, beta)`, with `nu = 1 + 2 sigmoid(tau)`.
/// Defaults start from the Poisson baseline coefficients and `nu = 2`.
///
/// Non-convergence, including a linear predictor stuck at the clamp, is
/// reported by `converged = false` with the best iterate.
pub fn fit_regression(data: &RegressionData, init: Option<RegressionInit>) -> Result<RegressionFit> {
    data.check_rank()?;
    let s = data.n_coef();
    let init = match init {
        Some(i) => i,
        None => RegressionInit { nu: 2.0, beta: fit_poisson_baseline(data)?.beta },
    };
    if init.beta.len() != s {
        return Err(Error::InvalidParameter("initial beta has the wrong length".into()));
    }
    let u = ((init.nu - 1.0) / 2.0).clamp(1e-9, 1.0 - 1e-9);
    let mut z0 = vec![(u / (1.0 - u)).ln()];
    z0.extend_from_slice(&init.beta);

    let objective = |z: &[f64]| -> (f64, Vec<f64>) {
        let sg = sigmoid(z[0]);
        let nu = 1.0 + 2.0 * sg;
        match loglik_regression_grad(nu, &z[1..], data) {
            Ok(l) => {
                let mut g: Vec<f64> = l.grad.iter().map(|v| -v).collect();
                g[0] *= 2.0 * sg * (1.0 - sg);
                (-l.value, g)
            }
            Err(_) => (f64::NAN, vec![f64::NAN; s + 1]),
        }
    };
    let min = minimize_bfgs(objective, &z0, &BfgsOptions { max_iter: 2000, grad_tol: REGRESSION_GRAD_TOL });

    let raw_nu = 1.0 + 2.0 * sigmoid(min.x[0]);
    let nu = raw_nu.clamp(1.0 + NU_EDGE, 3.0 - NU_EDGE);
    let at_boundary = raw_nu != nu || nu - 1.0 < 1e-6 || 3.0 - nu < 1e-6;
    let beta = min.x[1..].to_vec();
    let at = loglik_regression_grad(nu, &beta, data)?;

    let cov = if at_boundary { None } else { regression_covariance(nu, &beta, data) };
    let se: Option<Vec<f64>> = cov.as_ref().map(|c| (0..=s).map(|k| c[k][k].sqrt()).collect());
    let mut names = vec!["nu".to_string()];
    names.extend(data.names.iter().cloned());
    let mut est = vec![nu];
    est.extend_from_slice(&beta);
    Ok(RegressionFit {
        nu,
        rows: coefficient_rows(&names, &est, se.as_deref()),
        beta,
        cov,
        loglik: at.value,
        aic: -2.0 * at.value + 2.0 * (s + 1) as f64,
        converged: min.converged && !at.clamped,
        iterations: min.iterations,
        at_boundary,
        clamped: at.clamped,
    })
}

/// Inverse of the central-difference Hessian of the analytic gradient in
/// `(nu, beta)`, or `None` when it is not negative definite.
fn regression_covariance(nu: f64, beta: &[f64], data: &RegressionData) -> Option<Vec<Vec<f64>>> {
    let s = beta.len();
    let dim = s + 1;
    let mut point = vec![nu];
    point.extend_from_slice(beta);
    let grad_at = |p: &[f64]| loglik_regression_grad(p[0], &p[1..], data).ok().map(|l| l.grad);
    let mut h = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let step = 1e-5 * point[k].abs().max(1.0);
        let mut up = point.clone();
        let mut dn = point.clone();
        up[k] += step;
        dn[k] -= step;
        let (gu, gd) = (grad_at(&up)?, grad_at(&dn)?);
        for j in 0..dim {
            h[(j, k)] = (gu[j] - gd[j]) / (2.0 * step);
        }
    }
    let info = -(&h + h.transpose()) * 0.5;
    let inv = info.cholesky()?.inverse();
    Some((0..dim).map(|i| (0..dim).map(|j| inv[(i, j)]).collect()).collect())
}

/// `exp(x' beta)` with the linear predictor clamped to `±700`.
pub fn predict_mean(beta: &[f64], x_row: &[f64]) -> f64 {
    let eta: f64 = x_row.iter().zip(beta).map(|(a, b)| a * b).sum();
    eta.clamp(-ETA_CLAMP, ETA_CLAMP).exp()
}

/// Log-link Poisson regression fitted by IRLS.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonRegressionFit {
    pub beta: Vec<f64>,
    pub rows: Vec<CoefficientRow>,
    pub loglik: f64,
    pub aic: f64,
    pub iterations: usize,
}

const IRLS_MAX_ITER: usize = 100;

pub fn fit_poisson_baseline(data: &RegressionData) -> Result<PoissonRegressionFit> {
    data.check_rank()?;
    let (n, s) = data.x.shape();
    let ybar = data.y.iter().sum::<u64>() as f64 / n as f64;
    if ybar == 0.0 {
        return Err(Error::InvalidData("all responses are zero".into()));
    }
    let yv = DVector::from_iterator(n, data.y.iter().map(|&v| v as f64));
    // start at mu_i = y_i + 0.1, the usual GLM initialization
    let mut eta = yv.map(|v| (v + 0.1).ln());
    let mut prev_dev = f64::INFINITY;
    for it in 1..=IRLS_MAX_ITER {
        let mu = eta.map(|e: f64| e.clamp(-ETA_CLAMP, ETA_CLAMP).exp());
        let z = DVector::from_fn(n, |i, _| eta[i] + (yv[i] - mu[i]) / mu[i]);
        let xw = DMatrix::from_fn(n, s, |i, j| data.x[(i, j)] * mu[i]);
        let xtwx = xw.transpose() * &data.x;
        let rhs = xw.transpose() * z;
        let chol = xtwx.clone().cholesky().ok_or(Error::RankDeficientDesign { rank: data.rank(), columns: s })?;
        let beta = chol.solve(&rhs);
        eta = &data.x * &beta;
        let dev = poisson_deviance(&yv, &eta);
        if (dev - prev_dev).abs() <= 1e-12 * (dev.abs() + 0.1) {
            return Ok(finish_poisson(data, &beta, &eta, &xtwx, it));
        }
        prev_dev = dev;
    }
    Err(Error::NonConvergence { iterations: IRLS_MAX_ITER })
}

fn poisson_deviance(y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    2.0 * y
        .iter()
        .zip(eta.iter())
        .map(|(&y, &e)| {
            let mu = e.clamp(-ETA_CLAMP, ETA_CLAMP).exp();
            let t = if y > 0.0 { y * (y / mu).ln() } else { 0.0 };
            t - (y - mu)
        })
        .sum::<f64>()
}

fn finish_poisson(
    data: &RegressionData,
    beta: &DVector<f64>,
    eta: &DVector<f64>,
    xtwx: &DMatrix<f64>,
    iterations: usize,
) -> PoissonRegressionFit {
    let loglik = data
        .y
        .iter()
        .zip(eta.iter())
        .map(|(&y, &e)| {
            let e = e.clamp(-ETA_CLAMP, ETA_CLAMP);
            y as f64 * e - e.exp() - ln_gamma(y as f64 + 1.0)
        })
        .sum::<f64>();
    let se: Option<Vec<f64>> = xtwx
        .clone()
        .cholesky()
        .map(|c| c.inverse().diagonal().iter().map(|v| v.sqrt()).collect());
    let beta: Vec<f64> = beta.iter().copied().collect();
    PoissonRegressionFit {
        rows: coefficient_rows(&data.names, &beta, se.as_deref()),
        aic: -2.0 * loglik + 2.0 * beta.len() as f64,
        beta,
        loglik,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::CountDataset;
    use crate::estimate::{fit_mle, loglik};
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    fn seizure_rows() -> RegressionData {
        let d = CountDataset::seizure();
        let y: Vec<u64> = d.rows().iter().flat_map(|&(v, f)| std::iter::repeat_n(v, f as usize)).collect();
        RegressionData::with_intercept(&[], y).unwrap()
    }

    fn small_data(seed: u64, n: usize) -> RegressionData {
        RegressionData::simulate(n, 2.3, &[0.4, 0.5, -0.3], &mut RngStream::new(seed)).unwrap()
    }

    #[test]
    fn reparam_examples() {
        let p = reparam_to_pte(2.0, 1.0).unwrap();
        assert_eq!((p.alpha(), p.theta()), (0.0, 1.0));
        let q = reparam_to_pte(2.701, 1.547).unwrap();
        assert!((q.alpha() + 0.701).abs() < 1e-12 && (q.theta() - 0.873).abs() < 1e-3);
        let r = reparam_to_pte(1.0, 2.0).unwrap();
        assert_eq!((r.alpha(), r.theta()), (1.0, 0.25));
        assert!(reparam_to_pte(3.5, 1.0).is_err());
        assert!(reparam_to_pte(2.0, 0.0).is_err());
        for &(nu, mu) in &[(1.3, 0.2), (2.9, 14.0), (2.0, 3.3)] {
            let m = reparam_to_pte(nu, mu).unwrap().mean();
            assert!((m - mu).abs() < 1e-12 * mu);
        }
    }

    #[test]
    fn intercept_only_matches_pooled_loglik() {
        let data = seizure_rows();
        let counts = CountDataset::seizure();
        let m1 = counts.mean();
        for &nu in &[1.2, 2.0, 2.7] {
            let v = loglik_regression(nu, &[m1.ln()], &data).unwrap();
            let want = loglik(&reparam_to_pte(nu, m1).unwrap(), &counts);
            assert!((v - want).abs() < 1e-10, "{v} vs {want}");
        }
    }

    #[test]
    fn geometric_branch() {
        let data = small_data(2, 40);
        let beta = [0.1, -0.2, 0.3];
        let v = loglik_regression(2.0, &beta, &data).unwrap();
        let want: f64 = (0..data.n())
            .map(|i| {
                let mu = predict_mean(&beta, data.design().row(i).transpose().as_slice());
                let t = 1.0 / mu;
                t.ln() - (data.response()[i] as f64 + 1.0) * t.ln_1p()
            })
            .sum();
        assert!((v - want).abs() < 1e-10);
    }

    #[test]
    fn matches_exact_summation_oracle() {
        let data = small_data(5, 60);
        let mut rng = RngStream::new(17);
        for _ in 0..5 {
            let nu = 1.0 + 2.0 * rng.uniform();
            let beta = [rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5];
            let (a, mut exact) = (2.0 - nu, BigRational::from_float(0.0).unwrap());
            for i in 0..data.n() {
                let mu = predict_mean(&beta, data.design().row(i).transpose().as_slice());
                let t = nu / (2.0 * mu);
                let k = data.response()[i] as f64 + 1.0;
                let term = (t * ((1.0 - a) / (1.0 + t).powf(k) + 2.0 * a / (1.0 + 2.0 * t).powf(k))).ln();
                exact += BigRational::from_float(term).unwrap();
            }
            let v = loglik_regression(nu, &beta, &data).unwrap();
            let e = exact.to_f64().unwrap();
            assert!((v - e).abs() < 1e-11 * e.abs(), "{v} vs {e}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let data = small_data(9, 80);
        let mut rng = RngStream::new(23);
        for _ in 0..20 {
            let nu = 1.1 + 1.8 * rng.uniform();
            let beta: Vec<f64> = (0..3).map(|_| rng.uniform() - 0.5).collect();
            let g = loglik_regression_grad(nu, &beta, &data).unwrap().grad;
            let mut point = vec![nu];
            point.extend_from_slice(&beta);
            for k in 0..4 {
                let h = 1e-6;
                let mut up = point.clone();
                let mut dn = point.clone();
                up[k] += h;
                dn[k] -= h;
                let fd = (loglik_regression(up[0], &up[1..], &data).unwrap()
                    - loglik_regression(dn[0], &dn[1..], &data).unwrap())
                    / (2.0 * h);
                let err = (fd - g[k]).abs() / g[k].abs().max(1.0);
                assert!(err < 1e-5, "component {k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn permutation_invariance() {
        let data = small_data(4, 1500);
        let perm: Vec<usize> = (0..data.n()).rev().collect();
        let other = data.permuted(&perm).unwrap();
        let beta = [0.2, 0.1, -0.1];
        let a = loglik_regression(2.4, &beta, &data).unwrap();
        let b = loglik_regression(2.4, &beta, &other).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn clamp_is_flagged() {
        let data = small_data(4, 30);
        let l = loglik_regression_grad(2.0, &[800.0, 0.0, 0.0], &data).unwrap();
        assert!(l.clamped && l.value.is_finite());
        assert!(predict_mean(&[1e6], &[1.0]).is_finite());
    }

    #[test]
    fn intercept_only_fit_reduces_to_mle() {
        let data = seizure_rows();
        let fit = fit_regression(&data, None).unwrap();
        let mle = fit_mle(&CountDataset::seizure(), None);
        assert!(fit.converged);
        assert!((fit.loglik - mle.loglik).abs() < 1e-6, "{} vs {}", fit.loglik, mle.loglik);
        assert!((fit.nu - 2.701).abs() < 0.02);
        assert_eq!(fit.aic, -2.0 * fit.loglik + 4.0);
        assert_eq!(fit.rows.len(), 2);
        assert!(fit.rows.iter().all(|r| r.se.is_some()));
    }

    #[test]
    fn poisson_baseline_examples() {
        let fit = fit_poisson_baseline(&seizure_rows()).unwrap();
        assert!((fit.beta[0].exp() - 1.544).abs() < 1e-3);
        assert!((fit.loglik + 636.05).abs() < 0.1);
        let constant = RegressionData::with_intercept(&[], vec![3; 10]).unwrap();
        let c = fit_poisson_baseline(&constant).unwrap();
        assert!((c.beta[0] - 3f64.ln()).abs() < 1e-12);
        // IRLS first-order condition: fitted means sum to the responses
        let d = small_data(8, 400);
        let f = fit_poisson_baseline(&d).unwrap();
        let total: f64 = (0..d.n())
            .map(|i| predict_mean(&f.beta, d.design().row(i).transpose().as_slice()))
            .sum();
        let ysum = d.response().iter().sum::<u64>() as f64;
        assert!((total - ysum).abs() < 1e-8 * ysum);
    }

    #[test]
    fn rank_deficient_design() {
        let x1 = vec![0.5, 1.0, -2.0, 3.0, 0.1];
        let data = RegressionData::with_intercept(
            &[("a".into(), x1.clone()), ("b".into(), x1)],
            vec![0, 1, 2, 1, 4],
        )
        .unwrap();
        assert!(matches!(fit_regression(&data, None), Err(Error::RankDeficientDesign { rank: 2, columns: 3 })));
        assert!(matches!(fit_poisson_baseline(&data), Err(Error::RankDeficientDesign { .. })));
    }

    #[test]
    fn data_validation() {
        assert!(RegressionData::with_intercept(&[("z".into(), vec![0.0; 3])], vec![1, 2, 3]).is_err());
        assert!(RegressionData::with_intercept(&[("a".into(), vec![1.0; 2])], vec![1, 2, 3]).is_err());
        assert!(RegressionData::with_intercept(&[], vec![]).is_err());
    }

    #[test]
    fn synthetic_recovery() {
        let truth = [2.5, 0.5, 0.3, -0.2];
        let data = RegressionData::simulate(5000, truth[0], &truth[1..], &mut RngStream::new(2024)).unwrap();
        let fit = fit_regression(&data, None).unwrap();
        assert!(fit.converged);
        for (row, t) in fit.rows.iter().zip(truth) {
            let se = row.se.unwrap();
            assert!((row.estimate - t).abs() < 3.0 * se, "{}: {} vs {t} (se {se})", row.name, row.estimate);
        }
    }
}
