//! Collective risk model `S = Y_1 + ... + Y_X` with PTE claim counts `X`.
//!
//! Exponential and Erlang(2) severities have closed-form densities for the
//! continuous part of `S`; lattice severities go through the mixed-Poisson
//! Panjer recursion over the moment table
//! `f^i(y) = E[lambda^i f_S(y | lambda)]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::PteParams;
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::rng::RngStream;

/// Largest recursion table, in cells, that [`compound_pmf_discrete`] builds.
pub const TABLE_BUDGET: usize = 20_000_000;

/// Claim-size law on `1..=M` with `h(y) >= 0` summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSeverity {
    /// `probs[j] = h(j + 1)`
    probs: Vec<f64>,
}

impl DiscreteSeverity {
    /// `probs[j]` is the mass at `j + 1`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSeverity("empty severity pmf".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidSeverity("severity masses must be finite and non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSeverity(format!("severity masses sum to {total}, not 1")));
        }
        let mut probs = probs;
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        Ok(Self { probs })
    }

    /// From `(value, probability)` pairs with values `>= 1`.
    pub fn from_pairs(pairs: &[(u64, f64)]) -> Result<Self> {
        let max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        if pairs.iter().any(|p| p.0 == 0) {
            return Err(Error::InvalidSeverity("severity support must start at 1".into()));
        }
        let mut probs = vec![0.0; max as usize];
        for &(v, p) in pairs {
            probs[v as usize - 1] += p;
        }
        Self::new(probs)
    }

    /// Point mass at `y`.
    pub fn degenerate(y: u64) -> Result<Self> {
        Self::from_pairs(&[(y, 1.0)])
    }

    pub fn pmf(&self, y: u64) -> f64 {
        if y == 0 {
            return 0.0;
        }
        self.probs.get(y as usize - 1).copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> u64 {
        self.probs.len() as u64
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(j, p)| (j + 1) as f64 * p).sum()
    }

    pub fn pairs(&self) -> Vec<(u64, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(j, p)| (j as u64 + 1, *p))
            .collect()
    }

    fn sample(&self, rng: &mut RngStream) -> u64 {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (j, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return j as u64 + 1;
            }
        }
        self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0) as u64 + 1
    }
}

/// Mass-rounding discretization of a continuous claim law on a lattice of
/// the given `width`: the point `j * width` receives
/// `F((j + 1/2) width) - F((j - 1/2) width)`.
///
/// Returns the mass at zero separately because lattice severities start at
/// one; the tail beyond `max_index` is lumped into the last point.
pub fn discretize_by_rounding<F>(cdf: F, width: f64, max_index: usize) -> Result<(f64, DiscreteSeverity)>
where
    F: Fn(f64) -> f64,
{
    if !(width > 0.0) || max_index == 0 {
        return Err(Error::InvalidSeverity("lattice width and size must be positive".into()));
    }
    let zero = cdf(0.5 * width);
    let keep = 1.0 - zero;
    if !(keep > 0.0) {
        return Err(Error::InvalidSeverity("all severity mass rounds to zero".into()));
    }
    let mut probs = Vec::with_capacity(max_index);
    for j in 1..=max_index {
        let lo = cdf((j as f64 - 0.5) * width);
        let hi = if j == max_index { 1.0 } else { cdf((j as f64 + 0.5) * width) };
        probs.push((hi - lo).max(0.0) / keep);
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok((zero, DiscreteSeverity::new(probs)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeverityModel {
    Exponential { rate: f64 },
    Erlang2 { rate: f64 },
    Discrete(DiscreteSeverity),
}

impl SeverityModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self::Exponential { rate })
    }

    pub fn erlang2(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self::Erlang2 { rate })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Erlang2 { rate } => 2.0 / rate,
            Self::Discrete(h) => h.mean(),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let exp = |rate: f64, rng: &mut RngStream| -(-rng.uniform()).ln_1p() / rate;
        match self {
            Self::Exponential { rate } => exp(*rate, rng),
            Self::Erlang2 { rate } => exp(*rate, rng) + exp(*rate, rng),
            Self::Discrete(h) => h.sample(rng) as f64,
        }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSeverity(format!("rate must be positive, got {rate}")))
    }
}

/// Density of the continuous part of `S` for Exponential(`rate`) claims.
pub fn compound_density_exp(freq: &PteParams, rate: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (a, th) = (freq.alpha(), freq.theta());
    let b1 = th * rate / (1.0 + th);
    let b2 = 2.0 * th * rate / (1.0 + 2.0 * th);
    th * rate
        * ((1.0 - a) * (-b1 * y).exp() / (1.0 + th).powi(2)
            + 2.0 * a * (-b2 * y).exp() / (1.0 + 2.0 * th).powi(2))
}

/// Density of the continuous part of `S` for Erlang(2, `rate`) claims.
///
/// `e^{-ry} sinh(c r y) = e^{-(1-c) r y} (1 - e^{-2 c r y}) / 2`, so each
/// branch is evaluated as a decaying exponential times `-expm1`.
pub fn compound_density_erlang2(freq: &PteParams, rate: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let (a, th) = (freq.alpha(), freq.theta());
    let branch = |s: f64| {
        let c = 1.0 / s.sqrt();
        let ry = rate * y;
        0.5 * (-(1.0 - c) * ry).exp() * -(-2.0 * c * ry).exp_m1() / s.powf(1.5)
    };
    rate * th * ((1.0 - a) * branch(1.0 + th) + 2.0 * a * branch(1.0 + 2.0 * th))
}

/// Aggregate-loss pmf `f_S(0..=s_max)` for a lattice severity.
///
/// Works with `g^i(y) = f^i(y) / i!`, which obeys
/// `g^i(y) = (i + 1) / y * sum_{x=1}^{y} x h(x) g^{i+1}(y - x)` and starts from
/// `g^i(0) = E[lambda^i e^{-lambda}] / i! = p(i)`, the PTE pmf itself. The
/// rescaling keeps every entry bounded where `f^i` would overflow.
pub fn compound_pmf_discrete(freq: &PteParams, h: &DiscreteSeverity, s_max: usize) -> Result<Vec<f64>> {
    let cells = (s_max + 1) * (s_max + 2) / 2;
    if cells > TABLE_BUDGET {
        return Err(Error::TruncationBudgetExceeded { requested: cells, budget: TABLE_BUDGET });
    }
    let hmax = h.max_value() as usize;
    // weights[x] = x h(x)
    let weights: Vec<f64> = (0..=hmax).map(|x| x as f64 * h.pmf(x as u64)).collect();

    // column y holds g^i(y) for i in 0..=s_max - y
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(s_max + 1);
    table.push(freq.pmf_recursive(s_max));
    for y in 1..=s_max {
        let rows = s_max - y + 1;
        let mut col = vec![0.0; rows];
        let top = y.min(hmax);
        for (i, slot) in col.iter_mut().enumerate() {
            let mut acc = 0.0;
            for x in 1..=top {
                let w = weights[x];
                if w != 0.0 {
                    acc += w * table[y - x][i + 1];
                }
            }
            *slot = (i as f64 + 1.0) / y as f64 * acc;
        }
        table.push(col);
    }
    Ok(table.iter().map(|c| c[0]).collect())
}

/// Frequency and severity of a collective risk model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompoundDistribution {
    pub frequency: PteParams,
    pub severity: SeverityModel,
}

impl CompoundDistribution {
    pub fn new(frequency: PteParams, severity: SeverityModel) -> Self {
        Self { frequency, severity }
    }

    /// `P(S = 0) = p(0)`; for lattice severities on `1..` no claim is zero.
    pub fn atom0(&self) -> f64 {
        self.frequency.pmf(0)
    }

    /// Density of the continuous part at `y > 0`; `None` for lattice severities.
    pub fn density(&self, y: f64) -> Option<f64> {
        match &self.severity {
            SeverityModel::Exponential { rate } => Some(compound_density_exp(&self.frequency, *rate, y)),
            SeverityModel::Erlang2 { rate } => Some(compound_density_erlang2(&self.frequency, *rate, y)),
            SeverityModel::Discrete(_) => None,
        }
    }

    /// `E[S] = E[X] E[Y]`.
    pub fn mean(&self) -> f64 {
        self.frequency.mean() * self.severity.mean()
    }

    /// `P(S <= y)`: atom plus the integrated density, or the summed lattice pmf.
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Ok(0.0);
        }
        match &self.severity {
            SeverityModel::Discrete(h) => {
                let pmf = compound_pmf_discrete(&self.frequency, h, y.floor() as usize)?;
                Ok(pmf.iter().sum())
            }
            _ => {
                // integrate whichever side of y is the bounded piece
                let f = |s: f64| self.density(s).unwrap_or(0.0);
                let v = if y <= 1.0 {
                    self.atom0() + integrate(f, 0.0, y, 1e-13)
                } else {
                    1.0 - integrate_to_infinity(f, y, 1e-13)
                };
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }

    /// Stop-loss premium `E[(S - d)+]`.
    pub fn stop_loss(&self, d: f64) -> Result<f64> {
        let d = d.max(0.0);
        match &self.severity {
            SeverityModel::Discrete(h) => {
                // E[(S-d)+] = E[S] - d + sum_{s < d} (d - s) f_S(s)
                let upto = d.ceil() as usize;
                let pmf = compound_pmf_discrete(&self.frequency, h, upto)?;
                let below: f64 = pmf
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| (*s as f64) < d)
                    .map(|(s, p)| (d - s as f64) * p)
                    .sum();
                Ok(self.mean() - d + below)
            }
            _ => {
                let f = |s: f64| (s - d) * self.density(s).unwrap_or(0.0);
                Ok(integrate_to_infinity(f, d, 1e-12))
            }
        }
    }

    /// Monte-Carlo aggregate losses.
    pub fn simulate(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        simulate_aggregate(&self.frequency, &self.severity, n, rng)
    }
}

/// Draws `n` aggregate losses: a PTE count, then that many severities.
pub fn simulate_aggregate(
    freq: &PteParams,
    severity: &SeverityModel,
    n: usize,
    rng: &mut RngStream,
) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let x = freq.sample_one(rng);
            (0..x).map(|_| severity.sample(rng)).sum()
        })
        .collect()
}
