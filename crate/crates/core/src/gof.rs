//! Goodness of fit: grouped chi-square, AIC and the Poisson baseline for
//! count datasets.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::dataset::CountDataset;
use crate::error::{Error, Result};
use crate::params::PteParams;

/// A count law that can fill expected-frequency tables.
pub trait CountModel {
    fn pmf(&self, x: u64) -> f64;
    /// `P(X >= x)`.
    fn survival(&self, x: u64) -> f64;
    /// Number of free parameters, for AIC and degrees of freedom.
    fn n_params(&self) -> usize;
}

impl CountModel for PteParams {
    fn pmf(&self, x: u64) -> f64 {
        PteParams::pmf(self, x)
    }

    fn survival(&self, x: u64) -> f64 {
        PteParams::survival(self, x)
    }

    fn n_params(&self) -> usize {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonModel {
    pub lambda: f64,
}

impl PoissonModel {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("Poisson rate must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }

    pub fn log_pmf(&self, x: u64) -> f64 {
        let xf = x as f64;
        xf * self.lambda.ln() - self.lambda - ln_gamma(xf + 1.0)
    }

    fn dist(&self) -> Poisson {
        Poisson::new(self.lambda).expect("validated rate")
    }
}

impl CountModel for PoissonModel {
    fn pmf(&self, x: u64) -> f64 {
        self.dist().pmf(x)
    }

    fn survival(&self, x: u64) -> f64 {
        if x == 0 {
            1.0
        } else {
            self.dist().sf(x - 1)
        }
    }

    fn n_params(&self) -> usize {
        1
    }
}

/// Poisson fit to a count dataset: `lambda = m1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonFit {
    pub model: PoissonModel,
    pub loglik: f64,
}

pub fn fit_poisson(data: &CountDataset) -> Result<PoissonFit> {
    let model = PoissonModel::new(data.mean())?;
    let loglik = data
        .rows()
        .iter()
        .filter(|r| r.1 > 0)
        .map(|&(x, f)| f as f64 * model.log_pmf(x))
        .sum();
    Ok(PoissonFit { model, loglik })
}

/// Akaike information criterion `-2 loglik + 2k`.
pub fn aic(loglik: f64, k: usize) -> f64 {
    -2.0 * loglik + 2.0 * k as f64
}

/// Inclusive range of counts; `hi = None` is open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub lo: u64,
    pub hi: Option<u64>,
}

impl Cell {
    pub fn contains(&self, x: u64) -> bool {
        x >= self.lo && self.hi.is_none_or(|h| x <= h)
    }

    pub fn label(&self) -> String {
        match self.hi {
            None => format!("{}+", self.lo),
            Some(h) if h == self.lo => format!("{h}"),
            Some(h) => format!("{}-{}", self.lo, h),
        }
    }

    fn probability<M: CountModel + ?Sized>(&self, model: &M) -> f64 {
        match self.hi {
            None => model.survival(self.lo),
            Some(h) => (self.lo..=h).map(|x| model.pmf(x)).sum(),
        }
    }
}

/// Ordered, disjoint cells for grouped chi-square tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Grouping {
    cells: Vec<Cell>,
}

impl Grouping {
    pub fn new(cells: Vec<Cell>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidParameter("grouping has no cells".into()));
        }
        for w in cells.windows(2) {
            let Some(h) = w[0].hi else {
                return Err(Error::InvalidParameter("only the last cell may be open-ended".into()));
            };
            if w[1].lo <= h {
                return Err(Error::InvalidParameter("cells overlap or are out of order".into()));
            }
        }
        if cells.iter().any(|c| c.hi.is_some_and(|h| h < c.lo)) {
            return Err(Error::InvalidParameter("cell with hi < lo".into()));
        }
        Ok(Self { cells })
    }

    /// Singletons `0 ..= last - 1` and an open cell `last+`.
    pub fn open_tail(last: u64) -> Self {
        let mut cells: Vec<Cell> = (0..last).map(|x| Cell { lo: x, hi: Some(x) }).collect();
        cells.push(Cell { lo: last, hi: None });
        Self { cells }
    }

    /// Singletons `0 ..= last`; the tail beyond `last` is not counted.
    pub fn closed(last: u64) -> Self {
        Self { cells: (0..=last).map(|x| Cell { lo: x, hi: Some(x) }).collect() }
    }

    /// One cell per value up to the largest observed value, the last one
    /// open-ended.
    pub fn default_for(data: &CountDataset) -> Self {
        Self::open_tail(data.max_value())
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub label: String,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub cells: Vec<CellRow>,
    /// `cells - 1 - fitted parameters`, when positive.
    pub df: Option<usize>,
    pub p_value: Option<f64>,
}

/// Pearson chi-square `sum (obs - exp)^2 / exp` over the grouping cells.
/// Every observed value must fall in some cell.
pub fn chi_square<M: CountModel + ?Sized>(
    model: &M,
    data: &CountDataset,
    grouping: &Grouping,
) -> Result<ChiSquareReport> {
    let n = data.n() as f64;
    let mut observed = vec![0u64; grouping.cells.len()];
    for &(x, f) in data.rows().iter().filter(|r| r.1 > 0) {
        let i = grouping
            .cells
            .iter()
            .position(|c| c.contains(x))
            .ok_or_else(|| Error::InvalidParameter(format!("value {x} is not covered by any cell")))?;
        observed[i] += f;
    }
    let mut statistic = 0.0;
    let mut rows = Vec::with_capacity(observed.len());
    for (cell, &obs) in grouping.cells.iter().zip(&observed) {
        let expected = n * cell.probability(model);
        if !(expected > 0.0) {
            return Err(Error::EmptyCell(cell.label()));
        }
        statistic += (obs as f64 - expected).powi(2) / expected;
        rows.push(CellRow { label: cell.label(), observed: obs, expected });
    }
    let df = rows.len().checked_sub(1 + model.n_params()).filter(|&d| d > 0);
    let p_value = df.map(|d| {
        ChiSquared::new(d as f64).map(|c| c.sf(statistic)).unwrap_or(f64::NAN)
    });
    Ok(ChiSquareReport { statistic, cells: rows, df, p_value })
}
