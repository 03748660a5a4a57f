use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the PTE law: transmutation weight `alpha` in `[-1, 1]` and
/// rate `theta > 0` of the transmuted-exponential mixing density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PteParams {
    alpha: f64,
    theta: f64,
}

impl PteParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !alpha.is_finite() || !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [-1, 1], got {alpha}"
            )));
        }
        if !theta.is_finite() || theta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "theta must be positive and finite, got {theta}"
            )));
        }
        Ok(Self { alpha, theta })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `1 - alpha`, the weight on the slow geometric branch.
    #[inline]
    pub fn alpha_bar(&self) -> f64 {
        1.0 - self.alpha
    }

    /// `ln((1 + theta) / (1 + 2 theta))`, the log ratio of the two branch
    /// decay rates. Always negative.
    #[inline]
    pub(crate) fn log_rho(&self) -> f64 {
        (-self.theta / (1.0 + 2.0 * self.theta)).ln_1p()
    }

    /// Same law with the mixing rate rescaled, i.e. the count of claims that
    /// survive independent thinning with retention probability `keep`.
    pub fn thinned(&self, keep: f64) -> Result<Self> {
        if !(keep > 0.0 && keep <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "retention probability must lie in (0, 1], got {keep}"
            )));
        }
        Self::new(self.alpha, self.theta / keep)
    }
}

impl std::fmt::Display for PteParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PTE(alpha={}, theta={})", self.alpha, self.theta)
    }
}
