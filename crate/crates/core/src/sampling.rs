use rand_distr::{Distribution, Poisson};

use crate::params::PteParams;
use crate::rng::RngStream;

/// Rates up to this value use sequential cdf inversion; above it the
/// rejection sampler from `rand_distr` is used.
pub const POISSON_INVERSION_LIMIT: f64 = 30.0;

/// Poisson variate with mean `lambda`.
pub fn poisson_variate(lambda: f64, rng: &mut RngStream) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    if lambda > POISSON_INVERSION_LIMIT {
        let d = Poisson::new(lambda).expect("finite positive rate");
        return d.sample(rng.inner_mut()) as u64;
    }
    let u = rng.uniform();
    let mut x = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u >= cdf {
        x += 1;
        p *= lambda / x as f64;
        if p == 0.0 {
            // cdf rounded short of u in the far tail
            break;
        }
        cdf += p;
    }
    x
}

impl PteParams {
    /// One PTE variate: TED rate by inversion, then a Poisson count.
    pub fn sample_one(&self, rng: &mut RngStream) -> u64 {
        let u = rng.uniform();
        let lambda = self
            .ted_quantile(u)
            .expect("uniform stream never yields 1");
        poisson_variate(lambda, rng)
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<u64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}
