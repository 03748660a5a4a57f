//! Poisson transmuted-exponential (PTE) count distribution.

pub mod dataset;
pub mod distribution;
pub mod error;
pub mod estimate;
pub mod gof;
pub mod lerch;
pub mod moments;
pub mod optim;
pub mod params;
pub mod quadrature;
pub mod regress;
pub mod rng;
pub mod risk;
pub mod sampling;
pub mod taylor;

pub use dataset::CountDataset;
pub use distribution::Mode;
pub use error::{Error, Result};
pub use estimate::{
    fit_mle, fit_moments, fit_proportion_moment, loglik, observed_information, score, FitMethod,
    FitResult, ObservedInformation,
};
pub use gof::{aic, chi_square, fit_poisson, Cell, ChiSquareReport, CountModel, Grouping, PoissonModel};
pub use moments::MomentSummary;
pub use params::PteParams;
pub use risk::{
    compound_density_erlang2, compound_density_exp, compound_pmf_discrete, simulate_aggregate,
    CompoundDistribution, DiscreteSeverity, SeverityModel,
};
pub use regress::{
    fit_poisson_baseline, fit_regression, loglik_regression, predict_mean, reparam_to_pte,
    CoefficientRow, PoissonRegressionFit, RegressionData, RegressionFit,
};
pub use rng::RngStream;
