//! Correlation, decorrelation, mutual-information estimation, psychometric
//! fitting and bootstrap confidence intervals.

mod bootstrap;
mod correlation;
mod klt;
mod knn;
mod logistic;

pub use bootstrap::{bca_bootstrap, bca_bootstrap_multi, BootstrapConfig, Interval};
pub use correlation::{kendall_tau, pearson};
pub use klt::{covariance, klt_apply, klt_fit, KltBasis};
pub use knn::{knn_mutual_information, knn_mutual_information_seeded, nats_to_bits};
pub use logistic::{fit_logistic, fit_logistic_from, logistic, FitStatus, MappingFit};
