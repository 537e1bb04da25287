//! Weight-grid sweeps over the clustering pipeline and their regression analysis.

mod regression;
mod stats;
mod svd;
mod sweep;

pub use regression::{fit_design, ols_fit, Intercept, RegressionReport, Term, MIN_RECORDS};
pub use stats::{f_survival, student_t_cdf, student_t_quantile};
pub use svd::{svd, Svd};
pub use sweep::{
    best_per_n, best_per_n_csv, build_dendrogram, enumerate_weightings, sweep, sweep_csv, SweepConfig,
    SweepRecord,
};
