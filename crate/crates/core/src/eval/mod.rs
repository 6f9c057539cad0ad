//! Quantitative evaluation: empirical densities, distances to analytic
//! truth, artifact metrics, and the Fokker-Planck cross-oracle.

pub mod fp;
pub mod metrics;
pub mod swirl_stats;

pub use fp::{fokker_planck_evolve, guided_sde_drift, FpOptions};
pub use metrics::{
    fraction_standard_error, histogram_density, tv_distance, valley_mass_grid,
    valley_mass_samples, Histogram, MetricReport,
};
pub use swirl_stats::{swirl_outlier_stats, SwirlStats, ARC_BINS};
