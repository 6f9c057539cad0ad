//! Closed-form ground truth on Gaussian mixtures: diffused densities, exact
//! scores and velocities, self-guided densities, and heat-equation checks.

pub mod grid;
pub mod heat;
pub mod mixture;
pub mod sg;

pub use grid::{DensityGrid, GridSpec};
pub use heat::{heat_residual, heat_residual_brownian, is_bimodal_at_origin, smoothed_density};
pub use mixture::{MixtureComponent, MixtureDensity, LOG_FLOOR};
pub use sg::{sg_analytic_score, sg_density_grid, sg_log_density};
