//! Distance-to-manifold metrics for the double-swirl experiment.

use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use crate::swirl::SwirlSpec;

pub const ARC_BINS: usize = 64;

#[derive(Debug, Clone, Copy)]
pub struct SwirlStats {
    /// Fraction of samples farther than epsilon from both spirals.
    pub outlier_fraction: f64,
    pub mean_manifold_distance: f64,
    /// Fraction of the 64 arc-length bins per spiral holding at least one
    /// sample (by nearest manifold point).
    pub mode_recall: f64,
}

pub fn swirl_outlier_stats(
    samples: &Matrix,
    spec: &SwirlSpec,
    epsilon: f64,
) -> Result<SwirlStats> {
    if samples.rows() == 0 {
        return Err(SgError::Config("swirl stats need at least one sample".into()));
    }
    if samples.cols() != 2 {
        return Err(SgError::DimensionMismatch { expected: 2, got: samples.cols() });
    }
    if !(epsilon > 0.0) {
        return Err(SgError::Config(format!("epsilon {epsilon} must be > 0")));
    }
    spec.validate()?;
    let manifold = spec.manifold();
    let per_spiral = spec.arc_points;
    let mut outliers = 0usize;
    let mut dist_sum = 0.0;
    let mut bins = vec![false; 2 * ARC_BINS];
    for i in 0..samples.rows() {
        let p = samples.row(i);
        let mut best = f64::INFINITY;
        let mut best_idx = 0usize;
        for (j, m) in manifold.iter_rows().enumerate() {
            let dx = p[0] - m[0];
            let dy = p[1] - m[1];
            let d2 = dx * dx + dy * dy;
            if d2 < best {
                best = d2;
                best_idx = j;
            }
        }
        let dist = best.sqrt();
        dist_sum += dist;
        if dist > epsilon {
            outliers += 1;
        }
        let spiral = best_idx / per_spiral;
        let arc_pos = best_idx % per_spiral;
        let bin = (arc_pos * ARC_BINS / per_spiral).min(ARC_BINS - 1);
        bins[spiral * ARC_BINS + bin] = true;
    }
    let n = samples.rows() as f64;
    Ok(SwirlStats {
        outlier_fraction: outliers as f64 / n,
        mean_manifold_distance: dist_sum / n,
        mode_recall: bins.iter().filter(|&&b| b).count() as f64 / (2 * ARC_BINS) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn on_manifold_samples_have_zero_distance() {
        let spec = SwirlSpec { arc_points: 2000, ..SwirlSpec::default() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let noiseless = SwirlSpec { jitter_std: 0.0, ..spec.clone() };
        let (samples, _) = noiseless.sample(&mut rng, 500);
        let stats = swirl_outlier_stats(&samples, &spec, 0.2).unwrap();
        assert_eq!(stats.outlier_fraction, 0.0);
        assert!(stats.mean_manifold_distance < 5e-3, "{}", stats.mean_manifold_distance);
        assert!(stats.mode_recall > 0.9, "recall {}", stats.mode_recall);
    }

    #[test]
    fn origin_samples_are_all_outliers() {
        let spec = SwirlSpec::default();
        let samples = Matrix::from_rows(&vec![vec![0.0, 0.0]; 10]);
        let stats = swirl_outlier_stats(&samples, &spec, 0.2).unwrap();
        assert_eq!(stats.outlier_fraction, 1.0);
        // the inner spiral end sits at radius scale * theta_min ~ 0.5
        assert!(stats.mean_manifold_distance > 0.3);
    }

    #[test]
    fn input_validation() {
        let spec = SwirlSpec::default();
        assert!(swirl_outlier_stats(&Matrix::zeros(0, 2), &spec, 0.2).is_err());
        assert!(swirl_outlier_stats(&Matrix::zeros(3, 1), &spec, 0.2).is_err());
        assert!(swirl_outlier_stats(&Matrix::zeros(3, 2), &spec, 0.0).is_err());
    }
}
