//! Weighted isotropic Gaussian mixtures: the ground-truth data family whose
//! diffusion, score, and flow velocity all stay in closed form.

use crate::error::{Result, SgError};
use crate::matrix::Matrix;
use crate::schedule::{NoiseSchedule, ScheduleKind};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Floor applied to log densities so that ratios never underflow to -inf.
pub const LOG_FLOOR: f64 = -745.0;

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: f64,
}

/// A weighted mixture of isotropic Gaussians in 1 or 2 dimensions.
#[derive(Debug, Clone)]
pub struct MixtureDensity {
    components: Vec<MixtureComponent>,
    dim: usize,
}

impl MixtureDensity {
    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(SgError::Config("mixture needs at least one component".into()));
        }
        let dim = components[0].mean.len();
        if dim == 0 || dim > 2 {
            return Err(SgError::Config(format!(
                "mixture dimension must be 1 or 2, got {dim}"
            )));
        }
        let mut total = 0.0;
        for (i, c) in components.iter().enumerate() {
            if c.mean.len() != dim {
                return Err(SgError::DimensionMismatch { expected: dim, got: c.mean.len() });
            }
            if !(c.weight > 0.0) {
                return Err(SgError::Config(format!(
                    "component {i} has non-positive weight {}",
                    c.weight
                )));
            }
            if !(c.std > 0.0) {
                return Err(SgError::Config(format!(
                    "component {i} has non-positive std {}",
                    c.std
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(SgError::Config(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(MixtureDensity { components, dim })
    }

    /// Equal-weight modes at +/-pos with a common std; the 1D toy dataset.
    pub fn two_mode(pos: f64, std: f64) -> Self {
        MixtureDensity::new(vec![
            MixtureComponent { weight: 0.5, mean: vec![-pos], std },
            MixtureComponent { weight: 0.5, mean: vec![pos], std },
        ])
        .expect("two-mode parameters are valid")
    }

    pub fn standard_normal(dim: usize) -> Self {
        MixtureDensity::new(vec![MixtureComponent {
            weight: 1.0,
            mean: vec![0.0; dim],
            std: 1.0,
        }])
        .expect("standard normal is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// The mixture restricted to one component (used as the class-conditional
    /// distribution; the component index is the class label).
    pub fn conditional(&self, index: usize) -> Result<Self> {
        let c = self
            .components
            .get(index)
            .ok_or_else(|| SgError::Config(format!("no mixture component {index}")))?;
        MixtureDensity::new(vec![MixtureComponent { weight: 1.0, ..c.clone() }])
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(SgError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// Per-component log densities log(w_i N(x; mu_i, s_i^2 I)).
    fn component_log_terms(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                let mut q = 0.0;
                for (xi, mi) in x.iter().zip(&c.mean) {
                    let d = xi - mi;
                    q += d * d;
                }
                let v = c.std * c.std;
                c.weight.ln() - 0.5 * (q / v + self.dim as f64 * (LN_2PI + v.ln()))
            })
            .collect()
    }

    pub fn log_density_at(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let terms = self.component_log_terms(x);
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms.iter().map(|t| (t - m).exp()).sum();
        Ok((m + sum.ln()).max(LOG_FLOOR))
    }

    pub fn density_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_density_at(x)?.exp())
    }

    /// Exact score of the mixture: sum of posterior responsibilities times
    /// the per-component Gaussian scores (mu_i - x)/s_i^2.
    pub fn score_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let terms = self.component_log_terms(x);
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = terms.iter().map(|t| (t - m).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut score = vec![0.0; self.dim];
        for (c, w) in self.components.iter().zip(&weights) {
            let r = w / total;
            let v = c.std * c.std;
            for (s, (xi, mi)) in score.iter_mut().zip(x.iter().zip(&c.mean)) {
                *s += r * (mi - xi) / v;
            }
        }
        Ok(score)
    }

    /// The mixture diffused to time t: component means scale by a_t and the
    /// component variance becomes a_t^2 s^2 + b_t^2; weights are unchanged.
    pub fn diffused(&self, schedule: &NoiseSchedule, t: f64) -> Result<Self> {
        let (a, b) = schedule.marginal_coeffs(t)?;
        let components = self
            .components
            .iter()
            .map(|c| MixtureComponent {
                weight: c.weight,
                mean: c.mean.iter().map(|m| a * m).collect(),
                std: (a * a * c.std * c.std + b * b).sqrt(),
            })
            .collect();
        MixtureDensity::new(components)
    }

    /// Marginal flow velocity E[eps - x0 | z_t = z] of the interpolant
    /// z_t = a_t x0 + b_t eps, in closed form via posterior responsibilities.
    pub fn velocity_at(&self, schedule: &NoiseSchedule, t: f64, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        if schedule.kind != ScheduleKind::Rf {
            return Err(SgError::Domain("velocity_at expects an RF schedule".into()));
        }
        let (a, b) = schedule.marginal_coeffs(t)?;
        let diffused = self.diffused(schedule, t)?;
        let terms = diffused.component_log_terms(z);
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = terms.iter().map(|t| (t - m).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut vel = vec![0.0; self.dim];
        for ((c, dc), w) in self.components.iter().zip(diffused.components()).zip(&weights) {
            let r = w / total;
            let v = dc.std * dc.std;
            for k in 0..self.dim {
                let centered = z[k] - a * c.mean[k];
                // E[x0 | z, comp] and E[eps | z, comp] for one Gaussian component
                let x0_hat = c.mean[k] + a * c.std * c.std * centered / v;
                let eps_hat = b * centered / v;
                vel[k] += r * (eps_hat - x0_hat);
            }
        }
        Ok(vel)
    }

    /// Draw n samples; rows of the returned matrix are samples.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Matrix {
        self.sample_with_labels(rng, n).0
    }

    /// Draw n samples along with the index of the component each came from.
    pub fn sample_with_labels<R: Rng>(&self, rng: &mut R, n: usize) -> (Matrix, Vec<usize>) {
        let mut out = Matrix::zeros(n, self.dim);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let mut u: f64 = rng.gen();
            let mut idx = self.components.len() - 1;
            for (j, c) in self.components.iter().enumerate() {
                if u < c.weight {
                    idx = j;
                    break;
                }
                u -= c.weight;
            }
            let c = &self.components[idx];
            let row = out.row_mut(i);
            for (k, slot) in row.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(rng);
                *slot = c.mean[k] + c.std * z;
            }
            labels.push(idx);
        }
        (out, labels)
    }
}
