//! Forward diffusion processes and their time-dependent coefficients.
//!
//! Two families are supported: the variance-preserving SDE with a linear
//! beta(t), whose marginal satisfies `alpha_t^2 + sigma_t^2 = 1`, and the
//! rectified-flow interpolation `z_t = (1-t) x0 + t eps`. Continuous time is
//! normalized to [0, 1]; integer "diffusion time" units (shift scales,
//! thresholds quoted out of e.g. 1000 steps) convert by dividing by
//! `discretization_steps`.

use crate::error::{Result, SgError};

/// Clamp applied to training and sampling times to stay clear of the
/// endpoint singularities of the rectified-flow coefficients.
pub const T_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Vp,
    Rf,
}

/// A forward diffusion process with all coefficients other modules need.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSchedule {
    pub kind: ScheduleKind,
    pub beta_min: f64,
    pub beta_max: f64,
    /// Continuous time horizon; normalized to 1.0.
    pub t_max: f64,
    /// Integer "total diffusion time" used to convert step-valued quantities
    /// (shift scales, thresholds) to continuous time.
    pub discretization_steps: u32,
}

impl NoiseSchedule {
    /// Variance-preserving schedule with the common linear-beta parametrization.
    pub fn vp(beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(beta_min > 0.0) || !(beta_max > 0.0) {
            return Err(SgError::Config(format!(
                "VP betas must be positive, got beta_min={beta_min}, beta_max={beta_max}"
            )));
        }
        if beta_max < beta_min {
            return Err(SgError::Config(format!(
                "beta_max ({beta_max}) must be >= beta_min ({beta_min})"
            )));
        }
        Ok(NoiseSchedule {
            kind: ScheduleKind::Vp,
            beta_min,
            beta_max,
            t_max: 1.0,
            discretization_steps: 1000,
        })
    }

    /// Default VP schedule: linear beta in [0.1, 20].
    pub fn vp_default() -> Self {
        NoiseSchedule::vp(0.1, 20.0).expect("default betas are valid")
    }

    /// Rectified-flow interpolation schedule, a_t = 1-t, b_t = t.
    pub fn rf() -> Self {
        NoiseSchedule {
            kind: ScheduleKind::Rf,
            beta_min: 0.0,
            beta_max: 0.0,
            t_max: 1.0,
            discretization_steps: 1000,
        }
    }

    pub fn with_discretization_steps(mut self, steps: u32) -> Self {
        self.discretization_steps = steps.max(1);
        self
    }

    /// Convert an integer diffusion-time quantity (e.g. a shift of 10 out of
    /// 1000) to continuous time.
    pub fn steps_to_time(&self, steps: f64) -> f64 {
        steps / self.discretization_steps as f64
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(SgError::Domain(format!(
                "t={t} outside [0, {}]",
                self.t_max
            )));
        }
        Ok(())
    }

    /// beta(t), linear between beta_min and beta_max.
    pub fn beta(&self, t: f64) -> f64 {
        self.beta_min + t * (self.beta_max - self.beta_min)
    }

    /// The integral of beta over [0, t]; exact for the linear parametrization.
    pub fn beta_integral(&self, t: f64) -> f64 {
        self.beta_min * t + 0.5 * (self.beta_max - self.beta_min) * t * t
    }

    /// Marginal coefficients of the VP SDE: `alpha_t = exp(-0.5 int beta)`,
    /// `sigma_t = sqrt(1 - alpha_t^2)`.
    pub fn vp_alpha_sigma(&self, t: f64) -> Result<(f64, f64)> {
        if self.kind != ScheduleKind::Vp {
            return Err(SgError::Domain(
                "vp_alpha_sigma requires a VP schedule".into(),
            ));
        }
        self.check_time(t)?;
        let alpha = (-0.5 * self.beta_integral(t)).exp();
        let sigma = (1.0 - alpha * alpha).max(0.0).sqrt();
        Ok((alpha, sigma))
    }

    /// Drift and diffusion of the VP forward SDE: F = -beta(t) x / 2,
    /// G = sqrt(beta(t)).
    pub fn vp_drift_diffusion(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
        if self.kind != ScheduleKind::Vp {
            return Err(SgError::Domain(
                "vp_drift_diffusion requires a VP schedule".into(),
            ));
        }
        self.check_time(t)?;
        let b = self.beta(t);
        let drift = x.iter().map(|&xi| -0.5 * b * xi).collect();
        Ok((drift, b.sqrt()))
    }

    /// Interpolant coefficients (a_t, b_t) of the marginal
    /// `z_t = a_t x0 + b_t eps` for this schedule.
    pub fn marginal_coeffs(&self, t: f64) -> Result<(f64, f64)> {
        match self.kind {
            ScheduleKind::Vp => self.vp_alpha_sigma(t),
            ScheduleKind::Rf => {
                self.check_time(t)?;
                Ok((1.0 - t, t))
            }
        }
    }

    /// Log signal-to-noise ratio `lambda_t = log(a_t^2 / b_t^2)` and its
    /// time derivative `lambda'_t = 2 (a'_t/a_t - b'_t/b_t)`.
    ///
    /// The endpoints are singular: RF has b_0 = 0 and a_1 = 0, VP has
    /// sigma_0 = 0; those times are rejected rather than returning infinity.
    pub fn snr_lambda(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        match self.kind {
            ScheduleKind::Rf => {
                if t <= 0.0 {
                    return Err(SgError::Domain(
                        "snr undefined at t=0: b_t = t is zero".into(),
                    ));
                }
                if t >= 1.0 {
                    return Err(SgError::Domain(
                        "snr undefined at t=1: a_t = 1-t is zero".into(),
                    ));
                }
                let a = 1.0 - t;
                let b = t;
                let lambda = (a * a / (b * b)).ln();
                // a' = -1, b' = 1
                let lambda_prime = 2.0 * (-1.0 / a - 1.0 / b);
                Ok((lambda, lambda_prime))
            }
            ScheduleKind::Vp => {
                if t <= 0.0 {
                    return Err(SgError::Domain(
                        "snr undefined at t=0: sigma_t is zero".into(),
                    ));
                }
                let (alpha, sigma) = self.vp_alpha_sigma(t)?;
                let lambda = (alpha * alpha / (sigma * sigma)).ln();
                // alpha'/alpha = -beta/2; sigma'/sigma = beta alpha^2 / (2 sigma^2)
                let b = self.beta(t);
                let lambda_prime = -b / (sigma * sigma);
                Ok((lambda, lambda_prime))
            }
        }
    }

    /// d(sigma_t^2)/dt of the VP marginal. This is the effective squared
    /// noise-scaling of the variance-expansion smoothing family used by the
    /// heat-equation diagnostics.
    pub fn vp_variance_rate(&self, t: f64) -> Result<f64> {
        let (alpha, _) = self.vp_alpha_sigma(t)?;
        Ok(self.beta(t) * alpha * alpha)
    }
}

/// Rectified-flow interpolant `(1-t) x0 + t eps`.
pub fn rf_interpolant(x0: &[f64], eps: &[f64], t: f64) -> Result<Vec<f64>> {
    if x0.len() != eps.len() {
        return Err(SgError::DimensionMismatch {
            expected: x0.len(),
            got: eps.len(),
        });
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(SgError::Domain(format!("t={t} outside [0, 1]")));
    }
    Ok(x0
        .iter()
        .zip(eps)
        .map(|(&x, &e)| (1.0 - t) * x + t * e)
        .collect())
}
