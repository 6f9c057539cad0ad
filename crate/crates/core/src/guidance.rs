//! Guided score composition: classifier-free guidance, self-guidance against
//! a noisier time level, and the previous-step reuse variant that costs no
//! extra model call.

use crate::error::{Result, SgError};
use crate::field::{Condition, ScoreField};
use crate::matrix::Matrix;
use crate::schedule::NoiseSchedule;

/// How the self-guidance reference level is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftSchedule {
    /// Fixed shift in diffusion-time steps (delta = steps / discretization).
    Constant { steps: f64 },
    /// delta(t) = t / sigma_divisor, shrinking toward zero with t.
    Dynamic { sigma_divisor: f64 },
    /// Reuse the previous sampler step's conditional output.
    Prev,
}

/// Ordered guidance configuration applied at every sampler step.
#[derive(Debug, Clone)]
pub struct GuidanceStack {
    pub omega_cfg: f64,
    pub omega_sg: f64,
    /// Carried for parity with the combined-guidance update rule; must stay
    /// zero because the perturbed-attention forward pass has no analogue in
    /// this model family.
    pub omega_pag: f64,
    pub shift: ShiftSchedule,
    /// Diffusion-time threshold (e.g. 500 of 1000) below which the
    /// previous-step output replaces the shifted-time evaluation.
    pub sg_prev_threshold: f64,
    /// Opt-in hybrid: with a Constant/Dynamic shift, use the cached
    /// previous-step output below the threshold and the shifted-time call
    /// above it.
    pub sg_prev_below_threshold: bool,
    pub condition: Condition,
}

impl Default for GuidanceStack {
    fn default() -> Self {
        GuidanceStack {
            omega_cfg: 0.0,
            omega_sg: 0.0,
            omega_pag: 0.0,
            shift: ShiftSchedule::Constant { steps: 10.0 },
            sg_prev_threshold: 500.0,
            sg_prev_below_threshold: false,
            condition: Condition::Empty,
        }
    }
}

impl GuidanceStack {
    pub fn validate(&self) -> Result<()> {
        if self.omega_pag != 0.0 {
            return Err(SgError::Config(
                "PAG requires attention perturbation — out of scope".into(),
            ));
        }
        if self.omega_cfg < 0.0 || self.omega_sg < 0.0 {
            return Err(SgError::Config("guidance scales must be >= 0".into()));
        }
        match self.shift {
            ShiftSchedule::Constant { steps } if steps < 0.0 => {
                return Err(SgError::Config(format!("constant shift steps {steps} must be >= 0")))
            }
            ShiftSchedule::Dynamic { sigma_divisor } if sigma_divisor <= 0.0 => {
                return Err(SgError::Config(format!(
                    "dynamic shift divisor {sigma_divisor} must be > 0"
                )))
            }
            _ => {}
        }
        if self.sg_prev_threshold < 0.0 {
            return Err(SgError::Config("sg_prev_threshold must be >= 0".into()));
        }
        Ok(())
    }

    /// Continuous shift delta(t), clamped so t + delta never exceeds 1.
    pub fn shift_delta(&self, t: f64, schedule: &NoiseSchedule) -> f64 {
        let raw = match self.shift {
            ShiftSchedule::Constant { steps } => schedule.steps_to_time(steps),
            ShiftSchedule::Dynamic { sigma_divisor } => t / sigma_divisor,
            ShiftSchedule::Prev => 0.0,
        };
        raw.min((1.0 - t).max(0.0))
    }

    pub fn threshold_time(&self, schedule: &NoiseSchedule) -> f64 {
        schedule.steps_to_time(self.sg_prev_threshold)
    }

    /// True when the self-guidance term at time t reuses the cache instead
    /// of an extra shifted-time model call.
    fn prev_mode_at(&self, t: f64, schedule: &NoiseSchedule) -> bool {
        match self.shift {
            ShiftSchedule::Prev => true,
            _ => self.sg_prev_below_threshold && t < self.threshold_time(schedule),
        }
    }

    /// Model calls one `stack_apply` at time t will make.
    pub fn model_calls_at(&self, t: f64, schedule: &NoiseSchedule) -> u32 {
        let mut calls = 1;
        if self.omega_cfg > 0.0 {
            calls += 1;
        }
        if self.omega_sg > 0.0 && !self.prev_mode_at(t, schedule) {
            calls += 1;
        }
        calls
    }
}

/// Previous-step state threaded through a sampling chain.
#[derive(Debug, Clone)]
pub struct StepCache {
    x_prev: Vec<f64>,
    output_prev: Vec<f64>,
    t_prev: f64,
    valid: bool,
}

impl StepCache {
    /// Cache at chain start: invalid until one step completes.
    pub fn empty() -> Self {
        StepCache { x_prev: Vec::new(), output_prev: Vec::new(), t_prev: f64::NAN, valid: false }
    }

    pub fn valid(&self) -> bool {
        self.valid
    }

    pub fn output(&self) -> &[f64] {
        &self.output_prev
    }

    pub fn x(&self) -> &[f64] {
        &self.x_prev
    }

    pub fn t(&self) -> f64 {
        self.t_prev
    }

    pub fn store(&mut self, x: &[f64], output: &[f64], t: f64) {
        self.x_prev = x.to_vec();
        self.output_prev = output.to_vec();
        self.t_prev = t;
        self.valid = true;
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(SgError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(())
}

/// Classifier-free guidance: s_uncond + omega (s_cond - s_uncond).
pub fn cfg_combine(s_cond: &[f64], s_uncond: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_dims(s_cond, s_uncond)?;
    Ok(s_cond
        .iter()
        .zip(s_uncond)
        .map(|(c, u)| u + omega * (c - u))
        .collect())
}

/// Self-guidance: s_t + omega (s_t - s_{t+delta}), i.e. (1+omega) s_t -
/// omega s_shifted written so equal inputs pass through exactly.
pub fn sg_combine(s_t: &[f64], s_shifted: &[f64], omega: f64) -> Result<Vec<f64>> {
    check_dims(s_t, s_shifted)?;
    Ok(s_t
        .iter()
        .zip(s_shifted)
        .map(|(a, b)| a + omega * (a - b))
        .collect())
}

/// Previous-step self-guidance with graceful fallback: before the cache is
/// valid, or while t is at or above the threshold, the score passes through.
pub fn sg_prev_combine(
    s_t: &[f64],
    cache: &StepCache,
    omega: f64,
    t: f64,
    threshold: f64,
) -> Vec<f64> {
    if !cache.valid || t >= threshold || cache.output_prev.len() != s_t.len() {
        return s_t.to_vec();
    }
    s_t.iter()
        .zip(&cache.output_prev)
        .map(|(a, b)| a + omega * (a - b))
        .collect()
}

/// One guided evaluation following the combined update rule
/// s* = s_empty + w_cfg (s_c - s_empty) + w_sg (s_c - s_ref), where the
/// reference is the shifted-time output or the cached previous output. The
/// refreshed cache always stores this step's raw conditional output.
pub fn stack_apply(
    field: &dyn ScoreField,
    stack: &GuidanceStack,
    x: &[f64],
    t: f64,
    cache: &StepCache,
    schedule: &NoiseSchedule,
) -> Result<(Vec<f64>, StepCache, u32)> {
    stack.validate()?;
    let mut calls = 1u32;
    let s_c = field.eval(x, t, stack.condition)?;
    let mut combined = if stack.omega_cfg > 0.0 {
        calls += 1;
        let s_u = field.eval(x, t, Condition::Empty)?;
        cfg_combine(&s_c, &s_u, stack.omega_cfg)?
    } else {
        s_c.clone()
    };
    if stack.omega_sg > 0.0 {
        if stack.prev_mode_at(t, schedule) {
            if cache.valid && t < stack.threshold_time(schedule) {
                for ((v, c), r) in combined.iter_mut().zip(&s_c).zip(cache.output()) {
                    *v += stack.omega_sg * (c - r);
                }
            }
        } else {
            let delta = stack.shift_delta(t, schedule);
            calls += 1;
            let s_ref = field.eval(x, t + delta, stack.condition)?;
            for ((v, c), r) in combined.iter_mut().zip(&s_c).zip(&s_ref) {
                *v += stack.omega_sg * (c - r);
            }
        }
    }
    let mut new_cache = StepCache::empty();
    new_cache.store(x, &s_c, t);
    Ok((combined, new_cache, calls))
}

/// Batched `stack_apply` over a shared time; row i of the output and
/// `caches[i]` match a per-row `stack_apply` bit for bit. Returns the calls
/// made per chain.
pub fn stack_apply_batch(
    field: &dyn ScoreField,
    stack: &GuidanceStack,
    xs: &Matrix,
    t: f64,
    caches: &mut [StepCache],
    schedule: &NoiseSchedule,
) -> Result<(Matrix, u32)> {
    stack.validate()?;
    let n = xs.rows();
    if caches.len() != n {
        return Err(SgError::Config(format!("{n} chains but {} caches", caches.len())));
    }
    let mut calls = 1u32;
    let s_c = field.eval_batch(xs, t, stack.condition)?;
    let mut combined = if stack.omega_cfg > 0.0 {
        calls += 1;
        let s_u = field.eval_batch(xs, t, Condition::Empty)?;
        let mut out = Matrix::zeros(n, field.dim());
        for i in 0..n {
            let row = cfg_combine(s_c.row(i), s_u.row(i), stack.omega_cfg)?;
            out.row_mut(i).copy_from_slice(&row);
        }
        out
    } else {
        s_c.clone()
    };
    if stack.omega_sg > 0.0 {
        if stack.prev_mode_at(t, schedule) {
            let threshold = stack.threshold_time(schedule);
            for i in 0..n {
                if caches[i].valid && t < threshold {
                    let cache_out = caches[i].output_prev.clone();
                    for ((v, c), r) in combined
                        .row_mut(i)
                        .iter_mut()
                        .zip(s_c.row(i))
                        .zip(&cache_out)
                    {
                        *v += stack.omega_sg * (c - r);
                    }
                }
            }
        } else {
            let delta = stack.shift_delta(t, schedule);
            calls += 1;
            let s_ref = field.eval_batch(xs, t + delta, stack.condition)?;
            for i in 0..n {
                for ((v, c), r) in combined
                    .row_mut(i)
                    .iter_mut()
                    .zip(s_c.row(i))
                    .zip(s_ref.row(i))
                {
                    *v += stack.omega_sg * (c - r);
                }
            }
        }
    }
    for i in 0..n {
        caches[i].store(xs.row(i), s_c.row(i), t);
    }
    Ok((combined, calls))
}
