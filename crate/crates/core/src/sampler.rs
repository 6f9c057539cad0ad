//! Reverse-time generation: the guided SDE step, plain Euler for flow
//! velocities, a deterministic DDIM update, and the chain runner that
//! threads the per-chain guidance cache.

use crate::error::{Result, SgError};
use crate::field::ScoreField;
use crate::guidance::{stack_apply_batch, GuidanceStack, StepCache};
use crate::matrix::Matrix;
use crate::schedule::{NoiseSchedule, T_EPS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Sde,
    Ode,
    Ddim,
}

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    pub steps: usize,
    /// Stochasticity of the reverse SDE; 0 reduces to the probability-flow
    /// drift.
    pub tau: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub seed: u64,
    pub store_trajectory: bool,
    /// Record chain states when the grid passes closest to these times.
    pub snapshot_times: Vec<f64>,
}

impl SamplerConfig {
    pub fn new(kind: SamplerKind) -> Self {
        let steps = match kind {
            SamplerKind::Ddim => 50,
            SamplerKind::Ode => 28,
            SamplerKind::Sde => 200,
        };
        SamplerConfig {
            kind,
            steps,
            tau: 1.0,
            t_start: 1.0,
            t_end: T_EPS,
            seed: 0,
            store_trajectory: false,
            snapshot_times: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(SgError::Config("sampler.steps must be at least 1".into()));
        }
        if self.tau < 0.0 {
            return Err(SgError::Config("sampler.tau must be >= 0".into()));
        }
        if !(self.t_start > self.t_end) || !(0.0..=1.0).contains(&self.t_start) || self.t_end < 0.0
        {
            return Err(SgError::Config(format!(
                "sampler times must satisfy 0 <= t_end < t_start <= 1, got [{}, {}]",
                self.t_end, self.t_start
            )));
        }
        Ok(())
    }

    /// Decreasing time grid with steps+1 points from t_start to t_end.
    pub fn time_grid(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|k| {
                self.t_start + (self.t_end - self.t_start) * k as f64 / self.steps as f64
            })
            .collect()
    }
}

/// One explicit step of the guided reverse SDE
/// dx = {F - (1 + tau^2)/2 G^2 s} dt + tau G dW, with dt < 0.
pub fn euler_maruyama_step<R: rand::Rng>(
    x: &[f64],
    t: f64,
    dt: f64,
    score: &[f64],
    schedule: &NoiseSchedule,
    tau: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if score.iter().any(|s| !s.is_finite()) {
        return Err(SgError::NonFinite("score passed to euler_maruyama_step".into()));
    }
    let (drift, g) = schedule.vp_drift_diffusion(x, t)?;
    let noise_scale = tau * g * dt.abs().sqrt();
    let factor = 0.5 * (1.0 + tau * tau) * g * g;
    Ok(x.iter()
        .zip(&drift)
        .zip(score)
        .map(|((xi, fi), si)| {
            let noise: f64 = if tau > 0.0 { StandardNormal.sample(rng) } else { 0.0 };
            xi + (fi - factor * si) * dt + noise_scale * noise
        })
        .collect())
}

/// Plain Euler step of dz/dt = v(z, t).
pub fn ode_euler_step(z: &[f64], _t: f64, dt: f64, velocity: &[f64]) -> Result<Vec<f64>> {
    if velocity.iter().any(|v| !v.is_finite()) {
        return Err(SgError::NonFinite("velocity passed to ode_euler_step".into()));
    }
    if z.len() != velocity.len() {
        return Err(SgError::DimensionMismatch { expected: z.len(), got: velocity.len() });
    }
    Ok(z.iter().zip(velocity).map(|(zi, vi)| zi + vi * dt).collect())
}

/// Deterministic DDIM update through the denoised estimate
/// x0_hat = (x + sigma_t^2 s) / alpha_t.
pub fn ddim_step(
    x: &[f64],
    t: f64,
    t_next: f64,
    score: &[f64],
    schedule: &NoiseSchedule,
) -> Result<Vec<f64>> {
    if score.iter().any(|s| !s.is_finite()) {
        return Err(SgError::NonFinite("score passed to ddim_step".into()));
    }
    if t_next > t {
        return Err(SgError::Domain(format!("ddim requires t_next <= t, got {t_next} > {t}")));
    }
    let (alpha, sigma) = schedule.vp_alpha_sigma(t)?;
    if sigma == 0.0 {
        return Err(SgError::Domain("ddim undefined at t=0 where sigma vanishes".into()));
    }
    let (alpha_next, sigma_next) = schedule.vp_alpha_sigma(t_next)?;
    Ok(x.iter()
        .zip(score)
        .map(|(xi, si)| {
            let x0_hat = (xi + sigma * sigma * si) / alpha;
            alpha_next * x0_hat + sigma_next * (xi - alpha * x0_hat) / sigma
        })
        .collect())
}

/// Completed sampling run: endpoint samples, optional stored states, model
/// call and wall-time ledgers.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub samples: Matrix,
    /// Chain states after 0..=steps steps when trajectory storage is on.
    pub trajectory: Option<Vec<Matrix>>,
    /// Snapshot states at the grid times nearest each requested time.
    pub snapshots: Vec<(f64, Matrix)>,
    /// Model calls per chain at each step.
    pub calls_per_step: Vec<u32>,
    /// Wall-clock seconds spent per step (summed over chain blocks).
    pub step_wall_seconds: Vec<f64>,
    pub seed: u64,
}

impl SampleRun {
    pub fn total_calls_per_chain(&self) -> u64 {
        self.calls_per_step.iter().map(|&c| c as u64).sum()
    }

    pub fn total_wall_seconds(&self) -> f64 {
        self.step_wall_seconds.iter().sum()
    }
}

const CHAIN_BLOCK: usize = 8192;

/// Draw n chains from the standard-normal prior and run them through the
/// guided sampler. Chains own independent RNG streams keyed by (seed, chain
/// index), so results do not depend on block scheduling.
pub fn run_chain(
    field: &dyn ScoreField,
    stack: &GuidanceStack,
    config: &SamplerConfig,
    n: usize,
    schedule: &NoiseSchedule,
) -> Result<SampleRun> {
    config.validate()?;
    stack.validate()?;
    let d = field.dim();
    let grid = config.time_grid();
    let steps = config.steps;

    // nearest grid index per requested snapshot time
    let mut snapshot_idx: Vec<(usize, f64)> = config
        .snapshot_times
        .iter()
        .map(|&want| {
            let (mut best_k, mut best_d) = (0usize, f64::INFINITY);
            for (k, &tk) in grid.iter().enumerate() {
                let dist = (tk - want).abs();
                if dist < best_d {
                    best_d = dist;
                    best_k = k;
                }
            }
            (best_k, grid[best_k])
        })
        .collect();
    snapshot_idx.sort_by_key(|&(k, _)| k);

    let mut samples = Matrix::zeros(n, d);
    let mut trajectory: Option<Vec<Matrix>> = if config.store_trajectory {
        Some((0..=steps).map(|_| Matrix::zeros(n, d)).collect())
    } else {
        None
    };
    let mut snapshots: Vec<(f64, Matrix)> =
        snapshot_idx.iter().map(|&(_, t)| (t, Matrix::zeros(n, d))).collect();
    let mut calls_per_step: Vec<u32> = vec![0; steps];
    let mut step_wall = vec![0.0f64; steps];

    let mut block_start = 0usize;
    while block_start < n {
        let block = (n - block_start).min(CHAIN_BLOCK);
        let mut xs = Matrix::zeros(block, d);
        let mut rngs: Vec<ChaCha8Rng> = (0..block)
            .map(|i| {
                let mut r = ChaCha8Rng::seed_from_u64(config.seed);
                r.set_stream((block_start + i) as u64 + 1);
                r
            })
            .collect();
        for (i, rng) in rngs.iter_mut().enumerate() {
            for v in xs.row_mut(i) {
                *v = StandardNormal.sample(rng);
            }
        }
        let mut caches = vec![StepCache::empty(); block];

        if let Some(traj) = trajectory.as_mut() {
            for i in 0..block {
                traj[0].row_mut(block_start + i).copy_from_slice(xs.row(i));
            }
        }
        for (si, &(k, _)) in snapshot_idx.iter().enumerate() {
            if k == 0 {
                for i in 0..block {
                    snapshots[si].1.row_mut(block_start + i).copy_from_slice(xs.row(i));
                }
            }
        }

        for k in 0..steps {
            let t = grid[k];
            let t_next = grid[k + 1];
            let dt = t_next - t;
            let started = Instant::now();
            let (guided, calls) =
                stack_apply_batch(field, stack, &xs, t, &mut caches, schedule)?;
            let mut next = Matrix::zeros(block, d);
            for i in 0..block {
                let row = match config.kind {
                    SamplerKind::Sde => euler_maruyama_step(
                        xs.row(i),
                        t,
                        dt,
                        guided.row(i),
                        schedule,
                        config.tau,
                        &mut rngs[i],
                    )?,
                    SamplerKind::Ode => ode_euler_step(xs.row(i), t, dt, guided.row(i))?,
                    SamplerKind::Ddim => ddim_step(xs.row(i), t, t_next, guided.row(i), schedule)?,
                };
                next.row_mut(i).copy_from_slice(&row);
            }
            step_wall[k] += started.elapsed().as_secs_f64();
            if !next.is_finite() {
                return Err(SgError::NonFinite(format!(
                    "chain state diverged at step {k} (t={t:.4})"
                )));
            }
            xs = next;
            if calls_per_step[k] == 0 {
                calls_per_step[k] = calls;
            } else if calls_per_step[k] != calls {
                return Err(SgError::Config(format!(
                    "inconsistent call count at step {k}: {} vs {calls}",
                    calls_per_step[k]
                )));
            }
            if let Some(traj) = trajectory.as_mut() {
                for i in 0..block {
                    traj[k + 1].row_mut(block_start + i).copy_from_slice(xs.row(i));
                }
            }
            for (si, &(snap_k, _)) in snapshot_idx.iter().enumerate() {
                if snap_k == k + 1 {
                    for i in 0..block {
                        snapshots[si].1.row_mut(block_start + i).copy_from_slice(xs.row(i));
                    }
                }
            }
        }
        for i in 0..block {
            samples.row_mut(block_start + i).copy_from_slice(xs.row(i));
        }
        block_start += block;
    }

    if n == 0 {
        // still report the per-step call law for an empty run
        for (k, slot) in calls_per_step.iter_mut().enumerate() {
            *slot = stack.model_calls_at(grid[k], schedule);
        }
    }

    Ok(SampleRun {
        samples,
        trajectory,
        snapshots,
        calls_per_step,
        step_wall_seconds: step_wall,
        seed: config.seed,
    })
}
